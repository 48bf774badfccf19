#pragma once

// Everything except the HTTP layer, which pulls in cpp-httplib.

#include "paperrank/date.hpp"
#include "paperrank/error.hpp"
#include "paperrank/eval/metrics.hpp"
#include "paperrank/eval/scan.hpp"
#include "paperrank/ingest.hpp"
#include "paperrank/lda/model_io.hpp"
#include "paperrank/lda/online_vb.hpp"
#include "paperrank/lda/sampler.hpp"
#include "paperrank/ranking.hpp"
#include "paperrank/service/engine.hpp"
#include "paperrank/store/file_store.hpp"
#include "paperrank/text/pipeline.hpp"
#include "paperrank/training.hpp"
