#pragma once

#include <string>
#include <vector>

#include "paperrank/lda/model_io.hpp"
#include "paperrank/lda/online_vb.hpp"
#include "paperrank/paper.hpp"
#include "paperrank/text/pipeline.hpp"

namespace paperrank {

struct PreparedCorpus {
  text::Dictionary dictionary;
  std::vector<text::BagOfWords> bows;  // one per input record, same order
};

inline std::vector<std::vector<std::string>> tokenize_records(const std::vector<PaperRecord>& records,
                                                              const text::PipelineConfig& config) {
  std::vector<std::vector<std::string>> docs;
  docs.reserve(records.size());
  for (const auto& r : records) docs.push_back(text::preprocess(document_text(r), config));
  return docs;
}

/// Preprocess, build the filtered dictionary, and map every record to a bag.
inline PreparedCorpus prepare_corpus(const std::vector<PaperRecord>& records, const text::PipelineConfig& config) {
  auto docs = tokenize_records(records, config);
  PreparedCorpus out{text::build_dictionary(docs, config), {}};
  out.bows.reserve(docs.size());
  for (const auto& d : docs) out.bows.push_back(text::to_bow(d, out.dictionary));
  return out;
}

inline text::BagOfWords bag_for(const PaperRecord& rec, const lda::StoredModel& sm) {
  return text::to_bow(text::preprocess(document_text(rec), sm.pipeline), sm.dictionary);
}

/// Trains a model on `records` (already filtered to the category the model
/// will serve) with priors alpha = eta = 1/K.
inline lda::StoredModel train_model(const std::vector<PaperRecord>& records, std::size_t num_topics,
                                    const lda::TrainSchedule& schedule, const text::PipelineConfig& config,
                                    const std::string& category = {}) {
  auto prepared = prepare_corpus(records, config);
  auto model = lda::train_online(prepared.bows, num_topics, lda::LdaModel::default_alpha(num_topics),
                                 lda::LdaModel::default_eta(num_topics), schedule, prepared.dictionary.size());
  return lda::make_stored_model(std::move(model), std::move(prepared.dictionary), category, config);
}

}  // namespace paperrank
