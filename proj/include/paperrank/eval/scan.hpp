#pragma once

#include <algorithm>
#include <cstdio>
#include <string>
#include <vector>

#include "paperrank/error.hpp"
#include "paperrank/eval/metrics.hpp"
#include "paperrank/lda/online_vb.hpp"

namespace paperrank::eval {

struct ScanRow {
  std::size_t num_topics = 0;
  std::size_t passes = 0;
  std::size_t iters = 0;
  double coherence = 0.0;
  double log_perplexity = 0.0;
};

struct ScanGridPoint {
  std::size_t passes = 0;
  std::size_t iters = 0;
};

/// Trains one model per (K, grid point) with the base schedule's seed and
/// reports UMass coherence (top `topn` words, on the training corpus) and
/// held-out log perplexity. Rows are sorted by (K, passes, iters).
inline std::vector<ScanRow> metric_scan(const std::vector<BagOfWords>& train, const std::vector<BagOfWords>& heldout,
                                        const std::vector<std::size_t>& topic_counts,
                                        const std::vector<ScanGridPoint>& grid, const lda::TrainSchedule& base,
                                        std::size_t vocab_size = 0, std::size_t topn = 10) {
  if (train.empty()) throw ConfigError("metric_scan: empty corpus");
  std::vector<ScanRow> rows;
  for (std::size_t k : topic_counts) {
    for (const auto& g : grid) {
      lda::TrainSchedule s = base;
      s.passes = g.passes;
      s.e_step_iters = g.iters;
      try {
        auto model = lda::train_online(train, k, s, vocab_size);
        ScanRow row{k, g.passes, g.iters, umass_coherence(model, train, topn).mean,
                    log_perplexity(model, heldout.empty() ? train : heldout)};
        rows.push_back(row);
      } catch (const Error& e) {
        throw ConfigError("metric_scan: K=" + std::to_string(k) + " passes=" + std::to_string(g.passes) +
                          " iters=" + std::to_string(g.iters) + ": " + e.what());
      }
    }
  }
  std::sort(rows.begin(), rows.end(), [](const ScanRow& a, const ScanRow& b) {
    if (a.num_topics != b.num_topics) return a.num_topics < b.num_topics;
    if (a.passes != b.passes) return a.passes < b.passes;
    return a.iters < b.iters;
  });
  return rows;
}

inline std::string scan_to_csv(const std::vector<ScanRow>& rows) {
  std::string out = "K,passes,iters,coherence,log_perplexity\n";
  char buf[160];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%zu,%zu,%zu,%.17g,%.17g\n", r.num_topics, r.passes, r.iters, r.coherence,
                  r.log_perplexity);
    out += buf;
  }
  return out;
}

}  // namespace paperrank::eval
