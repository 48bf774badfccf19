#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "paperrank/error.hpp"
#include "paperrank/lda/model.hpp"
#include "paperrank/lda/online_vb.hpp"
#include "paperrank/lda/random.hpp"
#include "paperrank/text/pipeline.hpp"

namespace paperrank::eval {

using lda::LdaModel;
using lda::TopicVector;
using text::BagOfWords;

// ---------------------------------------------------------------------------
// Perplexity

/// Per-word variational bound on held-out log likelihood (natural log).
///
/// Each document's topic proportions are inferred with lambda frozen; the
/// bound is then sum_w n_w log sum_k theta_k beta_kw over the point estimates
/// theta = gamma / sum(gamma) and beta = normalized lambda, divided by the
/// total word count. perplexity = exp(-bound).
inline double log_perplexity(const LdaModel& model, const std::vector<BagOfWords>& heldout) {
  std::uint64_t words = 0;
  for (const auto& d : heldout) words += d.total();
  if (words == 0) throw ConfigError("log_perplexity: held-out set has no words");

  const std::size_t K = model.num_topics();
  std::vector<std::vector<double>> beta(K);
  for (std::size_t k = 0; k < K; ++k) beta[k] = model.expected_beta(k);
  lda::ExpElogBeta eb(model);

  double total = 0.0;
  for (const auto& doc : heldout) {
    if (doc.empty()) continue;
    auto theta = lda::infer_theta(doc, model, eb);
    for (const auto& e : doc.entries) {
      double p = 0.0;
      for (std::size_t k = 0; k < K; ++k) p += theta[k] * beta[k][e.id];
      total += e.count * std::log(p);
    }
  }
  return total / static_cast<double>(words);
}

inline double perplexity(const LdaModel& model, const std::vector<BagOfWords>& heldout) {
  return std::exp(-log_perplexity(model, heldout));
}

// ---------------------------------------------------------------------------
// UMass coherence

struct CoherenceResult {
  std::vector<double> per_topic;
  double mean = 0.0;
  /// Pairs dropped because the conditioning word occurs in no document.
  std::size_t skipped_pairs = 0;
};

/// C(t) = sum_{i=2..n} sum_{j<i} log((D(w_i, w_j) + 1) / D(w_j)) over the
/// topic's n most probable words in descending order, D counting documents.
inline CoherenceResult umass_coherence_for(const std::vector<std::vector<std::uint32_t>>& topics,
                                           const std::vector<BagOfWords>& corpus) {
  if (corpus.empty()) throw ConfigError("umass_coherence: empty corpus");
  std::map<std::uint32_t, std::vector<std::uint32_t>> postings;
  for (const auto& t : topics)
    for (auto w : t) postings[w];
  for (std::uint32_t d = 0; d < corpus.size(); ++d)
    for (const auto& e : corpus[d].entries)
      if (auto it = postings.find(e.id); it != postings.end()) it->second.push_back(d);

  auto co_docs = [](const std::vector<std::uint32_t>& a, const std::vector<std::uint32_t>& b) {
    std::size_t i = 0, j = 0, n = 0;
    while (i < a.size() && j < b.size()) {
      if (a[i] < b[j]) ++i;
      else if (b[j] < a[i]) ++j;
      else ++n, ++i, ++j;
    }
    return n;
  };

  CoherenceResult r;
  for (const auto& words : topics) {
    double c = 0.0;
    for (std::size_t i = 1; i < words.size(); ++i) {
      for (std::size_t j = 0; j < i; ++j) {
        const auto& dj = postings[words[j]];
        if (dj.empty()) {
          ++r.skipped_pairs;
          continue;
        }
        double both = static_cast<double>(co_docs(postings[words[i]], dj));
        c += std::log((both + 1.0) / static_cast<double>(dj.size()));
      }
    }
    r.per_topic.push_back(c);
  }
  if (!r.per_topic.empty())
    r.mean = std::accumulate(r.per_topic.begin(), r.per_topic.end(), 0.0) / static_cast<double>(r.per_topic.size());
  return r;
}

inline CoherenceResult umass_coherence(const LdaModel& model, const std::vector<BagOfWords>& corpus,
                                       std::size_t topn) {
  if (topn < 2) throw ConfigError("umass_coherence: topn must be >= 2");
  std::vector<std::vector<std::uint32_t>> topics;
  for (std::size_t k = 0; k < model.num_topics(); ++k) {
    std::vector<std::uint32_t> ids;
    for (const auto& [id, p] : lda::top_word_ids(model, k, topn)) ids.push_back(id);
    topics.push_back(std::move(ids));
  }
  return umass_coherence_for(topics, corpus);
}

// ---------------------------------------------------------------------------
// Per-group topic-weight histograms

struct GroupTopicWeights {
  /// weights[k] holds topic k's weight for every document in the group.
  std::vector<std::vector<double>> weights;
  std::vector<double> mean;
  std::size_t count = 0;

  /// Topic with the largest mean weight; ties to the lowest index.
  std::size_t top_topic() const {
    return static_cast<std::size_t>(std::max_element(mean.begin(), mean.end()) - mean.begin());
  }
};

template <typename Label>
std::map<Label, GroupTopicWeights> dominant_topic_histogram(const std::vector<TopicVector>& thetas,
                                                            const std::vector<Label>& labels) {
  if (thetas.size() != labels.size()) throw ConfigError("dominant_topic_histogram: thetas and labels differ in length");
  std::map<Label, GroupTopicWeights> out;
  for (std::size_t d = 0; d < thetas.size(); ++d) {
    auto& g = out[labels[d]];
    if (g.weights.empty()) {
      g.weights.resize(thetas[d].size());
      g.mean.assign(thetas[d].size(), 0.0);
    }
    if (g.weights.size() != thetas[d].size()) throw ConfigError("dominant_topic_histogram: mixed topic counts");
    for (std::size_t k = 0; k < thetas[d].size(); ++k) {
      g.weights[k].push_back(thetas[d][k]);
      g.mean[k] += thetas[d][k];
    }
    ++g.count;
  }
  for (auto& [label, g] : out)
    for (auto& m : g.mean) m /= static_cast<double>(g.count);
  return out;
}

/// Counts of `values` in `bins` equal-width bins over [0, 1]; 1.0 lands in
/// the last bin.
inline std::vector<std::size_t> bin_unit_interval(std::span<const double> values, std::size_t bins) {
  if (bins == 0) throw ConfigError("bin_unit_interval: bins must be >= 1");
  std::vector<std::size_t> counts(bins, 0);
  for (double v : values) {
    auto b = static_cast<std::size_t>(std::clamp(v, 0.0, 1.0) * static_cast<double>(bins));
    ++counts[std::min(b, bins - 1)];
  }
  return counts;
}

// ---------------------------------------------------------------------------
// ROC

struct RocCurve {
  /// (false positive rate, true positive rate) from threshold +inf downwards.
  std::vector<std::pair<double, double>> points;
  double auc = 0.0;
};

/// One-vs-all ROC by thresholding a score. Every distinct score is a
/// threshold; equal scores enter together, giving a diagonal step.
inline RocCurve roc_one_vs_all(std::span<const double> scores, const std::vector<bool>& labels) {
  if (scores.size() != labels.size()) throw ConfigError("roc: scores and labels differ in length");
  const auto pos = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), true));
  const std::size_t neg = labels.size() - pos;
  if (pos == 0 || neg == 0) throw ConfigError("roc: need at least one positive and one negative label");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  RocCurve roc;
  roc.points.emplace_back(0.0, 0.0);
  std::size_t tp = 0, fp = 0;
  for (std::size_t i = 0; i < order.size();) {
    const double s = scores[order[i]];
    std::size_t j = i;
    for (; j < order.size() && scores[order[j]] == s; ++j) (labels[order[j]] ? tp : fp)++;
    roc.points.emplace_back(static_cast<double>(fp) / static_cast<double>(neg),
                            static_cast<double>(tp) / static_cast<double>(pos));
    i = j;
  }
  for (std::size_t i = 1; i < roc.points.size(); ++i) {
    const auto& [x0, y0] = roc.points[i - 1];
    const auto& [x1, y1] = roc.points[i];
    roc.auc += (x1 - x0) * (y0 + y1) * 0.5;
  }
  return roc;
}

// ---------------------------------------------------------------------------
// Pizza plots

struct PizzaPoint {
  std::string doc_id;
  std::size_t main_topic = 0;
  /// sum_i (w_i - 1/K)^2, in [0, 1 - 1/K].
  double radius = 0.0;
  /// Uniform in [main_topic, main_topic + 1) * 2pi/K.
  double angle = 0.0;
};

/// Evaluated as sum_i w_i (w_i - 1/K), equal to the squared distance for
/// w on the simplex; uniform and one-hot inputs come out exact.
inline double pizza_radius(const TopicVector& theta) {
  const double u = 1.0 / static_cast<double>(theta.size());
  double r = 0.0;
  for (double w : theta.weights()) r += w * (w - u);
  return std::max(r, 0.0);
}

inline std::vector<PizzaPoint> pizza_points(const std::vector<TopicVector>& thetas,
                                            const std::vector<std::string>& doc_ids, std::uint64_t seed) {
  if (!doc_ids.empty() && doc_ids.size() != thetas.size())
    throw ConfigError("pizza_points: ids and thetas differ in length");
  lda::Rng rng(seed);
  std::vector<PizzaPoint> out;
  out.reserve(thetas.size());
  for (std::size_t d = 0; d < thetas.size(); ++d) {
    const auto& t = thetas[d];
    PizzaPoint p;
    p.doc_id = doc_ids.empty() ? std::to_string(d) : doc_ids[d];
    p.main_topic = t.argmax();
    p.radius = pizza_radius(t);
    const double slice = 2.0 * M_PI / static_cast<double>(t.size());
    p.angle = (static_cast<double>(p.main_topic) + rng.uniform()) * slice;
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace paperrank::eval
