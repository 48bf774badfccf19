#pragma once

// Online variational Bayes for LDA: per-document fixed-point E-step and the
// stochastic natural-gradient update of the topic-word parameters.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <numeric>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "paperrank/error.hpp"
#include "paperrank/lda/model.hpp"
#include "paperrank/lda/random.hpp"
#include "paperrank/lda/special.hpp"
#include "paperrank/text/pipeline.hpp"

namespace paperrank::lda {

using text::BagOfWords;

/// exp(E_q[log beta]) for every topic/word, computed once per model state.
class ExpElogBeta {
 public:
  explicit ExpElogBeta(const LdaModel& model) : k_(model.num_topics()), v_(model.vocab_size()), data_(k_ * v_) {
    for (std::size_t k = 0; k < k_; ++k) {
      auto row = model.lambda_row(k);
      double psi_sum = digamma(std::accumulate(row.begin(), row.end(), 0.0));
      for (std::size_t w = 0; w < v_; ++w) data_[k * v_ + w] = std::exp(digamma(row[w]) - psi_sum);
    }
  }

  double operator()(std::size_t k, std::size_t w) const { return data_[k * v_ + w]; }
  std::size_t num_topics() const { return k_; }
  std::size_t vocab_size() const { return v_; }

 private:
  std::size_t k_;
  std::size_t v_;
  std::vector<double> data_;
};

struct EStepResult {
  std::vector<double> gamma;
  /// Expected counts n_w * phi_{wk}, laid out [k * unique + i] for the i-th
  /// entry of the bag.
  std::vector<double> stats;
  std::size_t iterations = 0;
  bool converged = false;

  double stat(std::size_t k, std::size_t i, std::size_t unique) const { return stats[k * unique + i]; }
};

/// Fixed point for one document:
///   phi_{wk}  ∝ exp(E[log theta_k]) exp(E[log beta_kw])
///   gamma_k   = alpha_k + sum_w n_w phi_{wk}
/// iterated until the mean |change| of gamma is below `tol` or `max_iters`
/// sweeps ran. An empty bag returns gamma = alpha.
inline EStepResult e_step(const BagOfWords& bow, const LdaModel& model, const ExpElogBeta& eb,
                          std::size_t max_iters, double tol) {
  const std::size_t K = model.num_topics();
  const std::size_t n = bow.entries.size();
  const auto& alpha = model.alpha();
  EStepResult r;
  r.gamma = alpha;
  if (n == 0) {
    r.converged = true;
    return r;
  }
  for (const auto& e : bow.entries)
    if (e.id >= model.vocab_size()) throw ConfigError("e_step: word id " + std::to_string(e.id) + " >= V");

  const double total = static_cast<double>(bow.total());
  for (std::size_t k = 0; k < K; ++k) r.gamma[k] = alpha[k] + total / static_cast<double>(K);

  std::vector<double> exp_elog_theta(K);
  std::vector<double> phinorm(n);
  std::vector<double> next(K);
  auto refresh_theta = [&] {
    double psi_sum = digamma(std::accumulate(r.gamma.begin(), r.gamma.end(), 0.0));
    for (std::size_t k = 0; k < K; ++k) exp_elog_theta[k] = std::exp(digamma(r.gamma[k]) - psi_sum);
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::size_t k = 0; k < K; ++k) s += exp_elog_theta[k] * eb(k, bow.entries[i].id);
      phinorm[i] = s + 1e-100;
    }
  };

  refresh_theta();
  for (std::size_t it = 0; it < max_iters; ++it) {
    for (std::size_t k = 0; k < K; ++k) {
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) acc += bow.entries[i].count / phinorm[i] * eb(k, bow.entries[i].id);
      next[k] = alpha[k] + exp_elog_theta[k] * acc;
    }
    double change = 0.0;
    for (std::size_t k = 0; k < K; ++k) change += std::abs(next[k] - r.gamma[k]);
    r.gamma.swap(next);
    refresh_theta();
    r.iterations = it + 1;
    if (change / static_cast<double>(K) < tol) {
      r.converged = true;
      break;
    }
  }

  r.stats.assign(K * n, 0.0);
  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t i = 0; i < n; ++i)
      r.stats[k * n + i] = exp_elog_theta[k] * bow.entries[i].count / phinorm[i] * eb(k, bow.entries[i].id);
  return r;
}

inline EStepResult e_step(const BagOfWords& bow, const LdaModel& model) {
  ExpElogBeta eb(model);
  return e_step(bow, model, eb, model.schedule().e_step_iters, model.schedule().e_step_tol);
}

/// Normalized gamma of the E-step with lambda frozen. An empty bag yields
/// the prior mean alpha / sum(alpha).
inline TopicVector infer_theta(const BagOfWords& bow, const LdaModel& model, const ExpElogBeta& eb) {
  auto r = e_step(bow, model, eb, model.schedule().e_step_iters, model.schedule().e_step_tol);
  return TopicVector::normalized(r.gamma);
}

inline TopicVector infer_theta(const BagOfWords& bow, const LdaModel& model) {
  ExpElogBeta eb(model);
  return infer_theta(bow, model, eb);
}

inline std::vector<TopicVector> infer_thetas(const std::vector<BagOfWords>& docs, const LdaModel& model) {
  ExpElogBeta eb(model);
  std::vector<TopicVector> out;
  out.reserve(docs.size());
  for (const auto& d : docs) out.push_back(infer_theta(d, model, eb));
  return out;
}

/// Called after each full pass with the 1-based pass number.
using PassObserver = std::function<void(std::size_t pass, const LdaModel&)>;

namespace detail {

// E-step over docs[idx[begin..end)] accumulating n_w*phi into a dense K x V
// buffer.
inline void accumulate_stats(const std::vector<BagOfWords>& docs, const std::vector<std::size_t>& idx,
                             std::size_t begin, std::size_t end, const LdaModel& model, const ExpElogBeta& eb,
                             std::vector<double>& sstats) {
  const std::size_t V = model.vocab_size();
  const auto& s = model.schedule();
  for (std::size_t j = begin; j < end; ++j) {
    const auto& bow = docs[idx[j]];
    auto r = e_step(bow, model, eb, s.e_step_iters, s.e_step_tol);
    const std::size_t n = bow.entries.size();
    for (std::size_t k = 0; k < model.num_topics(); ++k)
      for (std::size_t i = 0; i < n; ++i) sstats[k * V + bow.entries[i].id] += r.stats[k * n + i];
  }
}

}  // namespace detail

/// One stochastic update from a minibatch drawn from a corpus of
/// `corpus_size` documents:
///   lambda_hat = eta + (D / |batch|) * sstats
///   lambda     = (1 - rho_t) lambda + rho_t lambda_hat,  rho_t = (tau0 + t)^-kappa
inline void update_minibatch(LdaModel& model, const std::vector<BagOfWords>& docs, const std::vector<std::size_t>& idx,
                             std::size_t begin, std::size_t end, std::size_t corpus_size) {
  const std::size_t K = model.num_topics();
  const std::size_t V = model.vocab_size();
  const auto& s = model.schedule();
  ExpElogBeta eb(model);

  const std::size_t batch = end - begin;
  const unsigned threads = static_cast<unsigned>(std::min<std::size_t>(s.threads, batch));
  std::vector<std::vector<double>> partial(std::max(1u, threads), std::vector<double>(K * V, 0.0));
  if (threads <= 1) {
    detail::accumulate_stats(docs, idx, begin, end, model, eb, partial[0]);
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk = (batch + threads - 1) / threads;
    for (unsigned t = 0; t < threads; ++t) {
      std::size_t b = begin + t * chunk;
      std::size_t e = std::min(end, b + chunk);
      if (b >= e) break;
      pool.emplace_back([&, b, e, t] { detail::accumulate_stats(docs, idx, b, e, model, eb, partial[t]); });
    }
    for (auto& th : pool) th.join();
  }
  auto& sstats = partial[0];
  for (std::size_t t = 1; t < partial.size(); ++t)
    for (std::size_t x = 0; x < K * V; ++x) sstats[x] += partial[t][x];

  const std::uint64_t t = model.updates_seen() + 1;
  const double rho = learning_rate(s, t);
  const double scale = static_cast<double>(corpus_size) / static_cast<double>(batch);
  auto lambda = model.mutable_lambda();
  for (std::size_t x = 0; x < K * V; ++x) {
    double target = model.eta() + scale * sstats[x];
    lambda[x] = (1.0 - rho) * lambda[x] + rho * target;
  }
  model.set_updates_seen(t);
}

/// Runs `schedule.passes` sweeps of minibatch updates over the corpus,
/// starting from the Gamma(100, 1/100) initialization.
inline LdaModel train_online(const std::vector<BagOfWords>& corpus, std::size_t num_topics, std::vector<double> alpha,
                             double eta, const TrainSchedule& schedule, std::size_t vocab_size = 0,
                             const PassObserver& observer = {}) {
  schedule.validate();
  if (num_topics < 1) throw ConfigError("train_online: number of topics must be >= 1");
  if (corpus.empty()) throw ConfigError("train_online: empty corpus");
  if (alpha.empty()) alpha = LdaModel::default_alpha(num_topics);
  if (vocab_size == 0)
    for (const auto& d : corpus)
      for (const auto& e : d.entries) vocab_size = std::max<std::size_t>(vocab_size, e.id + 1);
  if (vocab_size == 0) throw ConfigError("train_online: corpus has no words");

  LdaModel model = LdaModel::initialize(num_topics, vocab_size, std::move(alpha), eta, schedule);
  Rng order_rng(schedule.seed ^ 0x9E3779B97F4A7C15ULL);
  std::vector<std::size_t> idx(corpus.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t pass = 1; pass <= schedule.passes; ++pass) {
    if (schedule.shuffle) order_rng.shuffle(idx);
    for (std::size_t b = 0; b < idx.size(); b += schedule.batch_size)
      update_minibatch(model, corpus, idx, b, std::min(idx.size(), b + schedule.batch_size), corpus.size());
    if (observer) observer(pass, model);
  }
  return model;
}

inline LdaModel train_online(const std::vector<BagOfWords>& corpus, std::size_t num_topics,
                             const TrainSchedule& schedule, std::size_t vocab_size = 0) {
  return train_online(corpus, num_topics, LdaModel::default_alpha(num_topics), LdaModel::default_eta(num_topics),
                      schedule, vocab_size);
}

/// The n most probable word ids of topic k with their probabilities;
/// ties go to the lower id.
inline std::vector<std::pair<std::uint32_t, double>> top_word_ids(const LdaModel& model, std::size_t k,
                                                                  std::size_t n) {
  if (k >= model.num_topics()) throw ConfigError("top_words: topic " + std::to_string(k) + " out of range");
  auto beta = model.expected_beta(k);
  std::vector<std::uint32_t> ids(beta.size());
  std::iota(ids.begin(), ids.end(), 0u);
  n = std::min(n, ids.size());
  std::partial_sort(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(n), ids.end(),
                    [&](std::uint32_t a, std::uint32_t b) { return beta[a] != beta[b] ? beta[a] > beta[b] : a < b; });
  std::vector<std::pair<std::uint32_t, double>> out;
  for (std::size_t i = 0; i < n; ++i) out.emplace_back(ids[i], beta[ids[i]]);
  return out;
}

/// Top-n tokens of topic k; ties broken lexicographically by token.
inline std::vector<std::pair<std::string, double>> top_words(const LdaModel& model, const text::Dictionary& dict,
                                                             std::size_t k, std::size_t n) {
  if (k >= model.num_topics()) throw ConfigError("top_words: topic " + std::to_string(k) + " out of range");
  if (dict.size() != model.vocab_size()) throw ConfigError("top_words: dictionary does not match the model");
  auto beta = model.expected_beta(k);
  std::vector<std::uint32_t> ids(beta.size());
  std::iota(ids.begin(), ids.end(), 0u);
  n = std::min(n, ids.size());
  std::partial_sort(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(n), ids.end(),
                    [&](std::uint32_t a, std::uint32_t b) {
                      return beta[a] != beta[b] ? beta[a] > beta[b] : dict.token(a) < dict.token(b);
                    });
  std::vector<std::pair<std::string, double>> out;
  for (std::size_t i = 0; i < n; ++i) out.emplace_back(dict.token(ids[i]), beta[ids[i]]);
  return out;
}

}  // namespace paperrank::lda
