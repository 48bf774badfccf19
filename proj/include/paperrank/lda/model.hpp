#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "paperrank/error.hpp"
#include "paperrank/lda/random.hpp"

namespace paperrank::lda {

/// A point on the K-simplex: non-negative weights summing to one.
class TopicVector {
 public:
  TopicVector() = default;

  /// Normalizes `raw` (non-negative, positive sum).
  static TopicVector normalized(std::span<const double> raw) {
    double sum = 0.0;
    for (double x : raw) {
      if (!(x >= 0.0)) throw ValidationError("topic weights must be non-negative");
      sum += x;
    }
    if (!(sum > 0.0)) throw ValidationError("topic weights sum to zero");
    TopicVector t;
    t.weights_.reserve(raw.size());
    for (double x : raw) t.weights_.push_back(x / sum);
    return t;
  }

  /// Wraps weights that are already on the simplex (checked to 1e-9).
  static TopicVector from_weights(std::vector<double> w) {
    double sum = 0.0;
    for (double x : w) {
      if (!(x >= 0.0)) throw ValidationError("topic weights must be non-negative");
      sum += x;
    }
    if (w.empty() || std::abs(sum - 1.0) > 1e-9) throw ValidationError("topic weights must sum to 1");
    TopicVector t;
    t.weights_ = std::move(w);
    return t;
  }

  static TopicVector uniform(std::size_t k) {
    TopicVector t;
    t.weights_.assign(k, 1.0 / static_cast<double>(k));
    return t;
  }

  std::size_t size() const { return weights_.size(); }
  double operator[](std::size_t i) const { return weights_[i]; }
  const std::vector<double>& weights() const { return weights_; }
  std::span<const double> span() const { return weights_; }

  /// Index of the largest weight; ties go to the lowest index.
  std::size_t argmax() const {
    return static_cast<std::size_t>(std::max_element(weights_.begin(), weights_.end()) - weights_.begin());
  }

  bool operator==(const TopicVector&) const = default;

 private:
  std::vector<double> weights_;
};

inline double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ConfigError("dot: dimension mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

struct TrainSchedule {
  std::size_t passes = 100;
  std::size_t e_step_iters = 100;
  std::size_t batch_size = 256;
  double kappa = 0.7;
  double tau0 = 1.0;
  std::uint64_t seed = 0;
  /// E-step stops once the mean absolute change of gamma drops below this.
  double e_step_tol = 1e-4;
  /// Documents of a minibatch are split over this many threads; statistics
  /// are reduced in thread order, so results depend on the count but not on
  /// scheduling.
  unsigned threads = 1;
  bool shuffle = true;

  void validate() const {
    if (!(kappa > 0.5 && kappa <= 1.0)) throw ConfigError("kappa must lie in (0.5, 1]");
    if (!(tau0 >= 0.0)) throw ConfigError("tau0 must be >= 0");
    if (passes < 1) throw ConfigError("passes must be >= 1");
    if (e_step_iters < 1) throw ConfigError("e_step_iters must be >= 1");
    if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (!(e_step_tol >= 0.0)) throw ConfigError("e_step_tol must be >= 0");
    if (threads < 1) throw ConfigError("threads must be >= 1");
  }

  bool operator==(const TrainSchedule&) const = default;
};

/// Step size of the t-th minibatch update (t counts from 1).
inline double learning_rate(const TrainSchedule& s, std::uint64_t t) {
  return std::pow(s.tau0 + static_cast<double>(t), -s.kappa);
}

/// Variational topic-word parameters plus priors. `lambda` is row-major K x V.
class LdaModel {
 public:
  LdaModel() = default;

  LdaModel(std::size_t num_topics, std::size_t vocab_size, std::vector<double> alpha, double eta,
           std::vector<double> lambda, TrainSchedule schedule = {})
      : k_(num_topics),
        v_(vocab_size),
        alpha_(std::move(alpha)),
        eta_(eta),
        lambda_(std::move(lambda)),
        schedule_(schedule) {
    check();
  }

  /// Priors alpha = 1/K (symmetric) and eta = 1/K.
  static std::vector<double> default_alpha(std::size_t k) {
    return std::vector<double>(k, 1.0 / static_cast<double>(k));
  }
  static double default_eta(std::size_t k) { return 1.0 / static_cast<double>(k); }

  /// lambda drawn i.i.d. Gamma(100, 1/100) from `schedule.seed`.
  static LdaModel initialize(std::size_t num_topics, std::size_t vocab_size, std::vector<double> alpha, double eta,
                             const TrainSchedule& schedule) {
    if (num_topics < 1) throw ConfigError("number of topics must be >= 1");
    if (vocab_size < 1) throw ConfigError("vocabulary must not be empty");
    Rng rng(schedule.seed);
    std::vector<double> lambda(num_topics * vocab_size);
    for (auto& x : lambda) x = rng.gamma(100.0, 0.01);
    return LdaModel(num_topics, vocab_size, std::move(alpha), eta, std::move(lambda), schedule);
  }

  std::size_t num_topics() const { return k_; }
  std::size_t vocab_size() const { return v_; }
  const std::vector<double>& alpha() const { return alpha_; }
  double eta() const { return eta_; }
  const TrainSchedule& schedule() const { return schedule_; }
  std::uint64_t updates_seen() const { return updates_seen_; }
  const std::string& dictionary_digest() const { return dictionary_digest_; }

  void set_dictionary_digest(std::string d) { dictionary_digest_ = std::move(d); }
  void set_updates_seen(std::uint64_t n) { updates_seen_ = n; }
  void set_schedule(const TrainSchedule& s) { schedule_ = s; }

  std::span<const double> lambda() const { return lambda_; }
  std::span<const double> lambda_row(std::size_t k) const { return {lambda_.data() + k * v_, v_}; }
  std::span<double> mutable_lambda() { return lambda_; }

  /// Normalized lambda row k: the posterior mean of the topic's word
  /// distribution.
  std::vector<double> expected_beta(std::size_t k) const {
    if (k >= k_) throw ConfigError("topic " + std::to_string(k) + " out of range");
    auto row = lambda_row(k);
    double sum = std::accumulate(row.begin(), row.end(), 0.0);
    std::vector<double> out(row.begin(), row.end());
    for (auto& x : out) x /= sum;
    return out;
  }

  /// Returns a copy with topics reordered: new topic i is old topic perm[i].
  LdaModel permuted(std::span<const std::size_t> perm) const {
    if (perm.size() != k_) throw ConfigError("permutation size mismatch");
    LdaModel out = *this;
    for (std::size_t i = 0; i < k_; ++i) {
      std::copy_n(lambda_.begin() + static_cast<std::ptrdiff_t>(perm[i] * v_), v_,
                  out.lambda_.begin() + static_cast<std::ptrdiff_t>(i * v_));
      out.alpha_[i] = alpha_[perm[i]];
    }
    return out;
  }

  void check() const {
    if (k_ < 1) throw ConfigError("number of topics must be >= 1");
    if (v_ < 1) throw ConfigError("vocabulary must not be empty");
    if (alpha_.size() != k_) throw ConfigError("alpha must have K entries");
    for (double a : alpha_)
      if (!(a > 0.0)) throw ConfigError("alpha entries must be positive");
    if (!(eta_ > 0.0)) throw ConfigError("eta must be positive");
    if (lambda_.size() != k_ * v_) throw ConfigError("lambda must have K*V entries");
    for (double x : lambda_)
      if (!(x > 0.0) || !std::isfinite(x)) throw ConfigError("lambda entries must be positive and finite");
  }

 private:
  std::size_t k_ = 0;
  std::size_t v_ = 0;
  std::vector<double> alpha_;
  double eta_ = 0.0;
  std::vector<double> lambda_;
  TrainSchedule schedule_;
  std::uint64_t updates_seen_ = 0;
  std::string dictionary_digest_;
};

}  // namespace paperrank::lda
