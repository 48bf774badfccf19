#pragma once

// Independent reference computations used as test oracles. Nothing here
// calls into the library's numeric code paths.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include <boost/math/special_functions/digamma.hpp>

namespace paperrank::oracle {

/// Sparse document as (word id, count) pairs.
using Doc = std::vector<std::pair<std::size_t, double>>;

/// Mean-field LDA fixed point for one document in long double, with an
/// explicit phi matrix, iterated until gamma stops moving (max change
/// below 1e-15) or the cap is hit.
inline std::vector<long double> reference_gamma(const Doc& doc, const std::vector<double>& alpha,
                                                const std::vector<std::vector<double>>& lambda,
                                                std::size_t max_iters = 200000) {
  using boost::math::digamma;
  const std::size_t K = alpha.size();
  std::vector<std::vector<long double>> elog_beta(K);
  for (std::size_t k = 0; k < K; ++k) {
    long double row = 0;
    for (double x : lambda[k]) row += x;
    for (double x : lambda[k]) elog_beta[k].push_back(digamma(static_cast<long double>(x)) - digamma(row));
  }
  long double words = 0;
  for (auto& [w, n] : doc) words += n;
  std::vector<long double> gamma(K);
  for (std::size_t k = 0; k < K; ++k) gamma[k] = alpha[k] + words / K;
  if (doc.empty()) {
    for (std::size_t k = 0; k < K; ++k) gamma[k] = alpha[k];
    return gamma;
  }
  std::vector<std::vector<long double>> phi(doc.size(), std::vector<long double>(K));
  for (std::size_t it = 0; it < max_iters; ++it) {
    long double sum = std::accumulate(gamma.begin(), gamma.end(), 0.0L);
    for (std::size_t i = 0; i < doc.size(); ++i) {
      long double norm = 0;
      for (std::size_t k = 0; k < K; ++k) {
        phi[i][k] = std::exp(digamma(gamma[k]) - digamma(sum) + elog_beta[k][doc[i].first]);
        norm += phi[i][k];
      }
      for (auto& p : phi[i]) p /= norm;
    }
    long double change = 0;
    for (std::size_t k = 0; k < K; ++k) {
      long double g = alpha[k];
      for (std::size_t i = 0; i < doc.size(); ++i) g += doc[i].second * phi[i][k];
      change = std::max(change, std::fabs(g - gamma[k]));
      gamma[k] = g;
    }
    if (change < 1e-15L) break;
  }
  return gamma;
}

/// Per-word plug-in bound: sum_w n_w log sum_k theta_k beta_kw / total words,
/// theta from the reference fixed point and beta the normalized lambda rows.
inline double reference_log_perplexity(const std::vector<Doc>& docs, const std::vector<double>& alpha,
                                       const std::vector<std::vector<double>>& lambda) {
  const std::size_t K = alpha.size();
  long double total = 0, words = 0;
  for (const auto& doc : docs) {
    auto gamma = reference_gamma(doc, alpha, lambda);
    long double gsum = std::accumulate(gamma.begin(), gamma.end(), 0.0L);
    for (auto& [w, n] : doc) {
      long double p = 0;
      for (std::size_t k = 0; k < K; ++k) {
        long double row = std::accumulate(lambda[k].begin(), lambda[k].end(), 0.0L);
        p += gamma[k] / gsum * (lambda[k][w] / row);
      }
      total += n * std::log(p);
      words += n;
    }
  }
  return static_cast<double>(total / words);
}

/// P(score_pos > score_neg) + 0.5 P(equal) over every positive/negative pair.
inline double pair_counting_auc(const std::vector<double>& scores, const std::vector<bool>& labels) {
  long double wins = 0, pairs = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!labels[i]) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (labels[j]) continue;
      pairs += 1;
      if (scores[i] > scores[j]) wins += 1;
      else if (scores[i] == scores[j]) wins += 0.5L;
    }
  }
  return static_cast<double>(wins / pairs);
}

inline double cosine(const std::vector<double>& a, const std::vector<double>& b) {
  long double ab = 0, aa = 0, bb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ab += static_cast<long double>(a[i]) * b[i];
    aa += static_cast<long double>(a[i]) * a[i];
    bb += static_cast<long double>(b[i]) * b[i];
  }
  return static_cast<double>(ab / std::sqrt(aa * bb));
}

struct Matching {
  /// perm[true_topic] = learned topic
  std::vector<std::size_t> perm;
  std::vector<double> cosines;
  double min_cosine = 0.0;
};

/// Exhaustive search over topic permutations maximizing the smallest, then
/// the summed, per-topic cosine. Intended for K <= 8.
inline Matching best_permutation(const std::vector<std::vector<double>>& truth,
                                 const std::vector<std::vector<double>>& learned) {
  const std::size_t K = truth.size();
  std::vector<std::vector<double>> c(K, std::vector<double>(K));
  for (std::size_t i = 0; i < K; ++i)
    for (std::size_t j = 0; j < K; ++j) c[i][j] = cosine(truth[i], learned[j]);
  std::vector<std::size_t> perm(K);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  Matching best;
  double best_sum = -1e300;
  best.min_cosine = -1e300;
  do {
    double mn = 1e300, sum = 0;
    for (std::size_t i = 0; i < K; ++i) {
      mn = std::min(mn, c[i][perm[i]]);
      sum += c[i][perm[i]];
    }
    if (mn > best.min_cosine || (mn == best.min_cosine && sum > best_sum)) {
      best.min_cosine = mn;
      best_sum = sum;
      best.perm = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  for (std::size_t i = 0; i < K; ++i) best.cosines.push_back(c[i][best.perm[i]]);
  return best;
}

}  // namespace paperrank::oracle
