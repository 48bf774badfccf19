#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "paperrank/error.hpp"
#include "paperrank/lda/random.hpp"
#include "paperrank/text/pipeline.hpp"

namespace paperrank::lda {

struct SyntheticCorpus {
  std::vector<text::BagOfWords> docs;
  std::vector<std::vector<double>> true_beta;   // K rows of length V
  std::vector<std::vector<double>> true_theta;  // D rows of length K
};

struct SamplerParams {
  std::size_t num_topics = 1;
  std::size_t vocab_size = 1;
  std::size_t num_docs = 1;
  double alpha = 0.1;  // symmetric document-topic prior
  double eta = 0.1;    // symmetric topic-word prior
  std::size_t doc_len = 1;
  std::uint64_t seed = 0;
};

/// Draws a corpus from the LDA generative process: beta_k ~ Dir(eta),
/// theta_d ~ Dir(alpha), then for each word a topic z ~ Mult(theta_d) and a
/// word ~ Mult(beta_z). Returns the ground truth alongside the documents.
inline SyntheticCorpus sample_corpus(const SamplerParams& p) {
  if (p.num_topics < 1 || p.vocab_size < 1 || p.num_docs < 1 || p.doc_len < 1)
    throw ConfigError("sample_corpus: every dimension must be >= 1");
  if (!(p.alpha > 0.0) || !(p.eta > 0.0)) throw ConfigError("sample_corpus: priors must be positive");

  Rng rng(p.seed);
  SyntheticCorpus out;
  std::vector<double> eta(p.vocab_size, p.eta);
  std::vector<AliasTable> word_tables;
  for (std::size_t k = 0; k < p.num_topics; ++k) {
    out.true_beta.push_back(rng.dirichlet(eta));
    word_tables.emplace_back(out.true_beta.back());
  }

  std::vector<double> alpha(p.num_topics, p.alpha);
  out.docs.reserve(p.num_docs);
  std::vector<std::uint32_t> counts(p.vocab_size);
  for (std::size_t d = 0; d < p.num_docs; ++d) {
    auto theta = p.num_topics == 1 ? std::vector<double>{1.0} : rng.dirichlet(alpha);
    std::fill(counts.begin(), counts.end(), 0u);
    for (std::size_t n = 0; n < p.doc_len; ++n) {
      std::size_t z = rng.categorical(theta);
      ++counts[word_tables[z].sample(rng)];
    }
    text::BagOfWords bow;
    for (std::size_t w = 0; w < p.vocab_size; ++w)
      if (counts[w] > 0) bow.entries.push_back({static_cast<std::uint32_t>(w), counts[w]});
    out.docs.push_back(std::move(bow));
    out.true_theta.push_back(std::move(theta));
  }
  return out;
}

}  // namespace paperrank::lda
