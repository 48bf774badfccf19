#include <gtest/gtest.h>

#include <map>
#include <set>
#include <string>
#include <vector>

#include "paperrank/ingest.hpp"
#include "paperrank/text/pipeline.hpp"
#include "support/random_records.hpp"
#include "support/synthetic_text.hpp"

namespace text = paperrank::text;
using Tokens = std::vector<std::string>;

namespace {

text::PipelineConfig default_config() { return {}; }

std::string join(const Tokens& t) {
  std::string s;
  for (const auto& x : t) s += x + " ";
  return s;
}

std::vector<Tokens> docs_with(std::map<std::string, std::size_t> counts, std::size_t n_docs) {
  std::vector<Tokens> docs(n_docs);
  for (const auto& [tok, n] : counts)
    for (std::size_t d = 0; d < n; ++d) docs[d].push_back(tok);
  return docs;
}

}  // namespace

TEST(Preprocess, RunFormsConflateExceptIrregularPast) {
  EXPECT_EQ(text::preprocess("running, ran, run, runs, runner", default_config()),
            (Tokens{"run", "ran", "run", "run", "runner"}));
}

TEST(Preprocess, TechWordProtected) {
  auto cfg = default_config();
  EXPECT_EQ(text::preprocess("AdS", cfg), Tokens{"AdS"});
  cfg.tech_words.clear();
  EXPECT_EQ(text::preprocess("AdS", cfg), Tokens{"ad"});
}

TEST(Preprocess, Empty) {
  EXPECT_TRUE(text::preprocess("", default_config()).empty());
  EXPECT_TRUE(text::preprocess("  ,;. -- ", default_config()).empty());
}

TEST(Preprocess, TechWordBoundaries) {
  auto cfg = default_config();
  EXPECT_EQ(text::preprocess("a 2-d lattice", cfg), (Tokens{"2-d", "lattic"}));
  EXPECT_EQ(text::preprocess("e+e- collisions", cfg), (Tokens{"e+", "e-", "colli"}));
  EXPECT_EQ(text::preprocess("AdS/CFT duality", cfg), (Tokens{"AdS", "cft", "dualiti"}));
  // Not glued to a longer word.
  EXPECT_EQ(text::preprocess("12-dim", cfg), (Tokens{"dim"}));
  EXPECT_EQ(text::preprocess("Adsorption", cfg), (Tokens{"adsorpt"}));
  EXPECT_EQ(text::preprocess("ADS", cfg), (Tokens{"ad"}));
}

TEST(Preprocess, PunctuationCaseAndStopWords) {
  auto cfg = default_config();
  EXPECT_EQ(text::preprocess("The Gamma-ray observations of galaxies!", cfg),
            (Tokens{"gamma", "rai", "observ", "galaxi"}));
  EXPECT_EQ(text::preprocess("we THEORY (theories)", cfg), (Tokens{"theori", "theori"}));
  EXPECT_EQ(text::preprocess("in 2019 at 3.5 GeV", cfg), (Tokens{"gev"}));
  EXPECT_EQ(text::preprocess("caf\xC3\xA9\xE2\x80\x94na\xC3\xAFve", cfg), (Tokens{"caf\xC3\xA9", "na\xC3\xAFve"}));
}

TEST(Preprocess, StopWordListMatchesBundledFile) {
  auto from_file = text::load_word_list(std::string(PAPERRANK_DATA_DIR) + "/stop_words.txt");
  EXPECT_EQ(from_file, text::default_stop_words());
  auto tech = text::load_word_list(std::string(PAPERRANK_DATA_DIR) + "/tech_words.txt");
  EXPECT_EQ(tech, text::default_tech_words());
  EXPECT_TRUE(tech.contains("AdS"));
  EXPECT_TRUE(tech.contains("1-d"));
}

TEST(Preprocess, IdempotentOnOwnOutput) {
  auto cfg = default_config();
  cfg.tech_words.clear();
  for (auto seed = 1u; seed <= 20; ++seed) {
    for (const auto& r : paperrank::testing::random_records(seed, 5)) {
      auto once = text::preprocess(paperrank::document_text(r), cfg);
      EXPECT_EQ(text::preprocess(join(once), cfg), once) << r.abstract;
    }
  }
  for (const auto& doc : paperrank::testing::zipf_abstracts(200, 3000, 80, 5)) {
    auto once = text::preprocess(doc, cfg);
    EXPECT_EQ(text::preprocess(join(once), cfg), once);
  }
}

TEST(Preprocess, Deterministic) {
  const std::string t = "Holographic entanglement entropy in AdS and 3-d gravity; e+ e- annihilation.";
  EXPECT_EQ(text::preprocess(t, default_config()), text::preprocess(t, default_config()));
}

TEST(BuildDictionary, FilterExamples) {
  auto cfg = default_config();
  auto docs = docs_with({{"qcd", 60}, {"the", 95}, {"zyzzy", 3}}, 100);
  auto dict = text::build_dictionary(docs, cfg);
  EXPECT_TRUE(dict.find("qcd").has_value());
  EXPECT_FALSE(dict.find("the").has_value());
  EXPECT_FALSE(dict.find("zyzzy").has_value());
  EXPECT_EQ(dict.size(), 1u);
  EXPECT_EQ(dict.n_docs(), 100u);
}

TEST(BuildDictionary, BoundsAreInclusive) {
  auto docs = docs_with({{"lo", 50}, {"hi", 90}, {"over", 91}, {"under", 49}}, 100);
  auto dict = text::build_dictionary(docs, default_config());
  EXPECT_EQ(dict.tokens(), (Tokens{"hi", "lo"}));
}

TEST(BuildDictionary, Errors) {
  EXPECT_THROW(text::build_dictionary({}, default_config()), paperrank::ConfigError);
  auto docs = docs_with({{"zyzzy", 3}}, 100);
  EXPECT_THROW(text::build_dictionary(docs, default_config()), paperrank::ValidationError);
  auto bad = default_config();
  bad.max_frac = 0.0;
  EXPECT_THROW(text::build_dictionary(docs, bad), paperrank::ConfigError);
  bad = default_config();
  bad.min_docs = 0;
  EXPECT_THROW(text::build_dictionary(docs, bad), paperrank::ConfigError);
}

TEST(BuildDictionary, TsvRoundTrip) {
  auto cfg = default_config();
  cfg.min_docs = 1;
  auto dict = text::build_dictionary({{"b", "a", "AdS"}, {"a", "c"}, {"c"}}, cfg);
  EXPECT_EQ(dict.to_tsv(), "#docs=3 version=1\nAdS\t0\t1\na\t1\t2\nb\t2\t1\nc\t3\t2\n");
  auto back = text::Dictionary::from_tsv(dict.to_tsv());
  EXPECT_EQ(back.tokens(), dict.tokens());
  EXPECT_EQ(back.digest(), dict.digest());
  EXPECT_EQ(*back.find("c"), 3u);
  EXPECT_THROW(text::Dictionary::from_tsv("a\t0\t1\n"), paperrank::ParseError);
  EXPECT_THROW(text::Dictionary::from_tsv("#docs=1 version=1\na\t1\t1\n"), paperrank::ParseError);
}

TEST(BuildDictionary, PaperScaleCorpusSize) {
  // Twenty thousand abstract-length documents under the default filters.
  auto cfg = default_config();
  auto texts = paperrank::testing::zipf_abstracts(20000, 40000, 120, 2024);
  std::vector<Tokens> docs;
  docs.reserve(texts.size());
  for (const auto& t : texts) docs.push_back(text::preprocess(t, cfg));
  auto dict = text::build_dictionary(docs, cfg);
  EXPECT_GE(dict.size(), 1000u);
  EXPECT_LE(dict.size(), 10000u);
  const double cap = cfg.max_frac * static_cast<double>(dict.n_docs());
  for (std::size_t id = 0; id < dict.size(); ++id) {
    EXPECT_GE(dict.doc_freq(id), cfg.min_docs);
    EXPECT_LE(static_cast<double>(dict.doc_freq(id)), cap);
    EXPECT_EQ(*dict.find(dict.token(id)), id);
    if (id > 0) {
      EXPECT_LT(dict.token(id - 1), dict.token(id));
    }
  }
}

TEST(ToBow, Examples) {
  text::Dictionary dict({"run", "star"}, {1, 1}, 1);
  auto bow = text::to_bow({"run", "run", "star"}, dict);
  ASSERT_EQ(bow.entries.size(), 2u);
  EXPECT_EQ(bow.entries[0].id, 0u);
  EXPECT_EQ(bow.entries[0].count, 2u);
  EXPECT_EQ(bow.entries[1].id, 1u);
  EXPECT_EQ(bow.entries[1].count, 1u);
  EXPECT_TRUE(text::to_bow({"unknown"}, dict).empty());
  EXPECT_TRUE(text::to_bow({}, dict).empty());
  EXPECT_EQ(text::to_bow({"star", "run", "run"}, dict), bow);
}
