#include <gtest/gtest.h>

#include <string>

#include "paperrank/ingest.hpp"
#include "support/random_records.hpp"

namespace pr = paperrank;

namespace {

const std::string kFixtures = PAPERRANK_FIXTURE_DIR;

constexpr const char* kMinimal =
    R"({"id":"1001.0001","title":"T","abstract":"A b.","submitted":"2010-01-04","authors":["X"],"categories":["hep-th"]})";

template <typename Fn>
std::string error_of(Fn&& fn) {
  try {
    fn();
  } catch (const pr::Error& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST(ParseJsonl, MinimalRecord) {
  auto c = pr::parse_jsonl(kMinimal);
  ASSERT_EQ(c.records.size(), 1u);
  const auto& r = c.records[0];
  EXPECT_EQ(r.id, "1001.0001");
  EXPECT_EQ(r.title, "T");
  EXPECT_EQ(r.abstract, "A b.");
  EXPECT_EQ(pr::format_date(r.submitted), "2010-01-04");
  EXPECT_EQ(r.authors, std::vector<std::string>{"X"});
  EXPECT_EQ(r.categories, std::vector<std::string>{"hep-th"});
}

TEST(ParseJsonl, EmptyInputHasDigest) {
  auto c = pr::parse_jsonl("");
  EXPECT_TRUE(c.records.empty());
  EXPECT_EQ(c.source_digest, "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST(ParseJsonl, DuplicateIdNamed) {
  std::string two = std::string(kMinimal) + "\n" + kMinimal + "\n";
  auto msg = error_of([&] { pr::parse_jsonl(two); });
  EXPECT_NE(msg.find("1001.0001"), std::string::npos) << msg;
  EXPECT_THROW(pr::parse_jsonl(two), pr::ValidationError);
}

TEST(ParseJsonl, MalformedLineNamesLineNumber) {
  std::string bad = std::string(kMinimal) + "\n{not json\n";
  try {
    pr::parse_jsonl(bad);
    FAIL();
  } catch (const pr::ParseError& e) {
    EXPECT_EQ(e.location(), 2u);
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
}

TEST(ParseJsonl, MissingKeyNamesKeyAndLine) {
  std::string rec = R"({"id":"x1","title":"T","submitted":"2010-01-04","authors":[],"categories":["hep-th"]})";
  auto msg = error_of([&] { pr::parse_jsonl("\n" + rec); });
  EXPECT_NE(msg.find("abstract"), std::string::npos) << msg;
  EXPECT_NE(msg.find("line 2"), std::string::npos) << msg;
}

TEST(ParseJsonl, RejectsInvariantViolations) {
  auto with = [](const std::string& field, const std::string& value) {
    nlohmann::json j = nlohmann::json::parse(kMinimal);
    j[field] = nlohmann::json::parse(value);
    return j.dump();
  };
  EXPECT_THROW(pr::parse_jsonl(with("categories", "[]")), pr::ParseError);
  EXPECT_THROW(pr::parse_jsonl(with("categories", R"(["HEP"])")), pr::ParseError);
  EXPECT_THROW(pr::parse_jsonl(with("categories", R"(["astro-ph.ga"])")), pr::ParseError);
  EXPECT_THROW(pr::parse_jsonl(with("title", R"("   ")")), pr::ParseError);
  EXPECT_THROW(pr::parse_jsonl(with("id", R"("")")), pr::ParseError);
  EXPECT_THROW(pr::parse_jsonl(with("submitted", R"("2010-13-01")")), pr::ParseError);
  EXPECT_NO_THROW(pr::parse_jsonl(with("categories", R"(["astro-ph.GA","gr-qc"])")));
}

TEST(ParseJsonl, DateWithTimeIsMidnight) {
  nlohmann::json j = nlohmann::json::parse(kMinimal);
  j["submitted"] = "2010-01-04T17:30:00Z";
  auto c = pr::parse_jsonl(j.dump());
  EXPECT_EQ(pr::format_date(c.records[0].submitted), "2010-01-04");
}

TEST(ParseOaiXml, TwoCategories) {
  auto c = pr::parse_oai_xml(
      "<records><record><id>1</id><title>T</title><abstract>A</abstract><created>2020-03-02</created>"
      "<authors><author>X</author></authors><categories>hep-ph hep-th</categories></record></records>");
  ASSERT_EQ(c.records.size(), 1u);
  EXPECT_EQ(c.records[0].categories, (std::vector<std::string>{"hep-ph", "hep-th"}));
}

TEST(ParseOaiXml, EntityDecodingAndWhitespace) {
  auto c = pr::parse_oai_xml(
      "<records><record><id>1</id><title>A &amp; B</title><abstract> x &lt;  y\n &gt; z </abstract>"
      "<created>2020-03-02</created><authors/><categories>hep-ph</categories></record></records>");
  EXPECT_EQ(c.records[0].title, "A & B");
  EXPECT_EQ(c.records[0].abstract, "x < y > z");
}

TEST(ParseOaiXml, MissingAbstractNamesFieldAndIndex) {
  auto msg = error_of([] {
    pr::parse_oai_xml(
        "<records><record><id>1</id><title>T</title><abstract>A</abstract><created>2020-03-02</created>"
        "<authors/><categories>hep-ph</categories></record>"
        "<record><id>2</id><title>T</title><created>2020-03-02</created>"
        "<authors/><categories>hep-ph</categories></record></records>");
  });
  EXPECT_NE(msg.find("abstract"), std::string::npos) << msg;
  EXPECT_NE(msg.find("record 1"), std::string::npos) << msg;
}

TEST(ParseOaiXml, ErrorsCarryByteOffsets) {
  const std::string unclosed = "<records><record><id>1</id>";
  try {
    pr::parse_oai_xml(unclosed);
    FAIL();
  } catch (const pr::ParseError& e) {
    EXPECT_LE(e.location(), unclosed.size());
    EXPECT_NE(std::string(e.what()).find("byte"), std::string::npos);
  }
  try {
    pr::parse_oai_xml("<feed></feed>");
    FAIL();
  } catch (const pr::ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("unknown root"), std::string::npos);
    EXPECT_EQ(e.location(), 0u);
  }
  const std::string empty_cats =
      "<records><record><id>1</id><title>T</title><abstract>A</abstract><created>2020-03-02</created>"
      "<authors/><categories>  </categories></record></records>";
  try {
    pr::parse_oai_xml(empty_cats);
    FAIL();
  } catch (const pr::ParseError& e) {
    EXPECT_EQ(e.location(), empty_cats.find("<categories>"));
  }
  EXPECT_THROW(pr::parse_oai_xml("<records><record></records>"), pr::ParseError);
  EXPECT_THROW(pr::parse_oai_xml("<records>&bogus;</records>"), pr::ParseError);
}

TEST(ParseOaiXml, IgnoresUnknownElementsAndAttributes) {
  auto c = pr::parse_oai_xml(
      "<records source='x'><record><id>1</id><doi>10.1/x</doi><title><![CDATA[a < b]]></title>"
      "<abstract>A &#233;</abstract><created>2020-03-02</created><authors/>"
      "<categories>hep-ph</categories></record><!-- c --></records>");
  EXPECT_EQ(c.records[0].title, "a < b");
  EXPECT_EQ(c.records[0].abstract, "A \xC3\xA9");
}

TEST(Ingest, FixtureFormatsAgree) {
  auto a = pr::load_corpus(kFixtures + "/sample.jsonl");
  auto b = pr::load_corpus(kFixtures + "/sample.xml");
  EXPECT_EQ(a.records, b.records);
  EXPECT_NE(a.source_digest, b.source_digest);
  ASSERT_EQ(a.records.size(), 3u);
  EXPECT_EQ(a.records[0].abstract,
            "We constrain the annihilation cross section of dark matter using gamma-ray observations of dwarf "
            "spheroidal galaxies.");
}

TEST(Ingest, ParsingIsPure) {
  auto bytes = pr::read_file(kFixtures + "/sample.jsonl");
  EXPECT_EQ(pr::parse_jsonl(bytes), pr::parse_jsonl(bytes));
}

TEST(Ingest, JsonlRoundTripProperty) {
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    auto records = paperrank::testing::random_records(seed, 1 + seed % 7);
    auto text = pr::to_jsonl(records);
    auto back = pr::parse_jsonl(text);
    ASSERT_EQ(back.records, records) << "seed " << seed;
    EXPECT_EQ(pr::to_jsonl(back.records), text);
  }
}

TEST(Ingest, FilterCategoryPureFlag) {
  auto c = pr::load_corpus(kFixtures + "/sample.jsonl");
  EXPECT_EQ(pr::filter_category(c.records, "hep-ph").size(), 1u);
  EXPECT_EQ(pr::filter_category(c.records, "hep-ph", true).size(), 0u);
  EXPECT_EQ(pr::filter_category(c.records, "astro-ph").size(), 1u);
  EXPECT_EQ(pr::filter_category(c.records, "hep-th", true).size(), 1u);
}

TEST(Ingest, FileReleaseSourceFiltersByDay) {
  pr::FileReleaseSource src(kFixtures + "/sample.jsonl");
  EXPECT_EQ(src.fetch(pr::parse_date("2010-01-04")).size(), 2u);
  EXPECT_EQ(src.fetch(pr::parse_date("2010-01-05")).size(), 1u);
  EXPECT_TRUE(src.fetch(pr::parse_date("2011-01-01")).empty());
  pr::ArxivHttpSource net("https://export.arxiv.org");
  EXPECT_THROW(net.fetch(pr::parse_date("2010-01-04")), pr::ConfigError);
}
