#include <gtest/gtest.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <unordered_map>
#include <vector>

#include "paperrank/lda/random.hpp"
#include "paperrank/ranking.hpp"

namespace rk = paperrank::ranking;
namespace lda = paperrank::lda;
using paperrank::Instant;
using paperrank::parse_date;
using paperrank::to_instant;
using lda::TopicVector;
using rk::EventKind;

namespace {

const Instant kNow = to_instant(parse_date("2020-06-01")) + std::chrono::hours(12);

Instant days_ago(double d) {
  return kNow - std::chrono::duration_cast<std::chrono::seconds>(std::chrono::duration<double>(d * 86400.0));
}

TopicVector random_theta(lda::Rng& rng, std::size_t k) {
  std::vector<double> a(k, 0.5);
  return TopicVector::normalized(rng.dirichlet(a));
}

rk::ClickEvent event(std::string paper, EventKind kind, Instant at, std::string user = "u1") {
  return {std::move(user), std::move(paper), kind, at};
}

std::vector<rk::ReleasePaper> random_release(lda::Rng& rng, std::size_t n, std::size_t k) {
  std::vector<rk::ReleasePaper> out;
  for (std::size_t i = 0; i < n; ++i) {
    auto theta = random_theta(rng, k);
    // Occasional exact duplicates and shared dates exercise the tie-breaks.
    if (i > 0 && rng.next() % 5 == 0) theta = out[rng.next() % i].theta;
    out.push_back({"p" + std::to_string(rng.next() % 1000) + "-" + std::to_string(i), theta,
                   parse_date("2020-01-01") + std::chrono::days(static_cast<int>(rng.next() % 3))});
  }
  return out;
}

/// Independent ordering: compute every score, then sort a list of tuples.
std::vector<std::string> brute_force_order(const std::vector<double>& u, const std::vector<rk::ReleasePaper>& papers) {
  std::vector<std::tuple<double, long, std::string>> keyed;
  for (const auto& p : papers) {
    double s = 0;
    for (std::size_t k = 0; k < u.size(); ++k) s += u[k] * p.theta[k];
    keyed.emplace_back(-s, -p.submitted.time_since_epoch().count(), p.paper_id);
  }
  std::sort(keyed.begin(), keyed.end());
  std::vector<std::string> ids;
  for (auto& t : keyed) ids.push_back(std::get<2>(t));
  return ids;
}

std::vector<std::string> ids_of(const std::vector<rk::ScoredPaper>& v) {
  std::vector<std::string> ids;
  for (const auto& p : v) ids.push_back(p.paper_id);
  return ids;
}

}  // namespace

// --- event weights ---------------------------------------------------------

TEST(EventWeight, Examples) {
  EXPECT_DOUBLE_EQ(rk::event_weight(EventKind::abstract_expand, kNow, kNow), 1.0);
  EXPECT_DOUBLE_EQ(rk::event_weight(EventKind::pdf_open, days_ago(180), kNow), 1.0);
  EXPECT_DOUBLE_EQ(rk::event_weight(EventKind::authored, kNow, kNow), 5.0);
  EXPECT_GT(rk::event_weight(EventKind::authored, kNow, kNow), rk::event_weight(EventKind::pdf_open, kNow, kNow));
  EXPECT_GT(rk::event_weight(EventKind::pdf_open, kNow, kNow),
            rk::event_weight(EventKind::abstract_expand, kNow, kNow));
  EXPECT_NEAR(rk::event_weight(EventKind::abstract_expand, days_ago(360), kNow), 0.25, 1e-15);
}

TEST(EventWeight, Errors) {
  EXPECT_THROW(rk::event_weight(EventKind::pdf_open, kNow + std::chrono::seconds(1), kNow), paperrank::ConfigError);
  rk::WeightConfig bad;
  bad.half_life_days = 0;
  EXPECT_THROW(rk::event_weight(EventKind::pdf_open, kNow, kNow, bad), paperrank::ConfigError);
}

TEST(EventKinds, ParseRoundTrip) {
  for (auto k : {EventKind::abstract_expand, EventKind::pdf_open, EventKind::authored})
    EXPECT_EQ(rk::parse_event_kind(rk::to_string(k)), k);
  EXPECT_FALSE(rk::parse_event_kind("like").has_value());
}

// --- user vectors ----------------------------------------------------------

TEST(UserVector, EmptyLogIsZero) {
  std::unordered_map<std::string, TopicVector> thetas;
  auto u = rk::user_vector({}, rk::lookup_in(thetas), 4, kNow);
  EXPECT_EQ(u, std::vector<double>(4, 0.0));
}

TEST(UserVector, SingleEventIsTheta) {
  std::unordered_map<std::string, TopicVector> thetas{{"a", TopicVector::from_weights({0.1, 0.2, 0.3, 0.4})}};
  std::vector<rk::ClickEvent> log{event("a", EventKind::abstract_expand, kNow)};
  EXPECT_EQ(rk::user_vector(log, rk::lookup_in(thetas), 4, kNow), thetas.at("a").weights());
}

TEST(UserVector, ThreeEventsMatchHandSum) {
  std::unordered_map<std::string, TopicVector> thetas{
      {"a", TopicVector::from_weights({0.7, 0.1, 0.1, 0.1})},
      {"b", TopicVector::from_weights({0.0, 0.5, 0.25, 0.25})},
      {"c", TopicVector::from_weights({0.2, 0.2, 0.2, 0.4})}};
  std::vector<rk::ClickEvent> log{event("a", EventKind::abstract_expand, days_ago(10)),
                                  event("b", EventKind::pdf_open, days_ago(90)),
                                  event("c", EventKind::authored, days_ago(400))};
  const double wa = 1.0 * std::pow(2.0, -10.0 / 180), wb = 2.0 * std::pow(2.0, -90.0 / 180),
               wc = 5.0 * std::pow(2.0, -400.0 / 180);
  auto u = rk::user_vector(log, rk::lookup_in(thetas), 4, kNow);
  for (std::size_t k = 0; k < 4; ++k)
    EXPECT_NEAR(u[k], wa * thetas.at("a")[k] + wb * thetas.at("b")[k] + wc * thetas.at("c")[k], 1e-12);
}

TEST(UserVector, MissingThetaNamesPaper) {
  std::unordered_map<std::string, TopicVector> thetas;
  std::vector<rk::ClickEvent> log{event("2001.00042", EventKind::pdf_open, kNow)};
  try {
    rk::user_vector(log, rk::lookup_in(thetas), 2, kNow);
    FAIL();
  } catch (const paperrank::NotFoundError& e) {
    EXPECT_NE(std::string(e.what()).find("2001.00042"), std::string::npos);
  }
}

TEST(UserVector, SameDayDuplicatesCountOnce) {
  std::unordered_map<std::string, TopicVector> thetas{{"a", TopicVector::from_weights({1.0, 0.0})}};
  const Instant morning = to_instant(parse_date("2020-05-30")) + std::chrono::hours(8);
  std::vector<rk::ClickEvent> log{event("a", EventKind::pdf_open, morning),
                                  event("a", EventKind::pdf_open, morning + std::chrono::hours(5)),
                                  event("a", EventKind::abstract_expand, morning),
                                  event("a", EventKind::pdf_open, morning + std::chrono::hours(24))};
  auto u = rk::user_vector(log, rk::lookup_in(thetas), 2, kNow);
  double expect = rk::event_weight(EventKind::pdf_open, morning, kNow) +
                  rk::event_weight(EventKind::abstract_expand, morning, kNow) +
                  rk::event_weight(EventKind::pdf_open, morning + std::chrono::hours(24), kNow);
  EXPECT_NEAR(u[0], expect, 1e-12);
  EXPECT_EQ(rk::dedupe_events(log).size(), 3u);
}

TEST(UserVector, ReplayEqualsIncremental) {
  lda::Rng rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    std::unordered_map<std::string, TopicVector> thetas;
    std::vector<rk::ClickEvent> log;
    for (int i = 0; i < 20; ++i) {
      std::string id = "p" + std::to_string(rng.next() % 8);
      thetas.try_emplace(id, random_theta(rng, 5));
      log.push_back(event(id, static_cast<EventKind>(rng.next() % 3), days_ago(static_cast<double>(rng.next() % 50))));
    }
    rk::UserVectorAccumulator acc(5, kNow);
    for (const auto& e : log) acc.add(e, thetas.at(e.paper_id));
    auto replay = rk::user_vector(log, rk::lookup_in(thetas), 5, kNow);
    for (std::size_t k = 0; k < 5; ++k) EXPECT_NEAR(acc.value()[k], replay[k], 1e-12);
  }
}

// --- sorting ---------------------------------------------------------------

TEST(SortRelease, ZeroVectorIsDateOrder) {
  std::vector<rk::ReleasePaper> papers{
      {"b", TopicVector::from_weights({1, 0}), parse_date("2020-01-02")},
      {"a", TopicVector::from_weights({0, 1}), parse_date("2020-01-02")},
      {"c", TopicVector::from_weights({0.5, 0.5}), parse_date("2020-01-03")},
      {"d", TopicVector::from_weights({0.5, 0.5}), parse_date("2020-01-01")}};
  std::vector<double> u{0, 0};
  auto out = rk::sort_release(u, papers);
  EXPECT_EQ(ids_of(out), (std::vector<std::string>{"c", "a", "b", "d"}));
  for (const auto& p : out) EXPECT_EQ(p.score, 0.0);
}

TEST(SortRelease, OneHotUserOrdersByThatTopic) {
  lda::Rng rng(5);
  auto papers = random_release(rng, 30, 4);
  std::vector<double> u{0, 0, 3.0, 0};
  auto out = rk::sort_release(u, papers);
  for (std::size_t i = 1; i < out.size(); ++i) EXPECT_GE(out[i - 1].theta[2], out[i].theta[2]);
}

TEST(SortRelease, MatchesBruteForce) {
  lda::Rng rng(6);
  for (int trial = 0; trial < 100; ++trial) {
    auto papers = random_release(rng, 10, 4);
    std::vector<double> u(4);
    for (auto& x : u) x = rng.next() % 4 == 0 ? 0.0 : 3 * rng.uniform();
    auto out = rk::sort_release(u, papers);
    EXPECT_EQ(ids_of(out), brute_force_order(u, papers));
    for (std::size_t i = 0; i < out.size(); ++i) EXPECT_GE(out[i].score, 0.0);
  }
}

TEST(SortRelease, PositiveScalingKeepsOrder) {
  lda::Rng rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    auto papers = random_release(rng, 15, 3);
    std::vector<double> u(3), scaled(3);
    for (auto& x : u) x = rng.uniform();
    // Power-of-two factors scale exactly, so ties stay ties.
    const double c = std::ldexp(1.0, static_cast<int>(rng.next() % 20) - 10);
    for (std::size_t k = 0; k < 3; ++k) scaled[k] = c * u[k];
    EXPECT_EQ(ids_of(rk::sort_release(u, papers)), ids_of(rk::sort_release(scaled, papers)));
  }
}

TEST(SortRelease, DimensionMismatch) {
  std::vector<rk::ReleasePaper> papers{{"a", TopicVector::uniform(3), parse_date("2020-01-01")}};
  std::vector<double> u{1, 2};
  EXPECT_THROW(rk::sort_release(u, papers), paperrank::ConfigError);
}

TEST(SortRelease, PdfOpenNeverLowersScore) {
  lda::Rng rng(8);
  for (int trial = 0; trial < 50; ++trial) {
    auto papers = random_release(rng, 12, 4);
    std::unordered_map<std::string, TopicVector> thetas;
    for (const auto& p : papers) thetas.try_emplace(p.paper_id, p.theta);
    std::vector<rk::ClickEvent> log;
    for (int i = 0; i < 4; ++i)
      log.push_back(event(papers[rng.next() % papers.size()].paper_id, EventKind::abstract_expand, days_ago(3 + i)));
    const auto& target = papers[rng.next() % papers.size()];
    auto before = rk::sort_release(rk::user_vector(log, rk::lookup_in(thetas), 4, kNow), papers);
    log.push_back(event(target.paper_id, EventKind::pdf_open, days_ago(1)));
    auto after = rk::sort_release(rk::user_vector(log, rk::lookup_in(thetas), 4, kNow), papers);
    auto score_of = [&](const std::vector<rk::ScoredPaper>& v) {
      for (const auto& p : v)
        if (p.paper_id == target.paper_id) return p.score;
      return -1.0;
    };
    EXPECT_GE(score_of(after), score_of(before));
  }
}

TEST(SortRelease, LaterQueriesDecayScores) {
  lda::Rng rng(9);
  auto papers = random_release(rng, 20, 4);
  std::unordered_map<std::string, TopicVector> thetas;
  for (const auto& p : papers) thetas.try_emplace(p.paper_id, p.theta);
  std::vector<rk::ClickEvent> log{event(papers[0].paper_id, EventKind::pdf_open, days_ago(5)),
                                  event(papers[3].paper_id, EventKind::abstract_expand, days_ago(2))};
  auto early = rk::sort_release(rk::user_vector(log, rk::lookup_in(thetas), 4, kNow), papers);
  auto late = rk::sort_release(rk::user_vector(log, rk::lookup_in(thetas), 4, kNow + std::chrono::days(40)), papers);
  std::unordered_map<std::string, double> early_score;
  for (const auto& p : early) early_score[p.paper_id] = p.score;
  for (const auto& p : late) EXPECT_LE(p.score, early_score[p.paper_id]);

  std::vector<rk::ClickEvent> single{log[0]};
  auto a = rk::sort_release(rk::user_vector(single, rk::lookup_in(thetas), 4, kNow), papers);
  auto b = rk::sort_release(rk::user_vector(single, rk::lookup_in(thetas), 4, kNow + std::chrono::days(300)), papers);
  EXPECT_EQ(ids_of(a), ids_of(b));
}

// --- related papers --------------------------------------------------------

TEST(RelatedPapers, DuplicateRanksFirst) {
  auto t = TopicVector::from_weights({0.6, 0.3, 0.1});
  std::vector<rk::ReleasePaper> corpus{{"target", t, parse_date("2020-01-01")},
                                       {"x", TopicVector::from_weights({0.1, 0.1, 0.8}), parse_date("2020-01-05")},
                                       {"dup", t, parse_date("2019-01-01")}};
  auto r = rk::related_papers("target", t, corpus, 2);
  ASSERT_EQ(r.size(), 2u);
  EXPECT_EQ(r[0].paper_id, "dup");
  EXPECT_DOUBLE_EQ(r[0].inner_product, 0.36 + 0.09 + 0.01);
  EXPECT_EQ(r[1].paper_id, "x");
}

TEST(RelatedPapers, OrthogonalUsesTieBreak) {
  auto target = TopicVector::from_weights({1, 0, 0});
  std::vector<rk::ReleasePaper> corpus{{"old", TopicVector::from_weights({0, 1, 0}), parse_date("2019-01-01")},
                                       {"new", TopicVector::from_weights({0, 0, 1}), parse_date("2020-01-01")},
                                       {"new0", TopicVector::from_weights({0, 1, 0}), parse_date("2020-01-01")}};
  auto r = rk::related_papers("t", target, corpus, 5);
  ASSERT_EQ(r.size(), 3u);
  EXPECT_EQ(r[0].paper_id, "new");
  EXPECT_EQ(r[1].paper_id, "new0");
  EXPECT_EQ(r[2].paper_id, "old");
  for (const auto& p : r) EXPECT_EQ(p.inner_product, 0.0);
}

TEST(RelatedPapers, MatchesBruteForceTopFive) {
  lda::Rng rng(10);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<rk::ReleasePaper> corpus;
    for (int i = 0; i < 50; ++i)
      corpus.push_back({"p" + std::to_string(i), random_theta(rng, 6),
                        parse_date("2020-01-01") + std::chrono::days(static_cast<int>(rng.next() % 5))});
    const auto& target = corpus[rng.next() % 50];
    auto r = rk::related_papers(target.paper_id, target.theta, corpus, 5);
    std::vector<rk::ReleasePaper> others;
    for (const auto& p : corpus)
      if (p.paper_id != target.paper_id) others.push_back(p);
    auto expected = brute_force_order(target.theta.weights(), others);
    ASSERT_EQ(r.size(), 5u);
    for (std::size_t i = 0; i < 5; ++i) EXPECT_EQ(r[i].paper_id, expected[i]);
  }
}

TEST(RelatedPapers, Errors) {
  EXPECT_THROW(rk::related_papers("a", TopicVector::uniform(2), {}, 3), paperrank::ConfigError);
  std::vector<rk::ReleasePaper> one{{"a", TopicVector::uniform(2), parse_date("2020-01-01")}};
  EXPECT_THROW(rk::related_papers("a", TopicVector::uniform(2), one, 0), paperrank::ConfigError);
  EXPECT_TRUE(rk::related_papers("a", TopicVector::uniform(2), one, 3).empty());
}

// --- rebuild ---------------------------------------------------------------

TEST(Rebuild, EmptyLogsGiveZeroVectors) {
  std::unordered_map<std::string, TopicVector> thetas;
  auto r = rk::rebuild_user_vectors({{"u1", {}}, {"u2", {}}}, rk::lookup_in(thetas), 30, kNow);
  EXPECT_EQ(r.vectors.at("u1"), std::vector<double>(30, 0.0));
  EXPECT_EQ(r.vectors.at("u2"), std::vector<double>(30, 0.0));
  EXPECT_EQ(r.skipped_events, 0u);
}

TEST(Rebuild, SameModelEqualsIncremental) {
  lda::Rng rng(11);
  std::unordered_map<std::string, TopicVector> thetas;
  for (int i = 0; i < 10; ++i) thetas.emplace("p" + std::to_string(i), random_theta(rng, 40));
  std::map<std::string, std::vector<rk::ClickEvent>> logs;
  std::map<std::string, rk::UserVectorAccumulator> incremental;
  for (int i = 0; i < 60; ++i) {
    std::string user = "u" + std::to_string(rng.next() % 4);
    auto e = event("p" + std::to_string(rng.next() % 10), static_cast<EventKind>(rng.next() % 3),
                   days_ago(static_cast<double>(rng.next() % 100)), user);
    logs[user].push_back(e);
    incremental.try_emplace(user, 40, kNow).first->second.add(e, thetas.at(e.paper_id));
  }
  auto r = rk::rebuild_user_vectors(logs, rk::lookup_in(thetas), 40, kNow);
  for (const auto& [user, acc] : incremental)
    for (std::size_t k = 0; k < 40; ++k) EXPECT_NEAR(r.vectors.at(user)[k], acc.value()[k], 1e-12);
}

TEST(Rebuild, NewDimensionAndUninferrablePapers) {
  lda::Rng rng(12);
  std::unordered_map<std::string, TopicVector> new_thetas{{"a", random_theta(rng, 30)}, {"b", random_theta(rng, 30)}};
  std::map<std::string, std::vector<rk::ClickEvent>> logs{
      {"u1", {event("a", EventKind::pdf_open, days_ago(1)), event("gone", EventKind::pdf_open, days_ago(1))}},
      {"u2", {event("b", EventKind::abstract_expand, days_ago(2), "u2")}}};
  auto r = rk::rebuild_user_vectors(logs, rk::lookup_in(new_thetas), 30, kNow);
  for (const auto& [user, v] : r.vectors) EXPECT_EQ(v.size(), 30u);
  EXPECT_EQ(r.uninferrable_papers, std::set<std::string>{"gone"});
  EXPECT_EQ(r.skipped_events, 1u);
  std::vector<rk::ClickEvent> kept{logs["u1"][0]};
  EXPECT_EQ(r.vectors.at("u1"), rk::user_vector(kept, rk::lookup_in(new_thetas), 30, kNow));
}
