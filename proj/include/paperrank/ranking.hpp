#pragma once

// Per-user topic preference vectors and scalar-product ordering of papers.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "paperrank/date.hpp"
#include "paperrank/error.hpp"
#include "paperrank/lda/model.hpp"

namespace paperrank::ranking {

using lda::TopicVector;

enum class EventKind { abstract_expand, pdf_open, authored };

inline std::string_view to_string(EventKind k) {
  switch (k) {
    case EventKind::abstract_expand: return "abstract_expand";
    case EventKind::pdf_open: return "pdf_open";
    case EventKind::authored: return "authored";
  }
  return "?";
}

inline std::optional<EventKind> parse_event_kind(std::string_view s) {
  if (s == "abstract_expand") return EventKind::abstract_expand;
  if (s == "pdf_open") return EventKind::pdf_open;
  if (s == "authored") return EventKind::authored;
  return std::nullopt;
}

struct ClickEvent {
  std::string user_id;
  std::string paper_id;
  EventKind kind = EventKind::abstract_expand;
  Instant timestamp{};

  bool operator==(const ClickEvent&) const = default;
};

struct WeightConfig {
  double abstract_expand = 1.0;
  double pdf_open = 2.0;
  double authored = 5.0;
  double half_life_days = 180.0;

  double base(EventKind k) const {
    switch (k) {
      case EventKind::abstract_expand: return abstract_expand;
      case EventKind::pdf_open: return pdf_open;
      case EventKind::authored: return authored;
    }
    return 0.0;
  }
};

/// base(kind) * 2^(-age_days / half_life_days).
inline double event_weight(EventKind kind, Instant event_time, Instant query_time, const WeightConfig& cfg = {}) {
  if (!(cfg.half_life_days > 0.0)) throw ConfigError("half_life_days must be positive");
  if (event_time > query_time) throw ConfigError("event_weight: event is later than the query time");
  const double age_days = std::chrono::duration<double>(query_time - event_time).count() / 86400.0;
  return cfg.base(kind) * std::exp2(-age_days / cfg.half_life_days);
}

/// Key under which repeated events collapse: same user, paper, kind and UTC day.
inline auto dedup_key(const ClickEvent& e) {
  return std::make_tuple(e.user_id, e.paper_id, static_cast<int>(e.kind),
                         std::chrono::floor<std::chrono::days>(e.timestamp).time_since_epoch().count());
}

/// Drops repeats of an earlier event with the same dedup key; keeps order.
inline std::vector<ClickEvent> dedupe_events(std::span<const ClickEvent> events) {
  std::set<decltype(dedup_key(events.front()))> seen;
  std::vector<ClickEvent> out;
  for (const auto& e : events)
    if (seen.insert(dedup_key(e)).second) out.push_back(e);
  return out;
}

/// Returns a paper's topic vector, or nullopt when it has none under the
/// current model.
using ThetaLookup = std::function<std::optional<TopicVector>(const std::string& paper_id)>;

inline ThetaLookup lookup_in(const std::unordered_map<std::string, TopicVector>& thetas) {
  return [&thetas](const std::string& id) -> std::optional<TopicVector> {
    auto it = thetas.find(id);
    if (it == thetas.end()) return std::nullopt;
    return it->second;
  };
}

/// Event-by-event accumulation of a user vector at a fixed query time.
class UserVectorAccumulator {
 public:
  UserVectorAccumulator(std::size_t num_topics, Instant query_time, WeightConfig cfg = {})
      : u_(num_topics, 0.0), query_time_(query_time), cfg_(cfg) {}

  /// Adds w(event) * theta. Returns false when the event repeats an earlier one.
  bool add(const ClickEvent& e, const TopicVector& theta) {
    if (theta.size() != u_.size()) throw ConfigError("user vector: topic dimension mismatch");
    if (!seen_.insert(dedup_key(e)).second) return false;
    const double w = event_weight(e.kind, e.timestamp, query_time_, cfg_);
    for (std::size_t k = 0; k < u_.size(); ++k) u_[k] += w * theta[k];
    return true;
  }

  const std::vector<double>& value() const { return u_; }

 private:
  std::vector<double> u_;
  Instant query_time_;
  WeightConfig cfg_;
  std::set<decltype(dedup_key(std::declval<ClickEvent>()))> seen_;
};

/// u = sum over (deduplicated) events of w(event) * theta(paper). Zero
/// vector for an empty log.
inline std::vector<double> user_vector(std::span<const ClickEvent> events, const ThetaLookup& theta_of,
                                       std::size_t num_topics, Instant query_time, const WeightConfig& cfg = {}) {
  UserVectorAccumulator acc(num_topics, query_time, cfg);
  for (const auto& e : events) {
    auto theta = theta_of(e.paper_id);
    if (!theta) throw NotFoundError("user vector: no topic vector for paper " + e.paper_id);
    acc.add(e, *theta);
  }
  return acc.value();
}

struct ReleasePaper {
  std::string paper_id;
  TopicVector theta;
  Days submitted{};
};

struct ScoredPaper {
  std::string paper_id;
  double score = 0.0;
  TopicVector theta;
  Days submitted{};
};

/// Total order used for listings: score descending, then newer submission,
/// then paper id ascending.
inline bool ranks_before(double score_a, Days date_a, std::string_view id_a, double score_b, Days date_b,
                         std::string_view id_b) {
  if (score_a != score_b) return score_a > score_b;
  if (date_a != date_b) return date_a > date_b;
  return id_a < id_b;
}

inline std::vector<ScoredPaper> sort_release(std::span<const double> u, std::span<const ReleasePaper> papers) {
  std::vector<ScoredPaper> out;
  out.reserve(papers.size());
  for (const auto& p : papers) {
    if (p.theta.size() != u.size())
      throw ConfigError("sort_release: paper " + p.paper_id + " has " + std::to_string(p.theta.size()) +
                        " topics, user vector has " + std::to_string(u.size()));
    out.push_back({p.paper_id, lda::dot(u, p.theta.span()), p.theta, p.submitted});
  }
  std::sort(out.begin(), out.end(), [](const ScoredPaper& a, const ScoredPaper& b) {
    return ranks_before(a.score, a.submitted, a.paper_id, b.score, b.submitted, b.paper_id);
  });
  return out;
}

struct RelatedPaper {
  std::string paper_id;
  double inner_product = 0.0;
};

/// Top-n papers by inner product with the target's topic vector, excluding
/// the target itself. Ties go to the newer paper, then the lower id.
inline std::vector<RelatedPaper> related_papers(std::string_view target_id, const TopicVector& target,
                                                std::span<const ReleasePaper> corpus, std::size_t n) {
  if (n < 1) throw ConfigError("related_papers: n must be >= 1");
  if (corpus.empty()) throw ConfigError("related_papers: empty corpus");
  std::vector<const ReleasePaper*> pool;
  std::vector<double> score;
  for (const auto& p : corpus) {
    if (p.paper_id == target_id) continue;
    pool.push_back(&p);
  }
  std::vector<std::size_t> order(pool.size());
  for (std::size_t i = 0; i < pool.size(); ++i) {
    order[i] = i;
    score.push_back(lda::dot(target.span(), pool[i]->theta.span()));
  }
  const std::size_t take = std::min(n, pool.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take), order.end(),
                    [&](std::size_t a, std::size_t b) {
                      return ranks_before(score[a], pool[a]->submitted, pool[a]->paper_id, score[b],
                                          pool[b]->submitted, pool[b]->paper_id);
                    });
  std::vector<RelatedPaper> out;
  for (std::size_t i = 0; i < take; ++i) out.push_back({pool[order[i]]->paper_id, score[order[i]]});
  return out;
}

/// One followed category's vector per category code.
struct UserProfile {
  std::string user_id;
  std::set<std::string> categories_followed;
  std::map<std::string, std::vector<double>> vectors;
};

struct RebuildResult {
  std::map<std::string, std::vector<double>> vectors;  // by user id
  std::set<std::string> uninferrable_papers;
  std::size_t skipped_events = 0;
};

/// Recomputes every user's vector from scratch with topic vectors from a new
/// model. Events on papers the new model cannot place are skipped and
/// reported.
inline RebuildResult rebuild_user_vectors(const std::map<std::string, std::vector<ClickEvent>>& logs,
                                          const ThetaLookup& theta_of, std::size_t num_topics, Instant query_time,
                                          const WeightConfig& cfg = {}) {
  RebuildResult r;
  for (const auto& [user, events] : logs) {
    UserVectorAccumulator acc(num_topics, query_time, cfg);
    for (const auto& e : events) {
      auto theta = theta_of(e.paper_id);
      if (!theta) {
        r.uninferrable_papers.insert(e.paper_id);
        ++r.skipped_events;
        continue;
      }
      acc.add(e, *theta);
    }
    r.vectors[user] = acc.value();
  }
  return r;
}

}  // namespace paperrank::ranking
