#pragma once

// Transport-independent core of the web service: accounts, listings, event
// recording, related papers and the nightly ingest job. The HTTP layer is a
// thin mapping onto this class.

#include <algorithm>
#include <array>
#include <atomic>
#include <cctype>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <shared_mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "paperrank/lda/model_io.hpp"
#include "paperrank/lda/online_vb.hpp"
#include "paperrank/ranking.hpp"
#include "paperrank/service/auth.hpp"
#include "paperrank/store/repository.hpp"
#include "paperrank/training.hpp"

namespace paperrank::service {

struct ServiceConfig {
  std::set<std::string> categories{"astro-ph", "gr-qc", "hep-ph", "hep-th"};
  std::chrono::seconds session_ttl{std::chrono::hours(24)};
  int pbkdf2_iterations = 200000;
  std::size_t default_limit = 200;
  std::size_t max_limit = 1000;
  std::size_t max_related = 100;
  ranking::WeightConfig weights;
  std::function<Instant()> clock = now_instant;
};

enum class SortMode { date, personal };

struct ListQuery {
  std::vector<std::string> categories;  // empty: the user's followed set, else everything
  Days from{};
  Days to{};
  SortMode sort = SortMode::date;
  std::optional<std::size_t> limit;
  std::size_t offset = 0;
};

struct ListedPaper {
  PaperRecord paper;
  std::optional<double> score;  // personal sort only, when the paper has a vector
};

struct EventOutcome {
  std::uint64_t id = 0;
  bool duplicate = false;
};

struct RelatedItem {
  PaperRecord paper;
  double inner_product = 0.0;
};

struct InferenceFailure {
  std::string paper_id;
  std::string category;
  std::string reason;
};

struct NightlyReport {
  std::size_t new_papers = 0;
  std::size_t updated = 0;
  std::size_t inferred = 0;
  std::vector<InferenceFailure> failures;
};

struct SwapReport {
  std::string category;
  std::string version;
  std::size_t inferred = 0;
  std::vector<InferenceFailure> failures;
  std::size_t users = 0;
  std::size_t skipped_events = 0;
  std::set<std::string> uninferrable_papers;
};

/// Every model directory directly under `dir` (or `dir` itself when it holds
/// a model), in path order.
inline std::vector<lda::StoredModel> load_models_dir(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw ConfigError("models directory " + dir.string() + " does not exist");
  if (fs::exists(dir / "model.json")) return {lda::load_model(dir)};
  std::vector<fs::path> subdirs;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_directory() && fs::exists(e.path() / "model.json")) subdirs.push_back(e.path());
  std::sort(subdirs.begin(), subdirs.end());
  std::vector<lda::StoredModel> out;
  for (const auto& d : subdirs) out.push_back(lda::load_model(d));
  return out;
}

class Engine {
 public:
  Engine(store::Repository& repo, std::vector<lda::StoredModel> models, ServiceConfig config = {})
      : repo_(repo), config_(std::move(config)), sessions_(config_.session_ttl) {
    if (config_.default_limit < 1 || config_.default_limit > config_.max_limit)
      throw ConfigError("default_limit must be in [1, max_limit]");
    for (auto& sm : models) {
      check_servable(sm);
      if (models_.contains(sm.category)) throw ConfigError("two models for category " + sm.category);
      repo_.register_model(sm.version);
      auto cat = sm.category;
      models_.emplace(std::move(cat), std::make_shared<const CategoryModel>(std::move(sm)));
    }
  }

  const ServiceConfig& config() const { return config_; }
  Instant now() const { return config_.clock(); }

  /// Categories a user may follow: the configured ones that have a model.
  std::vector<std::string> available_categories() const {
    std::shared_lock lock(models_mu_);
    std::vector<std::string> out;
    for (const auto& [c, m] : models_) out.push_back(c);
    return out;
  }

  std::optional<std::string> model_version(const std::string& category) const {
    auto m = model_for(category);
    if (!m) return std::nullopt;
    return m->stored.version;
  }

  // Accounts ---------------------------------------------------------------

  store::UserRecord register_user(const std::string& username, const std::string& password) {
    if (username.size() < 3 || username.size() > 64 ||
        !std::all_of(username.begin(), username.end(), [](unsigned char c) {
          return std::isalnum(c) || c == '_' || c == '-' || c == '.';
        }))
      throw ValidationError("username must be 3-64 characters from [A-Za-z0-9_.-]");
    if (password.size() < 8) throw ValidationError("password must have at least 8 characters");
    const auto salt = to_hex(random_bytes(16));
    return repo_.create_user(username, salt, hash_password(password, salt, config_.pbkdf2_iterations), now());
  }

  Session login(const std::string& username, const std::string& password) {
    auto user = repo_.user_by_name(username);
    if (!user || !verify_password(password, user->salt_hex, user->password_hash_hex))
      throw AuthError("invalid username or password");
    return sessions_.issue(user->id, now());
  }

  /// User id behind a bearer token. Throws AuthError.
  std::string authenticate(const std::string& token) { return sessions_.resolve(token, now()); }

  void logout(const std::string& token) { sessions_.revoke(token); }

  std::set<std::string> categories(const std::string& user_id) const { return require_user(user_id).categories; }

  void set_categories(const std::string& user_id, const std::set<std::string>& categories) {
    for (const auto& c : categories)
      if (!model_for(c)) throw ValidationError("category " + c + " is not served");
    repo_.set_user_categories(user_id, categories);
  }

  // Listings ---------------------------------------------------------------

  std::vector<ListedPaper> list_papers(const ListQuery& q, const std::optional<std::string>& user_id) {
    if (q.from > q.to) throw ValidationError("from must not be after to");
    const std::size_t limit = q.limit.value_or(config_.default_limit);
    if (limit < 1 || limit > config_.max_limit)
      throw ValidationError("limit must be in [1, " + std::to_string(config_.max_limit) + "]");
    for (const auto& c : q.categories)
      if (!is_valid_category(c)) throw ValidationError("invalid category '" + c + "'");
    if (q.sort == SortMode::personal && !user_id) throw AuthError("personal sort requires a session");

    std::vector<std::string> cats = q.categories;
    if (cats.empty() && user_id) {
      auto followed = categories(*user_id);
      cats.assign(followed.begin(), followed.end());
    }
    std::vector<PaperRecord> papers;
    for (auto& p : repo_.papers_between(q.from, q.to)) {
      if (cats.empty() || std::any_of(cats.begin(), cats.end(), [&](const auto& c) { return has_category(p, c); }))
        papers.push_back(std::move(p));
    }

    std::vector<ListedPaper> out;
    out.reserve(papers.size());
    if (q.sort == SortMode::personal) {
      // Scoring category: the first listed category the paper belongs to
      // that has a model.
      std::vector<std::string> scoring = cats.empty() ? available_categories() : cats;
      std::map<std::string, std::vector<double>> u_by_cat;
      const Instant t = now();
      for (auto& p : papers) {
        ListedPaper lp{std::move(p), std::nullopt};
        for (const auto& c : scoring) {
          if (!has_category(lp.paper, c)) continue;
          auto model = model_for(c);
          if (!model) continue;
          auto theta = repo_.paper_vector(lp.paper.id, model->stored.version);
          if (!theta) break;
          auto it = u_by_cat.find(c);
          if (it == u_by_cat.end()) it = u_by_cat.emplace(c, user_vector(*user_id, c, t)).first;
          lp.score = lda::dot(it->second, theta->span());
          break;
        }
        out.push_back(std::move(lp));
      }
    } else {
      for (auto& p : papers) out.push_back({std::move(p), std::nullopt});
    }
    std::sort(out.begin(), out.end(), [](const ListedPaper& a, const ListedPaper& b) {
      return ranking::ranks_before(a.score.value_or(0.0), a.paper.submitted, a.paper.id, b.score.value_or(0.0),
                                   b.paper.submitted, b.paper.id);
    });
    if (q.offset >= out.size()) return {};
    const auto end = std::min(out.size(), q.offset + limit);
    return {std::make_move_iterator(out.begin() + static_cast<std::ptrdiff_t>(q.offset)),
            std::make_move_iterator(out.begin() + static_cast<std::ptrdiff_t>(end))};
  }

  /// Latest submission date in the store, if any.
  std::optional<Days> latest_day() const {
    std::optional<Days> best;
    for (const auto& p : repo_.all_papers())
      if (!best || p.submitted > *best) best = p.submitted;
    return best;
  }

  /// Decayed user vector for one category at `query_time`, computed from the
  /// event log. Events on papers the category model has no vector for are
  /// skipped.
  std::vector<double> user_vector(const std::string& user_id, const std::string& category, Instant query_time) {
    auto model = model_for(category);
    if (!model) throw NotFoundError("no model for category " + category);
    auto resolved = resolved_events(user_id, category, *model);
    ranking::UserVectorAccumulator acc(model->stored.model.num_topics(), query_time, config_.weights);
    for (const auto& [e, theta] : *resolved) acc.add(e, theta);
    return acc.value();
  }

  // Events -----------------------------------------------------------------

  /// Records a click. A repeat of an event already logged the same UTC day
  /// is not stored and comes back with duplicate=true and the earlier id.
  EventOutcome record_event(const std::string& user_id, const std::string& paper_id, const std::string& kind_text) {
    auto kind = ranking::parse_event_kind(kind_text);
    if (!kind || *kind == ranking::EventKind::authored)
      throw ValidationError("kind must be abstract_expand or pdf_open");
    return append_deduplicated({user_id, paper_id, *kind, now()});
  }

  /// Marks the user as an author of `paper_id`. The event is dated at the
  /// paper's submission.
  EventOutcome record_authored(const std::string& user_id, const std::string& paper_id) {
    auto paper = repo_.paper(paper_id);
    if (!paper) throw NotFoundError("unknown paper " + paper_id);
    return append_deduplicated({user_id, paper_id, ranking::EventKind::authored, to_instant(paper->submitted)});
  }

  // Related papers ---------------------------------------------------------

  std::vector<RelatedItem> related(const std::string& paper_id, std::size_t n,
                                   const std::optional<std::string>& category = std::nullopt) {
    if (n < 1 || n > config_.max_related)
      throw ValidationError("n must be in [1, " + std::to_string(config_.max_related) + "]");
    auto target = repo_.paper(paper_id);
    if (!target) throw NotFoundError("unknown paper " + paper_id);

    std::shared_ptr<const CategoryModel> model;
    std::optional<lda::TopicVector> theta;
    if (category) {
      model = model_for(*category);
      if (!model) throw ValidationError("category " + *category + " is not served");
      theta = repo_.paper_vector(paper_id, model->stored.version);
    } else {
      for (const auto& c : available_categories()) {
        auto m = model_for(c);
        if (!m) continue;
        if ((theta = repo_.paper_vector(paper_id, m->stored.version))) {
          model = m;
          break;
        }
      }
    }
    if (!theta) throw NotFoundError("paper " + paper_id + " has no topic vector");

    std::vector<ranking::ReleasePaper> corpus;
    std::unordered_map<std::string, PaperRecord> by_id;
    for (auto& p : repo_.all_papers()) {
      auto v = repo_.paper_vector(p.id, model->stored.version);
      if (!v || v->size() != theta->size()) continue;
      corpus.push_back({p.id, std::move(*v), p.submitted});
      by_id.emplace(p.id, std::move(p));
    }
    std::vector<RelatedItem> out;
    if (corpus.size() < 2) return out;
    for (auto& r : ranking::related_papers(paper_id, *theta, corpus, n))
      out.push_back({std::move(by_id.at(r.paper_id)), r.inner_product});
    return out;
  }

  // Nightly job ------------------------------------------------------------

  /// Upserts a release and infers topic vectors for its papers under every
  /// model whose category they belong to. Rerunning the same release adds
  /// nothing.
  NightlyReport nightly(const std::vector<PaperRecord>& release) {
    std::lock_guard writer(nightly_mu_);
    NightlyReport report;
    std::vector<PaperRecord> accepted;
    for (const auto& rec : release) {
      try {
        auto r = repo_.upsert_papers({rec});
        report.new_papers += r.inserted;
        report.updated += r.updated;
        accepted.push_back(rec);
      } catch (const ValidationError& e) {
        report.failures.push_back({rec.id, "", e.what()});
      }
    }
    std::set<std::string> inferred;
    for (const auto& [cat, model] : snapshot_models()) {
      auto r = infer_missing(*model, accepted);
      inferred.insert(r.first.begin(), r.first.end());
      report.failures.insert(report.failures.end(), r.second.begin(), r.second.end());
    }
    report.inferred = inferred.size();
    clear_cache();
    return report;
  }

  /// Installs a new model for its category: infers vectors for every stored
  /// paper in the category, recomputes and stores all user vectors, then
  /// swaps the model in. Readers see either the old or the new model.
  SwapReport swap_model(lda::StoredModel sm) {
    std::lock_guard writer(nightly_mu_);
    check_servable(sm);
    repo_.register_model(sm.version);
    auto model = std::make_shared<const CategoryModel>(std::move(sm));
    const auto& stored = model->stored;

    SwapReport report{stored.category, stored.version, 0, {}, 0, 0, {}};
    auto [ok, failures] = infer_missing(*model, filter_category(repo_.all_papers(), stored.category));
    report.inferred = ok.size();
    report.failures = std::move(failures);

    const Instant t = now();
    auto rebuilt = ranking::rebuild_user_vectors(
        repo_.event_logs(),
        [&](const std::string& id) { return repo_.paper_vector(id, stored.version); },
        stored.model.num_topics(), t, config_.weights);
    for (const auto& [user, u] : rebuilt.vectors) repo_.put_user_vector(user, stored.category, stored.version, u);
    report.users = rebuilt.vectors.size();
    report.skipped_events = rebuilt.skipped_events;
    report.uninferrable_papers = std::move(rebuilt.uninferrable_papers);
    {
      std::unique_lock lock(models_mu_);
      models_[stored.category] = model;
    }
    clear_cache();
    return report;
  }

  /// Infers any missing or stale vectors for all stored papers.
  NightlyReport backfill() {
    std::lock_guard writer(nightly_mu_);
    NightlyReport report;
    auto papers = repo_.all_papers();
    std::set<std::string> inferred;
    for (const auto& [cat, model] : snapshot_models()) {
      auto r = infer_missing(*model, papers);
      inferred.insert(r.first.begin(), r.first.end());
      report.failures.insert(report.failures.end(), r.second.begin(), r.second.end());
    }
    report.inferred = inferred.size();
    clear_cache();
    return report;
  }

  store::Repository& repository() { return repo_; }

 private:
  struct CategoryModel {
    explicit CategoryModel(lda::StoredModel sm) : stored(std::move(sm)), eb(stored.model) {}
    lda::StoredModel stored;
    lda::ExpElogBeta eb;
  };

  using Resolved = std::vector<std::pair<ranking::ClickEvent, lda::TopicVector>>;

  struct CacheEntry {
    std::map<std::string, std::shared_ptr<const Resolved>> by_category;
  };

  void check_servable(const lda::StoredModel& sm) const {
    if (sm.category.empty()) throw ConfigError("model " + sm.version + " has no category");
    if (!config_.categories.contains(sm.category))
      throw ConfigError("model category " + sm.category + " is not in the configured category list");
  }

  std::shared_ptr<const CategoryModel> model_for(const std::string& category) const {
    std::shared_lock lock(models_mu_);
    auto it = models_.find(category);
    return it == models_.end() ? nullptr : it->second;
  }

  std::map<std::string, std::shared_ptr<const CategoryModel>> snapshot_models() const {
    std::shared_lock lock(models_mu_);
    return models_;
  }

  store::UserRecord require_user(const std::string& user_id) const {
    auto u = repo_.user(user_id);
    if (!u) throw NotFoundError("unknown user " + user_id);
    return *u;
  }

  std::mutex& user_lock(const std::string& user_id) {
    return user_locks_[std::hash<std::string>{}(user_id) % user_locks_.size()];
  }

  EventOutcome append_deduplicated(const ranking::ClickEvent& e) {
    if (!repo_.paper(e.paper_id)) throw NotFoundError("unknown paper " + e.paper_id);
    std::lock_guard lock(user_lock(e.user_id));
    const auto key = ranking::dedup_key(e);
    for (const auto& s : repo_.events_for(e.user_id))
      if (ranking::dedup_key(s.event) == key) return {s.id, true};
    const auto id = repo_.append_event(e);
    invalidate(e.user_id);
    return {id, false};
  }

  // Pairs every logged event with the paper's vector under `model`. The
  // expensive part of a user vector; the decay is applied per query.
  std::shared_ptr<const Resolved> resolved_events(const std::string& user_id, const std::string& category,
                                                  const CategoryModel& model) {
    std::uint64_t generation = 0;
    {
      std::lock_guard lock(cache_mu_);
      auto it = cache_.find(user_id);
      if (it != cache_.end()) {
        auto c = it->second.by_category.find(category);
        if (c != it->second.by_category.end()) return c->second;
      }
      generation = generation_;
    }
    auto out = std::make_shared<Resolved>();
    for (const auto& s : repo_.events_for(user_id)) {
      auto theta = repo_.paper_vector(s.event.paper_id, model.stored.version);
      if (theta && theta->size() == model.stored.model.num_topics()) out->emplace_back(s.event, std::move(*theta));
    }
    std::lock_guard lock(cache_mu_);
    if (generation == generation_) cache_[user_id].by_category[category] = out;
    return out;
  }

  void invalidate(const std::string& user_id) {
    std::lock_guard lock(cache_mu_);
    cache_.erase(user_id);
    ++generation_;
  }

  void clear_cache() {
    std::lock_guard lock(cache_mu_);
    cache_.clear();
    ++generation_;
  }

  /// Vectors for papers in the model's category that have none or a stale
  /// one. Returns the ids inferred and the failures.
  std::pair<std::set<std::string>, std::vector<InferenceFailure>> infer_missing(
      const CategoryModel& model, const std::vector<PaperRecord>& papers) {
    std::set<std::string> done;
    std::vector<InferenceFailure> failures;
    const auto& sm = model.stored;
    for (const auto& p : papers) {
      if (!has_category(p, sm.category)) continue;
      if (repo_.paper_vector(p.id, sm.version) && !repo_.vector_is_stale(p.id, sm.version)) continue;
      try {
        auto bow = bag_for(p, sm);
        if (bow.empty()) throw ValidationError("no tokens from the model's dictionary");
        repo_.put_paper_vector(p.id, sm.version, lda::infer_theta(bow, sm.model, model.eb));
        done.insert(p.id);
      } catch (const Error& e) {
        failures.push_back({p.id, sm.category, e.what()});
      }
    }
    return {std::move(done), std::move(failures)};
  }

  store::Repository& repo_;
  ServiceConfig config_;
  SessionStore sessions_;

  mutable std::shared_mutex models_mu_;
  std::map<std::string, std::shared_ptr<const CategoryModel>> models_;

  std::mutex nightly_mu_;
  std::array<std::mutex, 64> user_locks_;

  std::mutex cache_mu_;
  std::uint64_t generation_ = 0;
  std::unordered_map<std::string, CacheEntry> cache_;
};

}  // namespace paperrank::service
