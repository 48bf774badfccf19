#pragma once

// Embedded file-backed repository. Data directory layout:
//
//   <dir>/papers/papers.log                  paper upserts (JSON payloads)
//   <dir>/users/users.log                    user records, latest wins
//   <dir>/events.log                         click/authorship events
//   <dir>/models/<version>/MODEL             marks a registered version
//   <dir>/models/<version>/paper_vectors.log binary theta records
//   <dir>/models/<version>/user_vectors.log  binary user vectors
//
// Every *.log is a RecordLog (length-prefixed, checksummed, fsync'd), so
// reopening after a crash replays exactly the acknowledged operations.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <string>
#include <unordered_map>

#include <json.hpp>

#include "paperrank/error.hpp"
#include "paperrank/lda/model_io.hpp"
#include "paperrank/store/record_log.hpp"
#include "paperrank/store/repository.hpp"

namespace paperrank::store {

namespace detail {

class BinaryWriter {
 public:
  BinaryWriter& str(std::string_view s) {
    u32(static_cast<std::uint32_t>(s.size()));
    out_.append(s);
    return *this;
  }
  BinaryWriter& u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
    return *this;
  }
  BinaryWriter& f64s(std::span<const double> v) {
    u32(static_cast<std::uint32_t>(v.size()));
    out_ += lda::encode_f64le(v);
    return *this;
  }
  std::string take() { return std::move(out_); }

 private:
  std::string out_;
};

class BinaryReader {
 public:
  explicit BinaryReader(std::string_view in) : in_(in) {}
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t{static_cast<unsigned char>(in_[pos_ + i])} << (8 * i);
    pos_ += 4;
    return v;
  }
  std::string str() {
    auto n = u32();
    need(n);
    std::string s(in_.substr(pos_, n));
    pos_ += n;
    return s;
  }
  std::vector<double> f64s() {
    auto n = u32();
    need(std::size_t{n} * 8);
    auto v = lda::decode_f64le(in_.substr(pos_, std::size_t{n} * 8));
    pos_ += std::size_t{n} * 8;
    return v;
  }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > in_.size()) throw ParseError("store: truncated binary record", pos_);
  }
  std::string_view in_;
  std::size_t pos_ = 0;
};

inline nlohmann::json user_to_json(const UserRecord& u) {
  return {{"id", u.id},
          {"username", u.username},
          {"salt", u.salt_hex},
          {"hash", u.password_hash_hex},
          {"categories", u.categories},
          {"created", to_unix(u.created)}};
}

inline UserRecord user_from_json(const nlohmann::json& j) {
  UserRecord u;
  u.id = j.at("id").get<std::string>();
  u.username = j.at("username").get<std::string>();
  u.salt_hex = j.at("salt").get<std::string>();
  u.password_hash_hex = j.at("hash").get<std::string>();
  u.categories = j.at("categories").get<std::set<std::string>>();
  u.created = from_unix(j.at("created").get<long long>());
  return u;
}

}  // namespace detail

inline nlohmann::json event_to_json(std::uint64_t id, const ranking::ClickEvent& e) {
  return {{"id", id},
          {"user", e.user_id},
          {"paper", e.paper_id},
          {"kind", std::string(ranking::to_string(e.kind))},
          {"ts", to_unix(e.timestamp)}};
}

inline StoredEvent event_from_json(const nlohmann::json& j) {
  StoredEvent s;
  s.id = j.at("id").get<std::uint64_t>();
  s.event.user_id = j.at("user").get<std::string>();
  s.event.paper_id = j.at("paper").get<std::string>();
  auto kind = ranking::parse_event_kind(j.at("kind").get<std::string>());
  if (!kind) throw ParseError("store: unknown event kind", 0);
  s.event.kind = *kind;
  s.event.timestamp = from_unix(j.at("ts").get<long long>());
  return s;
}

class FileStore final : public Repository {
 public:
  explicit FileStore(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::filesystem::create_directories(dir_ / "papers");
    std::filesystem::create_directories(dir_ / "users");
    std::filesystem::create_directories(dir_ / "models");
    papers_log_ = std::make_unique<RecordLog>(dir_ / "papers" / "papers.log");
    users_log_ = std::make_unique<RecordLog>(dir_ / "users" / "users.log");
    events_log_ = std::make_unique<RecordLog>(dir_ / "events.log");
    replay();
  }

  const std::filesystem::path& directory() const { return dir_; }

  UpsertResult upsert_papers(const std::vector<PaperRecord>& records) override {
    std::unique_lock lock(mu_);
    UpsertResult r;
    for (auto rec : records) {
      try {
        canonicalize(rec);
      } catch (const ValidationError& e) {
        throw ValidationError(std::string("upsert rejected: ") + e.what());
      }
      auto digest = paper_content_digest(rec);
      auto it = papers_.find(rec.id);
      if (it != papers_.end() && it->second.digest == digest) continue;
      papers_log_->append(to_json(rec).dump());
      (it == papers_.end() ? r.inserted : r.updated)++;
      auto id = rec.id;
      papers_[std::move(id)] = PaperEntry{std::move(rec), std::move(digest)};
    }
    return r;
  }

  std::optional<PaperRecord> paper(const std::string& id) const override {
    std::shared_lock lock(mu_);
    auto it = papers_.find(id);
    if (it == papers_.end()) return std::nullopt;
    return it->second.record;
  }

  std::vector<PaperRecord> papers_between(Days from, Days to) const override {
    std::shared_lock lock(mu_);
    std::vector<PaperRecord> out;
    for (const auto& [id, p] : papers_)
      if (p.record.submitted >= from && p.record.submitted <= to) out.push_back(p.record);
    return out;
  }

  std::vector<PaperRecord> all_papers() const override {
    std::shared_lock lock(mu_);
    std::vector<PaperRecord> out;
    for (const auto& [id, p] : papers_) out.push_back(p.record);
    return out;
  }

  UserRecord create_user(const std::string& username, const std::string& salt_hex,
                         const std::string& password_hash_hex, Instant created) override {
    std::unique_lock lock(mu_);
    if (username.empty()) throw ValidationError("username must not be empty");
    if (user_ids_by_name_.contains(username)) throw ConflictError("username '" + username + "' is taken");
    UserRecord u;
    char buf[24];
    std::snprintf(buf, sizeof buf, "u%06zu", users_.size() + 1);
    u.id = buf;
    u.username = username;
    u.salt_hex = salt_hex;
    u.password_hash_hex = password_hash_hex;
    u.created = created;
    users_log_->append(detail::user_to_json(u).dump());
    user_ids_by_name_[u.username] = u.id;
    users_[u.id] = u;
    return u;
  }

  std::optional<UserRecord> user(const std::string& id) const override {
    std::shared_lock lock(mu_);
    auto it = users_.find(id);
    if (it == users_.end()) return std::nullopt;
    return it->second;
  }

  std::optional<UserRecord> user_by_name(const std::string& username) const override {
    std::shared_lock lock(mu_);
    auto it = user_ids_by_name_.find(username);
    if (it == user_ids_by_name_.end()) return std::nullopt;
    return users_.at(it->second);
  }

  std::vector<UserRecord> all_users() const override {
    std::shared_lock lock(mu_);
    std::vector<UserRecord> out;
    for (const auto& [id, u] : users_) out.push_back(u);
    return out;
  }

  void set_user_categories(const std::string& id, const std::set<std::string>& categories) override {
    std::unique_lock lock(mu_);
    auto it = users_.find(id);
    if (it == users_.end()) throw NotFoundError("unknown user " + id);
    UserRecord u = it->second;
    u.categories = categories;
    users_log_->append(detail::user_to_json(u).dump());
    it->second = std::move(u);
  }

  std::uint64_t append_event(const ranking::ClickEvent& event) override {
    std::unique_lock lock(mu_);
    if (!users_.contains(event.user_id)) throw NotFoundError("unknown user " + event.user_id);
    if (!papers_.contains(event.paper_id)) throw NotFoundError("unknown paper " + event.paper_id);
    const std::uint64_t id = next_event_id_;
    events_log_->append(event_to_json(id, event).dump());
    ++next_event_id_;
    events_[event.user_id].push_back({id, event});
    return id;
  }

  std::vector<StoredEvent> events_for(const std::string& user_id) const override {
    std::shared_lock lock(mu_);
    auto it = events_.find(user_id);
    if (it == events_.end()) return {};
    return it->second;
  }

  std::map<std::string, std::vector<ranking::ClickEvent>> event_logs() const override {
    std::shared_lock lock(mu_);
    std::map<std::string, std::vector<ranking::ClickEvent>> out;
    for (const auto& [user, evs] : events_) {
      auto& v = out[user];
      for (const auto& e : evs) v.push_back(e.event);
    }
    for (const auto& [id, u] : users_) out[id];
    return out;
  }

  void register_model(const std::string& version) override {
    std::unique_lock lock(mu_);
    model_unlocked(version, true);
  }

  bool has_model(const std::string& version) const override {
    std::shared_lock lock(mu_);
    return models_.contains(version);
  }

  void put_paper_vector(const std::string& paper_id, const std::string& version,
                        const lda::TopicVector& theta) override {
    std::unique_lock lock(mu_);
    auto pit = papers_.find(paper_id);
    if (pit == papers_.end()) throw NotFoundError("unknown paper " + paper_id);
    auto* m = model_unlocked(version, false);
    if (!m) throw NotFoundError("unknown model version " + version);
    m->paper_log->append(
        detail::BinaryWriter{}.str(paper_id).str(pit->second.digest).f64s(theta.weights()).take());
    m->paper_vectors[paper_id] = VectorEntry{theta, pit->second.digest};
  }

  std::optional<lda::TopicVector> paper_vector(const std::string& paper_id,
                                               const std::string& version) const override {
    std::shared_lock lock(mu_);
    auto mit = models_.find(version);
    if (mit == models_.end()) return std::nullopt;
    auto it = mit->second->paper_vectors.find(paper_id);
    if (it == mit->second->paper_vectors.end()) return std::nullopt;
    return it->second.theta;
  }

  bool vector_is_stale(const std::string& paper_id, const std::string& version) const override {
    std::shared_lock lock(mu_);
    auto mit = models_.find(version);
    auto pit = papers_.find(paper_id);
    if (mit == models_.end() || pit == papers_.end()) return false;
    auto it = mit->second->paper_vectors.find(paper_id);
    return it != mit->second->paper_vectors.end() && it->second.paper_digest != pit->second.digest;
  }

  void put_user_vector(const std::string& user_id, const std::string& category, const std::string& version,
                       const std::vector<double>& u) override {
    std::unique_lock lock(mu_);
    if (!users_.contains(user_id)) throw NotFoundError("unknown user " + user_id);
    auto* m = model_unlocked(version, false);
    if (!m) throw NotFoundError("unknown model version " + version);
    m->user_log->append(detail::BinaryWriter{}.str(user_id).str(category).f64s(u).take());
    m->user_vectors[user_id + "\t" + category] = u;
  }

  std::optional<std::vector<double>> user_vector(const std::string& user_id, const std::string& category,
                                                 const std::string& version) const override {
    std::shared_lock lock(mu_);
    auto mit = models_.find(version);
    if (mit == models_.end()) return std::nullopt;
    auto it = mit->second->user_vectors.find(user_id + "\t" + category);
    if (it == mit->second->user_vectors.end()) return std::nullopt;
    return it->second;
  }

 private:
  struct PaperEntry {
    PaperRecord record;
    std::string digest;
  };
  struct VectorEntry {
    lda::TopicVector theta;
    std::string paper_digest;
  };
  struct ModelEntry {
    std::unique_ptr<RecordLog> paper_log;
    std::unique_ptr<RecordLog> user_log;
    std::unordered_map<std::string, VectorEntry> paper_vectors;
    std::unordered_map<std::string, std::vector<double>> user_vectors;
  };

  ModelEntry* model_unlocked(const std::string& version, bool create) {
    if (auto it = models_.find(version); it != models_.end()) return it->second.get();
    if (version.empty() || version.find('/') != std::string::npos || version.starts_with("."))
      throw ValidationError("invalid model version '" + version + "'");
    auto mdir = dir_ / "models" / version;
    if (!create && !std::filesystem::exists(mdir / "MODEL")) return nullptr;
    std::filesystem::create_directories(mdir);
    if (!std::filesystem::exists(mdir / "MODEL")) {
      lda::write_file(mdir / "MODEL", version + "\n");
      // Make the directory entry durable.
      int fd = ::open(mdir.c_str(), O_RDONLY | O_DIRECTORY);
      if (fd >= 0) {
        ::fsync(fd);
        ::close(fd);
      }
    }
    auto entry = std::make_unique<ModelEntry>();
    entry->paper_log = std::make_unique<RecordLog>(mdir / "paper_vectors.log");
    entry->user_log = std::make_unique<RecordLog>(mdir / "user_vectors.log");
    for (const auto& rec : entry->paper_log->initial_records()) {
      detail::BinaryReader r(rec);
      auto id = r.str();
      auto digest = r.str();
      entry->paper_vectors[id] = VectorEntry{lda::TopicVector::from_weights(r.f64s()), std::move(digest)};
    }
    for (const auto& rec : entry->user_log->initial_records()) {
      detail::BinaryReader r(rec);
      auto user = r.str();
      auto cat = r.str();
      entry->user_vectors[user + "\t" + cat] = r.f64s();
    }
    entry->paper_log->release_initial_records();
    entry->user_log->release_initial_records();
    return models_.emplace(version, std::move(entry)).first->second.get();
  }

  void replay() {
    for (const auto& rec : papers_log_->initial_records()) {
      auto p = record_from_json(nlohmann::json::parse(rec), 0);
      auto digest = paper_content_digest(p);
      auto id = p.id;
      papers_[std::move(id)] = PaperEntry{std::move(p), std::move(digest)};
    }
    for (const auto& rec : users_log_->initial_records()) {
      auto u = detail::user_from_json(nlohmann::json::parse(rec));
      user_ids_by_name_[u.username] = u.id;
      auto id = u.id;
      users_[std::move(id)] = std::move(u);
    }
    for (const auto& rec : events_log_->initial_records()) {
      auto e = event_from_json(nlohmann::json::parse(rec));
      next_event_id_ = std::max(next_event_id_, e.id + 1);
      events_[e.event.user_id].push_back(std::move(e));
    }
    papers_log_->release_initial_records();
    users_log_->release_initial_records();
    events_log_->release_initial_records();
    for (const auto& entry : std::filesystem::directory_iterator(dir_ / "models"))
      if (entry.is_directory() && std::filesystem::exists(entry.path() / "MODEL"))
        model_unlocked(entry.path().filename().string(), false);
  }

  std::filesystem::path dir_;
  mutable std::shared_mutex mu_;
  std::unique_ptr<RecordLog> papers_log_;
  std::unique_ptr<RecordLog> users_log_;
  std::unique_ptr<RecordLog> events_log_;
  std::map<std::string, PaperEntry> papers_;
  std::map<std::string, UserRecord> users_;
  std::unordered_map<std::string, std::string> user_ids_by_name_;
  std::map<std::string, std::vector<StoredEvent>> events_;
  std::map<std::string, std::unique_ptr<ModelEntry>> models_;
  std::uint64_t next_event_id_ = 1;
};

}  // namespace paperrank::store
