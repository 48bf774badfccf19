#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "paperrank/date.hpp"
#include "paperrank/digest.hpp"
#include "paperrank/ingest.hpp"
#include "paperrank/lda/model.hpp"
#include "paperrank/paper.hpp"
#include "paperrank/ranking.hpp"

namespace paperrank::store {

struct UserRecord {
  std::string id;
  std::string username;
  std::string salt_hex;
  std::string password_hash_hex;
  std::set<std::string> categories;
  Instant created{};

  bool operator==(const UserRecord&) const = default;
};

struct StoredEvent {
  std::uint64_t id = 0;
  ranking::ClickEvent event;
};

struct UpsertResult {
  std::size_t inserted = 0;
  std::size_t updated = 0;
  bool operator==(const UpsertResult&) const = default;
};

/// Hash of a paper's canonical JSON form. Paper vectors remember the hash
/// of the content they were inferred from; a mismatch marks them stale.
inline std::string paper_content_digest(const PaperRecord& rec) { return sha256_hex(to_json(rec).dump()); }

/// Storage contract shared by every backend.
///
/// Integrity rules: events reference an existing user and paper; paper
/// vectors reference a registered model version and are unique per
/// (paper, version).
class Repository {
 public:
  virtual ~Repository() = default;

  // papers
  virtual UpsertResult upsert_papers(const std::vector<PaperRecord>& records) = 0;
  virtual std::optional<PaperRecord> paper(const std::string& id) const = 0;
  /// Papers submitted in [from, to], inclusive, in id order.
  virtual std::vector<PaperRecord> papers_between(Days from, Days to) const = 0;
  virtual std::vector<PaperRecord> all_papers() const = 0;

  // users
  virtual UserRecord create_user(const std::string& username, const std::string& salt_hex,
                                 const std::string& password_hash_hex, Instant created) = 0;
  virtual std::optional<UserRecord> user(const std::string& id) const = 0;
  virtual std::optional<UserRecord> user_by_name(const std::string& username) const = 0;
  virtual std::vector<UserRecord> all_users() const = 0;
  virtual void set_user_categories(const std::string& id, const std::set<std::string>& categories) = 0;

  // events
  virtual std::uint64_t append_event(const ranking::ClickEvent& event) = 0;
  virtual std::vector<StoredEvent> events_for(const std::string& user_id) const = 0;
  virtual std::map<std::string, std::vector<ranking::ClickEvent>> event_logs() const = 0;

  // models and vectors
  virtual void register_model(const std::string& version) = 0;
  virtual bool has_model(const std::string& version) const = 0;
  virtual void put_paper_vector(const std::string& paper_id, const std::string& version,
                                const lda::TopicVector& theta) = 0;
  virtual std::optional<lda::TopicVector> paper_vector(const std::string& paper_id,
                                                       const std::string& version) const = 0;
  /// True when the paper changed since its vector under `version` was stored.
  virtual bool vector_is_stale(const std::string& paper_id, const std::string& version) const = 0;
  virtual void put_user_vector(const std::string& user_id, const std::string& category, const std::string& version,
                               const std::vector<double>& u) = 0;
  virtual std::optional<std::vector<double>> user_vector(const std::string& user_id, const std::string& category,
                                                         const std::string& version) const = 0;
};

}  // namespace paperrank::store
