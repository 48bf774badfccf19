#pragma once

// A service instance over a throwaway store, a hep-ph model trained on the
// fixture history, and a clock the test moves by hand.

#include <unistd.h>

#include <atomic>
#include <filesystem>
#include <memory>
#include <string>
#include <thread>

#include "paperrank/paperrank.hpp"
#include "paperrank/service/http.hpp"

namespace paperrank::testing {

inline std::string fixture(const std::string& name) { return std::string(PAPERRANK_FIXTURE_DIR) + "/" + name; }

inline text::PipelineConfig fixture_pipeline() {
  text::PipelineConfig cfg;
  cfg.min_docs = 5;
  return cfg;
}

inline lda::StoredModel train_fixture_model(std::uint64_t seed = 1, std::size_t k = 4) {
  auto history = load_corpus(fixture("history.jsonl")).records;
  lda::TrainSchedule s;
  s.passes = 30;
  s.batch_size = 64;
  s.seed = seed;
  return train_model(filter_category(history, "hep-ph"), k, s, fixture_pipeline(), "hep-ph");
}

/// Release day `i` (0-based) of the fixture.
inline Days release_day(int i) { return parse_date("2020-01-06") + std::chrono::days{i}; }

inline std::vector<PaperRecord> release_records(int day) {
  FileReleaseSource src(fixture("release.jsonl"));
  return src.fetch(release_day(day));
}

/// Dominant topic as written into the fixture titles ("Neutrino ...").
inline std::string fixture_topic(const PaperRecord& p) { return p.title.substr(0, p.title.find(' ')); }

class ServiceHarness {
 public:
  explicit ServiceHarness(const std::string& tag, std::vector<lda::StoredModel> models = {}) {
    dir_ = std::filesystem::temp_directory_path() / ("paperrank_svc_" + tag + "_" + std::to_string(::getpid()));
    std::filesystem::remove_all(dir_);
    store_ = std::make_unique<store::FileStore>(dir_);
    if (models.empty()) models.push_back(train_fixture_model());
    service::ServiceConfig cfg;
    cfg.pbkdf2_iterations = 1000;
    cfg.clock = [this] { return Instant{std::chrono::seconds{clock_.load()}}; };
    set_time(to_instant(release_day(0)) + std::chrono::hours(20));
    engine_ = std::make_unique<service::Engine>(*store_, std::move(models), cfg);
  }

  ~ServiceHarness() {
    stop_http();
    engine_.reset();
    store_.reset();
    std::filesystem::remove_all(dir_);
  }

  service::Engine& engine() { return *engine_; }
  store::FileStore& store() { return *store_; }
  const std::filesystem::path& dir() const { return dir_; }

  void set_time(Instant t) { clock_ = t.time_since_epoch().count(); }
  Instant time() const { return Instant{std::chrono::seconds{clock_.load()}}; }
  void advance(std::chrono::seconds d) { clock_ += d.count(); }

  /// Starts the HTTP server on an ephemeral loopback port.
  int start_http() {
    server_ = std::make_unique<httplib::Server>();
    service::install_routes(*server_, *engine_);
    port_ = server_->bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_->listen_after_bind(); });
    server_->wait_until_ready();
    return port_;
  }

  void stop_http() {
    if (!server_) return;
    server_->stop();
    if (thread_.joinable()) thread_.join();
    server_.reset();
  }

  httplib::Client client() const {
    httplib::Client c("127.0.0.1", port_);
    c.set_connection_timeout(5);
    c.set_read_timeout(30);
    return c;
  }

 private:
  std::filesystem::path dir_;
  std::atomic<long long> clock_{0};
  std::unique_ptr<store::FileStore> store_;
  std::unique_ptr<service::Engine> engine_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
  int port_ = 0;
};

}  // namespace paperrank::testing
