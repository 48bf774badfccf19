// Command-line front end: corpus ingestion, training, evaluation, the
// nightly job and the HTTP server.

#include <charconv>
#include <condition_variable>
#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <thread>

#include <CLI11.hpp>

#include "paperrank/paperrank.hpp"
#include "paperrank/service/http.hpp"

namespace pr = paperrank;
using nlohmann::json;

namespace {

void print(const json& j) { std::cout << j.dump(2) << "\n"; }

std::vector<pr::PaperRecord> read_corpus(const std::string& path, const std::string& format) {
  std::optional<pr::CorpusFormat> f;
  if (!format.empty()) f = pr::parse_format(format);
  return pr::load_corpus(path, f).records;
}

std::vector<std::size_t> parse_sizes(const std::string& list) {
  std::vector<std::size_t> out;
  for (const auto& part : pr::service::http_detail::split_commas(list)) {
    std::size_t v = 0;
    auto [p, ec] = std::from_chars(part.data(), part.data() + part.size(), v);
    if (ec != std::errc{} || p != part.data() + part.size()) throw pr::ConfigError("not a number: '" + part + "'");
    out.push_back(v);
  }
  return out;
}

std::string env_or(const char* name, const std::string& fallback) {
  const char* v = std::getenv(name);
  return v && *v ? std::string(v) : fallback;
}

/// Splits records into train and held-out parts by a deterministic shuffle.
std::pair<std::vector<pr::PaperRecord>, std::vector<pr::PaperRecord>> split_heldout(std::vector<pr::PaperRecord> recs,
                                                                                    double frac, std::uint64_t seed) {
  if (frac <= 0.0) return {std::move(recs), {}};
  if (frac >= 1.0) throw pr::ConfigError("heldout fraction must be below 1");
  pr::lda::Rng rng(seed ^ 0x5eedULL);
  rng.shuffle(recs);
  const auto n = static_cast<std::size_t>(frac * static_cast<double>(recs.size()));
  std::vector<pr::PaperRecord> held(recs.end() - static_cast<std::ptrdiff_t>(n), recs.end());
  recs.resize(recs.size() - n);
  return {std::move(recs), std::move(held)};
}

struct PipelineOpts {
  std::size_t min_docs = 50;
  double max_frac = 0.9;
  std::string stop_words;
  std::string tech_words;

  void add(CLI::App* cmd) {
    cmd->add_option("--min-docs", min_docs, "Drop tokens in fewer documents")->capture_default_str();
    cmd->add_option("--max-frac", max_frac, "Drop tokens in a larger share of documents")->capture_default_str();
    cmd->add_option("--stop-words", stop_words, "Stop-word list (one per line)")->check(CLI::ExistingFile);
    cmd->add_option("--tech-words", tech_words, "Protected tech-word list")->check(CLI::ExistingFile);
  }

  pr::text::PipelineConfig config() const {
    pr::text::PipelineConfig c;
    c.min_docs = min_docs;
    c.max_frac = max_frac;
    if (!stop_words.empty()) c.stop_words = pr::text::load_word_list(stop_words);
    if (!tech_words.empty()) c.tech_words = pr::text::load_word_list(tech_words);
    c.validate();
    return c;
  }
};

struct ScheduleOpts {
  pr::lda::TrainSchedule s;

  void add(CLI::App* cmd) {
    cmd->add_option("--passes", s.passes, "Sweeps over the corpus")->capture_default_str();
    cmd->add_option("--iters", s.e_step_iters, "E-step iteration cap")->capture_default_str();
    cmd->add_option("--batch", s.batch_size, "Documents per minibatch")->capture_default_str();
    cmd->add_option("--kappa", s.kappa, "Learning-rate decay")->capture_default_str();
    cmd->add_option("--tau0", s.tau0, "Learning-rate offset")->capture_default_str();
    cmd->add_option("--seed", s.seed, "Random seed")->capture_default_str();
    cmd->add_option("--threads", s.threads, "E-step threads")->capture_default_str();
  }
};

std::unique_ptr<pr::service::Engine> open_engine(pr::store::Repository& repo, const std::string& models_dir) {
  pr::service::ServiceConfig cfg;
  cfg.pbkdf2_iterations = std::stoi(env_or("PAPERRANK_PBKDF2_ITERATIONS", "200000"));
  cfg.session_ttl = std::chrono::hours(std::stoi(env_or("PAPERRANK_SESSION_TTL_HOURS", "24")));
  std::vector<pr::lda::StoredModel> models;
  if (!models_dir.empty()) models = pr::service::load_models_dir(models_dir);
  return std::make_unique<pr::service::Engine>(repo, std::move(models), cfg);
}

std::string require_user_id(pr::store::Repository& repo, const std::string& username) {
  auto u = repo.user_by_name(username);
  if (!u) throw pr::NotFoundError("unknown user " + username);
  return u->id;
}

json report_json(const pr::service::SwapReport& r) {
  json failures = json::array();
  for (const auto& f : r.failures) failures.push_back({{"paper_id", f.paper_id}, {"reason", f.reason}});
  return {{"category", r.category},     {"version", r.version},
          {"inferred", r.inferred},     {"failures", failures},
          {"users", r.users},           {"skipped_events", r.skipped_events},
          {"uninferrable_papers", r.uninferrable_papers}};
}

httplib::Server* g_server = nullptr;

void on_signal(int) {
  if (g_server) g_server->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Personalized ranking of new arXiv listings with online LDA"};
  app.require_subcommand(1);
  std::string data_dir, models_dir, format;

  // ingest
  auto* ingest = app.add_subcommand("ingest", "Validate corpus files and add them to the store");
  std::vector<std::string> ingest_files;
  ingest->add_option("files", ingest_files, "JSON-lines or OAI XML files")->required()->check(CLI::ExistingFile);
  ingest->add_option("--data", data_dir, "Store directory")->required();
  ingest->add_option("--format", format, "jsonl or oai (default: by extension)");

  // train
  auto* train = app.add_subcommand("train", "Train a topic model for one category");
  std::string corpus, out_dir, category;
  std::size_t topics = 40;
  double heldout_frac = 0.0;
  bool pure_only = false;
  PipelineOpts train_pipe;
  ScheduleOpts train_sched;
  train->add_option("--corpus", corpus, "Training corpus file (default: the store)");
  train->add_option("--data", data_dir, "Store directory, used when --corpus is absent");
  train->add_option("--format", format, "Corpus format");
  train->add_option("--category", category, "Category the model serves, e.g. hep-ph")->required();
  train->add_flag("--pure", pure_only, "Skip papers cross-listed outside the category");
  train->add_option("-k,--topics", topics, "Number of topics")->capture_default_str();
  train->add_option("--heldout-frac", heldout_frac, "Share held out and reported as perplexity");
  train->add_option("--out", out_dir, "Model directory to write")->required();
  train_pipe.add(train);
  train_sched.add(train);

  // eval
  auto* evalc = app.add_subcommand("eval", "Perplexity, coherence, top words and per-subcategory AUC");
  std::string model_dir;
  std::size_t topn = 10;
  evalc->add_option("--model", model_dir, "Model directory")->required()->check(CLI::ExistingDirectory);
  evalc->add_option("--corpus", corpus, "Evaluation corpus")->required()->check(CLI::ExistingFile);
  evalc->add_option("--format", format, "Corpus format");
  evalc->add_option("--top", topn, "Top words per topic")->capture_default_str();

  // pizza
  auto* pizza = app.add_subcommand("pizza", "Per-document pizza-plot coordinates as CSV");
  std::uint64_t pizza_seed = 0;
  std::string csv_out;
  pizza->add_option("--model", model_dir, "Model directory")->required()->check(CLI::ExistingDirectory);
  pizza->add_option("--corpus", corpus, "Corpus")->required()->check(CLI::ExistingFile);
  pizza->add_option("--format", format, "Corpus format");
  pizza->add_option("--seed", pizza_seed, "Seed for the angular jitter");
  pizza->add_option("--out", csv_out, "CSV file (default: stdout)");

  // scan
  auto* scan = app.add_subcommand("scan", "Coherence and held-out perplexity over a grid of K and schedules");
  std::string topic_list = "10,20,30,40,50,60", grid_list = "100x100";
  PipelineOpts scan_pipe;
  ScheduleOpts scan_sched;
  scan->add_option("--corpus", corpus, "Corpus")->required()->check(CLI::ExistingFile);
  scan->add_option("--format", format, "Corpus format");
  scan->add_option("--category", category, "Restrict to one category");
  scan->add_option("--topics", topic_list, "Comma-separated K values")->capture_default_str();
  scan->add_option("--grid", grid_list, "Comma-separated PASSESxITERS points")->capture_default_str();
  scan->add_option("--heldout-frac", heldout_frac, "Held-out share")->capture_default_str();
  scan->add_option("--out", csv_out, "CSV file (default: stdout)");
  scan_pipe.add(scan);
  scan_sched.add(scan);

  // nightly
  auto* nightly = app.add_subcommand("nightly", "Ingest one release day and infer its topic vectors");
  std::string release, date;
  nightly->add_option("--data", data_dir, "Store directory")->required();
  nightly->add_option("--models", models_dir, "Models directory")->required()->check(CLI::ExistingDirectory);
  nightly->add_option("--release", release, "Release file")->required()->check(CLI::ExistingFile);
  nightly->add_option("--date", date, "Release day YYYY-MM-DD")->required();

  // rebuild-users
  auto* rebuild = app.add_subcommand("rebuild-users", "Recompute paper and user vectors under the current models");
  rebuild->add_option("--data", data_dir, "Store directory")->required();
  rebuild->add_option("--models", models_dir, "Models directory")->required()->check(CLI::ExistingDirectory);

  // add-user, click, authored
  auto* add_user = app.add_subcommand("add-user", "Register a user (password from PAPERRANK_PASSWORD)");
  std::string username, password, paper_id, kind = "pdf_open";
  std::vector<std::string> categories;
  add_user->add_option("--data", data_dir, "Store directory")->required();
  add_user->add_option("--models", models_dir, "Models directory")->check(CLI::ExistingDirectory);
  add_user->add_option("--username", username, "User name")->required();
  add_user->add_option("--categories", categories, "Categories to follow");

  auto* click = app.add_subcommand("click", "Record a click event for a user");
  click->add_option("--data", data_dir, "Store directory")->required();
  click->add_option("--models", models_dir, "Models directory")->check(CLI::ExistingDirectory);
  click->add_option("--username", username, "User name")->required();
  click->add_option("--paper", paper_id, "Paper id")->required();
  click->add_option("--kind", kind, "abstract_expand or pdf_open")->capture_default_str();

  auto* authored = app.add_subcommand("authored", "Mark a user as author of a paper");
  authored->add_option("--data", data_dir, "Store directory")->required();
  authored->add_option("--username", username, "User name")->required();
  authored->add_option("--paper", paper_id, "Paper id")->required();

  // score
  auto* score = app.add_subcommand("score", "Print a user's personal listing");
  std::string from, to;
  std::size_t limit = 200;
  score->add_option("--data", data_dir, "Store directory")->required();
  score->add_option("--models", models_dir, "Models directory")->required()->check(CLI::ExistingDirectory);
  score->add_option("--username", username, "User name")->required();
  score->add_option("--from", from, "First day YYYY-MM-DD")->required();
  score->add_option("--to", to, "Last day (default: --from)");
  score->add_option("--categories", categories, "Categories (default: the user's)");
  score->add_option("--limit", limit, "Maximum rows")->capture_default_str();

  // serve
  auto* serve = app.add_subcommand("serve", "Run the HTTP API");
  std::string addr = "127.0.0.1:8080", nightly_at;
  serve->add_option("--addr", addr, "host:port")->capture_default_str();
  serve->add_option("--data", data_dir, "Store directory")->required();
  serve->add_option("--models", models_dir, "Models directory")->required()->check(CLI::ExistingDirectory);
  serve->add_option("--release", release, "Release file read by the in-process nightly job");
  serve->add_option("--nightly-at", nightly_at, "UTC time HH:MM for the nightly job (needs --release)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*ingest) {
      pr::store::FileStore store(data_dir);
      pr::store::UpsertResult total;
      for (const auto& f : ingest_files) {
        auto r = store.upsert_papers(read_corpus(f, format));
        total.inserted += r.inserted;
        total.updated += r.updated;
      }
      print({{"inserted", total.inserted}, {"updated", total.updated}, {"papers", store.all_papers().size()}});
    } else if (*train) {
      std::vector<pr::PaperRecord> recs;
      if (!corpus.empty()) {
        recs = read_corpus(corpus, format);
      } else if (!data_dir.empty()) {
        recs = pr::store::FileStore(data_dir).all_papers();
      } else {
        throw pr::ConfigError("train needs --corpus or --data");
      }
      recs = pr::filter_category(recs, category, pure_only);
      if (recs.empty()) throw pr::ConfigError("no papers in category " + category);
      train_sched.s.validate();
      auto [fit, held] = split_heldout(std::move(recs), heldout_frac, train_sched.s.seed);
      auto sm = pr::train_model(fit, topics, train_sched.s, train_pipe.config(), category);
      pr::lda::save_model(sm, out_dir);
      json out = {{"version", sm.version},
                  {"category", category},
                  {"K", topics},
                  {"V", sm.dictionary.size()},
                  {"documents", fit.size()},
                  {"out", out_dir}};
      if (!held.empty()) {
        std::vector<pr::text::BagOfWords> bows;
        for (const auto& r : held) bows.push_back(pr::bag_for(r, sm));
        out["heldout_documents"] = held.size();
        out["heldout_perplexity"] = pr::eval::perplexity(sm.model, bows);
      }
      print(out);
    } else if (*evalc) {
      auto sm = pr::lda::load_model(model_dir);
      auto recs = read_corpus(corpus, format);
      if (!sm.category.empty()) recs = pr::filter_category(recs, sm.category);
      if (recs.empty()) throw pr::ConfigError("no evaluation papers in category " + sm.category);
      std::vector<pr::text::BagOfWords> bows;
      for (const auto& r : recs) bows.push_back(pr::bag_for(r, sm));
      auto thetas = pr::lda::infer_thetas(bows, sm.model);
      auto coh = pr::eval::umass_coherence(sm.model, bows, topn);

      json topics_json = json::array();
      for (std::size_t k = 0; k < sm.model.num_topics(); ++k) {
        json words = json::array();
        for (const auto& [w, p] : pr::lda::top_words(sm.model, sm.dictionary, k, topn)) words.push_back({w, p});
        topics_json.push_back({{"topic", k}, {"coherence", coh.per_topic[k]}, {"words", words}});
      }
      // One-vs-all AUC of every topic weight for each subcategory label (the
      // record's first listed code).
      std::vector<std::string> labels;
      for (const auto& r : recs) labels.push_back(r.categories.front());
      json roc = json::object();
      for (const auto& label : std::set<std::string>(labels.begin(), labels.end())) {
        std::vector<bool> is(labels.size());
        for (std::size_t d = 0; d < labels.size(); ++d) is[d] = labels[d] == label;
        if (std::count(is.begin(), is.end(), true) == static_cast<long>(is.size())) continue;
        double best = -1.0;
        std::size_t best_k = 0;
        for (std::size_t k = 0; k < sm.model.num_topics(); ++k) {
          std::vector<double> scores;
          for (const auto& t : thetas) scores.push_back(t[k]);
          auto auc = pr::eval::roc_one_vs_all(scores, is).auc;
          if (auc > best) best = auc, best_k = k;
        }
        roc[label] = {{"best_topic", best_k}, {"auc", best}};
      }
      print({{"version", sm.version},
             {"documents", recs.size()},
             {"perplexity", pr::eval::perplexity(sm.model, bows)},
             {"coherence", coh.mean},
             {"coherence_skipped_pairs", coh.skipped_pairs},
             {"roc", roc},
             {"topics", topics_json}});
    } else if (*pizza) {
      auto sm = pr::lda::load_model(model_dir);
      auto recs = read_corpus(corpus, format);
      std::vector<pr::text::BagOfWords> bows;
      std::vector<std::string> ids;
      for (const auto& r : recs) {
        bows.push_back(pr::bag_for(r, sm));
        ids.push_back(r.id);
      }
      auto points = pr::eval::pizza_points(pr::lda::infer_thetas(bows, sm.model), ids, pizza_seed);
      std::ofstream file;
      if (!csv_out.empty()) file.open(csv_out);
      std::ostream& os = csv_out.empty() ? std::cout : file;
      os << "doc_id,main_topic,radius,angle\n";
      os.precision(17);
      for (const auto& p : points) os << p.doc_id << "," << p.main_topic << "," << p.radius << "," << p.angle << "\n";
    } else if (*scan) {
      auto recs = read_corpus(corpus, format);
      if (!category.empty()) recs = pr::filter_category(recs, category);
      scan_sched.s.validate();
      auto [fit, held] = split_heldout(std::move(recs), heldout_frac, scan_sched.s.seed);
      auto prepared = pr::prepare_corpus(fit, scan_pipe.config());
      std::vector<pr::text::BagOfWords> held_bows;
      for (const auto& r : held)
        held_bows.push_back(pr::text::to_bow(pr::text::preprocess(pr::document_text(r), scan_pipe.config()),
                                             prepared.dictionary));
      std::vector<pr::eval::ScanGridPoint> grid;
      for (const auto& g : pr::service::http_detail::split_commas(grid_list)) {
        auto x = g.find('x');
        if (x == std::string::npos) throw pr::ConfigError("grid point '" + g + "' is not PASSESxITERS");
        auto pi = parse_sizes(g.substr(0, x) + "," + g.substr(x + 1));
        grid.push_back({pi.at(0), pi.at(1)});
      }
      auto rows = pr::eval::metric_scan(prepared.bows, held_bows, parse_sizes(topic_list), grid, scan_sched.s,
                                        prepared.dictionary.size());
      const auto text = pr::eval::scan_to_csv(rows);
      if (csv_out.empty()) {
        std::cout << text;
      } else {
        pr::lda::write_file(csv_out, text);
      }
    } else if (*nightly) {
      pr::store::FileStore store(data_dir);
      auto engine = open_engine(store, models_dir);
      pr::FileReleaseSource source(release);
      auto report = engine->nightly(source.fetch(pr::parse_date(date)));
      auto j = pr::service::http_detail::report_json(report);
      j["date"] = date;
      print(j);
    } else if (*rebuild) {
      pr::store::FileStore store(data_dir);
      auto engine = open_engine(store, models_dir);
      json out = json::array();
      for (auto& sm : pr::service::load_models_dir(models_dir)) out.push_back(report_json(engine->swap_model(std::move(sm))));
      print(out);
    } else if (*add_user) {
      password = env_or("PAPERRANK_PASSWORD", "");
      if (password.empty()) throw pr::ConfigError("set PAPERRANK_PASSWORD");
      pr::store::FileStore store(data_dir);
      auto engine = open_engine(store, models_dir);
      auto u = engine->register_user(username, password);
      if (!categories.empty()) engine->set_categories(u.id, {categories.begin(), categories.end()});
      print(pr::service::http_detail::user_json(*store.user(u.id)));
    } else if (*click) {
      pr::store::FileStore store(data_dir);
      auto engine = open_engine(store, models_dir);
      auto r = engine->record_event(require_user_id(store, username), paper_id, kind);
      print({{"id", r.id}, {"status", r.duplicate ? "duplicate-ignored" : "recorded"}});
    } else if (*authored) {
      pr::store::FileStore store(data_dir);
      auto engine = open_engine(store, "");
      auto r = engine->record_authored(require_user_id(store, username), paper_id);
      print({{"id", r.id}, {"status", r.duplicate ? "duplicate-ignored" : "recorded"}});
    } else if (*score) {
      pr::store::FileStore store(data_dir);
      auto engine = open_engine(store, models_dir);
      pr::service::ListQuery q;
      q.categories = categories;
      q.from = pr::parse_date(from);
      q.to = to.empty() ? q.from : pr::parse_date(to);
      q.sort = pr::service::SortMode::personal;
      q.limit = limit;
      json out = json::array();
      for (const auto& lp : engine->list_papers(q, require_user_id(store, username))) {
        json row = {{"id", lp.paper.id}, {"submitted", pr::format_date(lp.paper.submitted)}, {"title", lp.paper.title}};
        if (lp.score) row["score"] = *lp.score;
        out.push_back(row);
      }
      print(out);
    } else if (*serve) {
      const auto colon = addr.rfind(':');
      if (colon == std::string::npos) throw pr::ConfigError("--addr must be host:port");
      const std::string host = addr.substr(0, colon);
      const int port = std::stoi(addr.substr(colon + 1));
      if (!nightly_at.empty() && release.empty()) throw pr::ConfigError("--nightly-at needs --release");

      pr::store::FileStore store(data_dir);
      auto engine = open_engine(store, models_dir);
      auto backfill = engine->backfill();
      std::cerr << "backfill: inferred " << backfill.inferred << ", failures " << backfill.failures.size() << "\n";

      httplib::Server server;
      pr::service::install_routes(server, *engine);
      g_server = &server;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);

      std::jthread scheduler;
      if (!nightly_at.empty()) {
        int hh = 0, mm = 0;
        if (std::sscanf(nightly_at.c_str(), "%d:%d", &hh, &mm) != 2 || hh < 0 || hh > 23 || mm < 0 || mm > 59)
          throw pr::ConfigError("--nightly-at must be HH:MM");
        scheduler = std::jthread([&, hh, mm](std::stop_token stop) {
          pr::FileReleaseSource source(release);
          std::mutex m;
          std::condition_variable_any cv;
          while (!stop.stop_requested()) {
            const auto now = std::chrono::system_clock::now();
            const auto today = std::chrono::floor<std::chrono::days>(now);
            auto next = today + std::chrono::hours(hh) + std::chrono::minutes(mm);
            if (next <= now) next += std::chrono::days(1);
            std::unique_lock lock(m);
            if (cv.wait_until(lock, stop, next, [] { return false; })) break;
            if (stop.stop_requested()) break;
            const auto day = std::chrono::floor<std::chrono::days>(std::chrono::system_clock::now());
            try {
              auto r = engine->nightly(source.fetch(day));
              std::cerr << "nightly " << pr::format_date(day) << ": " << pr::service::http_detail::report_json(r).dump()
                        << "\n";
            } catch (const std::exception& e) {
              std::cerr << "nightly " << pr::format_date(day) << " failed: " << e.what() << "\n";
            }
          }
        });
      }
      std::cerr << "listening on " << host << ":" << port << "\n";
      if (!server.listen(host, port)) throw pr::IoError("cannot listen on " + addr);
    }
  } catch (const pr::ParseError& e) {
    std::cerr << "error: " << e.what() << " (at " << e.location() << ")\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
