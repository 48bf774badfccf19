#pragma once

// On-disk model container:
//   <dir>/model.json      K, V, alpha, eta, schedule, updates_seen,
//                         dictionary digest, format version, label
//   <dir>/lambda.f64le    K*V little-endian doubles, row-major
//   <dir>/dictionary.tsv  the dictionary the model was trained on
//   <dir>/stop_words.txt, <dir>/tech_words.txt
//                         word lists used to preprocess the training text

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "paperrank/digest.hpp"
#include "paperrank/error.hpp"
#include "paperrank/ingest.hpp"
#include "paperrank/lda/model.hpp"
#include "paperrank/text/pipeline.hpp"

namespace paperrank::lda {

inline constexpr int kModelFormatVersion = 1;

struct StoredModel {
  LdaModel model;
  text::Dictionary dictionary;
  /// Identifier used to key paper vectors, e.g. "hep-ph-3f9a1c2b7d4e".
  std::string version;
  /// Category the model serves; empty for an all-category model.
  std::string category;
  /// Preprocessing used for training; new text must go through the same.
  text::PipelineConfig pipeline;
};

inline nlohmann::json schedule_to_json(const TrainSchedule& s) {
  return {{"passes", s.passes},       {"e_step_iters", s.e_step_iters}, {"batch_size", s.batch_size},
          {"kappa", s.kappa},         {"tau0", s.tau0},                 {"seed", s.seed},
          {"e_step_tol", s.e_step_tol}, {"threads", s.threads},         {"shuffle", s.shuffle}};
}

inline TrainSchedule schedule_from_json(const nlohmann::json& j) {
  TrainSchedule s;
  s.passes = j.at("passes").get<std::size_t>();
  s.e_step_iters = j.at("e_step_iters").get<std::size_t>();
  s.batch_size = j.at("batch_size").get<std::size_t>();
  s.kappa = j.at("kappa").get<double>();
  s.tau0 = j.at("tau0").get<double>();
  s.seed = j.at("seed").get<std::uint64_t>();
  s.e_step_tol = j.value("e_step_tol", 1e-4);
  s.threads = j.value("threads", 1u);
  s.shuffle = j.value("shuffle", true);
  return s;
}

inline std::string encode_f64le(std::span<const double> values) {
  std::string out(values.size() * 8, '\0');
  for (std::size_t i = 0; i < values.size(); ++i) {
    std::uint64_t bits = std::bit_cast<std::uint64_t>(values[i]);
    for (int b = 0; b < 8; ++b) out[i * 8 + b] = static_cast<char>((bits >> (8 * b)) & 0xFF);
  }
  return out;
}

inline std::vector<double> decode_f64le(std::string_view bytes) {
  if (bytes.size() % 8 != 0) throw ParseError("f64le: size is not a multiple of 8", bytes.size());
  std::vector<double> out(bytes.size() / 8);
  for (std::size_t i = 0; i < out.size(); ++i) {
    std::uint64_t bits = 0;
    for (int b = 0; b < 8; ++b) bits |= std::uint64_t{static_cast<unsigned char>(bytes[i * 8 + b])} << (8 * b);
    out[i] = std::bit_cast<double>(bits);
  }
  return out;
}

/// Content-derived version string: `<category or "all">-<12 hex of sha256(lambda)>`.
inline std::string model_version(const LdaModel& model, const std::string& category) {
  auto digest = sha256_hex(encode_f64le(model.lambda()));
  return (category.empty() ? std::string("all") : category) + "-" + digest.substr(0, 12);
}

inline void write_file(const std::filesystem::path& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

inline std::string word_list_text(const text::WordSet& words) {
  std::string out;
  for (const auto& w : words) out += w + "\n";
  return out;
}

inline StoredModel make_stored_model(LdaModel model, text::Dictionary dict, std::string category = {},
                                     text::PipelineConfig pipeline = {}) {
  model.set_dictionary_digest(dict.digest());
  StoredModel sm{std::move(model), std::move(dict), {}, std::move(category), std::move(pipeline)};
  sm.version = model_version(sm.model, sm.category);
  return sm;
}

inline void save_model(const StoredModel& sm, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const auto& m = sm.model;
  nlohmann::json j = {{"format_version", kModelFormatVersion},
                      {"version", sm.version},
                      {"category", sm.category},
                      {"K", m.num_topics()},
                      {"V", m.vocab_size()},
                      {"alpha", m.alpha()},
                      {"eta", m.eta()},
                      {"schedule", schedule_to_json(m.schedule())},
                      {"updates_seen", m.updates_seen()},
                      {"dictionary_digest", m.dictionary_digest()},
                      {"min_docs", sm.pipeline.min_docs},
                      {"max_frac", sm.pipeline.max_frac}};
  write_file(dir / "lambda.f64le", encode_f64le(m.lambda()));
  write_file(dir / "dictionary.tsv", sm.dictionary.to_tsv());
  write_file(dir / "stop_words.txt", word_list_text(sm.pipeline.stop_words));
  write_file(dir / "tech_words.txt", word_list_text(sm.pipeline.tech_words));
  write_file(dir / "model.json", j.dump(2) + "\n");
}

/// Loads and verifies a model directory: lambda must be exactly K*V*8 bytes
/// and the dictionary digest must match the one recorded at training time.
inline StoredModel load_model(const std::filesystem::path& dir) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file((dir / "model.json").string()));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("model.json: " + std::string(e.what()), 0);
  }
  try {
    if (j.at("format_version").get<int>() != kModelFormatVersion)
      throw ValidationError("model.json: unsupported format version");
    const auto K = j.at("K").get<std::size_t>();
    const auto V = j.at("V").get<std::size_t>();
    std::string raw = read_file((dir / "lambda.f64le").string());
    if (raw.size() != K * V * 8)
      throw ValidationError("lambda.f64le: expected " + std::to_string(K * V * 8) + " bytes, found " +
                            std::to_string(raw.size()));
    auto dict = text::Dictionary::from_tsv(read_file((dir / "dictionary.tsv").string()));
    const auto digest = j.at("dictionary_digest").get<std::string>();
    if (dict.digest() != digest) throw ValidationError("dictionary.tsv does not match the model's dictionary digest");
    if (dict.size() != V) throw ValidationError("dictionary size differs from V");
    LdaModel model(K, V, j.at("alpha").get<std::vector<double>>(), j.at("eta").get<double>(), decode_f64le(raw),
                   schedule_from_json(j.at("schedule")));
    model.set_updates_seen(j.at("updates_seen").get<std::uint64_t>());
    model.set_dictionary_digest(digest);
    text::PipelineConfig pipeline;
    pipeline.min_docs = j.value("min_docs", pipeline.min_docs);
    pipeline.max_frac = j.value("max_frac", pipeline.max_frac);
    if (std::filesystem::exists(dir / "stop_words.txt"))
      pipeline.stop_words = text::load_word_list((dir / "stop_words.txt").string());
    if (std::filesystem::exists(dir / "tech_words.txt"))
      pipeline.tech_words = text::load_word_list((dir / "tech_words.txt").string());
    StoredModel sm{std::move(model), std::move(dict), j.at("version").get<std::string>(),
                   j.value("category", std::string{}), std::move(pipeline)};
    return sm;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("model.json: " + std::string(e.what()), 0);
  }
}

}  // namespace paperrank::lda
