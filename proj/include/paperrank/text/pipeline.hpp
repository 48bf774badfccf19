#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <cstdio>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "paperrank/digest.hpp"
#include "paperrank/error.hpp"
#include "paperrank/text/porter.hpp"
#include "paperrank/text/word_lists.hpp"

namespace paperrank::text {

struct PipelineConfig {
  WordSet stop_words = default_stop_words();
  WordSet tech_words = default_tech_words();
  std::size_t min_docs = 50;
  double max_frac = 0.90;

  void validate() const {
    if (min_docs < 1) throw ConfigError("min_docs must be >= 1");
    if (!(max_frac > 0.0 && max_frac <= 1.0)) throw ConfigError("max_frac must be in (0, 1]");
  }
};

namespace detail {

inline bool ascii_alnum(unsigned char c) {
  return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}

// Decodes the UTF-8 sequence at `pos`; returns (code point, byte length).
// Invalid bytes decode as themselves with length 1.
inline std::pair<char32_t, std::size_t> decode_utf8(std::string_view s, std::size_t pos) {
  auto c = static_cast<unsigned char>(s[pos]);
  auto cont = [&](std::size_t i) {
    return pos + i < s.size() && (static_cast<unsigned char>(s[pos + i]) & 0xC0) == 0x80;
  };
  auto at = [&](std::size_t i) { return static_cast<char32_t>(static_cast<unsigned char>(s[pos + i]) & 0x3F); };
  if (c < 0x80) return {c, 1};
  if ((c & 0xE0) == 0xC0 && cont(1)) return {((c & 0x1Fu) << 6) | at(1), 2};
  if ((c & 0xF0) == 0xE0 && cont(1) && cont(2)) return {((c & 0x0Fu) << 12) | (at(1) << 6) | at(2), 3};
  if ((c & 0xF8) == 0xF0 && cont(1) && cont(2) && cont(3))
    return {((c & 0x07u) << 18) | (at(1) << 12) | (at(2) << 6) | at(3), 4};
  return {c, 1};
}

// Non-ASCII code points treated as separators: Latin-1 punctuation and
// symbols, general punctuation, arrows/math operators/technical symbols,
// CJK punctuation, BOM.
inline bool unicode_separator(char32_t cp) {
  if (cp >= 0x80 && cp <= 0xBF) return cp != 0xAA && cp != 0xB5 && cp != 0xBA;
  if (cp == 0xD7 || cp == 0xF7) return true;
  if (cp >= 0x2000 && cp <= 0x206F) return true;
  if (cp >= 0x2190 && cp <= 0x2BFF) return true;
  if (cp >= 0x3000 && cp <= 0x303F) return true;
  return cp == 0xFEFF;
}

inline bool word_char_at(std::string_view s, std::size_t pos, std::size_t* len) {
  auto [cp, n] = decode_utf8(s, pos);
  *len = n;
  if (cp < 0x80) return ascii_alnum(static_cast<unsigned char>(cp));
  return !unicode_separator(cp);
}

inline bool boundary_before(std::string_view s, std::size_t pos) {
  return pos == 0 || !ascii_alnum(static_cast<unsigned char>(s[pos - 1]));
}

}  // namespace detail

/// Longest tech-word match starting at `pos`, or 0. A match must not be glued
/// to surrounding alphanumerics, except where the tech-word itself begins or
/// ends in punctuation ("e+" may precede "e-" in "e+e-").
inline std::size_t match_tech_word(std::string_view text, std::size_t pos, const WordSet& tech_words,
                                   int depth = 0) {
  std::size_t best = 0;
  for (const auto& w : tech_words) {
    if (w.size() <= best || text.substr(pos, w.size()) != w) continue;
    bool starts_alnum = detail::ascii_alnum(static_cast<unsigned char>(w.front()));
    if (starts_alnum && !detail::boundary_before(text, pos)) continue;
    std::size_t end = pos + w.size();
    bool ok = end == text.size() || !detail::ascii_alnum(static_cast<unsigned char>(text[end]));
    if (!ok && !detail::ascii_alnum(static_cast<unsigned char>(w.back())) && depth < 4)
      ok = match_tech_word(text, end, tech_words, depth + 1) > 0;
    if (ok) best = w.size();
  }
  return best;
}

/// Text to tokens: tech-words kept verbatim; every other word lowercased,
/// split on punctuation, stripped of stop words and Porter-stemmed (to a
/// fixed point). Tokens with no letters are dropped.
inline std::vector<std::string> preprocess(std::string_view text, const PipelineConfig& config) {
  std::vector<std::string> out;
  auto emit_word = [&](std::string word) {
    if (!std::any_of(word.begin(), word.end(), [](char c) {
          auto u = static_cast<unsigned char>(c);
          return u >= 0x80 || (u >= 'a' && u <= 'z') || (u >= 'A' && u <= 'Z');
        }))
      return;
    for (auto& c : word)
      if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    if (config.stop_words.contains(word)) return;
    std::string stem = stem_to_fixed_point(word);
    if (stem.empty() || config.stop_words.contains(stem)) return;
    out.push_back(std::move(stem));
  };

  std::size_t pos = 0;
  while (pos < text.size()) {
    if (!config.tech_words.empty()) {
      if (std::size_t n = match_tech_word(text, pos, config.tech_words)) {
        out.emplace_back(text.substr(pos, n));
        pos += n;
        continue;
      }
    }
    std::size_t len = 0;
    if (!detail::word_char_at(text, pos, &len)) {
      pos += len;
      continue;
    }
    std::size_t start = pos;
    while (pos < text.size() && detail::word_char_at(text, pos, &len)) pos += len;
    emit_word(std::string(text.substr(start, pos - start)));
  }
  return out;
}

/// Token <-> id map with document frequencies. Ids are dense and follow the
/// lexicographic (byte) order of the tokens.
class Dictionary {
 public:
  static constexpr int kFormatVersion = 1;

  Dictionary() = default;

  Dictionary(std::vector<std::string> tokens, std::vector<std::size_t> doc_freq, std::size_t n_docs)
      : tokens_(std::move(tokens)), doc_freq_(std::move(doc_freq)), n_docs_(n_docs) {
    if (tokens_.size() != doc_freq_.size()) throw ValidationError("dictionary: token/doc_freq size mismatch");
    for (std::size_t i = 0; i < tokens_.size(); ++i) {
      if (tokens_[i].empty()) throw ValidationError("dictionary: empty token");
      if (!index_.emplace(tokens_[i], static_cast<std::uint32_t>(i)).second)
        throw ValidationError("dictionary: duplicate token '" + tokens_[i] + "'");
    }
  }

  std::size_t size() const { return tokens_.size(); }
  bool empty() const { return tokens_.empty(); }
  std::size_t n_docs() const { return n_docs_; }
  const std::vector<std::string>& tokens() const { return tokens_; }
  const std::string& token(std::size_t id) const { return tokens_.at(id); }
  std::size_t doc_freq(std::size_t id) const { return doc_freq_.at(id); }

  std::optional<std::uint32_t> find(std::string_view token) const {
    auto it = index_.find(std::string(token));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  /// TSV: `#docs=<n> version=<v>` header, then `token<TAB>id<TAB>doc_freq`.
  std::string to_tsv() const {
    std::string out = "#docs=" + std::to_string(n_docs_) + " version=" + std::to_string(kFormatVersion) + "\n";
    for (std::size_t i = 0; i < tokens_.size(); ++i)
      out += tokens_[i] + "\t" + std::to_string(i) + "\t" + std::to_string(doc_freq_[i]) + "\n";
    return out;
  }

  std::string digest() const { return sha256_hex(to_tsv()); }

  static Dictionary from_tsv(std::string_view tsv) {
    std::size_t pos = 0;
    std::size_t line_no = 0;
    auto next_line = [&](std::string_view& line) {
      if (pos >= tsv.size()) return false;
      auto end = tsv.find('\n', pos);
      if (end == std::string_view::npos) end = tsv.size();
      line = tsv.substr(pos, end - pos);
      pos = end + 1;
      ++line_no;
      return true;
    };
    std::string_view line;
    if (!next_line(line) || !line.starts_with("#docs=")) throw ParseError("dictionary: missing header", 1);
    std::size_t n_docs = 0;
    int version = 0;
    if (std::sscanf(std::string(line).c_str(), "#docs=%zu version=%d", &n_docs, &version) != 2)
      throw ParseError("dictionary: malformed header", 1);
    if (version != kFormatVersion)
      throw ParseError("dictionary: unsupported version " + std::to_string(version), 1);
    std::vector<std::string> tokens;
    std::vector<std::size_t> dfs;
    while (next_line(line)) {
      if (line.empty()) continue;
      auto t1 = line.find('\t');
      auto t2 = t1 == std::string_view::npos ? t1 : line.find('\t', t1 + 1);
      if (t2 == std::string_view::npos) throw ParseError("dictionary: malformed line " + std::to_string(line_no), line_no);
      std::size_t id = 0;
      std::size_t df = 0;
      try {
        id = std::stoul(std::string(line.substr(t1 + 1, t2 - t1 - 1)));
        df = std::stoul(std::string(line.substr(t2 + 1)));
      } catch (const std::exception&) {
        throw ParseError("dictionary: bad number on line " + std::to_string(line_no), line_no);
      }
      if (id != tokens.size()) throw ParseError("dictionary: ids not dense at line " + std::to_string(line_no), line_no);
      tokens.emplace_back(line.substr(0, t1));
      dfs.push_back(df);
    }
    return Dictionary(std::move(tokens), std::move(dfs), n_docs);
  }

 private:
  std::vector<std::string> tokens_;
  std::vector<std::size_t> doc_freq_;
  std::size_t n_docs_ = 0;
  std::unordered_map<std::string, std::uint32_t> index_;
};

/// Keeps tokens whose document frequency lies in [min_docs, max_frac * n_docs].
inline Dictionary build_dictionary(const std::vector<std::vector<std::string>>& docs, const PipelineConfig& config) {
  config.validate();
  if (docs.empty()) throw ConfigError("build_dictionary: no documents");
  std::map<std::string, std::size_t, std::less<>> df;
  for (const auto& doc : docs) {
    std::unordered_set<std::string_view> seen;
    for (const auto& tok : doc)
      if (seen.insert(tok).second) ++df[tok];
  }
  const double cap = config.max_frac * static_cast<double>(docs.size());
  std::vector<std::string> tokens;
  std::vector<std::size_t> freqs;
  for (const auto& [tok, n] : df) {
    if (n < config.min_docs || static_cast<double>(n) > cap) continue;
    tokens.push_back(tok);
    freqs.push_back(n);
  }
  if (tokens.empty())
    throw ValidationError("build_dictionary: every token was filtered out (min_docs=" +
                          std::to_string(config.min_docs) + ", max_frac=" + std::to_string(config.max_frac) + ")");
  return Dictionary(std::move(tokens), std::move(freqs), docs.size());
}

/// Sparse word counts: strictly increasing ids, counts >= 1.
struct BagOfWords {
  struct Entry {
    std::uint32_t id;
    std::uint32_t count;
    bool operator==(const Entry&) const = default;
  };
  std::vector<Entry> entries;

  bool empty() const { return entries.empty(); }
  std::size_t unique() const { return entries.size(); }
  std::uint64_t total() const {
    std::uint64_t n = 0;
    for (const auto& e : entries) n += e.count;
    return n;
  }
  bool operator==(const BagOfWords&) const = default;
};

inline BagOfWords to_bow(const std::vector<std::string>& tokens, const Dictionary& dict) {
  std::map<std::uint32_t, std::uint32_t> counts;
  for (const auto& t : tokens)
    if (auto id = dict.find(t)) ++counts[*id];
  BagOfWords bow;
  bow.entries.reserve(counts.size());
  for (const auto& [id, n] : counts) bow.entries.push_back({id, n});
  return bow;
}

/// Builds a bag from (id, count) pairs in any order, merging repeats.
inline BagOfWords make_bow(const std::vector<std::pair<std::uint32_t, std::uint32_t>>& pairs) {
  std::map<std::uint32_t, std::uint32_t> counts;
  for (const auto& [id, n] : pairs)
    if (n > 0) counts[id] += n;
  BagOfWords bow;
  for (const auto& [id, n] : counts) bow.entries.push_back({id, n});
  return bow;
}

}  // namespace paperrank::text
