#pragma once

#include <algorithm>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "paperrank/date.hpp"
#include "paperrank/error.hpp"

namespace paperrank {

/// One paper's metadata, in canonical form: title and abstract are trimmed
/// with internal whitespace runs collapsed to single spaces.
struct PaperRecord {
  std::string id;
  std::string title;
  std::string abstract;
  Days submitted{};
  std::vector<std::string> authors;
  std::vector<std::string> categories;

  bool operator==(const PaperRecord&) const = default;
};

struct Corpus {
  std::vector<PaperRecord> records;
  std::string source_digest;

  bool operator==(const Corpus&) const = default;
};

namespace detail {

inline bool is_space(unsigned char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

}  // namespace detail

inline std::string collapse_whitespace(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool pending = false;
  for (unsigned char c : text) {
    if (detail::is_space(c)) {
      pending = !out.empty();
      continue;
    }
    if (pending) out.push_back(' ');
    pending = false;
    out.push_back(static_cast<char>(c));
  }
  return out;
}

/// `[a-z-]+(\.[A-Z]{2})?`
inline bool is_valid_category(std::string_view code) {
  auto dot = code.find('.');
  std::string_view head = code.substr(0, dot);
  if (head.empty()) return false;
  if (!std::all_of(head.begin(), head.end(), [](char c) { return (c >= 'a' && c <= 'z') || c == '-'; }))
    return false;
  if (dot == std::string_view::npos) return true;
  std::string_view tail = code.substr(dot + 1);
  return tail.size() == 2 && std::all_of(tail.begin(), tail.end(), [](char c) { return c >= 'A' && c <= 'Z'; });
}

/// Canonicalizes text fields in place and checks the record invariants.
inline void canonicalize(PaperRecord& rec) {
  rec.title = collapse_whitespace(rec.title);
  rec.abstract = collapse_whitespace(rec.abstract);
  for (auto& a : rec.authors) a = collapse_whitespace(a);
  if (rec.id.empty()) throw ValidationError("paper id is empty");
  if (rec.title.empty()) throw ValidationError("paper " + rec.id + ": empty title");
  if (rec.abstract.empty()) throw ValidationError("paper " + rec.id + ": empty abstract");
  if (rec.categories.empty()) throw ValidationError("paper " + rec.id + ": no categories");
  for (const auto& c : rec.categories)
    if (!is_valid_category(c)) throw ValidationError("paper " + rec.id + ": invalid category '" + c + "'");
}

/// Text fed to the preprocessing pipeline: title and abstract joined by a space.
inline std::string document_text(const PaperRecord& rec) { return rec.title + " " + rec.abstract; }

/// True when `code` is `category` itself or one of its subcategories
/// ("astro-ph.GA" belongs to "astro-ph").
inline bool category_matches(std::string_view code, std::string_view category) {
  if (code == category) return true;
  return code.size() > category.size() && code.starts_with(category) && code[category.size()] == '.';
}

inline bool has_category(const PaperRecord& rec, std::string_view category) {
  return std::any_of(rec.categories.begin(), rec.categories.end(),
                     [&](const std::string& c) { return category_matches(c, category); });
}

/// Records listed in `category`. With `pure_only`, cross-listed papers are
/// skipped: every code on the record must belong to `category`.
inline std::vector<PaperRecord> filter_category(const std::vector<PaperRecord>& records,
                                                std::string_view category, bool pure_only = false) {
  std::vector<PaperRecord> out;
  for (const auto& r : records) {
    if (!has_category(r, category)) continue;
    if (pure_only && !std::all_of(r.categories.begin(), r.categories.end(),
                                  [&](const std::string& c) { return category_matches(c, category); }))
      continue;
    out.push_back(r);
  }
  return out;
}

}  // namespace paperrank
