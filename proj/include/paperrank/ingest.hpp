#pragma once

// Corpus ingestion from local files: a JSON-lines format (canonical) and a
// small documented XML subset modelled on arXiv OAI bulk dumps.
//
// XML subset:
//
//   <?xml version="1.0"?>                       (optional prolog)
//   <records>
//     <record>
//       <id>2003.01234</id>
//       <title>...</title>
//       <abstract>...</abstract>
//       <created>2020-03-02</created>
//       <authors><author>A. Name</author>...</authors>
//       <categories>hep-ph hep-th</categories>
//     </record>
//   </records>
//
// Attributes are accepted and ignored, as are unknown child elements of
// <record>. Comments and CDATA sections are supported.

#include <cctype>
#include <cstddef>
#include <fstream>
#include <iterator>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "paperrank/date.hpp"
#include "paperrank/digest.hpp"
#include "paperrank/error.hpp"
#include "paperrank/paper.hpp"

namespace paperrank {

enum class CorpusFormat { jsonl, oai_xml };

namespace detail {

inline void check_unique(std::unordered_set<std::string>& seen, const PaperRecord& rec) {
  if (!seen.insert(rec.id).second) throw ValidationError("duplicate paper id " + rec.id);
}

inline std::vector<std::string> split_ws(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_space(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t j = i;
    while (j < text.size() && !is_space(static_cast<unsigned char>(text[j]))) ++j;
    if (j > i) out.emplace_back(text.substr(i, j - i));
    i = j;
  }
  return out;
}

}  // namespace detail

inline nlohmann::json to_json(const PaperRecord& rec) {
  return nlohmann::json{{"id", rec.id},
                        {"title", rec.title},
                        {"abstract", rec.abstract},
                        {"submitted", format_date(rec.submitted)},
                        {"authors", rec.authors},
                        {"categories", rec.categories}};
}

/// Builds a canonical record from a JSON object. `where` prefixes messages.
inline PaperRecord record_from_json(const nlohmann::json& obj, std::size_t line) {
  auto where = "line " + std::to_string(line);
  if (!obj.is_object()) throw ParseError(where + ": expected a JSON object", line);
  auto field = [&](const char* key) -> const nlohmann::json& {
    auto it = obj.find(key);
    if (it == obj.end()) throw ParseError(where + ": missing key '" + key + "'", line);
    return *it;
  };
  auto text = [&](const char* key) {
    const auto& v = field(key);
    if (!v.is_string()) throw ParseError(where + ": key '" + key + "' must be a string", line);
    return v.get<std::string>();
  };
  auto list = [&](const char* key) {
    const auto& v = field(key);
    if (!v.is_array()) throw ParseError(where + ": key '" + key + "' must be an array", line);
    std::vector<std::string> out;
    for (const auto& e : v) {
      if (!e.is_string()) throw ParseError(where + ": key '" + key + "' must hold strings", line);
      out.push_back(e.get<std::string>());
    }
    return out;
  };

  PaperRecord rec;
  rec.id = text("id");
  rec.title = text("title");
  rec.abstract = text("abstract");
  try {
    rec.submitted = parse_date(text("submitted"));
  } catch (const ValidationError& e) {
    throw ParseError(where + ": " + e.what(), line);
  }
  rec.authors = list("authors");
  rec.categories = list("categories");
  try {
    canonicalize(rec);
  } catch (const ValidationError& e) {
    throw ParseError(where + ": " + e.what(), line);
  }
  return rec;
}

inline Corpus parse_jsonl(std::string_view bytes) {
  Corpus corpus;
  corpus.source_digest = sha256_hex(bytes);
  std::unordered_set<std::string> seen;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < bytes.size()) {
    std::size_t end = bytes.find('\n', pos);
    if (end == std::string_view::npos) end = bytes.size();
    std::string_view line = bytes.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos) continue;
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError("line " + std::to_string(line_no) + ": malformed JSON: " + e.what(), line_no);
    }
    auto rec = record_from_json(obj, line_no);
    detail::check_unique(seen, rec);
    corpus.records.push_back(std::move(rec));
  }
  return corpus;
}

/// One record per line, LF-terminated. Parsing the output yields the same
/// records.
inline std::string to_jsonl(const std::vector<PaperRecord>& records) {
  std::string out;
  for (const auto& r : records) {
    out += to_json(r).dump();
    out += '\n';
  }
  return out;
}

namespace xml {

struct Node {
  std::string name;
  std::string text;  // decoded character data directly inside this element
  std::vector<Node> children;
  std::size_t offset = 0;

  const Node* child(std::string_view n) const {
    for (const auto& c : children)
      if (c.name == n) return &c;
    return nullptr;
  }
};

class Parser {
 public:
  explicit Parser(std::string_view src) : src_(src) {}

  Node parse_document() {
    skip_misc();
    if (peek_is("<?xml")) {
      auto end = src_.find("?>", pos_);
      if (end == std::string_view::npos) fail("unterminated XML declaration");
      pos_ = end + 2;
    }
    skip_misc();
    if (peek_is("<!DOCTYPE")) {
      auto end = src_.find('>', pos_);
      if (end == std::string_view::npos) fail("unterminated DOCTYPE");
      pos_ = end + 1;
      skip_misc();
    }
    if (pos_ >= src_.size() || src_[pos_] != '<') fail("expected root element");
    Node root = parse_element();
    skip_misc();
    if (pos_ != src_.size()) fail("content after root element");
    return root;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError("xml: " + msg + " at byte " + std::to_string(pos_), pos_);
  }

  bool peek_is(std::string_view s) const { return src_.substr(pos_, s.size()) == s; }

  void skip_ws() {
    while (pos_ < src_.size() && detail::is_space(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  void skip_misc() {
    for (;;) {
      skip_ws();
      if (peek_is("<!--")) {
        auto end = src_.find("-->", pos_ + 4);
        if (end == std::string_view::npos) fail("unterminated comment");
        pos_ = end + 3;
        continue;
      }
      if (peek_is("<?") && !peek_is("<?xml")) {
        auto end = src_.find("?>", pos_);
        if (end == std::string_view::npos) fail("unterminated processing instruction");
        pos_ = end + 2;
        continue;
      }
      return;
    }
  }

  static bool name_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.' || c == ':';
  }

  std::string parse_name() {
    std::size_t start = pos_;
    while (pos_ < src_.size() && name_char(src_[pos_])) ++pos_;
    if (pos_ == start) fail("expected element name");
    return std::string(src_.substr(start, pos_ - start));
  }

  void decode_entity(std::string& out) {
    std::size_t start = pos_;
    auto end = src_.find(';', pos_);
    if (end == std::string_view::npos || end - pos_ > 12) fail("unterminated entity reference");
    std::string_view ent = src_.substr(pos_ + 1, end - pos_ - 1);
    pos_ = end + 1;
    if (ent == "amp") out += '&';
    else if (ent == "lt") out += '<';
    else if (ent == "gt") out += '>';
    else if (ent == "quot") out += '"';
    else if (ent == "apos") out += '\'';
    else if (!ent.empty() && ent[0] == '#') {
      unsigned long cp = 0;
      try {
        cp = (ent.size() > 1 && (ent[1] == 'x' || ent[1] == 'X'))
                 ? std::stoul(std::string(ent.substr(2)), nullptr, 16)
                 : std::stoul(std::string(ent.substr(1)), nullptr, 10);
      } catch (const std::exception&) {
        pos_ = start;
        fail("bad character reference");
      }
      append_utf8(out, cp);
    } else {
      pos_ = start;
      fail("unknown entity '&" + std::string(ent) + ";'");
    }
  }

  static void append_utf8(std::string& out, unsigned long cp) {
    if (cp < 0x80) {
      out += static_cast<char>(cp);
    } else if (cp < 0x800) {
      out += static_cast<char>(0xC0 | (cp >> 6));
      out += static_cast<char>(0x80 | (cp & 0x3F));
    } else if (cp < 0x10000) {
      out += static_cast<char>(0xE0 | (cp >> 12));
      out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
      out += static_cast<char>(0x80 | (cp & 0x3F));
    } else {
      out += static_cast<char>(0xF0 | (cp >> 18));
      out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
      out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
      out += static_cast<char>(0x80 | (cp & 0x3F));
    }
  }

  void skip_attributes() {
    for (;;) {
      skip_ws();
      if (pos_ >= src_.size()) fail("unclosed start tag");
      char c = src_[pos_];
      if (c == '>' || c == '/') return;
      parse_name();
      skip_ws();
      if (pos_ >= src_.size() || src_[pos_] != '=') fail("expected '=' in attribute");
      ++pos_;
      skip_ws();
      if (pos_ >= src_.size() || (src_[pos_] != '"' && src_[pos_] != '\'')) fail("expected quoted attribute value");
      char q = src_[pos_++];
      auto end = src_.find(q, pos_);
      if (end == std::string_view::npos) fail("unterminated attribute value");
      pos_ = end + 1;
    }
  }

  Node parse_element() {
    Node node;
    node.offset = pos_;
    ++pos_;  // '<'
    node.name = parse_name();
    skip_attributes();
    if (src_[pos_] == '/') {
      if (pos_ + 1 >= src_.size() || src_[pos_ + 1] != '>') fail("malformed empty-element tag");
      pos_ += 2;
      return node;
    }
    ++pos_;  // '>'
    for (;;) {
      if (pos_ >= src_.size()) {
        pos_ = node.offset;
        fail("unclosed element <" + node.name + ">");
      }
      char c = src_[pos_];
      if (c == '&') {
        decode_entity(node.text);
      } else if (c != '<') {
        node.text += c;
        ++pos_;
      } else if (peek_is("</")) {
        pos_ += 2;
        std::string closing = parse_name();
        skip_ws();
        if (closing != node.name) fail("mismatched closing tag </" + closing + "> for <" + node.name + ">");
        if (pos_ >= src_.size() || src_[pos_] != '>') fail("malformed closing tag");
        ++pos_;
        return node;
      } else if (peek_is("<!--")) {
        auto end = src_.find("-->", pos_ + 4);
        if (end == std::string_view::npos) fail("unterminated comment");
        pos_ = end + 3;
      } else if (peek_is("<![CDATA[")) {
        auto end = src_.find("]]>", pos_ + 9);
        if (end == std::string_view::npos) fail("unterminated CDATA section");
        node.text += src_.substr(pos_ + 9, end - pos_ - 9);
        pos_ = end + 3;
      } else {
        node.children.push_back(parse_element());
      }
    }
  }

  std::string_view src_;
  std::size_t pos_ = 0;
};

}  // namespace xml

inline Corpus parse_oai_xml(std::string_view bytes) {
  Corpus corpus;
  corpus.source_digest = sha256_hex(bytes);
  xml::Node root = xml::Parser(bytes).parse_document();
  if (root.name != "records")
    throw ParseError("xml: unknown root element <" + root.name + "> at byte " + std::to_string(root.offset),
                     root.offset);

  std::unordered_set<std::string> seen;
  std::size_t index = 0;
  for (const auto& node : root.children) {
    if (node.name != "record") continue;
    auto where = [&] { return "record " + std::to_string(index) + " (byte " + std::to_string(node.offset) + ")"; };
    auto required = [&](const char* name) -> const xml::Node& {
      const xml::Node* c = node.child(name);
      if (!c) throw ParseError("xml: " + where() + ": missing <" + name + ">", node.offset);
      return *c;
    };
    PaperRecord rec;
    rec.id = collapse_whitespace(required("id").text);
    rec.title = required("title").text;
    rec.abstract = required("abstract").text;
    const auto& created = required("created");
    try {
      rec.submitted = parse_date(collapse_whitespace(created.text));
    } catch (const ValidationError& e) {
      throw ParseError("xml: " + where() + ": " + e.what(), created.offset);
    }
    const auto& authors = required("authors");
    for (const auto& a : authors.children)
      if (a.name == "author") rec.authors.push_back(a.text);
    const auto& cats = required("categories");
    rec.categories = detail::split_ws(cats.text);
    if (rec.categories.empty())
      throw ParseError("xml: " + where() + ": empty <categories> at byte " + std::to_string(cats.offset),
                       cats.offset);
    try {
      canonicalize(rec);
    } catch (const ValidationError& e) {
      throw ParseError("xml: " + where() + ": " + e.what(), node.offset);
    }
    detail::check_unique(seen, rec);
    corpus.records.push_back(std::move(rec));
    ++index;
  }
  return corpus;
}

inline CorpusFormat parse_format(std::string_view name) {
  if (name == "jsonl") return CorpusFormat::jsonl;
  if (name == "oai-xml" || name == "xml") return CorpusFormat::oai_xml;
  throw ConfigError("unknown corpus format '" + std::string(name) + "' (expected jsonl or oai-xml)");
}

/// Guesses the format from the file extension; JSONL unless it ends in .xml.
inline CorpusFormat guess_format(std::string_view path) {
  return path.ends_with(".xml") ? CorpusFormat::oai_xml : CorpusFormat::jsonl;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

inline Corpus parse_corpus(std::string_view bytes, CorpusFormat format) {
  return format == CorpusFormat::jsonl ? parse_jsonl(bytes) : parse_oai_xml(bytes);
}

inline Corpus load_corpus(const std::string& path, std::optional<CorpusFormat> format = std::nullopt) {
  return parse_corpus(read_file(path), format.value_or(guess_format(path)));
}

/// Source of a day's release. The offline build reads local files; a network
/// harvester plugs in behind the same interface.
class ReleaseSource {
 public:
  virtual ~ReleaseSource() = default;
  virtual std::vector<PaperRecord> fetch(Days day) = 0;
};

/// Serves the records of a local corpus file submitted on the requested day.
class FileReleaseSource : public ReleaseSource {
 public:
  explicit FileReleaseSource(Corpus corpus) : corpus_(std::move(corpus)) {}
  explicit FileReleaseSource(const std::string& path, std::optional<CorpusFormat> format = std::nullopt)
      : corpus_(load_corpus(path, format)) {}

  std::vector<PaperRecord> fetch(Days day) override {
    std::vector<PaperRecord> out;
    for (const auto& r : corpus_.records)
      if (r.submitted == day) out.push_back(r);
    return out;
  }

 private:
  Corpus corpus_;
};

/// Placeholder for a live arXiv harvester. Not available in this build.
class ArxivHttpSource : public ReleaseSource {
 public:
  explicit ArxivHttpSource(std::string base_url) : base_url_(std::move(base_url)) {}
  std::vector<PaperRecord> fetch(Days) override {
    throw ConfigError("live harvesting from " + base_url_ + " is not supported; export the release to a local file");
  }

 private:
  std::string base_url_;
};

}  // namespace paperrank
