#pragma once

#include <fstream>
#include <set>
#include <string>
#include <string_view>

#include "paperrank/error.hpp"

namespace paperrank::text {

using WordSet = std::set<std::string, std::less<>>;

inline constexpr int kStopWordListVersion = 1;

/// English stop words (list version 1). Identical to data/stop_words.txt.
inline const WordSet& default_stop_words() {
  static const WordSet words{
      "a", "about", "above", "after", "again", "against", "ain", "all", "am", "an", "and",
      "any", "are", "aren", "as", "at", "be", "because", "been", "before", "being", "below",
      "between", "both", "but", "by", "can", "couldn", "d", "did", "didn", "do", "does",
      "doesn", "doing", "don", "down", "during", "each", "few", "for", "from", "further",
      "had", "hadn", "has", "hasn", "have", "haven", "having", "he", "her", "here", "hers",
      "herself", "him", "himself", "his", "how", "i", "if", "in", "into", "is", "isn", "it",
      "its", "itself", "just", "ll", "m", "ma", "me", "mightn", "more", "most", "mustn", "my",
      "myself", "needn", "no", "nor", "not", "now", "o", "of", "off", "on", "once", "only",
      "or", "other", "our", "ours", "ourselves", "out", "over", "own", "re", "s", "same",
      "shan", "she", "should", "shouldn", "so", "some", "such", "t", "than", "that", "the",
      "their", "theirs", "them", "themselves", "then", "there", "these", "they", "this",
      "those", "through", "to", "too", "under", "until", "up", "ve", "very", "was", "wasn",
      "we", "were", "weren", "what", "when", "where", "which", "while", "who", "whom", "why",
      "will", "with", "won", "wouldn", "y", "you", "your", "yours", "yourself", "yourselves",
  };
  return words;
}

/// Seed list of tokens preserved verbatim. Identical to data/tech_words.txt.
inline const WordSet& default_tech_words() {
  static const WordSet words{"1-d", "2-d", "3-d", "e+", "e-", "AdS"};
  return words;
}

/// Reads a one-token-per-line UTF-8 list. Blank lines and lines starting
/// with '#' are skipped; surrounding whitespace is trimmed.
inline WordSet load_word_list(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open word list " + path);
  WordSet out;
  std::string line;
  while (std::getline(in, line)) {
    auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos || line[b] == '#') continue;
    auto e = line.find_last_not_of(" \t\r");
    out.insert(line.substr(b, e - b + 1));
  }
  return out;
}

}  // namespace paperrank::text
