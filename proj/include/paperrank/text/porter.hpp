#pragma once

// The original Porter (1980) suffix-stripping stemmer for lowercase ASCII
// words. Words containing anything other than a-z are returned unchanged.

#include <string>
#include <string_view>

namespace paperrank::text {

class PorterStemmer {
 public:
  std::string operator()(std::string_view word) const {
    for (char c : word)
      if (c < 'a' || c > 'z') return std::string(word);
    if (word.size() <= 2) return std::string(word);
    Word w{std::string(word)};
    step1ab(w);
    if (w.b.size() > 1) {
      step1c(w);
      step2(w);
      step3(w);
      step4(w);
      step5(w);
    }
    return w.b;
  }

 private:
  // `b` holds the word; `j` marks the end of the stem once ends() matched.
  struct Word {
    std::string b;
    std::size_t j = 0;
  };

  static bool cons(const std::string& b, std::size_t i) {
    switch (b[i]) {
      case 'a': case 'e': case 'i': case 'o': case 'u':
        return false;
      case 'y':
        return i == 0 ? true : !cons(b, i - 1);
      default:
        return true;
    }
  }

  // Number of VC sequences in b[0, len).
  static int measure(const std::string& b, std::size_t len) {
    int n = 0;
    std::size_t i = 0;
    while (true) {
      if (i >= len) return n;
      if (!cons(b, i)) break;
      ++i;
    }
    ++i;
    while (true) {
      while (true) {
        if (i >= len) return n;
        if (cons(b, i)) break;
        ++i;
      }
      ++i;
      ++n;
      while (true) {
        if (i >= len) return n;
        if (!cons(b, i)) break;
        ++i;
      }
      ++i;
    }
  }

  static bool vowel_in_stem(const std::string& b, std::size_t len) {
    for (std::size_t i = 0; i < len; ++i)
      if (!cons(b, i)) return true;
    return false;
  }

  // b[len-2] == b[len-1], both consonants.
  static bool double_cons(const std::string& b, std::size_t len) {
    if (len < 2) return false;
    if (b[len - 1] != b[len - 2]) return false;
    return cons(b, len - 1);
  }

  // cvc ending at len-1 where the final c is not w, x or y.
  static bool cvc(const std::string& b, std::size_t len) {
    if (len < 3) return false;
    std::size_t i = len - 1;
    if (!cons(b, i) || cons(b, i - 1) || !cons(b, i - 2)) return false;
    char ch = b[i];
    return ch != 'w' && ch != 'x' && ch != 'y';
  }

  static bool ends(Word& w, std::string_view s) {
    if (s.size() > w.b.size()) return false;
    if (std::string_view(w.b).substr(w.b.size() - s.size()) != s) return false;
    w.j = w.b.size() - s.size();
    return true;
  }

  static void set_to(Word& w, std::string_view s) {
    w.b.resize(w.j);
    w.b += s;
  }

  static void replace_if_measured(Word& w, std::string_view s) {
    if (measure(w.b, w.j) > 0) set_to(w, s);
  }

  static void step1ab(Word& w) {
    if (w.b.back() == 's') {
      if (ends(w, "sses")) {
        w.b.resize(w.b.size() - 2);
      } else if (ends(w, "ies")) {
        set_to(w, "i");
      } else if (w.b.size() >= 2 && w.b[w.b.size() - 2] != 's') {
        w.b.pop_back();
      }
    }
    if (ends(w, "eed")) {
      if (measure(w.b, w.j) > 0) w.b.pop_back();
      return;
    }
    if ((ends(w, "ed") || ends(w, "ing")) && vowel_in_stem(w.b, w.j)) {
      w.b.resize(w.j);
      if (ends(w, "at")) {
        set_to(w, "ate");
      } else if (ends(w, "bl")) {
        set_to(w, "ble");
      } else if (ends(w, "iz")) {
        set_to(w, "ize");
      } else if (double_cons(w.b, w.b.size())) {
        char ch = w.b.back();
        if (ch != 'l' && ch != 's' && ch != 'z') w.b.pop_back();
      } else if (measure(w.b, w.b.size()) == 1 && cvc(w.b, w.b.size())) {
        w.b += 'e';
      }
    }
  }

  static void step1c(Word& w) {
    if (ends(w, "y") && vowel_in_stem(w.b, w.j)) w.b.back() = 'i';
  }

  static void step2(Word& w) {
    if (w.b.size() < 2) return;
    switch (w.b[w.b.size() - 2]) {
      case 'a':
        if (ends(w, "ational")) { replace_if_measured(w, "ate"); break; }
        if (ends(w, "tional")) { replace_if_measured(w, "tion"); break; }
        break;
      case 'c':
        if (ends(w, "enci")) { replace_if_measured(w, "ence"); break; }
        if (ends(w, "anci")) { replace_if_measured(w, "ance"); break; }
        break;
      case 'e':
        if (ends(w, "izer")) { replace_if_measured(w, "ize"); break; }
        break;
      case 'l':
        if (ends(w, "bli")) { replace_if_measured(w, "ble"); break; }
        if (ends(w, "alli")) { replace_if_measured(w, "al"); break; }
        if (ends(w, "entli")) { replace_if_measured(w, "ent"); break; }
        if (ends(w, "eli")) { replace_if_measured(w, "e"); break; }
        if (ends(w, "ousli")) { replace_if_measured(w, "ous"); break; }
        break;
      case 'o':
        if (ends(w, "ization")) { replace_if_measured(w, "ize"); break; }
        if (ends(w, "ation")) { replace_if_measured(w, "ate"); break; }
        if (ends(w, "ator")) { replace_if_measured(w, "ate"); break; }
        break;
      case 's':
        if (ends(w, "alism")) { replace_if_measured(w, "al"); break; }
        if (ends(w, "iveness")) { replace_if_measured(w, "ive"); break; }
        if (ends(w, "fulness")) { replace_if_measured(w, "ful"); break; }
        if (ends(w, "ousness")) { replace_if_measured(w, "ous"); break; }
        break;
      case 't':
        if (ends(w, "aliti")) { replace_if_measured(w, "al"); break; }
        if (ends(w, "iviti")) { replace_if_measured(w, "ive"); break; }
        if (ends(w, "biliti")) { replace_if_measured(w, "ble"); break; }
        break;
      case 'g':
        if (ends(w, "logi")) { replace_if_measured(w, "log"); break; }
        break;
      default:
        break;
    }
  }

  static void step3(Word& w) {
    switch (w.b.back()) {
      case 'e':
        if (ends(w, "icate")) { replace_if_measured(w, "ic"); break; }
        if (ends(w, "ative")) { replace_if_measured(w, ""); break; }
        if (ends(w, "alize")) { replace_if_measured(w, "al"); break; }
        break;
      case 'i':
        if (ends(w, "iciti")) { replace_if_measured(w, "ic"); break; }
        break;
      case 'l':
        if (ends(w, "ical")) { replace_if_measured(w, "ic"); break; }
        if (ends(w, "ful")) { replace_if_measured(w, ""); break; }
        break;
      case 's':
        if (ends(w, "ness")) { replace_if_measured(w, ""); break; }
        break;
      default:
        break;
    }
  }

  static void step4(Word& w) {
    if (w.b.size() < 2) return;
    bool hit = false;
    switch (w.b[w.b.size() - 2]) {
      case 'a': hit = ends(w, "al"); break;
      case 'c': hit = ends(w, "ance") || ends(w, "ence"); break;
      case 'e': hit = ends(w, "er"); break;
      case 'i': hit = ends(w, "ic"); break;
      case 'l': hit = ends(w, "able") || ends(w, "ible"); break;
      case 'n': hit = ends(w, "ant") || ends(w, "ement") || ends(w, "ment") || ends(w, "ent"); break;
      case 'o':
        if (ends(w, "ion") && w.j > 0 && (w.b[w.j - 1] == 's' || w.b[w.j - 1] == 't')) {
          hit = true;
          break;
        }
        hit = ends(w, "ou");
        break;
      case 's': hit = ends(w, "ism"); break;
      case 't': hit = ends(w, "ate") || ends(w, "iti"); break;
      case 'u': hit = ends(w, "ous"); break;
      case 'v': hit = ends(w, "ive"); break;
      case 'z': hit = ends(w, "ize"); break;
      default: break;
    }
    if (hit && measure(w.b, w.j) > 1) w.b.resize(w.j);
  }

  static void step5(Word& w) {
    std::size_t k = w.b.size();
    if (w.b[k - 1] == 'e') {
      int m = measure(w.b, k - 1);
      if (m > 1 || (m == 1 && !cvc(w.b, k - 1))) w.b.pop_back();
    }
    k = w.b.size();
    if (w.b[k - 1] == 'l' && double_cons(w.b, k) && measure(w.b, k) > 1) w.b.pop_back();
  }
};

/// Applies `stem` until the word stops changing, so that the result is a
/// fixed point of the stemmer. Porter stems shrink or keep the word, so this
/// terminates.
inline std::string stem_to_fixed_point(std::string_view word) {
  static const PorterStemmer stem;
  std::string current(word);
  for (;;) {
    std::string next = stem(current);
    if (next == current) return current;
    current = std::move(next);
  }
}

}  // namespace paperrank::text
