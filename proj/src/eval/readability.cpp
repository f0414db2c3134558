#include "aegis/eval/readability.hpp"

#include <cctype>

#include "aegis/error.hpp"

namespace aegis::eval {

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }
bool is_alnum(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }
bool is_terminator(char c) { return c == '.' || c == '!' || c == '?'; }

bool has_word(std::string_view s) {
  for (char c : s)
    if (is_alnum(c)) return true;
  return false;
}

bool is_vowel(const std::string& w, std::size_t i) {
  switch (w[i]) {
    case 'a': case 'e': case 'i': case 'o': case 'u': return true;
    case 'y': return i > 0;
    default: return false;
  }
}

bool ends_with(const std::string& w, std::string_view suffix) {
  return w.size() >= suffix.size() && w.compare(w.size() - suffix.size(), suffix.size(), suffix) == 0;
}

int count_part(std::string w) {
  if (w.empty()) return 0;
  if (w.size() <= 3) return 1;

  // Suffix after a silent e ("movement", "safety"): count the stem alone.
  for (std::string_view suffix : {"ments", "ment", "ness", "ful", "ly", "ty"}) {
    if (w.size() > suffix.size() + 3 && ends_with(w, suffix) &&
        w[w.size() - suffix.size() - 1] == 'e' &&
        !is_vowel(w, w.size() - suffix.size() - 2))
      return count_part(w.substr(0, w.size() - suffix.size())) + 1;
  }
  // "rogue", "unique"
  if (ends_with(w, "gue") || ends_with(w, "que")) w.resize(w.size() - 2);

  bool original_e = false;
  if (ends_with(w, "ed")) {
    const char before = w[w.size() - 3];
    if (before != 't' && before != 'd') w.resize(w.size() - 2);
  } else if (ends_with(w, "es")) {
    const char before = w[w.size() - 3];
    const bool voiced = before == 's' || before == 'x' || before == 'z' || before == 'g' ||
                        before == 'c' || ends_with(w, "ches") || ends_with(w, "shes");
    if (!voiced) w.resize(w.size() - 2);
  } else if (w.back() == 'e') {
    original_e = true;
    const bool syllabic_le = ends_with(w, "le") && w.size() >= 3 && !is_vowel(w, w.size() - 3);
    if (!syllabic_le && !ends_with(w, "ee")) w.pop_back();
  }

  int count = 0;
  bool in_group = false;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const bool v = is_vowel(w, i);
    if (v && !in_group) ++count;
    in_group = v;
  }

  // "hour", "flour", "fire", "desire": the r closes a second syllable.
  const std::string stem = w.back() == 's' ? w.substr(0, w.size() - 1) : w;
  if (ends_with(stem, "our")) {
    if (stem.size() == 3 || std::string_view("hls").find(stem[stem.size() - 4]) != std::string_view::npos)
      ++count;
  } else if (ends_with(w, "ir") && original_e) {
    ++count;
  }

  static constexpr std::string_view kSplits[] = {"ia", "io", "iu", "eo", "ua",
                                                 "uo", "yi", "yo", "ient"};
  for (auto pair : kSplits) {
    for (std::size_t pos = w.find(pair); pos != std::string::npos; pos = w.find(pair, pos + 1)) {
      if (pair[0] == 'i' && (pair[1] == 'a' || pair[1] == 'o') && pos > 0) {
        const char before = w[pos - 1];
        if (before == 't' || before == 'c' || before == 's' || before == 'x') continue;
      }
      if (pair == "yo" && (pos == 0 || is_vowel(w, pos - 1))) continue;
      if (pair == "ient" && pos > 0 && (w[pos - 1] == 't' || w[pos - 1] == 'c')) continue;
      // "qu" is a consonant cluster.
      if (pair[0] == 'u' && pos > 0 && w[pos - 1] == 'q') continue;
      ++count;
    }
  }
  return count < 1 ? 1 : count;
}

}  // namespace

std::vector<std::string> split_sentences(std::string_view text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  const std::size_t n = text.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (!is_terminator(text[i])) continue;
    std::size_t j = i;
    while (j < n && is_terminator(text[j])) ++j;
    // Closing quotes and brackets stay with the sentence they end.
    while (j < n && (text[j] == '"' || text[j] == '\'' || text[j] == ')')) ++j;
    if (j == n || is_space(text[j])) {
      auto seg = text.substr(start, j - start);
      if (has_word(seg)) out.emplace_back(seg);
      start = j;
    }
    i = j == 0 ? 0 : j - 1;
  }
  if (start < n) {
    auto seg = text.substr(start);
    if (has_word(seg)) out.emplace_back(seg);
  }
  return out;
}

std::vector<std::string> split_words(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_space(text[i])) ++i;
    std::size_t j = i;
    while (j < text.size() && !is_space(text[j])) ++j;
    if (j > i) {
      auto tok = text.substr(i, j - i);
      if (has_word(tok)) out.emplace_back(tok);
    }
    i = j;
  }
  return out;
}

int count_syllables(std::string_view word) {
  bool any_alpha = false;
  int digits = 0;
  for (char c : word) {
    if (std::isalpha(static_cast<unsigned char>(c))) any_alpha = true;
    else if (std::isdigit(static_cast<unsigned char>(c))) ++digits;
  }
  if (!any_alpha) return digits;

  // Short all-capital acronyms are spelled out ("GPS").
  if (word.size() >= 2 && word.size() <= 5) {
    bool caps = true;
    for (char c : word) caps = caps && std::isupper(static_cast<unsigned char>(c));
    if (caps) {
      int n = 0;
      for (char c : word) n += c == 'W' ? 3 : 1;
      return n;
    }
  }

  int total = 0;
  std::string part;
  auto flush = [&] {
    total += count_part(part);
    part.clear();
  };
  for (char c : word) {
    if (c == '-' || c == '/') flush();
    else if (std::isalpha(static_cast<unsigned char>(c)))
      part.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  flush();
  return total < 1 ? 1 : total;
}

double fk_formula(int words, int sentences, int syllables) {
  return 0.39 * (static_cast<double>(words) / sentences) +
         11.8 * (static_cast<double>(syllables) / words) - 15.59;
}

FkGrade fk_grade(std::string_view text) {
  const auto words = split_words(text);
  if (words.empty()) throw Error(Errc::EmptyText, "text contains no word");
  FkGrade g;
  g.words = static_cast<int>(words.size());
  g.sentences = static_cast<int>(split_sentences(text).size());
  if (g.sentences < 1) g.sentences = 1;
  for (const auto& w : words) g.syllables += count_syllables(w);
  g.grade = fk_formula(g.words, g.sentences, g.syllables);
  return g;
}

}  // namespace aegis::eval
