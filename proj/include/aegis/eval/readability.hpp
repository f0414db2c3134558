#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace aegis::eval {

struct FkGrade {
  double grade = 0.0;  // may be negative
  int words = 0;
  int sentences = 0;
  int syllables = 0;
};

/// Sentences end at a run of '.', '!' or '?' followed by whitespace or end of
/// text; trailing text without a terminator is one more sentence. Segments
/// without a word are not counted.
std::vector<std::string> split_sentences(std::string_view text);

/// Whitespace-separated tokens holding at least one letter or digit.
/// Hyphenated compounds count as one word.
std::vector<std::string> split_words(std::string_view text);

/// Rule-based count, at least 1 for any token with a letter:
///  - all-capital tokens of 2-5 letters are spelled out (W = 3, others 1);
///  - lowercase letters only; hyphenated parts are counted separately;
///  - words of up to three letters are one syllable;
///  - "ment(s)", "ness", "ful", "ly", "ty" after a silent e add one to the
///    stem's count ("movement" = 2);
///  - final "gue"/"que" lose the "ue";
///  - trailing "ed" is silent unless preceded by 't' or 'd';
///  - trailing "es" is silent unless preceded by s, x, z, g, c, "ch" or "sh";
///  - a trailing single 'e' is silent, except consonant+"le" and "ee";
///  - vowel groups (a e i o u, and y when not word-initial) count one each;
///  - "ia", "io", "iu", "eo", "ua", "uo", "yi", "ient" add one, except
///    "ia"/"io" after t, c, s or x, "ient" after t or c, "qu", and "yo"
///    after a vowel;
///  - final "our" after h, l, s (or alone) and final "ire" add one;
///  - digit-only tokens count one syllable per digit.
int count_syllables(std::string_view word);

/// 0.39*(words/sentences) + 11.8*(syllables/words) - 15.59.
/// Throws Error(EmptyText) when the text holds no word.
FkGrade fk_grade(std::string_view text);

/// Formula alone; no counting.
double fk_formula(int words, int sentences, int syllables);

}  // namespace aegis::eval
