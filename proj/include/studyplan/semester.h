#pragma once

#include <compare>
#include <string>
#include <string_view>

#include "studyplan/error.h"

namespace studyplan {

enum class Term { summer, winter };

/// An academic term. `year` is the calendar year in which the term starts,
/// so WS2021 is the winter term 2021/22 and follows SS2021.
struct Semester {
  Term term = Term::winter;
  int year = 0;

  /// Dense ordering key: consecutive semesters differ by exactly one.
  constexpr int ordinal() const { return year * 2 + (term == Term::winter ? 1 : 0); }

  static constexpr Semester from_ordinal(int ordinal) {
    int year = ordinal >= 0 ? ordinal / 2 : -((-ordinal + 1) / 2);
    return Semester{(ordinal - year * 2) == 1 ? Term::winter : Term::summer, year};
  }

  constexpr Semester next() const { return from_ordinal(ordinal() + 1); }
  constexpr Semester prev() const { return from_ordinal(ordinal() - 1); }

  friend constexpr bool operator==(const Semester& a, const Semester& b) {
    return a.ordinal() == b.ordinal();
  }
  friend constexpr std::strong_ordering operator<=>(const Semester& a, const Semester& b) {
    return a.ordinal() <=> b.ordinal();
  }
};

class SemesterParseError : public Error {
 public:
  SemesterParseError(std::string text, std::string token);
  const std::string& text() const { return text_; }
  const std::string& token() const { return token_; }

 private:
  std::string text_;
  std::string token_;
};

/// Accepts WS21, WS21/22, WS2021, WS2021/22, WS2021/2022, SS22 and SS2022.
/// Two-digit years pivot at 70 (70..99 -> 19xx, otherwise 20xx).
Semester parse_semester(std::string_view text);

/// Canonical form, e.g. "WS2021" or "SS2022".
std::string format_semester(Semester s);

/// 1-based position of `s` counted from `origin` (origin itself is 1).
/// Semesters before the origin yield values <= 0.
constexpr int semester_index(Semester s, Semester origin) {
  return s.ordinal() - origin.ordinal() + 1;
}

/// Inverse of semester_index: the semester at 1-based `index` from `origin`.
constexpr Semester semester_at(Semester origin, int index) {
  return Semester::from_ordinal(origin.ordinal() + index - 1);
}

}  // namespace studyplan
