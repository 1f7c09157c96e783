#include "studyplan/semester.h"

#include <cctype>
#include <charconv>

namespace studyplan {

SemesterParseError::SemesterParseError(std::string text, std::string token)
    : Error("invalid semester '" + text + "': unexpected '" + token + "'"),
      text_(std::move(text)),
      token_(std::move(token)) {}

namespace {

bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

int to_int(std::string_view s) {
  int value = 0;
  std::from_chars(s.data(), s.data() + s.size(), value);
  return value;
}

int expand_year(std::string_view digits) {
  int y = to_int(digits);
  if (digits.size() == 4) return y;
  return y >= 70 ? 1900 + y : 2000 + y;
}

}  // namespace

Semester parse_semester(std::string_view text) {
  std::string owned(text);
  if (text.size() < 2) throw SemesterParseError(owned, owned.empty() ? "<empty>" : owned);

  std::string_view code = text.substr(0, 2);
  Term term;
  if (code == "WS") {
    term = Term::winter;
  } else if (code == "SS") {
    term = Term::summer;
  } else {
    throw SemesterParseError(owned, std::string(code));
  }

  std::string_view rest = text.substr(2);
  std::string_view first = rest;
  std::string_view second;
  if (auto slash = rest.find('/'); slash != std::string_view::npos) {
    first = rest.substr(0, slash);
    second = rest.substr(slash + 1);
    if (term == Term::summer) throw SemesterParseError(owned, std::string(rest.substr(slash)));
  }

  if (!all_digits(first) || (first.size() != 2 && first.size() != 4)) {
    throw SemesterParseError(owned, first.empty() ? "<missing year>" : std::string(first));
  }
  int year = expand_year(first);

  if (rest.find('/') != std::string_view::npos) {
    if (!all_digits(second) || (second.size() != 2 && second.size() != 4)) {
      throw SemesterParseError(owned, second.empty() ? "<missing year>" : std::string(second));
    }
    int follow = to_int(second);
    bool consistent = second.size() == 4 ? follow == year + 1 : follow == (year + 1) % 100;
    if (!consistent) throw SemesterParseError(owned, std::string(second));
  }
  return Semester{term, year};
}

std::string format_semester(Semester s) {
  std::string out = s.term == Term::winter ? "WS" : "SS";
  std::string digits = std::to_string(s.year);
  if (digits.size() < 4) digits.insert(0, 4 - digits.size(), '0');
  return out + digits;
}

}  // namespace studyplan
