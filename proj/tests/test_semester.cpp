#include <random>

#include "doctest.h"
#include "studyplan/semester.h"

using namespace studyplan;

TEST_CASE("parse_semester accepts the short and long spellings") {
  CHECK(parse_semester("WS21/22") == Semester{Term::winter, 2021});
  CHECK(parse_semester("SS2022") == Semester{Term::summer, 2022});
  CHECK(parse_semester("WS21") == Semester{Term::winter, 2021});
  CHECK(parse_semester("WS2021") == Semester{Term::winter, 2021});
  CHECK(parse_semester("WS2021/22") == Semester{Term::winter, 2021});
  CHECK(parse_semester("WS2021/2022") == Semester{Term::winter, 2021});
  CHECK(parse_semester("SS22") == Semester{Term::summer, 2022});
  CHECK(parse_semester("WS99") == Semester{Term::winter, 1999});
  CHECK(parse_semester("SS70") == Semester{Term::summer, 1970});
  CHECK(parse_semester("SS69") == Semester{Term::summer, 2069});
}

TEST_CASE("parse_semester names the offending token") {
  try {
    parse_semester("XX21");
    FAIL("expected a parse error");
  } catch (const SemesterParseError& e) {
    CHECK(e.token() == "XX");
  }
  for (const char* bad : {"", "WS", "WS2", "WS202", "WS21/23", "WS2021/2023", "SS21/22", "ws21", "WS21x", "WS-21"}) {
    CHECK_THROWS_AS(parse_semester(bad), SemesterParseError);
  }
}

TEST_CASE("format_semester is canonical and inverts parse") {
  CHECK(format_semester(parse_semester("WS21/22")) == "WS2021");
  CHECK(format_semester(parse_semester("SS22")) == "SS2022");
  for (int ord = 3900; ord < 4200; ++ord) {
    Semester s = Semester::from_ordinal(ord);
    CHECK(parse_semester(format_semester(s)) == s);
    CHECK(s.ordinal() == ord);
  }
}

TEST_CASE("semester_index counts from the origin") {
  Semester ws21{Term::winter, 2021};
  CHECK(semester_index(ws21, ws21) == 1);
  CHECK(semester_index(parse_semester("SS2022"), ws21) == 2);
  CHECK(semester_index(parse_semester("WS2022"), ws21) == 3);
  CHECK(semester_index(parse_semester("SS2021"), ws21) == 0);
  CHECK(semester_at(ws21, 3) == parse_semester("WS2022"));
}

TEST_CASE("order is total and agrees with the index sign") {
  std::mt19937 rng(7);
  std::uniform_int_distribution<int> d(3950, 4150);
  for (int i = 0; i < 2000; ++i) {
    Semester a = Semester::from_ordinal(d(rng));
    Semester b = Semester::from_ordinal(d(rng));
    CHECK(((a < b) + (a == b) + (b < a)) == 1);
    CHECK((a < b) == (semester_index(b, a) >= 2));
  }
  CHECK(Semester{Term::summer, 2021} < Semester{Term::winter, 2021});
  CHECK(Semester{Term::winter, 2021} < Semester{Term::summer, 2022});
}
