#include "studyplan/cms_model.h"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <tuple>
#include <utility>

#include "studyplan/csv.h"

namespace studyplan {

// ---------------------------------------------------------------------------
// Text codes

std::string_view to_string(SemesterStatus s) {
  switch (s) {
    case SemesterStatus::enrolled: return "enrolled";
    case SemesterStatus::on_leave: return "on_leave";
    case SemesterStatus::dropped_out: return "dropped_out";
    case SemesterStatus::graduated: return "graduated";
  }
  return "enrolled";
}

std::string_view to_string(OfferedTerms t) {
  switch (t) {
    case OfferedTerms::winter_only: return "winter_only";
    case OfferedTerms::summer_only: return "summer_only";
    case OfferedTerms::both: return "both";
  }
  return "both";
}

std::string_view to_string(ExamResult r) {
  switch (r) {
    case ExamResult::passed: return "passed";
    case ExamResult::failed: return "failed";
    case ExamResult::registered_not_taken: return "registered_not_taken";
    case ExamResult::deregistered: return "deregistered";
  }
  return "failed";
}

std::string_view result_code(ExamResult r) {
  switch (r) {
    case ExamResult::passed: return "P";
    case ExamResult::failed: return "F";
    case ExamResult::registered_not_taken: return "NT";
    case ExamResult::deregistered: return "D";
  }
  return "F";
}

std::string_view offered_code(OfferedTerms t) {
  switch (t) {
    case OfferedTerms::winter_only: return "WS";
    case OfferedTerms::summer_only: return "SS";
    case OfferedTerms::both: return "BOTH";
  }
  return "BOTH";
}

std::optional<SemesterStatus> parse_status(std::string_view text) {
  for (auto s : {SemesterStatus::enrolled, SemesterStatus::on_leave, SemesterStatus::dropped_out,
                 SemesterStatus::graduated}) {
    if (text == to_string(s)) return s;
  }
  return std::nullopt;
}

std::optional<OfferedTerms> parse_offered(std::string_view text) {
  for (auto t : {OfferedTerms::winter_only, OfferedTerms::summer_only, OfferedTerms::both}) {
    if (text == offered_code(t)) return t;
  }
  return std::nullopt;
}

std::optional<ExamResult> parse_result_code(std::string_view text) {
  for (auto r : {ExamResult::passed, ExamResult::failed, ExamResult::registered_not_taken,
                 ExamResult::deregistered}) {
    if (text == result_code(r)) return r;
  }
  return std::nullopt;
}

std::optional<Date> parse_iso_date(std::string_view text) {
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
  int y = 0;
  unsigned m = 0, d = 0;
  auto parse = [](std::string_view s, auto& out) {
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && p == s.data() + s.size();
  };
  if (!parse(text.substr(0, 4), y) || !parse(text.substr(5, 2), m) || !parse(text.substr(8, 2), d)) {
    return std::nullopt;
  }
  Date date{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
  if (!date.ok()) return std::nullopt;
  return date;
}

std::string format_iso_date(Date d) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(d.year()),
                static_cast<unsigned>(d.month()), static_cast<unsigned>(d.day()));
  return buf;
}

// ---------------------------------------------------------------------------
// Model helpers

std::optional<Semester> ProgramEnrollment::first_with(SemesterStatus status) const {
  for (const auto& [sem, st] : semester_statuses) {
    if (st == status) return sem;
  }
  return std::nullopt;
}

bool OfferedCourse::offered_in(Term term) const {
  switch (offered_terms) {
    case OfferedTerms::winter_only: return term == Term::winter;
    case OfferedTerms::summer_only: return term == Term::summer;
    case OfferedTerms::both: return true;
  }
  return true;
}

const ProgramEnrollment* CmsDatabase::find_enrollment(const EnrollmentKey& key) const {
  auto it = enrollments_.find(key);
  return it == enrollments_.end() ? nullptr : &it->second;
}

const OfferedCourse* CmsDatabase::find_course(std::string_view course_id) const {
  auto it = courses_.find(std::string(course_id));
  return it == courses_.end() ? nullptr : &it->second;
}

const ScheduledCourse* CmsDatabase::find_scheduled(const ScheduleKey& key) const {
  auto it = scheduled_.find(key);
  return it == scheduled_.end() ? nullptr : &it->second;
}

std::vector<const ExamRecord*> CmsDatabase::exams_of(const EnrollmentKey& key) const {
  auto lower = std::lower_bound(exams_.begin(), exams_.end(), key, [](const ExamRecord& r, const EnrollmentKey& k) {
    return std::tie(r.student_id, r.program_id) < std::tie(k.student_id, k.program_id);
  });
  std::vector<const ExamRecord*> out;
  for (auto it = lower; it != exams_.end() && it->student_id == key.student_id && it->program_id == key.program_id;
       ++it) {
    out.push_back(&*it);
  }
  return out;
}

std::set<std::string> CmsDatabase::program_ids() const {
  std::set<std::string> out;
  for (const auto& [key, _] : enrollments_) out.insert(key.program_id);
  for (const auto& [key, _] : scheduled_) out.insert(key.program_id);
  return out;
}

std::set<ProgramKey> CmsDatabase::program_versions() const {
  std::set<ProgramKey> out;
  for (const auto& [key, e] : enrollments_) out.insert({e.program_id, e.regulation_version});
  return out;
}

bool CmsDatabase::is_mandatory(std::string_view course_id, std::string_view program_id) const {
  for (const auto& [key, sc] : scheduled_) {
    if (key.course_id == course_id && key.program_id == program_id && sc.mandatory) return true;
  }
  return false;
}

// ---------------------------------------------------------------------------
// Ingestion

std::string IngestIssue::to_string() const {
  std::string out = file + ":" + std::to_string(line);
  if (!field.empty()) out += ": " + field;
  return out + ": " + message;
}

IngestFailure::IngestFailure(std::vector<IngestIssue> issues)
    : Error([&] {
        std::string msg = "CMS ingestion failed with " + std::to_string(issues.size()) + " error(s)";
        if (!issues.empty()) msg += "; first: " + issues.front().to_string();
        return msg;
      }()),
      issues_(std::move(issues)) {}

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::string trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return std::string(s);
}

std::optional<int> parse_int(std::string_view s) {
  int value = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || p != s.data() + s.size() || s.empty()) return std::nullopt;
  return value;
}

std::optional<double> parse_decimal(std::string_view s) {
  if (s.empty()) return std::nullopt;
  std::string copy(s);
  char* end = nullptr;
  double value = std::strtod(copy.c_str(), &end);
  if (end != copy.c_str() + copy.size()) return std::nullopt;
  return value;
}

}  // namespace

// Holds the per-run state of one ingestion: parsed tables, the database
// being assembled and the source locations needed for the audit pass.
class CmsIngestor {
 public:
  CmsIngestor(const CmsSources& sources, const IngestConfig& config) : sources_(sources), config_(config) {}

  IngestResult run() {
    auto students = table(sources_.students, sources_.students_name, {"student_id"});
    auto courses = table(sources_.courses, sources_.courses_name,
                         {"course_id", "title", "credit_points", "offered_terms"});
    auto enrollments = table(sources_.enrollments, sources_.enrollments_name,
                             {"student_id", "program_id", "regulation_version", "start_semester", "semester", "status"});
    auto scheduled = table(sources_.scheduled, sources_.scheduled_name,
                           {"course_id", "semester", "program_id", "mandatory"});
    auto exams = table(sources_.exams, sources_.exams_name,
                       {"student_id", "program_id", "course_id", "attempt_no", "semester", "exam_date",
                        "registration_date", "deregistration_date", "result", "grade"});

    if (students) load_students(*students);
    if (courses) load_courses(*courses);
    if (enrollments) load_enrollments(*enrollments);
    if (scheduled) load_scheduled(*scheduled);
    if (exams) load_exams(*exams);

    audit_enrollments();
    audit_exams();

    std::sort(issues_.begin(), issues_.end(), [](const IngestIssue& a, const IngestIssue& b) {
      return std::tie(a.file, a.line, a.field, a.message) < std::tie(b.file, b.line, b.field, b.message);
    });
    return IngestResult{std::move(db_), std::move(issues_)};
  }

 private:
  struct Cursor {
    const CsvTable& table;
    const CsvRow& row;
    std::string get(std::string_view name) const {
      auto col = table.column(name);
      if (!col || *col >= row.fields.size()) return {};
      return trim(row.fields[*col]);
    }
  };

  void issue(const std::string& file, std::size_t line, std::string field, std::string message) {
    issues_.push_back({file, line, std::move(field), std::move(message)});
  }

  std::optional<CsvTable> table(const std::string& text, const std::string& name,
                                std::initializer_list<std::string_view> required) {
    CsvTable t;
    try {
      t = parse_csv(text, name);
    } catch (const CsvError& e) {
      issue(name, e.line(), "", e.what());
      return std::nullopt;
    }
    bool complete = true;
    for (auto col : required) {
      if (!t.column(col)) {
        issue(name, 1, std::string(col), "missing required column");
        complete = false;
      }
    }
    if (!complete) return std::nullopt;
    std::vector<CsvRow> rows;
    for (auto& row : t.rows) {
      if (row.fields.size() != t.header.size()) {
        issue(name, row.line, "", "expected " + std::to_string(t.header.size()) + " fields, found " +
                                      std::to_string(row.fields.size()));
        continue;
      }
      rows.push_back(std::move(row));
    }
    t.rows = std::move(rows);
    return t;
  }

  std::optional<Semester> semester_field(const Cursor& c, std::string_view field) {
    auto text = c.get(field);
    try {
      return parse_semester(text);
    } catch (const SemesterParseError& e) {
      issue(c.table.file, c.row.line, std::string(field), e.what());
      return std::nullopt;
    }
  }

  // Empty text is a valid "absent" date; anything else must parse.
  bool date_field(const Cursor& c, std::string_view field, std::optional<Date>& out) {
    auto text = c.get(field);
    if (text.empty()) return true;
    out = parse_iso_date(text);
    if (!out) {
      issue(c.table.file, c.row.line, std::string(field), "invalid ISO-8601 date '" + text + "'");
      return false;
    }
    return true;
  }

  void load_students(const CsvTable& t) {
    for (const auto& row : t.rows) {
      Cursor c{t, row};
      auto id = c.get("student_id");
      if (id.empty()) {
        issue(t.file, row.line, "student_id", "empty student id");
        continue;
      }
      if (!db_.students_.emplace(id, Student{id, {}}).second) {
        issue(t.file, row.line, "student_id", "duplicate primary key '" + id + "'");
      }
    }
  }

  void load_courses(const CsvTable& t) {
    for (const auto& row : t.rows) {
      Cursor c{t, row};
      OfferedCourse course;
      course.course_id = c.get("course_id");
      course.title = c.get("title");
      bool ok = true;
      if (course.course_id.empty()) {
        issue(t.file, row.line, "course_id", "empty course id");
        ok = false;
      }
      auto cp = parse_int(c.get("credit_points"));
      if (!cp || *cp < 0) {
        issue(t.file, row.line, "credit_points", "credit points must be a non-negative integer, got '" +
                                                     c.get("credit_points") + "'");
        ok = false;
      } else {
        course.credit_points = *cp;
      }
      auto offered = parse_offered(c.get("offered_terms"));
      if (!offered) {
        issue(t.file, row.line, "offered_terms", "expected WS, SS or BOTH, got '" + c.get("offered_terms") + "'");
        ok = false;
      } else {
        course.offered_terms = *offered;
      }
      if (t.column("tags")) {
        std::string tags = c.get("tags");
        std::stringstream ss(tags);
        for (std::string tag; std::getline(ss, tag, ';');) {
          tag = trim(tag);
          if (!tag.empty()) course.tags.push_back(tag);
        }
        std::sort(course.tags.begin(), course.tags.end());
      }
      if (!ok) continue;
      if (!db_.courses_.emplace(course.course_id, course).second) {
        issue(t.file, row.line, "course_id", "duplicate primary key '" + course.course_id + "'");
      }
    }
  }

  void load_enrollments(const CsvTable& t) {
    for (const auto& row : t.rows) {
      Cursor c{t, row};
      auto student = c.get("student_id");
      auto program = c.get("program_id");
      auto version = c.get("regulation_version");
      bool ok = true;
      if (!db_.students_.count(student)) {
        issue(t.file, row.line, "student_id", "referential integrity: unknown student '" + student + "'");
        ok = false;
      }
      if (program.empty()) {
        issue(t.file, row.line, "program_id", "empty program id");
        ok = false;
      }
      if (version.empty()) {
        issue(t.file, row.line, "regulation_version", "empty regulation version");
        ok = false;
      }
      auto start = semester_field(c, "start_semester");
      auto sem = semester_field(c, "semester");
      auto status = parse_status(c.get("status"));
      if (!status) {
        issue(t.file, row.line, "status", "unknown status '" + c.get("status") + "'");
        ok = false;
      }
      if (!ok || !start || !sem) continue;

      EnrollmentKey key{student, program};
      auto [it, inserted] = db_.enrollments_.try_emplace(key);
      auto& e = it->second;
      if (inserted) {
        e.student_id = student;
        e.program_id = program;
        e.regulation_version = version;
        e.start_semester = *start;
        enrollment_line_[key] = row.line;
        db_.students_[student].program_ids.push_back(program);
      } else {
        if (e.regulation_version != version) {
          issue(t.file, row.line, "regulation_version",
                "conflicts with earlier row ('" + e.regulation_version + "' vs '" + version + "')");
          continue;
        }
        if (e.start_semester != *start) {
          issue(t.file, row.line, "start_semester", "conflicts with earlier row for the same enrollment");
          continue;
        }
      }
      if (!e.semester_statuses.emplace(*sem, *status).second) {
        issue(t.file, row.line, "semester",
              "duplicate primary key (" + student + ", " + program + ", " + format_semester(*sem) + ")");
        continue;
      }
      status_line_[{key, *sem}] = row.line;
    }
    for (auto& [_, s] : db_.students_) std::sort(s.program_ids.begin(), s.program_ids.end());
  }

  void load_scheduled(const CsvTable& t) {
    for (const auto& row : t.rows) {
      Cursor c{t, row};
      ScheduledCourse sc;
      sc.course_id = c.get("course_id");
      sc.program_id = c.get("program_id");
      bool ok = true;
      const OfferedCourse* course = db_.find_course(sc.course_id);
      if (!course) {
        issue(t.file, row.line, "course_id", "referential integrity: unknown course '" + sc.course_id + "'");
        ok = false;
      }
      if (sc.program_id.empty()) {
        issue(t.file, row.line, "program_id", "empty program id");
        ok = false;
      }
      auto sem = semester_field(c, "semester");
      auto mandatory = c.get("mandatory");
      if (mandatory != "0" && mandatory != "1") {
        issue(t.file, row.line, "mandatory", "expected 0 or 1, got '" + mandatory + "'");
        ok = false;
      }
      if (!ok || !sem) continue;
      sc.semester = *sem;
      sc.mandatory = mandatory == "1";
      if (!course->offered_in(sem->term)) {
        issue(t.file, row.line, "semester",
              "course '" + sc.course_id + "' is not offered in " + format_semester(*sem) + " (offered " +
                  std::string(offered_code(course->offered_terms)) + ")");
        continue;
      }
      ScheduleKey key{sc.course_id, sc.semester, sc.program_id};
      if (!db_.scheduled_.emplace(key, sc).second) {
        issue(t.file, row.line, "course_id", "duplicate primary key (" + sc.course_id + ", " +
                                                 format_semester(sc.semester) + ", " + sc.program_id + ")");
      }
    }
  }

  void load_exams(const CsvTable& t) {
    std::set<std::tuple<std::string, std::string, std::string, int>> keys;
    for (const auto& row : t.rows) {
      Cursor c{t, row};
      ExamRecord r;
      r.student_id = c.get("student_id");
      r.program_id = c.get("program_id");
      r.course_id = c.get("course_id");
      bool ok = true;
      if (!db_.students_.count(r.student_id)) {
        issue(t.file, row.line, "student_id", "referential integrity: unknown student '" + r.student_id + "'");
        ok = false;
      } else if (!db_.find_enrollment({r.student_id, r.program_id})) {
        issue(t.file, row.line, "program_id",
              "referential integrity: no enrollment of '" + r.student_id + "' in '" + r.program_id + "'");
        ok = false;
      }
      if (!db_.find_course(r.course_id)) {
        issue(t.file, row.line, "course_id", "referential integrity: unknown course '" + r.course_id + "'");
        ok = false;
      }
      auto attempt = parse_int(c.get("attempt_no"));
      if (!attempt || *attempt < 1) {
        issue(t.file, row.line, "attempt_no", "attempt number must be a positive integer, got '" +
                                                  c.get("attempt_no") + "'");
        ok = false;
      } else {
        r.attempt_no = *attempt;
      }
      auto sem = semester_field(c, "semester");
      if (!sem) ok = false;
      ok &= date_field(c, "exam_date", r.exam_date);
      ok &= date_field(c, "registration_date", r.registration_date);
      ok &= date_field(c, "deregistration_date", r.deregistration_date);
      auto result = parse_result_code(c.get("result"));
      if (!result) {
        issue(t.file, row.line, "result", "expected P, F, NT or D, got '" + c.get("result") + "'");
        ok = false;
      } else {
        r.result = *result;
      }
      auto grade_text = c.get("grade");
      if (!grade_text.empty()) {
        r.grade = parse_decimal(grade_text);
        if (!r.grade) {
          issue(t.file, row.line, "grade", "invalid decimal '" + grade_text + "'");
          ok = false;
        } else if (*r.grade < 1.0 || *r.grade > 5.0) {
          issue(t.file, row.line, "grade", "grade " + grade_text + " outside the 1.0-5.0 scale");
          ok = false;
        }
      }
      if (!ok) continue;
      r.semester = *sem;
      if (db_.find_course(r.course_id) && !db_.find_scheduled({r.course_id, r.semester, r.program_id})) {
        issue(t.file, row.line, "course_id",
              "referential integrity: '" + r.course_id + "' is not scheduled for '" + r.program_id + "' in " +
                  format_semester(r.semester));
        continue;
      }
      if (!keys.emplace(r.student_id, r.program_id, r.course_id, r.attempt_no).second) {
        issue(t.file, row.line, "attempt_no",
              "duplicate primary key (" + r.student_id + ", " + r.program_id + ", " + r.course_id + ", attempt " +
                  std::to_string(r.attempt_no) + ")");
        continue;
      }
      staged_exams_.push_back({std::move(r), row.line});
    }
    std::sort(staged_exams_.begin(), staged_exams_.end(), [](const auto& a, const auto& b) {
      return exam_order(a.first) < exam_order(b.first);
    });
  }

  static auto exam_order(const ExamRecord& r) {
    return std::make_tuple(r.student_id, r.program_id, r.course_id, r.semester, r.exam_date.has_value(),
                           r.exam_date.value_or(Date{}), r.attempt_no);
  }

  void audit_enrollments() {
    const std::string& file = sources_.enrollments_name;
    for (const auto& [key, e] : db_.enrollments_) {
      if (e.semester_statuses.empty()) continue;
      std::size_t line = enrollment_line_[key];
      if (e.semester_statuses.begin()->first != e.start_semester) {
        issue(file, line, "start_semester",
              "status rows of (" + key.student_id + ", " + key.program_id + ") do not begin at start semester " +
                  format_semester(e.start_semester));
      }
      Semester expected = e.semester_statuses.begin()->first;
      bool terminal_seen = false;
      for (const auto& [sem, status] : e.semester_statuses) {
        std::size_t at = status_line_[{key, sem}];
        if (sem != expected) {
          issue(file, at, "semester",
                "gap in status rows: expected " + format_semester(expected) + ", found " + format_semester(sem));
          expected = sem;
        }
        if (terminal_seen) {
          issue(file, at, "status", "status after a final dropped_out/graduated status");
        }
        if (status == SemesterStatus::dropped_out || status == SemesterStatus::graduated) terminal_seen = true;
        expected = expected.next();
      }
    }
  }

  void audit_exams() {
    const std::string& file = sources_.exams_name;
    std::size_t i = 0;
    while (i < staged_exams_.size()) {
      std::size_t j = i;
      const auto& head = staged_exams_[i].first;
      while (j < staged_exams_.size() && staged_exams_[j].first.student_id == head.student_id &&
             staged_exams_[j].first.program_id == head.program_id &&
             staged_exams_[j].first.course_id == head.course_id) {
        ++j;
      }
      int passes = 0;
      for (std::size_t k = i; k < j; ++k) {
        const auto& [r, line] = staged_exams_[k];
        int expected_attempt = static_cast<int>(k - i) + 1;
        if (r.attempt_no != expected_attempt) {
          issue(file, line, "attempt_no",
                "attempts of (" + r.student_id + ", " + r.program_id + ", " + r.course_id +
                    ") are not consecutive: expected " + std::to_string(expected_attempt) + ", found " +
                    std::to_string(r.attempt_no));
        }
        if (r.result == ExamResult::passed) {
          if (++passes > 1) {
            issue(file, line, "result",
                  "more than one passed record for (" + r.student_id + ", " + r.program_id + ", " + r.course_id + ")");
          }
          if (!r.grade) {
            issue(file, line, "grade", "passed record without grade");
          } else if (*r.grade > config_.pass_threshold) {
            issue(file, line, "grade", "passed record with grade above the pass threshold");
          }
        }
      }
      i = j;
    }
    db_.exams_.reserve(staged_exams_.size());
    for (auto& [r, _] : staged_exams_) db_.exams_.push_back(std::move(r));
  }

  const CmsSources& sources_;
  IngestConfig config_;
  CmsDatabase db_;
  std::vector<IngestIssue> issues_;
  std::map<EnrollmentKey, std::size_t> enrollment_line_;
  std::map<std::pair<EnrollmentKey, Semester>, std::size_t> status_line_;
  std::vector<std::pair<ExamRecord, std::size_t>> staged_exams_;
};

CmsSources CmsSources::from_directory(const std::string& dir) {
  CmsSources s;
  auto path = [&](const std::string& name) { return dir + "/" + name; };
  s.students = slurp(path(s.students_name));
  s.enrollments = slurp(path(s.enrollments_name));
  s.courses = slurp(path(s.courses_name));
  s.scheduled = slurp(path(s.scheduled_name));
  s.exams = slurp(path(s.exams_name));
  return s;
}

IngestResult ingest_cms(const CmsSources& sources, const IngestConfig& config) {
  return CmsIngestor(sources, config).run();
}

CmsDatabase load_cms(const std::string& dir, const IngestConfig& config) {
  auto result = ingest_cms(CmsSources::from_directory(dir), config);
  if (!result.ok()) throw IngestFailure(std::move(result.errors));
  return std::move(result.db);
}

}  // namespace studyplan
