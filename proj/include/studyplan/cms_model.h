#pragma once

#include <chrono>
#include <compare>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "studyplan/error.h"
#include "studyplan/semester.h"

namespace studyplan {

// Generic campus-management data model: students, their program
// enrollments with per-semester status, the course catalog, the per-program
// schedule and exam records.

enum class SemesterStatus { enrolled, on_leave, dropped_out, graduated };
enum class OfferedTerms { winter_only, summer_only, both };
enum class ExamResult { passed, failed, registered_not_taken, deregistered };

using Date = std::chrono::year_month_day;

struct EnrollmentKey {
  std::string student_id;
  std::string program_id;

  friend auto operator<=>(const EnrollmentKey&, const EnrollmentKey&) = default;
  friend bool operator==(const EnrollmentKey&, const EnrollmentKey&) = default;
};

struct ProgramKey {
  std::string program_id;
  std::string regulation_version;

  friend auto operator<=>(const ProgramKey&, const ProgramKey&) = default;
  friend bool operator==(const ProgramKey&, const ProgramKey&) = default;
};

struct Student {
  std::string student_id;
  std::vector<std::string> program_ids;  // sorted

  friend bool operator==(const Student&, const Student&) = default;
};

struct ProgramEnrollment {
  std::string student_id;
  std::string program_id;
  std::string regulation_version;
  Semester start_semester;
  std::map<Semester, SemesterStatus> semester_statuses;

  EnrollmentKey key() const { return {student_id, program_id}; }
  int semesters_studied() const { return static_cast<int>(semester_statuses.size()); }
  /// First semester carrying `status`, if any.
  std::optional<Semester> first_with(SemesterStatus status) const;

  friend bool operator==(const ProgramEnrollment&, const ProgramEnrollment&) = default;
};

struct OfferedCourse {
  std::string course_id;
  std::string title;
  int credit_points = 0;
  OfferedTerms offered_terms = OfferedTerms::both;
  std::vector<std::string> tags;  // optional `tags` column, ';'-separated

  bool offered_in(Term term) const;
  friend bool operator==(const OfferedCourse&, const OfferedCourse&) = default;
};

struct ScheduleKey {
  std::string course_id;
  Semester semester;
  std::string program_id;

  friend auto operator<=>(const ScheduleKey&, const ScheduleKey&) = default;
  friend bool operator==(const ScheduleKey&, const ScheduleKey&) = default;
};

struct ScheduledCourse {
  std::string course_id;
  Semester semester;
  std::string program_id;
  bool mandatory = false;

  friend bool operator==(const ScheduledCourse&, const ScheduledCourse&) = default;
};

struct ExamRecord {
  std::string student_id;
  std::string program_id;
  std::string course_id;
  int attempt_no = 1;
  Semester semester;
  std::optional<Date> exam_date;
  std::optional<Date> registration_date;
  std::optional<Date> deregistration_date;
  ExamResult result = ExamResult::failed;
  std::optional<double> grade;

  friend bool operator==(const ExamRecord&, const ExamRecord&) = default;
};

using Catalog = std::map<std::string, OfferedCourse>;

/// Immutable, cross-referenced store. Only ingest_cms() creates populated
/// instances; all accessors are const so concurrent readers are safe.
class CmsDatabase {
 public:
  const std::map<std::string, Student>& students() const { return students_; }
  const std::map<EnrollmentKey, ProgramEnrollment>& enrollments() const { return enrollments_; }
  const Catalog& courses() const { return courses_; }
  const std::map<ScheduleKey, ScheduledCourse>& scheduled() const { return scheduled_; }
  /// Sorted by (student, program, course, semester, exam_date, attempt_no).
  const std::vector<ExamRecord>& exams() const { return exams_; }

  const ProgramEnrollment* find_enrollment(const EnrollmentKey& key) const;
  const OfferedCourse* find_course(std::string_view course_id) const;
  const ScheduledCourse* find_scheduled(const ScheduleKey& key) const;

  /// Exam records of one enrollment, in database order.
  std::vector<const ExamRecord*> exams_of(const EnrollmentKey& key) const;

  /// Program ids known from enrollments or the schedule.
  std::set<std::string> program_ids() const;
  /// (program, regulation_version) pairs that have at least one enrollment.
  std::set<ProgramKey> program_versions() const;

  /// True if `course_id` is scheduled as mandatory for `program_id` in any semester.
  bool is_mandatory(std::string_view course_id, std::string_view program_id) const;

  friend bool operator==(const CmsDatabase&, const CmsDatabase&) = default;

 private:
  friend class CmsIngestor;

  std::map<std::string, Student> students_;
  std::map<EnrollmentKey, ProgramEnrollment> enrollments_;
  Catalog courses_;
  std::map<ScheduleKey, ScheduledCourse> scheduled_;
  std::vector<ExamRecord> exams_;
};

// ---------------------------------------------------------------------------
// Ingestion

struct IngestConfig {
  // Grades run from 1.0 (best) to 5.0; a pass needs grade <= pass_threshold.
  double pass_threshold = 4.0;
};

struct IngestIssue {
  std::string file;
  std::size_t line = 0;
  std::string field;
  std::string message;

  std::string to_string() const;
  friend bool operator==(const IngestIssue&, const IngestIssue&) = default;
};

/// Raw text of the five CSV exports. `*_name` members are used in diagnostics.
struct CmsSources {
  std::string students;
  std::string enrollments;
  std::string courses;
  std::string scheduled;
  std::string exams;

  std::string students_name = "students.csv";
  std::string enrollments_name = "enrollments.csv";
  std::string courses_name = "courses.csv";
  std::string scheduled_name = "scheduled.csv";
  std::string exams_name = "exams.csv";

  /// Reads <dir>/students.csv etc. Throws Error if a file cannot be opened.
  static CmsSources from_directory(const std::string& dir);
};

struct IngestResult {
  CmsDatabase db;
  std::vector<IngestIssue> errors;

  bool ok() const { return errors.empty(); }
};

class IngestFailure : public Error {
 public:
  explicit IngestFailure(std::vector<IngestIssue> issues);
  const std::vector<IngestIssue>& issues() const { return issues_; }

 private:
  std::vector<IngestIssue> issues_;
};

/// Parses and cross-references the sources, then audits every type
/// invariant. The database is only meaningful when `errors` is empty.
IngestResult ingest_cms(const CmsSources& sources, const IngestConfig& config = {});

/// Convenience wrapper: ingest a directory, throwing IngestFailure on errors.
CmsDatabase load_cms(const std::string& dir, const IngestConfig& config = {});

// ---------------------------------------------------------------------------
// Cohorts

struct StartedIn {
  Semester semester;
  friend bool operator==(const StartedIn&, const StartedIn&) = default;
};
struct UnderRegulation {
  std::string version;
  friend bool operator==(const UnderRegulation&, const UnderRegulation&) = default;
};
struct StudiedAtLeast {
  int semesters = 0;
  friend bool operator==(const StudiedAtLeast&, const StudiedAtLeast&) = default;
};

/// One of the three cohort definitions over a fixed program. Semesters on
/// leave count towards StudiedAtLeast.
struct CohortDef {
  std::string program_id;
  std::variant<StartedIn, UnderRegulation, StudiedAtLeast> predicate;

  std::string describe() const;
  friend bool operator==(const CohortDef&, const CohortDef&) = default;
};

class UnknownProgram : public Error {
 public:
  explicit UnknownProgram(const std::string& program_id)
      : Error("unknown program '" + program_id + "'") {}
};

/// Enrollments of `def.program_id` satisfying the predicate, sorted.
std::vector<EnrollmentKey> cohort_members(const CmsDatabase& db, const CohortDef& def);

// ---------------------------------------------------------------------------
// Text codes shared by CSV, JSON and CLI.

std::string_view to_string(SemesterStatus s);
std::string_view to_string(OfferedTerms t);
std::string_view to_string(ExamResult r);
std::string_view result_code(ExamResult r);  // P / F / NT / D
std::string_view offered_code(OfferedTerms t);  // WS / SS / BOTH

std::optional<SemesterStatus> parse_status(std::string_view text);
std::optional<OfferedTerms> parse_offered(std::string_view text);
std::optional<ExamResult> parse_result_code(std::string_view text);

std::optional<Date> parse_iso_date(std::string_view text);
std::string format_iso_date(Date d);

}  // namespace studyplan
