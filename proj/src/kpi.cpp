#include <algorithm>

#include "studyplan/analytics.h"

namespace studyplan {

namespace {

KpiValue make_kpi(std::string name, std::int64_t numerator, std::int64_t denominator, const CohortDef& cohort,
                  std::map<std::string, std::string> filters) {
  KpiValue kpi;
  kpi.name = std::move(name);
  kpi.numerator = numerator;
  kpi.denominator = denominator;
  kpi.value = static_cast<double>(numerator) / static_cast<double>(denominator);
  kpi.cohort = cohort;
  kpi.filters = std::move(filters);
  return kpi;
}

void require_course(const CmsDatabase& db, const std::string& course_id) {
  if (!db.find_course(course_id)) throw UnknownCourse(course_id);
}

}  // namespace

KpiValue success_rate(const CmsDatabase& db, const std::string& course_id, const CohortDef& cohort,
                      std::optional<Semester> semester) {
  require_course(db, course_id);
  std::int64_t attempted = 0;
  std::int64_t passed = 0;
  for (const auto& key : cohort_members(db, cohort)) {
    bool any = false;
    bool pass = false;
    for (const ExamRecord* r : db.exams_of(key)) {
      if (r->course_id != course_id) continue;
      if (semester && r->semester != *semester) continue;
      any = true;
      pass = pass || r->result == ExamResult::passed;
    }
    attempted += any;
    passed += pass;
  }
  std::map<std::string, std::string> filters{{"course", course_id}};
  if (semester) filters["semester"] = format_semester(*semester);
  if (attempted == 0) throw UndefinedKpi("success_rate: no exam records for " + course_id + " in " + cohort.describe());
  return make_kpi("success_rate", passed, attempted, cohort, std::move(filters));
}

KpiValue avg_attempts(const CmsDatabase& db, const std::string& course_id, const CohortDef& cohort,
                      AttemptMeasure measure) {
  require_course(db, course_id);
  std::int64_t total = 0;
  std::int64_t students = 0;
  for (const auto& key : cohort_members(db, cohort)) {
    int max_attempt = 0;
    int pass_attempt = 0;
    for (const ExamRecord* r : db.exams_of(key)) {
      if (r->course_id != course_id) continue;
      max_attempt = std::max(max_attempt, r->attempt_no);
      if (r->result == ExamResult::passed) pass_attempt = r->attempt_no;
    }
    int value = measure == AttemptMeasure::max_attempt ? max_attempt : pass_attempt;
    if (value > 0) {
      total += value;
      ++students;
    }
  }
  std::map<std::string, std::string> filters{
      {"course", course_id},
      {"measure", measure == AttemptMeasure::max_attempt ? "max_attempt" : "attempt_of_pass"}};
  if (students == 0) throw UndefinedKpi("avg_attempts: no attempts at " + course_id + " in " + cohort.describe());
  return make_kpi("avg_attempts", total, students, cohort, std::move(filters));
}

ExamsPerSemester exams_per_semester(const CmsDatabase& db, const CohortDef& cohort, int semester_index_filter) {
  auto members = cohort_members(db, cohort);
  if (members.empty()) throw UndefinedKpi("exams_per_semester: empty cohort " + cohort.describe());
  std::int64_t taken = 0;
  std::int64_t passed = 0;
  for (const auto& key : members) {
    const ProgramEnrollment* e = db.find_enrollment(key);
    for (const ExamRecord* r : db.exams_of(key)) {
      if (semester_index(r->semester, e->start_semester) != semester_index_filter) continue;
      if (r->result != ExamResult::deregistered) ++taken;
      if (r->result == ExamResult::passed) ++passed;
    }
  }
  std::map<std::string, std::string> filters{{"semester_index", std::to_string(semester_index_filter)}};
  auto n = static_cast<std::int64_t>(members.size());
  return {make_kpi("exams_taken_per_semester", taken, n, cohort, filters),
          make_kpi("exams_passed_per_semester", passed, n, cohort, filters)};
}

KpiValue avg_study_duration(const CmsDatabase& db, const CohortDef& cohort) {
  std::int64_t total = 0;
  std::int64_t graduates = 0;
  for (const auto& key : cohort_members(db, cohort)) {
    const ProgramEnrollment* e = db.find_enrollment(key);
    if (auto grad = e->first_with(SemesterStatus::graduated)) {
      total += semester_index(*grad, e->start_semester);
      ++graduates;
    }
  }
  if (graduates == 0) throw UndefinedKpi("avg_study_duration: no graduates in " + cohort.describe());
  return make_kpi("avg_study_duration", total, graduates, cohort, {});
}

KpiValue dropout_rate(const CmsDatabase& db, const CohortDef& cohort, int within_semesters) {
  auto members = cohort_members(db, cohort);
  if (members.empty()) throw UndefinedKpi("dropout_rate: empty cohort " + cohort.describe());
  std::int64_t dropouts = 0;
  for (const auto& key : members) {
    const ProgramEnrollment* e = db.find_enrollment(key);
    if (auto dropped = e->first_with(SemesterStatus::dropped_out)) {
      if (semester_index(*dropped, e->start_semester) <= within_semesters) ++dropouts;
    }
  }
  return make_kpi("dropout_rate", dropouts, static_cast<std::int64_t>(members.size()), cohort,
                  {{"within_semesters", std::to_string(within_semesters)}});
}

}  // namespace studyplan
