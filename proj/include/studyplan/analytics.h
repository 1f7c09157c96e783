#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>

#include "studyplan/cms_model.h"
#include "studyplan/event_log.h"

namespace studyplan {

/// A KPI together with the counts it was computed from. For ratios
/// `value == numerator / denominator`; for averages numerator is the summed
/// quantity and denominator the number of contributing enrollments.
struct KpiValue {
  std::string name;
  double value = 0.0;
  std::int64_t numerator = 0;
  std::int64_t denominator = 1;
  CohortDef cohort;
  std::map<std::string, std::string> filters;

  friend bool operator==(const KpiValue&, const KpiValue&) = default;
};

/// Raised when a KPI has an empty denominator. "No data" is not reported as 0.
class UndefinedKpi : public Error {
 public:
  explicit UndefinedKpi(const std::string& what) : Error("undefined KPI: " + what) {}
};

class UnknownCourse : public Error {
 public:
  explicit UnknownCourse(const std::string& course_id) : Error("unknown course '" + course_id + "'") {}
};

// Every KPI counts per enrollment (student within the cohort's program),
// never per exam sitting.

KpiValue success_rate(const CmsDatabase& db, const std::string& course_id, const CohortDef& cohort,
                      std::optional<Semester> semester = std::nullopt);

enum class AttemptMeasure {
  max_attempt,     // highest attempt_no, over everyone who attempted
  attempt_of_pass  // attempt_no of the passed record, over those who passed
};

KpiValue avg_attempts(const CmsDatabase& db, const std::string& course_id, const CohortDef& cohort,
                      AttemptMeasure measure = AttemptMeasure::max_attempt);

struct ExamsPerSemester {
  KpiValue taken;   // all results except deregistered
  KpiValue passed;
};

ExamsPerSemester exams_per_semester(const CmsDatabase& db, const CohortDef& cohort, int semester_index);

KpiValue avg_study_duration(const CmsDatabase& db, const CohortDef& cohort);

KpiValue dropout_rate(const CmsDatabase& db, const CohortDef& cohort, int within_semesters);

// ---------------------------------------------------------------------------
// Directly-follows graphs

enum class TiePolicy {
  skip_ties,   // only count pairs across adjacent timestamp groups
  expand_ties  // linearize groups by ordinal
};

struct Dfg {
  std::map<std::string, std::int64_t> nodes;
  std::map<std::pair<std::string, std::string>, std::int64_t> edges;
  std::map<std::string, std::int64_t> start_freq;
  std::map<std::string, std::int64_t> end_freq;

  std::int64_t total_edge_frequency() const;
  friend bool operator==(const Dfg&, const Dfg&) = default;
};

Dfg discover_dfg(const EventLog& log, TiePolicy tie_policy = TiePolicy::skip_ties);

/// Graphviz digraph with lexicographically ordered nodes and edges.
std::string export_dot(const Dfg& dfg);

}  // namespace studyplan
