#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "studyplan/cms_model.h"
#include "studyplan/rules.h"

namespace studyplan {

/// A student's past (sem <= now) and planned (sem > now) events.
struct Timeline {
  std::string program_id;
  std::string regulation_version;
  Semester start_semester;
  int now = 0;  // last completed semester index
  std::vector<EventAtom> atoms;

  friend bool operator==(const Timeline&, const Timeline&) = default;
};

class TimelineError : public Error {
 public:
  using Error::Error;
};

class UnknownCourses : public Error {
 public:
  explicit UnknownCourses(std::vector<std::string> courses);
  const std::vector<std::string>& courses() const { return courses_; }

 private:
  std::vector<std::string> courses_;
};

class EvaluationError : public Error {
 public:
  using Error::Error;
};

enum class CheckMode {
  planning,  // past atoms are facts and never checked
  audit      // every atom is checked against every requirement
};

/// Throws TimelineError when an invariant of the timeline is broken for the
/// given mode.
void validate_timeline(const Timeline& tl, CheckMode mode);

/// result name -> value at semester 1..horizon (index 0 is semester 1).
using Trajectories = std::map<std::string, std::vector<std::int64_t>>;

/// Cumulative value of every declared result per semester, counting all
/// atoms (past and planned) with sem <= s.
Trajectories evaluate_results(const Timeline& tl, const RuleSet& rs, int horizon);

struct Finding {
  int rule_id = 0;
  int semester = 0;
  std::vector<std::string> courses;
  std::string message;
  std::optional<std::int64_t> actual;
  std::optional<std::int64_t> required;

  friend bool operator==(const Finding&, const Finding&) = default;
};

struct ValidationReport {
  std::vector<Finding> violations;  // from requirements
  std::vector<Finding> warnings;    // from defaults
  Trajectories trajectories;

  friend bool operator==(const ValidationReport&, const ValidationReport&) = default;
};

/// Availability rules generated from the catalog for courses without an
/// explicit `offered` statement. Ids continue after the rule set's own ids, in
/// course-id order, with category variant_admin.
std::vector<Rule> catalog_availability_rules(const RuleSet& rs, const Catalog& catalog);

/// Semester horizon used for trajectories: the largest of now, any atom
/// semester and any semester referenced by a result requirement.
int report_horizon(const Timeline& tl, const RuleSet& rs, CheckMode mode);

/// Planning-mode validation of a study plan.
ValidationReport check_plan(const Timeline& tl, const RuleSet& rs, const Catalog& catalog);

/// Audit-mode validation of a recorded history (no planned atoms).
ValidationReport check_conformance(const Timeline& tl, const RuleSet& rs, const Catalog& catalog);

ValidationReport check_timeline(const Timeline& tl, const RuleSet& rs, const Catalog& catalog, CheckMode mode);

/// Timeline of one enrollment's exam records: P -> passed, F -> failed,
/// NT -> registered, D -> deregistered; `now` is the last status semester.
Timeline timeline_from_records(const CmsDatabase& db, const EnrollmentKey& key);

}  // namespace studyplan
