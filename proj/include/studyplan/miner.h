#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "studyplan/cms_model.h"
#include "studyplan/rules.h"

namespace studyplan {

/// Association between passing `before_course` first and later success in
/// `after_course`. Students attempting `after_course` split into `with`
/// (passed the first course in a strictly earlier semester than their first
/// attempt) and `without` (everyone else).
struct DefaultCandidate {
  std::string before_course;
  std::string after_course;
  std::int64_t support_with = 0;
  std::int64_t support_without = 0;
  std::int64_t passed_with = 0;
  std::int64_t passed_without = 0;
  double rate_with = 0.0;
  double rate_without = 0.0;
  double lift = 0.0;  // rate_with - rate_without

  friend bool operator==(const DefaultCandidate&, const DefaultCandidate&) = default;
};

class MiningError : public Error {
 public:
  using Error::Error;
};

/// Exact lift as one rational division, reproducible from the counts.
double candidate_lift(std::int64_t passed_with, std::int64_t support_with, std::int64_t passed_without,
                      std::int64_t support_without);

/// Candidates with both supports >= min_support and lift >= min_lift, ranked
/// by lift, then support_with (both descending), then course ids. Attempts are
/// exam records other than deregistrations.
std::vector<DefaultCandidate> mine_precedence_defaults(const CmsDatabase& db, const CohortDef& cohort,
                                                       std::int64_t min_support, double min_lift);

struct MergeOutcome {
  RuleSet rules;
  std::vector<std::string> notices;  // dropped or skipped candidates
};

/// Appends `default pass(X) before take(Y)` (provenance mined) for each
/// candidate unless a rule on the same ordered pair exists already or a hard
/// precedence in the opposite direction forbids it.
MergeOutcome candidates_to_defaults(const std::vector<DefaultCandidate>& candidates, const RuleSet& rs);

/// The rule text candidates_to_defaults would append for `c`.
std::string candidate_rule_text(const DefaultCandidate& c);

}  // namespace studyplan
