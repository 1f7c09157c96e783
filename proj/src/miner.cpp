#include "studyplan/miner.h"

#include <algorithm>
#include <map>
#include <set>
#include <tuple>

namespace studyplan {

double candidate_lift(std::int64_t passed_with, std::int64_t support_with, std::int64_t passed_without,
                      std::int64_t support_without) {
  return static_cast<double>(passed_with * support_without - passed_without * support_with) /
         static_cast<double>(support_with * support_without);
}

namespace {

__extension__ typedef __int128 Wide;

struct CourseHistory {
  std::optional<Semester> first_attempt;
  std::optional<Semester> passed_in;
};

}  // namespace

std::vector<DefaultCandidate> mine_precedence_defaults(const CmsDatabase& db, const CohortDef& cohort,
                                                       std::int64_t min_support, double min_lift) {
  if (min_support < 1) throw MiningError("min_support must be >= 1");
  if (!(min_lift > 0.0 && min_lift <= 1.0)) throw MiningError("min_lift must lie in (0, 1]");
  auto members = cohort_members(db, cohort);
  if (members.empty()) throw MiningError("cannot mine an empty cohort (" + cohort.describe() + ")");

  // Per student: course -> first attempt / pass semester.
  std::vector<std::map<std::string, CourseHistory>> histories;
  std::set<std::string> courses;
  for (const auto& key : members) {
    auto& h = histories.emplace_back();
    for (const ExamRecord* r : db.exams_of(key)) {
      if (r->result == ExamResult::deregistered) continue;
      auto& ch = h[r->course_id];
      if (!ch.first_attempt || r->semester < *ch.first_attempt) ch.first_attempt = r->semester;
      if (r->result == ExamResult::passed) ch.passed_in = r->semester;
      courses.insert(r->course_id);
    }
  }

  std::vector<DefaultCandidate> out;
  for (const auto& x : courses) {
    for (const auto& y : courses) {
      if (x == y) continue;
      DefaultCandidate c;
      c.before_course = x;
      c.after_course = y;
      for (const auto& h : histories) {
        auto yit = h.find(y);
        if (yit == h.end()) continue;
        auto xit = h.find(x);
        bool with = xit != h.end() && xit->second.passed_in && *xit->second.passed_in < *yit->second.first_attempt;
        bool passed = yit->second.passed_in.has_value();
        if (with) {
          ++c.support_with;
          c.passed_with += passed;
        } else {
          ++c.support_without;
          c.passed_without += passed;
        }
      }
      if (c.support_with < min_support || c.support_without < min_support) continue;
      c.rate_with = static_cast<double>(c.passed_with) / static_cast<double>(c.support_with);
      c.rate_without = static_cast<double>(c.passed_without) / static_cast<double>(c.support_without);
      c.lift = candidate_lift(c.passed_with, c.support_with, c.passed_without, c.support_without);
      if (c.lift < min_lift) continue;
      out.push_back(std::move(c));
    }
  }

  // Exact comparison of lifts: pw/sw - pn/sn  ==  (pw*sn - pn*sw) / (sw*sn).
  std::sort(out.begin(), out.end(), [](const DefaultCandidate& a, const DefaultCandidate& b) {
    Wide an = Wide{a.passed_with} * a.support_without - Wide{a.passed_without} * a.support_with;
    Wide ad = Wide{a.support_with} * a.support_without;
    Wide bn = Wide{b.passed_with} * b.support_without - Wide{b.passed_without} * b.support_with;
    Wide bd = Wide{b.support_with} * b.support_without;
    if (an * bd != bn * ad) return an * bd > bn * ad;
    if (a.support_with != b.support_with) return a.support_with > b.support_with;
    return std::tie(a.before_course, a.after_course) < std::tie(b.before_course, b.after_course);
  });
  return out;
}

std::string candidate_rule_text(const DefaultCandidate& c) {
  Rule r;
  r.strength = Strength::recommendation;
  r.provenance = Provenance::mined;
  r.body = PrecedenceRequirement{{Verb::pass, c.before_course}, {Verb::take, c.after_course}};
  return format_rule(r);
}

MergeOutcome candidates_to_defaults(const std::vector<DefaultCandidate>& candidates, const RuleSet& rs) {
  MergeOutcome out{rs, {}};
  auto find_precedence = [&](const std::string& before, const std::string& after, bool hard_only) {
    for (const auto& rule : out.rules.rules) {
      auto p = std::get_if<PrecedenceRequirement>(&rule.body);
      if (!p || (hard_only && rule.is_default())) continue;
      if (p->before.course_id == before && p->after.course_id == after) return true;
    }
    return false;
  };
  for (const auto& c : candidates) {
    if (find_precedence(c.after_course, c.before_course, true)) {
      out.notices.push_back("dropped " + candidate_rule_text(c) + ": contradicts a required precedence of " +
                            c.after_course + " before " + c.before_course);
      continue;
    }
    if (find_precedence(c.before_course, c.after_course, false)) {
      out.notices.push_back("skipped " + candidate_rule_text(c) + ": a rule on this pair exists already");
      continue;
    }
    Rule r;
    r.id = out.rules.next_rule_id();
    r.category = RuleCategory::invariant;
    r.strength = Strength::recommendation;
    r.provenance = Provenance::mined;
    r.body = PrecedenceRequirement{{Verb::pass, c.before_course}, {Verb::take, c.after_course}};
    out.rules.rules.push_back(std::move(r));
  }
  return out;
}

}  // namespace studyplan
