#include "studyplan/regulation.h"

#include <algorithm>
#include <set>
#include <tuple>

namespace studyplan {

UnknownCourses::UnknownCourses(std::vector<std::string> courses)
    : Error([&] {
        std::string msg = "timeline references unknown course(s):";
        for (const auto& c : courses) msg += " " + c;
        return msg;
      }()),
      courses_(std::move(courses)) {}

void validate_timeline(const Timeline& tl, CheckMode mode) {
  if (tl.now < 0) throw TimelineError("now must be >= 0");
  std::set<std::pair<std::string, int>> planned;
  for (const auto& a : tl.atoms) {
    std::string where = std::string(to_string(a.kind)) + "(" + a.course_id + ") at sem " + std::to_string(a.sem);
    if (a.course_id.empty()) throw TimelineError("atom with empty course id");
    if (a.sem < 1) throw TimelineError(where + ": semester index must be >= 1");
    if (mode == CheckMode::audit) {
      if (a.kind == AtomKind::planned_take) throw TimelineError(where + ": audited histories cannot contain plans");
      continue;
    }
    if (a.kind == AtomKind::planned_take) {
      if (a.sem <= tl.now) throw TimelineError(where + ": planned events must lie after now=" + std::to_string(tl.now));
      if (!planned.emplace(a.course_id, a.sem).second) throw TimelineError(where + ": planned twice");
    } else if (a.sem > tl.now) {
      throw TimelineError(where + ": recorded events must lie at or before now=" + std::to_string(tl.now));
    }
  }
}

namespace {

bool in_filter(const CourseFilter& filter, const std::string& course, const Catalog* catalog) {
  if (std::holds_alternative<std::monostate>(filter)) return true;
  if (auto set = std::get_if<std::vector<std::string>>(&filter)) {
    return std::binary_search(set->begin(), set->end(), course);
  }
  const auto& tag = std::get<TagFilter>(filter).tag;
  if (!catalog) return false;
  auto it = catalog->find(course);
  if (it == catalog->end()) return false;
  return std::find(it->second.tags.begin(), it->second.tags.end(), tag) != it->second.tags.end();
}

void check_declared(const RuleSet& rs) {
  for (const auto* c : rs.contributions()) {
    if (!rs.declares(c->result)) throw EvaluationError("contribution to undeclared result '" + c->result + "'");
  }
}

// Sum of `result` contributions from atoms in [from, to] passing `filter`.
std::int64_t result_sum(const Timeline& tl, const RuleSet& rs, const std::string& result, const CourseFilter& filter,
                        int from, int to, const Catalog* catalog) {
  std::int64_t total = 0;
  for (const auto& atom : tl.atoms) {
    if (atom.sem < from || atom.sem > to) continue;
    if (!in_filter(filter, atom.course_id, catalog)) continue;
    for (const auto* c : rs.contributions()) {
      if (c->result == result && c->trigger.matches(atom)) total += c->delta;
    }
  }
  return total;
}

std::string describe_requirement(const ResultRequirement& r) {
  Rule tmp;
  tmp.body = r;
  std::string text = format_rule(tmp);
  return text.substr(text.find(' ') + 1);
}

bool checked(const EventAtom& atom, const Timeline& tl, CheckMode mode) {
  return mode == CheckMode::audit || atom.sem > tl.now;
}

}  // namespace

Trajectories evaluate_results(const Timeline& tl, const RuleSet& rs, int horizon) {
  check_declared(rs);
  Trajectories out;
  for (const auto& name : rs.results) out[name].assign(static_cast<std::size_t>(std::max(horizon, 0)), 0);
  for (const auto& atom : tl.atoms) {
    for (const auto* c : rs.contributions()) {
      if (!c->trigger.matches(atom)) continue;
      auto& values = out[c->result];
      for (int s = std::max(atom.sem, 1); s <= horizon; ++s) values[static_cast<std::size_t>(s - 1)] += c->delta;
    }
  }
  return out;
}

std::vector<Rule> catalog_availability_rules(const RuleSet& rs, const Catalog& catalog) {
  std::set<std::string> explicit_courses;
  for (const auto& rule : rs.rules) {
    if (auto a = std::get_if<AvailabilityRequirement>(&rule.body)) explicit_courses.insert(a->course_id);
  }
  std::vector<Rule> out;
  int id = rs.next_rule_id();
  for (const auto& [course_id, course] : catalog) {
    if (explicit_courses.count(course_id)) continue;
    Rule r;
    r.id = id++;
    r.category = RuleCategory::variant_admin;
    r.body = AvailabilityRequirement{course_id, course.offered_terms};
    out.push_back(std::move(r));
  }
  return out;
}

int report_horizon(const Timeline& tl, const RuleSet& rs, CheckMode mode) {
  int horizon = mode == CheckMode::planning ? tl.now : 0;
  for (const auto& a : tl.atoms) horizon = std::max(horizon, a.sem);
  for (const auto& rule : rs.rules) {
    if (auto r = std::get_if<ResultRequirement>(&rule.body)) horizon = std::max(horizon, r->judged_at());
  }
  return std::max(horizon, 1);
}

ValidationReport check_timeline(const Timeline& tl, const RuleSet& rs, const Catalog& catalog, CheckMode mode) {
  validate_timeline(tl, mode);
  {
    std::set<std::string> unknown;
    for (const auto& a : tl.atoms) {
      if (!catalog.count(a.course_id)) unknown.insert(a.course_id);
    }
    if (!unknown.empty()) throw UnknownCourses({unknown.begin(), unknown.end()});
  }
  check_declared(rs);

  ValidationReport report;
  report.trajectories = evaluate_results(tl, rs, report_horizon(tl, rs, mode));

  std::set<std::tuple<int, int, std::vector<std::string>>> seen;
  auto emit = [&](const Rule& rule, Finding f) {
    if (!seen.emplace(rule.id, f.semester, f.courses).second) return;
    f.rule_id = rule.id;
    (rule.is_default() ? report.warnings : report.violations).push_back(std::move(f));
  };

  auto availability = catalog_availability_rules(rs, catalog);
  std::vector<const Rule*> rules;
  for (const auto& r : rs.rules) rules.push_back(&r);
  for (const auto& r : availability) rules.push_back(&r);

  for (const Rule* rule : rules) {
    if (auto req = std::get_if<ResultRequirement>(&rule->body)) {
      int judged = req->judged_at();
      if (mode == CheckMode::planning && judged <= tl.now) continue;
      int from = std::holds_alternative<Window>(req->at) ? std::get<Window>(req->at).from : 1;
      std::int64_t actual = result_sum(tl, rs, req->result, req->filter, from, judged, &catalog);
      if (compare(actual, req->cmp, req->bound)) continue;
      Finding f;
      f.semester = judged;
      if (auto set = std::get_if<std::vector<std::string>>(&req->filter)) f.courses = *set;
      f.actual = actual;
      f.required = req->bound;
      f.message = describe_requirement(*req) + " not met: actual " + std::to_string(actual);
      emit(*rule, std::move(f));
    } else if (auto prec = std::get_if<PrecedenceRequirement>(&rule->body)) {
      for (const auto& atom : tl.atoms) {
        if (!checked(atom, tl, mode) || !prec->after.matches(atom)) continue;
        bool satisfied = std::any_of(tl.atoms.begin(), tl.atoms.end(), [&](const EventAtom& other) {
          return other.sem < atom.sem && prec->before.matches(other);
        });
        if (satisfied) continue;
        Finding f;
        f.semester = atom.sem;
        f.courses = {prec->after.course_id, prec->before.course_id};
        f.message = prec->before.to_string() + " must happen before " + prec->after.to_string() + " (sem " +
                    std::to_string(atom.sem) + ")";
        emit(*rule, std::move(f));
      }
    } else if (auto avail = std::get_if<AvailabilityRequirement>(&rule->body)) {
      for (const auto& atom : tl.atoms) {
        if (!checked(atom, tl, mode) || atom.course_id != avail->course_id) continue;
        Semester absolute = semester_at(tl.start_semester, atom.sem);
        OfferedCourse probe;
        probe.offered_terms = avail->offered;
        if (probe.offered_in(absolute.term)) continue;
        Finding f;
        f.semester = atom.sem;
        f.courses = {avail->course_id};
        f.message = avail->course_id + " is offered in " + std::string(offered_code(avail->offered)) +
                    " only, but scheduled in " + format_semester(absolute);
        emit(*rule, std::move(f));
      }
    }
  }

  auto order = [](const Finding& a, const Finding& b) {
    return std::tie(a.semester, a.rule_id, a.courses, a.message) < std::tie(b.semester, b.rule_id, b.courses, b.message);
  };
  std::sort(report.violations.begin(), report.violations.end(), order);
  std::sort(report.warnings.begin(), report.warnings.end(), order);
  return report;
}

ValidationReport check_plan(const Timeline& tl, const RuleSet& rs, const Catalog& catalog) {
  return check_timeline(tl, rs, catalog, CheckMode::planning);
}

ValidationReport check_conformance(const Timeline& tl, const RuleSet& rs, const Catalog& catalog) {
  return check_timeline(tl, rs, catalog, CheckMode::audit);
}

Timeline timeline_from_records(const CmsDatabase& db, const EnrollmentKey& key) {
  const ProgramEnrollment* e = db.find_enrollment(key);
  if (!e) throw Error("no enrollment of '" + key.student_id + "' in '" + key.program_id + "'");
  Timeline tl;
  tl.program_id = e->program_id;
  tl.regulation_version = e->regulation_version;
  tl.start_semester = e->start_semester;
  tl.now = e->semester_statuses.empty() ? 0 : semester_index(e->semester_statuses.rbegin()->first, e->start_semester);
  for (const ExamRecord* r : db.exams_of(key)) {
    EventAtom atom;
    atom.course_id = r->course_id;
    atom.sem = semester_index(r->semester, e->start_semester);
    switch (r->result) {
      case ExamResult::passed: atom.kind = AtomKind::passed; break;
      case ExamResult::failed: atom.kind = AtomKind::failed; break;
      case ExamResult::registered_not_taken: atom.kind = AtomKind::registered; break;
      case ExamResult::deregistered: atom.kind = AtomKind::deregistered; break;
    }
    tl.now = std::max(tl.now, atom.sem);
    tl.atoms.push_back(std::move(atom));
  }
  std::stable_sort(tl.atoms.begin(), tl.atoms.end(), [](const EventAtom& a, const EventAtom& b) {
    return std::tie(a.sem, a.course_id) < std::tie(b.sem, b.course_id);
  });
  return tl;
}

}  // namespace studyplan
