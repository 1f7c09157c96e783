#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "studyplan/cms_model.h"

namespace studyplan {

// ---------------------------------------------------------------------------
// Timeline atoms

enum class AtomKind { passed, failed, registered, deregistered, planned_take };

struct EventAtom {
  AtomKind kind = AtomKind::planned_take;
  std::string course_id;
  int sem = 1;  // 1-based semester index relative to the enrollment start

  friend bool operator==(const EventAtom&, const EventAtom&) = default;
};

std::string_view to_string(AtomKind kind);
std::optional<AtomKind> parse_atom_kind(std::string_view text);

// ---------------------------------------------------------------------------
// Rule building blocks

/// Event keyword of the rules language. Which atom kinds each one matches:
///
///   pass      passed, planned_take
///   fail      failed
///   take      registered, passed, failed, planned_take
///   register  registered, deregistered, passed, failed, planned_take
///
/// Planned atoms count as passes: plans are validated optimistically.
enum class Verb { pass, fail, take, register_ };

std::string_view to_string(Verb verb);
bool verb_matches(Verb verb, AtomKind kind);

struct EventPattern {
  Verb verb = Verb::take;
  std::string course_id;

  bool matches(const EventAtom& atom) const { return atom.course_id == course_id && verb_matches(verb, atom.kind); }
  std::string to_string() const;
  friend bool operator==(const EventPattern&, const EventPattern&) = default;
};

enum class Comparator { lt, le, eq, ge, gt };

std::string_view to_string(Comparator cmp);
bool compare(std::int64_t value, Comparator cmp, std::int64_t bound);

struct TagFilter {
  std::string tag;
  friend bool operator==(const TagFilter&, const TagFilter&) = default;
};

/// Restricts a result sum to events on a set of courses (kept sorted and
/// unique) or on courses carrying a catalog tag. monostate = no filter.
using CourseFilter = std::variant<std::monostate, std::vector<std::string>, TagFilter>;

struct Deadline {
  int sem = 1;
  friend bool operator==(const Deadline&, const Deadline&) = default;
};

struct Window {
  int from = 1;
  int to = 1;
  friend bool operator==(const Window&, const Window&) = default;
};

struct Contribution {
  EventPattern trigger;
  std::string result;
  std::int64_t delta = 0;
  friend bool operator==(const Contribution&, const Contribution&) = default;
};

/// sum(result[, filter]) CMP bound, either cumulative up to a deadline or over
/// a window of semesters.
struct ResultRequirement {
  std::string result;
  CourseFilter filter;
  Comparator cmp = Comparator::ge;
  std::int64_t bound = 0;
  std::variant<Deadline, Window> at;

  /// Semester at which the requirement is judged (deadline or window end).
  int judged_at() const;
  friend bool operator==(const ResultRequirement&, const ResultRequirement&) = default;
};

struct PrecedenceRequirement {
  EventPattern before;
  EventPattern after;
  friend bool operator==(const PrecedenceRequirement&, const PrecedenceRequirement&) = default;
};

struct AvailabilityRequirement {
  std::string course_id;
  OfferedTerms offered = OfferedTerms::both;
  friend bool operator==(const AvailabilityRequirement&, const AvailabilityRequirement&) = default;
};

enum class RuleCategory { invariant, variant_admin, variant_student };
enum class Strength { requirement, recommendation };  // recommendation = default rule
enum class Provenance { authored, mined };

std::string_view to_string(RuleCategory c);

using RuleBody = std::variant<Contribution, ResultRequirement, PrecedenceRequirement, AvailabilityRequirement>;

struct Rule {
  int id = 0;  // 1-based statement order
  RuleCategory category = RuleCategory::invariant;
  Strength strength = Strength::requirement;
  Provenance provenance = Provenance::authored;
  RuleBody body;

  bool is_default() const { return strength == Strength::recommendation; }
  bool is_contribution() const { return std::holds_alternative<Contribution>(body); }
  friend bool operator==(const Rule&, const Rule&) = default;
};

struct RuleSet {
  ProgramKey binding;                // (program, regulation_version) the file applies to
  std::vector<std::string> results;  // declaration order
  std::vector<Rule> rules;           // ids 1..n in order

  bool declares(std::string_view result) const;
  int next_rule_id() const { return rules.empty() ? 1 : rules.back().id + 1; }

  std::vector<const Contribution*> contributions() const;

  /// Structural equality ignores the binding, which comes from the file name.
  friend bool operator==(const RuleSet& a, const RuleSet& b) { return a.results == b.results && a.rules == b.rules; }
};

// ---------------------------------------------------------------------------
// Rules language

class RulesParseError : public Error {
 public:
  RulesParseError(std::size_t line, std::size_t column, const std::string& message);
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }
  const std::string& message() const { return message_; }

 private:
  std::size_t line_;
  std::size_t column_;
  std::string message_;
};

/// Parses the line-oriented rules language:
///
///   result NAME
///   contributes EVT -> NAME += INT
///   require|default sum(NAME[, FILTER]) CMP INT (by sem INT | in sems INT..INT)
///   require|default EVT before EVT
///   offered COURSE in WS|SS|BOTH
///   category invariant|variant_admin|variant_student
///
/// with EVT := pass|fail|take|register ( COURSE ) and FILTER := { COURSE, ... }
/// | tag:NAME. `#` starts a comment; a `default` line ending in `# mined` is
/// marked as mined.
RuleSet parse_rules(std::string_view text);

/// Canonical text; parse_rules(format_rules(rs)) == rs.
std::string format_rules(const RuleSet& rs);

/// Canonical text of a single rule statement (without category line).
std::string format_rule(const Rule& rule);

/// Loads `<dir>/<program>@<version>.rules` files into rule sets keyed by binding.
std::vector<RuleSet> load_rules_dir(const std::string& dir);
RuleSet load_rules_file(const std::string& path);

/// Load-time diagnostics: courses referenced by rules that the catalog lacks.
std::vector<std::string> audit_rules(const RuleSet& rs, const Catalog& catalog);

}  // namespace studyplan
