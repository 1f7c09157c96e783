#include <sstream>

#include "studyplan/rules.h"

namespace studyplan {

namespace {

std::string format_filter(const CourseFilter& filter) {
  if (auto set = std::get_if<std::vector<std::string>>(&filter)) {
    std::string out = ", {";
    for (std::size_t i = 0; i < set->size(); ++i) out += (i ? ", " : "") + (*set)[i];
    return out + "}";
  }
  if (auto tag = std::get_if<TagFilter>(&filter)) return ", tag:" + tag->tag;
  return "";
}

std::string format_body(const ResultRequirement& r) {
  std::string out = "sum(" + r.result + format_filter(r.filter) + ") " + std::string(to_string(r.cmp)) + " " +
                    std::to_string(r.bound);
  if (auto d = std::get_if<Deadline>(&r.at)) return out + " by sem " + std::to_string(d->sem);
  const auto& w = std::get<Window>(r.at);
  return out + " in sems " + std::to_string(w.from) + ".." + std::to_string(w.to);
}

}  // namespace

std::string format_rule(const Rule& rule) {
  return std::visit(
      [&](const auto& body) -> std::string {
        using T = std::decay_t<decltype(body)>;
        if constexpr (std::is_same_v<T, Contribution>) {
          return "contributes " + body.trigger.to_string() + " -> " + body.result + " += " + std::to_string(body.delta);
        } else if constexpr (std::is_same_v<T, AvailabilityRequirement>) {
          return "offered " + body.course_id + " in " + std::string(offered_code(body.offered));
        } else {
          std::string head = rule.is_default() ? "default " : "require ";
          std::string text;
          if constexpr (std::is_same_v<T, ResultRequirement>) {
            text = head + format_body(body);
          } else {
            text = head + body.before.to_string() + " before " + body.after.to_string();
          }
          if (rule.is_default() && rule.provenance == Provenance::mined) text += "  # mined";
          return text;
        }
      },
      rule.body);
}

std::string format_rules(const RuleSet& rs) {
  std::ostringstream out;
  out << "# regulation rules\n";
  for (const auto& name : rs.results) out << "result " << name << "\n";
  RuleCategory current = RuleCategory::invariant;
  for (const auto& rule : rs.rules) {
    if (rule.category != current) {
      out << "category " << to_string(rule.category) << "\n";
      current = rule.category;
    }
    out << format_rule(rule) << "\n";
  }
  return out.str();
}

}  // namespace studyplan
