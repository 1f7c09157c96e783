#include <type_traits>

#include "studyplan/cms_model.h"

namespace studyplan {

std::string CohortDef::describe() const {
  return std::visit(
      [&](const auto& p) -> std::string {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, StartedIn>) {
          return program_id + ": start_semester=" + format_semester(p.semester);
        } else if constexpr (std::is_same_v<T, UnderRegulation>) {
          return program_id + ": regulation_version=" + p.version;
        } else {
          return program_id + ": semesters_studied>=" + std::to_string(p.semesters);
        }
      },
      predicate);
}

std::vector<EnrollmentKey> cohort_members(const CmsDatabase& db, const CohortDef& def) {
  if (!db.program_ids().count(def.program_id)) throw UnknownProgram(def.program_id);

  auto matches = [&](const ProgramEnrollment& e) {
    return std::visit(
        [&](const auto& p) {
          using T = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<T, StartedIn>) {
            return e.start_semester == p.semester;
          } else if constexpr (std::is_same_v<T, UnderRegulation>) {
            return e.regulation_version == p.version;
          } else {
            return e.semesters_studied() >= p.semesters;
          }
        },
        def.predicate);
  };

  std::vector<EnrollmentKey> out;
  for (const auto& [key, e] : db.enrollments()) {
    if (key.program_id == def.program_id && matches(e)) out.push_back(key);
  }
  return out;
}

}  // namespace studyplan
