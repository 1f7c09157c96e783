#include "studyplan/json_io.h"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace studyplan {

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

namespace {

const Json& field(const Json& j, const char* name) {
  if (!j.is_object()) throw JsonSchemaError("expected a JSON object");
  auto it = j.find(name);
  if (it == j.end()) throw JsonSchemaError(std::string("missing field '") + name + "'");
  return *it;
}

std::string string_field(const Json& j, const char* name) {
  const Json& v = field(j, name);
  if (!v.is_string()) throw JsonSchemaError(std::string("field '") + name + "' must be a string");
  return v.get<std::string>();
}

int int_field(const Json& j, const char* name) {
  const Json& v = field(j, name);
  if (!v.is_number_integer()) throw JsonSchemaError(std::string("field '") + name + "' must be an integer");
  auto value = v.get<std::int64_t>();
  if (value < -1000000 || value > 1000000) throw JsonSchemaError(std::string("field '") + name + "' out of range");
  return static_cast<int>(value);
}

Semester semester_field(const Json& j, const char* name) {
  try {
    return parse_semester(string_field(j, name));
  } catch (const SemesterParseError& e) {
    throw JsonSchemaError(std::string("field '") + name + "': " + e.what());
  }
}

template <typename Enum, typename Parse>
Enum enum_field(const Json& j, const char* name, Enum fallback, Parse parse) {
  if (!j.contains(name)) return fallback;
  const Json& v = j.at(name);
  if (!v.is_string()) throw JsonSchemaError(std::string("field '") + name + "' must be a string");
  auto parsed = parse(v.get<std::string>());
  if (!parsed) throw JsonSchemaError(std::string("field '") + name + "' has unknown value '" + v.get<std::string>() + "'");
  return *parsed;
}

Json optional_int(const std::optional<std::int64_t>& v) { return v ? Json(*v) : Json(nullptr); }

}  // namespace

// ---------------------------------------------------------------------------

Json to_json(const CohortDef& cohort) {
  Json j{{"program_id", cohort.program_id}};
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, StartedIn>) {
          j["start_semester"] = format_semester(p.semester);
        } else if constexpr (std::is_same_v<T, UnderRegulation>) {
          j["regulation_version"] = p.version;
        } else {
          j["min_semesters"] = p.semesters;
        }
      },
      cohort.predicate);
  return j;
}

CohortDef cohort_from_json(const Json& j) {
  CohortDef def;
  def.program_id = string_field(j, "program_id");
  int kinds = j.contains("start_semester") + j.contains("regulation_version") + j.contains("min_semesters");
  if (kinds != 1) {
    throw JsonSchemaError("cohort needs exactly one of start_semester, regulation_version, min_semesters");
  }
  if (j.contains("start_semester")) {
    def.predicate = StartedIn{semester_field(j, "start_semester")};
  } else if (j.contains("regulation_version")) {
    def.predicate = UnderRegulation{string_field(j, "regulation_version")};
  } else {
    def.predicate = StudiedAtLeast{int_field(j, "min_semesters")};
  }
  return def;
}

Json to_json(const KpiValue& kpi) {
  return Json{{"name", kpi.name},
              {"value", kpi.value},
              {"numerator", kpi.numerator},
              {"denominator", kpi.denominator},
              {"cohort", to_json(kpi.cohort)},
              {"filters", kpi.filters}};
}

Json to_json(const IngestIssue& issue) {
  return Json{{"file", issue.file}, {"line", issue.line}, {"field", issue.field}, {"message", issue.message}};
}

// ---------------------------------------------------------------------------

Json to_json(const Timeline& tl) {
  Json atoms = Json::array();
  for (const auto& a : tl.atoms) {
    atoms.push_back({{"kind", std::string(to_string(a.kind))}, {"course", a.course_id}, {"sem", a.sem}});
  }
  return Json{{"program_id", tl.program_id},
              {"regulation_version", tl.regulation_version},
              {"start_semester", format_semester(tl.start_semester)},
              {"now", tl.now},
              {"atoms", atoms}};
}

Timeline timeline_from_json(const Json& j) {
  Timeline tl;
  tl.program_id = string_field(j, "program_id");
  tl.regulation_version = string_field(j, "regulation_version");
  tl.start_semester = semester_field(j, "start_semester");
  tl.now = int_field(j, "now");
  const Json& atoms = field(j, "atoms");
  if (!atoms.is_array()) throw JsonSchemaError("field 'atoms' must be an array");
  for (const auto& a : atoms) {
    EventAtom atom;
    atom.kind = enum_field(a, "kind", AtomKind::planned_take, parse_atom_kind);
    if (!a.contains("kind")) throw JsonSchemaError("atom is missing field 'kind'");
    atom.course_id = string_field(a, "course");
    atom.sem = int_field(a, "sem");
    tl.atoms.push_back(std::move(atom));
  }
  return tl;
}

Timeline parse_timeline(const std::string& text) {
  Json j = Json::parse(text, nullptr, false);
  if (j.is_discarded()) throw JsonSchemaError("timeline is not valid JSON");
  return timeline_from_json(j);
}

namespace {

Json to_json(const Finding& f) {
  return Json{{"rule_id", f.rule_id},     {"semester", f.semester},         {"courses", f.courses},
              {"message", f.message},     {"actual", optional_int(f.actual)}, {"required", optional_int(f.required)}};
}

}  // namespace

Json to_json(const ValidationReport& report) {
  Json violations = Json::array();
  for (const auto& f : report.violations) violations.push_back(to_json(f));
  Json warnings = Json::array();
  for (const auto& f : report.warnings) warnings.push_back(to_json(f));
  Json trajectories = Json::object();
  for (const auto& [name, values] : report.trajectories) trajectories[name] = values;
  return Json{{"violations", violations}, {"warnings", warnings}, {"trajectories", trajectories}};
}

std::string render_report(const ValidationReport& report) { return to_json(report).dump(2) + "\n"; }

// ---------------------------------------------------------------------------

Json to_json(const RecommendedPlan& plan) {
  return Json{{"program_id", plan.program_id},
              {"regulation_version", plan.regulation_version},
              {"semesters", plan.semesters}};
}

RecommendedPlan plan_from_json(const Json& j) {
  RecommendedPlan plan;
  plan.program_id = string_field(j, "program_id");
  plan.regulation_version = string_field(j, "regulation_version");
  const Json& semesters = field(j, "semesters");
  if (!semesters.is_array()) throw JsonSchemaError("field 'semesters' must be an array of arrays");
  for (const auto& block : semesters) {
    if (!block.is_array()) throw JsonSchemaError("field 'semesters' must be an array of arrays");
    auto& out = plan.semesters.emplace_back();
    for (const auto& c : block) {
      if (!c.is_string()) throw JsonSchemaError("course ids must be strings");
      out.push_back(c.get<std::string>());
    }
  }
  return plan;
}

RecommendedPlan load_plan_file(const std::string& path) {
  Json j = Json::parse(read_text_file(path), nullptr, false);
  if (j.is_discarded()) throw JsonSchemaError(path + ": not valid JSON");
  try {
    return plan_from_json(j);
  } catch (const JsonSchemaError& e) {
    throw JsonSchemaError(path + ": " + e.what());
  }
}

std::vector<RecommendedPlan> load_plans_dir(const std::string& dir) {
  std::vector<std::string> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path().string());
  }
  std::sort(files.begin(), files.end());
  std::vector<RecommendedPlan> out;
  for (const auto& f : files) out.push_back(load_plan_file(f));
  return out;
}

// ---------------------------------------------------------------------------

namespace {

std::optional<ActivityMode> parse_activity_mode(const std::string& s) {
  if (s == "course") return ActivityMode::course;
  if (s == "course_and_attempt") return ActivityMode::course_and_attempt;
  return std::nullopt;
}
std::optional<TimestampMode> parse_timestamp_mode(const std::string& s) {
  if (s == "semester") return TimestampMode::semester;
  if (s == "exam_date") return TimestampMode::exam_date;
  return std::nullopt;
}
std::optional<OccurrenceMode> parse_occurrence_mode(const std::string& s) {
  if (s == "first_only") return OccurrenceMode::first_only;
  if (s == "all") return OccurrenceMode::all;
  return std::nullopt;
}
std::optional<EventFilter> parse_event_filter(const std::string& s) {
  if (s == "all") return EventFilter::all;
  if (s == "first_attempts") return EventFilter::first_attempts;
  if (s == "passed_only") return EventFilter::passed_only;
  return std::nullopt;
}

}  // namespace

LogConfig log_config_from_json(const Json& j) {
  LogConfig c;
  if (!j.is_object()) throw JsonSchemaError("log config must be a JSON object");
  c.activity_mode = enum_field(j, "activity_mode", ActivityMode::course, parse_activity_mode);
  c.timestamp_mode = enum_field(j, "timestamp_mode", TimestampMode::semester, parse_timestamp_mode);
  c.occurrence_mode = enum_field(j, "occurrence_mode", OccurrenceMode::all, parse_occurrence_mode);
  c.event_filter = enum_field(j, "event_filter", EventFilter::all, parse_event_filter);
  c.scope = cohort_from_json(field(j, "scope"));
  if (j.contains("mandatory_only")) {
    if (!j.at("mandatory_only").is_boolean()) throw JsonSchemaError("field 'mandatory_only' must be a boolean");
    c.mandatory_only = j.at("mandatory_only").get<bool>();
  }
  return c;
}

Json to_json(const LogConfig& c) {
  return Json{{"activity_mode", c.activity_mode == ActivityMode::course ? "course" : "course_and_attempt"},
              {"timestamp_mode", c.timestamp_mode == TimestampMode::semester ? "semester" : "exam_date"},
              {"occurrence_mode", c.occurrence_mode == OccurrenceMode::first_only ? "first_only" : "all"},
              {"event_filter", c.event_filter == EventFilter::all              ? "all"
                               : c.event_filter == EventFilter::first_attempts ? "first_attempts"
                                                                               : "passed_only"},
              {"scope", to_json(c.scope)},
              {"mandatory_only", c.mandatory_only}};
}

// ---------------------------------------------------------------------------

Json to_json(const ReplayResult& r) {
  return Json{{"case_id", r.case_id},
              {"produced", r.produced},
              {"consumed", r.consumed},
              {"missing", r.missing},
              {"remaining", r.remaining},
              {"fitness", r.fitness},
              {"missing_detail", r.missing_detail},
              {"remaining_detail", r.remaining_detail},
              {"unknown_activities", r.unknown_activities}};
}

Json to_json(const Deviation& d) {
  return Json{{"course_id", d.course_id}, {"missing_count", d.missing_count}, {"trace_count", d.trace_count}};
}

Json to_json(const LogReplay& replay) {
  Json results = Json::array();
  for (const auto& r : replay.results) results.push_back(to_json(r));
  Json deviations = Json::array();
  for (const auto& d : replay.deviations) deviations.push_back(to_json(d));
  return Json{{"traces", results},
              {"aggregate",
               {{"trace_count", replay.results.size()},
                {"fitting_traces", replay.fitting_traces},
                {"mean_fitness", replay.mean_fitness ? Json(*replay.mean_fitness) : Json(nullptr)}}},
              {"deviations", deviations}};
}

Json to_json(const DefaultCandidate& c) {
  return Json{{"before_course", c.before_course},
              {"after_course", c.after_course},
              {"support_with", c.support_with},
              {"support_without", c.support_without},
              {"passed_with", c.passed_with},
              {"passed_without", c.passed_without},
              {"rate_with", c.rate_with},
              {"rate_without", c.rate_without},
              {"lift", c.lift},
              {"rule", candidate_rule_text(c)}};
}

Json to_json(const Dfg& dfg) {
  Json edges = Json::array();
  for (const auto& [e, f] : dfg.edges) edges.push_back({{"from", e.first}, {"to", e.second}, {"frequency", f}});
  return Json{{"nodes", dfg.nodes}, {"edges", edges}, {"start", dfg.start_freq}, {"end", dfg.end_freq}};
}

}  // namespace studyplan
