#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "studyplan/analytics.h"
#include "studyplan/cms_model.h"
#include "studyplan/event_log.h"
#include "studyplan/miner.h"
#include "studyplan/petri.h"
#include "studyplan/regulation.h"

namespace studyplan {

using Json = nlohmann::json;

/// Malformed JSON payload (syntax or schema).
class JsonSchemaError : public Error {
 public:
  using Error::Error;
};

Json to_json(const CohortDef& cohort);
CohortDef cohort_from_json(const Json& j);

Json to_json(const KpiValue& kpi);
Json to_json(const IngestIssue& issue);

Json to_json(const Timeline& tl);
Timeline timeline_from_json(const Json& j);
/// Parses text into a Timeline; JsonSchemaError on any syntax/shape problem.
Timeline parse_timeline(const std::string& text);

Json to_json(const ValidationReport& report);
/// Canonical report text shared by the CLI and the HTTP service.
std::string render_report(const ValidationReport& report);

Json to_json(const RecommendedPlan& plan);
RecommendedPlan plan_from_json(const Json& j);
RecommendedPlan load_plan_file(const std::string& path);
std::vector<RecommendedPlan> load_plans_dir(const std::string& dir);

LogConfig log_config_from_json(const Json& j);
Json to_json(const LogConfig& config);

Json to_json(const ReplayResult& r);
Json to_json(const Deviation& d);
Json to_json(const LogReplay& replay);

Json to_json(const DefaultCandidate& c);

Json to_json(const Dfg& dfg);

/// Reads a whole file; Error if it cannot be opened.
std::string read_text_file(const std::string& path);

}  // namespace studyplan
