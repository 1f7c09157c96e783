#pragma once

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "studyplan/analytics.h"
#include "studyplan/cms_model.h"
#include "studyplan/petri.h"
#include "studyplan/regulation.h"
#include "studyplan/rules.h"

namespace studyplan {

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Service wiring. Read from a flat key=value file; environment variables
/// STUDYPLAN_DATA_DIR, STUDYPLAN_RULES_DIR, STUDYPLAN_PLANS_DIR,
/// STUDYPLAN_LISTEN and STUDYPLAN_CORS_ORIGINS override file values.
struct AppConfig {
  std::string data_dir;
  std::string rules_dir;
  std::string plans_dir;  // optional
  std::string listen_address = "127.0.0.1:8080";
  std::vector<std::string> cors_origins;

  std::string host() const;
  int port() const;
  /// Throws ConfigError naming the first missing or unreadable path.
  void check_paths() const;
};

using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;

/// Parses key=value lines (`#` comments, blank lines allowed). Unknown keys
/// are an error so that typos do not pass silently.
AppConfig parse_app_config(const std::string& text, const std::string& source = "config");
void apply_env_overrides(AppConfig& config, const EnvLookup& env);
std::optional<std::string> process_env(const std::string& name);

/// Everything a request reads. Built once, never mutated, replaced whole.
struct Snapshot {
  CmsDatabase db;
  std::map<ProgramKey, RuleSet> rules;
  std::map<ProgramKey, RecommendedPlan> plans;
  std::vector<std::string> notices;  // load-time rule audit findings

  std::vector<ProgramKey> programs() const;
  bool knows(const ProgramKey& key) const;
};

/// Bad request parameters (maps to HTTP 400 / CLI exit 2).
class RequestError : public Error {
 public:
  using Error::Error;
};

std::shared_ptr<const Snapshot> make_snapshot(CmsDatabase db, std::vector<RuleSet> rules,
                                              std::vector<RecommendedPlan> plans);

/// Loads CSVs, rule files and plans. Rule parse errors propagate with their
/// line/column diagnostics; duplicate (program, version) files are an error.
std::shared_ptr<const Snapshot> load_snapshot(const AppConfig& config);

struct ApiResponse {
  int status = 200;
  std::string body;
};

/// Error payload: {"error": message}.
std::string error_body(const std::string& message);

/// POST /api/validate. 200 with a report (violations are data), 400 on a
/// malformed timeline or unknown courses, 404 on an unknown program/version.
ApiResponse handle_validate(const Snapshot& snap, const std::string& body, CheckMode mode = CheckMode::planning);
ApiResponse handle_programs(const Snapshot& snap);
ApiResponse handle_catalog(const Snapshot& snap, const ProgramKey& key);
using QueryParams = std::multimap<std::string, std::string>;

/// Cohort as given on a command line or query string. The program may be
/// omitted when the database holds exactly one; without a predicate the
/// cohort is everyone in the program (studied at least 0 semesters).
struct CohortSelector {
  std::optional<std::string> program_id;
  std::optional<std::string> start_semester;
  std::optional<std::string> regulation_version;
  std::optional<int> min_semesters;
};
CohortDef resolve_cohort(const CmsDatabase& db, const CohortSelector& sel);

struct KpiRequest {
  std::string kind;  // success-rate, avg-attempts, exams-per-semester, study-duration, dropout-rate
  std::optional<std::string> course;
  CohortSelector cohort;
  std::optional<std::string> semester;  // absolute term filter for success-rate
  std::optional<int> index;             // semester index for exams-per-semester
  std::optional<int> within;            // horizon for dropout-rate
  std::string measure = "max_attempt";  // or attempt_of_pass, for avg-attempts
};
/// KPI result as JSON text. Throws RequestError, UnknownProgram,
/// UnknownCourse or UndefinedKpi.
std::string compute_kpi_json(const CmsDatabase& db, const KpiRequest& req);

struct DeviationRequest {
  ProgramKey plan;
  CohortSelector cohort;  // defaults to the plan's regulation version
  std::string mode = "first_attempts";
  std::optional<int> truncate;
};
std::string compute_deviations_json(const Snapshot& snap, const DeviationRequest& req);

ApiResponse handle_kpi(const Snapshot& snap, const QueryParams& params);
ApiResponse handle_deviations(const Snapshot& snap, const QueryParams& params);

/// HTTP front end over an atomically swappable snapshot.
class Service {
 public:
  explicit Service(AppConfig config);
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  std::shared_ptr<const Snapshot> snapshot() const;
  /// Loads a fresh snapshot and swaps it in. On failure the old one stays and
  /// the error is rethrown.
  void reload();

  /// Binds to `host:port` (port 0 picks a free one) and returns the port.
  int bind(const std::string& host, int port);
  /// Blocks serving requests until stop().
  void listen_after_bind();
  void stop();

 private:
  struct Impl;
  AppConfig config_;
  mutable std::mutex snapshot_mutex_;
  std::shared_ptr<const Snapshot> snapshot_;
  std::unique_ptr<Impl> impl_;
};

}  // namespace studyplan
