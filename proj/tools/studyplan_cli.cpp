// studyplan: batch analytics and plan validation over CMS exports, plus the
// HTTP service for the planner UI.
//
// Exit codes: 0 success, 1 domain error (ingest errors, undefined KPI,
// violations under --strict, ...), 2 usage or I/O error.

#include <atomic>
#include <chrono>
#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include "CLI11.hpp"
#include "studyplan/analytics.h"
#include "studyplan/event_log.h"
#include "studyplan/json_io.h"
#include "studyplan/miner.h"
#include "studyplan/petri.h"
#include "studyplan/regulation.h"
#include "studyplan/service.h"

namespace sp = studyplan;

namespace {

constexpr int kOk = 0;
constexpr int kDomain = 1;
constexpr int kUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void write_output(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::cout << content;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw sp::IoError("cannot write '" + path + "'");
  out << content;
  if (!out) throw sp::IoError("error writing '" + path + "'");
}

sp::Json read_json_file(const std::string& path) {
  sp::Json j = sp::Json::parse(sp::read_text_file(path), nullptr, false);
  if (j.is_discarded()) throw UsageError(path + ": not valid JSON");
  return j;
}

struct CohortFlags {
  std::string program;
  std::string cohort;
  std::string regulation;
  int min_semesters = -1;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--program", program, "Program id (optional when the data holds one program)");
    auto* c = cmd->add_option("--cohort", cohort, "Cohort by start semester, e.g. WS2021");
    auto* r = cmd->add_option("--regulation", regulation, "Cohort by regulation version");
    auto* m = cmd->add_option("--min-semesters", min_semesters, "Cohort by semesters studied")->check(CLI::NonNegativeNumber);
    c->excludes(r)->excludes(m);
    r->excludes(m);
  }

  sp::CohortSelector selector() const {
    sp::CohortSelector sel;
    if (!program.empty()) sel.program_id = program;
    if (!cohort.empty()) sel.start_semester = cohort;
    if (!regulation.empty()) sel.regulation_version = regulation;
    if (min_semesters >= 0) sel.min_semesters = min_semesters;
    return sel;
  }
};

// --- ingest-check ----------------------------------------------------------

int ingest_check(const std::string& data_dir, double threshold) {
  sp::IngestConfig config;
  config.pass_threshold = threshold;
  auto result = sp::ingest_cms(sp::CmsSources::from_directory(data_dir), config);
  sp::Json issues = sp::Json::array();
  for (const auto& issue : result.errors) issues.push_back(sp::to_json(issue));
  sp::Json out{{"ok", result.ok()},
               {"errors", issues},
               {"counts",
                {{"students", result.db.students().size()},
                 {"enrollments", result.db.enrollments().size()},
                 {"courses", result.db.courses().size()},
                 {"scheduled", result.db.scheduled().size()},
                 {"exams", result.db.exams().size()}}}};
  std::cout << out.dump(2) << "\n";
  for (const auto& issue : result.errors) std::cerr << issue.to_string() << "\n";
  return result.ok() ? kOk : kDomain;
}

// --- validate ----------------------------------------------------------------

int validate(const std::string& data_dir, const std::string& rules_file, const std::string& rules_dir,
             const std::string& timeline_file, bool audit, bool strict) {
  std::vector<sp::RuleSet> rules;
  if (!rules_file.empty()) {
    rules.push_back(sp::load_rules_file(rules_file));
  } else {
    rules = sp::load_rules_dir(rules_dir);
  }
  auto snap = sp::make_snapshot(sp::load_cms(data_dir), std::move(rules), {});
  auto response = sp::handle_validate(*snap, sp::read_text_file(timeline_file),
                                      audit ? sp::CheckMode::audit : sp::CheckMode::planning);
  if (response.status != 200) {
    std::cerr << sp::Json::parse(response.body).at("error").get<std::string>() << "\n";
    return response.status == 400 ? kUsage : kDomain;
  }
  std::cout << response.body;
  if (strict && !sp::Json::parse(response.body).at("violations").empty()) return kDomain;
  return kOk;
}

// --- serve -------------------------------------------------------------------

volatile std::sig_atomic_t g_reload_requested = 0;
volatile std::sig_atomic_t g_stop_requested = 0;

extern "C" void on_sighup(int) { g_reload_requested = 1; }
extern "C" void on_terminate(int) { g_stop_requested = 1; }

int serve(const std::string& config_file) {
  sp::AppConfig config;
  if (!config_file.empty()) config = sp::parse_app_config(sp::read_text_file(config_file), config_file);
  sp::apply_env_overrides(config, sp::process_env);
  config.check_paths();

  sp::Service service(config);
  for (const auto& notice : service.snapshot()->notices) std::cerr << "warning: " << notice << "\n";
  int port = service.bind(config.host(), config.port());
  std::cerr << "listening on " << config.host() << ":" << port
            << " (no authentication: deploy behind the institution's SSO proxy)\n";

  std::signal(SIGHUP, on_sighup);
  std::signal(SIGINT, on_terminate);
  std::signal(SIGTERM, on_terminate);
  std::atomic<bool> done{false};
  std::thread watcher([&] {
    while (!done) {
      if (g_reload_requested) {
        g_reload_requested = 0;
        try {
          service.reload();
          std::cerr << "reloaded\n";
        } catch (const std::exception& e) {
          std::cerr << "reload failed, keeping previous snapshot: " << e.what() << "\n";
        }
      }
      if (g_stop_requested) service.stop();
      std::this_thread::sleep_for(std::chrono::milliseconds(100));
    }
  });
  service.listen_after_bind();
  done = true;
  watcher.join();
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Study-plan analytics, conformance and validation"};
  app.require_subcommand(1);

  std::string data_dir;
  auto add_data = [&](CLI::App* cmd) {
    cmd->add_option("--data", data_dir, "Directory with the CMS CSV export")->required()->check(CLI::ExistingDirectory);
  };

  // ingest-check
  auto* ingest = app.add_subcommand("ingest-check", "Validate a CMS export and report all issues");
  add_data(ingest);
  double pass_threshold = 4.0;
  ingest->add_option("--pass-threshold", pass_threshold, "Worst passing grade")->check(CLI::Range(1.0, 5.0));

  // build-log
  auto* build_log = app.add_subcommand("build-log", "Build an event log and write it as XES");
  add_data(build_log);
  std::string log_config_file, out_file;
  build_log->add_option("--config", log_config_file, "Log configuration JSON")->required()->check(CLI::ExistingFile);
  build_log->add_option("--out", out_file, "Output file (default stdout)");

  // kpi
  auto* kpi = app.add_subcommand("kpi", "Compute a cohort KPI");
  add_data(kpi);
  sp::KpiRequest kpi_req;
  CohortFlags kpi_cohort;
  kpi->add_option("--kind", kpi_req.kind, "KPI kind")
      ->required()
      ->check(CLI::IsMember({"success-rate", "avg-attempts", "exams-per-semester", "study-duration", "dropout-rate"}));
  std::string kpi_course, kpi_semester;
  int kpi_index = 0, kpi_within = -1;
  kpi->add_option("--course", kpi_course, "Course id");
  kpi->add_option("--semester", kpi_semester, "Restrict success-rate to exams of this term");
  kpi->add_option("--index", kpi_index, "Semester index for exams-per-semester")->check(CLI::PositiveNumber);
  kpi->add_option("--within", kpi_within, "Horizon in semesters for dropout-rate")->check(CLI::NonNegativeNumber);
  kpi->add_option("--measure", kpi_req.measure, "avg-attempts measure")
      ->check(CLI::IsMember({"max_attempt", "attempt_of_pass"}));
  kpi_cohort.add_to(kpi);

  // dfg
  auto* dfg = app.add_subcommand("dfg", "Discover a directly-follows graph and write it as DOT");
  add_data(dfg);
  std::string tie_policy = "skip";
  bool dfg_json = false;
  dfg->add_option("--config", log_config_file, "Log configuration JSON")->required()->check(CLI::ExistingFile);
  dfg->add_option("--tie-policy", tie_policy, "skip or expand")->check(CLI::IsMember({"skip", "expand"}));
  dfg->add_option("--out", out_file, "Output file (default stdout)");
  dfg->add_flag("--json", dfg_json, "Write JSON instead of DOT");

  // conform
  auto* conform = app.add_subcommand("conform", "Token-replay a cohort against a recommended plan");
  add_data(conform);
  std::string plan_file, replay_mode = "first_attempts", pnml_file, net_dot_file;
  int truncate = 0;
  CohortFlags conform_cohort;
  conform->add_option("--plan", plan_file, "Recommended plan JSON")->required()->check(CLI::ExistingFile);
  conform->add_option("--mode", replay_mode, "Replay mode")
      ->check(CLI::IsMember({"first_attempts", "passed_only", "all"}));
  conform->add_option("--truncate", truncate, "Keep only the first N plan semesters")->check(CLI::PositiveNumber);
  conform->add_option("--pnml", pnml_file, "Also write the net as PNML");
  conform->add_option("--net-dot", net_dot_file, "Also write the net as DOT");
  conform_cohort.add_to(conform);

  // validate
  auto* validate_cmd = app.add_subcommand("validate", "Check a timeline against regulation rules");
  add_data(validate_cmd);
  std::string rules_file, rules_dir, timeline_file;
  bool audit = false, strict = false;
  auto* rf = validate_cmd->add_option("--rules", rules_file, "Rules file named <program>@<version>.rules")
                 ->check(CLI::ExistingFile);
  auto* rd = validate_cmd->add_option("--rules-dir", rules_dir, "Directory of rules files")
                 ->check(CLI::ExistingDirectory);
  rf->excludes(rd);
  validate_cmd->add_option("--timeline", timeline_file, "Timeline JSON")->required()->check(CLI::ExistingFile);
  validate_cmd->add_flag("--audit", audit, "Audit a recorded history instead of checking a plan");
  validate_cmd->add_flag("--strict", strict, "Exit 1 when violations are found");

  // mine
  auto* mine = app.add_subcommand("mine", "Mine precedence defaults from exam outcomes");
  add_data(mine);
  std::int64_t min_support = 0;
  double min_lift = 0.0;
  CohortFlags mine_cohort;
  std::string merge_rules, merged_out;
  mine->add_option("--min-support", min_support, "Minimum students on each side")->required()->check(CLI::PositiveNumber);
  mine->add_option("--min-lift", min_lift, "Minimum pass-rate difference, in (0, 1]")->required();
  auto* merge_into =
      mine->add_option("--merge-into", merge_rules, "Rules file to extend with the mined defaults")->check(CLI::ExistingFile);
  auto* merged_to = mine->add_option("--merged-out", merged_out, "Where to write the extended rules");
  merge_into->needs(merged_to);
  merged_to->needs(merge_into);
  mine_cohort.add_to(mine);

  // serve
  auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP service");
  std::string config_file;
  serve_cmd->add_option("--config", config_file, "key=value configuration file")->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e, std::cerr, std::cerr);
    return kUsage;
  }

  try {
    if (*ingest) return ingest_check(data_dir, pass_threshold);

    if (*build_log) {
      auto config = sp::log_config_from_json(read_json_file(log_config_file));
      write_output(out_file, sp::export_xes(sp::build_log(sp::load_cms(data_dir), config)));
      return kOk;
    }

    if (*kpi) {
      if (!kpi_course.empty()) kpi_req.course = kpi_course;
      if (!kpi_semester.empty()) kpi_req.semester = kpi_semester;
      if (kpi_index > 0) kpi_req.index = kpi_index;
      if (kpi_within >= 0) kpi_req.within = kpi_within;
      kpi_req.cohort = kpi_cohort.selector();
      std::cout << sp::compute_kpi_json(sp::load_cms(data_dir), kpi_req);
      return kOk;
    }

    if (*dfg) {
      auto config = sp::log_config_from_json(read_json_file(log_config_file));
      auto graph = sp::discover_dfg(sp::build_log(sp::load_cms(data_dir), config),
                                    tie_policy == "skip" ? sp::TiePolicy::skip_ties : sp::TiePolicy::expand_ties);
      write_output(out_file, dfg_json ? sp::to_json(graph).dump(2) + "\n" : sp::export_dot(graph));
      return kOk;
    }

    if (*conform) {
      auto plan = sp::load_plan_file(plan_file);
      auto db = sp::load_cms(data_dir);
      sp::validate_plan(plan, &db.courses());
      sp::RecommendedPlan net_plan = truncate > 0 ? sp::truncate_plan(plan, static_cast<std::size_t>(truncate)) : plan;
      if (!pnml_file.empty()) write_output(pnml_file, sp::export_pnml(sp::plan_to_petri(net_plan)));
      if (!net_dot_file.empty()) write_output(net_dot_file, sp::export_net_dot(sp::plan_to_petri(net_plan)));
      sp::DeviationRequest req;
      req.plan = {plan.program_id, plan.regulation_version};
      req.cohort = conform_cohort.selector();
      req.mode = replay_mode;
      if (truncate > 0) req.truncate = truncate;
      auto snap = sp::make_snapshot(std::move(db), {}, {plan});
      std::cout << sp::compute_deviations_json(*snap, req);
      return kOk;
    }

    if (*validate_cmd) {
      if (rules_file.empty() && rules_dir.empty()) throw UsageError("validate needs --rules or --rules-dir");
      return validate(data_dir, rules_file, rules_dir, timeline_file, audit, strict);
    }

    if (*mine) {
      auto db = sp::load_cms(data_dir);
      auto cohort = sp::resolve_cohort(db, mine_cohort.selector());
      auto candidates = sp::mine_precedence_defaults(db, cohort, min_support, min_lift);
      sp::Json list = sp::Json::array();
      for (const auto& c : candidates) list.push_back(sp::to_json(c));
      sp::Json out{{"settings", {{"min_support", min_support}, {"min_lift", min_lift}, {"cohort", sp::to_json(cohort)}}},
                   {"candidates", list}};
      std::cout << out.dump(2) << "\n";
      if (!merge_rules.empty()) {
        auto merged = sp::candidates_to_defaults(candidates, sp::load_rules_file(merge_rules));
        for (const auto& n : merged.notices) std::cerr << n << "\n";
        write_output(merged_out, sp::format_rules(merged.rules));
      }
      return kOk;
    }

    if (*serve_cmd) return serve(config_file);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const sp::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const sp::JsonSchemaError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const sp::RequestError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const sp::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const sp::IngestFailure& e) {
    std::cerr << "error: " << e.what() << "\n";
    for (const auto& issue : e.issues()) std::cerr << "  " << issue.to_string() << "\n";
    return kDomain;
  } catch (const sp::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kDomain;
  }
  return kUsage;
}
