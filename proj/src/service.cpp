#include "studyplan/service.h"

#include <algorithm>
#include <charconv>
#include <set>

#include "httplib.h"
#include "studyplan/json_io.h"

namespace studyplan {

std::vector<ProgramKey> Snapshot::programs() const {
  std::vector<ProgramKey> out;
  for (const auto& [key, rs] : rules) out.push_back(key);
  return out;
}

bool Snapshot::knows(const ProgramKey& key) const { return rules.count(key) > 0; }

std::shared_ptr<const Snapshot> make_snapshot(CmsDatabase db, std::vector<RuleSet> rules,
                                              std::vector<RecommendedPlan> plans) {
  auto snap = std::make_shared<Snapshot>();
  snap->db = std::move(db);
  for (auto& rs : rules) {
    ProgramKey key = rs.binding;
    for (const auto& missing : audit_rules(rs, snap->db.courses())) {
      snap->notices.push_back(key.program_id + "@" + key.regulation_version + ": " + missing);
    }
    if (!snap->rules.emplace(key, std::move(rs)).second) {
      throw ConfigError("two rule files for " + key.program_id + "@" + key.regulation_version);
    }
  }
  for (auto& plan : plans) {
    validate_plan(plan, &snap->db.courses());
    ProgramKey key{plan.program_id, plan.regulation_version};
    if (!snap->plans.emplace(key, std::move(plan)).second) {
      throw ConfigError("two recommended plans for " + key.program_id + "@" + key.regulation_version);
    }
  }
  return snap;
}

std::shared_ptr<const Snapshot> load_snapshot(const AppConfig& config) {
  config.check_paths();
  CmsDatabase db = load_cms(config.data_dir);
  std::vector<RecommendedPlan> plans;
  if (!config.plans_dir.empty()) plans = load_plans_dir(config.plans_dir);
  return make_snapshot(std::move(db), load_rules_dir(config.rules_dir), std::move(plans));
}

std::string error_body(const std::string& message) { return Json{{"error", message}}.dump() + "\n"; }

// ---------------------------------------------------------------------------

ApiResponse handle_validate(const Snapshot& snap, const std::string& body, CheckMode mode) {
  Timeline tl;
  try {
    tl = parse_timeline(body);
  } catch (const JsonSchemaError& e) {
    return {400, error_body(std::string("malformed timeline: ") + e.what())};
  }
  ProgramKey key{tl.program_id, tl.regulation_version};
  auto it = snap.rules.find(key);
  if (it == snap.rules.end()) {
    return {404, error_body("unknown program/version " + key.program_id + "@" + key.regulation_version)};
  }
  try {
    return {200, render_report(check_timeline(tl, it->second, snap.db.courses(), mode))};
  } catch (const TimelineError& e) {
    return {400, error_body(std::string("malformed timeline: ") + e.what())};
  } catch (const UnknownCourses& e) {
    return {400, error_body(e.what())};
  }
}

ApiResponse handle_programs(const Snapshot& snap) {
  Json out = Json::array();
  for (const auto& key : snap.programs()) {
    out.push_back({{"program_id", key.program_id}, {"regulation_version", key.regulation_version}});
  }
  return {200, out.dump(2) + "\n"};
}

ApiResponse handle_catalog(const Snapshot& snap, const ProgramKey& key) {
  if (!snap.knows(key)) {
    return {404, error_body("unknown program/version " + key.program_id + "@" + key.regulation_version)};
  }
  const RecommendedPlan* plan = nullptr;
  if (auto it = snap.plans.find(key); it != snap.plans.end()) plan = &it->second;

  std::set<std::string> ids;
  for (const auto& [sk, sc] : snap.db.scheduled()) {
    if (sk.program_id == key.program_id) ids.insert(sk.course_id);
  }
  if (plan) {
    for (const auto& block : plan->semesters) ids.insert(block.begin(), block.end());
  }
  Json courses = Json::array();
  for (const auto& id : ids) {
    const OfferedCourse* c = snap.db.find_course(id);
    if (!c) continue;
    std::optional<int> rec = plan ? plan->recommended_semester(id) : std::nullopt;
    courses.push_back({{"course_id", c->course_id},
                       {"title", c->title},
                       {"credit_points", c->credit_points},
                       {"offered_terms", std::string(offered_code(c->offered_terms))},
                       {"mandatory", snap.db.is_mandatory(id, key.program_id)},
                       {"recommended_semester", rec ? Json(*rec) : Json(nullptr)},
                       {"tags", c->tags}});
  }
  Json out{{"program_id", key.program_id}, {"regulation_version", key.regulation_version}, {"courses", courses}};
  return {200, out.dump(2) + "\n"};
}

// ---------------------------------------------------------------------------

CohortDef resolve_cohort(const CmsDatabase& db, const CohortSelector& sel) {
  CohortDef def;
  if (sel.program_id) {
    def.program_id = *sel.program_id;
  } else {
    auto ids = db.program_ids();
    if (ids.size() != 1) throw RequestError("the data holds several programs; name one with program");
    def.program_id = *ids.begin();
  }
  int given = sel.start_semester.has_value() + sel.regulation_version.has_value() + sel.min_semesters.has_value();
  if (given > 1) throw RequestError("choose at most one of cohort, regulation, min_semesters");
  if (sel.start_semester) {
    try {
      def.predicate = StartedIn{parse_semester(*sel.start_semester)};
    } catch (const SemesterParseError& e) {
      throw RequestError(e.what());
    }
  } else if (sel.regulation_version) {
    def.predicate = UnderRegulation{*sel.regulation_version};
  } else {
    if (sel.min_semesters && *sel.min_semesters < 0) throw RequestError("min_semesters must be >= 0");
    def.predicate = StudiedAtLeast{sel.min_semesters.value_or(0)};
  }
  return def;
}

namespace {

const std::string& require_course(const KpiRequest& req) {
  if (!req.course || req.course->empty()) throw RequestError(req.kind + " needs a course");
  return *req.course;
}

}  // namespace

std::string compute_kpi_json(const CmsDatabase& db, const KpiRequest& req) {
  CohortDef cohort = resolve_cohort(db, req.cohort);
  Json out;
  if (req.kind == "success-rate") {
    std::optional<Semester> sem;
    if (req.semester) {
      try {
        sem = parse_semester(*req.semester);
      } catch (const SemesterParseError& e) {
        throw RequestError(e.what());
      }
    }
    out = to_json(success_rate(db, require_course(req), cohort, sem));
  } else if (req.kind == "avg-attempts") {
    AttemptMeasure m;
    if (req.measure == "max_attempt") {
      m = AttemptMeasure::max_attempt;
    } else if (req.measure == "attempt_of_pass") {
      m = AttemptMeasure::attempt_of_pass;
    } else {
      throw RequestError("measure must be max_attempt or attempt_of_pass");
    }
    out = to_json(avg_attempts(db, require_course(req), cohort, m));
  } else if (req.kind == "exams-per-semester") {
    if (!req.index || *req.index < 1) throw RequestError("exams-per-semester needs a semester index >= 1");
    auto eps = exams_per_semester(db, cohort, *req.index);
    out = Json{{"taken", to_json(eps.taken)}, {"passed", to_json(eps.passed)}};
  } else if (req.kind == "study-duration") {
    out = to_json(avg_study_duration(db, cohort));
  } else if (req.kind == "dropout-rate") {
    if (!req.within || *req.within < 0) throw RequestError("dropout-rate needs within >= 0");
    out = to_json(dropout_rate(db, cohort, *req.within));
  } else {
    throw RequestError("unknown KPI kind '" + req.kind + "'");
  }
  return out.dump(2) + "\n";
}

std::string compute_deviations_json(const Snapshot& snap, const DeviationRequest& req) {
  auto it = snap.plans.find(req.plan);
  if (it == snap.plans.end()) {
    throw UnknownProgram(req.plan.program_id + "@" + req.plan.regulation_version + " (no recommended plan)");
  }
  RecommendedPlan plan = it->second;
  if (req.truncate) {
    if (*req.truncate < 1) throw RequestError("truncate must be >= 1");
    plan = truncate_plan(plan, static_cast<std::size_t>(*req.truncate));
  }
  ReplayMode mode;
  if (req.mode == "first_attempts") {
    mode = ReplayMode::first_attempts;
  } else if (req.mode == "passed_only") {
    mode = ReplayMode::passed_only;
  } else if (req.mode == "all") {
    mode = ReplayMode::all;
  } else {
    throw RequestError("mode must be first_attempts, passed_only or all");
  }
  CohortSelector sel = req.cohort;
  if (!sel.program_id) sel.program_id = req.plan.program_id;
  if (*sel.program_id != req.plan.program_id) throw RequestError("cohort program differs from the plan's program");
  if (!sel.start_semester && !sel.regulation_version && !sel.min_semesters) {
    sel.regulation_version = req.plan.regulation_version;
  }
  LogConfig config;
  config.scope = resolve_cohort(snap.db, sel);
  EventLog log = build_log(snap.db, config);
  LogReplay replay = replay_log(plan_to_petri(plan), log, mode);
  Json out = to_json(replay);
  out["plan"] = to_json(plan);
  out["cohort"] = to_json(config.scope);
  out["mode"] = req.mode;
  return out.dump(2) + "\n";
}

namespace {

std::optional<std::string> param(const QueryParams& params, const std::string& name) {
  auto it = params.find(name);
  if (it == params.end()) return std::nullopt;
  return it->second;
}

std::optional<int> int_param(const QueryParams& params, const std::string& name) {
  auto text = param(params, name);
  if (!text) return std::nullopt;
  int value = 0;
  auto [end, ec] = std::from_chars(text->data(), text->data() + text->size(), value);
  if (ec != std::errc{} || end != text->data() + text->size()) {
    throw RequestError("parameter '" + name + "' must be an integer");
  }
  return value;
}

CohortSelector cohort_params(const QueryParams& params) {
  CohortSelector sel;
  sel.program_id = param(params, "program");
  sel.start_semester = param(params, "cohort");
  sel.regulation_version = param(params, "regulation");
  sel.min_semesters = int_param(params, "min_semesters");
  return sel;
}

template <typename F>
ApiResponse guarded(F&& f) {
  try {
    return {200, f()};
  } catch (const RequestError& e) {
    return {400, error_body(e.what())};
  } catch (const SemesterParseError& e) {
    return {400, error_body(e.what())};
  } catch (const UnknownProgram& e) {
    return {404, error_body(e.what())};
  } catch (const UnknownCourse& e) {
    return {404, error_body(e.what())};
  } catch (const UndefinedKpi& e) {
    return {422, error_body(e.what())};
  } catch (const PlanError& e) {
    return {400, error_body(e.what())};
  }
}

}  // namespace

ApiResponse handle_kpi(const Snapshot& snap, const QueryParams& params) {
  return guarded([&] {
    KpiRequest req;
    auto kind = param(params, "kind");
    if (!kind) throw RequestError("missing parameter 'kind'");
    req.kind = *kind;
    req.course = param(params, "course");
    req.cohort = cohort_params(params);
    req.semester = param(params, "semester");
    req.index = int_param(params, "index");
    req.within = int_param(params, "within");
    if (auto m = param(params, "measure")) req.measure = *m;
    return compute_kpi_json(snap.db, req);
  });
}

ApiResponse handle_deviations(const Snapshot& snap, const QueryParams& params) {
  return guarded([&] {
    DeviationRequest req;
    auto program = param(params, "program");
    auto version = param(params, "version");
    if (!program || !version) throw RequestError("deviations need program and version");
    req.plan = {*program, *version};
    req.cohort = cohort_params(params);
    if (auto m = param(params, "mode")) req.mode = *m;
    req.truncate = int_param(params, "truncate");
    return compute_deviations_json(snap, req);
  });
}

// ---------------------------------------------------------------------------

struct Service::Impl {
  httplib::Server server;
};

Service::Service(AppConfig config) : config_(std::move(config)), impl_(std::make_unique<Impl>()) {
  snapshot_ = load_snapshot(config_);
  auto& svr = impl_->server;

  auto reply = [](httplib::Response& res, const ApiResponse& r) {
    res.status = r.status;
    res.set_content(r.body, "application/json; charset=utf-8");
  };
  auto query = [](const httplib::Request& req) {
    QueryParams out;
    for (const auto& [k, v] : req.params) out.emplace(k, v);
    return out;
  };

  svr.set_post_routing_handler([this](const httplib::Request& req, httplib::Response& res) {
    std::string origin = req.get_header_value("Origin");
    if (origin.empty()) return;
    for (const auto& allowed : config_.cors_origins) {
      if (allowed == "*" || allowed == origin) {
        res.set_header("Access-Control-Allow-Origin", allowed == "*" ? "*" : origin);
        res.set_header("Vary", "Origin");
        res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
        res.set_header("Access-Control-Allow-Headers", "Content-Type");
        return;
      }
    }
  });
  svr.Options(R"(/api/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

  svr.Get("/api/programs", [this, reply](const httplib::Request&, httplib::Response& res) {
    reply(res, handle_programs(*snapshot()));
  });
  svr.Get(R"(/api/programs/([^/]+)/([^/]+)/catalog)",
          [this, reply](const httplib::Request& req, httplib::Response& res) {
            reply(res, handle_catalog(*snapshot(), ProgramKey{req.matches[1].str(), req.matches[2].str()}));
          });
  svr.Post("/api/validate", [this, reply](const httplib::Request& req, httplib::Response& res) {
    reply(res, handle_validate(*snapshot(), req.body));
  });
  svr.Get("/api/kpi", [this, reply, query](const httplib::Request& req, httplib::Response& res) {
    reply(res, handle_kpi(*snapshot(), query(req)));
  });
  svr.Get("/api/deviations", [this, reply, query](const httplib::Request& req, httplib::Response& res) {
    reply(res, handle_deviations(*snapshot(), query(req)));
  });
  svr.Post("/api/admin/reload", [this, reply](const httplib::Request&, httplib::Response& res) {
    try {
      reload();
      reply(res, {200, Json{{"reloaded", true}}.dump() + "\n"});
    } catch (const std::exception& e) {
      reply(res, {500, error_body(std::string("reload failed, previous snapshot kept: ") + e.what())});
    }
  });
  svr.set_exception_handler([reply](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
    std::string msg = "internal error";
    try {
      std::rethrow_exception(ep);
    } catch (const std::exception& e) {
      msg += std::string(": ") + e.what();
    } catch (...) {
    }
    reply(res, {500, error_body(msg)});
  });
}

Service::~Service() { stop(); }

std::shared_ptr<const Snapshot> Service::snapshot() const {
  std::lock_guard lock(snapshot_mutex_);
  return snapshot_;
}

void Service::reload() {
  auto fresh = load_snapshot(config_);
  std::lock_guard lock(snapshot_mutex_);
  snapshot_ = std::move(fresh);
}

int Service::bind(const std::string& host, int port) {
  if (port == 0) {
    int bound = impl_->server.bind_to_any_port(host);
    if (bound < 0) throw ConfigError("cannot bind " + host);
    return bound;
  }
  if (!impl_->server.bind_to_port(host, port)) throw ConfigError("cannot bind " + host + ":" + std::to_string(port));
  return port;
}

void Service::listen_after_bind() { impl_->server.listen_after_bind(); }

void Service::stop() {
  if (impl_) impl_->server.stop();
}

}  // namespace studyplan
