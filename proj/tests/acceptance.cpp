// Acceptance gate: one PASS/FAIL line per criterion, non-zero exit on any FAIL.

#include <chrono>
#include <filesystem>
#include <functional>
#include <iostream>
#include <sstream>
#include <thread>

#include "generators.h"
#include "httplib.h"
#include "oracles.h"
#include "studyplan/analytics.h"
#include "studyplan/json_io.h"
#include "studyplan/miner.h"
#include "studyplan/service.h"
#include "support.h"

using namespace studyplan;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = true;
  std::string detail;
  std::size_t failures = 0;

  void fail(const std::string& why) {
    pass = false;
    if (failures++ < 3) detail += (detail.empty() ? "" : "; ") + why;
  }
  void expect(bool ok, const std::string& why) {
    if (!ok) fail(why);
  }
};

int g_failed = 0;

void criterion(const std::string& name, double limit_s, const std::function<void(Outcome&)>& body) {
  Outcome out;
  auto t0 = Clock::now();
  try {
    body(out);
  } catch (const std::exception& e) {
    out.fail(std::string("exception: ") + e.what());
  }
  double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  if (limit_s > 0 && secs >= limit_s) out.fail("took " + std::to_string(secs) + " s, limit " + std::to_string(limit_s));
  if (out.failures > 3) out.detail += "; " + std::to_string(out.failures - 3) + " more";
  std::ostringstream line;
  line << (out.pass ? "PASS" : "FAIL") << "  " << name << "  (" << std::fixed;
  line.precision(2);
  line << secs << " s)";
  if (!out.detail.empty()) line << "  " << out.detail;
  std::cout << line.str() << std::endl;
  if (!out.pass) ++g_failed;
}

// Every replay made by any suite is recorded here for the fitness-formula check.
std::vector<ReplayResult> g_replays;

ReplayResult record(ReplayResult r) {
  g_replays.push_back(r);
  return r;
}

std::string fraction_text(std::int64_t n, std::int64_t d) { return std::to_string(n) + "/" + std::to_string(d); }

void compare_kpi(Outcome& out, const std::string& what, const std::function<KpiValue()>& lib,
                 const std::optional<oracle::Fraction>& want) {
  try {
    KpiValue got = lib();
    if (!want) {
      out.fail(what + ": library " + fraction_text(got.numerator, got.denominator) + ", oracle undefined");
      return;
    }
    bool same = got.numerator == want->num && got.denominator == want->den &&
                got.value == static_cast<double>(want->num) / static_cast<double>(want->den);
    out.expect(same, what + ": library " + fraction_text(got.numerator, got.denominator) + ", oracle " +
                         fraction_text(want->num, want->den));
  } catch (const UndefinedKpi&) {
    out.expect(!want, what + ": library undefined, oracle " + (want ? fraction_text(want->num, want->den) : ""));
  }
}

// ---------------------------------------------------------------------------

void kpi_suite(Outcome& out) {
  std::string dir = testing::data_path("synthetic50");
  const CmsDatabase& db = testing::fixture_db("synthetic50");
  oracle::KpiOracle brute(dir);

  std::set<std::string> programs, starts, regulations, courses, terms;
  for (const auto& r : oracle::read_rows(dir + "/enrollments.csv")) {
    programs.insert(r.at("program_id"));
    starts.insert(r.at("start_semester"));
    regulations.insert(r.at("regulation_version"));
  }
  for (const auto& r : oracle::read_rows(dir + "/courses.csv")) courses.insert(r.at("course_id"));
  for (const auto& r : oracle::read_rows(dir + "/exams.csv")) terms.insert(r.at("semester"));

  std::size_t comparisons = 0;
  for (const auto& program : programs) {
    std::vector<std::pair<oracle::KpiOracle::Cohort, CohortDef>> cohorts;
    for (const auto& s : starts) cohorts.push_back({{program, "start", s}, {program, StartedIn{parse_semester(s)}}});
    for (const auto& v : regulations) cohorts.push_back({{program, "regulation", v}, {program, UnderRegulation{v}}});
    for (int n = 0; n <= 12; ++n) {
      cohorts.push_back({{program, "min_semesters", std::to_string(n)}, {program, StudiedAtLeast{n}}});
    }
    for (const auto& [oc, lc] : cohorts) {
      std::string tag = lc.describe();
      for (const auto& course : courses) {
        compare_kpi(out, "success_rate " + course + " " + tag, [&] { return success_rate(db, course, lc); },
                    brute.success_rate(course, oc));
        for (const auto& term : terms) {
          compare_kpi(out, "success_rate " + course + "@" + term + " " + tag,
                      [&] { return success_rate(db, course, lc, parse_semester(term)); },
                      brute.success_rate(course, oc, term));
        }
        compare_kpi(out, "avg_attempts " + course + " " + tag, [&] { return avg_attempts(db, course, lc); },
                    brute.avg_attempts(course, oc, false));
        compare_kpi(out, "avg_attempts(of pass) " + course + " " + tag,
                    [&] { return avg_attempts(db, course, lc, AttemptMeasure::attempt_of_pass); },
                    brute.avg_attempts(course, oc, true));
        comparisons += 3 + terms.size();
      }
      for (int index = 1; index <= 14; ++index) {
        auto want = brute.exams_per_semester(oc, index);
        std::optional<oracle::Fraction> taken, passed;
        if (want) {
          taken = want->first;
          passed = want->second;
        }
        compare_kpi(out, "exams_per_semester(taken) " + std::to_string(index) + " " + tag,
                    [&] { return exams_per_semester(db, lc, index).taken; }, taken);
        compare_kpi(out, "exams_per_semester(passed) " + std::to_string(index) + " " + tag,
                    [&] { return exams_per_semester(db, lc, index).passed; }, passed);
        comparisons += 2;
      }
      compare_kpi(out, "study_duration " + tag, [&] { return avg_study_duration(db, lc); }, brute.study_duration(oc));
      for (int within = 0; within <= 14; ++within) {
        compare_kpi(out, "dropout_rate " + std::to_string(within) + " " + tag,
                    [&] { return dropout_rate(db, lc, within); }, brute.dropout_rate(oc, within));
      }
      comparisons += 16;
    }
  }
  out.expect(comparisons > 1000, "too few comparisons");
  out.detail = out.pass ? std::to_string(comparisons) + " comparisons" : out.detail;
}

void replay_suite(Outcome& out) {
  gen::Rng rng(20240601);
  std::size_t valid = 0, invalid = 0;
  for (int p = 0; p < 200; ++p) {
    auto plan = gen::random_plan(rng, 4, 3);
    auto net = plan_to_petri(plan);
    for (int k = 0; k < 10; ++k) {
      auto trace = gen::random_linearization(rng, plan);
      if (!oracle::is_linearization(plan, trace)) {
        out.fail("generator produced a non-linearization");
        continue;
      }
      auto r = record(token_replay(net, trace, "valid"));
      ++valid;
      out.expect(r.fitness == 1.0 && r.missing == 0 && r.remaining == 0,
                 "linearization with fitness " + std::to_string(r.fitness));
    }
  }
  while (invalid < 200) {
    auto plan = gen::random_plan(rng, 4, 3);
    auto trace = gen::random_mutation(rng, plan);
    if (oracle::is_linearization(plan, trace)) continue;
    auto r = record(token_replay(plan_to_petri(plan), trace, "invalid"));
    ++invalid;
    out.expect(r.fitness >= 0.0 && r.fitness < 1.0 && r.missing + r.remaining > 0,
               "invalid trace with fitness " + std::to_string(r.fitness));
  }
  if (out.pass) out.detail = std::to_string(valid) + " valid, " + std::to_string(invalid) + " invalid traces";
}

void cohort_replays() {
  const auto& db = testing::fixture_db("bsc/data");
  auto plan = load_plan_file(testing::data_path("bsc/plans/BSC_CS@2018.json"));
  LogConfig config;
  config.scope = {"BSC_CS", StudiedAtLeast{0}};
  auto log = build_log(db, config);
  for (auto mode : {ReplayMode::first_attempts, ReplayMode::passed_only, ReplayMode::all}) {
    for (std::size_t t = 1; t <= plan.semesters.size(); ++t) {
      for (auto& r : replay_log(plan_to_petri(truncate_plan(plan, t)), log, mode).results) record(r);
    }
  }
}

void fitness_formula(Outcome& out) {
  cohort_replays();
  for (const auto& r : g_replays) {
    out.expect(oracle::fitness_formula_holds(r), "case " + r.case_id + ": m=" + std::to_string(r.missing) +
                                                     " c=" + std::to_string(r.consumed) + " r=" +
                                                     std::to_string(r.remaining) + " p=" + std::to_string(r.produced));
  }
  if (out.pass) out.detail = std::to_string(g_replays.size()) + " replays";
}

void regulation_oracle(Outcome& out) {
  auto catalog = gen::small_catalog();
  gen::Rng rng(6502);
  std::size_t combos = 0, findings = 0;
  for (int audit = 0; audit <= 1; ++audit) {
    std::vector<RuleSet> rulesets;
    std::vector<Timeline> timelines;
    for (int i = 0; i < 110; ++i) rulesets.push_back(gen::random_ruleset(rng, 6));
    for (int i = 0; i < 50; ++i) timelines.push_back(gen::random_timeline(rng, audit == 1, 8));
    for (const auto& rs : rulesets) {
      for (const auto& tl : timelines) {
        auto mode = audit ? CheckMode::audit : CheckMode::planning;
        auto report = check_timeline(tl, rs, catalog, mode);
        auto want = oracle::check(tl, rs, catalog, audit == 1);
        ++combos;
        findings += want.violations.size() + want.warnings.size();
        out.expect(oracle::as_set(report.violations) == want.violations,
                   std::string(audit ? "audit" : "planning") + " violations differ for rules:\n" + format_rules(rs));
        out.expect(oracle::as_set(report.warnings) == want.warnings,
                   std::string(audit ? "audit" : "planning") + " warnings differ");
      }
    }
  }
  out.expect(combos >= 10000, "only " + std::to_string(combos) + " combinations");
  if (out.pass) out.detail = std::to_string(combos) + " combinations, " + std::to_string(findings) + " findings";
}

void planning_properties(Outcome& out) {
  auto catalog = gen::small_catalog();
  gen::Rng rng(1000);
  for (int i = 0; i < 1000; ++i) {
    auto rs = gen::random_ruleset(rng, 6);
    auto tl = gen::random_timeline(rng, false, 8);
    auto report = check_plan(tl, rs, catalog);
    for (const auto* list : {&report.violations, &report.warnings}) {
      for (const auto& f : *list) {
        out.expect(f.semester > tl.now, "finding at sem " + std::to_string(f.semester) + " <= now " +
                                            std::to_string(tl.now));
      }
    }
    // defaults never block: the violation set is what the hard rules alone give
    RuleSet hard = rs;
    for (auto& r : hard.rules) {
      if (r.is_default()) {
        // keep ids stable by replacing the default with a no-op contribution
        r.strength = Strength::requirement;
        r.body = Contribution{{Verb::take, "A"}, "cp", 0};
      }
    }
    auto without = check_plan(tl, hard, catalog);
    out.expect(without.violations == report.violations, "defaults changed the violation set");
    out.expect(without.warnings.empty(), "warnings without defaults");

    // literal removal renumbers generated availability rules, so compare content
    RuleSet removed = rs;
    std::erase_if(removed.rules, [](const Rule& r) { return r.is_default(); });
    auto content = [](std::vector<Finding> fs) {
      std::vector<std::tuple<int, std::vector<std::string>, std::optional<std::int64_t>, std::string>> v;
      for (auto& f : fs) v.emplace_back(f.semester, f.courses, f.actual, f.message);
      std::sort(v.begin(), v.end());
      return v;
    };
    out.expect(content(check_plan(tl, removed, catalog).violations) == content(report.violations),
               "removing defaults changed the violations");
  }
}

const RuleSet& bsc_rules() {
  static const RuleSet rs = load_rules_file(testing::data_path("bsc/rules/BSC_CS@2018.rules"));
  return rs;
}

const Catalog& bsc_catalog() { return testing::fixture_db("bsc/data").courses(); }

Timeline bsc_plan(const std::vector<std::pair<std::string, int>>& planned, int now = 0) {
  Timeline tl;
  tl.program_id = "BSC_CS";
  tl.regulation_version = "2018";
  tl.start_semester = parse_semester("WS2021");
  tl.now = now;
  for (const auto& [c, s] : planned) tl.atoms.push_back({AtomKind::planned_take, c, s});
  return tl;
}

void sixty_cp(Outcome& out) {
  const auto& rs = bsc_rules();
  const ResultRequirement* req = nullptr;
  int rule_id = 0;
  for (const auto& r : rs.rules) {
    auto q = std::get_if<ResultRequirement>(&r.body);
    if (q && q->result == "cp" && std::holds_alternative<std::monostate>(q->filter) && q->cmp == Comparator::ge &&
        std::holds_alternative<Deadline>(q->at)) {
      req = q;
      rule_id = r.id;
    }
  }
  if (!req) return out.fail("no cumulative cp requirement in the rules file");
  int deadline = std::get<Deadline>(req->at).sem;
  std::map<std::string, std::int64_t> cp;
  for (const auto* c : rs.contributions()) {
    if (c->result == "cp" && c->trigger.verb == Verb::pass) cp[c->trigger.course_id] += c->delta;
  }
  std::vector<std::pair<std::string, int>> plan54{{"MATH1", 1}, {"PROG", 1}, {"LA", 2},  {"ALGO", 2},
                                                  {"PROSEM", 2}, {"STAT", 2}, {"DB", 3}, {"SEM", 3}};
  std::int64_t planned = 0;
  for (const auto& [c, s] : plan54) planned += s <= deadline ? cp[c] : 0;
  out.expect(planned == 54, "the short plan is worth " + std::to_string(planned) + " CP under the rules file");
  out.expect(req->bound == 60, "rules file requires " + std::to_string(req->bound));

  auto short_report = check_plan(bsc_plan(plan54), rs, bsc_catalog());
  out.expect(short_report.violations.size() == 1, std::to_string(short_report.violations.size()) + " violations");
  if (!short_report.violations.empty()) {
    const auto& v = short_report.violations.front();
    out.expect(v.rule_id == rule_id && v.actual == planned && v.required == req->bound && v.semester == deadline,
               "unexpected finding " + v.message);
  }
  auto plan60 = plan54;
  plan60.push_back({"IDS", 3});
  auto full_report = check_plan(bsc_plan(plan60), rs, bsc_catalog());
  out.expect(full_report.violations.empty(), std::to_string(full_report.violations.size()) + " violations at 60 CP");
}

bool has_rule(const ValidationReport& r, int id) {
  return std::any_of(r.violations.begin(), r.violations.end(), [&](const Finding& f) { return f.rule_id == id; });
}

void proseminar(Outcome& out) {
  const auto& rs = bsc_rules();
  int id = 0;
  for (const auto& r : rs.rules) {
    if (format_rule(r) == "require pass(PROSEM) before take(SEM)") id = r.id;
  }
  if (!id) return out.fail("rule missing from the rules file");
  // placements: 0 = absent
  std::size_t cases = 0;
  for (int now = 0; now <= 2; ++now) {
    for (int ps = 0; ps <= 5; ++ps) {
      for (int ss = 0; ss <= 5; ++ss) {
        for (AtomKind past_kind : {AtomKind::passed, AtomKind::failed, AtomKind::registered}) {
          Timeline tl = bsc_plan({}, now);
          auto place = [&](const std::string& c, int s, AtomKind past) {
            if (s == 0) return;
            tl.atoms.push_back({s <= now ? past : AtomKind::planned_take, c, s});
          };
          place("PROSEM", ps, past_kind);
          place("SEM", ss, AtomKind::passed);
          bool prosem_counts = ps > 0 && ps < ss && (ps > now || past_kind == AtomKind::passed);
          bool expected = ss > now && !prosem_counts;
          auto got = has_rule(check_plan(tl, rs, bsc_catalog()), id);
          ++cases;
          out.expect(got == expected, "planning now=" + std::to_string(now) + " PROSEM@" + std::to_string(ps) +
                                          " SEM@" + std::to_string(ss));
        }
      }
    }
  }
  for (int ps = 0; ps <= 5; ++ps) {
    for (int ss = 0; ss <= 5; ++ss) {
      for (AtomKind pk : {AtomKind::passed, AtomKind::failed, AtomKind::registered, AtomKind::deregistered}) {
        for (AtomKind sk : {AtomKind::passed, AtomKind::failed, AtomKind::registered, AtomKind::deregistered}) {
          Timeline tl = bsc_plan({}, 6);
          if (ps) tl.atoms.push_back({pk, "PROSEM", ps});
          if (ss) tl.atoms.push_back({sk, "SEM", ss});
          bool taken = ss > 0 && sk != AtomKind::deregistered;
          bool expected = taken && !(ps > 0 && ps < ss && pk == AtomKind::passed);
          ++cases;
          out.expect(has_rule(check_conformance(tl, rs, bsc_catalog()), id) == expected,
                     "audit PROSEM@" + std::to_string(ps) + " SEM@" + std::to_string(ss));
        }
      }
    }
  }
  if (out.pass) out.detail = std::to_string(cases) + " cases";
}

void miner_recovery(Outcome& out) {
  std::string dir = testing::data_path("planted30");
  std::string seed = testing::slurp(dir + "/SEED");
  while (!seed.empty() && (seed.back() == '\n' || seed.back() == '\r')) seed.pop_back();
  const auto& db = testing::fixture_db("planted30");
  auto members = cohort_members(db, {"DS", StudiedAtLeast{0}});
  out.expect(members.size() == 30, std::to_string(members.size()) + " students");
  auto candidates = mine_precedence_defaults(db, {"DS", StudiedAtLeast{0}}, 5, 0.1);
  if (candidates.empty()) return out.fail("no candidates");
  const auto& top = candidates.front();
  out.expect(top.before_course == "STAT" && top.after_course == "IDS",
             "top pair is " + top.before_course + " -> " + top.after_course);
  auto brute = oracle::mine_pairs(dir);
  double want = boost::rational_cast<double>(brute.at({"STAT", "IDS"}).lift());
  out.expect(std::abs(top.lift - want) <= 0.05,
             "lift " + std::to_string(top.lift) + " vs counted " + std::to_string(want));
  if (out.pass) {
    std::ostringstream d;
    d << "seed " << seed << ", lift " << top.lift << " (counted " << want << ")";
    out.detail = d.str();
  }
}

std::string mutate(gen::Rng& rng, const std::string& text, std::size_t& line_out) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) lines.push_back(l);
  std::vector<std::size_t> candidates;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (!lines[i].empty() && lines[i][0] != '#') candidates.push_back(i);
  }
  std::size_t li = candidates[static_cast<std::size_t>(gen::uniform(rng, 0, static_cast<int>(candidates.size()) - 1))];
  std::string& l = lines[li];
  static const std::string junk = "(){},.;:!?@$%^&*=<>-+~`|[]\"'0123456789xyz";
  int pos = gen::uniform(rng, 0, static_cast<int>(l.size()) - 1);
  switch (gen::uniform(rng, 0, 3)) {
    case 0:
      l.insert(static_cast<std::size_t>(pos), 1, junk[static_cast<std::size_t>(gen::uniform(rng, 0, static_cast<int>(junk.size()) - 1))]);
      break;
    case 1:
      l.erase(static_cast<std::size_t>(pos), 1);
      break;
    case 2: {
      // drop one whitespace-separated token
      auto end = l.find(' ', static_cast<std::size_t>(pos));
      auto start = l.rfind(' ', static_cast<std::size_t>(pos));
      start = start == std::string::npos ? 0 : start;
      l.erase(start, (end == std::string::npos ? l.size() : end) - start);
      break;
    }
    default:
      l = l.substr(0, static_cast<std::size_t>(pos));
  }
  line_out = li + 1;
  std::string out;
  for (const auto& x : lines) out += x + "\n";
  return out;
}

void dsl_roundtrip(Outcome& out) {
  std::vector<std::string> texts;
  for (const auto& entry : std::filesystem::directory_iterator(testing::data_path("bsc/rules"))) {
    auto rs = load_rules_file(entry.path().string());
    auto once = format_rules(rs);
    auto reparsed = parse_rules(once);
    out.expect(reparsed == rs, entry.path().filename().string() + ": parse(format(parse)) differs");
    out.expect(format_rules(reparsed) == once, entry.path().filename().string() + ": format not a fixpoint");
    texts.push_back(testing::slurp(entry.path().string()));
  }
  gen::Rng rng(777);
  int errors = 0, attempts = 0;
  while (errors < 100 && attempts < 10000) {
    ++attempts;
    std::size_t mutated_line = 0;
    std::string text = mutate(rng, texts[static_cast<std::size_t>(attempts) % texts.size()], mutated_line);
    std::size_t nlines = static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
    try {
      parse_rules(text);
    } catch (const RulesParseError& e) {
      ++errors;
      out.expect(e.line() >= 1 && e.line() <= nlines && e.column() >= 1,
                 "diagnostic at " + std::to_string(e.line()) + ":" + std::to_string(e.column()));
      out.expect(std::string(e.what()).find("line " + std::to_string(e.line()) + ", column " +
                                            std::to_string(e.column())) !=
                     std::string::npos,
                 "message lacks line:column: " + std::string(e.what()));
    }
    // other exceptions propagate and fail the criterion
  }
  out.expect(errors == 100, "only " + std::to_string(errors) + " syntax errors generated");
  if (out.pass) out.detail = std::to_string(errors) + " fuzzed errors from " + std::to_string(attempts) + " mutations";
}

void cli_http_parity(Outcome& out) {
  AppConfig config;
  config.data_dir = testing::data_path("bsc/data");
  config.rules_dir = testing::data_path("bsc/rules");
  Service service(config);
  int port = service.bind("127.0.0.1", 0);
  std::thread server([&] { service.listen_after_bind(); });
  httplib::Client client("127.0.0.1", port);
  int compared = 0, with_violations = 0;
  for (int i = 1; i <= 20; ++i) {
    char name[16];
    std::snprintf(name, sizeof name, "t%02d.json", i);
    std::string path = testing::data_path(std::string("bsc/timelines/") + name);
    auto cli = testing::run_cli("validate --data '" + config.data_dir + "' --rules-dir '" + config.rules_dir +
                                "' --timeline '" + path + "'");
    auto res = client.Post("/api/validate", testing::slurp(path), "application/json");
    if (!res) {
      out.fail(std::string(name) + ": no HTTP response");
      continue;
    }
    out.expect(cli.exit_code == 0 && res->status == 200, std::string(name) + ": exit " + std::to_string(cli.exit_code) +
                                                             ", status " + std::to_string(res->status));
    out.expect(cli.out == res->body, std::string(name) + ": bodies differ");
    ++compared;
    auto report = Json::parse(res->body, nullptr, false);
    if (!report.is_discarded() && report.contains("violations")) with_violations += !report["violations"].empty();
  }
  service.stop();
  server.join();
  if (out.pass) {
    out.detail = std::to_string(compared) + " timelines byte-identical, " + std::to_string(with_violations) +
                 " with violations";
  }
}

}  // namespace

int main() {
  criterion("KPI oracle suite (synthetic50, exact, < 5 s)", 5.0, kpi_suite);
  criterion("Replay soundness (200 plans x 10 linearizations, 200 invalid traces, < 30 s)", 30.0, replay_suite);
  criterion("Fitness formula invariant on every replay", 0, fitness_formula);
  criterion("Regulation engine vs enumeration oracle (>= 10,000 combinations, < 60 s)", 60.0, regulation_oracle);
  criterion("Past exemption and defaults never block (1,000 pairs)", 0, planning_properties);
  criterion("60-CP requirement read from the rules file", 0, sixty_cp);
  criterion("Proseminar before seminar, planning and audit", 0, proseminar);
  criterion("Miner recovers the planted pair (lift within 0.05)", 0, miner_recovery);
  criterion("Rules round trip and 100 fuzzed syntax errors", 0, dsl_roundtrip);
  criterion("CLI / HTTP byte parity on 20 timelines", 0, cli_http_parity);
  std::cout << (g_failed ? std::to_string(g_failed) + " criteria FAILED" : "all criteria PASS") << std::endl;
  return g_failed ? 1 : 0;
}
