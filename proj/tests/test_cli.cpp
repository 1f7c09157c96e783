#include "doctest.h"
#include "studyplan/analytics.h"
#include "studyplan/json_io.h"
#include "support.h"

using namespace studyplan;
using testing::data_path;
using testing::run_cli;

namespace {

std::string q(const std::string& s) { return "'" + s + "'"; }

/// Output must be JSON that re-serializes to the same text.
void check_canonical_json(const std::string& out) {
  auto j = Json::parse(out, nullptr, false);
  REQUIRE_FALSE(j.is_discarded());
  CHECK(j.dump(2) + "\n" == out);
}

}  // namespace

TEST_CASE("kpi subcommand") {
  auto r = run_cli("kpi --data " + q(data_path("kpi_campus")) + " --kind success-rate --course PROG --cohort WS2021");
  CHECK(r.exit_code == 0);
  check_canonical_json(r.out);
  auto j = Json::parse(r.out);
  CHECK(j["numerator"] == 2);
  CHECK(j["denominator"] == 3);
  CHECK(j["value"].get<double>() == doctest::Approx(2.0 / 3.0));

  auto eps = run_cli("kpi --data " + q(data_path("kpi_campus")) + " --kind exams-per-semester --index 1 --cohort WS2021");
  CHECK(eps.exit_code == 0);
  CHECK(Json::parse(eps.out)["taken"]["value"] == 4.0);

  auto undefined = run_cli("kpi --data " + q(data_path("kpi_campus")) + " --kind study-duration --cohort WS2021");
  CHECK(undefined.exit_code == 1);
  auto missing_course = run_cli("kpi --data " + q(data_path("kpi_campus")) + " --kind success-rate");
  CHECK(missing_course.exit_code == 2);
}

TEST_CASE("usage errors exit with 2") {
  CHECK(run_cli("kpi --data " + q(data_path("kpi_campus")) + " --kind success-rate --bogus").exit_code == 2);
  CHECK(run_cli("").exit_code == 2);
  CHECK(run_cli("kpi --data /nonexistent --kind study-duration").exit_code == 2);
  CHECK(run_cli("--help").exit_code == 0);
  CHECK(run_cli("mine --data " + q(data_path("planted30")) + " --min-support 5 --min-lift 0.2 --merge-into " +
                q(data_path("bsc/rules/BSC_CS@2018.rules")))
            .exit_code == 2);
}

TEST_CASE("ingest-check") {
  auto ok = run_cli("ingest-check --data " + q(data_path("tiny_campus")));
  CHECK(ok.exit_code == 0);
  check_canonical_json(ok.out);
  CHECK(Json::parse(ok.out)["counts"]["exams"] == 12);

  testing::TempDir dir;
  for (const char* f : {"students.csv", "enrollments.csv", "courses.csv", "scheduled.csv", "exams.csv"}) {
    dir.write(f, testing::slurp(data_path(std::string("tiny_campus/") + f)));
  }
  dir.write("exams.csv", testing::slurp(data_path("tiny_campus/exams.csv")) + "S3,CS,GHOST,1,WS2022,,,,F,5.0\n");
  auto bad = run_cli("ingest-check --data " + q(dir.path.string()));
  CHECK(bad.exit_code == 1);
  CHECK_FALSE(Json::parse(bad.out)["ok"].get<bool>());
}

TEST_CASE("validate subcommand") {
  std::string base = "validate --data " + q(data_path("bsc/data")) + " --rules-dir " + q(data_path("bsc/rules"));
  testing::TempDir dir;
  auto tl = dir.write("tl.json", R"({"program_id": "BSC_CS", "regulation_version": "2018",
    "start_semester": "WS2021", "now": 0,
    "atoms": [{"kind": "planned_take", "course": "SEM", "sem": 2}]})");
  auto r = run_cli(base + " --timeline " + q(tl));
  CHECK(r.exit_code == 0);
  check_canonical_json(r.out);
  CHECK_FALSE(Json::parse(r.out)["violations"].empty());
  CHECK(run_cli(base + " --timeline " + q(tl) + " --strict").exit_code == 1);

  auto bad = dir.write("bad.json", "{\"program_id\": 3}");
  CHECK(run_cli(base + " --timeline " + q(bad)).exit_code == 2);
  auto unknown = dir.write("unknown.json", R"({"program_id": "X", "regulation_version": "1",
    "start_semester": "WS2021", "now": 0, "atoms": []})");
  CHECK(run_cli(base + " --timeline " + q(unknown)).exit_code == 1);

  auto broken_rules = dir.write("BSC_CS@2018.rules", "result cp\nrequire sum(cp) >= by sem 3\n");
  std::string err = dir.file("err.txt");
  auto parse_fail = run_cli("validate --data " + q(data_path("bsc/data")) + " --rules " + q(broken_rules) +
                                " --timeline " + q(tl),
                            err);
  CHECK(parse_fail.exit_code == 1);
  CHECK(testing::slurp(err).find("line 2, column 20") != std::string::npos);
}

TEST_CASE("dfg --out writes export_dot output") {
  testing::TempDir dir;
  auto config = dir.write("log.json", R"({"scope": {"program_id": "CS", "min_semesters": 0}})");
  auto out = dir.file("g.dot");
  auto r = run_cli("dfg --data " + q(data_path("synthetic50")) + " --config " + q(config) + " --out " + q(out));
  REQUIRE(r.exit_code == 0);
  LogConfig lc = log_config_from_json(Json::parse(testing::slurp(config)));
  auto expected = export_dot(discover_dfg(build_log(testing::fixture_db("synthetic50"), lc)));
  CHECK(testing::slurp(out) == expected);

  auto json = run_cli("dfg --data " + q(data_path("synthetic50")) + " --config " + q(config) + " --json");
  CHECK(json.exit_code == 0);
  check_canonical_json(json.out);
}

TEST_CASE("conform and mine subcommands") {
  testing::TempDir dir;
  auto pnml = dir.file("net.pnml");
  auto r = run_cli("conform --data " + q(data_path("bsc/data")) + " --plan " +
                   q(data_path("bsc/plans/BSC_CS@2018.json")) + " --truncate 3 --pnml " + q(pnml));
  CHECK(r.exit_code == 0);
  check_canonical_json(r.out);
  CHECK(Json::parse(r.out)["plan"]["semesters"].size() == 3);
  CHECK(testing::slurp(pnml).find("<pnml") != std::string::npos);

  auto merged = dir.file("merged.rules");
  auto m = run_cli("mine --data " + q(data_path("planted30")) + " --min-support 5 --min-lift 0.2 --merge-into " +
                   q(data_path("bsc/rules/BSC_CS@2018.rules")) + " --merged-out " + q(merged));
  CHECK(m.exit_code == 0);
  check_canonical_json(m.out);
  auto top = Json::parse(m.out)["candidates"][0];
  CHECK(top["before_course"] == "STAT");
  CHECK(top["after_course"] == "IDS");
  auto rs = load_rules_file(dir.write("BSC_CS@2018.rules", testing::slurp(merged)));
  CHECK(rs.rules.size() >= 18);
}

TEST_CASE("build-log writes XES") {
  testing::TempDir dir;
  auto config = dir.write("log.json", R"({"scope": {"program_id": "CS", "regulation_version": "2018"}})");
  auto r = run_cli("build-log --data " + q(data_path("tiny_campus")) + " --config " + q(config));
  CHECK(r.exit_code == 0);
  CHECK(r.out.find("<log") != std::string::npos);
}
