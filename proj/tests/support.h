#pragma once

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "studyplan/cms_model.h"
#include "studyplan/json_io.h"

namespace testing {

inline std::string data_path(const std::string& rel) { return std::string(STUDYPLAN_TEST_DATA) + "/" + rel; }

inline const studyplan::CmsDatabase& fixture_db(const std::string& name) {
  static std::map<std::string, studyplan::CmsDatabase> cache;
  auto it = cache.find(name);
  if (it == cache.end()) it = cache.emplace(name, studyplan::load_cms(data_path(name))).first;
  return it->second;
}

inline std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

struct TempDir {
  std::filesystem::path path;
  TempDir() {
    char tmpl[] = "/tmp/studyplan-test-XXXXXX";
    path = mkdtemp(tmpl);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  std::string file(const std::string& name) const { return (path / name).string(); }
  std::string write(const std::string& name, const std::string& content) const {
    std::ofstream(file(name), std::ios::binary) << content;
    return file(name);
  }
};

struct RunResult {
  int exit_code = -1;
  std::string out;
};

/// Runs the CLI binary with `args` (already shell-quoted as needed), capturing
/// stdout; stderr goes to `stderr_file` when given, else is discarded.
inline RunResult run_cli(const std::string& args, const std::string& stderr_file = "/dev/null") {
  std::string cmd = std::string("'") + STUDYPLAN_CLI + "' " + args + " 2>'" + stderr_file + "'";
  RunResult r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  std::array<char, 4096> buf{};
  std::size_t n;
  while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), n);
  int status = pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

}  // namespace testing
