#include <cstdlib>
#include <filesystem>
#include <sstream>

#include "studyplan/service.h"

namespace studyplan {

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

void assign(AppConfig& config, const std::string& key, const std::string& value, const std::string& where) {
  if (key == "data_dir") {
    config.data_dir = value;
  } else if (key == "rules_dir") {
    config.rules_dir = value;
  } else if (key == "plans_dir") {
    config.plans_dir = value;
  } else if (key == "listen_address") {
    config.listen_address = value;
  } else if (key == "cors_origins") {
    config.cors_origins = split_list(value);
  } else {
    throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

}  // namespace

std::string AppConfig::host() const {
  auto colon = listen_address.rfind(':');
  if (colon == std::string::npos) throw ConfigError("listen_address must be host:port, got '" + listen_address + "'");
  return listen_address.substr(0, colon);
}

int AppConfig::port() const {
  auto colon = listen_address.rfind(':');
  if (colon == std::string::npos) throw ConfigError("listen_address must be host:port, got '" + listen_address + "'");
  std::string digits = listen_address.substr(colon + 1);
  if (digits.empty() || digits.find_first_not_of("0123456789") != std::string::npos || digits.size() > 5) {
    throw ConfigError("invalid port in listen_address '" + listen_address + "'");
  }
  int port = std::stoi(digits);
  if (port > 65535) throw ConfigError("invalid port in listen_address '" + listen_address + "'");
  return port;
}

void AppConfig::check_paths() const {
  namespace fs = std::filesystem;
  auto need_dir = [](const std::string& key, const std::string& path) {
    if (path.empty()) throw ConfigError(key + " is not set");
    std::error_code ec;
    if (!fs::is_directory(path, ec)) throw ConfigError(key + " '" + path + "' is not a readable directory");
  };
  need_dir("data_dir", data_dir);
  need_dir("rules_dir", rules_dir);
  if (!plans_dir.empty()) need_dir("plans_dir", plans_dir);
  host();
  port();
}

AppConfig parse_app_config(const std::string& text, const std::string& source) {
  AppConfig config;
  std::stringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    auto eq = t.find('=');
    std::string where = source + ":" + std::to_string(line_no);
    if (eq == std::string::npos) throw ConfigError(where + ": expected key=value");
    assign(config, trim(t.substr(0, eq)), trim(t.substr(eq + 1)), where);
  }
  return config;
}

void apply_env_overrides(AppConfig& config, const EnvLookup& env) {
  static const std::pair<const char*, const char*> kVars[] = {
      {"STUDYPLAN_DATA_DIR", "data_dir"},
      {"STUDYPLAN_RULES_DIR", "rules_dir"},
      {"STUDYPLAN_PLANS_DIR", "plans_dir"},
      {"STUDYPLAN_LISTEN", "listen_address"},
      {"STUDYPLAN_CORS_ORIGINS", "cors_origins"},
  };
  for (const auto& [var, key] : kVars) {
    if (auto value = env(var)) assign(config, key, *value, var);
  }
}

std::optional<std::string> process_env(const std::string& name) {
  const char* v = std::getenv(name.c_str());
  if (!v) return std::nullopt;
  return std::string(v);
}

}  // namespace studyplan
