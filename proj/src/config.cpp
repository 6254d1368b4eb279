#include "nci/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "nci/experiments.hpp"

namespace nci {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

bool parse_double(const std::string& s, double& out) {
  const std::string t = trim(s);
  if (t.empty()) return false;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), out);
  return res.ec == std::errc() && res.ptr == t.data() + t.size();
}

bool parse_int(const std::string& s, long long& out) {
  const std::string t = trim(s);
  if (t.empty()) return false;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), out);
  return res.ec == std::errc() && res.ptr == t.data() + t.size();
}

std::vector<std::string> split_commas(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(item);
  return out;
}

std::string loc(int line, std::size_t col) { return "line " + std::to_string(line) + ", column " + std::to_string(col + 1) + ": "; }

std::string joined(const std::vector<std::string>& v) {
  std::string s;
  for (const auto& p : v) s += (s.empty() ? "" : "; ") + p;
  return s;
}

}  // namespace

ConfigError::ConfigError(Errc code, std::vector<std::string> problems)
    : Error(code, joined(problems)), problems_(std::move(problems)) {}

long SweepConfig::grid_points() const {
  long n = 1;
  for (const auto& a : grid) n *= std::max(a.count, 0);
  return n;
}

nlohmann::json SweepConfig::params_at(long g) const {
  nlohmann::json p = model;
  // last axis varies fastest
  for (std::size_t k = grid.size(); k-- > 0;) {
    const auto& a = grid[k];
    p[a.name] = a.value(static_cast<int>(g % a.count));
    g /= a.count;
  }
  return p;
}

SweepConfig parse_config(const std::string& text) {
  SweepConfig cfg;
  std::vector<std::string> errs;
  std::string section;
  std::istringstream in(text);
  std::string raw;
  int lineno = 0;
  bool have_seeds = false;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string line = raw;
    if (const auto h = line.find('#'); h != std::string::npos) line = line.substr(0, h);
    if (trim(line).empty()) continue;
    const auto first = line.find_first_not_of(" \t");
    if (line[first] == '[') {
      const auto close = line.find(']', first);
      if (close == std::string::npos) {
        errs.push_back(loc(lineno, line.size()) + "missing ']'");
        continue;
      }
      section = trim(line.substr(first + 1, close - first - 1));
      if (section != "model" && section != "grid" && section != "run")
        errs.push_back(loc(lineno, first + 1) + "unknown section '" + section + "' (expected model, grid or run)");
      if (!trim(line.substr(close + 1)).empty()) errs.push_back(loc(lineno, close + 1) + "trailing text after section header");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      errs.push_back(loc(lineno, first) + "expected 'key = value'");
      continue;
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    const std::size_t vcol = line.find_first_not_of(" \t", eq + 1) == std::string::npos ? eq + 1 : line.find_first_not_of(" \t", eq + 1);
    if (key.empty()) {
      errs.push_back(loc(lineno, first) + "empty key");
      continue;
    }
    if (val.empty()) {
      errs.push_back(loc(lineno, vcol) + "empty value for '" + key + "'");
      continue;
    }
    if (section.empty()) {
      if (key == "experiment") cfg.experiment = val;
      else errs.push_back(loc(lineno, first) + "key '" + key + "' outside a section");
    } else if (section == "model") {
      double d;
      if (parse_double(val, d)) cfg.model[key] = d;
      else cfg.model[key] = val;
    } else if (section == "grid") {
      const auto parts = split_commas(val);
      GridAxis ax;
      ax.name = key;
      long long cnt = 0;
      if (parts.size() != 3) {
        errs.push_back(loc(lineno, vcol) + "grid axis needs 'min, max, count'");
      } else if (!parse_double(parts[0], ax.min) || !parse_double(parts[1], ax.max) || !parse_int(parts[2], cnt)) {
        errs.push_back(loc(lineno, vcol) + "grid axis '" + key + "' has a non-numeric entry");
      } else {
        ax.count = static_cast<int>(cnt);
        cfg.grid.push_back(ax);
      }
    } else if (section == "run") {
      long long iv = 0;
      double dv = 0.0;
      if (key == "seeds") {
        have_seeds = true;
        for (const auto& s : split_commas(val)) {
          if (parse_int(s, iv) && iv >= 0) cfg.seeds.push_back(static_cast<std::uint64_t>(iv));
          else errs.push_back(loc(lineno, vcol) + "seed '" + trim(s) + "' is not a non-negative integer");
        }
      } else if (key == "seed_count") {
        have_seeds = true;
        if (parse_int(val, iv) && iv >= 0) {
          for (long long k = 0; k < iv; ++k) cfg.seeds.push_back(static_cast<std::uint64_t>(k));
        } else {
          errs.push_back(loc(lineno, vcol) + "seed_count must be a non-negative integer");
        }
      } else if (key == "master_seed") {
        if (parse_int(val, iv) && iv >= 0) cfg.master_seed = static_cast<std::uint64_t>(iv);
        else errs.push_back(loc(lineno, vcol) + "master_seed must be a non-negative integer");
      } else if (key == "kernel") {
        cfg.kernel = val;
      } else if (key == "collar") {
        if (parse_double(val, dv)) cfg.collar = dv;
        else errs.push_back(loc(lineno, vcol) + "collar must be a number");
      } else if (key == "output") {
        cfg.output = val;
      } else if (key == "threads") {
        if (parse_int(val, iv)) cfg.threads = static_cast<int>(iv);
        else errs.push_back(loc(lineno, vcol) + "threads must be an integer");
      } else {
        errs.push_back(loc(lineno, first) + "unknown run key '" + key + "'");
      }
    }
  }
  if (!have_seeds) cfg.seeds.push_back(0);
  if (!errs.empty()) throw ConfigError(Errc::parse_error, errs);
  return cfg;
}

void check_config(const SweepConfig& cfg) {
  std::vector<std::string> errs;
  const ExperimentInfo* info = find_experiment(cfg.experiment);
  if (cfg.experiment.empty()) errs.push_back("missing 'experiment'; valid names: " + experiment_names());
  else if (!info) errs.push_back("unknown experiment '" + cfg.experiment + "'; valid names: " + experiment_names());
  auto is_string_param = [&](const std::string& k) {
    return std::find(info->string_params.begin(), info->string_params.end(), k) != info->string_params.end();
  };
  if (info) {
    for (const auto& [k, v] : cfg.model.items()) {
      if (!info->defaults.contains(k)) errs.push_back("parameter '" + k + "' is not used by " + cfg.experiment);
      else if (is_string_param(k) != v.is_string())
        errs.push_back("parameter '" + k + "' must be " + (is_string_param(k) ? "a name" : "a number"));
    }
  }
  std::vector<std::string> names;
  for (const auto& a : cfg.grid) {
    if (a.count < 1) errs.push_back("grid axis '" + a.name + "' has count " + std::to_string(a.count) + " (needs >= 1)");
    if (info && !info->defaults.contains(a.name)) errs.push_back("grid axis '" + a.name + "' is not a parameter of " + cfg.experiment);
    else if (info && is_string_param(a.name)) errs.push_back("grid axis '" + a.name + "' is not numeric");
    if (std::find(names.begin(), names.end(), a.name) != names.end()) errs.push_back("grid axis '" + a.name + "' repeated");
    names.push_back(a.name);
  }
  if (cfg.seeds.empty()) errs.push_back("seed list is empty");
  if (cfg.kernel != "minimal_image" && cfg.kernel != "roots_of_unity")
    errs.push_back("kernel must be minimal_image or roots_of_unity");
  if (cfg.collar && *cfg.collar < 0.0) errs.push_back("collar must be non-negative");
  if (cfg.threads < 0) errs.push_back("threads must be >= 0");
  if (!errs.empty()) throw ConfigError(Errc::semantic_error, errs);
}

SweepConfig validate_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError(Errc::parse_error, {"cannot open '" + path + "'"});
  std::stringstream ss;
  ss << f.rdbuf();
  SweepConfig cfg = parse_config(ss.str());
  check_config(cfg);
  if (cfg.output.empty()) cfg.output = cfg.experiment + ".jsonl";
  return cfg;
}

}  // namespace nci
