#pragma once

#include <cstdint>
#include <map>
#include "json.hpp"
#include <optional>
#include <string>
#include <vector>

#include "nci/error.hpp"

namespace nci {

struct GridAxis {
  std::string name;
  double min = 0.0;
  double max = 0.0;
  int count = 1;
  double value(int k) const { return count == 1 ? min : min + (max - min) * k / (count - 1); }
};

struct SweepConfig {
  std::string experiment;
  nlohmann::json model = nlohmann::json::object();  // parameter -> number or string
  std::vector<GridAxis> grid;
  std::vector<std::uint64_t> seeds;
  std::uint64_t master_seed = 0;
  std::string kernel = "minimal_image";
  std::optional<double> collar;
  std::string output;
  int threads = 0;  // 0: NCI_THREADS or 1

  long grid_points() const;
  // Model parameters overlaid with the grid coordinates of grid point g.
  nlohmann::json params_at(long g) const;
};

// All problems found while parsing or checking; code is parse_error or semantic_error.
class ConfigError : public Error {
 public:
  ConfigError(Errc code, std::vector<std::string> problems);
  const std::vector<std::string>& problems() const { return problems_; }

 private:
  std::vector<std::string> problems_;
};

// Text format:
//   experiment = <name>
//   [model]  name = value
//   [grid]   name = min, max, count
//   [run]    seeds = a, b, ... | seed_count = n; master_seed; kernel; collar; output; threads
SweepConfig parse_config(const std::string& text);
void check_config(const SweepConfig& cfg);
SweepConfig validate_config(const std::string& path);

}  // namespace nci
