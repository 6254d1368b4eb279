#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "nci/config.hpp"
#include "nci/models.hpp"

namespace nci {

inline constexpr const char* code_version = "nci 1.0.0";

// splitmix64(splitmix64(splitmix64(master) + grid_index) + seed_label)
std::uint64_t task_seed(std::uint64_t master, std::uint64_t grid_index, std::uint64_t seed_label);

// --threads, then the config value, then NCI_THREADS, then 1.
int resolve_threads(int requested, const SweepConfig& cfg);

struct SweepOptions {
  int threads = 0;
  bool resume = false;
  bool write_files = true;
};

struct SummaryRow {
  long grid_index = 0;
  nlohmann::json params;
  int count = 0;
  int failed = 0;
  cplx mean{};
  double stderr_re = 0.0;
  double stderr_im = 0.0;
  double mean_deviation = 0.0;
};

struct SweepReport {
  long tasks = 0;
  long skipped = 0;  // already present when resuming
  long failed = 0;
  std::vector<nlohmann::json> records;  // every record, ordered by task key
  std::vector<SummaryRow> summary;
  std::string records_path;
  std::string summary_path;
};

std::string summary_path_for(const std::string& records_path);

SweepReport run_sweep(const SweepConfig& cfg, const SweepOptions& opt = {});

}  // namespace nci
