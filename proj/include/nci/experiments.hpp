#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "nci/models.hpp"

namespace nci {

struct ExperimentInfo {
  std::string name;
  nlohmann::json defaults;             // every accepted parameter with its default
  std::vector<std::string> string_params;  // parameters holding names rather than numbers
};

const std::vector<ExperimentInfo>& experiments();
const ExperimentInfo* find_experiment(const std::string& name);
std::string experiment_names();

struct TaskOutput {
  cplx value{};
  long quantized_value = 0;
  double deviation = 0.0;
  nlohmann::json diagnostics = nlohmann::json::object();
};

struct TaskSettings {
  std::string kernel = "minimal_image";  // or roots_of_unity
  std::optional<double> collar;
};

// params: defaults overlaid with config values. Throws nci::Error on task failure.
TaskOutput run_task(const std::string& experiment, const nlohmann::json& params, std::uint64_t seed,
                    const TaskSettings& settings);

}  // namespace nci
