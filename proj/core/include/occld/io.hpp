#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "occld/chain.hpp"
#include "occld/simulate.hpp"

namespace occld {

// Model file: {"kind": "discrete"|"continuous", "states": [...],
// "matrix": [[...]], "m": [...]}, row-major decimal numbers; validation is
// build_model's.
ChainModel parse_model(const std::string& json_text);
ChainModel load_model(const std::filesystem::path& path);
std::string model_to_json(const ChainModel& model);

// Measure file: {"mu": [...]} or {"delta": "<state label>"}.
ProbMeasure parse_measure(const std::string& json_text,
                          const ChainModel& model);
ProbMeasure load_measure(const std::filesystem::path& path,
                         const ChainModel& model);

// Experiment file: model reference (path, relative to the experiment file),
// start states, an event spec, the horizon grid, trials and seed.
struct Experiment {
  std::filesystem::path model_path;
  ChainModel model;
  std::vector<int> starts;
  EventSpec event;
  std::vector<double> n_grid;
  std::uint64_t trials = 100000;
  std::uint64_t seed = 0;
  double tol_fraction = 0.1;
};

Experiment load_experiment(const std::filesystem::path& path);

// Full-precision decimal rendering (17 significant digits) for CSV output.
std::string format_full(double x);

}  // namespace occld
