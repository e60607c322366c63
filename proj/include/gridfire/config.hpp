#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gridfire/fire.hpp"
#include "gridfire/online.hpp"

namespace gridfire {

// Flat key=value experiment configuration; see the shipped .cfg files for
// the key list and units.
struct ExperimentConfig {
  std::string network_file;
  int grid_width = 0;
  int grid_height = 0;
  int blocks_x = 1;            // rectangular area partition (default)
  int blocks_y = 1;
  std::string partition_file;  // optional explicit per-node partition
  int num_areas = 1;           // derived (blocks) or explicit (partition file)

  double station_threshold = 3.0;  // d_bar, grid cells
  double shed_cost = 20.0;         // C^S per power unit shed
  int degree_cap = 12;

  int horizon = 2000;  // T, periods
  int lambda_plus = 50;
  int lambda_minus = 50;
  ValueRange p_plus_range{0.2, 0.6};
  ValueRange p_minus_range{0.1, 0.4};

  int origins = 1;
  std::string origin_rule = "uniform";  // uniform | per_area

  int sequences = 5;
  int reps = 20;
  int full_scale_sequences = 100;
  int full_scale_reps = 1000;
  std::uint64_t seed = 1;

  std::vector<std::string> algorithms{"alg1", "naive", "global", "lr"};
  double lr_threshold = 1.0;
  IntervalPolicy interval_policy = IntervalPolicy::kGeometric;
  LogFactorMode log_factor = LogFactorMode::kLn2HT;

  DetectorConfig detector_config() const {
    DetectorConfig d;
    d.policy = interval_policy;
    d.log_factor = log_factor;
    d.horizon = horizon;
    d.num_areas = num_areas;
    d.lr_threshold = lr_threshold;
    return d;
  }
};

// Parses a config file; unknown keys are rejected. Relative file references
// resolve against the config file's directory.
ExperimentConfig load_config(const std::string& path);

GridMap build_grid(const ExperimentConfig& config);

}  // namespace gridfire
