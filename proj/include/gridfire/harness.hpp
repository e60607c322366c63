#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "gridfire/config.hpp"
#include "gridfire/estimation.hpp"
#include "gridfire/network.hpp"
#include "gridfire/online.hpp"
#include "gridfire/opf.hpp"

namespace gridfire {

// Mean cumulative regret per time step with its standard error across all
// replications, per algorithm.
struct RegretRecord {
  std::vector<std::string> algorithms;
  int horizon = 0;
  int replications = 0;
  std::vector<std::vector<double>> mean;  // [alg][t-1]
  std::vector<std::vector<double>> se;    // [alg][t-1]
  long long lp_solves = 0;
  long long infeasible_incidents = 0;
};

struct ExperimentOptions {
  int threads = 0;  // 0: hardware concurrency
  bool full_scale = false;
  bool step_log = false;            // per-step log of (sequence 0, rep 0)
  std::string out_dir;              // empty: no files written
};

RegretRecord run_experiment(const ExperimentConfig& config, const ExperimentOptions& options);

void write_regret_csv(const RegretRecord& record, std::ostream& out);
void write_summary_csv(const RegretRecord& record, std::ostream& out);

// Closed-form regret bound:
// 12 [K+ max_h sqrt(Lambda+_h nu+_h) + K- max_h sqrt(Lambda-_h nu-_h)]
//   * sqrt(T ln 2T) + 2 (K+ + K-) / T.
double regret_bound(double k_plus, double k_minus, const std::vector<int>& lambda_plus,
                      const std::vector<int>& lambda_minus, const std::vector<double>& nu_plus_cap,
                      const std::vector<double>& nu_minus_cap, int horizon);

// Largest finite per-step variance proxies seen on one seeded replication of
// the configured scenario (used by the bound report).
struct NuCaps {
  std::vector<double> plus;
  std::vector<double> minus;
};
NuCaps estimate_nu_caps(const ExperimentConfig& config, const GridMap& grid);

// Fire origins for one replication, honoring the configured origin rule.
std::vector<NodeId> draw_origins(const ExperimentConfig& config, const GridMap& grid, Rng& rng);

// Max likelihood-ratio split statistic over a null replication, used to
// calibrate the LR benchmark threshold (95th percentile across replications
// gives a 5% per-episode false-alarm rate).
std::vector<double> lr_null_max_statistics(const ExperimentConfig& config, const GridMap& grid,
                                           const PowerNetwork& net, int replications);

}  // namespace gridfire
