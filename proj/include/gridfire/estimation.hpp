#pragma once

#include <array>
#include <iosfwd>
#include <vector>

#include "gridfire/fire.hpp"
#include "gridfire/grid.hpp"

namespace gridfire {

inline constexpr double kProbClamp = 1e-6;  // estimates live in [clamp, 1-clamp]

// Sufficient statistics of one transition (B_t, B_{t+1}) for one area:
//  - ignited_by_m[m]: newly ignited nodes with m burning neighbors (m in 1..8)
//  - nonignited_weight: sum of burning-neighbor counts over frontier nodes
//    that did not ignite
//  - extinguished (a) and still_burning (b) for the containment stream
struct AreaObservation {
  std::array<std::int64_t, 9> ignited_by_m{};  // index 0 unused
  std::int64_t nonignited_weight = 0;
  std::int64_t nonignited_nodes = 0;
  std::int64_t extinguished = 0;
  std::int64_t still_burning = 0;

  bool has_plus_data() const {
    if (nonignited_weight > 0) return true;
    for (int m = 1; m <= 8; ++m)
      if (ignited_by_m[m] > 0) return true;
    return false;
  }
  bool has_minus_data() const { return extinguished + still_burning > 0; }
};

struct StepObservation {
  std::vector<AreaObservation> areas;  // index 0 .. H-1 for areas 1..H
};

// One-parameter estimate with its inverse-observed-information variance
// proxy. `nu` is +inf when the step produced no data for the stream.
struct ParamEstimate {
  bool has_data = false;
  double value = 0.0;
  double nu = 0.0;
};

struct AreaEstimate {
  ParamEstimate plus;
  ParamEstimate minus;
};

struct StepEstimate {
  std::vector<AreaEstimate> areas;
};

StepObservation collect_observation(const GridMap& g, const NodeSet& burning_t,
                                    const NodeSet& burning_next);

// Joint log-likelihood of the transition at the given per-area parameters.
// Probabilities must lie in (0,1); a parameter at 0/1 that conflicts with the
// data yields -infinity.
double log_likelihood(const std::vector<double>& p_plus, const std::vector<double>& p_minus,
                      const StepObservation& obs);

// Per-area single-stream pieces, used by the maximizer and the tests.
double plus_log_likelihood(const AreaObservation& area, double p_plus);
double minus_log_likelihood(const AreaObservation& area, double p_minus);

// Negative second derivative of the per-area log-likelihood (observed
// information) at the given parameter value.
double plus_observed_information(const AreaObservation& area, double p_plus);
double minus_observed_information(const AreaObservation& area, double p_minus);

// Per-period MLEs: closed form a/(a+b) for p-, golden-section maximization of
// the p+ terms on [clamp, 1-clamp]; nu = 1 / observed information at the
// clamped estimate.
StepEstimate mle_step(const StepObservation& obs);

// Per-area variance proxies (nu+, nu-) of an estimate: inverse observed
// information at the estimate values, +inf where the stream has no data.
struct VarianceProxy {
  double nu_plus = 0.0;
  double nu_minus = 0.0;
};
std::vector<VarianceProxy> variance_proxy(const StepObservation& obs, const StepEstimate& est);

struct IntervalAverage {
  double mean = 0.0;
  double nu_sum = 0.0;
  int data_periods = 0;
};

enum class Stream { kPlus, kMinus };

// Mean estimate and summed variance proxies over periods [t1, t2] of one
// area's history (1-based period indices into `history`). Periods without
// data are skipped; throws if the whole range is empty of data.
IntervalAverage interval_average(const std::vector<StepEstimate>& history, int area, int t1,
                                 int t2, Stream stream);

struct QqPoint {
  int t = 0;
  double residual = 0.0;    // (p_hat - p_true) / sqrt(nu)
  double theoretical = 0.0; // matching standard normal quantile
};

struct ResidualAnalysis {
  // per area (index h-1), per stream: QQ pairs sorted by residual
  std::vector<std::vector<QqPoint>> plus;
  std::vector<std::vector<QqPoint>> minus;
};

// Standardized estimation residuals of a synthetic run against the known
// schedule, paired with standard normal quantiles. Empty areas are excluded
// (their vectors stay empty).
ResidualAnalysis residual_analysis(const GridMap& g, const std::vector<FireState>& trajectory,
                                   const ParamSchedule& schedule);

void write_estimates_csv(const std::vector<StepEstimate>& history, std::ostream& out);
void write_qq_csv(const ResidualAnalysis& analysis, Stream stream, std::ostream& out);

// Inverse standard normal CDF (Acklam's rational approximation).
double normal_quantile(double p);
// Kolmogorov-Smirnov distance of a sample against N(0,1).
double ks_statistic_vs_std_normal(std::vector<double> sample);

}  // namespace gridfire
