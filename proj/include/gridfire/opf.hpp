#pragma once

#include <iosfwd>
#include <vector>

#include "gridfire/lp.hpp"
#include "gridfire/network.hpp"

namespace gridfire {

// Dispatch alpha per bus and flow beta per line (positive = bus_a -> bus_b).
struct Strategy {
  std::vector<double> alpha;
  std::vector<double> beta;

  double beta_into(const PowerNetwork& net, int line_idx, int bus_id) const {
    return net.flow_sign_into(line_idx, bus_id) * beta[line_idx];
  }
};

struct OpfResult {
  lp::SolveStatus status = lp::SolveStatus::kNumericalTrouble;
  Strategy strategy;
  double objective = 0.0;
  int lp_iterations = 0;
};

// Inputs of the extensive-form problem at one decision epoch.
struct StochasticInputs {
  std::vector<double> bus_prob;    // P_t(i) per bus
  std::vector<double> line_prob;   // P_t(i,j) per line
  std::vector<bool> bus_pinched;   // failed at t-1: alpha fixed to 0
  std::vector<bool> line_pinched;  // failed at t-1: beta fixed to 0

  static StochasticInputs all_clear(const PowerNetwork& net);
};

// Cost-relevant scenario terms below this weight are dropped from the LP.
inline constexpr double kScenarioWeightFloor = 1e-14;

// Static dispatch: minimize generation cost subject to nodal balance,
// capacities, flow caps and the PTDF identity.
OpfResult static_opf(const PowerNetwork& net, const PtdfMatrix& ptdf,
                     const lp::LpSolver& solver = lp::default_solver());

// Extensive-form dispatch under one-step failure uncertainty: generation cost
// plus expected shedding penalty over per-bus subsets of functioning incident
// lines.
OpfResult stochastic_opf(const PowerNetwork& net, const PtdfMatrix& ptdf_prev,
                         const StochasticInputs& inputs, double shed_cost,
                         const lp::LpSolver& solver = lp::default_solver());

// Per-bus load shedding of a strategy under realized loads/capacities.
// A failed bus sheds nothing (its realized load is zero).
std::vector<double> realized_shedding(const PowerNetwork& net, const Strategy& strategy,
                                      const FunctionalIndicator& realized);
double realized_total_cost(const PowerNetwork& net, const Strategy& strategy,
                           const FunctionalIndicator& realized, double shed_cost);

// Closed-form expected cost of ANY strategy under the given functional
// probabilities (generation cost plus expected shedding penalty).
double expected_cost(const PowerNetwork& net, const Strategy& strategy,
                     const std::vector<double>& bus_prob, const std::vector<double>& line_prob,
                     double shed_cost);

// Sensitivity constants bounding the cost gap of plug-in strategies.
double sensitivity_k_plus(const PowerNetwork& net, double shed_cost);
double sensitivity_k_minus(const PowerNetwork& net, double shed_cost);

// Fallback when the dispatch LP is infeasible: capacities scaled toward the
// total load, zero flows.
Strategy last_resort_strategy(const PowerNetwork& net);

void write_strategy_alpha_csv(const PowerNetwork& net, int t, const Strategy& s,
                              std::ostream& out, bool header);
void write_strategy_beta_csv(const PowerNetwork& net, int t, const Strategy& s, std::ostream& out,
                             bool header);

}  // namespace gridfire
