#include "gridfire/opf.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace gridfire {

namespace {

// Weight and delivered flow of the deterministic part of a bus's scenarios:
// lines with probability 1 always deliver, probability 0 never.
struct FractionalLines {
  std::vector<int> line_idx;
  std::vector<double> prob;
  double base_delivery = 0.0;  // from always-on lines, for a given strategy
};

}  // namespace

StochasticInputs StochasticInputs::all_clear(const PowerNetwork& net) {
  StochasticInputs in;
  in.bus_prob.assign(net.num_buses(), 1.0);
  in.line_prob.assign(net.num_lines(), 1.0);
  in.bus_pinched.assign(net.num_buses(), false);
  in.line_pinched.assign(net.num_lines(), false);
  return in;
}

OpfResult static_opf(const PowerNetwork& net, const PtdfMatrix& ptdf,
                     const lp::LpSolver& solver) {
  lp::LinearProgram prob;
  const int nb = net.num_buses();
  const int nl = net.num_lines();
  std::vector<int> alpha_var(nb), beta_var(nl);
  for (const Bus& b : net.buses())
    alpha_var[b.id - 1] = prob.add_variable(b.gen_cost, 0.0, b.capacity);
  for (const Line& l : net.lines())
    beta_var[l.id] = prob.add_variable(0.0, -l.flow_cap, l.flow_cap);

  // nodal balance: alpha(i) + sum_j beta(j,i) = L(i)
  for (const Bus& b : net.buses()) {
    lp::LinearRow row;
    row.coeffs.push_back({alpha_var[b.id - 1], 1.0});
    for (int le : net.incident_lines(b.id))
      row.coeffs.push_back({beta_var[le], net.flow_sign_into(le, b.id)});
    row.rhs = b.load;
    prob.eq_rows.push_back(std::move(row));
  }
  // PTDF identity: beta(l) - sum_k PTDF(l,k) alpha(k) = -sum_k PTDF(l,k) L(k)
  for (const Line& l : net.lines()) {
    lp::LinearRow row;
    row.coeffs.push_back({beta_var[l.id], 1.0});
    double rhs = 0.0;
    for (const Bus& b : net.buses()) {
      const double f = ptdf.at(l.id, b.id);
      if (f == 0.0) continue;
      row.coeffs.push_back({alpha_var[b.id - 1], -f});
      rhs -= f * b.load;
    }
    row.rhs = rhs;
    prob.eq_rows.push_back(std::move(row));
  }

  const lp::LpSolution sol = solver.solve(prob);
  OpfResult out;
  out.status = sol.status;
  out.objective = sol.objective;
  out.lp_iterations = sol.iterations;
  if (sol.status == lp::SolveStatus::kOptimal) {
    out.strategy.alpha.resize(nb);
    out.strategy.beta.resize(nl);
    for (int i = 0; i < nb; ++i) out.strategy.alpha[i] = sol.x[alpha_var[i]];
    for (int l = 0; l < nl; ++l) out.strategy.beta[l] = sol.x[beta_var[l]];
  }
  return out;
}

OpfResult stochastic_opf(const PowerNetwork& net, const PtdfMatrix& ptdf_prev,
                         const StochasticInputs& inputs, double shed_cost,
                         const lp::LpSolver& solver) {
  lp::LinearProgram prob;
  const int nb = net.num_buses();
  const int nl = net.num_lines();
  std::vector<int> alpha_var(nb), beta_var(nl);
  for (const Bus& b : net.buses()) {
    const double cap = inputs.bus_pinched[b.id - 1] ? 0.0 : b.capacity;
    alpha_var[b.id - 1] = prob.add_variable(b.gen_cost, 0.0, cap);
  }
  for (const Line& l : net.lines()) {
    const double cap = inputs.line_pinched[l.id] ? 0.0 : l.flow_cap;
    beta_var[l.id] = prob.add_variable(0.0, -cap, cap);
  }

  // PTDF identity on the surviving topology; pinched lines have no row.
  for (const Line& l : net.lines()) {
    if (inputs.line_pinched[l.id]) continue;
    lp::LinearRow row;
    row.coeffs.push_back({beta_var[l.id], 1.0});
    double rhs = 0.0;
    for (const Bus& b : net.buses()) {
      const double f = ptdf_prev.at(l.id, b.id);
      if (f == 0.0) continue;
      row.coeffs.push_back({alpha_var[b.id - 1], -f});
      rhs -= f * b.load;
    }
    row.rhs = rhs;
    prob.eq_rows.push_back(std::move(row));
  }

  // Shedding auxiliaries per bus and functioning-subset scenario.
  for (const Bus& b : net.buses()) {
    const double p_bus = inputs.bus_prob[b.id - 1];
    if (p_bus <= 0.0) continue;
    const auto& incident = net.incident_lines(b.id);
    const int deg = static_cast<int>(incident.size());
    const ScenarioWeights weights = scenario_weights(net, inputs.line_prob, b.id);
    for (std::uint32_t subset = 0; subset < weights.rho.size(); ++subset) {
      const double coeff = shed_cost * p_bus * weights.rho[subset];
      if (coeff < kScenarioWeightFloor) continue;
      const int h_var = prob.add_variable(coeff, 0.0, lp::kInfinity);
      // L(i) - alpha(i) - sum_{l in subset} beta_into <= H
      lp::LinearRow row;
      row.coeffs.push_back({alpha_var[b.id - 1], -1.0});
      for (int k = 0; k < deg; ++k)
        if ((subset >> k) & 1u)
          row.coeffs.push_back({beta_var[incident[k]], -net.flow_sign_into(incident[k], b.id)});
      row.coeffs.push_back({h_var, -1.0});
      row.rhs = -b.load;
      prob.le_rows.push_back(std::move(row));
    }
  }

  const lp::LpSolution sol = solver.solve(prob);
  OpfResult out;
  out.status = sol.status;
  out.objective = sol.objective;
  out.lp_iterations = sol.iterations;
  if (sol.status == lp::SolveStatus::kOptimal) {
    out.strategy.alpha.resize(nb);
    out.strategy.beta.resize(nl);
    for (int i = 0; i < nb; ++i) out.strategy.alpha[i] = sol.x[alpha_var[i]];
    for (int l = 0; l < nl; ++l) out.strategy.beta[l] = sol.x[beta_var[l]];
  }
  return out;
}

std::vector<double> realized_shedding(const PowerNetwork& net, const Strategy& strategy,
                                      const FunctionalIndicator& realized) {
  std::vector<double> shed(net.num_buses(), 0.0);
  for (const Bus& b : net.buses()) {
    if (!realized.bus_functional[b.id - 1]) continue;  // failed bus: no shedding
    double delivered = 0.0;
    for (int le : net.incident_lines(b.id)) {
      const double into = strategy.beta_into(net, le, b.id);
      const double magnitude = std::min(std::abs(into), realized.realized_flow_cap[le]);
      delivered += into > 0.0 ? magnitude : -magnitude;
    }
    const double supplied =
        std::min(strategy.alpha[b.id - 1], realized.realized_capacity[b.id - 1]);
    shed[b.id - 1] = std::max(realized.realized_load[b.id - 1] - supplied - delivered, 0.0);
  }
  return shed;
}

double realized_total_cost(const PowerNetwork& net, const Strategy& strategy,
                           const FunctionalIndicator& realized, double shed_cost) {
  double cost = 0.0;
  for (const Bus& b : net.buses()) cost += b.gen_cost * strategy.alpha[b.id - 1];
  for (double s : realized_shedding(net, strategy, realized)) cost += shed_cost * s;
  return cost;
}

double expected_cost(const PowerNetwork& net, const Strategy& strategy,
                     const std::vector<double>& bus_prob, const std::vector<double>& line_prob,
                     double shed_cost) {
  double cost = 0.0;
  for (const Bus& b : net.buses()) cost += b.gen_cost * strategy.alpha[b.id - 1];

  for (const Bus& b : net.buses()) {
    const double p_bus = bus_prob[b.id - 1];
    if (p_bus <= 0.0) continue;
    // Split incident lines into deterministic and fractional.
    double base = b.load - strategy.alpha[b.id - 1];
    std::vector<double> frac_prob;
    std::vector<double> frac_flow;
    for (int le : net.incident_lines(b.id)) {
      const double p = line_prob[le];
      const double into = strategy.beta_into(net, le, b.id);
      if (p >= 1.0) {
        base -= into;
      } else if (p > 0.0) {
        frac_prob.push_back(p);
        frac_flow.push_back(into);
      }
    }
    double expected_shed = 0.0;
    const std::uint32_t subsets = 1u << frac_prob.size();
    for (std::uint32_t subset = 0; subset < subsets; ++subset) {
      double w = 1.0, delivered = 0.0;
      for (std::size_t k = 0; k < frac_prob.size(); ++k) {
        if ((subset >> k) & 1u) {
          w *= frac_prob[k];
          delivered += frac_flow[k];
        } else {
          w *= 1.0 - frac_prob[k];
        }
      }
      expected_shed += w * std::max(base - delivered, 0.0);
    }
    cost += shed_cost * p_bus * expected_shed;
  }
  return cost;
}

double sensitivity_k_plus(const PowerNetwork& net, double shed_cost) {
  const double d_bar = net.station_threshold();
  const double ball = (2.0 * d_bar + 1.0) * (2.0 * d_bar + 1.0);
  double total = 0.0;
  for (const Bus& b : net.buses()) {
    double caps = b.capacity + b.load;
    for (int le : net.incident_lines(b.id)) caps += net.line(le).flow_cap;
    const double power_set = std::pow(2.0, net.degree(b.id));
    total += (power_set + 3.0) * (net.incident_interior_count(b.id) + 2.0 * ball) * caps;
  }
  return 2.0 * shed_cost * total;
}

double sensitivity_k_minus(const PowerNetwork& net, double shed_cost) {
  const double d_bar = net.station_threshold();
  const double ball = (2.0 * d_bar + 1.0) * (2.0 * d_bar + 1.0);
  double total = 0.0;
  for (const Bus& b : net.buses()) {
    double caps = b.capacity + b.load;
    for (int le : net.incident_lines(b.id)) caps += net.line(le).flow_cap;
    const double power_set = std::pow(2.0, net.degree(b.id));
    total += power_set * (ball + net.incident_interior_count(b.id)) * caps;
  }
  return 2.0 * shed_cost * total;
}

Strategy last_resort_strategy(const PowerNetwork& net) {
  Strategy s;
  s.alpha.assign(net.num_buses(), 0.0);
  s.beta.assign(net.num_lines(), 0.0);
  double total_load = 0.0, total_cap = 0.0;
  for (const Bus& b : net.buses()) {
    total_load += b.load;
    total_cap += b.capacity;
  }
  const double scale = total_cap > 0.0 ? std::min(1.0, total_load / total_cap) : 0.0;
  for (const Bus& b : net.buses()) s.alpha[b.id - 1] = scale * b.capacity;
  return s;
}

void write_strategy_alpha_csv(const PowerNetwork& net, int t, const Strategy& s,
                              std::ostream& out, bool header) {
  if (header) out << "t,bus,alpha\n";
  for (const Bus& b : net.buses()) out << t << ',' << b.id << ',' << s.alpha[b.id - 1] << '\n';
}

void write_strategy_beta_csv(const PowerNetwork& net, int t, const Strategy& s, std::ostream& out,
                             bool header) {
  if (header) out << "t,line,bus_a,bus_b,beta\n";
  for (const Line& l : net.lines())
    out << t << ',' << l.id << ',' << l.bus_a << ',' << l.bus_b << ',' << s.beta[l.id] << '\n';
}

}  // namespace gridfire
