#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "gridfire/fire.hpp"
#include "gridfire/grid.hpp"

namespace gridfire {

enum class BusKind : unsigned char {
  kConsumer,
  kGas,
  kBiomass,
  kPv,
  kWind,
  kFossil,
  kRenewable,
};

bool is_generator(BusKind kind);
const char* to_string(BusKind kind);
BusKind bus_kind_from_string(const std::string& token);

struct Bus {
  int id = 0;  // 1-based, dense
  NodeId node;
  BusKind kind = BusKind::kConsumer;
  double load = 0.0;      // L(i), power units
  double capacity = 0.0;  // U^P(i); 0 for consumers
  double gen_cost = 0.0;  // C^P(i) per unit
};

struct Line {
  int id = 0;          // 0-based index into lines()
  int bus_a = 0;       // endpoints, 1-based bus ids; beta > 0 flows a -> b
  int bus_b = 0;
  double reactance = 1.0;
  double flow_cap = 0.0;   // U^F(a,b)
  double line_cost = 0.0;  // C^F(a,b): parsed and stored, enters no cost
  std::vector<NodeId> path;  // full node sequence including both endpoints
};

// Grid-embedded power network. Immutable after construction.
class PowerNetwork {
 public:
  PowerNetwork(std::vector<Bus> buses, std::vector<Line> lines, double station_threshold,
               const GridMap& grid, int degree_cap = 12);

  static PowerNetwork parse(std::istream& in, double station_threshold, const GridMap& grid,
                            int degree_cap = 12);
  static PowerNetwork load_file(const std::string& path, double station_threshold,
                                const GridMap& grid, int degree_cap = 12);

  int num_buses() const { return static_cast<int>(buses_.size()); }
  int num_lines() const { return static_cast<int>(lines_.size()); }
  const Bus& bus(int id) const { return buses_[id - 1]; }
  const std::vector<Bus>& buses() const { return buses_; }
  const Line& line(int idx) const { return lines_[idx]; }
  const std::vector<Line>& lines() const { return lines_; }
  double station_threshold() const { return station_threshold_; }

  const std::vector<int>& incident_lines(int bus_id) const { return incident_[bus_id - 1]; }
  int degree(int bus_id) const { return static_cast<int>(incident_[bus_id - 1].size()); }
  // The neighbor bus across an incident line.
  int other_end(int line_idx, int bus_id) const {
    const Line& l = lines_[line_idx];
    return l.bus_a == bus_id ? l.bus_b : l.bus_a;
  }
  // +1 if beta(line) counts as flow into the bus, -1 otherwise.
  double flow_sign_into(int line_idx, int bus_id) const {
    return lines_[line_idx].bus_b == bus_id ? 1.0 : -1.0;
  }

  // Interior path nodes (strictly between the endpoint buses) per line.
  const std::vector<NodeId>& interior_nodes(int line_idx) const { return interior_[line_idx]; }
  // Distinct interior nodes over all edges incident to the bus (Delta(i)).
  int incident_interior_count(int bus_id) const { return delta_[bus_id - 1]; }

  // All grid cells whose burning can affect the network one step ahead:
  // station balls of radius d_bar + 1 and path nodes with their neighbors.
  NodeSet risk_mask(const GridMap& g) const;

 private:
  std::vector<Bus> buses_;
  std::vector<Line> lines_;
  double station_threshold_;
  std::vector<std::vector<int>> incident_;
  std::vector<std::vector<NodeId>> interior_;
  std::vector<int> delta_;
};

// phi_t and the realized loads/capacities of Eqs. (2)-(4).
struct FunctionalIndicator {
  std::vector<bool> bus_functional;   // index id-1
  std::vector<bool> line_functional;  // index line idx
  std::vector<double> realized_load;
  std::vector<double> realized_capacity;
  std::vector<double> realized_flow_cap;
};

FunctionalIndicator functional_indicator(const PowerNetwork& net, const GridMap& g,
                                         const NodeSet& burning);

// Line-by-bus injection sensitivities, one slack per island.
class PtdfMatrix {
 public:
  PtdfMatrix(int num_lines, int num_buses)
      : num_buses_(num_buses), values_(static_cast<std::size_t>(num_lines) * num_buses, 0.0) {}

  double at(int line_idx, int bus_id) const {
    return values_[static_cast<std::size_t>(line_idx) * num_buses_ + bus_id - 1];
  }
  double& at_mut(int line_idx, int bus_id) {
    return values_[static_cast<std::size_t>(line_idx) * num_buses_ + bus_id - 1];
  }
  const std::vector<int>& island_of_bus() const { return island_of_bus_; }
  const std::vector<int>& slack_of_island() const { return slack_of_island_; }
  std::vector<int>& island_of_bus_mut() { return island_of_bus_; }
  std::vector<int>& slack_of_island_mut() { return slack_of_island_; }

 private:
  int num_buses_;
  std::vector<double> values_;
  std::vector<int> island_of_bus_;    // -1 for failed buses
  std::vector<int> slack_of_island_;
};

// Standard DC PTDF on the surviving topology. Failed lines give zero rows;
// failed buses give zero columns (their load no longer drives flows).
PtdfMatrix compute_ptdf(const PowerNetwork& net, const std::vector<bool>& line_failed,
                        const std::vector<bool>& bus_failed);
PtdfMatrix compute_ptdf(const PowerNetwork& net);

// One-step functional probabilities given the previous burning set and the
// parameters in effect: products of per-node non-ignition and extinguishment
// factors. Station balls use per-area burning-neighbor counts; line
// interiors use the full counts.
std::vector<double> functional_probability_bus(const PowerNetwork& net, const GridMap& g,
                                               const NodeSet& burning_prev,
                                               const SpreadParams& params);
std::vector<double> functional_probability_line(const PowerNetwork& net, const GridMap& g,
                                                const NodeSet& burning_prev,
                                                const SpreadParams& params);

// Independent-Bernoulli weights over subsets of the bus's incident lines.
// Subset bit k corresponds to incident_lines(bus)[k] functioning.
struct ScenarioWeights {
  std::vector<double> rho;  // size 2^degree
};

ScenarioWeights scenario_weights(const PowerNetwork& net, const std::vector<double>& line_prob,
                                 int bus_id);

}  // namespace gridfire
