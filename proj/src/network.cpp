#include "gridfire/network.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace gridfire {

bool is_generator(BusKind kind) { return kind != BusKind::kConsumer; }

const char* to_string(BusKind kind) {
  switch (kind) {
    case BusKind::kConsumer: return "consumer";
    case BusKind::kGas: return "gas";
    case BusKind::kBiomass: return "biomass";
    case BusKind::kPv: return "pv";
    case BusKind::kWind: return "wind";
    case BusKind::kFossil: return "fossil";
    case BusKind::kRenewable: return "renewable";
  }
  return "unknown";
}

BusKind bus_kind_from_string(const std::string& token) {
  if (token == "consumer") return BusKind::kConsumer;
  if (token == "gas") return BusKind::kGas;
  if (token == "biomass") return BusKind::kBiomass;
  if (token == "pv") return BusKind::kPv;
  if (token == "wind") return BusKind::kWind;
  if (token == "fossil") return BusKind::kFossil;
  if (token == "renewable") return BusKind::kRenewable;
  throw std::invalid_argument("unknown bus kind: " + token);
}

PowerNetwork::PowerNetwork(std::vector<Bus> buses, std::vector<Line> lines,
                           double station_threshold, const GridMap& grid, int degree_cap)
    : buses_(std::move(buses)), lines_(std::move(lines)), station_threshold_(station_threshold) {
  if (buses_.empty()) throw std::invalid_argument("network needs at least one bus");
  std::set<std::pair<int, int>> bus_nodes_seen;
  for (std::size_t i = 0; i < buses_.size(); ++i) {
    Bus& b = buses_[i];
    if (b.id != static_cast<int>(i) + 1) throw std::invalid_argument("bus ids must be dense 1..n");
    grid.require_in_grid(b.node);
    if (!is_generator(b.kind) && b.capacity != 0.0)
      throw std::invalid_argument("consumers must have zero capacity");
    if (b.capacity < 0.0 || b.load < 0.0) throw std::invalid_argument("negative load/capacity");
    if (!bus_nodes_seen.insert({b.node.x, b.node.y}).second)
      throw std::invalid_argument("two buses share a grid node");
  }

  incident_.resize(buses_.size());
  interior_.resize(lines_.size());
  std::set<std::pair<int, int>> pairs;
  for (std::size_t idx = 0; idx < lines_.size(); ++idx) {
    Line& l = lines_[idx];
    l.id = static_cast<int>(idx);
    if (l.bus_a < 1 || l.bus_a > num_buses() || l.bus_b < 1 || l.bus_b > num_buses() ||
        l.bus_a == l.bus_b)
      throw std::invalid_argument("line endpoints invalid");
    if (l.reactance <= 0.0) throw std::invalid_argument("reactance must be positive");
    const auto key = std::minmax(l.bus_a, l.bus_b);
    if (!pairs.insert(key).second)
      throw std::invalid_argument("parallel lines between one bus pair are not supported");
    if (l.path.size() < 2) throw std::invalid_argument("line path must include both endpoints");
    if (!(l.path.front() == bus(l.bus_a).node) || !(l.path.back() == bus(l.bus_b).node))
      throw std::invalid_argument("line path endpoints must match the bus coordinates");
    for (std::size_t k = 0; k < l.path.size(); ++k) {
      grid.require_in_grid(l.path[k]);
      if (k > 0 && distance(l.path[k - 1], l.path[k]) != 1)
        throw std::invalid_argument("line path must step by Chebyshev distance 1");
    }
    for (std::size_t k = 1; k + 1 < l.path.size(); ++k) {
      if (bus_nodes_seen.count({l.path[k].x, l.path[k].y}))
        throw std::invalid_argument("line path interior crosses a bus node");
      interior_[idx].push_back(l.path[k]);
    }
    incident_[l.bus_a - 1].push_back(static_cast<int>(idx));
    incident_[l.bus_b - 1].push_back(static_cast<int>(idx));
  }
  for (std::size_t i = 0; i < buses_.size(); ++i) {
    if (static_cast<int>(incident_[i].size()) > degree_cap)
      throw std::invalid_argument(
          "bus " + std::to_string(i + 1) + " exceeds the scenario degree cap (" +
          std::to_string(degree_cap) +
          "); raise degree_cap only if 2^degree scenario enumeration is acceptable");
  }

  delta_.resize(buses_.size());
  for (std::size_t i = 0; i < buses_.size(); ++i) {
    std::set<std::pair<int, int>> nodes;
    for (int idx : incident_[i])
      for (const NodeId n : interior_[idx]) nodes.insert({n.x, n.y});
    delta_[i] = static_cast<int>(nodes.size());
  }
}

PowerNetwork PowerNetwork::parse(std::istream& in, double station_threshold, const GridMap& grid,
                                 int degree_cap) {
  std::vector<Bus> buses;
  std::vector<Line> lines;
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    std::istringstream ls(raw);
    std::string tag;
    if (!(ls >> tag)) continue;
    try {
      if (tag == "bus") {
        Bus b;
        std::string kind;
        if (!(ls >> b.id >> b.node.x >> b.node.y >> kind >> b.load >> b.capacity >> b.gen_cost))
          throw std::invalid_argument("bus record needs: id x y kind load capacity gencost");
        b.kind = bus_kind_from_string(kind);
        buses.push_back(b);
      } else if (tag == "line") {
        Line l;
        if (!(ls >> l.bus_a >> l.bus_b >> l.reactance >> l.flow_cap >> l.line_cost))
          throw std::invalid_argument("line record needs: busA busB reactance flowcap linecost path...");
        std::string pair;
        while (ls >> pair) {
          const auto comma = pair.find(',');
          if (comma == std::string::npos) throw std::invalid_argument("path entries are x,y");
          l.path.push_back(NodeId{std::stoi(pair.substr(0, comma)),
                                  std::stoi(pair.substr(comma + 1))});
        }
        lines.push_back(std::move(l));
      } else {
        throw std::invalid_argument("unknown record tag: " + tag);
      }
    } catch (const std::exception& e) {
      throw std::invalid_argument("network file line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return PowerNetwork(std::move(buses), std::move(lines), station_threshold, grid, degree_cap);
}

PowerNetwork PowerNetwork::load_file(const std::string& path, double station_threshold,
                                     const GridMap& grid, int degree_cap) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open network file: " + path);
  return parse(in, station_threshold, grid, degree_cap);
}

NodeSet PowerNetwork::risk_mask(const GridMap& g) const {
  NodeSet mask(g);
  const int radius = static_cast<int>(std::floor(station_threshold_)) + 1;
  for (const Bus& b : buses_) {
    mask.set(g.pos_of(b.node));
    for (int r = 1; r <= radius; ++r)
      for (const NodeId n : k_neighbors(g, b.node, r)) mask.set(g.pos_of(n));
  }
  NodeSet paths(g);
  for (const auto& nodes : interior_)
    for (const NodeId n : nodes) paths.set(g.pos_of(n));
  mask |= paths.dilated();
  return mask;
}

FunctionalIndicator functional_indicator(const PowerNetwork& net, const GridMap& g,
                                         const NodeSet& burning) {
  FunctionalIndicator out;
  out.bus_functional.resize(net.num_buses());
  out.line_functional.resize(net.num_lines());
  out.realized_load.resize(net.num_buses());
  out.realized_capacity.resize(net.num_buses());
  out.realized_flow_cap.resize(net.num_lines());

  const int d_bar = static_cast<int>(std::floor(net.station_threshold()));
  for (const Bus& b : net.buses()) {
    // functional iff no burning node within distance d_bar (inclusive)
    bool ok = !burning.test(g.pos_of(b.node));
    for (int r = 1; ok && r <= d_bar; ++r)
      for (const NodeId n : k_neighbors(g, b.node, r))
        if (burning.test(g.pos_of(n))) {
          ok = false;
          break;
        }
    out.bus_functional[b.id - 1] = ok;
    out.realized_load[b.id - 1] = ok ? b.load : 0.0;
    out.realized_capacity[b.id - 1] = ok ? b.capacity : 0.0;
  }
  for (const Line& l : net.lines()) {
    bool ok = true;
    for (const NodeId n : net.interior_nodes(l.id))
      if (burning.test(g.pos_of(n))) {
        ok = false;
        break;
      }
    out.line_functional[l.id] = ok;
    out.realized_flow_cap[l.id] = ok ? l.flow_cap : 0.0;
  }
  return out;
}

PtdfMatrix compute_ptdf(const PowerNetwork& net, const std::vector<bool>& line_failed,
                        const std::vector<bool>& bus_failed) {
  const int nb = net.num_buses();
  const int nl = net.num_lines();
  PtdfMatrix ptdf(nl, nb);

  // Islands over surviving buses and lines.
  std::vector<int>& island = ptdf.island_of_bus_mut();
  island.assign(nb, -1);
  int num_islands = 0;
  for (int start = 1; start <= nb; ++start) {
    if (bus_failed[start - 1] || island[start - 1] >= 0) continue;
    const int id = num_islands++;
    std::vector<int> stack{start};
    island[start - 1] = id;
    while (!stack.empty()) {
      const int u = stack.back();
      stack.pop_back();
      for (int le : net.incident_lines(u)) {
        if (line_failed[le]) continue;
        const int v = net.other_end(le, u);
        if (bus_failed[v - 1] || island[v - 1] >= 0) continue;
        island[v - 1] = id;
        stack.push_back(v);
      }
    }
  }
  std::vector<int>& slack = ptdf.slack_of_island_mut();
  slack.assign(num_islands, 0);
  for (int id = 0; id < num_islands; ++id)
    for (int b = 1; b <= nb; ++b)
      if (island[b - 1] == id) {
        slack[id] = b;  // lowest surviving index
        break;
      }

  for (int id = 0; id < num_islands; ++id) {
    std::vector<int> members;
    for (int b = 1; b <= nb; ++b)
      if (island[b - 1] == id && b != slack[id]) members.push_back(b);
    if (members.empty()) continue;  // single-bus island: no lines
    const int nr = static_cast<int>(members.size());
    std::vector<int> row_of(nb + 1, -1);
    for (int r = 0; r < nr; ++r) row_of[members[r]] = r;

    // Reduced susceptance Laplacian over the island, slack removed.
    Eigen::MatrixXd lap = Eigen::MatrixXd::Zero(nr, nr);
    for (const Line& l : net.lines()) {
      if (line_failed[l.id]) continue;
      if (island[l.bus_a - 1] != id || island[l.bus_b - 1] != id) continue;
      const double b_susc = 1.0 / l.reactance;
      const int ra = row_of[l.bus_a], rb = row_of[l.bus_b];
      if (ra >= 0) lap(ra, ra) += b_susc;
      if (rb >= 0) lap(rb, rb) += b_susc;
      if (ra >= 0 && rb >= 0) {
        lap(ra, rb) -= b_susc;
        lap(rb, ra) -= b_susc;
      }
    }
    const Eigen::FullPivLU<Eigen::MatrixXd> lu(lap);
    if (!lu.isInvertible())
      throw std::runtime_error("singular island Laplacian in PTDF computation");
    const Eigen::MatrixXd inv = lu.inverse();

    // theta(k) column = B^-1 e_k; PTDF(l, k) = b_l (theta_a - theta_b).
    for (const Line& l : net.lines()) {
      if (line_failed[l.id]) continue;
      if (island[l.bus_a - 1] != id || island[l.bus_b - 1] != id) continue;
      const double b_susc = 1.0 / l.reactance;
      const int ra = row_of[l.bus_a], rb = row_of[l.bus_b];
      for (int k = 0; k < nr; ++k) {
        const double theta_a = ra >= 0 ? inv(ra, k) : 0.0;
        const double theta_b = rb >= 0 ? inv(rb, k) : 0.0;
        ptdf.at_mut(l.id, members[k]) = b_susc * (theta_a - theta_b);
      }
    }
  }
  return ptdf;
}

PtdfMatrix compute_ptdf(const PowerNetwork& net) {
  return compute_ptdf(net, std::vector<bool>(net.num_lines(), false),
                      std::vector<bool>(net.num_buses(), false));
}

std::vector<double> functional_probability_bus(const PowerNetwork& net, const GridMap& g,
                                               const NodeSet& burning_prev,
                                               const SpreadParams& params) {
  params.validate(g.num_areas());
  const int d_bar = static_cast<int>(std::floor(net.station_threshold()));
  std::vector<double> out(net.num_buses(), 1.0);
  for (const Bus& b : net.buses()) {
    double prob = 1.0;
    for (int r = 1; r <= d_bar; ++r) {
      for (const NodeId j : k_neighbors(g, b.node, r)) {
        const int pos = g.pos_of(j);
        const int h = g.area_of_pos(pos);
        if (burning_prev.test(pos)) {
          prob *= params.p_minus[h - 1];
        } else {
          // burning neighbors of j within the same area
          int m = 0;
          for (const NodeId adj : neighbors1(g, j)) {
            const int apos = g.pos_of(adj);
            if (burning_prev.test(apos) && g.area_of_pos(apos) == h) ++m;
          }
          if (m > 0) prob *= std::pow(1.0 - params.p_plus[h - 1], m);
        }
      }
    }
    out[b.id - 1] = prob;
  }
  return out;
}

std::vector<double> functional_probability_line(const PowerNetwork& net, const GridMap& g,
                                                const NodeSet& burning_prev,
                                                const SpreadParams& params) {
  params.validate(g.num_areas());
  std::vector<double> out(net.num_lines(), 1.0);
  for (const Line& l : net.lines()) {
    double prob = 1.0;
    for (const NodeId n : net.interior_nodes(l.id)) {
      const int pos = g.pos_of(n);
      const int h = g.area_of_pos(pos);
      if (burning_prev.test(pos)) {
        prob *= params.p_minus[h - 1];
      } else {
        const int m = burning_neighbor_count(g, burning_prev, pos);
        if (m > 0) prob *= std::pow(1.0 - params.p_plus[h - 1], m);
      }
    }
    out[l.id] = prob;
  }
  return out;
}

ScenarioWeights scenario_weights(const PowerNetwork& net, const std::vector<double>& line_prob,
                                 int bus_id) {
  const auto& incident = net.incident_lines(bus_id);
  const int deg = static_cast<int>(incident.size());
  ScenarioWeights out;
  out.rho.assign(std::size_t{1} << deg, 0.0);
  for (std::uint32_t subset = 0; subset < out.rho.size(); ++subset) {
    double w = 1.0;
    for (int k = 0; k < deg; ++k) {
      const double p = line_prob[incident[k]];
      w *= (subset >> k) & 1u ? p : 1.0 - p;
    }
    out.rho[subset] = w;
  }
  return out;
}

}  // namespace gridfire
