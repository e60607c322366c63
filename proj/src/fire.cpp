#include "gridfire/fire.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <stdexcept>

namespace gridfire {

void SpreadParams::validate(int num_areas) const {
  if (static_cast<int>(p_plus.size()) != num_areas ||
      static_cast<int>(p_minus.size()) != num_areas)
    throw std::invalid_argument("spread parameter vectors must have one entry per area");
  for (double p : p_plus)
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("p+ outside [0,1]");
  for (double p : p_minus)
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("p- outside [0,1]");
}

ParamSchedule::ParamSchedule(int num_areas, std::vector<std::vector<int>> change_times_plus,
                             std::vector<std::vector<double>> values_plus,
                             std::vector<std::vector<int>> change_times_minus,
                             std::vector<std::vector<double>> values_minus)
    : num_areas_(num_areas), change_times_plus_(std::move(change_times_plus)),
      values_plus_(std::move(values_plus)), change_times_minus_(std::move(change_times_minus)),
      values_minus_(std::move(values_minus)) {
  auto check = [num_areas](const std::vector<std::vector<int>>& times,
                           const std::vector<std::vector<double>>& values) {
    if (static_cast<int>(times.size()) != num_areas ||
        static_cast<int>(values.size()) != num_areas)
      throw std::invalid_argument("schedule must cover every area");
    for (int h = 0; h < num_areas; ++h) {
      if (times[h].empty() || times[h].front() != 1)
        throw std::invalid_argument("first segment must start at t=1");
      if (!std::is_sorted(times[h].begin(), times[h].end()))
        throw std::invalid_argument("change times must be sorted");
      if (times[h].size() != values[h].size())
        throw std::invalid_argument("one value per segment required");
    }
  };
  check(change_times_plus_, values_plus_);
  check(change_times_minus_, values_minus_);
}

ParamSchedule ParamSchedule::constant(const SpreadParams& params, int num_areas) {
  params.validate(num_areas);
  std::vector<std::vector<int>> times(num_areas, std::vector<int>{1});
  std::vector<std::vector<double>> vp(num_areas), vm(num_areas);
  for (int h = 0; h < num_areas; ++h) {
    vp[h] = {params.p_plus[h]};
    vm[h] = {params.p_minus[h]};
  }
  return ParamSchedule(num_areas, times, vp, std::vector<std::vector<int>>(times), vm);
}

double ParamSchedule::value_at(const std::vector<std::vector<int>>& times,
                               const std::vector<std::vector<double>>& values, int area, int t) {
  const auto& ts = times[area - 1];
  const auto it = std::upper_bound(ts.begin(), ts.end(), t);
  const std::size_t seg = static_cast<std::size_t>(it - ts.begin()) - 1;
  return values[area - 1][seg];
}

SpreadParams ParamSchedule::params_at(int t) const {
  SpreadParams p;
  p.p_plus.resize(num_areas_);
  p.p_minus.resize(num_areas_);
  for (int h = 1; h <= num_areas_; ++h) {
    p.p_plus[h - 1] = p_plus_at(h, t);
    p.p_minus[h - 1] = p_minus_at(h, t);
  }
  return p;
}

double ignition_probability(int m, double p_plus) {
  if (m <= 0) return 0.0;
  if (m == 1) return p_plus;
  return 1.0 - std::pow(1.0 - p_plus, m);
}

FireState step_fire(const GridMap& g, const FireState& state, const SpreadParams& params,
                    Rng& rng) {
  params.validate(g.num_areas());
  const NodeSet& burning = state.burning;

  // Ignition probability by (area, burning-neighbor count) for this step.
  const int H = g.num_areas();
  std::vector<double> ignite(static_cast<std::size_t>(H) * 9);
  for (int h = 0; h < H; ++h)
    for (int m = 0; m <= 8; ++m)
      ignite[h * 9 + m] = ignition_probability(m, params.p_plus[h]);

  NodeSet ignited(g);
  burning.neighbors().for_each([&](int pos) {
    const int m = burning_neighbor_count(g, burning, pos);
    const double p = ignite[(g.area_of_pos(pos) - 1) * 9 + m];
    if (rng.uniform01() < p) ignited.set(pos);
  });

  NodeSet next = burning;
  burning.for_each([&](int pos) {
    if (rng.uniform01() < params.p_minus[g.area_of_pos(pos) - 1]) next.reset(pos);
  });
  next |= ignited;
  return FireState{std::move(next), state.t + 1};
}

ParamSchedule generate_schedule(int num_areas, int horizon, int num_changes_plus,
                                int num_changes_minus, ValueRange p_plus_range,
                                ValueRange p_minus_range, Rng& rng) {
  if (num_changes_plus >= horizon || num_changes_minus >= horizon)
    throw std::invalid_argument("number of change points must be below the horizon");
  auto draw_times = [&](int count) {
    // Partial Fisher-Yates over {2..T}.
    std::vector<int> pool(horizon - 1);
    std::iota(pool.begin(), pool.end(), 2);
    std::vector<int> times{1};
    for (int k = 0; k < count; ++k) {
      const std::size_t j = k + rng.uniform_below(pool.size() - k);
      std::swap(pool[k], pool[j]);
      times.push_back(pool[k]);
    }
    std::sort(times.begin(), times.end());
    return times;
  };
  auto draw_values = [&](std::size_t count, ValueRange range) {
    std::vector<double> values(count);
    for (double& v : values) v = rng.uniform(range.lo, range.hi);
    return values;
  };

  std::vector<std::vector<int>> tp(num_areas), tm(num_areas);
  std::vector<std::vector<double>> vp(num_areas), vm(num_areas);
  for (int h = 0; h < num_areas; ++h) {
    tp[h] = draw_times(num_changes_plus);
    vp[h] = draw_values(tp[h].size(), p_plus_range);
    tm[h] = draw_times(num_changes_minus);
    vm[h] = draw_values(tm[h].size(), p_minus_range);
  }
  return ParamSchedule(num_areas, std::move(tp), std::move(vp), std::move(tm), std::move(vm));
}

std::vector<FireState> simulate_trajectory(const GridMap& g, const std::vector<NodeId>& origins,
                                           const ParamSchedule& schedule, int horizon, Rng& rng) {
  if (origins.empty()) throw std::invalid_argument("at least one fire origin required");
  FireState state;
  state.burning = NodeSet(g);
  state.t = 1;
  for (const NodeId o : origins) {
    g.require_in_grid(o);
    state.burning.set(g.pos_of(o));
  }
  std::vector<FireState> trajectory;
  trajectory.reserve(horizon);
  trajectory.push_back(state);
  for (int t = 1; t < horizon; ++t)
    trajectory.push_back(step_fire(g, trajectory.back(), schedule.params_at(t), rng));
  return trajectory;
}

void write_trajectory_csv(const GridMap& g, const std::vector<FireState>& trajectory,
                          std::ostream& out) {
  out << "t,count,cells\n";
  for (const FireState& s : trajectory) {
    out << s.t << ',' << s.burning.count() << ",\"";
    bool first = true;
    s.burning.for_each([&](int pos) {
      const NodeId n = g.node_at(pos);
      if (!first) out << ';';
      out << n.x << ',' << n.y;
      first = false;
    });
    out << "\"\n";
  }
}

}  // namespace gridfire
