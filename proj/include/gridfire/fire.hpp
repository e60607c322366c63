#pragma once

#include <iosfwd>
#include <vector>

#include "gridfire/grid.hpp"
#include "gridfire/rng.hpp"

namespace gridfire {

// Burning set B_t at the start of one period.
struct FireState {
  NodeSet burning;
  int t = 1;
};

// Per-area spread (p+) and containment (p-) probabilities, indices 0..H-1
// for areas 1..H.
struct SpreadParams {
  std::vector<double> p_plus;
  std::vector<double> p_minus;

  void validate(int num_areas) const;
};

// Piecewise-constant parameter paths. Segment s of stream (h, +/-) covers
// [change_times[s], change_times[s+1]); the first segment starts at t = 1.
class ParamSchedule {
 public:
  ParamSchedule(int num_areas, std::vector<std::vector<int>> change_times_plus,
                std::vector<std::vector<double>> values_plus,
                std::vector<std::vector<int>> change_times_minus,
                std::vector<std::vector<double>> values_minus);

  static ParamSchedule constant(const SpreadParams& params, int num_areas);

  int num_areas() const { return num_areas_; }
  double p_plus_at(int area, int t) const { return value_at(change_times_plus_, values_plus_, area, t); }
  double p_minus_at(int area, int t) const { return value_at(change_times_minus_, values_minus_, area, t); }
  SpreadParams params_at(int t) const;

  const std::vector<int>& change_times_plus(int area) const { return change_times_plus_[area - 1]; }
  const std::vector<int>& change_times_minus(int area) const { return change_times_minus_[area - 1]; }

 private:
  static double value_at(const std::vector<std::vector<int>>& times,
                         const std::vector<std::vector<double>>& values, int area, int t);

  int num_areas_;
  std::vector<std::vector<int>> change_times_plus_;    // per area, sorted, first entry 1
  std::vector<std::vector<double>> values_plus_;       // per area, one per segment
  std::vector<std::vector<int>> change_times_minus_;
  std::vector<std::vector<double>> values_minus_;
};

struct ValueRange {
  double lo = 0.0;
  double hi = 1.0;
};

// Probability that a node with m burning neighbors ignites: 1 - (1-p)^m.
double ignition_probability(int m, double p_plus);

// One period: (1) every non-burning node with burning neighbors ignites
// independently, (2) every node burning at the start of the period is
// extinguished independently. Newly ignited nodes are not extinguished in the
// same period.
FireState step_fire(const GridMap& g, const FireState& state, const SpreadParams& params,
                    Rng& rng);

// Random piecewise-constant schedule: per area and stream, `num_changes`
// change times drawn without replacement from {2..T}, values uniform in the
// given ranges (initial segment included).
ParamSchedule generate_schedule(int num_areas, int horizon, int num_changes_plus,
                                int num_changes_minus, ValueRange p_plus_range,
                                ValueRange p_minus_range, Rng& rng);

// B_1 = origins, then T-1 applications of step_fire under the schedule.
std::vector<FireState> simulate_trajectory(const GridMap& g, const std::vector<NodeId>& origins,
                                           const ParamSchedule& schedule, int horizon, Rng& rng);

// CSV rows (t, count, "x,y;x,y;...").
void write_trajectory_csv(const GridMap& g, const std::vector<FireState>& trajectory,
                          std::ostream& out);

}  // namespace gridfire
