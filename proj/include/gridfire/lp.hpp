#pragma once

#include <iosfwd>
#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace gridfire::lp {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

struct LinearRow {
  std::vector<std::pair<int, double>> coeffs;  // (variable index, coefficient)
  double rhs = 0.0;
};

// min c'x  s.t.  A_eq x = b_eq,  A_le x <= b_le,  l <= x <= u
struct LinearProgram {
  int num_vars = 0;
  std::vector<double> objective;
  std::vector<LinearRow> eq_rows;
  std::vector<LinearRow> le_rows;
  std::vector<double> lower;
  std::vector<double> upper;

  int add_variable(double cost, double lo, double hi) {
    objective.push_back(cost);
    lower.push_back(lo);
    upper.push_back(hi);
    return num_vars++;
  }
};

enum class SolveStatus { kOptimal, kInfeasible, kUnbounded, kNumericalTrouble };

const char* to_string(SolveStatus status);

struct LpSolution {
  SolveStatus status = SolveStatus::kNumericalTrouble;
  std::vector<double> x;
  double objective = 0.0;
  // Duals from the final basis: one per row (eq rows first, then le rows),
  // and reduced costs per structural variable.
  std::vector<double> row_duals;
  std::vector<double> reduced_costs;
  int iterations = 0;
  double max_residual = 0.0;
};

// Pluggable backend; the bundled simplex is the default and the test target.
class LpSolver {
 public:
  virtual ~LpSolver() = default;
  virtual LpSolution solve(const LinearProgram& lp) const = 0;
};

// Dense two-phase primal simplex with bounded variables. Dantzig pricing with
// a Bland's-rule fallback once a degeneracy streak trips; deterministic
// pivot order throughout.
class SimplexSolver final : public LpSolver {
 public:
  LpSolution solve(const LinearProgram& lp) const override;
};

const LpSolver& default_solver();

inline LpSolution solve_lp(const LinearProgram& lp) { return default_solver().solve(lp); }

// Fixed-format MPS dump for cross-checking against external solvers.
void write_mps(const LinearProgram& lp, const std::string& name, std::ostream& out);

}  // namespace gridfire::lp
