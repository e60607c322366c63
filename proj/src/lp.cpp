#include "gridfire/lp.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace gridfire::lp {

namespace {

constexpr double kFeasTol = 1e-8;
constexpr double kCostTol = 1e-9;
constexpr double kPivotTol = 1e-9;
constexpr double kDegenerateStep = 1e-11;
constexpr int kDegenerateStreakLimit = 120;

enum class VarStatus : unsigned char { kBasic, kAtLower, kAtUpper, kFreeNonbasic };

struct Tableau {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;  // row-major rows x cols

  double* row(int r) { return data.data() + static_cast<std::size_t>(r) * cols; }
  const double* row(int r) const { return data.data() + static_cast<std::size_t>(r) * cols; }
};

class SimplexEngine {
 public:
  explicit SimplexEngine(const LinearProgram& lp) : lp_(lp) {}

  LpSolution run();

 private:
  void assemble();
  void compute_cost_row(int phase);
  void refine_basic_values();
  bool price(int phase, int& enter, int& dir);
  int ratio_test(int enter, int dir, double& step, int& leave_to_upper);
  void apply_step(int enter, int dir, double step);
  void pivot(int r, int enter);
  bool drive_out_artificials();
  LpSolution extract(SolveStatus status);

  const LinearProgram& lp_;
  int n_ = 0;        // structural variables
  int m_ = 0;        // rows (eq then le)
  int num_eq_ = 0;
  int cols_ = 0;     // structural + slack + artificial
  int art_begin_ = 0;
  double rhs_scale_ = 1.0;
  std::vector<int> art_row_;
  std::vector<double> art_sign_;

  Tableau tab_;
  std::vector<double> rhs_;
  std::vector<double> lower_, upper_;
  std::vector<double> x_;
  std::vector<double> cost_row_;             // reduced costs for current phase
  std::vector<double> phase2_cost_;          // original costs, padded
  std::vector<int> basis_;                   // row -> column
  std::vector<VarStatus> status_;
  std::vector<std::vector<std::pair<int, double>>> row_data_;  // original rows, structural only
  int iterations_ = 0;
  int degenerate_streak_ = 0;
  bool bland_ = false;
};

void SimplexEngine::assemble() {
  n_ = lp_.num_vars;
  num_eq_ = static_cast<int>(lp_.eq_rows.size());
  m_ = num_eq_ + static_cast<int>(lp_.le_rows.size());
  if (static_cast<int>(lp_.objective.size()) != n_ ||
      static_cast<int>(lp_.lower.size()) != n_ || static_cast<int>(lp_.upper.size()) != n_)
    throw std::invalid_argument("lp dimensions inconsistent");
  for (int j = 0; j < n_; ++j) {
    if (!(lp_.lower[j] <= lp_.upper[j])) throw std::invalid_argument("lp bounds crossed");
    if (!std::isfinite(lp_.objective[j])) throw std::invalid_argument("objective must be finite");
  }

  row_data_.resize(m_);
  rhs_.resize(m_);
  for (int r = 0; r < m_; ++r) {
    const LinearRow& src = r < num_eq_ ? lp_.eq_rows[r] : lp_.le_rows[r - num_eq_];
    row_data_[r] = src.coeffs;
    rhs_[r] = src.rhs;
    for (auto [j, v] : src.coeffs)
      if (j < 0 || j >= n_) throw std::invalid_argument("row references unknown variable");
  }

  // Columns: structural, slack per row, artificials appended on demand.
  lower_ = lp_.lower;
  upper_ = lp_.upper;
  x_.assign(n_, 0.0);
  status_.assign(n_, VarStatus::kFreeNonbasic);
  for (int j = 0; j < n_; ++j) {
    if (std::isfinite(lower_[j])) {
      status_[j] = VarStatus::kAtLower;
      x_[j] = lower_[j];
    } else if (std::isfinite(upper_[j])) {
      status_[j] = VarStatus::kAtUpper;
      x_[j] = upper_[j];
    } else {
      status_[j] = VarStatus::kFreeNonbasic;
      x_[j] = 0.0;
    }
  }
  for (int r = 0; r < m_; ++r) {  // slack columns
    const bool eq = r < num_eq_;
    lower_.push_back(0.0);
    upper_.push_back(eq ? 0.0 : kInfinity);
    x_.push_back(0.0);
    status_.push_back(VarStatus::kBasic);
  }

  // Slack values if slacks were basic everywhere.
  std::vector<double> residual(m_);
  for (int r = 0; r < m_; ++r) {
    double ax = 0.0;
    for (auto [j, v] : row_data_[r]) ax += v * x_[j];
    residual[r] = rhs_[r] - ax;
  }

  basis_.resize(m_);
  for (int r = 0; r < m_; ++r) {
    const bool eq = r < num_eq_;
    const bool slack_ok = eq ? std::abs(residual[r]) <= kFeasTol : residual[r] >= -kFeasTol;
    if (slack_ok) {
      basis_[r] = n_ + r;
      x_[n_ + r] = residual[r];
    } else {
      // slack pinned nonbasic at 0; artificial g*e_r becomes basic at |res|
      status_[n_ + r] = VarStatus::kAtLower;
      x_[n_ + r] = 0.0;
      art_row_.push_back(r);
      art_sign_.push_back(residual[r] >= 0.0 ? 1.0 : -1.0);
    }
    rhs_scale_ = std::max(rhs_scale_, std::abs(rhs_[r]));
  }

  art_begin_ = n_ + m_;
  cols_ = art_begin_ + static_cast<int>(art_row_.size());
  tab_.rows = m_;
  tab_.cols = cols_;
  tab_.data.assign(static_cast<std::size_t>(m_) * cols_, 0.0);
  for (int r = 0; r < m_; ++r) {
    double* row = tab_.row(r);
    for (auto [j, v] : row_data_[r]) row[j] += v;
    row[n_ + r] = 1.0;
  }
  for (std::size_t k = 0; k < art_row_.size(); ++k) {
    const int r = art_row_[k];
    const int col = art_begin_ + static_cast<int>(k);
    basis_[r] = col;
    lower_.push_back(0.0);
    upper_.push_back(kInfinity);
    x_.push_back(std::abs(residual[r]));
    status_.push_back(VarStatus::kBasic);
    // Scale the row by the artificial's sign so the basis inverse stays the
    // slack-column block of the tableau.
    if (art_sign_[k] < 0.0) {
      double* row = tab_.row(r);
      for (int j = 0; j < cols_; ++j) row[j] = -row[j];
    }
    tab_.row(r)[col] = 1.0;
  }

  phase2_cost_.assign(cols_, 0.0);
  for (int j = 0; j < n_; ++j) phase2_cost_[j] = lp_.objective[j];
}

void SimplexEngine::compute_cost_row(int phase) {
  cost_row_.assign(cols_, 0.0);
  if (phase == 1) {
    for (int j = art_begin_; j < cols_; ++j) cost_row_[j] = 1.0;
  } else {
    cost_row_ = phase2_cost_;
  }
  // Eliminate basic columns: d = c - c_B * T.
  for (int r = 0; r < m_; ++r) {
    const double cb = cost_row_[basis_[r]];
    if (cb == 0.0) continue;
    const double* row = tab_.row(r);
    for (int j = 0; j < cols_; ++j) cost_row_[j] -= cb * row[j];
  }
  for (int r = 0; r < m_; ++r) cost_row_[basis_[r]] = 0.0;
}

void SimplexEngine::refine_basic_values() {
  // One step of iterative refinement through the basis inverse, which lives
  // in the slack-column block of the tableau.
  std::vector<double> res(m_);
  for (int r = 0; r < m_; ++r) {
    double ax = 0.0;
    for (auto [j, v] : row_data_[r]) ax += v * x_[j];
    ax += x_[n_ + r];  // slack
    res[r] = rhs_[r] - ax;
  }
  for (std::size_t k = 0; k < art_row_.size(); ++k)
    res[art_row_[k]] -= art_sign_[k] * x_[art_begin_ + static_cast<int>(k)];
  for (int r = 0; r < m_; ++r) {
    const double* brow = tab_.row(r);
    double delta = 0.0;
    for (int k = 0; k < m_; ++k) delta += brow[n_ + k] * res[k];
    x_[basis_[r]] += delta;
  }
}

bool SimplexEngine::price(int phase, int& enter, int& dir) {
  (void)phase;
  enter = -1;
  dir = 0;
  double best = kCostTol;
  // Artificials may leave the basis but never re-enter.
  const int limit = art_begin_;
  for (int j = 0; j < limit; ++j) {
    if (status_[j] == VarStatus::kBasic) continue;
    if (lower_[j] == upper_[j]) continue;  // fixed
    const double d = cost_row_[j];
    int candidate_dir = 0;
    if (status_[j] == VarStatus::kAtLower && d < -kCostTol) candidate_dir = 1;
    else if (status_[j] == VarStatus::kAtUpper && d > kCostTol) candidate_dir = -1;
    else if (status_[j] == VarStatus::kFreeNonbasic && std::abs(d) > kCostTol)
      candidate_dir = d < 0.0 ? 1 : -1;
    if (candidate_dir == 0) continue;
    if (bland_) {
      enter = j;
      dir = candidate_dir;
      return true;
    }
    const double score = std::abs(d);
    if (score > best) {
      best = score;
      enter = j;
      dir = candidate_dir;
    }
  }
  return enter >= 0;
}

int SimplexEngine::ratio_test(int enter, int dir, double& step, int& leave_to_upper) {
  double best = kInfinity;
  if (std::isfinite(lower_[enter]) && std::isfinite(upper_[enter]))
    best = upper_[enter] - lower_[enter];
  int leave_row = -1;
  leave_to_upper = -1;
  for (int r = 0; r < m_; ++r) {
    const double coeff = tab_.row(r)[enter];
    if (std::abs(coeff) <= kPivotTol) continue;
    const int k = basis_[r];
    const double rate = dir * coeff;  // x_k decreases at this rate
    double limit;
    int to_upper;
    if (rate > 0.0) {
      if (!std::isfinite(lower_[k])) continue;
      limit = (x_[k] - lower_[k]) / rate;
      to_upper = 0;
    } else {
      if (!std::isfinite(upper_[k])) continue;
      limit = (upper_[k] - x_[k]) / (-rate);
      to_upper = 1;
    }
    if (limit < 0.0) limit = 0.0;
    const bool better =
        limit < best - 1e-12 ||
        (limit < best + 1e-12 && leave_row >= 0 &&
         (bland_ ? basis_[r] < basis_[leave_row]
                 : std::abs(coeff) > std::abs(tab_.row(leave_row)[enter])));
    if (leave_row < 0 ? limit < best : better) {
      best = limit;
      leave_row = r;
      leave_to_upper = to_upper;
    }
  }
  step = best;
  return leave_row;
}

void SimplexEngine::apply_step(int enter, int dir, double step) {
  if (step == 0.0) return;
  x_[enter] += dir * step;
  for (int r = 0; r < m_; ++r) {
    const double coeff = tab_.row(r)[enter];
    if (coeff != 0.0) x_[basis_[r]] -= dir * step * coeff;
  }
}

void SimplexEngine::pivot(int r, int enter) {
  double* prow = tab_.row(r);
  const double inv = 1.0 / prow[enter];
  for (int j = 0; j < cols_; ++j) prow[j] *= inv;
  prow[enter] = 1.0;  // exact
  for (int i = 0; i < m_; ++i) {
    if (i == r) continue;
    double* row = tab_.row(i);
    const double factor = row[enter];
    if (factor == 0.0) continue;
    for (int j = 0; j < cols_; ++j) row[j] -= factor * prow[j];
    row[enter] = 0.0;
  }
  const double cfactor = cost_row_[enter];
  if (cfactor != 0.0) {
    for (int j = 0; j < cols_; ++j) cost_row_[j] -= cfactor * prow[j];
    cost_row_[enter] = 0.0;
  }
  basis_[r] = enter;
}

bool SimplexEngine::drive_out_artificials() {
  for (int r = 0; r < m_; ++r) {
    if (basis_[r] < art_begin_) continue;
    if (std::abs(x_[basis_[r]]) > kFeasTol) return false;
    const double* row = tab_.row(r);
    int pick = -1;
    double best = kPivotTol * 10;
    for (int j = 0; j < art_begin_; ++j) {
      if (status_[j] == VarStatus::kBasic) continue;
      if (std::abs(row[j]) > best) {
        best = std::abs(row[j]);
        pick = j;
      }
    }
    if (pick >= 0) {
      const int old = basis_[r];
      const VarStatus entering_was = status_[pick];
      pivot(r, pick);
      status_[pick] = VarStatus::kBasic;
      x_[pick] = entering_was == VarStatus::kAtUpper ? upper_[pick]
                : entering_was == VarStatus::kAtLower ? lower_[pick]
                                                      : 0.0;
      status_[old] = VarStatus::kAtLower;
      x_[old] = 0.0;
    }
    // Redundant row: artificial stays basic at zero, pinned below.
  }
  // Pin every artificial so phase 2 cannot move them.
  for (int k = art_begin_; k < cols_; ++k) {
    lower_[k] = 0.0;
    upper_[k] = 0.0;
  }
  return true;
}

LpSolution SimplexEngine::extract(SolveStatus status) {
  LpSolution sol;
  sol.status = status;
  sol.iterations = iterations_;
  sol.x.assign(x_.begin(), x_.begin() + n_);
  double obj = 0.0;
  for (int j = 0; j < n_; ++j) obj += lp_.objective[j] * sol.x[j];
  sol.objective = obj;

  if (status == SolveStatus::kOptimal || status == SolveStatus::kNumericalTrouble) {
    //  y = c_B * B^{-1}; the basis inverse is the slack-column block.
    std::vector<double> y(m_, 0.0);
    for (int r = 0; r < m_; ++r) {
      const double cb = phase2_cost_[basis_[r]];
      if (cb == 0.0) continue;
      const double* row = tab_.row(r);
      for (int k = 0; k < m_; ++k) y[k] += cb * row[n_ + k];
    }
    sol.row_duals = y;
    sol.reduced_costs.assign(n_, 0.0);
    for (int j = 0; j < n_; ++j) sol.reduced_costs[j] = lp_.objective[j];
    for (int r = 0; r < m_; ++r)
      for (auto [j, v] : row_data_[r]) sol.reduced_costs[j] -= y[r] * v;

    double max_res = 0.0;
    for (int r = 0; r < m_; ++r) {
      double ax = 0.0;
      for (auto [j, v] : row_data_[r]) ax += v * sol.x[j];
      const double scale = 1.0 + std::abs(rhs_[r]);
      if (r < num_eq_)
        max_res = std::max(max_res, std::abs(ax - rhs_[r]) / scale);
      else
        max_res = std::max(max_res, std::max(0.0, ax - rhs_[r]) / scale);
    }
    for (int j = 0; j < n_; ++j) {
      const double scale = 1.0 + std::abs(sol.x[j]);
      if (std::isfinite(lp_.lower[j]))
        max_res = std::max(max_res, (lp_.lower[j] - sol.x[j]) / scale);
      if (std::isfinite(lp_.upper[j]))
        max_res = std::max(max_res, (sol.x[j] - lp_.upper[j]) / scale);
    }
    sol.max_residual = max_res;
    if (status == SolveStatus::kOptimal && max_res > 1e-7)
      sol.status = SolveStatus::kNumericalTrouble;
  }
  return sol;
}

LpSolution SimplexEngine::run() {
  assemble();
  const int iteration_limit = 2000 + 200 * (m_ + cols_);

  for (int phase = (cols_ > art_begin_ ? 1 : 2); phase <= 2; ++phase) {
    compute_cost_row(phase);
    int since_recompute = 0;
    while (true) {
      int enter, dir;
      if (!price(phase, enter, dir)) break;
      double step;
      int to_upper;
      const int leave_row = ratio_test(enter, dir, step, to_upper);
      if (leave_row < 0 && !std::isfinite(step)) {
        if (phase == 1) return extract(SolveStatus::kNumericalTrouble);
        return extract(SolveStatus::kUnbounded);
      }
      ++iterations_;
      if (iterations_ > iteration_limit) return extract(SolveStatus::kNumericalTrouble);
      degenerate_streak_ = step < kDegenerateStep ? degenerate_streak_ + 1 : 0;
      if (degenerate_streak_ > kDegenerateStreakLimit) bland_ = true;

      apply_step(enter, dir, step);
      if (leave_row < 0) {
        // Bound flip: the entering variable ran to its other bound.
        status_[enter] = dir > 0 ? VarStatus::kAtUpper : VarStatus::kAtLower;
        x_[enter] = dir > 0 ? upper_[enter] : lower_[enter];
      } else {
        const int leaving = basis_[leave_row];
        pivot(leave_row, enter);
        status_[enter] = VarStatus::kBasic;
        status_[leaving] = to_upper ? VarStatus::kAtUpper : VarStatus::kAtLower;
        x_[leaving] = to_upper ? upper_[leaving] : lower_[leaving];
      }
      if (++since_recompute >= 500) {
        compute_cost_row(phase);
        refine_basic_values();
        since_recompute = 0;
      }
    }

    if (phase == 1) {
      refine_basic_values();
      double infeasibility = 0.0;
      for (int k = art_begin_; k < cols_; ++k) infeasibility += std::max(0.0, x_[k]);
      if (infeasibility > kFeasTol * rhs_scale_) return extract(SolveStatus::kInfeasible);
      if (!drive_out_artificials()) return extract(SolveStatus::kInfeasible);
    }
  }
  refine_basic_values();
  return extract(SolveStatus::kOptimal);
}

}  // namespace

const char* to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::kOptimal: return "optimal";
    case SolveStatus::kInfeasible: return "infeasible";
    case SolveStatus::kUnbounded: return "unbounded";
    case SolveStatus::kNumericalTrouble: return "numerical-trouble";
  }
  return "unknown";
}

LpSolution SimplexSolver::solve(const LinearProgram& lp) const {
  SimplexEngine engine(lp);
  return engine.run();
}

const LpSolver& default_solver() {
  static const SimplexSolver solver;
  return solver;
}

void write_mps(const LinearProgram& lp, const std::string& name, std::ostream& out) {
  out << "NAME          " << name << "\n";
  out << "ROWS\n N  COST\n";
  for (std::size_t r = 0; r < lp.eq_rows.size(); ++r) out << " E  EQ" << r << "\n";
  for (std::size_t r = 0; r < lp.le_rows.size(); ++r) out << " L  LE" << r << "\n";
  out << "COLUMNS\n";
  for (int j = 0; j < lp.num_vars; ++j) {
    auto entry = [&](const std::string& row, double v) {
      out << "    X" << j << "  " << row << "  " << v << "\n";
    };
    if (lp.objective[j] != 0.0) entry("COST", lp.objective[j]);
    for (std::size_t r = 0; r < lp.eq_rows.size(); ++r)
      for (auto [col, v] : lp.eq_rows[r].coeffs)
        if (col == j) entry("EQ" + std::to_string(r), v);
    for (std::size_t r = 0; r < lp.le_rows.size(); ++r)
      for (auto [col, v] : lp.le_rows[r].coeffs)
        if (col == j) entry("LE" + std::to_string(r), v);
  }
  out << "RHS\n";
  for (std::size_t r = 0; r < lp.eq_rows.size(); ++r)
    if (lp.eq_rows[r].rhs != 0.0) out << "    RHS  EQ" << r << "  " << lp.eq_rows[r].rhs << "\n";
  for (std::size_t r = 0; r < lp.le_rows.size(); ++r)
    if (lp.le_rows[r].rhs != 0.0) out << "    RHS  LE" << r << "  " << lp.le_rows[r].rhs << "\n";
  out << "BOUNDS\n";
  for (int j = 0; j < lp.num_vars; ++j) {
    if (std::isfinite(lp.lower[j]) && lp.lower[j] != 0.0)
      out << " LO BND  X" << j << "  " << lp.lower[j] << "\n";
    if (!std::isfinite(lp.lower[j])) out << " MI BND  X" << j << "\n";
    if (std::isfinite(lp.upper[j])) out << " UP BND  X" << j << "  " << lp.upper[j] << "\n";
  }
  out << "ENDATA\n";
}

}  // namespace gridfire::lp
