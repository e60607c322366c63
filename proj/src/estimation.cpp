#include "gridfire/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace gridfire {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Golden-section search for the maximum of a unimodal function on [lo, hi].
template <typename F>
double golden_max(F&& f, double lo, double hi, double tol) {
  constexpr double kInvPhi = 0.6180339887498949;
  double a = lo, b = hi;
  double x1 = b - kInvPhi * (b - a);
  double x2 = a + kInvPhi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  while (b - a > tol) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + kInvPhi * (b - a);
      f2 = f(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - kInvPhi * (b - a);
      f1 = f(x1);
    }
  }
  return 0.5 * (a + b);
}

}  // namespace

StepObservation collect_observation(const GridMap& g, const NodeSet& burning_t,
                                    const NodeSet& burning_next) {
  StepObservation obs;
  obs.areas.resize(g.num_areas());

  const NodeSet frontier = burning_t.neighbors();
  frontier.for_each([&](int pos) {
    AreaObservation& area = obs.areas[g.area_of_pos(pos) - 1];
    const int m = burning_neighbor_count(g, burning_t, pos);
    if (burning_next.test(pos)) {
      ++area.ignited_by_m[m];
    } else {
      area.nonignited_weight += m;
      ++area.nonignited_nodes;
    }
  });
  burning_t.for_each([&](int pos) {
    AreaObservation& area = obs.areas[g.area_of_pos(pos) - 1];
    if (burning_next.test(pos)) {
      ++area.still_burning;
    } else {
      ++area.extinguished;
    }
  });
  return obs;
}

double plus_log_likelihood(const AreaObservation& area, double p) {
  const double q = 1.0 - p;
  double ll = 0.0;
  for (int m = 1; m <= 8; ++m) {
    if (area.ignited_by_m[m] == 0) continue;
    const double prob = 1.0 - std::pow(q, m);
    if (prob <= 0.0) return -kInf;
    ll += static_cast<double>(area.ignited_by_m[m]) * std::log(prob);
  }
  if (area.nonignited_weight > 0) {
    if (q <= 0.0) return -kInf;
    ll += static_cast<double>(area.nonignited_weight) * std::log(q);
  }
  return ll;
}

double minus_log_likelihood(const AreaObservation& area, double p) {
  double ll = 0.0;
  if (area.extinguished > 0) {
    if (p <= 0.0) return -kInf;
    ll += static_cast<double>(area.extinguished) * std::log(p);
  }
  if (area.still_burning > 0) {
    if (p >= 1.0) return -kInf;
    ll += static_cast<double>(area.still_burning) * std::log(1.0 - p);
  }
  return ll;
}

double log_likelihood(const std::vector<double>& p_plus, const std::vector<double>& p_minus,
                      const StepObservation& obs) {
  if (p_plus.size() != obs.areas.size() || p_minus.size() != obs.areas.size())
    throw std::invalid_argument("parameter vectors must match the area count");
  double total = 0.0;
  for (std::size_t h = 0; h < obs.areas.size(); ++h)
    total += plus_log_likelihood(obs.areas[h], p_plus[h]) +
             minus_log_likelihood(obs.areas[h], p_minus[h]);
  return total;
}

double plus_observed_information(const AreaObservation& area, double p) {
  // -d2/dp2 of: sum_m c_m log(1-q^m) + W log q, with q = 1-p. Each ignited
  // term contributes m[(m-1)q^(m-2) + q^(2m-2)] / (1-q^m)^2, the frontier
  // term W/q^2; all pieces are nonnegative, so the likelihood is concave.
  const double q = 1.0 - p;
  double info = 0.0;
  for (int m = 1; m <= 8; ++m) {
    if (area.ignited_by_m[m] == 0) continue;
    const double denom = 1.0 - std::pow(q, m);
    const double numer =
        m * ((m - 1) * std::pow(q, m - 2) + std::pow(q, 2 * m - 2));
    info += static_cast<double>(area.ignited_by_m[m]) * numer / (denom * denom);
  }
  info += static_cast<double>(area.nonignited_weight) / (q * q);
  return info;
}

double minus_observed_information(const AreaObservation& area, double p) {
  return static_cast<double>(area.extinguished) / (p * p) +
         static_cast<double>(area.still_burning) / ((1.0 - p) * (1.0 - p));
}

StepEstimate mle_step(const StepObservation& obs) {
  StepEstimate est;
  est.areas.resize(obs.areas.size());
  const double lo = kProbClamp, hi = 1.0 - kProbClamp;

  for (std::size_t h = 0; h < obs.areas.size(); ++h) {
    const AreaObservation& area = obs.areas[h];
    AreaEstimate& out = est.areas[h];

    if (area.has_plus_data()) {
      double p_hat;
      const bool any_ignited = [&] {
        for (int m = 1; m <= 8; ++m)
          if (area.ignited_by_m[m] > 0) return true;
        return false;
      }();
      if (!any_ignited) {
        p_hat = lo;  // likelihood decreasing in p
      } else if (area.nonignited_weight == 0) {
        p_hat = hi;  // likelihood increasing in p
      } else {
        p_hat = golden_max([&](double p) { return plus_log_likelihood(area, p); }, lo, hi, 1e-8);
      }
      const double info = plus_observed_information(area, p_hat);
      out.plus = ParamEstimate{true, p_hat, info > 0.0 ? 1.0 / info : kInf};
    } else {
      out.plus = ParamEstimate{false, 0.0, kInf};
    }

    if (area.has_minus_data()) {
      const double a = static_cast<double>(area.extinguished);
      const double b = static_cast<double>(area.still_burning);
      const double p_hat = std::clamp(a / (a + b), lo, hi);
      const double info = minus_observed_information(area, p_hat);
      out.minus = ParamEstimate{true, p_hat, info > 0.0 ? 1.0 / info : kInf};
    } else {
      out.minus = ParamEstimate{false, 0.0, kInf};
    }
  }
  return est;
}

std::vector<VarianceProxy> variance_proxy(const StepObservation& obs, const StepEstimate& est) {
  if (obs.areas.size() != est.areas.size())
    throw std::invalid_argument("observation/estimate area mismatch");
  std::vector<VarianceProxy> out(obs.areas.size());
  for (std::size_t h = 0; h < obs.areas.size(); ++h) {
    const AreaEstimate& e = est.areas[h];
    if (e.plus.has_data) {
      const double info = plus_observed_information(obs.areas[h], e.plus.value);
      out[h].nu_plus = info > 0.0 ? 1.0 / info : kInf;
    } else {
      out[h].nu_plus = kInf;
    }
    if (e.minus.has_data) {
      const double info = minus_observed_information(obs.areas[h], e.minus.value);
      out[h].nu_minus = info > 0.0 ? 1.0 / info : kInf;
    } else {
      out[h].nu_minus = kInf;
    }
  }
  return out;
}

IntervalAverage interval_average(const std::vector<StepEstimate>& history, int area, int t1,
                                 int t2, Stream stream) {
  if (t1 < 1 || t2 > static_cast<int>(history.size()) || t1 > t2)
    throw std::invalid_argument("invalid interval");
  IntervalAverage out;
  for (int t = t1; t <= t2; ++t) {
    const AreaEstimate& e = history[t - 1].areas.at(area - 1);
    const ParamEstimate& p = stream == Stream::kPlus ? e.plus : e.minus;
    if (!p.has_data) continue;  // skip contract: no-data periods are excluded
    out.mean += p.value;
    out.nu_sum += p.nu;
    ++out.data_periods;
  }
  if (out.data_periods == 0) throw std::runtime_error("interval contains no data periods");
  out.mean /= out.data_periods;
  return out;
}

ResidualAnalysis residual_analysis(const GridMap& g, const std::vector<FireState>& trajectory,
                                   const ParamSchedule& schedule) {
  const int H = g.num_areas();
  ResidualAnalysis out;
  out.plus.resize(H);
  out.minus.resize(H);
  for (std::size_t i = 0; i + 1 < trajectory.size(); ++i) {
    const int t = trajectory[i].t;
    const StepEstimate est =
        mle_step(collect_observation(g, trajectory[i].burning, trajectory[i + 1].burning));
    for (int h = 1; h <= H; ++h) {
      const AreaEstimate& e = est.areas[h - 1];
      if (e.plus.has_data && std::isfinite(e.plus.nu) && e.plus.nu > 0.0)
        out.plus[h - 1].push_back(
            {t, (e.plus.value - schedule.p_plus_at(h, t)) / std::sqrt(e.plus.nu), 0.0});
      if (e.minus.has_data && std::isfinite(e.minus.nu) && e.minus.nu > 0.0)
        out.minus[h - 1].push_back(
            {t, (e.minus.value - schedule.p_minus_at(h, t)) / std::sqrt(e.minus.nu), 0.0});
    }
  }
  auto finish = [](std::vector<QqPoint>& pts) {
    std::sort(pts.begin(), pts.end(),
              [](const QqPoint& a, const QqPoint& b) { return a.residual < b.residual; });
    const double n = static_cast<double>(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i)
      pts[i].theoretical = normal_quantile((static_cast<double>(i) + 0.5) / n);
  };
  for (auto& pts : out.plus) finish(pts);
  for (auto& pts : out.minus) finish(pts);
  return out;
}

void write_estimates_csv(const std::vector<StepEstimate>& history, std::ostream& out) {
  out << "t,h,p_plus_hat,nu_plus,p_minus_hat,nu_minus\n";
  for (std::size_t i = 0; i < history.size(); ++i) {
    for (std::size_t h = 0; h < history[i].areas.size(); ++h) {
      const AreaEstimate& e = history[i].areas[h];
      out << (i + 1) << ',' << (h + 1) << ',';
      if (e.plus.has_data)
        out << e.plus.value << ',' << e.plus.nu << ',';
      else
        out << ",,";
      if (e.minus.has_data)
        out << e.minus.value << ',' << e.minus.nu;
      else
        out << ',';
      out << '\n';
    }
  }
}

void write_qq_csv(const ResidualAnalysis& analysis, Stream stream, std::ostream& out) {
  const auto& per_area = stream == Stream::kPlus ? analysis.plus : analysis.minus;
  out << "h,theoretical,residual\n";
  for (std::size_t h = 0; h < per_area.size(); ++h)
    for (const QqPoint& p : per_area[h])
      out << (h + 1) << ',' << p.theoretical << ',' << p.residual << '\n';
}

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("quantile requires p in (0,1)");
  // Acklam's rational approximation, |relative error| < 1.15e-9.
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double p_low = 0.02425, p_high = 1.0 - p_low;
  double x;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= p_high) {
    const double q = p - 0.5, r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log(1.0 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  return x;
}

double ks_statistic_vs_std_normal(std::vector<double> sample) {
  if (sample.empty()) throw std::invalid_argument("empty sample");
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double cdf = 0.5 * std::erfc(-sample[i] / std::sqrt(2.0));
    d = std::max(d, std::abs(cdf - static_cast<double>(i) / n));
    d = std::max(d, std::abs(static_cast<double>(i + 1) / n - cdf));
  }
  return d;
}

}  // namespace gridfire
