#include "gridfire/online.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gridfire {

double StreamHistory::episode_mean() const {
  double sum = 0.0;
  for (std::size_t i = episode_start; i < values.size(); ++i) sum += values[i];
  return sum / static_cast<double>(values.size() - episode_start);
}

DetectionResult detect_change(const StreamHistory& history, const DetectorConfig& config) {
  DetectionResult result;
  const std::size_t n = history.size();
  const std::size_t e = history.episode_start;
  const std::size_t len = n - e;
  if (len < 2) return result;  // a lone sample equals the episode average

  const double log_factor =
      std::log(2.0 * (config.log_factor == LogFactorMode::kLn2HT ? config.num_areas : 1) *
               std::max(config.horizon, 2));

  double episode_sum = 0.0, episode_nu = 0.0;
  for (std::size_t i = e; i < n; ++i) {
    episode_sum += history.values[i];
    episode_nu += history.nus[i];
  }
  const double episode_mean = episode_sum / static_cast<double>(len);
  const double episode_radius =
      4.0 * std::sqrt(episode_nu * log_factor) / static_cast<double>(len);

  auto check_window = [&](std::size_t i1, std::size_t i2) {
    double sum = 0.0, nu = 0.0;
    for (std::size_t i = i1; i <= i2; ++i) {
      sum += history.values[i];
      nu += history.nus[i];
    }
    const double wlen = static_cast<double>(i2 - i1 + 1);
    const double radius = 4.0 * std::sqrt(nu * log_factor) / wlen;
    if (std::abs(episode_mean - sum / wlen) >= episode_radius + radius) {
      result.triggered = true;
      result.window_begin = i1;
      result.window_end = i2;
      return true;
    }
    return false;
  };

  if (config.policy == IntervalPolicy::kExhaustive) {
    for (std::size_t i1 = e; i1 < n; ++i1)
      for (std::size_t i2 = i1; i2 < n; ++i2)
        if (check_window(i1, i2)) return result;
  } else {
    // Suffix windows of power-of-two length, plus the full episode.
    for (std::size_t w = 1; w <= len; w *= 2)
      if (check_window(n - w, n - 1)) return result;
    check_window(e, n - 1);
  }
  return result;
}

Learner::Learner(std::string name, int num_areas)
    : num_areas_(num_areas), name_(std::move(name)), plus_(num_areas), minus_(num_areas) {}

void Learner::ingest(const StepEstimate& estimate, int period) {
  if (static_cast<int>(estimate.areas.size()) != num_areas_)
    throw std::invalid_argument("estimate area count mismatch");
  for (int h = 1; h <= num_areas_; ++h) {
    const AreaEstimate& area = estimate.areas[h - 1];
    for (const Stream stream : {Stream::kPlus, Stream::kMinus}) {
      const ParamEstimate& est = stream == Stream::kPlus ? area.plus : area.minus;
      if (!est.has_data || !std::isfinite(est.nu)) continue;
      StreamHistory& hist = history(h, stream);
      hist.values.push_back(est.value);
      hist.nus.push_back(est.nu);
      hist.periods.push_back(period);
      on_new_sample(h, stream, hist);
    }
  }
}

SpreadParams Learner::plug_in() const {
  SpreadParams params;
  params.p_plus.resize(num_areas_);
  params.p_minus.resize(num_areas_);
  for (int h = 1; h <= num_areas_; ++h) {
    const StreamHistory& plus = history(h, Stream::kPlus);
    const StreamHistory& minus = history(h, Stream::kMinus);
    params.p_plus[h - 1] = plus.values.empty() ? 0.5 : std::clamp(plug_value(plus), 0.0, 1.0);
    params.p_minus[h - 1] = minus.values.empty() ? 0.5 : std::clamp(plug_value(minus), 0.0, 1.0);
  }
  return params;
}

std::vector<int> Learner::episode_start_periods(Stream stream) const {
  std::vector<int> out(num_areas_, 0);
  for (int h = 1; h <= num_areas_; ++h) {
    const StreamHistory& hist = history(h, stream);
    if (!hist.periods.empty()) out[h - 1] = hist.periods[hist.episode_start];
  }
  return out;
}

AdaptiveRestartLearner::AdaptiveRestartLearner(int num_areas, const DetectorConfig& config)
    : Learner("alg1", num_areas), config_(config) {}

void AdaptiveRestartLearner::on_new_sample(int, Stream stream, StreamHistory& history) {
  if (detect_change(history, config_).triggered) {
    history.episode_start = history.size() - 1;  // keep only the newest sample
    count_detection(stream);
  }
}

double AdaptiveRestartLearner::plug_value(const StreamHistory& history) const {
  return history.episode_mean();
}

NaiveLearner::NaiveLearner(int num_areas) : Learner("naive", num_areas) {}

void NaiveLearner::on_new_sample(int, Stream, StreamHistory& history) {
  // Keep only the most recent sample; naive plug-in needs no history.
  if (history.size() > 1) {
    history.values.erase(history.values.begin());
    history.nus.erase(history.nus.begin());
    history.periods.erase(history.periods.begin());
  }
}

double NaiveLearner::plug_value(const StreamHistory& history) const {
  return history.values.back();
}

GlobalAverageLearner::GlobalAverageLearner(int num_areas) : Learner("global", num_areas) {}

void GlobalAverageLearner::on_new_sample(int, Stream, StreamHistory&) {}

double GlobalAverageLearner::plug_value(const StreamHistory& history) const {
  double sum = 0.0;
  for (double v : history.values) sum += v;
  return sum / static_cast<double>(history.values.size());
}

LikelihoodRatioLearner::LikelihoodRatioLearner(int num_areas, double threshold)
    : Learner("lr", num_areas), threshold_(threshold) {}

std::pair<double, std::size_t> LikelihoodRatioLearner::max_split_statistic(
    const StreamHistory& history) {
  const std::size_t n = history.size();
  const std::size_t e = history.episode_start;
  double best = -1.0;
  std::size_t best_split = e;
  if (n - e < 2) return {best, best_split};
  // prefix sums over the episode for O(1) split means
  double total = 0.0;
  for (std::size_t i = e; i < n; ++i) total += history.values[i];
  double head = 0.0;
  for (std::size_t split = e + 1; split < n; ++split) {
    head += history.values[split - 1];
    const double n1 = static_cast<double>(split - e);
    const double n2 = static_cast<double>(n - split);
    const double mean1 = head / n1;
    const double mean2 = (total - head) / n2;
    const double diff = mean1 - mean2;
    const double gamma = diff * diff / (1.0 / n1 + 1.0 / n2);
    if (gamma > best) {
      best = gamma;
      best_split = split;
    }
  }
  return {best, best_split};
}

void LikelihoodRatioLearner::on_new_sample(int, Stream stream, StreamHistory& history) {
  const auto [gamma, split] = max_split_statistic(history);
  if (gamma > threshold_) {
    history.episode_start = split;
    count_detection(stream);
  }
}

double LikelihoodRatioLearner::plug_value(const StreamHistory& history) const {
  return history.episode_mean();
}

std::unique_ptr<Learner> make_learner(const std::string& name, int num_areas,
                                      const DetectorConfig& config) {
  if (name == "alg1") return std::make_unique<AdaptiveRestartLearner>(num_areas, config);
  if (name == "naive") return std::make_unique<NaiveLearner>(num_areas);
  if (name == "global") return std::make_unique<GlobalAverageLearner>(num_areas);
  if (name == "lr") return std::make_unique<LikelihoodRatioLearner>(num_areas, config.lr_threshold);
  throw std::invalid_argument("unknown algorithm: " + name +
                              " (expected alg1, naive, global or lr)");
}

}  // namespace gridfire
