#pragma once

#include <memory>
#include <string>
#include <vector>

#include "gridfire/estimation.hpp"
#include "gridfire/fire.hpp"

namespace gridfire {

enum class IntervalPolicy { kExhaustive, kGeometric };
enum class LogFactorMode { kLn2T, kLn2HT };

struct DetectorConfig {
  IntervalPolicy policy = IntervalPolicy::kGeometric;
  LogFactorMode log_factor = LogFactorMode::kLn2HT;
  int horizon = 2;       // T in the concentration radii
  int num_areas = 1;     // H
  double lr_threshold = 1.0;  // likelihood-ratio benchmark threshold
};

// Data-period history of one (area, stream) pair. Only periods that produced
// an estimate are stored; episode indices point into these vectors.
struct StreamHistory {
  std::vector<double> values;
  std::vector<double> nus;
  std::vector<int> periods;
  std::size_t episode_start = 0;

  std::size_t size() const { return values.size(); }
  std::size_t episode_length() const { return values.size() - episode_start; }
  double episode_mean() const;
};

struct DetectionResult {
  bool triggered = false;
  std::size_t window_begin = 0;  // triggering interval, indices into the history
  std::size_t window_end = 0;    // inclusive
};

// Change-point condition: some interval inside the episode deviates from the
// episode average by more than the sum of both concentration radii
// 4*sqrt(sum nu * logfactor)/length.
DetectionResult detect_change(const StreamHistory& history, const DetectorConfig& config);

// Plug-in estimators feeding Problem (7). All learners consume the same
// per-period MLE stream and differ only in how they average it.
class Learner {
 public:
  Learner(std::string name, int num_areas);
  virtual ~Learner() = default;

  const std::string& name() const { return name_; }
  // New step estimate for the given period (transition B_period -> B_period+1).
  void ingest(const StepEstimate& estimate, int period);
  // Current plug-in parameters; streams that never produced data fall back
  // to 0.5.
  SpreadParams plug_in() const;

  int detections_plus() const { return detections_plus_; }
  int detections_minus() const { return detections_minus_; }
  // Period of the current episode start per area (0 while empty).
  std::vector<int> episode_start_periods(Stream stream) const;

 protected:
  virtual void on_new_sample(int area, Stream stream, StreamHistory& history) = 0;
  virtual double plug_value(const StreamHistory& history) const = 0;

  StreamHistory& history(int area, Stream stream) {
    return stream == Stream::kPlus ? plus_[area - 1] : minus_[area - 1];
  }
  const StreamHistory& history(int area, Stream stream) const {
    return stream == Stream::kPlus ? plus_[area - 1] : minus_[area - 1];
  }
  void count_detection(Stream stream) {
    (stream == Stream::kPlus ? detections_plus_ : detections_minus_)++;
  }

  int num_areas_;

 private:
  std::string name_;
  std::vector<StreamHistory> plus_;
  std::vector<StreamHistory> minus_;
  int detections_plus_ = 0;
  int detections_minus_ = 0;
};

// Adaptive change-point learner: episode restarts on the detector condition,
// plug-in value is the current episode average.
class AdaptiveRestartLearner final : public Learner {
 public:
  AdaptiveRestartLearner(int num_areas, const DetectorConfig& config);

 protected:
  void on_new_sample(int area, Stream stream, StreamHistory& history) override;
  double plug_value(const StreamHistory& history) const override;

 private:
  DetectorConfig config_;
};

// Plugs in the newest single-period MLE.
class NaiveLearner final : public Learner {
 public:
  explicit NaiveLearner(int num_areas);

 protected:
  void on_new_sample(int area, Stream stream, StreamHistory& history) override;
  double plug_value(const StreamHistory& history) const override;
};

// Plugs in the all-history sample average (no change-point handling).
class GlobalAverageLearner final : public Learner {
 public:
  explicit GlobalAverageLearner(int num_areas);

 protected:
  void on_new_sample(int area, Stream stream, StreamHistory& history) override;
  double plug_value(const StreamHistory& history) const override;
};

// Classical likelihood-ratio split statistic with a calibrated threshold;
// episode average plug-in after each detected change.
class LikelihoodRatioLearner final : public Learner {
 public:
  LikelihoodRatioLearner(int num_areas, double threshold);

  // Max split statistic and argmax split of the current episode (test hook).
  static std::pair<double, std::size_t> max_split_statistic(const StreamHistory& history);

 protected:
  void on_new_sample(int area, Stream stream, StreamHistory& history) override;
  double plug_value(const StreamHistory& history) const override;

 private:
  double threshold_;
};

// Known algorithm names: alg1, naive, global, lr.
std::unique_ptr<Learner> make_learner(const std::string& name, int num_areas,
                                      const DetectorConfig& config);

}  // namespace gridfire
