#include <cmath>

#include "doctest.h"
#include "gridfire/online.hpp"
#include "gridfire/rng.hpp"

using namespace gridfire;

namespace {

StepEstimate single_area_estimate(double plus, double nu_plus, double minus, double nu_minus) {
  StepEstimate est;
  est.areas.resize(1);
  est.areas[0].plus = {true, plus, nu_plus};
  est.areas[0].minus = {true, minus, nu_minus};
  return est;
}

DetectorConfig test_config(int horizon, IntervalPolicy policy = IntervalPolicy::kGeometric) {
  DetectorConfig cfg;
  cfg.policy = policy;
  cfg.horizon = horizon;
  cfg.num_areas = 1;
  cfg.lr_threshold = 0.05;
  return cfg;
}

}  // namespace

TEST_CASE("detector never triggers on a single sample") {
  StreamHistory hist;
  hist.values = {0.4};
  hist.nus = {1e-3};
  hist.periods = {1};
  CHECK_FALSE(detect_change(hist, test_config(500)).triggered);
}

TEST_CASE("detector calibration: null false alarms and jump detection") {
  // Synthetic sub-Gaussian streams at nu = 1e-3 (the calibration
  // point). Null: <= 5% of 200 replications may see any detection over
  // T = 500. Jump of 0.4: detected within 30 periods in >= 95%.
  const int T = 500, reps = 200;
  const double nu = 1e-3, sd = std::sqrt(nu);

  int false_alarms = 0;
  for (int rep = 0; rep < reps; ++rep) {
    Rng rng(100 + rep);
    StreamHistory hist;
    bool detected = false;
    for (int t = 1; t <= T && !detected; ++t) {
      hist.values.push_back(0.4 + sd * rng.normal());
      hist.nus.push_back(nu);
      hist.periods.push_back(t);
      detected = detect_change(hist, test_config(T)).triggered;
    }
    false_alarms += detected;
  }
  CHECK(false_alarms <= reps / 20);

  int detected_fast = 0;
  for (int rep = 0; rep < reps; ++rep) {
    Rng rng(5000 + rep);
    StreamHistory hist;
    const int change_at = 200;
    int detected_at = -1;
    for (int t = 1; t <= T; ++t) {
      const double mean = t < change_at ? 0.2 : 0.6;
      hist.values.push_back(mean + sd * rng.normal());
      hist.nus.push_back(nu);
      hist.periods.push_back(t);
      if (detect_change(hist, test_config(T)).triggered) {
        detected_at = t;
        break;
      }
    }
    if (detected_at >= change_at && detected_at < change_at + 30) ++detected_fast;
  }
  CHECK(detected_fast >= reps * 95 / 100);
}

TEST_CASE("geometric detections are a subset of exhaustive detections") {
  // On the same stream, the geometric policy checks fewer windows, so it can
  // only fire at the same time or later than the exhaustive policy.
  Rng rng(42);
  for (int rep = 0; rep < 20; ++rep) {
    const int T = 120;
    StreamHistory geo, exh;
    int geo_at = -1, exh_at = -1;
    for (int t = 1; t <= T; ++t) {
      const double mean = t < 60 ? 0.3 : (rep % 2 ? 0.55 : 0.3);
      const double v = mean + 0.03 * rng.normal();
      for (StreamHistory* h : {&geo, &exh}) {
        h->values.push_back(v);
        h->nus.push_back(1e-3);
        h->periods.push_back(t);
      }
      if (exh_at < 0 && detect_change(exh, test_config(T, IntervalPolicy::kExhaustive)).triggered)
        exh_at = t;
      if (geo_at < 0 && detect_change(geo, test_config(T, IntervalPolicy::kGeometric)).triggered)
        geo_at = t;
    }
    if (geo_at >= 0) {
      CHECK(exh_at >= 0);
      CHECK(exh_at <= geo_at);
    }
  }
}

TEST_CASE("adaptive learner restarts use only post-change data") {
  DetectorConfig cfg = test_config(300);
  AdaptiveRestartLearner learner(1, cfg);
  Rng rng(7);
  const double sd = std::sqrt(1e-3);
  int period = 1;
  for (; period <= 100; ++period)
    learner.ingest(single_area_estimate(0.2 + sd * rng.normal(), 1e-3, 0.3, 1e-3), period);
  CHECK(learner.detections_plus() == 0);
  const double before = learner.plug_in().p_plus[0];
  CHECK(before == doctest::Approx(0.2).epsilon(0.05));

  for (; period <= 140; ++period)
    learner.ingest(single_area_estimate(0.6 + sd * rng.normal(), 1e-3, 0.3, 1e-3), period);
  CHECK(learner.detections_plus() >= 1);
  // plug-in now tracks the new level: averages exclusively post-restart data
  CHECK(learner.plug_in().p_plus[0] == doctest::Approx(0.6).epsilon(0.05));
  CHECK(learner.episode_start_periods(Stream::kPlus)[0] >= 100);
  // minus stream unaffected
  CHECK(learner.detections_minus() == 0);
  CHECK(learner.episode_start_periods(Stream::kMinus)[0] == 1);
}

TEST_CASE("benchmark learners: plug-in semantics") {
  DetectorConfig cfg = test_config(100);
  auto naive = make_learner("naive", 1, cfg);
  auto global = make_learner("global", 1, cfg);
  auto alg1 = make_learner("alg1", 1, cfg);

  naive->ingest(single_area_estimate(0.3, 1e-3, 0.2, 1e-3), 1);
  global->ingest(single_area_estimate(0.3, 1e-3, 0.2, 1e-3), 1);
  alg1->ingest(single_area_estimate(0.3, 1e-3, 0.2, 1e-3), 1);
  // one sample: all agree
  CHECK(naive->plug_in().p_plus[0] == doctest::Approx(alg1->plug_in().p_plus[0]));
  CHECK(global->plug_in().p_plus[0] == doctest::Approx(alg1->plug_in().p_plus[0]));

  naive->ingest(single_area_estimate(0.5, 1e-3, 0.2, 1e-3), 2);
  global->ingest(single_area_estimate(0.5, 1e-3, 0.2, 1e-3), 2);
  CHECK(naive->plug_in().p_plus[0] == doctest::Approx(0.5));   // newest only
  CHECK(global->plug_in().p_plus[0] == doctest::Approx(0.4));  // all-history mean

  // cold start: no data yet falls back to 0.5
  auto fresh = make_learner("alg1", 1, cfg);
  CHECK(fresh->plug_in().p_plus[0] == doctest::Approx(0.5));
  CHECK(fresh->plug_in().p_minus[0] == doctest::Approx(0.5));

  CHECK_THROWS(make_learner("unknown", 1, cfg));
}

TEST_CASE("LR benchmark: infinite threshold reduces to the global average") {
  DetectorConfig cfg = test_config(200);
  cfg.lr_threshold = std::numeric_limits<double>::infinity();
  auto lr = make_learner("lr", 1, cfg);
  auto global = make_learner("global", 1, cfg);
  Rng rng(9);
  for (int t = 1; t <= 150; ++t) {
    const double v = (t < 70 ? 0.25 : 0.55) + 0.03 * rng.normal();
    lr->ingest(single_area_estimate(v, 1e-3, 0.3, 1e-3), t);
    global->ingest(single_area_estimate(v, 1e-3, 0.3, 1e-3), t);
  }
  CHECK(lr->plug_in().p_plus[0] == doctest::Approx(global->plug_in().p_plus[0]));
  CHECK(lr->detections_plus() == 0);
}

TEST_CASE("LR benchmark: null calibration and change localization") {
  const int T = 300, reps = 100;
  const double sd = std::sqrt(1e-3);

  // Calibrate the threshold at the 95th percentile of the null max statistic.
  std::vector<double> null_max(reps);
  for (int rep = 0; rep < reps; ++rep) {
    Rng rng(777 + rep);
    StreamHistory hist;
    double best = 0.0;
    for (int t = 1; t <= T; ++t) {
      hist.values.push_back(0.4 + sd * rng.normal());
      hist.nus.push_back(1e-3);
      hist.periods.push_back(t);
      best = std::max(best, LikelihoodRatioLearner::max_split_statistic(hist).first);
    }
    null_max[rep] = best;
  }
  std::sort(null_max.begin(), null_max.end());
  const double threshold = null_max[static_cast<std::size_t>(0.95 * (reps - 1))];

  // Null false alarms at the calibrated threshold: <= ~5% (allow wobble).
  int alarms = 0;
  for (int rep = 0; rep < reps; ++rep) {
    Rng rng(12345 + rep);
    DetectorConfig cfg = test_config(T);
    cfg.lr_threshold = threshold;
    auto lr = make_learner("lr", 1, cfg);
    for (int t = 1; t <= T; ++t)
      lr->ingest(single_area_estimate(0.4 + sd * rng.normal(), 1e-3, 0.3, 1e-3), t);
    alarms += lr->detections_plus() > 0;
  }
  CHECK(alarms <= reps / 10);

  // Large jump: the argmax split lands within +-5 periods in >= 90% of runs.
  int localized = 0;
  for (int rep = 0; rep < reps; ++rep) {
    Rng rng(424242 + rep);
    StreamHistory hist;
    const int change_at = 150;
    for (int t = 1; t <= T; ++t) {
      const double mean = t < change_at ? 0.2 : 0.6;
      hist.values.push_back(mean + sd * rng.normal());
      hist.nus.push_back(1e-3);
      hist.periods.push_back(t);
    }
    const auto [gamma, split] = LikelihoodRatioLearner::max_split_statistic(hist);
    CHECK(gamma > threshold);  // such a jump must clear the null threshold
    const int split_period = hist.periods[split];
    if (std::abs(split_period - change_at) <= 5) ++localized;
  }
  CHECK(localized >= reps * 9 / 10);
}

TEST_CASE("learners skip no-data periods") {
  DetectorConfig cfg = test_config(100);
  auto alg1 = make_learner("alg1", 1, cfg);
  StepEstimate est;
  est.areas.resize(1);
  est.areas[0].plus = {true, 0.3, 1e-3};
  est.areas[0].minus = {false, 0.0, std::numeric_limits<double>::infinity()};
  alg1->ingest(est, 1);
  CHECK(alg1->plug_in().p_plus[0] == doctest::Approx(0.3));
  CHECK(alg1->plug_in().p_minus[0] == doctest::Approx(0.5));  // still cold
}
