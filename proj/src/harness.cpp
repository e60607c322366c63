#include "gridfire/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <unordered_map>

namespace gridfire {

namespace {

// Stream keys for counter-based RNG derivation.
constexpr std::uint64_t kScheduleStream = 0x5348454455ULL;
constexpr std::uint64_t kFireStream = 0x46495245ULL;
constexpr std::uint64_t kNuCapStream = 0x4e55ULL;

std::uint64_t fnv1a(const void* data, std::size_t bytes, std::uint64_t h) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < bytes; ++i) {
    h ^= p[i];
    h *= 1099511628211ULL;
  }
  return h;
}

// Dedup cache for dispatch solves within one replication: identical pinch
// sets and probability vectors give identical LPs.
class SolveCache {
 public:
  struct Entry {
    std::vector<double> fingerprint;
    Strategy strategy;
    bool infeasible = false;
  };

  const Entry* find(std::uint64_t hash, const std::vector<double>& fingerprint) const {
    auto [lo, hi] = map_.equal_range(hash);
    for (auto it = lo; it != hi; ++it)
      if (it->second.fingerprint == fingerprint) return &it->second;
    return nullptr;
  }
  const Entry* insert(std::uint64_t hash, Entry entry) {
    auto it = map_.emplace(hash, std::move(entry));
    return &it->second;
  }

 private:
  std::unordered_multimap<std::uint64_t, Entry> map_;
};

struct StepLogRow {
  int t;
  std::string algorithm;
  int detections_plus;
  int detections_minus;
  std::string episode_starts;
  double expected_cost;
  double regret_increment;
};

struct ReplicationResult {
  std::vector<std::vector<double>> cum_regret;  // [alg][t-1]
  long long lp_solves = 0;
  long long infeasible_incidents = 0;
  std::vector<StepLogRow> step_log;
  std::vector<std::pair<int, Strategy>> strategy_log;  // first algorithm's dispatch
};

std::string format_episode_starts(const Learner& learner) {
  std::ostringstream out;
  out << "p=";
  const auto plus = learner.episode_start_periods(Stream::kPlus);
  for (std::size_t h = 0; h < plus.size(); ++h) out << (h ? "/" : "") << plus[h];
  out << ";m=";
  const auto minus = learner.episode_start_periods(Stream::kMinus);
  for (std::size_t h = 0; h < minus.size(); ++h) out << (h ? "/" : "") << minus[h];
  return out.str();
}

class ReplicationRunner {
 public:
  ReplicationRunner(const ExperimentConfig& cfg, const GridMap& grid, const PowerNetwork& net,
                    const NodeSet& risk_mask)
      : cfg_(cfg), grid_(grid), net_(net), risk_mask_(risk_mask) {}

  ReplicationResult run(const ParamSchedule& schedule, int sequence, int rep, bool log_steps) {
    ReplicationResult result;
    const int T = cfg_.horizon;
    const std::size_t num_algs = cfg_.algorithms.size();
    result.cum_regret.assign(num_algs, std::vector<double>(T, 0.0));

    std::vector<std::unique_ptr<Learner>> learners;
    for (const auto& name : cfg_.algorithms)
      learners.push_back(make_learner(name, grid_.num_areas(), cfg_.detector_config()));

    Rng rng(cfg_.seed, kFireStream, static_cast<std::uint64_t>(sequence),
            static_cast<std::uint64_t>(rep));
    const std::vector<NodeId> origins = draw_origins(cfg_, grid_, rng);

    FireState state;
    state.burning = NodeSet(grid_);
    state.t = 1;
    for (const NodeId o : origins) state.burning.set(grid_.pos_of(o));

    SolveCache cache;
    std::unordered_map<std::uint64_t, PtdfMatrix> ptdf_cache;
    std::optional<StepEstimate> pending_estimate;  // transition (B_{s-2}, B_{s-1})

    std::vector<double> increments(num_algs, 0.0);
    for (int s = 2; s <= T; ++s) {
      if (pending_estimate)
        for (auto& learner : learners) learner->ingest(*pending_estimate, s - 2);

      std::fill(increments.begin(), increments.end(), 0.0);
      std::vector<double> costs(num_algs, 0.0);
      double clairvoyant_cost = 0.0;
      Strategy first_strategy;
      if (state.burning.intersects(risk_mask_)) {
        decide_step(state, schedule.params_at(s - 1), learners, cache, ptdf_cache, result,
                    increments, costs, clairvoyant_cost, log_steps ? &first_strategy : nullptr);
        if (log_steps) result.strategy_log.push_back({s, std::move(first_strategy)});
      }
      for (std::size_t a = 0; a < num_algs; ++a)
        result.cum_regret[a][s - 1] = result.cum_regret[a][s - 2] + increments[a];
      if (log_steps) {
        for (std::size_t a = 0; a < num_algs; ++a)
          result.step_log.push_back({s, cfg_.algorithms[a], learners[a]->detections_plus(),
                                     learners[a]->detections_minus(),
                                     format_episode_starts(*learners[a]), costs[a],
                                     increments[a]});
      }

      // Fire physics for period s-1 and the estimate it produces.
      const FireState next = step_fire(grid_, state, schedule.params_at(s - 1), rng);
      pending_estimate = mle_step(collect_observation(grid_, state.burning, next.burning));
      state = next;
    }
    return result;
  }

 private:
  void decide_step(const FireState& state, const SpreadParams& true_params,
                   std::vector<std::unique_ptr<Learner>>& learners, SolveCache& cache,
                   std::unordered_map<std::uint64_t, PtdfMatrix>& ptdf_cache,
                   ReplicationResult& result, std::vector<double>& increments,
                   std::vector<double>& costs, double& clairvoyant_cost,
                   Strategy* first_strategy) {
    const FunctionalIndicator fi = functional_indicator(net_, grid_, state.burning);
    std::vector<bool> bus_pinched(net_.num_buses()), line_pinched(net_.num_lines());
    std::uint64_t topo_key = 1469598103934665603ULL;
    for (int i = 0; i < net_.num_buses(); ++i) {
      bus_pinched[i] = !fi.bus_functional[i];
      topo_key = fnv1a("b", 1, topo_key + bus_pinched[i]);
    }
    for (int l = 0; l < net_.num_lines(); ++l) {
      line_pinched[l] = !fi.line_functional[l];
      topo_key = fnv1a("l", 1, topo_key + line_pinched[l]);
    }
    auto ptdf_it = ptdf_cache.find(topo_key);
    if (ptdf_it == ptdf_cache.end())
      ptdf_it = ptdf_cache.emplace(topo_key, compute_ptdf(net_, line_pinched, bus_pinched)).first;
    const PtdfMatrix& ptdf = ptdf_it->second;

    const std::vector<double> true_bus =
        functional_probability_bus(net_, grid_, state.burning, true_params);
    const std::vector<double> true_line =
        functional_probability_line(net_, grid_, state.burning, true_params);

    const auto solve = [&](const std::vector<double>& bus_prob,
                           const std::vector<double>& line_prob) -> const SolveCache::Entry* {
      std::vector<double> fp;
      fp.reserve(bus_prob.size() + line_prob.size() + 2);
      fp.push_back(static_cast<double>(topo_key >> 32));
      fp.push_back(static_cast<double>(topo_key & 0xffffffffULL));
      fp.insert(fp.end(), bus_prob.begin(), bus_prob.end());
      fp.insert(fp.end(), line_prob.begin(), line_prob.end());
      const std::uint64_t hash =
          fnv1a(fp.data(), fp.size() * sizeof(double), 1469598103934665603ULL);
      if (const auto* hit = cache.find(hash, fp)) return hit;

      StochasticInputs in;
      in.bus_prob = bus_prob;
      in.line_prob = line_prob;
      in.bus_pinched = bus_pinched;
      in.line_pinched = line_pinched;
      const OpfResult res = stochastic_opf(net_, ptdf, in, cfg_.shed_cost);
      ++result.lp_solves;
      SolveCache::Entry entry;
      entry.fingerprint = std::move(fp);
      if (res.status == lp::SolveStatus::kOptimal) {
        entry.strategy = res.strategy;
      } else {
        entry.strategy = last_resort_strategy(net_);
        entry.infeasible = true;
        ++result.infeasible_incidents;
      }
      return cache.insert(hash, std::move(entry));
    };

    const SolveCache::Entry* clairvoyant = solve(true_bus, true_line);
    clairvoyant_cost =
        expected_cost(net_, clairvoyant->strategy, true_bus, true_line, cfg_.shed_cost);

    for (std::size_t a = 0; a < learners.size(); ++a) {
      const SpreadParams plug = learners[a]->plug_in();
      const std::vector<double> bus_hat =
          functional_probability_bus(net_, grid_, state.burning, plug);
      const std::vector<double> line_hat =
          functional_probability_line(net_, grid_, state.burning, plug);
      const SolveCache::Entry* chosen = solve(bus_hat, line_hat);
      costs[a] = expected_cost(net_, chosen->strategy, true_bus, true_line, cfg_.shed_cost);
      increments[a] = costs[a] - clairvoyant_cost;
      if (a == 0 && first_strategy) *first_strategy = chosen->strategy;
    }
  }

  const ExperimentConfig& cfg_;
  const GridMap& grid_;
  const PowerNetwork& net_;
  const NodeSet& risk_mask_;
};

}  // namespace

std::vector<NodeId> draw_origins(const ExperimentConfig& cfg, const GridMap& grid, Rng& rng) {
  std::vector<NodeId> origins;
  if (cfg.origin_rule == "per_area") {
    if (cfg.origins > grid.num_areas())
      throw std::runtime_error("per_area origin rule needs origins <= areas");
    // distinct areas, then one uniform node in each (rejection over the grid)
    std::vector<int> areas(grid.num_areas());
    for (int h = 0; h < grid.num_areas(); ++h) areas[h] = h + 1;
    for (int k = 0; k < cfg.origins; ++k) {
      const std::size_t j = k + rng.uniform_below(areas.size() - k);
      std::swap(areas[k], areas[j]);
    }
    for (int k = 0; k < cfg.origins; ++k) {
      for (int guard = 0;; ++guard) {
        if (guard > 1000000) throw std::runtime_error("origin draw failed: area too small?");
        const NodeId n{rng.uniform_int(1, grid.width()), rng.uniform_int(1, grid.height())};
        if (grid.area_of(n) == areas[k]) {
          origins.push_back(n);
          break;
        }
      }
    }
  } else {
    while (static_cast<int>(origins.size()) < cfg.origins) {
      const NodeId n{rng.uniform_int(1, grid.width()), rng.uniform_int(1, grid.height())};
      if (std::find(origins.begin(), origins.end(), n) == origins.end()) origins.push_back(n);
    }
  }
  return origins;
}

RegretRecord run_experiment(const ExperimentConfig& config, const ExperimentOptions& options) {
  const GridMap grid = build_grid(config);
  const PowerNetwork net = PowerNetwork::load_file(config.network_file, config.station_threshold,
                                                   grid, config.degree_cap);
  const NodeSet risk_mask = net.risk_mask(grid);

  const int sequences = options.full_scale ? config.full_scale_sequences : config.sequences;
  const int reps = options.full_scale ? config.full_scale_reps : config.reps;
  const int total = sequences * reps;
  const int T = config.horizon;
  const std::size_t num_algs = config.algorithms.size();

  // Schedules are per sequence, shared by that sequence's replications.
  std::vector<ParamSchedule> schedules;
  schedules.reserve(sequences);
  for (int q = 0; q < sequences; ++q) {
    Rng rng(config.seed, kScheduleStream, static_cast<std::uint64_t>(q));
    schedules.push_back(generate_schedule(grid.num_areas(), T, config.lambda_plus,
                                          config.lambda_minus, config.p_plus_range,
                                          config.p_minus_range, rng));
  }

  std::vector<ReplicationResult> slots(total);
  std::atomic<int> next{0};
  int threads = options.threads > 0 ? options.threads
                                    : static_cast<int>(std::thread::hardware_concurrency());
  threads = std::max(1, std::min(threads, total));
  auto worker = [&]() {
    ReplicationRunner runner(config, grid, net, risk_mask);
    while (true) {
      const int idx = next.fetch_add(1);
      if (idx >= total) break;
      const int seq = idx / reps;
      const int rep = idx % reps;
      slots[idx] =
          runner.run(schedules[seq], seq, rep, options.step_log && seq == 0 && rep == 0);
    }
  };
  std::vector<std::thread> pool;
  for (int w = 0; w < threads; ++w) pool.emplace_back(worker);
  for (auto& th : pool) th.join();

  RegretRecord record;
  record.algorithms = config.algorithms;
  record.horizon = T;
  record.replications = total;
  record.mean.assign(num_algs, std::vector<double>(T, 0.0));
  record.se.assign(num_algs, std::vector<double>(T, 0.0));
  // Fixed reduction order over slots keeps the output byte-stable.
  for (std::size_t a = 0; a < num_algs; ++a) {
    for (int t = 0; t < T; ++t) {
      double sum = 0.0;
      for (int i = 0; i < total; ++i) sum += slots[i].cum_regret[a][t];
      const double mean = sum / total;
      double ss = 0.0;
      for (int i = 0; i < total; ++i) {
        const double d = slots[i].cum_regret[a][t] - mean;
        ss += d * d;
      }
      record.mean[a][t] = mean;
      record.se[a][t] = total > 1 ? std::sqrt(ss / (total - 1)) / std::sqrt(total) : 0.0;
    }
  }
  for (const auto& slot : slots) {
    record.lp_solves += slot.lp_solves;
    record.infeasible_incidents += slot.infeasible_incidents;
  }

  if (!options.out_dir.empty()) {
    std::filesystem::create_directories(options.out_dir);
    const std::filesystem::path dir(options.out_dir);
    {
      std::ofstream out(dir / "regret_curves.csv");
      write_regret_csv(record, out);
    }
    {
      std::ofstream out(dir / "summary.csv");
      write_summary_csv(record, out);
    }
    if (options.step_log && !slots.empty()) {
      {
        std::ofstream out(dir / "steps.csv");
        out << "t,algorithm,detected_changes_plus,detected_changes_minus,episode_starts,"
               "expected_cost,regret_increment\n";
        out << std::setprecision(12);
        for (const StepLogRow& row : slots[0].step_log)
          out << row.t << ',' << row.algorithm << ',' << row.detections_plus << ','
              << row.detections_minus << ',' << row.episode_starts << ',' << row.expected_cost
              << ',' << row.regret_increment << '\n';
      }
      // dispatch of the first configured algorithm on the logged replication
      std::ofstream alpha_out(dir / "strategies_alpha.csv");
      std::ofstream beta_out(dir / "strategies_beta.csv");
      alpha_out << std::setprecision(12);
      beta_out << std::setprecision(12);
      bool header = true;
      for (const auto& [t, strategy] : slots[0].strategy_log) {
        write_strategy_alpha_csv(net, t, strategy, alpha_out, header);
        write_strategy_beta_csv(net, t, strategy, beta_out, header);
        header = false;
      }
    }
  }
  return record;
}

void write_regret_csv(const RegretRecord& record, std::ostream& out) {
  out << "algorithm,t,mean_cum_regret,se\n";
  out << std::setprecision(12);
  for (std::size_t a = 0; a < record.algorithms.size(); ++a)
    for (int t = 1; t <= record.horizon; ++t)
      out << record.algorithms[a] << ',' << t << ',' << record.mean[a][t - 1] << ','
          << record.se[a][t - 1] << '\n';
}

void write_summary_csv(const RegretRecord& record, std::ostream& out) {
  out << "algorithm,T,mean_regret,se\n";
  out << std::setprecision(12);
  for (std::size_t a = 0; a < record.algorithms.size(); ++a)
    out << record.algorithms[a] << ',' << record.horizon << ','
        << record.mean[a][record.horizon - 1] << ',' << record.se[a][record.horizon - 1] << '\n';
}

double regret_bound(double k_plus, double k_minus, const std::vector<int>& lambda_plus,
                      const std::vector<int>& lambda_minus, const std::vector<double>& nu_plus_cap,
                      const std::vector<double>& nu_minus_cap, int horizon) {
  double max_plus = 0.0, max_minus = 0.0;
  for (std::size_t h = 0; h < lambda_plus.size(); ++h)
    max_plus = std::max(max_plus, std::sqrt(lambda_plus[h] * nu_plus_cap[h]));
  for (std::size_t h = 0; h < lambda_minus.size(); ++h)
    max_minus = std::max(max_minus, std::sqrt(lambda_minus[h] * nu_minus_cap[h]));
  const double t = static_cast<double>(horizon);
  return 12.0 * (k_plus * max_plus + k_minus * max_minus) * std::sqrt(t * std::log(2.0 * t)) +
         2.0 * (k_plus + k_minus) / t;
}

NuCaps estimate_nu_caps(const ExperimentConfig& config, const GridMap& grid) {
  Rng rng(config.seed, kNuCapStream, 0);
  const ParamSchedule schedule =
      generate_schedule(grid.num_areas(), config.horizon, config.lambda_plus, config.lambda_minus,
                        config.p_plus_range, config.p_minus_range, rng);
  const std::vector<NodeId> origins = draw_origins(config, grid, rng);
  NuCaps caps;
  caps.plus.assign(grid.num_areas(), 0.0);
  caps.minus.assign(grid.num_areas(), 0.0);
  FireState state;
  state.burning = NodeSet(grid);
  for (const NodeId o : origins) state.burning.set(grid.pos_of(o));
  state.t = 1;
  for (int t = 1; t < config.horizon; ++t) {
    const FireState next = step_fire(grid, state, schedule.params_at(t), rng);
    const StepEstimate est = mle_step(collect_observation(grid, state.burning, next.burning));
    for (int h = 0; h < grid.num_areas(); ++h) {
      if (est.areas[h].plus.has_data && std::isfinite(est.areas[h].plus.nu))
        caps.plus[h] = std::max(caps.plus[h], est.areas[h].plus.nu);
      if (est.areas[h].minus.has_data && std::isfinite(est.areas[h].minus.nu))
        caps.minus[h] = std::max(caps.minus[h], est.areas[h].minus.nu);
    }
    state = next;
  }
  return caps;
}

std::vector<double> lr_null_max_statistics(const ExperimentConfig& config, const GridMap& grid,
                                           const PowerNetwork& net, int replications) {
  (void)net;
  std::vector<double> maxima;
  maxima.reserve(replications);
  for (int rep = 0; rep < replications; ++rep) {
    Rng rng(config.seed, kFireStream, 0xC0DA, static_cast<std::uint64_t>(rep));
    // Constant parameters at mid-range: the experiment's null.
    SpreadParams params;
    params.p_plus.assign(grid.num_areas(),
                         0.5 * (config.p_plus_range.lo + config.p_plus_range.hi));
    params.p_minus.assign(grid.num_areas(),
                          0.5 * (config.p_minus_range.lo + config.p_minus_range.hi));
    const ParamSchedule schedule = ParamSchedule::constant(params, grid.num_areas());
    const std::vector<NodeId> origins = draw_origins(config, grid, rng);

    FireState state;
    state.burning = NodeSet(grid);
    for (const NodeId o : origins) state.burning.set(grid.pos_of(o));
    state.t = 1;
    std::vector<StreamHistory> plus(grid.num_areas()), minus(grid.num_areas());
    double best = 0.0;
    for (int t = 1; t < config.horizon; ++t) {
      const FireState next = step_fire(grid, state, schedule.params_at(t), rng);
      const StepEstimate est = mle_step(collect_observation(grid, state.burning, next.burning));
      for (int h = 0; h < grid.num_areas(); ++h) {
        const AreaEstimate& area = est.areas[h];
        if (area.plus.has_data && std::isfinite(area.plus.nu)) {
          plus[h].values.push_back(area.plus.value);
          plus[h].nus.push_back(area.plus.nu);
          plus[h].periods.push_back(t);
          best = std::max(best, LikelihoodRatioLearner::max_split_statistic(plus[h]).first);
        }
        if (area.minus.has_data && std::isfinite(area.minus.nu)) {
          minus[h].values.push_back(area.minus.value);
          minus[h].nus.push_back(area.minus.nu);
          minus[h].periods.push_back(t);
          best = std::max(best, LikelihoodRatioLearner::max_split_statistic(minus[h]).first);
        }
      }
      state = next;
    }
    maxima.push_back(best);
  }
  std::sort(maxima.begin(), maxima.end());
  return maxima;
}

}  // namespace gridfire
