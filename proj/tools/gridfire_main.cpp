#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "gridfire/config.hpp"
#include "gridfire/harness.hpp"

namespace {

using namespace gridfire;

struct CommonArgs {
  std::string config_path;
  std::string out_dir = "out";
  std::uint64_t seed = 0;
  bool seed_set = false;
  int horizon_override = 0;
};

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "experiment config file")->required();
  cmd->add_option("--out", args.out_dir, "output directory");
  cmd->add_option("--seed", args.seed, "master seed override")
      ->each([&](const std::string&) { args.seed_set = true; });
  cmd->add_option("--horizon", args.horizon_override, "horizon override (periods)");
}

ExperimentConfig load_with_overrides(const CommonArgs& args) {
  if (!std::filesystem::exists(args.config_path))
    throw UsageError("config file not found: " + args.config_path);
  ExperimentConfig cfg = load_config(args.config_path);
  if (args.seed_set) cfg.seed = args.seed;
  if (args.horizon_override > 0) cfg.horizon = args.horizon_override;
  return cfg;
}

int cmd_simulate(const CommonArgs& args) {
  const ExperimentConfig cfg = load_with_overrides(args);
  const GridMap grid = build_grid(cfg);
  Rng rng(cfg.seed, 0x53494dULL, 0);
  const ParamSchedule schedule =
      generate_schedule(grid.num_areas(), cfg.horizon, cfg.lambda_plus, cfg.lambda_minus,
                        cfg.p_plus_range, cfg.p_minus_range, rng);
  const std::vector<NodeId> origins = draw_origins(cfg, grid, rng);
  const auto trajectory = simulate_trajectory(grid, origins, schedule, cfg.horizon, rng);

  std::filesystem::create_directories(args.out_dir);
  std::ofstream out(std::filesystem::path(args.out_dir) / "trajectory.csv");
  write_trajectory_csv(grid, trajectory, out);
  std::cout << "simulated " << cfg.horizon << " periods; final burning cells: "
            << trajectory.back().burning.count() << "\n";
  std::cout << "wrote " << args.out_dir << "/trajectory.csv\n";
  return 0;
}

int cmd_estimate(const CommonArgs& args) {
  const ExperimentConfig cfg = load_with_overrides(args);
  const GridMap grid = build_grid(cfg);
  Rng rng(cfg.seed, 0x455354ULL, 0);
  const ParamSchedule schedule =
      generate_schedule(grid.num_areas(), cfg.horizon, cfg.lambda_plus, cfg.lambda_minus,
                        cfg.p_plus_range, cfg.p_minus_range, rng);
  const std::vector<NodeId> origins = draw_origins(cfg, grid, rng);
  const auto trajectory = simulate_trajectory(grid, origins, schedule, cfg.horizon, rng);

  std::vector<StepEstimate> history;
  history.reserve(trajectory.size() - 1);
  for (std::size_t i = 0; i + 1 < trajectory.size(); ++i)
    history.push_back(
        mle_step(collect_observation(grid, trajectory[i].burning, trajectory[i + 1].burning)));

  std::filesystem::create_directories(args.out_dir);
  const std::filesystem::path dir(args.out_dir);
  {
    std::ofstream out(dir / "estimates.csv");
    out << std::setprecision(12);
    write_estimates_csv(history, out);
  }
  const ResidualAnalysis analysis = residual_analysis(grid, trajectory, schedule);
  {
    std::ofstream out(dir / "qq_plus.csv");
    out << std::setprecision(12);
    write_qq_csv(analysis, Stream::kPlus, out);
  }
  {
    std::ofstream out(dir / "qq_minus.csv");
    out << std::setprecision(12);
    write_qq_csv(analysis, Stream::kMinus, out);
  }
  std::cout << "wrote " << args.out_dir << "/estimates.csv, qq_plus.csv, qq_minus.csv\n";
  return 0;
}

int cmd_experiment(const CommonArgs& args, const ExperimentOptions& opt_in, int reps,
                   int sequences, const std::string& algorithms,
                   const std::string& interval_policy) {
  ExperimentConfig cfg = load_with_overrides(args);
  if (reps > 0) cfg.reps = reps;
  if (sequences > 0) cfg.sequences = sequences;
  if (!algorithms.empty()) {
    cfg.algorithms.clear();
    std::istringstream ss(algorithms);
    std::string item;
    while (std::getline(ss, item, ',')) cfg.algorithms.push_back(item);
  }
  if (!interval_policy.empty()) {
    if (interval_policy == "geometric") cfg.interval_policy = IntervalPolicy::kGeometric;
    else if (interval_policy == "exhaustive") cfg.interval_policy = IntervalPolicy::kExhaustive;
    else throw CLI::ValidationError("--interval-policy must be geometric or exhaustive");
  }

  ExperimentOptions options = opt_in;
  options.out_dir = args.out_dir;
  const auto start = std::chrono::steady_clock::now();
  const RegretRecord record = run_experiment(cfg, options);
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  {
    std::filesystem::create_directories(args.out_dir);
    std::ofstream info(std::filesystem::path(args.out_dir) / "run_info.txt");
    info << "config: " << args.config_path << "\n"
         << "seed: " << cfg.seed << "\n"
         << "replications: " << record.replications << "\n"
         << "horizon: " << record.horizon << "\n"
         << "lp_solves: " << record.lp_solves << "\n"
         << "infeasible_incidents: " << record.infeasible_incidents << "\n"
         << "runtime_seconds: " << secs << "\n";
  }
  std::cout << std::setprecision(6);
  for (std::size_t a = 0; a < record.algorithms.size(); ++a)
    std::cout << record.algorithms[a] << ": mean regret at T=" << record.horizon << " is "
              << record.mean[a][record.horizon - 1] << " (se "
              << record.se[a][record.horizon - 1] << ")\n";
  std::cout << "wrote " << args.out_dir << "/regret_curves.csv, summary.csv, run_info.txt\n";
  return 0;
}

int cmd_bound(const CommonArgs& args) {
  const ExperimentConfig cfg = load_with_overrides(args);
  const GridMap grid = build_grid(cfg);
  const PowerNetwork net =
      PowerNetwork::load_file(cfg.network_file, cfg.station_threshold, grid, cfg.degree_cap);
  const double k_plus = sensitivity_k_plus(net, cfg.shed_cost);
  const double k_minus = sensitivity_k_minus(net, cfg.shed_cost);
  const NuCaps caps = estimate_nu_caps(cfg, grid);
  const std::vector<int> lambda_plus(grid.num_areas(), cfg.lambda_plus);
  const std::vector<int> lambda_minus(grid.num_areas(), cfg.lambda_minus);
  const double bound = regret_bound(k_plus, k_minus, lambda_plus, lambda_minus, caps.plus,
                                      caps.minus, cfg.horizon);
  std::cout << std::setprecision(8);
  std::cout << "K+ = " << k_plus << "\nK- = " << k_minus << "\n";
  for (int h = 0; h < grid.num_areas(); ++h)
    std::cout << "area " << (h + 1) << ": nu+ cap = " << caps.plus[h]
              << ", nu- cap = " << caps.minus[h] << "\n";
  std::cout << "regret bound at T=" << cfg.horizon << ": " << bound << "\n";
  return 0;
}

int cmd_calibrate_lr(const CommonArgs& args, int replications) {
  const ExperimentConfig cfg = load_with_overrides(args);
  const GridMap grid = build_grid(cfg);
  const PowerNetwork net =
      PowerNetwork::load_file(cfg.network_file, cfg.station_threshold, grid, cfg.degree_cap);
  const auto maxima = lr_null_max_statistics(cfg, grid, net, replications);
  const std::size_t idx = static_cast<std::size_t>(0.95 * (maxima.size() - 1));
  std::cout << std::setprecision(8);
  std::cout << "null replications: " << maxima.size() << "\n"
            << "median max statistic: " << maxima[maxima.size() / 2] << "\n"
            << "95th percentile (5% per-episode false alarm): " << maxima[idx] << "\n"
            << "suggested lr_threshold = " << maxima[idx] << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bushfire-aware online dispatch simulator"};
  app.name("gridfire");
  app.require_subcommand(1);

  CommonArgs sim_args, est_args, exp_args, bound_args, cal_args;
  ExperimentOptions exp_options;
  int exp_reps = 0, exp_sequences = 0, cal_reps = 200;
  std::string exp_algorithms, exp_interval_policy;

  CLI::App* sim = app.add_subcommand("simulate", "simulate one fire trajectory, write CSV");
  add_common(sim, sim_args);

  CLI::App* est = app.add_subcommand("estimate", "per-period MLE and Q-Q analysis on a synthetic run");
  est->alias("analyze");
  add_common(est, est_args);

  CLI::App* exp = app.add_subcommand("experiment", "full regret study across algorithms");
  add_common(exp, exp_args);
  exp->add_option("--reps", exp_reps, "replications per sequence override");
  exp->add_option("--sequences", exp_sequences, "parameter sequences override");
  exp->add_option("--algorithms", exp_algorithms, "comma-separated algorithm list override");
  exp->add_option("--interval-policy", exp_interval_policy, "geometric or exhaustive");
  exp->add_option("--threads", exp_options.threads, "worker threads (0 = hardware)");
  exp->add_flag("--full-scale", exp_options.full_scale, "paper-scale replication counts");
  exp->add_flag("--step-log", exp_options.step_log, "write per-step log of the first replication");

  CLI::App* bnd = app.add_subcommand("bound", "report the theoretical regret bound constants");
  add_common(bnd, bound_args);

  CLI::App* cal = app.add_subcommand("calibrate-lr",
                                     "calibrate the likelihood-ratio benchmark threshold under the null");
  add_common(cal, cal_args);
  cal->add_option("--reps", cal_reps, "null replications");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);  // prints help, exit 0
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;  // usage error
  }

  try {
    if (sim->parsed()) return cmd_simulate(sim_args);
    if (est->parsed()) return cmd_estimate(est_args);
    if (exp->parsed())
      return cmd_experiment(exp_args, exp_options, exp_reps, exp_sequences, exp_algorithms,
                            exp_interval_policy);
    if (bnd->parsed()) return cmd_bound(bound_args);
    if (cal->parsed()) return cmd_calibrate_lr(cal_args, cal_reps);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
