#include "gridfire/config.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace gridfire {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

}  // namespace

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  const std::filesystem::path base = std::filesystem::path(path).parent_path();

  ExperimentConfig cfg;
  bool have_lr_threshold = false;
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    raw = trim(raw);
    if (raw.empty()) continue;
    const auto eq = raw.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("config line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(raw.substr(0, eq));
    const std::string value = trim(raw.substr(eq + 1));
    try {
      if (key == "network") {
        cfg.network_file = (base / value).string();
      } else if (key == "partition_file") {
        cfg.partition_file = (base / value).string();
      } else if (key == "grid_width") {
        cfg.grid_width = std::stoi(value);
      } else if (key == "grid_height") {
        cfg.grid_height = std::stoi(value);
      } else if (key == "blocks_x") {
        cfg.blocks_x = std::stoi(value);
      } else if (key == "blocks_y") {
        cfg.blocks_y = std::stoi(value);
      } else if (key == "num_areas") {
        cfg.num_areas = std::stoi(value);
      } else if (key == "d_bar") {
        cfg.station_threshold = std::stod(value);
      } else if (key == "shed_cost") {
        cfg.shed_cost = std::stod(value);
      } else if (key == "degree_cap") {
        cfg.degree_cap = std::stoi(value);
      } else if (key == "horizon") {
        cfg.horizon = std::stoi(value);
      } else if (key == "lambda_plus") {
        cfg.lambda_plus = std::stoi(value);
      } else if (key == "lambda_minus") {
        cfg.lambda_minus = std::stoi(value);
      } else if (key == "p_plus_min") {
        cfg.p_plus_range.lo = std::stod(value);
      } else if (key == "p_plus_max") {
        cfg.p_plus_range.hi = std::stod(value);
      } else if (key == "p_minus_min") {
        cfg.p_minus_range.lo = std::stod(value);
      } else if (key == "p_minus_max") {
        cfg.p_minus_range.hi = std::stod(value);
      } else if (key == "origins") {
        cfg.origins = std::stoi(value);
      } else if (key == "origin_rule") {
        if (value != "uniform" && value != "per_area")
          throw std::runtime_error("origin_rule must be uniform or per_area");
        cfg.origin_rule = value;
      } else if (key == "sequences") {
        cfg.sequences = std::stoi(value);
      } else if (key == "reps") {
        cfg.reps = std::stoi(value);
      } else if (key == "full_scale_sequences") {
        cfg.full_scale_sequences = std::stoi(value);
      } else if (key == "full_scale_reps") {
        cfg.full_scale_reps = std::stoi(value);
      } else if (key == "seed") {
        cfg.seed = std::stoull(value);
      } else if (key == "algorithms") {
        cfg.algorithms = split_list(value);
        if (cfg.algorithms.empty()) throw std::runtime_error("empty algorithm list");
      } else if (key == "lr_threshold") {
        cfg.lr_threshold = std::stod(value);
        have_lr_threshold = true;
      } else if (key == "interval_policy") {
        if (value == "geometric") cfg.interval_policy = IntervalPolicy::kGeometric;
        else if (value == "exhaustive") cfg.interval_policy = IntervalPolicy::kExhaustive;
        else throw std::runtime_error("interval_policy must be geometric or exhaustive");
      } else if (key == "log_factor") {
        if (value == "ln2HT") cfg.log_factor = LogFactorMode::kLn2HT;
        else if (value == "ln2T") cfg.log_factor = LogFactorMode::kLn2T;
        else throw std::runtime_error("log_factor must be ln2HT or ln2T");
      } else {
        throw std::runtime_error("unknown config key: " + key);
      }
    } catch (const std::exception& e) {
      throw std::runtime_error("config line " + std::to_string(line_no) + ": " + e.what());
    }
  }

  if (cfg.network_file.empty()) throw std::runtime_error("config is missing `network`");
  if (cfg.grid_width < 1 || cfg.grid_height < 1)
    throw std::runtime_error("config needs positive grid_width and grid_height");
  if (cfg.horizon < 2) throw std::runtime_error("horizon must be at least 2");
  if (cfg.sequences < 1 || cfg.reps < 1)
    throw std::runtime_error("sequences and reps must be at least 1");
  if (cfg.lambda_plus >= cfg.horizon || cfg.lambda_minus >= cfg.horizon)
    throw std::runtime_error("change-point counts must be below the horizon");
  if (cfg.partition_file.empty()) cfg.num_areas = cfg.blocks_x * cfg.blocks_y;
  const bool uses_lr =
      std::find(cfg.algorithms.begin(), cfg.algorithms.end(), "lr") != cfg.algorithms.end();
  if (uses_lr && !have_lr_threshold)
    throw std::runtime_error("algorithm `lr` requires lr_threshold in the config");
  return cfg;
}

GridMap build_grid(const ExperimentConfig& cfg) {
  if (cfg.partition_file.empty())
    return GridMap::with_block_partition(cfg.grid_width, cfg.grid_height, cfg.blocks_x,
                                         cfg.blocks_y);
  std::ifstream in(cfg.partition_file);
  if (!in) throw std::runtime_error("cannot open partition file: " + cfg.partition_file);
  std::vector<int> area;
  area.reserve(static_cast<std::size_t>(cfg.grid_width) * cfg.grid_height);
  int h;
  while (in >> h) area.push_back(h);
  if (area.size() != static_cast<std::size_t>(cfg.grid_width) * cfg.grid_height)
    throw std::runtime_error("partition file must list width*height area indices");
  return GridMap::with_explicit_partition(cfg.grid_width, cfg.grid_height, cfg.num_areas, area);
}

}  // namespace gridfire
