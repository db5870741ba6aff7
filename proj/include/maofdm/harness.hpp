#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "maofdm/baselines.hpp"
#include "maofdm/pga.hpp"
#include "maofdm/rate_power.hpp"
#include "maofdm/scenario.hpp"

namespace maofdm {

enum class Scheme { pga_rate, pga_cir, fpa, as, upper_bound };

inline std::string scheme_name(Scheme s) {
  switch (s) {
    case Scheme::pga_rate: return "pga_rate";
    case Scheme::pga_cir: return "pga_cir";
    case Scheme::fpa: return "fpa";
    case Scheme::as: return "as";
    case Scheme::upper_bound: return "upper_bound";
  }
  throw std::logic_error("scheme_name: bad enum");
}

inline Scheme scheme_from_name(const std::string& name) {
  if (name == "pga_rate") return Scheme::pga_rate;
  if (name == "pga_cir") return Scheme::pga_cir;
  if (name == "fpa") return Scheme::fpa;
  if (name == "as") return Scheme::as;
  if (name == "upper_bound") return Scheme::upper_bound;
  throw std::invalid_argument("unknown scheme: " + name);
}

inline const std::vector<Scheme>& all_schemes() {
  static const std::vector<Scheme> v{Scheme::pga_rate, Scheme::pga_cir,
                                     Scheme::fpa, Scheme::as,
                                     Scheme::upper_bound};
  return v;
}

struct ExperimentSpec {
  ScenarioConfig scenario;
  PgaConfig pga;
  std::vector<Scheme> schemes = all_schemes();
  std::string sweep_param;           // empty: no sweep
  std::vector<double> sweep_values;  // ignored when sweep_param is empty
  int n_realizations = 300;
  std::string output_path = "results.csv";
  std::string format = "csv";
  AsGrid as_grid;
};

struct ResultRecord {
  std::string sweep_param = "none";
  double sweep_value = 0.0;
  std::string scheme;
  int realization = 0;
  double rate_bps_hz = 0.0;
  double cir_power_norm = 0.0;
  int iterations = 0;
  double wall_time_s = 0.0;
};

inline ScenarioConfig apply_sweep(const ScenarioConfig& base,
                                  const std::string& param, double value) {
  ScenarioConfig cfg = base;
  if (param == "region_half_width") {
    cfg.tx_half_width = value;
    cfg.rx_half_width = value;
  } else if (param == "L") {
    cfg.paths_per_tap = static_cast<int>(value);
  } else if (param == "T") {
    cfg.taps = static_cast<int>(value);
    if (cfg.cp_len < cfg.taps) cfg.cp_len = cfg.taps;
  } else if (param == "snr_db") {
    cfg.snr_db = value;
  } else if (param == "M") {
    cfg.subcarriers = static_cast<int>(value);
  } else {
    throw std::invalid_argument("unknown sweep parameter: " + param);
  }
  cfg.validate();
  return cfg;
}

// Carries whatever records completed before a worker failure, so callers can
// flush partial results.
struct ExperimentAborted : std::runtime_error {
  ExperimentAborted(const std::string& what, std::vector<ResultRecord> done)
      : std::runtime_error(what), partial(std::move(done)) {}
  std::vector<ResultRecord> partial;
};

namespace detail {

inline std::vector<ResultRecord> evaluate_realization(
    const ExperimentSpec& spec, const ScenarioConfig& cfg,
    const std::string& sweep_param, double sweep_value, int realization) {
  const WidebandChannel channel = sample_channel(cfg, realization);
  const LinkBudget lb = cfg.link_budget();
  const Region region_t = cfg.tx_region();
  const Region region_r = cfg.rx_region();
  const double g0 = cfg.g0();

  PgaConfig pga_cfg = spec.pga;
  std::uint64_t s = spec.pga.seed;
  pga_cfg.seed = splitmix64(s) ^ (static_cast<std::uint64_t>(realization) *
                                  0x9e3779b97f4a7c15ULL);

  std::vector<ResultRecord> out;
  out.reserve(spec.schemes.size());
  for (Scheme scheme : spec.schemes) {
    const auto start = std::chrono::steady_clock::now();
    ResultRecord rec;
    rec.sweep_param = sweep_param;
    rec.sweep_value = sweep_value;
    rec.scheme = scheme_name(scheme);
    rec.realization = realization;
    switch (scheme) {
      case Scheme::pga_rate: {
        const PgaTrace t =
            pga(channel, region_t, region_r, lb, pga_cfg, PgaMode::rate);
        rec.rate_bps_hz = t.best_objective;
        rec.cir_power_norm =
            cir_power(cir(channel, t.best_t, t.best_r)) / g0;
        rec.iterations = t.iterations;
        break;
      }
      case Scheme::pga_cir: {
        const PgaTrace t =
            pga(channel, region_t, region_r, lb, pga_cfg, PgaMode::cir_power);
        rec.rate_bps_hz = rate_waterfilled(
            cfr(cir(channel, t.best_t, t.best_r), lb.subcarriers), lb,
            pga_cfg.eps_p);
        rec.cir_power_norm = t.best_objective / g0;
        rec.iterations = t.iterations;
        break;
      }
      case Scheme::fpa: {
        rec.rate_bps_hz = fpa_rate(channel, lb, pga_cfg.eps_p);
        rec.cir_power_norm =
            cir_power(cir(channel, {0, 0, 0}, {0, 0, 0})) / g0;
        break;
      }
      case Scheme::as: {
        rec.rate_bps_hz = as_rate(channel, spec.as_grid, lb, pga_cfg.eps_p);
        rec.cir_power_norm =
            cir_power(cir(channel, {0, 0, 0}, {0, 0, 0})) / g0;
        break;
      }
      case Scheme::upper_bound: {
        const double g = channel_power_bound(channel);
        rec.rate_bps_hz = rate_upper_bound(g, lb);
        rec.cir_power_norm = g / g0;
        break;
      }
    }
    rec.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    out.push_back(std::move(rec));
  }
  return out;
}

}  // namespace detail

// Runs every sweep value x realization x scheme. Tasks are independent and
// execute on a small worker pool; records land in per-task slots so the
// output is identical at any concurrency level (wall_time_s aside). A worker
// failure aborts the run but completed records are returned alongside the
// error.
inline std::vector<ResultRecord> run_experiment(const ExperimentSpec& spec,
                                                int n_threads = 1) {
  if (spec.n_realizations < 1) {
    throw std::invalid_argument("run_experiment: n_realizations must be >= 1");
  }
  spec.scenario.validate();

  struct Task {
    ScenarioConfig cfg;
    std::string sweep_param;
    double sweep_value;
    int realization;
  };
  std::vector<Task> tasks;
  if (spec.sweep_param.empty()) {
    for (int n = 0; n < spec.n_realizations; ++n) {
      tasks.push_back({spec.scenario, "none", 0.0, n});
    }
  } else {
    if (spec.sweep_values.empty()) {
      throw std::invalid_argument("run_experiment: sweep without values");
    }
    for (double value : spec.sweep_values) {
      const ScenarioConfig cfg =
          apply_sweep(spec.scenario, spec.sweep_param, value);
      for (int n = 0; n < spec.n_realizations; ++n) {
        tasks.push_back({cfg, spec.sweep_param, value, n});
      }
    }
  }

  std::vector<std::vector<ResultRecord>> slots(tasks.size());
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::mutex error_mutex;
  std::string error_message;

  auto worker = [&]() {
    for (;;) {
      const std::size_t idx = next.fetch_add(1);
      if (idx >= tasks.size() || failed.load()) break;
      try {
        const Task& task = tasks[idx];
        slots[idx] = detail::evaluate_realization(
            spec, task.cfg, task.sweep_param, task.sweep_value,
            task.realization);
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(error_mutex);
        error_message = e.what();
        failed.store(true);
      }
    }
  };

  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  std::vector<ResultRecord> records;
  for (auto& slot : slots) {
    for (auto& rec : slot) records.push_back(std::move(rec));
  }
  std::stable_sort(records.begin(), records.end(),
                   [](const ResultRecord& a, const ResultRecord& b) {
                     if (a.sweep_value != b.sweep_value) {
                       return a.sweep_value < b.sweep_value;
                     }
                     if (a.scheme != b.scheme) return a.scheme < b.scheme;
                     return a.realization < b.realization;
                   });
  if (failed.load()) {
    throw ExperimentAborted("run_experiment aborted: " + error_message,
                            std::move(records));
  }
  return records;
}

// CDF(r) = (count of rates <= r) / n for each threshold.
inline std::vector<double> empirical_cdf(const std::vector<double>& rates,
                                         const std::vector<double>& thresholds) {
  if (rates.empty()) {
    throw std::invalid_argument("empirical_cdf: empty rates");
  }
  std::vector<double> out;
  out.reserve(thresholds.size());
  for (double r : thresholds) {
    std::size_t count = 0;
    for (double rate : rates) {
      if (rate <= r) ++count;
    }
    out.push_back(static_cast<double>(count) / rates.size());
  }
  return out;
}

namespace detail {
inline std::string format_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}
}  // namespace detail

inline std::string records_to_csv(const std::vector<ResultRecord>& records) {
  std::string out =
      "sweep_param,sweep_value,scheme,realization,rate_bps_hz,"
      "cir_power_norm,iterations,wall_time_s\n";
  for (const auto& r : records) {
    out += r.sweep_param;
    out += ',';
    out += detail::format_double(r.sweep_value);
    out += ',';
    out += r.scheme;
    out += ',';
    out += std::to_string(r.realization);
    out += ',';
    out += detail::format_double(r.rate_bps_hz);
    out += ',';
    out += detail::format_double(r.cir_power_norm);
    out += ',';
    out += std::to_string(r.iterations);
    out += ',';
    out += detail::format_double(r.wall_time_s);
    out += '\n';
  }
  return out;
}

inline nlohmann::json records_to_json(const std::vector<ResultRecord>& records) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : records) {
    arr.push_back({{"sweep_param", r.sweep_param},
                   {"sweep_value", r.sweep_value},
                   {"scheme", r.scheme},
                   {"realization", r.realization},
                   {"rate_bps_hz", r.rate_bps_hz},
                   {"cir_power_norm", r.cir_power_norm},
                   {"iterations", r.iterations},
                   {"wall_time_s", r.wall_time_s}});
  }
  return arr;
}

inline void emit(const std::vector<ResultRecord>& records,
                 const std::string& path, const std::string& format) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("emit: cannot open " + path);
  if (format == "csv") {
    out << records_to_csv(records);
  } else if (format == "json") {
    out << records_to_json(records).dump(2) << '\n';
  } else {
    throw std::invalid_argument("emit: unknown format " + format);
  }
  if (!out) throw std::runtime_error("emit: write failed for " + path);
}

inline std::vector<ResultRecord> parse_csv(std::istream& in) {
  std::vector<ResultRecord> records;
  std::string line;
  if (!std::getline(in, line)) {
    throw std::runtime_error("parse_csv: missing header");
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string field;
    ResultRecord r;
    std::getline(ls, r.sweep_param, ',');
    std::getline(ls, field, ',');
    r.sweep_value = std::stod(field);
    std::getline(ls, r.scheme, ',');
    std::getline(ls, field, ',');
    r.realization = std::stoi(field);
    std::getline(ls, field, ',');
    r.rate_bps_hz = std::stod(field);
    std::getline(ls, field, ',');
    r.cir_power_norm = std::stod(field);
    std::getline(ls, field, ',');
    r.iterations = std::stoi(field);
    std::getline(ls, field, ',');
    r.wall_time_s = std::stod(field);
    records.push_back(std::move(r));
  }
  return records;
}

// Flat key = value configuration; '#' starts a comment; unknown keys are
// errors.
inline ExperimentSpec parse_config(std::istream& in) {
  ExperimentSpec spec;
  std::string line;
  int line_no = 0;
  auto split_list = [](const std::string& s) {
    std::vector<std::string> items;
    std::istringstream ls(s);
    std::string item;
    while (std::getline(ls, item, ',')) {
      const auto b = item.find_first_not_of(" \t");
      const auto e = item.find_last_not_of(" \t");
      if (b != std::string::npos) items.push_back(item.substr(b, e - b + 1));
    }
    return items;
  };
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      if (line.find_first_not_of(" \t\r") != std::string::npos) {
        throw std::invalid_argument("config line " + std::to_string(line_no) +
                                    ": expected key = value");
      }
      continue;
    }
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      if (b == std::string::npos) return std::string();
      const auto e = s.find_last_not_of(" \t\r");
      return s.substr(b, e - b + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    try {
      if (key == "subcarriers") spec.scenario.subcarriers = std::stoi(value);
      else if (key == "cp_len") spec.scenario.cp_len = std::stoi(value);
      else if (key == "taps") spec.scenario.taps = std::stoi(value);
      else if (key == "paths_per_tap")
        spec.scenario.paths_per_tap = std::stoi(value);
      else if (key == "alpha") spec.scenario.alpha = std::stod(value);
      else if (key == "snr_db") spec.scenario.snr_db = std::stod(value);
      else if (key == "power") spec.scenario.power = std::stod(value);
      else if (key == "tx_half_width")
        spec.scenario.tx_half_width = std::stod(value);
      else if (key == "rx_half_width")
        spec.scenario.rx_half_width = std::stod(value);
      else if (key == "carrier_freq_hz")
        spec.scenario.carrier_freq_hz = std::stod(value);
      else if (key == "bandwidth_hz")
        spec.scenario.bandwidth_hz = std::stod(value);
      else if (key == "seed") spec.scenario.seed = std::stoull(value);
      else if (key == "k_max") spec.pga.k_max = std::stoi(value);
      else if (key == "zeta") spec.pga.zeta = std::stod(value);
      else if (key == "i_max") spec.pga.i_max = std::stoi(value);
      else if (key == "eps_p") spec.pga.eps_p = std::stod(value);
      else if (key == "dedup_tol") spec.pga.dedup_tol = std::stod(value);
      else if (key == "pga_seed") spec.pga.seed = std::stoull(value);
      else if (key == "schemes") {
        spec.schemes.clear();
        for (const auto& name : split_list(value)) {
          spec.schemes.push_back(scheme_from_name(name));
        }
      } else if (key == "sweep_param") {
        spec.sweep_param = value;
      } else if (key == "sweep_values") {
        spec.sweep_values.clear();
        for (const auto& item : split_list(value)) {
          spec.sweep_values.push_back(std::stod(item));
        }
      } else if (key == "n_realizations") {
        spec.n_realizations = std::stoi(value);
      } else if (key == "output_path") {
        spec.output_path = value;
      } else if (key == "format") {
        spec.format = value;
      } else if (key == "as_spacing") {
        spec.as_grid.spacing = std::stod(value);
      } else if (key == "as_count") {
        spec.as_grid.n_tx = spec.as_grid.n_rx = std::stoi(value);
      } else {
        throw std::invalid_argument("unknown config key: " + key);
      }
    } catch (const std::invalid_argument&) {
      throw;
    } catch (const std::exception&) {
      throw std::invalid_argument("config line " + std::to_string(line_no) +
                                  ": bad value for " + key);
    }
  }
  return spec;
}

inline ExperimentSpec load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config: " + path);
  return parse_config(in);
}

}  // namespace maofdm
