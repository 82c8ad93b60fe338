// Copyright 2026 The irsbeam Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef IRSBEAM_HARNESS_HPP_
#define IRSBEAM_HARNESS_HPP_

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <optional>
#include <ostream>
#include <regex>
#include <stdexcept>
#include <string>
#include <thread>
#include <tuple>
#include <utility>
#include <vector>

#include <yaml-cpp/yaml.h>

#include "irsbeam/baselines.hpp"
#include "irsbeam/channel.hpp"
#include "irsbeam/config.hpp"
#include "irsbeam/jpabf.hpp"
#include "irsbeam/model.hpp"
#include "irsbeam/rng.hpp"

namespace irsbeam {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct MethodIntractable : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class SweepKind { PowerBudget, IrsSize, Convergence, Single };

enum class Method {
  GbdBf,
  ScsiBf,
  JpabfFOpt,
  JpabfFScale,
  AoRand,
  AoZero,
  IgnoreGbdBf,
  IgnoreScsiBf,
  IgnoreFOpt,
  IgnoreFScale,
};

namespace detail {

struct MethodInfo {
  Method method;
  const char* name;
  bool single_user;
};

inline constexpr MethodInfo kMethods[] = {
    {Method::GbdBf, "gbd_bf", true},
    {Method::ScsiBf, "scsi_bf", true},
    {Method::JpabfFOpt, "jpabf_fopt", false},
    {Method::JpabfFScale, "jpabf_fscale", false},
    {Method::AoRand, "ao_rand", false},
    {Method::AoZero, "ao_zero", false},
    {Method::IgnoreGbdBf, "ignore_gbd_bf", true},
    {Method::IgnoreScsiBf, "ignore_scsi_bf", true},
    {Method::IgnoreFOpt, "ignore_fopt", false},
    {Method::IgnoreFScale, "ignore_fscale", false},
};

}  // namespace detail

inline std::string method_name(Method m) {
  for (const auto& info : detail::kMethods)
    if (info.method == m) return info.name;
  throw std::invalid_argument("method_name: unknown method");
}

inline Method parse_method(const std::string& name) {
  for (const auto& info : detail::kMethods)
    if (name == info.name) return info.method;
  throw ConfigError("unknown method '" + name + "'");
}

inline bool is_single_user(Method m) {
  for (const auto& info : detail::kMethods)
    if (info.method == m) return info.single_user;
  return false;
}

inline bool uses_gbd(Method m) { return m == Method::GbdBf || m == Method::IgnoreGbdBf; }

inline SweepKind parse_sweep(const std::string& s) {
  if (s == "sweep-power" || s == "power") return SweepKind::PowerBudget;
  if (s == "sweep-size" || s == "size") return SweepKind::IrsSize;
  if (s == "convergence") return SweepKind::Convergence;
  if (s == "single") return SweepKind::Single;
  throw ConfigError("unknown sweep '" + s + "'");
}

struct ExperimentSpec {
  SweepKind sweep = SweepKind::Single;
  std::vector<std::string> methods;
  std::vector<double> p0_grid_dbm;
  /// (m_x, m_y) pairs.
  std::vector<std::pair<int, int>> m_grid;
  int k = 1;
  int n_realizations = 100;
  std::uint64_t seed = 0;
  std::string output_path;
  /// Everything except p0, IRS size and user count.
  SystemConfig system;
  int gbd_max_elements = 20;
  /// Measure wall time per run. Off by default so output bytes depend only
  /// on the spec.
  bool timing = false;

  void validate() const {
    if (methods.empty()) throw ConfigError("methods must not be empty");
    if (p0_grid_dbm.empty()) throw ConfigError("p0 grid must not be empty");
    if (m_grid.empty()) throw ConfigError("irs grid must not be empty");
    if (n_realizations < 1) throw ConfigError("realizations must be >= 1");
    if (k < 1) throw ConfigError("users must be >= 1");
    for (const auto& [mx, my] : m_grid)
      if (mx < 1 || my < 1) throw ConfigError("irs dimensions must be >= 1");
    if (sweep == SweepKind::Single && (p0_grid_dbm.size() != 1 || m_grid.size() != 1))
      throw ConfigError("single expects exactly one p0 and one irs size");
    if (sweep == SweepKind::IrsSize && p0_grid_dbm.size() != 1)
      throw ConfigError("sweep-size expects exactly one p0");
    if (sweep == SweepKind::PowerBudget && m_grid.size() != 1)
      throw ConfigError("sweep-power expects exactly one irs size");
    for (const auto& name : methods) {
      const Method m = parse_method(name);
      if (is_single_user(m) && k != 1) throw ConfigError(name + " is single-user but users = " + std::to_string(k));
      if (uses_gbd(m))
        for (const auto& [mx, my] : m_grid)
          if (mx * my > gbd_max_elements)
            throw MethodIntractable(name + ": " + std::to_string(mx * my) + " elements exceeds the cap of " +
                                    std::to_string(gbd_max_elements));
    }
    try {
      system.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }
};

/// Parses "30 dBm", "1.5 W" or "12 mW" to watts. A bare number is rejected.
inline double parse_power_watts(const std::string& text) {
  static const std::regex re(R"(^\s*([-+]?[0-9]*\.?[0-9]+(?:[eE][-+]?[0-9]+)?)\s*(dBm|W|mW)\s*$)");
  std::smatch m;
  if (!std::regex_match(text, m, re)) throw ConfigError("power '" + text + "' needs a unit: dBm, W or mW");
  const double v = std::stod(m[1].str());
  const std::string unit = m[2].str();
  if (unit == "dBm") return dbm_to_watts(v);
  if (v < 0) throw ConfigError("power '" + text + "' is negative");
  return unit == "W" ? v : 1e-3 * v;
}

namespace detail {

template <typename T>
T scalar_as(const YAML::Node& n, const std::string& key) {
  try {
    return n.as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError("bad value for '" + key + "'");
  }
}

inline void read_system(const YAML::Node& node, SystemConfig& cfg) {
  if (!node.IsMap()) throw ConfigError("'system' must be a map");
  for (const auto& kv : node) {
    const std::string key = kv.first.as<std::string>();
    const YAML::Node& v = kv.second;
    if (key == "bs_antennas") {
      cfg.n_bs_antennas = scalar_as<int>(v, key);
    } else if (key == "p_pin") {
      cfg.p_pin = parse_power_watts(scalar_as<std::string>(v, key));
    } else if (key == "noise") {
      cfg.noise_power = parse_power_watts(scalar_as<std::string>(v, key));
    } else if (key == "tolerance") {
      cfg.convergence_tol = scalar_as<double>(v, key);
    } else if (key == "wavelength") {
      cfg.wavelength = scalar_as<double>(v, key);
    } else {
      throw ConfigError("unknown key 'system." + key + "'");
    }
  }
}

}  // namespace detail

inline ExperimentSpec parse_experiment(const YAML::Node& root) {
  if (!root.IsMap()) throw ConfigError("config root must be a map");
  ExperimentSpec spec;
  for (const auto& kv : root) {
    const std::string key = kv.first.as<std::string>();
    const YAML::Node& v = kv.second;
    if (key == "sweep") {
      spec.sweep = parse_sweep(detail::scalar_as<std::string>(v, key));
    } else if (key == "methods") {
      if (!v.IsSequence()) throw ConfigError("'methods' must be a list");
      for (const auto& m : v) spec.methods.push_back(detail::scalar_as<std::string>(m, key));
    } else if (key == "p0") {
      if (!v.IsSequence()) throw ConfigError("'p0' must be a list");
      for (const auto& p : v) {
        const double w = parse_power_watts(detail::scalar_as<std::string>(p, key));
        if (!(w > 0)) throw ConfigError("p0 values must be positive");
        spec.p0_grid_dbm.push_back(watts_to_dbm(w));
      }
    } else if (key == "irs") {
      if (!v.IsSequence()) throw ConfigError("'irs' must be a list of [m_x, m_y]");
      for (const auto& e : v) {
        if (!e.IsSequence() || e.size() != 2) throw ConfigError("'irs' entries must be [m_x, m_y]");
        spec.m_grid.emplace_back(detail::scalar_as<int>(e[0], key), detail::scalar_as<int>(e[1], key));
      }
    } else if (key == "users") {
      spec.k = detail::scalar_as<int>(v, key);
    } else if (key == "realizations") {
      spec.n_realizations = detail::scalar_as<int>(v, key);
    } else if (key == "seed") {
      spec.seed = detail::scalar_as<std::uint64_t>(v, key);
    } else if (key == "output") {
      spec.output_path = detail::scalar_as<std::string>(v, key);
    } else if (key == "gbd_max_elements") {
      spec.gbd_max_elements = detail::scalar_as<int>(v, key);
    } else if (key == "system") {
      detail::read_system(v, spec.system);
    } else {
      throw ConfigError("unknown key '" + key + "'");
    }
  }
  return spec;
}

inline ExperimentSpec load_experiment(const std::string& path) {
  try {
    return parse_experiment(YAML::LoadFile(path));
  } catch (const YAML::Exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

struct ResultRow {
  std::string method;
  std::uint64_t seed = 0;
  int realization = 0;
  double p0_dbm = 0.0;
  int m = 0;
  int k = 0;
  double sum_rate = 0.0;
  double p_bs_w = 0.0;
  double p_irs_ps_w = 0.0;
  int n_diodes_on = 0;
  int iterations = 0;
  bool converged = false;
  double wall_ms = 0.0;
  bool infeasible = false;
  /// Last row of its run. Only convergence sweeps emit non-final rows.
  bool final = true;
};

inline constexpr const char* kCsvHeader =
    "method,seed,realization,p0_dbm,m,k,sum_rate_bps_hz,p_bs_w,p_irs_ps_w,n_diodes_on,iterations,converged,wall_ms,"
    "infeasible";

inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

inline void write_csv(std::ostream& os, const std::vector<ResultRow>& rows) {
  os << kCsvHeader << '\n';
  for (const auto& r : rows) {
    os << r.method << ',' << r.seed << ',' << r.realization << ',' << format_double(r.p0_dbm) << ',' << r.m << ','
       << r.k << ',' << format_double(r.sum_rate) << ',' << format_double(r.p_bs_w) << ','
       << format_double(r.p_irs_ps_w) << ',' << r.n_diodes_on << ',' << r.iterations << ','
       << (r.converged ? 1 : 0) << ',' << format_double(r.wall_ms) << ',' << (r.infeasible ? 1 : 0) << '\n';
  }
}

namespace detail {

struct MethodRun {
  Solution solution;
  std::vector<double> rate_history;
  std::vector<PowerBreakdown> power_history;
};

inline MethodRun run_method(Method method, const Drop& drop, const SystemConfig& cfg, std::uint64_t method_seed) {
  MethodRun out;
  switch (method) {
    case Method::GbdBf:
      out.solution = run_proposed(ProposedMethod::GbdBf, drop.channels, drop.geometry, cfg);
      break;
    case Method::ScsiBf:
      out.solution = run_proposed(ProposedMethod::ScsiBf, drop.channels, drop.geometry, cfg);
      break;
    case Method::JpabfFOpt:
    case Method::JpabfFScale: {
      JpabfResult r = run_jpabf(method == Method::JpabfFOpt ? JpabfVariant::FOpt : JpabfVariant::FScale,
                                drop.channels, cfg);
      out.solution = std::move(r.solution);
      out.rate_history = std::move(r.rate_history);
      out.power_history = std::move(r.power_history);
      break;
    }
    case Method::AoRand:
    case Method::AoZero: {
      Rng rng(method_seed);
      AoResult r = run_ao(method == Method::AoRand ? AoInit::RandomFeasible : AoInit::AllOff, drop.channels, cfg, rng);
      out.solution = std::move(r.solution);
      // Drop the starting point so entry i - 1 follows iteration i.
      out.rate_history.assign(r.rate_history.begin() + 1, r.rate_history.end());
      out.power_history.assign(r.power_history.begin() + 1, r.power_history.end());
      break;
    }
    case Method::IgnoreGbdBf:
      out.solution = run_ignore_psdpc(ProposedMethod::GbdBf, drop.channels, drop.geometry, cfg);
      break;
    case Method::IgnoreScsiBf:
      out.solution = run_ignore_psdpc(ProposedMethod::ScsiBf, drop.channels, drop.geometry, cfg);
      break;
    case Method::IgnoreFOpt:
      out.solution = run_ignore_psdpc(ProposedMethod::JpabfFOpt, drop.channels, drop.geometry, cfg);
      break;
    case Method::IgnoreFScale:
      out.solution = run_ignore_psdpc(ProposedMethod::JpabfFScale, drop.channels, drop.geometry, cfg);
      break;
  }
  return out;
}

struct Task {
  std::size_t m_index;
  std::size_t p_index;
  int realization;
};

}  // namespace detail

/// Runs every (irs size, p0, realization, method) combination. Rows come out
/// in that nesting order whatever the thread count.
inline std::vector<ResultRow> run_experiment(const ExperimentSpec& spec, int threads = 1) {
  spec.validate();
  std::vector<Method> methods;
  for (const auto& name : spec.methods) methods.push_back(parse_method(name));

  std::vector<detail::Task> tasks;
  for (std::size_t mi = 0; mi < spec.m_grid.size(); ++mi)
    for (std::size_t pi = 0; pi < spec.p0_grid_dbm.size(); ++pi)
      for (int r = 0; r < spec.n_realizations; ++r) tasks.push_back({mi, pi, r});

  std::vector<std::vector<ResultRow>> results(tasks.size());
  std::vector<std::exception_ptr> errors(tasks.size());
  auto run_task = [&](std::size_t t) {
    const detail::Task& task = tasks[t];
    SystemConfig cfg = spec.system;
    cfg.irs_x = spec.m_grid[task.m_index].first;
    cfg.irs_y = spec.m_grid[task.m_index].second;
    cfg.n_users = spec.k;
    const double p0_dbm = spec.p0_grid_dbm[task.p_index];
    cfg.p0 = dbm_to_watts(p0_dbm);
    // Channels depend on the realization only, so every method and p0 sees
    // the same draws.
    const auto r = static_cast<std::uint64_t>(task.realization);
    const Drop drop = draw_drop(cfg, derive_seed(spec.seed, {r}));
    auto& rows = results[t];
    for (std::size_t i = 0; i < methods.size(); ++i) {
      const Method method = methods[i];
      const std::uint64_t method_seed = derive_seed(spec.seed, {r, hash_name(spec.methods[i])});
      const auto t0 = std::chrono::steady_clock::now();
      const detail::MethodRun run = detail::run_method(method, drop, cfg, method_seed);
      const double ms =
          spec.timing ? std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count() : 0.0;
      ResultRow base;
      base.method = spec.methods[i];
      base.seed = spec.seed;
      base.realization = task.realization;
      base.p0_dbm = p0_dbm;
      base.m = cfg.n_irs();
      base.k = cfg.n_users;
      if (spec.sweep == SweepKind::Convergence && !run.rate_history.empty()) {
        for (std::size_t it = 0; it < run.rate_history.size(); ++it) {
          ResultRow row = base;
          const bool last = it + 1 == run.rate_history.size();
          row.sum_rate = run.rate_history[it];
          row.p_bs_w = run.power_history[it].p_bs_transmit;
          row.p_irs_ps_w = run.power_history[it].p_irs_ps;
          row.n_diodes_on = cfg.p_pin > 0 ? static_cast<int>(std::lround(row.p_irs_ps_w / cfg.p_pin)) : 0;
          row.iterations = static_cast<int>(it) + 1;
          row.converged = last && run.solution.converged;
          row.wall_ms = last ? ms : 0.0;
          row.final = last;
          rows.push_back(std::move(row));
        }
        // The final solution is what the last history entry describes.
        rows.back().n_diodes_on = run.solution.pins.on_count();
        continue;
      }
      ResultRow row = base;
      const Solution& s = run.solution;
      row.infeasible = s.infeasible;
      row.sum_rate = s.infeasible ? 0.0 : s.sum_rate;
      row.p_bs_w = s.power.p_bs_transmit;
      row.p_irs_ps_w = s.power.p_irs_ps;
      row.n_diodes_on = s.pins.on_count();
      row.iterations = s.iterations;
      row.converged = s.converged;
      row.wall_ms = ms;
      rows.push_back(std::move(row));
    }
  };

  const int n_threads = std::max(1, std::min<int>(threads, static_cast<int>(tasks.size())));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t t = next.fetch_add(1); t < tasks.size(); t = next.fetch_add(1)) {
      try {
        run_task(t);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    }
  };
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  std::vector<ResultRow> out;
  for (auto& rows : results)
    for (auto& row : rows) out.push_back(std::move(row));
  return out;
}

struct SummaryRow {
  std::string method;
  double p0_dbm = 0.0;
  int m = 0;
  int k = 0;
  int n = 0;
  int n_infeasible = 0;
  double mean_rate = 0.0;
  double stderr_rate = 0.0;
  double mean_p_bs_w = 0.0;
  double mean_p_irs_ps_w = 0.0;
  double mean_iterations = 0.0;
  double mean_wall_ms = 0.0;
};

/// Mean and standard error per (method, p0, m, k) over final, feasible rows.
/// Groups keep first-appearance order.
inline std::vector<SummaryRow> summarize(const std::vector<ResultRow>& rows) {
  using Key = std::tuple<std::string, double, int, int>;
  std::map<Key, std::size_t> index;
  std::vector<SummaryRow> out;
  std::vector<double> sum_sq;
  for (const auto& r : rows) {
    if (!r.final) continue;
    const Key key{r.method, r.p0_dbm, r.m, r.k};
    auto it = index.find(key);
    if (it == index.end()) {
      it = index.emplace(key, out.size()).first;
      SummaryRow s;
      s.method = r.method;
      s.p0_dbm = r.p0_dbm;
      s.m = r.m;
      s.k = r.k;
      out.push_back(s);
      sum_sq.push_back(0.0);
    }
    SummaryRow& s = out[it->second];
    if (r.infeasible) {
      ++s.n_infeasible;
      continue;
    }
    // Welford.
    ++s.n;
    const double d = r.sum_rate - s.mean_rate;
    s.mean_rate += d / s.n;
    sum_sq[it->second] += d * (r.sum_rate - s.mean_rate);
    s.mean_p_bs_w += (r.p_bs_w - s.mean_p_bs_w) / s.n;
    s.mean_p_irs_ps_w += (r.p_irs_ps_w - s.mean_p_irs_ps_w) / s.n;
    s.mean_iterations += (r.iterations - s.mean_iterations) / s.n;
    s.mean_wall_ms += (r.wall_ms - s.mean_wall_ms) / s.n;
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    const int n = out[i].n;
    out[i].stderr_rate = n > 1 ? std::sqrt(sum_sq[i] / (n - 1) / n) : 0.0;
  }
  return out;
}

inline void write_summary_csv(std::ostream& os, const std::vector<SummaryRow>& rows) {
  os << "method,p0_dbm,m,k,n,n_infeasible,mean_sum_rate,stderr_sum_rate,mean_p_bs_w,mean_p_irs_ps_w,mean_iterations,"
        "mean_wall_ms\n";
  for (const auto& s : rows) {
    os << s.method << ',' << format_double(s.p0_dbm) << ',' << s.m << ',' << s.k << ',' << s.n << ','
       << s.n_infeasible;
    // No feasible run, nothing to average.
    if (s.n == 0) {
      os << ",,,,,,\n";
      continue;
    }
    os << ',' << format_double(s.mean_rate) << ',' << format_double(s.stderr_rate) << ','
       << format_double(s.mean_p_bs_w) << ',' << format_double(s.mean_p_irs_ps_w) << ','
       << format_double(s.mean_iterations) << ',' << format_double(s.mean_wall_ms) << '\n';
  }
}

}  // namespace irsbeam

#endif  // IRSBEAM_HARNESS_HPP_
