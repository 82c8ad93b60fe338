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

#ifndef IRSBEAM_BASELINES_HPP_
#define IRSBEAM_BASELINES_HPP_

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "irsbeam/channel.hpp"
#include "irsbeam/config.hpp"
#include "irsbeam/gbd.hpp"
#include "irsbeam/jpabf.hpp"
#include "irsbeam/model.hpp"
#include "irsbeam/rng.hpp"
#include "irsbeam/scsi.hpp"

namespace irsbeam {

enum class AoInit { RandomFeasible, AllOff };

struct AoOptions {
  int max_iterations = 100;
  int max_sweeps = 10;
};

struct AoResult {
  Solution solution;
  /// Entry 0 is the starting point, entry i follows iteration i.
  std::vector<double> rate_history;
  std::vector<PowerBreakdown> power_history;
};

/// Random start: on-count uniform over the affordable range, positions uniform.
inline PinVector random_feasible_pins(int m, const SystemConfig& cfg, Rng& rng) {
  PinVector b(static_cast<std::size_t>(m));
  if (cfg.p0 > cfg.p_pin * m) {
    for (int i = 0; i < m; ++i) b.set(static_cast<std::size_t>(i), (rng() & 1u) != 0);
    return b;
  }
  const int cap = cfg.p_pin > 0 ? std::min(m, static_cast<int>(std::floor(cfg.p0 / cfg.p_pin))) : m;
  std::uniform_int_distribution<int> count(0, std::max(0, cap));
  const int n_on = count(rng);
  std::vector<int> idx(static_cast<std::size_t>(m));
  std::iota(idx.begin(), idx.end(), 0);
  std::shuffle(idx.begin(), idx.end(), rng);
  for (int i = 0; i < n_on; ++i) b.set(static_cast<std::size_t>(idx[static_cast<std::size_t>(i)]), true);
  return b;
}

/// Full-budget precoder for fixed pins. One user: MRT. Several users: one
/// WMMSE step (receive update, then the KKT precoder) from `prev`, or the
/// matched filter when there is no previous precoder.
inline Precoder fixed_pin_precoder(const ChannelRealization& ch, const PinVector& pins, const SystemConfig& cfg,
                                   const Precoder* prev = nullptr) {
  const double p_rem = std::max(0.0, cfg.p0 - ps_dpc(pins, cfg.p_pin));
  const MatrixXcd he = effective_channels(ch, pins);
  const auto zero = Precoder::Zero(he.cols(), he.rows());
  const double n = he.norm();
  if (n == 0.0 || p_rem == 0.0) return zero;
  const Precoder mf = he.adjoint() * (std::sqrt(p_rem) / n);
  if (ch.n_users() == 1 || prev == nullptr || prev->norm() == 0.0) return mf;
  // Noise-normalized units keep the KKT system well scaled.
  const double inv_sigma = cfg.noise_power > 0 ? 1.0 / std::sqrt(cfg.noise_power) : 1.0;
  const MatrixXcd hn = inv_sigma * he;
  const double sigma2 = cfg.noise_power > 0 ? 1.0 : 0.0;
  const WPsi s = update_w_psi(hn, *prev, 1.0, sigma2);
  const FZeta fz = update_f_zeta(hn, s.w, s.psi, p_rem, sigma2);
  if (fz.zero_budget) return zero;
  return fz.zeta * fz.f_hat;
}

/// Rate-greedy bit flips with F fixed. The on-count may not exceed its value
/// at entry, so the fixed precoder stays within the budget.
inline PinVector ao_pin_step(const ChannelRealization& ch, const Precoder& f, const PinVector& start,
                             const SystemConfig& cfg, int max_sweeps) {
  PinVector b = start;
  const int on_cap = b.on_count();
  int on = on_cap;
  MatrixXcd gains = effective_channels(ch, b) * f;
  const MatrixXcd gf = ch.g * f;
  const int k_users = ch.n_users();
  auto rate_of = [&](const MatrixXcd& g) {
    double s = 0.0;
    for (int k = 0; k < k_users; ++k) s += detail::rate_from_gains(g, k, cfg.noise_power).rate;
    return s;
  };
  double cur = rate_of(gains);
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    bool changed = false;
    for (int m = 0; m < ch.n_irs(); ++m) {
      const bool bit = b[static_cast<std::size_t>(m)];
      if (!bit && on + 1 > on_cap) continue;
      const double sm = bit ? 1.0 : -1.0;
      MatrixXcd trial = gains;
      for (int k = 0; k < k_users; ++k)
        trial.row(k) -= (2.0 * sm) * std::conj(ch.h[static_cast<std::size_t>(k)][m]) * gf.row(m);
      const double r = rate_of(trial);
      if (r > cur) {
        b.flip(static_cast<std::size_t>(m));
        gains = trial;
        cur = r;
        on += bit ? -1 : 1;
        changed = true;
      }
    }
    if (!changed) break;
  }
  return b;
}

/// Alternating optimization: full-budget precoder for fixed pins, then
/// rate-greedy pins for the fixed precoder.
inline AoResult run_ao(AoInit init, const ChannelRealization& ch, const SystemConfig& cfg, Rng& rng,
                       const AoOptions& opt = {}) {
  const int m = ch.n_irs();
  PinVector b = init == AoInit::AllOff ? PinVector(static_cast<std::size_t>(m)) : random_feasible_pins(m, cfg, rng);
  AoResult out;
  Precoder f = fixed_pin_precoder(ch, b, cfg);
  if (ch.n_users() > 1) f = fixed_pin_precoder(ch, b, cfg, &f);
  double rate = sum_rate(ch, f, b, cfg);
  out.rate_history.push_back(rate);
  out.power_history.push_back(system_power(f, b, cfg));
  bool converged = false;
  int it = 1;
  for (; it <= opt.max_iterations; ++it) {
    b = ao_pin_step(ch, f, b, cfg, opt.max_sweeps);
    f = fixed_pin_precoder(ch, b, cfg, &f);
    const double next = sum_rate(ch, f, b, cfg);
    out.rate_history.push_back(next);
    out.power_history.push_back(system_power(f, b, cfg));
    const double gain = next - rate;
    rate = next;
    if (gain <= cfg.convergence_tol) {
      converged = true;
      break;
    }
  }
  out.solution = make_solution(ch, f, b, cfg, std::min(it, opt.max_iterations), converged);
  return out;
}

enum class ProposedMethod { GbdBf, ScsiBf, JpabfFOpt, JpabfFScale };

/// Runs one of the proposed solvers. GBD and S-CSI are single-user.
inline Solution run_proposed(ProposedMethod method, const ChannelRealization& ch, const ChannelGeometry& geom,
                             const SystemConfig& cfg) {
  switch (method) {
    case ProposedMethod::GbdBf:
      if (ch.n_users() != 1) throw std::invalid_argument("run_proposed: GBD is single-user");
      return run_gbd(ch.cascaded[0], cfg, PinVector(static_cast<std::size_t>(ch.n_irs()))).solution;
    case ProposedMethod::ScsiBf:
      return run_scsi(ch, geom, cfg);
    case ProposedMethod::JpabfFOpt:
      return run_jpabf(JpabfVariant::FOpt, ch, cfg).solution;
    case ProposedMethod::JpabfFScale:
      return run_jpabf(JpabfVariant::FScale, ch, cfg).solution;
  }
  throw std::invalid_argument("run_proposed: unknown method");
}

/// Optimizes with the diode power ignored, then charges it. Infeasible when
/// the diodes alone use the whole budget; otherwise the precoder is scaled
/// down to what is left.
inline Solution run_ignore_psdpc(ProposedMethod method, const ChannelRealization& ch, const ChannelGeometry& geom,
                                 const SystemConfig& cfg) {
  SystemConfig blind = cfg;
  blind.p_pin = 0.0;
  const Solution s = run_proposed(method, ch, geom, blind);
  const double p_irs = ps_dpc(s.pins, cfg.p_pin);
  if (cfg.p_pin > 0 && p_irs >= cfg.p0) {
    Solution bad = make_solution(ch, s.precoder, s.pins, cfg, s.iterations, s.converged);
    bad.infeasible = true;
    return bad;
  }
  Precoder f = s.precoder;
  const double n = f.norm();
  if (n > 0) f *= std::sqrt(cfg.p0 - p_irs) / n;
  return make_solution(ch, f, s.pins, cfg, s.iterations, s.converged);
}

}  // namespace irsbeam

#endif  // IRSBEAM_BASELINES_HPP_
