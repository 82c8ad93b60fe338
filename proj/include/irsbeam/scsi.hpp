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

#ifndef IRSBEAM_SCSI_HPP_
#define IRSBEAM_SCSI_HPP_

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "irsbeam/channel.hpp"
#include "irsbeam/config.hpp"
#include "irsbeam/model.hpp"

namespace irsbeam {

/// Offline power split and phase plan of the statistical-CSI design.
struct ScsiDesign {
  double t_star = 0.0;
  double tau = 0.0;        // sin(t*) / M
  int m_on_budget = 0;     // floor(M/2 - M t*/pi)
  int m_positive = 0;      // entries of h_o with positive real part
  int m_on_actual = 0;     // min(m_positive, m_on_budget)
  double p_irs_ps = 0.0;   // planned: P_PIN (M/2 - M t*/pi)
  double p_bs_t = 0.0;     // planned: p0 - p_irs_ps
  double p_bs_actual = 0.0;  // p0 - P_PIN m_on_actual
  double alpha_g = 0.0;
  double alpha_h = 0.0;
  VectorXcd h_o;
  PinVector pins;
};

/// 1 / (2 pi p0 / (P_PIN M) - pi + 2t) - tan t
inline double t_star_residual(double t, double p0, double p_pin, int m) {
  const double a = 2.0 * kPi * p0 / (p_pin * m);
  return 1.0 / (a - kPi + 2.0 * t) - std::tan(t);
}

/// Unique stationary point of the large-array SNR in t. The residual is
/// decreasing on the bracket where the first term is positive, so bisection
/// always converges. Returns 0 when p_pin = 0 and pi/2 when p0 = 0.
inline double solve_t_star(double p0, double p_pin, int m) {
  if (m < 1) throw std::invalid_argument("solve_t_star: m must be >= 1");
  if (p0 < 0 || p_pin < 0) throw std::invalid_argument("solve_t_star: powers must be non-negative");
  if (p_pin == 0.0) return 0.0;
  if (p0 == 0.0) return kPi / 2;
  const double a = 2.0 * kPi * p0 / (p_pin * m);
  double lo = std::max(0.0, (kPi - a) / 2.0);
  double hi = kPi / 2;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double r = t_star_residual(mid, p0, p_pin, m);
    // Left of the pole the first term is +inf-like; treat as positive.
    if (!(a - kPi + 2.0 * mid > 0) || r > 0)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

/// h_o = a_I(user AoD) .* conj(a_I(IRS AoA)), built in Kronecker form.
inline VectorXcd build_h_o(double aod_elev, double aod_azim, double aoa_elev, double aoa_azim, int m_x, int m_y) {
  const double th = -std::sin(aod_elev) * std::sin(aod_azim) + std::sin(aoa_elev) * std::sin(aoa_azim);
  const double ph = -std::sin(aod_elev) * std::cos(aod_azim) + std::sin(aoa_elev) * std::cos(aoa_azim);
  return kron(ula_response(m_x, th), ula_response(m_y, ph)) / std::sqrt(static_cast<double>(m_x * m_y));
}

struct PhaseSelection {
  PinVector pins;
  int m_positive = 0;
  int m_on = 0;
};

/// Switches on the min(M_p, budget) entries with the largest real part.
inline PhaseSelection select_phases(const VectorXcd& h_o, int m_on_budget) {
  if (m_on_budget < 0) throw std::invalid_argument("select_phases: negative budget");
  const auto m = static_cast<std::size_t>(h_o.size());
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return h_o[static_cast<Eigen::Index>(a)].real() > h_o[static_cast<Eigen::Index>(b)].real();
  });
  PhaseSelection sel;
  sel.pins = PinVector(m);
  for (Eigen::Index i = 0; i < h_o.size(); ++i) sel.m_positive += h_o[i].real() > 0 ? 1 : 0;
  sel.m_on = std::min(sel.m_positive, m_on_budget);
  for (int i = 0; i < sel.m_on; ++i) sel.pins.set(order[static_cast<std::size_t>(i)], true);
  return sel;
}

struct Beamformer {
  VectorXcd f;
  bool degenerate = false;
};

/// MRT along G^H Phi h with ||f||^2 = p_bs_t.
inline Beamformer bs_beamformer(const MatrixXcd& g, const VectorXcd& h, const PinVector& pins, double p_bs_t) {
  const VectorXcd v = g.adjoint() * pins.signs().cast<cplx>().cwiseProduct(h);
  Beamformer b;
  const double n = v.norm();
  if (n == 0.0) {
    b.f = VectorXcd::Zero(g.cols());
    b.degenerate = true;
    return b;
  }
  b.f = (std::sqrt(std::max(0.0, p_bs_t)) / n) * v;
  return b;
}

/// sqrt(kappa PL / (1 + kappa)); kappa = inf gives sqrt(PL).
inline double los_gain(double kappa, double pathloss) {
  if (std::isinf(kappa)) return std::sqrt(pathloss);
  return std::sqrt(kappa * pathloss / (1.0 + kappa));
}

/// Large-array SNR as a function of the split parameter t.
inline double predicted_snr(double t, const SystemConfig& cfg, double alpha_g, double alpha_h, int m, int n) {
  const double gain = 4.0 * std::pow(alpha_g * alpha_h, 2) * m * m * n / (kPi * kPi * cfg.noise_power);
  const double c = std::cos(t);
  return gain * (cfg.p0 - cfg.p_pin * m / 2.0 + cfg.p_pin * m * t / kPi) * c * c;
}

/// Everything the method decides from statistics alone: t*, the diode budget
/// and, from the LoS angles of user 0, the phase plan.
inline ScsiDesign design_scsi(const ChannelGeometry& geom, const SystemConfig& cfg) {
  const int m = cfg.n_irs();
  ScsiDesign d;
  d.t_star = solve_t_star(cfg.p0, cfg.p_pin, m);
  d.tau = std::sin(d.t_star) / m;
  const double planned_on = m / 2.0 - m * d.t_star / kPi;
  d.m_on_budget = std::max(0, static_cast<int>(std::floor(planned_on + 1e-9)));
  if (cfg.p_pin > 0) d.m_on_budget = std::min(d.m_on_budget, static_cast<int>(std::floor(cfg.p0 / cfg.p_pin + 1e-9)));
  d.p_irs_ps = cfg.p_pin * planned_on;
  d.p_bs_t = cfg.p0 - d.p_irs_ps;
  d.alpha_g = los_gain(geom.rician_g, geom.pathloss(geom.d_bs_irs));
  d.alpha_h = los_gain(geom.rician_h.at(0), geom.pathloss(geom.d_irs_user.at(0)));
  d.h_o = build_h_o(geom.aod_user_elev.at(0), geom.aod_user_azim.at(0), geom.aoa_irs_elev, geom.aoa_irs_azim,
                    cfg.irs_x, cfg.irs_y);
  const PhaseSelection sel = select_phases(d.h_o, d.m_on_budget);
  d.m_positive = sel.m_positive;
  d.m_on_actual = sel.m_on;
  d.pins = sel.pins;
  d.p_bs_actual = std::max(0.0, cfg.p0 - cfg.p_pin * d.m_on_actual);
  return d;
}

/// Single-user design from statistics; the beamformer uses the instantaneous
/// channel and the unused diode budget goes to the BS.
inline Solution run_scsi(const ChannelRealization& ch, const ChannelGeometry& geom, const SystemConfig& cfg) {
  if (ch.n_users() != 1) throw std::invalid_argument("run_scsi: single-user method");
  const ScsiDesign d = design_scsi(geom, cfg);
  const Beamformer bf = bs_beamformer(ch.g, ch.h[0], d.pins, d.p_bs_actual);
  Solution s = make_solution(ch, bf.f, d.pins, cfg, 1, true);
  return s;
}

}  // namespace irsbeam

#endif  // IRSBEAM_SCSI_HPP_
