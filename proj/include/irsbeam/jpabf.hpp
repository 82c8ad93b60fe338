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

#ifndef IRSBEAM_JPABF_HPP_
#define IRSBEAM_JPABF_HPP_

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "irsbeam/channel.hpp"
#include "irsbeam/config.hpp"
#include "irsbeam/model.hpp"

namespace irsbeam {

/// MMSE receive scalars w, MSE weights psi = 1/e and the MSEs e.
struct WPsi {
  VectorXcd w;
  VectorXd psi;
  VectorXd e;
};

struct WmmseState {
  VectorXcd w;
  VectorXd psi;
  double zeta = 0.0;
  MatrixXcd f_hat;
  VectorXd mse;
  double g_value = 0.0;
};

/// f is the transmitted precoder zeta * f_hat.
inline WPsi update_w_psi(const MatrixXcd& h_e, const MatrixXcd& f, double zeta, double sigma2) {
  const MatrixXcd gains = h_e * f;  // (k, j) = h_e,k f_j
  const auto k_users = gains.rows();
  WPsi out{VectorXcd(k_users), VectorXd(k_users), VectorXd(k_users)};
  for (Eigen::Index k = 0; k < k_users; ++k) {
    const double total = gains.row(k).squaredNorm() + sigma2;
    out.w[k] = zeta * gains(k, k) / total;
    out.e[k] = (total - std::norm(gains(k, k))) / total;
    out.psi[k] = 1.0 / out.e[k];
  }
  return out;
}

/// g = sum_k (psi_k e_k - ln psi_k).
inline double wmmse_objective(const WPsi& s) {
  double g = 0.0;
  for (Eigen::Index k = 0; k < s.e.size(); ++k) g += s.psi[k] * s.e[k] - std::log(s.psi[k]);
  return g;
}

/// Weighted MSE sum for fixed (w, psi) at F = zeta * f_hat.
inline double g_bar(const MatrixXcd& h_e, const VectorXcd& w, const VectorXd& psi, double zeta, const MatrixXcd& f_hat,
                    double sigma2) {
  const MatrixXcd a = h_e * f_hat;
  double g = 0.0;
  for (Eigen::Index k = 0; k < a.rows(); ++k) {
    const double w2 = std::norm(w[k]);
    double noise_term = 0.0;
    if (w2 > 0) noise_term = sigma2 * w2 / (zeta * zeta);
    g += psi[k] * (1.0 + w2 * a.row(k).squaredNorm() - 2.0 * (std::conj(w[k]) * a(k, k)).real() + noise_term);
  }
  return g;
}

struct FZeta {
  MatrixXcd f_hat;
  double zeta = 0.0;
  bool zero_budget = false;
};

/// KKT-optimal (f_hat, zeta) for fixed (w, psi) and remaining budget p_rem.
inline FZeta update_f_zeta(const MatrixXcd& h_e, const VectorXcd& w, const VectorXd& psi, double p_rem,
                           double sigma2) {
  const auto n = h_e.cols(), k = h_e.rows();
  FZeta out;
  if (!(p_rem > 0)) {
    out.f_hat = MatrixXcd::Zero(n, k);
    out.zero_budget = true;
    return out;
  }
  const VectorXcd wpsi = w.cwiseProduct(psi.cast<cplx>());
  const double tw = psi.dot(w.cwiseAbs2());
  MatrixXcd rhs = h_e.adjoint() * wpsi.asDiagonal();
  if (tw > 0) {
    const MatrixXcd x = w.conjugate().asDiagonal() * h_e;  // W^H H_e
    MatrixXcd v = x.adjoint() * psi.cast<cplx>().asDiagonal() * x;
    v.diagonal().array() += sigma2 * tw / p_rem;
    out.f_hat = v.ldlt().solve(rhs);
  } else {
    // No receiver yet: start from the matched filter.
    out.f_hat = h_e.adjoint();
  }
  const double fn = out.f_hat.norm();
  if (fn == 0.0) {
    out.f_hat = MatrixXcd::Zero(n, k);
    out.zero_budget = true;
    return out;
  }
  out.zeta = std::sqrt(p_rem) / fn;
  return out;
}

inline FZeta update_f_zeta(const PinVector& pins, const MatrixXcd& h_e, const VectorXcd& w, const VectorXd& psi,
                           const SystemConfig& cfg) {
  return update_f_zeta(h_e, w, psi, cfg.p0 - ps_dpc(pins, cfg.p_pin), cfg.noise_power);
}

/// g-bar minimized over (zeta, f_hat) for fixed b:
///   Tr((Psi^-1 + p_rem / (sigma2 Tr(Psi W^H W)) W^H H_e H_e^H W)^-1).
inline double g_tilde(const MatrixXcd& h_e, const VectorXcd& w, const VectorXd& psi, double p_rem, double sigma2) {
  const double tw = psi.dot(w.cwiseAbs2());
  if (!(p_rem > 0) || !(tw > 0)) return psi.sum();
  const MatrixXcd x = w.conjugate().asDiagonal() * h_e;
  MatrixXcd a = (p_rem / (sigma2 * tw)) * (x * x.adjoint());
  a.diagonal().array() += psi.cwiseInverse().cast<cplx>().array();
  const auto k = a.rows();
  return a.ldlt().solve(MatrixXcd::Identity(k, k)).diagonal().real().sum();
}

inline double g_tilde(const PinVector& pins, const VectorXcd& w, const VectorXd& psi, const ChannelRealization& ch,
                      const SystemConfig& cfg) {
  return g_tilde(effective_channels(ch, pins), w, psi, cfg.p0 - ps_dpc(pins, cfg.p_pin), cfg.noise_power);
}

namespace detail {

// Row k of H_e changes by -2 s_m conj(h_k[m]) G_m when bit m flips.
inline MatrixXcd flip_delta(const ChannelRealization& ch, int m, double s_m) {
  VectorXcd u(ch.n_users());
  for (int k = 0; k < ch.n_users(); ++k) u[k] = std::conj(ch.h[static_cast<std::size_t>(k)][m]);
  return (-2.0 * s_m) * u * ch.g.row(m);
}

}  // namespace detail

struct CdResult {
  PinVector pins;
  int sweeps = 0;
};

/// Coordinate descent on g-tilde over the bits, ascending index, ties to 0.
inline CdResult cd_b_fopt(const PinVector& start, const VectorXcd& w, const VectorXd& psi,
                          const ChannelRealization& ch, const SystemConfig& cfg, int max_sweeps = 10) {
  CdResult out{start, 0};
  PinVector& b = out.pins;
  MatrixXcd he = effective_channels(ch, b);
  int on = b.on_count();
  const int m = ch.n_irs();
  auto score = [&](const MatrixXcd& h, int n_on) {
    return g_tilde(h, w, psi, cfg.p0 - cfg.p_pin * n_on, cfg.noise_power);
  };
  double g_cur = score(he, on);
  for (out.sweeps = 1; out.sweeps <= max_sweeps; ++out.sweeps) {
    bool changed = false;
    for (int i = 0; i < m; ++i) {
      const bool bit = b[static_cast<std::size_t>(i)];
      const MatrixXcd he_flip = he + detail::flip_delta(ch, i, bit ? 1.0 : -1.0);
      const int on_flip = on + (bit ? -1 : 1);
      const double g_flip = score(he_flip, on_flip);
      const double g0 = bit ? g_flip : g_cur, g1 = bit ? g_cur : g_flip;
      const bool want = !(g0 <= g1);
      if (want != bit) {
        b.flip(static_cast<std::size_t>(i));
        he = he_flip;
        on = on_flip;
        g_cur = g_flip;
        changed = true;
      }
    }
    if (!changed) break;
  }
  out.sweeps = std::min(out.sweeps, max_sweeps);
  return out;
}

/// Quadratic model of g-bar in (rho, b) for F = rho * zeta_p * f_hat_p.
struct ScaleQuadratic {
  MatrixXcd xi_mat;
  VectorXcd rho_vec;
  double q = 0.0;
  double r = 0.0;
  double rho_max = 0.0;
  /// zeta_p^2 ||f_hat_p||_F^2, the transmit power at rho = 1.
  double base_power = 0.0;

  double rho_max_for(int on, const SystemConfig& cfg) const {
    if (!(base_power > 0)) return 0.0;
    return std::sqrt(std::max(0.0, cfg.p0 - cfg.p_pin * on) / base_power);
  }
};

inline ScaleQuadratic build_scale_quadratic(const PinVector& pins, const VectorXcd& w, const VectorXd& psi,
                                            const MatrixXcd& f_hat_prev, double zeta_prev,
                                            const ChannelRealization& ch, const SystemConfig& cfg) {
  const int m = ch.n_irs(), k = ch.n_users();
  MatrixXcd hm(m, k);  // column k is h_k
  for (int u = 0; u < k; ++u) hm.col(u) = ch.h[static_cast<std::size_t>(u)];
  const VectorXd weight = psi.cwiseProduct(w.cwiseAbs2());
  const MatrixXcd a = hm * weight.cast<cplx>().asDiagonal() * hm.adjoint();
  const MatrixXcd gf = ch.g * f_hat_prev;
  const MatrixXcd y = gf * gf.adjoint();
  ScaleQuadratic sq;
  sq.xi_mat = a.cwiseProduct(y.transpose());
  const MatrixXcd hw = hm * w.cwiseProduct(psi.cast<cplx>()).asDiagonal();
  sq.rho_vec = hw.cwiseProduct(gf.conjugate()).rowwise().sum();
  const VectorXd s = pins.signs();
  sq.q = s.dot(sq.xi_mat.real() * s);
  sq.r = sq.rho_vec.real().dot(s);
  sq.base_power = zeta_prev * zeta_prev * f_hat_prev.squaredNorm();
  sq.rho_max = sq.rho_max_for(pins.on_count(), cfg);
  return sq;
}

/// Minimizer of q rho^2 - 2 r rho over [0, rho_max].
inline double optimal_rho(double q, double r, double rho_max) {
  if (q > 0) return std::clamp(r / q, 0.0, rho_max);
  return r > 0 ? rho_max : 0.0;
}

inline double scale_objective(double rho, double q, double r) { return rho * rho * q - 2.0 * rho * r; }

struct ScaleCdResult {
  PinVector pins;
  double rho = 0.0;
  int sweeps = 0;
};

/// Coordinate descent on g-hat with rho re-optimized for each candidate bit.
inline ScaleCdResult cd_b_fscale(const ScaleQuadratic& sq, const PinVector& start, const SystemConfig& cfg,
                                 int max_sweeps = 10) {
  ScaleCdResult out{start, 0.0, 0};
  PinVector& b = out.pins;
  const MatrixXd x = sq.xi_mat.real();
  const VectorXd rr = sq.rho_vec.real();
  VectorXd s = b.signs();
  VectorXd t = x * s;
  double q = s.dot(t), r = rr.dot(s);
  int on = b.on_count();
  const int m = static_cast<int>(s.size());
  auto best = [&](double qq, double rv, int n_on) {
    if (cfg.p_pin * n_on > cfg.p0) return std::numeric_limits<double>::infinity();
    const double rho = optimal_rho(qq, rv, sq.rho_max_for(n_on, cfg));
    return scale_objective(rho, qq, rv);
  };
  double g_cur = best(q, r, on);
  for (out.sweeps = 1; out.sweeps <= max_sweeps; ++out.sweeps) {
    bool changed = false;
    for (int i = 0; i < m; ++i) {
      const double si = s[i];
      const double q_flip = q - 4.0 * si * (t[i] - x(i, i) * si);
      const double r_flip = r - 2.0 * si * rr[i];
      const bool bit = b[static_cast<std::size_t>(i)];
      const int on_flip = on + (bit ? -1 : 1);
      const double g_flip = best(q_flip, r_flip, on_flip);
      const double g0 = bit ? g_flip : g_cur, g1 = bit ? g_cur : g_flip;
      const bool want = !(g0 <= g1);
      if (want != bit) {
        b.flip(static_cast<std::size_t>(i));
        t -= (2.0 * si) * x.col(i);
        s[i] = -si;
        q = q_flip;
        r = r_flip;
        on = on_flip;
        g_cur = g_flip;
        changed = true;
      }
    }
    if (!changed) break;
  }
  out.sweeps = std::min(out.sweeps, max_sweeps);
  out.rho = optimal_rho(q, r, sq.rho_max_for(on, cfg));
  return out;
}

enum class JpabfVariant { FOpt, FScale };

struct JpabfOptions {
  int max_iterations = 100;
  int max_sweeps = 10;
  /// Fixes b; the loop is then plain WMMSE precoding.
  bool freeze_pins = false;
};

struct JpabfStart {
  PinVector pins;
  /// Transmitted precoder; the matched filter of the starting pins when empty.
  std::optional<MatrixXcd> precoder;
};

struct JpabfResult {
  Solution solution;
  WmmseState state;
  /// g at the start of each iteration.
  std::vector<double> g_history;
  /// Sum rate and power split after each iteration.
  std::vector<double> rate_history;
  std::vector<PowerBreakdown> power_history;
  std::vector<int> sweep_history;
};

namespace detail {

// Same realization in units where the noise power is one.
inline ChannelRealization noise_normalized(const ChannelRealization& ch, double sigma2) {
  const double s = sigma2 > 0 ? 1.0 / std::sqrt(sigma2) : 1.0;
  ChannelRealization out;
  out.g = ch.g;
  for (const auto& h : ch.h) {
    out.h.push_back(h * s);
    out.cascaded.push_back(cascade(out.h.back(), out.g));
  }
  return out;
}

}  // namespace detail

/// Alternating WMMSE loop over (w, psi), b and (zeta, f_hat).
inline JpabfResult run_jpabf(JpabfVariant variant, const ChannelRealization& ch, const SystemConfig& cfg,
                             const JpabfStart& start = {}, const JpabfOptions& opt = {}) {
  const int m = ch.n_irs();
  SystemConfig ncfg = cfg;
  ncfg.noise_power = cfg.noise_power > 0 ? 1.0 : 0.0;
  const ChannelRealization nch = detail::noise_normalized(ch, cfg.noise_power);
  const double sigma2 = ncfg.noise_power;

  PinVector b = start.pins.size() == 0 ? PinVector(static_cast<std::size_t>(m)) : start.pins;
  if (static_cast<int>(b.size()) != m) throw std::invalid_argument("run_jpabf: start pins length");
  if (ps_dpc(b, cfg.p_pin) > cfg.p0) throw std::invalid_argument("run_jpabf: start pins exceed the budget");

  JpabfResult out;
  WmmseState& st = out.state;
  MatrixXcd he = effective_channels(nch, b);
  double p_rem = cfg.p0 - ps_dpc(b, cfg.p_pin);
  if (start.precoder) {
    st.f_hat = *start.precoder;
    const double n = st.f_hat.norm();
    st.zeta = n > 0 ? std::sqrt(std::max(0.0, p_rem)) / n : 0.0;
  } else {
    st.f_hat = he.adjoint();
    const double n = st.f_hat.norm();
    st.zeta = n > 0 && p_rem > 0 ? std::sqrt(p_rem) / n : 0.0;
  }

  bool converged = false;
  int it = 0;
  for (it = 1; it <= opt.max_iterations; ++it) {
    const WPsi wp = update_w_psi(he, st.zeta * st.f_hat, st.zeta, sigma2);
    st.w = wp.w;
    st.psi = wp.psi;
    st.mse = wp.e;
    st.g_value = wmmse_objective(wp);
    const bool stop = !out.g_history.empty() && out.g_history.back() - st.g_value <= cfg.convergence_tol;
    out.g_history.push_back(st.g_value);

    int sweeps = 0;
    if (!opt.freeze_pins) {
      if (variant == JpabfVariant::FOpt) {
        const CdResult cd = cd_b_fopt(b, st.w, st.psi, nch, ncfg, opt.max_sweeps);
        b = cd.pins;
        sweeps = cd.sweeps;
      } else {
        const ScaleQuadratic sq = build_scale_quadratic(b, st.w, st.psi, st.f_hat, st.zeta, nch, ncfg);
        const ScaleCdResult cd = cd_b_fscale(sq, b, ncfg, opt.max_sweeps);
        b = cd.pins;
        sweeps = cd.sweeps;
      }
      he = effective_channels(nch, b);
      p_rem = cfg.p0 - ps_dpc(b, cfg.p_pin);
    }
    const FZeta fz = update_f_zeta(he, st.w, st.psi, p_rem, sigma2);
    st.f_hat = fz.f_hat;
    st.zeta = fz.zeta;
    out.sweep_history.push_back(sweeps);
    out.rate_history.push_back(sum_rate(ch, st.zeta * st.f_hat, b, cfg));
    out.power_history.push_back(system_power(st.zeta * st.f_hat, b, cfg));
    if (stop) {
      converged = true;
      break;
    }
  }
  it = std::min(it, opt.max_iterations);
  out.solution = make_solution(ch, st.zeta * st.f_hat, b, cfg, it, converged);
  return out;
}

}  // namespace irsbeam

#endif  // IRSBEAM_JPABF_HPP_
