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

#ifndef IRSBEAM_GBD_HPP_
#define IRSBEAM_GBD_HPP_

#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "irsbeam/config.hpp"
#include "irsbeam/milp.hpp"
#include "irsbeam/model.hpp"

namespace irsbeam {

/// Primal solution for fixed b: the beamformer, the primal objective
/// -Re(f^H H_c^H (2b - 1)) and the multipliers of the power and phase
/// constraints.
struct PrimalSolution {
  VectorXcd f;
  double value = 0.0;
  double xi = 0.0;
  double mu = 0.0;
};

struct FeasibilitySolution {
  double delta = 0.0;
  double xi_bar = 1.0;
  double mu_bar = 0.0;
};

/// Closed-form primal. Returns nullopt when the diodes alone exceed p0.
inline std::optional<PrimalSolution> solve_primal(const PinVector& pins, const MatrixXcd& cascaded, double p0,
                                                  double p_pin) {
  const double p_rem = p0 - ps_dpc(pins, p_pin);
  if (p_rem < 0) return std::nullopt;
  const VectorXcd c = cascaded.adjoint() * pins.signs().cast<cplx>();
  const double cn = c.norm();
  PrimalSolution s;
  if (cn == 0.0 || p_rem == 0.0) {
    s.f = VectorXcd::Zero(cascaded.cols());
    return s;
  }
  const double root = std::sqrt(p_rem);
  s.f = (root / cn) * c;
  s.value = -root * cn;
  s.xi = cn / (2.0 * root);
  return s;
}

inline FeasibilitySolution solve_feasibility(const PinVector& pins, double p0, double p_pin) {
  FeasibilitySolution s;
  s.delta = std::max(0.0, ps_dpc(pins, p_pin) - p0);
  return s;
}

/// 0 >= xi_bar (P_PIN 1^T b - p0).
inline LinearCut feasibility_cut(int m, const FeasibilitySolution& fs, double p0, double p_pin) {
  LinearCut cut;
  cut.kind = CutKind::Feasibility;
  cut.coeffs = VectorXd::Constant(m, fs.xi_bar * p_pin);
  cut.constant = -fs.xi_bar * p0;
  return cut;
}

/// Lagrangian of the primal evaluated at a fixed (f, xi, mu); linear in b.
inline LinearCut optimality_cut(const VectorXcd& f, double xi, double mu, const MatrixXcd& cascaded, double p0,
                                double p_pin) {
  const VectorXcd u = cascaded * f;
  LinearCut cut;
  cut.coeffs = -2.0 * u.real() - 2.0 * mu * u.imag();
  cut.coeffs.array() += xi * p_pin;
  cut.constant = u.real().sum() + xi * (f.squaredNorm() - p0) + mu * u.imag().sum();
  return cut;
}

/// Lagrangian minimized over f for fixed (xi, mu):
///   -(1 + mu^2) ||H_c^H (2b - 1)||^2 / (4 xi) + xi (P_PIN 1^T b - p0),
/// a quadratic in b. Requires xi > 0.
inline LinearCut lagrangian_cut(double xi, double mu, const MatrixXcd& cascaded, double p0, double p_pin) {
  if (!(xi > 0)) throw std::invalid_argument("lagrangian_cut: xi must be positive");
  const MatrixXd r = (cascaded * cascaded.adjoint()).real();
  const double w = (1.0 + mu * mu) / xi;
  const VectorXd row_sums = r.rowwise().sum();
  LinearCut cut;
  cut.coeffs = -w * (r.diagonal() - row_sums);
  cut.coeffs.array() += xi * p_pin;
  cut.pairs = -2.0 * w * r;
  cut.constant = -0.25 * w * row_sums.sum() - xi * p0;
  return cut;
}

enum class CutRule {
  /// Lagrangian minimized over f; a valid under-estimator of the value function.
  Lagrangian,
  /// Lagrangian at the latest primal point, linear in b.
  Linearized,
};

struct GbdOptions {
  CutRule cut_rule = CutRule::Lagrangian;
  int max_iterations = 200;
  /// Work in units of sqrt(SNR) so the convergence tolerance is scale free.
  bool normalize_by_noise = true;
  MasterOptions master;
};

struct GbdState {
  double upper_bound = std::numeric_limits<double>::infinity();
  double lower_bound = -std::numeric_limits<double>::infinity();
  std::vector<LinearCut> cut_pool;
  int iter = 0;
  VectorXcd best_f;
  PinVector best_b;
};

struct GbdResult {
  Solution solution;
  GbdState state;
  std::vector<double> upper_history;
  std::vector<double> lower_history;
  /// Received power |(2b - 1)^T H_c f|^2 of the returned design.
  double objective = 0.0;
};

inline GbdResult run_gbd(const MatrixXcd& cascaded, const SystemConfig& cfg, const PinVector& init_pins,
                         const GbdOptions& opt = {}) {
  const int m = static_cast<int>(cascaded.rows());
  if (static_cast<int>(init_pins.size()) != m) throw std::invalid_argument("run_gbd: init pins length");
  const double scale = opt.normalize_by_noise && cfg.noise_power > 0 ? 1.0 / std::sqrt(cfg.noise_power) : 1.0;
  const MatrixXcd hc = scale * cascaded;
  const double p0 = cfg.p0, p_pin = cfg.p_pin, tol = cfg.convergence_tol;

  GbdResult out;
  GbdState& st = out.state;
  PinVector b = init_pins;
  bool converged = false;
  for (st.iter = 1; st.iter <= opt.max_iterations; ++st.iter) {
    if (auto primal = solve_primal(b, hc, p0, p_pin)) {
      if (primal->value < st.upper_bound) {
        st.upper_bound = primal->value;
        st.best_f = primal->f;
        st.best_b = b;
      }
      if (opt.cut_rule == CutRule::Linearized) {
        st.cut_pool.push_back(optimality_cut(primal->f, primal->xi, primal->mu, hc, p0, p_pin));
      } else {
        double xi = primal->xi;
        if (xi <= 0) {
          // Zero remaining power or zero channel: any positive multiplier
          // gives a valid cut; pick one whose value at b is within a small
          // fraction of the tolerance of the primal value.
          const double c2 = (hc.adjoint() * b.signs().cast<cplx>()).squaredNorm();
          xi = c2 > 0 ? c2 / (4.0 * tol * 1e-3) : 1.0;
        }
        st.cut_pool.push_back(lagrangian_cut(xi, primal->mu, hc, p0, p_pin));
      }
    } else {
      st.cut_pool.push_back(feasibility_cut(m, solve_feasibility(b, p0, p_pin), p0, p_pin));
    }

    const MasterSolution ms = solve_master(st.cut_pool, m, -1e12, opt.master);
    if (ms.status != MasterStatus::Optimal)
      throw std::logic_error("run_gbd: master infeasible although b = 0 is always feasible");
    st.lower_bound = std::max(st.lower_bound, ms.eta);
    out.upper_history.push_back(st.upper_bound);
    out.lower_history.push_back(st.lower_bound);
    if (st.upper_bound - st.lower_bound <= tol) {
      converged = true;
      break;
    }
    b = ms.pins;
  }
  st.iter = std::min(st.iter, opt.max_iterations);

  if (st.best_b.size() == 0) {
    // Never primal feasible (only possible with p0 < 0): fall back to all off.
    st.best_b = PinVector(static_cast<std::size_t>(m));
    st.best_f = VectorXcd::Zero(cascaded.cols());
  }
  Solution& s = out.solution;
  s.pins = st.best_b;
  s.precoder = st.best_f;
  out.objective = received_power(cascaded, st.best_f, st.best_b);
  s.rate_per_user = {std::log2(1.0 + out.objective / cfg.noise_power)};
  s.sum_rate = s.rate_per_user[0];
  s.power = system_power(s.precoder, s.pins, cfg);
  s.iterations = st.iter;
  s.converged = converged;
  return out;
}

/// Exhaustive optimum of max_b (p0 - P_PIN 1^T b) ||H_c^H (2b - 1)||^2 over
/// affordable b. Used as a reference at small M.
struct BruteForceOptimum {
  PinVector pins;
  double objective = 0.0;
};

inline BruteForceOptimum brute_force_single_user(const MatrixXcd& cascaded, double p0, double p_pin) {
  const int m = static_cast<int>(cascaded.rows());
  if (m > 24) throw std::invalid_argument("brute_force_single_user: M too large");
  BruteForceOptimum best;
  best.objective = -1.0;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << m); ++mask) {
    const PinVector p = PinVector::from_mask(mask, static_cast<std::size_t>(m));
    const double p_rem = p0 - ps_dpc(p, p_pin);
    if (p_rem < 0) continue;
    const double v = p_rem * (cascaded.adjoint() * p.signs().cast<cplx>()).squaredNorm();
    if (v > best.objective) {
      best.objective = v;
      best.pins = p;
    }
  }
  return best;
}

}  // namespace irsbeam

#endif  // IRSBEAM_GBD_HPP_
