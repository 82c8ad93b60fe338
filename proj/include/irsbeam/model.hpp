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

#ifndef IRSBEAM_MODEL_HPP_
#define IRSBEAM_MODEL_HPP_

#include <cmath>
#include <stdexcept>
#include <vector>

#include "irsbeam/channel.hpp"
#include "irsbeam/config.hpp"

namespace irsbeam {

/// N x K precoder; column k serves user k.
using Precoder = MatrixXcd;

struct PowerBreakdown {
  double p_bs_transmit = 0.0;
  double p_irs_ps = 0.0;
  double p_total_effective = 0.0;
};

struct Solution {
  Precoder precoder;
  PinVector pins;
  std::vector<double> rate_per_user;
  double sum_rate = 0.0;
  PowerBreakdown power;
  int iterations = 0;
  bool converged = false;
  bool infeasible = false;
};

inline VectorXd phase_matrix(const PinVector& pins) { return pins.signs(); }

inline double ps_dpc(const PinVector& pins, double p_pin) { return p_pin * pins.on_count(); }

inline PowerBreakdown system_power(const Precoder& f, const PinVector& pins, const SystemConfig& cfg) {
  PowerBreakdown p;
  p.p_bs_transmit = f.squaredNorm();
  p.p_irs_ps = ps_dpc(pins, cfg.p_pin);
  p.p_total_effective = p.p_bs_transmit + p.p_irs_ps;
  return p;
}

/// Row k is h_k^H (2B - I) G.
inline MatrixXcd effective_channels(const ChannelRealization& ch, const PinVector& pins) {
  if (static_cast<Eigen::Index>(pins.size()) != ch.g.rows())
    throw std::invalid_argument("effective_channels: pin vector length must equal M");
  const VectorXd s = pins.signs();
  MatrixXcd he(ch.n_users(), ch.n_bs());
  for (int k = 0; k < ch.n_users(); ++k)
    he.row(k) = (ch.h[static_cast<std::size_t>(k)].conjugate().cwiseProduct(s.cast<cplx>())).transpose() * ch.g;
  return he;
}

struct UserRate {
  double rate = 0.0;
  double interference_plus_noise = 0.0;
};

namespace detail {

inline UserRate rate_from_gains(const MatrixXcd& gains, int k, double noise) {
  // gains(k, j) = h_e,k f_j
  UserRate r;
  double interf = 0.0;
  for (Eigen::Index j = 0; j < gains.cols(); ++j)
    if (j != k) interf += std::norm(gains(k, j));
  r.interference_plus_noise = interf + noise;
  r.rate = std::log2(1.0 + std::norm(gains(k, k)) / r.interference_plus_noise);
  return r;
}

}  // namespace detail

inline UserRate user_rate(const ChannelRealization& ch, const Precoder& f, const PinVector& pins, int k,
                          const SystemConfig& cfg) {
  if (k < 0 || k >= ch.n_users()) throw std::out_of_range("user_rate: user index");
  const MatrixXcd gains = effective_channels(ch, pins) * f;
  return detail::rate_from_gains(gains, k, cfg.noise_power);
}

inline std::vector<double> rates_per_user(const ChannelRealization& ch, const Precoder& f, const PinVector& pins,
                                          const SystemConfig& cfg) {
  const MatrixXcd gains = effective_channels(ch, pins) * f;
  std::vector<double> out;
  for (int k = 0; k < ch.n_users(); ++k) out.push_back(detail::rate_from_gains(gains, k, cfg.noise_power).rate);
  return out;
}

inline double sum_rate(const ChannelRealization& ch, const Precoder& f, const PinVector& pins,
                       const SystemConfig& cfg) {
  double s = 0.0;
  for (double r : rates_per_user(ch, f, pins, cfg)) s += r;
  return s;
}

/// Single-user received power |(2b - 1)^T H_c f|^2.
inline double received_power(const MatrixXcd& cascaded, const VectorXcd& f, const PinVector& pins) {
  return std::norm(pins.signs().cast<cplx>().dot(cascaded * f));
}

/// Fills rates and the power breakdown of a solution from its precoder and pins.
inline Solution make_solution(const ChannelRealization& ch, Precoder f, PinVector pins, const SystemConfig& cfg,
                              int iterations, bool converged) {
  Solution s;
  s.rate_per_user = rates_per_user(ch, f, pins, cfg);
  for (double r : s.rate_per_user) s.sum_rate += r;
  s.power = system_power(f, pins, cfg);
  s.precoder = std::move(f);
  s.pins = std::move(pins);
  s.iterations = iterations;
  s.converged = converged;
  return s;
}

}  // namespace irsbeam

#endif  // IRSBEAM_MODEL_HPP_
