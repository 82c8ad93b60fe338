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

#ifndef IRSBEAM_CHANNEL_HPP_
#define IRSBEAM_CHANNEL_HPP_

#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

#include "irsbeam/config.hpp"
#include "irsbeam/rng.hpp"

namespace irsbeam {

/// Large-scale geometry of one drop: distances, LoS angles and Rician factors.
struct ChannelGeometry {
  double d_bs_irs = 20.0;
  std::vector<double> d_irs_user;
  double aod_bs = 0.0;        // BS departure angle of the BS-IRS LoS path
  double aoa_irs_elev = 0.0;  // IRS arrival, elevation
  double aoa_irs_azim = 0.0;  // IRS arrival, azimuth
  std::vector<double> aod_user_elev;
  std::vector<double> aod_user_azim;
  double rician_g = 8.0;
  std::vector<double> rician_h;
  double pathloss_coeff = 1e-4;
  double pathloss_exp = 2.2;

  int n_users() const { return static_cast<int>(d_irs_user.size()); }

  double pathloss(double distance) const { return pathloss_coeff * std::pow(distance, -pathloss_exp); }

  void validate(int n_users_expected) const {
    const auto k = static_cast<std::size_t>(n_users_expected);
    if (d_irs_user.size() != k || aod_user_elev.size() != k || aod_user_azim.size() != k ||
        rician_h.size() != k)
      throw std::invalid_argument("ChannelGeometry: per-user fields must have K entries");
    if (!(d_bs_irs > 0)) throw std::invalid_argument("ChannelGeometry: distances must be positive");
    for (double d : d_irs_user)
      if (!(d > 0)) throw std::invalid_argument("ChannelGeometry: distances must be positive");
    if (rician_g < 0) throw std::invalid_argument("ChannelGeometry: Rician factors must be >= 0");
    for (double r : rician_h)
      if (r < 0) throw std::invalid_argument("ChannelGeometry: Rician factors must be >= 0");
  }
};

/// Small-scale realization. The IRS-to-user row of user k is h[k]^H, and
/// cascaded[k] = diag(h[k]^H) g.
struct ChannelRealization {
  MatrixXcd g;                     // M x N, BS -> IRS
  std::vector<VectorXcd> h;        // K vectors of length M
  std::vector<MatrixXcd> cascaded;  // K matrices, M x N

  int n_irs() const { return static_cast<int>(g.rows()); }
  int n_bs() const { return static_cast<int>(g.cols()); }
  int n_users() const { return static_cast<int>(h.size()); }
};

/// a(n, x) = n^{-1/2} [1, e^{j pi x}, ..., e^{j pi (n-1) x}]^T
inline VectorXcd ula_response(int n, double x) {
  if (n < 1) throw std::invalid_argument("ula_response: n must be >= 1");
  VectorXcd a(n);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  for (int i = 0; i < n; ++i) a[i] = std::polar(scale, kPi * i * x);
  return a;
}

inline VectorXcd kron(const VectorXcd& a, const VectorXcd& b) {
  VectorXcd out(a.size() * b.size());
  for (Eigen::Index i = 0; i < a.size(); ++i) out.segment(i * b.size(), b.size()) = a[i] * b;
  return out;
}

/// UPA response a(m_x, -sin(elev) sin(azim)) (x) a(m_y, -sin(elev) cos(azim)).
/// Element (ix, iy) sits at index ix * m_y + iy.
inline VectorXcd upa_response(int m_x, int m_y, double elev, double azim) {
  return kron(ula_response(m_x, -std::sin(elev) * std::sin(azim)),
              ula_response(m_y, -std::sin(elev) * std::cos(azim)));
}

inline VectorXcd bs_response(int n, double aod) { return ula_response(n, std::cos(aod)); }

namespace detail {

// sqrt(kappa/(1+kappa)) and sqrt(1/(1+kappa)); kappa = inf is pure LoS.
inline std::pair<double, double> rician_weights(double kappa) {
  if (std::isinf(kappa)) return {1.0, 0.0};
  return {std::sqrt(kappa / (1.0 + kappa)), std::sqrt(1.0 / (1.0 + kappa))};
}

}  // namespace detail

inline MatrixXcd gen_bs_irs(const ChannelGeometry& geom, const SystemConfig& cfg, Rng& rng) {
  const int m = cfg.n_irs();
  const int n = cfg.n_bs_antennas;
  const double pl = geom.pathloss(geom.d_bs_irs);
  const auto [w_los, w_nlos] = detail::rician_weights(geom.rician_g);

  const VectorXcd a_irs = upa_response(cfg.irs_x, cfg.irs_y, geom.aoa_irs_elev, geom.aoa_irs_azim);
  const VectorXcd a_bs = bs_response(n, geom.aod_bs);
  MatrixXcd g = (w_los * std::sqrt(pl * m * n)) * (a_irs * a_bs.adjoint());

  // Draw the NLoS part even when its weight is zero so stream consumption does
  // not depend on kappa.
  const double s = w_nlos * std::sqrt(pl);
  for (int c = 0; c < n; ++c)
    for (int r = 0; r < m; ++r) g(r, c) += s * complex_normal(rng);
  return g;
}

/// Returns h_k such that the IRS -> user k row is h_k^H.
inline VectorXcd gen_irs_user(const ChannelGeometry& geom, const SystemConfig& cfg, int k, Rng& rng) {
  const int m = cfg.n_irs();
  const auto ku = static_cast<std::size_t>(k);
  const double pl = geom.pathloss(geom.d_irs_user[ku]);
  const auto [w_los, w_nlos] = detail::rician_weights(geom.rician_h[ku]);

  VectorXcd h = (w_los * std::sqrt(pl * m)) *
                upa_response(cfg.irs_x, cfg.irs_y, geom.aod_user_elev[ku], geom.aod_user_azim[ku]);
  const double s = w_nlos * std::sqrt(pl);
  for (int r = 0; r < m; ++r) h[r] += s * complex_normal(rng);
  return h;
}

/// diag(h^H) g: row m of g scaled by conj(h[m]).
inline MatrixXcd cascade(const VectorXcd& h, const MatrixXcd& g) {
  if (h.size() != g.rows()) throw std::invalid_argument("cascade: dimension mismatch");
  return h.conjugate().asDiagonal() * g;
}

/// Reference drop: BS 20 m away on the IRS normal (arrival elevation 0), users
/// at U(50, 70) m with elevation AoD in [0, pi/4] and azimuth AoD in [0, 2 pi).
/// The BS-side departure angle is drawn from U(0, pi).
inline ChannelGeometry sample_geometry(const SystemConfig& cfg, Rng& rng) {
  ChannelGeometry geom;
  geom.d_bs_irs = 20.0;
  geom.aoa_irs_elev = 0.0;
  geom.aoa_irs_azim = 0.0;
  geom.aod_bs = uniform(rng, 0.0, kPi);
  const auto k = static_cast<std::size_t>(cfg.n_users);
  geom.d_irs_user.resize(k);
  geom.aod_user_elev.resize(k);
  geom.aod_user_azim.resize(k);
  geom.rician_h.assign(k, 8.0);
  for (std::size_t i = 0; i < k; ++i) {
    geom.d_irs_user[i] = uniform(rng, 50.0, 70.0);
    geom.aod_user_elev[i] = std::uniform_real_distribution<double>(
        0.0, std::nextafter(kPi / 4, std::numeric_limits<double>::max()))(rng);
    geom.aod_user_azim[i] = uniform(rng, 0.0, 2.0 * kPi);
  }
  return geom;
}

/// Builds a realization with one random stream for G and one per user, so the
/// channel of user k does not depend on how many users follow it.
inline ChannelRealization generate_channels(const ChannelGeometry& geom, const SystemConfig& cfg,
                                            std::uint64_t seed) {
  geom.validate(cfg.n_users);
  ChannelRealization ch;
  Rng g_rng(derive_seed(seed, {0}));
  ch.g = gen_bs_irs(geom, cfg, g_rng);
  for (int k = 0; k < cfg.n_users; ++k) {
    Rng h_rng(derive_seed(seed, {1, static_cast<std::uint64_t>(k)}));
    ch.h.push_back(gen_irs_user(geom, cfg, k, h_rng));
    ch.cascaded.push_back(cascade(ch.h.back(), ch.g));
  }
  return ch;
}

struct Drop {
  ChannelGeometry geometry;
  ChannelRealization channels;
};

/// Geometry and channels of one Monte-Carlo realization from a single seed.
inline Drop draw_drop(const SystemConfig& cfg, std::uint64_t seed) {
  Rng geo_rng(derive_seed(seed, {2}));
  Drop d;
  d.geometry = sample_geometry(cfg, geo_rng);
  d.channels = generate_channels(d.geometry, cfg, seed);
  return d;
}

}  // namespace irsbeam

#endif  // IRSBEAM_CHANNEL_HPP_
