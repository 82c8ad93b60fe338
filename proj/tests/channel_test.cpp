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

#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "irsbeam/channel.hpp"
#include "test_util.hpp"

namespace irsbeam {
namespace {

TEST(UlaResponse, SmallCases) {
  const VectorXcd a1 = ula_response(1, 0.37);
  ASSERT_EQ(a1.size(), 1);
  EXPECT_NEAR(std::abs(a1[0] - cplx(1, 0)), 0.0, 1e-15);

  const VectorXcd a2 = ula_response(2, 1.0);
  EXPECT_NEAR(std::abs(a2[0] - cplx(M_SQRT1_2, 0)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(a2[1] - cplx(-M_SQRT1_2, 0)), 0.0, 1e-15);
  EXPECT_THROW(ula_response(0, 0.0), std::invalid_argument);
}

TEST(UlaResponse, UnitNorm) {
  Rng rng(11);
  for (int t = 0; t < 100; ++t) {
    const int n = 1 + static_cast<int>(rng() % 40);
    EXPECT_NEAR(ula_response(n, uniform(rng, -3, 3)).norm(), 1.0, 1e-12);
  }
}

TEST(UpaResponse, Cases) {
  const VectorXcd one = upa_response(1, 1, 0.3, 0.4);
  EXPECT_NEAR(std::abs(one[0] - cplx(1, 0)), 0.0, 1e-15);

  const VectorXcd flat = upa_response(3, 4, 0.0, 1.1);
  for (int i = 0; i < 12; ++i) EXPECT_NEAR(std::abs(flat[i] - cplx(1.0 / std::sqrt(12.0), 0)), 0.0, 1e-15);

  // a(2, 0) (x) a(2, -1), expanded by hand.
  const VectorXcd u = upa_response(2, 2, kPi / 2, 0.0);
  const double expect[4] = {0.5, -0.5, 0.5, -0.5};
  for (int i = 0; i < 4; ++i) {
    EXPECT_NEAR(u[i].real(), expect[i], 1e-15);
    EXPECT_NEAR(u[i].imag(), 0.0, 1e-15);
  }
}

TEST(UpaResponse, IndexLayout) {
  const int mx = 3, my = 5;
  const double el = 0.7, az = 2.3;
  const VectorXcd u = upa_response(mx, my, el, az);
  const double fx = -std::sin(el) * std::sin(az), fy = -std::sin(el) * std::cos(az);
  for (int ix = 0; ix < mx; ++ix)
    for (int iy = 0; iy < my; ++iy) {
      const cplx e = std::polar(1.0 / std::sqrt(15.0), kPi * (ix * fx + iy * fy));
      EXPECT_NEAR(std::abs(u[ix * my + iy] - e), 0.0, 1e-14);
    }
  EXPECT_NEAR(u.norm(), 1.0, 1e-12);
}

ChannelGeometry fixed_geometry(double kappa) {
  ChannelGeometry g;
  g.d_bs_irs = 20;
  g.d_irs_user = {55};
  g.aod_bs = 1.1;
  g.aod_user_elev = {0.5};
  g.aod_user_azim = {2.0};
  g.rician_g = kappa;
  g.rician_h = {kappa};
  return g;
}

TEST(GenBsIrs, PureLosIsRankOne) {
  SystemConfig cfg = testing::small_config(3, 4, 5, 1);
  const auto geom = fixed_geometry(std::numeric_limits<double>::infinity());
  Rng rng(12);
  const MatrixXcd g = gen_bs_irs(geom, cfg, rng);
  const double pl = geom.pathloss(20);
  const MatrixXcd los = std::sqrt(pl * 12 * 5) * upa_response(3, 4, 0, 0) * bs_response(5, 1.1).adjoint();
  EXPECT_NEAR((g - los).norm(), 0.0, 1e-12 * los.norm());
  EXPECT_NEAR(los.squaredNorm(), pl * 12 * 5, 1e-12 * pl * 60);
  Eigen::JacobiSVD<MatrixXcd> svd(g);
  EXPECT_LT(svd.singularValues()[1], 1e-12 * svd.singularValues()[0]);
}

void expect_mean_power(double kappa, bool bs_irs) {
  SystemConfig cfg = testing::small_config(2, 3, 4, 1);
  const auto geom = fixed_geometry(kappa);
  Rng rng(13);
  const int draws = 10000;
  double acc = 0.0;
  for (int t = 0; t < draws; ++t)
    acc += bs_irs ? gen_bs_irs(geom, cfg, rng).squaredNorm() : gen_irs_user(geom, cfg, 0, rng).squaredNorm();
  const double expect = bs_irs ? geom.pathloss(20) * 6 * 4 : geom.pathloss(55) * 6;
  EXPECT_NEAR(acc / draws / expect, 1.0, 0.03);
}

TEST(GenBsIrs, MeanPowerNlos) { expect_mean_power(0.0, true); }
TEST(GenBsIrs, MeanPowerRician) { expect_mean_power(8.0, true); }
TEST(GenIrsUser, MeanPowerNlos) { expect_mean_power(0.0, false); }
TEST(GenIrsUser, MeanPowerRician) { expect_mean_power(8.0, false); }

TEST(GenIrsUser, PureLos) {
  SystemConfig cfg = testing::small_config(3, 3, 2, 1);
  const auto geom = fixed_geometry(std::numeric_limits<double>::infinity());
  Rng rng(14);
  const VectorXcd h = gen_irs_user(geom, cfg, 0, rng);
  const VectorXcd los = std::sqrt(geom.pathloss(55) * 9) * upa_response(3, 3, 0.5, 2.0);
  EXPECT_NEAR((h - los).norm(), 0.0, 1e-12 * los.norm());
}

TEST(Cascade, RowScaling) {
  Rng rng(15);
  const MatrixXcd g = testing::random_matrix(rng, 5, 3);
  EXPECT_NEAR((cascade(VectorXcd::Ones(5), g) - g).norm(), 0.0, 1e-15);

  const VectorXcd h = testing::random_vector(rng, 5);
  MatrixXcd pad = MatrixXcd::Zero(5, 3);
  pad.topLeftCorner(3, 3).setIdentity();
  const MatrixXcd hc = cascade(h, pad);
  for (int m = 0; m < 5; ++m)
    for (int n = 0; n < 3; ++n) EXPECT_EQ(hc(m, n), std::conj(h[m]) * pad(m, n));

  const MatrixXcd c = cascade(h, g);
  for (int m = 0; m < 5; ++m)
    for (int n = 0; n < 3; ++n) EXPECT_NEAR(std::abs(c(m, n) - std::conj(h[m]) * g(m, n)), 0.0, 1e-15);

  const VectorXcd f = testing::random_vector(rng, 3);
  EXPECT_NEAR((c * f - h.conjugate().cwiseProduct(g * f)).norm(), 0.0, 1e-13);
  EXPECT_THROW(cascade(VectorXcd::Ones(4), g), std::invalid_argument);
}

TEST(SampleGeometry, DeterministicAndInRange) {
  SystemConfig cfg;
  cfg.n_users = 3;
  Rng a(99), b(99);
  const auto ga = sample_geometry(cfg, a), gb = sample_geometry(cfg, b);
  EXPECT_EQ(ga.d_irs_user, gb.d_irs_user);
  EXPECT_EQ(ga.aod_user_azim, gb.aod_user_azim);
  EXPECT_EQ(ga.aod_bs, gb.aod_bs);

  Rng rng(16);
  double sum = 0.0;
  int n = 0;
  for (int t = 0; t < 10000 / 3 + 1; ++t) {
    const auto g = sample_geometry(cfg, rng);
    for (int k = 0; k < 3; ++k) {
      const auto ku = static_cast<std::size_t>(k);
      EXPECT_GE(g.aod_user_elev[ku], 0.0);
      EXPECT_LE(g.aod_user_elev[ku], kPi / 4);
      EXPECT_GE(g.aod_user_azim[ku], 0.0);
      EXPECT_LT(g.aod_user_azim[ku], 2 * kPi);
      EXPECT_GE(g.d_irs_user[ku], 50.0);
      EXPECT_LE(g.d_irs_user[ku], 70.0);
      sum += g.d_irs_user[ku];
      ++n;
    }
    EXPECT_EQ(g.aoa_irs_elev, 0.0);
    EXPECT_EQ(g.d_bs_irs, 20.0);
  }
  EXPECT_NEAR(sum / n, 60.0, 0.6);
}

TEST(GenerateChannels, ReproducibleAndStreamsSplitPerUser) {
  SystemConfig cfg = testing::small_config(2, 2, 3, 2);
  Rng rng(17);
  const auto geom = sample_geometry(cfg, rng);
  const auto a = generate_channels(geom, cfg, 5), b = generate_channels(geom, cfg, 5);
  EXPECT_EQ(a.g, b.g);
  EXPECT_EQ(a.h[1], b.h[1]);

  // Adding a third user leaves the first two channels untouched.
  SystemConfig cfg3 = cfg;
  cfg3.n_users = 3;
  ChannelGeometry geom3 = geom;
  geom3.d_irs_user.push_back(60);
  geom3.aod_user_elev.push_back(0.2);
  geom3.aod_user_azim.push_back(1.0);
  geom3.rician_h.push_back(8);
  const auto c = generate_channels(geom3, cfg3, 5);
  EXPECT_EQ(a.g, c.g);
  EXPECT_EQ(a.h[0], c.h[0]);
  EXPECT_EQ(a.h[1], c.h[1]);
  for (int k = 0; k < 3; ++k)
    EXPECT_NEAR((c.cascaded[static_cast<std::size_t>(k)] - cascade(c.h[static_cast<std::size_t>(k)], c.g)).norm(),
                0.0, 0.0);
}

TEST(ChannelGeometry, Validation) {
  auto g = fixed_geometry(8);
  EXPECT_NO_THROW(g.validate(1));
  EXPECT_THROW(g.validate(2), std::invalid_argument);
  g.rician_g = -1;
  EXPECT_THROW(g.validate(1), std::invalid_argument);
  g = fixed_geometry(8);
  g.d_irs_user[0] = 0;
  EXPECT_THROW(g.validate(1), std::invalid_argument);
}

}  // namespace
}  // namespace irsbeam
