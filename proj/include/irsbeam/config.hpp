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

#ifndef IRSBEAM_CONFIG_HPP_
#define IRSBEAM_CONFIG_HPP_

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace irsbeam {

using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;
using cplx = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;

// P[dBm] = 10 log10(P / 1 mW).
inline double dbm_to_watts(double dbm) { return 1e-3 * std::pow(10.0, dbm / 10.0); }
inline double watts_to_dbm(double watts) { return 10.0 * std::log10(watts / 1e-3); }

/// Antenna counts, IRS grid, power constants and solver tolerance. Defaults are
/// the reference simulation constants (N = 5, 12 mW per diode, -110 dBm noise,
/// 0.07 m carrier, tolerance 0.005).
struct SystemConfig {
  int n_bs_antennas = 5;
  int irs_x = 10;
  int irs_y = 10;
  int n_users = 1;
  double p_pin = 0.012;
  double noise_power = 1e-14;
  /// Effective budget shared by BS transmit power and diode power.
  double p0 = 1.0;
  double p_bs_circuits = 0.0;
  double p_bs_rf_per_chain = 0.0;
  double p_irs_static = 0.0;
  double wavelength = 0.07;
  double convergence_tol = 0.005;

  int n_irs() const { return irs_x * irs_y; }

  /// Total consumption including the design-independent terms.
  double total_power(double p_bs_transmit, double p_irs_ps) const {
    return p_bs_transmit + p_bs_circuits + n_bs_antennas * p_bs_rf_per_chain + p_irs_static +
           p_irs_ps;
  }

  void validate() const {
    if (n_bs_antennas < 1 || irs_x < 1 || irs_y < 1 || n_users < 1)
      throw std::invalid_argument("SystemConfig: antenna, IRS and user counts must be >= 1");
    if (p_pin < 0 || noise_power < 0 || p0 < 0 || p_bs_circuits < 0 || p_bs_rf_per_chain < 0 ||
        p_irs_static < 0)
      throw std::invalid_argument("SystemConfig: powers must be non-negative");
    if (!(convergence_tol > 0)) throw std::invalid_argument("SystemConfig: convergence_tol must be > 0");
  }
};

/// On/off state of the M PIN diodes. Bit 1 means the diode is on (element
/// phase 0), bit 0 means off (phase pi).
class PinVector {
 public:
  PinVector() = default;
  explicit PinVector(std::size_t m, bool on = false) : bits_(m, on ? 1 : 0) {}

  static PinVector from_bits(const std::vector<int>& bits) {
    PinVector p(bits.size());
    for (std::size_t i = 0; i < bits.size(); ++i) {
      if (bits[i] != 0 && bits[i] != 1) throw std::invalid_argument("PinVector: bits must be 0 or 1");
      p.bits_[i] = static_cast<std::uint8_t>(bits[i]);
    }
    return p;
  }

  /// Bit m is set from (mask >> m) & 1.
  static PinVector from_mask(std::uint64_t mask, std::size_t m) {
    PinVector p(m);
    for (std::size_t i = 0; i < m; ++i) p.bits_[i] = static_cast<std::uint8_t>((mask >> i) & 1u);
    return p;
  }

  std::size_t size() const { return bits_.size(); }
  bool operator[](std::size_t i) const { return bits_[i] != 0; }
  void set(std::size_t i, bool on) { bits_[i] = on ? 1 : 0; }
  void flip(std::size_t i) { bits_[i] ^= 1u; }

  int on_count() const {
    int n = 0;
    for (auto b : bits_) n += b;
    return n;
  }

  /// Element phases 2 b_m - 1.
  VectorXd signs() const {
    VectorXd s(static_cast<Eigen::Index>(bits_.size()));
    for (std::size_t i = 0; i < bits_.size(); ++i) s[static_cast<Eigen::Index>(i)] = bits_[i] ? 1.0 : -1.0;
    return s;
  }

  std::string to_string() const {
    std::string out;
    out.reserve(bits_.size());
    for (auto b : bits_) out.push_back(b ? '1' : '0');
    return out;
  }

  friend bool operator==(const PinVector&, const PinVector&) = default;
  friend bool operator<(const PinVector& a, const PinVector& b) { return a.bits_ < b.bits_; }

 private:
  std::vector<std::uint8_t> bits_;
};

}  // namespace irsbeam

#endif  // IRSBEAM_CONFIG_HPP_
