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

#ifndef IRSBEAM_MILP_HPP_
#define IRSBEAM_MILP_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <queue>
#include <stdexcept>
#include <vector>

#include "irsbeam/config.hpp"
#include "irsbeam/lp.hpp"

namespace irsbeam {

enum class CutKind { Optimality, Feasibility };

/// Optimality: eta >= coeffs^T b + sum_{m<n} pairs(m,n) b_m b_n + constant.
/// Feasibility: 0 >= the same expression. `pairs` is either empty (a linear
/// cut) or an M x M matrix of which only the strict upper triangle is read.
struct LinearCut {
  VectorXd coeffs;
  double constant = 0.0;
  CutKind kind = CutKind::Optimality;
  MatrixXd pairs;

  bool has_pairs() const { return pairs.size() > 0; }

  double evaluate(const VectorXd& b) const {
    double v = coeffs.dot(b) + constant;
    if (has_pairs()) {
      const auto m = b.size();
      for (Eigen::Index i = 0; i < m; ++i) {
        if (b[i] == 0.0) continue;
        for (Eigen::Index j = i + 1; j < m; ++j) v += pairs(i, j) * b[i] * b[j];
      }
    }
    return v;
  }

  double evaluate(const PinVector& pins) const {
    VectorXd b(static_cast<Eigen::Index>(pins.size()));
    for (std::size_t i = 0; i < pins.size(); ++i) b[static_cast<Eigen::Index>(i)] = pins[i] ? 1.0 : 0.0;
    return evaluate(b);
  }
};

enum class MasterStatus { Optimal, Infeasible };

struct MasterSolution {
  PinVector pins;
  double eta = 0.0;
  MasterStatus status = MasterStatus::Infeasible;
  int nodes = 0;
};

/// Fixed-bit pattern for a B&B node: -1 free, otherwise 0 or 1.
using BitFixing = std::vector<int>;

struct LpRelaxation {
  bool feasible = false;
  double lower_bound = 0.0;
  VectorXd b;
};

namespace detail {

inline constexpr double kMasterTol = 1e-9;

// Product terms (m, n) with a nonzero coefficient in some cut, and which
// McCormick sides they need: a positive coefficient in a "<=" row is only
// held down by y >= b_m + b_n - 1, a negative one only by y <= b_m, b_n.
struct PairTerm {
  int m, n;
  bool need_lower, need_upper;
};

inline std::vector<PairTerm> collect_pairs(const std::vector<LinearCut>& cuts, int m) {
  std::vector<PairTerm> out;
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j) {
      bool pos = false, neg = false;
      for (const auto& c : cuts) {
        if (!c.has_pairs()) continue;
        const double v = c.pairs(i, j);
        pos |= v > 0;
        neg |= v < 0;
      }
      if (pos || neg) out.push_back({i, j, pos, neg});
    }
  return out;
}

inline double max_optimality(const std::vector<LinearCut>& cuts, const VectorXd& b, double eta_floor) {
  double eta = eta_floor;
  for (const auto& c : cuts)
    if (c.kind == CutKind::Optimality) eta = std::max(eta, c.evaluate(b));
  return eta;
}

inline bool feasible_point(const std::vector<LinearCut>& cuts, const VectorXd& b) {
  for (const auto& c : cuts)
    if (c.kind == CutKind::Feasibility && c.evaluate(b) > kMasterTol * std::max(1.0, std::abs(c.constant)))
      return false;
  return true;
}

}  // namespace detail

/// Continuous relaxation over b in [0, 1]^M with the fixed bits pinned. Product
/// terms are replaced by their McCormick envelope, so the bound is exact
/// whenever the returned b is integral.
inline LpRelaxation lp_relax(const std::vector<LinearCut>& cuts, int m, double eta_floor, const BitFixing& fixed) {
  if (static_cast<int>(fixed.size()) != m) throw std::invalid_argument("lp_relax: fixing length must equal M");
  LpRelaxation out;
  const auto pairs = detail::collect_pairs(cuts, m);
  const int np = static_cast<int>(pairs.size());
  const int nv = m + np + 1;  // b, y, eta
  const int eta_col = m + np;

  VectorXd lo = VectorXd::Zero(nv), hi = VectorXd::Ones(nv);
  for (int i = 0; i < m; ++i)
    if (fixed[static_cast<std::size_t>(i)] >= 0) lo[i] = hi[i] = fixed[static_cast<std::size_t>(i)];
  for (int p = 0; p < np; ++p) {
    // Pairs with a fixed member collapse to a box on y.
    const int fm = fixed[static_cast<std::size_t>(pairs[p].m)], fn = fixed[static_cast<std::size_t>(pairs[p].n)];
    if (fm == 0 || fn == 0) hi[m + p] = 0.0;
    if (fm == 1 && fn == 1) lo[m + p] = 1.0;
  }

  // A finite lower bound on eta keeps the tableau well scaled.
  double eta_lo = eta_floor;
  bool has_opt = false;
  for (const auto& c : cuts) {
    if (c.kind != CutKind::Optimality) continue;
    double v = c.constant;
    for (int i = 0; i < m; ++i) v += std::min(c.coeffs[i] * lo[i], c.coeffs[i] * hi[i]);
    for (int p = 0; p < np; ++p) {
      const double w = c.has_pairs() ? c.pairs(pairs[p].m, pairs[p].n) : 0.0;
      v += std::min(w * lo[m + p], w * hi[m + p]);
    }
    eta_lo = has_opt ? std::max(eta_lo, v) : std::max(eta_floor, v);
    has_opt = true;
  }
  lo[eta_col] = eta_lo;
  hi[eta_col] = std::numeric_limits<double>::infinity();

  int rows = static_cast<int>(cuts.size());
  for (const auto& pt : pairs) rows += (pt.need_lower ? 1 : 0) + (pt.need_upper ? 2 : 0);
  LpProblem lp;
  lp.a = MatrixXd::Zero(rows, nv);
  lp.rhs = VectorXd::Zero(rows);
  lp.cost = VectorXd::Zero(nv);
  lp.cost[eta_col] = 1.0;
  lp.lower = lo;
  lp.upper = hi;
  int r = 0;
  for (const auto& c : cuts) {
    lp.a.row(r).head(m) = c.coeffs.transpose();
    for (int p = 0; p < np; ++p)
      if (c.has_pairs()) lp.a(r, m + p) = c.pairs(pairs[p].m, pairs[p].n);
    if (c.kind == CutKind::Optimality) lp.a(r, eta_col) = -1.0;
    lp.rhs[r] = -c.constant;
    ++r;
  }
  for (int p = 0; p < np; ++p) {
    const auto& pt = pairs[p];
    if (pt.need_lower) {  // b_m + b_n - y <= 1
      lp.a(r, pt.m) = 1.0;
      lp.a(r, pt.n) = 1.0;
      lp.a(r, m + p) = -1.0;
      lp.rhs[r++] = 1.0;
    }
    if (pt.need_upper) {  // y - b_m <= 0, y - b_n <= 0
      lp.a(r, m + p) = 1.0;
      lp.a(r++, pt.m) = -1.0;
      lp.a(r, m + p) = 1.0;
      lp.a(r++, pt.n) = -1.0;
    }
  }

  const LpResult res = solve_lp(lp);
  if (res.status == LpStatus::Unbounded) throw std::logic_error("lp_relax: relaxation unbounded");
  if (res.status == LpStatus::IterationLimit) throw std::runtime_error("lp_relax: pivot limit reached");
  if (res.status != LpStatus::Optimal) return out;
  out.feasible = true;
  out.lower_bound = res.value;
  out.b = res.x.head(m);
  return out;
}

struct MasterOptions {
  /// Nodes with at most this many free bits are enumerated instead of branched.
  int enumerate_below = 6;
};

/// Exact minimizer of the largest optimality cut over binary b subject to the
/// feasibility cuts. Among equal optima the lexicographically smallest b wins.
inline MasterSolution solve_master(const std::vector<LinearCut>& cuts, int m, double eta_floor = -1e12,
                                   const MasterOptions& opt = {}) {
  if (m < 1) throw std::invalid_argument("solve_master: m must be >= 1");
  if (m > 62) throw std::invalid_argument("solve_master: m too large");
  for (const auto& c : cuts)
    if (c.coeffs.size() != m || (c.has_pairs() && (c.pairs.rows() != m || c.pairs.cols() != m)))
      throw std::invalid_argument("solve_master: cut dimension mismatch");
  const double tol = detail::kMasterTol;

  MasterSolution best;
  double inc = std::numeric_limits<double>::infinity();
  std::vector<int> inc_bits;

  // Lexicographically smallest point of a node: free bits at zero.
  auto lex_min = [](const BitFixing& f) {
    std::vector<int> v(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) v[i] = f[i] == 1 ? 1 : 0;
    return v;
  };
  auto offer = [&](const VectorXd& b) {
    if (!detail::feasible_point(cuts, b)) return;
    const double v = detail::max_optimality(cuts, b, eta_floor);
    std::vector<int> bits(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) bits[static_cast<std::size_t>(i)] = b[i] > 0.5 ? 1 : 0;
    if (v < inc - tol || (v <= inc + tol && bits < inc_bits)) {
      inc = std::min(inc, v);
      inc_bits = bits;
      best.eta = v;
    }
  };
  auto prunable = [&](double bound, const BitFixing& f) {
    if (bound > inc + tol) return true;
    return bound >= inc - tol && !inc_bits.empty() && !(lex_min(f) < inc_bits);
  };

  struct Node {
    double bound;
    std::uint64_t id;
    BitFixing fixed;
    VectorXd b;
  };
  auto worse = [](const Node& a, const Node& b) {
    return a.bound > b.bound || (a.bound == b.bound && a.id > b.id);
  };
  std::priority_queue<Node, std::vector<Node>, decltype(worse)> open(worse);
  std::uint64_t next_id = 0;

  auto push = [&](BitFixing f) {
    const int n_free = static_cast<int>(std::count(f.begin(), f.end(), -1));
    if (n_free <= opt.enumerate_below) {
      // Small subtree: evaluate every completion directly.
      std::vector<int> free_idx;
      for (int i = 0; i < m; ++i)
        if (f[static_cast<std::size_t>(i)] < 0) free_idx.push_back(i);
      VectorXd b(m);
      for (int i = 0; i < m; ++i) b[i] = f[static_cast<std::size_t>(i)] == 1 ? 1.0 : 0.0;
      for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n_free); ++mask) {
        for (int k = 0; k < n_free; ++k) b[free_idx[static_cast<std::size_t>(k)]] = ((mask >> k) & 1u) ? 1.0 : 0.0;
        offer(b);
      }
      ++best.nodes;
      return;
    }
    LpRelaxation lr = lp_relax(cuts, m, eta_floor, f);
    ++best.nodes;
    if (!lr.feasible || prunable(lr.lower_bound, f)) return;
    open.push(Node{lr.lower_bound, next_id++, std::move(f), std::move(lr.b)});
  };

  push(BitFixing(static_cast<std::size_t>(m), -1));
  while (!open.empty()) {
    Node node = open.top();
    open.pop();
    if (prunable(node.bound, node.fixed)) continue;

    int branch = -1;
    double frac_best = -1.0;
    for (int i = 0; i < m; ++i) {
      if (node.fixed[static_cast<std::size_t>(i)] >= 0) continue;
      const double frac = std::min(node.b[i], 1.0 - node.b[i]);
      if (frac > 1e-7 && frac > frac_best + 1e-12) {
        frac_best = frac;
        branch = i;
      }
    }
    if (branch < 0) {
      // Integral relaxation: the bound is attained here. Keep splitting only
      // if a lexicographically smaller tie may hide in the node.
      VectorXd b = node.b.unaryExpr([](double x) { return x > 0.5 ? 1.0 : 0.0; });
      offer(b);
      if (prunable(node.bound, node.fixed)) continue;
      for (int i = 0; i < m; ++i)
        if (node.fixed[static_cast<std::size_t>(i)] < 0) {
          branch = i;
          break;
        }
      if (branch < 0) continue;
    }
    for (int v : {0, 1}) {
      BitFixing child = node.fixed;
      child[static_cast<std::size_t>(branch)] = v;
      push(std::move(child));
    }
  }

  if (inc_bits.empty()) return best;
  best.status = MasterStatus::Optimal;
  best.pins = PinVector::from_bits(inc_bits);
  return best;
}

}  // namespace irsbeam

#endif  // IRSBEAM_MILP_HPP_
