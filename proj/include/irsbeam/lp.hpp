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

#ifndef IRSBEAM_LP_HPP_
#define IRSBEAM_LP_HPP_

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace irsbeam {

/// minimize cost^T x  s.t.  a x <= rhs,  lower <= x <= upper.
/// Lower bounds must be finite; upper bounds may be +inf.
struct LpProblem {
  Eigen::VectorXd cost;
  Eigen::MatrixXd a;
  Eigen::VectorXd rhs;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
};

enum class LpStatus { Optimal, Infeasible, Unbounded, IterationLimit };

struct LpResult {
  LpStatus status = LpStatus::Infeasible;
  double value = 0.0;
  Eigen::VectorXd x;
  int pivots = 0;
};

namespace detail {

// Dense tableau simplex with the upper-bounding technique. Columns are the
// structural variables, then one slack per row, then one artificial per row
// whose initial slack would be negative.
class BoundedSimplex {
 public:
  static constexpr double kTol = 1e-9;

  BoundedSimplex(const LpProblem& p) : n_struct_(static_cast<int>(p.cost.size())) {
    const int rows = static_cast<int>(p.a.rows());
    if (p.a.cols() != n_struct_ || p.rhs.size() != rows || p.lower.size() != n_struct_ ||
        p.upper.size() != n_struct_)
      throw std::invalid_argument("solve_lp: dimension mismatch");
    for (int j = 0; j < n_struct_; ++j)
      if (!std::isfinite(p.lower[j])) throw std::invalid_argument("solve_lp: lower bounds must be finite");

    lower_ = p.lower;
    const Eigen::VectorXd r = p.rhs - p.a * p.lower;

    std::vector<int> art_rows;
    for (int i = 0; i < rows; ++i)
      if (r[i] < 0) art_rows.push_back(i);
    const int n_art = static_cast<int>(art_rows.size());
    n_ = n_struct_ + rows + n_art;

    t_ = Eigen::MatrixXd::Zero(rows, n_);
    ub_ = Eigen::VectorXd::Constant(n_, kInf);
    ub_.head(n_struct_) = p.upper - p.lower;
    basis_.assign(static_cast<std::size_t>(rows), -1);
    beta_ = Eigen::VectorXd::Zero(rows);
    at_upper_.assign(static_cast<std::size_t>(n_), false);

    int art = 0;
    for (int i = 0; i < rows; ++i) {
      if (r[i] >= 0) {
        t_.row(i).head(n_struct_) = p.a.row(i);
        t_(i, n_struct_ + i) = 1.0;
        basis_[static_cast<std::size_t>(i)] = n_struct_ + i;
        beta_[i] = r[i];
      } else {
        // -a x - s + art = -r
        t_.row(i).head(n_struct_) = -p.a.row(i);
        t_(i, n_struct_ + i) = -1.0;
        const int col = n_struct_ + rows + art++;
        t_(i, col) = 1.0;
        basis_[static_cast<std::size_t>(i)] = col;
        beta_[i] = -r[i];
      }
    }
    first_art_ = n_struct_ + rows;
    cost2_ = Eigen::VectorXd::Zero(n_);
    cost2_.head(n_struct_) = p.cost;
    for (int j = 0; j < n_struct_; ++j)
      if (ub_[j] < -kTol) infeasible_bounds_ = true;
  }

  LpResult solve(int max_pivots) {
    LpResult res;
    if (infeasible_bounds_) return res;
    if (first_art_ < n_) {
      Eigen::VectorXd c1 = Eigen::VectorXd::Zero(n_);
      c1.tail(n_ - first_art_).setOnes();
      const LpStatus s1 = run(c1, max_pivots, res.pivots);
      if (s1 == LpStatus::IterationLimit) {
        res.status = s1;
        return res;
      }
      if (objective(c1) > 1e-7 * std::max(1.0, scale_)) return res;
      for (int j = first_art_; j < n_; ++j) ub_[j] = 0.0;  // artificials stay at zero
    }
    res.status = run(cost2_, max_pivots, res.pivots);
    if (res.status != LpStatus::Optimal) return res;

    Eigen::VectorXd x = Eigen::VectorXd::Zero(n_);
    for (int j = 0; j < n_; ++j)
      if (at_upper_[static_cast<std::size_t>(j)]) x[j] = ub_[j];
    for (std::size_t i = 0; i < basis_.size(); ++i) x[basis_[i]] = beta_[static_cast<Eigen::Index>(i)];
    res.x = x.head(n_struct_) + lower_;
    res.value = cost2_.head(n_struct_).dot(res.x);
    return res;
  }

 private:
  static constexpr double kInf = std::numeric_limits<double>::infinity();

  double objective(const Eigen::VectorXd& c) const {
    double v = 0.0;
    for (int j = 0; j < n_; ++j)
      if (at_upper_[static_cast<std::size_t>(j)]) v += c[j] * ub_[j];
    for (std::size_t i = 0; i < basis_.size(); ++i) v += c[basis_[i]] * beta_[static_cast<Eigen::Index>(i)];
    return v;
  }

  LpStatus run(const Eigen::VectorXd& c, int max_pivots, int& pivots) {
    const int rows = static_cast<int>(t_.rows());
    std::vector<bool> is_basic(static_cast<std::size_t>(n_), false);
    for (int b : basis_) is_basic[static_cast<std::size_t>(b)] = true;

    Eigen::VectorXd cb(rows);
    for (int i = 0; i < rows; ++i) cb[i] = c[basis_[static_cast<std::size_t>(i)]];
    Eigen::VectorXd d = c - t_.transpose() * cb;
    scale_ = std::max(scale_, beta_.cwiseAbs().maxCoeff());

    int degenerate_run = 0;
    while (true) {
      // Dantzig pricing; Bland's rule after a long degenerate stretch.
      const bool bland = degenerate_run > 50;
      int enter = -1;
      double best = 0.0;
      for (int j = 0; j < n_; ++j) {
        if (is_basic[static_cast<std::size_t>(j)] || ub_[j] <= kTol) continue;
        const bool up = at_upper_[static_cast<std::size_t>(j)];
        const double gain = up ? d[j] : -d[j];
        if (gain > kTol && (enter < 0 || (!bland && gain > best))) {
          enter = j;
          best = gain;
          if (bland) break;
        }
      }
      if (enter < 0) return LpStatus::Optimal;
      if (pivots >= max_pivots) return LpStatus::IterationLimit;

      const double dir = at_upper_[static_cast<std::size_t>(enter)] ? -1.0 : 1.0;
      double row_lim = kInf;
      int leave = -1;
      bool leave_to_upper = false;
      for (int i = 0; i < rows; ++i) {
        const double alpha = dir * t_(i, enter);
        const int bv = basis_[static_cast<std::size_t>(i)];
        double lim;
        bool to_upper;
        if (alpha > kTol) {
          lim = beta_[i] / alpha;
          to_upper = false;
        } else if (alpha < -kTol && std::isfinite(ub_[bv])) {
          lim = (ub_[bv] - beta_[i]) / -alpha;
          to_upper = true;
        } else {
          continue;
        }
        lim = std::max(lim, 0.0);
        const bool tie = leave >= 0 && lim <= row_lim + kTol && bv < basis_[static_cast<std::size_t>(leave)];
        if (lim < row_lim - kTol || tie) {
          row_lim = std::min(row_lim, lim);
          leave = i;
          leave_to_upper = to_upper;
        }
      }
      double theta = row_lim;
      if (ub_[enter] <= row_lim) {
        theta = ub_[enter];
        leave = -1;
      }
      if (!std::isfinite(theta)) return LpStatus::Unbounded;
      ++pivots;
      degenerate_run = theta <= kTol ? degenerate_run + 1 : 0;

      beta_ -= (dir * theta) * t_.col(enter);
      if (leave < 0) {
        // Bound flip of the entering variable.
        at_upper_[static_cast<std::size_t>(enter)] = !at_upper_[static_cast<std::size_t>(enter)];
        continue;
      }
      const double enter_value = (at_upper_[static_cast<std::size_t>(enter)] ? ub_[enter] : 0.0) + dir * theta;
      const int out = basis_[static_cast<std::size_t>(leave)];
      at_upper_[static_cast<std::size_t>(out)] = leave_to_upper;
      at_upper_[static_cast<std::size_t>(enter)] = false;
      is_basic[static_cast<std::size_t>(out)] = false;
      is_basic[static_cast<std::size_t>(enter)] = true;
      basis_[static_cast<std::size_t>(leave)] = enter;
      beta_[leave] = enter_value;

      const double piv = t_(leave, enter);
      t_.row(leave) /= piv;
      for (int i = 0; i < rows; ++i) {
        if (i == leave) continue;
        const double f = t_(i, enter);
        if (f != 0.0) t_.row(i) -= f * t_.row(leave);
      }
      const double fd = d[enter];
      if (fd != 0.0) d -= fd * t_.row(leave).transpose();
    }
  }

  int n_struct_;
  int n_ = 0;
  int first_art_ = 0;
  Eigen::MatrixXd t_;
  Eigen::VectorXd ub_;
  Eigen::VectorXd lower_;
  Eigen::VectorXd beta_;
  Eigen::VectorXd cost2_;
  std::vector<int> basis_;
  std::vector<bool> at_upper_;
  double scale_ = 1.0;
  bool infeasible_bounds_ = false;
};

}  // namespace detail

inline LpResult solve_lp(const LpProblem& p, int max_pivots = 100000) {
  detail::BoundedSimplex s(p);
  return s.solve(max_pivots);
}

}  // namespace irsbeam

#endif  // IRSBEAM_LP_HPP_
