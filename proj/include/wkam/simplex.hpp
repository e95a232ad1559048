#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace wkam {

// Dense revised simplex for
//     min c^T w   s.t.  A w = b,  w >= 0,
// sized for tableaus in the 10^7-entry range (m in the hundreds, n in the
// thousands). Two-phase with artificial variables; Dantzig pricing with a
// Bland's-rule fallback after a run of degenerate pivots (anti-cycling).
class DenseSimplex {
 public:
  enum class Status { Optimal, Infeasible, Unbounded, IterationLimit };

  struct Result {
    Status status = Status::IterationLimit;
    std::vector<double> x;
    std::vector<double> duals;   // y with y^T A <= c^T at optimality
    double objective = 0.0;
    double max_primal_residual = 0.0; // |A x - b|_inf recomputed at exit
    int iterations = 0;
  };

  DenseSimplex(std::vector<double> A_rowmajor, std::vector<double> b, std::vector<double> c)
      : A_(std::move(A_rowmajor)), b_(std::move(b)), c_(std::move(c)) {
    m_ = b_.size();
    n_ = c_.size();
    if (A_.size() != m_ * n_) throw std::invalid_argument("DenseSimplex: A must be m x n");
  }

  Result solve(int max_iterations = 200000, double tol = 1e-9) {
    // floor the tolerance: below ~1e-9 the pricing chases rounding noise
    tol_ = std::max(tol, 1e-9);
    // normalize to b >= 0, remembering flips so duals can be reported in
    // the caller's row convention
    flipped_.assign(m_, false);
    for (std::size_t i = 0; i < m_; ++i) {
      if (b_[i] < 0.0) {
        flipped_[i] = true;
        b_[i] = -b_[i];
        for (std::size_t j = 0; j < n_; ++j) A_[i * n_ + j] = -A_[i * n_ + j];
      }
    }
    // anti-degeneracy: iterate on a slightly perturbed right-hand side
    // (graded per row, so ratio-test ties become generic), then recompute
    // the basic solution from the final basis with the true b
    const std::vector<double> b_true = b_;
    for (std::size_t i = 0; i < m_; ++i)
      b_[i] += kPerturb * static_cast<double>(i + 1);
    // artificial start: basis = artificials n_..n_+m_-1
    basis_.resize(m_);
    for (std::size_t i = 0; i < m_; ++i) basis_[i] = n_ + i;
    binv_.assign(m_ * m_, 0.0);
    for (std::size_t i = 0; i < m_; ++i) binv_[i * m_ + i] = 1.0;
    xb_ = b_;

    Result res;
    int used = 0;

    // phase 1: min sum of artificials
    phase1_ = true;
    const Status s1 = iterate(max_iterations, used);
    res.iterations = used;
    if (s1 == Status::IterationLimit) {
      res.status = s1;
      return res;
    }
    double art_level = 0.0;
    for (std::size_t i = 0; i < m_; ++i)
      if (basis_[i] >= n_) art_level += xb_[i];
    if (art_level > 1e-7) {
      res.status = Status::Infeasible;
      return res;
    }
    drive_out_artificials();

    // phase 2: true costs; artificials never re-enter
    phase1_ = false;
    const Status s2 = iterate(max_iterations - used, used);
    res.iterations = used;
    res.status = s2;

    // undo the perturbation: same basis, true right-hand side
    b_ = b_true;
    refactorize();
    for (double& v : xb_)
      if (v < 0.0) v = 0.0; // perturbation-scale negatives only

    res.x.assign(n_, 0.0);
    for (std::size_t i = 0; i < m_; ++i)
      if (basis_[i] < n_) res.x[basis_[i]] = xb_[i];
    res.objective = 0.0;
    for (std::size_t j = 0; j < n_; ++j) res.objective += c_[j] * res.x[j];
    res.duals = compute_duals();
    for (std::size_t i = 0; i < m_; ++i)
      if (flipped_[i]) res.duals[i] = -res.duals[i];
    for (std::size_t i = 0; i < m_; ++i) {
      double r = -b_[i];
      for (std::size_t j = 0; j < n_; ++j) r += A_[i * n_ + j] * res.x[j];
      res.max_primal_residual = std::max(res.max_primal_residual, std::abs(r));
    }
    return res;
  }

 private:
  double cost_of(std::size_t j) const {
    if (phase1_) return j >= n_ ? 1.0 : 0.0;
    // artificials never re-enter in phase 2; one may linger in the basis at
    // zero level when rows are redundant, at zero cost
    return j >= n_ ? 0.0 : c_[j];
  }

  // column j of the extended matrix [A | I]
  double entry(std::size_t i, std::size_t j) const {
    return j < n_ ? A_[i * n_ + j] : (j - n_ == i ? 1.0 : 0.0);
  }

  std::vector<double> compute_duals() const {
    std::vector<double> y(m_, 0.0);
    for (std::size_t i = 0; i < m_; ++i) {
      const double cb = cost_of(basis_[i]);
      if (cb == 0.0) continue;
      for (std::size_t k = 0; k < m_; ++k) y[k] += cb * binv_[i * m_ + k];
    }
    return y;
  }

  Status iterate(int budget, int& used) {
    int degenerate_run = 0;
    bool bland = false;
    for (int it = 0; it < budget; ++it, ++used) {
      if (used > 0 && used % 64 == 0) refactorize();
      const std::vector<double> y = compute_duals();

      // pricing
      std::size_t enter = kNone;
      double best_rc = -tol_;
      for (std::size_t j = 0; j < n_; ++j) {
        if (is_basic(j)) continue;
        double rc = cost_of(j);
        for (std::size_t i = 0; i < m_; ++i) rc -= y[i] * A_[i * n_ + j];
        if (bland) {
          if (rc < -tol_) { enter = j; break; }
        } else if (rc < best_rc) {
          best_rc = rc;
          enter = j;
        }
      }
      if (enter == kNone) return Status::Optimal;

      // direction d = B^-1 a_enter
      std::vector<double> dir(m_, 0.0);
      for (std::size_t i = 0; i < m_; ++i) {
        double s = 0.0;
        for (std::size_t k = 0; k < m_; ++k) s += binv_[i * m_ + k] * entry(k, enter);
        dir[i] = s;
      }

      // ratio test; ties broken toward the smallest basis variable index.
      // Pivot eligibility uses a fixed threshold (independent of the
      // optimality tolerance) so a tiny tol cannot admit near-singular
      // bases.
      std::size_t leave = kNone;
      double theta = std::numeric_limits<double>::infinity();
      // under Bland's rule the tie window must be tight or the
      // anti-cycling guarantee is lost
      const double tie = bland ? 1e-12 : tol_;
      for (std::size_t i = 0; i < m_; ++i) {
        if (dir[i] > kPivTol) {
          const double t = xb_[i] / dir[i];
          if (t < theta - tie ||
              (t < theta + tie && (leave == kNone || basis_[i] < basis_[leave]))) {
            theta = std::min(theta, t);
            leave = i;
          }
        }
      }
      if (leave == kNone) return Status::Unbounded;

      // Bland stays engaged once triggered: dropping back to Dantzig after
      // a single nondegenerate pivot re-opens the cycling it prevents
      if (theta < tol_) {
        if (++degenerate_run > static_cast<int>(m_)) bland = true;
      } else {
        degenerate_run = 0;
      }

      pivot(enter, leave, dir, theta);
    }
    return Status::IterationLimit;
  }

  bool is_basic(std::size_t j) const {
    for (std::size_t i = 0; i < m_; ++i)
      if (basis_[i] == j) return true;
    return false;
  }

  void pivot(std::size_t enter, std::size_t leave, const std::vector<double>& dir, double theta) {
    for (std::size_t i = 0; i < m_; ++i) xb_[i] -= theta * dir[i];
    xb_[leave] = theta;
    const double piv = dir[leave];
    for (std::size_t k = 0; k < m_; ++k) binv_[leave * m_ + k] /= piv;
    for (std::size_t i = 0; i < m_; ++i) {
      if (i == leave) continue;
      const double f = dir[i];
      if (f == 0.0) continue;
      for (std::size_t k = 0; k < m_; ++k) binv_[i * m_ + k] -= f * binv_[leave * m_ + k];
    }
    basis_[leave] = enter;
  }

  // rebuild B^-1 from the basis columns by Gauss-Jordan with partial
  // pivoting, then recompute xb
  void refactorize() {
    std::vector<double> M(m_ * 2 * m_, 0.0);
    for (std::size_t i = 0; i < m_; ++i) {
      for (std::size_t jb = 0; jb < m_; ++jb) M[i * 2 * m_ + jb] = entry(i, basis_[jb]);
      M[i * 2 * m_ + m_ + i] = 1.0;
    }
    for (std::size_t col = 0; col < m_; ++col) {
      std::size_t p = col;
      for (std::size_t i = col + 1; i < m_; ++i)
        if (std::abs(M[i * 2 * m_ + col]) > std::abs(M[p * 2 * m_ + col])) p = i;
      if (std::abs(M[p * 2 * m_ + col]) < 1e-14)
        throw std::runtime_error("DenseSimplex: singular basis during refactorization");
      if (p != col)
        for (std::size_t k = 0; k < 2 * m_; ++k) std::swap(M[p * 2 * m_ + k], M[col * 2 * m_ + k]);
      const double piv = M[col * 2 * m_ + col];
      for (std::size_t k = 0; k < 2 * m_; ++k) M[col * 2 * m_ + k] /= piv;
      for (std::size_t i = 0; i < m_; ++i) {
        if (i == col) continue;
        const double f = M[i * 2 * m_ + col];
        if (f == 0.0) continue;
        for (std::size_t k = 0; k < 2 * m_; ++k) M[i * 2 * m_ + k] -= f * M[col * 2 * m_ + k];
      }
    }
    for (std::size_t i = 0; i < m_; ++i)
      for (std::size_t k = 0; k < m_; ++k) binv_[i * m_ + k] = M[i * 2 * m_ + m_ + k];
    for (std::size_t i = 0; i < m_; ++i) {
      double s = 0.0;
      for (std::size_t k = 0; k < m_; ++k) s += binv_[i * m_ + k] * b_[k];
      xb_[i] = s < 0.0 && s > -1e-11 ? 0.0 : s;
    }
  }

  // replace basic artificials at zero level by any structural column with a
  // nonzero pivot in that row
  void drive_out_artificials() {
    for (std::size_t i = 0; i < m_; ++i) {
      if (basis_[i] < n_) continue;
      for (std::size_t j = 0; j < n_; ++j) {
        if (is_basic(j)) continue;
        double s = 0.0;
        for (std::size_t k = 0; k < m_; ++k) s += binv_[i * m_ + k] * A_[k * n_ + j];
        if (std::abs(s) > 1e-8) {
          std::vector<double> dir(m_, 0.0);
          for (std::size_t r = 0; r < m_; ++r) {
            double v = 0.0;
            for (std::size_t k = 0; k < m_; ++k) v += binv_[r * m_ + k] * A_[k * n_ + j];
            dir[r] = v;
          }
          pivot(j, i, dir, xb_[i] / dir[i]);
          break;
        }
      }
    }
  }

  static constexpr std::size_t kNone = static_cast<std::size_t>(-1);
  static constexpr double kPivTol = 1e-7;
  static constexpr double kPerturb = 1e-9;

  std::vector<double> A_, b_, c_;
  std::size_t m_ = 0, n_ = 0;
  std::vector<std::size_t> basis_;
  std::vector<bool> flipped_;
  std::vector<double> binv_;
  std::vector<double> xb_;
  double tol_ = 1e-9;
  bool phase1_ = true;
};

}  // namespace wkam
