#include "relmodel/numerics.hpp"

#include <cmath>
#include <vector>

namespace relmodel {
namespace {

// Dense tableau for the phase-one problem
//   min 1'a  s.t.  A p + a = b,  p >= 0, a >= 0,  b >= 0.
// Columns 0..n-1 are structural, n..n+m-1 artificial, last column is the rhs.
class PhaseOneTableau {
 public:
  PhaseOneTableau(const Matrix& a, const Vector& b)
      : m_(a.rows()), n_(a.cols()), t_(m_ + 1, n_ + m_ + 1), basis_(m_) {
    t_.setZero();
    for (Index i = 0; i < m_; ++i) {
      const double sign = b(i) < 0.0 ? -1.0 : 1.0;
      t_.row(i).head(n_) = sign * a.row(i);
      t_(i, n_ + i) = 1.0;
      t_(i, n_ + m_) = sign * b(i);
      basis_[i] = n_ + i;
    }
    // Objective row holds reduced costs of min 1'a with the artificials basic.
    for (Index j = 0; j < n_; ++j) t_(m_, j) = -t_.col(j).head(m_).sum();
    t_(m_, n_ + m_) = -t_.col(n_ + m_).head(m_).sum();
  }

  // Runs Bland's rule to optimality; returns the optimal sum of artificials.
  double solve(double pivot_tol) {
    const Index cols = n_ + m_;
    const int max_pivots = 50 * static_cast<int>(cols + m_) + 100;
    for (int it = 0; it < max_pivots; ++it) {
      Index enter = -1;
      for (Index j = 0; j < cols; ++j) {
        if (t_(m_, j) < -pivot_tol) {
          enter = j;
          break;
        }
      }
      if (enter < 0) break;
      Index leave = -1;
      double best = 0.0;
      for (Index i = 0; i < m_; ++i) {
        const double coef = t_(i, enter);
        if (coef <= pivot_tol) continue;
        const double ratio = t_(i, cols) / coef;
        if (leave < 0 || ratio < best - 1e-15 ||
            (std::abs(ratio - best) <= 1e-15 && basis_[i] < basis_[leave])) {
          leave = i;
          best = ratio;
        }
      }
      if (leave < 0) break;  // unbounded direction; cannot occur for phase one
      pivot(leave, enter);
    }
    return -t_(m_, cols);
  }

 private:
  void pivot(Index row, Index col) {
    t_.row(row) /= t_(row, col);
    for (Index i = 0; i <= m_; ++i) {
      if (i == row) continue;
      const double f = t_(i, col);
      if (f != 0.0) t_.row(i) -= f * t_.row(row);
    }
    basis_[row] = col;
  }

  Index m_;
  Index n_;
  Matrix t_;
  std::vector<Index> basis_;
};

}  // namespace

bool simplex_feasible(const Matrix& x, const Vector& t, double tol) {
  const Index r = x.rows();
  const Index k = x.cols();
  if (r == 0 || k == 0 || t.size() != k || !t.allFinite()) return false;

  Matrix a(k + 1, r);
  a.topRows(k) = x.transpose();
  a.row(k).setOnes();
  Vector b(k + 1);
  b.head(k) = t;
  b(k) = 1.0;

  PhaseOneTableau tableau(a, b);
  const double infeasibility = tableau.solve(1e-12);
  return infeasibility <= tol;
}

}  // namespace relmodel
