#pragma once

#include "relmodel/errors.hpp"
#include "relmodel/numerics.hpp"

#include <string>
#include <vector>

namespace relmodel {

struct DesignViolation {
  enum class Kind {
    empty,
    non_binary,
    rank_deficient,
    ones_in_column_span,
    zero_row,
  };
  Kind kind;
  std::string detail;
};

std::string_view to_string(DesignViolation::Kind kind) noexcept;

/// Thrown by validate_design; lists every violated condition.
class DesignError : public Error {
 public:
  explicit DesignError(std::vector<DesignViolation> violations);

  const std::vector<DesignViolation>& violations() const noexcept {
    return violations_;
  }

 private:
  std::vector<DesignViolation> violations_;
};

/// An r x k zero/one design matrix certified to have full column rank, no
/// zero row, and the all-ones vector outside its column span. Only
/// validate_design can construct one.
class DesignMatrix {
 public:
  const Matrix& matrix() const noexcept { return x_; }
  Index cells() const noexcept { return x_.rows(); }
  Index params() const noexcept { return x_.cols(); }

  /// X' v for a cell vector v.
  Vector margins(const Vector& v) const { return x_.transpose() * v; }

 private:
  friend DesignMatrix validate_design(Matrix x);
  explicit DesignMatrix(Matrix x) : x_(std::move(x)) {}

  Matrix x_;
};

/// Every violated condition of `x`; empty when the matrix is a valid design.
std::vector<DesignViolation> design_violations(const Matrix& x);

DesignMatrix validate_design(Matrix x);

/// Canonical constraint pair: c'1 = -1, H1 = 0, and C = [c'; H] annihilates X.
struct ConstraintSystem {
  Vector c;
  Matrix h;  // (r-k-1) x r, possibly with zero rows

  Matrix full() const;
};

ConstraintSystem constraint_canonical(const DesignMatrix& design);

/// ||C log pi||_inf; zero exactly when pi lies in the multiplicative model.
double constraint_residual(const ConstraintSystem& constraints,
                           const Vector& pi);

/// Multivariate logistic coordinates for the simplex.
///
/// g is q x (q-1) of full rank with 1 outside its span, d = (g'Rg)^{-1} g'R
/// with R the centering projector, so d g = I and d 1 = 0. When built with
/// `partitioned`, the leading k columns of g are X and the trailing columns Z
/// are orthogonal to both 1 and X, so the trailing canonical parameters vanish
/// exactly on the log-linear model.
struct CanonicalBasis {
  Matrix g;
  Matrix d;
  Matrix centering;
  Index leading = 0;

  static CanonicalBasis from_columns(Matrix g);
  static CanonicalBasis identity_dropped(Index cells);
  static CanonicalBasis partitioned(const DesignMatrix& design);
};

/// lambda = D log pi. Invariant to positive rescaling of pi.
Vector canonical_params(const Vector& pi, const CanonicalBasis& basis);

}  // namespace relmodel
