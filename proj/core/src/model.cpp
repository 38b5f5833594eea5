#include "relmodel/model.hpp"

#include <cmath>
#include <sstream>

namespace relmodel {
namespace {

constexpr double kRankTol = 1e-10;
constexpr double kSpanTol = 1e-8;

std::string join_violations(const std::vector<DesignViolation>& violations) {
  std::ostringstream msg;
  msg << "invalid design matrix:";
  for (const auto& v : violations) {
    msg << "\n  [" << to_string(v.kind) << "] " << v.detail;
  }
  return msg.str();
}

}  // namespace

std::string_view to_string(DesignViolation::Kind kind) noexcept {
  switch (kind) {
    case DesignViolation::Kind::empty: return "empty";
    case DesignViolation::Kind::non_binary: return "non-binary";
    case DesignViolation::Kind::rank_deficient: return "rank-deficient";
    case DesignViolation::Kind::ones_in_column_span:
      return "ones-in-column-span";
    case DesignViolation::Kind::zero_row: return "zero-row";
  }
  return "unknown";
}

DesignError::DesignError(std::vector<DesignViolation> violations)
    : Error(ErrorKind::validation, join_violations(violations)),
      violations_(std::move(violations)) {}

std::vector<DesignViolation> design_violations(const Matrix& x) {
  using Kind = DesignViolation::Kind;
  std::vector<DesignViolation> out;
  const Index r = x.rows();
  const Index k = x.cols();
  if (r == 0 || k == 0) {
    out.push_back({Kind::empty, "design matrix has no rows or no columns"});
    return out;
  }

  int bad_entries = 0;
  std::ostringstream where;
  for (Index i = 0; i < r; ++i) {
    for (Index j = 0; j < k; ++j) {
      const double v = x(i, j);
      if (v != 0.0 && v != 1.0) {
        if (bad_entries < 5) {
          where << (bad_entries ? ", " : "") << "(" << i + 1 << "," << j + 1
                << ")=" << v;
        }
        ++bad_entries;
      }
    }
  }
  if (bad_entries > 0) {
    std::ostringstream msg;
    msg << bad_entries << " entries are not 0 or 1: " << where.str();
    out.push_back({Kind::non_binary, msg.str()});
    // Rank and span checks are meaningless on non-finite input.
    if (!x.allFinite()) return out;
  }

  for (Index i = 0; i < r; ++i) {
    if ((x.row(i).array() == 0.0).all()) {
      std::ostringstream msg;
      msg << "row " << i + 1
          << " is all zeros, which would force that cell's probability to 1; "
             "multiplicative models apply only to tables whose all-zero cell "
             "has been removed";
      out.push_back({Kind::zero_row, msg.str()});
    }
  }

  Eigen::ColPivHouseholderQR<Matrix> qr(x);
  qr.setThreshold(kRankTol);
  if (qr.rank() < k) {
    std::ostringstream msg;
    msg << "design has rank " << qr.rank() << " but " << k << " columns";
    out.push_back({Kind::rank_deficient, msg.str()});
  }

  const Vector ones = Vector::Ones(r);
  double residual = ones.norm();
  if (qr.rank() > 0) residual = (x * qr.solve(ones) - ones).norm();
  if (!(residual > kSpanTol * std::sqrt(static_cast<double>(r)))) {
    std::ostringstream msg;
    msg << "the all-ones vector lies in the column span (least-squares "
           "residual "
        << residual << "); the model would carry an overall effect";
    out.push_back({Kind::ones_in_column_span, msg.str()});
  }
  return out;
}

DesignMatrix validate_design(Matrix x) {
  auto violations = design_violations(x);
  if (!violations.empty()) throw DesignError(std::move(violations));
  return DesignMatrix(std::move(x));
}

Matrix ConstraintSystem::full() const {
  Matrix out(1 + h.rows(), c.size());
  out.row(0) = c.transpose();
  if (h.rows() > 0) out.bottomRows(h.rows()) = h;
  return out;
}

ConstraintSystem constraint_canonical(const DesignMatrix& design) {
  const Matrix b = null_space_basis(design.matrix());
  const Vector sums = b.rowwise().sum();
  Index pivot = 0;
  const double largest = sums.cwiseAbs().maxCoeff(&pivot);
  if (!(largest > 1e-12)) {
    throw Error(ErrorKind::internal,
                "every annihilator row sums to zero although the all-ones "
                "vector is outside the column span");
  }
  const double t1 = sums(pivot);
  ConstraintSystem out;
  out.c = -b.row(pivot).transpose() / t1;
  out.h.resize(b.rows() - 1, b.cols());
  Index row = 0;
  for (Index a = 0; a < b.rows(); ++a) {
    if (a == pivot) continue;
    out.h.row(row++) = b.row(a) - b.row(pivot) * (sums(a) / t1);
  }
  return out;
}

double constraint_residual(const ConstraintSystem& constraints,
                           const Vector& pi) {
  if (pi.size() != constraints.c.size()) {
    throw Error(ErrorKind::domain, "constraint_residual: dimension mismatch");
  }
  if (pi.minCoeff() <= 0.0) {
    throw Error(ErrorKind::domain,
                "constraint_residual: probabilities must be positive");
  }
  const Vector logp = pi.array().log().matrix();
  return (constraints.full() * logp).cwiseAbs().maxCoeff();
}

CanonicalBasis CanonicalBasis::from_columns(Matrix g) {
  const Index q = g.rows();
  if (g.cols() != q - 1) {
    throw Error(ErrorKind::domain, "canonical basis needs q x (q-1) columns");
  }
  CanonicalBasis out;
  out.centering = Matrix::Identity(q, q) -
                  Matrix::Constant(q, q, 1.0 / static_cast<double>(q));
  const Matrix gr = g.transpose() * out.centering;
  Eigen::LDLT<Matrix> ldlt(gr * g);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive() ||
      ldlt.vectorD().minCoeff() <= 1e-12 * ldlt.vectorD().maxCoeff()) {
    throw Error(ErrorKind::domain,
                "canonical basis columns are rank deficient or span 1");
  }
  out.d = ldlt.solve(gr);
  out.g = std::move(g);
  return out;
}

CanonicalBasis CanonicalBasis::identity_dropped(Index cells) {
  return from_columns(Matrix::Identity(cells, cells).rightCols(cells - 1));
}

CanonicalBasis CanonicalBasis::partitioned(const DesignMatrix& design) {
  const Index r = design.cells();
  const Index k = design.params();
  Matrix with_ones(r, k + 1);
  with_ones.col(0).setOnes();
  with_ones.rightCols(k) = design.matrix();
  const Matrix z = null_space_basis(with_ones).transpose();
  Matrix g(r, r - 1);
  g.leftCols(k) = design.matrix();
  if (z.cols() > 0) g.rightCols(z.cols()) = z;
  auto out = from_columns(std::move(g));
  out.leading = k;
  return out;
}

Vector canonical_params(const Vector& pi, const CanonicalBasis& basis) {
  if (pi.size() != basis.d.cols()) {
    throw Error(ErrorKind::domain, "canonical_params: dimension mismatch");
  }
  if (!pi.allFinite() || pi.minCoeff() <= 0.0) {
    throw Error(ErrorKind::domain,
                "canonical_params: probabilities must be strictly positive");
  }
  return basis.d * pi.array().log().matrix();
}

}  // namespace relmodel
