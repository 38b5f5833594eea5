#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <functional>

namespace relmodel {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

// ---------------------------------------------------------------------------
// Dense linear algebra
// ---------------------------------------------------------------------------

/// Orthonormal basis of the left null space of `m`.
///
/// For an r x k matrix of full column rank the result B is (r-k) x r with
/// B * m = 0 and B * B' = I. Built from the trailing columns of Q in a
/// column-pivoted Householder QR of `m`. A pivot below `tol` times the largest
/// entry of `m` means rank deficiency and raises ErrorKind::validation.
Matrix null_space_basis(const Matrix& m, double tol = 1e-10);

/// Solve a * x = b for symmetric positive definite `a` via Cholesky.
/// A failed factorization raises ErrorKind::boundary (singular information).
Vector solve_spd(const Matrix& a, const Vector& b);

double max_abs(const Matrix& m);

// ---------------------------------------------------------------------------
// Special functions
// ---------------------------------------------------------------------------

/// Regularized lower incomplete gamma P(a, x).
double gamma_p(double a, double x);

/// Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x).
double gamma_q(double a, double x);

/// Upper tail probability of the chi-square law with `df` degrees of freedom.
double chisq_sf(double x, int df);

/// x such that chisq_sf(x, df) == tail; bisection to 1e-12 relative.
double chisq_isf(double tail, int df);

// ---------------------------------------------------------------------------
// Linear feasibility
// ---------------------------------------------------------------------------

/// True iff some p >= 0 with 1'p = 1 has X'p = t (phase-one simplex, Bland's
/// rule). `tol` bounds the residual infeasibility accepted as zero.
bool simplex_feasible(const Matrix& x, const Vector& t, double tol = 1e-9);

// ---------------------------------------------------------------------------
// Parallel helper
// ---------------------------------------------------------------------------

/// Runs body(i) for i in [0, count) on up to `threads` workers. Work items are
/// claimed dynamically; callers write results into slot i so the outcome does
/// not depend on scheduling. threads <= 1 runs inline.
void parallel_for(std::size_t count, unsigned threads,
                  const std::function<void(std::size_t)>& body);

}  // namespace relmodel
