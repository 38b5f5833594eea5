#pragma once

#include "relmodel/curved.hpp"
#include "relmodel/model.hpp"
#include "relmodel/rng.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace relmodel {

inline constexpr Index kMaxConeDimension = 8;

/// Extreme rays of the pointed cone {theta : X theta <= 0}, one per column,
/// each scaled to unit infinity norm. Columns are sorted lexicographically.
struct ConeEdges {
  Matrix rays;  // k x g

  Index count() const noexcept { return rays.cols(); }
};

/// Double-description enumeration. Raises ErrorKind::size_guard when k
/// exceeds kMaxConeDimension and ErrorKind::domain when the cone has no
/// interior point or is not pointed.
ConeEdges cone_edges(const Matrix& x);
ConeEdges cone_edges(const DesignMatrix& design);

/// The unique c > 0 with log 1'exp(c X u) = 0. Requires X u < 0 strictly.
double scale_to_surface(const Matrix& x, const Vector& u);

struct SurfaceSample {
  Matrix theta;  // count x k, rows on the constraint surface
  Matrix tau;    // count x k, X'exp(X theta)
};

/// Draws `count` points of the constraint surface: q from normalized
/// independent uniforms, u = U q, theta = scale_to_surface(u) u. Draw i uses
/// RngStream(seed, i), so the output does not depend on `threads`.
SurfaceSample sample_surface(const DesignMatrix& design, const ConeEdges& edges,
                             std::size_t count, std::uint64_t seed,
                             unsigned threads = 1);

/// True when every |theta_j| <= limit (plot window filter).
bool within_window(const Eigen::Ref<const Vector>& theta, double limit = 10.0);

struct GridPoint {
  Vector p;
  bool ok = false;
  Vector pi_hat;
  Vector s;
  double gamma = 0.0;
  std::string error;
};

/// Curved MLE for every interior point of the simplex grid with spacing
/// `step` (1/step must be an integer). Boundary points are excluded.
std::vector<GridPoint> mle_surface_grid(const DesignMatrix& design,
                                        double step, unsigned threads = 1,
                                        const CurvedOptions& options = {});

}  // namespace relmodel
