#include "relmodel/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace relmodel {
namespace {

constexpr double kZeroTol = 1e-9;

struct Ray {
  Vector dir;
  std::vector<bool> active;  // constraints (rows) with x_i' dir == 0
};

void normalize(Vector& v) {
  const double m = v.cwiseAbs().maxCoeff();
  if (m > 0.0) v /= m;
}

bool subset(const std::vector<bool>& a, const std::vector<bool>& b) {
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] && !b[i]) return false;
  }
  return true;
}

std::vector<bool> intersect(const std::vector<bool>& a,
                            const std::vector<bool>& b) {
  std::vector<bool> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] && b[i];
  return out;
}

bool lex_less(const Vector& a, const Vector& b) {
  for (Index i = 0; i < a.size(); ++i) {
    if (a(i) < b(i) - kZeroTol) return true;
    if (a(i) > b(i) + kZeroTol) return false;
  }
  return false;
}

}  // namespace

ConeEdges cone_edges(const Matrix& x) {
  const Index r = x.rows();
  const Index k = x.cols();
  if (k > kMaxConeDimension) {
    std::ostringstream msg;
    msg << "cone enumeration is limited to k <= " << kMaxConeDimension
        << " parameters (got " << k << ")";
    throw Error(ErrorKind::size_guard, msg.str());
  }
  if (r == 0 || k == 0) throw Error(ErrorKind::domain, "empty design");

  // Seed with k linearly independent rows: the simplicial cone B theta <= 0
  // has rays given by the columns of -B^{-1}.
  std::vector<Index> seed_rows;
  Matrix basis(0, k);
  for (Index i = 0; i < r && static_cast<Index>(seed_rows.size()) < k; ++i) {
    Matrix trial(basis.rows() + 1, k);
    if (basis.rows() > 0) trial.topRows(basis.rows()) = basis;
    trial.row(basis.rows()) = x.row(i);
    Eigen::FullPivLU<Matrix> lu(trial);
    lu.setThreshold(1e-10);
    if (lu.rank() == trial.rows()) {
      basis = std::move(trial);
      seed_rows.push_back(i);
    }
  }
  if (static_cast<Index>(seed_rows.size()) < k) {
    throw Error(ErrorKind::domain,
                "cone is not pointed: the design is rank deficient");
  }

  const Matrix inv = basis.inverse();
  std::vector<Ray> rays;
  std::vector<bool> processed(static_cast<std::size_t>(r), false);
  for (Index i : seed_rows) processed[static_cast<std::size_t>(i)] = true;
  for (Index j = 0; j < k; ++j) {
    Ray ray;
    ray.dir = -inv.col(j);
    normalize(ray.dir);
    ray.active.assign(static_cast<std::size_t>(r), false);
    for (Index s = 0; s < k; ++s) {
      if (s != j) ray.active[static_cast<std::size_t>(seed_rows[s])] = true;
    }
    rays.push_back(std::move(ray));
  }

  for (Index row = 0; row < r; ++row) {
    if (processed[static_cast<std::size_t>(row)]) continue;
    processed[static_cast<std::size_t>(row)] = true;
    const Vector a = x.row(row).transpose();

    std::vector<std::size_t> pos;
    std::vector<double> value(rays.size());
    std::vector<Ray> next;
    for (std::size_t i = 0; i < rays.size(); ++i) {
      value[i] = a.dot(rays[i].dir);
      if (value[i] > kZeroTol) {
        pos.push_back(i);
      } else {
        Ray kept = rays[i];
        if (value[i] >= -kZeroTol) {
          kept.active[static_cast<std::size_t>(row)] = true;
        }
        next.push_back(std::move(kept));
      }
    }
    for (std::size_t p : pos) {
      for (std::size_t n = 0; n < rays.size(); ++n) {
        if (!(value[n] < -kZeroTol)) continue;
        const auto common = intersect(rays[p].active, rays[n].active);
        const auto shared = std::count(common.begin(), common.end(), true);
        if (shared < k - 2) continue;
        bool adjacent = true;
        for (std::size_t o = 0; o < rays.size() && adjacent; ++o) {
          if (o == p || o == n) continue;
          if (subset(common, rays[o].active)) adjacent = false;
        }
        if (!adjacent) continue;
        Ray fresh;
        fresh.dir = value[p] * rays[n].dir - value[n] * rays[p].dir;
        normalize(fresh.dir);
        fresh.active = common;
        fresh.active[static_cast<std::size_t>(row)] = true;
        next.push_back(std::move(fresh));
      }
    }
    rays = std::move(next);
  }

  // Recompute active sets against the full system and drop duplicates.
  std::vector<Vector> unique;
  for (auto& ray : rays) {
    normalize(ray.dir);
    for (Index i = 0; i < k; ++i) {
      if (std::abs(ray.dir(i)) < kZeroTol) ray.dir(i) = 0.0;
    }
    const bool dup = std::any_of(unique.begin(), unique.end(),
                                 [&](const Vector& u) {
                                   return (u - ray.dir).cwiseAbs().maxCoeff() <=
                                          kZeroTol;
                                 });
    if (!dup) unique.push_back(ray.dir);
  }
  std::sort(unique.begin(), unique.end(), lex_less);

  ConeEdges out;
  out.rays.resize(k, static_cast<Index>(unique.size()));
  for (std::size_t j = 0; j < unique.size(); ++j) {
    out.rays.col(static_cast<Index>(j)) = unique[j];
  }
  const Vector centre = x * out.rays.rowwise().sum();
  if (!(centre.maxCoeff() < -kZeroTol)) {
    throw Error(ErrorKind::domain,
                "cone {theta : X theta < 0} has an empty interior");
  }
  return out;
}

ConeEdges cone_edges(const DesignMatrix& design) {
  return cone_edges(design.matrix());
}

double scale_to_surface(const Matrix& x, const Vector& u) {
  if (u.size() != x.cols()) {
    throw Error(ErrorKind::domain, "scale_to_surface: dimension mismatch");
  }
  const Vector a = x * u;
  const double scale = a.cwiseAbs().maxCoeff();
  if (!(scale > 0.0) || !(a.maxCoeff() < -1e-12 * scale)) {
    throw Error(ErrorKind::domain,
                "direction is not strictly inside the cone (X u < 0 fails)");
  }
  // h(c) = log sum exp(c a) is convex and decreasing with h(0) = log r, so
  // Newton from the left converges monotonically; hi brackets the root.
  auto h = [&](double c, double* slope) {
    const Vector z = c * a;
    const double top = z.maxCoeff();
    const Vector w = (z.array() - top).exp().matrix();
    const double sum = w.sum();
    if (slope) *slope = w.dot(a) / sum;
    return top + std::log(sum);
  };
  double lo = 0.0;
  double hi = std::log(static_cast<double>(a.size())) / (-a.maxCoeff());
  double c = 0.0;
  for (int it = 0; it < 200; ++it) {
    double slope = 0.0;
    const double value = h(c, &slope);
    if (std::abs(value) <= 1e-15) return c;
    if (value > 0.0) {
      lo = c;
    } else {
      hi = c;
    }
    double next = c - value / slope;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - c) <= 1e-16 * std::max(1.0, std::abs(c))) return next;
    c = next;
  }
  return c;
}

SurfaceSample sample_surface(const DesignMatrix& design, const ConeEdges& edges,
                             std::size_t count, std::uint64_t seed,
                             unsigned threads) {
  if (count == 0) throw Error(ErrorKind::domain, "sample count must be > 0");
  const Matrix& x = design.matrix();
  const Index k = design.params();
  const Index g = edges.count();
  SurfaceSample out;
  out.theta.resize(static_cast<Index>(count), k);
  out.tau.resize(static_cast<Index>(count), k);
  parallel_for(count, threads, [&](std::size_t i) {
    RngStream rng(seed, i);
    Vector q(g);
    for (Index j = 0; j < g; ++j) q(j) = rng.uniform();
    q /= q.sum();
    const Vector u = edges.rays * q;
    const Vector theta = scale_to_surface(x, u) * u;
    const Vector pi = (x * theta).array().exp().matrix();
    out.theta.row(static_cast<Index>(i)) = theta.transpose();
    out.tau.row(static_cast<Index>(i)) = (x.transpose() * pi).transpose();
  });
  return out;
}

bool within_window(const Eigen::Ref<const Vector>& theta, double limit) {
  return theta.cwiseAbs().maxCoeff() <= limit;
}

std::vector<GridPoint> mle_surface_grid(const DesignMatrix& design,
                                        double step, unsigned threads,
                                        const CurvedOptions& options) {
  if (!(step > 0.0 && step < 0.5)) {
    throw Error(ErrorKind::domain, "grid step must be in (0, 0.5)");
  }
  const auto parts = static_cast<int>(std::lround(1.0 / step));
  if (std::abs(parts * step - 1.0) > 1e-9) {
    throw Error(ErrorKind::domain, "grid step must divide 1 evenly");
  }
  const auto r = static_cast<int>(design.cells());
  if (parts < r) {
    throw Error(ErrorKind::domain, "grid is too coarse for an interior point");
  }

  // Compositions of `parts` into r positive integers, lexicographic order.
  std::vector<std::vector<int>> points;
  std::vector<int> m(static_cast<std::size_t>(r), 1);
  auto recurse = [&](auto&& self, int idx, int left) -> void {
    if (idx == r - 1) {
      m[static_cast<std::size_t>(idx)] = left;
      points.push_back(m);
      return;
    }
    for (int v = 1; v <= left - (r - 1 - idx); ++v) {
      m[static_cast<std::size_t>(idx)] = v;
      self(self, idx + 1, left - v);
    }
  };
  recurse(recurse, 0, parts);

  std::vector<GridPoint> out(points.size());
  parallel_for(points.size(), threads, [&](std::size_t i) {
    GridPoint& gp = out[i];
    gp.p.resize(r);
    std::vector<double> y(static_cast<std::size_t>(r));
    for (int j = 0; j < r; ++j) {
      const int mj = points[i][static_cast<std::size_t>(j)];
      gp.p(j) = static_cast<double>(mj) / parts;
      y[static_cast<std::size_t>(j)] = mj;
    }
    try {
      const CurvedFit fit = fit_curved_newton(design, y, options);
      gp.ok = true;
      gp.pi_hat = fit.pi;
      gp.s = design.margins(fit.pi);
      gp.gamma = fit.gamma;
    } catch (const Error& e) {
      gp.ok = false;
      gp.error = e.what();
    }
  });
  return out;
}

}  // namespace relmodel
