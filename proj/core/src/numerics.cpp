#include "relmodel/numerics.hpp"

#include "relmodel/errors.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <sstream>
#include <thread>
#include <vector>

namespace relmodel {

double max_abs(const Matrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

Matrix null_space_basis(const Matrix& m, double tol) {
  const Index r = m.rows();
  const Index k = m.cols();
  if (r == 0 || k == 0) {
    throw Error(ErrorKind::validation, "null_space_basis: empty matrix");
  }
  if (k > r) {
    throw Error(ErrorKind::validation,
                "null_space_basis: more columns than rows");
  }
  Eigen::ColPivHouseholderQR<Matrix> qr(m);
  const double scale = max_abs(m);
  const Matrix& packed = qr.matrixQR();
  for (Index i = 0; i < k; ++i) {
    if (std::abs(packed(i, i)) <= tol * scale) {
      std::ostringstream msg;
      msg << "design is rank deficient: pivot " << i << " is "
          << std::abs(packed(i, i));
      throw Error(ErrorKind::validation, msg.str());
    }
  }
  Matrix q = qr.householderQ() * Matrix::Identity(r, r);
  return q.rightCols(r - k).transpose();
}

Vector solve_spd(const Matrix& a, const Vector& b) {
  if (a.rows() != a.cols() || a.rows() != b.size()) {
    throw Error(ErrorKind::domain, "solve_spd: dimension mismatch");
  }
  Eigen::LLT<Matrix> llt(a);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorKind::boundary,
                "singular information matrix (Cholesky failed); the fit is "
                "approaching the boundary of the simplex");
  }
  const Matrix& l = llt.matrixLLT();
  const double dmax = l.diagonal().cwiseAbs().maxCoeff();
  const double dmin = l.diagonal().cwiseAbs().minCoeff();
  if (!(dmin > 1e-150 * std::max(dmax, 1.0))) {
    throw Error(ErrorKind::boundary,
                "singular information matrix (non-positive pivot)");
  }
  Vector x = llt.solve(b);
  if (!x.allFinite()) {
    throw Error(ErrorKind::boundary, "solve_spd produced non-finite values");
  }
  return x;
}

void parallel_for(std::size_t count, unsigned threads,
                  const std::function<void(std::size_t)>& body) {
  if (threads <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  const unsigned workers =
      static_cast<unsigned>(std::min<std::size_t>(threads, count));
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (;;) {
          const std::size_t i = next.fetch_add(1);
          if (i >= count) return;
          try {
            body(i);
          } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!first_error) first_error = std::current_exception();
          }
        }
      });
    }
  }
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace relmodel
