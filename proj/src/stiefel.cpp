#include "arpqn/stiefel.hpp"

#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

namespace arpqn {

StiefelPoint::StiefelPoint(Matrix data) : data_(std::move(data)) {
  if (data_.cols() > data_.rows() || data_.cols() == 0) {
    throw DimensionError("StiefelPoint: need 0 < r <= n, got " +
                         std::to_string(data_.rows()) + "x" + std::to_string(data_.cols()));
  }
  if (feasibility_residual(data_) > kFeasibilityTol) data_ = polar_factor(data_);
}

std::string_view to_string(RetractionKind kind) {
  switch (kind) {
    case RetractionKind::Svd: return "svd";
    case RetractionKind::Qr: return "qr";
    case RetractionKind::Cayley: return "cayley";
  }
  return "unknown";
}

RetractionKind parse_retraction(std::string_view name) {
  if (name == "svd" || name == "polar") return RetractionKind::Svd;
  if (name == "qr") return RetractionKind::Qr;
  if (name == "cayley") return RetractionKind::Cayley;
  throw std::invalid_argument("unknown retraction '" + std::string(name) + "'");
}

double feasibility_residual(const Matrix& x) {
  const Index r = x.cols();
  return (x.transpose() * x - Matrix::Identity(r, r)).norm();
}

double tangency_residual(const StiefelPoint& x, const Matrix& v) {
  require_same_shape(x.matrix(), v, "tangency_residual");
  const Matrix xtv = x.matrix().transpose() * v;
  return (xtv + xtv.transpose()).norm();
}

TangentVector project_tangent(const StiefelPoint& x, const Matrix& m) {
  require_same_shape(x.matrix(), m, "project_tangent");
  const Matrix& xm = x.matrix();
  const Matrix xtm = xm.transpose() * m;
  const Matrix sym = 0.5 * (xtm + xtm.transpose());
  return TangentVector{m - xm * sym};
}

TangentVector riemannian_gradient(const StiefelPoint& x, const Matrix& euclidean_grad) {
  return project_tangent(x, euclidean_grad);
}

namespace {

Matrix polar_once(const Matrix& m) {
  const Matrix gram = m.transpose() * m;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(gram);
  if (eig.info() != Eigen::Success) throw NumericError("polar_factor: eigensolver failed");
  const Vector& lam = eig.eigenvalues();
  const double lmax = lam.maxCoeff();
  if (!(lam.minCoeff() > 1e-28 * std::max(lmax, 1.0))) {
    throw NumericError("polar_factor: matrix is rank deficient");
  }
  const Vector inv_sqrt = lam.array().rsqrt();
  const Matrix& q = eig.eigenvectors();
  return m * (q * inv_sqrt.asDiagonal() * q.transpose());
}

}  // namespace

Matrix polar_factor(const Matrix& m) {
  if (m.cols() > m.rows()) throw DimensionError("polar_factor: need cols <= rows");
  // The Gram route loses accuracy as cond(M)^2; a second pass on the
  // nearly orthonormal result recovers it.
  Matrix q = polar_once(m);
  for (int pass = 0; pass < 3 && feasibility_residual(q) > 1e-13; ++pass) q = polar_once(q);
  return q;
}

Matrix qr_factor(const Matrix& m) {
  const Index n = m.rows();
  const Index r = m.cols();
  if (r > n) throw DimensionError("qr_factor: need cols <= rows");
  Eigen::HouseholderQR<Matrix> qr(m);
  Matrix q = qr.householderQ() * Matrix::Identity(n, r);
  const auto& packed = qr.matrixQR();
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  for (Index j = 0; j < r; ++j) {
    const double rjj = packed(j, j);
    if (std::fabs(rjj) <= 1e-300 * scale) throw NumericError("qr_factor: rank deficient input");
    if (rjj < 0.0) q.col(j) = -q.col(j);
  }
  return q;
}

Matrix cayley_transform(const Matrix& x, const Matrix& xi) {
  require_same_shape(x, xi, "cayley_transform");
  const Index r = x.cols();
  // P xi = xi - X (X^T xi) / 2
  const Matrix pxi = xi - 0.5 * x * (x.transpose() * xi);
  // W = U V^T with U = [P xi, X], V = [X, -P xi]
  Matrix u(x.rows(), 2 * r);
  Matrix v(x.rows(), 2 * r);
  u << pxi, x;
  v << x, -pxi;
  const Matrix k = Matrix::Identity(2 * r, 2 * r) - 0.5 * (v.transpose() * u);
  Eigen::FullPivLU<Matrix> lu(k);
  if (!lu.isInvertible() || lu.rcond() < 1e-14) {
    throw NumericError("cayley_transform: (I - W/2) system is singular");
  }
  return x + u * lu.solve(v.transpose() * x);
}

StiefelPoint retract(const StiefelPoint& x, const Matrix& xi, RetractionKind kind) {
  require_same_shape(x.matrix(), xi, "retract");
  if ((xi.array() == 0.0).all()) return x;
  switch (kind) {
    case RetractionKind::Svd: return StiefelPoint(polar_factor(x.matrix() + xi));
    case RetractionKind::Qr: return StiefelPoint(qr_factor(x.matrix() + xi));
    case RetractionKind::Cayley: return StiefelPoint(cayley_transform(x.matrix(), xi));
  }
  throw std::invalid_argument("retract: unknown retraction kind");
}

StiefelPoint random_point(Index n, Index r, std::uint64_t seed) {
  if (r <= 0 || r > n) {
    throw DimensionError("random_point: need 0 < r <= n, got n=" + std::to_string(n) +
                         " r=" + std::to_string(r));
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Matrix g(n, r);
  for (Index j = 0; j < r; ++j)
    for (Index i = 0; i < n; ++i) g(i, j) = gauss(rng);
  return StiefelPoint(qr_factor(g));
}

}  // namespace arpqn
