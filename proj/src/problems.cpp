#include "arpqn/problems.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

#include "arpqn/kernels.hpp"

namespace arpqn {

CompositeProblem::CompositeProblem(SmoothFn f, GradFn grad, double mu, double lipschitz,
                                   ProblemDescriptor descriptor)
    : f_(std::move(f)),
      grad_(std::move(grad)),
      mu_(mu),
      lipschitz_(lipschitz),
      desc_(std::move(descriptor)) {
  if (!(mu >= 0.0)) throw std::invalid_argument("CompositeProblem: mu must be nonnegative");
}

double l1_norm(const Matrix& x) {
  const auto& kern = kernels::active();
  double s = 0.0;
  for (Index c = 0; c < x.cols(); ++c)
    s += kern.abs_sum(x.col(c).data(), static_cast<std::size_t>(x.rows()));
  return s;
}

double CompositeProblem::nonsmooth(const Matrix& x) const {
  return mu_ == 0.0 ? 0.0 : mu_ * l1_norm(x);
}

double power_iteration_norm(const std::function<Vector(const Vector&)>& apply, Vector start,
                            int max_iter, double tol) {
  double nrm = start.norm();
  if (nrm == 0.0) return 0.0;
  Vector v = start / nrm;
  double est = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    Vector w = apply(v);
    const double rq = std::fabs(v.dot(w));
    const double wn = w.norm();
    if (wn == 0.0) return 0.0;
    v = w / wn;
    const bool done = std::fabs(rq - est) <= tol * std::max(1.0, rq);
    est = rq;
    if (done && it > 0) break;
  }
  return est;
}

// ---- compressed modes ----------------------------------------------------

CmOperator::CmOperator(Index n, const CmOptions& options)
    : n_(n), periodic_(options.boundary == Boundary::Periodic) {
  if (n < 4) throw DimensionError("CmOperator: n must be >= 4");
  const double dx = options.domain_length / static_cast<double>(n);
  const double c = options.kinetic_factor / (dx * dx);
  diag_ = 2.0 * c;
  off_ = -c;
}

Matrix CmOperator::apply(const Matrix& x) const {
  if (x.rows() != n_) throw DimensionError("CmOperator::apply: row count mismatch");
  Matrix y(n_, x.cols());
  const Index last = n_ - 1;
  for (Index c = 0; c < x.cols(); ++c) {
    const double* in = x.col(c).data();
    double* out = y.col(c).data();
    for (Index i = 1; i < last; ++i) out[i] = diag_ * in[i] + off_ * (in[i - 1] + in[i + 1]);
    out[0] = diag_ * in[0] + off_ * in[1];
    out[last] = diag_ * in[last] + off_ * in[last - 1];
    if (periodic_) {
      out[0] += off_ * in[last];
      out[last] += off_ * in[0];
    }
  }
  return y;
}

Matrix CmOperator::dense() const {
  Matrix h = Matrix::Zero(n_, n_);
  for (Index i = 0; i < n_; ++i) {
    h(i, i) = diag_;
    if (i + 1 < n_) h(i, i + 1) = h(i + 1, i) = off_;
  }
  if (periodic_) h(0, n_ - 1) = h(n_ - 1, 0) = off_;
  return h;
}

Boundary parse_boundary(const std::string& name) {
  if (name == "periodic") return Boundary::Periodic;
  if (name == "dirichlet") return Boundary::Dirichlet;
  throw std::invalid_argument("unknown boundary '" + name + "'");
}

CompositeProblem make_cm(Index n, Index r, double mu, const CmOptions& options) {
  if (r < 1 || r > n) throw DimensionError("make_cm: need 1 <= r <= n");
  auto h = std::make_shared<const CmOperator>(n, options);

  // Circulant / Toeplitz tridiagonal: eigenvalues are known in closed form.
  double hnorm = 0.0;
  for (Index k = 1; k <= n; ++k) {
    const double angle = h->periodic() ? 2.0 * std::numbers::pi * static_cast<double>(k) / n
                                       : std::numbers::pi * static_cast<double>(k) / (n + 1);
    hnorm = std::max(hnorm, std::abs(h->diagonal() + 2.0 * h->off_diagonal() * std::cos(angle)));
  }

  ProblemDescriptor desc{"cm", n, r, mu, 0,
                         std::string(h->periodic() ? "periodic" : "dirichlet") +
                             " L=" + std::to_string(options.domain_length) +
                             " k=" + std::to_string(options.kinetic_factor)};
  return CompositeProblem(
      [h](const Matrix& x) { return (x.array() * h->apply(x).array()).sum(); },
      [h](const Matrix& x) -> Matrix { return 2.0 * h->apply(x); }, mu, 2.0 * hnorm,
      std::move(desc));
}

// ---- sparse PCA ----------------------------------------------------------

Matrix spca_data(Index n, std::uint64_t seed, const SpcaOptions& options) {
  if (options.data_override) {
    if (options.data_override->cols() != n)
      throw DimensionError("spca_data: override must have n columns");
    return *options.data_override;
  }
  if (options.m < 1) throw DimensionError("spca_data: m must be positive");
  // Salted so the data stream differs from the initial-point stream for the
  // same seed.
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    0x5eedu};
  std::mt19937_64 rng(seq);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Matrix a(options.m, n);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < options.m; ++i) a(i, j) = gauss(rng);
  if (options.normalize_columns) {
    for (Index j = 0; j < n; ++j) {
      a.col(j).array() -= a.col(j).mean();
      const double nrm = a.col(j).norm();
      if (nrm > 0.0) a.col(j) /= nrm;
    }
  }
  return a;
}

CompositeProblem make_spca(Index n, Index r, double mu, std::uint64_t seed,
                           const SpcaOptions& options) {
  if (r < 1 || r > n) throw DimensionError("make_spca: need 1 <= r <= n");
  auto a = std::make_shared<const Matrix>(spca_data(n, seed, options));

  Vector start = Vector::Ones(n);
  for (Index i = 0; i < n; ++i) start(i) += 0.1 * std::sin(1.3 * i);
  const double anorm_sq = power_iteration_norm(
      [a](const Vector& v) -> Vector { return a->transpose() * (*a * v); }, start);

  ProblemDescriptor desc{"spca", n, r, mu, seed,
                         "m=" + std::to_string(a->rows()) +
                             (options.normalize_columns ? " normalized" : "") +
                             (options.data_override ? " override" : "")};
  return CompositeProblem(
      [a](const Matrix& x) { return -(*a * x).squaredNorm(); },
      [a](const Matrix& x) -> Matrix { return -2.0 * (a->transpose() * (*a * x)); }, mu,
      2.0 * anorm_sq, std::move(desc));
}

double sparsity(const Matrix& x, double threshold) {
  if (x.size() == 0) return 0.0;
  const auto& kern = kernels::active();
  std::size_t small = 0;
  for (Index c = 0; c < x.cols(); ++c)
    small += kern.count_small(x.col(c).data(), threshold, static_cast<std::size_t>(x.rows()));
  return static_cast<double>(small) / static_cast<double>(x.size());
}

}  // namespace arpqn
