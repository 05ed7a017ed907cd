#include "arpqn/metric.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "arpqn/kernels.hpp"

namespace arpqn {

namespace {
double trace_dot(const Matrix& a, const Matrix& b) { return (a.array() * b.array()).sum(); }
}  // namespace

std::optional<CurvaturePair> damp_pair(const Matrix& s, const Matrix& y, double theta) {
  require_same_shape(s, y, "damp_pair");
  if (!(theta > 0.0)) throw std::invalid_argument("damp_pair: theta must be positive");
  const double ss = s.squaredNorm();
  if (ss == 0.0) return std::nullopt;

  const double shs = theta * ss;  // tr(s^T H0^{-1} s)
  const double sy = trace_dot(s, y);
  if (sy >= 0.25 * shs) return CurvaturePair{s, y, sy, 1.0};

  const double beta = 0.75 * shs / (shs - sy);
  Matrix yd = beta * y + (1.0 - beta) * theta * s;
  // beta sy + (1 - beta) shs equals 0.25 shs by construction.
  const double syd = beta * sy + (1.0 - beta) * shs;
  return CurvaturePair{s, std::move(yd), syd, beta};
}

double theta_init(const Matrix& s, const Matrix& y, double theta_floor) {
  require_same_shape(s, y, "theta_init");
  const double sy = trace_dot(s, y);
  if (!(sy > 0.0)) return theta_floor;
  const double ratio = y.squaredNorm() / sy;
  return std::isfinite(ratio) ? std::max(ratio, theta_floor) : theta_floor;
}

double curvature_cosine(const Matrix& s, const Matrix& y) {
  require_same_shape(s, y, "curvature_cosine");
  const double scale = s.norm() * y.norm();
  return scale > 0.0 ? trace_dot(s, y) / scale : 0.0;
}

LbfgsMemory::LbfgsMemory(Index n, int capacity, double theta)
    : n_(n), capacity_(capacity), theta_(theta) {
  if (n <= 0) throw DimensionError("LbfgsMemory: n must be positive");
  if (capacity < 1) throw std::invalid_argument("LbfgsMemory: capacity must be >= 1");
  set_theta(theta);
}

void LbfgsMemory::push(CurvaturePair pair) {
  if (pair.s.rows() != n_) throw DimensionError("LbfgsMemory::push: row count mismatch");
  pairs_.push_back(std::move(pair));
  while (static_cast<int>(pairs_.size()) > capacity_) pairs_.pop_front();
}

void LbfgsMemory::set_theta(double theta) {
  if (!(theta > 0.0)) throw std::invalid_argument("LbfgsMemory: theta must be positive");
  theta_ = theta;
}

Vector build_diag(const LbfgsMemory& memory) {
  const auto& kern = kernels::active();
  const Index n = memory.n();
  const double theta = memory.theta();
  Vector diag = Vector::Constant(n, theta);

  const auto& pairs = memory.pairs();
  const std::size_t p = pairs.size();
  if (p == 0) return diag;

  // u[j] holds B_{i} s_j for the current stage i; starts at theta s_j.
  std::vector<Matrix> u;
  u.reserve(p);
  for (const auto& pr : pairs) u.push_back(theta * pr.s);

  for (std::size_t i = 0; i < p; ++i) {
    const CurvaturePair& pr = pairs[i];
    const double sbs = trace_dot(pr.s, u[i]);
    if (!(sbs > 1e-12 * pr.s.squaredNorm()) || !(pr.s_dot_y > 0.0)) continue;

    const Matrix ui = u[i];
    const double inv_sbs = 1.0 / sbs;
    const double inv_sy = 1.0 / pr.s_dot_y;

    for (Index c = 0; c < ui.cols(); ++c) {
      kern.accumulate_sq(ui.col(c).data(), -inv_sbs, diag.data(), static_cast<std::size_t>(n));
      kern.accumulate_sq(pr.y_damped.col(c).data(), inv_sy, diag.data(),
                         static_cast<std::size_t>(n));
    }
    // B_{i+1} s_j = B_i s_j - u_i (u_i^T s_j) / sbs + ybar_i (ybar_i^T s_j) / sy
    for (std::size_t j = i + 1; j < p; ++j) {
      const Matrix& sj = pairs[j].s;
      u[j] -= ui * ((ui.transpose() * sj) * inv_sbs);
      u[j] += pr.y_damped * ((pr.y_damped.transpose() * sj) * inv_sy);
    }
  }
  // Positive semidefinite by construction; keep the diagonal strictly
  // positive against roundoff.
  const double floor = 1e-12 * theta;
  diag = diag.cwiseMax(floor);
  return diag;
}

double metric_norm_sq(const DiagonalMetric& metric, const Matrix& v) {
  if (v.rows() != metric.n()) throw DimensionError("metric_norm_sq: row count mismatch");
  const auto& kern = kernels::active();
  const Vector w = metric.weights();
  double s = 0.0;
  for (Index c = 0; c < v.cols(); ++c)
    s += kern.weighted_sq_sum(v.col(c).data(), w.data(), static_cast<std::size_t>(v.rows()));
  return s;
}

}  // namespace arpqn
