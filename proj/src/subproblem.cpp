#include "arpqn/subproblem.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>

#include "arpqn/kernels.hpp"

namespace arpqn {

namespace {

double trace_dot(const Matrix& a, const Matrix& b) { return (a.array() * b.array()).sum(); }

Matrix sym_part_of_xtv(const Matrix& x, const Matrix& v) {
  const Matrix xtv = x.transpose() * v;
  return xtv + xtv.transpose();
}

}  // namespace

Matrix prox_l1_weighted(const Matrix& p, const Vector& weights, double mu) {
  if (weights.size() != p.rows()) throw DimensionError("prox_l1_weighted: weight length mismatch");
  if (!(mu >= 0.0)) throw std::invalid_argument("prox_l1_weighted: mu must be nonnegative");
  if (!(weights.array() > 0.0).all()) {
    throw std::invalid_argument("prox_l1_weighted: weights must be positive");
  }
  const Vector thresh = mu * weights.cwiseInverse();
  Matrix out(p.rows(), p.cols());
  Vector mask(p.rows());
  const auto& kern = kernels::active();
  for (Index c = 0; c < p.cols(); ++c) {
    kern.soft_threshold(p.col(c).data(), thresh.data(), out.col(c).data(), mask.data(),
                        static_cast<std::size_t>(p.rows()));
  }
  return out;
}

SubproblemModel::SubproblemModel(const StiefelPoint& x, const Matrix& grad_f,
                                 const DiagonalMetric& metric, double mu)
    : x_(x.matrix()), grad_(grad_f), mu_(mu) {
  require_same_shape(x_, grad_, "SubproblemModel");
  if (metric.n() != x_.rows()) throw DimensionError("SubproblemModel: metric size mismatch");
  if (!(mu >= 0.0)) throw std::invalid_argument("SubproblemModel: mu must be nonnegative");
  w_ = metric.weights();
  if (!(w_.array() > 0.0).all()) {
    throw std::invalid_argument("SubproblemModel: metric weights must be positive");
  }
  inv_w_ = w_.cwiseInverse();
  thresh_ = mu_ * inv_w_;
  base_ = x_ - inv_w_.asDiagonal() * grad_;
  two_inv_w_ = 2.0 * inv_w_;
  scaled_x_ = two_inv_w_.asDiagonal() * x_;
}

Matrix SubproblemModel::prox_argument(const Matrix& lambda) const {
  return base_ + scaled_x_ * lambda;
}

double SubproblemModel::objective(const Matrix& v) const {
  require_same_shape(x_, v, "SubproblemModel::objective");
  const auto& kern = kernels::active();
  double quad = 0.0;
  const Matrix y = x_ + v;
  double l1 = 0.0;
  for (Index c = 0; c < v.cols(); ++c) {
    quad += kern.weighted_sq_sum(v.col(c).data(), w_.data(), static_cast<std::size_t>(n()));
    l1 += kern.abs_sum(y.col(c).data(), static_cast<std::size_t>(n()));
  }
  return trace_dot(grad_, v) + 0.5 * quad + mu_ * l1;
}

// Prox, active mask, V and E at one multiplier.
struct SsnEvaluation {
  Matrix lambda;
  Matrix v;
  Matrix mask;
  Matrix e;
  double res = 0.0;
  double dual = 0.0;  // -min_V L(V, Lambda); its gradient is E

  SsnEvaluation(const SubproblemModel& m, Matrix lam) : lambda(std::move(lam)) {
    const Index n = m.n();
    const Index r = m.r();
    const Matrix p = m.base_ + m.scaled_x_ * lambda;
    v.resize(n, r);
    mask.resize(n, r);
    const auto& kern = kernels::active();
    for (Index c = 0; c < r; ++c) {
      kern.soft_threshold(p.col(c).data(), m.thresh_.data(), v.col(c).data(),
                          mask.col(c).data(), static_cast<std::size_t>(n));
    }
    double l1 = 0.0;
    for (Index c = 0; c < r; ++c)
      l1 += kern.abs_sum(v.col(c).data(), static_cast<std::size_t>(n));
    v -= m.x_;
    e = sym_part_of_xtv(m.x_, v);
    res = e.norm();
    double quad = 0.0;
    for (Index c = 0; c < r; ++c)
      quad += kern.weighted_sq_sum(v.col(c).data(), m.w_.data(), static_cast<std::size_t>(n));
    const double lin = trace_dot(m.grad_, v) - 2.0 * trace_dot(m.x_ * lambda, v);
    dual = -(lin + 0.5 * quad + m.mu_ * l1);
  }

  // J o (2 W^{-1} X D)
  Matrix masked_direction(const SubproblemModel& m, const Matrix& d) const {
    const Index n = m.n();
    const Matrix xd = m.x_ * d;
    Matrix dv(n, m.r());
    const auto& kern = kernels::active();
    for (Index c = 0; c < m.r(); ++c) {
      kern.masked_scale(xd.col(c).data(), m.two_inv_w_.data(), mask.col(c).data(),
                        dv.col(c).data(), static_cast<std::size_t>(n));
    }
    return dv;
  }

  Matrix apply_jacobian(const SubproblemModel& m, const Matrix& d) const {
    return sym_part_of_xtv(m.x_, masked_direction(m, d));
  }
};

Matrix v_of_lambda(const SubproblemModel& model, const Matrix& lambda) {
  if (lambda.rows() != model.r() || lambda.cols() != model.r())
    throw DimensionError("v_of_lambda: multiplier must be r x r");
  return SsnEvaluation(model, lambda).v;
}

Matrix residual_E(const SubproblemModel& model, const Matrix& lambda) {
  if (lambda.rows() != model.r() || lambda.cols() != model.r())
    throw DimensionError("residual_E: multiplier must be r x r");
  return SsnEvaluation(model, lambda).e;
}

Matrix jacobian_apply(const SubproblemModel& model, const Matrix& lambda, const Matrix& d) {
  if (lambda.rows() != model.r() || lambda.cols() != model.r() || d.rows() != model.r() ||
      d.cols() != model.r())
    throw DimensionError("jacobian_apply: multiplier and direction must be r x r");
  return SsnEvaluation(model, lambda).apply_jacobian(model, d);
}

double default_ssn_tol(const Matrix& grad_f) { return 1e-8 * std::max(1.0, grad_f.norm()); }

namespace {

// CG for (J + eta I) d = rhs on symmetric matrices.
Matrix cg_solve(const SubproblemModel& model, const SsnEvaluation& at, const Matrix& rhs,
                double eta, double rel_tol, int max_iter) {
  const Index r = model.r();
  Matrix d = Matrix::Zero(r, r);
  Matrix res = rhs;
  Matrix dir = res;
  double rr = res.squaredNorm();
  const double stop = rel_tol * rhs.norm();
  for (int it = 0; it < max_iter && std::sqrt(rr) > stop; ++it) {
    const Matrix q = at.apply_jacobian(model, dir) + eta * dir;
    const double dq = trace_dot(dir, q);
    if (!(dq > 0.0)) break;
    const double a = rr / dq;
    d += a * dir;
    res -= a * q;
    const double rr_new = res.squaredNorm();
    dir = res + (rr_new / rr) * dir;
    rr = rr_new;
  }
  return 0.5 * (d + d.transpose());
}


// Minimizes the dual along lambda + t d, t > 0, by doubling to bracket the
// sign change of the directional derivative and bisecting. Returns nullopt
// when no point improves on `from`.
std::optional<SsnEvaluation> dual_line_search(const SubproblemModel& model,
                                              const SsnEvaluation& from, const Matrix& d) {
  auto slope = [&](const SsnEvaluation& e) { return trace_dot(e.e, d); };
  std::optional<SsnEvaluation> best;
  auto consider = [&](SsnEvaluation&& e) {
    if (e.dual < from.dual && (!best || e.dual < best->dual)) best = std::move(e);
  };

  double lo = 0.0;
  double hi = 1.0;
  SsnEvaluation at_hi(model, from.lambda + hi * d);
  while (slope(at_hi) < 0.0 && hi < 1e12) {
    consider(SsnEvaluation(at_hi));
    lo = hi;
    hi *= 2.0;
    at_hi = SsnEvaluation(model, from.lambda + hi * d);
  }
  consider(SsnEvaluation(at_hi));
  for (int it = 0; it < 60 && hi - lo > 1e-14 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    SsnEvaluation at_mid(model, from.lambda + mid * d);
    const double g = slope(at_mid);
    consider(SsnEvaluation(at_mid));
    if (g < 0.0) lo = mid;
    else if (g > 0.0) hi = mid;
    else break;
  }
  return best;
}
}  // namespace

// A Newton trial is kept only if it shrinks the residual by this factor;
// anything slower means eta dominates the Jacobian along E.
constexpr double kContraction = 0.9;
// Iterations allowed without halving the best residual. Degenerate duals
// (localized columns of X that share no rows) have nearly flat directions
// where the residual can only creep.
constexpr int kStallLimit = 3;

SubproblemResult ssn_solve(const SubproblemModel& model, const SymmetricMultiplier& lambda0,
                           const SsnOptions& options) {
  if (options.max_iter < 1) throw std::invalid_argument("ssn_solve: max_iter must be >= 1");
  const Index r = model.r();
  if (lambda0.lambda.rows() != r || lambda0.lambda.cols() != r)
    throw DimensionError("ssn_solve: initial multiplier must be r x r");

  SsnEvaluation cur(model, 0.5 * (lambda0.lambda + lambda0.lambda.transpose()));
  const int cg_max = static_cast<int>(r * (r + 1) / 2);
  // Step 1/L for the L-Lipschitz monotone residual, L = 4 / min(w).
  const double fixed_step = 0.25 * model.weights().minCoeff();

  SsnEvaluation best = cur;
  double kappa = 1.0;
  double mark = cur.res;
  int stalled = 0;
  int iters = 0;
  while (cur.res > options.tol && iters < options.max_iter) {
    ++iters;
    const double eta = std::clamp(kappa * 0.2 * cur.res, 1e-12, 1e-2);
    const double rel = std::min(0.1, cur.res);
    const Matrix d = cg_solve(model, cur, -cur.e, eta, rel, cg_max);

    SsnEvaluation trial(model, cur.lambda + d);
    if (trial.res <= kContraction * cur.res) {
      cur = std::move(trial);
    } else {
      kappa *= 0.1;
      // E is the gradient of the convex function `dual`, so d is a descent
      // direction for it even where ||E|| cannot be reduced locally.
      bool moved = false;
      if (trace_dot(cur.e, d) < 0.0) {
        if (auto next = dual_line_search(model, cur, d)) {
          cur = std::move(*next);
          moved = true;
        }
      }
      if (!moved) {
        SsnEvaluation fp(model, cur.lambda - fixed_step * cur.e);
        if (!(fp.dual < cur.dual)) break;  // no progress possible in floating point
        cur = std::move(fp);
      }
    }
    if (cur.res < best.res) best = cur;
    if (best.res <= 0.5 * mark) {
      mark = best.res;
      stalled = 0;
    } else if (++stalled >= kStallLimit) {
      break;
    }
  }
  if (cur.res < best.res) best = cur;
  cur = std::move(best);

  // Remove the leftover normal component in the W-norm over the active
  // entries: dV = J o (2 W^{-1} X S) with A(dV) = E. Zeros stay zero and the
  // model value moves only to second order, unlike the Euclidean projection
  // whose first-order change is <Lambda, E>.
  // J can be singular on a thin active set, so keep whichever projected
  // candidate has the lower model value.
  const Matrix& x = model.x();
  auto project = [&](const Matrix& v) {
    return Matrix(v - 0.5 * x * sym_part_of_xtv(x, v));
  };
  Matrix v = project(cur.v);
  if (cur.res > 0.0) {
    const Matrix s = cg_solve(model, cur, cur.e, 0.0, 1e-12, 2 * cg_max);
    Matrix fixed = project(cur.v - cur.masked_direction(model, s));
    if (fixed.allFinite() && model.objective(fixed) < model.objective(v)) v = std::move(fixed);
  }

  SubproblemResult out;
  out.v = TangentVector{std::move(v)};
  out.lambda = SymmetricMultiplier{cur.lambda};
  out.residual_norm = cur.res;
  out.ssn_iters = iters;
  out.converged = cur.res <= options.tol;
  return out;
}

}  // namespace arpqn
