#pragma once

// The proximal quasi-Newton subproblem
//
//   min_{V in T_X}  phi(V) = <G, V> + 1/2 ||V||^2_W + mu ||X + V||_1,
//   W = diag(d) + sigma I,
//
// solved through its dual in the symmetric multiplier Lambda of the
// tangency constraint A(V) = V^T X + X^T V = 0. For fixed Lambda the
// Lagrangian minimizer is
//
//   V(Lambda) = prox_W(X - W^{-1}(G - 2 X Lambda)) - X,
//
// and the dual residual E(Lambda) = A(V(Lambda)) is monotone and
// semismooth; E(Lambda) = 0 is solved by a regularized semismooth Newton
// method with matrix-free CG on symmetric r x r matrices.

#include "arpqn/metric.hpp"
#include "arpqn/stiefel.hpp"
#include "arpqn/types.hpp"

namespace arpqn {

// Symmetric r x r multiplier. Always stored exactly symmetric.
struct SymmetricMultiplier {
  Matrix lambda;

  static SymmetricMultiplier zero(Index r) { return {Matrix::Zero(r, r)}; }
  void symmetrize() { lambda = 0.5 * (lambda + lambda.transpose()).eval(); }
};

struct SubproblemResult {
  TangentVector v;
  SymmetricMultiplier lambda;
  double residual_norm = 0.0;  // ||E(Lambda)||_F at the returned multiplier
  int ssn_iters = 0;
  bool converged = false;
};

struct SsnOptions {
  double tol = 1e-8;
  int max_iter = 100;
};

// Entry (i,j) is sign(P_ij) max(|P_ij| - mu / w_i, 0). Throws
// std::invalid_argument on nonpositive weights or negative mu.
Matrix prox_l1_weighted(const Matrix& p, const Vector& weights, double mu);

// Data of one subproblem instance; precomputes the row weights so that
// P(Lambda) = base + scaled_x * Lambda.
class SubproblemModel {
 public:
  SubproblemModel(const StiefelPoint& x, const Matrix& grad_f, const DiagonalMetric& metric,
                  double mu);

  const Matrix& x() const noexcept { return x_; }
  const Matrix& grad() const noexcept { return grad_; }
  const Vector& weights() const noexcept { return w_; }
  const Vector& inv_weights() const noexcept { return inv_w_; }
  double mu() const noexcept { return mu_; }
  Index n() const noexcept { return x_.rows(); }
  Index r() const noexcept { return x_.cols(); }

  // X - W^{-1}(G - 2 X Lambda)
  Matrix prox_argument(const Matrix& lambda) const;

  // phi(V); note phi(0) = mu ||X||_1.
  double objective(const Matrix& v) const;

 private:
  Matrix x_;
  Matrix grad_;
  Vector w_;
  Vector inv_w_;
  Vector two_inv_w_;
  Vector thresh_;  // mu / w_i
  Matrix base_;    // X - W^{-1} G
  Matrix scaled_x_;  // 2 W^{-1} X
  double mu_;

  friend struct SsnEvaluation;
};

// V(Lambda), the unconstrained minimizer of the Lagrangian.
Matrix v_of_lambda(const SubproblemModel& model, const Matrix& lambda);

// E(Lambda) = V(Lambda)^T X + X^T V(Lambda); exactly symmetric.
Matrix residual_E(const SubproblemModel& model, const Matrix& lambda);

// Generalized Jacobian of E at Lambda applied to symmetric D:
// A(J o (2 W^{-1} X D)) with J the 0/1 active mask of the prox. Entries
// sitting exactly on the threshold get mask 0.
Matrix jacobian_apply(const SubproblemModel& model, const Matrix& lambda, const Matrix& d);

// Default dual tolerance: 1e-8 max(1, ||G||_F).
double default_ssn_tol(const Matrix& grad_f);

SubproblemResult ssn_solve(const SubproblemModel& model, const SymmetricMultiplier& lambda0,
                           const SsnOptions& options);

}  // namespace arpqn
