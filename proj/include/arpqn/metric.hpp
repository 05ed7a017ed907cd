#pragma once

// Diagonal damped-LBFGS metric. B_k is built from Euclidean curvature pairs
// (s_j, ybar_j) with n x r matrices acting through the trace inner product;
// only diag(B_k) is kept, and the subproblem sees diag(B_k) + sigma I.

#include <deque>
#include <optional>

#include "arpqn/types.hpp"

namespace arpqn {

struct CurvaturePair {
  Matrix s;         // X_{k+1} - X_k
  Matrix y_damped;  // beta y + (1 - beta) theta s
  double s_dot_y;   // tr(s^T y_damped)
  double beta;      // in (0, 1]
};

// Powell-style damping toward H0^{-1} = theta I. Returns nullopt when s = 0
// (no update possible). Throws std::invalid_argument if theta <= 0 or the
// shapes differ.
std::optional<CurvaturePair> damp_pair(const Matrix& s, const Matrix& y, double theta);

// max{ tr(y^T y) / tr(s^T y), theta_floor }, or theta_floor when
// tr(s^T y) <= 0.
double theta_init(const Matrix& s, const Matrix& y, double theta_floor);

// tr(s^T y) / (||s|| ||y||); 0 when either is zero.
double curvature_cosine(const Matrix& s, const Matrix& y);

class LbfgsMemory {
 public:
  LbfgsMemory(Index n, int capacity, double theta = 1.0);

  // Appends the newest pair, evicting the oldest beyond capacity.
  void push(CurvaturePair pair);
  void clear() { pairs_.clear(); }
  void set_theta(double theta);

  const std::deque<CurvaturePair>& pairs() const noexcept { return pairs_; }
  Index n() const noexcept { return n_; }
  int capacity() const noexcept { return capacity_; }
  double theta() const noexcept { return theta_; }
  bool empty() const noexcept { return pairs_.empty(); }

 private:
  Index n_;
  int capacity_;
  double theta_;
  std::deque<CurvaturePair> pairs_;  // oldest first
};

struct DiagonalMetric {
  Vector d;            // diag(B_k), positive
  double sigma = 0.0;  // regularization

  static DiagonalMetric identity(Index n) { return {Vector::Ones(n), 0.0}; }
  Index n() const noexcept { return d.size(); }
  // d_i + sigma
  Vector weights() const { return d.array() + sigma; }
};

// diag(B_{k,p}) of the LBFGS recursion with B_{k,0} = theta I, computed
// without forming any n x n matrix. Pairs whose tr(s^T B s) falls below
// 1e-12 ||s||^2 are skipped.
Vector build_diag(const LbfgsMemory& memory);

// sum_i (d_i + sigma) sum_j V_ij^2
double metric_norm_sq(const DiagonalMetric& metric, const Matrix& v);

}  // namespace arpqn
