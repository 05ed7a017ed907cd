#pragma once

// Test-side oracles. Everything here is deliberately dense and slow and
// shares no code with the library beyond the basic types.

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "arpqn/types.hpp"

namespace oracle {

using arpqn::Index;
using arpqn::Matrix;
using arpqn::Vector;

inline Matrix gaussian(Index rows, Index cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix m(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) m(i, j) = g(rng);
  return m;
}

inline Vector uniform(Index n, double lo, double hi, std::uint64_t seed) {
  std::mt19937_64 rng(seed ^ 0x51afd7ed558ccd1dULL);
  std::uniform_real_distribution<double> u(lo, hi);
  Vector v(n);
  for (Index i = 0; i < n; ++i) v(i) = u(rng);
  return v;
}

// Orthonormal point via Gram-Schmidt on a Gaussian matrix.
inline Matrix orthonormal(Index n, Index r, std::uint64_t seed) {
  Matrix q = gaussian(n, r, seed);
  for (Index j = 0; j < r; ++j) {
    for (Index k = 0; k < j; ++k) q.col(j) -= q.col(k).dot(q.col(j)) * q.col(k);
    for (Index k = 0; k < j; ++k) q.col(j) -= q.col(k).dot(q.col(j)) * q.col(k);
    q.col(j).normalize();
  }
  return q;
}

inline Vector vec(const Matrix& m) { return Eigen::Map<const Vector>(m.data(), m.size()); }
inline Matrix unvec(const Vector& v, Index rows, Index cols) {
  return Eigen::Map<const Matrix>(v.data(), rows, cols);
}

// Orthonormal basis (columns, length n*r) of { V : V^T X + X^T V = 0 },
// computed as the null space of the stacked upper-triangle constraints.
inline Matrix tangent_basis(const Matrix& x) {
  const Index n = x.rows();
  const Index r = x.cols();
  const Index m = r * (r + 1) / 2;
  Matrix c(m, n * r);
  Index row = 0;
  for (Index a = 0; a < r; ++a) {
    for (Index b = a; b < r; ++b) {
      Matrix g = Matrix::Zero(n, r);
      // (V^T X + X^T V)_{ab} = <V_a, X_b> + <X_a, V_b>
      g.col(a) += x.col(b);
      g.col(b) += x.col(a);
      c.row(row++) = vec(g).transpose();
    }
  }
  Eigen::JacobiSVD<Matrix> svd(c, Eigen::ComputeFullV);
  return svd.matrixV().rightCols(n * r - m);
}

// diag(B_p) of the explicit LBFGS recursion B_0 = theta I,
// B_i = B - B s s^T B / tr(s^T B s) + y y^T / tr(s^T y), with n x n matrices.
struct Pair {
  Matrix s;
  Matrix y;
};
inline Vector dense_lbfgs_diag(Index n, double theta, const std::vector<Pair>& pairs) {
  Matrix b = theta * Matrix::Identity(n, n);
  for (const Pair& p : pairs) {
    const Matrix bs = b * p.s;
    const double sbs = (p.s.transpose() * bs).trace();
    const double sy = (p.s.transpose() * p.y).trace();
    if (!(sbs > 1e-12 * p.s.squaredNorm()) || !(sy > 0.0)) continue;
    b = b - bs * bs.transpose() / sbs + p.y * p.y.transpose() / sy;
  }
  return b.diagonal();
}

// Subproblem data in the raw form used by the oracles.
struct Sub {
  Matrix x;
  Matrix g;
  Vector w;  // d + sigma
  double mu;
};

inline double phi(const Sub& s, const Matrix& v) {
  double quad = 0.0;
  for (Index i = 0; i < v.rows(); ++i) quad += s.w(i) * v.row(i).squaredNorm();
  return (s.g.array() * v.array()).sum() + 0.5 * quad + s.mu * (s.x + v).cwiseAbs().sum();
}

// mu = 0: closed-form minimizer of <g, Qz> + 1/2 z^T Q^T D Q z.
inline Matrix kkt_solution(const Sub& s) {
  const Matrix q = tangent_basis(s.x);
  const Index n = s.x.rows();
  const Index r = s.x.cols();
  Vector dvec(n * r);
  for (Index j = 0; j < r; ++j) dvec.segment(j * n, n) = s.w;
  const Matrix h = q.transpose() * dvec.asDiagonal() * q;
  const Vector z = h.ldlt().solve(-q.transpose() * vec(s.g));
  return unvec(q * z, n, r);
}

// mu > 0: ADMM on  min_z 1/2 z^T H z + c^T z + mu ||u||_1,  u = x + Q z,
// then an exact solve on the identified sign pattern. The polished point is
// kept only if it does not increase phi.
inline Matrix l1_solution(const Sub& s, int admm_iters = 100000) {
  const Matrix q = tangent_basis(s.x);
  const Index n = s.x.rows();
  const Index r = s.x.cols();
  const Index dim = q.cols();
  Vector dvec(n * r);
  for (Index j = 0; j < r; ++j) dvec.segment(j * n, n) = s.w;
  const Matrix h = q.transpose() * dvec.asDiagonal() * q;
  const Vector c = q.transpose() * vec(s.g);
  const Vector x = vec(s.x);
  const double rho = dvec.mean();

  const Eigen::LLT<Matrix> lhs(h + rho * Matrix::Identity(dim, dim));
  Vector z = Vector::Zero(dim);
  Vector u = x;
  Vector lam = Vector::Zero(n * r);
  for (int it = 0; it < admm_iters; ++it) {
    // q^T q = I, so the z-update is a fixed dim x dim solve.
    z = lhs.solve(-c + q.transpose() * (rho * (u - x) - lam));
    const Vector t = x + q * z + lam / rho;
    const Vector u_prev = u;
    u = t.array().sign() * (t.array().abs() - s.mu / rho).max(0.0);
    lam += rho * (x + q * z - u);
    if ((x + q * z - u).norm() < 1e-14 && (u - u_prev).norm() < 1e-14) break;
  }
  Matrix best = unvec(q * z, n, r);

  // Polish: entries of x + Qz that ADMM drives to zero stay zero, the rest
  // keep their sign. Solve the resulting equality-constrained QP exactly.
  const Vector xz = x + q * z;
  std::vector<Index> zero_idx;
  Vector sgn = Vector::Zero(n * r);
  for (Index i = 0; i < n * r; ++i) {
    if (std::abs(xz(i)) < 1e-9)
      zero_idx.push_back(i);
    else
      sgn(i) = xz(i) > 0 ? 1.0 : -1.0;
  }
  const Index nz = static_cast<Index>(zero_idx.size());
  Matrix kkt = Matrix::Zero(dim + nz, dim + nz);
  Vector rhs(dim + nz);
  kkt.topLeftCorner(dim, dim) = h;
  rhs.head(dim) = -c - s.mu * q.transpose() * sgn;
  for (Index k = 0; k < nz; ++k) {
    kkt.block(0, dim + k, dim, 1) = q.row(zero_idx[k]).transpose();
    kkt.block(dim + k, 0, 1, dim) = q.row(zero_idx[k]);
    rhs(dim + k) = -x(zero_idx[k]);
  }
  const Vector sol = kkt.fullPivLu().solve(rhs);
  if (sol.allFinite()) {
    const Matrix polished = unvec(q * sol.head(dim), n, r);
    if (phi(s, polished) <= phi(s, best)) best = polished;
  }
  return best;
}

}  // namespace oracle
