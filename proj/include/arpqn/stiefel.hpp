#pragma once

// Geometry of St(n, r) = { X in R^{n x r} : X^T X = I_r } with the metric
// inherited from the ambient Frobenius inner product.

#include <cstdint>
#include <string_view>

#include "arpqn/types.hpp"

namespace arpqn {

// Feasibility tolerance on ||X^T X - I||_F; points further off are pulled
// back by the polar factor on construction.
inline constexpr double kFeasibilityTol = 1e-10;

class StiefelPoint {
 public:
  // Re-orthonormalizes (polar factor) when the residual exceeds
  // kFeasibilityTol. Throws DimensionError if cols > rows or the input
  // is rank deficient.
  explicit StiefelPoint(Matrix data);

  const Matrix& matrix() const noexcept { return data_; }
  Index n() const noexcept { return data_.rows(); }
  Index r() const noexcept { return data_.cols(); }

 private:
  Matrix data_;
};

// An n x r matrix V with V^T X + X^T V = 0 for the point it was produced at.
struct TangentVector {
  Matrix data;
};

enum class RetractionKind { Svd, Qr, Cayley };

std::string_view to_string(RetractionKind kind);
// Accepts "svd", "polar", "qr", "cayley" (case-sensitive). Throws
// std::invalid_argument otherwise.
RetractionKind parse_retraction(std::string_view name);

double feasibility_residual(const Matrix& x);

// ||V^T X + X^T V||_F
double tangency_residual(const StiefelPoint& x, const Matrix& v);

// M - 1/2 X (X^T M + M^T X)
TangentVector project_tangent(const StiefelPoint& x, const Matrix& m);

// Projection of the Euclidean gradient.
TangentVector riemannian_gradient(const StiefelPoint& x, const Matrix& euclidean_grad);

// Orthonormal polar factor M (M^T M)^{-1/2}; equals U V^T of the thin SVD.
Matrix polar_factor(const Matrix& m);

// Q factor of the thin QR decomposition with diag(R) > 0.
Matrix qr_factor(const Matrix& m);

// (I - W/2)^{-1} (I + W/2) X with W = P xi X^T - X xi^T P, P = I - X X^T / 2,
// evaluated through the rank-2r Sherman-Morrison-Woodbury form.
Matrix cayley_transform(const Matrix& x, const Matrix& xi);

StiefelPoint retract(const StiefelPoint& x, const Matrix& xi, RetractionKind kind);
inline StiefelPoint retract(const StiefelPoint& x, const TangentVector& xi,
                            RetractionKind kind) {
  return retract(x, xi.data, kind);
}

// Q factor of an n x r standard Gaussian matrix; deterministic in seed.
StiefelPoint random_point(Index n, Index r, std::uint64_t seed);

}  // namespace arpqn
