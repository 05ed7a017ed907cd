#pragma once

// Benchmark problems of the form min_{X in St(n,r)} f(X) + mu ||X||_1.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>

#include "arpqn/types.hpp"

namespace arpqn {

struct ProblemDescriptor {
  std::string kind;  // "cm" or "spca"
  Index n = 0;
  Index r = 0;
  double mu = 0.0;
  std::uint64_t seed = 0;
  std::string details;  // generation knobs, human readable
};

class CompositeProblem {
 public:
  using SmoothFn = std::function<double(const Matrix&)>;
  using GradFn = std::function<Matrix(const Matrix&)>;

  CompositeProblem(SmoothFn f, GradFn grad, double mu, double lipschitz,
                   ProblemDescriptor descriptor);

  double smooth(const Matrix& x) const { return f_(x); }
  Matrix gradient(const Matrix& x) const { return grad_(x); }
  double nonsmooth(const Matrix& x) const;  // mu ||x||_1
  double objective(const Matrix& x) const { return smooth(x) + nonsmooth(x); }

  double mu() const noexcept { return mu_; }
  double lipschitz_estimate() const noexcept { return lipschitz_; }
  const ProblemDescriptor& descriptor() const noexcept { return desc_; }

 private:
  SmoothFn f_;
  GradFn grad_;
  double mu_;
  double lipschitz_;
  ProblemDescriptor desc_;
};

double l1_norm(const Matrix& x);

// Largest eigenvalue magnitude of a symmetric operator by power iteration
// on the Rayleigh quotient.
double power_iteration_norm(const std::function<Vector(const Vector&)>& apply, Vector start,
                            int max_iter = 100, double tol = 1e-8);

// ---- compressed modes ----------------------------------------------------

enum class Boundary { Periodic, Dirichlet };

struct CmOptions {
  Boundary boundary = Boundary::Periodic;
  double domain_length = 50.0;
  // H = -kinetic_factor * (second difference) / dx^2
  double kinetic_factor = 0.5;
};

// Tridiagonal (optionally with periodic corners) symmetric operator.
class CmOperator {
 public:
  CmOperator(Index n, const CmOptions& options);

  Index n() const noexcept { return n_; }
  double diagonal() const noexcept { return diag_; }
  double off_diagonal() const noexcept { return off_; }
  bool periodic() const noexcept { return periodic_; }

  Matrix apply(const Matrix& x) const;
  Matrix dense() const;

 private:
  Index n_;
  double diag_;
  double off_;
  bool periodic_;
};

// f(X) = tr(X^T H X), grad = 2 H X, L = 2 ||H||_2.
CompositeProblem make_cm(Index n, Index r, double mu, const CmOptions& options = {});

Boundary parse_boundary(const std::string& name);

// ---- sparse PCA ----------------------------------------------------------

struct SpcaOptions {
  Index m = 50;
  bool normalize_columns = false;
  std::optional<Matrix> data_override;  // replaces the generated A
};

// f(X) = -||A X||_F^2, grad = -2 A^T A X, L = 2 ||A||_2^2; A is m x n
// i.i.d. standard normal from seed.
CompositeProblem make_spca(Index n, Index r, double mu, std::uint64_t seed,
                           const SpcaOptions& options = {});

Matrix spca_data(Index n, std::uint64_t seed, const SpcaOptions& options = {});

// Fraction of entries with |x_ij| <= threshold.
inline constexpr double kSparsityThreshold = 1e-5;
double sparsity(const Matrix& x, double threshold = kSparsityThreshold);

// ---- instance files ------------------------------------------------------

// Dense CSV with a one-line header "# rows cols seed".
void write_matrix_csv(std::ostream& out, const Matrix& m, std::uint64_t seed);
void write_matrix_csv(const std::string& path, const Matrix& m, std::uint64_t seed);

struct MatrixFile {
  Matrix data;
  std::uint64_t seed = 0;
};
MatrixFile read_matrix_csv(std::istream& in);
MatrixFile read_matrix_csv(const std::string& path);

}  // namespace arpqn
