#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace arpqn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

// Shape mismatch or invalid size argument.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A factorization or linear solve that cannot be completed.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require_same_shape(const Matrix& a, const Matrix& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError(std::string(what) + ": expected " + std::to_string(a.rows()) +
                         "x" + std::to_string(a.cols()) + ", got " +
                         std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
  }
}

}  // namespace arpqn
