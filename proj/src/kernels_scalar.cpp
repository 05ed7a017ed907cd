#include "arpqn/kernels.hpp"

#include <cmath>

namespace arpqn::kernels {
namespace {

void soft_threshold(const double* p, const double* thresh, double* out,
                    double* mask, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double a = std::fabs(p[i]);
    const double t = thresh[i];
    const double shrunk = std::fmax(a - t, 0.0);
    out[i] = std::copysign(shrunk, p[i]);
    mask[i] = (a > t || t <= 0.0) ? 1.0 : 0.0;
  }
}

void masked_scale(const double* x, const double* scale, const double* mask,
                  double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = mask[i] * (x[i] * scale[i]);
}

double abs_sum(const double* x, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += std::fabs(x[i]);
  return s;
}

double weighted_sq_sum(const double* x, const double* w, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += w[i] * x[i] * x[i];
  return s;
}

void accumulate_sq(const double* u, double coef, double* acc, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) acc[i] += coef * (u[i] * u[i]);
}

std::size_t count_small(const double* x, double threshold, std::size_t n) {
  std::size_t c = 0;
  for (std::size_t i = 0; i < n; ++i) c += std::fabs(x[i]) <= threshold ? 1 : 0;
  return c;
}

}  // namespace

const Table& scalar_table() {
  static const Table t{Backend::Scalar, soft_threshold, masked_scale, abs_sum,
                       weighted_sq_sum, accumulate_sq,  count_small};
  return t;
}

}  // namespace arpqn::kernels
