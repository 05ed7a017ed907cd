#pragma once

// Elementwise inner loops shared by the prox, the metric and the problem
// evaluations. Each kernel has a scalar reference and, on x86-64, an AVX2
// variant; the active table is chosen once at startup from CPUID.
//
// Elementwise kernels (soft_threshold, masked_scale, accumulate_sq,
// count_small) are bit-identical across backends. Reductions (abs_sum,
// weighted_sq_sum) differ only by summation order.

#include <cstddef>
#include <string_view>

namespace arpqn::kernels {

enum class Backend { Scalar, Avx2 };

struct Table {
  Backend backend;

  // out[i] = sign(p[i]) * max(|p[i]| - thresh[i], 0)
  // mask[i] = 1 if |p[i]| > thresh[i] or thresh[i] <= 0, else 0
  void (*soft_threshold)(const double* p, const double* thresh, double* out,
                         double* mask, std::size_t n);

  // out[i] = mask[i] * (x[i] * scale[i])
  void (*masked_scale)(const double* x, const double* scale, const double* mask,
                       double* out, std::size_t n);

  // sum |x[i]|
  double (*abs_sum)(const double* x, std::size_t n);

  // sum w[i] * x[i]^2
  double (*weighted_sq_sum)(const double* x, const double* w, std::size_t n);

  // acc[i] += coef * u[i]^2
  void (*accumulate_sq)(const double* u, double coef, double* acc,
                        std::size_t n);

  // #{ i : |x[i]| <= threshold }
  std::size_t (*count_small)(const double* x, double threshold, std::size_t n);
};

const Table& scalar_table();

// nullptr when the AVX2 variants were not compiled in or the CPU lacks
// AVX2/FMA.
const Table* avx2_table();

// The table used by the library. Honors ARPQN_SIMD=scalar in the
// environment to force the reference path.
const Table& active();

std::string_view backend_name(Backend b);

}  // namespace arpqn::kernels
