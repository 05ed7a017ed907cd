// Compiled with -mavx2 -mfma -ffp-contract=off. Only reached through
// avx2_table(), which checks CPUID first.

#include "arpqn/kernels.hpp"

#include <immintrin.h>

#include <cmath>
#include <cstdint>

namespace arpqn::kernels {
namespace {

inline __m256d abs_pd(__m256d v) {
  return _mm256_andnot_pd(_mm256_set1_pd(-0.0), v);
}

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d sw = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, sw));
}

void soft_threshold(const double* p, const double* thresh, double* out,
                    double* mask, std::size_t n) {
  const __m256d sign_bit = _mm256_set1_pd(-0.0);
  const __m256d zero = _mm256_setzero_pd();
  const __m256d one = _mm256_set1_pd(1.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d v = _mm256_loadu_pd(p + i);
    const __m256d t = _mm256_loadu_pd(thresh + i);
    const __m256d a = abs_pd(v);
    const __m256d shrunk = _mm256_max_pd(_mm256_sub_pd(a, t), zero);
    const __m256d s = _mm256_and_pd(v, sign_bit);
    _mm256_storeu_pd(out + i, _mm256_or_pd(shrunk, s));
    const __m256d active = _mm256_or_pd(_mm256_cmp_pd(a, t, _CMP_GT_OQ),
                                        _mm256_cmp_pd(t, zero, _CMP_LE_OQ));
    _mm256_storeu_pd(mask + i, _mm256_and_pd(active, one));
  }
  for (; i < n; ++i) {
    const double a = std::fabs(p[i]);
    const double t = thresh[i];
    out[i] = std::copysign(std::fmax(a - t, 0.0), p[i]);
    mask[i] = (a > t || t <= 0.0) ? 1.0 : 0.0;
  }
}

void masked_scale(const double* x, const double* scale, const double* mask,
                  double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d v = _mm256_mul_pd(_mm256_loadu_pd(x + i),
                                    _mm256_loadu_pd(scale + i));
    _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_loadu_pd(mask + i), v));
  }
  for (; i < n; ++i) out[i] = mask[i] * (x[i] * scale[i]);
}

double abs_sum(const double* x, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_add_pd(acc0, abs_pd(_mm256_loadu_pd(x + i)));
    acc1 = _mm256_add_pd(acc1, abs_pd(_mm256_loadu_pd(x + i + 4)));
  }
  for (; i + 4 <= n; i += 4) acc0 = _mm256_add_pd(acc0, abs_pd(_mm256_loadu_pd(x + i)));
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s += std::fabs(x[i]);
  return s;
}

double weighted_sq_sum(const double* x, const double* w, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256d a = _mm256_loadu_pd(x + i);
    const __m256d b = _mm256_loadu_pd(x + i + 4);
    acc0 = _mm256_fmadd_pd(_mm256_mul_pd(_mm256_loadu_pd(w + i), a), a, acc0);
    acc1 = _mm256_fmadd_pd(_mm256_mul_pd(_mm256_loadu_pd(w + i + 4), b), b, acc1);
  }
  for (; i + 4 <= n; i += 4) {
    const __m256d a = _mm256_loadu_pd(x + i);
    acc0 = _mm256_fmadd_pd(_mm256_mul_pd(_mm256_loadu_pd(w + i), a), a, acc0);
  }
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s += w[i] * x[i] * x[i];
  return s;
}

void accumulate_sq(const double* u, double coef, double* acc, std::size_t n) {
  const __m256d c = _mm256_set1_pd(coef);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d v = _mm256_loadu_pd(u + i);
    const __m256d sq = _mm256_mul_pd(v, v);
    _mm256_storeu_pd(acc + i, _mm256_add_pd(_mm256_loadu_pd(acc + i),
                                            _mm256_mul_pd(c, sq)));
  }
  for (; i < n; ++i) acc[i] += coef * (u[i] * u[i]);
}

std::size_t count_small(const double* x, double threshold, std::size_t n) {
  const __m256d t = _mm256_set1_pd(threshold);
  std::size_t c = 0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d le = _mm256_cmp_pd(abs_pd(_mm256_loadu_pd(x + i)), t, _CMP_LE_OQ);
    c += static_cast<std::size_t>(__builtin_popcount(
        static_cast<unsigned>(_mm256_movemask_pd(le))));
  }
  for (; i < n; ++i) c += std::fabs(x[i]) <= threshold ? 1 : 0;
  return c;
}

}  // namespace

const Table& avx2_table_impl() {
  static const Table t{Backend::Avx2, soft_threshold, masked_scale, abs_sum,
                       weighted_sq_sum, accumulate_sq, count_small};
  return t;
}

}  // namespace arpqn::kernels
