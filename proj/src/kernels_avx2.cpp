#include <immintrin.h>

#include <cmath>
#include <cstddef>

#include "tvflow/kernels.hpp"

// AVX2 variants of the flat-array kernels. Elementwise kernels use plain
// mul/add/div/sqrt (no FMA) so each entry is bit-identical to the scalar
// backend; reductions keep the shared four-lane accumulation order.

namespace tvflow::kernels {

namespace {

void v_diff_scale(double* out, const double* hi, const double* lo, double scale, std::size_t n) {
  const __m256d vs = _mm256_set1_pd(scale);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d d = _mm256_sub_pd(_mm256_loadu_pd(hi + i), _mm256_loadu_pd(lo + i));
    _mm256_storeu_pd(out + i, _mm256_mul_pd(d, vs));
  }
  for (; i < n; ++i) out[i] = (hi[i] - lo[i]) * scale;
}

void v_diff_scale_acc(double* out, const double* hi, const double* lo, double scale, std::size_t n) {
  const __m256d vs = _mm256_set1_pd(scale);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d d = _mm256_sub_pd(_mm256_loadu_pd(hi + i), _mm256_loadu_pd(lo + i));
    __m256d o = _mm256_loadu_pd(out + i);
    _mm256_storeu_pd(out + i, _mm256_add_pd(o, _mm256_mul_pd(d, vs)));
  }
  for (; i < n; ++i) out[i] += (hi[i] - lo[i]) * scale;
}

void v_axpy(double* out, const double* x, double a, const double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d t = _mm256_mul_pd(va, _mm256_loadu_pd(y + i));
    _mm256_storeu_pd(out + i, _mm256_add_pd(_mm256_loadu_pd(x + i), t));
  }
  for (; i < n; ++i) out[i] = x[i] + a * y[i];
}

void v_block_sqnorm_acc(double* out, const double* v, std::size_t ncells, std::size_t block) {
  if (block == 1) {
    std::size_t i = 0;
    for (; i + 4 <= ncells; i += 4) {
      __m256d x = _mm256_loadu_pd(v + i);
      __m256d o = _mm256_loadu_pd(out + i);
      _mm256_storeu_pd(out + i, _mm256_add_pd(o, _mm256_mul_pd(x, x)));
    }
    for (; i < ncells; ++i) out[i] += v[i] * v[i];
    return;
  }
  // small blocks (m*N <= 27), scalar per cell
  for (std::size_t c = 0; c < ncells; ++c) {
    double acc = 0.0;
    const double* p = v + c * block;
    for (std::size_t k = 0; k < block; ++k) acc += p[k] * p[k];
    out[c] += acc;
  }
}

void v_flux_scale(double* z, const double* g, const double* g2, double eps2,
                  std::size_t ncells, std::size_t block) {
  if (block == 1) {
    const __m256d ve = _mm256_set1_pd(eps2);
    std::size_t i = 0;
    for (; i + 4 <= ncells; i += 4) {
      __m256d d = _mm256_sqrt_pd(_mm256_add_pd(ve, _mm256_loadu_pd(g2 + i)));
      _mm256_storeu_pd(z + i, _mm256_div_pd(_mm256_loadu_pd(g + i), d));
    }
    for (; i < ncells; ++i) z[i] = g[i] / std::sqrt(eps2 + g2[i]);
    return;
  }
  for (std::size_t c = 0; c < ncells; ++c) {
    double s = 1.0 / std::sqrt(eps2 + g2[c]);
    const double* gp = g + c * block;
    double* zp = z + c * block;
    for (std::size_t k = 0; k < block; ++k) zp[k] = gp[k] * s;
  }
}

double v_sum(const double* x, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(x + i));
  alignas(32) double l[4];
  _mm256_store_pd(l, acc);
  for (; i < n; ++i) l[i & 3] += x[i];
  return (l[0] + l[2]) + (l[1] + l[3]);
}

double v_sum_sqrt_shift(const double* x, double eps2, std::size_t n) {
  const __m256d ve = _mm256_set1_pd(eps2);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    acc = _mm256_add_pd(acc, _mm256_sqrt_pd(_mm256_add_pd(ve, _mm256_loadu_pd(x + i))));
  alignas(32) double l[4];
  _mm256_store_pd(l, acc);
  for (; i < n; ++i) l[i & 3] += std::sqrt(eps2 + x[i]);
  return (l[0] + l[2]) + (l[1] + l[3]);
}

double v_max_val(const double* x, std::size_t n) {
  if (n == 0) return 0.0;
  if (n < 4) {
    double m = x[0];
    for (std::size_t i = 1; i < n; ++i) m = x[i] > m ? x[i] : m;
    return m;
  }
  __m256d acc = _mm256_loadu_pd(x);
  std::size_t i = 4;
  for (; i + 4 <= n; i += 4) acc = _mm256_max_pd(acc, _mm256_loadu_pd(x + i));
  alignas(32) double l[4];
  _mm256_store_pd(l, acc);
  double m = l[0];
  for (int k = 1; k < 4; ++k) m = l[k] > m ? l[k] : m;
  for (; i < n; ++i) m = x[i] > m ? x[i] : m;
  return m;
}

double v_sqdist(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    acc = _mm256_add_pd(acc, _mm256_mul_pd(d, d));
  }
  alignas(32) double l[4];
  _mm256_store_pd(l, acc);
  for (; i < n; ++i) {
    double d = a[i] - b[i];
    l[i & 3] += d * d;
  }
  return (l[0] + l[2]) + (l[1] + l[3]);
}

double v_dot(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  alignas(32) double l[4];
  _mm256_store_pd(l, acc);
  for (; i < n; ++i) l[i & 3] += a[i] * b[i];
  return (l[0] + l[2]) + (l[1] + l[3]);
}

const Backend kAvx2 = {
    "avx2",
    v_diff_scale,
    v_diff_scale_acc,
    v_axpy,
    v_block_sqnorm_acc,
    v_flux_scale,
    v_sum,
    v_sum_sqrt_shift,
    v_max_val,
    v_sqdist,
    v_dot,
};

}  // namespace

const Backend& detail_avx2_backend() { return kAvx2; }

}  // namespace tvflow::kernels
