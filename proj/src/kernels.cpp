#include "tvflow/kernels.hpp"

#include <cmath>
#include <cstdlib>
#include <stdexcept>

namespace tvflow::kernels {

#ifdef TVFLOW_BUILD_AVX2
// defined in kernels_avx2.cpp
const Backend& detail_avx2_backend();
#endif

namespace {

void s_diff_scale(double* out, const double* hi, const double* lo, double scale, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = (hi[i] - lo[i]) * scale;
}

void s_diff_scale_acc(double* out, const double* hi, const double* lo, double scale, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] += (hi[i] - lo[i]) * scale;
}

void s_axpy(double* out, const double* x, double a, const double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = x[i] + a * y[i];
}

void s_block_sqnorm_acc(double* out, const double* v, std::size_t ncells, std::size_t block) {
  if (block == 1) {
    for (std::size_t c = 0; c < ncells; ++c) out[c] += v[c] * v[c];
    return;
  }
  for (std::size_t c = 0; c < ncells; ++c) {
    double acc = 0.0;
    const double* p = v + c * block;
    for (std::size_t k = 0; k < block; ++k) acc += p[k] * p[k];
    out[c] += acc;
  }
}

void s_flux_scale(double* z, const double* g, const double* g2, double eps2,
                  std::size_t ncells, std::size_t block) {
  if (block == 1) {
    for (std::size_t c = 0; c < ncells; ++c) z[c] = g[c] / std::sqrt(eps2 + g2[c]);
    return;
  }
  for (std::size_t c = 0; c < ncells; ++c) {
    double s = 1.0 / std::sqrt(eps2 + g2[c]);
    const double* gp = g + c * block;
    double* zp = z + c * block;
    for (std::size_t k = 0; k < block; ++k) zp[k] = gp[k] * s;
  }
}

// Reduction order shared with the AVX2 backend: four accumulators over
// index mod 4, combined as (l0 + l2) + (l1 + l3).
double s_sum(const double* x, std::size_t n) {
  double acc[4] = {0.0, 0.0, 0.0, 0.0};
  for (std::size_t i = 0; i < n; ++i) acc[i & 3] += x[i];
  return (acc[0] + acc[2]) + (acc[1] + acc[3]);
}

double s_sum_sqrt_shift(const double* x, double eps2, std::size_t n) {
  double acc[4] = {0.0, 0.0, 0.0, 0.0};
  for (std::size_t i = 0; i < n; ++i) acc[i & 3] += std::sqrt(eps2 + x[i]);
  return (acc[0] + acc[2]) + (acc[1] + acc[3]);
}

double s_max_val(const double* x, std::size_t n) {
  if (n == 0) return 0.0;
  double m = x[0];
  for (std::size_t i = 1; i < n; ++i) m = x[i] > m ? x[i] : m;
  return m;
}

double s_sqdist(const double* a, const double* b, std::size_t n) {
  double acc[4] = {0.0, 0.0, 0.0, 0.0};
  for (std::size_t i = 0; i < n; ++i) {
    double d = a[i] - b[i];
    acc[i & 3] += d * d;
  }
  return (acc[0] + acc[2]) + (acc[1] + acc[3]);
}

double s_dot(const double* a, const double* b, std::size_t n) {
  double acc[4] = {0.0, 0.0, 0.0, 0.0};
  for (std::size_t i = 0; i < n; ++i) acc[i & 3] += a[i] * b[i];
  return (acc[0] + acc[2]) + (acc[1] + acc[3]);
}

const Backend kScalar = {
    "scalar",
    s_diff_scale,
    s_diff_scale_acc,
    s_axpy,
    s_block_sqnorm_acc,
    s_flux_scale,
    s_sum,
    s_sum_sqrt_shift,
    s_max_val,
    s_sqdist,
    s_dot,
};

const Backend* g_active = nullptr;

const Backend* pick_default() {
#ifdef TVFLOW_BUILD_AVX2
  if (std::getenv("TVFLOW_FORCE_SCALAR") == nullptr && avx2_available())
    return &detail_avx2_backend();
#endif
  return &kScalar;
}

}  // namespace

const Backend& scalar_backend() { return kScalar; }

bool avx2_available() {
#ifdef TVFLOW_BUILD_AVX2
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

const Backend& active() {
  if (g_active == nullptr) g_active = pick_default();
  return *g_active;
}

void select(const std::string& name) {
  if (name == "scalar") {
    g_active = &kScalar;
    return;
  }
#ifdef TVFLOW_BUILD_AVX2
  if (name == "avx2") {
    if (!avx2_available()) throw std::runtime_error("kernels: avx2 not supported on this CPU");
    g_active = &detail_avx2_backend();
    return;
  }
#endif
  throw std::runtime_error("kernels: unknown backend '" + name + "'");
}

}  // namespace tvflow::kernels
