#pragma once

#include <cstddef>
#include <string>

namespace tvflow::kernels {

// Flat-array kernels behind the grid and flow inner loops. Each entry has a
// scalar reference implementation and, on x86-64, an AVX2 variant selected
// once at startup. Backends are interchangeable bit for bit:
//   - elementwise kernels perform the same IEEE operation per entry (no FMA),
//   - reductions accumulate into four lanes (index mod 4) and combine as
//     (l0 + l2) + (l1 + l3), the fixed order both backends implement.
// The fixed order also makes repeated runs bit-identical, which the flow's
// diagnostics rely on.
struct Backend {
  const char* name;

  // out[i] = (hi[i] - lo[i]) * scale
  void (*diff_scale)(double* out, const double* hi, const double* lo, double scale, std::size_t n);
  // out[i] += (hi[i] - lo[i]) * scale
  void (*diff_scale_acc)(double* out, const double* hi, const double* lo, double scale, std::size_t n);
  // out[i] = x[i] + a * y[i]
  void (*axpy)(double* out, const double* x, double a, const double* y, std::size_t n);
  // out[c] += sum_k v[c*block + k]^2
  void (*block_sqnorm_acc)(double* out, const double* v, std::size_t ncells, std::size_t block);
  // z[c*block + k] = g[c*block + k] / sqrt(eps2 + g2[c])
  void (*flux_scale)(double* z, const double* g, const double* g2, double eps2,
                     std::size_t ncells, std::size_t block);
  double (*sum)(const double* x, std::size_t n);
  // sum_i sqrt(eps2 + x[i])
  double (*sum_sqrt_shift)(const double* x, double eps2, std::size_t n);
  double (*max_val)(const double* x, std::size_t n);
  // sum_i (a[i] - b[i])^2
  double (*sqdist)(const double* a, const double* b, std::size_t n);
  double (*dot)(const double* a, const double* b, std::size_t n);
};

const Backend& scalar_backend();
bool avx2_available();

// Active backend: AVX2 when the CPU supports it and the build enables it,
// otherwise scalar. The TVFLOW_FORCE_SCALAR environment variable (any value)
// forces scalar.
const Backend& active();

// Test hook: "scalar" or "avx2"; throws if the name is unknown or unavailable.
void select(const std::string& name);

}  // namespace tvflow::kernels
