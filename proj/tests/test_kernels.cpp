#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "tvflow/kernels.hpp"
#include "tvflow/rng.hpp"

using namespace tvflow;
namespace k = tvflow::kernels;

namespace {

std::vector<double> random_vec(Rng& rng, std::size_t n, double lo = -2.0, double hi = 2.0) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.uniform(lo, hi);
  return v;
}

}  // namespace

TEST_CASE("scalar backend against naive loops") {
  Rng rng(101);
  const auto& b = k::scalar_backend();
  for (std::size_t n : {std::size_t{1}, std::size_t{3}, std::size_t{4}, std::size_t{17},
                        std::size_t{256}}) {
    auto x = random_vec(rng, n);
    auto y = random_vec(rng, n);

    std::vector<double> out(n), ref(n);
    b.diff_scale(out.data(), x.data(), y.data(), 1.7, n);
    for (std::size_t i = 0; i < n; ++i) ref[i] = (x[i] - y[i]) * 1.7;
    CHECK(out == ref);

    b.axpy(out.data(), x.data(), -0.3, y.data(), n);
    for (std::size_t i = 0; i < n; ++i) ref[i] = x[i] + -0.3 * y[i];
    CHECK(out == ref);

    double naive = 0.0;
    for (std::size_t i = 0; i < n; ++i) naive += x[i] * y[i];
    CHECK(b.dot(x.data(), y.data(), n) == doctest::Approx(naive).epsilon(1e-14));

    naive = 0.0;
    for (std::size_t i = 0; i < n; ++i) naive += (x[i] - y[i]) * (x[i] - y[i]);
    CHECK(b.sqdist(x.data(), y.data(), n) == doctest::Approx(naive).epsilon(1e-14));

    double mx = x[0];
    for (double v : x) mx = std::max(mx, v);
    CHECK(b.max_val(x.data(), n) == mx);
  }
}

TEST_CASE("block kernels against per-cell loops") {
  Rng rng(202);
  const auto& b = k::scalar_backend();
  for (std::size_t block : {std::size_t{1}, std::size_t{2}, std::size_t{3}, std::size_t{6},
                            std::size_t{9}}) {
    const std::size_t q = 53;
    auto v = random_vec(rng, q * block);
    std::vector<double> g2(q, 0.0), ref(q, 0.0);
    b.block_sqnorm_acc(g2.data(), v.data(), q, block);
    for (std::size_t c = 0; c < q; ++c)
      for (std::size_t j = 0; j < block; ++j) ref[c] += v[c * block + j] * v[c * block + j];
    for (std::size_t c = 0; c < q; ++c) CHECK(g2[c] == doctest::Approx(ref[c]).epsilon(1e-15));

    std::vector<double> z(q * block), zref(q * block);
    const double eps2 = 0.04;
    b.flux_scale(z.data(), v.data(), g2.data(), eps2, q, block);
    for (std::size_t c = 0; c < q; ++c)
      for (std::size_t j = 0; j < block; ++j)
        zref[c * block + j] = v[c * block + j] / std::sqrt(eps2 + g2[c]);
    for (std::size_t i = 0; i < z.size(); ++i)
      CHECK(z[i] == doctest::Approx(zref[i]).epsilon(1e-15));
  }
}

TEST_CASE("avx2 backend is bit-identical to scalar" * doctest::skip(!k::avx2_available())) {
  Rng rng(303);
  const auto& s = k::scalar_backend();
  k::select("avx2");
  const auto& v = k::active();
  REQUIRE(std::string(v.name) == "avx2");

  for (std::size_t n : {std::size_t{1}, std::size_t{4}, std::size_t{5}, std::size_t{64},
                        std::size_t{257}, std::size_t{1024}}) {
    auto x = random_vec(rng, n);
    auto y = random_vec(rng, n, 0.1, 3.0);

    std::vector<double> a(n), c(n);
    s.diff_scale(a.data(), x.data(), y.data(), 0.9, n);
    v.diff_scale(c.data(), x.data(), y.data(), 0.9, n);
    CHECK(a == c);

    s.axpy(a.data(), x.data(), 1.3, y.data(), n);
    v.axpy(c.data(), x.data(), 1.3, y.data(), n);
    CHECK(a == c);

    std::vector<double> acc1(n, 0.5), acc2(n, 0.5);
    s.diff_scale_acc(acc1.data(), x.data(), y.data(), -2.0, n);
    v.diff_scale_acc(acc2.data(), x.data(), y.data(), -2.0, n);
    CHECK(acc1 == acc2);

    // reductions share the fixed four-lane order, so they match exactly
    CHECK(s.sum(x.data(), n) == v.sum(x.data(), n));
    CHECK(s.dot(x.data(), y.data(), n) == v.dot(x.data(), y.data(), n));
    CHECK(s.sqdist(x.data(), y.data(), n) == v.sqdist(x.data(), y.data(), n));
    CHECK(s.sum_sqrt_shift(y.data(), 0.01, n) == v.sum_sqrt_shift(y.data(), 0.01, n));
    CHECK(s.max_val(x.data(), n) == v.max_val(x.data(), n));

    std::vector<double> g2s(n, 0.0), g2v(n, 0.0);
    s.block_sqnorm_acc(g2s.data(), x.data(), n, 1);
    v.block_sqnorm_acc(g2v.data(), x.data(), n, 1);
    CHECK(g2s == g2v);

    s.flux_scale(a.data(), x.data(), g2s.data(), 0.25, n, 1);
    v.flux_scale(c.data(), x.data(), g2v.data(), 0.25, n, 1);
    CHECK(a == c);
  }
  k::select(k::avx2_available() ? "avx2" : "scalar");
}

TEST_CASE("reductions are deterministic across repeated calls") {
  Rng rng(404);
  auto x = random_vec(rng, 1000);
  const auto& b = k::active();
  const double first = b.sum(x.data(), x.size());
  for (int i = 0; i < 10; ++i) CHECK(b.sum(x.data(), x.size()) == first);
}

TEST_CASE("unknown backend selection throws") {
  CHECK_THROWS(k::select("sse9"));
}
