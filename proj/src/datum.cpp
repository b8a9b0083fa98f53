#include "tvflow/datum.hpp"

#include <cmath>

#include "tvflow/rng.hpp"

namespace tvflow {

namespace {

constexpr double kPi = 3.14159265358979323846264338327950288;

void cell_center(const GridDomain& dom, std::size_t c, double* xyz) {
  const auto& n = dom.extents();
  std::size_t rem = c;
  for (int d = 0; d < dom.dim(); ++d) {
    xyz[d] = (static_cast<double>(rem % n[d]) + 0.5) * dom.spacing();
    rem /= n[d];
  }
}

}  // namespace

std::vector<double> canonical_point(const Manifold& m) {
  const int n = m.ambient_dim();
  std::vector<double> p(n, 0.0);
  if (m.name() == "so3") {
    p[0] = p[4] = p[8] = 1.0;  // identity rotation
    return p;
  }
  if (m.name().rfind("euclidean", 0) == 0) return p;  // origin
  // sphere-like and products lead with a circle/sphere factor
  p[0] = 1.0;
  std::vector<double> r(n);
  m.retract(std::span<const double>(p.data(), n), std::span<double>(r.data(), n));
  return r;
}

std::vector<double> canonical_tangent(const Manifold& m, std::span<const double> p0) {
  const int n = m.ambient_dim();
  std::vector<double> v(n, 0.0), t(n, 0.0);
  if (m.name() == "so3") {
    // z-rotation generator at p0
    v[1] = -1.0;
    v[3] = 1.0;
  } else {
    v[std::min(1, n - 1)] = 1.0;
  }
  m.tangent_project(p0, std::span<const double>(v.data(), n), std::span<double>(t.data(), n));
  double nn = 0.0;
  for (double x : t) nn += x * x;
  nn = std::sqrt(nn);
  if (nn < 1e-12) throw ConfigError("datum: canonical tangent degenerates at p0");
  for (double& x : t) x /= nn;
  return t;
}

Field datum_step_1d(std::shared_ptr<const GridDomain> dom, std::shared_ptr<const Manifold> man,
                    double a) {
  if (dom->dim() != 1) throw ConfigError("datum step1d: needs a 1D grid");
  if (man->ambient_dim() != 1) throw ConfigError("datum step1d: needs euclidean:1");
  Field u = make_field(dom, man);
  const double mid = 0.5 * dom->extents()[0] * dom->spacing();
  double x;
  for (std::size_t c = 0; c < dom->cell_count(); ++c) {
    cell_center(*dom, c, &x);
    u.values[c] = x < mid ? -a : a;
  }
  return u;
}

Field datum_arc_1d(std::shared_ptr<const GridDomain> dom, std::shared_ptr<const Manifold> man,
                   std::span<const double> p0, std::span<const double> direction, double length) {
  if (dom->dim() != 1) throw ConfigError("datum arc1d: needs a 1D grid");
  Field u = make_field(dom, man);
  const std::size_t n = u.components();
  const double span = dom->extents()[0] * dom->spacing();
  std::vector<double> x(n);
  double pos;
  for (std::size_t c = 0; c < dom->cell_count(); ++c) {
    cell_center(*dom, c, &pos);
    const double phi = length * (pos / span - 0.5);
    for (std::size_t k = 0; k < n; ++k) x[k] = phi * direction[k];
    man->exp_map(p0, std::span<const double>(x.data(), n), std::span<double>(u.cell(c), n));
  }
  return u;
}

Field datum_bump_2d(std::shared_ptr<const GridDomain> dom, std::shared_ptr<const Manifold> man,
                    std::span<const double> p0, std::span<const double> direction, double amplitude,
                    double support) {
  if (dom->dim() != 2) throw ConfigError("datum bump2d: needs a 2D grid");
  Field u = make_field(dom, man);
  const std::size_t n = u.components();
  const auto& ext = dom->extents();
  const double cx = 0.5 * ext[0] * dom->spacing();
  const double cy = 0.5 * ext[1] * dom->spacing();
  const double rad = support * std::min(cx, cy) * 2.0;
  std::vector<double> x(n);
  double pos[2];
  for (std::size_t c = 0; c < dom->cell_count(); ++c) {
    cell_center(*dom, c, pos);
    const double rho2 =
        ((pos[0] - cx) * (pos[0] - cx) + (pos[1] - cy) * (pos[1] - cy)) / (rad * rad);
    double phi = 0.0;
    if (rho2 < 1.0) phi = amplitude * std::exp(1.0 - 1.0 / (1.0 - rho2));
    for (std::size_t k = 0; k < n; ++k) x[k] = phi * direction[k];
    man->exp_map(p0, std::span<const double>(x.data(), n), std::span<double>(u.cell(c), n));
  }
  return u;
}

Field datum_noise(std::shared_ptr<const GridDomain> dom, std::shared_ptr<const Manifold> man,
                  std::span<const double> p0, double amplitude, std::uint64_t seed) {
  Field u = make_field(dom, man);
  const std::size_t n = u.components();
  Rng rng(seed);
  std::vector<double> g(n), t(n);
  for (std::size_t c = 0; c < dom->cell_count(); ++c) {
    for (std::size_t k = 0; k < n; ++k) g[k] = rng.normal();
    man->tangent_project(p0, std::span<const double>(g.data(), n), std::span<double>(t.data(), n));
    double* cell = u.cell(c);
    for (std::size_t k = 0; k < n; ++k) cell[k] = p0[k] + amplitude * t[k];
    man->retract(std::span<const double>(cell, n), std::span<double>(cell, n));
  }
  return u;
}

Field datum_torus_wrap(std::shared_ptr<const GridDomain> dom, std::shared_ptr<const Manifold> man,
                       int winding, double phase_amp, double flat_amp, int freq) {
  if (dom->dim() != 2) throw ConfigError("datum torus_wrap: needs a 2D grid");
  if (dom->boundary() != Boundary::Periodic)
    throw ConfigError("datum torus_wrap: needs a periodic grid");
  if (man->name().rfind("cylinder", 0) != 0)
    throw ConfigError("datum torus_wrap: needs a cylinder target");
  Field u = make_field(dom, man);
  const std::size_t n = u.components();
  const auto& ext = dom->extents();
  const double lx = ext[0] * dom->spacing();
  const double ly = ext[1] * dom->spacing();
  double pos[2];
  for (std::size_t c = 0; c < dom->cell_count(); ++c) {
    cell_center(*dom, c, pos);
    const double sx = pos[0] / lx, sy = pos[1] / ly;
    // transverse modulation only: the datum keeps the exact x-translation
    // equivariance of the wrap, so the flow relaxes onto the wrap itself
    const double mod = std::sin(2.0 * kPi * freq * sy);
    const double theta = 2.0 * kPi * winding * sx + phase_amp * mod;
    double* cell = u.cell(c);
    cell[0] = std::cos(theta);
    cell[1] = std::sin(theta);
    for (std::size_t k = 2; k < n; ++k) cell[k] = flat_amp * mod;
  }
  return u;
}

}  // namespace tvflow
