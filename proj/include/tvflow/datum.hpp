#pragma once

#include <cstdint>

#include "tvflow/grid.hpp"

namespace tvflow {

// Builtin initial data. Generators fill every cell (also cells outside a
// mask) with valid manifold points; positions are the cell centers
// (i + 1/2) h.

// canonical base point / unit tangent used when a config gives none
std::vector<double> canonical_point(const Manifold& m);
std::vector<double> canonical_tangent(const Manifold& m, std::span<const double> p0);

// 1D scalar step: -a on the left half, +a on the right (euclidean targets).
Field datum_step_1d(std::shared_ptr<const GridDomain> dom, std::shared_ptr<const Manifold> man,
                    double a);

// u(x) = exp_{p0}(phi(x) X), phi linear from -length/2 to +length/2.
Field datum_arc_1d(std::shared_ptr<const GridDomain> dom, std::shared_ptr<const Manifold> man,
                   std::span<const double> p0, std::span<const double> direction, double length);

// 2D bump u(x) = exp_{p0}(A B(rho) X) with B the standard bump profile
// supported in a disc of relative radius `support` around the domain center.
Field datum_bump_2d(std::shared_ptr<const GridDomain> dom, std::shared_ptr<const Manifold> man,
                    std::span<const double> p0, std::span<const double> direction, double amplitude,
                    double support);

// random tangent perturbation around p0: retract(p0 + amp pi_{p0}(gauss))
Field datum_noise(std::shared_ptr<const GridDomain> dom, std::shared_ptr<const Manifold> man,
                  std::span<const double> p0, double amplitude, std::uint64_t seed);

// periodic cylinder datum: hue winds `winding` times around the torus x-axis
// with a smooth phase modulation and a bump in the flat factor
Field datum_torus_wrap(std::shared_ptr<const GridDomain> dom, std::shared_ptr<const Manifold> man,
                       int winding, double phase_amp, double flat_amp, int freq);

}  // namespace tvflow
