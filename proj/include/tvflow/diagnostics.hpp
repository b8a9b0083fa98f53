#pragma once

#include <string>
#include <vector>

#include "tvflow/flow.hpp"
#include "tvflow/report.hpp"

namespace tvflow {

// Energy inequality and monotonicity, per constant-eps segment:
//   E(t) + [dissipation(t) - dissipation(seg start)] <= E(seg start) (1 + 1e-4)
// and E nonincreasing along snapshots.
AuditReport energy_audit(const Trajectory& traj);

// Gradient envelopes. For K <= 0 checks sup_v(t) <= sup_v(0) (1 + 1e-3); for
// K > 0 checks sup_v(t) against v0 / (1 - t K v0) up to t = 0.8 T_dagger with
// 5e-2 relative tolerance. Preconditions: Neumann on a convex domain, or
// periodic with K <= 0 (flat torus); throws DomainNotConvex otherwise.
AuditReport gradient_envelope_audit(const Trajectory& traj, double curvature_sup);

// Riemannian center of mass by fixed-point iteration
//   p <- exp_p( mean_x log_p(u(x)) )
// until the update norm falls below 1e-12 (at most 1e4 iterations). Requires
// all values within R~_*(p_init) of p_init.
std::vector<double> karcher_mean(const Field& u, std::vector<double> p_init);

// f_mu(p) = 1/2 h^m sum_x dist_g(u(x), p)^2
double f_mu(const Field& u, std::span<const double> p);

// Fills the f_mu diagnostics column of a trajectory (warm-started center of
// mass per snapshot). Rows where the center of mass is unavailable stay NaN.
void annotate_fmu(Trajectory& traj);

// f_mu(p_c(t)) nonincreasing and f^{1/m} below an affine envelope reaching
// zero in finite time (fit residual under 5% of f^{1/m}(0)).
AuditReport fmu_decay_audit(const Trajectory& traj, std::span<const double> p0, double radius);

// max_x dist(u(t,x), p0) <= R (1 + 1e-6) for every snapshot; requires
// R < R_*(p0) and the datum inside the closed ball.
AuditReport ball_invariance_audit(const Trajectory& traj, std::span<const double> p0, double radius);

// First snapshot whose geodesic diameter falls below 1e-6. Throws
// NoExtinction when the trajectory never collapses.
AuditReport extinction_audit(const Trajectory& traj, std::span<const double> p0, double radius);
double extinction_time_of(const Trajectory& traj);

// Runs the flow twice, from u0 and from a delta-perturbed datum, and checks
// that D(t) = |u1 - u2|_{L^2}^2 grows at most exponentially (Gronwall); flat
// targets must be contractions (D nonincreasing). The fitted rate C comes
// from the first half of the run and is validated on the second half.
struct ContractionResult {
  AuditReport report;
  double fitted_rate = 0.0;     // C in log D(t) <= log D(0) + C t
  std::vector<double> times;
  std::vector<double> sq_distance;
};
ContractionResult contraction_audit(const Field& u0, double delta, const FlowConfig& cfg,
                                    std::uint64_t seed);

// Mask admissibility for envelope audits: along every axis-aligned line the
// inside cells form one contiguous run (satisfied by staircases of convex
// sets).
bool mask_orthogonally_convex(const GridDomain& dom);

}  // namespace tvflow
