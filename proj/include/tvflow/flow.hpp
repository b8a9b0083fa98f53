#pragma once

#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "tvflow/grid.hpp"

namespace tvflow {

// Right-hand side of the constrained flow. Project evaluates pi_u(div Z) and
// is exactly tangent; SecondFundamental evaluates div Z + sum_j A_u((grad
// u)_j, Z_j) and is kept as a cross-check of the equivalence of the two
// formulations.
enum class RhsForm { Project, SecondFundamental };

struct FlowConfig {
  double eps = 1e-2;
  double dt_safety = 0.45;  // c in dt = c eps h^2 / (2m)
  double t_end = 0.0;
  std::size_t snapshot_stride = 100;
  // optional continuation: (eps, duration) pairs with strictly decreasing
  // eps; the last segment extends to t_end. Overrides `eps` when nonempty.
  std::vector<std::pair<double, double>> eps_schedule;
  RhsForm rhs_form = RhsForm::Project;
  // Integration refuses to pass the guaranteed existence window
  // T_dagger = (K sup v0)^-1 of positively curved targets unless set.
  bool allow_past_existence_window = false;
  bool stop_at_extinction = true;
  double extinction_diameter_tol = 1e-6;
  // reference point for the ball_radius diagnostic column (f_mu is filled in
  // by the diagnostics module)
  std::optional<std::vector<double>> reference_point;

  void validate(const Manifold& m) const;
  // (eps, duration) segments actually integrated, derived from eps/schedule
  std::vector<std::pair<double, double>> segments(double horizon) const;
};

struct FlowState {
  double t = 0.0;
  Field u;
  double dissipation_acc = 0.0;  // sum of dt h^m |u_t|^2
  std::size_t step_count = 0;
};

struct DiagnosticsRow {
  double t = 0.0;
  double eps = 0.0;
  double energy = 0.0;
  double dissipation_acc = 0.0;
  double sup_v = 0.0;
  double ball_radius = std::numeric_limits<double>::quiet_NaN();
  double f_mu = std::numeric_limits<double>::quiet_NaN();
};

struct Snapshot {
  double t = 0.0;
  double eps = 0.0;
  Field u;
};

struct Trajectory {
  FlowConfig config;
  std::vector<Snapshot> snapshots;
  std::vector<DiagnosticsRow> rows;
  // (eps, segment start, segment end) actually integrated
  std::vector<std::array<double, 3>> segments;
  std::optional<double> extinction_time;
  double t_dagger = std::numeric_limits<double>::infinity();
  bool clamped_to_existence_window = false;

  const Field& initial() const { return snapshots.front().u; }
  const Field& final() const { return snapshots.back().u; }
};

// dt = c eps h^2 / (2m)
double stable_dt(const Field& u, double eps, double safety);

// One rhs evaluation; result has cell_count * N entries (zero outside the
// mask). Project form results are tangent at u by construction.
std::vector<double> flow_rhs(const Field& u, double eps, RhsForm form);

// One explicit Euler step with retraction at dt = stable_dt(u, cfg.eps,
// cfg.dt_safety):  u+ = retract(u + dt rhs).
FlowState flow_step(const FlowState& state, const FlowConfig& cfg);

// Integrate from u0 until t_end, extinction or the existence window. Emits a
// snapshot and a diagnostics row every snapshot_stride steps, at segment
// boundaries and at the final time. Throws Instability when the energy grows
// by more than 1e-6 relative between snapshots of one segment.
Trajectory run_flow(const Field& u0, const FlowConfig& cfg);

// geodesic diameter helpers (exact below 4096 cells, sampled above)
double geodesic_diameter(const Field& u);
bool diameter_below(const Field& u, double tol);

}  // namespace tvflow
