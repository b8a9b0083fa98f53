#include "tvflow/flow.hpp"

#include <algorithm>
#include <cmath>

#include "tvflow/kernels.hpp"
#include "tvflow/rng.hpp"

namespace tvflow {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<std::size_t> inside_cells(const GridDomain& dom) {
  std::vector<std::size_t> cells;
  cells.reserve(dom.inside_count());
  for (std::size_t c = 0; c < dom.cell_count(); ++c)
    if (dom.inside(c)) cells.push_back(c);
  return cells;
}

}  // namespace

void FlowConfig::validate(const Manifold&) const {
  if (!eps_schedule.empty()) {
    double prev = kInf;
    for (const auto& [e, dur] : eps_schedule) {
      if (!(e > 0.0)) throw ConfigError("flow: schedule eps must be positive");
      if (!(e < prev)) throw ConfigError("flow: eps schedule must be strictly decreasing");
      if (dur < 0.0) throw ConfigError("flow: schedule durations must be nonnegative");
      prev = e;
    }
  } else if (!(eps > 0.0)) {
    throw ConfigError("flow: eps must be positive");
  }
  if (!(dt_safety > 0.0) || dt_safety > 1.0)
    throw ConfigError("flow: dt_safety must lie in (0, 1]");
  if (t_end < 0.0) throw ConfigError("flow: t_end must be nonnegative");
  if (snapshot_stride == 0) throw ConfigError("flow: snapshot_stride must be positive");
}

std::vector<std::pair<double, double>> FlowConfig::segments(double horizon) const {
  std::vector<std::pair<double, double>> segs;
  if (eps_schedule.empty()) {
    segs.emplace_back(eps, horizon);
    return segs;
  }
  double t = 0.0;
  for (std::size_t i = 0; i < eps_schedule.size(); ++i) {
    double dur = eps_schedule[i].second;
    if (i + 1 == eps_schedule.size()) dur = std::max(dur, horizon - t);  // last segment extends
    dur = std::min(dur, horizon - t);
    if (dur <= 0.0) break;
    segs.emplace_back(eps_schedule[i].first, dur);
    t += dur;
  }
  return segs;
}

double stable_dt(const Field& u, double eps, double safety) {
  if (!(eps > 0.0)) throw ConfigError("stable_dt: eps must be positive");
  const double h = u.domain->spacing();
  return safety * eps * h * h / (2.0 * u.domain->dim());
}

namespace {

// buffers reused across steps
struct FlowWorkspace {
  DirectionalField g;
  DirectionalField z;
  std::vector<double> g2;
  std::vector<double> div;
};

void eval_rhs(const Field& u, double eps, RhsForm form, FlowWorkspace& ws,
              std::vector<double>& out) {
  const std::size_t q = u.domain->cell_count();
  const int ncomp = static_cast<int>(u.components());
  gradient(u, ws.g);
  gradient_sqnorm(ws.g, ws.g2);
  regularized_flux(ws.g, ws.g2, eps, ws.z);
  divergence(ws.z, ws.div);
  out.resize(q * ncomp);
  const Manifold& m = *u.manifold;
  if (form == RhsForm::Project) {
    if (m.is_flat())
      std::copy(ws.div.begin(), ws.div.end(), out.begin());
    else
      m.tangent_project_cells(u.values.data(), ws.div.data(), out.data(), q);
    return;
  }
  // SecondFundamental: div Z + sum_d A_u(pi (grad u)_d, Z_d)
  std::copy(ws.div.begin(), ws.div.end(), out.begin());
  if (m.is_flat()) return;
  const int n = ncomp;
  double gt[kMaxAmbientDim], a[kMaxAmbientDim];
  for (std::size_t c = 0; c < q; ++c) {
    if (!u.domain->inside(c)) continue;
    std::span<const double> base(u.cell(c), n);
    for (int d = 0; d < u.domain->dim(); ++d) {
      const double* gd = ws.g.plane(d) + c * n;
      const double* zd = ws.z.plane(d) + c * n;
      m.tangent_project(base, std::span<const double>(gd, n), std::span<double>(gt, n));
      m.second_fundamental_form(base, std::span<const double>(gt, n),
                                std::span<const double>(zd, n), std::span<double>(a, n));
      for (int k = 0; k < n; ++k) out[c * n + k] += a[k];
    }
  }
}

// advance in place: u <- retract(u + dt * rhs); returns h^m |u+ - u|^2 / dt
double apply_step(Field& u, const std::vector<double>& rhs, double dt, std::vector<double>& scratch) {
  const auto& k = kernels::active();
  const std::size_t total = u.values.size();
  scratch.resize(total);
  k.axpy(scratch.data(), u.values.data(), dt, rhs.data(), total);
  u.manifold->retract_cells(scratch.data(), u.domain->cell_count());
  const double sq = k.sqdist(scratch.data(), u.values.data(), total);
  u.values.swap(scratch);
  return u.domain->cell_measure() * sq / dt;
}

}  // namespace

std::vector<double> flow_rhs(const Field& u, double eps, RhsForm form) {
  FlowWorkspace ws;
  std::vector<double> out;
  eval_rhs(u, eps, form, ws, out);
  return out;
}

FlowState flow_step(const FlowState& state, const FlowConfig& cfg) {
  FlowState next;
  next.u = state.u;
  const double dt = stable_dt(state.u, cfg.eps, cfg.dt_safety);
  FlowWorkspace ws;
  std::vector<double> rhs, scratch;
  eval_rhs(state.u, cfg.eps, cfg.rhs_form, ws, rhs);
  next.dissipation_acc = state.dissipation_acc + apply_step(next.u, rhs, dt, scratch);
  next.t = state.t + dt;
  next.step_count = state.step_count + 1;
  return next;
}

// ---------------------------------------------------------------------------
// geodesic diameter

namespace {

double max_dist_from(const Field& u, const std::vector<std::size_t>& cells, std::size_t anchor,
                     std::size_t* argmax = nullptr) {
  const Manifold& m = *u.manifold;
  const std::size_t n = u.components();
  std::span<const double> p(u.cell(anchor), n);
  double best = 0.0;
  std::size_t arg = anchor;
  for (std::size_t c : cells) {
    const double d = m.geodesic_distance(p, std::span<const double>(u.cell(c), n));
    if (d > best) {
      best = d;
      arg = c;
    }
  }
  if (argmax) *argmax = arg;
  return best;
}

double diameter_exact(const Field& u, const std::vector<std::size_t>& cells) {
  const Manifold& m = *u.manifold;
  const std::size_t n = u.components();
  double best = 0.0;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    std::span<const double> p(u.cell(cells[i]), n);
    for (std::size_t j = i + 1; j < cells.size(); ++j)
      best = std::max(best, m.geodesic_distance(p, std::span<const double>(u.cell(cells[j]), n)));
  }
  return best;
}

// 4096 random pairs followed by alternating farthest-point sweeps
double diameter_sampled(const Field& u, const std::vector<std::size_t>& cells) {
  const Manifold& m = *u.manifold;
  const std::size_t n = u.components();
  Rng rng(0x7a6f1c2d3e4b5a69ull);
  double best = 0.0;
  std::size_t bx = cells[0];
  for (int s = 0; s < 4096; ++s) {
    const std::size_t a = cells[rng.next_u64() % cells.size()];
    const std::size_t b = cells[rng.next_u64() % cells.size()];
    const double d =
        m.geodesic_distance(std::span<const double>(u.cell(a), n), std::span<const double>(u.cell(b), n));
    if (d > best) {
      best = d;
      bx = a;
    }
  }
  std::size_t x = bx;
  for (int sweep = 0; sweep < 4; ++sweep) {
    std::size_t arg = x;
    const double d = max_dist_from(u, cells, x, &arg);
    if (d <= best && sweep > 0) break;
    best = std::max(best, d);
    x = arg;
  }
  return best;
}

}  // namespace

double geodesic_diameter(const Field& u) {
  const auto cells = inside_cells(*u.domain);
  if (cells.empty()) return 0.0;
  if (cells.size() <= 4096) return diameter_exact(u, cells);
  return diameter_sampled(u, cells);
}

bool diameter_below(const Field& u, double tol) {
  const auto cells = inside_cells(*u.domain);
  if (cells.size() < 2) return true;
  // radius bound from one anchor: r <= diameter <= 2r
  const double r = max_dist_from(u, cells, cells.front());
  if (2.0 * r < tol) return true;
  if (r >= tol) return false;
  return geodesic_diameter(u) < tol;
}

// ---------------------------------------------------------------------------
// run

namespace {

double ball_radius_diag(const Field& u, const std::vector<std::size_t>& cells,
                        const std::optional<std::vector<double>>& p0) {
  if (!p0) return std::numeric_limits<double>::quiet_NaN();
  const Manifold& m = *u.manifold;
  const std::size_t n = u.components();
  std::span<const double> p(p0->data(), n);
  double best = 0.0;
  for (std::size_t c : cells)
    best = std::max(best, m.geodesic_distance(p, std::span<const double>(u.cell(c), n)));
  return best;
}

}  // namespace

Trajectory run_flow(const Field& u0, const FlowConfig& cfg) {
  cfg.validate(*u0.manifold);
  if (cfg.reference_point && cfg.reference_point->size() != u0.components())
    throw ConfigError("flow: reference_point has wrong dimension");

  Trajectory traj;
  traj.config = cfg;

  const auto cells = inside_cells(*u0.domain);

  // guaranteed existence window T = 1 / (K sup v0), positive curvature only
  const double k_sup = u0.manifold->curvature_sup();
  double horizon = cfg.t_end;
  const double first_eps = cfg.eps_schedule.empty() ? cfg.eps : cfg.eps_schedule.front().first;
  if (k_sup > 0.0) {
    const double v0 = sup_v(u0, first_eps);
    traj.t_dagger = 1.0 / (k_sup * v0);
    if (!cfg.allow_past_existence_window && horizon > traj.t_dagger) {
      horizon = traj.t_dagger;
      traj.clamped_to_existence_window = true;
    }
  }

  FlowState state;
  state.u = u0;
  // normalize the datum onto the manifold once so step retractions start
  // from exact fixed points
  state.u.manifold->retract_cells(state.u.values.data(), state.u.domain->cell_count());

  FlowWorkspace ws;
  std::vector<double> rhs, scratch;

  double prev_energy = kInf;
  double last_record_t = -1.0;
  double last_record_eps = -1.0;
  bool extinct = false;

  auto record = [&](double eps_now) {
    if (state.t == last_record_t && eps_now == last_record_eps) return;
    last_record_t = state.t;
    last_record_eps = eps_now;
    DiagnosticsRow row;
    row.t = state.t;
    row.eps = eps_now;
    row.energy = tv_energy(state.u, eps_now);
    row.dissipation_acc = state.dissipation_acc;
    row.sup_v = sup_v(state.u, eps_now);
    row.ball_radius = ball_radius_diag(state.u, cells, cfg.reference_point);
    traj.rows.push_back(row);
    traj.snapshots.push_back(Snapshot{state.t, eps_now, state.u});
    if (row.energy > prev_energy * (1.0 + 1e-6))
      throw Instability("flow: energy grew between snapshots at t = " + std::to_string(state.t));
    prev_energy = row.energy;
    if (!extinct && diameter_below(state.u, cfg.extinction_diameter_tol)) {
      extinct = true;
      if (!traj.extinction_time) traj.extinction_time = state.t;
    }
  };

  const auto segs = cfg.segments(horizon);
  double seg_start = 0.0;
  bool stopped = false;
  for (const auto& [eps_now, duration] : segs) {
    if (stopped) break;
    prev_energy = kInf;  // the energy inequality applies per constant-eps segment
    record(eps_now);
    if (extinct && cfg.stop_at_extinction) {
      traj.segments.push_back({eps_now, seg_start, state.t});
      break;
    }
    const double seg_end = seg_start + duration;
    const double dt = stable_dt(state.u, eps_now, cfg.dt_safety);
    std::size_t step_in_segment = 0;
    while (seg_end - state.t > 1e-12 * dt) {
      const double step_dt = std::min(dt, seg_end - state.t);
      eval_rhs(state.u, eps_now, cfg.rhs_form, ws, rhs);
      state.dissipation_acc += apply_step(state.u, rhs, step_dt, scratch);
      ++step_in_segment;
      ++state.step_count;
      state.t = (step_dt == dt) ? seg_start + static_cast<double>(step_in_segment) * dt : seg_end;
      if (step_in_segment % cfg.snapshot_stride == 0) {
        record(eps_now);
        if (extinct && cfg.stop_at_extinction) {
          stopped = true;
          break;
        }
      }
    }
    if (!stopped) {
      record(eps_now);
      if (extinct && cfg.stop_at_extinction) stopped = true;
    }
    traj.segments.push_back({eps_now, seg_start, state.t});
    seg_start = seg_end;
  }

  if (traj.snapshots.empty()) record(first_eps);  // t_end = 0
  return traj;
}

}  // namespace tvflow
