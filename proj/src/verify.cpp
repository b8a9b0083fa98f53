#include "tvflow/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>

#include "tvflow/convexdom.hpp"
#include "tvflow/datum.hpp"
#include "tvflow/diagnostics.hpp"
#include "tvflow/rng.hpp"

namespace tvflow {

namespace {

constexpr double kPi = 3.14159265358979323846264338327950288;

void note(bool verbose, const CheckResult& c) {
  if (!verbose) return;
  std::printf("  [%s] %-22s %s (measured %.3e vs %.3e)\n", c.pass ? "ok" : "FAIL", c.suite.c_str(),
              c.name.c_str(), c.measured, c.bound);
  std::fflush(stdout);
}

CheckResult from_report(int criterion, const std::string& suite, const std::string& name,
                        const AuditReport& rep) {
  CheckResult c;
  c.criterion = criterion;
  c.suite = suite;
  c.name = name;
  c.pass = rep.pass;
  c.measured = rep.measured;
  c.bound = rep.bound * (1.0 + rep.tolerance);
  c.details = rep.details;
  return c;
}

std::shared_ptr<const GridDomain> grid(std::vector<int> dims, double h, Boundary b) {
  return std::make_shared<GridDomain>(std::move(dims), h, b);
}

// ---------------------------------------------------------------------------
// criterion 1: exact discrete adjointness <div Z, w> = -<Z, grad w>

void suite_adjointness(std::vector<CheckResult>& out, bool verbose) {
  Rng rng(20240811);
  const int ncomp = 2;
  auto man = make_manifold("euclidean:2");
  std::shared_ptr<const Manifold> man_sp = std::move(man);

  auto run_case = [&](const std::string& label, std::shared_ptr<const GridDomain> dom) {
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
      Field w = make_field(dom, man_sp);
      for (auto& v : w.values) v = rng.uniform(-1.0, 1.0);
      DirectionalField z = make_directional(dom, ncomp);
      for (int d = 0; d < dom->dim(); ++d)
        for (auto& v : z.planes[d]) v = rng.uniform(-1.0, 1.0);

      DirectionalField gw = make_directional(dom, ncomp);
      gradient(w, gw);
      std::vector<double> dz;
      divergence(z, dz);

      const double lhs = field_inner(*dom, ncomp, dz.data(), w.values.data());
      const double rhs = directional_inner(z, gw);
      const double znorm = std::sqrt(directional_inner(z, z));
      const double gnorm = std::sqrt(directional_inner(gw, gw));
      const double denom = std::max(znorm * gnorm, 1e-300);
      worst = std::max(worst, std::abs(lhs + rhs) / denom);
    }
    CheckResult c;
    c.criterion = 1;
    c.suite = "adjointness";
    c.name = label;
    c.measured = worst;
    c.bound = 1e-12;
    c.pass = worst <= c.bound;
    out.push_back(c);
    note(verbose, c);
  };

  run_case("1D neumann", grid({37}, 0.37, Boundary::NeumannReflect));
  run_case("1D periodic", grid({37}, 0.37, Boundary::Periodic));
  run_case("2D neumann", grid({13, 11}, 0.21, Boundary::NeumannReflect));
  run_case("2D periodic", grid({13, 11}, 0.21, Boundary::Periodic));

  // masked convex domain (disc staircase), same exact-adjoint contract
  {
    const int n = 24;
    std::vector<std::uint8_t> mask(n * n, 0);
    for (int y = 0; y < n; ++y)
      for (int x = 0; x < n; ++x) {
        const double dx = (x + 0.5) / n - 0.5, dy = (y + 0.5) / n - 0.5;
        if (dx * dx + dy * dy < 0.45 * 0.45) mask[y * n + x] = 1;
      }
    run_case("2D neumann masked",
             std::make_shared<GridDomain>(std::vector<int>{n, n}, 1.0 / n,
                                          Boundary::NeumannReflect, std::move(mask)));
  }
}

// ---------------------------------------------------------------------------
// criterion 2: energy inequality over the target/grid/eps matrix

Field energy_matrix_datum(std::shared_ptr<const GridDomain> dom,
                          std::shared_ptr<const Manifold> man) {
  if (man->is_flat() && dom->dim() == 1) return datum_step_1d(dom, man, 0.5);
  const auto p0 = canonical_point(*man);
  const auto dir = canonical_tangent(*man, std::span<const double>(p0.data(), p0.size()));
  const double amp = man->is_flat() ? 0.5 : 0.8;
  if (dom->dim() == 1)
    return datum_arc_1d(dom, man, std::span<const double>(p0.data(), p0.size()),
                        std::span<const double>(dir.data(), dir.size()), 2.0 * amp);
  return datum_bump_2d(dom, man, std::span<const double>(p0.data(), p0.size()),
                       std::span<const double>(dir.data(), dir.size()), amp, 0.8);
}

void suite_energy(std::vector<CheckResult>& out, bool verbose) {
  const std::vector<std::string> targets = {"euclidean:1", "circle", "sphere:3:1", "cylinder:1"};
  for (const auto& id : targets) {
    for (int m : {1, 2}) {
      for (double eps : {1e-1, 1e-2}) {
        std::shared_ptr<const Manifold> man = make_manifold(id);
        auto dom = m == 1 ? grid({256}, 1.0 / 256, Boundary::NeumannReflect)
                          : grid({64, 64}, 1.0 / 64, Boundary::NeumannReflect);
        Field u0 = energy_matrix_datum(dom, man);
        FlowConfig cfg;
        cfg.eps = eps;
        cfg.t_end = 3e-3;
        // the forward-Euler remainder in the energy balance scales with the
        // safety factor; 0.15 keeps it a factor below the 1e-4 tolerance
        cfg.dt_safety = 0.15;
        cfg.snapshot_stride = m == 1 ? 2000 : 500;
        cfg.stop_at_extinction = false;
        cfg.allow_past_existence_window = true;
        Trajectory traj = run_flow(u0, cfg);
        AuditReport rep = energy_audit(traj);
        char label[96];
        std::snprintf(label, sizeof(label), "%s %dD eps=%g", id.c_str(), m, eps);
        out.push_back(from_report(2, "energy", label, rep));
        note(verbose, out.back());
      }
    }
  }
}

// ---------------------------------------------------------------------------
// criterion 3: gradient preservation for K <= 0 up to 5x extinction time

void envelope_k0_case(std::vector<CheckResult>& out, bool verbose, const std::string& label,
                      const Field& u0, double eps, double pilot_t_end) {
  FlowConfig pilot;
  pilot.eps = eps;
  pilot.t_end = pilot_t_end;
  pilot.snapshot_stride = 4000;
  pilot.stop_at_extinction = true;
  Trajectory probe = run_flow(u0, pilot);
  const double t_ext = extinction_time_of(probe);  // throws NoExtinction if none

  FlowConfig main = pilot;
  main.t_end = 5.0 * t_ext;
  main.stop_at_extinction = false;
  Trajectory traj = run_flow(u0, main);
  AuditReport rep = gradient_envelope_audit(traj, u0.manifold->curvature_sup());
  CheckResult c = from_report(3, "gradient-preservation", label, rep);
  c.details += "; extinction at t = " + std::to_string(t_ext);
  out.push_back(c);
  note(verbose, out.back());
}

void suite_gradient_preservation(std::vector<CheckResult>& out, bool verbose) {
  {
    auto dom = grid({128}, 1.0 / 128, Boundary::NeumannReflect);
    std::shared_ptr<const Manifold> man = make_manifold("euclidean:1");
    envelope_k0_case(out, verbose, "euclidean:1 1D step", datum_step_1d(dom, man, 0.08), 1e-2, 0.4);
  }
  {
    auto dom = grid({96}, 1.0 / 96, Boundary::NeumannReflect);
    std::shared_ptr<const Manifold> man = make_manifold("cylinder:1");
    const auto p0 = canonical_point(*man);
    const auto dir = canonical_tangent(*man, std::span<const double>(p0.data(), p0.size()));
    Field u0 = datum_arc_1d(dom, man, std::span<const double>(p0.data(), p0.size()),
                            std::span<const double>(dir.data(), dir.size()), 0.4);
    envelope_k0_case(out, verbose, "cylinder:1 1D arc", u0, 1e-2, 1.2);
  }
  {
    auto dom = grid({24, 24}, 1.0 / 24, Boundary::NeumannReflect);
    std::shared_ptr<const Manifold> man = make_manifold("euclidean:1");
    const auto p0 = canonical_point(*man);
    const auto dir = canonical_tangent(*man, std::span<const double>(p0.data(), p0.size()));
    Field u0 = datum_bump_2d(dom, man, std::span<const double>(p0.data(), p0.size()),
                             std::span<const double>(dir.data(), dir.size()), 0.15, 0.8);
    envelope_k0_case(out, verbose, "euclidean:1 2D bump", u0, 1e-2, 0.6);
  }
}

// ---------------------------------------------------------------------------
// criterion 4: blow-up envelope for the unit sphere

void suite_envelope(std::vector<CheckResult>& out, bool verbose) {
  const double eps = 1e-2;
  for (double v0 : {1.0, 2.0}) {
    auto dom = grid({64}, 1.0 / 64, Boundary::NeumannReflect);
    std::shared_ptr<const Manifold> man = make_manifold("sphere:3:1");
    const auto p0 = canonical_point(*man);
    const auto dir = canonical_tangent(*man, std::span<const double>(p0.data(), p0.size()));
    const double slope = std::sqrt(v0 * v0 - eps * eps);  // |grad u| with sup v0 as requested
    Field u0 = datum_arc_1d(dom, man, std::span<const double>(p0.data(), p0.size()),
                            std::span<const double>(dir.data(), dir.size()), slope);
    FlowConfig cfg;
    cfg.eps = eps;
    cfg.t_end = 0.8 / v0;  // 0.8 T_dagger with K = 1
    cfg.snapshot_stride = 4000;
    cfg.stop_at_extinction = false;
    Trajectory traj = run_flow(u0, cfg);
    AuditReport rep = gradient_envelope_audit(traj, 1.0);
    char label[64];
    std::snprintf(label, sizeof(label), "sphere |v0|=%g (T+=%g)", v0, 1.0 / v0);
    out.push_back(from_report(4, "envelope", label, rep));
    note(verbose, out.back());
  }
}

// ---------------------------------------------------------------------------
// criterion 5: 1D extinction time against the plateau oracle t* = a/2

double extinction_1d_run(double a, bool verbose) {
  auto dom = grid({512}, 1.0 / 512, Boundary::NeumannReflect);
  std::shared_ptr<const Manifold> man = make_manifold("euclidean:1");
  Field u0 = datum_step_1d(dom, man, a);
  const double t_hat = a / 2.0;
  FlowConfig cfg;
  cfg.eps_schedule = {{3e-2, 0.94 * t_hat},
                      {1e-2, 0.035 * t_hat},
                      {3e-3, 0.015 * t_hat},
                      {1e-3, 0.0}};
  cfg.t_end = 1.4 * t_hat;
  cfg.snapshot_stride = 20000;
  cfg.stop_at_extinction = true;
  Trajectory traj = run_flow(u0, cfg);
  const double t_ext = extinction_time_of(traj);
  if (verbose) std::printf("  extinction-1d: a=%g -> t*=%.6f (oracle %.6f)\n", a, t_ext, t_hat);
  return t_ext;
}

void suite_extinction_1d(std::vector<CheckResult>& out, bool verbose) {
  // plateau oracle: two half-length plateaus exchange unit flux, each moves
  // at rate 2, the 2a gap closes at rate 4 => t* = a/2
  const double t_half = extinction_1d_run(0.25, verbose);
  const double t_full = extinction_1d_run(0.5, verbose);
  auto push = [&](const std::string& name, double measured, double oracle) {
    CheckResult c;
    c.criterion = 5;
    c.suite = "extinction-1d";
    c.name = name;
    c.measured = measured;
    c.bound = oracle;
    c.pass = std::abs(measured - oracle) <= 0.1 * oracle;
    c.details = "within 10% of the plateau oracle";
    out.push_back(c);
    note(verbose, c);
  };
  push("a=0.25: t* vs a/2", t_half, 0.125);
  push("a=0.5: t* vs a/2", t_full, 0.25);
  CheckResult ratio;
  ratio.criterion = 5;
  ratio.suite = "extinction-1d";
  ratio.name = "t*(0.5)/t*(0.25) in [1.8, 2.2]";
  ratio.measured = t_full / t_half;
  ratio.bound = 2.0;
  ratio.pass = ratio.measured >= 1.8 && ratio.measured <= 2.2;
  out.push_back(ratio);
  note(verbose, ratio);
}

// ---------------------------------------------------------------------------
// criteria 6 + 7: ball invariance and f_mu decay for a small sphere datum

void suite_small_ball(std::vector<CheckResult>& out, bool verbose) {
  const double radius = 0.4;  // < R_* = pi/2 and < R~_* = pi/4
  auto dom = grid({32, 32}, 1.0 / 32, Boundary::NeumannReflect);
  std::shared_ptr<const Manifold> man = make_manifold("sphere:3:1");
  const auto p0 = canonical_point(*man);
  const auto dir = canonical_tangent(*man, std::span<const double>(p0.data(), p0.size()));
  Field u0 = datum_bump_2d(dom, man, std::span<const double>(p0.data(), p0.size()),
                           std::span<const double>(dir.data(), dir.size()), radius, 0.85);
  FlowConfig cfg;
  cfg.eps_schedule = {{1e-2, 0.5}, {3e-3, 0.0}};
  cfg.t_end = 1.5;
  cfg.snapshot_stride = 250;
  cfg.stop_at_extinction = true;
  cfg.allow_past_existence_window = true;  // small-ball regime, not the T_dagger regime
  cfg.reference_point = p0;
  Trajectory traj = run_flow(u0, cfg);

  out.push_back(from_report(6, "small-ball", "ball invariance R=0.4",
                            ball_invariance_audit(traj, std::span<const double>(p0.data(), 3), radius)));
  note(verbose, out.back());

  AuditReport fmu_rep = fmu_decay_audit(traj, std::span<const double>(p0.data(), 3), radius);
  out.push_back(from_report(7, "small-ball", "f_mu decay envelope", fmu_rep));
  note(verbose, out.back());

  // explicit finite-time vanishing of f_mu
  annotate_fmu(traj);
  double fmin = std::numeric_limits<double>::infinity();
  for (const auto& row : traj.rows)
    if (std::isfinite(row.f_mu)) fmin = std::min(fmin, row.f_mu);
  CheckResult c;
  c.criterion = 7;
  c.suite = "small-ball";
  c.name = "f_mu reaches < 1e-10";
  c.measured = fmin;
  c.bound = 1e-10;
  c.pass = fmin < 1e-10 && traj.extinction_time.has_value();
  if (traj.extinction_time) c.details = "extinction at t = " + std::to_string(*traj.extinction_time);
  out.push_back(c);
  note(verbose, c);
}

// ---------------------------------------------------------------------------
// criterion 8: Gronwall contraction and rate stability under dt halving

void suite_contraction(std::vector<CheckResult>& out, bool verbose) {
  const double delta = 1e-3;
  {
    auto dom = grid({128}, 1.0 / 128, Boundary::NeumannReflect);
    std::shared_ptr<const Manifold> man = make_manifold("euclidean:1");
    Field u0 = datum_step_1d(dom, man, 0.25);
    FlowConfig cfg;
    cfg.eps = 1e-2;
    cfg.t_end = 0.02;
    cfg.snapshot_stride = 2000;
    ContractionResult res = contraction_audit(u0, delta, cfg, 99101);
    out.push_back(from_report(8, "contraction", "euclidean: D nonincreasing", res.report));
    note(verbose, out.back());
  }
  {
    auto dom = grid({96}, 1.0 / 96, Boundary::NeumannReflect);
    std::shared_ptr<const Manifold> man = make_manifold("sphere:3:1");
    const auto p0 = canonical_point(*man);
    const auto dir = canonical_tangent(*man, std::span<const double>(p0.data(), p0.size()));
    Field u0 = datum_arc_1d(dom, man, std::span<const double>(p0.data(), p0.size()),
                            std::span<const double>(dir.data(), dir.size()), 0.8);
    FlowConfig cfg;
    cfg.eps = 1e-2;
    cfg.t_end = 0.02;
    cfg.snapshot_stride = 2000;
    ContractionResult full = contraction_audit(u0, delta, cfg, 99102);
    FlowConfig half = cfg;
    half.dt_safety = cfg.dt_safety / 2.0;
    half.snapshot_stride = cfg.snapshot_stride * 2;
    ContractionResult halved = contraction_audit(u0, delta, half, 99102);

    out.push_back(from_report(8, "contraction", "sphere: log D envelope", full.report));
    note(verbose, out.back());

    CheckResult c;
    c.criterion = 8;
    c.suite = "contraction";
    c.name = "fitted C stable under dt halving";
    const double c1 = full.fitted_rate, c2 = halved.fitted_rate;
    c.measured = std::abs(c1 - c2);
    c.bound = 0.2 * std::max(std::abs(c1), std::abs(c2)) + 1e-3;
    c.pass = halved.report.pass && c.measured <= c.bound;
    c.details = "C = " + std::to_string(c1) + " vs " + std::to_string(c2);
    out.push_back(c);
    note(verbose, c);
  }
}

// ---------------------------------------------------------------------------
// criterion 9: equivalence of the two rhs formulations at first order

void suite_forms(std::vector<CheckResult>& out, bool verbose) {
  const double eps = 5e-2;
  std::vector<double> gaps;
  std::vector<int> sizes = {32, 64, 128, 256};
  std::shared_ptr<const Manifold> man = make_manifold("sphere:3:1");
  for (int n : sizes) {
    auto dom = grid({n}, 1.0 / n, Boundary::Periodic);
    Field u = make_field(dom, man);
    for (int c = 0; c < n; ++c) {
      // modulated great circle, smooth and periodic
      const double x = (c + 0.5) / n;
      const double th = 2.0 * kPi * x + 0.3 * std::sin(2.0 * kPi * x);
      u.cell(c)[0] = std::cos(th);
      u.cell(c)[1] = std::sin(th);
      u.cell(c)[2] = 0.0;
    }
    const auto rp = flow_rhs(u, eps, RhsForm::Project);
    const auto rs = flow_rhs(u, eps, RhsForm::SecondFundamental);
    double gap = 0.0;
    for (std::size_t i = 0; i < rp.size(); ++i) gap = std::max(gap, std::abs(rp[i] - rs[i]));
    gaps.push_back(gap);
  }
  double min_order = std::numeric_limits<double>::infinity();
  std::string detail;
  for (std::size_t i = 0; i + 1 < gaps.size(); ++i) {
    const double order = std::log2(gaps[i] / gaps[i + 1]);
    min_order = std::min(min_order, order);
    detail += (i ? ", " : "orders: ") + std::to_string(order);
  }
  CheckResult c;
  c.criterion = 9;
  c.suite = "forms";
  c.name = "project vs second-fundamental gap order";
  c.measured = min_order;
  c.bound = 0.8;
  c.pass = min_order >= 0.8;
  c.details = detail;
  out.push_back(c);
  note(verbose, c);
}

// ---------------------------------------------------------------------------
// criterion 10: inner convex approximants

void suite_convex(std::vector<CheckResult>& out, bool verbose) {
  struct Case {
    std::string name;
    ConvexBody body;
  };
  std::vector<Case> cases;
  cases.push_back({"square", make_box({0.0, 0.0}, {1.0, 1.0})});
  cases.push_back({"triangle", make_triangle()});
  cases.push_back({"64-gon", make_regular_polygon(64, 0.5, 0.5, 0.48)});
  const GridDomain gridspec({128, 128}, 1.0 / 128, Boundary::NeumannReflect);
  for (const auto& cs : cases) {
    for (double eps : {0.02, 0.05}) {
      const auto mask = inner_domain(cs.body, eps, gridspec);
      AuditReport rep = hausdorff_audit(cs.body, eps, mask, gridspec);
      char label[64];
      std::snprintf(label, sizeof(label), "%s eps=%g", cs.name.c_str(), eps);
      out.push_back(from_report(10, "convex", label, rep));
      note(verbose, out.back());
    }
  }
}

// ---------------------------------------------------------------------------
// criterion 11: flat torus run with a cylinder target

void suite_torus(std::vector<CheckResult>& out, bool verbose) {
  auto dom = grid({32, 32}, 1.0 / 32, Boundary::Periodic);
  std::shared_ptr<const Manifold> man = make_manifold("cylinder:1");
  Field u0 = datum_torus_wrap(dom, man, 1, 0.05, 0.05, 2);
  FlowConfig cfg;
  cfg.eps = 2e-2;
  cfg.t_end = 0.7;
  cfg.snapshot_stride = 4000;
  cfg.stop_at_extinction = true;
  Trajectory traj = run_flow(u0, cfg);

  out.push_back(from_report(11, "torus", "energy audit", energy_audit(traj)));
  note(verbose, out.back());
  out.push_back(from_report(11, "torus", "gradient preservation (K<=0, Ric=0)",
                            gradient_envelope_audit(traj, man->curvature_sup())));
  note(verbose, out.back());

  // stationarity witness: constant state, or pi_u(div Z) ~ 0 in L^2
  CheckResult c;
  c.criterion = 11;
  c.suite = "torus";
  c.name = "final state constant or 1-harmonic";
  if (traj.extinction_time) {
    c.pass = true;
    c.measured = 0.0;
    c.bound = 1e-6;
    c.details = "extinct at t = " + std::to_string(*traj.extinction_time);
  } else {
    const Field& uf = traj.final();
    const auto rhs = flow_rhs(uf, cfg.eps, RhsForm::Project);
    const double l2 =
        std::sqrt(field_inner(*uf.domain, static_cast<int>(uf.components()), rhs.data(), rhs.data()));
    const auto& rows = traj.rows;
    const std::size_t nr = rows.size();
    double rate = std::numeric_limits<double>::infinity();
    if (nr >= 2) {
      const double de = std::abs(rows[nr - 1].energy - rows[nr - 2].energy);
      const double dt = rows[nr - 1].t - rows[nr - 2].t;
      if (dt > 0.0) rate = de / dt;
    }
    c.measured = l2;
    c.bound = 1e-6;
    c.pass = l2 < 1e-6 || rate < 1e-8;
    c.details = "|rhs|_{L2} = " + std::to_string(l2) + ", |dE/dt| = " + std::to_string(rate);
  }
  out.push_back(c);
  note(verbose, c);
}

}  // namespace

std::vector<std::string> suite_names() {
  return {"adjointness", "energy",      "gradient-preservation",
          "envelope",    "extinction-1d", "small-ball",
          "contraction", "forms",       "convex",
          "torus",       "all"};
}

std::vector<CheckResult> run_suite(const std::string& id, bool verbose) {
  std::vector<CheckResult> out;
  const bool all = id == "all";
  bool matched = false;
  auto want = [&](std::initializer_list<const char*> names) {
    bool hit = all;
    for (const char* n : names) hit = hit || id == n;
    matched = matched || hit;
    return hit;
  };
  if (want({"adjointness"})) suite_adjointness(out, verbose);
  if (want({"energy"})) suite_energy(out, verbose);
  if (want({"gradient-preservation"})) suite_gradient_preservation(out, verbose);
  if (want({"envelope"})) suite_envelope(out, verbose);
  if (want({"extinction-1d"})) suite_extinction_1d(out, verbose);
  if (want({"small-ball", "ball", "fmu"})) suite_small_ball(out, verbose);
  if (want({"contraction"})) suite_contraction(out, verbose);
  if (want({"forms"})) suite_forms(out, verbose);
  if (want({"convex"})) suite_convex(out, verbose);
  if (want({"torus"})) suite_torus(out, verbose);
  if (!matched) throw UnknownSuite("no suite named '" + id + "'");
  return out;
}

}  // namespace tvflow
