#include "tvflow/diagnostics.hpp"

#include <algorithm>
#include <cmath>

#include "tvflow/rng.hpp"

namespace tvflow {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<std::size_t> inside_cells(const GridDomain& dom) {
  std::vector<std::size_t> cells;
  cells.reserve(dom.inside_count());
  for (std::size_t c = 0; c < dom.cell_count(); ++c)
    if (dom.inside(c)) cells.push_back(c);
  return cells;
}

double max_dist_to(const Field& u, std::span<const double> p) {
  const Manifold& m = *u.manifold;
  const std::size_t n = u.components();
  double best = 0.0;
  for (std::size_t c = 0; c < u.domain->cell_count(); ++c) {
    if (!u.domain->inside(c)) continue;
    best = std::max(best, m.geodesic_distance(p, std::span<const double>(u.cell(c), n)));
  }
  return best;
}

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double rms_residual = 0.0;
  double max_residual = 0.0;
};

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  LineFit f;
  const double den = n * sxx - sx * sx;
  if (den <= 0.0) {
    f.slope = 0.0;
    f.intercept = n ? sy / n : 0.0;
  } else {
    f.slope = (n * sxy - sx * sy) / den;
    f.intercept = (sy - f.slope * sx) / n;
  }
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - (f.slope * x[i] + f.intercept);
    ss += r * r;
    f.max_residual = std::max(f.max_residual, std::abs(r));
  }
  f.rms_residual = n ? std::sqrt(ss / n) : 0.0;
  return f;
}

}  // namespace

AuditReport energy_audit(const Trajectory& traj) {
  AuditReport rep;
  rep.name = "energy";
  rep.tolerance = 1e-4;
  if (traj.rows.size() < 2) throw ConfigError("energy_audit: trajectory needs at least 2 snapshots");
  double worst_ratio = 0.0;
  bool pass = true;
  std::size_t i = 0;
  while (i < traj.rows.size()) {
    // rows of one constant-eps segment
    std::size_t j = i;
    while (j + 1 < traj.rows.size() && traj.rows[j + 1].eps == traj.rows[i].eps) ++j;
    const double e0 = traj.rows[i].energy;
    const double d0 = traj.rows[i].dissipation_acc;
    double prev = e0;
    for (std::size_t r = i; r <= j; ++r) {
      const auto& row = traj.rows[r];
      const double lhs = row.energy + (row.dissipation_acc - d0);
      if (e0 > 0.0) worst_ratio = std::max(worst_ratio, lhs / e0);
      if (lhs > e0 * (1.0 + rep.tolerance)) {
        pass = false;
        rep.violation_times.push_back(row.t);
      }
      if (row.energy > prev * (1.0 + 1e-10) + 1e-14) {
        pass = false;
        rep.violation_times.push_back(row.t);
      }
      prev = row.energy;
    }
    i = j + 1;
  }
  rep.pass = pass;
  rep.measured = worst_ratio;
  rep.bound = 1.0;
  rep.details = "sup_t [E(t) + dissipation]/E(0) per segment";
  return rep;
}

AuditReport gradient_envelope_audit(const Trajectory& traj, double curvature_sup) {
  const Field& u0 = traj.initial();
  const GridDomain& dom = *u0.domain;
  if (dom.boundary() == Boundary::Periodic) {
    if (curvature_sup > 0.0)
      throw ConfigError("gradient_envelope_audit: periodic domains are audited for K <= 0 only");
  } else if (dom.has_mask() && !mask_orthogonally_convex(dom)) {
    throw DomainNotConvex("gradient_envelope_audit: mask fails the convexity test");
  }

  AuditReport rep;
  rep.name = "gradient_envelope";
  const double v0 = traj.rows.front().sup_v;
  bool pass = true;
  double worst = 0.0;
  if (curvature_sup <= 0.0) {
    rep.tolerance = 1e-3;
    rep.bound = v0;
    for (const auto& row : traj.rows) {
      worst = std::max(worst, row.sup_v);
      if (row.sup_v > v0 * (1.0 + rep.tolerance)) {
        pass = false;
        rep.violation_times.push_back(row.t);
      }
    }
    rep.details = "sup_v(t) <= sup_v(0), nonpositive curvature";
  } else {
    rep.tolerance = 5e-2;
    const double t_dagger = 1.0 / (curvature_sup * v0);
    const double t_max = 0.8 * t_dagger;
    rep.bound = v0 / (1.0 - t_max * curvature_sup * v0);  // envelope at the last audited time
    for (const auto& row : traj.rows) {
      if (row.t > t_max) break;
      const double envelope = v0 / (1.0 - row.t * curvature_sup * v0);
      worst = std::max(worst, row.sup_v / envelope);
      if (row.sup_v > envelope * (1.0 + rep.tolerance)) {
        pass = false;
        rep.violation_times.push_back(row.t);
      }
    }
    rep.details = "sup_v(t) <= v0/(1 - t K v0) for t <= 0.8 T_dagger";
  }
  rep.pass = pass;
  rep.measured = worst;
  return rep;
}

std::vector<double> karcher_mean(const Field& u, std::vector<double> p_init) {
  const Manifold& m = *u.manifold;
  const std::size_t n = u.components();
  if (p_init.size() != n) throw ConfigError("karcher_mean: p_init has wrong dimension");

  const auto [rstar, rtilde] = m.critical_radius(p_init);
  const double spread = max_dist_to(u, std::span<const double>(p_init.data(), n));
  if (!(spread < rtilde))
    throw RadiusViolation("karcher_mean: field values leave the ball of radius R~_* around p_init");

  const auto cells = inside_cells(*u.domain);
  std::vector<double> p = std::move(p_init);
  std::vector<double> mean(n), lg(n), next(n);
  for (int it = 0; it < 10000; ++it) {
    std::fill(mean.begin(), mean.end(), 0.0);
    for (std::size_t c : cells) {
      m.log_map(std::span<const double>(p.data(), n), std::span<const double>(u.cell(c), n),
                std::span<double>(lg.data(), n));
      for (std::size_t k = 0; k < n; ++k) mean[k] += lg[k];
    }
    const double inv = 1.0 / static_cast<double>(cells.size());
    double step2 = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      mean[k] *= inv;
      step2 += mean[k] * mean[k];
    }
    m.exp_map(std::span<const double>(p.data(), n), std::span<const double>(mean.data(), n),
              std::span<double>(next.data(), n));
    p.swap(next);
    if (std::sqrt(step2) < 1e-12) return p;
  }
  throw NoConvergence("karcher_mean: no convergence within 10^4 iterations");
}

double f_mu(const Field& u, std::span<const double> p) {
  const Manifold& m = *u.manifold;
  const std::size_t n = u.components();
  double acc[4] = {0.0, 0.0, 0.0, 0.0};
  std::size_t i = 0;
  for (std::size_t c = 0; c < u.domain->cell_count(); ++c) {
    if (!u.domain->inside(c)) continue;
    const double d = m.geodesic_distance(p, std::span<const double>(u.cell(c), n));
    acc[i++ & 3] += d * d;
  }
  return 0.5 * u.domain->cell_measure() * ((acc[0] + acc[2]) + (acc[1] + acc[3]));
}

void annotate_fmu(Trajectory& traj) {
  if (!traj.config.reference_point) return;
  std::vector<double> warm = *traj.config.reference_point;
  for (std::size_t i = 0; i < traj.snapshots.size(); ++i) {
    try {
      warm = karcher_mean(traj.snapshots[i].u, warm);
      traj.rows[i].f_mu = f_mu(traj.snapshots[i].u, std::span<const double>(warm.data(), warm.size()));
    } catch (const Error&) {
      traj.rows[i].f_mu = kNaN;
    }
  }
}

AuditReport fmu_decay_audit(const Trajectory& traj, std::span<const double> p0, double radius) {
  const Field& u0 = traj.initial();
  const Manifold& m = *u0.manifold;
  std::vector<double> p0v(p0.begin(), p0.end());
  const auto [rstar, rtilde] = m.critical_radius(p0);
  if (!(radius < rtilde))
    throw RadiusViolation("fmu_decay_audit: R must be below R~_*(p0)");
  if (max_dist_to(u0, p0) > radius * (1.0 + 1e-9))
    throw RadiusViolation("fmu_decay_audit: datum leaves the ball of radius R");

  const double mdim = static_cast<double>(u0.domain->dim());
  std::vector<double> warm = p0v;
  std::vector<double> fs, ts;
  for (const auto& snap : traj.snapshots) {
    warm = karcher_mean(snap.u, warm);
    fs.push_back(f_mu(snap.u, std::span<const double>(warm.data(), warm.size())));
    ts.push_back(snap.t);
  }

  AuditReport rep;
  rep.name = "fmu_decay";
  rep.tolerance = 0.05;
  bool pass = true;

  // (a) monotone nonincreasing
  for (std::size_t i = 1; i < fs.size(); ++i) {
    if (fs[i] > fs[i - 1] * (1.0 + 1e-9) + 1e-16) {
      pass = false;
      rep.violation_times.push_back(ts[i]);
    }
  }

  // (b) affine upper envelope on f^{1/m}: fitted over the decay region (down
  // to 5% of the initial value), then required to majorize every sample up
  // to the 5% tolerance — the discrete analogue of
  // f^{1/m}(t) <= (f^{1/m}(0) - t/C3)_+ .
  const double y0 = std::pow(fs.front(), 1.0 / mdim);
  std::vector<double> xt, yf;
  for (std::size_t i = 0; i < fs.size(); ++i) {
    const double y = std::pow(std::max(fs[i], 0.0), 1.0 / mdim);
    if (y >= 0.05 * y0 && fs[i] > 1e-14) {
      xt.push_back(ts[i]);
      yf.push_back(y);
    }
  }
  double resid_frac = 0.0;
  if (xt.size() >= 3 && y0 > 0.0) {
    const LineFit fit = fit_line(xt, yf);
    resid_frac = fit.rms_residual / y0;
    const bool decays = fit.slope < 0.0;
    const double t_zero = decays ? -(fit.intercept + fit.max_residual) / fit.slope : kNaN;
    const bool finite_zero = decays && std::isfinite(t_zero) && t_zero > 0.0;
    if (!decays || !finite_zero || resid_frac > rep.tolerance) pass = false;
    for (std::size_t i = 0; i < fs.size(); ++i) {
      const double y = std::pow(std::max(fs[i], 0.0), 1.0 / mdim);
      const double env = std::max(fit.slope * ts[i] + fit.intercept + fit.max_residual, 0.0);
      if (y > env + 0.05 * y0) {
        pass = false;
        rep.violation_times.push_back(ts[i]);
      }
    }
    rep.details = "affine envelope of f^{1/m} hits zero at t = " + std::to_string(t_zero) +
                  "; empirical constant t/R = " + std::to_string(t_zero / radius);
  } else if (fs.front() > 1e-12) {
    rep.details = "too few pre-extinction samples for the envelope fit";
    pass = false;
  } else {
    rep.details = "datum already extinct";
  }

  rep.measured = resid_frac;
  rep.bound = rep.tolerance;
  rep.pass = pass;
  return rep;
}

AuditReport ball_invariance_audit(const Trajectory& traj, std::span<const double> p0,
                                  double radius) {
  const Field& u0 = traj.initial();
  const auto [rstar, rtilde] = u0.manifold->critical_radius(p0);
  if (!(radius < rstar)) throw RadiusViolation("ball_invariance_audit: R must be below R_*(p0)");
  if (max_dist_to(u0, p0) > radius * (1.0 + 1e-9))
    throw RadiusViolation("ball_invariance_audit: datum leaves the ball of radius R");

  AuditReport rep;
  rep.name = "ball_invariance";
  rep.tolerance = 1e-6;
  rep.bound = radius;
  double worst = 0.0;
  bool pass = true;
  for (const auto& snap : traj.snapshots) {
    const double r = max_dist_to(snap.u, p0);
    worst = std::max(worst, r);
    if (r > radius * (1.0 + rep.tolerance)) {
      pass = false;
      rep.violation_times.push_back(snap.t);
    }
  }
  rep.measured = worst;
  rep.pass = pass;
  return rep;
}

double extinction_time_of(const Trajectory& traj) {
  if (traj.extinction_time) return *traj.extinction_time;
  for (const auto& snap : traj.snapshots)
    if (diameter_below(snap.u, traj.config.extinction_diameter_tol)) return snap.t;
  throw NoExtinction("trajectory never collapses to a constant map");
}

AuditReport extinction_audit(const Trajectory& traj, std::span<const double> p0, double radius) {
  AuditReport rep;
  rep.name = "extinction";
  const double t_ext = extinction_time_of(traj);  // may throw NoExtinction
  rep.pass = true;
  rep.measured = t_ext;
  rep.bound = radius;
  rep.details = "empirical constant t*/R = " + std::to_string(t_ext / radius);
  (void)p0;
  return rep;
}

ContractionResult contraction_audit(const Field& u0, double delta, const FlowConfig& cfg,
                                    std::uint64_t seed) {
  const Manifold& m = *u0.manifold;
  const std::size_t n = u0.components();
  if (delta > 0.1 * m.tube_radius())
    throw ConfigError("contraction_audit: delta must stay below 0.1 tube_radius");

  // perturbed datum: retract(u0 + delta * tangent noise)
  Field u0b = u0;
  if (delta != 0.0) {
    Rng rng(seed);
    std::vector<double> noise(n), tn(n);
    for (std::size_t c = 0; c < u0.domain->cell_count(); ++c) {
      if (!u0.domain->inside(c)) continue;
      for (std::size_t k = 0; k < n; ++k) noise[k] = rng.normal();
      m.tangent_project(std::span<const double>(u0.cell(c), n),
                        std::span<const double>(noise.data(), n), std::span<double>(tn.data(), n));
      double* cell = u0b.cell(c);
      for (std::size_t k = 0; k < n; ++k) cell[k] += delta * tn[k];
      m.retract(std::span<const double>(cell, n), std::span<double>(cell, n));
    }
  }

  FlowConfig run_cfg = cfg;
  run_cfg.stop_at_extinction = false;  // keep both time grids aligned
  const Trajectory t1 = run_flow(u0, run_cfg);
  const Trajectory t2 = run_flow(u0b, run_cfg);
  const std::size_t count = std::min(t1.snapshots.size(), t2.snapshots.size());

  ContractionResult res;
  AuditReport& rep = res.report;
  rep.name = "contraction";
  rep.tolerance = 0.0;
  const double hm = u0.domain->cell_measure();
  for (std::size_t i = 0; i < count; ++i) {
    res.times.push_back(t1.snapshots[i].t);
    double acc[4] = {0.0, 0.0, 0.0, 0.0};
    std::size_t j = 0;
    const Field& a = t1.snapshots[i].u;
    const Field& b = t2.snapshots[i].u;
    for (std::size_t c = 0; c < u0.domain->cell_count(); ++c) {
      if (!u0.domain->inside(c)) continue;
      for (std::size_t k = 0; k < n; ++k) {
        const double d = a.cell(c)[k] - b.cell(c)[k];
        acc[j++ & 3] += d * d;
      }
    }
    res.sq_distance.push_back(hm * ((acc[0] + acc[2]) + (acc[1] + acc[3])));
  }

  bool pass = true;
  if (delta == 0.0) {
    for (double d : res.sq_distance)
      if (d != 0.0) pass = false;
    rep.details = "delta = 0: D(t) identically zero";
    rep.measured = *std::max_element(res.sq_distance.begin(), res.sq_distance.end());
    rep.bound = 0.0;
    rep.pass = pass;
    return res;
  }

  if (m.is_flat()) {
    // scalar/flat total variation flow is an L^2 contraction
    double worst = 0.0;
    for (std::size_t i = 1; i < res.sq_distance.size(); ++i) {
      worst = std::max(worst, res.sq_distance[i] - res.sq_distance[i - 1]);
      if (res.sq_distance[i] > res.sq_distance[i - 1] * (1.0 + 1e-10) + 1e-18) {
        pass = false;
        rep.violation_times.push_back(res.times[i]);
      }
    }
    rep.details = "flat target: D(t) nonincreasing";
    rep.measured = worst;
    rep.bound = 0.0;
    rep.pass = pass;
    res.fitted_rate = 0.0;
    return res;
  }

  // Gronwall: fit C on the first half of log D, validate on the second half
  const double d0 = res.sq_distance.front();
  std::vector<double> lt, ld;
  for (std::size_t i = 0; i < res.sq_distance.size(); ++i) {
    if (res.sq_distance[i] <= 0.0) continue;
    lt.push_back(res.times[i]);
    ld.push_back(std::log(res.sq_distance[i]));
  }
  if (lt.size() < 4) {
    rep.details = "perturbation collapsed; trivially contractive";
    rep.pass = true;
    rep.measured = 0.0;
    return res;
  }
  const std::size_t half = lt.size() / 2;
  std::vector<double> xt(lt.begin(), lt.begin() + half), yd(ld.begin(), ld.begin() + half);
  const LineFit fit = fit_line(xt, yd);
  res.fitted_rate = fit.slope;
  const double slack = 0.15 * std::abs(std::log(std::max(d0, 1e-300))) + 1.0;
  double worst_excess = 0.0;
  for (std::size_t i = 0; i < lt.size(); ++i) {
    const double excess = ld[i] - (ld.front() + fit.slope * (lt[i] - lt.front())) - slack;
    worst_excess = std::max(worst_excess, excess);
    if (excess > 0.0) {
      pass = false;
      rep.violation_times.push_back(lt[i]);
    }
  }
  rep.details = "log D(t) <= log D(0) + C t with fitted C = " + std::to_string(fit.slope);
  rep.measured = worst_excess;
  rep.bound = 0.0;
  rep.pass = pass;
  return res;
}

bool mask_orthogonally_convex(const GridDomain& dom) {
  if (!dom.has_mask()) return true;
  const auto& n = dom.extents();
  const auto st = dom.strides();
  for (int d = 0; d < dom.dim(); ++d) {
    const std::size_t nd = static_cast<std::size_t>(n[d]);
    const std::size_t slab = st[d];
    const std::size_t runs = dom.cell_count() / (slab * nd);
    for (std::size_t r = 0; r < runs; ++r) {
      for (std::size_t s = 0; s < slab; ++s) {
        // walk the line {base + k * slab}
        const std::size_t base = r * slab * nd + s;
        int transitions = 0;
        bool prev = false;
        for (std::size_t k = 0; k < nd; ++k) {
          const bool cur = dom.inside(base + k * slab);
          if (cur != prev) ++transitions;
          prev = cur;
        }
        if (transitions > 2) return false;
      }
    }
  }
  return true;
}

}  // namespace tvflow
