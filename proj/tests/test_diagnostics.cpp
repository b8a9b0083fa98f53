#include <doctest.h>

#include <cmath>
#include <vector>

#include "tvflow/datum.hpp"
#include "tvflow/diagnostics.hpp"
#include "tvflow/rng.hpp"

using namespace tvflow;

namespace {

constexpr double kPi = 3.14159265358979323846264338327950288;
using Vec = std::vector<double>;

std::shared_ptr<const GridDomain> grid1d(int n, double h = 0.0) {
  return std::make_shared<GridDomain>(std::vector<int>{n}, h > 0 ? h : 1.0 / n,
                                      Boundary::NeumannReflect);
}

Field constant_field(std::shared_ptr<const GridDomain> dom, std::shared_ptr<const Manifold> man,
                     const Vec& q) {
  Field u = make_field(dom, man);
  for (std::size_t c = 0; c < dom->cell_count(); ++c)
    for (std::size_t k = 0; k < q.size(); ++k) u.cell(c)[k] = q[k];
  return u;
}

}  // namespace

TEST_CASE("karcher mean examples") {
  std::shared_ptr<const Manifold> man = make_manifold("sphere:3:1");

  // constant field -> the constant
  auto dom = grid1d(6);
  Vec q = {0.0, 0.6, 0.8};
  Field c = constant_field(dom, man, q);
  const Vec mean = karcher_mean(c, {0.0, 0.0, 1.0});
  for (int k = 0; k < 3; ++k) CHECK(mean[k] == doctest::Approx(q[k]).epsilon(1e-10));

  // two symmetric points of equal mass -> geodesic midpoint
  auto dom2 = grid1d(2);
  Field two = make_field(dom2, man);
  const double a = 0.35;
  two.cell(0)[0] = std::cos(a), two.cell(0)[1] = std::sin(a), two.cell(0)[2] = 0.0;
  two.cell(1)[0] = std::cos(a), two.cell(1)[1] = -std::sin(a), two.cell(1)[2] = 0.0;
  const Vec mid = karcher_mean(two, {1.0, 0.0, 0.0});
  CHECK(mid[0] == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(std::abs(mid[1]) < 1e-10);
  CHECK(std::abs(mid[2]) < 1e-10);

  // three points at 120 degrees on a small circle -> the circle's pole, with
  // the stationarity residual |mean log| below 1e-10
  auto dom3 = grid1d(3);
  Field three = make_field(dom3, man);
  const double rho = 0.3;
  for (int i = 0; i < 3; ++i) {
    const double phi = 2.0 * kPi * i / 3.0;
    three.cell(i)[0] = std::cos(rho);
    three.cell(i)[1] = std::sin(rho) * std::cos(phi);
    three.cell(i)[2] = std::sin(rho) * std::sin(phi);
  }
  const Vec pole = karcher_mean(three, {1.0, 0.0, 0.0});
  CHECK(pole[0] == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(std::abs(pole[1]) < 1e-10);
  CHECK(std::abs(pole[2]) < 1e-10);
  Vec lg(3), acc(3, 0.0);
  for (int i = 0; i < 3; ++i) {
    man->log_map(std::span<const double>(pole.data(), 3), std::span<const double>(three.cell(i), 3),
                 std::span<double>(lg.data(), 3));
    for (int k = 0; k < 3; ++k) acc[k] += lg[k] / 3.0;
  }
  CHECK(std::sqrt(acc[0] * acc[0] + acc[1] * acc[1] + acc[2] * acc[2]) < 1e-10);

  // precondition: values must stay within R~_* of p_init
  Field far = make_field(dom2, man);
  far.cell(0)[0] = 1.0;
  far.cell(1)[1] = 1.0;  // distance pi/2 > R~_* = pi/4
  CHECK_THROWS_AS(karcher_mean(far, {1.0, 0.0, 0.0}), RadiusViolation);
}

TEST_CASE("karcher mean is equivariant under ambient isometries") {
  Rng rng(83);
  std::shared_ptr<const Manifold> man = make_manifold("sphere:3:1");
  auto dom = grid1d(24);
  Vec p0 = {1.0, 0.0, 0.0};
  Field u = datum_noise(dom, man, std::span<const double>(p0.data(), 3), 0.25, 4242);
  const Vec mean = karcher_mean(u, p0);
  // cyclic coordinate rotation preserves the sphere
  Field ru = u;
  for (std::size_t c = 0; c < dom->cell_count(); ++c) {
    const double* a = u.cell(c);
    double* b = ru.cell(c);
    b[0] = a[2];
    b[1] = a[0];
    b[2] = a[1];
  }
  const Vec rmean = karcher_mean(ru, {0.0, 1.0, 0.0});
  CHECK(rmean[0] == doctest::Approx(mean[2]).epsilon(1e-9));
  CHECK(rmean[1] == doctest::Approx(mean[0]).epsilon(1e-9));
  CHECK(rmean[2] == doctest::Approx(mean[1]).epsilon(1e-9));
}

TEST_CASE("f_mu examples, brute-force oracle and minimality") {
  std::shared_ptr<const Manifold> man = make_manifold("sphere:3:1");
  auto dom = grid1d(2, 0.5);

  Vec p = {1.0, 0.0, 0.0};
  Field cp = constant_field(dom, man, p);
  CHECK(f_mu(cp, std::span<const double>(p.data(), 3)) == 0.0);

  // two cells at distance d from each other, midpoint: 1/2 * 2 h^m * (d/2)^2
  const double half = 0.3;
  Field two = make_field(dom, man);
  two.cell(0)[0] = std::cos(half), two.cell(0)[1] = std::sin(half), two.cell(0)[2] = 0.0;
  two.cell(1)[0] = std::cos(half), two.cell(1)[1] = -std::sin(half), two.cell(1)[2] = 0.0;
  const double expected = 0.5 * 2.0 * 0.5 * half * half;
  CHECK(f_mu(two, std::span<const double>(p.data(), 3)) == doctest::Approx(expected).epsilon(1e-12));

  // random field against direct summation
  Rng rng(97);
  auto dom2 = grid1d(17, 0.21);
  Field u = datum_noise(dom2, man, std::span<const double>(p.data(), 3), 0.3, 777);
  Vec probe = {std::cos(0.2), std::sin(0.2), 0.0};
  double brute = 0.0;
  for (std::size_t c = 0; c < dom2->cell_count(); ++c) {
    const double d = man->geodesic_distance(std::span<const double>(probe.data(), 3),
                                            std::span<const double>(u.cell(c), 3));
    brute += d * d;
  }
  brute *= 0.5 * 0.21;
  CHECK(f_mu(u, std::span<const double>(probe.data(), 3)) == doctest::Approx(brute).epsilon(1e-12));

  // minimality of the center of mass against 100 random candidates
  const Vec pc = karcher_mean(u, p);
  const double fmin = f_mu(u, std::span<const double>(pc.data(), 3));
  for (int trial = 0; trial < 100; ++trial) {
    Vec dir(3);
    for (auto& v : dir) v = rng.normal();
    Vec t(3);
    man->tangent_project(std::span<const double>(pc.data(), 3),
                         std::span<const double>(dir.data(), 3), std::span<double>(t.data(), 3));
    Vec cand(3);
    for (int k = 0; k < 3; ++k) cand[k] = pc[k] + 0.2 * rng.uniform() * t[k];
    man->retract(std::span<const double>(cand.data(), 3), std::span<double>(cand.data(), 3));
    CHECK(f_mu(u, std::span<const double>(cand.data(), 3)) >= fmin - 1e-12);
  }
}

TEST_CASE("energy audit passes forward and fails time-reversed") {
  auto dom = grid1d(64);
  std::shared_ptr<const Manifold> man = make_manifold("euclidean:1");
  Field u0 = datum_step_1d(dom, man, 0.25);
  FlowConfig cfg;
  cfg.eps = 5e-2;
  cfg.dt_safety = 0.15;  // the 1e-4 energy bookkeeping needs dt below the stability edge
  cfg.t_end = 2e-3;
  cfg.snapshot_stride = 300;
  Trajectory traj = run_flow(u0, cfg);
  CHECK(energy_audit(traj).pass);

  // constant datum: trivially passes with E = Q h^m eps
  Field c = constant_field(dom, man, {0.4});
  FlowConfig ccfg = cfg;
  ccfg.stop_at_extinction = false;  // a constant datum is extinct at t = 0
  Trajectory tc = run_flow(c, ccfg);
  const AuditReport crep = energy_audit(tc);
  CHECK(crep.pass);
  CHECK(tc.rows.front().energy == doctest::Approx(64.0 * (1.0 / 64) * 5e-2).epsilon(1e-12));

  // artificially time-reversed trajectory fails with a witness
  Trajectory rev = traj;
  std::reverse(rev.rows.begin(), rev.rows.end());
  std::reverse(rev.snapshots.begin(), rev.snapshots.end());
  for (std::size_t i = 0; i < rev.rows.size(); ++i) {
    rev.rows[i].t = traj.rows[i].t;
    rev.rows[i].dissipation_acc = traj.rows[i].dissipation_acc;
    rev.snapshots[i].t = traj.snapshots[i].t;
  }
  const AuditReport rrep = energy_audit(rev);
  CHECK_FALSE(rrep.pass);
  CHECK_FALSE(rrep.violation_times.empty());
}

TEST_CASE("gradient envelope audit: K > 0 envelope values and domain gating") {
  // envelope at t = 0.5 T_dagger equals 2 v0
  const double v0 = 1.7, k = 1.0;
  const double t_half = 0.5 / (k * v0);
  CHECK(v0 / (1.0 - t_half * k * v0) == doctest::Approx(2.0 * v0).epsilon(1e-12));

  // non-convex mask is rejected
  std::vector<std::uint8_t> lshape = {1, 0, 1, 1, 1, 1};
  auto dom = std::make_shared<GridDomain>(std::vector<int>{3, 2}, 0.5,
                                          Boundary::NeumannReflect, lshape);
  CHECK_FALSE(mask_orthogonally_convex(*dom));
  std::shared_ptr<const Manifold> man = make_manifold("euclidean:1");
  Field u0 = make_field(dom, man);
  for (std::size_t c = 0; c < dom->cell_count(); ++c) u0.values[c] = 0.1 * c;
  FlowConfig cfg;
  cfg.eps = 1e-1;
  cfg.t_end = 1e-4;
  cfg.snapshot_stride = 10;
  Trajectory traj = run_flow(u0, cfg);
  CHECK_THROWS_AS(gradient_envelope_audit(traj, 0.0), DomainNotConvex);

  // convex staircase mask is accepted
  std::vector<std::uint8_t> disc = {0, 1, 0, 1, 1, 1, 0, 1, 0};
  auto dom2 = std::make_shared<GridDomain>(std::vector<int>{3, 3}, 0.5,
                                           Boundary::NeumannReflect, disc);
  CHECK(mask_orthogonally_convex(*dom2));
}

TEST_CASE("ball invariance and extinction audits on a tiny sphere run") {
  auto dom = std::make_shared<GridDomain>(std::vector<int>{16, 16}, 1.0 / 16,
                                          Boundary::NeumannReflect);
  std::shared_ptr<const Manifold> man = make_manifold("sphere:3:1");
  const auto p0 = canonical_point(*man);
  const auto dir = canonical_tangent(*man, std::span<const double>(p0.data(), 3));
  Field u0 = datum_bump_2d(dom, man, std::span<const double>(p0.data(), 3),
                           std::span<const double>(dir.data(), 3), 0.3, 0.8);
  FlowConfig cfg;
  cfg.eps = 1e-2;
  cfg.t_end = 0.5;
  cfg.snapshot_stride = 400;
  cfg.stop_at_extinction = true;
  cfg.allow_past_existence_window = true;
  cfg.reference_point = p0;
  Trajectory traj = run_flow(u0, cfg);

  const AuditReport ball = ball_invariance_audit(traj, std::span<const double>(p0.data(), 3), 0.3);
  CHECK(ball.pass);
  CHECK(ball.measured <= 0.3 * (1.0 + 1e-6));

  const AuditReport ext = extinction_audit(traj, std::span<const double>(p0.data(), 3), 0.3);
  CHECK(ext.pass);
  CHECK(ext.measured > 0.0);

  const AuditReport fmu = fmu_decay_audit(traj, std::span<const double>(p0.data(), 3), 0.3);
  CHECK(fmu.pass);

  annotate_fmu(traj);
  CHECK(std::isfinite(traj.rows.front().f_mu));
  CHECK(traj.rows.front().f_mu > traj.rows.back().f_mu);

  // a frozen trajectory (clone of the datum) fails monotone decay to zero
  Trajectory frozen = traj;
  for (auto& snap : frozen.snapshots) snap.u = traj.snapshots.front().u;
  frozen.extinction_time.reset();
  const AuditReport bad = fmu_decay_audit(frozen, std::span<const double>(p0.data(), 3), 0.3);
  CHECK_FALSE(bad.pass);

  // preconditions
  CHECK_THROWS_AS(ball_invariance_audit(traj, std::span<const double>(p0.data(), 3), 2.0),
                  RadiusViolation);
  CHECK_THROWS_AS(fmu_decay_audit(traj, std::span<const double>(p0.data(), 3), 1.0),
                  RadiusViolation);
}

TEST_CASE("no extinction reported for a frozen wide datum") {
  auto dom = grid1d(16);
  std::shared_ptr<const Manifold> man = make_manifold("euclidean:1");
  Field u0 = datum_step_1d(dom, man, 0.4);
  FlowConfig cfg;
  cfg.eps = 1e-2;
  cfg.t_end = 1e-5;
  cfg.snapshot_stride = 10;
  Trajectory traj = run_flow(u0, cfg);
  Vec p0 = {0.0};
  CHECK_THROWS_AS(extinction_audit(traj, std::span<const double>(p0.data(), 1), 0.4), NoExtinction);
}

TEST_CASE("contraction audit: delta = 0 and flat monotonicity") {
  auto dom = grid1d(48);
  std::shared_ptr<const Manifold> man = make_manifold("euclidean:1");
  Field u0 = datum_step_1d(dom, man, 0.3);
  FlowConfig cfg;
  cfg.eps = 2e-2;
  cfg.t_end = 1e-3;
  cfg.snapshot_stride = 100;

  ContractionResult zero = contraction_audit(u0, 0.0, cfg, 5);
  CHECK(zero.report.pass);
  for (double d : zero.sq_distance) CHECK(d == 0.0);

  ContractionResult res = contraction_audit(u0, 1e-3, cfg, 5);
  CHECK(res.report.pass);
  REQUIRE(res.sq_distance.size() >= 2);
  CHECK(res.sq_distance.front() > 0.0);
  for (std::size_t i = 1; i < res.sq_distance.size(); ++i)
    CHECK(res.sq_distance[i] <= res.sq_distance[i - 1] * (1.0 + 1e-10) + 1e-18);
}

TEST_CASE("geodesic diameter: exact, sampled and threshold paths agree") {
  Rng rng(111);
  std::shared_ptr<const Manifold> man = make_manifold("sphere:3:1");
  Vec p0 = {1.0, 0.0, 0.0};
  auto small = grid1d(40);
  Field u = datum_noise(small, man, std::span<const double>(p0.data(), 3), 0.2, 31);
  const double exact = geodesic_diameter(u);
  CHECK(exact > 0.0);
  CHECK(diameter_below(u, exact * 1.01));
  CHECK_FALSE(diameter_below(u, exact * 0.5));

  // large field: sampled path must bracket the anchor bound r <= diam <= 2r
  auto big = std::make_shared<GridDomain>(std::vector<int>{90, 90}, 1.0 / 90,
                                          Boundary::NeumannReflect);
  Field ub = datum_noise(big, man, std::span<const double>(p0.data(), 3), 0.2, 32);
  const double sampled = geodesic_diameter(ub);
  double r = 0.0;
  for (std::size_t c = 0; c < big->cell_count(); ++c)
    r = std::max(r, man->geodesic_distance(std::span<const double>(ub.cell(0), 3),
                                           std::span<const double>(ub.cell(c), 3)));
  CHECK(sampled >= r * (1.0 - 1e-12));
  CHECK(sampled <= 2.0 * r * (1.0 + 1e-12));
}
