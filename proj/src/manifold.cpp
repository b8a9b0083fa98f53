#include "tvflow/manifold.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <sstream>

namespace tvflow {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPi = 3.14159265358979323846264338327950288;

double dot_n(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm_n(std::span<const double> a) { return std::sqrt(dot_n(a, a)); }

}  // namespace

void Manifold::normal_project(std::span<const double> p, std::span<const double> v,
                              std::span<double> out) const {
  double tmp[kMaxAmbientDim];
  std::span<double> t(tmp, v.size());
  tangent_project(p, v, t);
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] - t[i];
}

double Manifold::geodesic_distance(std::span<const double> p, std::span<const double> q) const {
  double tmp[kMaxAmbientDim];
  std::span<double> t(tmp, p.size());
  log_map(p, q, t);
  return norm_n(t);
}

void Manifold::tangent_projector_matrix(std::span<const double> p, double* mat) const {
  const int n = ambient_dim();
  double e[kMaxAmbientDim];
  double col[kMaxAmbientDim];
  for (int j = 0; j < n; ++j) {
    std::fill(e, e + n, 0.0);
    e[j] = 1.0;
    tangent_project(p, std::span<const double>(e, n), std::span<double>(col, n));
    for (int i = 0; i < n; ++i) mat[i * n + j] = col[i];
  }
}

void Manifold::second_fundamental_form(std::span<const double> p, std::span<const double> x,
                                       std::span<const double> y, std::span<double> out) const {
  // Normal-frame derivative convention (A(X,Y) = (X . D N^k Y) N^k):
  //   A(X,Y) = pi_perp( (d/dt pi_perp(c(t))|_0) Y ) = -pi_perp( (d/dt pi(c(t))|_0) Y )
  // with c(t) = retract(p + t X), differenced centrally.
  const int n = ambient_dim();
  const double xn = norm_n(x);
  if (xn == 0.0) {
    std::fill(out.begin(), out.end(), 0.0);
    return;
  }
  const double delta = 1e-5 * xn;
  double pp[kMaxAmbientDim], pm[kMaxAmbientDim];
  double qp[kMaxAmbientDim], qm[kMaxAmbientDim];
  for (int i = 0; i < n; ++i) {
    pp[i] = p[i] + delta * x[i] / xn;
    pm[i] = p[i] - delta * x[i] / xn;
  }
  retract(std::span<const double>(pp, n), std::span<double>(pp, n));
  retract(std::span<const double>(pm, n), std::span<double>(pm, n));
  tangent_project(std::span<const double>(pp, n), y, std::span<double>(qp, n));
  tangent_project(std::span<const double>(pm, n), y, std::span<double>(qm, n));
  double d[kMaxAmbientDim];
  for (int i = 0; i < n; ++i) d[i] = -(qp[i] - qm[i]) / (2.0 * delta) * xn;
  normal_project(p, std::span<const double>(d, n), out);
}

double Manifold::sectional_curvature(std::span<const double> p, std::span<const double> x,
                                     std::span<const double> y) const {
  const int n = ambient_dim();
  const double xx = dot_n(x, x), yy = dot_n(y, y), xy = dot_n(x, y);
  const double den = xx * yy - xy * xy;
  if (den < 1e-14 * xx * yy)
    throw DegeneratePlane("tangent vectors do not span a 2-plane");
  double axx[kMaxAmbientDim], ayy[kMaxAmbientDim], axy[kMaxAmbientDim];
  second_fundamental_form(p, x, x, std::span<double>(axx, n));
  second_fundamental_form(p, y, y, std::span<double>(ayy, n));
  second_fundamental_form(p, x, y, std::span<double>(axy, n));
  double num = dot_n(std::span<const double>(axx, n), std::span<const double>(ayy, n)) -
               dot_n(std::span<const double>(axy, n), std::span<const double>(axy, n));
  return num / den;
}

std::pair<double, double> Manifold::critical_radius(std::span<const double>) const {
  const double k = curvature_sup();
  const double curv_term = k > 0.0 ? (kPi / 2.0) / std::sqrt(k) : kInf;
  const double loop_term = geodesic_loop_inf() / 4.0;
  const double rstar = std::min(curv_term, loop_term);
  return {rstar, rstar / 2.0};
}

void Manifold::retract_cells(double* values, std::size_t ncells) const {
  const int n = ambient_dim();
  for (std::size_t c = 0; c < ncells; ++c) {
    std::span<double> v(values + c * n, n);
    retract(std::span<const double>(v.data(), n), v);
  }
}

void Manifold::tangent_project_cells(const double* base, const double* v, double* out,
                                     std::size_t ncells) const {
  const int n = ambient_dim();
  for (std::size_t c = 0; c < ncells; ++c) {
    tangent_project(std::span<const double>(base + c * n, n),
                    std::span<const double>(v + c * n, n), std::span<double>(out + c * n, n));
  }
}

// ---------------------------------------------------------------------------
// Euclidean R^k

namespace {

class Euclidean final : public Manifold {
public:
  explicit Euclidean(int k) : Manifold("euclidean:" + std::to_string(k), k, k, 0.0, kInf, kInf) {}

  void retract(std::span<const double> y, std::span<double> out) const override {
    if (out.data() != y.data()) std::copy(y.begin(), y.end(), out.begin());
  }

  void tangent_project(std::span<const double>, std::span<const double> v,
                       std::span<double> out) const override {
    if (out.data() != v.data()) std::copy(v.begin(), v.end(), out.begin());
  }

  void exp_map(std::span<const double> p, std::span<const double> x,
               std::span<double> out) const override {
    for (std::size_t i = 0; i < p.size(); ++i) out[i] = p[i] + x[i];
  }

  void log_map(std::span<const double> p, std::span<const double> q,
               std::span<double> out) const override {
    for (std::size_t i = 0; i < p.size(); ++i) out[i] = q[i] - p[i];
  }

  void second_fundamental_form(std::span<const double>, std::span<const double>,
                               std::span<const double>, std::span<double> out) const override {
    std::fill(out.begin(), out.end(), 0.0);
  }

  void retract_cells(double*, std::size_t) const override {}

  void tangent_project_cells(const double*, const double* v, double* out,
                             std::size_t ncells) const override {
    if (out != v) std::memcpy(out, v, sizeof(double) * ncells * ambient_dim());
  }

  bool is_flat() const override { return true; }
};

// ---------------------------------------------------------------------------
// Sphere S^{N-1} of radius r in R^N; the unit circle is the case N = 2.
// For N = 2 there is no 2-plane, so curvature_sup is 0.

class Sphere final : public Manifold {
public:
  Sphere(std::string id, int ambient, double radius)
      : Manifold(std::move(id), ambient, ambient - 1,
                 ambient >= 3 ? 1.0 / (radius * radius) : 0.0, radius,
                 2.0 * kPi * radius),
        r_(radius) {}

  void retract(std::span<const double> y, std::span<double> out) const override {
    const double n = norm_n(y);
    if (n < 1e-14 * r_) throw OutsideTube("sphere retraction at the origin");
    const double s = r_ / n;
    for (std::size_t i = 0; i < y.size(); ++i) out[i] = y[i] * s;
  }

  void tangent_project(std::span<const double> p, std::span<const double> v,
                       std::span<double> out) const override {
    const double a = dot_n(p, v) / (r_ * r_);
    for (std::size_t i = 0; i < p.size(); ++i) out[i] = v[i] - a * p[i];
  }

  void exp_map(std::span<const double> p, std::span<const double> x,
               std::span<double> out) const override {
    const double nx = norm_n(x);
    if (nx == 0.0) {
      std::copy(p.begin(), p.end(), out.begin());
      return;
    }
    const double th = nx / r_;
    const double c = std::cos(th), s = std::sin(th);
    for (std::size_t i = 0; i < p.size(); ++i) out[i] = c * p[i] + s * (r_ / nx) * x[i];
  }

  void log_map(std::span<const double> p, std::span<const double> q,
               std::span<double> out) const override {
    const double cosang = std::clamp(dot_n(p, q) / (r_ * r_), -1.0, 1.0);
    double w[kMaxAmbientDim];
    const double a = dot_n(p, q) / (r_ * r_);
    for (std::size_t i = 0; i < p.size(); ++i) w[i] = q[i] - a * p[i];
    const double nw = norm_n(std::span<const double>(w, p.size()));
    if (nw < 1e-15 * r_) {
      if (cosang < 0.0) throw CutLocus("sphere log at antipode");
      std::fill(out.begin(), out.end(), 0.0);
      return;
    }
    // |w| = r sin(ang) exactly; atan2 keeps the angle well conditioned near 0
    const double ang = std::atan2(nw / r_, cosang);
    if (ang > kPi - 1e-9) throw CutLocus("sphere log at antipode");
    const double s = r_ * ang / nw;
    for (std::size_t i = 0; i < p.size(); ++i) out[i] = s * w[i];
  }

  double geodesic_distance(std::span<const double> p, std::span<const double> q) const override {
    // chord-based angle, well conditioned near 0
    double c2 = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double d = q[i] - p[i];
      c2 += d * d;
    }
    const double half = std::clamp(std::sqrt(c2) / (2.0 * r_), 0.0, 1.0);
    return 2.0 * r_ * std::asin(half);
  }

  void second_fundamental_form(std::span<const double> p, std::span<const double> x,
                               std::span<const double> y, std::span<double> out) const override {
    // normal-frame derivative convention: A(X,Y) = (X . D N Y) N with
    // N(p) = p/r, so A(X,Y) = +(X.Y) p / r^2
    const double a = dot_n(x, y) / (r_ * r_);
    for (std::size_t i = 0; i < p.size(); ++i) out[i] = a * p[i];
  }

  void retract_cells(double* values, std::size_t ncells) const override {
    const int n = ambient_dim();
    for (std::size_t c = 0; c < ncells; ++c) {
      double* v = values + c * n;
      double s2 = 0.0;
      for (int i = 0; i < n; ++i) s2 += v[i] * v[i];
      const double nn = std::sqrt(s2);
      if (nn < 1e-14 * r_) throw OutsideTube("sphere retraction at the origin");
      const double s = r_ / nn;
      for (int i = 0; i < n; ++i) v[i] *= s;
    }
  }

  void tangent_project_cells(const double* base, const double* v, double* out,
                             std::size_t ncells) const override {
    const int n = ambient_dim();
    const double inv_r2 = 1.0 / (r_ * r_);
    for (std::size_t c = 0; c < ncells; ++c) {
      const double* p = base + c * n;
      const double* w = v + c * n;
      double* o = out + c * n;
      double a = 0.0;
      for (int i = 0; i < n; ++i) a += p[i] * w[i];
      a *= inv_r2;
      for (int i = 0; i < n; ++i) o[i] = w[i] - a * p[i];
    }
  }

private:
  double r_;
};

// ---------------------------------------------------------------------------
// SO(3) embedded in R^9 (row-major 3x3, Frobenius metric).
//
// Tangent space at R is { R W : W antisymmetric }. The closest-point
// retraction is the orthogonal polar factor, computed by the Newton
// iteration X <- (X + X^-T)/2. curvature_sup is a recorded constant from
// maximizing sectional_curvature over 1e4 random planes (max 0.125) with a
// 5% margin; the sampled bound test pins it down.

constexpr double kSo3CurvatureSup = 0.13125;

void mat3_mul(const double* a, const double* b, double* out) {
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double s = 0.0;
      for (int k = 0; k < 3; ++k) s += a[3 * i + k] * b[3 * k + j];
      out[3 * i + j] = s;
    }
}

void mat3_transpose(const double* a, double* out) {
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) out[3 * i + j] = a[3 * j + i];
}

double mat3_det(const double* a) {
  return a[0] * (a[4] * a[8] - a[5] * a[7]) - a[1] * (a[3] * a[8] - a[5] * a[6]) +
         a[2] * (a[3] * a[7] - a[4] * a[6]);
}

bool mat3_inverse(const double* a, double* out) {
  const double det = mat3_det(a);
  if (std::abs(det) < 1e-300) return false;
  const double inv = 1.0 / det;
  out[0] = (a[4] * a[8] - a[5] * a[7]) * inv;
  out[1] = (a[2] * a[7] - a[1] * a[8]) * inv;
  out[2] = (a[1] * a[5] - a[2] * a[4]) * inv;
  out[3] = (a[5] * a[6] - a[3] * a[8]) * inv;
  out[4] = (a[0] * a[8] - a[2] * a[6]) * inv;
  out[5] = (a[2] * a[3] - a[0] * a[5]) * inv;
  out[6] = (a[3] * a[7] - a[4] * a[6]) * inv;
  out[7] = (a[1] * a[6] - a[0] * a[7]) * inv;
  out[8] = (a[0] * a[4] - a[1] * a[3]) * inv;
  return true;
}

double orthogonality_residual(const double* x) {
  double xtx[9], t[9];
  mat3_transpose(x, t);
  mat3_mul(t, x, xtx);
  xtx[0] -= 1.0;
  xtx[4] -= 1.0;
  xtx[8] -= 1.0;
  double s = 0.0;
  for (int i = 0; i < 9; ++i) s += xtx[i] * xtx[i];
  return std::sqrt(s);
}

class SpecialOrthogonal3 final : public Manifold {
public:
  SpecialOrthogonal3()
      : Manifold("so3", 9, 3, kSo3CurvatureSup, 1.0, 2.0 * std::sqrt(2.0) * kPi) {}

  void retract(std::span<const double> y, std::span<double> out) const override {
    double x[9];
    std::copy(y.begin(), y.end(), x);
    if (mat3_det(x) < 1e-12) throw OutsideTube("so3 retraction: det <= 0");
    if (orthogonality_residual(x) <= 1e-12) {
      std::copy(y.begin(), y.end(), out.begin());
      return;
    }
    for (int it = 0; it < 100; ++it) {
      double inv[9], invt[9];
      if (!mat3_inverse(x, inv)) throw OutsideTube("so3 retraction: singular iterate");
      mat3_transpose(inv, invt);
      for (int i = 0; i < 9; ++i) x[i] = 0.5 * (x[i] + invt[i]);
      if (orthogonality_residual(x) <= 1e-12) {
        std::copy(x, x + 9, out.begin());
        return;
      }
    }
    throw OutsideTube("so3 retraction: polar iteration did not converge");
  }

  void tangent_project(std::span<const double> p, std::span<const double> v,
                       std::span<double> out) const override {
    // pi_R(V) = R skew(R^T V)
    double rt[9], w[9];
    mat3_transpose(p.data(), rt);
    mat3_mul(rt, v.data(), w);
    double sk[9];
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) sk[3 * i + j] = 0.5 * (w[3 * i + j] - w[3 * j + i]);
    mat3_mul(p.data(), sk, out.data());
  }

  void exp_map(std::span<const double> p, std::span<const double> x,
               std::span<double> out) const override {
    double rt[9], w[9];
    mat3_transpose(p.data(), rt);
    mat3_mul(rt, x.data(), w);
    // antisymmetrize to kill numerical drift
    double om[3] = {0.5 * (w[7] - w[5]), 0.5 * (w[2] - w[6]), 0.5 * (w[3] - w[1])};
    double e[9];
    rodrigues(om, e);
    mat3_mul(p.data(), e, out.data());
  }

  void log_map(std::span<const double> p, std::span<const double> q,
               std::span<double> out) const override {
    double rt[9], m[9];
    mat3_transpose(p.data(), rt);
    mat3_mul(rt, q.data(), m);
    const double c = std::clamp((m[0] + m[4] + m[8] - 1.0) / 2.0, -1.0, 1.0);
    // axis vector with |axis| = sin(theta); atan2 is well conditioned near 0
    const double ax = 0.5 * (m[7] - m[5]);
    const double ay = 0.5 * (m[2] - m[6]);
    const double az = 0.5 * (m[3] - m[1]);
    const double sinth = std::sqrt(ax * ax + ay * ay + az * az);
    const double th = std::atan2(sinth, c);
    if (th > kPi - 1e-9) throw CutLocus("so3 log at rotation angle pi");
    double a[9] = {0, 0, 0, 0, 0, 0, 0, 0, 0};
    const double s = sinth > 1e-150 ? th / (2.0 * sinth) : 0.5;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) a[3 * i + j] = s * (m[3 * i + j] - m[3 * j + i]);
    mat3_mul(p.data(), a, out.data());
  }

  double geodesic_distance(std::span<const double> p, std::span<const double> q) const override {
    // total (defined at the cut locus as well), via the trace formula
    double rt[9], m[9];
    mat3_transpose(p.data(), rt);
    mat3_mul(rt, q.data(), m);
    const double c = std::clamp((m[0] + m[4] + m[8] - 1.0) / 2.0, -1.0, 1.0);
    return std::sqrt(2.0) * std::acos(c);
  }

private:
  static void rodrigues(const double om[3], double* out) {
    const double th = std::sqrt(om[0] * om[0] + om[1] * om[1] + om[2] * om[2]);
    double k[9] = {0, -om[2], om[1], om[2], 0, -om[0], -om[1], om[0], 0};
    double k2[9];
    mat3_mul(k, k, k2);
    double a, b;
    if (th < 1e-8) {
      a = 1.0 - th * th / 6.0;
      b = 0.5 - th * th / 24.0;
    } else {
      a = std::sin(th) / th;
      b = (1.0 - std::cos(th)) / (th * th);
    }
    for (int i = 0; i < 9; ++i) out[i] = a * k[i] + b * k2[i];
    out[0] += 1.0;
    out[4] += 1.0;
    out[8] += 1.0;
  }
};

// ---------------------------------------------------------------------------
// Product manifold, blockwise in the ambient coordinates. Covers the
// cylinder S^1 x R^k. Mixed 2-planes in a product are flat, so the
// curvature sup is max(0, max over factors).

class Product final : public Manifold {
public:
  Product(std::string id, std::vector<std::unique_ptr<Manifold>> factors)
      : Manifold(std::move(id), total_ambient(factors), total_intrinsic(factors),
                 product_curvature(factors), min_tube(factors), min_loop(factors)),
        factors_(std::move(factors)) {
    int off = 0;
    for (const auto& f : factors_) {
      offsets_.push_back(off);
      off += f->ambient_dim();
    }
  }

  void retract(std::span<const double> y, std::span<double> out) const override {
    for (std::size_t i = 0; i < factors_.size(); ++i)
      factors_[i]->retract(y.subspan(offsets_[i], factors_[i]->ambient_dim()),
                           out.subspan(offsets_[i], factors_[i]->ambient_dim()));
  }

  void tangent_project(std::span<const double> p, std::span<const double> v,
                       std::span<double> out) const override {
    for (std::size_t i = 0; i < factors_.size(); ++i)
      factors_[i]->tangent_project(p.subspan(offsets_[i], factors_[i]->ambient_dim()),
                                   v.subspan(offsets_[i], factors_[i]->ambient_dim()),
                                   out.subspan(offsets_[i], factors_[i]->ambient_dim()));
  }

  void exp_map(std::span<const double> p, std::span<const double> x,
               std::span<double> out) const override {
    for (std::size_t i = 0; i < factors_.size(); ++i)
      factors_[i]->exp_map(p.subspan(offsets_[i], factors_[i]->ambient_dim()),
                           x.subspan(offsets_[i], factors_[i]->ambient_dim()),
                           out.subspan(offsets_[i], factors_[i]->ambient_dim()));
  }

  void log_map(std::span<const double> p, std::span<const double> q,
               std::span<double> out) const override {
    for (std::size_t i = 0; i < factors_.size(); ++i)
      factors_[i]->log_map(p.subspan(offsets_[i], factors_[i]->ambient_dim()),
                           q.subspan(offsets_[i], factors_[i]->ambient_dim()),
                           out.subspan(offsets_[i], factors_[i]->ambient_dim()));
  }

  void second_fundamental_form(std::span<const double> p, std::span<const double> x,
                               std::span<const double> y, std::span<double> out) const override {
    for (std::size_t i = 0; i < factors_.size(); ++i)
      factors_[i]->second_fundamental_form(p.subspan(offsets_[i], factors_[i]->ambient_dim()),
                                           x.subspan(offsets_[i], factors_[i]->ambient_dim()),
                                           y.subspan(offsets_[i], factors_[i]->ambient_dim()),
                                           out.subspan(offsets_[i], factors_[i]->ambient_dim()));
  }

  double geodesic_distance(std::span<const double> p, std::span<const double> q) const override {
    double s = 0.0;
    for (std::size_t i = 0; i < factors_.size(); ++i) {
      const double d = factors_[i]->geodesic_distance(
          p.subspan(offsets_[i], factors_[i]->ambient_dim()),
          q.subspan(offsets_[i], factors_[i]->ambient_dim()));
      s += d * d;
    }
    return std::sqrt(s);
  }

private:
  static int total_ambient(const std::vector<std::unique_ptr<Manifold>>& fs) {
    int n = 0;
    for (const auto& f : fs) n += f->ambient_dim();
    return n;
  }
  static int total_intrinsic(const std::vector<std::unique_ptr<Manifold>>& fs) {
    int n = 0;
    for (const auto& f : fs) n += f->intrinsic_dim();
    return n;
  }
  static double product_curvature(const std::vector<std::unique_ptr<Manifold>>& fs) {
    double k = 0.0;
    for (const auto& f : fs) k = std::max(k, f->curvature_sup());
    return k;
  }
  static double min_tube(const std::vector<std::unique_ptr<Manifold>>& fs) {
    double t = kInf;
    for (const auto& f : fs) t = std::min(t, f->tube_radius());
    return t;
  }
  static double min_loop(const std::vector<std::unique_ptr<Manifold>>& fs) {
    double l = kInf;
    for (const auto& f : fs) l = std::min(l, f->geodesic_loop_inf());
    return l;
  }

  std::vector<std::unique_ptr<Manifold>> factors_;
  std::vector<int> offsets_;
};

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) parts.push_back(item);
  return parts;
}

int parse_positive_int(const std::string& s, const std::string& what) {
  try {
    std::size_t pos = 0;
    int v = std::stoi(s, &pos);
    if (pos != s.size() || v <= 0) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("manifold: bad " + what + " '" + s + "'");
  }
}

double parse_positive_real(const std::string& s, const std::string& what) {
  try {
    std::size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size() || !(v > 0.0)) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("manifold: bad " + what + " '" + s + "'");
  }
}

}  // namespace

std::unique_ptr<Manifold> make_manifold(const std::string& id) {
  const auto parts = split(id, ':');
  if (parts.empty()) throw ConfigError("manifold: empty identifier");
  const std::string& kind = parts[0];
  if (kind == "euclidean") {
    if (parts.size() != 2) throw ConfigError("manifold: expected euclidean:k, got '" + id + "'");
    const int k = parse_positive_int(parts[1], "dimension");
    if (k > kMaxAmbientDim) throw ConfigError("manifold: euclidean dimension too large");
    return std::make_unique<Euclidean>(k);
  }
  if (kind == "circle") {
    if (parts.size() != 1) throw ConfigError("manifold: 'circle' takes no parameters");
    return std::make_unique<Sphere>("circle", 2, 1.0);
  }
  if (kind == "sphere") {
    if (parts.size() != 3) throw ConfigError("manifold: expected sphere:N:r, got '" + id + "'");
    const int n = parse_positive_int(parts[1], "ambient dimension");
    if (n < 2 || n > kMaxAmbientDim) throw ConfigError("manifold: sphere ambient dimension out of range");
    const double r = parse_positive_real(parts[2], "radius");
    return std::make_unique<Sphere>(id, n, r);
  }
  if (kind == "cylinder") {
    if (parts.size() != 2) throw ConfigError("manifold: expected cylinder:k, got '" + id + "'");
    const int k = parse_positive_int(parts[1], "flat dimension");
    if (2 + k > kMaxAmbientDim) throw ConfigError("manifold: cylinder dimension too large");
    std::vector<std::unique_ptr<Manifold>> fs;
    fs.push_back(std::make_unique<Sphere>("circle", 2, 1.0));
    fs.push_back(std::make_unique<Euclidean>(k));
    return std::make_unique<Product>(id, std::move(fs));
  }
  if (kind == "so3") {
    if (parts.size() != 1) throw ConfigError("manifold: 'so3' takes no parameters");
    return std::make_unique<SpecialOrthogonal3>();
  }
  throw ConfigError("manifold: unknown identifier '" + id + "'");
}

}  // namespace tvflow
