#include "tvflow/convexdom.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace tvflow {

namespace {

constexpr double kPi = 3.14159265358979323846264338327950288;

// Gauss-Legendre nodes/weights of order 8 on [-1, 1]
constexpr double kGlNode[8] = {-0.9602898564975363, -0.7966664774136267, -0.5255324099163290,
                               -0.1834346424956498, 0.1834346424956498,  0.5255324099163290,
                               0.7966664774136267,  0.9602898564975363};
constexpr double kGlWeight[8] = {0.1012285362903763, 0.2223810344533745, 0.3137066458778873,
                                 0.3626837833783620, 0.3626837833783620, 0.3137066458778873,
                                 0.2223810344533745, 0.1012285362903763};

double dot_m(const double* a, const double* b, int m) {
  double s = 0.0;
  for (int i = 0; i < m; ++i) s += a[i] * b[i];
  return s;
}

// Gaussian elimination with partial pivoting; returns false when singular.
bool solve_dense(std::vector<double> a, std::vector<double> b, int n, std::vector<double>& x) {
  for (int col = 0; col < n; ++col) {
    int piv = col;
    for (int r = col + 1; r < n; ++r)
      if (std::abs(a[r * n + col]) > std::abs(a[piv * n + col])) piv = r;
    if (std::abs(a[piv * n + col]) < 1e-12) return false;
    if (piv != col) {
      for (int c = 0; c < n; ++c) std::swap(a[piv * n + c], a[col * n + c]);
      std::swap(b[piv], b[col]);
    }
    for (int r = col + 1; r < n; ++r) {
      const double f = a[r * n + col] / a[col * n + col];
      for (int c = col; c < n; ++c) a[r * n + c] -= f * a[col * n + c];
      b[r] -= f * b[col];
    }
  }
  x.assign(n, 0.0);
  for (int r = n - 1; r >= 0; --r) {
    double s = b[r];
    for (int c = r + 1; c < n; ++c) s -= a[r * n + c] * x[c];
    x[r] = s / a[r * n + r];
  }
  return true;
}

// next k-combination of indices in lexicographic order
bool next_combination(std::vector<int>& idx, int n) {
  const int k = static_cast<int>(idx.size());
  for (int i = k - 1; i >= 0; --i) {
    if (idx[i] < n - (k - i)) {
      ++idx[i];
      for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
      return true;
    }
  }
  return false;
}

}  // namespace

ConvexBody::ConvexBody(std::vector<Halfspace> halfspaces) : hs_(std::move(halfspaces)) {
  if (hs_.empty()) throw ConfigError("convex body: no halfspaces");
  m_ = static_cast<int>(hs_[0].normal.size());
  if (m_ < 1 || m_ > 3) throw ConfigError("convex body: dimension must be 1, 2 or 3");
  if (hs_.size() > 256) throw ConfigError("convex body: too many halfspaces");
  for (auto& h : hs_) {
    if (static_cast<int>(h.normal.size()) != m_)
      throw ConfigError("convex body: inconsistent halfspace dimensions");
    const double nrm = std::sqrt(dot_m(h.normal.data(), h.normal.data(), m_));
    if (nrm < 1e-12) throw ConfigError("convex body: zero normal");
    for (auto& v : h.normal) v /= nrm;
    h.offset /= nrm;
  }
  const int n = static_cast<int>(hs_.size());

  // recession cone must be trivial: check rank and extreme-ray candidates
  {
    auto cone_feasible = [&](const double* d) {
      for (const auto& h : hs_)
        if (dot_m(h.normal.data(), d, m_) > 1e-10) return false;
      return true;
    };
    std::vector<std::vector<double>> candidates;
    if (m_ == 1) {
      candidates.push_back({1.0});
    } else if (m_ == 2) {
      for (const auto& h : hs_) candidates.push_back({-h.normal[1], h.normal[0]});
    } else {
      for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
          const auto& a = hs_[i].normal;
          const auto& b = hs_[j].normal;
          candidates.push_back({a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2],
                                a[0] * b[1] - a[1] * b[0]});
        }
      // rank < 3 leaves a whole line in the cone
      bool rank3 = false;
      std::vector<int> idx = {0, 1, 2};
      if (n >= 3) {
        do {
          const auto& a = hs_[idx[0]].normal;
          const auto& b = hs_[idx[1]].normal;
          const auto& c = hs_[idx[2]].normal;
          const double det = a[0] * (b[1] * c[2] - b[2] * c[1]) -
                             a[1] * (b[0] * c[2] - b[2] * c[0]) +
                             a[2] * (b[0] * c[1] - b[1] * c[0]);
          if (std::abs(det) > 1e-9) {
            rank3 = true;
            break;
          }
        } while (next_combination(idx, n));
      }
      if (!rank3) throw ConfigError("convex body: unbounded (normals do not span R^3)");
    }
    if (m_ == 2) {
      // rank check: all normals parallel leaves a line
      bool rank2 = false;
      for (int i = 0; i < n && !rank2; ++i)
        for (int j = i + 1; j < n; ++j) {
          const auto& a = hs_[i].normal;
          const auto& b = hs_[j].normal;
          if (std::abs(a[0] * b[1] - a[1] * b[0]) > 1e-9) {
            rank2 = true;
            break;
          }
        }
      if (!rank2 && n >= 2) throw ConfigError("convex body: unbounded (normals do not span R^2)");
      if (n < 2) throw ConfigError("convex body: unbounded");
    }
    for (const auto& cand : candidates) {
      double nn = std::sqrt(dot_m(cand.data(), cand.data(), m_));
      if (nn < 1e-12) continue;
      std::vector<double> d = cand;
      for (auto& v : d) v /= nn;
      std::vector<double> neg = d;
      for (auto& v : neg) v = -v;
      if (cone_feasible(d.data()) || cone_feasible(neg.data()))
        throw ConfigError("convex body: unbounded (nontrivial recession direction)");
    }
  }

  // vertex enumeration over m-subsets
  {
    std::vector<int> idx(m_);
    for (int i = 0; i < m_; ++i) idx[i] = i;
    if (n >= m_) {
      do {
        std::vector<double> a(m_ * m_), b(m_), x;
        for (int r = 0; r < m_; ++r) {
          for (int c = 0; c < m_; ++c) a[r * m_ + c] = hs_[idx[r]].normal[c];
          b[r] = hs_[idx[r]].offset;
        }
        if (!solve_dense(a, b, m_, x)) continue;
        bool feasible = true;
        for (const auto& h : hs_)
          if (dot_m(h.normal.data(), x.data(), m_) > h.offset + 1e-9) {
            feasible = false;
            break;
          }
        if (feasible) vertices_.push_back(x);
      } while (next_combination(idx, n));
    }
    if (vertices_.empty()) throw ConfigError("convex body: empty (no feasible vertex)");
  }

  // Chebyshev center: maximize r with  a_i . x + r <= b_i  over (m+1)-subsets
  {
    const int k = m_ + 1;
    double best_r = -std::numeric_limits<double>::infinity();
    std::vector<double> best_x;
    std::vector<int> idx(k);
    for (int i = 0; i < k; ++i) idx[i] = i;
    if (n >= k) {
      do {
        std::vector<double> a(k * k), b(k), x;
        for (int r = 0; r < k; ++r) {
          for (int c = 0; c < m_; ++c) a[r * k + c] = hs_[idx[r]].normal[c];
          a[r * k + m_] = 1.0;
          b[r] = hs_[idx[r]].offset;
        }
        if (!solve_dense(a, b, k, x)) continue;
        bool feasible = true;
        for (const auto& h : hs_)
          if (dot_m(h.normal.data(), x.data(), m_) + x[m_] > h.offset + 1e-9) {
            feasible = false;
            break;
          }
        if (feasible && x[m_] > best_r) {
          best_r = x[m_];
          best_x.assign(x.begin(), x.begin() + m_);
        }
      } while (next_combination(idx, n));
    }
    if (!(best_r > 0.0)) throw ConfigError("convex body: empty interior");
    inradius_ = best_r;
    center_ = best_x;
  }
}

double ConvexBody::signed_distance(std::span<const double> x) const {
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& h : hs_)
    worst = std::max(worst, dot_m(h.normal.data(), x.data(), m_) - h.offset);
  if (worst <= 0.0) return worst;  // inside: max signed plane distance
  const auto y = project(x);
  double s = 0.0;
  for (int i = 0; i < m_; ++i) {
    const double d = x[i] - y[i];
    s += d * d;
  }
  return std::sqrt(s);
}

std::vector<double> ConvexBody::project(std::span<const double> x) const {
  const int n = static_cast<int>(hs_.size());
  std::vector<double> margin(n);  // a_i . x - b_i (also distance to plane i)
  bool inside = true;
  for (int i = 0; i < n; ++i) {
    margin[i] = dot_m(hs_[i].normal.data(), x.data(), m_) - hs_[i].offset;
    if (margin[i] > 0.0) inside = false;
  }
  if (inside) return std::vector<double>(x.begin(), x.end());

  double best = std::numeric_limits<double>::infinity();
  std::vector<double> best_y(x.begin(), x.end());

  // active sets of size 1..m; a subset living on plane i is at least
  // |margin[i]| away, which prunes against the best found so far
  std::vector<int> idx;
  for (int size = 1; size <= m_; ++size) {
    idx.assign(size, 0);
    for (int i = 0; i < size; ++i) idx[i] = i;
    if (n < size) break;
    do {
      double lower = 0.0;
      for (int i : idx) lower = std::max(lower, std::abs(margin[i]));
      if (lower >= best) continue;
      // solve (A_S A_S^T) lambda = A_S x - b_S
      std::vector<double> gram(size * size), rhs(size), lambda;
      for (int r = 0; r < size; ++r) {
        rhs[r] = margin[idx[r]];
        for (int c = 0; c < size; ++c)
          gram[r * size + c] = dot_m(hs_[idx[r]].normal.data(), hs_[idx[c]].normal.data(), m_);
      }
      if (!solve_dense(gram, rhs, size, lambda)) continue;
      bool kkt = true;
      for (double l : lambda)
        if (l < -1e-12) {
          kkt = false;
          break;
        }
      if (!kkt) continue;
      std::vector<double> y(x.begin(), x.end());
      for (int r = 0; r < size; ++r)
        for (int c = 0; c < m_; ++c) y[c] -= lambda[r] * hs_[idx[r]].normal[c];
      bool feasible = true;
      for (const auto& h : hs_)
        if (dot_m(h.normal.data(), y.data(), m_) > h.offset + 1e-9) {
          feasible = false;
          break;
        }
      if (!feasible) continue;
      double d2 = 0.0;
      for (int c = 0; c < m_; ++c) {
        const double d = x[c] - y[c];
        d2 += d * d;
      }
      const double dist = std::sqrt(d2);
      if (dist < best) {
        best = dist;
        best_y = y;
      }
    } while (next_combination(idx, n));
  }
  return best_y;
}

// ---------------------------------------------------------------------------
// mollified distance

namespace {

struct BumpRule {
  std::vector<std::vector<double>> offsets;  // quadrature points in B(0, eps)
  std::vector<double> weights;               // kernel * quadrature weight, normalized
};

BumpRule build_rule(int m, double eps) {
  BumpRule rule;
  const int npts = m == 1 ? 8 : (m == 2 ? 64 : 512);
  rule.offsets.reserve(npts);
  rule.weights.reserve(npts);
  double total = 0.0;
  int counter[3] = {0, 0, 0};
  const int count = static_cast<int>(std::pow(8, m));
  for (int lin = 0; lin < count; ++lin) {
    int rem = lin;
    std::vector<double> y(m);
    double w = 1.0;
    for (int d = 0; d < m; ++d) {
      counter[d] = rem % 8;
      rem /= 8;
      y[d] = eps * kGlNode[counter[d]];
      w *= kGlWeight[counter[d]];
    }
    double r2 = 0.0;
    for (int d = 0; d < m; ++d) r2 += (y[d] / eps) * (y[d] / eps);
    if (r2 >= 1.0) continue;  // bump vanishes outside the ball
    const double phi = std::exp(-1.0 / (1.0 - r2));
    rule.offsets.push_back(std::move(y));
    rule.weights.push_back(w * phi);
    total += w * phi;
  }
  for (auto& w : rule.weights) w /= total;
  return rule;
}

double mollified_with_rule(const ConvexBody& body, const BumpRule& rule,
                           std::span<const double> x) {
  const int m = body.dim();
  double acc = 0.0;
  std::vector<double> p(m);
  for (std::size_t i = 0; i < rule.offsets.size(); ++i) {
    for (int d = 0; d < m; ++d) p[d] = x[d] - rule.offsets[i][d];
    acc += rule.weights[i] * body.signed_distance(std::span<const double>(p.data(), m));
  }
  return acc;
}

void check_eps(const ConvexBody& body, double eps) {
  if (!(eps > 0.0) || !(eps < body.inradius() / 3.0))
    throw EpsilonTooLarge("mollified distance needs eps in (0, r_Omega/3); r_Omega = " +
                          std::to_string(body.inradius()));
}

}  // namespace

double mollified_distance(const ConvexBody& body, double eps, std::span<const double> x) {
  check_eps(body, eps);
  const BumpRule rule = build_rule(body.dim(), eps);
  return mollified_with_rule(body, rule, x);
}

std::vector<std::uint8_t> inner_domain(const ConvexBody& body, double eps, const GridDomain& grid) {
  check_eps(body, eps);
  if (grid.dim() != body.dim()) throw ConfigError("inner_domain: grid and body dimensions differ");
  const BumpRule rule = build_rule(body.dim(), eps);
  const auto& n = grid.extents();
  const double h = grid.spacing();
  std::vector<std::uint8_t> mask(grid.cell_count(), 0);
  std::size_t count = 0;
  std::vector<double> center(body.dim());
  for (std::size_t c = 0; c < grid.cell_count(); ++c) {
    std::size_t rem = c;
    for (int d = 0; d < body.dim(); ++d) {
      center[d] = (static_cast<double>(rem % n[d]) + 0.5) * h;
      rem /= n[d];
    }
    const double de = mollified_with_rule(body, rule, std::span<const double>(center.data(), body.dim()));
    if (de < -eps) {
      mask[c] = 1;
      ++count;
    }
  }
  if (count == 0) throw EmptyMask("inner_domain: no cell center satisfies d_eps < -eps");
  return mask;
}

AuditReport hausdorff_audit(const ConvexBody& body, double eps,
                            const std::vector<std::uint8_t>& mask, const GridDomain& grid) {
  const auto& n = grid.extents();
  const auto st = grid.strides();
  const double h = grid.spacing();
  const int m = body.dim();

  AuditReport rep;
  rep.name = "convex_approx";
  rep.bound = 2.0 * eps + h * std::sqrt(static_cast<double>(m));
  rep.tolerance = 0.0;

  double worst_inner = 0.0;             // max over boundary cells of -d(center)
  double worst_violation = -1e300;      // max over inside cells of d(center), must stay < 0
  std::vector<double> center(m);
  for (std::size_t c = 0; c < grid.cell_count(); ++c) {
    if (!mask[c]) continue;
    std::size_t rem = c;
    int coord[3] = {0, 0, 0};
    for (int d = 0; d < m; ++d) {
      coord[d] = static_cast<int>(rem % n[d]);
      rem /= n[d];
      center[d] = (coord[d] + 0.5) * h;
    }
    const double dval = body.signed_distance(std::span<const double>(center.data(), m));
    worst_violation = std::max(worst_violation, dval);
    bool boundary = false;
    for (int d = 0; d < m && !boundary; ++d) {
      if (coord[d] == 0 || coord[d] == n[d] - 1)
        boundary = true;
      else if (!mask[c - st[d]] || !mask[c + st[d]])
        boundary = true;
    }
    if (boundary) worst_inner = std::max(worst_inner, -dval);
  }

  rep.measured = worst_inner;
  const bool subset_ok = worst_violation < 0.0;
  rep.pass = subset_ok && worst_inner < rep.bound;
  rep.details = subset_ok ? "Omega_eps inside Omega at every cell center"
                          : "cell center outside Omega found";
  return rep;
}

ConvexBody load_body(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("body file '" + path + "' cannot be opened");
  int m = 0;
  in >> m;
  if (!in || m < 1 || m > 3) throw ConfigError("body file '" + path + "': bad dimension line");
  std::vector<Halfspace> hs;
  while (true) {
    Halfspace h;
    h.normal.resize(m);
    for (int d = 0; d < m; ++d) in >> h.normal[d];
    in >> h.offset;
    if (!in) break;
    hs.push_back(std::move(h));
  }
  if (hs.empty()) throw ConfigError("body file '" + path + "': no halfspaces");
  return ConvexBody(std::move(hs));
}

ConvexBody make_box(const std::vector<double>& lo, const std::vector<double>& hi) {
  const int m = static_cast<int>(lo.size());
  std::vector<Halfspace> hs;
  for (int d = 0; d < m; ++d) {
    Halfspace plus, minus;
    plus.normal.assign(m, 0.0);
    plus.normal[d] = 1.0;
    plus.offset = hi[d];
    minus.normal.assign(m, 0.0);
    minus.normal[d] = -1.0;
    minus.offset = -lo[d];
    hs.push_back(std::move(plus));
    hs.push_back(std::move(minus));
  }
  return ConvexBody(std::move(hs));
}

ConvexBody make_regular_polygon(int sides, double cx, double cy, double circumradius) {
  std::vector<Halfspace> hs;
  const double apothem = circumradius * std::cos(kPi / sides);
  for (int i = 0; i < sides; ++i) {
    const double ang = 2.0 * kPi * (i + 0.5) / sides;
    Halfspace h;
    h.normal = {std::cos(ang), std::sin(ang)};
    h.offset = apothem + cx * h.normal[0] + cy * h.normal[1];
    hs.push_back(std::move(h));
  }
  return ConvexBody(std::move(hs));
}

ConvexBody make_triangle() {
  std::vector<Halfspace> hs;
  hs.push_back({{0.0, -1.0}, 0.0});
  hs.push_back({{-1.0, 0.0}, 0.0});
  const double s = std::sqrt(0.5);
  hs.push_back({{s, s}, s});
  return ConvexBody(std::move(hs));
}

}  // namespace tvflow
