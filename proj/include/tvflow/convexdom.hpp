#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tvflow/grid.hpp"
#include "tvflow/report.hpp"

namespace tvflow {

struct Halfspace {
  std::vector<double> normal;  // unit outward normal, m entries
  double offset = 0.0;         // inside: normal . x <= offset
};

// Bounded intersection of halfspaces with nonempty interior, m in {1,2,3}.
// Construction normalizes the normals, certifies boundedness (trivial
// recession cone, finite vertex set) and computes the inradius by the
// Chebyshev-center linear program.
class ConvexBody {
public:
  explicit ConvexBody(std::vector<Halfspace> halfspaces);

  int dim() const { return m_; }
  const std::vector<Halfspace>& halfspaces() const { return hs_; }
  const std::vector<std::vector<double>>& vertices() const { return vertices_; }
  double inradius() const { return inradius_; }
  const std::vector<double>& chebyshev_center() const { return center_; }

  // Signed distance: negative inside, zero on the boundary, positive
  // outside; 1-Lipschitz. Inside it equals the maximum of the signed plane
  // distances; outside it is the distance to the projection onto the body.
  double signed_distance(std::span<const double> x) const;

  // Euclidean projection onto the body (active-set enumeration, exact for
  // m <= 3).
  std::vector<double> project(std::span<const double> x) const;

private:
  int m_;
  std::vector<Halfspace> hs_;
  std::vector<std::vector<double>> vertices_;
  std::vector<double> center_;
  double inradius_ = 0.0;
};

// Mollified signed distance d_eps = phi_eps * d with the standard bump
// kernel supported in B(0, eps), evaluated by tensor Gauss-Legendre
// quadrature of order 8 per axis and normalized numerically. Requires
// eps in (0, r_Omega / 3); throws EpsilonTooLarge otherwise.
double mollified_distance(const ConvexBody& body, double eps, std::span<const double> x);

// Inner smooth approximant Omega_eps = { d_eps < -eps } sampled at cell
// centers (i + 1/2) h. Throws EmptyMask when no cell qualifies.
std::vector<std::uint8_t> inner_domain(const ConvexBody& body, double eps, const GridDomain& grid);

// Certifies the approximant: every inside cell has d(center) < 0 and the
// boundary layer satisfies max(-d) < 2 eps + h sqrt(m).
AuditReport hausdorff_audit(const ConvexBody& body, double eps,
                            const std::vector<std::uint8_t>& mask, const GridDomain& grid);

// body description file: first line m, then one "n_1 ... n_m offset" line per
// halfspace
ConvexBody load_body(const std::string& path);

// seeded shapes used by the audits
ConvexBody make_box(const std::vector<double>& lo, const std::vector<double>& hi);
ConvexBody make_regular_polygon(int sides, double cx, double cy, double circumradius);
ConvexBody make_triangle();  // vertices (0,0), (1,0), (0,1)

}  // namespace tvflow
