#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "tvflow/manifold.hpp"

namespace tvflow {

enum class Boundary { NeumannReflect, Periodic };

// Rectangular lattice in 1/2/3 dimensions with uniform spacing h. Cells are
// indexed x-fastest: i = x + nx*(y + ny*z); cell centers sit at (i + 1/2) h.
// An optional mask restricts the domain to a connected subset of cells
// (Neumann only).
class GridDomain {
public:
  GridDomain(std::vector<int> dims, double h, Boundary boundary);
  GridDomain(std::vector<int> dims, double h, Boundary boundary, std::vector<std::uint8_t> mask);

  int dim() const { return m_; }
  const std::array<int, 3>& extents() const { return n_; }
  double spacing() const { return h_; }
  Boundary boundary() const { return boundary_; }
  std::size_t cell_count() const { return q_; }
  bool has_mask() const { return !mask_.empty(); }
  const std::vector<std::uint8_t>& mask() const { return mask_; }
  bool inside(std::size_t c) const { return mask_.empty() || mask_[c] != 0; }
  std::size_t inside_count() const { return inside_count_; }
  // h^m, the cell measure
  double cell_measure() const;
  // strides in cells per direction
  std::array<std::size_t, 3> strides() const;

  bool same_layout(const GridDomain& other) const;

private:
  void validate_mask() const;

  int m_;
  std::array<int, 3> n_;
  double h_;
  Boundary boundary_;
  std::size_t q_;
  std::vector<std::uint8_t> mask_;
  std::size_t inside_count_;
};

// A map from grid cells into a manifold; ambient components are contiguous
// per cell.
struct Field {
  std::shared_ptr<const GridDomain> domain;
  std::shared_ptr<const Manifold> manifold;
  std::vector<double> values;  // cell_count * ambient_dim

  double* cell(std::size_t c) { return values.data() + c * manifold->ambient_dim(); }
  const double* cell(std::size_t c) const { return values.data() + c * manifold->ambient_dim(); }
  std::size_t components() const { return static_cast<std::size_t>(manifold->ambient_dim()); }

  // max over cells of |value - retract(value)|, the on-manifold residual
  double constraint_residual() const;
};

Field make_field(std::shared_ptr<const GridDomain> domain, std::shared_ptr<const Manifold> manifold);

// Per-direction plane storage shared by gradients and fluxes: plane d holds
// cell_count * N doubles.
struct DirectionalField {
  std::shared_ptr<const GridDomain> domain;
  int ncomp = 0;
  std::array<std::vector<double>, 3> planes;

  double* plane(int d) { return planes[d].data(); }
  const double* plane(int d) const { return planes[d].data(); }
};

DirectionalField make_directional(std::shared_ptr<const GridDomain> domain, int ncomp);

// Forward differences (u[c+e_d] - u[c]) / h. Upper boundary: zero under
// NeumannReflect (replicated ghost), wrap under Periodic; differences across
// masked-out neighbours are zero, and masked-out cells carry zero gradient.
void gradient(const Field& u, DirectionalField& out);

// Exact negative adjoint of gradient under the cell-sum inner product:
// <div Z, w> = -<Z, grad w> for every w, any boundary mode, with or without
// mask. out has cell_count * N entries.
void divergence(const DirectionalField& z, std::vector<double>& out);

// Full Frobenius norm squared of the gradient per cell (over m directions
// and N components).
void gradient_sqnorm(const DirectionalField& g, std::vector<double>& g2);

// Z_d = (grad u)_d / sqrt(eps^2 + |grad u|^2). Strictly |Z| < 1.
void regularized_flux(const Field& u, double eps, DirectionalField& z);
// variant that reuses a precomputed gradient and its squared norm
void regularized_flux(const DirectionalField& g, const std::vector<double>& g2, double eps,
                      DirectionalField& z);

// h^m sum over inside cells of sqrt(eps^2 + |grad u|^2); eps = 0 gives the
// discrete total variation.
double tv_energy(const Field& u, double eps);

// sup over inside cells of sqrt(eps^2 + |grad u|^2)
double sup_v(const Field& u, double eps);

// inner products over inside cells (used by adjointness checks)
double field_inner(const GridDomain& d, int ncomp, const double* a, const double* b);
double directional_inner(const DirectionalField& a, const DirectionalField& b);

}  // namespace tvflow
