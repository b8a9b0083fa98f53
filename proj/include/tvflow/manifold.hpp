#pragma once

#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tvflow/errors.hpp"

namespace tvflow {

// Largest ambient dimension across implemented targets (SO(3) in R^9).
inline constexpr int kMaxAmbientDim = 9;

// An isometrically embedded target manifold. Points and vectors are plain
// ambient coordinate arrays of length ambient_dim(); tangency is relative to
// a base point. All operations are pure and safe to call concurrently.
class Manifold {
public:
  virtual ~Manifold() = default;

  const std::string& name() const { return name_; }
  int ambient_dim() const { return ambient_dim_; }
  int intrinsic_dim() const { return intrinsic_dim_; }
  // sup of sectional curvature over the manifold (0 for flat and
  // one-dimensional targets, where no 2-plane exists)
  double curvature_sup() const { return curvature_sup_; }
  // radius within which the closest-point retraction is well defined
  double tube_radius() const { return tube_radius_; }
  // infimum length of closed geodesics through a point (inf if none)
  double geodesic_loop_inf() const { return geodesic_loop_inf_; }

  // Closest point of the manifold; exact fixed point for inputs already on it.
  // Throws OutsideTube when no unique closest point exists.
  virtual void retract(std::span<const double> y, std::span<double> out) const = 0;

  // Orthogonal projection of v onto the tangent space at p (p on manifold).
  virtual void tangent_project(std::span<const double> p, std::span<const double> v,
                               std::span<double> out) const = 0;

  // v minus its tangential part.
  void normal_project(std::span<const double> p, std::span<const double> v,
                      std::span<double> out) const;

  virtual void exp_map(std::span<const double> p, std::span<const double> x,
                       std::span<double> out) const = 0;

  // Throws CutLocus for antipodal q / rotation angle pi.
  virtual void log_map(std::span<const double> p, std::span<const double> q,
                       std::span<double> out) const = 0;

  virtual double geodesic_distance(std::span<const double> p, std::span<const double> q) const;

  // A_p(X, Y), normal-valued, symmetric bilinear. The default differentiates
  // the tangent projector field by centered differences (step 1e-5 * |X|);
  // targets with a closed form override it.
  virtual void second_fundamental_form(std::span<const double> p, std::span<const double> x,
                                       std::span<const double> y, std::span<double> out) const;

  // Gauss-Codazzi: K = [A(X,X).A(Y,Y) - |A(X,Y)|^2] / (|X|^2|Y|^2 - (X.Y)^2).
  // Throws DegeneratePlane when the denominator vanishes.
  double sectional_curvature(std::span<const double> p, std::span<const double> x,
                             std::span<const double> y) const;

  // (R_*, R~_*) of the extinction theory:
  //   R_* = min( (pi/2) [K]_+^{-1/2}, l(p0)/4 ),   R~_* = R_*/2.
  // All implemented targets are homogeneous, so the infimum of R_* over the
  // ball B(p0, R_*) equals R_*(p0).
  std::pair<double, double> critical_radius(std::span<const double> p0) const;

  // Tangent projector as a dense ambient_dim x ambient_dim row-major matrix.
  void tangent_projector_matrix(std::span<const double> p, double* mat) const;

  // Batch forms used by the flow loop; defaults loop over cells.
  virtual void retract_cells(double* values, std::size_t ncells) const;
  virtual void tangent_project_cells(const double* base, const double* v, double* out,
                                     std::size_t ncells) const;

  // Flat targets short-circuit retraction/projection in the flow.
  virtual bool is_flat() const { return false; }

protected:
  Manifold(std::string name, int ambient, int intrinsic, double curvature_sup,
           double tube_radius, double loop_inf)
      : name_(std::move(name)),
        ambient_dim_(ambient),
        intrinsic_dim_(intrinsic),
        curvature_sup_(curvature_sup),
        tube_radius_(tube_radius),
        geodesic_loop_inf_(loop_inf) {}

private:
  std::string name_;
  int ambient_dim_;
  int intrinsic_dim_;
  double curvature_sup_;
  double tube_radius_;
  double geodesic_loop_inf_;
};

// Identifier grammar: "euclidean:k", "circle", "sphere:N:r", "cylinder:k",
// "so3". Throws ConfigError for anything else.
std::unique_ptr<Manifold> make_manifold(const std::string& id);

}  // namespace tvflow
