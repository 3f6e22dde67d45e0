#pragma once

#include <complex>
#include <cstddef>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "nlslab/model.hpp"

namespace nlslab {

enum class GridKind { interval, radial };

std::string to_string(GridKind kind);
GridKind grid_kind_from_string(const std::string& name);

/// Uniform nodes on [-R, R] (interval, N = 1) or on [0, R] for radially
/// symmetric fields in dimension N. Dirichlet nodes: both interval ends, the
/// outer radius of a radial grid.
///
/// Quadrature weights: trapezoid for intervals; for radial grids
/// |S^{N-1}| r_i^{N-1} h in the interior, the half-cell |S^{N-1}| R^{N-1} h/2 at
/// the outer node and the finite-volume ball |S^{N-1}| (h/2)^N / N at the
/// origin. With these weights the discrete radial Laplacian is self-adjoint.
class Grid {
 public:
  static constexpr std::size_t min_nodes = 16;

  /// Throws LabError(invalid_domain).
  static std::shared_ptr<const Grid> build(GridKind kind, int dim, double radius, std::size_t n);

  GridKind kind() const { return kind_; }
  int dim() const { return dim_; }
  double radius() const { return radius_; }
  std::size_t size() const { return nodes_.size(); }
  double spacing() const { return h_; }

  double node(std::size_t i) const { return nodes_[i]; }
  std::span<const double> nodes() const { return nodes_; }
  double weight(std::size_t i) const { return weights_[i]; }
  std::span<const double> weights() const { return weights_; }

  /// |x| at node i.
  double abs_coord(std::size_t i) const { return kind_ == GridKind::interval ? std::abs(nodes_[i]) : nodes_[i]; }
  bool is_boundary(std::size_t i) const;

  /// Surface measure of the unit sphere S^{N-1} (2 for N = 1).
  double sphere_measure() const { return sphere_measure_; }

 private:
  Grid() = default;

  GridKind kind_ = GridKind::interval;
  int dim_ = 1;
  double radius_ = 1.0;
  double h_ = 0.0;
  double sphere_measure_ = 2.0;
  std::vector<double> nodes_;
  std::vector<double> weights_;
};

using GridPtr = std::shared_ptr<const Grid>;

double unit_sphere_measure(int dim);

/// Complex nodal values bound to a grid. Copies are deep for values and
/// share the (immutable) grid.
class ComplexField {
 public:
  ComplexField() = default;
  explicit ComplexField(GridPtr grid);
  ComplexField(GridPtr grid, std::vector<cplx> values);

  const GridPtr& grid_ptr() const { return grid_; }
  const Grid& grid() const { return *grid_; }
  std::size_t size() const { return values_.size(); }

  cplx& operator[](std::size_t i) { return values_[i]; }
  cplx operator[](std::size_t i) const { return values_[i]; }
  std::span<cplx> values() { return values_; }
  std::span<const cplx> values() const { return values_; }

  double max_abs() const;
  /// Sets Dirichlet nodes to zero.
  void apply_dirichlet();

  ComplexField& operator+=(const ComplexField& other);
  ComplexField& operator-=(const ComplexField& other);
  ComplexField& operator*=(cplx s);

 private:
  GridPtr grid_;
  std::vector<cplx> values_;
};

ComplexField operator+(ComplexField lhs, const ComplexField& rhs);
ComplexField operator-(ComplexField lhs, const ComplexField& rhs);
ComplexField operator*(cplx s, ComplexField f);

/// Weighted inner product sum_i w_i f_i conj(g_i).
cplx inner(const ComplexField& f, const ComplexField& g);
/// Discrete L^q norm, q in [1, inf]; pass std::numeric_limits<double>::infinity() for sup.
double lq_norm(const ComplexField& f, double q);
double l2_norm(const ComplexField& f);

/// Weights of the ball B(x0, rho) intersected with the grid domain.
/// Interval grids integrate the piecewise-linear interpolant exactly; radial
/// grids take the linear fraction of each node's dual cell. x0 must be 0 on
/// radial grids (LabError(center_unsupported)).
std::vector<double> ball_weights(const Grid& grid, double rho, double x0 = 0.0);

double integrate_ball(const Grid& grid, std::span<const double> values, double rho, double x0 = 0.0);
cplx integrate_ball(const ComplexField& field, double rho, double x0 = 0.0);

/// Radial (interval: x-) derivative. Centered in the interior, one-sided at
/// the Dirichlet ends, zero at a radial origin.
ComplexField gradient(const ComplexField& field);

/// Linear interpolation at coordinate x (signed for intervals, r >= 0 for
/// radial grids); zero outside the grid.
cplx interpolate(const ComplexField& field, double x);

/// Flux g conj(∂_r g) integrated over the sphere S(x0, rho). On intervals the
/// sphere is the two points x0 +- rho with outward normals +-1. Requires
/// 0 <= rho < R (LabError(out_of_range)).
cplx shell_flux(const ComplexField& g, double rho, double x0 = 0.0);
/// Same, but shell points outside the domain contribute zero (g vanishes there).
cplx shell_flux_extended(const ComplexField& g, double rho, double x0 = 0.0);

/// Tridiagonal complex operator -Δ_h + diag(d) on a grid with Dirichlet rows.
/// apply() returns zero on Dirichlet nodes; solve() enforces zero there.
class LinearOperator {
 public:
  LinearOperator() = default;

  const GridPtr& grid_ptr() const { return grid_; }
  const Grid& grid() const { return *grid_; }
  int stencil_order() const { return 2; }

  std::span<const cplx> lower() const { return lower_; }
  std::span<const cplx> diag() const { return diag_; }
  std::span<const cplx> upper() const { return upper_; }

  ComplexField apply(const ComplexField& f) const;
  /// Throws LabError(singular_operator) when the factorization breaks down.
  ComplexField solve(const ComplexField& rhs) const;

  /// Copy of this operator with `shift` added to the diagonal.
  LinearOperator shifted(std::span<const cplx> shift) const;
  /// Copy of this operator scaled by s and shifted by s0 on the diagonal:
  /// s * L + s0 * I.
  LinearOperator affine(cplx s, cplx s0) const;

 private:
  friend LinearOperator assemble_operator(const GridPtr& grid, cplx b, cplx c);

  GridPtr grid_;
  std::vector<cplx> lower_;  // lower_[i] couples row i+1 to column i
  std::vector<cplx> diag_;
  std::vector<cplx> upper_;  // upper_[i] couples row i to column i+1
};

/// -Δ_h + b + c |x|^2 with second-order centered stencil; on radial grids the
/// conservative form of -(r^{1-N}(r^{N-1} f')') with even reflection at r = 0.
LinearOperator assemble_operator(const GridPtr& grid, cplx b, cplx c);

/// -Δ_h f (zero on Dirichlet nodes).
ComplexField neg_laplacian(const ComplexField& f);

/// Smallest eigenvalue of the Dirichlet -Δ_h by inverse power iteration.
/// Throws LabError(convergence_failure).
double smallest_eigenvalue(const Grid& grid, double tol = 1e-10, int max_iter = 500);

/// CSV with header "x,re,im"; values printed with 17 significant digits.
void write_field_csv(std::ostream& os, const ComplexField& f);
void write_field_csv(const std::string& path, const ComplexField& f);

struct FieldSample {
  double x;
  cplx value;
};
std::vector<FieldSample> read_field_csv(std::istream& is);
std::vector<FieldSample> read_field_csv(const std::string& path);

/// Field on `grid` sampled by linear interpolation of tabulated values.
ComplexField field_from_samples(const GridPtr& grid, std::span<const FieldSample> samples);

}  // namespace nlslab
