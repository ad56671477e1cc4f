#pragma once

// Conforming Lagrange finite elements on D = (0,1) with homogeneous
// Dirichlet boundary conditions.

#include <array>
#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <vector>

namespace momeq {

using ScalarFunction = std::function<double(double)>;

/// Partition of the closed unit interval.
struct Mesh {
  int dimension = 1;
  std::vector<double> vertices;                         // sorted, 0 and 1 included
  std::vector<std::array<std::size_t, 2>> elements;     // vertex indices
  std::vector<std::size_t> boundary_vertices;

  std::size_t element_count() const { return elements.size(); }
  double element_size(std::size_t e) const {
    return vertices[elements[e][1]] - vertices[elements[e][0]];
  }
  double max_element_size() const;
};

/// Uniform mesh of (0,1)^d with n elements per direction.
/// Only d = 1 is supported; n < 2 or d != 1 throws InvalidArgument.
Mesh build_mesh(int dimension, std::size_t n);

/// Mesh from an explicit sorted vertex list spanning [0,1].
Mesh mesh_from_vertices(std::vector<double> vertices);

/// Gauss-Legendre rule mapped to the reference element [0,1].
struct QuadratureRule {
  std::vector<double> points;
  std::vector<double> weights;
};
QuadratureRule gauss_legendre(std::size_t point_count);

/// P1 or P2 Lagrange space over a mesh.
///
/// Degrees of freedom are numbered left to right (for P2 the midpoint of
/// element e sits between its vertices), so element e owns the contiguous
/// dofs degree*e ... degree*e + degree. The quadrature uses degree+1 Gauss
/// points per element times `quadrature_refinement`; global quadrature
/// point q of element e has index e * points_per_element + q.
class FeSpace {
 public:
  FeSpace(std::shared_ptr<const Mesh> mesh, int degree,
          std::size_t quadrature_refinement = 1);

  const Mesh& mesh() const { return *mesh_; }
  const std::shared_ptr<const Mesh>& mesh_ptr() const { return mesh_; }
  int degree() const { return degree_; }
  std::size_t quadrature_refinement() const { return refinement_; }

  std::size_t dof_count() const { return dof_coordinates_.size(); }
  std::span<const double> dof_coordinates() const { return dof_coordinates_; }
  bool is_dirichlet(std::size_t dof) const {
    return dof == 0 || dof + 1 == dof_count();
  }
  std::size_t dofs_per_element() const { return static_cast<std::size_t>(degree_) + 1; }
  std::size_t element_dof(std::size_t element, std::size_t local) const {
    return static_cast<std::size_t>(degree_) * element + local;
  }

  std::size_t points_per_element() const { return reference_rule_.points.size(); }
  std::size_t quadrature_point_count() const { return qp_coordinates_.size(); }
  std::span<const double> qp_coordinates() const { return qp_coordinates_; }
  std::span<const double> qp_weights() const { return qp_weights_; }

  /// Basis value / physical derivative of local function `local` at the
  /// q-th reference quadrature point of `element`.
  double qp_shape(std::size_t q, std::size_t local) const {
    return shape_at_qp_[q * dofs_per_element() + local];
  }
  double qp_shape_gradient(std::size_t element, std::size_t q, std::size_t local) const {
    return shape_deriv_at_qp_[q * dofs_per_element() + local] / mesh_->element_size(element);
  }

  double shape(std::size_t local, double xi) const;
  double shape_derivative(std::size_t local, double xi) const;  // d/dxi on [0,1]

  /// Lowest-index element whose closed hull contains x. Throws
  /// InvalidArgument outside [0,1].
  std::size_t locate(double x) const;

 private:
  std::shared_ptr<const Mesh> mesh_;
  int degree_;
  std::size_t refinement_;
  QuadratureRule reference_rule_;
  std::vector<double> dof_coordinates_;
  std::vector<double> qp_coordinates_;
  std::vector<double> qp_weights_;
  std::vector<double> shape_at_qp_;
  std::vector<double> shape_deriv_at_qp_;
};

std::shared_ptr<const FeSpace> make_space(std::size_t elements, int degree,
                                          std::size_t quadrature_refinement = 1);

/// Coefficient vector over the dofs of a space.
class FeFunction {
 public:
  explicit FeFunction(std::shared_ptr<const FeSpace> space);
  FeFunction(std::shared_ptr<const FeSpace> space, std::vector<double> coefficients);

  const FeSpace& space() const { return *space_; }
  const std::shared_ptr<const FeSpace>& space_ptr() const { return space_; }
  std::span<const double> coefficients() const { return coefficients_; }
  std::span<double> coefficients() { return coefficients_; }
  std::vector<double>& data() { return coefficients_; }

  FeFunction& operator+=(const FeFunction& other);
  FeFunction& operator*=(double factor);

 private:
  std::shared_ptr<const FeSpace> space_;
  std::vector<double> coefficients_;
};

double evaluate(const FeFunction& fn, double x);
double evaluate_gradient(const FeFunction& fn, double x);

/// Values and gradients of `coefficients` at every global quadrature point.
std::vector<double> values_at_quadrature(const FeSpace& space,
                                         std::span<const double> coefficients);
std::vector<double> gradients_at_quadrature(const FeSpace& space,
                                            std::span<const double> coefficients);

/// Load vector v -> int f v dx, one entry per dof (boundary dofs included).
std::vector<double> assemble_source_load(const FeSpace& space, const ScalarFunction& f);

/// Load vector v -> int g v' dx for a flux g given at every quadrature point.
std::vector<double> assemble_flux_load(const FeSpace& space, std::span<const double> flux_at_qp);

struct MatrixEntry {
  std::size_t row;
  std::size_t col;
  double value;
};

/// Stiffness matrix of int a u' v' over all dofs, before boundary
/// elimination, as row-major sorted entries. An empty coefficient span
/// means a = 1.
std::vector<MatrixEntry> assemble_stiffness(const FeSpace& space,
                                            std::span<const double> coefficient_at_qp = {});

/// Factorized stiffness operator restricted to interior dofs. Immutable and
/// safe to share between threads; solve() is reentrant.
class FactorizedLaplacian {
 public:
  const FeSpace& space() const;
  const std::shared_ptr<const FeSpace>& space_ptr() const;
  std::size_t interior_count() const;
  /// Interior-dof matrix as dense row-major (diagnostics, small spaces).
  std::vector<double> interior_matrix_dense() const;

  /// Galerkin solution with zero boundary values. `load` has one entry per
  /// dof; boundary entries are ignored.
  FeFunction solve(std::span<const double> load) const;

  struct Impl;

 private:
  friend FactorizedLaplacian assemble_laplacian(std::shared_ptr<const FeSpace>);
  friend FactorizedLaplacian assemble_diffusion(std::shared_ptr<const FeSpace>,
                                                std::span<const double>);
  explicit FactorizedLaplacian(std::shared_ptr<const Impl> impl);
  std::shared_ptr<const Impl> impl_;
};

FactorizedLaplacian assemble_laplacian(std::shared_ptr<const FeSpace> space);

/// Same as assemble_laplacian with a diffusion coefficient sampled at the
/// quadrature points (used for lognormal Monte Carlo samples).
FactorizedLaplacian assemble_diffusion(std::shared_ptr<const FeSpace> space,
                                       std::span<const double> coefficient_at_qp);

FeFunction solve_dirichlet(const FactorizedLaplacian& op, std::span<const double> load);

enum class NormKind { Lp, W1pSeminorm, W1p };

/// Quadrature approximation of the Lp, W^{1,p}-seminorm or W^{1,p} norm.
double fe_norm(const FeFunction& fn, NormKind kind, double p = 2.0);

/// Norm of (fn - exact) using `points_per_element` Gauss points per element
/// of fn's mesh. `exact_gradient` is only used for the derivative kinds.
double fe_error_norm(const FeFunction& fn, const ScalarFunction& exact,
                     const ScalarFunction& exact_gradient, NormKind kind, double p = 2.0,
                     std::size_t points_per_element = 6);

/// Norm of (fn - reference) integrated with reference's quadrature. Meant
/// for a coarse fn against a finer (nested) reference.
double fe_difference_norm(const FeFunction& fn, const FeFunction& reference, NormKind kind,
                          double p = 2.0);

/// Nodal interpolant onto the space. Throws InvalidArgument on non-finite
/// values.
FeFunction fe_project(const ScalarFunction& f, std::shared_ptr<const FeSpace> space);

}  // namespace momeq
