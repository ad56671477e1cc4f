#include "momeq/fem.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "momeq/errors.hpp"

namespace momeq {

double Mesh::max_element_size() const {
  double h = 0.0;
  for (std::size_t e = 0; e < element_count(); ++e) h = std::max(h, element_size(e));
  return h;
}

Mesh build_mesh(int dimension, std::size_t n) {
  if (dimension != 1) {
    throw InvalidArgument("build_mesh: only d = 1 is supported, got d = " +
                          std::to_string(dimension));
  }
  if (n < 2) throw InvalidArgument("build_mesh: need at least 2 elements");
  std::vector<double> vertices(n + 1);
  for (std::size_t i = 0; i <= n; ++i) vertices[i] = static_cast<double>(i) / static_cast<double>(n);
  return mesh_from_vertices(std::move(vertices));
}

Mesh mesh_from_vertices(std::vector<double> vertices) {
  if (vertices.size() < 3) throw InvalidArgument("mesh: need at least 2 elements");
  if (vertices.front() != 0.0 || vertices.back() != 1.0) {
    throw InvalidArgument("mesh: vertices must span [0,1]");
  }
  for (std::size_t i = 1; i < vertices.size(); ++i) {
    if (!(vertices[i] > vertices[i - 1])) throw InvalidArgument("mesh: vertices must be strictly increasing");
  }
  Mesh mesh;
  mesh.dimension = 1;
  mesh.vertices = std::move(vertices);
  const std::size_t n = mesh.vertices.size() - 1;
  mesh.elements.reserve(n);
  for (std::size_t e = 0; e < n; ++e) mesh.elements.push_back({e, e + 1});
  mesh.boundary_vertices = {0, n};
  return mesh;
}

QuadratureRule gauss_legendre(std::size_t point_count) {
  if (point_count == 0) throw InvalidArgument("gauss_legendre: need at least one point");
  // Newton iteration on P_n, then map [-1,1] -> [0,1].
  QuadratureRule rule;
  rule.points.resize(point_count);
  rule.weights.resize(point_count);
  const std::size_t n = point_count;
  for (std::size_t i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) /
                        (static_cast<double>(n) + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = x;
      for (std::size_t k = 2; k <= n; ++k) {
        const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / static_cast<double>(k);
        p0 = p1;
        p1 = pk;
      }
      if (n == 1) {
        p1 = x;
        p0 = 1.0;
      }
      dp = static_cast<double>(n) * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    if (n == 1) {
      x = 0.0;
      dp = 1.0;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.points[i] = 0.5 * (1.0 - x);
    rule.points[n - 1 - i] = 0.5 * (1.0 + x);
    rule.weights[i] = 0.5 * w;
    rule.weights[n - 1 - i] = 0.5 * w;
  }
  if (n == 1) {
    rule.points[0] = 0.5;
    rule.weights[0] = 1.0;
  }
  return rule;
}

FeSpace::FeSpace(std::shared_ptr<const Mesh> mesh, int degree, std::size_t quadrature_refinement)
    : mesh_(std::move(mesh)), degree_(degree), refinement_(quadrature_refinement) {
  if (!mesh_) throw InvalidArgument("FeSpace: null mesh");
  if (mesh_->dimension != 1) throw InvalidArgument("FeSpace: only d = 1 is supported");
  if (degree_ != 1 && degree_ != 2) throw InvalidArgument("FeSpace: degree must be 1 or 2");
  if (refinement_ == 0) throw InvalidArgument("FeSpace: quadrature refinement must be >= 1");

  const std::size_t ne = mesh_->element_count();
  const auto deg = static_cast<std::size_t>(degree_);
  dof_coordinates_.resize(deg * ne + 1);
  for (std::size_t e = 0; e < ne; ++e) {
    const double a = mesh_->vertices[mesh_->elements[e][0]];
    const double b = mesh_->vertices[mesh_->elements[e][1]];
    dof_coordinates_[deg * e] = a;
    if (deg == 2) dof_coordinates_[deg * e + 1] = 0.5 * (a + b);
  }
  dof_coordinates_.back() = 1.0;

  reference_rule_ = gauss_legendre((deg + 1) * refinement_);
  const std::size_t nq = reference_rule_.points.size();
  const std::size_t nb = dofs_per_element();
  shape_at_qp_.resize(nq * nb);
  shape_deriv_at_qp_.resize(nq * nb);
  for (std::size_t q = 0; q < nq; ++q) {
    for (std::size_t a = 0; a < nb; ++a) {
      shape_at_qp_[q * nb + a] = shape(a, reference_rule_.points[q]);
      shape_deriv_at_qp_[q * nb + a] = shape_derivative(a, reference_rule_.points[q]);
    }
  }
  qp_coordinates_.resize(ne * nq);
  qp_weights_.resize(ne * nq);
  for (std::size_t e = 0; e < ne; ++e) {
    const double a = mesh_->vertices[mesh_->elements[e][0]];
    const double h = mesh_->element_size(e);
    for (std::size_t q = 0; q < nq; ++q) {
      qp_coordinates_[e * nq + q] = a + h * reference_rule_.points[q];
      qp_weights_[e * nq + q] = h * reference_rule_.weights[q];
    }
  }
}

double FeSpace::shape(std::size_t local, double xi) const {
  if (degree_ == 1) return local == 0 ? 1.0 - xi : xi;
  switch (local) {
    case 0: return 2.0 * (xi - 0.5) * (xi - 1.0);
    case 1: return -4.0 * xi * (xi - 1.0);
    default: return 2.0 * xi * (xi - 0.5);
  }
}

double FeSpace::shape_derivative(std::size_t local, double xi) const {
  if (degree_ == 1) return local == 0 ? -1.0 : 1.0;
  switch (local) {
    case 0: return 4.0 * xi - 3.0;
    case 1: return 4.0 - 8.0 * xi;
    default: return 4.0 * xi - 1.0;
  }
}

std::size_t FeSpace::locate(double x) const {
  if (!(x >= 0.0 && x <= 1.0)) {
    throw InvalidArgument("point " + std::to_string(x) + " outside the closed domain [0,1]");
  }
  const auto& v = mesh_->vertices;
  const auto it = std::lower_bound(v.begin(), v.end(), x);
  const auto idx = static_cast<std::size_t>(it - v.begin());
  return idx == 0 ? 0 : idx - 1;
}

std::shared_ptr<const FeSpace> make_space(std::size_t elements, int degree,
                                          std::size_t quadrature_refinement) {
  auto mesh = std::make_shared<const Mesh>(build_mesh(1, elements));
  return std::make_shared<const FeSpace>(std::move(mesh), degree, quadrature_refinement);
}

FeFunction::FeFunction(std::shared_ptr<const FeSpace> space)
    : space_(std::move(space)), coefficients_(space_->dof_count(), 0.0) {}

FeFunction::FeFunction(std::shared_ptr<const FeSpace> space, std::vector<double> coefficients)
    : space_(std::move(space)), coefficients_(std::move(coefficients)) {
  if (coefficients_.size() != space_->dof_count()) {
    throw InvalidArgument("FeFunction: coefficient count does not match the space");
  }
}

FeFunction& FeFunction::operator+=(const FeFunction& other) {
  if (other.coefficients_.size() != coefficients_.size()) {
    throw InvalidArgument("FeFunction: size mismatch in +=");
  }
  for (std::size_t i = 0; i < coefficients_.size(); ++i) coefficients_[i] += other.coefficients_[i];
  return *this;
}

FeFunction& FeFunction::operator*=(double factor) {
  for (double& c : coefficients_) c *= factor;
  return *this;
}

namespace {

struct LocalPoint {
  std::size_t element;
  double xi;
  double h;
};

LocalPoint local_point(const FeSpace& space, double x) {
  const std::size_t e = space.locate(x);
  const Mesh& mesh = space.mesh();
  const double a = mesh.vertices[mesh.elements[e][0]];
  const double h = mesh.element_size(e);
  return {e, (x - a) / h, h};
}

}  // namespace

double evaluate(const FeFunction& fn, double x) {
  const FeSpace& space = fn.space();
  const LocalPoint p = local_point(space, x);
  double value = 0.0;
  for (std::size_t a = 0; a < space.dofs_per_element(); ++a) {
    value += fn.coefficients()[space.element_dof(p.element, a)] * space.shape(a, p.xi);
  }
  return value;
}

double evaluate_gradient(const FeFunction& fn, double x) {
  const FeSpace& space = fn.space();
  const LocalPoint p = local_point(space, x);
  double value = 0.0;
  for (std::size_t a = 0; a < space.dofs_per_element(); ++a) {
    value += fn.coefficients()[space.element_dof(p.element, a)] * space.shape_derivative(a, p.xi);
  }
  return value / p.h;
}

std::vector<double> values_at_quadrature(const FeSpace& space, std::span<const double> coefficients) {
  const std::size_t nq = space.points_per_element();
  const std::size_t ne = space.mesh().element_count();
  std::vector<double> out(ne * nq, 0.0);
  for (std::size_t e = 0; e < ne; ++e) {
    for (std::size_t q = 0; q < nq; ++q) {
      double v = 0.0;
      for (std::size_t a = 0; a < space.dofs_per_element(); ++a) {
        v += coefficients[space.element_dof(e, a)] * space.qp_shape(q, a);
      }
      out[e * nq + q] = v;
    }
  }
  return out;
}

std::vector<double> gradients_at_quadrature(const FeSpace& space, std::span<const double> coefficients) {
  const std::size_t nq = space.points_per_element();
  const std::size_t ne = space.mesh().element_count();
  std::vector<double> out(ne * nq, 0.0);
  for (std::size_t e = 0; e < ne; ++e) {
    for (std::size_t q = 0; q < nq; ++q) {
      double g = 0.0;
      for (std::size_t a = 0; a < space.dofs_per_element(); ++a) {
        g += coefficients[space.element_dof(e, a)] * space.qp_shape_gradient(e, q, a);
      }
      out[e * nq + q] = g;
    }
  }
  return out;
}

std::vector<double> assemble_source_load(const FeSpace& space, const ScalarFunction& f) {
  const std::size_t nq = space.points_per_element();
  std::vector<double> load(space.dof_count(), 0.0);
  const auto xs = space.qp_coordinates();
  const auto ws = space.qp_weights();
  for (std::size_t e = 0; e < space.mesh().element_count(); ++e) {
    for (std::size_t q = 0; q < nq; ++q) {
      const double fw = f(xs[e * nq + q]) * ws[e * nq + q];
      for (std::size_t a = 0; a < space.dofs_per_element(); ++a) {
        load[space.element_dof(e, a)] += fw * space.qp_shape(q, a);
      }
    }
  }
  return load;
}

std::vector<double> assemble_flux_load(const FeSpace& space, std::span<const double> flux_at_qp) {
  if (flux_at_qp.size() != space.quadrature_point_count()) {
    throw InvalidArgument("assemble_flux_load: one flux value per quadrature point expected");
  }
  const std::size_t nq = space.points_per_element();
  std::vector<double> load(space.dof_count(), 0.0);
  const auto ws = space.qp_weights();
  for (std::size_t e = 0; e < space.mesh().element_count(); ++e) {
    for (std::size_t q = 0; q < nq; ++q) {
      const double gw = flux_at_qp[e * nq + q] * ws[e * nq + q];
      for (std::size_t a = 0; a < space.dofs_per_element(); ++a) {
        load[space.element_dof(e, a)] += gw * space.qp_shape_gradient(e, q, a);
      }
    }
  }
  return load;
}

std::vector<MatrixEntry> assemble_stiffness(const FeSpace& space,
                                            std::span<const double> coefficient_at_qp) {
  if (!coefficient_at_qp.empty() && coefficient_at_qp.size() != space.quadrature_point_count()) {
    throw InvalidArgument("assemble_stiffness: one coefficient per quadrature point expected");
  }
  const std::size_t nq = space.points_per_element();
  const std::size_t nb = space.dofs_per_element();
  const auto ws = space.qp_weights();
  std::vector<MatrixEntry> entries;
  for (std::size_t e = 0; e < space.mesh().element_count(); ++e) {
    for (std::size_t a = 0; a < nb; ++a) {
      for (std::size_t b = 0; b < nb; ++b) {
        double v = 0.0;
        for (std::size_t q = 0; q < nq; ++q) {
          const double coeff = coefficient_at_qp.empty() ? 1.0 : coefficient_at_qp[e * nq + q];
          v += coeff * ws[e * nq + q] * space.qp_shape_gradient(e, q, a) *
               space.qp_shape_gradient(e, q, b);
        }
        entries.push_back({space.element_dof(e, a), space.element_dof(e, b), v});
      }
    }
  }
  // Merge duplicates produced by shared vertices.
  std::sort(entries.begin(), entries.end(), [](const MatrixEntry& l, const MatrixEntry& r) {
    return l.row != r.row ? l.row < r.row : l.col < r.col;
  });
  std::vector<MatrixEntry> merged;
  for (const auto& entry : entries) {
    if (!merged.empty() && merged.back().row == entry.row && merged.back().col == entry.col) {
      merged.back().value += entry.value;
    } else {
      merged.push_back(entry);
    }
  }
  return merged;
}

struct FactorizedLaplacian::Impl {
  std::shared_ptr<const FeSpace> space;
  std::size_t interior = 0;
  Eigen::SparseMatrix<double> matrix;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>, Eigen::Lower, Eigen::NaturalOrdering<int>> solver;
};

FactorizedLaplacian::FactorizedLaplacian(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}

const FeSpace& FactorizedLaplacian::space() const { return *impl_->space; }
const std::shared_ptr<const FeSpace>& FactorizedLaplacian::space_ptr() const { return impl_->space; }
std::size_t FactorizedLaplacian::interior_count() const { return impl_->interior; }

std::vector<double> FactorizedLaplacian::interior_matrix_dense() const {
  const std::size_t n = impl_->interior;
  std::vector<double> dense(n * n, 0.0);
  for (int k = 0; k < impl_->matrix.outerSize(); ++k) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(impl_->matrix, k); it; ++it) {
      dense[static_cast<std::size_t>(it.row()) * n + static_cast<std::size_t>(it.col())] = it.value();
    }
  }
  return dense;
}

FeFunction FactorizedLaplacian::solve(std::span<const double> load) const {
  const FeSpace& space = *impl_->space;
  if (load.size() != space.dof_count()) {
    throw InvalidArgument("solve_dirichlet: load size does not match the dof count");
  }
  // Interior dofs are 1 .. dof_count-2 in order.
  Eigen::VectorXd rhs(static_cast<Eigen::Index>(impl_->interior));
  for (std::size_t i = 0; i < impl_->interior; ++i) rhs[static_cast<Eigen::Index>(i)] = load[i + 1];
  const Eigen::VectorXd x = impl_->solver.solve(rhs);
  std::vector<double> coefficients(space.dof_count(), 0.0);
  for (std::size_t i = 0; i < impl_->interior; ++i) coefficients[i + 1] = x[static_cast<Eigen::Index>(i)];
  return FeFunction(impl_->space, std::move(coefficients));
}

namespace {

FactorizedLaplacian::Impl* build_operator(std::shared_ptr<const FeSpace> space,
                                          std::span<const double> coefficient_at_qp) {
  auto impl = std::make_unique<FactorizedLaplacian::Impl>();
  impl->space = std::move(space);
  const std::size_t n = impl->space->dof_count();
  impl->interior = n - 2;
  std::vector<Eigen::Triplet<double>> triplets;
  for (const auto& entry : assemble_stiffness(*impl->space, coefficient_at_qp)) {
    if (impl->space->is_dirichlet(entry.row) || impl->space->is_dirichlet(entry.col)) continue;
    triplets.emplace_back(static_cast<int>(entry.row - 1), static_cast<int>(entry.col - 1), entry.value);
  }
  const auto m = static_cast<Eigen::Index>(impl->interior);
  impl->matrix.resize(m, m);
  impl->matrix.setFromTriplets(triplets.begin(), triplets.end());
  impl->solver.compute(impl->matrix);
  if (impl->solver.info() != Eigen::Success) {
    throw NumericalError("stiffness factorization failed");
  }
  const auto& d = impl->solver.vectorD();
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    if (!(d[i] > 0.0)) throw NumericalError("stiffness matrix is not positive definite");
  }
  return impl.release();
}

}  // namespace

FactorizedLaplacian assemble_laplacian(std::shared_ptr<const FeSpace> space) {
  return FactorizedLaplacian(std::shared_ptr<const FactorizedLaplacian::Impl>(
      build_operator(std::move(space), {})));
}

FactorizedLaplacian assemble_diffusion(std::shared_ptr<const FeSpace> space,
                                       std::span<const double> coefficient_at_qp) {
  if (coefficient_at_qp.empty()) throw InvalidArgument("assemble_diffusion: empty coefficient");
  return FactorizedLaplacian(std::shared_ptr<const FactorizedLaplacian::Impl>(
      build_operator(std::move(space), coefficient_at_qp)));
}

FeFunction solve_dirichlet(const FactorizedLaplacian& op, std::span<const double> load) {
  return op.solve(load);
}

namespace {

void check_exponent(double p) {
  if (!(p >= 1.0) || !std::isfinite(p)) throw InvalidArgument("norm exponent p must be in [1, inf)");
}

double combine_norm(double value_sum, double grad_sum, NormKind kind, double p) {
  switch (kind) {
    case NormKind::Lp: return std::pow(value_sum, 1.0 / p);
    case NormKind::W1pSeminorm: return std::pow(grad_sum, 1.0 / p);
    case NormKind::W1p: return std::pow(value_sum + grad_sum, 1.0 / p);
  }
  return 0.0;
}

}  // namespace

double fe_norm(const FeFunction& fn, NormKind kind, double p) {
  check_exponent(p);
  const FeSpace& space = fn.space();
  const auto values = values_at_quadrature(space, fn.coefficients());
  const auto grads = gradients_at_quadrature(space, fn.coefficients());
  const auto ws = space.qp_weights();
  double vs = 0.0;
  double gs = 0.0;
  for (std::size_t i = 0; i < ws.size(); ++i) {
    vs += ws[i] * std::pow(std::abs(values[i]), p);
    gs += ws[i] * std::pow(std::abs(grads[i]), p);
  }
  return combine_norm(vs, gs, kind, p);
}

double fe_error_norm(const FeFunction& fn, const ScalarFunction& exact,
                     const ScalarFunction& exact_gradient, NormKind kind, double p,
                     std::size_t points_per_element) {
  check_exponent(p);
  const FeSpace& space = fn.space();
  const Mesh& mesh = space.mesh();
  const QuadratureRule rule = gauss_legendre(points_per_element);
  const bool need_grad = kind != NormKind::Lp;
  double vs = 0.0;
  double gs = 0.0;
  for (std::size_t e = 0; e < mesh.element_count(); ++e) {
    const double a = mesh.vertices[mesh.elements[e][0]];
    const double h = mesh.element_size(e);
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const double xi = rule.points[q];
      const double x = a + h * xi;
      double v = 0.0;
      double g = 0.0;
      for (std::size_t l = 0; l < space.dofs_per_element(); ++l) {
        const double c = fn.coefficients()[space.element_dof(e, l)];
        v += c * space.shape(l, xi);
        g += c * space.shape_derivative(l, xi) / h;
      }
      const double w = h * rule.weights[q];
      vs += w * std::pow(std::abs(v - exact(x)), p);
      if (need_grad) gs += w * std::pow(std::abs(g - exact_gradient(x)), p);
    }
  }
  return combine_norm(vs, gs, kind, p);
}

double fe_difference_norm(const FeFunction& fn, const FeFunction& reference, NormKind kind, double p) {
  check_exponent(p);
  const FeSpace& ref_space = reference.space();
  const auto ref_values = values_at_quadrature(ref_space, reference.coefficients());
  const auto ref_grads = gradients_at_quadrature(ref_space, reference.coefficients());
  const auto xs = ref_space.qp_coordinates();
  const auto ws = ref_space.qp_weights();
  double vs = 0.0;
  double gs = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    vs += ws[i] * std::pow(std::abs(evaluate(fn, xs[i]) - ref_values[i]), p);
    if (kind != NormKind::Lp) {
      gs += ws[i] * std::pow(std::abs(evaluate_gradient(fn, xs[i]) - ref_grads[i]), p);
    }
  }
  return combine_norm(vs, gs, kind, p);
}

FeFunction fe_project(const ScalarFunction& f, std::shared_ptr<const FeSpace> space) {
  std::vector<double> coefficients(space->dof_count());
  const auto xs = space->dof_coordinates();
  for (std::size_t i = 0; i < coefficients.size(); ++i) {
    coefficients[i] = f(xs[i]);
    if (!std::isfinite(coefficients[i])) {
      throw InvalidArgument("fe_project: non-finite value at dof " + std::to_string(i));
    }
  }
  return FeFunction(std::move(space), std::move(coefficients));
}

}  // namespace momeq
