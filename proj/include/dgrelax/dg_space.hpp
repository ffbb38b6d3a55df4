#ifndef DGRELAX_DG_SPACE_HPP_
#define DGRELAX_DG_SPACE_HPP_

#include "dgrelax/lagrange.hpp"
#include "dgrelax/mesh.hpp"
#include "dgrelax/quadrature.hpp"

#include <Eigen/Dense>

#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace dgrelax {

template <int N>
using VecN = Eigen::Matrix<double, N, 1>;
template <int N>
using GradN = Eigen::Matrix<double, N, 2>;

/// Broken space V_h^q of R^N-valued piecewise polynomials of degree q.
///
/// Coefficient layout is element-major: dof (k, i, c) of element k, local
/// Lagrange node i, component c sits at (k * nodes_per_element + i) * N + c.
/// No dof is shared between elements.
template <int N>
class DGSpace {
public:
  static constexpr int value_dim = N;

  DGSpace(std::shared_ptr<const Mesh> mesh, int degree) : mesh_(std::move(mesh)), basis_(degree) {
    if (!mesh_) throw std::invalid_argument("DGSpace: null mesh");
    if (degree < 1) throw std::invalid_argument("DGSpace: polynomial degree must be >= 1");
    const std::size_t nt = mesh_->num_triangles();
    jacobian_.resize(nt);
    inverse_transpose_.resize(nt);
    for (std::size_t k = 0; k < nt; ++k) {
      const auto& t = mesh_->triangles[k];
      Mat2 jac;
      jac.col(0) = mesh_->vertices[t[1]] - mesh_->vertices[t[0]];
      jac.col(1) = mesh_->vertices[t[2]] - mesh_->vertices[t[0]];
      if (jac.determinant() <= 0.0) throw std::invalid_argument("DGSpace: triangle " + std::to_string(k) + " is not counterclockwise");
      jacobian_[k] = jac;
      inverse_transpose_[k] = jac.inverse().transpose();
    }
  }

  const Mesh& mesh() const { return *mesh_; }
  const std::shared_ptr<const Mesh>& mesh_ptr() const { return mesh_; }
  int degree() const { return basis_.degree(); }
  const LagrangeBasis& basis() const { return basis_; }
  int nodes_per_element() const { return basis_.size(); }
  int dofs_per_element() const { return N * basis_.size(); }
  std::size_t num_elements() const { return mesh_->num_triangles(); }
  std::size_t total_dofs() const { return num_elements() * dofs_per_element(); }
  std::size_t dof(std::size_t k, int node, int comp) const {
    return (k * nodes_per_element() + node) * N + comp;
  }

  /// Affine map reference -> element k.
  Vec2 to_physical(std::size_t k, const Vec2& xi) const {
    return mesh_->vertices[mesh_->triangles[k][0]] + jacobian_[k] * xi;
  }
  Vec2 to_reference(std::size_t k, const Vec2& x) const {
    return jacobian_[k].inverse() * (x - mesh_->vertices[mesh_->triangles[k][0]]);
  }
  const Mat2& jacobian(std::size_t k) const { return jacobian_[k]; }
  /// Maps reference gradients (as row vectors) to physical ones: grad = ref_grad * J^{-1}.
  const Mat2& inverse_transpose(std::size_t k) const { return inverse_transpose_[k]; }
  double area(std::size_t k) const { return 0.5 * jacobian_[k].determinant(); }

  /// Physical nodes of element k, in local node order.
  std::vector<Vec2> element_nodes(std::size_t k) const {
    std::vector<Vec2> out;
    for (const auto& xi : basis_.nodes()) out.push_back(to_physical(k, xi));
    return out;
  }

private:
  std::shared_ptr<const Mesh> mesh_;
  LagrangeBasis basis_;
  std::vector<Mat2> jacobian_;
  std::vector<Mat2> inverse_transpose_;
};

/// Coefficient vector over a DGSpace.
template <int N>
class DGField {
public:
  using Space = DGSpace<N>;

  explicit DGField(std::shared_ptr<const Space> space)
      : space_(std::move(space)), coefficients_(Eigen::VectorXd::Zero(space_->total_dofs())) {}
  DGField(std::shared_ptr<const Space> space, Eigen::VectorXd coefficients)
      : space_(std::move(space)), coefficients_(std::move(coefficients)) {
    if (static_cast<std::size_t>(coefficients_.size()) != space_->total_dofs())
      throw std::invalid_argument("DGField: coefficient length does not match the space");
  }

  const Space& space() const { return *space_; }
  const std::shared_ptr<const Space>& space_ptr() const { return space_; }
  const Eigen::VectorXd& coefficients() const { return coefficients_; }
  Eigen::VectorXd& coefficients() { return coefficients_; }

  VecN<N> nodal_value(std::size_t k, int node) const {
    return coefficients_.template segment<N>(space_->dof(k, node, 0));
  }

  /// Value at reference point xi of element k.
  VecN<N> value(std::size_t k, const Vec2& xi) const {
    check_element(k);
    const Eigen::VectorXd phi = space_->basis().values(xi);
    VecN<N> v = VecN<N>::Zero();
    for (int i = 0; i < phi.size(); ++i) v += phi[i] * nodal_value(k, i);
    return v;
  }

  /// Value of the restriction to element k at a physical point.
  VecN<N> value_at(std::size_t k, const Vec2& x) const { return value(k, space_->to_reference(k, x)); }

  GradN<N> gradient(std::size_t k, const Vec2& xi) const {
    check_element(k);
    const Eigen::MatrixXd dphi = space_->basis().gradients(xi) * space_->inverse_transpose(k).transpose();
    GradN<N> g = GradN<N>::Zero();
    for (int i = 0; i < dphi.rows(); ++i) g += nodal_value(k, i) * dphi.row(i);
    return g;
  }

  DGField& operator+=(const DGField& o) {
    coefficients_ += o.coefficients_;
    return *this;
  }

private:
  void check_element(std::size_t k) const {
    if (k >= space_->num_elements()) throw std::out_of_range("DGField: element index " + std::to_string(k) + " out of range");
  }

  std::shared_ptr<const Space> space_;
  Eigen::VectorXd coefficients_;
};

template <int N>
std::shared_ptr<const DGSpace<N>> make_space(std::shared_ptr<const Mesh> mesh, int degree) {
  return std::make_shared<const DGSpace<N>>(std::move(mesh), degree);
}

/// Nodal interpolant of y: R^2 -> R^N.
template <int N, class Fn>
DGField<N> interpolate(const std::shared_ptr<const DGSpace<N>>& space, Fn&& y) {
  DGField<N> f(space);
  for (std::size_t k = 0; k < space->num_elements(); ++k) {
    const auto nodes = space->element_nodes(k);
    for (int i = 0; i < static_cast<int>(nodes.size()); ++i)
      f.coefficients().template segment<N>(space->dof(k, i, 0)) = y(nodes[i]);
  }
  return f;
}

/// Exact gradients of the restriction to `element` at reference points.
template <int N>
std::vector<GradN<N>> eval_gradient(const DGField<N>& field, std::size_t element, const std::vector<Vec2>& points) {
  std::vector<GradN<N>> out;
  out.reserve(points.size());
  for (const auto& xi : points) out.push_back(field.gradient(element, xi));
  return out;
}

/// Affine deformation x -> F x + b with its gradient, the boundary datum used
/// by every experiment here.
struct AffineMap {
  Mat2 F = Mat2::Identity();
  Vec2 b = Vec2::Zero();

  Vec2 operator()(const Vec2& x) const { return F * x + b; }
  Mat2 gradient(const Vec2&) const { return F; }
};

} // namespace dgrelax

#endif
