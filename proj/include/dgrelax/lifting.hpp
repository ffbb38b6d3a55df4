#ifndef DGRELAX_LIFTING_HPP_
#define DGRELAX_LIFTING_HPP_

#include "dgrelax/dg_space.hpp"
#include "dgrelax/trace.hpp"

#include <Eigen/Dense>

#include <memory>
#include <stdexcept>
#include <vector>

namespace dgrelax {

/// Elementwise polynomial N x 2 matrix field in V_h^{degree}, stored by
/// Lagrange nodal values (element-major).
template <int N>
struct PiecewiseMatrixField {
  std::shared_ptr<const Mesh> mesh;
  LagrangeBasis basis{0};
  std::vector<GradN<N>> nodal;

  int nodes_per_element() const { return basis.size(); }
  const GradN<N>& at(std::size_t k, int node) const { return nodal[k * basis.size() + node]; }
  GradN<N>& at(std::size_t k, int node) { return nodal[k * basis.size() + node]; }

  GradN<N> value(std::size_t k, const Vec2& xi) const {
    const Eigen::VectorXd psi = basis.values(xi);
    GradN<N> v = GradN<N>::Zero();
    for (int j = 0; j < psi.size(); ++j) v += psi[j] * at(k, j);
    return v;
  }
};

template <int N>
using LiftedField = PiecewiseMatrixField<N>;

/// R_h: V_h^q -> V_h^{q-1} (N x 2 valued),
///   int_Omega R_h(u) : w = sum_{internal e} int_e {{w}} : [[u (x) n_e]]  for all w.
/// Solved elementwise with the local mass matrix; boundary edges do not contribute.
template <int N>
class LiftingOperator {
public:
  explicit LiftingOperator(std::shared_ptr<const DGSpace<N>> space)
      : space_(std::move(space)), low_(space_->degree() - 1) {
    const int nlow = low_.size();
    const auto mrule = quadrature_triangle(std::max(2 * low_.degree(), 1));
    Eigen::MatrixXd mass = Eigen::MatrixXd::Zero(nlow, nlow);
    for (std::size_t i = 0; i < mrule.size(); ++i) {
      const Eigen::VectorXd psi = low_.values(mrule.points[i]);
      mass += mrule.weights[i] * psi * psi.transpose();
    }
    Eigen::LDLT<Eigen::MatrixXd> ldlt(mass);
    if (ldlt.info() != Eigen::Success || !(ldlt.vectorD().minCoeff() > 0.0))
      throw std::runtime_error("LiftingOperator: singular reference mass matrix");
    inverse_reference_mass_ = ldlt.solve(Eigen::MatrixXd::Identity(nlow, nlow));

    const Mesh& mesh = space_->mesh();
    const auto erule = quadrature_edge(2 * space_->degree() - 1);
    for (std::size_t e = 0; e < mesh.num_edges(); ++e) {
      const Edge& ed = mesh.edges[e];
      if (ed.is_boundary()) continue;
      EdgeTable t;
      t.edge = static_cast<int>(e);
      for (std::size_t g = 0; g < erule.size(); ++g) {
        const Vec2 x = mesh.edge_point(e, erule.points[g].x());
        const Vec2 xp = space_->to_reference(ed.plus, x), xm = space_->to_reference(*ed.minus, x);
        t.weights.push_back(erule.weights[g] * ed.length);
        t.phi_plus.push_back(space_->basis().values(xp));
        t.phi_minus.push_back(space_->basis().values(xm));
        t.psi_plus.push_back(low_.values(xp));
        t.psi_minus.push_back(low_.values(xm));
      }
      edges_.push_back(std::move(t));
    }
  }

  const LagrangeBasis& low_basis() const { return low_; }
  const DGSpace<N>& space() const { return *space_; }

  /// Nodal coefficients of R_h(u), element-major, nodes_per_element = low_basis().size().
  std::vector<GradN<N>> apply(const Eigen::VectorXd& u) const {
    const int nlow = low_.size();
    const Mesh& mesh = space_->mesh();
    std::vector<GradN<N>> rhs(space_->num_elements() * nlow, GradN<N>::Zero());
    for (const EdgeTable& t : edges_) {
      const Edge& ed = mesh.edges[t.edge];
      for (std::size_t g = 0; g < t.weights.size(); ++g) {
        const VecN<N> j = trace(u, ed.plus, t.phi_plus[g]) - trace(u, *ed.minus, t.phi_minus[g]);
        const GradN<N> m = 0.5 * t.weights[g] * j * ed.normal.transpose();
        for (int i = 0; i < nlow; ++i) {
          rhs[ed.plus * nlow + i] += t.psi_plus[g][i] * m;
          rhs[*ed.minus * nlow + i] += t.psi_minus[g][i] * m;
        }
      }
    }
    std::vector<GradN<N>> out(rhs.size(), GradN<N>::Zero());
    for (std::size_t k = 0; k < space_->num_elements(); ++k) {
      const double scale = 1.0 / (2.0 * space_->area(k));
      for (int a = 0; a < nlow; ++a)
        for (int b = 0; b < nlow; ++b) out[k * nlow + a] += scale * inverse_reference_mass_(a, b) * rhs[k * nlow + b];
    }
    return out;
  }

  /// Accumulates into `grad` the pullback of d(objective)/d(R coefficients),
  /// i.e. grad += (dR/du)^T sensitivity.
  void apply_transpose(const std::vector<GradN<N>>& sensitivity, Eigen::VectorXd& grad) const {
    const int nlow = low_.size();
    const int nb = space_->nodes_per_element();
    const Mesh& mesh = space_->mesh();
    std::vector<GradN<N>> z(sensitivity.size(), GradN<N>::Zero());
    for (std::size_t k = 0; k < space_->num_elements(); ++k) {
      const double scale = 1.0 / (2.0 * space_->area(k));
      for (int a = 0; a < nlow; ++a)
        for (int b = 0; b < nlow; ++b) z[k * nlow + a] += scale * inverse_reference_mass_(a, b) * sensitivity[k * nlow + b];
    }
    for (const EdgeTable& t : edges_) {
      const Edge& ed = mesh.edges[t.edge];
      for (std::size_t g = 0; g < t.weights.size(); ++g) {
        GradN<N> zsum = GradN<N>::Zero();
        for (int i = 0; i < nlow; ++i)
          zsum += t.psi_plus[g][i] * z[ed.plus * nlow + i] + t.psi_minus[g][i] * z[*ed.minus * nlow + i];
        const VecN<N> flux = 0.5 * t.weights[g] * zsum * ed.normal;
        for (int i = 0; i < nb; ++i) {
          grad.template segment<N>(space_->dof(ed.plus, i, 0)) += t.phi_plus[g][i] * flux;
          grad.template segment<N>(space_->dof(*ed.minus, i, 0)) -= t.phi_minus[g][i] * flux;
        }
      }
    }
  }

private:
  struct EdgeTable {
    int edge = -1;
    std::vector<double> weights;
    std::vector<Eigen::VectorXd> phi_plus, phi_minus, psi_plus, psi_minus;
  };

  VecN<N> trace(const Eigen::VectorXd& u, std::size_t k, const Eigen::VectorXd& phi) const {
    VecN<N> v = VecN<N>::Zero();
    for (int i = 0; i < phi.size(); ++i) v += phi[i] * u.template segment<N>(space_->dof(k, i, 0));
    return v;
  }

  std::shared_ptr<const DGSpace<N>> space_;
  LagrangeBasis low_;
  Eigen::MatrixXd inverse_reference_mass_;
  std::vector<EdgeTable> edges_;
};

template <int N>
LiftedField<N> lift(const DGField<N>& field) {
  LiftingOperator<N> op(field.space_ptr());
  LiftedField<N> r;
  r.mesh = field.space().mesh_ptr();
  r.basis = op.low_basis();
  r.nodal = op.apply(field.coefficients());
  return r;
}

/// G_h(u) = grad_h u - R_h(u), an element of V_h^{q-1}.
template <int N>
PiecewiseMatrixField<N> discrete_gradient(const DGField<N>& field) {
  PiecewiseMatrixField<N> g = lift(field);
  for (std::size_t k = 0; k < field.space().num_elements(); ++k)
    for (int j = 0; j < g.nodes_per_element(); ++j)
      g.at(k, j) = field.gradient(k, g.basis.nodes()[j]) - g.at(k, j);
  return g;
}

/// int_Omega |M|^p for an elementwise matrix polynomial.
template <int N>
double lp_norm_pow(const PiecewiseMatrixField<N>& m, const DGSpace<N>& space, double p) {
  const auto rule = quadrature_triangle(std::max(static_cast<int>(std::ceil(p * m.basis.degree())), 1));
  double total = 0.0;
  for (std::size_t k = 0; k < space.num_elements(); ++k) {
    double s = 0.0;
    for (std::size_t i = 0; i < rule.size(); ++i) s += rule.weights[i] * std::pow(m.value(k, rule.points[i]).norm(), p);
    total += 2.0 * space.area(k) * s;
  }
  return total;
}

} // namespace dgrelax

#endif
