#ifndef DGRELAX_DISCRETE_ENERGY_HPP_
#define DGRELAX_DISCRETE_ENERGY_HPP_

#include "dgrelax/dg_space.hpp"
#include "dgrelax/lifting.hpp"
#include "dgrelax/models.hpp"
#include "dgrelax/trace.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace dgrelax {

enum class Formulation { interior_penalty, lifted_gradient };
enum class PenaltyVariant { energy_based, seminorm_based, convex_style };

inline std::string_view to_string(Formulation f) {
  return f == Formulation::interior_penalty ? "interior_penalty" : "lifted_gradient";
}
inline std::string_view to_string(PenaltyVariant v) {
  switch (v) {
    case PenaltyVariant::energy_based: return "energy_based";
    case PenaltyVariant::seminorm_based: return "seminorm_based";
    case PenaltyVariant::convex_style: return "convex_style";
  }
  return "?";
}
inline Formulation parse_formulation(std::string_view s) {
  if (s == "interior_penalty") return Formulation::interior_penalty;
  if (s == "lifted_gradient") return Formulation::lifted_gradient;
  throw std::invalid_argument("unknown formulation '" + std::string(s) + "'");
}
inline PenaltyVariant parse_penalty(std::string_view s) {
  if (s == "energy_based") return PenaltyVariant::energy_based;
  if (s == "seminorm_based") return PenaltyVariant::seminorm_based;
  if (s == "convex_style") return PenaltyVariant::convex_style;
  throw std::invalid_argument("unknown penalty variant '" + std::string(s) + "'");
}

struct DiscreteEnergyConfig {
  Formulation formulation = Formulation::interior_penalty;
  PenaltyVariant penalty = PenaltyVariant::seminorm_based;
  double alpha = 20.0;
  /// Dirichlet datum u0, imposed weakly through the boundary jumps.
  BoundaryDatum<2> boundary;
  /// Scaled jumps |[[u]]/h|^p and the (alpha/2)(...)(2^p J)^{1/p} penalty form.
  bool stable_rewrite = false;
  /// Roots J^{1/p} are evaluated as (J + eps)^{1/p} - eps^{1/p}.
  double eps_pen = 1e-14;
  /// Quadrature exactness; negative picks the defaults from q, p and the model.
  int bulk_degree = -1;
  int edge_degree = -1;
};

/// Term breakdown; total = bulk + consistency + alpha * penalty.
struct AssembledEnergy {
  double total = 0.0;
  double bulk = 0.0;        // sum_K int W(grad u) or int W(G_h u)
  double consistency = 0.0; // -sum_{internal} int DW({{grad u}}) : [[u (x) n]]
  double penalty = 0.0;     // Pen(u), before the alpha factor
  double alpha = 0.0;
  double jump_aggregate = 0.0;     // J over all edges, boundary jumps against u0
  double internal_jump = 0.0;      // internal-edge part of J
  double boundary_jump = 0.0;      // boundary-edge part of J
  double seminorm = 0.0;           // |u|^p_{W^{1,p}(Omega, T_h)}
  double broken_bulk = 0.0;        // sum_K int W(grad_h u), feeds the energy-based penalty
};

class NonFiniteEnergy : public std::runtime_error {
public:
  NonFiniteEnergy(const std::string& what, long element) : std::runtime_error(what), element_(element) {}
  long element() const { return element_; }

private:
  long element_;
};

/// Assembler for one (space, model, config) triple; precomputes quadrature
/// tables so repeated evaluations during minimization are cheap. Evaluation
/// is sequential in element/edge index order, so results are bit-reproducible.
template <EnergyModel Model>
class DiscreteEnergy {
public:
  DiscreteEnergy(std::shared_ptr<const DGSpace<2>> space, Model model, DiscreteEnergyConfig config)
      : space_(std::move(space)), model_(std::move(model)), config_(std::move(config)), p_(model_.growth_exponent()) {
    if (!(config_.alpha >= 0.0)) throw std::invalid_argument("DiscreteEnergy: alpha must be >= 0");
    if (!(config_.eps_pen >= 0.0)) throw std::invalid_argument("DiscreteEnergy: eps_pen must be >= 0");
    if (!config_.boundary) throw std::invalid_argument("DiscreteEnergy: a boundary datum is required");
    const int q = space_->degree();
    const int wdeg = model_.polynomial_degree();
    bulk_degree_ = config_.bulk_degree >= 0
                       ? config_.bulk_degree
                       : std::max((q - 1) * std::max(wdeg, static_cast<int>(std::ceil(p_))), 1);
    edge_degree_ = config_.edge_degree >= 0
                       ? config_.edge_degree
                       : std::max(static_cast<int>(std::ceil(p_ * q)), (q - 1) * (wdeg - 1) + q) + 2;
    build_tables();
    if (config_.formulation == Formulation::lifted_gradient) lifting_.emplace(space_);
    for (std::size_t k = 0; k < space_->num_elements(); ++k) domain_area_ += space_->area(k);
  }

  const DGSpace<2>& space() const { return *space_; }
  const std::shared_ptr<const DGSpace<2>>& space_ptr() const { return space_; }
  const Model& model() const { return model_; }
  const DiscreteEnergyConfig& config() const { return config_; }
  double exponent() const { return p_; }
  int bulk_degree() const { return bulk_degree_; }
  int edge_degree() const { return edge_degree_; }

  AssembledEnergy evaluate(const Eigen::VectorXd& u) const { return compute(u, nullptr); }
  double value(const Eigen::VectorXd& u) const { return compute(u, nullptr).total; }
  Eigen::VectorXd gradient(const Eigen::VectorXd& u) const {
    Eigen::VectorXd g;
    compute(u, &g);
    return g;
  }
  AssembledEnergy evaluate_with_gradient(const Eigen::VectorXd& u, Eigen::VectorXd& g) const { return compute(u, &g); }

private:
  struct EdgePoint {
    double weight = 0.0; // physical
    Vec2 datum = Vec2::Zero();
    Eigen::VectorXd phi_plus, phi_minus;
    Eigen::MatrixXd dphi_plus, dphi_minus; // nb x 2 physical gradients
  };
  struct EdgeTable {
    int plus = -1, minus = -1;
    double h = 0.0;
    Vec2 normal = Vec2::Zero();
    std::vector<EdgePoint> points;
  };

  void build_tables() {
    const Mesh& mesh = space_->mesh();
    const auto& basis = space_->basis();
    bulk_rule_ = quadrature_triangle(bulk_degree_);
    const std::size_t nq = bulk_rule_.size();
    bulk_phi_.resize(nq);
    std::vector<Eigen::MatrixXd> ref_grads(nq);
    for (std::size_t i = 0; i < nq; ++i) {
      bulk_phi_[i] = basis.values(bulk_rule_.points[i]);
      ref_grads[i] = basis.gradients(bulk_rule_.points[i]);
    }
    bulk_dphi_.resize(space_->num_elements() * nq);
    for (std::size_t k = 0; k < space_->num_elements(); ++k)
      for (std::size_t i = 0; i < nq; ++i)
        bulk_dphi_[k * nq + i] = ref_grads[i] * space_->inverse_transpose(k).transpose();
    if (space_->degree() >= 1) {
      LagrangeBasis low(space_->degree() - 1);
      bulk_psi_.resize(nq);
      for (std::size_t i = 0; i < nq; ++i) bulk_psi_[i] = low.values(bulk_rule_.points[i]);
    }

    const auto erule = quadrature_edge(edge_degree_);
    edges_.clear();
    edges_.reserve(mesh.num_edges());
    for (std::size_t e = 0; e < mesh.num_edges(); ++e) {
      const Edge& ed = mesh.edges[e];
      EdgeTable t;
      t.plus = ed.plus;
      t.minus = ed.minus.value_or(-1);
      t.h = ed.length;
      t.normal = ed.normal;
      for (std::size_t g = 0; g < erule.size(); ++g) {
        EdgePoint pt;
        const Vec2 x = mesh.edge_point(e, erule.points[g].x());
        pt.weight = erule.weights[g] * ed.length;
        const Vec2 xp = space_->to_reference(ed.plus, x);
        pt.phi_plus = basis.values(xp);
        pt.dphi_plus = basis.gradients(xp) * space_->inverse_transpose(ed.plus).transpose();
        if (ed.minus) {
          const Vec2 xm = space_->to_reference(*ed.minus, x);
          pt.phi_minus = basis.values(xm);
          pt.dphi_minus = basis.gradients(xm) * space_->inverse_transpose(*ed.minus).transpose();
        } else {
          pt.datum = config_.boundary(x);
        }
        t.points.push_back(std::move(pt));
      }
      edges_.push_back(std::move(t));
    }
  }

  Vec2 trace(const Eigen::VectorXd& u, int k, const Eigen::VectorXd& phi) const {
    Vec2 v = Vec2::Zero();
    const std::size_t base = space_->dof(k, 0, 0);
    for (int i = 0; i < phi.size(); ++i) v += phi[i] * u.segment<2>(base + 2 * i);
    return v;
  }
  Mat2 grad(const Eigen::VectorXd& u, int k, const Eigen::MatrixXd& dphi) const {
    Mat2 F = Mat2::Zero();
    const std::size_t base = space_->dof(k, 0, 0);
    for (int i = 0; i < dphi.rows(); ++i) F += u.segment<2>(base + 2 * i) * dphi.row(i);
    return F;
  }
  /// grad += M : d(grad u)/du over element k, i.e. row i gets M * dphi_i.
  void scatter_matrix(Eigen::VectorXd& g, int k, const Eigen::MatrixXd& dphi, const Mat2& M) const {
    const std::size_t base = space_->dof(k, 0, 0);
    for (int i = 0; i < dphi.rows(); ++i) g.segment<2>(base + 2 * i) += M * dphi.row(i).transpose();
  }
  void scatter_vector(Eigen::VectorXd& g, int k, const Eigen::VectorXd& phi, const Vec2& v) const {
    const std::size_t base = space_->dof(k, 0, 0);
    for (int i = 0; i < phi.size(); ++i) g.segment<2>(base + 2 * i) += phi[i] * v;
  }

  /// |x|^p and d|x|^p/dx.
  std::pair<double, Vec2> pow_norm(const Vec2& x) const {
    const double n = x.norm();
    if (n == 0.0) return {0.0, Vec2::Zero()};
    const double np = std::pow(n, p_);
    return {np, (p_ * np / (n * n)) * x};
  }
  std::pair<double, Mat2> pow_norm(const Mat2& x) const {
    const double n = x.norm();
    if (n == 0.0) return {0.0, Mat2::Zero()};
    const double np = std::pow(n, p_);
    return {np, (p_ * np / (n * n)) * x};
  }

  /// s(J) = (J + eps)^r - eps^r and its derivative.
  std::pair<double, double> smoothed_root(double J, double r) const {
    const double eps = config_.eps_pen;
    const double base = J + eps;
    if (base <= 0.0) return {0.0, 0.0};
    return {std::pow(base, r) - std::pow(eps, r), r * std::pow(base, r - 1.0)};
  }

  AssembledEnergy compute(const Eigen::VectorXd& u, Eigen::VectorXd* g) const {
    if (static_cast<std::size_t>(u.size()) != space_->total_dofs())
      throw std::invalid_argument("DiscreteEnergy: coefficient vector has the wrong length");
    const bool want = g != nullptr;
    const std::size_t ndof = space_->total_dofs();
    const bool lifted = config_.formulation == Formulation::lifted_gradient;
    const bool need_broken = !lifted || config_.penalty == PenaltyVariant::energy_based;
    const bool need_seminorm = config_.penalty != PenaltyVariant::energy_based;
    Eigen::VectorXd g_bulk, g_broken, g_grad_lp, g_cons, g_jint, g_jbdy;
    if (want) {
      g_bulk = Eigen::VectorXd::Zero(ndof);
      g_grad_lp = Eigen::VectorXd::Zero(ndof);
      g_cons = Eigen::VectorXd::Zero(ndof);
      g_jint = Eigen::VectorXd::Zero(ndof);
      g_jbdy = Eigen::VectorXd::Zero(ndof);
      if (lifted && need_broken) g_broken = Eigen::VectorXd::Zero(ndof);
    }

    AssembledEnergy out;
    out.alpha = config_.alpha;
    const std::size_t nq = bulk_rule_.size();

    std::vector<GradN<2>> lift_coeffs, lift_sens;
    const int nlow = lifted ? lifting_->low_basis().size() : 0;
    if (lifted) {
      lift_coeffs = lifting_->apply(u);
      if (want) lift_sens.assign(lift_coeffs.size(), GradN<2>::Zero());
    }

    double grad_lp = 0.0;
    for (std::size_t k = 0; k < space_->num_elements(); ++k) {
      const double scale = 2.0 * space_->area(k);
      for (std::size_t i = 0; i < nq; ++i) {
        const double w = bulk_rule_.weights[i] * scale;
        const auto& dphi = bulk_dphi_[k * nq + i];
        const Mat2 F = grad(u, static_cast<int>(k), dphi);
        if (need_seminorm) {
          const auto [v, d] = pow_norm(F);
          grad_lp += w * v;
          if (want) scatter_matrix(g_grad_lp, static_cast<int>(k), dphi, w * d);
        }
        if (need_broken) {
          const double wv = model_.value(F);
          if (!std::isfinite(wv))
            throw NonFiniteEnergy("non-finite strain energy on element " + std::to_string(k), static_cast<long>(k));
          out.broken_bulk += w * wv;
          if (want) scatter_matrix(lifted ? g_broken : g_bulk, static_cast<int>(k), dphi, w * model_.derivative(F));
        }
        if (lifted) {
          Mat2 G = F;
          for (int j = 0; j < nlow; ++j) G -= bulk_psi_[i][j] * lift_coeffs[k * nlow + j];
          const double wv = model_.value(G);
          if (!std::isfinite(wv))
            throw NonFiniteEnergy("non-finite strain energy on element " + std::to_string(k), static_cast<long>(k));
          out.bulk += w * wv;
          if (want) {
            const Mat2 dw = w * model_.derivative(G);
            scatter_matrix(g_bulk, static_cast<int>(k), dphi, dw);
            for (int j = 0; j < nlow; ++j) lift_sens[k * nlow + j] -= bulk_psi_[i][j] * dw;
          }
        }
      }
    }
    if (!lifted) out.bulk = out.broken_bulk;
    if (lifted && want) lifting_->apply_transpose(lift_sens, g_bulk);

    for (const EdgeTable& t : edges_) {
      const bool internal = t.minus >= 0;
      const double hpow = std::pow(t.h, 1.0 - p_);
      double jsum = 0.0, cons = 0.0;
      for (const EdgePoint& pt : t.points) {
        const Vec2 up = trace(u, t.plus, pt.phi_plus);
        const Vec2 j = internal ? Vec2(up - trace(u, t.minus, pt.phi_minus)) : Vec2(up - pt.datum);
        // dj: derivative of this point's J contribution w.r.t. the jump
        Vec2 dj;
        if (config_.stable_rewrite) {
          const auto [v, d] = pow_norm(Vec2(j / t.h));
          jsum += pt.weight * t.h * v;
          dj = pt.weight * d;
        } else {
          const auto [v, d] = pow_norm(j);
          jsum += pt.weight * hpow * v;
          dj = pt.weight * hpow * d;
        }
        Eigen::VectorXd& gj = internal ? g_jint : g_jbdy;
        if (want) {
          scatter_vector(gj, t.plus, pt.phi_plus, dj);
          if (internal) scatter_vector(gj, t.minus, pt.phi_minus, -dj);
        }
        if (internal && !lifted) {
          const Mat2 Fp = grad(u, t.plus, pt.dphi_plus);
          const Mat2 Fm = grad(u, t.minus, pt.dphi_minus);
          const Mat2 avg = 0.5 * (Fp + Fm);
          const Mat2 M = j * t.normal.transpose();
          const Mat2 S = model_.derivative(avg);
          cons -= pt.weight * S.cwiseProduct(M).sum();
          if (want) {
            const Vec2 flux = -pt.weight * S * t.normal;
            scatter_vector(g_cons, t.plus, pt.phi_plus, flux);
            scatter_vector(g_cons, t.minus, pt.phi_minus, -flux);
            const Mat2 H = -0.5 * pt.weight * model_.second_derivative_action(avg, M);
            scatter_matrix(g_cons, t.plus, pt.dphi_plus, H);
            scatter_matrix(g_cons, t.minus, pt.dphi_minus, H);
          }
        }
      }
      (internal ? out.internal_jump : out.boundary_jump) += jsum;
      out.consistency += cons;
    }
    out.jump_aggregate = out.internal_jump + out.boundary_jump;
    out.seminorm = grad_lp + out.internal_jump;

    // penalty and its partial derivatives
    const double J = out.jump_aggregate;
    double dP_dJ = 0.0, dP_dS = 0.0, dP_dB = 0.0;
    const double a = (p_ - 1.0) / p_;
    if (config_.stable_rewrite) {
      const double A = domain_area_ + out.broken_bulk + J;
      const double two_p = std::pow(2.0, p_);
      const double eps = config_.eps_pen;
      const double base = two_p * (J + eps);
      const double root = base > 0.0 ? std::pow(base, 1.0 / p_) - std::pow(two_p * eps, 1.0 / p_) : 0.0;
      const double droot = base > 0.0 ? two_p / p_ * std::pow(base, 1.0 / p_ - 1.0) : 0.0;
      const double Aa = std::pow(A, a);
      out.penalty = 0.5 * Aa * root;
      dP_dB = 0.5 * a * std::pow(A, a - 1.0) * root;
      dP_dJ = dP_dB + 0.5 * Aa * droot;
    } else {
      switch (config_.penalty) {
        case PenaltyVariant::energy_based: {
          const double A = 1.0 + out.broken_bulk + J;
          if (!(A > 0.0)) throw std::runtime_error("DiscreteEnergy: energy-based penalty needs 1 + bulk + J > 0");
          const auto [root, droot] = smoothed_root(J, 1.0 / p_);
          const double Aa = std::pow(A, a);
          out.penalty = Aa * root;
          dP_dB = a * std::pow(A, a - 1.0) * root;
          dP_dJ = dP_dB + Aa * droot;
          break;
        }
        case PenaltyVariant::seminorm_based: {
          const double base = 1.0 + out.seminorm;
          const auto [root, droot] = smoothed_root(J, 1.0 / p_);
          out.penalty = std::pow(base, a) * root;
          dP_dS = a * std::pow(base, a - 1.0) * root;
          dP_dJ = std::pow(base, a) * droot;
          break;
        }
        case PenaltyVariant::convex_style: {
          const double b = (p_ - 2.0) / p_;
          const auto [root, droot] = smoothed_root(J, 2.0 / p_);
          const double S = out.seminorm;
          const double Sb = S > 0.0 ? std::pow(S, b) : (b == 0.0 ? 1.0 : 0.0);
          out.penalty = (1.0 + Sb) * root;
          dP_dS = (S > 0.0 && b != 0.0) ? b * std::pow(S, b - 1.0) * root : 0.0;
          dP_dJ = (1.0 + Sb) * droot;
          break;
        }
      }
    }
    out.total = out.bulk + out.consistency + config_.alpha * out.penalty;
    if (!std::isfinite(out.total)) throw NonFiniteEnergy("non-finite discrete energy", -1);

    if (want) {
      const double al = config_.alpha;
      *g = g_bulk + g_cons + (al * dP_dJ) * (g_jint + g_jbdy) + (al * dP_dS) * (g_grad_lp + g_jint);
      if (dP_dB != 0.0) *g += (al * dP_dB) * (lifted ? g_broken : g_bulk);
    }
    return out;
  }

  std::shared_ptr<const DGSpace<2>> space_;
  Model model_;
  DiscreteEnergyConfig config_;
  double p_;
  int bulk_degree_ = 0, edge_degree_ = 0;
  double domain_area_ = 0.0;
  QuadratureRule bulk_rule_;
  std::vector<Eigen::VectorXd> bulk_phi_, bulk_psi_;
  std::vector<Eigen::MatrixXd> bulk_dphi_;
  std::vector<EdgeTable> edges_;
  std::optional<LiftingOperator<2>> lifting_;
};

template <EnergyModel Model>
AssembledEnergy assemble_energy(const DGField<2>& field, const Model& model, const DiscreteEnergyConfig& config) {
  return DiscreteEnergy<Model>(field.space_ptr(), model, config).evaluate(field.coefficients());
}

template <EnergyModel Model>
Eigen::VectorXd assemble_gradient(const DGField<2>& field, const Model& model, const DiscreteEnergyConfig& config) {
  return DiscreteEnergy<Model>(field.space_ptr(), model, config).gradient(field.coefficients());
}

/// Same as assemble_energy with the formulation forced to lifted_gradient.
template <EnergyModel Model>
AssembledEnergy assemble_energy_lifted(const DGField<2>& field, const Model& model, DiscreteEnergyConfig config) {
  config.formulation = Formulation::lifted_gradient;
  return assemble_energy(field, model, config);
}

template <EnergyModel Model>
Eigen::VectorXd assemble_gradient_lifted(const DGField<2>& field, const Model& model, DiscreteEnergyConfig config) {
  config.formulation = Formulation::lifted_gradient;
  return assemble_gradient(field, model, config);
}

} // namespace dgrelax

#endif
