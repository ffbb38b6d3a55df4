#ifndef DGRELAX_TRACE_HPP_
#define DGRELAX_TRACE_HPP_

#include "dgrelax/dg_space.hpp"

#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace dgrelax {

template <int N>
using BoundaryDatum = std::function<VecN<N>(const Vec2&)>;

/// Traces of a field on one edge at a set of edge parameters t in [0,1].
/// On boundary edges the minus traces are empty.
template <int N>
struct EdgeTraceBatch {
  int edge = -1;
  std::vector<Vec2> points;
  std::vector<VecN<N>> plus_values, minus_values;
  std::vector<GradN<N>> plus_gradients, minus_gradients;
  Vec2 normal = Vec2::Zero();
};

template <int N>
EdgeTraceBatch<N> edge_traces(const DGField<N>& field, int edge, const std::vector<double>& ts) {
  const Mesh& mesh = field.space().mesh();
  const Edge& e = mesh.edges.at(edge);
  EdgeTraceBatch<N> b;
  b.edge = edge;
  b.normal = e.normal;
  for (double t : ts) {
    const Vec2 x = mesh.edge_point(edge, t);
    b.points.push_back(x);
    const Vec2 xp = field.space().to_reference(e.plus, x);
    b.plus_values.push_back(field.value(e.plus, xp));
    b.plus_gradients.push_back(field.gradient(e.plus, xp));
    if (e.minus) {
      const Vec2 xm = field.space().to_reference(*e.minus, x);
      b.minus_values.push_back(field.value(*e.minus, xm));
      b.minus_gradients.push_back(field.gradient(*e.minus, xm));
    }
  }
  return b;
}

/// [[v]] = v|K+ - v|K- on internal edges, v - u0 on boundary edges.
template <int N>
std::vector<VecN<N>> jump(const DGField<N>& field, int edge, const std::vector<double>& ts,
                          const BoundaryDatum<N>& boundary = {}) {
  const auto b = edge_traces(field, edge, ts);
  std::vector<VecN<N>> out;
  const bool internal = field.space().mesh().edges[edge].is_internal();
  if (!internal && !boundary)
    throw std::invalid_argument("jump: boundary edge " + std::to_string(edge) + " needs a boundary datum");
  for (std::size_t i = 0; i < ts.size(); ++i)
    out.push_back(internal ? VecN<N>(b.plus_values[i] - b.minus_values[i])
                           : VecN<N>(b.plus_values[i] - boundary(b.points[i])));
  return out;
}

/// {{grad v}}: mean of the two traces inside, the single trace on the boundary.
template <int N>
std::vector<GradN<N>> average_gradient(const DGField<N>& field, int edge, const std::vector<double>& ts) {
  const auto b = edge_traces(field, edge, ts);
  std::vector<GradN<N>> out;
  for (std::size_t i = 0; i < ts.size(); ++i)
    out.push_back(b.minus_gradients.empty() ? b.plus_gradients[i]
                                            : GradN<N>(0.5 * (b.plus_gradients[i] + b.minus_gradients[i])));
  return out;
}

template <int N>
std::vector<VecN<N>> average(const DGField<N>& field, int edge, const std::vector<double>& ts) {
  const auto b = edge_traces(field, edge, ts);
  std::vector<VecN<N>> out;
  for (std::size_t i = 0; i < ts.size(); ++i)
    out.push_back(b.minus_values.empty() ? b.plus_values[i] : VecN<N>(0.5 * (b.plus_values[i] + b.minus_values[i])));
  return out;
}

/// [[v (x) n]] = v+ (x) n+ + v- (x) n- = [[v]] (x) n with the canonical normal.
template <int N>
std::vector<GradN<N>> jump_dyadic(const DGField<N>& field, int edge, const std::vector<double>& ts,
                                  const BoundaryDatum<N>& boundary = {}) {
  const Vec2 n = field.space().mesh().edges[edge].normal;
  std::vector<GradN<N>> out;
  for (const auto& j : jump(field, edge, ts, boundary)) out.push_back(j * n.transpose());
  return out;
}

/// Edge quadrature degree that integrates |[[v]]|^p exactly for even integer p.
inline int jump_quadrature_degree(int q, double p) { return static_cast<int>(std::ceil(p * q)) + 2; }
inline int bulk_quadrature_degree(int q, double p) {
  return std::max(static_cast<int>(std::ceil(p * (q - 1))), 2);
}

/// Sum_e h_e^{1-p} int_e |[[v]]|^p over internal edges.
template <int N>
double internal_jump_aggregate(const DGField<N>& field, double p) {
  const Mesh& mesh = field.space().mesh();
  const auto rule = quadrature_edge(jump_quadrature_degree(field.space().degree(), p));
  std::vector<double> ts;
  for (const auto& pt : rule.points) ts.push_back(pt.x());
  double total = 0.0;
  for (std::size_t e = 0; e < mesh.num_edges(); ++e) {
    if (mesh.edges[e].is_boundary()) continue;
    const double h = mesh.edges[e].length;
    const auto j = jump(field, static_cast<int>(e), ts);
    double s = 0.0;
    for (std::size_t i = 0; i < ts.size(); ++i) s += rule.weights[i] * std::pow(j[i].norm(), p);
    total += std::pow(h, 1.0 - p) * h * s;
  }
  return total;
}

/// Sum_K int_K |grad v|^p (Frobenius norm).
template <int N>
double broken_gradient_lp(const DGField<N>& field, double p) {
  const auto& space = field.space();
  const auto rule = quadrature_triangle(bulk_quadrature_degree(space.degree(), p));
  double total = 0.0;
  for (std::size_t k = 0; k < space.num_elements(); ++k) {
    double s = 0.0;
    for (std::size_t i = 0; i < rule.size(); ++i) s += rule.weights[i] * std::pow(field.gradient(k, rule.points[i]).norm(), p);
    total += 2.0 * space.area(k) * s;
  }
  return total;
}

/// |v|^p_{W^{1,p}(Omega, T_h)}: broken gradient term plus internal jumps.
template <int N>
double broken_seminorm(const DGField<N>& field, double p) {
  if (!(p >= 1.0)) throw std::invalid_argument("broken_seminorm: p must be >= 1");
  return broken_gradient_lp(field, p) + internal_jump_aggregate(field, p);
}

/// int_Omega |v - g|^p with g given pointwise (g = 0 when empty).
template <int N>
double lp_norm_pow(const DGField<N>& field, double p, const BoundaryDatum<N>& g = {}, int degree = -1) {
  const auto& space = field.space();
  if (degree < 0) degree = std::max(jump_quadrature_degree(space.degree(), p), 4);
  const auto rule = quadrature_triangle(std::min(degree, max_triangle_degree));
  double total = 0.0;
  for (std::size_t k = 0; k < space.num_elements(); ++k) {
    double s = 0.0;
    for (std::size_t i = 0; i < rule.size(); ++i) {
      VecN<N> v = field.value(k, rule.points[i]);
      if (g) v -= g(space.to_physical(k, rule.points[i]));
      s += rule.weights[i] * std::pow(v.norm(), p);
    }
    total += 2.0 * space.area(k) * s;
  }
  return total;
}

/// int_{boundary} |v - g|^p.
template <int N>
double boundary_lp_norm_pow(const DGField<N>& field, double p, const BoundaryDatum<N>& g = {}) {
  const Mesh& mesh = field.space().mesh();
  const auto rule = quadrature_edge(std::max(jump_quadrature_degree(field.space().degree(), p), 4));
  std::vector<double> ts;
  for (const auto& pt : rule.points) ts.push_back(pt.x());
  const BoundaryDatum<N> zero = [](const Vec2&) { return VecN<N>::Zero().eval(); };
  double total = 0.0;
  for (std::size_t e = 0; e < mesh.num_edges(); ++e) {
    if (mesh.edges[e].is_internal()) continue;
    const auto j = jump(field, static_cast<int>(e), ts, g ? g : zero);
    double s = 0.0;
    for (std::size_t i = 0; i < ts.size(); ++i) s += rule.weights[i] * std::pow(j[i].norm(), p);
    total += mesh.edges[e].length * s;
  }
  return total;
}

} // namespace dgrelax

#endif
