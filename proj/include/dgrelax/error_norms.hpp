#ifndef DGRELAX_ERROR_NORMS_HPP_
#define DGRELAX_ERROR_NORMS_HPP_

#include "dgrelax/dg_space.hpp"
#include "dgrelax/trace.hpp"

#include <cmath>
#include <functional>
#include <vector>

namespace dgrelax {

struct ErrorNorms {
  double l1 = 0.0;
  double l2 = 0.0;  // not squared
  double w11 = 0.0; // broken seminorm at p = 1
};

template <int N>
using PointwiseGradient = std::function<GradN<N>(const Vec2&)>;

/// Errors of y_h against a reference map y0 with gradient dy0.
///
/// The broken W^{1,1} part is sum_K int_K |grad y_h - grad y0| plus
/// sum_{internal e} int_e |[[y_h]]|; y0 is continuous, so its own jumps vanish.
/// The quadrature degree only needs to resolve the non-polynomial |.|.
template <int N>
ErrorNorms error_norms(const DGField<N>& yh, const BoundaryDatum<N>& y0, const PointwiseGradient<N>& dy0,
                       int degree = 8) {
  const auto& space = yh.space();
  const Mesh& mesh = space.mesh();
  const auto rule = quadrature_triangle(degree);
  ErrorNorms out;
  double l2sq = 0.0;
  for (std::size_t k = 0; k < space.num_elements(); ++k) {
    const double scale = 2.0 * space.area(k);
    for (std::size_t i = 0; i < rule.size(); ++i) {
      const Vec2 x = space.to_physical(k, rule.points[i]);
      const double w = scale * rule.weights[i];
      const double e = (yh.value(k, rule.points[i]) - y0(x)).norm();
      out.l1 += w * e;
      l2sq += w * e * e;
      if (dy0) out.w11 += w * (yh.gradient(k, rule.points[i]) - dy0(x)).norm();
    }
  }
  out.l2 = std::sqrt(l2sq);
  if (dy0) {
    const auto erule = quadrature_edge(degree);
    std::vector<double> ts;
    for (const auto& p : erule.points) ts.push_back(p.x());
    for (std::size_t e = 0; e < mesh.num_edges(); ++e) {
      if (mesh.edges[e].is_boundary()) continue;
      const auto j = jump(yh, static_cast<int>(e), ts);
      for (std::size_t i = 0; i < ts.size(); ++i) out.w11 += mesh.edges[e].length * erule.weights[i] * j[i].norm();
    }
  }
  return out;
}

/// Overload for maps exposing operator() and gradient(), e.g. AffineMap.
template <int N, class Map>
  requires requires(const Map& m, const Vec2& x) {
    { m(x) } -> std::convertible_to<VecN<N>>;
    { m.gradient(x) } -> std::convertible_to<GradN<N>>;
  }
ErrorNorms error_norms(const DGField<N>& yh, const Map& y0, int degree = 8) {
  return error_norms<N>(
      yh, [&](const Vec2& x) { return VecN<N>(y0(x)); }, [&](const Vec2& x) { return GradN<N>(y0.gradient(x)); },
      degree);
}

} // namespace dgrelax

#endif
