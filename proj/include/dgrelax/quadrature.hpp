#ifndef DGRELAX_QUADRATURE_HPP_
#define DGRELAX_QUADRATURE_HPP_

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace dgrelax {

/// Points in reference coordinates. Triangle rules live on
/// {(x,y): x,y >= 0, x+y <= 1} (weights sum to 1/2); edge rules on [0,1]
/// (first coordinate only, weights sum to 1).
struct QuadratureRule {
  std::vector<Eigen::Vector2d> points;
  std::vector<double> weights;
  int degree = 0;

  std::size_t size() const { return weights.size(); }
};

inline constexpr int max_edge_degree = 99;
inline constexpr int max_triangle_degree = 40;

/// n-point Gauss-Legendre nodes/weights on [0,1].
inline void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  nodes.assign(n, 0.0);
  weights.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      if (n == 1) p0 = 1.0;
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // recompute derivative at the converged node
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = pk;
    }
    if (n == 1) p0 = 1.0;
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    nodes[i] = 0.5 * (1.0 - x);
    weights[i] = 1.0 / ((1.0 - x * x) * dp * dp);
  }
}

inline QuadratureRule quadrature_edge(int degree) {
  if (degree < 0) throw std::invalid_argument("quadrature_edge: negative degree");
  if (degree > max_edge_degree)
    throw std::out_of_range("quadrature_edge: degree " + std::to_string(degree) + " above supported maximum");
  const int n = degree / 2 + 1;
  std::vector<double> x, w;
  gauss_legendre(n, x, w);
  QuadratureRule rule;
  rule.degree = 2 * n - 1;
  for (int i = 0; i < n; ++i) {
    rule.points.emplace_back(x[i], 0.0);
    rule.weights.push_back(w[i]);
  }
  return rule;
}

namespace detail {

inline void add_orbit3(QuadratureRule& r, double a, double w) {
  r.points.emplace_back(a, a);
  r.points.emplace_back(1.0 - 2.0 * a, a);
  r.points.emplace_back(a, 1.0 - 2.0 * a);
  r.weights.insert(r.weights.end(), 3, w);
}

} // namespace detail

/// Symmetric rules up to degree 5; collapsed Gauss-Legendre products above.
inline QuadratureRule quadrature_triangle(int degree) {
  if (degree < 0) throw std::invalid_argument("quadrature_triangle: negative degree");
  if (degree > max_triangle_degree)
    throw std::out_of_range("quadrature_triangle: degree " + std::to_string(degree) + " above supported maximum");
  QuadratureRule r;
  if (degree <= 1) {
    r.degree = 1;
    r.points.emplace_back(1.0 / 3.0, 1.0 / 3.0);
    r.weights.push_back(0.5);
  } else if (degree == 2) {
    r.degree = 2;
    detail::add_orbit3(r, 1.0 / 6.0, 1.0 / 6.0);
  } else if (degree <= 4) {
    // Dunavant, 6 points
    r.degree = 4;
    detail::add_orbit3(r, 0.445948490915965, 0.5 * 0.223381589678011);
    detail::add_orbit3(r, 0.091576213509771, 0.5 * 0.109951743655322);
  } else if (degree == 5) {
    // Radon, 7 points
    r.degree = 5;
    const double s = std::sqrt(15.0);
    r.points.emplace_back(1.0 / 3.0, 1.0 / 3.0);
    r.weights.push_back(9.0 / 80.0);
    detail::add_orbit3(r, (6.0 - s) / 21.0, (155.0 - s) / 2400.0);
    detail::add_orbit3(r, (6.0 + s) / 21.0, (155.0 + s) / 2400.0);
  } else {
    // Duffy map (u, v) -> (u, v(1-u)) raises the u-degree by one
    const int n = (degree + 2) / 2 + 1;
    std::vector<double> x, w;
    gauss_legendre(n, x, w);
    r.degree = 2 * n - 2;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        r.points.emplace_back(x[i], x[j] * (1.0 - x[i]));
        r.weights.push_back(w[i] * w[j] * (1.0 - x[i]));
      }
  }
  return r;
}

} // namespace dgrelax

#endif
