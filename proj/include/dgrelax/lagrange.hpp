#ifndef DGRELAX_LAGRANGE_HPP_
#define DGRELAX_LAGRANGE_HPP_

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

namespace dgrelax {

/// Nodal Lagrange basis of P_q on the reference triangle, equispaced nodes.
/// Degree 0 is the single centroid node. Built from the inverse monomial
/// Vandermonde matrix, which is fine for the q <= 4 range in use here.
class LagrangeBasis {
public:
  explicit LagrangeBasis(int degree) : degree_(degree) {
    if (degree < 0 || degree > 6) throw std::invalid_argument("LagrangeBasis: degree must be in [0, 6]");
    for (int s = 0; s <= degree; ++s)
      for (int b = 0; b <= s; ++b) exponents_.emplace_back(s - b, b);
    if (degree == 0) {
      nodes_.emplace_back(1.0 / 3.0, 1.0 / 3.0);
    } else {
      for (int j = 0; j <= degree; ++j)
        for (int i = 0; i + j <= degree; ++i)
          nodes_.emplace_back(static_cast<double>(i) / degree, static_cast<double>(j) / degree);
    }
    const int n = size();
    Eigen::MatrixXd vandermonde(n, n);
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c) vandermonde(r, c) = monomial(c, nodes_[r]);
    coefficients_ = vandermonde.inverse();
  }

  int degree() const { return degree_; }
  int size() const { return static_cast<int>(nodes_.size()); }
  static int dimension(int degree) { return (degree + 1) * (degree + 2) / 2; }
  const std::vector<Eigen::Vector2d>& nodes() const { return nodes_; }

  Eigen::VectorXd values(const Eigen::Vector2d& xi) const {
    Eigen::VectorXd m(size());
    for (int c = 0; c < size(); ++c) m[c] = monomial(c, xi);
    return coefficients_.transpose() * m;
  }

  /// size() x 2, reference-coordinate gradients.
  Eigen::MatrixXd gradients(const Eigen::Vector2d& xi) const {
    Eigen::MatrixXd dm(size(), 2);
    for (int c = 0; c < size(); ++c) {
      const auto [a, b] = exponents_[c];
      dm(c, 0) = a == 0 ? 0.0 : a * ipow(xi.x(), a - 1) * ipow(xi.y(), b);
      dm(c, 1) = b == 0 ? 0.0 : b * ipow(xi.x(), a) * ipow(xi.y(), b - 1);
    }
    return coefficients_.transpose() * dm;
  }

private:
  static double ipow(double x, int k) {
    double r = 1.0;
    for (int i = 0; i < k; ++i) r *= x;
    return r;
  }
  double monomial(int c, const Eigen::Vector2d& xi) const {
    return ipow(xi.x(), exponents_[c].first) * ipow(xi.y(), exponents_[c].second);
  }

  int degree_;
  std::vector<std::pair<int, int>> exponents_;
  std::vector<Eigen::Vector2d> nodes_;
  Eigen::MatrixXd coefficients_;
};

} // namespace dgrelax

#endif
