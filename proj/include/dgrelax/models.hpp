#ifndef DGRELAX_MODELS_HPP_
#define DGRELAX_MODELS_HPP_

#include "dgrelax/mesh.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <concepts>
#include <numbers>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace dgrelax {

/// Constants of the growth sandwich -c0 + c1|F|^p <= W(F) <= c2 (1 + |F|^p)
/// and of |W(A) - W(B)| <= L (1 + |A|^{p-1} + |B|^{p-1}) |A - B|.
struct GrowthConstants {
  double c0 = 0.0, c1 = 0.0, c2 = 0.0, lipschitz = 0.0;
};

/// Strain-energy density on 2x2 matrices. Norms are Frobenius throughout.
template <class M>
concept EnergyModel = requires(const M& m, const Mat2& F) {
  { m.value(F) } -> std::convertible_to<double>;
  { m.derivative(F) } -> std::convertible_to<Mat2>;
  // D^2W(F)[H], i.e. d/dt DW(F + tH) at t = 0
  { m.second_derivative_action(F, F) } -> std::convertible_to<Mat2>;
  { m.growth_exponent() } -> std::convertible_to<double>;
  { m.polynomial_degree() } -> std::convertible_to<int>;
  { m.name() } -> std::convertible_to<std::string_view>;
};

/// 2x2 cofactor matrix; det(F + H) = det F + cof(F):H + det H.
inline Mat2 cofactor(const Mat2& F) {
  Mat2 c;
  c << F(1, 1), -F(1, 0), -F(0, 1), F(0, 0);
  return c;
}

/// W(F) = |F - target|^2, p = 2.
struct QuadraticModel {
  Mat2 target = Mat2::Identity();

  double value(const Mat2& F) const { return (F - target).squaredNorm(); }
  Mat2 derivative(const Mat2& F) const { return 2.0 * (F - target); }
  Mat2 second_derivative_action(const Mat2&, const Mat2& H) const { return 2.0 * H; }
  double growth_exponent() const { return 2.0; }
  int polynomial_degree() const { return 2; }
  std::string_view name() const { return "quadratic"; }
  GrowthConstants growth() const {
    const double t2 = target.squaredNorm();
    return {t2, 0.5, 2.0 * std::max(1.0, t2), std::max(1.0, 2.0 * std::sqrt(t2))};
  }
};

inline QuadraticModel model_quadratic(const Mat2& target) { return {target}; }

/// W(F) = (det F)^2 with declared p = 4. Polyconvex but not coercive: the
/// lower growth bound holds only with c1 = 0.
struct DetSquaredModel {
  double value(const Mat2& F) const {
    const double d = F.determinant();
    return d * d;
  }
  Mat2 derivative(const Mat2& F) const { return 2.0 * F.determinant() * cofactor(F); }
  Mat2 second_derivative_action(const Mat2& F, const Mat2& H) const {
    const Mat2 c = cofactor(F);
    return 2.0 * (c.cwiseProduct(H).sum()) * c + 2.0 * F.determinant() * cofactor(H);
  }
  double growth_exponent() const { return 4.0; }
  int polynomial_degree() const { return 4; }
  std::string_view name() const { return "detsq"; }
  GrowthConstants growth() const { return {0.0, 0.0, 0.25, 0.5}; }
};

inline DetSquaredModel model_detsq() { return {}; }

/// Frame-indifferent two-well density on C = F^T F:
///   W(F) = |C - V^2|^2 |C - I|^2   (p = 8), or with `squared_first_factor`
///   off, W(F) = |C - V^2| |C - I|^2 (p = 6, not C^1 at the V-well).
struct TwoWellModel {
  Mat2 well = Mat2::Identity(); // V
  bool squared_first_factor = true;

  Mat2 well_squared() const { return well * well; }

  double value(const Mat2& F) const {
    const Mat2 C = F.transpose() * F;
    const double a = (C - well_squared()).squaredNorm();
    const double b = (C - Mat2::Identity()).squaredNorm();
    return (squared_first_factor ? a : std::sqrt(a)) * b;
  }

  Mat2 derivative(const Mat2& F) const { return 2.0 * F * stress_c(F.transpose() * F); }

  Mat2 second_derivative_action(const Mat2& F, const Mat2& H) const {
    const Mat2 C = F.transpose() * F;
    const Mat2 dC = H.transpose() * F + F.transpose() * H;
    const Mat2 A = C - well_squared();
    const Mat2 B = C - Mat2::Identity();
    const double b = B.squaredNorm();
    const double db = 2.0 * B.cwiseProduct(dC).sum();
    Mat2 dG;
    if (squared_first_factor) {
      const double a = A.squaredNorm();
      const double da = 2.0 * A.cwiseProduct(dC).sum();
      dG = 2.0 * dC * b + 2.0 * A * db + 2.0 * da * B + 2.0 * a * dC;
    } else {
      const double na = A.norm();
      if (na == 0.0) {
        dG = Mat2::Zero();
      } else {
        const double dna = A.cwiseProduct(dC).sum() / na;
        const Mat2 unit = A / na;
        const Mat2 dunit = dC / na - A * (dna / (na * na));
        dG = dunit * b + unit * db + 2.0 * dna * B + 2.0 * na * dC;
      }
    }
    return 2.0 * H * stress_c(C) + 2.0 * F * dG;
  }

  double growth_exponent() const { return squared_first_factor ? 8.0 : 6.0; }
  int polynomial_degree() const { return 8; }
  std::string_view name() const { return "twowell"; }
  GrowthConstants growth() const {
    // observed on |F| in [0.1, 10] for b0 = 0.9; see tests/test_models.cpp
    return squared_first_factor ? GrowthConstants{32.0, 1.0 / 16.0, 8.0, 16.0} : GrowthConstants{4.0, 1.0 / 16.0, 6.0, 8.0};
  }

private:
  /// dW/dC (symmetric).
  Mat2 stress_c(const Mat2& C) const {
    const Mat2 A = C - well_squared();
    const Mat2 B = C - Mat2::Identity();
    const double b = B.squaredNorm();
    if (squared_first_factor) return 2.0 * A * b + 2.0 * A.squaredNorm() * B;
    const double na = A.norm();
    return (na == 0.0 ? Mat2::Zero() : Mat2(A / na * b)) + 2.0 * na * B;
  }
};

static_assert(EnergyModel<QuadraticModel>);
static_assert(EnergyModel<DetSquaredModel>);
static_assert(EnergyModel<TwoWellModel>);

using AnyModel = std::variant<QuadraticModel, DetSquaredModel, TwoWellModel>;

inline Mat2 rotation(double theta) {
  Mat2 r;
  r << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
  return r;
}

/// One solution of R V - I = d (x) n.
struct TwinSolution {
  double angle = 0.0;
  Mat2 rotation = Mat2::Identity();
  Vec2 d = Vec2::Zero();
  Vec2 n = Vec2::Zero();
  double residual = 0.0; // |R V - I - d (x) n|
};

struct TwinningSystem {
  Mat2 well = Mat2::Identity();
  std::array<TwinSolution, 2> solutions;
};

/// Finds both rotations R(theta) in SO(2) making R V - I rank one, by
/// bracketing sign changes of theta -> det(R(theta) V - I) on (-pi, pi] and
/// bisecting, then factors R V - I = d (x) n from its dominant singular pair.
/// Solutions are ordered so that the first normal is the one closer to (1,0).
inline TwinningSystem solve_twinning(const Mat2& V) {
  if ((V - V.transpose()).norm() > 1e-12 * V.norm()) throw std::invalid_argument("solve_twinning: V must be symmetric");
  Eigen::SelfAdjointEigenSolver<Mat2> eig(V);
  const Vec2 lambda = eig.eigenvalues();
  if (!(lambda[0] > 0.0)) throw std::invalid_argument("solve_twinning: V must be positive definite");
  if (!(lambda[0] < 1.0 && lambda[1] > 1.0))
    throw std::invalid_argument("solve_twinning: need eigenvalues lambda1 < 1 < lambda2 for a rank-one connection");

  const auto f = [&](double th) { return (rotation(th) * V - Mat2::Identity()).determinant(); };
  constexpr int samples = 720;
  std::vector<double> roots;
  const double lo = -std::numbers::pi;
  const double step = 2.0 * std::numbers::pi / samples;
  for (int s = 0; s < samples && roots.size() < 2; ++s) {
    double a = lo + s * step, b = a + step;
    double fa = f(a), fb = f(b);
    if (fa == 0.0) {
      roots.push_back(a);
      continue;
    }
    if (fa * fb > 0.0) continue;
    double m = 0.5 * (a + b);
    for (int it = 0; it < 200; ++it) {
      m = 0.5 * (a + b);
      const double fm = f(m);
      if (std::abs(fm) < 1e-13 && b - a < 1e-15) break;
      if (fm == 0.0) break;
      if ((fa < 0.0) == (fm < 0.0)) {
        a = m;
        fa = fm;
      } else {
        b = m;
      }
    }
    roots.push_back(m);
  }
  if (roots.size() != 2) throw std::runtime_error("solve_twinning: wells are not rank-one connected (no sign change)");

  TwinningSystem sys;
  sys.well = V;
  for (int i = 0; i < 2; ++i) {
    TwinSolution& s = sys.solutions[i];
    s.angle = roots[i];
    s.rotation = rotation(roots[i]);
    const Mat2 M = s.rotation * V - Mat2::Identity();
    Eigen::JacobiSVD<Mat2> svd(M, Eigen::ComputeFullU | Eigen::ComputeFullV);
    if (svd.singularValues()[1] > 1e-10) throw std::runtime_error("solve_twinning: R V - I is not rank one");
    Vec2 n = svd.matrixV().col(0);
    Vec2 d = svd.singularValues()[0] * svd.matrixU().col(0);
    const double lead = std::abs(n.x()) > 1e-14 ? n.x() : n.y();
    if (lead < 0.0) {
      n = -n;
      d = -d;
    }
    s.n = n;
    s.d = d;
    s.residual = (M - d * n.transpose()).norm();
  }
  if (std::abs(sys.solutions[1].n.x()) > std::abs(sys.solutions[0].n.x())) std::swap(sys.solutions[0], sys.solutions[1]);
  return sys;
}

/// V = [[(a0+b0)/2, (b0-a0)/2], [(b0-a0)/2, (a0+b0)/2]] with a0 = sqrt(2 - b0^2);
/// eigenvalues b0 (along (1,1)) and a0 (along (1,-1)).
inline Mat2 twowell_matrix(double b0) {
  if (!(b0 > 0.0 && b0 < 1.0)) throw std::invalid_argument("twowell: b0 must lie in (0, 1)");
  const double a0 = std::sqrt(2.0 - b0 * b0);
  Mat2 V;
  V << 0.5 * (a0 + b0), 0.5 * (b0 - a0), 0.5 * (b0 - a0), 0.5 * (a0 + b0);
  return V;
}

inline std::pair<TwoWellModel, TwinningSystem> model_twowell(double b0, bool squared_first_factor = true) {
  const Mat2 V = twowell_matrix(b0);
  return {TwoWellModel{V, squared_first_factor}, solve_twinning(V)};
}

} // namespace dgrelax

#endif
