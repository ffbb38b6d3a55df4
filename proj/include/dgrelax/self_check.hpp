#ifndef DGRELAX_SELF_CHECK_HPP_
#define DGRELAX_SELF_CHECK_HPP_

#include "dgrelax/discrete_energy.hpp"
#include "dgrelax/harness.hpp"
#include "dgrelax/lifting.hpp"
#include "dgrelax/minimizer.hpp"
#include "dgrelax/models.hpp"
#include "dgrelax/reconstruction.hpp"
#include "dgrelax/report.hpp"

#include <cmath>
#include <exception>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace dgrelax {

struct CheckResult {
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  bool passed = false;
  std::string message;
};

namespace detail {

inline CheckResult run_check(const std::string& name, double threshold, const std::function<double()>& fn) {
  CheckResult r{name, 0.0, threshold, false, {}};
  try {
    r.value = fn();
    r.passed = std::isfinite(r.value) && r.value <= threshold;
  } catch (const std::exception& e) {
    r.message = e.what();
  }
  return r;
}

template <class Model>
double gradient_error(const Model& model, DiscreteEnergyConfig cfg, int n, double amplitude, std::uint64_t seed) {
  auto mesh = std::make_shared<const Mesh>(build_crisscross_mesh(n, n));
  auto space = make_space<2>(mesh, 1);
  cfg.boundary = [](const Vec2& x) { return Vec2(uniaxial_compression() * x); };
  DiscreteEnergy<Model> E(space, model, cfg);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-amplitude, amplitude);
  Eigen::VectorXd x = interpolate(space, [](const Vec2& p) { return p; }).coefficients();
  for (auto& v : x) v += u(rng);
  return check_gradient([&](const Eigen::VectorXd& z) { return E.value(z); },
                        [&](const Eigen::VectorXd& z) { return E.gradient(z); }, x, 1e-6);
}

} // namespace detail

/// Quick operator and gradient checks behind `dgrelax check`.
inline std::vector<CheckResult> run_self_checks() {
  std::vector<CheckResult> out;
  const Mat2 F0 = uniaxial_compression();

  out.push_back(detail::run_check("affine exactness (detsq, 4x4)", 1e-12, [&] {
    auto space = make_space<2>(std::make_shared<const Mesh>(build_crisscross_mesh(4, 4)), 1);
    DiscreteEnergyConfig cfg;
    cfg.boundary = [&](const Vec2& x) { return Vec2(F0 * x); };
    const auto a = assemble_energy(interpolate(space, AffineMap{F0}), DetSquaredModel{}, cfg);
    return std::abs(a.total - 0.81) + std::abs(a.consistency) + std::abs(a.penalty);
  }));

  out.push_back(detail::run_check("gradient check (quadratic)", 1e-8, [&] {
    return detail::gradient_error(QuadraticModel{F0}, DiscreteEnergyConfig{}, 2, 0.1, 1);
  }));
  out.push_back(detail::run_check("gradient check (detsq)", 1e-6, [&] {
    return detail::gradient_error(DetSquaredModel{}, DiscreteEnergyConfig{}, 2, 0.1, 2);
  }));
  out.push_back(detail::run_check("gradient check (detsq, lifted)", 1e-6, [&] {
    DiscreteEnergyConfig cfg;
    cfg.formulation = Formulation::lifted_gradient;
    return detail::gradient_error(DetSquaredModel{}, cfg, 2, 0.1, 3);
  }));
  out.push_back(detail::run_check("gradient check (twowell, stable rewrite)", 1e-5, [&] {
    DiscreteEnergyConfig cfg;
    cfg.penalty = PenaltyVariant::energy_based;
    cfg.stable_rewrite = true;
    cfg.alpha = 80.0;
    return detail::gradient_error(TwoWellModel{twowell_matrix(0.9)}, cfg, 2, 0.1, 4);
  }));

  out.push_back(detail::run_check("lifting of a continuous field", 1e-12, [&] {
    auto space = make_space<2>(std::make_shared<const Mesh>(build_crisscross_mesh(3, 3)), 2);
    const auto f = interpolate(space, [](const Vec2& x) { return Vec2(std::sin(x.x()) * x.y(), x.x() * x.x()); });
    double worst = 0.0;
    for (const auto& m : lift(f).nodal) worst = std::max(worst, m.norm());
    return worst;
  }));

  out.push_back(detail::run_check("reconstruction has no internal jumps", 1e-11, [&] {
    auto space = make_space<2>(std::make_shared<const Mesh>(build_crisscross_mesh(3, 3)), 1);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Eigen::VectorXd c(space->total_dofs());
    for (auto& v : c) v = u(rng);
    return std::sqrt(internal_jump_aggregate(reconstruct_continuous(DGField<2>(space, c)), 2.0));
  }));

  out.push_back(detail::run_check("twinning normals for b0 = 0.9", 1e-8, [&] {
    const auto tw = solve_twinning(twowell_matrix(0.9));
    const Vec2 e1(1.0, 0.0), e2(0.0, 1.0);
    return std::max({(tw.solutions[0].n - e1).norm(), (tw.solutions[1].n - e2).norm(), tw.solutions[0].residual,
                     tw.solutions[1].residual});
  }));

  out.push_back(detail::run_check("minimizer on (x - 3)^4", 1e-4, [&] {
    Eigen::VectorXd x0(1);
    x0[0] = 0.0;
    MinimizeOptions o;
    o.g_tol = 1e-14;
    const auto r = minimize([](const Eigen::VectorXd& x) { return std::pow(x[0] - 3.0, 4); },
                            [](const Eigen::VectorXd& x) {
                              Eigen::VectorXd g(1);
                              g[0] = 4.0 * std::pow(x[0] - 3.0, 3);
                              return g;
                            },
                            x0, o);
    return std::abs(r.x[0] - 3.0);
  }));

  out.push_back(detail::run_check("report round trip", 0.0, [&] {
    RunRecord r;
    r.run = "check";
    r.total = 0.1 + 0.2;
    r.error_l2 = std::nextafter(1.0 / 3.0, 1.0);
    r.alpha = 1e-300;
    std::stringstream ss;
    write_report_csv({r}, ss);
    const auto back = read_report_csv(ss);
    return back.size() == 1 && back[0].same_outcome(r) && back[0].wall_time == r.wall_time ? 0.0 : 1.0;
  }));
  return out;
}

} // namespace dgrelax

#endif
