#ifndef DGRELAX_MINIMIZER_HPP_
#define DGRELAX_MINIMIZER_HPP_

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <deque>
#include <exception>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace dgrelax {

struct MinimizeOptions {
  int max_iterations = 5000;
  double g_tol = 1e-8;  // on |grad|_inf
  double f_tol = 1e-12; // relative energy decrease over `stall_window` iterations
  int stall_window = 10;
  int memory = 10;
  double armijo_c1 = 1e-4;
  double backtrack_factor = 0.5;
  int max_backtracks = 60;
  unsigned long long seed = 0;

  void validate() const {
    if (max_iterations < 0 || !(g_tol > 0.0) || !(f_tol > 0.0) || memory < 1 || stall_window < 1 ||
        !(armijo_c1 > 0.0 && armijo_c1 < 1.0) || !(backtrack_factor > 0.0 && backtrack_factor < 1.0) ||
        max_backtracks < 1)
      throw std::invalid_argument("MinimizeOptions: invalid tolerances or line-search parameters");
  }
};

enum class Termination { gradient, energy_stall, max_iterations, line_search, non_finite };

inline std::string_view to_string(Termination t) {
  switch (t) {
    case Termination::gradient: return "gradient";
    case Termination::energy_stall: return "energy-stall";
    case Termination::max_iterations: return "max-iter";
    case Termination::line_search: return "line-search";
    case Termination::non_finite: return "non-finite";
  }
  return "?";
}

struct TraceEntry {
  int iteration = 0;
  double energy = 0.0;
  double grad_inf = 0.0;
  double step = 0.0;
};

struct MinimizeResult {
  Eigen::VectorXd x;
  double energy = 0.0;
  double grad_inf = 0.0;
  int iterations = 0;
  Termination reason = Termination::max_iterations;
  std::vector<TraceEntry> trace;
  std::string diagnostic;
};

using ValueFn = std::function<double(const Eigen::VectorXd&)>;
using GradientFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

namespace detail {

/// Evaluates f, mapping exceptions and non-finite results to +inf so the
/// line search treats them as rejected trial points.
inline double safe_value(const ValueFn& f, const Eigen::VectorXd& x, std::string* why) {
  try {
    const double v = f(x);
    if (!std::isfinite(v)) {
      if (why) *why = "non-finite energy";
      return std::numeric_limits<double>::infinity();
    }
    return v;
  } catch (const std::exception& e) {
    if (why) *why = e.what();
    return std::numeric_limits<double>::infinity();
  }
}

} // namespace detail

/// Limited-memory BFGS with Armijo backtracking.
///
/// Every accepted step strictly lowers the energy, so the returned point is
/// never worse than the start. Trial points with non-finite energy count as
/// failed Armijo tests; a non-finite energy or gradient at an accepted point
/// aborts with the last finite iterate.
inline MinimizeResult minimize(const ValueFn& value, const GradientFn& gradient, const Eigen::VectorXd& x0,
                               const MinimizeOptions& options = {}) {
  options.validate();
  MinimizeResult r;
  r.x = x0;
  std::string why;
  r.energy = detail::safe_value(value, r.x, &why);
  if (!std::isfinite(r.energy)) {
    r.reason = Termination::non_finite;
    r.diagnostic = "initial point: " + why;
    return r;
  }
  Eigen::VectorXd g = gradient(r.x);
  if (!g.allFinite()) {
    r.reason = Termination::non_finite;
    r.diagnostic = "initial point: non-finite gradient";
    return r;
  }
  r.grad_inf = g.lpNorm<Eigen::Infinity>();
  r.trace.push_back({0, r.energy, r.grad_inf, 0.0});

  std::deque<Eigen::VectorXd> s_hist, y_hist;
  std::deque<double> rho_hist;
  std::vector<double> energies{r.energy};

  for (int it = 1;; ++it) {
    if (r.grad_inf <= options.g_tol) {
      r.reason = Termination::gradient;
      break;
    }
    if (it > options.max_iterations) {
      r.reason = Termination::max_iterations;
      break;
    }

    bool accepted = false;
    double step = 0.0, f_new = 0.0;
    Eigen::VectorXd x_new;
    for (int attempt = 0; attempt < 2 && !accepted; ++attempt) {
      // two-loop recursion
      Eigen::VectorXd d = -g;
      const std::size_t m = s_hist.size();
      std::vector<double> alpha(m);
      for (std::size_t i = m; i-- > 0;) {
        alpha[i] = rho_hist[i] * s_hist[i].dot(d);
        d -= alpha[i] * y_hist[i];
      }
      if (m > 0) d *= s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
      for (std::size_t i = 0; i < m; ++i) {
        const double beta = rho_hist[i] * y_hist[i].dot(d);
        d += (alpha[i] - beta) * s_hist[i];
      }
      double slope = g.dot(d);
      if (!(slope < 0.0)) {
        d = -g;
        slope = -g.squaredNorm();
        s_hist.clear();
        y_hist.clear();
        rho_hist.clear();
      }
      step = m == 0 ? std::min(1.0, 1.0 / g.lpNorm<Eigen::Infinity>()) : 1.0;
      for (int bt = 0; bt < options.max_backtracks; ++bt) {
        x_new = r.x + step * d;
        f_new = detail::safe_value(value, x_new, nullptr);
        if (f_new <= r.energy + options.armijo_c1 * step * slope && f_new < r.energy) {
          accepted = true;
          break;
        }
        step *= options.backtrack_factor;
      }
      if (!accepted) {
        if (m == 0) break;
        s_hist.clear();
        y_hist.clear();
        rho_hist.clear();
      }
    }
    if (!accepted) {
      r.reason = Termination::line_search;
      r.diagnostic = "no Armijo step found along the steepest-descent direction";
      break;
    }

    Eigen::VectorXd g_new;
    try {
      g_new = gradient(x_new);
    } catch (const std::exception& e) {
      r.reason = Termination::non_finite;
      r.diagnostic = e.what();
      break;
    }
    if (!g_new.allFinite()) {
      r.reason = Termination::non_finite;
      r.diagnostic = "non-finite gradient at iteration " + std::to_string(it);
      break;
    }
    Eigen::VectorXd s = x_new - r.x;
    Eigen::VectorXd y = g_new - g;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm() && sy > 0.0) {
      s_hist.push_back(std::move(s));
      y_hist.push_back(std::move(y));
      rho_hist.push_back(1.0 / sy);
      if (static_cast<int>(s_hist.size()) > options.memory) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
    }
    r.x = std::move(x_new);
    g = std::move(g_new);
    r.energy = f_new;
    r.grad_inf = g.lpNorm<Eigen::Infinity>();
    r.iterations = it;
    r.trace.push_back({it, r.energy, r.grad_inf, step});
    energies.push_back(r.energy);

    const int w = options.stall_window;
    if (static_cast<int>(energies.size()) > w) {
      const double old = energies[energies.size() - 1 - w];
      const double scale = std::max(std::abs(r.energy), std::numeric_limits<double>::min());
      if ((old - r.energy) <= options.f_tol * scale) {
        r.reason = Termination::energy_stall;
        break;
      }
    }
  }
  return r;
}

/// Worst componentwise relative error of `gradient` against central
/// differences of `value` with the given step. Components are compared
/// relative to max(|g_i|, |fd_i|, 1e-2 |fd|_inf), so entries that are tiny
/// compared with the rest of the gradient do not dominate through roundoff.
inline double check_gradient(const ValueFn& value, const GradientFn& gradient, const Eigen::VectorXd& x, double step) {
  if (!(step > 0.0)) throw std::invalid_argument("check_gradient: step must be positive");
  const Eigen::VectorXd g = gradient(x);
  Eigen::VectorXd fd(x.size());
  Eigen::VectorXd xp = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double xi = x[i];
    xp[i] = xi + step;
    const double fp = value(xp);
    xp[i] = xi - step;
    const double fm = value(xp);
    xp[i] = xi;
    fd[i] = (fp - fm) / (2.0 * step);
  }
  const double floor = std::max(1e-2 * fd.lpNorm<Eigen::Infinity>(), 1e-12);
  double worst = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double denom = std::max({std::abs(g[i]), std::abs(fd[i]), floor});
    worst = std::max(worst, std::abs(g[i] - fd[i]) / denom);
  }
  return worst;
}

} // namespace dgrelax

#endif
