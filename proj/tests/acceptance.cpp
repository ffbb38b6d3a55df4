// Acceptance checks: one PASS/FAIL line per criterion, nonzero exit on any failure.
// Reports of the experiment runs go to ./acceptance_out.

#include "dgrelax/discrete_energy.hpp"
#include "dgrelax/harness.hpp"
#include "dgrelax/lifting.hpp"
#include "dgrelax/reconstruction.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <vector>

using namespace dgrelax;

namespace {

struct Outcome {
  bool passed = false;
  std::string detail;
};

const std::filesystem::path kOut = "acceptance_out";

Mat2 compression() { return uniaxial_compression(); }

std::shared_ptr<const DGSpace<2>> unit_space(int nx, int ny, int q = 1) {
  return make_space<2>(std::make_shared<const Mesh>(build_crisscross_mesh(nx, ny)), q);
}

Eigen::VectorXd noise(std::size_t n, std::mt19937_64& rng, double amp) {
  std::uniform_real_distribution<double> u(-amp, amp);
  Eigen::VectorXd v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

DGField<2> random_field(const std::shared_ptr<const DGSpace<2>>& s, std::mt19937_64& rng) {
  return DGField<2>(s, noise(s->total_dofs(), rng, 1.0));
}

DGField<2> perturbed_identity(const std::shared_ptr<const DGSpace<2>>& s, std::mt19937_64& rng, double amp) {
  DGField<2> f = interpolate(s, [](const Vec2& x) { return x; });
  f.coefficients() += noise(s->total_dofs(), rng, amp);
  return f;
}

DiscreteEnergyConfig datum_config(const Mat2& F, PenaltyVariant pv = PenaltyVariant::seminorm_based, double alpha = 20.0) {
  DiscreteEnergyConfig c;
  c.penalty = pv;
  c.alpha = alpha;
  c.boundary = [F](const Vec2& x) { return Vec2(F * x); };
  return c;
}

double spread(const std::vector<double>& v) {
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  return *hi / *lo;
}

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

// sum_{internal e} h_e^s int_e |[[u]]|^p
double weighted_jumps(const DGField<2>& f, double p, double s) {
  const Mesh& mesh = f.space().mesh();
  const auto rule = quadrature_edge(jump_quadrature_degree(f.space().degree(), p));
  std::vector<double> ts;
  for (const auto& q : rule.points) ts.push_back(q.x());
  double total = 0.0;
  for (std::size_t e = 0; e < mesh.num_edges(); ++e) {
    if (mesh.edges[e].is_boundary()) continue;
    const auto j = jump(f, static_cast<int>(e), ts);
    double acc = 0.0;
    for (std::size_t i = 0; i < ts.size(); ++i) acc += rule.weights[i] * std::pow(j[i].norm(), p);
    total += std::pow(mesh.edges[e].length, s) * mesh.edges[e].length * acc;
  }
  return total;
}

Outcome affine_exactness() {
  double worst = 0.0;
  for (auto [nx, ny] : {std::pair{1, 1}, std::pair{2, 1}, std::pair{4, 4}, std::pair{7, 3}, std::pair{16, 16}})
    for (PenaltyVariant pv : {PenaltyVariant::energy_based, PenaltyVariant::seminorm_based, PenaltyVariant::convex_style}) {
      const auto a = assemble_energy(interpolate(unit_space(nx, ny), AffineMap{compression()}), DetSquaredModel{},
                                     datum_config(compression(), pv));
      worst = std::max({worst, std::abs(a.total - 0.81), std::abs(a.consistency), std::abs(a.penalty)});
    }
  return {worst <= 1e-12, "max deviation " + fmt("%.3g", worst)};
}

template <class Model>
double gradient_error(const Model& m, const DGField<2>& f, DiscreteEnergyConfig cfg) {
  DiscreteEnergy<Model> E(f.space_ptr(), m, std::move(cfg));
  return check_gradient([&](const Eigen::VectorXd& x) { return E.value(x); },
                        [&](const Eigen::VectorXd& x) { return E.gradient(x); }, f.coefficients(), 1e-6);
}

Outcome gradient_oracle() {
  auto s = unit_space(4, 4);
  std::mt19937_64 rng(2024);
  double quad = 0.0, det = 0.0, tw = 0.0;
  auto tw_cfg = datum_config(compression(), PenaltyVariant::energy_based, 80.0);
  tw_cfg.stable_rewrite = true;
  for (int t = 0; t < 5; ++t) {
    quad = std::max(quad, gradient_error(QuadraticModel{compression()}, perturbed_identity(s, rng, 0.2),
                                         datum_config(compression())));
    det = std::max(det, gradient_error(DetSquaredModel{}, perturbed_identity(s, rng, 0.2), datum_config(compression())));
    tw = std::max(tw, gradient_error(TwoWellModel{twowell_matrix(0.9)}, perturbed_identity(s, rng, 0.05), tw_cfg));
  }
  return {quad < 1e-6 && det < 1e-6 && tw < 1e-5,
          "quadratic " + fmt("%.2e", quad) + ", det^2 " + fmt("%.2e", det) + ", two-well " + fmt("%.2e", tw)};
}

Outcome lifting_stability() {
  std::string detail;
  bool ok = true;
  for (double p : {2.0, 4.0}) {
    std::vector<double> worst;
    for (int n : {8, 16, 32}) {
      auto s = unit_space(n, n);
      std::mt19937_64 rng(300 + n);
      double w = 0.0;
      for (int t = 0; t < 10; ++t) {
        const auto f = random_field(s, rng);
        w = std::max(w, lp_norm_pow(lift(f), *s, p) / internal_jump_aggregate(f, p));
      }
      worst.push_back(w);
    }
    const double sp = spread(worst);
    ok = ok && sp < 2.0;
    detail += "p=" + fmt("%g", p) + ": C " + fmt("%.4g", worst[0]) + "/" + fmt("%.4g", worst[1]) + "/" +
              fmt("%.4g", worst[2]) + " spread " + fmt("%.3f", sp) + "; ";
  }
  return {ok, detail};
}

Outcome reconstruction_bounds() {
  std::string detail;
  bool ok = true;
  for (double p : {2.0, 4.0}) {
    std::vector<double> values, grads;
    for (int n : {8, 16, 32}) {
      auto s = unit_space(n, n);
      std::mt19937_64 rng(400 + n);
      double wv = 0.0, wg = 0.0;
      for (int t = 0; t < 10; ++t) {
        const auto u = random_field(s, rng);
        const DGField<2> diff(s, u.coefficients() - reconstruct_continuous(u).coefficients());
        wv = std::max(wv, lp_norm_pow(diff, p) / weighted_jumps(u, p, 1.0));
        wg = std::max(wg, broken_gradient_lp(diff, p) / weighted_jumps(u, p, 1.0 - p));
      }
      values.push_back(wv);
      grads.push_back(wg);
    }
    ok = ok && spread(values) < 2.0 && spread(grads) < 2.0;
    detail += "p=" + fmt("%g", p) + ": value spread " + fmt("%.3f", spread(values)) + ", gradient spread " +
              fmt("%.3f", spread(grads)) + "; ";
  }
  return {ok, detail};
}

Outcome penalty_dominance() {
  // the inequality is checked on the penalty as defined, eps_pen = 0
  int violations = 0;
  double min_margin = 1e300;
  for (int n : {4, 8}) {
    auto s = unit_space(n, n);
    std::mt19937_64 rng(500 + n);
    for (int t = 0; t < 10; ++t) {
      const auto f = random_field(s, rng);
      auto cfg = datum_config(compression());
      cfg.eps_pen = 0.0;
      const auto a = assemble_energy(f, DetSquaredModel{}, cfg);
      if (!(a.penalty >= a.internal_jump)) ++violations;
      min_margin = std::min(min_margin, a.penalty / a.internal_jump);
    }
  }
  std::vector<double> worst;
  for (int n : {8, 16, 32}) {
    auto s = unit_space(n, n);
    std::mt19937_64 rng(600 + n);
    double w = 0.0;
    for (int t = 0; t < 5; ++t) {
      const auto a = assemble_energy(perturbed_identity(s, rng, 0.5 / n), DetSquaredModel{}, datum_config(compression()));
      w = std::max(w, a.seminorm / (1.0 + a.total));
    }
    worst.push_back(w);
  }
  return {violations == 0 && spread(worst) < 2.0,
          std::to_string(violations) + " violations in 20 fields (min Pen/J " + fmt("%.3g", min_margin) +
              "), coercivity C " + fmt("%.4g", worst[0]) + "/" + fmt("%.4g", worst[1]) + "/" + fmt("%.4g", worst[2])};
}

Outcome compression_experiment() {
  RunConfig c = default_config(ExperimentKind::compression);
  c.name = "acceptance_compression";
  c.write_files = true;
  c.output_dir = kOut / "compression";
  std::vector<RunSpec> specs;
  c.resolution_sweep = {{16, 16}};
  c.alpha_sweep = {20.0};
  c.penalty_sweep = {PenaltyVariant::seminorm_based};
  specs = sweep_specs(c);
  c.alpha_sweep = {20.0, 40.0, 80.0, 160.0};
  c.penalty_sweep = {PenaltyVariant::convex_style};
  for (auto& s : sweep_specs(c)) specs.push_back(std::move(s));
  const auto rep = run_specs(specs, c);
  write_report_csv(rep.records, c.output_dir / "report.csv");

  const RunRecord& nw = rep.records[0];
  bool ok = nw.status == "ok" && nw.triangles == 1024;
  ok = ok && nw.total >= 0.81 - 1e-3 && nw.total <= 0.81 + 1e-2 && nw.error_w11 <= 1e-3;
  std::vector<double> convex;
  for (std::size_t i = 1; i < rep.records.size(); ++i) {
    ok = ok && rep.records[i].status == "ok";
    convex.push_back(rep.records[i].error_w11);
  }
  ok = ok && convex[0] >= 10.0 * nw.error_w11;
  for (std::size_t i = 1; i < convex.size(); ++i) ok = ok && convex[i] < convex[i - 1];
  std::string detail = "new: E " + fmt("%.6f", nw.total) + " W11 " + fmt("%.3e", nw.error_w11) + "; convex W11";
  for (double v : convex) detail += " " + fmt("%.3e", v);
  detail += "; ratio " + fmt("%.1f", convex[0] / nw.error_w11);
  return {ok, detail};
}

Outcome twowell_experiment() {
  RunConfig c = default_config(ExperimentKind::twowell);
  c.name = "acceptance_twowell";
  c.output_dir = kOut / "twowell";
  c.write_files = true;
  const auto rep = run_twowell(c);
  write_report_csv(rep.records, c.output_dir / "report.csv");

  const double wells[] = {1.0, std::sqrt(1.19)};
  bool ok = rep.records.size() == 3;
  std::string detail;
  for (std::size_t i = 0; i < rep.records.size(); ++i) {
    const RunRecord& r = rep.records[i];
    ok = ok && r.status == "ok";
    if (i > 0) ok = ok && r.total < rep.records[i - 1].total && r.error_l2 < rep.records[i - 1].error_l2;
    // transition layer: the highest-energy triangles carrying 90% of the bulk energy
    auto fields = rep.runs[i].fields;
    std::sort(fields.begin(), fields.end(), [](const auto& a, const auto& b) { return a.energy > b.energy; });
    double total = 0.0;
    for (const auto& t : fields) total += t.energy;
    std::size_t layer = 0;
    for (double acc = 0.0; layer < fields.size() && acc < 0.9 * total; ++layer) acc += fields[layer].energy;
    int outside = 0, in_wells = 0;
    for (std::size_t k = layer; k < fields.size(); ++k) {
      ++outside;
      if (std::abs(fields[k].lambda_max - wells[0]) <= 1e-2 || std::abs(fields[k].lambda_max - wells[1]) <= 1e-2)
        ++in_wells;
    }
    ok = ok && in_wells == outside;
    if (i + 1 == rep.records.size()) ok = ok && 2 * outside >= static_cast<int>(fields.size());
    detail += std::to_string(r.nx) + "x" + std::to_string(r.ny) + ": E " + fmt("%.4e", r.total) + " L2 " +
              fmt("%.4e", r.error_l2) + " wells " + std::to_string(in_wells) + "/" + std::to_string(outside) +
              " outside layer of " + std::to_string(fields.size()) + "; ";
  }
  return {ok, detail};
}

Outcome twinning() {
  const TwinningSystem tw = solve_twinning(twowell_matrix(0.9));
  const Vec2 expect[] = {Vec2(1, 0), Vec2(0, 1)};
  double nerr = 0.0, res = 0.0;
  for (int i = 0; i < 2; ++i) {
    const Vec2& n = tw.solutions[i].n;
    nerr = std::max(nerr, std::min((n - expect[i]).norm(), (n + expect[i]).norm()));
    res = std::max(res, tw.solutions[i].residual);
  }
  return {nerr <= 1e-8 && res < 1e-10, "normal error " + fmt("%.2e", nerr) + ", residual " + fmt("%.2e", res)};
}

Outcome qc_envelope() {
  RunConfig c = default_config(ExperimentKind::qc_envelope);
  c.name = "acceptance_qc";
  c.write_files = false;
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-0.3, 0.3);
  ModelSpec quad;
  quad.id = "quadratic";
  quad.target = compression();
  bool ok = true;
  double worst = 0.0;
  for (int t = 0; t < 3; ++t) {
    const Mat2 F = Mat2::Identity() + (Mat2() << u(rng), u(rng), u(rng), u(rng)).finished();
    const QcEstimate q = run_qc_envelope(quad, F, 8, c);
    worst = std::max(worst, std::abs(q.estimate - q.density));
  }
  ok = worst <= 1e-6;
  const Mat2 F = twowell_midpoint(0.9);
  const QcEstimate q = run_qc_envelope(c.model, F, 20, c);
  ok = ok && q.estimate < q.density;
  std::vector<RunRecord> records = q.report.records;
  write_report_csv(records, kOut / "qc" / "report.csv");
  return {ok, "quadratic max |est - W(F)| " + fmt("%.2e", worst) + "; two-well est " + fmt("%.6e", q.estimate) +
                  " < W(F) " + fmt("%.6e", q.density) + " (best restart " + std::to_string(q.best_restart) + ")"};
}

Outcome formulation_crosscheck() {
  double worst = 0.0;
  for (int q : {1, 2})
    for (auto [nx, ny] : {std::pair{3, 3}, std::pair{6, 4}}) {
      auto s = unit_space(nx, ny, q);
      const auto f = interpolate(s, [](const Vec2& x) {
        return Vec2(x.x() + 0.1 * std::sin(3.0 * x.y()), 0.9 * x.y() + 0.05 * x.x() * x.x());
      });
      auto cfg = datum_config(compression());
      worst = std::max(worst, std::abs(assemble_energy(f, DetSquaredModel{}, cfg).bulk -
                                       assemble_energy_lifted(f, DetSquaredModel{}, cfg).bulk));
      auto tw = datum_config(compression(), PenaltyVariant::energy_based, 80.0);
      tw.stable_rewrite = true;
      const TwoWellModel m{twowell_matrix(0.9)};
      worst = std::max(worst, std::abs(assemble_energy(f, m, tw).bulk - assemble_energy_lifted(f, m, tw).bulk));
    }
  return {worst <= 1e-12, "max bulk difference " + fmt("%.2e", worst)};
}

} // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double budget_s;
    std::function<Outcome()> fn;
  };
  const std::vector<Criterion> criteria = {
      {1, "affine exactness", 1.0, affine_exactness},
      {2, "gradient oracle", 30.0, gradient_oracle},
      {3, "lifting stability", 60.0, lifting_stability},
      {4, "reconstruction bounds", 60.0, reconstruction_bounds},
      {5, "penalty dominance and coercivity", 30.0, penalty_dominance},
      {6, "compression experiment", 600.0, compression_experiment},
      {7, "two-well experiment", 900.0, twowell_experiment},
      {8, "twinning solver", 1.0, twinning},
      {9, "qc envelope", 600.0, qc_envelope},
      {10, "formulation cross-check", 5.0, formulation_crosscheck},
  };
  std::filesystem::create_directories(kOut);
  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool pass = o.passed && dt < c.budget_s;
    if (!pass) ++failed;
    std::printf("%s %d %s [%.2fs / %.0fs] %s\n", pass ? "PASS" : "FAIL", c.id, c.name, dt, c.budget_s, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
