#ifndef DGRELAX_HARNESS_HPP_
#define DGRELAX_HARNESS_HPP_

#include "dgrelax/discrete_energy.hpp"
#include "dgrelax/error_norms.hpp"
#include "dgrelax/fields.hpp"
#include "dgrelax/mesh.hpp"
#include "dgrelax/minimizer.hpp"
#include "dgrelax/models.hpp"
#include "dgrelax/report.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace dgrelax {

enum class ExperimentKind { compression, twowell, qc_envelope, custom };

inline std::string_view to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::compression: return "compression";
    case ExperimentKind::twowell: return "twowell";
    case ExperimentKind::qc_envelope: return "qc_envelope";
    case ExperimentKind::custom: return "custom";
  }
  return "?";
}

inline ExperimentKind parse_experiment(std::string_view s) {
  if (s == "compression") return ExperimentKind::compression;
  if (s == "twowell") return ExperimentKind::twowell;
  if (s == "qc_envelope") return ExperimentKind::qc_envelope;
  if (s == "custom") return ExperimentKind::custom;
  throw std::invalid_argument("unknown experiment '" + std::string(s) + "'");
}

struct ModelSpec {
  std::string id = "detsq"; // quadratic | detsq | twowell
  Mat2 target = Mat2::Identity(); // quadratic
  double b0 = 0.9;                // twowell
  bool squared_first_factor = true;
};

inline AnyModel make_model(const ModelSpec& m) {
  if (m.id == "quadratic") return QuadraticModel{m.target};
  if (m.id == "detsq") return DetSquaredModel{};
  if (m.id == "twowell") return TwoWellModel{twowell_matrix(m.b0), m.squared_first_factor};
  throw std::invalid_argument("unknown model '" + m.id + "'");
}

inline Mat2 uniaxial_compression() { return (Mat2() << 1.0, 0.0, 0.0, 0.9).finished(); }

/// grad y0 = (I + R1 V) / 2, the midpoint of the rank-one segment between the wells.
inline Mat2 twowell_midpoint(double b0) {
  const TwinningSystem tw = solve_twinning(twowell_matrix(b0));
  return 0.5 * Mat2::Identity() + 0.5 * tw.solutions[0].rotation * tw.well;
}

struct QcSpec {
  std::optional<Mat2> F; // defaults to the two-well midpoint or the boundary gradient
  int resolution = 20;
  int restarts = 5;         // restart 0 starts from I_h(Fx) unperturbed
  double amplitude = 0.05;  // perturbation amplitude in units of h
  std::uint64_t seed = 20240601;
};

struct RunConfig {
  ExperimentKind kind = ExperimentKind::custom;
  std::string name;
  int nx = 8, ny = 8;
  BoundingBox bbox = unit_square;
  int degree = 1;
  int components = 2;
  ModelSpec model;
  /// Affine boundary datum y0(x) = F x; compression and custom runs.
  Mat2 boundary_gradient = Mat2::Identity();
  DiscreteEnergyConfig energy;
  MinimizeOptions minimizer;
  std::vector<double> alpha_sweep;
  std::vector<std::pair<int, int>> resolution_sweep;
  std::vector<PenaltyVariant> penalty_sweep;
  QcSpec qc;
  std::filesystem::path output_dir = "out";
  bool write_files = true;
  bool vtk = false;
  int profile_samples = 201;

  void validate() const {
    if (components != 2) throw std::invalid_argument("config: only N = 2 deformations are supported by the experiments");
    if (degree < 1) throw std::invalid_argument("config: space degree must be >= 1");
    if (nx < 1 || ny < 1 || bbox.degenerate()) throw std::invalid_argument("config: invalid mesh");
    minimizer.validate();
    if (!(energy.alpha >= 0.0) || !(energy.eps_pen >= 0.0)) throw std::invalid_argument("config: invalid energy parameters");
    for (double a : alpha_sweep)
      if (!(a >= 0.0)) throw std::invalid_argument("config: alpha sweep entries must be >= 0");
    for (auto [x, y] : resolution_sweep)
      if (x < 1 || y < 1) throw std::invalid_argument("config: resolution sweep entries must be >= 1");
    if (kind == ExperimentKind::compression || kind == ExperimentKind::twowell) {
      if (alpha_sweep.empty()) throw std::invalid_argument("config: alpha sweep must be non-empty");
      if (resolution_sweep.empty()) throw std::invalid_argument("config: resolution sweep must be non-empty");
    }
    if (kind == ExperimentKind::compression) {
      if (model.id != "detsq") throw std::invalid_argument("config: the compression experiment uses the detsq model");
      if (penalty_sweep.empty()) throw std::invalid_argument("config: penalty sweep must be non-empty");
    }
    if (kind == ExperimentKind::twowell && model.id != "twowell")
      throw std::invalid_argument("config: the twowell experiment uses the twowell model");
    if (kind == ExperimentKind::qc_envelope && (qc.restarts < 1 || qc.resolution < 1 || !(qc.amplitude >= 0.0)))
      throw std::invalid_argument("config: invalid qc settings");
    make_model(model);
  }
};

/// Defaults for each experiment; a config file overrides any of them.
inline RunConfig default_config(ExperimentKind kind) {
  RunConfig c;
  c.kind = kind;
  c.name = std::string(to_string(kind));
  switch (kind) {
    case ExperimentKind::compression:
      c.model.id = "detsq";
      c.boundary_gradient = uniaxial_compression();
      c.energy.alpha = 20.0;
      c.energy.penalty = PenaltyVariant::seminorm_based;
      c.minimizer.g_tol = 1e-8;
      c.alpha_sweep = {20.0, 40.0, 80.0, 160.0};
      c.resolution_sweep = {{16, 16}, {16, 32}, {32, 32}};
      c.penalty_sweep = {PenaltyVariant::seminorm_based, PenaltyVariant::convex_style};
      break;
    case ExperimentKind::twowell:
      c.model.id = "twowell";
      c.energy.alpha = 80.0;
      c.energy.penalty = PenaltyVariant::energy_based;
      c.energy.stable_rewrite = true;
      c.energy.eps_pen = 1e-30;
      c.minimizer.g_tol = 1e-12;
      c.minimizer.max_iterations = 20000;
      c.alpha_sweep = {80.0};
      c.resolution_sweep = {{5, 5}, {10, 10}, {20, 20}};
      c.penalty_sweep = {PenaltyVariant::energy_based};
      break;
    case ExperimentKind::qc_envelope:
      c.model.id = "twowell";
      c.energy.alpha = 80.0;
      c.energy.penalty = PenaltyVariant::energy_based;
      c.energy.stable_rewrite = true;
      c.energy.eps_pen = 1e-30;
      c.minimizer.g_tol = 1e-12;
      c.minimizer.max_iterations = 2500;
      break;
    case ExperimentKind::custom:
      break;
  }
  return c;
}

/// Everything one minimization needs. Runs built from specs share no state.
struct RunSpec {
  std::string experiment;
  std::string run;
  int nx = 8, ny = 8;
  BoundingBox bbox = unit_square;
  int degree = 1;
  ModelSpec model;
  Mat2 boundary_gradient = Mat2::Identity();
  DiscreteEnergyConfig energy; // boundary datum is filled in from boundary_gradient
  MinimizeOptions minimizer;
  int restart = 0;
  double perturbation = 0.0; // amplitude in units of the mesh size h
  std::uint64_t seed = 0;
};

struct RunOutcome {
  RunRecord record;
  std::shared_ptr<const DGSpace<2>> space;
  Eigen::VectorXd coefficients;
  MinimizeResult result;
  std::vector<AssembledEnergy> terms; // breakdown at each accepted iterate
  std::vector<TriangleFields> fields;
};

struct RunReport {
  std::vector<RunRecord> records;
  std::vector<RunOutcome> runs;
};

inline double mesh_size(const Mesh& mesh) {
  double h = 0.0;
  for (const auto& e : mesh.edges) h = std::max(h, e.length);
  return h;
}

inline std::string format_alpha(double a) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", a);
  return buf;
}

namespace detail {

inline void fill_record(RunRecord& r, const AssembledEnergy& a) {
  r.total = a.total;
  r.bulk = a.bulk;
  r.consistency = a.consistency;
  r.penalty = a.penalty;
  r.jump_aggregate = a.jump_aggregate;
  r.boundary_jump = a.boundary_jump;
  r.seminorm = a.seminorm;
}

} // namespace detail

/// Minimizes one discrete energy from I_h(y0), optionally perturbed. Failures
/// are recorded with status "error" instead of propagating, so a sweep keeps going.
inline RunOutcome execute_run(const RunSpec& spec) {
  RunOutcome out;
  RunRecord& rec = out.record;
  rec.experiment = spec.experiment;
  rec.run = spec.run;
  rec.model = spec.model.id;
  rec.formulation = std::string(to_string(spec.energy.formulation));
  rec.penalty_variant = std::string(to_string(spec.energy.penalty));
  rec.nx = spec.nx;
  rec.ny = spec.ny;
  rec.triangles = 4 * spec.nx * spec.ny;
  rec.degree = spec.degree;
  rec.alpha = spec.energy.alpha;
  rec.stable_rewrite = spec.energy.stable_rewrite ? 1 : 0;
  rec.eps_pen = spec.energy.eps_pen;
  rec.restart = spec.restart;

  const auto t0 = std::chrono::steady_clock::now();
  try {
    auto mesh = std::make_shared<const Mesh>(build_crisscross_mesh(spec.nx, spec.ny, spec.bbox));
    out.space = make_space<2>(mesh, spec.degree);
    const AffineMap y0{spec.boundary_gradient};
    DiscreteEnergyConfig cfg = spec.energy;
    cfg.boundary = [y0](const Vec2& x) { return y0(x); };
    const AnyModel model = make_model(spec.model);

    std::visit(
        [&](const auto& m) {
          using M = std::decay_t<decltype(m)>;
          DiscreteEnergy<M> energy(out.space, m, cfg);
          Eigen::VectorXd x0 = interpolate(out.space, y0).coefficients();
          if (spec.perturbation > 0.0) {
            std::mt19937_64 rng(spec.seed);
            const double amp = spec.perturbation * mesh_size(*mesh);
            std::uniform_real_distribution<double> u(-amp, amp);
            for (auto& v : x0) v += u(rng);
          }
          rec.homogeneous = m.value(spec.boundary_gradient) * spec.bbox.area();
          rec.initial_energy = energy.value(x0);
          auto& terms = out.terms;
          const ValueFn value = [&](const Eigen::VectorXd& x) { return energy.value(x); };
          const GradientFn gradient = [&](const Eigen::VectorXd& x) {
            Eigen::VectorXd g;
            terms.push_back(energy.evaluate_with_gradient(x, g));
            return g;
          };
          out.result = minimize(value, gradient, x0, spec.minimizer);
          out.coefficients = out.result.x;
          detail::fill_record(rec, energy.evaluate(out.coefficients));
          rec.iterations = out.result.iterations;
          rec.reason = std::string(to_string(out.result.reason));
          rec.grad_inf = out.result.grad_inf;
          if (out.result.reason == Termination::non_finite) rec.message = out.result.diagnostic;
          const DGField<2> yh(out.space, out.coefficients);
          const ErrorNorms err = error_norms<2>(yh, y0);
          rec.error_l1 = err.l1;
          rec.error_l2 = err.l2;
          rec.error_w11 = err.w11;
          out.fields = triangle_fields(yh, [&](const Mat2& F) { return m.value(F); }, energy.bulk_degree());
        },
        model);
  } catch (const std::exception& e) {
    rec.status = "error";
    rec.message = e.what();
  }
  rec.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

/// Writes trace_<run>.csv, fields_<run>.csv, profile_<run>.csv and optionally
/// fields_<run>.vtk / fields_<run>_deformed.vtk.
inline void write_run_outputs(const RunOutcome& run, const Mat2& boundary_gradient, const std::filesystem::path& dir,
                              bool vtk, int profile_samples, const BoundingBox& bbox) {
  std::filesystem::create_directories(dir);
  const std::string& id = run.record.run;
  write_trace_csv(run.result, run.terms, dir / ("trace_" + id + ".csv"));
  if (!run.space || run.coefficients.size() == 0) return;
  write_fields_csv(run.fields, dir / ("fields_" + id + ".csv"));
  const DGField<2> yh(run.space, run.coefficients);
  const AffineMap y0{boundary_gradient};
  if (profile_samples >= 2)
    write_profile_csv(line_profile(yh, Vec2(bbox.x0, bbox.y0), Vec2(bbox.x1, bbox.y1), profile_samples,
                                   [&](const Vec2& x) { return y0(x); }),
                      dir / ("profile_" + id + ".csv"));
  if (vtk) {
    write_fields_vtk(yh, run.fields, dir / ("fields_" + id + ".vtk"), false);
    write_fields_vtk(yh, run.fields, dir / ("fields_" + id + "_deformed.vtk"), true);
  }
}

/// Run specs of a sweep experiment, in resolution, alpha, penalty order.
inline std::vector<RunSpec> sweep_specs(const RunConfig& c) {
  std::vector<RunSpec> specs;
  auto resolutions = c.resolution_sweep;
  if (resolutions.empty()) resolutions = {{c.nx, c.ny}};
  auto alphas = c.alpha_sweep;
  if (alphas.empty()) alphas = {c.energy.alpha};
  auto penalties = c.penalty_sweep;
  if (penalties.empty()) penalties = {c.energy.penalty};
  const Mat2 F = c.kind == ExperimentKind::twowell ? twowell_midpoint(c.model.b0) : c.boundary_gradient;
  for (auto [nx, ny] : resolutions)
    for (double a : alphas)
      for (PenaltyVariant pv : penalties) {
        RunSpec s;
        s.experiment = c.name;
        s.nx = nx;
        s.ny = ny;
        s.bbox = c.bbox;
        s.degree = c.degree;
        s.model = c.model;
        s.boundary_gradient = F;
        s.energy = c.energy;
        s.energy.alpha = a;
        s.energy.penalty = pv;
        s.minimizer = c.minimizer;
        s.run = std::string(to_string(c.kind)) + "_" + std::to_string(nx) + "x" + std::to_string(ny) + "_a" +
                format_alpha(a) + "_" + std::string(to_string(pv));
        specs.push_back(std::move(s));
      }
  return specs;
}

inline RunReport run_specs(const std::vector<RunSpec>& specs, const RunConfig& c) {
  RunReport report;
  for (const RunSpec& s : specs) {
    RunOutcome o = execute_run(s);
    if (c.write_files) write_run_outputs(o, s.boundary_gradient, c.output_dir, c.vtk, c.profile_samples, s.bbox);
    report.records.push_back(o.record);
    report.runs.push_back(std::move(o));
  }
  return report;
}

/// det^2 under u0 = F0 x, every (resolution, alpha, penalty) combination.
inline RunReport run_compression(const RunConfig& c) {
  if (c.kind != ExperimentKind::compression) throw std::invalid_argument("run_compression: wrong experiment kind");
  c.validate();
  return run_specs(sweep_specs(c), c);
}

/// Two-well model with y0 = (I + R1 V) x / 2, one run per resolution and alpha.
inline RunReport run_twowell(const RunConfig& c) {
  if (c.kind != ExperimentKind::twowell) throw std::invalid_argument("run_twowell: wrong experiment kind");
  c.validate();
  return run_specs(sweep_specs(c), c);
}

struct QcEstimate {
  double estimate = 0.0;    // best total / |Omega|
  double density = 0.0;     // W(F)
  int best_restart = 0;
  RunReport report;
};

/// Estimates W^qc(F) as min E_h / |Omega| over seeded restarts on the given
/// resolution, all starting from I_h(F x) with restart r > 0 perturbed by
/// uniform noise of amplitude `amplitude * h` drawn with seed + r.
inline QcEstimate run_qc_envelope(const ModelSpec& model, const Mat2& F, int resolution, const RunConfig& c) {
  RunConfig cc = c;
  cc.model = model;
  cc.qc.resolution = resolution;
  cc.validate();
  std::vector<RunSpec> specs;
  for (int r = 0; r < cc.qc.restarts; ++r) {
    RunSpec s;
    s.experiment = cc.name;
    s.nx = s.ny = resolution;
    s.bbox = cc.bbox;
    s.degree = cc.degree;
    s.model = model;
    s.boundary_gradient = F;
    s.energy = cc.energy;
    s.minimizer = cc.minimizer;
    s.restart = r;
    s.perturbation = r == 0 ? 0.0 : cc.qc.amplitude;
    s.seed = cc.qc.seed + static_cast<std::uint64_t>(r);
    s.run = "qc_" + model.id + "_" + std::to_string(resolution) + "x" + std::to_string(resolution) + "_r" +
            std::to_string(r);
    specs.push_back(std::move(s));
  }
  QcEstimate q;
  q.report = run_specs(specs, cc);
  q.density = std::visit([&](const auto& m) { return m.value(F); }, make_model(model));
  bool any = false;
  for (std::size_t i = 0; i < q.report.records.size(); ++i) {
    const RunRecord& r = q.report.records[i];
    if (r.status != "ok") continue;
    const double est = r.total / cc.bbox.area();
    if (!any || est < q.estimate) {
      q.estimate = est;
      q.best_restart = r.restart;
      any = true;
    }
  }
  if (!any) throw std::runtime_error("run_qc_envelope: every restart failed");
  return q;
}

inline RunReport run_experiment(const RunConfig& c) {
  c.validate();
  RunReport report;
  switch (c.kind) {
    case ExperimentKind::compression: report = run_compression(c); break;
    case ExperimentKind::twowell: report = run_twowell(c); break;
    case ExperimentKind::custom: report = run_specs(sweep_specs(c), c); break;
    case ExperimentKind::qc_envelope: {
      const Mat2 F = c.qc.F ? *c.qc.F : (c.model.id == "twowell" ? twowell_midpoint(c.model.b0) : c.boundary_gradient);
      QcEstimate q = run_qc_envelope(c.model, F, c.qc.resolution, c);
      if (c.write_files) {
        std::ofstream os(c.output_dir / "qc_estimate.csv");
        os << "model,resolution,restarts,density,estimate,best_restart\n"
           << c.model.id << ',' << c.qc.resolution << ',' << c.qc.restarts << ',' << detail::format_double(q.density)
           << ',' << detail::format_double(q.estimate) << ',' << q.best_restart << '\n';
      }
      report = std::move(q.report);
      break;
    }
  }
  if (c.write_files) write_report_csv(report.records, c.output_dir / "report.csv");
  return report;
}

} // namespace dgrelax

#endif
