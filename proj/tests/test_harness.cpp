#include "dgrelax/config.hpp"
#include "dgrelax/harness.hpp"
#include "dgrelax/self_check.hpp"

#include "test_support.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

using namespace dgrelax;
using dgrelax::testing::compression;

namespace {

std::filesystem::path scratch_dir(const std::string& name) {
  auto d = std::filesystem::temp_directory_path() / ("dgrelax_test_" + name);
  std::filesystem::remove_all(d);
  return d;
}

int count_lines(const std::filesystem::path& f) {
  std::ifstream is(f);
  std::string line;
  int n = 0;
  while (std::getline(is, line)) ++n;
  return n;
}

RunConfig small_compression() {
  RunConfig c = default_config(ExperimentKind::compression);
  c.name = "small";
  c.resolution_sweep = {{2, 2}, {3, 2}};
  c.alpha_sweep = {20.0, 40.0};
  c.penalty_sweep = {PenaltyVariant::seminorm_based, PenaltyVariant::convex_style};
  c.minimizer.max_iterations = 200;
  c.write_files = false;
  return c;
}

} // namespace

TEST(ErrorNorms, AffineInterpolantIsExact) {
  auto s = dgrelax::testing::space<2>(3, 3, 1);
  const AffineMap y0{compression(), Vec2(0.1, 0.2)};
  const auto err = error_norms<2>(interpolate(s, y0), y0);
  EXPECT_LT(err.l1, 1e-12);
  EXPECT_LT(err.l2, 1e-12);
  EXPECT_LT(err.w11, 1e-12);
}

TEST(ErrorNorms, ConstantShift) {
  auto s = make_space<2>(std::make_shared<const Mesh>(build_crisscross_mesh(2, 3, {0.0, 0.0, 2.0, 1.5})), 1);
  const AffineMap y0{compression()};
  const Vec2 c(0.3, 0.4);
  const auto err = error_norms<2>(interpolate(s, AffineMap{compression(), c}), y0);
  EXPECT_NEAR(err.l1, 0.5 * 3.0, 1e-12);
  EXPECT_NEAR(err.l2, std::sqrt(0.25 * 3.0), 1e-12);
  EXPECT_LT(err.w11, 1e-12);
}

TEST(ErrorNorms, OneElementPerturbation) {
  auto s = dgrelax::testing::space<2>(2, 2, 1);
  const AffineMap y0{compression()};
  DGField<2> f = interpolate(s, y0);
  const Vec2 c(0.0, -0.6);
  for (int i = 0; i < 3; ++i) f.coefficients().segment<2>(s->dof(5, i, 0)) += c;
  const auto err = error_norms<2>(f, y0);
  EXPECT_NEAR(err.l1, 0.6 * s->area(5), 1e-12);
  // only jumps across the internal edges of element 5 contribute to W11
  double perim = 0.0;
  for (int e : s->mesh().triangle_to_edges[5])
    if (s->mesh().edges[e].is_internal()) perim += s->mesh().edges[e].length;
  EXPECT_NEAR(err.w11, 0.6 * perim, 1e-12);
}

TEST(Report, RoundTripIsBitExact) {
  RunRecord r;
  r.experiment = "compression";
  r.run = "compression_16x16_a20_seminorm_based";
  r.model = "detsq";
  r.formulation = "interior_penalty";
  r.penalty_variant = "seminorm_based";
  r.reason = "energy-stall";
  r.message = "commas, and\nnewlines";
  r.nx = 16;
  r.ny = 32;
  r.triangles = 2048;
  r.iterations = 1234;
  r.alpha = 20.0;
  r.eps_pen = 1e-30;
  r.total = 0.80996912345678901;
  r.bulk = 1.0 / 3.0;
  r.consistency = -2.5e-17;
  r.penalty = std::nextafter(1.0, 2.0);
  r.error_w11 = 3.7e-5;
  r.wall_time = 0.25;
  std::stringstream ss;
  write_report_csv({r, r}, ss);
  const auto back = read_report_csv(ss);
  ASSERT_EQ(back.size(), 2u);
  RunRecord expect = r;
  expect.message = "commas; and;newlines";
  EXPECT_TRUE(back[0].same_outcome(expect));
  EXPECT_TRUE(back[1].same_outcome(expect));
  EXPECT_EQ(back[0].total, r.total);
  EXPECT_EQ(back[0].bulk, r.bulk);
  EXPECT_EQ(back[0].penalty, r.penalty);
  EXPECT_EQ(back[0].wall_time, r.wall_time);
  EXPECT_EQ(back[0].message.find(','), std::string::npos);
}

TEST(Report, RejectsMalformedNumbers) {
  std::stringstream ss;
  ss << report_header() << '\n';
  RunRecord r;
  ss << format_record(r) << '\n';
  EXPECT_EQ(read_report_csv(ss).size(), 1u);
  std::stringstream bad;
  bad << "run,total\nx,1.5abc\n";
  EXPECT_THROW(read_report_csv(bad), std::exception);
}

TEST(Config, ParsesEveryShippedConfig) {
  const std::filesystem::path dir = DGRELAX_SOURCE_DIR "/configs";
  int n = 0;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.path().extension() != ".toml") continue;
    EXPECT_NO_THROW(load_config(entry.path())) << entry.path();
    ++n;
  }
  EXPECT_GE(n, 4);
  const RunConfig c = load_config(dir / "custom.toml");
  EXPECT_EQ(c.kind, ExperimentKind::custom);
  EXPECT_EQ(c.degree, 2);
  EXPECT_EQ(c.energy.formulation, Formulation::lifted_gradient);
  EXPECT_DOUBLE_EQ(c.model.target(0, 1), 0.2);
  EXPECT_DOUBLE_EQ(c.bbox.x1, 1.5);
}

TEST(Config, DefaultsPerExperiment) {
  const RunConfig tw = parse_config_string("experiment = \"twowell\"\n");
  EXPECT_EQ(tw.model.id, "twowell");
  EXPECT_TRUE(tw.energy.stable_rewrite);
  EXPECT_EQ(tw.energy.penalty, PenaltyVariant::energy_based);
  const RunConfig co = parse_config_string("experiment = \"compression\"\n[sweep]\nresolutions = [4, [4, 8]]\n");
  ASSERT_EQ(co.resolution_sweep.size(), 2u);
  EXPECT_EQ(co.resolution_sweep[1], std::make_pair(4, 8));
  EXPECT_EQ(co.boundary_gradient, uniaxial_compression());
}

TEST(Config, RejectsInvalidInput) {
  EXPECT_THROW(parse_config_string("experiment = \"nope\"\n"), std::invalid_argument);
  EXPECT_THROW(parse_config_string("experiment = \"compression\"\n[energy]\np = 2.0\n"), std::invalid_argument);
  EXPECT_THROW(parse_config_string("[space]\ncomponents = 3\n"), std::invalid_argument);
  EXPECT_THROW(parse_config_string("[mesh]\nnx = 0\n"), std::invalid_argument);
  EXPECT_THROW(parse_config_string("[energy]\nalpha = -1.0\n"), std::invalid_argument);
  EXPECT_THROW(parse_config_string("[energy]\npenalty = \"bogus\"\n"), std::invalid_argument);
  EXPECT_THROW(parse_config_string("[mesh\n"), std::invalid_argument);
  EXPECT_THROW(parse_config_string("[model]\nid = \"neo-hooke\"\n"), std::invalid_argument);
}

TEST(Harness, SweepRunIdsAreUnique) {
  const auto specs = sweep_specs(small_compression());
  ASSERT_EQ(specs.size(), 8u);
  std::vector<std::string> ids;
  for (const auto& s : specs) ids.push_back(s.run);
  std::sort(ids.begin(), ids.end());
  EXPECT_EQ(std::adjacent_find(ids.begin(), ids.end()), ids.end());
  EXPECT_EQ(specs.front().run, "compression_2x2_a20_seminorm_based");
}

TEST(Harness, SweepRunsAreIsolated) {
  const RunConfig c = small_compression();
  auto specs = sweep_specs(c);
  const auto forward = run_specs(specs, c);
  std::mt19937_64 rng(9);
  std::shuffle(specs.begin(), specs.end(), rng);
  const auto shuffled = run_specs(specs, c);
  for (const auto& a : forward.records) {
    const auto it = std::find_if(shuffled.records.begin(), shuffled.records.end(),
                                 [&](const RunRecord& b) { return b.run == a.run; });
    ASSERT_NE(it, shuffled.records.end());
    EXPECT_TRUE(a.same_outcome(*it)) << a.run;
    EXPECT_EQ(a.status, "ok");
  }
}

TEST(Harness, FailedRunIsRecordedNotThrown) {
  RunSpec s;
  s.run = "bad";
  s.model.id = "twowell";
  s.model.b0 = 3.0;
  const auto o = execute_run(s);
  EXPECT_EQ(o.record.status, "error");
  EXPECT_FALSE(o.record.message.empty());
}

TEST(Harness, WritesRunOutputs) {
  RunConfig c = small_compression();
  c.resolution_sweep = {{2, 2}};
  c.alpha_sweep = {20.0};
  c.penalty_sweep = {PenaltyVariant::seminorm_based};
  c.write_files = true;
  c.vtk = true;
  c.profile_samples = 11;
  c.output_dir = scratch_dir("outputs");
  const auto rep = run_experiment(c);
  ASSERT_EQ(rep.records.size(), 1u);
  const std::string id = rep.records[0].run;
  for (const std::string& f : std::vector<std::string>{"report.csv", "trace_" + id + ".csv", "fields_" + id + ".csv", "profile_" + id + ".csv",
                              "fields_" + id + ".vtk", "fields_" + id + "_deformed.vtk"})
    EXPECT_TRUE(std::filesystem::exists(c.output_dir / f)) << f;
  EXPECT_EQ(count_lines(c.output_dir / ("fields_" + id + ".csv")), 1 + 16);
  EXPECT_EQ(count_lines(c.output_dir / ("profile_" + id + ".csv")), 1 + 11);
  EXPECT_EQ(count_lines(c.output_dir / ("trace_" + id + ".csv")),
            1 + static_cast<int>(rep.runs[0].result.trace.size()));
  const auto back = read_report_csv(c.output_dir / "report.csv");
  ASSERT_EQ(back.size(), 1u);
  EXPECT_TRUE(back[0].same_outcome(rep.records[0]));
  std::filesystem::remove_all(c.output_dir);
}

TEST(Harness, FieldsOfAffineMap) {
  auto s = dgrelax::testing::space<2>(2, 2, 1);
  const auto f = interpolate(s, AffineMap{compression()});
  const auto fields = triangle_fields(f, [](const Mat2& F) { return F.determinant() * F.determinant(); });
  ASSERT_EQ(fields.size(), 16u);
  for (const auto& t : fields) {
    EXPECT_NEAR(t.det, 0.9, 1e-14);
    EXPECT_NEAR(t.inv_det, 1.0 / 0.9, 1e-13);
    EXPECT_NEAR(t.lambda_max, 1.0, 1e-14);
    EXPECT_NEAR(t.lambda_min, 0.9, 1e-14);
    EXPECT_NEAR(t.energy, 0.81 * s->area(t.element), 1e-14);
  }
}

TEST(QcEnvelope, QuadraticModelGivesHomogeneousDensity) {
  RunConfig c = default_config(ExperimentKind::qc_envelope);
  c.write_files = false;
  c.qc.restarts = 3;
  c.energy = DiscreteEnergyConfig{};
  c.minimizer = MinimizeOptions{};
  c.minimizer.g_tol = 1e-10;
  ModelSpec m;
  m.id = "quadratic";
  m.target = compression();
  const Mat2 F = (Mat2() << 1.1, 0.3, -0.2, 0.8).finished();
  const auto q = run_qc_envelope(m, F, 4, c);
  EXPECT_NEAR(q.density, (F - compression()).squaredNorm(), 1e-15);
  EXPECT_LE(q.estimate, q.density + 1e-12);
  EXPECT_NEAR(q.estimate, q.density, 1e-6);
  EXPECT_EQ(q.report.records.size(), 3u);
}

TEST(QcEnvelope, TwoWellAtIdentityIsZero) {
  RunConfig c = default_config(ExperimentKind::qc_envelope);
  c.write_files = false;
  c.qc.restarts = 2;
  c.minimizer.max_iterations = 200;
  const auto q = run_qc_envelope(c.model, Mat2::Identity(), 3, c);
  EXPECT_EQ(q.density, 0.0);
  EXPECT_LT(std::abs(q.estimate), 1e-10);
}

TEST(SelfCheck, AllPass) {
  for (const auto& r : run_self_checks()) EXPECT_TRUE(r.passed) << r.name << ": " << r.value << " vs " << r.threshold;
}
