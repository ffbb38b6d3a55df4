#include "dgrelax/config.hpp"
#include "dgrelax/harness.hpp"
#include "dgrelax/self_check.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <iostream>
#include <string>

namespace {

int do_run(const std::string& config_path, const std::string& output_override, bool vtk) {
  dgrelax::RunConfig cfg;
  try {
    cfg = dgrelax::load_config(config_path);
  } catch (const std::exception& e) {
    std::cerr << "dgrelax: " << e.what() << '\n';
    return 2;
  }
  if (!output_override.empty()) cfg.output_dir = output_override;
  if (vtk) cfg.vtk = true;

  std::cout << "experiment " << dgrelax::to_string(cfg.kind) << ", output " << cfg.output_dir.string()
            << ", eps_pen " << cfg.energy.eps_pen << '\n';
  const dgrelax::RunReport report = dgrelax::run_experiment(cfg);
  int failures = 0;
  for (const auto& r : report.records) {
    std::printf("%-48s %-6s E=%.12g L1=%.3e L2=%.3e W11=%.3e iters=%d (%s) %.1fs\n", r.run.c_str(), r.status.c_str(),
                r.total, r.error_l1, r.error_l2, r.error_w11, r.iterations, r.reason.c_str(), r.wall_time);
    if (r.status != "ok") {
      ++failures;
      std::cerr << "  " << r.run << ": " << r.message << '\n';
    }
  }
  if (cfg.kind == dgrelax::ExperimentKind::qc_envelope && !report.records.empty()) {
    double best = report.records.front().total;
    for (const auto& r : report.records)
      if (r.status == "ok") best = std::min(best, r.total);
    std::printf("qc estimate %.12g\n", best / cfg.bbox.area());
  }
  std::cout << "wrote " << (cfg.output_dir / "report.csv").string() << '\n';
  return failures == 0 ? 0 : 1;
}

int do_check() {
  int failed = 0;
  for (const auto& c : dgrelax::run_self_checks()) {
    std::printf("%s %-45s value %.3e (limit %.1e)%s%s\n", c.passed ? "PASS" : "FAIL", c.name.c_str(), c.value,
                c.threshold, c.message.empty() ? "" : " ", c.message.c_str());
    if (!c.passed) ++failed;
  }
  return failed == 0 ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"DG relaxation experiments for nonlinear elastic energies"};
  app.require_subcommand(1);

  std::string config_path, output_override;
  bool vtk = false;
  auto* run = app.add_subcommand("run", "run the experiment described by a TOML config");
  run->add_option("config", config_path, "config file")->required()->check(CLI::ExistingFile);
  run->add_option("-o,--output", output_override, "override output_dir");
  run->add_flag("--vtk", vtk, "also write legacy VTK files");

  auto* check = app.add_subcommand("check", "run gradient and operator self-tests");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*run) return do_run(config_path, output_override, vtk);
    if (*check) return do_check();
  } catch (const std::exception& e) {
    std::cerr << "dgrelax: " << e.what() << '\n';
    return 2;
  }
  return 2;
}
