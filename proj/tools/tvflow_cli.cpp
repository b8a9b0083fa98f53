#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "tvflow/convexdom.hpp"
#include "tvflow/denoise.hpp"
#include "tvflow/diagnostics.hpp"
#include "tvflow/io.hpp"
#include "tvflow/verify.hpp"

namespace fs = std::filesystem;
using namespace tvflow;

namespace {

int cmd_run(const std::string& config_path, const std::string& out_override, double eps_override,
            double t_end_override, std::uint64_t seed_override, bool has_seed) {
  RunConfig cfg = parse_run_config(config_path);
  if (!out_override.empty()) cfg.out_dir = out_override;
  if (eps_override > 0.0) {
    cfg.flow.eps = eps_override;
    cfg.flow.eps_schedule.clear();
  }
  if (t_end_override >= 0.0) cfg.flow.t_end = t_end_override;
  if (has_seed) cfg.seed = seed_override;

  PreparedRun run = prepare_run(cfg);
  if (!cfg.flow.reference_point && run.reference_point)
    cfg.flow.reference_point = run.reference_point;
  Trajectory traj = run_flow(run.u0, cfg.flow);
  annotate_fmu(traj);

  const fs::path out(cfg.out_dir);
  fs::create_directories(out / "snapshots");
  write_field(out / "u0.tvf", traj.initial());
  write_field(out / "u_final.tvf", traj.final());
  if (run.domain->dim() == 1) write_field_csv(out / "u_final.csv", traj.final());
  char name[64];
  for (std::size_t i = 0; i < traj.snapshots.size(); ++i) {
    std::snprintf(name, sizeof(name), "snap_%06zu.tvf", i);
    write_field(out / "snapshots" / name, traj.snapshots[i].u);
  }
  write_diagnostics_csv(out / "diagnostics.csv", traj);
  write_run_meta(out / "run_meta.json", traj, cfg.config_echo);
  std::printf("run: %zu snapshots, t = %g", traj.snapshots.size(), traj.rows.back().t);
  if (traj.extinction_time) std::printf(", extinct at t = %g", *traj.extinction_time);
  if (traj.clamped_to_existence_window)
    std::printf(", clamped to existence window T+ = %g", traj.t_dagger);
  std::printf("\n");
  return 0;
}

int cmd_denoise(const std::string& image_path, const std::string& colorspace,
                const std::string& out_path, double eps, double t_end,
                const std::string& brightness) {
  DenoiseOptions opt;
  if (colorspace == "chromaticity_sphere")
    opt.colorspace = Colorspace::ChromaticitySphere;
  else if (colorspace == "lch_cylinder")
    opt.colorspace = Colorspace::LchCylinder;
  else
    throw ConfigError("denoise: colorspace must be chromaticity_sphere or lch_cylinder");
  if (brightness == "flow")
    opt.brightness = BrightnessMode::Flow;
  else if (brightness == "freeze")
    opt.brightness = BrightnessMode::Freeze;
  else
    throw ConfigError("denoise: brightness must be flow or freeze");
  opt.flow.eps = eps;
  opt.flow.t_end = t_end;
  opt.flow.snapshot_stride = 200;

  const Image input = read_image(image_path);
  const DenoiseResult res = denoise_image(input, opt);

  const fs::path out(out_path.empty() ? "denoised.png" : out_path);
  write_image(out, res.output);
  std::ofstream csv(out.string() + ".energy.csv");
  csv << "t,tv_energy\n";
  csv.precision(17);
  for (const auto& [t, e] : res.energy_rows) csv << t << "," << e << "\n";
  std::printf("denoise: %s -> %s, TV %g -> %g\n", image_path.c_str(), out.string().c_str(),
              res.energy_rows.front().second, res.energy_rows.back().second);
  return 0;
}

int cmd_verify(const std::string& suite, const std::string& report_path, bool verbose) {
  const auto checks = run_suite(suite, verbose);
  int failed = 0;
  std::printf("%-4s %-22s %-40s %14s %14s\n", "crit", "suite", "check", "measured", "bound");
  for (const auto& c : checks) {
    if (!c.pass) ++failed;
    std::printf("%-4d %-22s %-40s %14.6e %14.6e  %s\n", c.criterion, c.suite.c_str(),
                c.name.c_str(), c.measured, c.bound, c.pass ? "PASS" : "FAIL");
  }
  std::printf("%zu checks, %d failed\n", checks.size(), failed);
  if (!report_path.empty()) {
    std::ofstream(report_path, std::ios::trunc).close();
    for (const auto& c : checks) {
      AuditReport rep;
      rep.name = c.suite + "/" + c.name;
      rep.pass = c.pass;
      rep.measured = c.measured;
      rep.bound = c.bound;
      rep.details = c.details;
      append_report_jsonl(report_path, rep);
    }
  }
  return failed == 0 ? 0 : 1;
}

int cmd_approx_domain(const std::string& body_path, double eps, const std::string& dims_arg,
                      double h, const std::string& out_path, const std::string& report_path) {
  ConvexBody body = load_body(body_path);
  std::vector<int> dims;
  {
    std::stringstream ss(dims_arg);
    std::string item;
    while (std::getline(ss, item, ',')) dims.push_back(std::stoi(item));
  }
  GridDomain gridspec(dims, h, Boundary::NeumannReflect);
  const auto mask = inner_domain(body, eps, gridspec);
  AuditReport rep = hausdorff_audit(body, eps, mask, gridspec);

  MaskFile mf;
  mf.dims = dims;
  mf.h = h;
  mf.mask = mask;
  write_mask(out_path, mf);
  if (!report_path.empty()) append_report_jsonl(report_path, rep);
  std::size_t inside = 0;
  for (auto v : mask) inside += v;
  std::printf("approx-domain: %zu/%zu cells inside, hausdorff %.6g < %.6g: %s\n", inside,
              mask.size(), rep.measured, rep.bound, rep.pass ? "PASS" : "FAIL");
  return rep.pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"total variation flow of manifold-valued maps"};
  app.require_subcommand(1);

  std::string run_config, run_out;
  double run_eps = -1.0, run_t_end = -1.0;
  std::uint64_t run_seed = 0;
  auto* run = app.add_subcommand("run", "integrate a flow described by a JSON config");
  run->add_option("--config", run_config, "config file")->required();
  run->add_option("--out", run_out, "output directory (overrides config)");
  run->add_option("--eps", run_eps, "override eps (disables any schedule)");
  run->add_option("--t-end", run_t_end, "override t_end");
  auto* seed_opt = run->add_option("--seed", run_seed, "override seed");

  std::string den_image, den_colorspace = "chromaticity_sphere", den_brightness = "flow", den_out;
  double den_eps = 5e-2, den_t_end = 0.5;
  auto* den = app.add_subcommand("denoise", "total variation denoising of a color image");
  den->add_option("image", den_image, "input image (png/ppm)")->required();
  den->add_option("--colorspace", den_colorspace, "chromaticity_sphere | lch_cylinder");
  den->add_option("--brightness", den_brightness, "flow | freeze (chromaticity mode)");
  den->add_option("--out", den_out, "output image path");
  den->add_option("--eps", den_eps, "regularization eps");
  den->add_option("--t-end", den_t_end, "flow horizon in pixel-spacing units");

  std::string ver_suite = "all", ver_report;
  bool ver_verbose = false;
  auto* ver = app.add_subcommand("verify", "run a verification suite");
  ver->add_option("--suite", ver_suite, "suite id (default all)");
  ver->add_option("--report", ver_report, "JSON-lines report path");
  ver->add_flag("--verbose", ver_verbose, "print checks as they finish");

  std::string apx_body, apx_dims = "128,128", apx_out = "domain.tvm", apx_report;
  double apx_eps = 0.05, apx_h = 1.0 / 128;
  auto* apx = app.add_subcommand("approx-domain", "inner smooth convex approximant of a polytope");
  apx->add_option("body", apx_body, "halfspace list file")->required();
  apx->add_option("--eps", apx_eps, "mollification radius");
  apx->add_option("--dims", apx_dims, "grid extents, comma separated");
  apx->add_option("--spacing", apx_h, "grid spacing");
  apx->add_option("--out", apx_out, "mask output path");
  apx->add_option("--report", apx_report, "JSON-lines report path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed())
      return cmd_run(run_config, run_out, run_eps, run_t_end, run_seed, seed_opt->count() > 0);
    if (den->parsed())
      return cmd_denoise(den_image, den_colorspace, den_out, den_eps, den_t_end, den_brightness);
    if (ver->parsed()) return cmd_verify(ver_suite, ver_report, ver_verbose);
    if (apx->parsed())
      return cmd_approx_domain(apx_body, apx_eps, apx_dims, apx_h, apx_out, apx_report);
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
