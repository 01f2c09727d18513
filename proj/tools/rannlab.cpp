// rannlab: command-line entry point for the random-feature PDE lab.
//
// Subcommands: pme-sweep, cns-sweep, cns-wave, ridgelet-check,
// estimator-check, theory-report. Exit codes: 0 success, 1 validation error,
// 2 numerical failure.

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "rann/batteries.hpp"
#include "rann/config.hpp"
#include "rann/harness.hpp"

namespace fs = std::filesystem;
using namespace rann;

namespace {

struct CommonArgs {
  std::string config = "default";
  std::string out;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int threads = 0;
  std::vector<std::string> overrides;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config,
                  "config file path, or 'default' for built-ins");
  cmd->add_option("--out", args.out, "output directory");
  cmd->add_option("--seed", args.seed, "master seed (overrides run.seed)")
      ->each([&args](const std::string&) { args.seed_set = true; });
  cmd->add_option("--threads", args.threads, "worker threads (overrides run.threads)");
  cmd->add_option("--override", args.overrides,
                  "config override section.key=value (repeatable)");
}

Config resolve_config(const CommonArgs& args) {
  Config cfg = (args.config == "default") ? Config::defaults()
                                          : Config::from_file(args.config);
  for (const std::string& o : args.overrides) cfg.apply_override(o);
  if (args.seed_set) cfg.set("run.seed", std::to_string(args.seed));
  if (args.threads > 0) cfg.set("run.threads", std::to_string(args.threads));
  return cfg;
}

fs::path prepare_out_dir(const CommonArgs& args, const std::string& cmd,
                         const Config& cfg) {
  const fs::path dir = args.out.empty() ? fs::path("out-" + cmd) : fs::path(args.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory " + dir.string());
  std::ofstream os(dir / "effective_config.txt");
  os << cfg.render();
  return dir;
}

void print_effective(const Config& cfg) {
  std::cout << "# effective configuration\n" << cfg.render() << "\n";
}

SweepConfig sweep_from_config(const Config& cfg, const std::string& prob) {
  SweepConfig sweep;
  sweep.widths = cfg.get_int_list(prob + ".widths");
  sweep.repeats = cfg.get_int("sweep.repeats");
  sweep.m_factor = cfg.get_int(prob + ".m_factor");
  sweep.ridge.lambda = cfg.get_double(prob + ".lambda");
  sweep.ridge.jitter = cfg.get_double("ridge.jitter");
  sweep.freq_std = cfg.get_double(prob + ".freq_std");
  sweep.eval_points = static_cast<std::size_t>(cfg.get_int("sweep.eval_points"));
  sweep.seed = cfg.get_u64("run.seed");
  sweep.threads = cfg.get_int("run.threads");
  if (prob == "pme") {
    PmeProblem p;
    p.params.d = cfg.get_int("pme.d");
    p.params.m = cfg.get_double("pme.m");
    p.params.b_const = cfg.get_double("pme.b_const");
    p.params.t0 = cfg.get_double("pme.t0");
    p.t_horizon = cfg.get_double("pme.t_horizon");
    sweep.problem = p;
  } else {
    CnsProblem c;
    c.params.mu = cfg.get_double("cns.mu");
    c.params.eps = cfg.get_double("cns.eps");
    c.params.gamma = cfg.get_double("cns.gamma");
    c.params.v_plus = cfg.get_double("cns.v_plus");
    c.params.v_minus = cfg.get_double("cns.v_minus");
    c.params.xi_range = {cfg.get_double("cns.xi_min"), cfg.get_double("cns.xi_max")};
    c.params.grid_points = cfg.get_int("cns.grid_points");
    const std::string mode = cfg.get_string("cns.velocity_mode");
    if (mode == "mass_conservation")
      c.params.velocity_mode = VelocityMode::MassConservation;
    else if (mode == "paper_relation")
      c.params.velocity_mode = VelocityMode::PaperRelation;
    else
      throw ConfigError("cns.velocity_mode must be mass_conservation or paper_relation");
    c.t_horizon = cfg.get_double("cns.t_horizon");
    sweep.problem = c;
  }
  return sweep;
}

PsiSpec psi_from_config(const Config& cfg) {
  return default_psi_spec(activation_from_string(cfg.get_string("ridgelet.activation")),
                          1, cfg.get_int("ridgelet.p"), cfg.get_int("ridgelet.q"));
}

RidgeletGrid grid_from_config(const Config& cfg) {
  RidgeletGrid grid;
  grid.tau_max = cfg.get_double("ridgelet.tau_a_max");
  grid.tau_step = cfg.get_double("ridgelet.tau_a_step");
  grid.a_max = grid.tau_max;
  grid.a_step = grid.tau_step;
  grid.b_max = cfg.get_double("ridgelet.b_max");
  grid.b_step = cfg.get_double("ridgelet.b_step");
  return grid;
}

int run_sweep_command(const CommonArgs& args, const std::string& prob) {
  const Config cfg = resolve_config(args);
  print_effective(cfg);
  const fs::path dir = prepare_out_dir(args, prob + "-sweep", cfg);
  SweepConfig sweep = sweep_from_config(cfg, prob);
  const bool verbose = cfg.get_int("run.verbosity") > 0;

  const SweepResult result = run_sweep(sweep);
  write_sweep_csv((dir / "raw.csv").string(), (dir / "summary.csv").string(),
                  result);
  write_sweep_svg((dir / "sweep.svg").string(), result);

  if (verbose) {
    for (const WidthSummary& s : result.summary)
      std::printf("width %6d  mean rel_l2 %.6e  std %.3e  excluded %d\n",
                  s.width, s.mean_rel_l2, s.std_rel_l2, s.excluded);
  }
  if (result.slope)
    std::printf("slope %.4f  (95%% ci [%.4f, %.4f])\n", result.slope->slope,
                result.slope->ci.lo, result.slope->ci.hi);
  else
    std::printf("slope unavailable (fewer than 3 widths)\n");
  if (result.exclusions > 0)
    std::printf("excluded cells: %ld\n", static_cast<long>(result.exclusions));
  std::printf("wrote %s\n", (dir / "summary.csv").string().c_str());
  return 0;
}

int run_cns_wave(const CommonArgs& args) {
  const Config cfg = resolve_config(args);
  print_effective(cfg);
  const fs::path dir = prepare_out_dir(args, "cns-wave", cfg);
  const SweepConfig sweep = sweep_from_config(cfg, "cns");
  const auto& params = std::get<CnsProblem>(sweep.problem).params;
  const WaveProfile profile = integrate_wave(params);
  save_wave_csv((dir / "wave.csv").string(), profile);
  std::printf("shock speed s = %.12f\n", profile.s);
  std::printf("v range [%.9f, %.9f], u range [%.9f, %.9f]\n",
              profile.v.minCoeff(), profile.v.maxCoeff(), profile.u.minCoeff(),
              profile.u.maxCoeff());
  std::printf("wrote %s (%ld rows)\n", (dir / "wave.csv").string().c_str(),
              static_cast<long>(profile.xi.size()));
  return 0;
}

struct CheckPrinter {
  std::ofstream report;
  bool all_pass = true;
  void line(bool pass, const std::string& text) {
    if (!pass) all_pass = false;
    const std::string msg = std::string(pass ? "[PASS] " : "[FAIL] ") + text;
    std::cout << msg << "\n";
    report << msg << "\n";
  }
};

int run_ridgelet_check(const CommonArgs& args) {
  const Config cfg = resolve_config(args);
  print_effective(cfg);
  const fs::path dir = prepare_out_dir(args, "ridgelet-check", cfg);
  CheckPrinter out;
  out.report.open(dir / "ridgelet_report.txt");

  const RidgeletGrid grid = grid_from_config(cfg);
  const int gl = cfg.get_int("ridgelet.gl_nodes");
  const double half = cfg.get_double("ridgelet.box");
  const SupportBox box{-half, half, -half, half};
  const ActivationKind act =
      activation_from_string(cfg.get_string("ridgelet.activation"));

  {
    const PsiSpec spec = default_psi_spec(act, 1, 0, 0);
    BumpSpec bump;
    bump.width = cfg.get_double("ridgelet.bump_width");
    const ReconstructionCheck rc =
        run_reconstruction_check(bump, box, spec, grid, gl);
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "reconstruction rel_l2 %.4f (<= 0.05), refined %.4f",
                  rc.rel_l2, rc.rel_l2_refined);
    out.line(rc.rel_l2 <= 0.05 && rc.rel_l2_refined <= 1.1 * rc.rel_l2 &&
                 !rc.resolution_warning,
             buf);

    const FourierSliceCheck fs_check = run_fourier_slice_check(box, spec, grid, gl);
    std::snprintf(buf, sizeof(buf), "fourier slice worst rel_l2 %.5f (<= 0.01)",
                  fs_check.worst_rel_l2);
    out.line(fs_check.worst_rel_l2 <= 0.01, buf);
  }

  for (int pq : {0, 1}) {
    const PsiSpec spec = default_psi_spec(act, 1, pq, pq);
    const ParsevalBatteryResult pb =
        run_parseval_battery(0.5 * half, 0.5 * half, pq, pq, spec, grid, gl);
    double worst = 0.0;
    for (const ParsevalReport& r : pb.reports)
      worst = std::max(worst, r.lhs / r.bound);
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "parseval p=q=%d: worst lhs/bound %.3e, tail warnings %s", pq,
                  worst, pb.any_tail_warning ? "yes" : "no");
    out.line(pb.all_bounded && !pb.any_tail_warning, buf);
  }

  if (!out.all_pass) {
    std::cerr << "ridgelet-check: numerical failure\n";
    return 2;
  }
  return 0;
}

int run_estimator_check(const CommonArgs& args) {
  const Config cfg = resolve_config(args);
  print_effective(cfg);
  const fs::path dir = prepare_out_dir(args, "estimator-check", cfg);
  CheckPrinter out;
  out.report.open(dir / "estimator_report.txt");

  const double half = cfg.get_double("ridgelet.box");
  const SupportBox box{-half, half, -half, half};
  const PsiSpec spec = default_psi_spec(
      activation_from_string(cfg.get_string("ridgelet.activation")), 1, 0, 0);
  const HeavyTailPi law{cfg.get_double("sampler.lambda_tau"),
                        cfg.get_double("sampler.lambda_a")};
  BumpSpec bump;
  bump.width = cfg.get_double("ridgelet.bump_width");

  const EstimatorBattery battery = run_estimator_battery(
      bump, box, spec, law, cfg.get_int("ridgelet.estimator_width"),
      cfg.get_int("ridgelet.seeds"), cfg.get_u64("run.seed"),
      cfg.get_int("ridgelet.gl_nodes"));

  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "unbiasedness: %d/%d points within 3 SE (need >= 9)",
                battery.unbiased_points, battery.total_points);
  out.line(battery.unbiased_points >= 9, buf);
  std::snprintf(buf, sizeof(buf),
                "variance scaling: %d/%d ratios in [3, 16/3] (need >= 8)",
                battery.variance_points, battery.total_points);
  out.line(battery.variance_points >= 8, buf);

  if (!out.all_pass) {
    std::cerr << "estimator-check: numerical failure\n";
    return 2;
  }
  return 0;
}

int run_theory_report(const CommonArgs& args, const std::string& prob) {
  const Config cfg = resolve_config(args);
  print_effective(cfg);
  const fs::path dir = prepare_out_dir(args, "theory-report", cfg);
  const SweepConfig sweep = sweep_from_config(cfg, prob);
  const PsiSpec psi = psi_from_config(cfg);
  const HeavyTailPi law{cfg.get_double("sampler.lambda_tau"),
                        cfg.get_double("sampler.lambda_a")};
  const TheoryReport rep = theory_coefficient_report(
      sweep, psi, law, cfg.get_int("ridgelet.p"), cfg.get_int("ridgelet.q"));
  std::ofstream os(dir / "theory_report.txt");
  char buf[256];
  auto emit = [&](const char* name, double v) {
    std::snprintf(buf, sizeof(buf), "%-18s %.10e", name, v);
    std::cout << buf << "\n";
    os << buf << "\n";
  };
  emit("C_pi", rep.c_pi);
  emit("L_psi", rep.l_psi);
  emit("T", rep.t_domain);
  emit("|D|", rep.domain_measure);
  emit("sigma_sup_sq", rep.sigma_sup_sq);
  emit("derivative_terms", rep.derivative_terms);
  emit("M_psi", rep.m_psi);
  std::cout << "note: M_psi is an upper-bound constant for display, not a target\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"random-feature PDE approximation lab"};
  app.require_subcommand(1);

  CommonArgs pme_args, cns_args, wave_args, ridge_args, est_args, theory_args;
  std::string theory_problem = "pme";

  CLI::App* pme = app.add_subcommand("pme-sweep", "porous-medium width sweep");
  add_common(pme, pme_args);
  CLI::App* cns = app.add_subcommand("cns-sweep", "compressible-flow width sweep");
  add_common(cns, cns_args);
  CLI::App* wave = app.add_subcommand("cns-wave", "build and dump the travelling-wave profile");
  add_common(wave, wave_args);
  CLI::App* ridge = app.add_subcommand(
      "ridgelet-check", "reconstruction, Fourier-slice and Parseval battery");
  add_common(ridge, ridge_args);
  CLI::App* est = app.add_subcommand("estimator-check",
                                     "unbiasedness and variance-scaling battery");
  add_common(est, est_args);
  CLI::App* theory = app.add_subcommand("theory-report",
                                        "display the theoretical error constant");
  add_common(theory, theory_args);
  theory->add_option("--problem", theory_problem, "pme or cns");

  CLI11_PARSE(app, argc, argv);

  try {
    if (pme->parsed()) return run_sweep_command(pme_args, "pme");
    if (cns->parsed()) return run_sweep_command(cns_args, "cns");
    if (wave->parsed()) return run_cns_wave(wave_args);
    if (ridge->parsed()) return run_ridgelet_check(ridge_args);
    if (est->parsed()) return run_estimator_check(est_args);
    if (theory->parsed()) return run_theory_report(theory_args, theory_problem);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
