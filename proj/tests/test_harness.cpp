#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "rann/harness.hpp"
#include "rann/rng.hpp"

using namespace rann;

namespace {

std::vector<WidthSummary> synthetic_means(const std::vector<int>& widths,
                                          double c, double exponent) {
  std::vector<WidthSummary> out;
  for (int n : widths)
    out.push_back({n, c * std::pow(static_cast<double>(n), exponent), 0.0, 0});
  return out;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

SweepConfig tiny_pme_sweep(std::uint64_t seed) {
  SweepConfig cfg;
  cfg.widths = {16, 64};
  cfg.repeats = 3;
  cfg.m_factor = 10;
  cfg.ridge.lambda = 1e-5;
  cfg.freq_std = 10.0;
  cfg.eval_points = 2000;
  cfg.seed = seed;
  PmeProblem p;
  p.params = BarenblattParams{};
  cfg.problem = p;
  return cfg;
}

}  // namespace

TEST_CASE("log-log slope fit") {
  SUBCASE("exact power laws are recovered") {
    const std::vector<int> widths = {32, 64, 128, 256, 512, 1024};
    const SlopeFit half = fit_loglog_slope(synthetic_means(widths, 3.0, -0.5));
    CHECK(half.slope == doctest::Approx(-0.5).epsilon(1e-12));
    const SlopeFit one = fit_loglog_slope(synthetic_means(widths, 0.7, -1.0));
    CHECK(one.slope == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(half.ci.lo <= half.slope);
    CHECK(half.ci.hi >= half.slope);
  }
  SUBCASE("five percent multiplicative noise stays within 0.08 of the truth") {
    const std::vector<int> widths = {32, 64, 128, 256, 512, 1024};
    Rng rng(2718);
    for (int trial = 0; trial < 100; ++trial) {
      std::vector<WidthSummary> noisy = synthetic_means(widths, 2.0, -0.5);
      for (auto& s : noisy) s.mean_rel_l2 *= std::exp(0.05 * rng.normal());
      const SlopeFit fit = fit_loglog_slope(noisy);
      CHECK(std::abs(fit.slope + 0.5) <= 0.08);
    }
  }
  SUBCASE("fewer than three points is an error") {
    CHECK_THROWS_AS(fit_loglog_slope(synthetic_means({8, 16}, 1.0, -0.5)),
                    InsufficientData);
  }
}

TEST_CASE("degenerate sweep reports no slope") {
  SweepConfig cfg = tiny_pme_sweep(11);
  cfg.widths = {32};
  cfg.repeats = 1;
  const SweepResult result = run_sweep(cfg);
  CHECK(result.cells.size() == 1);
  CHECK_FALSE(result.slope.has_value());
  CHECK(result.summary.size() == 1);
  CHECK(result.summary[0].std_rel_l2 == 0.0);
}

TEST_CASE("sweep output is deterministic byte for byte") {
  const auto dir = std::filesystem::temp_directory_path() / "rann_sweep_det";
  std::filesystem::create_directories(dir);
  const SweepConfig cfg = tiny_pme_sweep(77);
  const SweepResult a = run_sweep(cfg);
  const SweepResult b = run_sweep(cfg);
  write_sweep_csv((dir / "a_raw.csv").string(), (dir / "a_sum.csv").string(), a);
  write_sweep_csv((dir / "b_raw.csv").string(), (dir / "b_sum.csv").string(), b);
  CHECK(slurp(dir / "a_raw.csv") == slurp(dir / "b_raw.csv"));
  CHECK(slurp(dir / "a_sum.csv") == slurp(dir / "b_sum.csv"));
  CHECK(!slurp(dir / "a_raw.csv").empty());
  write_sweep_svg((dir / "a.svg").string(), a);
  CHECK(!slurp(dir / "a.svg").empty());
  std::filesystem::remove_all(dir);
}

TEST_CASE("multi-threaded sweep matches single-threaded") {
  SweepConfig cfg = tiny_pme_sweep(31);
  const SweepResult seq = run_sweep(cfg);
  cfg.threads = 4;
  const SweepResult par = run_sweep(cfg);
  REQUIRE(seq.cells.size() == par.cells.size());
  for (std::size_t i = 0; i < seq.cells.size(); ++i) {
    CHECK(seq.cells[i].rel_l2 == par.cells[i].rel_l2);
    CHECK(seq.cells[i].seed == par.cells[i].seed);
  }
}

TEST_CASE("held-out evaluation points use their own seed stream") {
  // the eval stream must differ from every cell's collocation stream
  const std::uint64_t master = 123;
  const std::uint64_t eval_seed = derive_seed(master, kStreamEval);
  for (std::size_t wi = 0; wi < 8; ++wi)
    for (int rep = 0; rep < 8; ++rep) {
      const std::uint64_t cell = derive_seed(master, kStreamCell, wi * 1000003ULL + rep);
      CHECK(derive_seed(cell, kStreamCollocation) != eval_seed);
      CHECK(derive_seed(cell, kStreamHidden) != eval_seed);
    }
}

TEST_CASE("error decreases with width on a small sweep") {
  const SweepResult result = run_sweep(tiny_pme_sweep(2024));
  REQUIRE(result.summary.size() == 2);
  CHECK(result.exclusions == 0);
  CHECK(result.summary[1].mean_rel_l2 < result.summary[0].mean_rel_l2);
}

TEST_CASE("fitted-network equation residual decreases in repeat-mean") {
  // wider nets should satisfy the equation better when the fit improves
  BarenblattParams params;
  Rng rng(5);
  CollocationSet interior;
  const int n_res = 400;
  interior.t.resize(n_res);
  interior.x.resize(n_res, 1);
  for (int i = 0; i < n_res; ++i) {
    interior.t[i] = rng.uniform_on(0.2, 1.0);
    interior.x(i, 0) = rng.uniform_on(0.05, 0.95);
  }
  auto mean_residual = [&](int width) {
    double acc = 0.0;
    const int repeats = 3;
    for (int rep = 0; rep < repeats; ++rep) {
      SamplerSpec sampler;
      sampler.kind = GaussianFourier{10.0};
      sampler.d = 1;
      sampler.seed = derive_seed(900 + rep, kStreamHidden, width);
      FeatureBank bank = FeatureBank::from_samples(
          sample_hidden(sampler, width), ActivationKind::Cos,
          1.0 / std::sqrt(static_cast<double>(width)), true);
      CollocationSet train = pme_training_set(
          params, sample_collocation_pme(1, 10 * width, {0.1, 1.1},
                                         derive_seed(901 + rep, kStreamCollocation,
                                                     width)));
      const Eigen::MatrixXd design = design_matrix(bank, train, true);
      const FitReport fit =
          ridge_fit(design, train.targets->col(0), RidgeConfig{1e-5, 0.0}, true);
      const NetworkField net(bank, fit.weights);
      acc += pme_residual(net, params.m, interior).j_pde;
    }
    return acc / 3.0;
  };
  const double coarse = mean_residual(16);
  const double fine = mean_residual(128);
  INFO("residual means ", coarse, " -> ", fine);
  CHECK(fine < coarse);
}

TEST_CASE("theory coefficient report") {
  SweepConfig cfg = tiny_pme_sweep(1);
  cfg.widths = {8, 16, 32};
  const PsiSpec psi = default_psi_spec(ActivationKind::Tanh, 1, 0, 0);
  const HeavyTailPi law{1.0, 1.0};
  const TheoryReport rep = theory_coefficient_report(cfg, psi, law, 0, 0);
  CHECK(rep.sigma_sup_sq == 1.0);  // sup |tanh| = 1
  CHECK(rep.c_pi == doctest::Approx(std::pow(M_PI, 3)).epsilon(1e-9));
  CHECK(rep.derivative_terms == 1);
  CHECK(rep.m_psi ==
        doctest::Approx(rep.c_pi * rep.l_psi * rep.t_domain *
                        rep.domain_measure));

  // Eq-16 structure: with p=q=0, d=1 the (M+1)^2 term is 36 pi at T=R=1,
  // and growing T only rescales the (1 + 4T + 4R) factor.
  const double l11 = l_psi_bound(psi, 0, 0, 1.0, 1.0);
  const double psi_norm = psi_l2_norm(psi);
  const double psi_d_norm = psi_deriv_l2_norm(psi);
  CHECK(l11 - (4.0 * M_PI + psi_norm) * 9.0 - psi_d_norm * psi_d_norm ==
        doctest::Approx(36.0 * M_PI).epsilon(1e-12));
  const double l21 = l_psi_bound(psi, 0, 0, 2.0, 1.0);
  CHECK(l21 - l11 == doctest::Approx((4.0 * M_PI + psi_norm) * 4.0).epsilon(1e-10));
}
