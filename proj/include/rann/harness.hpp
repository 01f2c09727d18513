#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "rann/cns.hpp"
#include "rann/pme.hpp"
#include "rann/regress.hpp"
#include "rann/ridgelet.hpp"
#include "rann/sampling.hpp"

namespace rann {

struct PmeProblem {
  BarenblattParams params;
  double t_horizon = 1.0;  // training window is (t0, t0 + t_horizon)
};

struct CnsProblem {
  ShockParams params;
  double t_horizon = 1.0;  // domain (0, t_horizon) x xi_range
};

struct SweepConfig {
  std::vector<int> widths;
  int repeats = 5;
  int m_factor = 10;  // sample size rule M = m_factor * N
  RidgeConfig ridge;
  double freq_std = 10.0;  // Fourier-feature frequency std
  std::variant<PmeProblem, CnsProblem> problem = PmeProblem{};
  std::size_t eval_points = 20000;
  std::uint64_t seed = 0;
  bool with_bias = true;
  int threads = 1;  // worker threads over independent (width, repeat) cells

  void validate() const;
};

struct SweepCell {
  int width = 0;
  int repeat = 0;
  std::uint64_t seed = 0;
  double rel_l2 = 0.0;
  double train_mse = 0.0;
  double cond_est = 0.0;
  double normal_eq_residual = 0.0;
  bool excluded = false;
  std::string note;
};

struct WidthSummary {
  int width = 0;
  double mean_rel_l2 = 0.0;
  double std_rel_l2 = 0.0;
  int excluded = 0;
};

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;  // log-log intercept
  Interval ci{0.0, 0.0};   // 95% band on the slope
};

struct SweepResult {
  std::vector<SweepCell> cells;
  std::vector<WidthSummary> summary;
  std::optional<SlopeFit> slope;
  Eigen::Index exclusions = 0;
};

SweepResult run_sweep(const SweepConfig& cfg);

struct InsufficientData : std::runtime_error {
  InsufficientData() : std::runtime_error("fit_loglog_slope: needs >= 3 widths") {}
};

/// Least-squares line through (log N, log mean_rel_l2); 95% CI from the
/// standard regression error.
SlopeFit fit_loglog_slope(const std::vector<WidthSummary>& summary);

struct TheoryReport {
  double c_pi = 0.0;
  double l_psi = 0.0;
  double t_domain = 0.0;
  double domain_measure = 0.0;
  double sigma_sup_sq = 0.0;
  int derivative_terms = 1;   // count of derivative orders summed (>= 1)
  double m_psi = 0.0;         // product of the factors above
};

/// Displays the constant in front of the 1/N bound (p = q = 0 regime, where
/// the domain extension constant is 1). Diagnostic only, never a pass/fail
/// target.
TheoryReport theory_coefficient_report(const SweepConfig& cfg,
                                       const PsiSpec& psi,
                                       const HeavyTailPi& law, int p = 0,
                                       int q = 0);

/// raw.csv: width,repeat,seed,rel_l2,train_mse,cond_est,excluded
/// summary.csv: width,mean_rel_l2,std_rel_l2 plus a slope footer row.
void write_sweep_csv(const std::string& raw_path, const std::string& summary_path,
                     const SweepResult& result);

/// Minimal log-log SVG plot of mean errors with a C/sqrt(N) reference line.
void write_sweep_svg(const std::string& path, const SweepResult& result);

}  // namespace rann
