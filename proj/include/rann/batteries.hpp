#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "rann/ridgelet.hpp"

namespace rann {

struct BumpSpec {
  double width = 0.2;  // Gaussian sigma
  double center_t = 0.0;
  double center_x = 0.0;
  double amplitude = 1.0;
};

/// amplitude * exp(-((t-ct)^2 + (x-cx)^2) / (2 width^2))
SpaceTimeFn gaussian_bump(const BumpSpec& bump);

/// Ten smooth compactly-concentrated test functions (bumps at varied widths
/// and centers) used by the slice and Parseval batteries.
std::vector<BumpSpec> smooth_test_battery();

struct ReconstructionCheck {
  double rel_l2 = 0.0;          // at the given grid
  double rel_l2_refined = 0.0;  // all grid steps halved
  bool resolution_warning = false;
};

/// Forward + dual transform round trip of a Gaussian bump, scored as the
/// relative L2 error over an eval_n x eval_n grid covering the support box.
ReconstructionCheck run_reconstruction_check(const BumpSpec& bump,
                                             const SupportBox& box,
                                             const PsiSpec& spec,
                                             const RidgeletGrid& grid,
                                             int gl_nodes = 96, int eval_n = 41,
                                             bool with_refined = true);

struct FourierSliceCheck {
  double worst_rel_l2 = 0.0;  // worst row over the battery
};

/// Checks that the 1-D Fourier transform in b of the forward field at fixed
/// (tau, a) matches u_hat(tau w, a w) psi_hat(-w), as a relative L2 error
/// over a frequency window, for several rows and every battery function.
FourierSliceCheck run_fourier_slice_check(const SupportBox& box,
                                          const PsiSpec& spec,
                                          const RidgeletGrid& grid,
                                          int gl_nodes = 96);

struct ParsevalBatteryResult {
  std::vector<ParsevalReport> reports;  // per battery function
  bool all_bounded = true;
  bool any_tail_warning = false;
};

ParsevalBatteryResult run_parseval_battery(double half_t, double half_x, int p,
                                           int q, const PsiSpec& spec,
                                           const RidgeletGrid& grid,
                                           int gl_nodes = 96);

struct EstimatorBattery {
  Eigen::VectorXd reference;     // quadrature reconstruction at the test points
  Eigen::VectorXd mean_small;    // Monte Carlo mean of u_N, width n_small
  Eigen::VectorXd se_small;      // standard error of that mean
  Eigen::VectorXd var_small;     // empirical Var(u_N), width n_small
  Eigen::VectorXd var_large;     // empirical Var(u_N), width 4 * n_small
  int unbiased_points = 0;       // |mean - reference| <= 3 SE
  int variance_points = 0;       // variance ratio within [3, 16/3]
  int total_points = 0;
};

/// Monte Carlo check of unbiasedness and of the 1/N variance scaling, at ten
/// fixed test points, over `seeds` independent estimator draws of width
/// n_small and 4*n_small.
EstimatorBattery run_estimator_battery(const BumpSpec& bump,
                                       const SupportBox& box,
                                       const PsiSpec& spec,
                                       const HeavyTailPi& law, int n_small,
                                       int seeds, std::uint64_t master_seed,
                                       int gl_nodes = 96);

}  // namespace rann
