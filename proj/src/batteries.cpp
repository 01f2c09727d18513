#include "rann/batteries.hpp"

#include <cmath>
#include <complex>

#include "rann/quadrature.hpp"
#include "rann/regress.hpp"
#include "rann/rng.hpp"

namespace rann {

SpaceTimeFn gaussian_bump(const BumpSpec& bump) {
  const double inv = 1.0 / (2.0 * bump.width * bump.width);
  const double ct = bump.center_t, cx = bump.center_x, amp = bump.amplitude;
  return [inv, ct, cx, amp](double t, double x) {
    const double dt = t - ct, dx = x - cx;
    return amp * std::exp(-(dt * dt + dx * dx) * inv);
  };
}

std::vector<BumpSpec> smooth_test_battery() {
  return {
      {0.20, 0.00, 0.00, 1.0},  {0.25, 0.00, 0.00, 1.0},
      {0.30, 0.00, 0.00, 0.8},  {0.35, 0.00, 0.00, 1.0},
      {0.40, 0.00, 0.00, 1.2},  {0.25, 0.15, -0.10, 1.0},
      {0.30, -0.10, 0.15, 1.0}, {0.30, 0.20, 0.20, 0.7},
      {0.35, -0.15, -0.15, 1.0}, {0.40, 0.10, -0.20, 0.9},
  };
}

ReconstructionCheck run_reconstruction_check(const BumpSpec& bump,
                                             const SupportBox& box,
                                             const PsiSpec& spec,
                                             const RidgeletGrid& grid,
                                             int gl_nodes, int eval_n,
                                             bool with_refined) {
  const SpaceTimeFn u = gaussian_bump(bump);
  Eigen::VectorXd ts(eval_n * eval_n), xs(eval_n * eval_n), ref(eval_n * eval_n);
  for (int i = 0; i < eval_n; ++i) {
    const double t = box.t_lo + (box.t_hi - box.t_lo) * i / (eval_n - 1);
    for (int j = 0; j < eval_n; ++j) {
      const double x = box.x_lo + (box.x_hi - box.x_lo) * j / (eval_n - 1);
      const int k = i * eval_n + j;
      ts[k] = t;
      xs[k] = x;
      ref[k] = u(t, x);
    }
  }
  ReconstructionCheck out;
  {
    const RidgeletField field = ridgelet_forward(u, box, spec, grid, gl_nodes);
    out.resolution_warning = field.resolution_warning;
    const Eigen::VectorXd rec = ridgelet_reconstruct_many(field, spec, ts, xs);
    out.rel_l2 = (rec - ref).norm() / ref.norm();
  }
  if (with_refined) {
    const RidgeletField field =
        ridgelet_forward(u, box, spec, grid.refined(), gl_nodes);
    const Eigen::VectorXd rec = ridgelet_reconstruct_many(field, spec, ts, xs);
    out.rel_l2_refined = (rec - ref).norm() / ref.norm();
  }
  return out;
}

FourierSliceCheck run_fourier_slice_check(const SupportBox& box,
                                          const PsiSpec& spec,
                                          const RidgeletGrid& grid,
                                          int gl_nodes) {
  const auto table = PsiTable::get(spec);
  const GaussLegendre gt = gauss_legendre(gl_nodes, box.t_lo, box.t_hi);
  const GaussLegendre gx = gauss_legendre(gl_nodes, box.x_lo, box.x_hi);
  // rows kept within |tau| + |a| <= 4 so the b window contains the slice
  const double rows[][2] = {{1.0, 0.5}, {2.0, 1.0}, {0.5, -1.5},
                            {-1.0, 2.0}, {3.0, -0.5}};
  const int n_b = grid.n_b();
  const Eigen::VectorXd wb = trapezoid_weights(n_b, grid.b_step);

  FourierSliceCheck out;
  for (const BumpSpec& bump : smooth_test_battery()) {
    const SpaceTimeFn u = gaussian_bump(bump);
    Eigen::MatrixXd uw(gl_nodes, gl_nodes);
    for (int i = 0; i < gl_nodes; ++i)
      for (int j = 0; j < gl_nodes; ++j)
        uw(i, j) = gt.weights[i] * gx.weights[j] * u(gt.nodes[i], gx.nodes[j]);

    for (const auto& row : rows) {
      const double tau = row[0], a = row[1];
      Eigen::VectorXd g(n_b);
      for (int m = 0; m < n_b; ++m) {
        const double b = grid.b(m);
        double acc = 0.0;
        for (int i = 0; i < gl_nodes; ++i) {
          const double base = tau * gt.nodes[i] - b;
          for (int j = 0; j < gl_nodes; ++j)
            acc += uw(i, j) * (*table)(base + a * gx.nodes[j]);
        }
        g[m] = acc;
      }
      double num = 0.0, den = 0.0;
      for (double w = -6.0; w <= 6.0 + 1e-12; w += 0.125) {
        // DFT of the sampled slice in b
        std::complex<double> ghat{0.0, 0.0};
        for (int m = 0; m < n_b; ++m)
          ghat += wb[m] * g[m] * std::polar(1.0, -w * grid.b(m));
        // u_hat(tau w, a w) by direct quadrature
        std::complex<double> uhat{0.0, 0.0};
        for (int i = 0; i < gl_nodes; ++i)
          for (int j = 0; j < gl_nodes; ++j)
            uhat += uw(i, j) *
                    std::polar(1.0, -w * (tau * gt.nodes[i] + a * gx.nodes[j]));
        const std::complex<double> ref = uhat * psi_hat(spec, -w);
        num += std::norm(ghat - ref);
        den += std::norm(ref);
      }
      out.worst_rel_l2 = std::max(out.worst_rel_l2, std::sqrt(num / den));
    }
  }
  return out;
}

ParsevalBatteryResult run_parseval_battery(double half_t, double half_x, int p,
                                           int q, const PsiSpec& spec,
                                           const RidgeletGrid& grid,
                                           int gl_nodes) {
  ParsevalBatteryResult out;
  for (const BumpSpec& bump : smooth_test_battery()) {
    const ParsevalReport rep = parseval_diagnostic(
        gaussian_bump(bump), half_t, half_x, p, q, spec, grid, gl_nodes);
    if (!(rep.lhs <= rep.bound)) out.all_bounded = false;
    if (rep.tail_warning) out.any_tail_warning = true;
    out.reports.push_back(rep);
  }
  return out;
}

EstimatorBattery run_estimator_battery(const BumpSpec& bump,
                                       const SupportBox& box,
                                       const PsiSpec& spec,
                                       const HeavyTailPi& law, int n_small,
                                       int seeds, std::uint64_t master_seed,
                                       int gl_nodes) {
  EstimatorBattery out;
  const int n_pts = 10;
  const double pts[n_pts][2] = {
      {0.00, 0.00},  {0.10, 0.20},   {-0.20, 0.10}, {0.30, -0.10},
      {-0.10, -0.30}, {0.20, 0.20},  {-0.30, -0.20}, {0.15, -0.25},
      {-0.25, 0.30}, {0.05, 0.35}};
  Eigen::VectorXd ts(n_pts), xs(n_pts);
  for (int i = 0; i < n_pts; ++i) {
    ts[i] = pts[i][0];
    xs[i] = pts[i][1];
  }
  out.total_points = n_pts;

  const SpaceTimeFn u = gaussian_bump(bump);
  // Quadrature reconstruction oracle on a grid wide enough that the
  // truncated dual integral is converged well below the Monte Carlo band.
  {
    RidgeletGrid wide;
    wide.tau_max = 12.0;
    wide.a_max = 12.0;
    wide.b_max = 18.0;
    const RidgeletField field = ridgelet_forward(u, box, spec, wide, gl_nodes);
    out.reference = ridgelet_reconstruct_many(field, spec, ts, xs);
  }

  const int n_large = 4 * n_small;
  Eigen::MatrixXd small_vals(seeds, n_pts), large_vals(seeds, n_pts);
  for (int s = 0; s < seeds; ++s) {
    const auto [bank_s, w_s] = build_unbiased_estimator(
        u, box, spec, law, n_small, derive_seed(master_seed, kStreamEstimator, s),
        gl_nodes);
    const auto [bank_l, w_l] = build_unbiased_estimator(
        u, box, spec, law, n_large,
        derive_seed(master_seed, kStreamEstimator, 1000000ULL + s), gl_nodes);
    Eigen::VectorXd x(1);
    for (int i = 0; i < n_pts; ++i) {
      x[0] = xs[i];
      small_vals(s, i) = eval(bank_s, w_s, ts[i], x);
      large_vals(s, i) = eval(bank_l, w_l, ts[i], x);
    }
  }

  out.mean_small.resize(n_pts);
  out.se_small.resize(n_pts);
  out.var_small.resize(n_pts);
  out.var_large.resize(n_pts);
  for (int i = 0; i < n_pts; ++i) {
    const double mean_s = small_vals.col(i).mean();
    const double var_s =
        (small_vals.col(i).array() - mean_s).square().sum() / (seeds - 1);
    const double mean_l = large_vals.col(i).mean();
    const double var_l =
        (large_vals.col(i).array() - mean_l).square().sum() / (seeds - 1);
    out.mean_small[i] = mean_s;
    out.var_small[i] = var_s;
    out.var_large[i] = var_l;
    out.se_small[i] = std::sqrt(var_s / seeds);
    if (std::abs(mean_s - out.reference[i]) <= 3.0 * out.se_small[i])
      ++out.unbiased_points;
    const double ratio = var_s / var_l;
    if (ratio >= 3.0 && ratio <= 16.0 / 3.0) ++out.variance_points;
  }
  return out;
}

}  // namespace rann
