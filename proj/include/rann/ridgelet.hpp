#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <utility>

#include "rann/features.hpp"
#include "rann/sampling.hpp"

namespace rann {

/// Admissible profile psi built from Gaussian derivatives. In frequency
/// space, for activations with odd Fourier transform (tanh, sigmoid):
///   psi_hat(w) = sqrt(2 pi) i^{d+2n+2} w |w|^{d+2n+1} exp(-w^2/2) / K_norm,
/// and for cos (even transform) the even member of the same family,
///   psi_hat(w) = sqrt(2 pi) |w|^{d+2n+3} exp(-w^2/2) / K_norm,
/// whose extra vanishing moment keeps |psi_hat(w)| <= sqrt(2 pi)|w|^{d+2n+2}
/// on |w| < 1. K_norm is fixed by normalize_pair so the reconstruction
/// pairing constant equals one.
struct PsiSpec {
  int n = 0;
  int d = 1;
  double k_norm = 1.0;
  ActivationKind activation = ActivationKind::Tanh;

  /// Exponent of |w| in psi_hat near zero (the vanishing-moment order).
  int vanishing_exponent() const {
    return activation == ActivationKind::Cos ? d + 2 * n + 3 : d + 2 * n + 2;
  }
};

struct AdmissibilityError : std::runtime_error {
  explicit AdmissibilityError(const std::string& w) : std::runtime_error(w) {}
};

std::complex<double> psi_hat(const PsiSpec& spec, double omega);

/// Pairing constant K_{psi,sigma} of the current spec (1 after normalization):
/// K = (2 pi)^{d+1-1} Int psi_hat(-w) sigma_hat(w) |w|^{-(d+1)} dw, with the
/// cos delta pair evaluated symbolically.
double k_pair(const PsiSpec& spec);

/// Returns the spec with k_norm set so that k_pair == 1.
PsiSpec normalize_pair(PsiSpec spec);

/// Smallest n such that the vanishing-moment exponent of psi_hat exceeds
/// M = (2p+2q+d+3)/2, then normalized.
PsiSpec default_psi_spec(ActivationKind activation, int d, int p = 0, int q = 0);

/// ||psi||_{L2} and ||psi'||_{L2} via Plancherel.
double psi_l2_norm(const PsiSpec& spec);
double psi_deriv_l2_norm(const PsiSpec& spec);

/// Physical-space table of psi on [-z_max, z_max] with uniform step,
/// obtained by dense inverse-Fourier quadrature of psi_hat; cubic
/// interpolation between nodes, zero outside. Tables are cached per spec.
class PsiTable {
 public:
  double operator()(double z) const;
  double z_max() const { return z_max_; }
  double step() const { return step_; }
  const Eigen::VectorXd& values() const { return values_; }

  static std::shared_ptr<const PsiTable> get(const PsiSpec& spec,
                                             double z_max = 30.0,
                                             double step = 1.0 / 256.0);

 private:
  double z_max_ = 0.0, step_ = 0.0;
  Eigen::VectorXd values_;
};

/// Uniform (tau, a, b) grid, symmetric about zero on each axis.
struct RidgeletGrid {
  double tau_max = 8.0, tau_step = 1.0 / 8.0;
  double a_max = 8.0, a_step = 1.0 / 8.0;
  double b_max = 12.0, b_step = 1.0 / 16.0;

  int n_tau() const { return 2 * static_cast<int>(std::round(tau_max / tau_step)) + 1; }
  int n_a() const { return 2 * static_cast<int>(std::round(a_max / a_step)) + 1; }
  int n_b() const { return 2 * static_cast<int>(std::round(b_max / b_step)) + 1; }
  double tau(int i) const { return -tau_max + i * tau_step; }
  double a(int j) const { return -a_max + j * a_step; }
  double b(int k) const { return -b_max + k * b_step; }
  RidgeletGrid refined() const {
    return {tau_max, 0.5 * tau_step, a_max, 0.5 * a_step, b_max, 0.5 * b_step};
  }
};

/// Sampled forward transform R_psi u on a RidgeletGrid (row-major tau, a, b).
struct RidgeletField {
  RidgeletGrid grid;
  Eigen::VectorXd values;
  bool resolution_warning = false;

  Eigen::Index index(int i, int j, int k) const {
    return (static_cast<Eigen::Index>(i) * grid.n_a() + j) * grid.n_b() + k;
  }
};

struct SupportBox {
  double t_lo = -1.0, t_hi = 1.0;
  double x_lo = -1.0, x_hi = 1.0;
};

using SpaceTimeFn = std::function<double(double, double)>;

/// R_psi u(tau, a, b) = Int u(t,x) psi(tau t + a x - b) dt dx over the box by
/// tensor Gauss-Legendre quadrature, evaluated at every grid node. d = 1.
RidgeletField ridgelet_forward(const SpaceTimeFn& u, const SupportBox& box,
                               const PsiSpec& spec, const RidgeletGrid& grid,
                               int gl_nodes = 96);

/// Single-point forward transform (used per estimator sample).
double ridgelet_transform_at(const SpaceTimeFn& u, const SupportBox& box,
                             const PsiSpec& spec, const PsiTable& table,
                             double tau, double a, double b, int gl_nodes = 96);

/// Dual transform: Int R(tau,a,b) sigma(tau t + a x - b) over the grid.
double ridgelet_reconstruct(const RidgeletField& field, const PsiSpec& spec,
                            double t, double x);

/// Batch reconstruction over a set of points (value per point). Much faster
/// than per-point calls; identical quadrature.
Eigen::VectorXd ridgelet_reconstruct_many(const RidgeletField& field,
                                          const PsiSpec& spec,
                                          const Eigen::VectorXd& ts,
                                          const Eigen::VectorXd& xs);

/// Width-N unbiased Monte Carlo estimator of u: samples hidden triples from
/// the heavy-tail law and sets W_i = R_psi u(theta_i) / (N pi(theta_i)).
std::pair<FeatureBank, WeightVector> build_unbiased_estimator(
    const SpaceTimeFn& u, const SupportBox& box, const PsiSpec& spec,
    const HeavyTailPi& law, std::size_t n, std::uint64_t seed,
    int gl_nodes = 96);

struct ParsevalReport {
  double lhs = 0.0;    // Int |R|^2 (1+tau^2)^p (1+a^2)^q (1+b^2)
  double bound = 0.0;  // L_psi * ||u||^2_{H^{p+1} H^{q+1}}
  double l_psi = 0.0;
  double sobolev_norm_sq = 0.0;
  bool tail_warning = false;  // outer 10% shell carries > 5% of the lhs
};

/// Numerical check of the weighted-Parseval inequality. `half_t`/`half_x`
/// are the (T, R) half-widths: u must be supported in [-2T,2T] x [-2R,2R].
ParsevalReport parseval_diagnostic(const SpaceTimeFn& u, double half_t,
                                   double half_x, int p, int q,
                                   const PsiSpec& spec,
                                   const RidgeletGrid& grid, int gl_nodes = 96);

/// L_psi = (4 pi + ||psi||)(1 + 4T + 4R) + 4 pi (M+1)^2 + ||psi'||^2 with
/// M = (2p + 2q + d + 3)/2.
double l_psi_bound(const PsiSpec& spec, int p, int q, double half_t,
                   double half_x);

/// Mixed Sobolev norm ||u||^2_{H^pt H^qx} of a compactly supported function,
/// by Fourier quadrature over the box.
double sobolev_mixed_norm_sq(const SpaceTimeFn& u, const SupportBox& box,
                             int p_t, int q_x, int gl_nodes = 96);

void save_field(const std::string& path, const RidgeletField& field);
RidgeletField load_field(const std::string& path);

}  // namespace rann
