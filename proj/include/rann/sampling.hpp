#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace rann {

/// One frozen hidden-layer sample: pre-activation tau*t + a.x + b.
struct HiddenSample {
  double tau = 0.0;
  Eigen::VectorXd a;
  double b = 0.0;
};

/// Heavy-tailed product law
///   pi(tau, a, b) = (1/C_pi) (1+tau^2)^{-lambda_tau} (1+|a|^2)^{-lambda_a} (1+b^2)^{-1}.
/// Finiteness of C_pi requires lambda_tau > 1/2 and lambda_a > d/2.
struct HeavyTailPi {
  double lambda_tau = 1.0;
  double lambda_a = 1.0;
};

/// tau and each component of a are N(0, std^2); b is uniform on [0, 2pi).
struct GaussianFourier {
  double std = 10.0;
};

struct SamplerSpec {
  std::variant<HeavyTailPi, GaussianFourier> kind = HeavyTailPi{};
  int d = 1;
  std::uint64_t seed = 0;

  void validate() const;  // throws std::invalid_argument naming the violated constraint
};

std::vector<HiddenSample> sample_hidden(const SamplerSpec& spec, std::size_t n);

/// Normalisation constant C_pi: the product of the tau, a (radial) and b
/// factor integrals, each computed by adaptive quadrature to 1e-10 relative
/// and cached per (lambda_tau, lambda_a, d).
double pi_normalization(const HeavyTailPi& law, int d);

/// Density value including the 1/C_pi factor.
double pi_density(const HeavyTailPi& law, int d, const HiddenSample& sample);

struct Interval {
  double lo = 0.0;
  double hi = 1.0;
  double length() const { return hi - lo; }
};

/// How a collocation set was produced. Stratum counts are exact: points
/// [0, n_uniform) came from the uniform stratum and [n_uniform, size) from
/// the focused/importance stratum.
struct SamplingStrategy {
  std::string name;
  std::size_t n_uniform = 0;
  std::size_t n_focus = 0;
  bool odd_n_truncated = false;
  std::uint64_t seed = 0;
};

struct CollocationSet {
  Eigen::VectorXd t;                       // M
  Eigen::MatrixXd x;                       // M x d
  std::optional<Eigen::MatrixXd> targets;  // M x k when supervised
  SamplingStrategy strategy;

  Eigen::Index size() const { return t.size(); }
  int dim() const { return static_cast<int>(x.cols()); }
};

/// Mixture used by the porous-medium experiments: per stratum half, x uniform
/// on (0,1)^d and on [0.2,0.8]^d respectively; t uniform on t_range. Odd n is
/// rounded down per half and flagged on the strategy record.
CollocationSet sample_collocation_pme(int d, std::size_t n, Interval t_range,
                                      std::uint64_t seed);

/// Shock-focused mixture: t uniform on (0, t_max); half of x uniform on
/// x_range, half N(shock_center(t), 1) redrawn until inside x_range.
CollocationSet sample_collocation_shock(
    std::size_t n, double t_max, Interval x_range,
    const std::function<double(double)>& shock_center, std::uint64_t seed);

}  // namespace rann
