#pragma once

#include <Eigen/Dense>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>

#include "rann/features.hpp"
#include "rann/sampling.hpp"

namespace rann {

enum class VelocityMode { PaperRelation, MassConservation };

/// Travelling-wave setup for the 1-D compressible system in Lagrangian mass
/// coordinates, with singular pressure p_eps(v) = eps/(v-1)^gamma.
struct ShockParams {
  double mu = 1.0;
  double eps = 1e-3;
  double gamma = 2.0;
  double v_plus = 1.5;
  double v_minus = 1.1;
  Interval xi_range{-5.0, 5.0};
  int grid_points = 5000;
  VelocityMode velocity_mode = VelocityMode::MassConservation;

  double pressure(double v) const { return eps / std::pow(v - 1.0, gamma); }
  double pressure_derivative(double v) const {
    return -eps * gamma / std::pow(v - 1.0, gamma + 1.0);
  }
  void validate() const;
};

/// Shock speed from the jump condition s^2 (v+ - v-) = p(v-) - p(v+);
/// positive sign convention.
double rankine_hugoniot_speed(const ShockParams& params);

struct IntegrationFailure : std::runtime_error {
  explicit IntegrationFailure(const std::string& what) : std::runtime_error(what) {}
};

/// Heteroclinic profile (v, u) on a uniform xi grid, plus the shock speed.
struct WaveProfile {
  Eigen::VectorXd xi;
  Eigen::VectorXd v;
  Eigen::VectorXd u;
  double s = 0.0;
};

/// Integrates v' = (v/(mu s)) (s^2 (v- - v) + p(v-) - p(v)) from the midpoint
/// value at xi = 0 in both directions with adaptive RK45, landing exactly on
/// the uniform grid nodes. u follows from the configured velocity mode.
WaveProfile integrate_wave(const ShockParams& params);

/// Linear interpolation of the profile at xi = x - s t, clamped to the
/// endpoint values outside the grid.
std::pair<double, double> wave_to_spacetime(const WaveProfile& profile, double t,
                                            double x);

void save_wave_csv(const std::string& path, const WaveProfile& profile);

struct CnsResiduals {
  double j1 = 0.0;  // continuity residual mean square
  double j2 = 0.0;  // momentum residual mean square
  Eigen::Index excluded = 0;  // points with v <= 1 (pressure singularity)
};

/// Lagrangian residuals of a (v, u) field pair:
///   j1: (dv/dt - du/dx)^2
///   j2: (du/dt + p'(v) dv/dx - mu d/dx((1/v) du/dx))^2, chain-rule expanded.
CnsResiduals cns_residuals(const Field& v, const Field& u,
                           const ShockParams& params,
                           const CollocationSet& points);

/// Eulerian residuals with the density supplied directly:
///   j1: (drho/dt + d(rho u)/dx)^2
///   j2: (d(rho u)/dt + d(rho u^2)/dx - mu d2u/dx2)^2.
CnsResiduals cns_residuals_eulerian(const Field& rho, const Field& u,
                                    const ShockParams& params,
                                    const CollocationSet& points);

/// Field views of the frozen profile; derivatives are dense central finite
/// differences on the ODE grid, linearly interpolated between nodes.
class WaveFieldPair {
 public:
  explicit WaveFieldPair(WaveProfile profile);
  WaveFieldPair(const WaveFieldPair&) = delete;
  WaveFieldPair& operator=(const WaveFieldPair&) = delete;
  const Field& v() const { return *v_field_; }
  const Field& u() const { return *u_field_; }
  const WaveProfile& profile() const { return profile_; }

 private:
  class Component;
  WaveProfile profile_;
  Eigen::VectorXd dv_, du_, d2v_, d2u_;
  std::shared_ptr<Component> v_field_;
  std::shared_ptr<Component> u_field_;
};

}  // namespace rann
