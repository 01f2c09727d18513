#pragma once

#include <Eigen/Dense>

#include "rann/features.hpp"
#include "rann/sampling.hpp"

namespace rann {

/// Self-similar compactly supported solution of du/dt = Laplacian(u^m):
///   u(t,x) = t^{-alpha} (b - ((m-1)/2m) beta |x|^2 / t^{2 beta})_+^{1/(m-1)}
/// with alpha = d/(d(m-1)+2), beta = 1/(d(m-1)+2).
struct BarenblattParams {
  double m = 2.0;
  int d = 1;
  double b_const = 1.0;
  double t0 = 0.1;  // time shift; the experiment window is (t0, t0 + horizon)

  double alpha() const { return d / (d * (m - 1.0) + 2.0); }
  double beta() const { return 1.0 / (d * (m - 1.0) + 2.0); }
  /// Coefficient k in the profile term k |x|^2 t^{-2 beta}.
  double profile_k() const { return (m - 1.0) / (2.0 * m) * beta(); }
  /// Free-boundary radius at time t.
  double support_radius(double t) const;
  void validate() const;
};

/// Profile value; zero outside the support ball. Throws std::domain_error for t <= 0.
double barenblatt(const BarenblattParams& params, double t,
                  const Eigen::VectorXd& x);

/// Quadrature of u(t,.) over its support ball (radial reduction). Mass is
/// conserved in t, which the tests assert.
double barenblatt_mass(const BarenblattParams& params, double t);

/// Closed-form derivatives of the profile, valid strictly inside the support
/// (the profile is not differentiable at the free boundary).
class BarenblattField : public Field {
 public:
  explicit BarenblattField(BarenblattParams params) : params_(params) {}
  double value(double t, const Eigen::VectorXd& x) const override;
  double dt(double t, const Eigen::VectorXd& x) const override;
  double dx(double t, const Eigen::VectorXd& x, int i) const override;
  double dxx(double t, const Eigen::VectorXd& x, int i) const override;

 private:
  BarenblattParams params_;
};

struct PmeResidualReport {
  double j_pde = 0.0;               // mean of squared residuals
  Eigen::Index points_inside_support = 0;  // points with field value > 0
  double max_abs_residual = 0.0;
  bool abs_power_fallback = false;  // non-integer m hit a non-positive value
};

/// Monte Carlo average of (du/dt - Laplacian(u^m))^2 with the Laplacian
/// expanded by chain rule: m u^{m-1} Lap(u) + m(m-1) u^{m-2} |grad u|^2.
PmeResidualReport pme_residual(const Field& u, double m,
                               const CollocationSet& points);

/// Attaches the exact profile value at each point as the regression target.
CollocationSet pme_training_set(const BarenblattParams& params,
                                CollocationSet points);

}  // namespace rann
