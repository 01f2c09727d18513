#pragma once

#include <Eigen/Dense>
#include <complex>
#include <functional>

namespace rann {

/// Gauss-Legendre nodes and weights on [a, b].
struct GaussLegendre {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;
};

GaussLegendre gauss_legendre(int n, double a = -1.0, double b = 1.0);

/// Adaptive Simpson on [a, b]. The tolerance is resolved as
/// max(abs_tol, rel_tol * |coarse estimate|).
double integrate_adaptive(const std::function<double(double)>& f, double a,
                          double b, double rel_tol = 1e-10,
                          double abs_tol = 0.0, int max_depth = 48);

std::complex<double> integrate_adaptive_complex(
    const std::function<std::complex<double>(double)>& f, double a, double b,
    double rel_tol = 1e-10, double abs_tol = 0.0, int max_depth = 48);

/// Composite Simpson on a uniform grid with `panels` panels (rounded up to
/// even). For smooth integrands on fixed tables.
double composite_simpson(const std::function<double(double)>& f, double a,
                         double b, int panels);

/// ∫_0^∞ f(x) dx via x = sinh(u); `u_max` truncates the transformed domain,
/// so the caller must size it from the integrand's polynomial decay rate.
double integrate_half_line(const std::function<double(double)>& f,
                           double rel_tol = 1e-10, double u_max = 60.0);

/// Simpson panel weights for a uniform grid with n points (n odd preferred;
/// falls back to trapezoid weights on the last interval when n is even).
Eigen::VectorXd simpson_weights(int n, double step);

/// Trapezoid weights for a uniform grid.
Eigen::VectorXd trapezoid_weights(int n, double step);

}  // namespace rann
