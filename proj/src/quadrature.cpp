#include "rann/quadrature.hpp"

#include <cmath>
#include <stdexcept>

namespace rann {

GaussLegendre gauss_legendre(int n, double a, double b) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: n must be >= 1");
  GaussLegendre gl;
  gl.nodes.resize(n);
  gl.weights.resize(n);
  const int m = (n + 1) / 2;
  for (int i = 0; i < m; ++i) {
    // Newton iteration from the Chebyshev estimate of the i-th root of P_n.
    double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
      }
      pp = n * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / pp;
      z -= dz;
      if (std::abs(dz) < 1e-15) break;
    }
    gl.nodes[i] = -z;
    gl.nodes[n - 1 - i] = z;
    gl.weights[i] = gl.weights[n - 1 - i] = 2.0 / ((1.0 - z * z) * pp * pp);
  }
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  gl.nodes = (gl.nodes.array() * half + mid).matrix();
  gl.weights *= half;
  return gl;
}

namespace {

template <class T, class F>
T adaptive_step(const F& f, double a, double b, T fa, T fm, T fb, T whole,
                double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const T flm = f(lm);
  const T frm = f(rm);
  const T left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const T right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const T delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol)
    return left + right + delta / 15.0;
  return adaptive_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         adaptive_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

template <class T, class F>
T adaptive_on(const F& f, double a, double b, double rel_tol, double abs_tol,
              int max_depth) {
  if (a == b) return T{};
  // Coarse composite pass to set the absolute tolerance scale. 64 panels is
  // enough for the smooth one-signed integrands this is used on.
  const int n0 = 64;
  const double h = (b - a) / n0;
  T coarse{};
  double coarse_abs = 0.0;
  T fprev = f(a);
  for (int i = 0; i < n0; ++i) {
    const double x0 = a + i * h;
    const T fmid = f(x0 + 0.5 * h);
    const T fnext = f(x0 + h);
    const T panel = h / 6.0 * (fprev + 4.0 * fmid + fnext);
    coarse += panel;
    coarse_abs += std::abs(panel);
    fprev = fnext;
  }
  double tol = std::max(abs_tol, rel_tol * std::max(std::abs(coarse), 1e-3 * coarse_abs));
  if (tol == 0.0) tol = 1e-300;
  const double m = 0.5 * (a + b);
  const T fa = f(a);
  const T fm = f(m);
  const T fb = f(b);
  const T whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return adaptive_step(f, a, b, fa, fm, fb, whole, tol, max_depth);
}

}  // namespace

double integrate_adaptive(const std::function<double(double)>& f, double a,
                          double b, double rel_tol, double abs_tol,
                          int max_depth) {
  return adaptive_on<double>(f, a, b, rel_tol, abs_tol, max_depth);
}

std::complex<double> integrate_adaptive_complex(
    const std::function<std::complex<double>(double)>& f, double a, double b,
    double rel_tol, double abs_tol, int max_depth) {
  return adaptive_on<std::complex<double>>(f, a, b, rel_tol, abs_tol,
                                           max_depth);
}

double composite_simpson(const std::function<double(double)>& f, double a,
                         double b, int panels) {
  if (panels < 2) panels = 2;
  if (panels % 2 != 0) ++panels;
  const double h = (b - a) / panels;
  double sum = f(a) + f(b);
  for (int i = 1; i < panels; i += 2) sum += 4.0 * f(a + i * h);
  for (int i = 2; i < panels; i += 2) sum += 2.0 * f(a + i * h);
  return sum * h / 3.0;
}

double integrate_half_line(const std::function<double(double)>& f,
                           double rel_tol, double u_max) {
  auto g = [&f](double u) {
    const double x = std::sinh(u);
    return f(x) * std::cosh(u);
  };
  return integrate_adaptive(g, 0.0, u_max, rel_tol);
}

Eigen::VectorXd simpson_weights(int n, double step) {
  if (n < 2) return Eigen::VectorXd::Constant(std::max(n, 0), step);
  Eigen::VectorXd w = Eigen::VectorXd::Zero(n);
  const int last = (n % 2 == 1) ? n - 1 : n - 2;  // even panel count up to here
  w[0] += step / 3.0;
  for (int i = 1; i < last; ++i) w[i] += (i % 2 == 1 ? 4.0 : 2.0) * step / 3.0;
  w[last] += step / 3.0;
  if (n % 2 == 0) {  // close the final interval with trapezoid
    w[n - 2] += 0.5 * step;
    w[n - 1] += 0.5 * step;
  }
  return w;
}

Eigen::VectorXd trapezoid_weights(int n, double step) {
  Eigen::VectorXd w = Eigen::VectorXd::Constant(n, step);
  if (n >= 2) {
    w[0] = 0.5 * step;
    w[n - 1] = 0.5 * step;
  }
  return w;
}

}  // namespace rann
