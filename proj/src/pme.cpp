#include "rann/pme.hpp"

#include <cmath>
#include <stdexcept>

#include "rann/quadrature.hpp"

namespace rann {

void BarenblattParams::validate() const {
  if (!(m > 1.0)) throw std::invalid_argument("BarenblattParams: m must be > 1");
  if (d < 1) throw std::invalid_argument("BarenblattParams: d must be >= 1");
  if (!(b_const > 0.0))
    throw std::invalid_argument("BarenblattParams: b_const must be > 0");
  if (!(t0 > 0.0)) throw std::invalid_argument("BarenblattParams: t0 must be > 0");
}

double BarenblattParams::support_radius(double t) const {
  return std::sqrt(b_const / profile_k()) * std::pow(t, beta());
}

namespace {
void check_time(double t) {
  if (!(t > 0.0)) throw std::domain_error("barenblatt: t must be > 0");
}
}  // namespace

double barenblatt(const BarenblattParams& params, double t,
                  const Eigen::VectorXd& x) {
  check_time(t);
  const double g = params.b_const -
                   params.profile_k() * x.squaredNorm() *
                       std::pow(t, -2.0 * params.beta());
  if (g <= 0.0) return 0.0;
  return std::pow(t, -params.alpha()) * std::pow(g, 1.0 / (params.m - 1.0));
}

double barenblatt_mass(const BarenblattParams& params, double t) {
  check_time(t);
  const double r_max = params.support_radius(t);
  const double surface =
      2.0 * std::pow(M_PI, 0.5 * params.d) / std::tgamma(0.5 * params.d);
  Eigen::VectorXd x(params.d);
  auto radial = [&](double r) {
    x.setZero();
    x[0] = r;
    return std::pow(r, params.d - 1) * barenblatt(params, t, x);
  };
  return surface * integrate_adaptive(radial, 0.0, r_max, 1e-12);
}

double BarenblattField::value(double t, const Eigen::VectorXd& x) const {
  return barenblatt(params_, t, x);
}

// Inside the support u = t^{-alpha} G^e with G = b - k |x|^2 t^{-2 beta},
// e = 1/(m-1); outside, all derivatives are zero.
double BarenblattField::dt(double t, const Eigen::VectorXd& x) const {
  check_time(t);
  const double al = params_.alpha();
  const double be = params_.beta();
  const double k = params_.profile_k();
  const double e = 1.0 / (params_.m - 1.0);
  const double r2 = x.squaredNorm();
  const double g = params_.b_const - k * r2 * std::pow(t, -2.0 * be);
  if (g <= 0.0) return 0.0;
  const double ta = std::pow(t, -al);
  return -al * ta / t * std::pow(g, e) +
         ta * e * std::pow(g, e - 1.0) *
             (2.0 * be * k * r2 * std::pow(t, -2.0 * be - 1.0));
}

double BarenblattField::dx(double t, const Eigen::VectorXd& x, int i) const {
  check_time(t);
  const double be = params_.beta();
  const double k = params_.profile_k();
  const double e = 1.0 / (params_.m - 1.0);
  const double g = params_.b_const -
                   k * x.squaredNorm() * std::pow(t, -2.0 * be);
  if (g <= 0.0) return 0.0;
  return std::pow(t, -params_.alpha()) * e * std::pow(g, e - 1.0) *
         (-2.0 * k * std::pow(t, -2.0 * be) * x[i]);
}

double BarenblattField::dxx(double t, const Eigen::VectorXd& x, int i) const {
  check_time(t);
  const double be = params_.beta();
  const double k = params_.profile_k();
  const double e = 1.0 / (params_.m - 1.0);
  const double g = params_.b_const -
                   k * x.squaredNorm() * std::pow(t, -2.0 * be);
  if (g <= 0.0) return 0.0;
  const double c = -2.0 * k * std::pow(t, -2.0 * be);  // dG/dx_i = c x_i
  return std::pow(t, -params_.alpha()) * e *
         ((e - 1.0) * std::pow(g, e - 2.0) * c * c * x[i] * x[i] +
          std::pow(g, e - 1.0) * c);
}

namespace {
bool integer_like(double m) { return std::abs(m - std::round(m)) < 1e-12; }

double int_pow(double u, int p) {
  double acc = 1.0;
  for (int i = 0; i < p; ++i) acc *= u;
  return acc;
}

// u^p for possibly non-integer p, extended to u <= 0 as sign(u)|u|^p.
double signed_pow(double u, double p, bool& fallback) {
  if (u > 0.0) return std::pow(u, p);
  fallback = true;
  if (u == 0.0) return 0.0;
  return -std::pow(-u, p);
}
}  // namespace

PmeResidualReport pme_residual(const Field& u, double m,
                               const CollocationSet& points) {
  if (!(m >= 1.0)) throw std::invalid_argument("pme_residual: m must be >= 1");
  PmeResidualReport rep;
  const Eigen::Index n = points.size();
  if (n == 0) return rep;
  const bool int_m = integer_like(m);
  const int mi = static_cast<int>(std::round(m));
  double acc = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::VectorXd x = points.x.row(i).transpose();
    const double t = points.t[i];
    const double val = u.value(t, x);
    if (val > 0.0) ++rep.points_inside_support;
    double grad2 = 0.0, lap = 0.0;
    for (int j = 0; j < x.size(); ++j) {
      const double dj = u.dx(t, x, j);
      grad2 += dj * dj;
      lap += u.dxx(t, x, j);
    }
    const double um1 = int_m ? int_pow(val, mi - 1)
                             : signed_pow(val, m - 1.0, rep.abs_power_fallback);
    double lap_um = m * um1 * lap;
    if (m > 1.0) {  // the m(m-1) u^{m-2} term vanishes identically at m = 1
      const double um2 = int_m ? int_pow(val, mi - 2)
                               : signed_pow(val, m - 2.0, rep.abs_power_fallback);
      lap_um += m * (m - 1.0) * um2 * grad2;
    }
    const double r = u.dt(t, x) - lap_um;
    acc += r * r;
    rep.max_abs_residual = std::max(rep.max_abs_residual, std::abs(r));
  }
  rep.j_pde = acc / static_cast<double>(n);
  return rep;
}

CollocationSet pme_training_set(const BarenblattParams& params,
                                CollocationSet points) {
  params.validate();
  Eigen::MatrixXd targets(points.size(), 1);
  for (Eigen::Index i = 0; i < points.size(); ++i)
    targets(i, 0) = barenblatt(params, points.t[i], points.x.row(i).transpose());
  points.targets = std::move(targets);
  return points;
}

}  // namespace rann
