#include "rann/cns.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>

namespace rann {

void ShockParams::validate() const {
  if (!(mu > 0.0)) throw std::invalid_argument("ShockParams: mu must be > 0");
  if (!(eps > 0.0)) throw std::invalid_argument("ShockParams: eps must be > 0");
  if (!(gamma > 0.0)) throw std::invalid_argument("ShockParams: gamma must be > 0");
  if (!(v_minus > 1.0))
    throw std::invalid_argument("ShockParams: v_minus must be > 1");
  if (!(v_minus < v_plus))
    throw std::invalid_argument("ShockParams: requires 1 < v_minus < v_plus");
  if (!(xi_range.hi > xi_range.lo))
    throw std::invalid_argument("ShockParams: empty xi_range");
  if (grid_points < 2)
    throw std::invalid_argument("ShockParams: grid_points must be >= 2");
}

double rankine_hugoniot_speed(const ShockParams& params) {
  params.validate();
  const double num = params.pressure(params.v_minus) - params.pressure(params.v_plus);
  const double s2 = num / (params.v_plus - params.v_minus);
  if (!(s2 > 0.0))
    throw std::invalid_argument(
        "rankine_hugoniot_speed: non-positive s^2 (violated state ordering)");
  return std::sqrt(s2);
}

namespace {

// Dormand-Prince 5(4) tableau.
struct Rk45Step {
  double y5;      // 5th order value
  double err;     // |y5 - y4|
};

template <class F>
Rk45Step rk45_step(const F& f, double y, double h) {
  const double k1 = f(y);
  const double k2 = f(y + h * (1.0 / 5.0) * k1);
  const double k3 = f(y + h * (3.0 / 40.0 * k1 + 9.0 / 40.0 * k2));
  const double k4 = f(y + h * (44.0 / 45.0 * k1 - 56.0 / 15.0 * k2 + 32.0 / 9.0 * k3));
  const double k5 = f(y + h * (19372.0 / 6561.0 * k1 - 25360.0 / 2187.0 * k2 +
                               64448.0 / 6561.0 * k3 - 212.0 / 729.0 * k4));
  const double k6 = f(y + h * (9017.0 / 3168.0 * k1 - 355.0 / 33.0 * k2 +
                               46732.0 / 5247.0 * k3 + 49.0 / 176.0 * k4 -
                               5103.0 / 18656.0 * k5));
  const double y5 = y + h * (35.0 / 384.0 * k1 + 500.0 / 1113.0 * k3 +
                             125.0 / 192.0 * k4 - 2187.0 / 6784.0 * k5 +
                             11.0 / 84.0 * k6);
  const double k7 = f(y5);
  const double y4 = y + h * (5179.0 / 57600.0 * k1 + 7571.0 / 16695.0 * k3 +
                             393.0 / 640.0 * k4 - 92097.0 / 339200.0 * k5 +
                             187.0 / 2100.0 * k6 + 1.0 / 40.0 * k7);
  return {y5, std::abs(y5 - y4)};
}

constexpr double kRelTol = 1e-10;
constexpr double kAbsTol = 1e-12;

// Integrates dv/dxi = f(v) from (0, v0) to each target in `targets`
// (monotone in the direction sign(targets.front())), writing results through
// `record`. Adaptive steps are clamped so every target is hit exactly.
template <class F, class Record>
void integrate_to_targets(const F& f, double v0, const Eigen::VectorXd& targets,
                          double band_lo, double band_hi, const Record& record) {
  if (targets.size() == 0) return;
  const double dir = targets[targets.size() - 1] >= 0.0 ? 1.0 : -1.0;
  double xi = 0.0;
  double v = v0;
  double h = 1e-4 * dir;
  for (Eigen::Index ti = 0; ti < targets.size(); ++ti) {
    const double target = targets[ti];
    while (dir * (target - xi) > 1e-14 * std::max(1.0, std::abs(target))) {
      bool clamped = false;
      if (dir * (xi + h - target) > 0.0) {
        h = target - xi;
        clamped = true;
      }
      const Rk45Step step = rk45_step(f, v, h);
      const double tol = kAbsTol + kRelTol * std::abs(v);
      if (step.err <= tol) {
        xi += h;
        v = step.y5;
        if (v < band_lo - 1e-9 || v > band_hi + 1e-9)
          throw IntegrationFailure(
              "integrate_wave: profile escaped the (v-, v+) band at xi=" +
              std::to_string(xi) + ", v=" + std::to_string(v));
        v = std::min(std::max(v, band_lo), band_hi);
        double grow = 0.9 * std::pow(tol / std::max(step.err, 1e-300), 0.2);
        grow = std::min(5.0, std::max(1.0, grow));
        if (clamped) grow = std::max(grow, 4.0);
        h = std::abs(h) * grow * dir;
        if (std::abs(h) < 1e-14) h = 1e-14 * dir;
      } else {
        h *= std::max(0.2, 0.9 * std::pow(tol / step.err, 0.25));
      }
    }
    record(ti, v);
  }
}

}  // namespace

WaveProfile integrate_wave(const ShockParams& params) {
  params.validate();
  const double s = rankine_hugoniot_speed(params);
  const double p_minus = params.pressure(params.v_minus);
  auto rhs = [&](double v) {
    return v / (params.mu * s) *
           (s * s * (params.v_minus - v) + p_minus - params.pressure(v));
  };

  WaveProfile profile;
  profile.s = s;
  const int n = params.grid_points;
  profile.xi =
      Eigen::VectorXd::LinSpaced(n, params.xi_range.lo, params.xi_range.hi);
  profile.v.resize(n);

  const double v_mid = 0.5 * (params.v_minus + params.v_plus);

  // Split the grid at xi = 0 and shoot in each direction from the midpoint.
  std::vector<Eigen::Index> fwd, bwd;
  for (Eigen::Index i = 0; i < n; ++i)
    (profile.xi[i] >= 0.0 ? fwd : bwd).push_back(i);

  Eigen::VectorXd fwd_targets(fwd.size());
  for (std::size_t i = 0; i < fwd.size(); ++i) fwd_targets[i] = profile.xi[fwd[i]];
  Eigen::VectorXd bwd_targets(bwd.size());
  for (std::size_t i = 0; i < bwd.size(); ++i)
    bwd_targets[i] = profile.xi[bwd[bwd.size() - 1 - i]];  // decreasing order

  integrate_to_targets(rhs, v_mid, fwd_targets, params.v_minus, params.v_plus,
                       [&](Eigen::Index k, double v) { profile.v[fwd[k]] = v; });
  integrate_to_targets(rhs, v_mid, bwd_targets, params.v_minus, params.v_plus,
                       [&](Eigen::Index k, double v) {
                         profile.v[bwd[bwd.size() - 1 - k]] = v;
                       });

  switch (params.velocity_mode) {
    case VelocityMode::MassConservation:
      // u = -s v + C with C fixed so u -> 0 in the v+ far field.
      profile.u = s * (params.v_plus - profile.v.array());
      break;
    case VelocityMode::PaperRelation:
      profile.u = -profile.v / s;
      break;
  }
  return profile;
}

namespace {
// Linear interpolation on the uniform profile grid, clamped at the ends.
double interp_clamped(const Eigen::VectorXd& xi, const Eigen::VectorXd& y,
                      double q) {
  const Eigen::Index n = xi.size();
  if (q <= xi[0]) return y[0];
  if (q >= xi[n - 1]) return y[n - 1];
  const double step = (xi[n - 1] - xi[0]) / static_cast<double>(n - 1);
  Eigen::Index i = static_cast<Eigen::Index>((q - xi[0]) / step);
  i = std::min(i, n - 2);
  const double f = (q - xi[i]) / (xi[i + 1] - xi[i]);
  return (1.0 - f) * y[i] + f * y[i + 1];
}
}  // namespace

std::pair<double, double> wave_to_spacetime(const WaveProfile& profile, double t,
                                            double x) {
  const double q = x - profile.s * t;
  return {interp_clamped(profile.xi, profile.v, q),
          interp_clamped(profile.xi, profile.u, q)};
}

void save_wave_csv(const std::string& path, const WaveProfile& profile) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("save_wave_csv: cannot open " + path);
  os << "xi,v,u\n";
  char buf[128];
  for (Eigen::Index i = 0; i < profile.xi.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g\n", profile.xi[i],
                  profile.v[i], profile.u[i]);
    os << buf;
  }
}

CnsResiduals cns_residuals(const Field& v, const Field& u,
                           const ShockParams& params,
                           const CollocationSet& points) {
  CnsResiduals out;
  double acc1 = 0.0, acc2 = 0.0;
  Eigen::Index used = 0;
  for (Eigen::Index i = 0; i < points.size(); ++i) {
    const Eigen::VectorXd x = points.x.row(i).transpose();
    const double t = points.t[i];
    const double vv = v.value(t, x);
    if (vv <= 1.0) {
      ++out.excluded;
      continue;
    }
    const double r1 = v.dt(t, x) - u.dx(t, x, 0);
    const double vx = v.dx(t, x, 0);
    const double ux = u.dx(t, x, 0);
    const double uxx = u.dxx(t, x, 0);
    // d/dx((1/v) du/dx) = -v_x u_x / v^2 + u_xx / v
    const double visc = -vx * ux / (vv * vv) + uxx / vv;
    const double r2 =
        u.dt(t, x) + params.pressure_derivative(vv) * vx - params.mu * visc;
    acc1 += r1 * r1;
    acc2 += r2 * r2;
    ++used;
  }
  if (used > 0) {
    out.j1 = acc1 / static_cast<double>(used);
    out.j2 = acc2 / static_cast<double>(used);
  }
  return out;
}

CnsResiduals cns_residuals_eulerian(const Field& rho, const Field& u,
                                    const ShockParams& params,
                                    const CollocationSet& points) {
  CnsResiduals out;
  double acc1 = 0.0, acc2 = 0.0;
  for (Eigen::Index i = 0; i < points.size(); ++i) {
    const Eigen::VectorXd x = points.x.row(i).transpose();
    const double t = points.t[i];
    const double r = rho.value(t, x);
    const double uu = u.value(t, x);
    const double rt = rho.dt(t, x), rx = rho.dx(t, x, 0);
    const double ut = u.dt(t, x), ux = u.dx(t, x, 0), uxx = u.dxx(t, x, 0);
    const double r1 = rt + rx * uu + r * ux;
    const double r2 = (rt * uu + r * ut) + (rx * uu * uu + 2.0 * r * uu * ux) -
                      params.mu * uxx;
    acc1 += r1 * r1;
    acc2 += r2 * r2;
  }
  if (points.size() > 0) {
    out.j1 = acc1 / static_cast<double>(points.size());
    out.j2 = acc2 / static_cast<double>(points.size());
  }
  return out;
}

// ---------------------------------------------------------------------------
// WaveFieldPair
// ---------------------------------------------------------------------------

class WaveFieldPair::Component : public Field {
 public:
  Component(const WaveProfile* profile, const Eigen::VectorXd* value,
            const Eigen::VectorXd* d1, const Eigen::VectorXd* d2)
      : profile_(profile), value_(value), d1_(d1), d2_(d2) {}

  double value(double t, const Eigen::VectorXd& x) const override {
    return interp_clamped(profile_->xi, *value_, x[0] - profile_->s * t);
  }
  double dt(double t, const Eigen::VectorXd& x) const override {
    return -profile_->s *
           interp_clamped(profile_->xi, *d1_, x[0] - profile_->s * t);
  }
  double dx(double t, const Eigen::VectorXd& x, int) const override {
    return interp_clamped(profile_->xi, *d1_, x[0] - profile_->s * t);
  }
  double dxx(double t, const Eigen::VectorXd& x, int) const override {
    return interp_clamped(profile_->xi, *d2_, x[0] - profile_->s * t);
  }

 private:
  const WaveProfile* profile_;
  const Eigen::VectorXd* value_;
  const Eigen::VectorXd* d1_;
  const Eigen::VectorXd* d2_;
};

namespace {
Eigen::VectorXd central_diff(const Eigen::VectorXd& y, double h) {
  const Eigen::Index n = y.size();
  Eigen::VectorXd d(n);
  for (Eigen::Index i = 1; i + 1 < n; ++i) d[i] = (y[i + 1] - y[i - 1]) / (2.0 * h);
  d[0] = (y[1] - y[0]) / h;
  d[n - 1] = (y[n - 1] - y[n - 2]) / h;
  return d;
}

Eigen::VectorXd central_diff2(const Eigen::VectorXd& y, double h) {
  const Eigen::Index n = y.size();
  Eigen::VectorXd d(n);
  for (Eigen::Index i = 1; i + 1 < n; ++i)
    d[i] = (y[i + 1] - 2.0 * y[i] + y[i - 1]) / (h * h);
  d[0] = d[1];
  d[n - 1] = d[n - 2];
  return d;
}
}  // namespace

WaveFieldPair::WaveFieldPair(WaveProfile profile) : profile_(std::move(profile)) {
  const double h =
      (profile_.xi[profile_.xi.size() - 1] - profile_.xi[0]) /
      static_cast<double>(profile_.xi.size() - 1);
  dv_ = central_diff(profile_.v, h);
  du_ = central_diff(profile_.u, h);
  d2v_ = central_diff2(profile_.v, h);
  d2u_ = central_diff2(profile_.u, h);
  v_field_ = std::make_shared<Component>(&profile_, &profile_.v, &dv_, &d2v_);
  u_field_ = std::make_shared<Component>(&profile_, &profile_.u, &du_, &d2u_);
}

}  // namespace rann
