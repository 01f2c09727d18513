#include "rann/ridgelet.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <mutex>
#include <tuple>
#include <vector>

#include "rann/quadrature.hpp"
#include "rann/rng.hpp"

namespace rann {

namespace {

constexpr double kSqrt2Pi = 2.5066282746310002;
constexpr double kOmegaCut = 40.0;  // exp(-w^2/2) underflows far earlier

std::complex<double> i_to_power(int k) {
  switch (((k % 4) + 4) % 4) {
    case 0: return {1.0, 0.0};
    case 1: return {0.0, 1.0};
    case 2: return {-1.0, 0.0};
    default: return {0.0, -1.0};
  }
}

// Fourier transform of the activation with the convention
// sigma_hat(w) = Int exp(-i w z) sigma(z) dz, delta parts omitted (they pair
// to zero against psi_hat's vanishing moments at the origin).
std::complex<double> sigma_hat_smooth(ActivationKind kind, double w) {
  switch (kind) {
    case ActivationKind::Tanh:
      return {0.0, -M_PI / std::sinh(0.5 * M_PI * w)};
    case ActivationKind::Sigmoid:
      return {0.0, -M_PI / std::sinh(M_PI * w)};
    case ActivationKind::Cos:
      throw std::logic_error("sigma_hat_smooth: cos is handled symbolically");
  }
  return {};
}

}  // namespace

std::complex<double> psi_hat(const PsiSpec& spec, double omega) {
  const double g = std::exp(-0.5 * omega * omega);
  if (spec.activation == ActivationKind::Cos) {
    const double mag =
        kSqrt2Pi * std::pow(std::abs(omega), spec.d + 2 * spec.n + 3) * g;
    return {mag / spec.k_norm, 0.0};
  }
  const std::complex<double> phase = i_to_power(spec.d + 2 * spec.n + 2);
  return kSqrt2Pi * phase * omega *
         std::pow(std::abs(omega), spec.d + 2 * spec.n + 1) * g / spec.k_norm;
}

double k_pair(const PsiSpec& spec) {
  const int dim = spec.d + 1;  // (t, x) dimension seen by the transform
  if (spec.activation == ActivationKind::Cos) {
    // sigma_hat_cos = pi (delta_{+1} + delta_{-1}).
    const std::complex<double> val =
        std::pow(2.0 * M_PI, dim - 1) * M_PI *
        (psi_hat(spec, -1.0) + psi_hat(spec, 1.0));
    return val.real();
  }
  auto integrand = [&](double w) {
    const std::complex<double> prod =
        psi_hat(spec, -w) * sigma_hat_smooth(spec.activation, w);
    return prod.real() * std::pow(std::abs(w), -dim);
  };
  // The integrand is even; the origin is a removable point (psi_hat's
  // vanishing moments beat the 1/w pole of sigma_hat), excluded by an
  // epsilon neighborhood.
  const double half =
      integrate_adaptive(integrand, 1e-12, kOmegaCut, 1e-12, 0.0, 52);
  return std::pow(2.0 * M_PI, dim - 1) * 2.0 * half;
}

PsiSpec normalize_pair(PsiSpec spec) {
  spec.k_norm = 1.0;
  const double k = k_pair(spec);
  if (!std::isfinite(k) || std::abs(k) < 1e-12)
    throw AdmissibilityError("normalize_pair: K_{psi,sigma} is not finite and nonzero");
  spec.k_norm = k;
  // Re-evaluate as a convergence check on the quadrature itself.
  const double check = k_pair(spec);
  if (!(std::abs(check - 1.0) < 1e-7))
    throw AdmissibilityError("normalize_pair: normalization quadrature did not converge");
  return spec;
}

PsiSpec default_psi_spec(ActivationKind activation, int d, int p, int q) {
  const double m = 0.5 * (2.0 * p + 2.0 * q + d + 3.0);
  PsiSpec spec;
  spec.d = d;
  spec.activation = activation;
  spec.n = 0;
  while (spec.vanishing_exponent() <= m) ++spec.n;
  return normalize_pair(spec);
}

double psi_l2_norm(const PsiSpec& spec) {
  auto f = [&](double w) { return std::norm(psi_hat(spec, w)); };
  const double total = 2.0 * integrate_adaptive(f, 0.0, kOmegaCut, 1e-12);
  return std::sqrt(total / (2.0 * M_PI));
}

double psi_deriv_l2_norm(const PsiSpec& spec) {
  auto f = [&](double w) { return w * w * std::norm(psi_hat(spec, w)); };
  const double total = 2.0 * integrate_adaptive(f, 0.0, kOmegaCut, 1e-12);
  return std::sqrt(total / (2.0 * M_PI));
}

// ---------------------------------------------------------------------------
// PsiTable
// ---------------------------------------------------------------------------

double PsiTable::operator()(double z) const {
  const double u = (z + z_max_) / step_;
  const Eigen::Index k = static_cast<Eigen::Index>(std::floor(u));
  if (k < 1 || k + 2 >= values_.size()) return 0.0;  // psi is negligible there
  const double f = u - static_cast<double>(k);
  const double f2 = f * f, f3 = f2 * f;
  const double cm1 = 0.5 * (-f3 + 2.0 * f2 - f);
  const double c0 = 0.5 * (3.0 * f3 - 5.0 * f2 + 2.0);
  const double c1 = 0.5 * (-3.0 * f3 + 4.0 * f2 + f);
  const double c2 = 0.5 * (f3 - f2);
  return cm1 * values_[k - 1] + c0 * values_[k] + c1 * values_[k + 1] +
         c2 * values_[k + 2];
}

std::shared_ptr<const PsiTable> PsiTable::get(const PsiSpec& spec, double z_max,
                                              double step) {
  using Key = std::tuple<int, int, std::uint64_t, int, std::uint64_t, std::uint64_t>;
  static std::map<Key, std::shared_ptr<const PsiTable>> cache;
  static std::mutex cache_mutex;
  const Key key{spec.n, spec.d, std::bit_cast<std::uint64_t>(spec.k_norm),
                static_cast<int>(spec.activation),
                std::bit_cast<std::uint64_t>(z_max),
                std::bit_cast<std::uint64_t>(step)};
  {
    std::lock_guard<std::mutex> lock(cache_mutex);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
  }

  auto table = std::make_shared<PsiTable>();
  table->z_max_ = z_max;
  table->step_ = step;
  const Eigen::Index nz = 2 * static_cast<Eigen::Index>(std::round(z_max / step)) + 1;
  table->values_.resize(nz);

  // Dense inverse-Fourier quadrature psi(z) = (1/2pi) Int psi_hat(w) e^{izw} dw
  // on a Simpson grid, evaluated with a phase recurrence per z.
  const double w_cut = 12.0;
  const int panels = 32768;
  const int nw = panels + 1;
  const double hw = 2.0 * w_cut / panels;
  std::vector<std::complex<double>> gw(nw);
  for (int k = 0; k < nw; ++k) {
    const double w = -w_cut + k * hw;
    double simpson = (k == 0 || k == nw - 1) ? 1.0 : (k % 2 == 1 ? 4.0 : 2.0);
    gw[k] = psi_hat(spec, w) * (simpson * hw / 3.0);
  }
  for (Eigen::Index iz = 0; iz < nz; ++iz) {
    const double z = -z_max + iz * step;
    const std::complex<double> rot{std::cos(z * hw), std::sin(z * hw)};
    std::complex<double> phase{std::cos(-z * w_cut), std::sin(-z * w_cut)};
    double acc = 0.0;
    for (int k = 0; k < nw; ++k) {
      acc += (gw[k] * phase).real();
      phase *= rot;
    }
    table->values_[iz] = acc / (2.0 * M_PI);
  }

  std::lock_guard<std::mutex> lock(cache_mutex);
  cache.emplace(key, table);
  return table;
}

// ---------------------------------------------------------------------------
// Forward transform
// ---------------------------------------------------------------------------

namespace {

// Cached Gauss-Legendre rules on [-1, 1].
const GaussLegendre& unit_gauss_legendre(int n) {
  static std::map<int, GaussLegendre> cache;
  static std::mutex cache_mutex;
  std::lock_guard<std::mutex> lock(cache_mutex);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, gauss_legendre(n)).first;
  return it->second;
}

GaussLegendre mapped_gl(int n, double lo, double hi) {
  const GaussLegendre& base = unit_gauss_legendre(n);
  GaussLegendre out;
  const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
  out.nodes = (base.nodes.array() * half + mid).matrix();
  out.weights = base.weights * half;
  return out;
}

// Quadrature-weighted samples of u over the box.
struct BoxSamples {
  Eigen::VectorXd t_nodes, x_nodes;
  Eigen::MatrixXd weighted;  // w_t(i) w_x(j) u(t_i, x_j)
};

BoxSamples sample_box(const SpaceTimeFn& u, const SupportBox& box, int gl_nodes) {
  BoxSamples s;
  const GaussLegendre gt = mapped_gl(gl_nodes, box.t_lo, box.t_hi);
  const GaussLegendre gx = mapped_gl(gl_nodes, box.x_lo, box.x_hi);
  s.t_nodes = gt.nodes;
  s.x_nodes = gx.nodes;
  s.weighted.resize(gl_nodes, gl_nodes);
  for (int i = 0; i < gl_nodes; ++i)
    for (int j = 0; j < gl_nodes; ++j)
      s.weighted(i, j) =
          gt.weights[i] * gx.weights[j] * u(gt.nodes[i], gx.nodes[j]);
  return s;
}

// Catmull-Rom coefficients for the fractional offset f in [0,1).
inline void cubic_coeffs(double f, double c[4]) {
  const double f2 = f * f, f3 = f2 * f;
  c[0] = 0.5 * (-f3 + 2.0 * f2 - f);
  c[1] = 0.5 * (3.0 * f3 - 5.0 * f2 + 2.0);
  c[2] = 0.5 * (-3.0 * f3 + 4.0 * f2 + f);
  c[3] = 0.5 * (f3 - f2);
}

// Frequency beyond which |psi_hat| has dropped below 1e-8 of its peak;
// used to flag grids that cannot resolve psi's oscillation.
double psi_effective_bandwidth(const PsiSpec& spec) {
  double peak = 0.0;
  for (int k = 1; k <= 4000; ++k) {
    peak = std::max(peak, std::abs(psi_hat(spec, k * 0.01)));
  }
  for (int k = 4000; k >= 1; --k) {
    if (std::abs(psi_hat(spec, k * 0.01)) > 1e-8 * peak) return k * 0.01;
  }
  return 0.01;
}

}  // namespace

RidgeletField ridgelet_forward(const SpaceTimeFn& u, const SupportBox& box,
                               const PsiSpec& spec, const RidgeletGrid& grid,
                               int gl_nodes) {
  if (spec.d != 1)
    throw std::invalid_argument("ridgelet_forward: quadrature path requires d = 1");
  // Snap the psi table step to the b lattice so psi(p - b_m) lands on table
  // nodes with an m-independent fractional offset.
  const int ratio = std::max(1, static_cast<int>(std::round(grid.b_step * 256.0)));
  const double h = grid.b_step / ratio;
  const double t_abs = std::max(std::abs(box.t_lo), std::abs(box.t_hi));
  const double x_abs = std::max(std::abs(box.x_lo), std::abs(box.x_hi));
  const double p_max = grid.tau_max * t_abs + grid.a_max * x_abs + 1.0;
  const double z_need = p_max + grid.b_max + 1.0;
  const double z_max = std::ceil(std::max(30.0, z_need) / h) * h;
  const auto table = PsiTable::get(spec, z_max, h);

  const BoxSamples samples = sample_box(u, box, gl_nodes);

  RidgeletField field;
  field.grid = grid;
  const int n_tau = grid.n_tau(), n_a = grid.n_a(), n_b = grid.n_b();
  field.values.resize(static_cast<Eigen::Index>(n_tau) * n_a * n_b);

  const double bandwidth = psi_effective_bandwidth(spec);
  const double nyquist = M_PI / bandwidth;
  field.resolution_warning = grid.b_step > 0.5 * nyquist ||
                             grid.tau_step * t_abs > 0.5 * nyquist ||
                             grid.a_step * x_abs > 0.5 * nyquist;

  // Lattice bookkeeping: p' = p + b_max lives on [b_max - p_max, b_max + p_max];
  // scatter the quadrature mass onto the h lattice, then each b value is a
  // pure integer shift (b_m = -b_max + m*b_step = (m*ratio - S_b) h ...).
  const long q_lo = static_cast<long>(std::floor((grid.b_max - p_max) / h)) - 2;
  const long q_hi = static_cast<long>(std::ceil((grid.b_max + p_max) / h)) + 2;
  const long dlen = q_hi - q_lo + 1;
  const long table_len = table->values().size();
  const long s_table = std::lround(z_max / h);  // index of z = 0 in the table

  Eigen::VectorXd density(dlen);
  const int gn = gl_nodes;
  for (int it = 0; it < n_tau; ++it) {
    const double tau = grid.tau(it);
    for (int ja = 0; ja < n_a; ++ja) {
      const double a = grid.a(ja);
      density.setZero();
      long used_lo = dlen, used_hi = -1;
      for (int i = 0; i < gn; ++i) {
        const double base = tau * samples.t_nodes[i] + grid.b_max;
        for (int j = 0; j < gn; ++j) {
          const double p = base + a * samples.x_nodes[j];
          const double uh = p / h;
          const long k = static_cast<long>(std::floor(uh));
          double c[4];
          cubic_coeffs(uh - static_cast<double>(k), c);
          const long idx = k - q_lo;
          const double w = samples.weighted(i, j);
          density[idx - 1] += w * c[0];
          density[idx] += w * c[1];
          density[idx + 1] += w * c[2];
          density[idx + 2] += w * c[3];
          used_lo = std::min(used_lo, idx - 1);
          used_hi = std::max(used_hi, idx + 2);
        }
      }
      // Correlate against the psi table. Density node q holds mass at
      // p' = q h (p' = p + b_max), so z = p - b_m = (q - m*ratio) h and the
      // table index of node q at offset m is q - m*ratio + s_table.
      Eigen::Index out_base = (static_cast<Eigen::Index>(it) * n_a + ja) *
                              static_cast<Eigen::Index>(n_b);
      for (int m = 0; m < n_b; ++m) {
        long tidx = used_lo + q_lo - static_cast<long>(m) * ratio + s_table;
        long lo = used_lo, hi = used_hi;
        if (tidx < 0) {
          lo += -tidx;
          tidx = 0;
        }
        const long avail = table_len - tidx;
        if (avail < hi - lo + 1) hi = lo + avail - 1;
        double acc = 0.0;
        if (hi >= lo) {
          const long len = hi - lo + 1;
          acc = Eigen::Map<const Eigen::VectorXd>(density.data() + lo, len)
                    .dot(Eigen::Map<const Eigen::VectorXd>(
                        table->values().data() + tidx, len));
        }
        field.values[out_base + m] = acc;
      }
    }
  }
  return field;
}

double ridgelet_transform_at(const SpaceTimeFn& u, const SupportBox& box,
                             const PsiSpec& spec, const PsiTable& table,
                             double tau, double a, double b, int gl_nodes) {
  if (spec.d != 1)
    throw std::invalid_argument("ridgelet_transform_at: requires d = 1");
  const BoxSamples samples = sample_box(u, box, gl_nodes);
  double acc = 0.0;
  for (int i = 0; i < gl_nodes; ++i) {
    const double base = tau * samples.t_nodes[i] - b;
    const double alo = std::min(a * samples.x_nodes[0],
                                a * samples.x_nodes[gl_nodes - 1]);
    const double ahi = std::max(a * samples.x_nodes[0],
                                a * samples.x_nodes[gl_nodes - 1]);
    if (base + ahi < -table.z_max() || base + alo > table.z_max()) continue;
    for (int j = 0; j < gl_nodes; ++j)
      acc += samples.weighted(i, j) * table(base + a * samples.x_nodes[j]);
  }
  return acc;
}

// ---------------------------------------------------------------------------
// Dual transform
// ---------------------------------------------------------------------------

namespace {

// Uniform table of the activation for the reconstruction correlations.
struct SigmaTable {
  double z_max = 0.0, step = 0.0;
  Eigen::VectorXd values;
};

SigmaTable build_sigma_table(ActivationKind kind, double z_max, double step) {
  SigmaTable s;
  s.step = step;
  s.z_max = std::ceil(z_max / step) * step;
  const Eigen::Index n = 2 * static_cast<Eigen::Index>(std::round(s.z_max / step)) + 1;
  s.values.resize(n);
  for (Eigen::Index i = 0; i < n; ++i)
    s.values[i] = activation_value(kind, -s.z_max + i * step);
  return s;
}

}  // namespace

Eigen::VectorXd ridgelet_reconstruct_many(const RidgeletField& field,
                                          const PsiSpec& spec,
                                          const Eigen::VectorXd& ts,
                                          const Eigen::VectorXd& xs) {
  if (ts.size() != xs.size())
    throw std::invalid_argument("ridgelet_reconstruct_many: point size mismatch");
  const RidgeletGrid& grid = field.grid;
  const int n_tau = grid.n_tau(), n_a = grid.n_a(), n_b = grid.n_b();
  const Eigen::Index n_pts = ts.size();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(n_pts);
  if (n_pts == 0) return out;

  // sigma lattice aligned with the b grid
  const int ratio = std::max(1, static_cast<int>(std::round(grid.b_step * 64.0)));
  const double h = grid.b_step / ratio;
  const double t_abs = ts.cwiseAbs().maxCoeff();
  const double x_abs = xs.cwiseAbs().maxCoeff();
  const double p_max = grid.tau_max * t_abs + grid.a_max * x_abs + 1.0;
  const SigmaTable sigma =
      build_sigma_table(spec.activation, p_max + grid.b_max + 1.0, h);
  const long s0 = std::lround(sigma.z_max / h);
  const long q_lo = static_cast<long>(std::floor(-p_max / h)) - 2;
  const long q_hi = static_cast<long>(std::ceil(p_max / h)) + 2;
  const long glen = q_hi - q_lo + 1;

  const Eigen::VectorXd wb = trapezoid_weights(n_b, grid.b_step);
  Eigen::VectorXd fw(n_b);
  Eigen::VectorXd conv(glen);

  for (int it = 0; it < n_tau; ++it) {
    const double tau = grid.tau(it);
    const double w_tau =
        (it == 0 || it == n_tau - 1) ? 0.5 * grid.tau_step : grid.tau_step;
    for (int ja = 0; ja < n_a; ++ja) {
      const double a = grid.a(ja);
      const double w_a =
          (ja == 0 || ja == n_a - 1) ? 0.5 * grid.a_step : grid.a_step;
      const Eigen::Index base = (static_cast<Eigen::Index>(it) * n_a + ja) *
                                static_cast<Eigen::Index>(n_b);
      fw = field.values.segment(base, n_b).cwiseProduct(wb);
      // conv[q] = sum_m fw[m] sigma((q+q_lo) h - b_m); accumulate one
      // contiguous axpy per m so the loop vectorizes.
      const long mb = std::lround(grid.b_max / h);
      const long slen = sigma.values.size();
      conv.setZero();
      for (int m = 0; m < n_b; ++m) {
        const long t0 = q_lo + mb + s0 - static_cast<long>(m) * ratio;
        long src = t0, dst = 0, len = glen;
        if (src < 0) {
          dst = -src;
          len -= dst;
          src = 0;
        }
        if (src + len > slen) len = slen - src;
        if (len <= 0) continue;
        conv.segment(dst, len) += fw[m] * sigma.values.segment(src, len);
      }
      const double w_node = w_tau * w_a;
      for (Eigen::Index l = 0; l < n_pts; ++l) {
        const double p = tau * ts[l] + a * xs[l];
        const double uh = p / h;
        const long k = static_cast<long>(std::floor(uh));
        double c[4];
        cubic_coeffs(uh - static_cast<double>(k), c);
        const long idx = k - q_lo;
        out[l] += w_node * (c[0] * conv[idx - 1] + c[1] * conv[idx] +
                            c[2] * conv[idx + 1] + c[3] * conv[idx + 2]);
      }
    }
  }
  return out;
}

double ridgelet_reconstruct(const RidgeletField& field, const PsiSpec& spec,
                            double t, double x) {
  Eigen::VectorXd ts(1), xs(1);
  ts[0] = t;
  xs[0] = x;
  return ridgelet_reconstruct_many(field, spec, ts, xs)[0];
}

// ---------------------------------------------------------------------------
// Unbiased estimator
// ---------------------------------------------------------------------------

std::pair<FeatureBank, WeightVector> build_unbiased_estimator(
    const SpaceTimeFn& u, const SupportBox& box, const PsiSpec& spec,
    const HeavyTailPi& law, std::size_t n, std::uint64_t seed, int gl_nodes) {
  if (spec.d != 1)
    throw std::invalid_argument("build_unbiased_estimator: requires d = 1");
  if (n == 0)
    throw std::invalid_argument("build_unbiased_estimator: n must be >= 1");
  SamplerSpec sampler;
  sampler.kind = law;
  sampler.d = 1;
  sampler.seed = seed;
  const std::vector<HiddenSample> hidden = sample_hidden(sampler, n);

  const auto table = PsiTable::get(spec);
  const BoxSamples samples = sample_box(u, box, gl_nodes);

  FeatureBank bank;
  bank.tau.resize(static_cast<Eigen::Index>(n));
  bank.a.resize(static_cast<Eigen::Index>(n), 1);
  bank.b.resize(static_cast<Eigen::Index>(n));
  bank.activation = spec.activation;
  bank.scale = 1.0;
  bank.fourier_pairs = false;
  WeightVector weights;
  weights.w.resize(static_cast<Eigen::Index>(n));

  const int gn = gl_nodes;
  for (std::size_t i = 0; i < n; ++i) {
    const HiddenSample& s = hidden[i];
    double transform = 0.0;
    for (int ig = 0; ig < gn; ++ig) {
      const double base = s.tau * samples.t_nodes[ig] - s.b;
      const double a0 = s.a[0] * samples.x_nodes[0];
      const double a1 = s.a[0] * samples.x_nodes[gn - 1];
      if (base + std::max(a0, a1) < -table->z_max() ||
          base + std::min(a0, a1) > table->z_max())
        continue;
      for (int jg = 0; jg < gn; ++jg)
        transform += samples.weighted(ig, jg) *
                     (*table)(base + s.a[0] * samples.x_nodes[jg]);
    }
    const double density = pi_density(law, 1, s);
    const Eigen::Index k = static_cast<Eigen::Index>(i);
    bank.tau[k] = s.tau;
    bank.a(k, 0) = s.a[0];
    bank.b[k] = -s.b;  // bank evaluates sigma(tau t + a x + b_bank)
    weights.w[k] = transform / (static_cast<double>(n) * density);
  }
  return {std::move(bank), std::move(weights)};
}

// ---------------------------------------------------------------------------
// Parseval diagnostic
// ---------------------------------------------------------------------------

double l_psi_bound(const PsiSpec& spec, int p, int q, double half_t,
                   double half_x) {
  const double m_exp = 0.5 * (2.0 * p + 2.0 * q + spec.d + 3.0);
  return (4.0 * M_PI + psi_l2_norm(spec)) * (1.0 + 4.0 * half_t + 4.0 * half_x) +
         4.0 * M_PI * (m_exp + 1.0) * (m_exp + 1.0) +
         std::pow(psi_deriv_l2_norm(spec), 2);
}

double sobolev_mixed_norm_sq(const SpaceTimeFn& u, const SupportBox& box,
                             int p_t, int q_x, int gl_nodes) {
  const GaussLegendre gt = mapped_gl(gl_nodes, box.t_lo, box.t_hi);
  const GaussLegendre gx = mapped_gl(gl_nodes, box.x_lo, box.x_hi);
  Eigen::MatrixXd uvals(gl_nodes, gl_nodes);
  for (int i = 0; i < gl_nodes; ++i)
    for (int j = 0; j < gl_nodes; ++j)
      uvals(i, j) = u(gt.nodes[i], gx.nodes[j]);

  const double s_cut = 48.0, ds = 0.125;
  const int ns = 2 * static_cast<int>(std::round(s_cut / ds)) + 1;
  using CMat = Eigen::Matrix<std::complex<double>, Eigen::Dynamic, Eigen::Dynamic>;
  CMat et(ns, gl_nodes), ex(ns, gl_nodes);
  for (int k = 0; k < ns; ++k) {
    const double s = -s_cut + k * ds;
    for (int i = 0; i < gl_nodes; ++i) {
      et(k, i) = std::polar(gt.weights[i], -s * gt.nodes[i]);
      ex(k, i) = std::polar(gx.weights[i], -s * gx.nodes[i]);
    }
  }
  const CMat uhat = et * uvals.cast<std::complex<double>>() * ex.transpose();

  const Eigen::VectorXd ws = trapezoid_weights(ns, ds);
  double acc = 0.0;
  for (int k = 0; k < ns; ++k) {
    const double s = -s_cut + k * ds;
    const double wt_s = ws[k] * std::pow(1.0 + s * s, p_t);
    for (int l = 0; l < ns; ++l) {
      const double xi = -s_cut + l * ds;
      acc += wt_s * ws[l] * std::pow(1.0 + xi * xi, q_x) * std::norm(uhat(k, l));
    }
  }
  return acc / std::pow(2.0 * M_PI, 2);
}

ParsevalReport parseval_diagnostic(const SpaceTimeFn& u, double half_t,
                                   double half_x, int p, int q,
                                   const PsiSpec& spec, const RidgeletGrid& grid,
                                   int gl_nodes) {
  SupportBox box{-2.0 * half_t, 2.0 * half_t, -2.0 * half_x, 2.0 * half_x};
  const RidgeletField field = ridgelet_forward(u, box, spec, grid, gl_nodes);

  const int n_tau = grid.n_tau(), n_a = grid.n_a(), n_b = grid.n_b();
  const Eigen::VectorXd wt = trapezoid_weights(n_tau, grid.tau_step);
  const Eigen::VectorXd wa = trapezoid_weights(n_a, grid.a_step);
  const Eigen::VectorXd wb = trapezoid_weights(n_b, grid.b_step);

  ParsevalReport rep;
  double shell = 0.0;
  for (int it = 0; it < n_tau; ++it) {
    const double tau = grid.tau(it);
    const double wt_tau = wt[it] * std::pow(1.0 + tau * tau, p);
    const bool tau_outer = std::abs(tau) > 0.9 * grid.tau_max;
    for (int ja = 0; ja < n_a; ++ja) {
      const double a = grid.a(ja);
      const double wt_a = wa[ja] * std::pow(1.0 + a * a, q);
      const bool a_outer = std::abs(a) > 0.9 * grid.a_max;
      const Eigen::Index base = (static_cast<Eigen::Index>(it) * n_a + ja) *
                                static_cast<Eigen::Index>(n_b);
      for (int k = 0; k < n_b; ++k) {
        const double b = grid.b(k);
        const double v = field.values[base + k];
        const double cell = wt_tau * wt_a * wb[k] * (1.0 + b * b) * v * v;
        rep.lhs += cell;
        if (tau_outer || a_outer || std::abs(b) > 0.9 * grid.b_max) shell += cell;
      }
    }
  }
  rep.tail_warning = rep.lhs > 0.0 && shell > 0.05 * rep.lhs;
  rep.l_psi = l_psi_bound(spec, p, q, half_t, half_x);
  rep.sobolev_norm_sq = sobolev_mixed_norm_sq(u, box, p + 1, q + 1, gl_nodes);
  rep.bound = rep.l_psi * rep.sobolev_norm_sq;
  return rep;
}

// ---------------------------------------------------------------------------
// Field serialization
// ---------------------------------------------------------------------------

namespace {
constexpr char kFieldMagic[8] = {'R', 'G', 'F', 'L', '0', '0', '0', '1'};
}

void save_field(const std::string& path, const RidgeletField& field) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("save_field: cannot open " + path);
  os.write(kFieldMagic, sizeof(kFieldMagic));
  const double header[6] = {field.grid.tau_max, field.grid.tau_step,
                            field.grid.a_max, field.grid.a_step,
                            field.grid.b_max, field.grid.b_step};
  os.write(reinterpret_cast<const char*>(header), sizeof(header));
  const std::uint8_t warn = field.resolution_warning ? 1 : 0;
  os.write(reinterpret_cast<const char*>(&warn), 1);
  const std::uint64_t count = static_cast<std::uint64_t>(field.values.size());
  os.write(reinterpret_cast<const char*>(&count), sizeof(count));
  os.write(reinterpret_cast<const char*>(field.values.data()),
           static_cast<std::streamsize>(sizeof(double) * count));
  if (!os) throw std::runtime_error("save_field: write failed for " + path);
}

RidgeletField load_field(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("load_field: cannot open " + path);
  char magic[8];
  is.read(magic, sizeof(magic));
  if (!is || std::memcmp(magic, kFieldMagic, sizeof(magic)) != 0)
    throw std::runtime_error("load_field: bad header in " + path);
  RidgeletField field;
  double header[6];
  is.read(reinterpret_cast<char*>(header), sizeof(header));
  field.grid = RidgeletGrid{header[0], header[1], header[2],
                            header[3], header[4], header[5]};
  std::uint8_t warn = 0;
  is.read(reinterpret_cast<char*>(&warn), 1);
  field.resolution_warning = warn != 0;
  std::uint64_t count = 0;
  is.read(reinterpret_cast<char*>(&count), sizeof(count));
  field.values.resize(static_cast<Eigen::Index>(count));
  is.read(reinterpret_cast<char*>(field.values.data()),
          static_cast<std::streamsize>(sizeof(double) * count));
  if (!is) throw std::runtime_error("load_field: truncated file " + path);
  return field;
}

}  // namespace rann
