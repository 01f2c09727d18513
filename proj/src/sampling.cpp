#include "rann/sampling.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>
#include <tuple>

#include "rann/quadrature.hpp"
#include "rann/rng.hpp"

namespace rann {

void SamplerSpec::validate() const {
  if (d < 1) throw std::invalid_argument("SamplerSpec: d must be >= 1");
  if (const auto* ht = std::get_if<HeavyTailPi>(&kind)) {
    if (!(ht->lambda_tau > 0.5))
      throw std::invalid_argument(
          "SamplerSpec: HeavyTailPi requires lambda_tau > 1/2");
    if (!(ht->lambda_a > 0.5 * d))
      throw std::invalid_argument(
          "SamplerSpec: HeavyTailPi requires lambda_a > d/2");
  } else {
    const auto& gf = std::get<GaussianFourier>(kind);
    if (!(gf.std > 0.0))
      throw std::invalid_argument("SamplerSpec: GaussianFourier requires std > 0");
  }
}

std::vector<HiddenSample> sample_hidden(const SamplerSpec& spec, std::size_t n) {
  spec.validate();
  std::vector<HiddenSample> out;
  out.reserve(n);
  Rng rng(spec.seed);
  if (const auto* ht = std::get_if<HeavyTailPi>(&spec.kind)) {
    // Exact sampling of the product law, no rejection:
    //   density (1+x^2)^{-lambda} in R^k is a multivariate Student-t with
    //   nu = 2*lambda - k, scaled by 1/sqrt(nu); with the chi-square mixture
    //   this collapses to z / sqrt(chi2_nu) for z standard normal in R^k.
    const double nu_tau = 2.0 * ht->lambda_tau - 1.0;
    const double nu_a = 2.0 * ht->lambda_a - spec.d;
    for (std::size_t i = 0; i < n; ++i) {
      HiddenSample s;
      s.tau = rng.normal() / std::sqrt(rng.chi_square(nu_tau));
      s.a.resize(spec.d);
      for (int j = 0; j < spec.d; ++j) s.a[j] = rng.normal();
      s.a /= std::sqrt(rng.chi_square(nu_a));
      s.b = rng.cauchy();
      out.push_back(std::move(s));
    }
  } else {
    const auto& gf = std::get<GaussianFourier>(spec.kind);
    for (std::size_t i = 0; i < n; ++i) {
      HiddenSample s;
      s.tau = gf.std * rng.normal();
      s.a.resize(spec.d);
      for (int j = 0; j < spec.d; ++j) s.a[j] = gf.std * rng.normal();
      s.b = rng.uniform_on(0.0, 2.0 * M_PI);
      out.push_back(std::move(s));
    }
  }
  return out;
}

namespace {

// One-dimensional factor integral of the heavy-tail law over R.
double line_factor(double lambda) {
  const double u_max = std::min(27.0 / (2.0 * lambda - 1.0) + 25.0, 5000.0);
  return 2.0 * integrate_half_line(
                   [lambda](double x) { return std::pow(1.0 + x * x, -lambda); },
                   1e-12, u_max);
}

double sphere_surface(int d) {
  return 2.0 * std::pow(M_PI, 0.5 * d) / std::tgamma(0.5 * d);
}

// Radial reduction of the a-factor integral over R^d.
double radial_factor(double lambda, int d) {
  const double u_max = std::min(27.0 / (2.0 * lambda - d) + 25.0, 5000.0);
  const double integral = integrate_half_line(
      [lambda, d](double r) {
        return std::pow(r, d - 1) * std::pow(1.0 + r * r, -lambda);
      },
      1e-12, u_max);
  return sphere_surface(d) * integral;
}

}  // namespace

double pi_normalization(const HeavyTailPi& law, int d) {
  static std::map<std::tuple<double, double, int>, double> cache;
  static std::mutex cache_mutex;
  const auto key = std::make_tuple(law.lambda_tau, law.lambda_a, d);
  {
    std::lock_guard<std::mutex> lock(cache_mutex);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
  }
  const double c =
      line_factor(law.lambda_tau) * radial_factor(law.lambda_a, d) * line_factor(1.0);
  std::lock_guard<std::mutex> lock(cache_mutex);
  cache.emplace(key, c);
  return c;
}

double pi_density(const HeavyTailPi& law, int d, const HiddenSample& sample) {
  const double c = pi_normalization(law, d);
  const double fa = std::pow(1.0 + sample.a.squaredNorm(), -law.lambda_a);
  const double ft = std::pow(1.0 + sample.tau * sample.tau, -law.lambda_tau);
  const double fb = 1.0 / (1.0 + sample.b * sample.b);
  return ft * fa * fb / c;
}

CollocationSet sample_collocation_pme(int d, std::size_t n, Interval t_range,
                                      std::uint64_t seed) {
  if (d < 1) throw std::invalid_argument("sample_collocation_pme: d must be >= 1");
  if (!(t_range.hi > t_range.lo))
    throw std::invalid_argument("sample_collocation_pme: empty t_range");
  CollocationSet set;
  const std::size_t per_half = n / 2;
  const std::size_t m = 2 * per_half;
  set.strategy.name = "pme_mixture_uniform_box";
  set.strategy.n_uniform = per_half;
  set.strategy.n_focus = per_half;
  set.strategy.odd_n_truncated = (n % 2 != 0);
  set.strategy.seed = seed;
  set.t.resize(m);
  set.x.resize(m, d);
  Rng rng(seed);
  for (std::size_t i = 0; i < m; ++i) {
    set.t[i] = rng.uniform_on(t_range.lo, t_range.hi);
    const bool box = i >= per_half;
    for (int j = 0; j < d; ++j)
      set.x(i, j) = box ? rng.uniform_on(0.2, 0.8) : rng.uniform();
  }
  return set;
}

CollocationSet sample_collocation_shock(
    std::size_t n, double t_max, Interval x_range,
    const std::function<double(double)>& shock_center, std::uint64_t seed) {
  if (!(t_max > 0.0))
    throw std::invalid_argument("sample_collocation_shock: t_max must be > 0");
  CollocationSet set;
  const std::size_t per_half = n / 2;
  const std::size_t m = 2 * per_half;
  set.strategy.name = "shock_mixture_uniform_importance";
  set.strategy.n_uniform = per_half;
  set.strategy.n_focus = per_half;
  set.strategy.odd_n_truncated = (n % 2 != 0);
  set.strategy.seed = seed;
  set.t.resize(m);
  set.x.resize(m, 1);
  Rng rng(seed);
  for (std::size_t i = 0; i < m; ++i) {
    const double t = rng.uniform_on(0.0, t_max);
    set.t[i] = t;
    if (i < per_half) {
      set.x(i, 0) = rng.uniform_on(x_range.lo, x_range.hi);
    } else {
      const double c = shock_center(t);
      double x;
      do {
        x = c + rng.normal();
      } while (x < x_range.lo || x > x_range.hi);
      set.x(i, 0) = x;
    }
  }
  return set;
}

}  // namespace rann
