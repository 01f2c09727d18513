#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "rann/quadrature.hpp"
#include "rann/rng.hpp"
#include "rann/sampling.hpp"

using namespace rann;

namespace {

// Two-sided decile quantile test at overall significance 0.01 (Bonferroni
// over the nine deciles): |empirical - analytic| <= z * sqrt(q(1-q)/n) / f.
void check_quantiles(std::vector<double> samples,
                     const std::function<double(double)>& cdf,
                     const std::function<double(double)>& pdf) {
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  const double z = 3.3;
  for (int decile = 1; decile <= 9; ++decile) {
    const double q = 0.1 * decile;
    // invert the CDF by bisection
    double lo = -1e8, hi = 1e8;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      (cdf(mid) < q ? lo : hi) = mid;
    }
    const double xq = 0.5 * (lo + hi);
    const double emp = samples[static_cast<std::size_t>(q * n)];
    const double band = z * std::sqrt(q * (1.0 - q) / n) / pdf(xq);
    INFO("decile ", decile, " emp ", emp, " analytic ", xq, " band ", band);
    CHECK(std::abs(emp - xq) <= band);
  }
}

}  // namespace

TEST_CASE("sample_hidden is deterministic and honors n = 0") {
  SamplerSpec spec;
  spec.kind = HeavyTailPi{1.0, 1.0};
  spec.d = 2;
  spec.seed = 777;
  CHECK(sample_hidden(spec, 0).empty());
  const auto a = sample_hidden(spec, 257);
  const auto b = sample_hidden(spec, 257);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].tau == b[i].tau);
    CHECK(a[i].b == b[i].b);
    CHECK(a[i].a == b[i].a);
  }
}

TEST_CASE("invalid sampler specs name the violated constraint") {
  SamplerSpec spec;
  spec.kind = HeavyTailPi{0.5, 1.0};
  spec.d = 1;
  CHECK_THROWS_WITH_AS(sample_hidden(spec, 1),
                       doctest::Contains("lambda_tau"), std::invalid_argument);
  spec.kind = HeavyTailPi{1.0, 0.5};
  CHECK_THROWS_WITH_AS(sample_hidden(spec, 1),
                       doctest::Contains("lambda_a"), std::invalid_argument);
  spec.kind = GaussianFourier{0.0};
  CHECK_THROWS_WITH_AS(sample_hidden(spec, 1), doctest::Contains("std"),
                       std::invalid_argument);
}

TEST_CASE("heavy-tail marginals match the analytic CDFs") {
  const std::size_t n = 100000;
  SamplerSpec spec;
  spec.kind = HeavyTailPi{1.0, 1.0};
  spec.d = 1;
  spec.seed = 20240810;
  const auto samples = sample_hidden(spec, n);

  std::vector<double> taus, bs;
  taus.reserve(n);
  bs.reserve(n);
  for (const auto& s : samples) {
    taus.push_back(s.tau);
    bs.push_back(s.b);
  }
  const auto cauchy_cdf = [](double x) { return std::atan(x) / M_PI + 0.5; };
  const auto cauchy_pdf = [](double x) { return 1.0 / (M_PI * (1.0 + x * x)); };
  // lambda = 1 makes both the b marginal and the tau marginal standard Cauchy
  check_quantiles(bs, cauchy_cdf, cauchy_pdf);
  check_quantiles(taus, cauchy_cdf, cauchy_pdf);

  // Student-type tau marginal at lambda_tau = 3/2: density prop. to
  // (1+x^2)^{-3/2}, CDF (1 + x/sqrt(1+x^2))/2.
  spec.kind = HeavyTailPi{1.5, 1.0};
  const auto heavier = sample_hidden(spec, n);
  std::vector<double> taus2;
  taus2.reserve(n);
  for (const auto& s : heavier) taus2.push_back(s.tau);
  check_quantiles(
      taus2,
      [](double x) { return 0.5 * (1.0 + x / std::sqrt(1.0 + x * x)); },
      [](double x) { return 0.5 * std::pow(1.0 + x * x, -1.5); });
}

TEST_CASE("gaussian fourier sampler matches its law") {
  const std::size_t n = 100000;
  SamplerSpec spec;
  spec.kind = GaussianFourier{10.0};
  spec.d = 1;
  spec.seed = 99;
  const auto samples = sample_hidden(spec, n);
  double mean = 0.0, var = 0.0, b_min = 1e30, b_max = -1e30, b_mean = 0.0;
  for (const auto& s : samples) mean += s.tau;
  mean /= n;
  for (const auto& s : samples) {
    var += (s.tau - mean) * (s.tau - mean);
    b_min = std::min(b_min, s.b);
    b_max = std::max(b_max, s.b);
    b_mean += s.b;
  }
  var /= (n - 1);
  b_mean /= n;
  CHECK(var >= 95.0);
  CHECK(var <= 105.0);
  CHECK(b_min >= 0.0);
  CHECK(b_max < 2.0 * M_PI);
  CHECK(std::abs(b_mean - M_PI) < 0.05);
}

TEST_CASE("pi normalization constant") {
  SUBCASE("lambda_tau = lambda_a = 1, d = 1 gives pi^3") {
    const double c = pi_normalization(HeavyTailPi{1.0, 1.0}, 1);
    CHECK(c == doctest::Approx(M_PI * M_PI * M_PI).epsilon(1e-10));
  }
  SUBCASE("d = 2 with lambda_a = 3/2 gives pi * 2pi * pi") {
    const double c = pi_normalization(HeavyTailPi{1.0, 1.5}, 2);
    CHECK(c == doctest::Approx(2.0 * std::pow(M_PI, 3)).epsilon(1e-10));
  }
  SUBCASE("closed form via Gamma functions as an independent oracle") {
    // Int (1+x^2)^{-l} dx = sqrt(pi) Gamma(l-1/2)/Gamma(l);
    // Int_{R^d} (1+|a|^2)^{-l} da = pi^{d/2} Gamma(l-d/2)/Gamma(l).
    const double lt = 0.8, la = 2.3;
    const int d = 3;
    const double expect = std::sqrt(M_PI) * std::tgamma(lt - 0.5) / std::tgamma(lt) *
                          std::pow(M_PI, 1.5) * std::tgamma(la - 1.5) /
                          std::tgamma(la) * M_PI;
    CHECK(pi_normalization(HeavyTailPi{lt, la}, d) ==
          doctest::Approx(expect).epsilon(1e-9));
  }
}

TEST_CASE("pi density values and mass") {
  const HeavyTailPi law{1.0, 1.0};
  HiddenSample origin;
  origin.tau = 0.0;
  origin.a = Eigen::VectorXd::Zero(1);
  origin.b = 0.0;
  const double c = pi_normalization(law, 1);
  CHECK(pi_density(law, 1, origin) == doctest::Approx(1.0 / c).epsilon(1e-12));

  // mass over the truncated box [-1000, 1000]^3 via the tan substitution on
  // each axis (fixed Simpson tensor grid)
  const double lim = std::atan(1000.0);
  const int nq = 129;
  Eigen::VectorXd nodes(nq), w = simpson_weights(nq, 2.0 * lim / (nq - 1));
  for (int i = 0; i < nq; ++i) nodes[i] = -lim + 2.0 * lim * i / (nq - 1);
  double mass = 0.0;
  HiddenSample s;
  s.a = Eigen::VectorXd::Zero(1);
  for (int i = 0; i < nq; ++i) {
    const double tau = std::tan(nodes[i]);
    const double jt = 1.0 + tau * tau;
    for (int j = 0; j < nq; ++j) {
      const double a = std::tan(nodes[j]);
      const double ja = 1.0 + a * a;
      double inner = 0.0;
      for (int k = 0; k < nq; ++k) {
        const double b = std::tan(nodes[k]);
        const double jb = 1.0 + b * b;
        s.tau = tau;
        s.a[0] = a;
        s.b = b;
        inner += w[k] * pi_density(law, 1, s) * jb;
      }
      mass += w[i] * w[j] * inner * jt * ja;
    }
  }
  CHECK(mass >= 0.99);
  CHECK(mass <= 1.001);
}

TEST_CASE("pme collocation stratification is exact") {
  SUBCASE("d=1, n=1000") {
    const auto set = sample_collocation_pme(1, 1000, {0.1, 1.1}, 5);
    REQUIRE(set.size() == 1000);
    CHECK(set.strategy.n_uniform == 500);
    CHECK(set.strategy.n_focus == 500);
    CHECK_FALSE(set.strategy.odd_n_truncated);
    // the focus stratum lies in [0.2, 0.8] exactly
    for (Eigen::Index i = 500; i < 1000; ++i) {
      CHECK(set.x(i, 0) >= 0.2);
      CHECK(set.x(i, 0) <= 0.8);
    }
    int in_box = 0;
    for (Eigen::Index i = 0; i < 1000; ++i)
      if (set.x(i, 0) >= 0.2 && set.x(i, 0) <= 0.8) ++in_box;
    CHECK(in_box >= 500);
    for (Eigen::Index i = 0; i < 1000; ++i) {
      CHECK(set.t[i] >= 0.1);
      CHECK(set.t[i] <= 1.1);
      CHECK(set.x(i, 0) >= 0.0);
      CHECK(set.x(i, 0) <= 1.0);
    }
  }
  SUBCASE("n=2 puts one point per stratum") {
    const auto set = sample_collocation_pme(2, 2, {0.0, 1.0}, 7);
    CHECK(set.size() == 2);
    CHECK(set.strategy.n_uniform == 1);
    CHECK(set.strategy.n_focus == 1);
  }
  SUBCASE("odd n truncates and flags") {
    const auto set = sample_collocation_pme(1, 11, {0.0, 1.0}, 7);
    CHECK(set.size() == 10);
    CHECK(set.strategy.odd_n_truncated);
  }
  SUBCASE("d=3 focus-stratum coordinate mean is 0.5 within 3 SE") {
    const std::size_t n = 10000;
    const auto set = sample_collocation_pme(3, n, {0.0, 1.0}, 11);
    double mean = 0.0;
    int cnt = 0;
    for (Eigen::Index i = n / 2; i < static_cast<Eigen::Index>(n); ++i)
      for (int j = 0; j < 3; ++j) {
        mean += set.x(i, j);
        ++cnt;
      }
    mean /= cnt;
    const double se = (0.6 / std::sqrt(12.0)) / std::sqrt(static_cast<double>(cnt));
    CHECK(std::abs(mean - 0.5) <= 3.0 * se);
  }
}

TEST_CASE("shock collocation mixture") {
  const std::size_t n = 10000;
  const auto center = [](double) { return 0.0; };
  const auto set = sample_collocation_shock(n, 1.0, {-5.0, 5.0}, center, 3);
  REQUIRE(set.size() == static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < set.size(); ++i) {
    CHECK(set.x(i, 0) >= -5.0);
    CHECK(set.x(i, 0) <= 5.0);
    CHECK(set.t[i] >= 0.0);
    CHECK(set.t[i] <= 1.0);
  }
  // importance stratum std close to 1 (truncation correction ignored)
  double mean = 0.0;
  const Eigen::Index half = set.size() / 2;
  for (Eigen::Index i = half; i < set.size(); ++i) mean += set.x(i, 0);
  mean /= half;
  double var = 0.0;
  for (Eigen::Index i = half; i < set.size(); ++i)
    var += (set.x(i, 0) - mean) * (set.x(i, 0) - mean);
  const double sd = std::sqrt(var / (half - 1));
  CHECK(sd >= 0.9);
  CHECK(sd <= 1.1);

  const auto tiny = sample_collocation_shock(2, 1.0, {-5.0, 5.0}, center, 3);
  CHECK(tiny.strategy.n_uniform == 1);
  CHECK(tiny.strategy.n_focus == 1);
}

TEST_CASE("seed streams are independent") {
  CHECK(derive_seed(1, kStreamHidden) != derive_seed(1, kStreamCollocation));
  CHECK(derive_seed(1, kStreamCell, 0) != derive_seed(1, kStreamCell, 1));
  CHECK(derive_seed(1, kStreamCell, 0) != derive_seed(2, kStreamCell, 0));
}
