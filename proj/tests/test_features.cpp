#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "rann/features.hpp"
#include "rann/rng.hpp"

using namespace rann;

namespace {

FeatureBank random_bank(int n, int d, ActivationKind kind, std::uint64_t seed,
                        bool pairs = false, double scale = 1.0) {
  SamplerSpec spec;
  spec.kind = GaussianFourier{1.5};
  spec.d = d;
  spec.seed = seed;
  return FeatureBank::from_samples(sample_hidden(spec, n), kind, scale, pairs);
}

WeightVector random_weights(const FeatureBank& bank, std::uint64_t seed,
                            bool with_bias = false) {
  Rng rng(seed);
  WeightVector w;
  w.w.resize(bank.feature_count());
  for (Eigen::Index i = 0; i < w.w.size(); ++i) w.w[i] = rng.normal();
  if (with_bias) w.bias = rng.normal();
  return w;
}

}  // namespace

TEST_CASE("eval basics") {
  SUBCASE("zero weights give zero everywhere") {
    const FeatureBank bank = random_bank(5, 2, ActivationKind::Tanh, 1);
    WeightVector w;
    w.w = Eigen::VectorXd::Zero(5);
    CHECK(eval(bank, w, 0.3, Eigen::Vector2d(0.1, -0.2)) == 0.0);
  }
  SUBCASE("single cosine feature at zero pre-activation is one") {
    FeatureBank bank;
    bank.tau = Eigen::VectorXd::Zero(1);
    bank.a = Eigen::MatrixXd::Zero(1, 1);
    bank.b = Eigen::VectorXd::Zero(1);
    bank.activation = ActivationKind::Cos;
    WeightVector w;
    w.w = Eigen::VectorXd::Ones(1);
    CHECK(eval(bank, w, 12.0, Eigen::VectorXd::Zero(1)) == 1.0);
    CHECK(eval(bank, w, -3.0, Eigen::VectorXd::Zero(1)) == 1.0);
  }
  SUBCASE("matches an independent scalar re-summation") {
    const FeatureBank bank = random_bank(8, 2, ActivationKind::Tanh, 42);
    const WeightVector w = random_weights(bank, 43, true);
    const double t = 0.3;
    const Eigen::Vector2d x(0.1, 0.7);
    double expect = *w.bias;
    for (int i = 0; i < 8; ++i) {
      const double z = bank.tau[i] * t + bank.a(i, 0) * x[0] +
                       bank.a(i, 1) * x[1] + bank.b[i];
      expect += w.w[i] * std::tanh(z);
    }
    CHECK(eval(bank, w, t, x) == doctest::Approx(expect).epsilon(1e-14));
  }
  SUBCASE("dimension mismatch throws") {
    const FeatureBank bank = random_bank(3, 2, ActivationKind::Tanh, 1);
    const WeightVector w = random_weights(bank, 2);
    CHECK_THROWS_AS(eval(bank, w, 0.0, Eigen::VectorXd::Zero(3)),
                    std::invalid_argument);
  }
}

TEST_CASE("eval is linear in the weights") {
  const FeatureBank bank = random_bank(16, 2, ActivationKind::Sigmoid, 9);
  const WeightVector u = random_weights(bank, 10);
  const WeightVector v = random_weights(bank, 11);
  WeightVector sum;
  sum.w = u.w + v.w;
  Rng rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    const double t = rng.uniform_on(-1, 1);
    const Eigen::Vector2d x(rng.uniform_on(-1, 1), rng.uniform_on(-1, 1));
    CHECK(eval(bank, sum, t, x) ==
          doctest::Approx(eval(bank, u, t, x) + eval(bank, v, t, x))
              .epsilon(1e-13));
  }
}

TEST_CASE("derivatives") {
  SUBCASE("time derivative of a single tanh feature") {
    FeatureBank bank;
    bank.tau = Eigen::VectorXd::Constant(1, 2.0);
    bank.a = Eigen::MatrixXd::Zero(1, 1);
    bank.b = Eigen::VectorXd::Zero(1);
    bank.activation = ActivationKind::Tanh;
    WeightVector w;
    w.w = Eigen::VectorXd::Constant(1, 1.7);
    // at pre-activation zero, tanh' = 1, so du/dt = W * tau
    const double d = eval_derivative(bank, w, 0.0, Eigen::VectorXd::Zero(1), 1,
                                     Eigen::VectorXi::Zero(1));
    CHECK(d == doctest::Approx(2.0 * 1.7).epsilon(1e-15));
  }
  SUBCASE("any derivative of the zero network vanishes") {
    const FeatureBank bank = random_bank(4, 1, ActivationKind::Cos, 5);
    WeightVector w;
    w.w = Eigen::VectorXd::Zero(4);
    Eigen::VectorXi mi = Eigen::VectorXi::Zero(1);
    mi[0] = 2;
    CHECK(eval_derivative(bank, w, 0.2, Eigen::VectorXd::Zero(1), 0, mi) == 0.0);
  }
  SUBCASE("order above two is rejected") {
    const FeatureBank bank = random_bank(4, 1, ActivationKind::Cos, 5);
    const WeightVector w = random_weights(bank, 6);
    Eigen::VectorXi mi = Eigen::VectorXi::Zero(1);
    mi[0] = 2;
    CHECK_THROWS_AS(
        eval_derivative(bank, w, 0.0, Eigen::VectorXd::Zero(1), 1, mi),
        std::invalid_argument);
  }
}

TEST_CASE("derivatives match central finite differences") {
  // all activation kinds, all orders up to 2, random banks
  for (ActivationKind kind :
       {ActivationKind::Tanh, ActivationKind::Cos, ActivationKind::Sigmoid}) {
    for (int trial = 0; trial < 5; ++trial) {
      const FeatureBank bank =
          random_bank(12, 2, kind, 100 + trial, kind == ActivationKind::Cos);
      const WeightVector w = random_weights(bank, 200 + trial);
      const double t = 0.17;
      const Eigen::Vector2d x(0.23, -0.31);
      const NetworkField f(bank, w);

      const double h = 1e-4;
      auto at = [&](double tt, double x0, double x1) {
        return eval(bank, w, tt, Eigen::Vector2d(x0, x1));
      };
      const double dt_fd = (at(t + h, x[0], x[1]) - at(t - h, x[0], x[1])) / (2 * h);
      CHECK(f.dt(t, x) == doctest::Approx(dt_fd).epsilon(1e-6));
      const double dx0_fd = (at(t, x[0] + h, x[1]) - at(t, x[0] - h, x[1])) / (2 * h);
      CHECK(f.dx(t, x, 0) == doctest::Approx(dx0_fd).epsilon(1e-6));
      const double dxx1_fd = (at(t, x[0], x[1] + h) - 2 * at(t, x[0], x[1]) +
                              at(t, x[0], x[1] - h)) /
                             (h * h);
      CHECK(f.dxx(t, x, 1) == doctest::Approx(dxx1_fd).epsilon(1e-5));
      // laplacian against finite differences
      const double lap_fd = dxx1_fd + (at(t, x[0] + h, x[1]) -
                                       2 * at(t, x[0], x[1]) +
                                       at(t, x[0] - h, x[1])) /
                                          (h * h);
      CHECK(f.laplacian(t, x) == doctest::Approx(lap_fd).epsilon(1e-5));
    }
  }
}

TEST_CASE("mixed time-space derivative uses the product of factors") {
  const FeatureBank bank = random_bank(6, 1, ActivationKind::Cos, 77);
  const WeightVector w = random_weights(bank, 78);
  const double t = 0.4, h = 1e-4;
  Eigen::VectorXd x(1);
  x[0] = -0.2;
  Eigen::VectorXi mi(1);
  mi[0] = 1;
  auto at = [&](double tt, double xx) {
    Eigen::VectorXd p(1);
    p[0] = xx;
    return eval(bank, w, tt, p);
  };
  const double fd = (at(t + h, x[0] + h) - at(t + h, x[0] - h) -
                     at(t - h, x[0] + h) + at(t - h, x[0] - h)) /
                    (4 * h * h);
  CHECK(eval_derivative(bank, w, t, x, 1, mi) == doctest::Approx(fd).epsilon(1e-6));
}

TEST_CASE("activation bounds on dense grids") {
  for (double z = -20.0; z <= 20.0; z += 1e-3) {
    CHECK(std::abs(activation_derivative(ActivationKind::Tanh, 0, z)) <= 1.0);
    CHECK(std::abs(activation_derivative(ActivationKind::Tanh, 1, z)) <= 1.0);
    CHECK(std::abs(activation_derivative(ActivationKind::Tanh, 2, z)) <=
          4.0 / (3.0 * std::sqrt(3.0)) + 1e-12);
    CHECK(std::abs(activation_derivative(ActivationKind::Sigmoid, 1, z)) <=
          0.25 + 1e-12);
    CHECK(std::abs(activation_derivative(ActivationKind::Sigmoid, 2, z)) <=
          1.0 / (6.0 * std::sqrt(3.0)) + 1e-12);
  }
  CHECK(activation_sup_norm(ActivationKind::Tanh, 0) == 1.0);
  CHECK(activation_sup_norm(ActivationKind::Tanh, 2) ==
        doctest::Approx(4.0 / (3.0 * std::sqrt(3.0))));
  // saturation short-circuit beyond |z| = 40
  CHECK(activation_value(ActivationKind::Tanh, 1e6) == 1.0);
  CHECK(activation_value(ActivationKind::Sigmoid, -1e6) == 0.0);
  CHECK(activation_derivative(ActivationKind::Tanh, 1, 1e6) == 0.0);
}

TEST_CASE("amplitude-phase collapse") {
  SUBCASE("pure cosine pair keeps the offset") {
    FeatureBank bank;
    bank.tau = Eigen::VectorXd::Constant(1, 0.5);
    bank.a = Eigen::MatrixXd::Constant(1, 1, 1.2);
    bank.b = Eigen::VectorXd::Constant(1, 0.3);
    bank.activation = ActivationKind::Cos;
    bank.fourier_pairs = true;
    WeightVector w;
    w.w.resize(2);
    w.w << 1.0, 0.0;
    const auto [cb, cw] = amplitude_phase_collapse(bank, w);
    CHECK(cw.w[0] == doctest::Approx(1.0));
    CHECK(cb.b[0] == doctest::Approx(0.3));  // zero phase shift
  }
  SUBCASE("pure sine pair shifts by -pi/2: cos(z - pi/2) = sin z") {
    FeatureBank bank;
    bank.tau = Eigen::VectorXd::Constant(1, 0.9);
    bank.a = Eigen::MatrixXd::Constant(1, 1, -0.4);
    bank.b = Eigen::VectorXd::Constant(1, 0.1);
    bank.activation = ActivationKind::Cos;
    bank.fourier_pairs = true;
    WeightVector w;
    w.w.resize(2);
    w.w << 0.0, 1.0;
    const auto [cb, cw] = amplitude_phase_collapse(bank, w);
    CHECK(cw.w[0] == doctest::Approx(1.0));
    CHECK(cb.b[0] == doctest::Approx(0.1 - M_PI / 2).epsilon(1e-12));
    Rng rng(4);
    for (int i = 0; i < 100; ++i) {
      const double t = rng.uniform_on(-2, 2);
      Eigen::VectorXd x(1);
      x[0] = rng.uniform_on(-2, 2);
      CHECK(eval(cb, cw, t, x) == doctest::Approx(eval(bank, w, t, x)).epsilon(1e-12));
    }
  }
  SUBCASE("random pairs agree everywhere, including derivatives") {
    const FeatureBank bank = random_bank(10, 1, ActivationKind::Cos, 31, true,
                                         1.0 / std::sqrt(10.0));
    const WeightVector w = random_weights(bank, 32, true);
    const auto [cb, cw] = amplitude_phase_collapse(bank, w);
    Rng rng(33);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
      const double t = rng.uniform_on(-2, 2);
      Eigen::VectorXd x(1);
      x[0] = rng.uniform_on(-2, 2);
      worst = std::max(worst, std::abs(eval(cb, cw, t, x) - eval(bank, w, t, x)));
    }
    CHECK(worst <= 1e-12);
    // derivative preservation up to order 2
    const NetworkField f0(bank, w), f1(cb, cw);
    Eigen::VectorXd x(1);
    x[0] = 0.37;
    CHECK(f0.dt(0.2, x) == doctest::Approx(f1.dt(0.2, x)).epsilon(1e-10));
    CHECK(f0.dxx(0.2, x, 0) == doctest::Approx(f1.dxx(0.2, x, 0)).epsilon(1e-10));
  }
  SUBCASE("wrong activation is rejected") {
    const FeatureBank bank = random_bank(2, 1, ActivationKind::Tanh, 3);
    const WeightVector w = random_weights(bank, 4);
    CHECK_THROWS_AS(amplitude_phase_collapse(bank, w), std::invalid_argument);
  }
}

TEST_CASE("design matrix") {
  SUBCASE("single cosine feature at zero pre-activation") {
    FeatureBank bank;
    bank.tau = Eigen::VectorXd::Zero(1);
    bank.a = Eigen::MatrixXd::Zero(1, 1);
    bank.b = Eigen::VectorXd::Zero(1);
    bank.activation = ActivationKind::Cos;
    CollocationSet pts;
    pts.t = Eigen::VectorXd::Zero(1);
    pts.x = Eigen::MatrixXd::Zero(1, 1);
    const Eigen::MatrixXd m = design_matrix(bank, pts, false);
    REQUIRE(m.rows() == 1);
    REQUIRE(m.cols() == 1);
    CHECK(m(0, 0) == 1.0);
  }
  SUBCASE("matrix-vector product equals pointwise eval; shape contract") {
    const FeatureBank bank = random_bank(7, 2, ActivationKind::Cos, 21, true,
                                         1.0 / std::sqrt(7.0));
    const WeightVector w = random_weights(bank, 22, true);
    CollocationSet pts;
    const int m = 13;
    Rng rng(23);
    pts.t.resize(m);
    pts.x.resize(m, 2);
    for (int i = 0; i < m; ++i) {
      pts.t[i] = rng.uniform_on(0, 1);
      pts.x(i, 0) = rng.uniform_on(0, 1);
      pts.x(i, 1) = rng.uniform_on(0, 1);
    }
    const Eigen::MatrixXd design = design_matrix(bank, pts, true);
    CHECK(design.rows() == m);
    CHECK(design.cols() == 7 * 2 + 1);
    Eigen::VectorXd coef(design.cols());
    coef.head(14) = w.w;
    coef[14] = *w.bias;
    const Eigen::VectorXd pred = design * coef;
    for (int i = 0; i < m; ++i)
      CHECK(pred[i] ==
            doctest::Approx(eval(bank, w, pts.t[i], pts.x.row(i).transpose()))
                .epsilon(1e-13));
  }
}

TEST_CASE("model serialization round-trips bit-exactly") {
  const FeatureBank bank = random_bank(9, 3, ActivationKind::Cos, 55, true,
                                       1.0 / 3.0);
  const WeightVector w = random_weights(bank, 56, true);
  const std::string path =
      (std::filesystem::temp_directory_path() / "rann_model_test.bin").string();
  save_model(path, bank, w);
  const auto [bank2, w2] = load_model(path);
  CHECK(bank2.tau == bank.tau);
  CHECK(bank2.a == bank.a);
  CHECK(bank2.b == bank.b);
  CHECK(bank2.scale == bank.scale);
  CHECK(bank2.activation == bank.activation);
  CHECK(bank2.fourier_pairs == bank.fourier_pairs);
  CHECK(w2.w == w.w);
  REQUIRE(w2.bias.has_value());
  CHECK(*w2.bias == *w.bias);
  std::filesystem::remove(path);
}
