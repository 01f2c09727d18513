#include "rann/features.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace rann {

std::string to_string(ActivationKind kind) {
  switch (kind) {
    case ActivationKind::Tanh: return "tanh";
    case ActivationKind::Cos: return "cos";
    case ActivationKind::Sigmoid: return "sigmoid";
  }
  return "?";
}

ActivationKind activation_from_string(const std::string& name) {
  if (name == "tanh") return ActivationKind::Tanh;
  if (name == "cos") return ActivationKind::Cos;
  if (name == "sigmoid") return ActivationKind::Sigmoid;
  throw std::invalid_argument("unknown activation: " + name);
}

namespace {
constexpr double kSaturation = 40.0;

// Derivatives of cos and sin by quarter-period shift.
double trig_derivative(bool is_sin, int order, double z) {
  const int k = order & 3;
  if (!is_sin) {
    switch (k) {
      case 0: return std::cos(z);
      case 1: return -std::sin(z);
      case 2: return -std::cos(z);
      default: return std::sin(z);
    }
  }
  switch (k) {
    case 0: return std::sin(z);
    case 1: return std::cos(z);
    case 2: return -std::sin(z);
    default: return -std::cos(z);
  }
}
}  // namespace

double activation_value(ActivationKind kind, double z) {
  switch (kind) {
    case ActivationKind::Tanh:
      if (z > kSaturation) return 1.0;
      if (z < -kSaturation) return -1.0;
      return std::tanh(z);
    case ActivationKind::Cos:
      return std::cos(z);
    case ActivationKind::Sigmoid:
      if (z > kSaturation) return 1.0;
      if (z < -kSaturation) return 0.0;
      return 1.0 / (1.0 + std::exp(-z));
  }
  return 0.0;
}

double activation_derivative(ActivationKind kind, int order, double z) {
  if (order < 0 || order > 2)
    throw std::invalid_argument("activation_derivative: order must be 0..2");
  switch (kind) {
    case ActivationKind::Tanh: {
      if (order == 0) return activation_value(kind, z);
      if (std::abs(z) > kSaturation) return 0.0;
      const double th = std::tanh(z);
      const double sech2 = 1.0 - th * th;
      return order == 1 ? sech2 : -2.0 * th * sech2;
    }
    case ActivationKind::Cos:
      return trig_derivative(false, order, z);
    case ActivationKind::Sigmoid: {
      if (order == 0) return activation_value(kind, z);
      if (std::abs(z) > kSaturation) return 0.0;
      const double s = 1.0 / (1.0 + std::exp(-z));
      const double s1 = s * (1.0 - s);
      return order == 1 ? s1 : s1 * (1.0 - 2.0 * s);
    }
  }
  return 0.0;
}

double activation_sup_norm(ActivationKind kind, int order) {
  if (order < 0 || order > 2)
    throw std::invalid_argument("activation_sup_norm: order must be 0..2");
  switch (kind) {
    case ActivationKind::Tanh: {
      const double sup[3] = {1.0, 1.0, 4.0 / (3.0 * std::sqrt(3.0))};
      return sup[order];
    }
    case ActivationKind::Cos:
      return 1.0;
    case ActivationKind::Sigmoid: {
      const double sup[3] = {1.0, 0.25, 1.0 / (6.0 * std::sqrt(3.0))};
      return sup[order];
    }
  }
  return 0.0;
}

HiddenSample FeatureBank::sample(Eigen::Index i) const {
  return HiddenSample{tau[i], a.row(i).transpose(), b[i]};
}

FeatureBank FeatureBank::from_samples(const std::vector<HiddenSample>& hidden,
                                      ActivationKind activation, double scale,
                                      bool fourier_pairs) {
  if (hidden.empty())
    throw std::invalid_argument("FeatureBank: needs at least one hidden sample");
  FeatureBank bank;
  const Eigen::Index n = static_cast<Eigen::Index>(hidden.size());
  const Eigen::Index d = hidden.front().a.size();
  bank.tau.resize(n);
  bank.a.resize(n, d);
  bank.b.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (hidden[i].a.size() != d)
      throw std::invalid_argument("FeatureBank: inconsistent sample dimension");
    bank.tau[i] = hidden[i].tau;
    bank.a.row(i) = hidden[i].a.transpose();
    bank.b[i] = hidden[i].b;
  }
  bank.activation = activation;
  bank.scale = scale;
  bank.fourier_pairs = fourier_pairs;
  bank.validate();
  return bank;
}

void FeatureBank::validate() const {
  if (width() < 1) throw std::invalid_argument("FeatureBank: width must be >= 1");
  if (!(scale > 0.0)) throw std::invalid_argument("FeatureBank: scale must be > 0");
  if (fourier_pairs && activation != ActivationKind::Cos)
    throw std::invalid_argument("FeatureBank: fourier_pairs requires Cos activation");
  if (!tau.allFinite() || !a.allFinite() || !b.allFinite())
    throw std::invalid_argument("FeatureBank: hidden parameters must be finite");
}

namespace {
void check_point(const FeatureBank& bank, const Eigen::VectorXd& x) {
  if (x.size() != bank.dim())
    throw std::invalid_argument("eval: point dimension does not match bank");
}

void check_weights(const FeatureBank& bank, const WeightVector& weights) {
  if (weights.w.size() != bank.feature_count())
    throw std::invalid_argument("eval: weight length does not match feature count");
}
}  // namespace

double eval(const FeatureBank& bank, const WeightVector& weights, double t,
            const Eigen::VectorXd& x) {
  check_point(bank, x);
  check_weights(bank, weights);
  const Eigen::Index n = bank.width();
  double acc = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double z = bank.tau[i] * t + bank.a.row(i).dot(x) + bank.b[i];
    if (bank.fourier_pairs)
      acc += weights.w[i] * std::cos(z) + weights.w[n + i] * std::sin(z);
    else
      acc += weights.w[i] * activation_value(bank.activation, z);
  }
  return weights.bias.value_or(0.0) + bank.scale * acc;
}

double eval_derivative(const FeatureBank& bank, const WeightVector& weights,
                       double t, const Eigen::VectorXd& x, int order_t,
                       const Eigen::VectorXi& multi_index_x) {
  check_point(bank, x);
  check_weights(bank, weights);
  if (multi_index_x.size() != bank.dim())
    throw std::invalid_argument("eval_derivative: multi-index dimension mismatch");
  if (order_t < 0 || multi_index_x.minCoeff() < 0)
    throw std::invalid_argument("eval_derivative: negative derivative order");
  const int total = order_t + multi_index_x.sum();
  if (total > 2)
    throw std::invalid_argument("eval_derivative: total order must be <= 2");
  if (total == 0) return eval(bank, weights, t, x);

  const Eigen::Index n = bank.width();
  double acc = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    double factor = 1.0;
    for (int k = 0; k < order_t; ++k) factor *= bank.tau[i];
    for (int j = 0; j < multi_index_x.size(); ++j)
      for (int k = 0; k < multi_index_x[j]; ++k) factor *= bank.a(i, j);
    const double z = bank.tau[i] * t + bank.a.row(i).dot(x) + bank.b[i];
    if (bank.fourier_pairs)
      acc += factor * (weights.w[i] * trig_derivative(false, total, z) +
                       weights.w[n + i] * trig_derivative(true, total, z));
    else
      acc += factor * weights.w[i] *
             activation_derivative(bank.activation, total, z);
  }
  return bank.scale * acc;  // the constant bias vanishes under any derivative
}

std::pair<FeatureBank, WeightVector> amplitude_phase_collapse(
    const FeatureBank& bank, const WeightVector& weights) {
  if (bank.activation != ActivationKind::Cos || !bank.fourier_pairs)
    throw std::invalid_argument(
        "amplitude_phase_collapse: requires a Cos bank with fourier pairs");
  check_weights(bank, weights);
  const Eigen::Index n = bank.width();
  FeatureBank out = bank;
  out.fourier_pairs = false;
  WeightVector w_out;
  w_out.w.resize(n);
  w_out.bias = weights.bias;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double c = weights.w[i];      // cosine coefficient
    const double s = weights.w[n + i];  // sine coefficient
    w_out.w[i] = std::hypot(c, s);
    const double theta = std::atan2(s, c);  // a cos z + c sin z = W cos(z - theta)
    out.b[i] = bank.b[i] - theta;
  }
  return {std::move(out), std::move(w_out)};
}

void design_rows(const FeatureBank& bank, const Eigen::Ref<const Eigen::VectorXd>& t,
                 const Eigen::Ref<const Eigen::MatrixXd>& x, bool with_bias,
                 Eigen::Ref<Eigen::MatrixXd> out) {
  const Eigen::Index m = t.size();
  const Eigen::Index n = bank.width();
  if (x.rows() != m || x.cols() != bank.dim())
    throw std::invalid_argument("design_rows: point block shape mismatch");
  const Eigen::Index cols = bank.feature_count() + (with_bias ? 1 : 0);
  if (out.rows() != m || out.cols() != cols)
    throw std::invalid_argument("design_rows: output shape mismatch");

  Eigen::MatrixXd z = t * bank.tau.transpose() + x * bank.a.transpose();
  z.rowwise() += bank.b.transpose();
  if (bank.fourier_pairs) {
    out.leftCols(n) = bank.scale * z.array().cos();
    out.middleCols(n, n) = bank.scale * z.array().sin();
  } else {
    const ActivationKind kind = bank.activation;
    out.leftCols(n) = bank.scale * z.unaryExpr([kind](double v) {
      return activation_value(kind, v);
    }).array();
  }
  if (with_bias) out.col(cols - 1).setOnes();
}

Eigen::MatrixXd design_matrix(const FeatureBank& bank,
                              const CollocationSet& points, bool with_bias) {
  if (points.size() == 0)
    throw std::invalid_argument("design_matrix: empty collocation set");
  Eigen::MatrixXd out(points.size(), bank.feature_count() + (with_bias ? 1 : 0));
  design_rows(bank, points.t, points.x, with_bias, out);
  return out;
}

// ---------------------------------------------------------------------------
// Serialization. Fixed little-endian field order: magic+version, d, N,
// activation tag, scale, fourier flag, hidden triples, bias flag/value,
// weights.
// ---------------------------------------------------------------------------

namespace {
constexpr char kModelMagic[8] = {'R', 'N', 'F', 'B', '0', '0', '0', '1'};

template <class T>
void write_pod(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
void read_pod(std::istream& is, T& v) {
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
}
}  // namespace

void save_model(const std::string& path, const FeatureBank& bank,
                const WeightVector& weights) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("save_model: cannot open " + path);
  os.write(kModelMagic, sizeof(kModelMagic));
  write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(bank.dim()));
  write_pod<std::uint64_t>(os, static_cast<std::uint64_t>(bank.width()));
  write_pod<std::uint8_t>(os, static_cast<std::uint8_t>(bank.activation));
  write_pod<double>(os, bank.scale);
  write_pod<std::uint8_t>(os, bank.fourier_pairs ? 1 : 0);
  for (Eigen::Index i = 0; i < bank.width(); ++i) {
    write_pod<double>(os, bank.tau[i]);
    for (int j = 0; j < bank.dim(); ++j) write_pod<double>(os, bank.a(i, j));
    write_pod<double>(os, bank.b[i]);
  }
  write_pod<std::uint8_t>(os, weights.bias.has_value() ? 1 : 0);
  write_pod<double>(os, weights.bias.value_or(0.0));
  write_pod<std::uint64_t>(os, static_cast<std::uint64_t>(weights.w.size()));
  os.write(reinterpret_cast<const char*>(weights.w.data()),
           static_cast<std::streamsize>(sizeof(double) * weights.w.size()));
  if (!os) throw std::runtime_error("save_model: write failed for " + path);
}

std::pair<FeatureBank, WeightVector> load_model(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("load_model: cannot open " + path);
  char magic[8];
  is.read(magic, sizeof(magic));
  if (!is || std::memcmp(magic, kModelMagic, sizeof(magic)) != 0)
    throw std::runtime_error("load_model: bad header in " + path);
  std::uint32_t d = 0;
  std::uint64_t n = 0;
  std::uint8_t act = 0, pairs = 0, has_bias = 0;
  FeatureBank bank;
  read_pod(is, d);
  read_pod(is, n);
  read_pod(is, act);
  read_pod(is, bank.scale);
  read_pod(is, pairs);
  bank.activation = static_cast<ActivationKind>(act);
  bank.fourier_pairs = pairs != 0;
  bank.tau.resize(static_cast<Eigen::Index>(n));
  bank.a.resize(static_cast<Eigen::Index>(n), d);
  bank.b.resize(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < bank.width(); ++i) {
    read_pod(is, bank.tau[i]);
    for (std::uint32_t j = 0; j < d; ++j) read_pod(is, bank.a(i, j));
    read_pod(is, bank.b[i]);
  }
  WeightVector weights;
  double bias = 0.0;
  read_pod(is, has_bias);
  read_pod(is, bias);
  if (has_bias) weights.bias = bias;
  std::uint64_t wn = 0;
  read_pod(is, wn);
  weights.w.resize(static_cast<Eigen::Index>(wn));
  is.read(reinterpret_cast<char*>(weights.w.data()),
          static_cast<std::streamsize>(sizeof(double) * wn));
  if (!is) throw std::runtime_error("load_model: truncated file " + path);
  bank.validate();
  return {std::move(bank), std::move(weights)};
}

double NetworkField::value(double t, const Eigen::VectorXd& x) const {
  return eval(bank_, weights_, t, x);
}

double NetworkField::dt(double t, const Eigen::VectorXd& x) const {
  return eval_derivative(bank_, weights_, t, x, 1,
                         Eigen::VectorXi::Zero(bank_.dim()));
}

double NetworkField::dx(double t, const Eigen::VectorXd& x, int i) const {
  Eigen::VectorXi mi = Eigen::VectorXi::Zero(bank_.dim());
  mi[i] = 1;
  return eval_derivative(bank_, weights_, t, x, 0, mi);
}

double NetworkField::dxx(double t, const Eigen::VectorXd& x, int i) const {
  Eigen::VectorXi mi = Eigen::VectorXi::Zero(bank_.dim());
  mi[i] = 2;
  return eval_derivative(bank_, weights_, t, x, 0, mi);
}

}  // namespace rann
