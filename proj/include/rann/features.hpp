#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rann/sampling.hpp"

namespace rann {

enum class ActivationKind { Tanh, Cos, Sigmoid };

std::string to_string(ActivationKind kind);
ActivationKind activation_from_string(const std::string& name);

/// sigma(z); tanh and sigmoid saturate exactly beyond |z| = 40 so that
/// heavy-tailed pre-activations never produce non-finite intermediates.
double activation_value(ActivationKind kind, double z);

/// d^order sigma / dz^order for order 0..2.
double activation_derivative(ActivationKind kind, int order, double z);

/// Exact sup-norm of |sigma^(order)| for order 0..2.
double activation_sup_norm(ActivationKind kind, int order);

/// Frozen hidden layer: N pre-activation triples plus the feature layout.
/// When fourier_pairs is set (activation must be Cos), every hidden sample
/// contributes a cosine and a sine feature, giving 2N features.
struct FeatureBank {
  Eigen::VectorXd tau;  // N
  Eigen::MatrixXd a;    // N x d
  Eigen::VectorXd b;    // N
  ActivationKind activation = ActivationKind::Tanh;
  double scale = 1.0;
  bool fourier_pairs = false;

  Eigen::Index width() const { return tau.size(); }
  int dim() const { return static_cast<int>(a.cols()); }
  Eigen::Index feature_count() const { return width() * (fourier_pairs ? 2 : 1); }
  HiddenSample sample(Eigen::Index i) const;

  static FeatureBank from_samples(const std::vector<HiddenSample>& hidden,
                                  ActivationKind activation, double scale,
                                  bool fourier_pairs);
  void validate() const;
};

/// Trainable output weights; length must equal the bank's feature count.
struct WeightVector {
  Eigen::VectorXd w;
  std::optional<double> bias;
};

double eval(const FeatureBank& bank, const WeightVector& weights, double t,
            const Eigen::VectorXd& x);

/// Exact chain-rule derivative d^order_t/dt^order_t D_x^multi of the network;
/// order_t + |multi| must be <= 2.
double eval_derivative(const FeatureBank& bank, const WeightVector& weights,
                       double t, const Eigen::VectorXd& x, int order_t,
                       const Eigen::VectorXi& multi_index_x);

/// Rewrites a (cos, sin) pair bank as a single-cosine bank with amplitudes
/// W_i = sqrt(a_i^2 + c_i^2) and shifted offsets. Evaluation is preserved.
std::pair<FeatureBank, WeightVector> amplitude_phase_collapse(
    const FeatureBank& bank, const WeightVector& weights);

/// Feature matrix: row per point, column per feature (cos block, then sin
/// block when paired, then the constant bias column when requested). The
/// bank scale is folded into the entries.
Eigen::MatrixXd design_matrix(const FeatureBank& bank,
                              const CollocationSet& points, bool with_bias);

/// Same as design_matrix for an explicit block of points; writes into `out`
/// (rows x feature_count(+1)). Used by the streaming Gram path.
void design_rows(const FeatureBank& bank, const Eigen::Ref<const Eigen::VectorXd>& t,
                 const Eigen::Ref<const Eigen::MatrixXd>& x, bool with_bias,
                 Eigen::Ref<Eigen::MatrixXd> out);

/// Versioned binary model record; reload is bit-exact.
void save_model(const std::string& path, const FeatureBank& bank,
                const WeightVector& weights);
std::pair<FeatureBank, WeightVector> load_model(const std::string& path);

/// Scalar space-time field with derivatives up to total order 2; the
/// interface the PDE residual evaluators consume.
class Field {
 public:
  virtual ~Field() = default;
  virtual double value(double t, const Eigen::VectorXd& x) const = 0;
  virtual double dt(double t, const Eigen::VectorXd& x) const = 0;
  virtual double dx(double t, const Eigen::VectorXd& x, int i) const = 0;
  virtual double dxx(double t, const Eigen::VectorXd& x, int i) const = 0;

  double laplacian(double t, const Eigen::VectorXd& x) const {
    double acc = 0.0;
    for (int i = 0; i < x.size(); ++i) acc += dxx(t, x, i);
    return acc;
  }
};

/// A fitted network as a Field.
class NetworkField : public Field {
 public:
  NetworkField(FeatureBank bank, WeightVector weights)
      : bank_(std::move(bank)), weights_(std::move(weights)) {}
  double value(double t, const Eigen::VectorXd& x) const override;
  double dt(double t, const Eigen::VectorXd& x) const override;
  double dx(double t, const Eigen::VectorXd& x, int i) const override;
  double dxx(double t, const Eigen::VectorXd& x, int i) const override;
  const FeatureBank& bank() const { return bank_; }
  const WeightVector& weights() const { return weights_; }

 private:
  FeatureBank bank_;
  WeightVector weights_;
};

}  // namespace rann
