#pragma once

#include <Eigen/Dense>
#include <functional>
#include <stdexcept>
#include <vector>

#include "rann/features.hpp"
#include "rann/sampling.hpp"

namespace rann {

struct RidgeConfig {
  double lambda = 0.0;
  double jitter = 0.0;  // 0 selects the automatic 1e-12 * trace(G)/F boost

  void validate() const {
    if (lambda < 0.0) throw std::invalid_argument("RidgeConfig: lambda must be >= 0");
    if (jitter < 0.0) throw std::invalid_argument("RidgeConfig: jitter must be >= 0");
  }
};

struct SingularSystem : std::runtime_error {
  explicit SingularSystem(double cond)
      : std::runtime_error("ridge_fit: Gram factorization failed after jitter retries"),
        condition_estimate(cond) {}
  double condition_estimate;
};

struct DegenerateReference : std::runtime_error {
  DegenerateReference()
      : std::runtime_error("relative_l2_error: reference is zero on the eval set") {}
};

struct FitReport {
  WeightVector weights;
  double train_mse = 0.0;
  double normal_eq_residual = 0.0;  // ||(A'A + lambda*M*I)W - A'y|| / ||A'y||
  double condition_estimate = 0.0;
};

/// Accumulates A'A, A'y and y'y over row blocks so the full design matrix is
/// never materialized. Solving minimizes (1/M)||AW - y||^2 + lambda ||W||^2,
/// i.e. the regularizer enters the normal equations scaled by M.
class GramAccumulator {
 public:
  GramAccumulator(Eigen::Index features, Eigen::Index target_cols = 1);

  void add_block(const Eigen::Ref<const Eigen::MatrixXd>& rows,
                 const Eigen::Ref<const Eigen::MatrixXd>& targets);

  /// One FitReport per target column. When `last_column_is_bias` the final
  /// design column is reported as the WeightVector bias.
  std::vector<FitReport> solve(const RidgeConfig& cfg,
                               bool last_column_is_bias = false) const;

  Eigen::Index rows() const { return m_; }
  Eigen::Index features() const { return gram_.rows(); }

 private:
  Eigen::MatrixXd gram_;  // lower triangle valid
  Eigen::MatrixXd rhs_;
  Eigen::VectorXd yty_;
  Eigen::Index m_ = 0;
};

FitReport ridge_fit(const Eigen::Ref<const Eigen::MatrixXd>& design,
                    const Eigen::Ref<const Eigen::VectorXd>& targets,
                    const RidgeConfig& cfg, bool last_column_is_bias = false);

using SpaceTimeClosure = std::function<double(double, const Eigen::VectorXd&)>;

/// Monte Carlo relative L2 quotient sqrt(sum (model-ref)^2 / sum ref^2) over
/// the evaluation points.
double relative_l2_error(const SpaceTimeClosure& model,
                         const SpaceTimeClosure& reference,
                         const CollocationSet& eval_points);

/// Same quotient on precomputed value matrices (columns = field components).
double relative_l2_error(const Eigen::Ref<const Eigen::MatrixXd>& model_values,
                         const Eigen::Ref<const Eigen::MatrixXd>& reference_values);

}  // namespace rann
