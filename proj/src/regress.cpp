#include "rann/regress.hpp"

#include <Eigen/Cholesky>

#include <limits>
#include <cmath>

namespace rann {

GramAccumulator::GramAccumulator(Eigen::Index features, Eigen::Index target_cols) {
  if (features < 1)
    throw std::invalid_argument("GramAccumulator: features must be >= 1");
  if (target_cols < 1)
    throw std::invalid_argument("GramAccumulator: target_cols must be >= 1");
  gram_ = Eigen::MatrixXd::Zero(features, features);
  rhs_ = Eigen::MatrixXd::Zero(features, target_cols);
  yty_ = Eigen::VectorXd::Zero(target_cols);
}

void GramAccumulator::add_block(const Eigen::Ref<const Eigen::MatrixXd>& rows,
                                const Eigen::Ref<const Eigen::MatrixXd>& targets) {
  if (rows.cols() != gram_.rows())
    throw std::invalid_argument("GramAccumulator: row block has wrong feature count");
  if (targets.rows() != rows.rows() || targets.cols() != rhs_.cols())
    throw std::invalid_argument("GramAccumulator: target block shape mismatch");
  gram_.selfadjointView<Eigen::Lower>().rankUpdate(rows.adjoint());
  rhs_.noalias() += rows.adjoint() * targets;
  yty_ += targets.colwise().squaredNorm().transpose();
  m_ += rows.rows();
}

std::vector<FitReport> GramAccumulator::solve(const RidgeConfig& cfg,
                                              bool last_column_is_bias) const {
  cfg.validate();
  if (m_ < 1) throw std::invalid_argument("GramAccumulator: no rows accumulated");
  const Eigen::Index f = gram_.rows();
  const double m = static_cast<double>(m_);

  Eigen::MatrixXd g = gram_.selfadjointView<Eigen::Lower>();
  g.diagonal().array() += cfg.lambda * m;

  double jitter = cfg.jitter > 0.0
                      ? cfg.jitter
                      : 1e-12 * g.trace() / static_cast<double>(f);
  Eigen::LLT<Eigen::MatrixXd> llt(g);
  double cond = 0.0;
  for (int attempt = 0; llt.info() != Eigen::Success; ++attempt) {
    if (attempt >= 8) throw SingularSystem(cond);
    Eigen::MatrixXd boosted = g;
    boosted.diagonal().array() += jitter;
    llt.compute(boosted);
    jitter *= 2.0;
  }
  {
    const Eigen::VectorXd ldiag = llt.matrixLLT().diagonal();
    const double lo = ldiag.minCoeff(), hi = ldiag.maxCoeff();
    cond = (lo > 0.0) ? (hi / lo) * (hi / lo) : std::numeric_limits<double>::infinity();
  }

  std::vector<FitReport> reports;
  reports.reserve(rhs_.cols());
  for (Eigen::Index c = 0; c < rhs_.cols(); ++c) {
    FitReport rep;
    const Eigen::VectorXd w = llt.solve(rhs_.col(c));
    const double rhs_norm = rhs_.col(c).norm();
    rep.normal_eq_residual =
        rhs_norm > 0.0 ? (g * w - rhs_.col(c)).norm() / rhs_norm
                       : (g * w).norm();
    // (1/M)||AW - y||^2 expanded through the accumulated blocks.
    const double gram_quad =
        w.dot(gram_.selfadjointView<Eigen::Lower>() * w);
    rep.train_mse =
        std::max(0.0, (yty_[c] - 2.0 * w.dot(rhs_.col(c)) + gram_quad) / m);
    rep.condition_estimate = cond;
    if (last_column_is_bias) {
      rep.weights.w = w.head(f - 1);
      rep.weights.bias = w[f - 1];
    } else {
      rep.weights.w = w;
    }
    reports.push_back(std::move(rep));
  }
  return reports;
}

FitReport ridge_fit(const Eigen::Ref<const Eigen::MatrixXd>& design,
                    const Eigen::Ref<const Eigen::VectorXd>& targets,
                    const RidgeConfig& cfg, bool last_column_is_bias) {
  if (design.rows() < 1 || design.cols() < 1)
    throw std::invalid_argument("ridge_fit: design must be at least 1x1");
  if (targets.size() != design.rows())
    throw std::invalid_argument("ridge_fit: target length mismatch");
  GramAccumulator acc(design.cols(), 1);
  acc.add_block(design, targets);
  return acc.solve(cfg, last_column_is_bias).front();
}

double relative_l2_error(const SpaceTimeClosure& model,
                         const SpaceTimeClosure& reference,
                         const CollocationSet& eval_points) {
  const Eigen::Index m = eval_points.size();
  Eigen::MatrixXd mv(m, 1), rv(m, 1);
  for (Eigen::Index i = 0; i < m; ++i) {
    const Eigen::VectorXd xi = eval_points.x.row(i).transpose();
    mv(i, 0) = model(eval_points.t[i], xi);
    rv(i, 0) = reference(eval_points.t[i], xi);
  }
  return relative_l2_error(mv, rv);
}

double relative_l2_error(const Eigen::Ref<const Eigen::MatrixXd>& model_values,
                         const Eigen::Ref<const Eigen::MatrixXd>& reference_values) {
  if (model_values.rows() != reference_values.rows() ||
      model_values.cols() != reference_values.cols())
    throw std::invalid_argument("relative_l2_error: shape mismatch");
  const double denom = reference_values.squaredNorm();
  if (denom <= 0.0) throw DegenerateReference();
  return std::sqrt((model_values - reference_values).squaredNorm() / denom);
}

}  // namespace rann
