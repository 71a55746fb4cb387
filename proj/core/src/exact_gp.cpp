#include "fastmuygps/exact_gp.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "fastmuygps/linalg.hpp"

namespace fastmuygps {

namespace {

void check_size(const TrainingSet& train, const ExactGpOptions& opts) {
  if (train.X.rows() < 1) {
    throw std::domain_error("exact GP: empty training set");
  }
  if (train.X.rows() > opts.dense_limit) {
    throw std::domain_error("exact GP: n exceeds the dense limit");
  }
  if (train.X.rows() != train.Y.size()) {
    throw std::domain_error("exact GP: features and responses disagree on n");
  }
}

}  // namespace

Eigen::VectorXd posterior_mean(const TrainingSet& train,
                               const Eigen::MatrixXd& Z, KernelKind kind,
                               const KernelParams& p,
                               const ExactGpOptions& opts) {
  check_size(train, opts);
  if (Z.cols() != train.X.cols()) {
    throw std::domain_error("posterior_mean: test dimension mismatch");
  }
  Eigen::MatrixXd kxx = cov_matrix_self(train.X, kind, p);
  Eigen::VectorXd weights_y = solve_spd(kxx, train.Y, "posterior_mean");
  Eigen::MatrixXd kzx = cov_matrix(Z, train.X, kind, p);
  return (kzx * weights_y).array() + train.mean_offset;
}

double log_likelihood(const TrainingSet& train, KernelKind kind,
                      const KernelParams& p, const ExactGpOptions& opts) {
  check_size(train, opts);
  Eigen::MatrixXd kxx = cov_matrix_self(train.X, kind, p);
  auto llt = cholesky_with_jitter(std::move(kxx), "log_likelihood");
  double log_det = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
  double quad = train.Y.dot(llt.solve(train.Y));
  double n = static_cast<double>(train.Y.size());
  return -0.5 * n * std::log(2.0 * std::numbers::pi) - 0.5 * log_det -
         0.5 * quad;
}

}  // namespace fastmuygps
