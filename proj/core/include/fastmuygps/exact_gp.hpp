#pragma once

#include <Eigen/Dense>

#include "fastmuygps/dataset.hpp"
#include "fastmuygps/kernel.hpp"

namespace fastmuygps {

struct ExactGpOptions {
  // Guard against accidentally requesting an O(n^3) dense solve at scale.
  int dense_limit = 5000;
};

/// Dense-matrix GP posterior mean at test points Z: the reference
/// implementation the localized predictors are checked against.
/// K(Z,X) K(X,X)^{-1} Y plus the stored mean offset.
Eigen::VectorXd posterior_mean(const TrainingSet& train,
                               const Eigen::MatrixXd& Z, KernelKind kind,
                               const KernelParams& p,
                               const ExactGpOptions& opts = {});

/// Gaussian log-likelihood of the detrended training responses:
/// -(n/2) log(2 pi) - (1/2) log|K| - (1/2) Y^T K^{-1} Y,
/// with the determinant taken from a triangular factorization.
double log_likelihood(const TrainingSet& train, KernelKind kind,
                      const KernelParams& p, const ExactGpOptions& opts = {});

}  // namespace fastmuygps
