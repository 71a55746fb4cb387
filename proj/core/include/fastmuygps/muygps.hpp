#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <vector>

#include "fastmuygps/dataset.hpp"
#include "fastmuygps/kernel.hpp"
#include "fastmuygps/nn_index.hpp"

namespace fastmuygps {

/// A batch B of training indices sampled uniformly without replacement.
struct BatchSpec {
  int b = 0;
  std::uint64_t seed = 0;
  std::vector<int> indices;

  static BatchSpec sample(int n, int b, std::uint64_t seed);
};

struct Bounds {
  double lo;
  double hi;
};

/// Which hyperparameters are trained, over what boxes, and the optimizer
/// budget. Parameters without bounds stay fixed at the initial guess. sigma
/// is never trained; it provably does not affect the posterior mean.
struct TrainConfig {
  int k = 50;
  KernelKind kind = KernelKind::Matern;
  std::optional<Bounds> rho_bounds;
  std::optional<Bounds> nu_bounds;
  std::optional<Bounds> tau_bounds;
  int max_evals = 200;
  double tol = 1e-8;
};

struct FittedParams {
  KernelParams theta_hat;
  KernelKind kind = KernelKind::Matern;
  double final_loss = 0.0;
  int evaluations = 0;
  bool improved = false;
};

/// Kriging prediction of Y(x_i) conditioned only on the listed neighbors
/// (which must not contain i itself). One k x k solve.
double local_prediction(const TrainingSet& train, int i,
                        const NeighborList& neighbors, KernelKind kind,
                        const KernelParams& p);

/// Batched leave-one-out loss Q(theta): mean squared error of the local
/// predictions over the batch. neighbor_lists is aligned with batch.indices;
/// the accumulation order over the batch is sequential, so the value is
/// bit-stable.
double loocv_loss(const TrainingSet& train, const BatchSpec& batch,
                  const std::vector<NeighborList>& neighbor_lists,
                  KernelKind kind, const KernelParams& p);

/// Computes the batch neighbor lists once (they do not depend on theta) and
/// minimizes Q with a bounded Nelder-Mead simplex over the free parameters.
/// Never returns a loss above Q(initial).
FittedParams train(const TrainingSet& data, const KernelParams& initial,
                   const TrainConfig& config, const BatchSpec& batch,
                   const NeighborIndex& index);

/// Baseline localized predictor: each test point is conditioned on its own
/// k nearest training neighbors (one k x k solve per point).
Eigen::VectorXd muygps_predict(const TrainingSet& train,
                               const Eigen::MatrixXd& Z,
                               const FittedParams& fitted,
                               const NeighborIndex& index, int k);

}  // namespace fastmuygps
