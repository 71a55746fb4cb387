#pragma once

#include <Eigen/Dense>
#include <filesystem>

#include "fastmuygps/dataset.hpp"
#include "fastmuygps/kernel.hpp"
#include "fastmuygps/muygps.hpp"
#include "fastmuygps/nn_index.hpp"

namespace fastmuygps {

/// Row i holds S_i = [i ; N_i]: the point itself first, then its k-1 nearest
/// neighbors. Entries within a row are unique training indices.
struct NeighborTable {
  Eigen::Matrix<std::int32_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>
      S;  // n x k
};

/// Everything needed for online prediction: the coefficient rows
/// C_i = K(X_{S_i}, X_{S_i})^{-1} Y(X_{S_i}), the neighbor table whose row
/// ordering the coefficients are aligned with, the trained kernel, the
/// training features and the nearest-neighbor index. Immutable; safe to
/// share across threads.
struct PrecomputedModel {
  Eigen::MatrixXd X;
  NeighborTable table;
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> C;
  KernelParams params;
  KernelKind kind = KernelKind::Matern;
  double mean_offset = 0.0;
  NeighborIndex index;
};

/// Offline phase: builds the neighbor table and solves one k x k system per
/// training row. Rows are independent; `threads` > 1 splits them across
/// workers with identical (bit-stable) results.
PrecomputedModel precompute(const TrainingSet& train,
                            const FittedParams& fitted,
                            const NeighborIndex& index, int k,
                            int threads = 1);

/// Online prediction for one query: one nearest-training-point lookup, one
/// k-vector of cross-covariances and one dot product, plus the mean offset.
double fast_predict_one(const PrecomputedModel& model,
                        const Eigen::VectorXd& z);

Eigen::VectorXd fast_predict_batch(const PrecomputedModel& model,
                                   const Eigen::MatrixXd& Z);

/// Binary model file: magic "FMGP", version, dims, kernel, X, S, C, mean
/// offset, the serialized index and a trailing CRC-32. Round trips are
/// bit-exact. load_model rejects version mismatches, corruption and
/// truncation with a FormatError carrying the byte offset.
void save_model(const PrecomputedModel& model,
                const std::filesystem::path& path);
PrecomputedModel load_model(const std::filesystem::path& path);

}  // namespace fastmuygps
