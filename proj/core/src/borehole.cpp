#include "fastmuygps/borehole.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <stdexcept>

namespace fastmuygps {

namespace {

std::array<double, 8> as_array(const BoreholeInput& x) {
  return {x.r_w, x.r, x.T_u, x.H_u, x.T_l, x.H_l, x.L, x.K_w};
}

BoreholeInput from_array(const std::array<double, 8>& v) {
  return {v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7]};
}

const char* kDimNames[8] = {"r_w", "r",   "T_u", "H_u",
                            "T_l", "H_l", "L",   "K_w"};

}  // namespace

double borehole_unchecked(const BoreholeInput& x) {
  double log_ratio = std::log(x.r / x.r_w);
  double numerator = 2.0 * std::numbers::pi * x.T_u * (x.H_u - x.H_l);
  double denominator =
      log_ratio *
      (1.0 + 2.0 * x.L * x.T_u / (log_ratio * x.r_w * x.r_w * x.K_w) +
       x.T_u / x.T_l);
  return numerator / denominator;
}

double borehole(const BoreholeInput& x) {
  auto v = as_array(x);
  for (int dim = 0; dim < 8; ++dim) {
    if (!(v[dim] >= kBoreholeBounds[dim][0] &&
          v[dim] <= kBoreholeBounds[dim][1])) {
      throw std::domain_error(std::string("borehole: parameter ") +
                              kDimNames[dim] + " out of bounds");
    }
  }
  return borehole_unchecked(x);
}

double borehole_from_unit(double u, int dim) {
  const auto& b = kBoreholeBounds[dim];
  return b[0] + u * (b[1] - b[0]);
}

double borehole_to_unit(double value, int dim) {
  const auto& b = kBoreholeBounds[dim];
  return (value - b[0]) / (b[1] - b[0]);
}

Eigen::MatrixXd lhc_sample(int n, int dims, std::uint64_t seed) {
  if (n < 1 || dims < 1) {
    throw std::domain_error("lhc_sample: n and dims must be positive");
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Eigen::MatrixXd samples(n, dims);
  std::vector<int> perm(n);
  for (int j = 0; j < dims; ++j) {
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    for (int i = 0; i < n; ++i) {
      samples(i, j) = (perm[i] + unit(rng)) / static_cast<double>(n);
    }
  }
  return samples;
}

Eigen::VectorXd scale_input(const BoreholeInput& x, const DesignConfig& cfg) {
  auto v = as_array(x);
  Eigen::VectorXd feature(8);
  for (int dim = 0; dim < 8; ++dim) {
    feature(dim) = borehole_to_unit(v[dim], dim) / cfg.anisotropy[dim];
  }
  return feature;
}

namespace {

// Features plus raw (untrended) responses for one design draw.
std::pair<Eigen::MatrixXd, Eigen::VectorXd> generate_raw(
    const DesignConfig& cfg, int n, std::uint64_t seed) {
  for (double a : cfg.anisotropy) {
    if (!(a > 0.0)) {
      throw std::domain_error("DesignConfig: anisotropy must be positive");
    }
  }
  std::array<double, 8> values{};
  int fixed_slot = 0;
  for (int dim = 0; dim < 8; ++dim) {
    bool is_free = std::find(kFreeDims.begin(), kFreeDims.end(), dim) !=
                   kFreeDims.end();
    if (!is_free) {
      double v = cfg.fixed_values[fixed_slot++];
      if (!(v >= kBoreholeBounds[dim][0] && v <= kBoreholeBounds[dim][1])) {
        throw std::domain_error(std::string("DesignConfig: fixed value for ") +
                                kDimNames[dim] + " out of bounds");
      }
      values[dim] = v;
    }
  }

  Eigen::MatrixXd u = lhc_sample(n, static_cast<int>(kFreeDims.size()), seed);
  Eigen::MatrixXd X(n, 8);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    auto v = values;
    for (std::size_t j = 0; j < kFreeDims.size(); ++j) {
      v[kFreeDims[j]] =
          borehole_from_unit(u(i, static_cast<int>(j)), kFreeDims[j]);
    }
    y(i) = borehole_unchecked(from_array(v));
    for (int dim = 0; dim < 8; ++dim) {
      X(i, dim) = borehole_to_unit(v[dim], dim) / cfg.anisotropy[dim];
    }
  }
  return {std::move(X), std::move(y)};
}

}  // namespace

TrainingSet make_dataset(const DesignConfig& cfg) {
  auto [X, y] = generate_raw(cfg, cfg.n_samples, cfg.seed);
  return detrend(std::move(X), y);
}

std::pair<TrainingSet, TrainingSet> make_train_test(const DesignConfig& cfg,
                                                    int n_test,
                                                    std::uint64_t test_seed) {
  TrainingSet train = make_dataset(cfg);
  auto [X, y] = generate_raw(cfg, n_test, test_seed);
  TrainingSet test;
  test.mean_offset = train.mean_offset;
  test.Y = y.array() - train.mean_offset;
  test.X = std::move(X);
  return {std::move(train), std::move(test)};
}

}  // namespace fastmuygps
