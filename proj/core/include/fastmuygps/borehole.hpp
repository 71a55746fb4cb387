#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <utility>

#include "fastmuygps/dataset.hpp"

namespace fastmuygps {

/// The eight physical borehole parameters.
struct BoreholeInput {
  double r_w;  // borehole radius, m
  double r;    // radius of influence, m
  double T_u;  // upper aquifer transmissivity, m^2/yr
  double H_u;  // upper aquifer potentiometric head, m
  double T_l;  // lower aquifer transmissivity, m^2/yr
  double H_l;  // lower aquifer potentiometric head, m
  double L;    // borehole length, m
  double K_w;  // borehole hydraulic conductivity, m/yr
};

inline constexpr std::array<std::array<double, 2>, 8> kBoreholeBounds = {{
    {0.05, 0.15},
    {100.0, 50000.0},
    {63070.0, 115600.0},
    {990.0, 1110.0},
    {63.1, 116.0},
    {700.0, 820.0},
    {1120.0, 1680.0},
    {9855.0, 12045.0},
}};

// Parameter positions within BoreholeInput / kBoreholeBounds.
inline constexpr int kDimRw = 0, kDimR = 1, kDimTu = 2, kDimHu = 3,
                     kDimTl = 4, kDimHl = 5, kDimL = 6, kDimKw = 7;
// The four free dimensions of the experiment design: r_w, r, T_u, T_l.
inline constexpr std::array<int, 4> kFreeDims = {kDimRw, kDimR, kDimTu,
                                                 kDimTl};

/// Water flow rate in m^3/yr. Validates every parameter against its bound.
double borehole(const BoreholeInput& x);
/// Same formula without the bounds check (unit-test escape hatch).
double borehole_unchecked(const BoreholeInput& x);

/// Affine map between unit-cube coordinate u in [0,1] and the physical range
/// of dimension `dim`; the two maps are exact inverses at the endpoints.
double borehole_from_unit(double u, int dim);
double borehole_to_unit(double value, int dim);

/// Experiment design: free dimensions are Latin-hypercube sampled, the rest
/// pinned at fixed_values (H_u, H_l, L, K_w; defaults are range midpoints).
/// Features are unit-cube coordinates of all eight parameters divided
/// element-wise by the anisotropy vector.
struct DesignConfig {
  int n_samples = 0;
  std::uint64_t seed = 0;
  std::array<double, 4> fixed_values = {1050.0, 760.0, 1400.0, 10950.0};
  std::array<double, 8> anisotropy = {0.0625, 0.25, 1.0, 0.25,
                                      0.5,    0.25, 0.125, 0.5};
};

/// Latin hypercube in [0,1)^dims: each dimension places exactly one sample
/// per stratum [j/n, (j+1)/n), with stratum-uniform jitter. Deterministic
/// per seed.
Eigen::MatrixXd lhc_sample(int n, int dims, std::uint64_t seed);

/// Scaled feature vector for one physical input under the design's
/// anisotropy (the same pipeline make_dataset uses).
Eigen::VectorXd scale_input(const BoreholeInput& x, const DesignConfig& cfg);

/// Full data pipeline: LHC design, borehole evaluation, feature scaling and
/// response detrending (the subtracted mean lands in mean_offset).
TrainingSet make_dataset(const DesignConfig& cfg);

/// Train/test pair sharing one detrending offset: both response vectors have
/// the training mean subtracted.
std::pair<TrainingSet, TrainingSet> make_train_test(const DesignConfig& cfg,
                                                    int n_test,
                                                    std::uint64_t test_seed);

}  // namespace fastmuygps
