#include <benchmark/benchmark.h>

#include <Eigen/Dense>
#include <random>

#include "fastmuygps/borehole.hpp"
#include "fastmuygps/fast_predict.hpp"
#include "fastmuygps/kernel.hpp"
#include "fastmuygps/linalg.hpp"
#include "fastmuygps/nn_index.hpp"

using namespace fastmuygps;

namespace {

TrainingSet borehole_data(int n, std::uint64_t seed) {
  DesignConfig cfg;
  cfg.n_samples = n;
  cfg.seed = seed;
  return make_dataset(cfg);
}

void BM_KernelValue(benchmark::State& state) {
  KernelParams p(1.0, 1.3, state.range(0) == 0 ? 2.5 : 3.7, 0.0);
  double d = 0.42;
  for (auto _ : state) {
    benchmark::DoNotOptimize(matern_value(d, p));
    d = d == 0.42 ? 0.43 : 0.42;
  }
}
BENCHMARK(BM_KernelValue)->Arg(0)->Arg(1);

void BM_LocalSolve(benchmark::State& state) {
  const int k = static_cast<int>(state.range(0));
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::MatrixXd X(k, 8);
  for (int i = 0; i < X.size(); ++i) X.data()[i] = u(rng);
  Eigen::VectorXd y = Eigen::VectorXd::Random(k);
  KernelParams p(1.0, 1.0, 2.5, 1e-8);
  for (auto _ : state) {
    Eigen::MatrixXd K = cov_matrix_self(X, KernelKind::RBF, p);
    benchmark::DoNotOptimize(solve_spd(K, y, "bench"));
  }
}
BENCHMARK(BM_LocalSolve)->Arg(50)->Arg(150);

void BM_GraphQuery(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  TrainingSet data = borehole_data(n, 2);
  NeighborIndex index = NeighborIndex::build(data.X, IndexMode::ApproxGraph);
  Eigen::VectorXd q = data.X.row(n / 2).transpose();
  q(0) += 1e-3;
  for (auto _ : state) {
    benchmark::DoNotOptimize(index.query_knn(q, 50));
  }
}
BENCHMARK(BM_GraphQuery)->Arg(10000)->Arg(40000)->Unit(benchmark::kMicrosecond);

void BM_LinearScanQuery(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  TrainingSet data = borehole_data(n, 2);
  NeighborIndex index = NeighborIndex::build(data.X, IndexMode::Exact);
  Eigen::VectorXd q = data.X.row(n / 2).transpose();
  q(0) += 1e-3;
  for (auto _ : state) {
    benchmark::DoNotOptimize(index.query_knn(q, 50));
  }
}
BENCHMARK(BM_LinearScanQuery)
    ->Arg(10000)
    ->Arg(40000)
    ->Unit(benchmark::kMicrosecond);

void BM_FastPredictOne(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  TrainingSet data = borehole_data(n, 3);
  NeighborIndex index = NeighborIndex::build(data.X, IndexMode::ApproxGraph);
  FittedParams fitted{KernelParams(1.0, 43.27, 2.5, 0.0), KernelKind::RBF,
                      0.0, 0, false};
  PrecomputedModel model = precompute(data, fitted, index, 50);
  TrainingSet queries = borehole_data(64, 4);
  int at = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        fast_predict_one(model, queries.X.row(at).transpose()));
    at = (at + 1) & 63;
  }
}
BENCHMARK(BM_FastPredictOne)
    ->Arg(10000)
    ->Arg(40000)
    ->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
