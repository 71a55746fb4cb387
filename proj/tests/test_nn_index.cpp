#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <random>
#include <sstream>
#include <vector>

#include "fastmuygps/nn_index.hpp"

using namespace fastmuygps;

namespace {

Eigen::MatrixXd random_points(int n, int d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::MatrixXd X(n, d);
  for (int i = 0; i < X.size(); ++i) X.data()[i] = u(rng);
  return X;
}

// Independent ground truth: full sort by (distance, index).
std::vector<int> brute_knn(const Eigen::MatrixXd& X, const Eigen::VectorXd& q,
                           int k, int exclude = -1) {
  std::vector<std::pair<double, int>> all;
  for (int i = 0; i < X.rows(); ++i) {
    if (i == exclude) continue;
    all.emplace_back((X.row(i).transpose() - q).norm(), i);
  }
  std::sort(all.begin(), all.end());
  std::vector<int> out;
  for (int t = 0; t < k; ++t) out.push_back(all[t].second);
  return out;
}

}  // namespace

TEST_CASE("exact mode reproduces a brute-force scan") {
  Eigen::MatrixXd X = random_points(300, 5, 1);
  NeighborIndex index = NeighborIndex::build(X, IndexMode::Exact);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int rep = 0; rep < 25; ++rep) {
    Eigen::VectorXd q(5);
    for (int j = 0; j < 5; ++j) q(j) = u(rng);
    NeighborList nl = index.query_knn(q, 12);
    std::vector<int> truth = brute_knn(X, q, 12);
    CHECK(nl.indices == truth);
    for (int t = 1; t < 12; ++t) {
      CHECK(nl.distances[t - 1] <= nl.distances[t]);
    }
  }
}

TEST_CASE("ties resolve by ascending index") {
  // Four copies of the same point plus fillers: distance ties must come back
  // in index order in both modes.
  Eigen::MatrixXd X(6, 2);
  X << 0, 0, 0, 0, 0, 0, 0, 0, 5, 5, 6, 6;
  Eigen::VectorXd q(2);
  q << 0.1, 0.0;
  for (IndexMode mode : {IndexMode::Exact, IndexMode::ApproxGraph}) {
    NeighborIndex index = NeighborIndex::build(X, mode);
    NeighborList nl = index.query_knn(q, 4);
    CHECK(nl.indices == std::vector<int>{0, 1, 2, 3});
    CHECK(index.nearest_training_point(q) == 0);
  }
}

TEST_CASE("exclusion is by index identity, not coordinates") {
  Eigen::MatrixXd X(4, 1);
  X << 1.0, 1.0, 2.0, 3.0;  // rows 0 and 1 are duplicates
  for (IndexMode mode : {IndexMode::Exact, IndexMode::ApproxGraph}) {
    NeighborIndex index = NeighborIndex::build(X, mode);
    NeighborList nl = index.query_knn(X.row(0).transpose(), 3, 0);
    CHECK(std::find(nl.indices.begin(), nl.indices.end(), 0) ==
          nl.indices.end());
    // The co-located duplicate must survive the exclusion.
    CHECK(nl.indices.front() == 1);
    CHECK(nl.distances.front() == 0.0);
  }
}

TEST_CASE("graph mode recall@10 is at least 0.95") {
  Eigen::MatrixXd X = random_points(2000, 8, 3);
  NeighborIndex index = NeighborIndex::build(X, IndexMode::ApproxGraph);
  int hits = 0, total = 0;
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int rep = 0; rep < 100; ++rep) {
    Eigen::VectorXd q(8);
    for (int j = 0; j < 8; ++j) q(j) = u(rng);
    NeighborList nl = index.query_knn(q, 10);
    std::vector<int> truth = brute_knn(X, q, 10);
    for (int i : nl.indices) {
      hits += std::count(truth.begin(), truth.end(), i);
    }
    total += 10;
  }
  CHECK(static_cast<double>(hits) / total >= 0.95);
}

TEST_CASE("graph queries cost far fewer distance evaluations than a scan") {
  auto mean_evals = [](int n) {
    Eigen::MatrixXd X = random_points(n, 8, 7);
    NeighborIndex index = NeighborIndex::build(X, IndexMode::ApproxGraph);
    std::size_t evals = 0;
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int rep = 0; rep < 50; ++rep) {
      Eigen::VectorXd q(8);
      for (int j = 0; j < 8; ++j) q(j) = u(rng);
      index.query_knn(q, 10, -1, &evals);
    }
    return static_cast<double>(evals) / 50.0;
  };
  double small = mean_evals(4000);
  double large = mean_evals(16000);
  CHECK(small < 4000.0 * 0.5);  // far below a full scan
  CHECK(large / small < 2.5);   // sub-linear growth over a 4x size jump
}

TEST_CASE("small point sets still return exactly k neighbors") {
  Eigen::MatrixXd X = random_points(5, 3, 9);
  NeighborIndex index = NeighborIndex::build(X, IndexMode::ApproxGraph);
  NeighborList nl = index.query_knn(X.row(2).transpose(), 4, 2);
  CHECK(nl.indices.size() == 4);
  std::vector<int> sorted = nl.indices;
  std::sort(sorted.begin(), sorted.end());
  CHECK(std::unique(sorted.begin(), sorted.end()) == sorted.end());
  CHECK_THROWS_AS(index.query_knn(X.row(0).transpose(), 5, 0),
                  std::domain_error);
  CHECK_THROWS_AS(index.query_knn(X.row(0).transpose(), 6), std::domain_error);
}

TEST_CASE("serialization round-trips the graph") {
  Eigen::MatrixXd X = random_points(800, 6, 10);
  NeighborIndex index = NeighborIndex::build(X, IndexMode::ApproxGraph);
  std::stringstream buf;
  index.serialize(buf);
  NeighborIndex copy = NeighborIndex::deserialize(buf, X);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int rep = 0; rep < 20; ++rep) {
    Eigen::VectorXd q(6);
    for (int j = 0; j < 6; ++j) q(j) = u(rng);
    NeighborList a = index.query_knn(q, 15);
    NeighborList b = copy.query_knn(q, 15);
    CHECK(a.indices == b.indices);
    CHECK(a.distances == b.distances);
  }
}

TEST_CASE("build rejects bad input") {
  CHECK_THROWS_AS(NeighborIndex::build(Eigen::MatrixXd(0, 3), IndexMode::Exact),
                  std::domain_error);
  Eigen::MatrixXd bad(2, 2);
  bad << 1.0, 2.0, std::numeric_limits<double>::quiet_NaN(), 0.0;
  CHECK_THROWS_AS(NeighborIndex::build(bad, IndexMode::Exact),
                  std::domain_error);
}
