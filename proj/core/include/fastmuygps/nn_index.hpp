#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <vector>

namespace fastmuygps {

enum class IndexMode : std::uint32_t { Exact = 0, ApproxGraph = 1 };

/// Navigable-small-world graph parameters. query_beam <= 0 means
/// max(64, 2k) is used at query time.
struct GraphParams {
  int max_degree = 16;       // M; layer 0 allows 2M links
  int build_beam = 100;      // construction-time beam width
  int query_beam = 0;        // query-time beam width (0 = auto)
  std::uint64_t seed = 0;    // level-assignment RNG seed
};

/// k nearest neighbors of one query: indices into the training set with
/// matching Euclidean distances, sorted by (distance, index) ascending.
struct NeighborList {
  std::vector<int> indices;
  std::vector<double> distances;
};

/// Nearest-neighbor index over a fixed set of training points. Exact mode is
/// a linear scan (ground truth); ApproxGraph is a hierarchical
/// navigable-small-world graph with logarithmic-like query cost. Immutable
/// after build; queries are safe to run concurrently.
class NeighborIndex {
 public:
  static NeighborIndex build(const Eigen::MatrixXd& points, IndexMode mode,
                             const GraphParams& params = {});

  /// The k nearest stored points to q. exclude_index, when >= 0, removes
  /// that training index from consideration (exclusion is by index identity,
  /// never by coordinate equality). dist_evals, when non-null, accumulates
  /// the number of point-distance evaluations performed.
  NeighborList query_knn(const Eigen::VectorXd& q, int k,
                         int exclude_index = -1,
                         std::size_t* dist_evals = nullptr) const;

  /// Index of the stored point closest to q; ties resolve to the lower index.
  int nearest_training_point(const Eigen::VectorXd& q,
                             std::size_t* dist_evals = nullptr) const;

  /// Euclidean distance between q and stored point j, computed against the
  /// index's cache-friendly row-major copy of the points.
  double distance_to(const Eigen::VectorXd& q, int j) const;

  int size() const noexcept { return n_; }
  int dim() const noexcept { return d_; }
  IndexMode mode() const noexcept { return mode_; }
  const GraphParams& params() const noexcept { return params_; }

  /// Serializes the index structure (not the points) to a binary stream.
  void serialize(std::ostream& out) const;
  /// Rebuilds an index from serialize() output over the given point set.
  static NeighborIndex deserialize(std::istream& in,
                                   const Eigen::MatrixXd& points,
                                   std::size_t* bytes_read = nullptr);

 private:
  NeighborIndex() = default;

  void set_points(const Eigen::MatrixXd& points);
  double dist_sq(const double* a, int j) const;
  void build_graph();
  int assign_level(std::uint64_t* rng_state) const;
  // Beam search on one graph layer; results sorted by (dist_sq, index).
  void search_layer(const double* q, int entry, int beam, int level,
                    std::vector<std::pair<double, int>>& out,
                    std::size_t* dist_evals) const;
  int greedy_descend(const double* q, std::size_t* dist_evals) const;

  int n_ = 0;
  int d_ = 0;
  IndexMode mode_ = IndexMode::Exact;
  GraphParams params_;
  // Row-major copy of the points for cache-friendly distance loops.
  std::vector<double> pts_;
  // Graph adjacency: links_[i][level] = neighbor indices of node i.
  std::vector<std::vector<std::vector<std::int32_t>>> links_;
  std::vector<std::int32_t> levels_;
  int entry_point_ = -1;
  int max_level_ = -1;
};

}  // namespace fastmuygps
