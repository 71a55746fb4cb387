#include "fastmuygps/nn_index.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <istream>
#include <limits>
#include <ostream>
#include <queue>
#include <stdexcept>

#include "fastmuygps/errors.hpp"

namespace fastmuygps {

namespace {

// Scratch table marking visited nodes per query without an O(n) reset.
struct VisitedTable {
  std::vector<std::uint32_t> stamp;
  std::uint32_t epoch = 0;

  void begin(std::size_t n) {
    if (stamp.size() < n) {
      stamp.assign(n, 0);
      epoch = 0;
    }
    if (++epoch == 0) {
      std::fill(stamp.begin(), stamp.end(), 0);
      epoch = 1;
    }
  }
  bool test_and_set(int i) {
    if (stamp[i] == epoch) {
      return true;
    }
    stamp[i] = epoch;
    return false;
  }
};

thread_local VisitedTable t_visited;

std::uint64_t splitmix64(std::uint64_t* state) {
  std::uint64_t z = (*state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

using DistIdx = std::pair<double, int>;

}  // namespace

void NeighborIndex::set_points(const Eigen::MatrixXd& points) {
  if (points.rows() < 1) {
    throw std::domain_error("NeighborIndex: empty point set");
  }
  if (!points.allFinite()) {
    throw std::domain_error("NeighborIndex: non-finite coordinates");
  }
  n_ = static_cast<int>(points.rows());
  d_ = static_cast<int>(points.cols());
  pts_.resize(static_cast<std::size_t>(n_) * d_);
  for (int i = 0; i < n_; ++i) {
    for (int j = 0; j < d_; ++j) {
      pts_[static_cast<std::size_t>(i) * d_ + j] = points(i, j);
    }
  }
}

double NeighborIndex::dist_sq(const double* a, int j) const {
  const double* b = &pts_[static_cast<std::size_t>(j) * d_];
  double s = 0.0;
  for (int t = 0; t < d_; ++t) {
    double diff = a[t] - b[t];
    s += diff * diff;
  }
  return s;
}

int NeighborIndex::assign_level(std::uint64_t* rng_state) const {
  // Geometric-like level distribution with mean multiplier 1/ln(M).
  double u = (splitmix64(rng_state) >> 11) * 0x1p-53 + 0x1p-54;
  double ml = 1.0 / std::log(static_cast<double>(params_.max_degree));
  return static_cast<int>(-std::log(u) * ml);
}

void NeighborIndex::search_layer(const double* q, int entry, int beam,
                                 int level,
                                 std::vector<DistIdx>& out,
                                 std::size_t* dist_evals) const {
  t_visited.begin(static_cast<std::size_t>(n_));
  std::priority_queue<DistIdx, std::vector<DistIdx>, std::greater<>> cand;
  std::priority_queue<DistIdx> result;
  double d0 = dist_sq(q, entry);
  if (dist_evals != nullptr) {
    ++*dist_evals;
  }
  t_visited.test_and_set(entry);
  cand.emplace(d0, entry);
  result.emplace(d0, entry);
  while (!cand.empty()) {
    auto [dc, c] = cand.top();
    if (dc > result.top().first &&
        static_cast<int>(result.size()) >= beam) {
      break;
    }
    cand.pop();
    for (std::int32_t u : links_[c][level]) {
      if (t_visited.test_and_set(u)) {
        continue;
      }
      double du = dist_sq(q, u);
      if (dist_evals != nullptr) {
        ++*dist_evals;
      }
      if (static_cast<int>(result.size()) < beam ||
          DistIdx(du, u) < result.top()) {
        cand.emplace(du, u);
        result.emplace(du, u);
        if (static_cast<int>(result.size()) > beam) {
          result.pop();
        }
      }
    }
  }
  out.resize(result.size());
  for (auto it = out.rbegin(); it != out.rend(); ++it) {
    *it = result.top();
    result.pop();
  }
}

int NeighborIndex::greedy_descend(const double* q,
                                  std::size_t* dist_evals) const {
  int cur = entry_point_;
  double best = dist_sq(q, cur);
  if (dist_evals != nullptr) {
    ++*dist_evals;
  }
  for (int level = max_level_; level >= 1; --level) {
    bool moved = true;
    while (moved) {
      moved = false;
      for (std::int32_t u : links_[cur][level]) {
        double du = dist_sq(q, u);
        if (dist_evals != nullptr) {
          ++*dist_evals;
        }
        if (du < best || (du == best && u < cur)) {
          best = du;
          cur = u;
          moved = true;
        }
      }
    }
  }
  return cur;
}

void NeighborIndex::build_graph() {
  links_.assign(n_, {});
  levels_.assign(n_, 0);
  std::uint64_t rng = params_.seed ^ 0xa02bdbf7bb3c0a7ULL;
  const int m = params_.max_degree;
  const int m0 = 2 * m;
  auto cap_at = [&](int level) { return level == 0 ? m0 : m; };

  std::vector<DistIdx> found;
  for (int i = 0; i < n_; ++i) {
    int lvl = assign_level(&rng);
    levels_[i] = lvl;
    links_[i].resize(lvl + 1);
    const double* q = &pts_[static_cast<std::size_t>(i) * d_];
    if (i == 0) {
      entry_point_ = 0;
      max_level_ = lvl;
      continue;
    }
    // Greedy descent through the layers above the new node's top level; the
    // node reached is guaranteed to exist on every layer we then search.
    int cur = entry_point_;
    double best = dist_sq(q, cur);
    for (int level = max_level_; level > lvl; --level) {
      bool moved = true;
      while (moved) {
        moved = false;
        for (std::int32_t u : links_[cur][level]) {
          double du = dist_sq(q, u);
          if (du < best || (du == best && u < cur)) {
            best = du;
            cur = u;
            moved = true;
          }
        }
      }
    }
    for (int level = std::min(lvl, max_level_); level >= 0; --level) {
      search_layer(q, cur, params_.build_beam, level, found, nullptr);
      int cap = cap_at(level);
      int take = std::min<int>(cap, static_cast<int>(found.size()));
      auto& own = links_[i][level];
      own.reserve(take);
      for (int t = 0; t < take; ++t) {
        int u = found[t].second;
        own.push_back(u);
        auto& back = links_[u][level];
        back.push_back(i);
        if (static_cast<int>(back.size()) > cap) {
          // Prune to the closest cap links of u.
          const double* pu = &pts_[static_cast<std::size_t>(u) * d_];
          std::vector<DistIdx> scored;
          scored.reserve(back.size());
          for (std::int32_t v : back) {
            scored.emplace_back(dist_sq(pu, v), v);
          }
          std::nth_element(scored.begin(), scored.begin() + cap - 1,
                           scored.end());
          scored.resize(cap);
          back.clear();
          for (auto& [dv, v] : scored) {
            back.push_back(v);
          }
        }
      }
      if (!found.empty()) {
        cur = found[0].second;
      }
    }
    if (lvl > max_level_) {
      max_level_ = lvl;
      entry_point_ = i;
    }
  }
}

NeighborIndex NeighborIndex::build(const Eigen::MatrixXd& points,
                                   IndexMode mode, const GraphParams& params) {
  if (params.max_degree < 2 || params.build_beam < 1) {
    throw std::domain_error("NeighborIndex: invalid graph parameters");
  }
  NeighborIndex index;
  index.mode_ = mode;
  index.params_ = params;
  index.set_points(points);
  if (mode == IndexMode::ApproxGraph) {
    index.build_graph();
  }
  return index;
}

NeighborList NeighborIndex::query_knn(const Eigen::VectorXd& q, int k,
                                      int exclude_index,
                                      std::size_t* dist_evals) const {
  if (static_cast<int>(q.size()) != d_) {
    throw std::domain_error("query_knn: query dimension mismatch");
  }
  int available = n_ - (exclude_index >= 0 ? 1 : 0);
  if (k < 1 || k > available) {
    throw std::domain_error("query_knn: k out of range");
  }
  std::vector<DistIdx> best;
  if (mode_ == IndexMode::Exact) {
    std::priority_queue<DistIdx> heap;
    for (int i = 0; i < n_; ++i) {
      if (i == exclude_index) {
        continue;
      }
      double di = dist_sq(q.data(), i);
      if (dist_evals != nullptr) {
        ++*dist_evals;
      }
      DistIdx entry(di, i);
      if (static_cast<int>(heap.size()) < k) {
        heap.push(entry);
      } else if (entry < heap.top()) {
        heap.pop();
        heap.push(entry);
      }
    }
    best.resize(heap.size());
    for (auto it = best.rbegin(); it != best.rend(); ++it) {
      *it = heap.top();
      heap.pop();
    }
  } else {
    int want = k + (exclude_index >= 0 ? 1 : 0);
    int beam = params_.query_beam > 0 ? params_.query_beam
                                      : std::max(64, 2 * k);
    beam = std::max(beam, want);
    int entry = greedy_descend(q.data(), dist_evals);
    std::vector<DistIdx> found;
    search_layer(q.data(), entry, beam, 0, found, dist_evals);
    best.reserve(k);
    for (auto& e : found) {
      if (e.second == exclude_index) {
        continue;
      }
      best.push_back(e);
      if (static_cast<int>(best.size()) == k) {
        break;
      }
    }
    if (static_cast<int>(best.size()) < k) {
      // Sparse graph corner (tiny n or disconnected fringe): fall back to a
      // scan so the contract of returning exactly k neighbors holds.
      best.clear();
      std::priority_queue<DistIdx> heap;
      for (int i = 0; i < n_; ++i) {
        if (i == exclude_index) {
          continue;
        }
        double di = dist_sq(q.data(), i);
        if (dist_evals != nullptr) {
          ++*dist_evals;
        }
        DistIdx entry2(di, i);
        if (static_cast<int>(heap.size()) < k) {
          heap.push(entry2);
        } else if (entry2 < heap.top()) {
          heap.pop();
          heap.push(entry2);
        }
      }
      best.resize(heap.size());
      for (auto it = best.rbegin(); it != best.rend(); ++it) {
        *it = heap.top();
        heap.pop();
      }
    }
  }
  NeighborList out;
  out.indices.reserve(best.size());
  out.distances.reserve(best.size());
  for (auto& [ds, i] : best) {
    out.indices.push_back(i);
    out.distances.push_back(std::sqrt(ds));
  }
  return out;
}

double NeighborIndex::distance_to(const Eigen::VectorXd& q, int j) const {
  if (static_cast<int>(q.size()) != d_ || j < 0 || j >= n_) {
    throw std::domain_error("distance_to: bad query or index");
  }
  return std::sqrt(dist_sq(q.data(), j));
}

int NeighborIndex::nearest_training_point(const Eigen::VectorXd& q,
                                          std::size_t* dist_evals) const {
  if (static_cast<int>(q.size()) != d_) {
    throw std::domain_error("nearest_training_point: dimension mismatch");
  }
  if (mode_ == IndexMode::Exact) {
    DistIdx best(std::numeric_limits<double>::infinity(), -1);
    for (int i = 0; i < n_; ++i) {
      double di = dist_sq(q.data(), i);
      if (dist_evals != nullptr) {
        ++*dist_evals;
      }
      best = std::min(best, DistIdx(di, i));
    }
    return best.second;
  }
  int entry = greedy_descend(q.data(), dist_evals);
  std::vector<DistIdx> found;
  int beam = params_.query_beam > 0 ? params_.query_beam : 64;
  search_layer(q.data(), entry, beam, 0, found, dist_evals);
  return found.front().second;
}

namespace {

template <typename T>
void put(std::ostream& out, T v) {
  static_assert(std::endian::native == std::endian::little);
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

template <typename T>
T get(std::istream& in, std::size_t* bytes_read) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(v));
  if (!in) {
    throw FormatError("truncated neighbor-index data",
                      bytes_read != nullptr ? *bytes_read : 0);
  }
  if (bytes_read != nullptr) {
    *bytes_read += sizeof(v);
  }
  return v;
}

}  // namespace

void NeighborIndex::serialize(std::ostream& out) const {
  put<std::uint32_t>(out, static_cast<std::uint32_t>(mode_));
  if (mode_ == IndexMode::Exact) {
    return;
  }
  put<std::int32_t>(out, params_.max_degree);
  put<std::int32_t>(out, params_.build_beam);
  put<std::int32_t>(out, params_.query_beam);
  put<std::uint64_t>(out, params_.seed);
  put<std::int32_t>(out, entry_point_);
  put<std::int32_t>(out, max_level_);
  for (int i = 0; i < n_; ++i) {
    put<std::int32_t>(out, levels_[i]);
    for (const auto& layer : links_[i]) {
      put<std::uint32_t>(out, static_cast<std::uint32_t>(layer.size()));
      for (std::int32_t u : layer) {
        put<std::int32_t>(out, u);
      }
    }
  }
}

NeighborIndex NeighborIndex::deserialize(std::istream& in,
                                         const Eigen::MatrixXd& points,
                                         std::size_t* bytes_read) {
  NeighborIndex index;
  index.set_points(points);
  auto mode = get<std::uint32_t>(in, bytes_read);
  if (mode > 1) {
    throw FormatError("unknown neighbor-index mode tag",
                      bytes_read != nullptr ? *bytes_read : 0);
  }
  index.mode_ = static_cast<IndexMode>(mode);
  if (index.mode_ == IndexMode::Exact) {
    return index;
  }
  index.params_.max_degree = get<std::int32_t>(in, bytes_read);
  index.params_.build_beam = get<std::int32_t>(in, bytes_read);
  index.params_.query_beam = get<std::int32_t>(in, bytes_read);
  index.params_.seed = get<std::uint64_t>(in, bytes_read);
  index.entry_point_ = get<std::int32_t>(in, bytes_read);
  index.max_level_ = get<std::int32_t>(in, bytes_read);
  if (index.entry_point_ < 0 || index.entry_point_ >= index.n_) {
    throw FormatError("neighbor-index entry point out of range",
                      bytes_read != nullptr ? *bytes_read : 0);
  }
  index.levels_.resize(index.n_);
  index.links_.resize(index.n_);
  for (int i = 0; i < index.n_; ++i) {
    std::int32_t lvl = get<std::int32_t>(in, bytes_read);
    if (lvl < 0) {
      throw FormatError("negative node level in neighbor index",
                        bytes_read != nullptr ? *bytes_read : 0);
    }
    index.levels_[i] = lvl;
    index.links_[i].resize(lvl + 1);
    for (auto& layer : index.links_[i]) {
      auto count = get<std::uint32_t>(in, bytes_read);
      layer.resize(count);
      for (auto& u : layer) {
        u = get<std::int32_t>(in, bytes_read);
        if (u < 0 || u >= index.n_) {
          throw FormatError("neighbor id out of range",
                            bytes_read != nullptr ? *bytes_read : 0);
        }
      }
    }
  }
  return index;
}

}  // namespace fastmuygps
