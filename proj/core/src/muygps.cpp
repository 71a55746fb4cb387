#include "fastmuygps/muygps.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

#include "fastmuygps/linalg.hpp"

namespace fastmuygps {

BatchSpec BatchSpec::sample(int n, int b, std::uint64_t seed) {
  if (b < 1 || b > n) {
    throw std::domain_error("BatchSpec: batch size out of range");
  }
  std::vector<int> pool(n);
  std::iota(pool.begin(), pool.end(), 0);
  std::mt19937_64 rng(seed);
  // Partial Fisher-Yates: first b entries are a uniform sample without
  // replacement.
  for (int i = 0; i < b; ++i) {
    std::uniform_int_distribution<int> pick(i, n - 1);
    std::swap(pool[i], pool[pick(rng)]);
  }
  pool.resize(b);
  return BatchSpec{b, seed, std::move(pool)};
}

double local_prediction(const TrainingSet& train, int i,
                        const NeighborList& neighbors, KernelKind kind,
                        const KernelParams& p) {
  int k = static_cast<int>(neighbors.indices.size());
  if (k < 1) {
    throw std::domain_error("local_prediction: empty neighbor list");
  }
  if (i < 0 || i >= train.X.rows()) {
    throw std::domain_error("local_prediction: index out of range");
  }
  for (int j : neighbors.indices) {
    if (j == i) {
      throw std::domain_error(
          "local_prediction: point " + std::to_string(i) +
          " appears in its own neighbor list");
    }
  }
  Eigen::MatrixXd xn(k, train.X.cols());
  Eigen::VectorXd yn(k);
  Eigen::VectorXd cross(k);
  for (int t = 0; t < k; ++t) {
    int j = neighbors.indices[t];
    xn.row(t) = train.X.row(j);
    yn(t) = train.Y(j);
    cross(t) = kernel_value(neighbors.distances[t], kind, p);
  }
  Eigen::MatrixXd knn = cov_matrix_self(xn, kind, p);
  Eigen::VectorXd coeff = solve_spd(
      knn, yn, "local_prediction at index " + std::to_string(i));
  return cross.dot(coeff);
}

double loocv_loss(const TrainingSet& train, const BatchSpec& batch,
                  const std::vector<NeighborList>& neighbor_lists,
                  KernelKind kind, const KernelParams& p) {
  if (neighbor_lists.size() != batch.indices.size() || batch.indices.empty()) {
    throw std::domain_error("loocv_loss: batch and neighbor lists disagree");
  }
  double sum = 0.0;
  for (std::size_t t = 0; t < batch.indices.size(); ++t) {
    int i = batch.indices[t];
    double r = train.Y(i) -
               local_prediction(train, i, neighbor_lists[t], kind, p);
    sum += r * r;
  }
  return sum / static_cast<double>(batch.indices.size());
}

namespace {

// One trainable coordinate: maps between optimizer space and parameter
// value. rho is searched in log10 space; nu and tau stay linear.
struct FreeCoord {
  enum Which { Rho, Nu, Tau } which;
  double lo;  // transformed bounds
  double hi;
  double to_param(double x) const {
    return which == Rho ? std::pow(10.0, x) : x;
  }
  double from_param(double v) const {
    return which == Rho ? std::log10(v) : v;
  }
};

KernelParams apply_coords(const KernelParams& base,
                          const std::vector<FreeCoord>& coords,
                          const std::vector<double>& x) {
  KernelParams p = base;
  for (std::size_t j = 0; j < coords.size(); ++j) {
    double v = coords[j].to_param(x[j]);
    switch (coords[j].which) {
      case FreeCoord::Rho: p = p.with_rho(v); break;
      case FreeCoord::Nu: p = p.with_nu(v); break;
      case FreeCoord::Tau: p = p.with_tau(v); break;
    }
  }
  return p;
}

struct SimplexResult {
  std::vector<double> best_x;
  double best_f;
  int evaluations;
};

// Nelder-Mead with projection onto the box. Tracks the best point ever
// evaluated, so the result never regresses below the starting value.
SimplexResult nelder_mead(
    const std::function<double(const std::vector<double>&)>& f,
    std::vector<double> x0, const std::vector<FreeCoord>& coords,
    int max_evals, double tol) {
  const std::size_t dim = x0.size();
  auto clamp = [&](std::vector<double>& x) {
    for (std::size_t j = 0; j < dim; ++j) {
      x[j] = std::clamp(x[j], coords[j].lo, coords[j].hi);
    }
  };
  clamp(x0);

  int evals = 0;
  std::vector<double> best_x = x0;
  double best_f = std::numeric_limits<double>::infinity();
  auto eval = [&](const std::vector<double>& x) {
    double v = f(x);
    ++evals;
    if (v < best_f) {
      best_f = v;
      best_x = x;
    }
    return v;
  };

  std::vector<std::vector<double>> pts(dim + 1, x0);
  for (std::size_t j = 0; j < dim; ++j) {
    double step = 0.25 * (coords[j].hi - coords[j].lo);
    pts[j + 1][j] += (x0[j] + step <= coords[j].hi) ? step : -step;
  }
  std::vector<double> fv(dim + 1);
  for (std::size_t v = 0; v <= dim && evals < max_evals; ++v) {
    fv[v] = eval(pts[v]);
  }

  while (evals < max_evals) {
    std::vector<std::size_t> order(dim + 1);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
    if (fv[order[dim]] - fv[order[0]] < tol) {
      break;
    }
    std::size_t worst = order[dim];
    std::vector<double> centroid(dim, 0.0);
    for (std::size_t v = 0; v <= dim; ++v) {
      if (v == worst) continue;
      for (std::size_t j = 0; j < dim; ++j) centroid[j] += pts[v][j];
    }
    for (double& c : centroid) c /= static_cast<double>(dim);

    auto blend = [&](double coef) {
      std::vector<double> x(dim);
      for (std::size_t j = 0; j < dim; ++j) {
        x[j] = centroid[j] + coef * (centroid[j] - pts[worst][j]);
      }
      clamp(x);
      return x;
    };

    auto xr = blend(1.0);
    double fr = eval(xr);
    if (fr < fv[order[0]] && evals < max_evals) {
      auto xe = blend(2.0);
      double fe = eval(xe);
      if (fe < fr) {
        pts[worst] = xe; fv[worst] = fe;
      } else {
        pts[worst] = xr; fv[worst] = fr;
      }
    } else if (fr < fv[order[dim - 1]]) {
      pts[worst] = xr; fv[worst] = fr;
    } else if (evals < max_evals) {
      auto xc = blend(-0.5);
      double fc = eval(xc);
      if (fc < fv[worst]) {
        pts[worst] = xc; fv[worst] = fc;
      } else {
        // Shrink toward the best vertex.
        for (std::size_t v = 0; v <= dim; ++v) {
          if (v == order[0]) continue;
          for (std::size_t j = 0; j < dim; ++j) {
            pts[v][j] = 0.5 * (pts[v][j] + pts[order[0]][j]);
          }
          if (evals >= max_evals) break;
          fv[v] = eval(pts[v]);
        }
      }
    }
  }
  return {best_x, best_f, evals};
}

}  // namespace

FittedParams train(const TrainingSet& data, const KernelParams& initial,
                   const TrainConfig& config, const BatchSpec& batch,
                   const NeighborIndex& index) {
  if (config.k < 2) {
    throw std::domain_error("train: k must be at least 2");
  }
  if (index.size() != data.X.rows()) {
    throw std::domain_error("train: index was not built on the training set");
  }
  // Neighbor lists are theta-independent; compute them once up front.
  // LOOCV withholds x_i, so its own index is excluded.
  std::vector<NeighborList> lists;
  lists.reserve(batch.indices.size());
  for (int i : batch.indices) {
    lists.push_back(
        index.query_knn(data.X.row(i).transpose(), config.k, i));
  }

  std::vector<FreeCoord> coords;
  auto add = [&](FreeCoord::Which which, const std::optional<Bounds>& b,
                 bool log_space) {
    if (!b) return;
    if (!(b->lo < b->hi) || !std::isfinite(b->lo) || !std::isfinite(b->hi)) {
      throw std::domain_error("train: invalid bounds");
    }
    double lo = log_space ? std::log10(b->lo) : b->lo;
    double hi = log_space ? std::log10(b->hi) : b->hi;
    coords.push_back({which, lo, hi});
  };
  add(FreeCoord::Rho, config.rho_bounds, true);
  add(FreeCoord::Nu, config.nu_bounds, false);
  add(FreeCoord::Tau, config.tau_bounds, false);

  double q0 = loocv_loss(data, batch, lists, config.kind, initial);
  if (coords.empty()) {
    return {initial, config.kind, q0, 1, false};
  }

  std::vector<double> x0;
  for (const auto& c : coords) {
    double v = c.which == FreeCoord::Rho   ? initial.rho()
               : c.which == FreeCoord::Nu  ? initial.nu()
                                           : initial.tau();
    x0.push_back(std::clamp(c.from_param(v), c.lo, c.hi));
  }
  auto objective = [&](const std::vector<double>& x) {
    return loocv_loss(data, batch, lists, config.kind,
                      apply_coords(initial, coords, x));
  };
  SimplexResult r =
      nelder_mead(objective, x0, coords, config.max_evals, config.tol);
  if (r.best_f >= q0) {
    return {initial, config.kind, q0, r.evaluations, false};
  }
  return {apply_coords(initial, coords, r.best_x), config.kind, r.best_f,
          r.evaluations, true};
}

Eigen::VectorXd muygps_predict(const TrainingSet& train,
                               const Eigen::MatrixXd& Z,
                               const FittedParams& fitted,
                               const NeighborIndex& index, int k) {
  if (Z.cols() != train.X.cols()) {
    throw std::domain_error("muygps_predict: test dimension mismatch");
  }
  Eigen::VectorXd out(Z.rows());
  Eigen::MatrixXd xn(k, train.X.cols());
  Eigen::VectorXd yn(k);
  Eigen::VectorXd cross(k);
  for (Eigen::Index t = 0; t < Z.rows(); ++t) {
    NeighborList nl = index.query_knn(Z.row(t).transpose(), k);
    for (int j = 0; j < k; ++j) {
      xn.row(j) = train.X.row(nl.indices[j]);
      yn(j) = train.Y(nl.indices[j]);
      cross(j) = kernel_value(nl.distances[j], fitted.kind, fitted.theta_hat);
    }
    Eigen::MatrixXd knn = cov_matrix_self(xn, fitted.kind, fitted.theta_hat);
    Eigen::VectorXd coeff = solve_spd(knn, yn, "muygps_predict");
    out(t) = cross.dot(coeff) + train.mean_offset;
  }
  return out;
}

}  // namespace fastmuygps
