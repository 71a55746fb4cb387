// End-to-end acceptance suite. Each criterion prints one PASS/FAIL line;
// the process exits nonzero if any criterion fails. Expect a few minutes of
// wall time: the latency criteria build six-figure training sets.

#include <Eigen/Dense>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "fastmuygps/borehole.hpp"
#include "fastmuygps/exact_gp.hpp"
#include "fastmuygps/fast_predict.hpp"
#include "fastmuygps/mcmc.hpp"
#include "fastmuygps/muygps.hpp"

using namespace fastmuygps;
using Clock = std::chrono::steady_clock;

namespace {

int g_failures = 0;

void report(int criterion, bool pass, const std::string& what,
            const std::string& detail) {
  std::printf("criterion %2d: %s  %s (%s)\n", criterion,
              pass ? "PASS" : "FAIL", what.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

double elapsed(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

FittedParams fixed(KernelKind kind, const KernelParams& p) {
  return {p, kind, 0.0, 0, false};
}

std::pair<TrainingSet, TrainingSet> borehole_split(int n_train, int n_test,
                                                   std::uint64_t seed) {
  DesignConfig cfg;
  cfg.n_samples = n_train;
  cfg.seed = seed;
  return make_train_test(cfg, n_test, seed + 1);
}

double rmse(const Eigen::VectorXd& pred, const Eigen::VectorXd& truth) {
  return std::sqrt((pred - truth).squaredNorm() /
                   static_cast<double>(truth.size()));
}

double median_per_point_seconds(const PrecomputedModel& model,
                                const Eigen::MatrixXd& Z) {
  std::vector<double> passes;
  volatile double sink = fast_predict_batch(model, Z).sum();  // warm-up
  for (int rep = 0; rep < 5; ++rep) {
    auto t0 = Clock::now();
    sink = fast_predict_batch(model, Z).sum();
    passes.push_back(elapsed(t0));
  }
  (void)sink;
  std::sort(passes.begin(), passes.end());
  return passes[2] / static_cast<double>(Z.rows());
}

char buf_storage[256];
template <typename... Args>
std::string fmt(const char* f, Args... args) {
  std::snprintf(buf_storage, sizeof(buf_storage), f, args...);
  return buf_storage;
}

// ---------------------------------------------------------------------------

void criterion_1_end_to_end() {
  auto [train_set, test_set] = borehole_split(20000, 4000, 100);
  NeighborIndex index =
      NeighborIndex::build(train_set.X, IndexMode::ApproxGraph);
  TrainConfig config;
  config.k = 50;
  config.kind = KernelKind::RBF;
  config.rho_bounds = Bounds{1e-2, 1e3};
  config.max_evals = 80;
  BatchSpec batch = BatchSpec::sample(20000, 500, 100);
  FittedParams fitted = train(
      train_set, KernelParams(1.0, 43.27, 2.5, 0.0), config, batch, index);
  PrecomputedModel model = precompute(train_set, fitted, index, 50);
  Eigen::VectorXd pred = fast_predict_batch(model, test_set.X);
  Eigen::VectorXd truth = test_set.Y.array() + test_set.mean_offset;
  double err = rmse(pred, truth);
  report(1, err <= 5e-2, "trained accelerated predictor accuracy at n=20000",
         fmt("rmse %.3e <= 5e-2, rho %.4g", err, fitted.theta_hat.rho()));
}

void criterion_2_small_scale_equivalence() {
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    std::mt19937_64 rng(seed * 31 + 7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Eigen::MatrixXd X(50, 3);
    for (int i = 0; i < X.size(); ++i) X.data()[i] = u(rng);
    Eigen::VectorXd y(50);
    for (int i = 0; i < 50; ++i) y(i) = std::sin(5.0 * X.row(i).sum());
    TrainingSet data = detrend(std::move(X), y);
    KernelKind kind = seed % 2 == 0 ? KernelKind::Matern : KernelKind::RBF;
    KernelParams p(1.0, 0.6, 1.5, 1e-6);

    NeighborIndex index = NeighborIndex::build(data.X, IndexMode::Exact);
    PrecomputedModel model = precompute(data, fixed(kind, p), index, 50);
    Eigen::MatrixXd Z(20, 3);
    for (int i = 0; i < Z.size(); ++i) Z.data()[i] = u(rng);
    Eigen::VectorXd fast = fast_predict_batch(model, Z);
    Eigen::VectorXd dense = posterior_mean(data, Z, kind, p);
    for (int i = 0; i < 20; ++i) {
      worst = std::max(worst, std::abs(fast(i) - dense(i)) /
                                  (1.0 + std::abs(dense(i))));
    }
  }
  report(2, worst <= 1e-8,
         "k=n accelerated predictions equal the dense posterior mean",
         fmt("max rel deviation %.2e <= 1e-8 over 20 datasets", worst));
}

void criterion_3_interpolation() {
  auto [train_set, test_unused] = borehole_split(2000, 10, 200);
  // Noiseless and deliberately rough: a zero-nugget exponential kernel keeps
  // the local systems well conditioned so interpolation is exact.
  KernelParams p(1.0, 2.0, 0.5, 0.0);
  NeighborIndex index =
      NeighborIndex::build(train_set.X, IndexMode::Exact);
  FittedParams fp = fixed(KernelKind::Matern, p);
  PrecomputedModel model = precompute(train_set, fp, index, 50);
  Eigen::VectorXd truth = train_set.Y.array() + train_set.mean_offset;
  double sd = std::sqrt(train_set.Y.squaredNorm() /
                        static_cast<double>(train_set.Y.size() - 1));

  double fast_err = rmse(fast_predict_batch(model, train_set.X), truth);
  double local_err =
      rmse(muygps_predict(train_set, train_set.X, fp, index, 50), truth);
  bool pass = fast_err <= 1e-6 * sd && local_err <= 1e-6 * sd;
  report(3, pass, "noiseless predictors interpolate the training data",
         fmt("rmse/sd fast %.2e, local %.2e <= 1e-6", fast_err / sd,
             local_err / sd));
}

void criterion_4_precompute() {
  auto [train_set, test_unused] = borehole_split(10000, 10, 300);
  NeighborIndex index =
      NeighborIndex::build(train_set.X, IndexMode::ApproxGraph);
  KernelParams p(1.0, 2.0, 0.5, 1e-6);
  auto t0 = Clock::now();
  PrecomputedModel model =
      precompute(train_set, fixed(KernelKind::Matern, p), index, 50);
  double secs = elapsed(t0);

  double worst = 0.0;
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<int> pick(0, 9999);
  for (int rep = 0; rep < 200; ++rep) {
    int i = pick(rng);
    Eigen::MatrixXd xs(50, 8);
    Eigen::VectorXd ys(50);
    for (int t = 0; t < 50; ++t) {
      xs.row(t) = train_set.X.row(model.table.S(i, t));
      ys(t) = train_set.Y(model.table.S(i, t));
    }
    Eigen::MatrixXd K = cov_matrix_self(xs, KernelKind::Matern, p);
    worst = std::max(
        worst,
        (K * model.C.row(i).transpose() - ys).cwiseAbs().maxCoeff());
  }
  bool pass = worst <= 1e-8 && secs < 30.0;
  report(4, pass, "coefficient table solves its local systems at n=10000",
         fmt("max residual %.2e <= 1e-8, %.1fs < 30s", worst, secs));
}

void criterion_5_latency_scaling() {
  auto build_model = [](int n) {
    DesignConfig cfg;
    cfg.n_samples = n;
    cfg.seed = 500;
    TrainingSet data = make_dataset(cfg);
    NeighborIndex index = NeighborIndex::build(data.X, IndexMode::ApproxGraph);
    return precompute(data, fixed(KernelKind::RBF,
                                  KernelParams(1.0, 43.27, 2.5, 0.0)),
                      index, 50);
  };
  DesignConfig qcfg;
  qcfg.n_samples = 2000;
  qcfg.seed = 501;
  Eigen::MatrixXd Z = make_dataset(qcfg).X;

  PrecomputedModel m1 = build_model(100000);
  PrecomputedModel m2 = build_model(200000);

  // Alternating minimum-of-passes timing: interleaving the two models puts
  // both under the same background conditions, and the per-pass minimum
  // strips additive noise.
  auto ratio_of = [](const PrecomputedModel& a, const PrecomputedModel& b,
                     const Eigen::MatrixXd& Zq) {
    volatile double sink = fast_predict_batch(a, Zq).sum();
    sink = fast_predict_batch(b, Zq).sum();
    double ta = 1e300, tb = 1e300;
    for (int rep = 0; rep < 7; ++rep) {
      auto t0 = Clock::now();
      sink = fast_predict_batch(a, Zq).sum();
      ta = std::min(ta, elapsed(t0));
      t0 = Clock::now();
      sink = fast_predict_batch(b, Zq).sum();
      tb = std::min(tb, elapsed(t0));
    }
    (void)sink;
    return tb / ta;
  };
  double ratio = ratio_of(m1, m2, Z);

  // Baseline: identical models with a linear-scan lookup.
  Eigen::MatrixXd Zs = Z.topRows(300);
  PrecomputedModel s1{m1.X,    m1.table,       m1.C, m1.params,
                      m1.kind, m1.mean_offset,
                      NeighborIndex::build(m1.X, IndexMode::Exact)};
  PrecomputedModel s2{m2.X,    m2.table,       m2.C, m2.params,
                      m2.kind, m2.mean_offset,
                      NeighborIndex::build(m2.X, IndexMode::Exact)};
  double scan_ratio = ratio_of(s1, s2, Zs);

  bool pass = ratio < 1.5 && scan_ratio > 1.8;
  report(5, pass, "query latency grows sub-linearly from n=1e5 to 2e5",
         fmt("graph ratio %.3f < 1.5, scan baseline ratio %.3f > 1.8", ratio,
             scan_ratio));
}

void criterion_6_amortized_speedup() {
  auto [train_set, test_set] = borehole_split(100000, 200, 600);
  NeighborIndex index =
      NeighborIndex::build(train_set.X, IndexMode::ApproxGraph);
  FittedParams fp =
      fixed(KernelKind::RBF, KernelParams(1.0, 43.27, 2.5, 0.0));
  PrecomputedModel model = precompute(train_set, fp, index, 150);

  double fast_pp = median_per_point_seconds(model, test_set.X);
  auto t0 = Clock::now();
  Eigen::VectorXd local = muygps_predict(train_set, test_set.X, fp, index, 150);
  double local_pp = elapsed(t0) / static_cast<double>(test_set.X.rows());

  report(6, fast_pp <= local_pp / 3.0,
         "amortized prediction beats per-query solves at k=150",
         fmt("%.2e s/pt vs %.2e s/pt (x%.1f)", fast_pp, local_pp,
             local_pp / fast_pp));
}

void criterion_7_inversion() {
  auto [train_set, test_unused] = borehole_split(20000, 10, 700);
  NeighborIndex index =
      NeighborIndex::build(train_set.X, IndexMode::ApproxGraph);
  PrecomputedModel model = precompute(
      train_set, fixed(KernelKind::RBF, KernelParams(1.0, 43.27, 2.5, 0.0)),
      index, 50);

  InverseProblem prob;
  prob.noise_sd = 1.0;
  prob.r = 25050.0;
  prob.T_u = 89335.0;
  prob.T_l = 89.55;
  const double true_rw = 0.09;
  BoreholeInput truth{true_rw,
                      prob.r,
                      prob.T_u,
                      prob.design.fixed_values[0],
                      prob.T_l,
                      prob.design.fixed_values[1],
                      prob.design.fixed_values[2],
                      prob.design.fixed_values[3]};
  prob.observed_flow = borehole(truth);

  auto t0 = Clock::now();
  ChainState chain = run_chain(prob, model, 100000, 0.002, 700);
  double secs = elapsed(t0);
  ChainSummary s = summarize(chain, 0.1);
  double rel = std::abs(s.mean - true_rw) / true_rw;
  bool pass = rel <= 0.02 && s.acceptance_rate > 0.1 &&
              s.acceptance_rate < 0.7 && secs < 120.0;
  report(7, pass, "posterior over r_w recovers the true radius",
         fmt("rel err %.2e <= 2e-2, acc %.2f in (0.1,0.7), %.1fs < 120s", rel,
             s.acceptance_rate, secs));
}

void criterion_8_kernel_identities() {
  bool pass = true;
  std::string detail = "exp form, sq-exp limit, zero-distance value";
  KernelParams half(1.3, 0.9, 0.5, 0.0);
  for (int t = 1; t <= 50 && pass; ++t) {
    double d = 4.0 * t / 50.0;
    double expected = 1.3 * 1.3 * std::exp(-d / 0.9);
    if (std::abs(matern_value(d, half) - expected) > 1e-12 * expected) {
      pass = false;
      detail = fmt("nu=1/2 mismatch at d=%.2f", d);
    }
  }
  KernelParams big(1.0, 1.2, 50.0, 0.0);
  for (int t = 0; t <= 40 && pass; ++t) {
    double d = 2.0 * 1.2 * t / 40.0;
    if (std::abs(matern_value(d, big) - rbf_value(d, big)) > 1e-2) {
      pass = false;
      detail = fmt("nu=50 vs sq-exp gap at d=%.2f", d);
    }
  }
  KernelParams nug(2.0, 1.0, 1.5, 0.5);
  if (pass && (matern_value(0.0, nug) != 4.0 * 1.25 ||
               rbf_value(0.0, nug) != 4.0 * 1.25)) {
    pass = false;
    detail = "zero-distance value is not sigma^2 (1 + tau^2)";
  }
  report(8, pass, "kernel limit identities", detail);
}

void criterion_9_sigma_invariance() {
  auto [train_set, test_set] = borehole_split(500, 50, 900);
  NeighborIndex index = NeighborIndex::build(train_set.X, IndexMode::Exact);
  // A rough kernel plus a real nugget keeps the solves well conditioned, so
  // the invariance is visible down to rounding noise.
  KernelParams p(1.0, 2.0, 0.5, 1e-3);
  KernelParams p10 = p.with_sigma(10.0);
  KernelKind kind = KernelKind::Matern;

  Eigen::VectorXd d1 = posterior_mean(train_set, test_set.X, kind, p);
  Eigen::VectorXd d2 = posterior_mean(train_set, test_set.X, kind, p10);
  Eigen::VectorXd l1 =
      muygps_predict(train_set, test_set.X, fixed(kind, p), index, 30);
  Eigen::VectorXd l2 =
      muygps_predict(train_set, test_set.X, fixed(kind, p10), index, 30);
  PrecomputedModel m1 = precompute(train_set, fixed(kind, p), index, 30);
  PrecomputedModel m2 = precompute(train_set, fixed(kind, p10), index, 30);
  Eigen::VectorXd f1 = fast_predict_batch(m1, test_set.X);
  Eigen::VectorXd f2 = fast_predict_batch(m2, test_set.X);

  double worst = std::max({(d1 - d2).cwiseAbs().maxCoeff(),
                           (l1 - l2).cwiseAbs().maxCoeff(),
                           (f1 - f2).cwiseAbs().maxCoeff()});
  report(9, worst <= 1e-10,
         "posterior means are invariant to the process scale",
         fmt("max deviation %.2e <= 1e-10 across all three predictors",
             worst));
}

void criterion_10_persistence() {
  auto [train_set, test_unused] = borehole_split(3000, 100, 1000);
  DesignConfig qcfg;
  qcfg.n_samples = 100;
  qcfg.seed = 1001;
  Eigen::MatrixXd Z = make_dataset(qcfg).X;
  NeighborIndex index =
      NeighborIndex::build(train_set.X, IndexMode::ApproxGraph);
  PrecomputedModel model = precompute(
      train_set, fixed(KernelKind::RBF, KernelParams(1.0, 30.0, 2.5, 0.0)),
      index, 40);

  auto path = std::filesystem::temp_directory_path() / "fmgp_acceptance.bin";
  save_model(model, path);
  PrecomputedModel loaded = load_model(path);
  std::filesystem::remove(path);

  Eigen::VectorXd before = fast_predict_batch(model, Z);
  Eigen::VectorXd after = fast_predict_batch(loaded, Z);
  bool identical = before == after;
  report(10, identical, "saved models reproduce predictions bit-for-bit",
         identical ? "100 queries identical" : "prediction drift after load");
}

void criterion_11_approx_index_quality() {
  auto [train_set, test_set] = borehole_split(10000, 1000, 1100);
  NeighborIndex graph =
      NeighborIndex::build(train_set.X, IndexMode::ApproxGraph);
  NeighborIndex exact = NeighborIndex::build(train_set.X, IndexMode::Exact);

  int hits = 0;
  for (int q = 0; q < 100; ++q) {
    Eigen::VectorXd z = test_set.X.row(q).transpose();
    NeighborList a = graph.query_knn(z, 50);
    NeighborList b = exact.query_knn(z, 50);
    std::vector<int> sa = a.indices, sb = b.indices;
    std::sort(sa.begin(), sa.end());
    std::sort(sb.begin(), sb.end());
    std::vector<int> common;
    std::set_intersection(sa.begin(), sa.end(), sb.begin(), sb.end(),
                          std::back_inserter(common));
    hits += static_cast<int>(common.size());
  }
  double recall = hits / 5000.0;

  KernelParams p(1.0, 30.0, 2.5, 0.0);
  Eigen::VectorXd truth = test_set.Y.array() + test_set.mean_offset;
  double e_graph = rmse(
      fast_predict_batch(
          precompute(train_set, fixed(KernelKind::RBF, p), graph, 50),
          test_set.X),
      truth);
  double e_exact = rmse(
      fast_predict_batch(
          precompute(train_set, fixed(KernelKind::RBF, p), exact, 50),
          test_set.X),
      truth);

  bool pass = recall >= 0.95 && e_graph <= 1.1 * e_exact;
  report(11, pass, "approximate neighbors preserve accuracy",
         fmt("recall@50 %.3f >= 0.95, rmse %.3e <= 1.1 x %.3e", recall,
             e_graph, e_exact));
}

}  // namespace

int main() {
  criterion_8_kernel_identities();
  criterion_2_small_scale_equivalence();
  criterion_3_interpolation();
  criterion_9_sigma_invariance();
  criterion_10_persistence();
  criterion_11_approx_index_quality();
  criterion_4_precompute();
  criterion_7_inversion();
  criterion_1_end_to_end();
  criterion_5_latency_scaling();
  criterion_6_amortized_speedup();
  std::printf("%s: %d criterion(s) failed\n",
              g_failures == 0 ? "OK" : "FAILURE", g_failures);
  return g_failures == 0 ? 0 : 1;
}
