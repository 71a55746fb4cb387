// fmgp: end-to-end driver for nearest-neighbor GP regression benchmarks.
// Subcommands: gen, train, predict, scaling, mcmc. Exit codes: 0 success,
// 2 usage/config error, 3 numerical failure.

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "fastmuygps/borehole.hpp"
#include "fastmuygps/dataset.hpp"
#include "fastmuygps/errors.hpp"
#include "fastmuygps/exact_gp.hpp"
#include "fastmuygps/fast_predict.hpp"
#include "fastmuygps/mcmc.hpp"
#include "fastmuygps/muygps.hpp"
#include "fastmuygps/nn_index.hpp"

namespace {

using namespace fastmuygps;
using Clock = std::chrono::steady_clock;

constexpr const char* kBuildId = "fmgp/0.1.0";

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Flat key-value config file: one "key value" (or "key = value") pair per
// line, '#' comments. Flags override file values.
std::map<std::string, std::string> read_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::domain_error("cannot open config file: " + path);
  }
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(in, line)) {
    auto hash = line.find('#');
    if (hash != std::string::npos) {
      line.erase(hash);
    }
    std::istringstream ss(line);
    std::string key, value;
    if (!(ss >> key)) {
      continue;
    }
    ss >> value;
    if (value == "=") {
      ss >> value;
    }
    if (value.empty()) {
      throw std::domain_error("config key '" + key + "' has no value");
    }
    kv[key] = value;
  }
  return kv;
}

KernelKind parse_kind(const std::string& name) {
  if (name == "matern") return KernelKind::Matern;
  if (name == "rbf") return KernelKind::RBF;
  throw std::domain_error("unknown kernel '" + name + "' (matern|rbf)");
}

IndexMode parse_index_mode(const std::string& name) {
  if (name == "exact") return IndexMode::Exact;
  if (name == "hnsw") return IndexMode::ApproxGraph;
  throw std::domain_error("unknown index '" + name + "' (exact|hnsw)");
}

std::vector<std::string> feature_names() {
  return {"r_w", "r", "T_u", "H_u", "T_l", "H_l", "L", "K_w"};
}

// ---------------------------------------------------------------------------
// gen

struct GenArgs {
  std::string config_path;
  std::optional<int> n_train, n_test;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_train, out_test;
};

int cmd_gen(const GenArgs& args) {
  std::map<std::string, std::string> cfg;
  if (!args.config_path.empty()) {
    cfg = read_config(args.config_path);
  }
  auto require = [&](const char* key,
                     const auto& flag_value) -> std::string {
    if (flag_value) {
      std::ostringstream os;
      os << *flag_value;
      return os.str();
    }
    auto it = cfg.find(key);
    if (it == cfg.end()) {
      throw std::domain_error(std::string("missing required key '") + key +
                              "'");
    }
    return it->second;
  };
  int n_train = std::stoi(require("n_train", args.n_train));
  int n_test = std::stoi(require("n_test", args.n_test));
  std::string out_train = require("out_train", args.out_train);
  std::string out_test = require("out_test", args.out_test);
  std::uint64_t seed = 0;
  if (args.seed) {
    seed = *args.seed;
  } else if (auto it = cfg.find("seed"); it != cfg.end()) {
    seed = std::stoull(it->second);
  }

  DesignConfig design;
  design.n_samples = n_train;
  design.seed = seed;
  auto [train, test] = make_train_test(design, n_test, seed + 1);

  std::vector<std::string> comments = {
      "borehole dataset",
      "n_train " + std::to_string(n_train),
      "n_test " + std::to_string(n_test),
      "seed " + std::to_string(seed),
  };
  write_dataset_csv(out_train, train, feature_names(), "flow", comments);
  write_dataset_csv(out_test, test, feature_names(), "flow", comments);
  std::cout << "wrote " << out_train << " (" << n_train << " records), "
            << out_test << " (" << n_test << " records)\n";
  return 0;
}

// ---------------------------------------------------------------------------
// train

struct TrainArgs {
  std::string data_path, out_path;
  int k = 50;
  int batch = 500;
  std::string kernel = "rbf";
  double sigma = 1.0, rho = 43.27, nu = 2.5, tau = 0.0;
  std::string free_params = "rho";
  std::pair<double, double> rho_bounds{1e-2, 1e3};
  std::pair<double, double> nu_bounds{0.1, 5.0};
  std::pair<double, double> tau_bounds{0.0, 1.0};
  std::uint64_t seed = 0;
  std::string index = "hnsw";
  int budget = 200;
  int threads = 1;
};

int cmd_train(const TrainArgs& args) {
  TrainingSet data = read_dataset_csv(args.data_path);
  KernelParams initial(args.sigma, args.rho, args.nu, args.tau);

  TrainConfig config;
  config.k = args.k;
  config.kind = parse_kind(args.kernel);
  config.max_evals = args.budget;
  std::istringstream free_list(args.free_params);
  std::string name;
  while (std::getline(free_list, name, ',')) {
    if (name == "rho") {
      config.rho_bounds = Bounds{args.rho_bounds.first, args.rho_bounds.second};
    } else if (name == "nu") {
      config.nu_bounds = Bounds{args.nu_bounds.first, args.nu_bounds.second};
    } else if (name == "tau") {
      config.tau_bounds = Bounds{args.tau_bounds.first, args.tau_bounds.second};
    } else if (!name.empty()) {
      throw std::domain_error("unknown free parameter '" + name + "'");
    }
  }

  GraphParams graph;
  graph.seed = args.seed;
  auto t0 = Clock::now();
  NeighborIndex index =
      NeighborIndex::build(data.X, parse_index_mode(args.index), graph);
  double index_seconds = seconds_since(t0);

  int n = static_cast<int>(data.X.rows());
  BatchSpec batch = BatchSpec::sample(n, std::min(args.batch, n), args.seed);

  t0 = Clock::now();
  FittedParams fitted = train(data, initial, config, batch, index);
  double train_seconds = seconds_since(t0);

  t0 = Clock::now();
  PrecomputedModel model =
      precompute(data, fitted, index, args.k, args.threads);
  double precompute_seconds = seconds_since(t0);
  save_model(model, args.out_path);

  std::cout << "sigma " << fmt(fitted.theta_hat.sigma()) << "\n"
            << "rho " << fmt(fitted.theta_hat.rho()) << "\n"
            << "nu " << fmt(fitted.theta_hat.nu()) << "\n"
            << "tau " << fmt(fitted.theta_hat.tau()) << "\n"
            << "final_loss " << fmt(fitted.final_loss) << "\n"
            << "evaluations " << fitted.evaluations << "\n"
            << "improved " << (fitted.improved ? 1 : 0) << "\n"
            << "index_seconds " << fmt(index_seconds) << "\n"
            << "train_seconds " << fmt(train_seconds) << "\n"
            << "precompute_seconds " << fmt(precompute_seconds) << "\n"
            << "n " << n << "\n"
            << "k " << args.k << "\n"
            << "b " << batch.b << "\n"
            << "seed " << args.seed << "\n"
            << "build " << kBuildId << "\n"
            << "model " << args.out_path << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// predict

struct PredictArgs {
  std::string model_path, data_path;
  int timing_reps = 5;
  std::string report_path;
  std::string pred_out;
};

int cmd_predict(const PredictArgs& args) {
  PrecomputedModel model = load_model(args.model_path);
  TrainingSet test = read_dataset_csv(args.data_path);
  if (test.X.cols() != model.X.cols()) {
    throw std::domain_error(
        "test feature dimension does not match the model");
  }

  Eigen::VectorXd predictions = fast_predict_batch(model, test.X);  // warm-up
  std::vector<double> pass_seconds;
  for (int rep = 0; rep < std::max(1, args.timing_reps); ++rep) {
    auto t0 = Clock::now();
    predictions = fast_predict_batch(model, test.X);
    pass_seconds.push_back(seconds_since(t0));
  }
  std::sort(pass_seconds.begin(), pass_seconds.end());
  double median = pass_seconds[pass_seconds.size() / 2];
  double per_point = median / static_cast<double>(test.X.rows());

  Eigen::VectorXd truth = test.Y.array() + test.mean_offset;
  double rmse = std::sqrt((predictions - truth).squaredNorm() /
                          static_cast<double>(truth.size()));

  std::ostringstream report;
  report << "rmse " << fmt(rmse) << "\n"
         << "per_point_predict_seconds " << fmt(per_point) << "\n"
         << "timing_reps " << std::max(1, args.timing_reps) << "\n"
         << "n " << model.X.rows() << "\n"
         << "k " << model.table.S.cols() << "\n"
         << "m " << test.X.rows() << "\n"
         << "build " << kBuildId << "\n";
  std::cout << report.str();
  if (!args.report_path.empty()) {
    std::ofstream out(args.report_path);
    out << report.str();
  }
  if (!args.pred_out.empty()) {
    std::ofstream out(args.pred_out);
    out << "prediction\n";
    for (Eigen::Index i = 0; i < predictions.size(); ++i) {
      out << fmt(predictions(i)) << "\n";
    }
  }
  return 0;
}

// ---------------------------------------------------------------------------
// scaling

struct ScalingArgs {
  std::string n_list = "10000,20000";
  int k = 50;
  std::uint64_t seed = 0;
  int queries = 2000;
  int budget = 50;
  int threads = 1;
  bool baseline = false;
};

int cmd_scaling(const ScalingArgs& args) {
  std::vector<int> sizes;
  std::istringstream list(args.n_list);
  std::string tok;
  while (std::getline(list, tok, ',')) {
    sizes.push_back(std::stoi(tok));
  }
  if (sizes.empty()) {
    throw std::domain_error("--n-list is empty");
  }

  auto time_queries = [&](const PrecomputedModel& model,
                          const Eigen::MatrixXd& Z) {
    std::vector<double> passes;
    volatile double sink = fast_predict_batch(model, Z).sum();  // warm-up
    for (int rep = 0; rep < 5; ++rep) {
      auto t0 = Clock::now();
      sink = fast_predict_batch(model, Z).sum();
      passes.push_back(seconds_since(t0));
    }
    (void)sink;
    std::sort(passes.begin(), passes.end());
    return passes[passes.size() / 2] / static_cast<double>(Z.rows());
  };

  std::cout << "n,per_point_seconds"
            << (args.baseline ? ",per_point_seconds_scan" : "") << "\n";
  std::vector<double> fast_times, scan_times;
  for (int n : sizes) {
    DesignConfig design;
    design.n_samples = n;
    design.seed = args.seed;
    auto [train_set, test_set] =
        make_train_test(design, args.queries, args.seed + 1);

    GraphParams graph;
    graph.seed = args.seed;
    NeighborIndex index =
        NeighborIndex::build(train_set.X, IndexMode::ApproxGraph, graph);
    TrainConfig config;
    config.k = args.k;
    config.kind = KernelKind::RBF;
    config.max_evals = args.budget;
    config.rho_bounds = Bounds{1e-2, 1e3};
    BatchSpec batch =
        BatchSpec::sample(n, std::min(500, n), args.seed);
    KernelParams initial(1.0, 43.27, 2.5, 0.0);
    FittedParams fitted = train(train_set, initial, config, batch, index);
    PrecomputedModel model =
        precompute(train_set, fitted, index, args.k, args.threads);

    double per_point = time_queries(model, test_set.X);
    fast_times.push_back(per_point);
    std::cout << n << "," << fmt(per_point);
    if (args.baseline) {
      PrecomputedModel scan_model{
          model.X,    model.table,       model.C, model.params,
          model.kind, model.mean_offset,
          NeighborIndex::build(model.X, IndexMode::Exact)};
      int m_scan = std::min<int>(args.queries, 200);
      double scan = time_queries(scan_model, test_set.X.topRows(m_scan));
      scan_times.push_back(scan);
      std::cout << "," << fmt(scan);
    }
    std::cout << "\n";
  }
  for (std::size_t i = 1; i < fast_times.size(); ++i) {
    std::cout << "ratio " << sizes[i - 1] << "->" << sizes[i] << " "
              << fmt(fast_times[i] / fast_times[i - 1]);
    if (args.baseline) {
      std::cout << " scan " << fmt(scan_times[i] / scan_times[i - 1]);
    }
    std::cout << "\n";
  }
  return 0;
}

// ---------------------------------------------------------------------------
// mcmc

struct McmcArgs {
  std::string model_path;
  double true_rw = 0.09;
  long steps = 100000;
  std::uint64_t seed = 0;
  double proposal_sd = 0.005;
  double noise_sd = 1.0;
  double burn_in = 0.1;
  std::string trace_path;
  double r = 25050.0;
  double t_u = 89335.0;
  double t_l = 89.55;
};

int cmd_mcmc(const McmcArgs& args) {
  PrecomputedModel model = load_model(args.model_path);

  InverseProblem prob;
  prob.noise_sd = args.noise_sd;
  prob.r = args.r;
  prob.T_u = args.t_u;
  prob.T_l = args.t_l;
  BoreholeInput truth{args.true_rw,
                      prob.r,
                      prob.T_u,
                      prob.design.fixed_values[0],
                      prob.T_l,
                      prob.design.fixed_values[1],
                      prob.design.fixed_values[2],
                      prob.design.fixed_values[3]};
  prob.observed_flow = borehole(truth);

  ChainState chain =
      run_chain(prob, model, args.steps, args.proposal_sd, args.seed);
  if (!args.trace_path.empty()) {
    write_trace_csv(args.trace_path, chain);
  }
  ChainSummary summary = summarize(chain, args.burn_in);
  double rel_error = std::abs(summary.mean - args.true_rw) / args.true_rw;
  std::cout << "observed_flow " << fmt(prob.observed_flow) << "\n"
            << "posterior_mean " << fmt(summary.mean) << "\n"
            << "posterior_sd " << fmt(summary.sd) << "\n"
            << "acceptance_rate " << fmt(summary.acceptance_rate) << "\n"
            << "true_rw " << fmt(args.true_rw) << "\n"
            << "relative_error " << fmt(rel_error) << "\n"
            << "steps " << args.steps << "\n"
            << "seed " << args.seed << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nearest-neighbor Gaussian process benchmark driver"};
  app.require_subcommand(1);

  GenArgs gen;
  auto* sub_gen = app.add_subcommand("gen", "Generate borehole datasets");
  sub_gen->add_option("--config", gen.config_path, "Flat key-value config");
  sub_gen->add_option("--n-train", gen.n_train);
  sub_gen->add_option("--n-test", gen.n_test);
  sub_gen->add_option("--seed", gen.seed);
  sub_gen->add_option("--out-train", gen.out_train);
  sub_gen->add_option("--out-test", gen.out_test);

  TrainArgs tr;
  auto* sub_train =
      app.add_subcommand("train", "Train hyperparameters and precompute");
  sub_train->add_option("--data", tr.data_path)->required();
  sub_train->add_option("--out", tr.out_path)->required();
  sub_train->add_option("--k", tr.k);
  sub_train->add_option("--batch", tr.batch);
  sub_train->add_option("--kernel", tr.kernel);
  sub_train->add_option("--sigma", tr.sigma);
  sub_train->add_option("--rho", tr.rho);
  sub_train->add_option("--nu", tr.nu);
  sub_train->add_option("--tau", tr.tau);
  sub_train->add_option("--free-params", tr.free_params,
                        "Comma list from {rho,nu,tau}; empty trains nothing");
  sub_train->add_option("--rho-bounds", tr.rho_bounds);
  sub_train->add_option("--nu-bounds", tr.nu_bounds);
  sub_train->add_option("--tau-bounds", tr.tau_bounds);
  sub_train->add_option("--seed", tr.seed);
  sub_train->add_option("--index", tr.index, "exact|hnsw");
  sub_train->add_option("--budget", tr.budget);
  sub_train->add_option("--threads", tr.threads);

  PredictArgs pr;
  auto* sub_predict = app.add_subcommand("predict", "Predict and report RMSE");
  sub_predict->add_option("--model", pr.model_path)->required();
  sub_predict->add_option("--data", pr.data_path)->required();
  sub_predict->add_option("--timing-reps", pr.timing_reps);
  sub_predict->add_option("--report", pr.report_path);
  sub_predict->add_option("--pred-out", pr.pred_out);

  ScalingArgs sc;
  auto* sub_scaling =
      app.add_subcommand("scaling", "Latency scaling across training sizes");
  sub_scaling->add_option("--n-list", sc.n_list);
  sub_scaling->add_option("--k", sc.k);
  sub_scaling->add_option("--seed", sc.seed);
  sub_scaling->add_option("--queries", sc.queries);
  sub_scaling->add_option("--budget", sc.budget);
  sub_scaling->add_option("--threads", sc.threads);
  sub_scaling->add_flag("--baseline", sc.baseline,
                        "Also time a linear-scan lookup");

  McmcArgs mc;
  auto* sub_mcmc =
      app.add_subcommand("mcmc", "Recover r_w from an observed flow rate");
  sub_mcmc->add_option("--model", mc.model_path)->required();
  sub_mcmc->add_option("--true-rw", mc.true_rw);
  sub_mcmc->add_option("--steps", mc.steps);
  sub_mcmc->add_option("--seed", mc.seed);
  sub_mcmc->add_option("--proposal-sd", mc.proposal_sd);
  sub_mcmc->add_option("--noise-sd", mc.noise_sd);
  sub_mcmc->add_option("--burn-in", mc.burn_in);
  sub_mcmc->add_option("--trace", mc.trace_path);
  sub_mcmc->add_option("--r", mc.r);
  sub_mcmc->add_option("--tu", mc.t_u);
  sub_mcmc->add_option("--tl", mc.t_l);

  try {
    app.parse(argc, argv);
    if (*sub_gen) return cmd_gen(gen);
    if (*sub_train) return cmd_train(tr);
    if (*sub_predict) return cmd_predict(pr);
    if (*sub_scaling) return cmd_scaling(sc);
    if (*sub_mcmc) return cmd_mcmc(mc);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      return app.exit(e);  // --help
    }
    app.exit(e);
    return 2;
  } catch (const fastmuygps::NumericError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
