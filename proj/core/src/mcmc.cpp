#include "fastmuygps/mcmc.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <random>
#include <stdexcept>

namespace fastmuygps {

double log_posterior(double r_w, const InverseProblem& prob,
                     const PrecomputedModel& model) {
  if (!(prob.noise_sd > 0.0)) {
    throw std::domain_error("log_posterior: noise_sd must be positive");
  }
  if (!(r_w >= prob.r_w_prior.lo && r_w <= prob.r_w_prior.hi)) {
    return -std::numeric_limits<double>::infinity();
  }
  BoreholeInput input{r_w,
                      prob.r,
                      prob.T_u,
                      prob.design.fixed_values[0],
                      prob.T_l,
                      prob.design.fixed_values[1],
                      prob.design.fixed_values[2],
                      prob.design.fixed_values[3]};
  Eigen::VectorXd feature = scale_input(input, prob.design);
  if (feature.size() != model.X.cols()) {
    throw std::domain_error("log_posterior: model feature dimension mismatch");
  }
  double predicted = fast_predict_one(model, feature);
  double residual = prob.observed_flow - predicted;
  return -residual * residual / (2.0 * prob.noise_sd * prob.noise_sd);
}

ChainState run_chain(const InverseProblem& prob, const PrecomputedModel& model,
                     long n_steps, double proposal_sd, std::uint64_t seed) {
  if (n_steps < 1) {
    throw std::domain_error("run_chain: n_steps must be at least 1");
  }
  if (proposal_sd < 0.0) {
    throw std::domain_error("run_chain: proposal_sd must be non-negative");
  }
  ChainState chain;
  chain.proposal_sd = proposal_sd;
  chain.seed = seed;
  chain.samples.reserve(n_steps);
  chain.log_posteriors.reserve(n_steps);
  chain.accepted.reserve(n_steps);

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> step(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  double current = 0.5 * (prob.r_w_prior.lo + prob.r_w_prior.hi);
  double current_lp = log_posterior(current, prob, model);
  for (long t = 0; t < n_steps; ++t) {
    double proposal = current + proposal_sd * step(rng);
    double proposal_lp = log_posterior(proposal, prob, model);
    // A zero-width proposal never moves; count it as zero accepted moves
    // rather than vacuous self-acceptances.
    bool accept = proposal != current &&
                  std::log(unit(rng)) < proposal_lp - current_lp;
    if (accept) {
      current = proposal;
      current_lp = proposal_lp;
      ++chain.accept_count;
    }
    chain.samples.push_back(current);
    chain.log_posteriors.push_back(current_lp);
    chain.accepted.push_back(accept ? 1 : 0);
  }
  return chain;
}

ChainSummary summarize(const ChainState& chain, double burn_in_fraction) {
  if (!(burn_in_fraction >= 0.0 && burn_in_fraction < 1.0)) {
    throw std::domain_error("summarize: burn_in_fraction must be in [0,1)");
  }
  std::size_t n = chain.samples.size();
  std::size_t skip = static_cast<std::size_t>(burn_in_fraction * n);
  if (skip >= n) {
    throw std::domain_error("summarize: no samples left after burn-in");
  }
  std::size_t kept = n - skip;
  double sum = 0.0;
  long accepts = 0;
  for (std::size_t t = skip; t < n; ++t) {
    sum += chain.samples[t];
    accepts += chain.accepted[t];
  }
  double mean = sum / static_cast<double>(kept);
  double ss = 0.0;
  for (std::size_t t = skip; t < n; ++t) {
    double d = chain.samples[t] - mean;
    ss += d * d;
  }
  ChainSummary summary;
  summary.mean = mean;
  summary.sd = kept > 1 ? std::sqrt(ss / static_cast<double>(kept - 1)) : 0.0;
  summary.acceptance_rate =
      static_cast<double>(accepts) / static_cast<double>(kept);
  return summary;
}

void write_trace_csv(const std::filesystem::path& path,
                     const ChainState& chain) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot open trace file for writing: " +
                             path.string());
  }
  out << "step,r_w,log_posterior,accepted\n";
  char buf[80];
  for (std::size_t t = 0; t < chain.samples.size(); ++t) {
    std::snprintf(buf, sizeof(buf), "%zu,%.17g,%.17g,%d\n", t,
                  chain.samples[t], chain.log_posteriors[t],
                  static_cast<int>(chain.accepted[t]));
    out << buf;
  }
}

}  // namespace fastmuygps
