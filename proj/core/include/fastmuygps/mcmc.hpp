#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "fastmuygps/borehole.hpp"
#include "fastmuygps/fast_predict.hpp"

namespace fastmuygps {

/// Borehole inversion target: recover r_w from one observed flow rate with
/// the remaining free parameters (r, T_u, T_l) known and the four fixed
/// parameters taken from the design. Uniform prior on r_w over its physical
/// bounds; Gaussian likelihood with standard deviation noise_sd.
struct InverseProblem {
  double observed_flow = 0.0;
  double noise_sd = 1.0;
  double r = 0.0;
  double T_u = 0.0;
  double T_l = 0.0;
  DesignConfig design;
  Bounds r_w_prior{kBoreholeBounds[kDimRw][0], kBoreholeBounds[kDimRw][1]};
};

/// Random-walk Metropolis sample path over r_w.
struct ChainState {
  std::vector<double> samples;        // r_w after each step
  std::vector<double> log_posteriors; // matching log posterior values
  std::vector<char> accepted;         // 1 where the proposal was accepted
  long accept_count = 0;
  double proposal_sd = 0.0;
  std::uint64_t seed = 0;
};

struct ChainSummary {
  double mean = 0.0;
  double sd = 0.0;
  double acceptance_rate = 0.0;
};

/// Log posterior of a candidate r_w: Gaussian log-likelihood of the emulator
/// prediction against the observed flow, -infinity outside the prior
/// support. The emulator input goes through the same scaling pipeline the
/// training data used.
double log_posterior(double r_w, const InverseProblem& prob,
                     const PrecomputedModel& model);

/// Symmetric Gaussian-proposal Metropolis chain, started at the prior
/// midpoint. Deterministic per seed; each step costs one fast_predict_one.
ChainState run_chain(const InverseProblem& prob, const PrecomputedModel& model,
                     long n_steps, double proposal_sd, std::uint64_t seed);

/// Posterior mean, standard deviation and acceptance rate over the samples
/// remaining after discarding the leading burn_in_fraction.
ChainSummary summarize(const ChainState& chain, double burn_in_fraction);

/// Comma-separated (step, r_w, log_posterior, accepted) trace.
void write_trace_csv(const std::filesystem::path& path,
                     const ChainState& chain);

}  // namespace fastmuygps
