#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "normip/protocols.hpp"
#include "normip/rng.hpp"
#include "normip/sparsifiers.hpp"
#include "normip/vector.hpp"

namespace normip {

/// Threads used by parallel kernels: omp_get_max_threads(), capped by the
/// NORMIP_THREADS environment variable when it holds a positive integer.
int thread_limit();

struct TrialResult {
  double estimate = 0.0;
  double truth = 0.0;
  std::size_t bits = 0;
  std::size_t sparsity = 0;
};

/// trial index, rng seeded from substream_seed(seed, cell, trial).
using TrialFunction = std::function<TrialResult(std::size_t, Rng&)>;

/// Runs `trials` independent trials. Result i depends only on
/// (seed, cell, i), so both variants return identical vectors. The first
/// exception thrown by any trial is rethrown after the loop.
std::vector<TrialResult> run_trials(std::size_t trials, std::uint64_t seed, std::uint64_t cell,
                                    const TrialFunction& trial);
std::vector<TrialResult> run_trials_serial(std::size_t trials, std::uint64_t seed, std::uint64_t cell,
                                           const TrialFunction& trial);

/// Repeated runs of one protocol on a fixed pair; truth = <v, w>.
std::vector<TrialResult> protocol_trials(const ProtocolSpec& spec, std::span<const double> v,
                                         std::span<const double> w, std::size_t trials, std::uint64_t seed,
                                         std::uint64_t cell = 0, bool parallel = true);

/// The t-th independent sparsification of v, for t < trials.
std::vector<SparseVector> sparsify_trials(const SparsifierSpec& spec, std::span<const double> v, std::size_t trials,
                                          std::uint64_t seed, std::uint64_t cell = 0, bool parallel = true);

/// Row t holds <phi_t(v), w_j> for every w_j, where phi_t is the t-th
/// independent sparsification of v; one draw of phi serves all w_j.
std::vector<Vector> sparsifier_estimates(const SparsifierSpec& spec, std::span<const double> v,
                                         std::span<const Vector> ws, std::size_t trials, std::uint64_t seed,
                                         std::uint64_t cell = 0, bool parallel = true);

struct TrialSummary {
  std::size_t trials = 0;
  std::size_t successes = 0;
  double success_rate = 0.0;
  /// sqrt(p (1 - p) / trials) at the target p.
  double standard_error = 0.0;
  double mean_error = 0.0;
  double max_error = 0.0;
  std::size_t max_bits = 0;
  std::size_t min_bits = 0;
  double mean_bits = 0.0;
  std::size_t max_sparsity = 0;
};

/// Success means |estimate - truth| <= eps.
TrialSummary summarize(std::span<const TrialResult> results, double eps, double target_rate);

}  // namespace normip
