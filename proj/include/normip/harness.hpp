#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "normip/kernels.hpp"
#include "normip/protocols.hpp"
#include "normip/serialize.hpp"
#include "normip/sparsifiers.hpp"

namespace normip {

/// Monte-Carlo record of one (protocol, v, w) cell.
struct TrialReport {
  std::string cell;
  std::string fingerprint;
  std::uint64_t seed = 0;
  std::uint64_t cell_id = 0;
  std::size_t n = 0;
  double epsilon = 0.0;
  double delta = 0.0;
  std::size_t declared_bits = 0;
  std::size_t samples = 0;  // s of a one-way root, else 0
  std::size_t support = 0;  // D of a one-way root, else 0
  std::vector<double> errors;  // Z_t = estimate_t - <v, w>
  std::vector<std::size_t> bits;
  std::vector<std::size_t> sparsity;
  double success_rate = 0.0;
  double mean_error = 0.0;
  double variance = 0.0;
  std::optional<std::string> failure;  // set when the cell was quarantined
  double wall_seconds = 0.0;           // never serialized

  double recompute_success_rate() const;
  double p95_abs_error() const;
  bool bits_within_bound() const;
  /// success_rate >= (1 - delta) - 3 standard errors.
  bool contract_met() const;
};

/// FNV-1a of the canonical JSON, as 16 hex digits.
std::string fingerprint(const ProtocolSpec& spec);

TrialReport make_report(std::string cell, const ProtocolSpec& spec, std::size_t n, std::span<const TrialResult> results,
                        std::uint64_t seed, std::uint64_t cell_id);

Json to_json(const TrialReport& r);
/// Recomputes the success rate from the stored errors and rejects reports
/// whose recorded rate disagrees.
TrialReport report_from_json(const Json& j);

// --- instance families --------------------------------------------------

struct DualPair {
  Vector v;
  Vector w;
};

/// Gaussian direction scaled to the unit sphere of `spec`.
Vector random_unit_vector(const NormSpec& spec, std::size_t n, Rng& rng);
/// Gaussian direction scaled to the unit sphere of the dual norm.
Vector random_dual_unit_vector(const NormSpec& spec, std::size_t n, Rng& rng);
DualPair random_dual_pair(const NormSpec& spec, std::size_t n, Rng& rng);

/// v = sum_j x_j e_j, w = e_i (0-based): <v, w> = x_i.
DualPair gen_index_instance(std::span<const std::uint8_t> x, std::size_t i);
/// Reads bit i off an estimate of <v, w>.
int decode_index_bit(double estimate);

enum class GapSide { low, high };
const char* to_string(GapSide s);

struct GapHammingInstance {
  std::vector<std::uint8_t> x;
  std::vector<std::uint8_t> y;
  std::size_t distance = 0;
  std::size_t weight_x = 0;
  std::size_t weight_y = 0;
  std::size_t overlap = 0;  // <x, y>
  GapSide side = GapSide::low;
  Exponent p{2.0};
  double norm_x = 0.0;  // ||x||_p
  double norm_y = 0.0;  // ||y||_q
  Vector v;             // x / ||x||_p
  Vector w;             // y / ||y||_q
};

/// Labels explicit bitstrings; throws PreconditionError when the distance
/// falls strictly inside the gap.
GapHammingInstance gap_hamming_instance(std::vector<std::uint8_t> x, std::vector<std::uint8_t> y, double C,
                                        Exponent p = Exponent(2.0));

/// Uniform x, y conditioned on distance <= k/2 - C sqrt(k) or
/// >= k/2 + C sqrt(k), by rejection. Throws std::runtime_error when
/// `max_attempts` draws all land inside the gap.
GapHammingInstance gen_gap_hamming(std::size_t k, double C, Rng& rng, Exponent p = Exponent(2.0),
                                   std::uint64_t max_attempts = 200'000'000);

/// Side implied by an estimate of <v, w>: distance = |x| + |y| - 2<x, y>.
GapSide decide_gap_side(const GapHammingInstance& inst, double estimate);

// --- adversarial search -------------------------------------------------

struct AdversarialCandidate {
  Vector w;
  double success_rate = 1.0;
  std::string origin;
};

struct AdversarialOptions {
  std::size_t budget = 64;   // candidates examined
  std::size_t keep = 10;     // worst candidates returned
  std::size_t trials = 400;  // sparsifier draws shared by all candidates
  std::uint64_t seed = 5;
};

/// Unit dual vectors on which `sparsifier` applied to v succeeds least often
/// at its epsilon, worst first. Examines dual-ball vertices when they are
/// few, then sign and magnitude profiles aimed at the coordinates the
/// sampler visits rarely, then random sign patterns.
std::vector<AdversarialCandidate> adversarial_dual_search(const NormSpec& spec, std::span<const double> v,
                                                          const SparsifierSpec& sparsifier,
                                                          const AdversarialOptions& options = {});

// --- sweeps -------------------------------------------------------------

/// Copy with every leaf accuracy (sparsifier and vertex-sampling epsilon)
/// set to eps.
ProtocolSpec with_epsilon(const ProtocolSpec& spec, double eps);

struct SweepResult {
  std::vector<TrialReport> reports;
  /// cell,epsilon,s,D,bits,success,mean_abs_z,p95_abs_z
  std::string summary_csv;
  Json json;
  /// No quarantined cell and every run within its declared bits.
  bool passed = true;
};

/// Config: {"seed":7,"trials":100,"cells":[{"name":..,"protocol":..,
/// "family":..,"trials":..,"eps_grid":[..]}]}. "family" is a kind name with
/// its parameters on the cell, or an object {"kind":.., params..}. Kinds: random_dual_pair
/// (norm, n), index (n), gap_hamming (k, C, p), worst_case_search (norm, n,
/// budget; needs a one-way protocol) and fixed (v, w). A cell that throws is
/// recorded with its error and the sweep moves on.
SweepResult run_sweep(const Json& config);

}  // namespace normip
