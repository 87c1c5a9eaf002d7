#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "normip/norms.hpp"
#include "normip/rng.hpp"
#include "normip/vector.hpp"

namespace normip {

enum class SparsifierKind { lp_sampling, level_set, identity };

/// Parameters of an (eps, delta, D) sparsifier.
struct SparsifierSpec {
  SparsifierKind kind = SparsifierKind::lp_sampling;
  Exponent p{2.0};                    // lp_sampling
  std::optional<NormSpec> norm;       // level_set: governing symmetric norm
  std::size_t claim_k = 1;            // level_set: l_inf^k does not embed ...
  std::optional<double> claim_eps;    // ... at distortion 1/claim_eps (defaults to epsilon)
  double epsilon = 0.1;
  double delta = 1.0 / 3.0;
  double constant = 36.0;
  std::optional<std::size_t> max_samples;

  static SparsifierSpec lp_sampling(Exponent p, double eps, double delta = 1.0 / 3.0, double constant = 36.0);
  static SparsifierSpec level_set(NormSpec norm, std::size_t k, double eps, double delta = 1.0 / 3.0,
                                  double constant = 8.0);
  /// phi(v) = v; D = n. eps only sets the quantization grid.
  static SparsifierSpec identity(double eps = 0.01);

  /// p-hat = log k / log(1/eps) for level_set.
  double level_exponent() const;
  /// Number of draws s for vectors in R^n.
  std::size_t sample_count(std::size_t n) const;
  /// D; every output has at most this many nonzeros.
  std::size_t sparsity_cap(std::size_t n) const;
  void validate() const;
};

/// Probabilities over [n], zero wherever v is zero. `classes` labels the
/// level-set partition (0 = tail, i >= 1 = level i, -1 = zero coordinate)
/// and is empty for lp distributions.
struct SamplingDistribution {
  Vector probs;
  std::vector<int> classes;
  std::size_t nonempty_classes = 0;
};

/// Inverse-CDF sampler over a fixed distribution.
class IndexSampler {
public:
  explicit IndexSampler(std::span<const double> probs);
  std::size_t operator()(Rng& rng) const { return sample_from_cdf(cdf_, rng); }

private:
  std::vector<double> cdf_;
};

/// p_i = |v_i|^p; v must have unit l_p norm (within 1e-9).
SamplingDistribution lp_distribution(std::span<const double> v, Exponent p);

/// e_t v_t / p_t for t drawn from dist.
SparseVector draw_one_sparse(std::span<const double> v, const SamplingDistribution& dist, Rng& rng);

/// (||v||_p / s) sum of s draws on v / ||v||_p, repeated indices merged.
SparseVector lp_sparsify(std::span<const double> v, const SparsifierSpec& spec, Rng& rng);

/// R = ceil(3 log2 n) dyadic levels (2^-i, 2^-i+1] plus the tail |v_j| <= 2^-R;
/// p_j = 1 / (#nonempty classes * |class of j|).
SamplingDistribution levelset_distribution(std::span<const double> v, std::size_t n);
std::size_t level_count(std::size_t n);

/// (1/s) sum of s level-set draws, repeated indices merged.
SparseVector symmetric_sparsify(std::span<const double> v, const SparsifierSpec& spec, Rng& rng);

/// Dispatch on spec.kind.
SparseVector sparsify(std::span<const double> v, const SparsifierSpec& spec, Rng& rng);

/// sup over order statistics of (rank/N)^(1/q) |Z|_(rank). Needs >= 100 samples.
double weak_qnorm_estimate(std::span<const double> samples, Exponent q);

}  // namespace normip
