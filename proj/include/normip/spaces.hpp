#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "normip/norms.hpp"
#include "normip/vector.hpp"

namespace normip {

/// Structural dual. Lp(p) -> Lp(q), TopK(k) -> max(linf, l1/k) and back,
/// HSum(h, parts) -> HSum(h*, parts*), Scaled(N, c) -> Scaled(N*, 1/c),
/// polytope -> polar polytope. Other max-norms become a DualOf wrapper.
/// Oracles need a user-supplied dual.
NormSpec dual_spec(const NormSpec& spec);

/// v = a + b with ||a||_1 + k ||b||_inf = topk_norm(v, k): b clamps v to the
/// k-th largest magnitude.
struct TopKSplit {
  Vector a;
  Vector b;
};
TopKSplit topk_decompose(std::span<const double> v, std::size_t k);

/// w = w1 + w2 with budget_i = ||w_i||_{N_i*}.
struct MaxDualSplit {
  Vector w1;
  Vector w2;
  double budget1 = 0.0;
  double budget2 = 0.0;
};

/// Cheapest split of w found for the pair (a, b): the minimizer of
/// ||w1||_{a*} + ||w2||_{b*}. Exact for top-k shaped pairs and for polyhedral
/// pairs; otherwise a Frank-Wolfe search with `budget` iterations per probe.
MaxDualSplit best_max_dual_split(std::span<const double> w, const NormSpec& a, const NormSpec& b, int budget = 2000);

/// best_max_dual_split, requiring budget1 + budget2 <= 1 + 1e-9. Throws
/// PreconditionError (w outside the dual ball) otherwise.
MaxDualSplit split_max_dual(std::span<const double> w, const NormSpec& a, const NormSpec& b, int budget = 2000);

/// ||w|| in the dual of max(a, b): the inf-convolution of a* and b*.
double inf_convolution_norm(const NormSpec& a, const NormSpec& b, std::span<const double> w, int budget = 2000);

/// Linear map R^k -> R^n (n x k, row-major) with
/// ||E x||_Y <= ||x||_X <= distortion * ||E x||_Y.
struct Embedding {
  std::size_t rows = 0;  // n, target dimension
  std::size_t cols = 0;  // k, source dimension
  std::vector<double> matrix;
  double distortion = 1.0;
  NormSpec source = NormSpec::lp(2.0);
  NormSpec target = NormSpec::lp(2.0);

  Vector apply(std::span<const double> x) const;
  /// E^T y.
  Vector adjoint(std::span<const double> y) const;
  /// Checks shape, full column rank and the distortion inequalities on
  /// `trials` random points and the basis. Throws PreconditionError.
  void audit(int trials = 200, std::uint64_t seed = 11) const;
};

Embedding identity_embedding(const NormSpec& spec, std::size_t n);

/// First r coordinates of R^n, scaled by r^(-1/p); distortion r^(1/p).
Embedding linf_into_lp_embedding(std::size_t r, double p, std::size_t n);

struct LiftResult {
  Vector w;
  double norm = 0.0;      // ||w||_{Y*}
  double residual = 0.0;  // max_i |<E e_i, w> - w_i|
  bool exact = true;      // false when found by subgradient descent
};

/// w' with E^T w' = w of least ||w'||_{Y*}: an exact LP over the dual-ball
/// vertices for polyhedral targets, else Polyak subgradient descent over the
/// affine solution set (10^4 iterations, 5 restarts).
LiftResult lift_dual_vector(const Embedding& emb, std::span<const double> w, std::uint64_t seed = 3);

/// Checks that `copies` disjointly supported vectors of equal norm always
/// sum to norm > growth * (their common norm), on random instances in R^n.
struct DisjointSumReport {
  bool passed = true;
  double worst_ratio = 0.0;  // min over trials of ||sum|| / min ||v_i||
};
DisjointSumReport audit_disjoint_sum(const NormSpec& spec, std::size_t n, std::size_t copies, double growth,
                                     int trials, std::uint64_t seed);

}  // namespace normip
