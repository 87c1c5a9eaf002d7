#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "normip/polytopes.hpp"
#include "normip/vector.hpp"

namespace normip {

class NormSpec;

struct LpNorm {
  Exponent p;
  std::optional<std::size_t> dim;
};

struct TopKNorm {
  std::size_t k = 1;
  std::optional<std::size_t> dim;
};

struct MaxNorm;
struct HSumNorm;
struct ScaledNorm;
struct DualNorm;

struct PolytopeNorm {
  Polytope body;
};

using NormFunction = std::function<double(std::span<const double>)>;

/// Black-box norm. Callbacks must be re-entrant: they are invoked
/// concurrently from parallel trial loops.
struct OracleNorm {
  NormFunction eval;
  std::size_t dim = 0;
  NormFunction dual_eval;  // optional
  std::string name = "oracle";
};

/// Immutable recursive description of a norm on R^n. Cheap to copy.
class NormSpec {
public:
  using Node = std::variant<LpNorm, TopKNorm, MaxNorm, HSumNorm, ScaledNorm, DualNorm, PolytopeNorm, OracleNorm>;

  static NormSpec lp(Exponent p, std::optional<std::size_t> dim = std::nullopt);
  static NormSpec lp(double p, std::optional<std::size_t> dim = std::nullopt) { return lp(Exponent(p), dim); }
  static NormSpec linf(std::optional<std::size_t> dim = std::nullopt) { return lp(Exponent::infinity(), dim); }
  static NormSpec topk(std::size_t k, std::optional<std::size_t> dim = std::nullopt);
  static NormSpec max_of(NormSpec a, NormSpec b);
  /// h-sum: h applied to the vector of block norms. `blocks` gives the
  /// block sizes; when empty each part must have a fixed dimension.
  static NormSpec hsum(NormSpec h, std::vector<NormSpec> parts, std::vector<std::size_t> blocks = {});
  /// ||x|| = factor * ||x||_inner.
  static NormSpec scaled(NormSpec inner, double factor);
  /// Symbolic dual, evaluated by inf-convolution for max-norms.
  static NormSpec dual_of(NormSpec primal);
  static NormSpec polytope(Polytope body);
  /// Unaudited black box; prefer make_symmetric_oracle().
  static NormSpec oracle(NormFunction eval, std::size_t dim, NormFunction dual_eval = {}, std::string name = "oracle");

  const Node& node() const;
  /// Dimension if fixed by the description.
  std::optional<std::size_t> dim() const;
  std::string describe() const;

private:
  explicit NormSpec(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

struct MaxNorm {
  NormSpec a;
  NormSpec b;
};

struct HSumNorm {
  NormSpec outer;
  std::vector<NormSpec> parts;
  std::vector<std::size_t> blocks;
};

struct ScaledNorm {
  NormSpec inner;
  double factor = 1.0;
};

struct DualNorm {
  NormSpec primal;
};

inline const NormSpec::Node& NormSpec::node() const { return *node_; }

// --- closed forms --------------------------------------------------------

/// (sum |v_i|^p)^(1/p), max |v_i| for p = inf.
double lp_norm(std::span<const double> v, Exponent p);
/// Sum of the k largest magnitudes.
double topk_norm(std::span<const double> v, std::size_t k);
/// max(||w||_inf, ||w||_1 / k).
double topk_dual_norm(std::span<const double> w, std::size_t k);
/// Indices of the k largest magnitudes, ties broken by lowest index,
/// in selection order.
std::vector<std::size_t> topk_indices(std::span<const double> v, std::size_t k);

double eval_norm(const NormSpec& spec, std::span<const double> v);

/// Block sizes of an h-sum on R^n. Throws unless spec is an h-sum whose
/// blocks cover n.
std::vector<std::size_t> hsum_block_sizes(const NormSpec& spec, std::size_t n);

/// A dual certificate z: ||z||_{N*} <= 1 and <z, v> = ||v||_N. Throws
/// std::logic_error for variants with no cheap certificate.
Vector norm_subgradient(const NormSpec& spec, std::span<const double> v);

// --- polyhedral descriptions ---------------------------------------------

bool is_polyhedral(const NormSpec& spec);

/// Finite set V with conv(V) = B_N (extra non-extreme points allowed), so
/// sup_{B_N} <x, w> = max_{V} <x, w>. Throws if the count would exceed
/// `cap` or the variant has no explicit vertex description.
std::vector<Vector> ball_vertices(const NormSpec& spec, std::size_t n, std::size_t cap = 2'000'000);

/// Finite set F with ||x||_N = max_{a in F} <a, x>; F = vertices of B_{N*}.
std::vector<Vector> ball_facets(const NormSpec& spec, std::size_t n, std::size_t cap = 2'000'000);

// --- brute-force dual -----------------------------------------------------

struct DualNormValue {
  double value = 0.0;
  /// false when computed by multistart ascent (a certified lower bound).
  bool exact = true;
};

/// sup over the primal unit ball of <v, w>: exact vertex enumeration (or
/// an exact LP over the inequality description for max-norms) when the ball
/// is polyhedral, otherwise ascent from `budget` random starts.
DualNormValue dual_norm_bruteforce(const NormSpec& spec, std::span<const double> w, int budget = 64,
                                   std::uint64_t seed = 1);

// --- audits ----------------------------------------------------------------

struct SymmetryReport {
  bool passed = true;
  std::string failed_check;  // "permutation", "sign", "monotonicity", "normalization"
  Vector counterexample;
  Vector counterexample_image;
  double lhs = 0.0;
  double rhs = 0.0;
};

/// Randomized check of permutation invariance, sign invariance and
/// coordinate-wise monotonicity on vectors of dimension n.
SymmetryReport audit_symmetry(const NormSpec& spec, int trials, std::uint64_t seed, std::size_t n = 0);

/// max_i | ||e_i||_N - 1 |.
double normalization_defect(const NormSpec& spec, std::size_t n);

/// Wraps a black-box norm after auditing symmetry and ||e_1|| = 1.
/// Throws PreconditionError with the counterexample otherwise.
NormSpec make_symmetric_oracle(NormFunction eval, std::size_t dim, NormFunction dual_eval = {},
                               int audit_trials = 200, std::uint64_t seed = 7, std::string name = "oracle");

}  // namespace normip
