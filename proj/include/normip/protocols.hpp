#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "normip/norms.hpp"
#include "normip/polytopes.hpp"
#include "normip/rng.hpp"
#include "normip/spaces.hpp"
#include "normip/sparsifiers.hpp"
#include "normip/transcript.hpp"
#include "normip/vector.hpp"

namespace normip {

class ProtocolSpec;

/// Alice sparsifies scale * v and sends the quantized entries; Bob outputs
/// <phi, w> / scale.
struct OneWaySparsify {
  SparsifierSpec sparsifier;
  double scale = 1.0;
};

struct Swap;
struct MaxSplit;
struct HSumCompose;
struct EmbedReduce;

/// Alice sends ids of vertices sampled from a convex decomposition of v.
struct VertexSample {
  Polytope body;
  double epsilon = 0.1;
  double constant = 4.0;
};

/// Immutable protocol tree. Cheap to copy.
class ProtocolSpec {
public:
  using Node = std::variant<OneWaySparsify, Swap, MaxSplit, HSumCompose, EmbedReduce, VertexSample>;

  static ProtocolSpec one_way(SparsifierSpec sparsifier, double scale = 1.0);
  static ProtocolSpec swap(ProtocolSpec inner);
  /// For the norm max(a, b). Bob splits w between the dual balls of a and b.
  static ProtocolSpec max_split(NormSpec a, NormSpec b, ProtocolSpec inner_a, ProtocolSpec inner_b);
  /// `space` must be an h-sum. `inner` holds one protocol per block, or a
  /// single protocol shared by all blocks. Each supported block runs
  /// ceil(repeat_constant * log2(D2 + 2)) times.
  static ProtocolSpec hsum(NormSpec space, SparsifierSpec outer, std::vector<ProtocolSpec> inner,
                           double repeat_constant = 4.0);
  static ProtocolSpec embed(Embedding embedding, ProtocolSpec inner);
  static ProtocolSpec vertex_sample(Polytope body, double eps, double constant = 4.0);

  const Node& node() const;
  std::string describe() const;

private:
  explicit ProtocolSpec(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

struct Swap {
  ProtocolSpec inner;
};

struct MaxSplit {
  NormSpec a;
  NormSpec b;
  ProtocolSpec inner_a;
  ProtocolSpec inner_b;
};

struct HSumCompose {
  NormSpec space;
  SparsifierSpec outer;
  std::vector<ProtocolSpec> inner;
  double repeat_constant = 4.0;
};

struct EmbedReduce {
  Embedding embedding;
  ProtocolSpec inner;
};

inline const ProtocolSpec::Node& ProtocolSpec::node() const { return *node_; }

/// Declared (eps, delta) contract.
struct Accuracy {
  double epsilon = 0.0;
  double delta = 0.0;
};

Accuracy declared_accuracy(const ProtocolSpec& spec);

/// Upper bound on transcript bits for inputs in R^n.
std::size_t declared_cost(const ProtocolSpec& spec, std::size_t n);

/// Party that learns the estimate.
Party output_party(const ProtocolSpec& spec);

/// Number of nonzeros a sparsifier may emit on R^n: min(s, n).
std::size_t message_terms(const SparsifierSpec& s, std::size_t n);

/// ceil(c * log2(d2 + 2)).
std::size_t median_repeats(std::size_t d2, double constant = 4.0);

ProtocolOutcome run_one_way(const OneWaySparsify& spec, std::span<const double> v, std::span<const double> w, Rng& rng);
ProtocolOutcome run_swap(const Swap& spec, std::span<const double> v, std::span<const double> w, Rng& rng);
ProtocolOutcome run_max_split(const MaxSplit& spec, std::span<const double> v, std::span<const double> w, Rng& rng);
ProtocolOutcome run_hsum_compose(const HSumCompose& spec, std::span<const double> v, std::span<const double> w,
                                 Rng& rng);
ProtocolOutcome run_embed_reduce(const EmbedReduce& spec, std::span<const double> v, std::span<const double> w,
                                 Rng& rng);
ProtocolOutcome run_protocol(const ProtocolSpec& spec, std::span<const double> v, std::span<const double> w, Rng& rng);

// --- builders -----------------------------------------------------------

/// l_p sampling for p <= 2, the swapped l_q sampler for p > 2.
ProtocolSpec lp_protocol(Exponent p, double eps, double delta = 1.0 / 3.0);

/// Swap(MaxSplit(l_inf, l_1/k, Swap(l_1), l_1 scaled by 1/k)) for T^(k);
/// each child runs at (eps, delta / 2).
ProtocolSpec topk_protocol(std::size_t k, double eps, double delta = 1.0 / 3.0);

/// h-sum of top-k norms T^(k_i) with an l_p outer norm sampled at gamma.
ProtocolSpec hsum_topk_protocol(Exponent outer_p, std::vector<std::size_t> ks, std::size_t block, double eps,
                                double gamma);

}  // namespace normip
