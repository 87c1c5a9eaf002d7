#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "normip/rng.hpp"
#include "normip/transcript.hpp"
#include "normip/vector.hpp"

namespace normip {

/// Origin-symmetric polytope. The H-representation stores one row A_i per
/// symmetric inequality pair, meaning P = {x : -1 <= <A_i, x> <= 1}. The
/// V-representation is a vertex list closed under negation.
class Polytope {
public:
  static Polytope from_hrep(std::vector<Vector> rows);
  /// Rows with general right-hand sides |<A_i,x>| <= b_i, rescaled to b = 1.
  static Polytope from_hrep(std::vector<Vector> rows, std::span<const double> rhs);
  static Polytope from_vrep(std::vector<Vector> vertices);
  /// Both representations; audited for consistency.
  static Polytope from_both(std::vector<Vector> rows, std::vector<Vector> vertices);

  static Polytope cube(std::size_t n);            // hrep A = I
  static Polytope cross_polytope(std::size_t n);  // vrep {+-e_i}

  std::size_t dim() const { return dim_; }
  bool has_hrep() const { return has_hrep_; }
  bool has_vrep() const { return has_vrep_; }
  const std::vector<Vector>& hrep() const { return hrep_; }
  const std::vector<Vector>& vrep() const { return vrep_; }

  /// Copy with the vertex list filled in from the inequalities if missing.
  Polytope with_vertices() const;
  /// Copy with inequalities filled in (from the dual's vertices) if missing.
  Polytope with_inequalities() const;

private:
  friend Polytope dual_polytope(const Polytope& P);

  std::size_t dim_ = 0;
  bool has_hrep_ = false;
  bool has_vrep_ = false;
  std::vector<Vector> hrep_;
  std::vector<Vector> vrep_;
};

/// Raised by convex_decompose when the point lies outside P.
class InfeasibleError : public PreconditionError {
public:
  InfeasibleError(const std::string& what, double margin) : PreconditionError(what), margin_(margin) {}
  double margin() const { return margin_; }

private:
  double margin_;
};

/// Minkowski functional inf{t : x/t in P}. Throws std::domain_error when x
/// is outside the span of a degenerate V-representation.
double gauge_norm(const Polytope& P, std::span<const double> x);

/// P* = conv{+-A_i}; swaps the two representations.
Polytope dual_polytope(const Polytope& P);

/// Vertices of an H-polytope by exhaustive basis enumeration (n <= 8).
std::vector<Vector> enumerate_vertices(const Polytope& P);

/// Vertex-by-inequality slack 1 - <A_i, v>.
struct SlackMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> entries;  // row-major

  double at(std::size_t r, std::size_t c) const { return entries[r * cols + c]; }
  /// Header row names the inequalities, first column names the vertices.
  std::string to_csv() const;
};

SlackMatrix slack_matrix(const Polytope& P);

/// Sparse convex weights over P.vrep(): (vertex index, lambda).
struct ConvexCombination {
  std::vector<std::pair<std::size_t, double>> weights;
};

/// lambda >= 0, sum = 1, sum lambda_i V_i = v. At most dim+1 active vertices.
ConvexCombination convex_decompose(const Polytope& P, std::span<const double> v);

/// Largest violation among the three decomposition postconditions.
double decomposition_residual(const Polytope& P, const ConvexCombination& c, std::span<const double> v);

std::size_t vertex_sample_count(double eps, double constant = 4.0);

/// One-way protocol: Alice samples vertex names from a convex decomposition
/// of v and sends them; Bob averages <vertex, w>.
ProtocolOutcome vertex_sampling_protocol(const Polytope& P, std::span<const double> v, std::span<const double> w,
                                         double eps, Rng& rng, double constant = 4.0);
/// Same, reusing a decomposition of v computed by convex_decompose.
ProtocolOutcome vertex_sampling_protocol(const Polytope& P, const ConvexCombination& decomposition,
                                         std::span<const double> w, double eps, Rng& rng, double constant = 4.0);

using InnerProductRunner = std::function<ProtocolOutcome(std::span<const double>, std::span<const double>, Rng&)>;

struct SlackEstimate {
  double value = 0.0;
  double median_inner_product = 0.0;
  std::size_t repetitions = 0;
  std::size_t bits = 0;
};

std::size_t slack_repetitions(double eps);

/// Estimates S_P(vertex, inequality) as clamp(1 - median, 0, 2) over
/// ceil(4 log2(1/eps)) runs of an inner-product protocol. The default runner
/// is vertex_sampling_protocol at accuracy eps.
SlackEstimate slack_in_expectation(const Polytope& P, std::size_t vertex, std::size_t inequality, double eps,
                                   Rng& rng, const InnerProductRunner& runner = {});

}  // namespace normip
