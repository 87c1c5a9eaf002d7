#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace normip {

/// Dense real vector. Entries must be finite; see require_finite().
using Vector = std::vector<double>;

/// Raised when an input violates a documented precondition that can be
/// checked cheaply (norm-ball membership, dimension agreement, ...).
class PreconditionError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Index/value representation with strictly increasing indices.
struct SparseVector {
  std::size_t dim = 0;
  std::vector<std::pair<std::size_t, double>> entries;

  std::size_t nnz() const { return entries.size(); }
  Vector to_dense() const;
  double dot(std::span<const double> w) const;
  /// Throws if indices are unsorted, duplicated or out of range.
  void validate() const;
};

/// Norm exponent in [1, inf]. Infinity is an explicit state rather than a
/// large float so that formulas can branch on it.
class Exponent {
public:
  constexpr Exponent() = default;
  explicit Exponent(double p);
  static constexpr Exponent infinity() {
    Exponent e;
    e.infinite_ = true;
    e.value_ = std::numeric_limits<double>::infinity();
    return e;
  }

  bool is_infinite() const { return infinite_; }
  double value() const { return value_; }
  bool operator==(const Exponent&) const = default;
  std::string to_string() const;

private:
  double value_ = 1.0;
  bool infinite_ = false;
};

/// q with 1/p + 1/q = 1; 1 <-> inf.
Exponent dual_exponent(Exponent p);

void require_finite(std::span<const double> v, const char* what = "vector");

double dot(std::span<const double> a, std::span<const double> b);
Vector scaled(std::span<const double> v, double c);
Vector add(std::span<const double> a, std::span<const double> b);
Vector subtract(std::span<const double> a, std::span<const double> b);
Vector unit_vector(std::size_t n, std::size_t i);

}  // namespace normip
