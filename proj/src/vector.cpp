#include "normip/vector.hpp"

#include <cmath>
#include <sstream>

namespace normip {

Vector SparseVector::to_dense() const {
  Vector out(dim, 0.0);
  for (const auto& [i, x] : entries) out[i] = x;
  return out;
}

double SparseVector::dot(std::span<const double> w) const {
  if (w.size() != dim) throw PreconditionError("SparseVector::dot: dimension mismatch");
  double acc = 0.0;
  for (const auto& [i, x] : entries) acc += x * w[i];
  return acc;
}

void SparseVector::validate() const {
  for (std::size_t j = 0; j < entries.size(); ++j) {
    if (entries[j].first >= dim) throw std::out_of_range("SparseVector: index out of range");
    if (j > 0 && entries[j - 1].first >= entries[j].first)
      throw std::invalid_argument("SparseVector: indices must be strictly increasing");
    if (!std::isfinite(entries[j].second)) throw std::invalid_argument("SparseVector: non-finite value");
  }
}

Exponent::Exponent(double p) {
  if (std::isinf(p) && p > 0) {
    *this = infinity();
    return;
  }
  if (!(p >= 1.0)) throw PreconditionError("norm exponent must be >= 1");
  value_ = p;
}

std::string Exponent::to_string() const {
  if (infinite_) return "inf";
  std::ostringstream os;
  os << value_;
  return os.str();
}

Exponent dual_exponent(Exponent p) {
  if (p.is_infinite()) return Exponent(1.0);
  if (p.value() == 1.0) return Exponent::infinity();
  return Exponent(p.value() / (p.value() - 1.0));
}

void require_finite(std::span<const double> v, const char* what) {
  for (double x : v)
    if (!std::isfinite(x)) throw std::invalid_argument(std::string(what) + " has a non-finite entry");
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw PreconditionError("dot: dimension mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

Vector scaled(std::span<const double> v, double c) {
  Vector out(v.begin(), v.end());
  for (double& x : out) x *= c;
  return out;
}

Vector add(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw PreconditionError("add: dimension mismatch");
  Vector out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
  return out;
}

Vector subtract(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw PreconditionError("subtract: dimension mismatch");
  Vector out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

Vector unit_vector(std::size_t n, std::size_t i) {
  Vector e(n, 0.0);
  e.at(i) = 1.0;
  return e;
}

}  // namespace normip
