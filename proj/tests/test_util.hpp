#pragma once

#include <cmath>
#include <span>

#include "normip/rng.hpp"
#include "normip/vector.hpp"

namespace normip::test {

inline Vector gaussian(std::size_t n, Rng& rng) {
  Vector v(n);
  for (auto& x : v) x = standard_normal(rng);
  return v;
}

inline double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace normip::test
