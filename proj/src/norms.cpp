#include "normip/norms.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <Eigen/Dense>

#include "normip/detail/simplex.hpp"
#include "normip/rng.hpp"
#include "normip/spaces.hpp"

namespace normip {
namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void check_dim(const std::optional<std::size_t>& fixed, std::size_t n, const char* what) {
  if (n == 0) throw PreconditionError(std::string(what) + ": empty vector");
  if (fixed && *fixed != n) throw PreconditionError(std::string(what) + ": dimension mismatch");
}

std::vector<std::size_t> block_sizes(const HSumNorm& h, std::size_t n) {
  std::vector<std::size_t> sizes = h.blocks;
  if (sizes.empty()) {
    for (const auto& p : h.parts) {
      const auto d = p.dim();
      if (!d) throw PreconditionError("hsum: block sizes unknown");
      sizes.push_back(*d);
    }
  }
  if (std::accumulate(sizes.begin(), sizes.end(), std::size_t{0}) != n)
    throw PreconditionError("hsum: block sizes do not add up to the vector length");
  return sizes;
}

Vector block_norms(const HSumNorm& h, std::span<const double> v) {
  const auto sizes = block_sizes(h, v.size());
  Vector q(sizes.size());
  std::size_t off = 0;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    q[i] = eval_norm(h.parts[i], v.subspan(off, sizes[i]));
    off += sizes[i];
  }
  return q;
}

double eval_dual(const NormSpec& primal, std::span<const double> w) {
  return std::visit(
      overloaded{
          [&](const MaxNorm& m) { return inf_convolution_norm(m.a, m.b, w); },
          [&](const DualNorm& d) { return eval_norm(d.primal, w); },
          [&](const OracleNorm& o) {
            if (!o.dual_eval) throw std::logic_error("dual of an oracle norm needs a dual oracle");
            check_dim(o.dim, w.size(), "oracle dual");
            return o.dual_eval(w);
          },
          [&](const auto&) { return eval_norm(dual_spec(primal), w); },
      },
      primal.node());
}

double sgn(double x) { return x > 0 ? 1.0 : (x < 0 ? -1.0 : 0.0); }

std::vector<Vector> sign_vectors(std::size_t n, double scale, std::size_t cap) {
  if (n >= 63 || (std::size_t{1} << n) > cap) throw PreconditionError("ball description exceeds the enumeration cap");
  std::vector<Vector> out;
  out.reserve(std::size_t{1} << n);
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
    Vector v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = (mask >> i) & 1U ? -scale : scale;
    out.push_back(std::move(v));
  }
  return out;
}

std::vector<Vector> signed_units(std::size_t n, double scale) {
  std::vector<Vector> out;
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back(scaled(unit_vector(n, i), scale));
    out.push_back(scaled(unit_vector(n, i), -scale));
  }
  return out;
}

double binomial(std::size_t n, std::size_t k) {
  double r = 1.0;
  for (std::size_t i = 1; i <= k; ++i) r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
  return r;
}

// Vectors with exactly k entries equal to +-1.
std::vector<Vector> k_sparse_signs(std::size_t n, std::size_t k, std::size_t cap) {
  if (binomial(n, k) * std::ldexp(1.0, static_cast<int>(k)) > static_cast<double>(cap))
    throw PreconditionError("ball description exceeds the enumeration cap");
  std::vector<Vector> out;
  std::vector<std::size_t> idx(k);
  std::iota(idx.begin(), idx.end(), 0);
  while (true) {
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << k); ++mask) {
      Vector v(n, 0.0);
      for (std::size_t r = 0; r < k; ++r) v[idx[r]] = (mask >> r) & 1U ? -1.0 : 1.0;
      out.push_back(std::move(v));
    }
    std::size_t j = k;
    while (j > 0 && idx[j - 1] == n - k + j - 1) --j;
    if (j == 0) break;
    ++idx[j - 1];
    for (std::size_t r = j; r < k; ++r) idx[r] = idx[r - 1] + 1;
  }
  return out;
}

// max <x, w> over {x : |<a, x>| <= 1 for a in facets}, solved as its dual
// min sum mu s.t. sum mu_a (+-a) = w, mu >= 0: n rows instead of |facets|.
double lp_over_facets(const std::vector<Vector>& facets, std::span<const double> w) {
  const auto n = static_cast<long>(w.size());
  const auto m = static_cast<long>(facets.size());
  Eigen::MatrixXd A(n, 2 * m);
  for (long i = 0; i < m; ++i)
    for (long j = 0; j < n; ++j) {
      const double a = facets[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
      A(j, i) = a;
      A(j, m + i) = -a;
    }
  Eigen::VectorXd b(n);
  for (long j = 0; j < n; ++j) b(j) = w[static_cast<std::size_t>(j)];
  const auto res = lp::minimize(A, b, Eigen::VectorXd::Ones(2 * m));
  if (res.status == lp::Status::infeasible) return std::numeric_limits<double>::infinity();
  if (res.status != lp::Status::optimal) throw std::runtime_error("dual norm LP failed");
  return res.objective;
}

std::vector<Vector> closed_under_negation(std::vector<Vector> vs) {
  const std::size_t m = vs.size();
  for (std::size_t i = 0; i < m; ++i) vs.push_back(scaled(vs[i], -1.0));
  return vs;
}

double ascent_dual(const NormSpec& spec, std::span<const double> w, int budget, std::uint64_t seed) {
  const std::size_t n = w.size();
  Rng rng(seed);
  auto ratio = [&](const Vector& x) {
    const double nx = eval_norm(spec, x);
    return nx > 0.0 ? dot(x, w) / nx : -std::numeric_limits<double>::infinity();
  };
  double best = 0.0;
  for (int s = 0; s < std::max(budget, 1); ++s) {
    Vector x(n);
    if (s == 0) {
      x.assign(w.begin(), w.end());
    } else if (s == 1) {
      for (std::size_t i = 0; i < n; ++i) x[i] = sgn(w[i]);
    } else {
      for (auto& xi : x) xi = standard_normal(rng);
    }
    double f = ratio(x);
    if (!std::isfinite(f)) continue;
    double step = 0.5;
    for (int it = 0; it < 400 && step > 1e-12; ++it) {
      // Finite-difference gradient of the homogeneous ratio.
      const double nx = eval_norm(spec, x);
      Vector g(n);
      for (std::size_t i = 0; i < n; ++i) {
        Vector y = x;
        const double h = 1e-7 * std::max(1.0, nx);
        y[i] += h;
        g[i] = (ratio(y) - f) / h;
      }
      const double gn = lp_norm(g, Exponent(2.0));
      if (gn == 0.0) break;
      Vector y(n);
      for (std::size_t i = 0; i < n; ++i) y[i] = x[i] + step * nx * g[i] / gn;
      const double fy = ratio(y);
      if (fy > f) {
        x = std::move(y);
        f = fy;
        step *= 1.5;
      } else {
        step *= 0.5;
      }
    }
    best = std::max(best, f);
  }
  return best;
}

}  // namespace

NormSpec NormSpec::lp(Exponent p, std::optional<std::size_t> dim) {
  if (dim && *dim == 0) throw PreconditionError("lp: zero dimension");
  return NormSpec(std::make_shared<const Node>(LpNorm{p, dim}));
}

NormSpec NormSpec::topk(std::size_t k, std::optional<std::size_t> dim) {
  if (k == 0) throw PreconditionError("topk: k must be at least 1");
  if (dim && k > *dim) throw PreconditionError("topk: k exceeds the dimension");
  return NormSpec(std::make_shared<const Node>(TopKNorm{k, dim}));
}

NormSpec NormSpec::max_of(NormSpec a, NormSpec b) {
  const auto da = a.dim();
  const auto db = b.dim();
  if (da && db && *da != *db) throw PreconditionError("max: operands differ in dimension");
  return NormSpec(std::make_shared<const Node>(MaxNorm{std::move(a), std::move(b)}));
}

NormSpec NormSpec::hsum(NormSpec h, std::vector<NormSpec> parts, std::vector<std::size_t> blocks) {
  if (parts.empty()) throw PreconditionError("hsum: no parts");
  if (const auto dh = h.dim(); dh && *dh != parts.size()) throw PreconditionError("hsum: outer dimension mismatch");
  if (!blocks.empty()) {
    if (blocks.size() != parts.size()) throw PreconditionError("hsum: one block size per part");
    for (std::size_t i = 0; i < parts.size(); ++i) {
      if (blocks[i] == 0) throw PreconditionError("hsum: empty block");
      if (const auto d = parts[i].dim(); d && *d != blocks[i]) throw PreconditionError("hsum: block size mismatch");
    }
  } else {
    for (const auto& p : parts)
      if (!p.dim()) throw PreconditionError("hsum: part dimensions must be fixed or blocks given");
  }
  return NormSpec(std::make_shared<const Node>(HSumNorm{std::move(h), std::move(parts), std::move(blocks)}));
}

NormSpec NormSpec::scaled(NormSpec inner, double factor) {
  if (!(factor > 0.0) || !std::isfinite(factor)) throw PreconditionError("scaled: factor must be positive");
  return NormSpec(std::make_shared<const Node>(ScaledNorm{std::move(inner), factor}));
}

NormSpec NormSpec::dual_of(NormSpec primal) {
  return NormSpec(std::make_shared<const Node>(DualNorm{std::move(primal)}));
}

NormSpec NormSpec::polytope(Polytope body) {
  return NormSpec(std::make_shared<const Node>(PolytopeNorm{std::move(body)}));
}

NormSpec NormSpec::oracle(NormFunction eval, std::size_t dim, NormFunction dual_eval, std::string name) {
  if (!eval) throw PreconditionError("oracle: empty callback");
  if (dim == 0) throw PreconditionError("oracle: zero dimension");
  return NormSpec(std::make_shared<const Node>(OracleNorm{std::move(eval), dim, std::move(dual_eval), std::move(name)}));
}

std::optional<std::size_t> NormSpec::dim() const {
  return std::visit(overloaded{
                        [](const LpNorm& n) { return n.dim; },
                        [](const TopKNorm& n) { return n.dim; },
                        [](const MaxNorm& n) { return n.a.dim() ? n.a.dim() : n.b.dim(); },
                        [](const HSumNorm& n) -> std::optional<std::size_t> {
                          if (!n.blocks.empty()) return std::accumulate(n.blocks.begin(), n.blocks.end(), std::size_t{0});
                          std::size_t s = 0;
                          for (const auto& p : n.parts) s += *p.dim();
                          return s;
                        },
                        [](const ScaledNorm& n) { return n.inner.dim(); },
                        [](const DualNorm& n) { return n.primal.dim(); },
                        [](const PolytopeNorm& n) -> std::optional<std::size_t> { return n.body.dim(); },
                        [](const OracleNorm& n) -> std::optional<std::size_t> { return n.dim; },
                    },
                    node());
}

std::string NormSpec::describe() const {
  std::ostringstream os;
  os.precision(17);
  std::visit(overloaded{
                 [&](const LpNorm& n) { os << "lp(" << n.p.to_string() << ")"; },
                 [&](const TopKNorm& n) { os << "topk(" << n.k << ")"; },
                 [&](const MaxNorm& n) { os << "max(" << n.a.describe() << "," << n.b.describe() << ")"; },
                 [&](const HSumNorm& n) {
                   os << "hsum(" << n.outer.describe() << ";";
                   for (std::size_t i = 0; i < n.parts.size(); ++i) os << (i ? "," : "") << n.parts[i].describe();
                   os << ")";
                 },
                 [&](const ScaledNorm& n) { os << "scaled(" << n.factor << "," << n.inner.describe() << ")"; },
                 [&](const DualNorm& n) { os << "dual(" << n.primal.describe() << ")"; },
                 [&](const PolytopeNorm& n) {
                   os << "polytope(n=" << n.body.dim() << ",h=" << n.body.hrep().size() << ",v=" << n.body.vrep().size()
                      << ")";
                 },
                 [&](const OracleNorm& n) { os << "oracle(" << n.name << ")"; },
             },
             node());
  return os.str();
}

double lp_norm(std::span<const double> v, Exponent p) {
  if (p.is_infinite()) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
  }
  if (p.value() == 1.0) {
    double s = 0.0;
    for (double x : v) s += std::abs(x);
    return s;
  }
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  if (m == 0.0) return 0.0;
  double s = 0.0;
  if (p.value() == 2.0) {
    for (double x : v) s += (x / m) * (x / m);
    return m * std::sqrt(s);
  }
  for (double x : v) s += std::pow(std::abs(x) / m, p.value());
  return m * std::pow(s, 1.0 / p.value());
}

std::vector<std::size_t> topk_indices(std::span<const double> v, std::size_t k) {
  if (k == 0 || k > v.size()) throw PreconditionError("topk: k out of range");
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  const auto cmp = [&](std::size_t a, std::size_t b) {
    const double x = std::abs(v[a]);
    const double y = std::abs(v[b]);
    return x > y || (x == y && a < b);
  };
  std::partial_sort(idx.begin(), idx.begin() + static_cast<long>(k), idx.end(), cmp);
  idx.resize(k);
  return idx;
}

double topk_norm(std::span<const double> v, std::size_t k) {
  auto idx = topk_indices(v, k);
  // Sum in index order so that k = n reproduces the l1 sum bit for bit.
  std::sort(idx.begin(), idx.end());
  double s = 0.0;
  for (auto i : idx) s += std::abs(v[i]);
  return s;
}

double topk_dual_norm(std::span<const double> w, std::size_t k) {
  if (k == 0 || k > w.size()) throw PreconditionError("topk: k out of range");
  return std::max(lp_norm(w, Exponent::infinity()), lp_norm(w, Exponent(1.0)) / static_cast<double>(k));
}

std::vector<std::size_t> hsum_block_sizes(const NormSpec& spec, std::size_t n) {
  const auto* h = std::get_if<HSumNorm>(&spec.node());
  if (!h) throw PreconditionError("hsum_block_sizes: not an h-sum");
  return block_sizes(*h, n);
}

double eval_norm(const NormSpec& spec, std::span<const double> v) {
  return std::visit(overloaded{
                        [&](const LpNorm& n) {
                          check_dim(n.dim, v.size(), "lp");
                          return lp_norm(v, n.p);
                        },
                        [&](const TopKNorm& n) {
                          check_dim(n.dim, v.size(), "topk");
                          return topk_norm(v, n.k);
                        },
                        [&](const MaxNorm& n) { return std::max(eval_norm(n.a, v), eval_norm(n.b, v)); },
                        [&](const HSumNorm& n) { return eval_norm(n.outer, block_norms(n, v)); },
                        [&](const ScaledNorm& n) { return n.factor * eval_norm(n.inner, v); },
                        [&](const DualNorm& n) { return eval_dual(n.primal, v); },
                        [&](const PolytopeNorm& n) { return gauge_norm(n.body, v); },
                        [&](const OracleNorm& n) {
                          check_dim(n.dim, v.size(), "oracle");
                          return n.eval(v);
                        },
                    },
                    spec.node());
}

Vector norm_subgradient(const NormSpec& spec, std::span<const double> v) {
  const std::size_t n = v.size();
  return std::visit(
      overloaded{
          [&](const LpNorm& l) {
            check_dim(l.dim, n, "lp");
            Vector z(n, 0.0);
            const double nv = lp_norm(v, l.p);
            if (nv == 0.0) return z;
            if (l.p.is_infinite()) {
              std::size_t best = 0;
              for (std::size_t i = 1; i < n; ++i)
                if (std::abs(v[i]) > std::abs(v[best])) best = i;
              z[best] = sgn(v[best]);
            } else if (l.p.value() == 1.0) {
              for (std::size_t i = 0; i < n; ++i) z[i] = sgn(v[i]);
            } else {
              for (std::size_t i = 0; i < n; ++i) z[i] = sgn(v[i]) * std::pow(std::abs(v[i]) / nv, l.p.value() - 1.0);
            }
            return z;
          },
          [&](const TopKNorm& t) {
            check_dim(t.dim, n, "topk");
            Vector z(n, 0.0);
            for (auto i : topk_indices(v, t.k)) z[i] = sgn(v[i]);
            return z;
          },
          [&](const MaxNorm& m) {
            return eval_norm(m.a, v) >= eval_norm(m.b, v) ? norm_subgradient(m.a, v) : norm_subgradient(m.b, v);
          },
          [&](const HSumNorm& h) {
            const auto sizes = block_sizes(h, n);
            const Vector q = block_norms(h, v);
            const Vector y = norm_subgradient(h.outer, q);
            Vector z(n, 0.0);
            std::size_t off = 0;
            for (std::size_t i = 0; i < sizes.size(); ++i) {
              const Vector zi = norm_subgradient(h.parts[i], v.subspan(off, sizes[i]));
              for (std::size_t j = 0; j < sizes[i]; ++j) z[off + j] = y[i] * zi[j];
              off += sizes[i];
            }
            return z;
          },
          [&](const ScaledNorm& s) { return normip::scaled(norm_subgradient(s.inner, v), s.factor); },
          [&](const DualNorm& d) -> Vector {
            const NormSpec dual = dual_spec(d.primal);
            if (std::holds_alternative<DualNorm>(dual.node()))
              throw std::logic_error("norm_subgradient: no certificate for this dual norm");
            return norm_subgradient(dual, v);
          },
          [&](const PolytopeNorm& p) -> Vector {
            const Polytope P = p.body.with_inequalities();
            Vector z(n, 0.0);
            std::size_t best = 0;
            double bv = -1.0;
            for (std::size_t i = 0; i < P.hrep().size(); ++i) {
              const double a = std::abs(dot(P.hrep()[i], v));
              if (a > bv) {
                bv = a;
                best = i;
              }
            }
            if (bv <= 0.0) return z;
            return normip::scaled(P.hrep()[best], sgn(dot(P.hrep()[best], v)));
          },
          [&](const OracleNorm&) -> Vector { throw std::logic_error("norm_subgradient: oracle norms have no certificate"); },
      },
      spec.node());
}

bool is_polyhedral(const NormSpec& spec) {
  return std::visit(overloaded{
                        [](const LpNorm& n) { return n.p.is_infinite() || n.p.value() == 1.0; },
                        [](const TopKNorm&) { return true; },
                        [](const MaxNorm& n) { return is_polyhedral(n.a) && is_polyhedral(n.b); },
                        [](const HSumNorm&) { return false; },
                        [](const ScaledNorm& n) { return is_polyhedral(n.inner); },
                        [](const DualNorm& n) { return is_polyhedral(n.primal); },
                        [](const PolytopeNorm&) { return true; },
                        [](const OracleNorm&) { return false; },
                    },
                    spec.node());
}

std::vector<Vector> ball_vertices(const NormSpec& spec, std::size_t n, std::size_t cap) {
  return std::visit(
      overloaded{
          [&](const LpNorm& l) {
            check_dim(l.dim, n, "lp");
            if (l.p.is_infinite()) return sign_vectors(n, 1.0, cap);
            if (l.p.value() == 1.0) return signed_units(n, 1.0);
            throw PreconditionError("ball_vertices: lp ball is not polyhedral");
          },
          [&](const TopKNorm& t) {
            check_dim(t.dim, n, "topk");
            if (t.k > n) throw PreconditionError("topk: k out of range");
            // conv(+-e_i, sign vectors / k); the units are redundant when k = 1.
            auto out = t.k > 1 ? signed_units(n, 1.0) : std::vector<Vector>{};
            auto corners = sign_vectors(n, 1.0 / static_cast<double>(t.k), cap);
            out.insert(out.end(), corners.begin(), corners.end());
            return out;
          },
          [&](const ScaledNorm& s) {
            auto out = ball_vertices(s.inner, n, cap);
            for (auto& x : out) x = normip::scaled(x, 1.0 / s.factor);
            return out;
          },
          [&](const DualNorm& d) { return ball_facets(d.primal, n, cap); },
          [&](const PolytopeNorm& p) {
            if (p.body.dim() != n) throw PreconditionError("polytope: dimension mismatch");
            return p.body.with_vertices().vrep();
          },
          [&](const MaxNorm&) {
            // B = B_a intersected with B_b: enumerate from the joint facets.
            auto facets = ball_facets(spec, n, cap);
            if (n > 8) throw PreconditionError("ball_vertices: intersection of balls needs n <= 8");
            return enumerate_vertices(Polytope::from_hrep(std::move(facets)));
          },
          [&](const auto&) -> std::vector<Vector> {
            throw PreconditionError("ball_vertices: no explicit vertex description");
          },
      },
      spec.node());
}

std::vector<Vector> ball_facets(const NormSpec& spec, std::size_t n, std::size_t cap) {
  return std::visit(
      overloaded{
          [&](const LpNorm& l) {
            check_dim(l.dim, n, "lp");
            if (l.p.is_infinite()) return signed_units(n, 1.0);
            if (l.p.value() == 1.0) return sign_vectors(n, 1.0, cap);
            throw PreconditionError("ball_facets: lp ball is not polyhedral");
          },
          [&](const TopKNorm& t) {
            check_dim(t.dim, n, "topk");
            if (t.k > n) throw PreconditionError("topk: k out of range");
            return k_sparse_signs(n, t.k, cap);
          },
          [&](const ScaledNorm& s) {
            auto out = ball_facets(s.inner, n, cap);
            for (auto& x : out) x = normip::scaled(x, s.factor);
            return out;
          },
          [&](const DualNorm& d) { return ball_vertices(d.primal, n, cap); },
          [&](const PolytopeNorm& p) {
            if (p.body.dim() != n) throw PreconditionError("polytope: dimension mismatch");
            return closed_under_negation(p.body.with_inequalities().hrep());
          },
          [&](const MaxNorm& m) {
            auto out = ball_facets(m.a, n, cap);
            auto more = ball_facets(m.b, n, cap);
            if (out.size() + more.size() > cap) throw PreconditionError("ball description exceeds the enumeration cap");
            out.insert(out.end(), more.begin(), more.end());
            return out;
          },
          [&](const auto&) -> std::vector<Vector> {
            throw PreconditionError("ball_facets: no explicit facet description");
          },
      },
      spec.node());
}

DualNormValue dual_norm_bruteforce(const NormSpec& spec, std::span<const double> w, int budget, std::uint64_t seed) {
  require_finite(w, "dual_norm_bruteforce input");
  const std::size_t n = w.size();
  if (is_polyhedral(spec)) {
    // Balls of max-norms are intersections; their vertices are expensive,
    // so those go straight to the LP over the joint facets.
    const NormSpec* core = &spec;
    while (const auto* s = std::get_if<ScaledNorm>(&core->node())) core = &s->inner;
    if (!std::holds_alternative<MaxNorm>(core->node())) {
      try {
        const auto verts = ball_vertices(spec, n);
        double best = 0.0;
        for (const auto& x : verts) best = std::max(best, dot(x, w));
        return {best, true};
      } catch (const PreconditionError&) {
      }
    }
    try {
      return {lp_over_facets(ball_facets(spec, n), w), true};
    } catch (const PreconditionError&) {
    }
  }
  return {ascent_dual(spec, w, budget, seed), false};
}

SymmetryReport audit_symmetry(const NormSpec& spec, int trials, std::uint64_t seed, std::size_t n) {
  if (n == 0) {
    const auto d = spec.dim();
    if (!d) throw PreconditionError("audit_symmetry: dimension required");
    n = *d;
  }
  Rng rng(seed);
  SymmetryReport rep;
  const auto fail = [&](const char* check, Vector v, Vector img, double lhs, double rhs) {
    rep.passed = false;
    rep.failed_check = check;
    rep.counterexample = std::move(v);
    rep.counterexample_image = std::move(img);
    rep.lhs = lhs;
    rep.rhs = rhs;
  };
  for (int t = 0; t < trials && rep.passed; ++t) {
    Vector v(n);
    for (auto& x : v) x = standard_normal(rng);
    const double nv = eval_norm(spec, v);
    const double tol = 1e-9 * std::max(1.0, nv);

    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    for (std::size_t i = n; i > 1; --i) std::swap(perm[i - 1], perm[uniform_index(rng, i)]);
    Vector pv(n);
    for (std::size_t i = 0; i < n; ++i) pv[i] = v[perm[i]];
    if (const double np = eval_norm(spec, pv); std::abs(np - nv) > tol) {
      fail("permutation", v, pv, nv, np);
      break;
    }

    Vector sv = v;
    for (auto& x : sv)
      if (rng() & 1U) x = -x;
    if (const double ns = eval_norm(spec, sv); std::abs(ns - nv) > tol) {
      fail("sign", v, sv, nv, ns);
      break;
    }

    Vector shrunk = v;
    for (auto& x : shrunk) x *= uniform01(rng);
    if (const double nsh = eval_norm(spec, shrunk); nsh > nv + tol) {
      fail("monotonicity", v, shrunk, nv, nsh);
      break;
    }
  }
  return rep;
}

double normalization_defect(const NormSpec& spec, std::size_t n) {
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i) worst = std::max(worst, std::abs(eval_norm(spec, unit_vector(n, i)) - 1.0));
  return worst;
}

NormSpec make_symmetric_oracle(NormFunction eval, std::size_t dim, NormFunction dual_eval, int audit_trials,
                               std::uint64_t seed, std::string name) {
  NormSpec spec = NormSpec::oracle(std::move(eval), dim, std::move(dual_eval), std::move(name));
  const auto rep = audit_symmetry(spec, audit_trials, seed, dim);
  if (!rep.passed) {
    std::ostringstream os;
    os << "oracle failed the " << rep.failed_check << " audit: norm " << rep.lhs << " became " << rep.rhs;
    throw PreconditionError(os.str());
  }
  if (const double d = normalization_defect(spec, dim); d > 1e-9) {
    std::ostringstream os;
    os << "oracle is not normalized: | ||e_i|| - 1 | = " << d;
    throw PreconditionError(os.str());
  }
  return spec;
}

}  // namespace normip
