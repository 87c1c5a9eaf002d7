#include "normip/spaces.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <Eigen/Dense>

#include "normip/detail/simplex.hpp"
#include "normip/rng.hpp"

namespace normip {
namespace {

bool is_zero(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; });
}

bool is_lp(const NormSpec& s, double p) {
  const auto* l = std::get_if<LpNorm>(&s.node());
  if (!l) return false;
  return std::isinf(p) ? l->p.is_infinite() : (!l->p.is_infinite() && l->p.value() == p);
}

// k when s is l1 scaled by exactly 1/k for an integer k >= 1.
std::optional<std::size_t> l1_over_k(const NormSpec& s) {
  const auto* sc = std::get_if<ScaledNorm>(&s.node());
  if (!sc || !is_lp(sc->inner, 1.0)) return std::nullopt;
  const double k = std::round(1.0 / sc->factor);
  if (k < 1.0 || 1.0 / k != sc->factor) return std::nullopt;
  return static_cast<std::size_t>(k);
}

std::optional<std::size_t> common_dim(const NormSpec& a, const NormSpec& b) { return a.dim() ? a.dim() : b.dim(); }

double dual_value(const NormSpec& spec, std::span<const double> x) {
  if (is_zero(x)) return 0.0;
  return eval_norm(NormSpec::dual_of(spec), x);
}

MaxDualSplit finish_split(std::span<const double> w, Vector w2, const NormSpec& a, const NormSpec& b) {
  MaxDualSplit s;
  s.w1 = subtract(w, w2);
  s.w2 = std::move(w2);
  s.budget1 = dual_value(a, s.w1);
  s.budget2 = dual_value(b, s.w2);
  return s;
}

std::optional<MaxDualSplit> polyhedral_split(std::span<const double> w, const NormSpec& a, const NormSpec& b) {
  const std::size_t n = w.size();
  std::vector<Vector> fa;
  std::vector<Vector> fb;
  try {
    fa = ball_facets(a, n, 4096);
    fb = ball_facets(b, n, 4096);
  } catch (const PreconditionError&) {
    return std::nullopt;
  }
  const auto ma = static_cast<long>(fa.size());
  const auto mb = static_cast<long>(fb.size());
  Eigen::MatrixXd A(static_cast<long>(n), ma + mb);
  for (long j = 0; j < ma + mb; ++j) {
    const Vector& col = j < ma ? fa[static_cast<std::size_t>(j)] : fb[static_cast<std::size_t>(j - ma)];
    for (std::size_t i = 0; i < n; ++i) A(static_cast<long>(i), j) = col[i];
  }
  const Eigen::VectorXd rhs = Eigen::Map<const Eigen::VectorXd>(w.data(), static_cast<long>(n));
  const auto res = lp::minimize(A, rhs, Eigen::VectorXd::Ones(ma + mb));
  if (res.status != lp::Status::optimal) return std::nullopt;
  Vector w2(n, 0.0);
  for (long j = 0; j < mb; ++j) {
    const double mu = res.x(ma + j);
    if (mu == 0.0) continue;
    for (std::size_t i = 0; i < n; ++i) w2[i] += mu * fb[static_cast<std::size_t>(j)][i];
  }
  return finish_split(w, std::move(w2), a, b);
}

// Frank-Wolfe projection of u onto conv(B_{a*} u B_{b*}); returns the part
// of the iterate built from b-atoms and the squared distance.
std::pair<Vector, double> fw_project(std::span<const double> u, const NormSpec& a, const NormSpec& b, int iters) {
  const std::size_t n = u.size();
  Vector xa(n, 0.0);
  Vector xb(n, 0.0);
  Vector x(n, 0.0);
  double dist2 = 0.0;
  for (int it = 0; it < iters; ++it) {
    Vector d = subtract(x, u);
    dist2 = dot(d, d);
    if (dist2 <= 1e-30) break;
    const Vector neg = scaled(d, -1.0);
    const bool use_a = eval_norm(a, neg) >= eval_norm(b, neg);
    const Vector s = norm_subgradient(use_a ? a : b, neg);
    const Vector xs = subtract(x, s);
    const double denom = dot(xs, xs);
    if (denom <= 0.0) break;
    const double gamma = std::clamp(dot(d, xs) / denom, 0.0, 1.0);
    if (gamma == 0.0) break;
    for (std::size_t i = 0; i < n; ++i) {
      xa[i] *= 1.0 - gamma;
      xb[i] *= 1.0 - gamma;
      (use_a ? xa : xb)[i] += gamma * s[i];
      x[i] = xa[i] + xb[i];
    }
  }
  const Vector d = subtract(x, u);
  return {xb, dot(d, d)};
}

MaxDualSplit generic_split(std::span<const double> w, const NormSpec& a, const NormSpec& b, int budget) {
  const std::size_t n = w.size();
  // Everything on one side is always a valid split.
  MaxDualSplit best = finish_split(w, Vector(n, 0.0), a, b);
  if (MaxDualSplit alt = finish_split(w, Vector(w.begin(), w.end()), a, b);
      alt.budget1 + alt.budget2 < best.budget1 + best.budget2)
    best = std::move(alt);
  double hi = best.budget1 + best.budget2;
  double lo = 0.0;
  const double wn = std::sqrt(dot(w, w));
  for (int step = 0; step < 40 && hi - lo > 1e-12 * std::max(1.0, hi); ++step) {
    const double t = 0.5 * (lo + hi);
    const Vector u = scaled(w, 1.0 / t);
    auto [xb, dist2] = fw_project(u, a, b, budget);
    MaxDualSplit cand = finish_split(w, scaled(xb, t), a, b);
    if (cand.budget1 + cand.budget2 < best.budget1 + best.budget2) best = std::move(cand);
    if (std::sqrt(dist2) * t <= 1e-7 * wn)
      hi = t;
    else
      lo = t;
  }
  return best;
}

}  // namespace

NormSpec dual_spec(const NormSpec& spec) {
  return std::visit(
      [&](const auto& node) -> NormSpec {
        using T = std::decay_t<decltype(node)>;
        if constexpr (std::is_same_v<T, LpNorm>) {
          return NormSpec::lp(dual_exponent(node.p), node.dim);
        } else if constexpr (std::is_same_v<T, TopKNorm>) {
          return NormSpec::max_of(NormSpec::linf(node.dim),
                                  NormSpec::scaled(NormSpec::lp(1.0, node.dim), 1.0 / static_cast<double>(node.k)));
        } else if constexpr (std::is_same_v<T, MaxNorm>) {
          const auto dim = common_dim(node.a, node.b);
          if (is_lp(node.a, INFINITY))
            if (auto k = l1_over_k(node.b); k && (!dim || *k <= *dim)) return NormSpec::topk(*k, dim);
          if (is_lp(node.b, INFINITY))
            if (auto k = l1_over_k(node.a); k && (!dim || *k <= *dim)) return NormSpec::topk(*k, dim);
          return NormSpec::dual_of(spec);
        } else if constexpr (std::is_same_v<T, HSumNorm>) {
          std::vector<NormSpec> parts;
          for (const auto& p : node.parts) parts.push_back(dual_spec(p));
          return NormSpec::hsum(dual_spec(node.outer), std::move(parts), node.blocks);
        } else if constexpr (std::is_same_v<T, ScaledNorm>) {
          return NormSpec::scaled(dual_spec(node.inner), 1.0 / node.factor);
        } else if constexpr (std::is_same_v<T, DualNorm>) {
          return node.primal;
        } else if constexpr (std::is_same_v<T, PolytopeNorm>) {
          return NormSpec::polytope(dual_polytope(node.body));
        } else {
          if (!node.dual_eval) throw PreconditionError("dual_spec: oracle norm has no dual oracle");
          return NormSpec::oracle(node.dual_eval, node.dim, node.eval, node.name + "*");
        }
      },
      spec.node());
}

TopKSplit topk_decompose(std::span<const double> v, std::size_t k) {
  const auto idx = topk_indices(v, k);
  const double theta = std::abs(v[idx.back()]);
  TopKSplit s;
  s.a.resize(v.size());
  s.b.resize(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    s.b[i] = std::clamp(v[i], -theta, theta);
    s.a[i] = v[i] - s.b[i];
  }
  return s;
}

MaxDualSplit best_max_dual_split(std::span<const double> w, const NormSpec& a, const NormSpec& b, int budget) {
  require_finite(w, "split_max_dual input");
  const std::size_t n = w.size();
  if (is_zero(w)) return {Vector(n, 0.0), Vector(n, 0.0), 0.0, 0.0};

  // max(linf, l1/k): the dual is top-k, split by clamping.
  const bool a_inf = is_lp(a, INFINITY);
  const bool b_inf = is_lp(b, INFINITY);
  const auto kb = l1_over_k(b);
  const auto ka = l1_over_k(a);
  if ((a_inf && kb && *kb <= n) || (b_inf && ka && *ka <= n)) {
    const std::size_t k = a_inf && kb ? *kb : *ka;
    TopKSplit t = topk_decompose(w, k);
    const double cost_l1 = lp_norm(t.a, Exponent(1.0));
    const double cost_inf = static_cast<double>(k) * lp_norm(t.b, Exponent::infinity());
    if (a_inf && kb) return {std::move(t.a), std::move(t.b), cost_l1, cost_inf};
    return {std::move(t.b), std::move(t.a), cost_inf, cost_l1};
  }
  if (is_polyhedral(a) && is_polyhedral(b))
    if (auto s = polyhedral_split(w, a, b)) return *s;
  return generic_split(w, a, b, budget);
}

MaxDualSplit split_max_dual(std::span<const double> w, const NormSpec& a, const NormSpec& b, int budget) {
  MaxDualSplit s = best_max_dual_split(w, a, b, budget);
  if (s.budget1 + s.budget2 > 1.0 + 1e-9) {
    std::ostringstream os;
    os.precision(12);
    os << "split_max_dual: no split within the unit budget (best " << s.budget1 + s.budget2
       << "); w is outside the dual ball";
    throw PreconditionError(os.str());
  }
  return s;
}

double inf_convolution_norm(const NormSpec& a, const NormSpec& b, std::span<const double> w, int budget) {
  const auto s = best_max_dual_split(w, a, b, budget);
  return s.budget1 + s.budget2;
}

Vector Embedding::apply(std::span<const double> x) const {
  if (x.size() != cols) throw PreconditionError("Embedding::apply: dimension mismatch");
  Vector y(rows, 0.0);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) y[i] += matrix[i * cols + j] * x[j];
  return y;
}

Vector Embedding::adjoint(std::span<const double> y) const {
  if (y.size() != rows) throw PreconditionError("Embedding::adjoint: dimension mismatch");
  Vector x(cols, 0.0);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) x[j] += matrix[i * cols + j] * y[i];
  return x;
}

void Embedding::audit(int trials, std::uint64_t seed) const {
  if (rows == 0 || cols == 0 || matrix.size() != rows * cols) throw PreconditionError("Embedding: malformed matrix");
  if (!(distortion >= 1.0)) throw PreconditionError("Embedding: distortion must be at least 1");
  if (const auto d = source.dim(); d && *d != cols) throw PreconditionError("Embedding: source dimension mismatch");
  if (const auto d = target.dim(); d && *d != rows) throw PreconditionError("Embedding: target dimension mismatch");
  require_finite(matrix, "embedding matrix");
  Eigen::MatrixXd E(static_cast<long>(rows), static_cast<long>(cols));
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) E(static_cast<long>(i), static_cast<long>(j)) = matrix[i * cols + j];
  if (E.fullPivLu().rank() < static_cast<long>(cols)) throw PreconditionError("Embedding: map is not injective");

  Rng rng(seed);
  const auto check = [&](const Vector& x) {
    const double nx = eval_norm(source, x);
    const double ny = eval_norm(target, apply(x));
    const double tol = 1e-9 * std::max(1.0, nx);
    if (ny > nx + tol || nx > distortion * ny + tol) {
      std::ostringstream os;
      os << "Embedding: distortion audit failed (||x||_X = " << nx << ", ||Ex||_Y = " << ny << ")";
      throw PreconditionError(os.str());
    }
  };
  for (std::size_t j = 0; j < cols; ++j) check(unit_vector(cols, j));
  for (int t = 0; t < trials; ++t) {
    Vector x(cols);
    for (auto& xi : x) xi = standard_normal(rng);
    check(x);
  }
}

Embedding identity_embedding(const NormSpec& spec, std::size_t n) {
  Embedding e;
  e.rows = e.cols = n;
  e.matrix.assign(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) e.matrix[i * n + i] = 1.0;
  e.source = spec;
  e.target = spec;
  return e;
}

Embedding linf_into_lp_embedding(std::size_t r, double p, std::size_t n) {
  if (!(p >= 2.0)) throw PreconditionError("linf_into_lp_embedding: requires p >= 2");
  if (r == 0 || r > n) throw PreconditionError("linf_into_lp_embedding: requires 1 <= r <= n");
  const Exponent e(p);
  // Scaling by r^(-1/p) puts the contraction side on the image.
  const double c = e.is_infinite() ? 1.0 : std::pow(static_cast<double>(r), -1.0 / p);
  Embedding emb;
  emb.rows = n;
  emb.cols = r;
  emb.matrix.assign(n * r, 0.0);
  for (std::size_t i = 0; i < r; ++i) emb.matrix[i * r + i] = c;
  emb.distortion = e.is_infinite() ? 1.0 : std::pow(static_cast<double>(r), 1.0 / p);
  emb.source = NormSpec::linf(r);
  emb.target = NormSpec::lp(e, n);
  return emb;
}

LiftResult lift_dual_vector(const Embedding& emb, std::span<const double> w, std::uint64_t seed) {
  if (w.size() != emb.cols) throw PreconditionError("lift_dual_vector: dimension mismatch");
  require_finite(w, "lift_dual_vector input");
  const auto n = static_cast<long>(emb.rows);
  const auto k = static_cast<long>(emb.cols);
  Eigen::MatrixXd E(n, k);
  for (long i = 0; i < n; ++i)
    for (long j = 0; j < k; ++j) E(i, j) = emb.matrix[static_cast<std::size_t>(i * k + j)];
  if (E.fullPivLu().rank() < k) throw PreconditionError("lift_dual_vector: embedding is not injective");

  const auto finish = [&](Vector lifted, bool exact) {
    LiftResult r;
    const Vector back = emb.adjoint(lifted);
    for (std::size_t j = 0; j < w.size(); ++j) r.residual = std::max(r.residual, std::abs(back[j] - w[j]));
    r.norm = dual_value(emb.target, lifted);
    r.w = std::move(lifted);
    r.exact = exact;
    return r;
  };
  if (is_zero(w)) return finish(Vector(emb.rows, 0.0), true);
  const Eigen::VectorXd wv = Eigen::Map<const Eigen::VectorXd>(w.data(), k);

  if (is_polyhedral(emb.target)) {
    try {
      const auto atoms = ball_facets(emb.target, emb.rows, 4096);
      const auto m = static_cast<long>(atoms.size());
      Eigen::MatrixXd Y(n, m);
      for (long j = 0; j < m; ++j)
        for (long i = 0; i < n; ++i) Y(i, j) = atoms[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)];
      const auto res = lp::minimize(E.transpose() * Y, wv, Eigen::VectorXd::Ones(m));
      if (res.status == lp::Status::optimal) {
        const Eigen::VectorXd lifted = Y * res.x;
        return finish(Vector(lifted.data(), lifted.data() + n), true);
      }
    } catch (const PreconditionError&) {
    }
  }

  // Affine solution set w0 + N z of E^T w' = w.
  const Eigen::VectorXd w0 = E * (E.transpose() * E).ldlt().solve(wv);
  const Eigen::MatrixXd N = E.transpose().fullPivLu().kernel();
  const bool trivial_kernel = N.cols() == 0 || (N.cols() == 1 && N.norm() == 0.0);
  const auto point = [&](const Eigen::VectorXd& z) {
    const Eigen::VectorXd p = trivial_kernel ? w0 : Eigen::VectorXd(w0 + N * z);
    return Vector(p.data(), p.data() + n);
  };
  Vector best = point(Eigen::VectorXd::Zero(trivial_kernel ? 0 : N.cols()));
  double best_f = dual_value(emb.target, best);
  if (trivial_kernel) return finish(std::move(best), true);

  double lower = 0.0;
  try {
    lower = dual_value(emb.source, w);
  } catch (const std::exception&) {
  }
  const bool polyak = emb.distortion == 1.0 && lower > 0.0;
  const NormSpec target_dual = NormSpec::dual_of(emb.target);
  const double scale = w0.norm();
  Rng rng(seed);
  for (int restart = 0; restart < 5; ++restart) {
    Eigen::VectorXd z = Eigen::VectorXd::Zero(N.cols());
    if (restart > 0)
      for (long i = 0; i < z.size(); ++i) z(i) = scale * standard_normal(rng);
    for (int it = 0; it < 10000; ++it) {
      const Vector p = point(z);
      const double f = dual_value(emb.target, p);
      if (f < best_f) {
        best_f = f;
        best = p;
      }
      if (polyak && f - lower <= 1e-13 * std::max(1.0, lower)) break;
      const Vector g = norm_subgradient(target_dual, p);
      const Eigen::VectorXd gz = N.transpose() * Eigen::Map<const Eigen::VectorXd>(g.data(), n);
      const double g2 = gz.squaredNorm();
      if (g2 <= 1e-30) break;
      const double step = polyak ? (f - lower) / g2 : scale / (std::sqrt(g2) * std::sqrt(it + 1.0));
      z -= step * gz;
    }
  }
  return finish(std::move(best), false);
}

DisjointSumReport audit_disjoint_sum(const NormSpec& spec, std::size_t n, std::size_t copies, double growth,
                                     int trials, std::uint64_t seed) {
  if (copies == 0 || copies > n) throw PreconditionError("audit_disjoint_sum: need 1 <= copies <= n");
  Rng rng(seed);
  DisjointSumReport rep;
  rep.worst_ratio = std::numeric_limits<double>::infinity();
  for (int t = 0; t < trials; ++t) {
    // Random disjoint supports: shuffle, then cut into `copies` nonempty runs.
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    for (std::size_t i = n; i > 1; --i) std::swap(perm[i - 1], perm[uniform_index(rng, i)]);
    const std::size_t used = copies + uniform_index(rng, n - copies + 1);
    std::vector<std::size_t> cuts(copies + 1, 0);
    {
      std::vector<std::size_t> inner(used - 1);
      std::iota(inner.begin(), inner.end(), 1);
      for (std::size_t i = inner.size(); i > 1; --i) std::swap(inner[i - 1], inner[uniform_index(rng, i)]);
      inner.resize(copies - 1);
      std::sort(inner.begin(), inner.end());
      std::copy(inner.begin(), inner.end(), cuts.begin() + 1);
      cuts[copies] = used;
    }
    Vector sum(n, 0.0);
    for (std::size_t c = 0; c < copies; ++c) {
      Vector v(n, 0.0);
      for (std::size_t j = cuts[c]; j < cuts[c + 1]; ++j) v[perm[j]] = standard_normal(rng);
      const double nv = eval_norm(spec, v);
      if (nv == 0.0) continue;
      for (std::size_t j = 0; j < n; ++j) sum[j] += v[j] / nv;
    }
    const double ratio = eval_norm(spec, sum);
    rep.worst_ratio = std::min(rep.worst_ratio, ratio);
    if (!(ratio > growth)) rep.passed = false;
  }
  return rep;
}

}  // namespace normip
