#include "normip/sparsifiers.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

namespace normip {
namespace {

// ceil with a relative guard so that 36 * 0.2^-2 stays 900.
std::size_t guarded_ceil(double x) {
  if (!std::isfinite(x) || x > 1e15) throw PreconditionError("sparsifier: sample count overflows");
  return static_cast<std::size_t>(std::ceil(x * (1.0 - 1e-12)));
}

SparseVector merge_draws(std::span<const double> v, const Vector& probs, const IndexSampler& sampler, std::size_t s,
                         double scale, Rng& rng) {
  std::vector<std::size_t> draws(s);
  for (auto& t : draws) t = sampler(rng);
  std::sort(draws.begin(), draws.end());
  SparseVector out;
  out.dim = v.size();
  const double inv_s = scale / static_cast<double>(s);
  for (std::size_t i = 0; i < draws.size();) {
    std::size_t j = i;
    while (j < draws.size() && draws[j] == draws[i]) ++j;
    const std::size_t t = draws[i];
    out.entries.emplace_back(t, static_cast<double>(j - i) * (v[t] / probs[t]) * inv_s);
    i = j;
  }
  return out;
}

}  // namespace

SparsifierSpec SparsifierSpec::lp_sampling(Exponent p, double eps, double delta, double constant) {
  SparsifierSpec s;
  s.kind = SparsifierKind::lp_sampling;
  s.p = p;
  s.epsilon = eps;
  s.delta = delta;
  s.constant = constant;
  s.validate();
  return s;
}

SparsifierSpec SparsifierSpec::level_set(NormSpec norm, std::size_t k, double eps, double delta, double constant) {
  SparsifierSpec s;
  s.kind = SparsifierKind::level_set;
  s.norm = std::move(norm);
  s.claim_k = k;
  s.epsilon = eps;
  s.delta = delta;
  s.constant = constant;
  s.validate();
  return s;
}

SparsifierSpec SparsifierSpec::identity(double eps) {
  SparsifierSpec s;
  s.kind = SparsifierKind::identity;
  s.epsilon = eps;
  s.delta = 0.0;
  s.validate();
  return s;
}

void SparsifierSpec::validate() const {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw PreconditionError("sparsifier: epsilon must lie in (0,1)");
  if (kind == SparsifierKind::identity) return;
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw PreconditionError("sparsifier: epsilon must lie in (0,1)");
  if (!(delta > 0.0 && delta < 1.0)) throw PreconditionError("sparsifier: delta must lie in (0,1)");
  if (!(constant > 0.0)) throw PreconditionError("sparsifier: constant must be positive");
  if (max_samples && *max_samples == 0) throw PreconditionError("sparsifier: max_samples must be positive");
  if (kind == SparsifierKind::lp_sampling && p.is_infinite())
    throw PreconditionError("sparsifier: l_inf has no sampling sparsifier");
  if (kind == SparsifierKind::level_set) {
    if (!norm) throw PreconditionError("sparsifier: level-set sampling needs a norm");
    if (claim_k < 2) throw PreconditionError("sparsifier: level-set claim needs k >= 2");
    const double ce = claim_eps.value_or(epsilon);
    if (!(ce > 0.0 && ce < 1.0)) throw PreconditionError("sparsifier: claim epsilon must lie in (0,1)");
  }
}

double SparsifierSpec::level_exponent() const {
  return std::log(static_cast<double>(claim_k)) / std::log(1.0 / claim_eps.value_or(epsilon));
}

std::size_t SparsifierSpec::sample_count(std::size_t n) const {
  std::size_t s = 0;
  switch (kind) {
    case SparsifierKind::identity:
      return n;
    case SparsifierKind::lp_sampling: {
      const double e = std::max(2.0, p.value());
      // delta enters as a Chebyshev-style multiplier on s.
      const double boost = std::max(1.0, (1.0 / 3.0) / delta);
      s = guarded_ceil(constant * std::pow(1.0 / epsilon, e) * boost);
      break;
    }
    case SparsifierKind::level_set: {
      const double ph = level_exponent();
      const double kl = static_cast<double>(claim_k) * std::log(static_cast<double>(std::max<std::size_t>(n, 2)));
      const double boost = std::max(1.0, (1.0 / 3.0) / delta);
      s = guarded_ceil(std::pow(constant * ph / epsilon, 2.0 * ph) * kl * kl * boost);
      break;
    }
  }
  if (max_samples) s = std::min(s, *max_samples);
  return std::max<std::size_t>(s, 1);
}

std::size_t SparsifierSpec::sparsity_cap(std::size_t n) const { return sample_count(n); }

IndexSampler::IndexSampler(std::span<const double> probs) {
  cdf_.reserve(probs.size());
  double acc = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0)) throw PreconditionError("IndexSampler: negative probability");
    cdf_.push_back(acc += p);
  }
  if (!(acc > 0.0)) throw PreconditionError("IndexSampler: distribution has no mass");
}

SamplingDistribution lp_distribution(std::span<const double> v, Exponent p) {
  require_finite(v, "lp_distribution input");
  if (p.is_infinite()) throw PreconditionError("lp_distribution: p must be finite");
  const double nv = lp_norm(v, p);
  if (nv == 0.0) throw PreconditionError("lp_distribution: zero vector");
  if (std::abs(nv - 1.0) > 1e-9) throw PreconditionError("lp_distribution: v must have unit norm");
  SamplingDistribution d;
  d.probs.resize(v.size());
  double total = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double a = std::abs(v[i]);
    d.probs[i] = p.value() == 1.0 ? a : (p.value() == 2.0 ? a * a : std::pow(a, p.value()));
    total += d.probs[i];
  }
  for (auto& x : d.probs) x /= total;
  return d;
}

SparseVector draw_one_sparse(std::span<const double> v, const SamplingDistribution& dist, Rng& rng) {
  if (dist.probs.size() != v.size()) throw PreconditionError("draw_one_sparse: dimension mismatch");
  const std::size_t t = IndexSampler(dist.probs)(rng);
  SparseVector out;
  out.dim = v.size();
  out.entries.emplace_back(t, v[t] / dist.probs[t]);
  return out;
}

SparseVector lp_sparsify(std::span<const double> v, const SparsifierSpec& spec, Rng& rng) {
  if (spec.kind != SparsifierKind::lp_sampling) throw PreconditionError("lp_sparsify: wrong sparsifier kind");
  require_finite(v, "lp_sparsify input");
  SparseVector out;
  out.dim = v.size();
  const double nv = lp_norm(v, spec.p);
  if (nv == 0.0) return out;
  const Vector u = scaled(v, 1.0 / nv);
  const SamplingDistribution d = lp_distribution(u, spec.p);
  const IndexSampler sampler(d.probs);
  return merge_draws(u, d.probs, sampler, spec.sample_count(v.size()), nv, rng);
}

std::size_t level_count(std::size_t n) {
  if (n < 2) return 1;
  return static_cast<std::size_t>(std::ceil(3.0 * std::log2(static_cast<double>(n)) - 1e-12));
}

SamplingDistribution levelset_distribution(std::span<const double> v, std::size_t n) {
  require_finite(v, "levelset_distribution input");
  const auto R = static_cast<int>(level_count(n));
  const double tail = std::ldexp(1.0, -R);
  SamplingDistribution d;
  d.classes.assign(v.size(), -1);
  std::vector<std::size_t> sizes(static_cast<std::size_t>(R) + 1, 0);
  for (std::size_t j = 0; j < v.size(); ++j) {
    const double a = std::abs(v[j]);
    if (a == 0.0) continue;
    int cls = 0;
    if (a > tail) {
      // a = m 2^e with m in [0.5, 1): a in (2^-i, 2^-i+1] for i = 1 - e,
      // except a = 2^(e-1) exactly, which closes level 2 - e.
      int e = 0;
      const double m = std::frexp(a, &e);
      cls = m == 0.5 ? 2 - e : 1 - e;
      cls = std::clamp(cls, 1, R);
    }
    d.classes[j] = cls;
    ++sizes[static_cast<std::size_t>(cls)];
  }
  for (auto sz : sizes)
    if (sz > 0) ++d.nonempty_classes;
  if (d.nonempty_classes == 0) throw PreconditionError("levelset_distribution: zero vector");
  d.probs.assign(v.size(), 0.0);
  const double share = 1.0 / static_cast<double>(d.nonempty_classes);
  for (std::size_t j = 0; j < v.size(); ++j)
    if (d.classes[j] >= 0) d.probs[j] = share / static_cast<double>(sizes[static_cast<std::size_t>(d.classes[j])]);
  return d;
}

SparseVector symmetric_sparsify(std::span<const double> v, const SparsifierSpec& spec, Rng& rng) {
  if (spec.kind != SparsifierKind::level_set) throw PreconditionError("symmetric_sparsify: wrong sparsifier kind");
  require_finite(v, "symmetric_sparsify input");
  SparseVector out;
  out.dim = v.size();
  if (std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; })) return out;
  const SamplingDistribution d = levelset_distribution(v, v.size());
  const IndexSampler sampler(d.probs);
  return merge_draws(v, d.probs, sampler, spec.sample_count(v.size()), 1.0, rng);
}

SparseVector sparsify(std::span<const double> v, const SparsifierSpec& spec, Rng& rng) {
  switch (spec.kind) {
    case SparsifierKind::lp_sampling:
      return lp_sparsify(v, spec, rng);
    case SparsifierKind::level_set:
      return symmetric_sparsify(v, spec, rng);
    case SparsifierKind::identity: {
      require_finite(v, "sparsify input");
      SparseVector out;
      out.dim = v.size();
      for (std::size_t i = 0; i < v.size(); ++i)
        if (v[i] != 0.0) out.entries.emplace_back(i, v[i]);
      return out;
    }
  }
  throw std::logic_error("sparsify: unknown kind");
}

double weak_qnorm_estimate(std::span<const double> samples, Exponent q) {
  if (samples.size() < 100) throw PreconditionError("weak_qnorm_estimate: needs at least 100 samples");
  std::vector<double> a(samples.size());
  std::transform(samples.begin(), samples.end(), a.begin(), [](double x) { return std::abs(x); });
  std::sort(a.begin(), a.end(), std::greater<>());
  const double N = static_cast<double>(a.size());
  double best = 0.0;
  for (std::size_t r = 0; r < a.size(); ++r) {
    const double frac = static_cast<double>(r + 1) / N;
    const double w = q.is_infinite() ? 1.0 : std::pow(frac, 1.0 / q.value());
    best = std::max(best, w * a[r]);
  }
  return best;
}

}  // namespace normip
