#include "normip/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "normip/harness.hpp"
#include "normip/kernels.hpp"
#include "normip/norms.hpp"
#include "normip/polytopes.hpp"
#include "normip/protocols.hpp"
#include "normip/spaces.hpp"
#include "normip/sparsifiers.hpp"

namespace normip {
namespace {

// Binomial slack used by every rate threshold.
constexpr double kRateSlack = 0.04;
// Familywise false-alarm level for exact per-coordinate tests.
constexpr double kFamilyLevel = 1e-3;

struct BitAudit {
  std::size_t runs = 0;
  std::size_t violations = 0;

  void record(std::size_t bits, std::size_t bound) {
    ++runs;
    if (bits > bound) ++violations;
  }
  void record(std::span<const TrialResult> results, std::size_t bound) {
    for (const auto& r : results) record(r.bits, bound);
  }
};

struct Context {
  const VerifyOptions& options;
  BitAudit audit;

  std::size_t trials(std::size_t base) const {
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(static_cast<double>(base) * options.scale)));
  }
  Rng rng(std::uint64_t cell) const { return make_rng(substream_seed(options.seed, cell, 0)); }
};

struct Outcome {
  bool passed = true;
  std::ostringstream detail;

  void fail(const std::string& why) {
    if (passed) detail.str("");
    passed = false;
    detail << why << "; ";
  }
};

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", x);
  return buf;
}

double success_rate(std::span<const TrialResult> results, double eps) {
  std::size_t ok = 0;
  for (const auto& r : results) ok += std::abs(r.estimate - r.truth) <= eps;
  return static_cast<double>(ok) / static_cast<double>(results.size());
}

Vector gaussian_vector(std::size_t n, Rng& rng) {
  Vector g(n);
  for (auto& x : g) x = standard_normal(rng);
  return g;
}

unsigned ceil_log2(std::uint64_t m) {
  unsigned b = 0;
  while ((std::uint64_t{1} << b) < m) ++b;
  return b;
}

// ---------------------------------------------------------------------------

void dual_norm_agreement(Context& ctx, Outcome& out) {
  struct Case {
    std::string name;
    NormSpec spec;
    std::function<double(std::span<const double>)> closed;
  };
  double worst = 0.0;
  std::string worst_case;
  std::size_t checked = 0;
  Rng rng = ctx.rng(1);
  const std::size_t per_dim = ctx.trials(200);
  for (std::size_t n = 2; n <= 6; ++n) {
    std::vector<Case> cases;
    cases.push_back({"l1", NormSpec::lp(1.0), [](auto w) { return lp_norm(w, Exponent::infinity()); }});
    cases.push_back({"linf", NormSpec::linf(), [](auto w) { return lp_norm(w, Exponent(1.0)); }});
    for (std::size_t k = 1; k <= std::min<std::size_t>(3, n); ++k)
      cases.push_back({"T" + std::to_string(k), NormSpec::topk(k), [k](auto w) { return topk_dual_norm(w, k); }});
    cases.push_back({"cube", NormSpec::polytope(Polytope::cube(n)), [](auto w) { return lp_norm(w, Exponent(1.0)); }});
    cases.push_back({"cross", NormSpec::polytope(Polytope::cross_polytope(n)),
                     [](auto w) { return lp_norm(w, Exponent::infinity()); }});
    cases.push_back({"max(linf,l1/2)", NormSpec::max_of(NormSpec::linf(), NormSpec::scaled(NormSpec::lp(1.0), 0.5)),
                     [](auto w) { return topk_norm(w, 2); }});
    for (const auto& c : cases) {
      for (std::size_t t = 0; t < per_dim; ++t) {
        Vector w = gaussian_vector(n, rng);
        const double s = std::exp(3.0 * (2.0 * uniform01(rng) - 1.0));
        for (auto& x : w) x *= s;
        const auto bf = dual_norm_bruteforce(c.spec, w);
        if (!bf.exact) {
          out.fail(c.name + ": brute force fell back to ascent");
          return;
        }
        const double err = std::abs(bf.value - c.closed(w));
        ++checked;
        if (err > worst) {
          worst = err;
          worst_case = c.name + " n=" + std::to_string(n);
        }
      }
    }
  }
  if (worst > 1e-9) out.fail("max error " + fmt(worst) + " at " + worst_case);
  out.detail << checked << " vectors, max abs error " << fmt(worst);
}

void topk_inf_convolution(Context& ctx, Outcome& out) {
  Rng rng = ctx.rng(2);
  double worst_identity = 0.0;
  double worst_gap = 0.0;
  const std::size_t count = ctx.trials(1000);
  std::size_t checked = 0;
  for (std::size_t t = 0; t < count; ++t) {
    const std::size_t n = 1 + t % 10;
    Vector v = gaussian_vector(n, rng);
    if (t % 7 == 0 && n > 2) v[1] = v[0];  // ties
    if (t % 11 == 0) v[0] = 0.0;
    for (std::size_t k = 1; k <= n; ++k) {
      const TopKSplit split = topk_decompose(v, k);
      const double kk = static_cast<double>(k);
      const double cost = lp_norm(split.a, Exponent(1.0)) + kk * lp_norm(split.b, Exponent::infinity());
      const double target = topk_norm(v, k);
      double recon = 0.0;
      for (std::size_t i = 0; i < n; ++i) recon = std::max(recon, std::abs(split.a[i] + split.b[i] - v[i]));
      worst_identity = std::max({worst_identity, std::abs(cost - target), recon});
      // Every threshold t gives the split b = clamp(v, t); none may beat the decomposition.
      double best = kk * lp_norm(v, Exponent::infinity());
      for (std::size_t j = 0; j <= n; ++j) {
        const double th = j == n ? 0.0 : std::abs(v[j]);
        double c = kk * th;
        for (double x : v) c += std::max(std::abs(x) - th, 0.0);
        best = std::min(best, c);
      }
      worst_gap = std::max(worst_gap, cost - best);
      ++checked;
    }
  }
  if (worst_identity > 1e-12) out.fail("decomposition cost off by " + fmt(worst_identity));
  if (worst_gap > 1e-12) out.fail("threshold search beat the decomposition by " + fmt(worst_gap));
  out.detail << checked << " (v,k) pairs, max |cost - topk| " << fmt(worst_identity) << ", best threshold gain "
             << fmt(std::max(worst_gap, 0.0));
}

// Two-sided exact tail of Binomial(N, p) at k: 2 min(P(X <= k), P(X >= k)), capped at 1.
double binomial_two_sided(std::uint64_t k, std::uint64_t N, double p) {
  const double Nd = static_cast<double>(N);
  const auto log_pmf = [&](double x) {
    return std::lgamma(Nd + 1) - std::lgamma(x + 1) - std::lgamma(Nd - x + 1) + x * std::log(p) +
           (Nd - x) * std::log1p(-p);
  };
  const double kd = static_cast<double>(k);
  const double mean = Nd * p;
  const auto sweep = [&](double from, double step, double stop) {
    double acc = 0.0;
    for (double x = from; step > 0 ? x <= stop : x >= stop; x += step) {
      const double term = std::exp(log_pmf(x));
      acc += term;
      if (term < 1e-300 || (acc > 0 && term < 1e-17 * acc && std::abs(x - mean) > 1)) break;
    }
    return acc;
  };
  const double tail = kd >= mean ? sweep(kd, 1.0, Nd) : sweep(kd, -1.0, 0.0);
  return std::min(1.0, 2.0 * tail);
}

void lp_sparsifier_contract(Context& ctx, Outcome& out) {
  const std::size_t n = 1000;
  const std::size_t T = ctx.trials(2000);
  double worst_rate = 1.0;
  std::string worst_cell;
  double worst_bias = 1.0;
  std::size_t tests = 0;
  std::uint64_t cell = 300;
  for (const double p : {1.0, 1.5, 2.0, 3.0}) {
    for (const double eps : {0.2, 0.1}) {
      ++cell;
      SparsifierSpec spec = SparsifierSpec::lp_sampling(Exponent(p), eps);
      spec.max_samples = 4 * n;
      const std::size_t s = spec.sample_count(n);
      const auto expected =
          std::min<std::size_t>(4 * n, static_cast<std::size_t>(std::ceil(36.0 * std::pow(eps, -std::max(2.0, p)) - 1e-9)));
      const std::string name = "p=" + fmt(p) + " eps=" + fmt(eps);
      if (s != expected) out.fail(name + ": s = " + std::to_string(s) + ", expected " + std::to_string(expected));

      Rng rng = ctx.rng(cell);
      const NormSpec norm = NormSpec::lp(p);
      const Vector v = random_unit_vector(norm, n, rng);
      AdversarialOptions adv;
      adv.keep = 10;
      adv.trials = ctx.trials(400);
      adv.seed = substream_seed(ctx.options.seed, cell, 1);
      std::vector<Vector> ws;
      for (auto& c : adversarial_dual_search(norm, v, spec, adv)) ws.push_back(std::move(c.w));
      for (int j = 0; j < 10; ++j) ws.push_back(random_dual_unit_vector(norm, n, rng));

      const auto phis = sparsify_trials(spec, v, T, ctx.options.seed, cell);
      for (const auto& phi : phis)
        if (phi.nnz() > s) out.fail(name + ": sparsity " + std::to_string(phi.nnz()) + " > s");
      for (std::size_t j = 0; j < ws.size(); ++j) {
        const double truth = dot(v, ws[j]);
        std::size_t ok = 0;
        for (const auto& phi : phis) ok += std::abs(phi.dot(ws[j]) - truth) <= eps;
        const double rate = static_cast<double>(ok) / static_cast<double>(T);
        if (rate < worst_rate) {
          worst_rate = rate;
          worst_cell = name + (j < 10 ? " adversarial" : " random");
        }
        if (rate < 2.0 / 3.0 - kRateSlack) out.fail(name + ": rate " + fmt(rate) + " on w #" + std::to_string(j));
      }

      // Each coordinate's pooled value is count_i * v_i / (s p_i) with
      // count_i ~ Binomial(T s, p_i); test the counts exactly.
      const double nv = lp_norm(v, Exponent(p));
      Vector prob(n);
      double total = 0.0;
      for (std::size_t i = 0; i < n; ++i) total += prob[i] = std::pow(std::abs(v[i]) / nv, p);
      Vector sum(n, 0.0);
      for (const auto& phi : phis)
        for (const auto& [i, x] : phi.entries) sum[i] += x;
      const std::uint64_t draws = static_cast<std::uint64_t>(T) * s;
      std::uint64_t counted = 0;
      for (std::size_t i = 0; i < n; ++i) {
        const double pi = prob[i] / total;
        if (pi == 0.0) {
          if (sum[i] != 0.0) out.fail(name + ": nonzero mean on a zero coordinate");
          continue;
        }
        const double raw = sum[i] * static_cast<double>(s) * pi / v[i];
        const double count = std::round(raw);
        if (std::abs(raw - count) > 1e-6 * std::max(1.0, count)) {
          out.fail(name + ": coordinate " + std::to_string(i) + " is not a whole number of samples");
          continue;
        }
        counted += static_cast<std::uint64_t>(count);
        const double tail = binomial_two_sided(static_cast<std::uint64_t>(count), draws, pi);
        worst_bias = std::min(worst_bias, tail);
        tests += 1;
      }
      if (counted != draws)
        out.fail(name + ": " + std::to_string(counted) + " samples, expected " + std::to_string(draws));
    }
  }
  const double level = kFamilyLevel / static_cast<double>(std::max<std::size_t>(tests, 1));
  if (worst_bias < level)
    out.fail("coordinate mean off: binomial tail " + fmt(worst_bias) + " below " + fmt(level));
  out.detail << "worst rate " << fmt(worst_rate) << " (" << worst_cell << "), smallest coordinate tail "
             << fmt(worst_bias) << " over " << tests << " coordinates";
}

void weak_moment_check(Context& ctx, Outcome& out) {
  Rng rng = ctx.rng(4);
  double worst_ratio = 0.0;
  std::size_t vectors = 0;
  const std::size_t per_cell = ctx.trials(50);
  for (const std::size_t n : {6, 9, 12}) {
    for (const std::size_t k : {2, 3}) {
      const NormSpec norm = NormSpec::topk(k);
      // l_inf^n does not embed into T^(k) with distortion (1 + k) / 2: any n
      // disjoint vectors of equal norm are singletons summing to norm k.
      const double growth = 0.5 * (1.0 + static_cast<double>(k));
      const auto disjoint = audit_disjoint_sum(norm, n, n, growth, 200, substream_seed(ctx.options.seed, 4, n * 10 + k));
      if (!disjoint.passed) out.fail("disjoint-sum audit failed for n=" + std::to_string(n) + " k=" + std::to_string(k));
      SparsifierSpec spec = SparsifierSpec::level_set(norm, n, 0.2);
      spec.claim_eps = 1.0 / growth;
      const double ph = spec.level_exponent();

      for (std::size_t t = 0; t < per_cell; ++t) {
        Vector v(n);
        const double R = static_cast<double>(level_count(n));
        for (auto& x : v) x = (rng() & 1U ? 1.0 : -1.0) * std::exp2(-uniform01(rng) * (R + 2.0));
        if (t % 5 == 0) v[t % n] = 0.0;
        const double nv = eval_norm(norm, v);
        for (auto& x : v) x /= nv;
        const SamplingDistribution d = levelset_distribution(v, n);

        double sup = 0.0;
        for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << n); ++mask) {
          Vector vs(n, 0.0);
          double pr = 0.0;
          for (std::size_t i = 0; i < n; ++i)
            if ((mask >> i) & 1U) {
              vs[i] = v[i];
              pr += d.probs[i];
            }
          const double ns = eval_norm(norm, vs);
          if (ns == 0.0) continue;
          sup = std::max(sup, std::pow(pr, -1.0 / ph) * ns);
        }
        const double Rp = static_cast<double>(d.nonempty_classes);
        Vector tail(n, 0.0);
        std::size_t tail_size = 0;
        for (std::size_t i = 0; i < n; ++i)
          if (d.classes[i] == 0) {
            tail[i] = v[i];
            ++tail_size;
          }
        double bound = std::pow(static_cast<double>(n) * Rp, 1.0 / ph);
        if (tail_size) bound += std::pow(Rp * static_cast<double>(tail_size), 1.0 / ph) * eval_norm(norm, tail);
        worst_ratio = std::max(worst_ratio, sup / bound);
        if (sup > bound * (1.0 + 1e-12))
          out.fail("n=" + std::to_string(n) + " k=" + std::to_string(k) + ": sup " + fmt(sup) + " > bound " + fmt(bound));
        ++vectors;
      }
    }
  }
  out.detail << vectors << " vectors, worst sup/bound " << fmt(worst_ratio);
}

void check_protocol_cell(Context& ctx, Outcome& out, const std::string& name, const ProtocolSpec& spec,
                         const Vector& v, const Vector& w, std::uint64_t cell, double& worst_rate, std::size_t& max_bits) {
  const std::size_t n = v.size();
  const auto results = protocol_trials(spec, v, w, ctx.trials(2000), ctx.options.seed, cell);
  const std::size_t bound = declared_cost(spec, n);
  ctx.audit.record(results, bound);
  const Accuracy acc = declared_accuracy(spec);
  const double rate = success_rate(results, acc.epsilon);
  worst_rate = std::min(worst_rate, rate);
  for (const auto& r : results) {
    max_bits = std::max(max_bits, r.bits);
    if (r.bits > bound) {
      out.fail(name + ": " + std::to_string(r.bits) + " bits > declared " + std::to_string(bound));
      break;
    }
  }
  if (rate < 2.0 / 3.0 - kRateSlack) out.fail(name + ": rate " + fmt(rate) + " at eps " + fmt(acc.epsilon));
}

void topk_protocol_end_to_end(Context& ctx, Outcome& out) {
  const std::size_t n = 16;
  const NormSpec norm = NormSpec::topk(4);
  const ProtocolSpec spec = topk_protocol(4, 0.2);
  Rng rng = ctx.rng(5);
  const DualPair random = random_dual_pair(norm, n, rng);
  const Vector aligned = norm_subgradient(norm, random.v);
  double worst = 1.0;
  std::size_t max_bits = 0;
  check_protocol_cell(ctx, out, "random pair", spec, random.v, random.w, 501, worst, max_bits);
  check_protocol_cell(ctx, out, "aligned pair", spec, random.v, aligned, 502, worst, max_bits);
  out.detail << "worst rate " << fmt(worst) << ", max bits " << max_bits << " <= declared " << declared_cost(spec, n);
}

void hsum_end_to_end(Context& ctx, Outcome& out) {
  const ProtocolSpec spec = hsum_topk_protocol(Exponent(1.0), {1, 2, 3, 4, 5, 6, 7, 8}, 8, 0.2, 0.1);
  const NormSpec& space = std::get<HSumCompose>(spec.node()).space;
  const std::size_t n = 64;
  const Accuracy acc = declared_accuracy(spec);
  if (std::abs(acc.epsilon - 0.5) > 1e-12) out.fail("declared error " + fmt(acc.epsilon) + ", expected 2 eps + gamma");
  Rng rng = ctx.rng(6);
  const DualPair random = random_dual_pair(space, n, rng);
  const Vector aligned = norm_subgradient(space, random.v);
  double worst = 1.0;
  std::size_t max_bits = 0;
  check_protocol_cell(ctx, out, "random pair", spec, random.v, random.w, 601, worst, max_bits);
  check_protocol_cell(ctx, out, "aligned pair", spec, random.v, aligned, 602, worst, max_bits);
  out.detail << "worst rate " << fmt(worst) << " at error " << fmt(acc.epsilon) << ", max bits " << max_bits
             << " <= declared " << declared_cost(spec, n);
}

void vertex_sampling(Context& ctx, Outcome& out) {
  double worst = 1.0;
  std::uint64_t cell = 700;
  for (const std::size_t n : {2, 3, 4}) {
    for (const bool cube : {true, false}) {
      ++cell;
      const Polytope P = cube ? Polytope::cube(n) : Polytope::cross_polytope(n);
      const std::size_t vertex_total = cube ? std::size_t{1} << n : 2 * n;
      const std::string name = std::string(cube ? "cube" : "cross") + " n=" + std::to_string(n);
      const ProtocolSpec spec = ProtocolSpec::vertex_sample(P, 0.15);
      Rng rng = ctx.rng(cell);
      Vector v = gaussian_vector(n, rng);
      const double gv = gauge_norm(P, v);
      for (auto& x : v) x /= gv;
      Vector w = gaussian_vector(n, rng);
      const double gw = gauge_norm(dual_polytope(P), w);
      for (auto& x : w) x /= gw;

      const auto results = protocol_trials(spec, v, w, ctx.trials(2000), ctx.options.seed, cell);
      ctx.audit.record(results, declared_cost(spec, n));
      const std::size_t per_sample = ceil_log2(vertex_total);
      const std::size_t expected_bits = vertex_sample_count(0.15) * per_sample;
      for (const auto& r : results)
        if (r.bits != expected_bits) {
          out.fail(name + ": " + std::to_string(r.bits) + " bits, expected " + std::to_string(expected_bits));
          break;
        }
      const double rate = success_rate(results, 0.15);
      worst = std::min(worst, rate);
      if (rate < 2.0 / 3.0 - kRateSlack) out.fail(name + ": rate " + fmt(rate));
    }
  }
  out.detail << "worst rate " << fmt(worst) << ", payload ceil(log2 |V|) bits per sample";
}

void slack_expectation(Context& ctx, Outcome& out) {
  const Polytope P = Polytope::cube(2).with_vertices().with_inequalities();
  const double eps = 0.1;
  const std::size_t reps = ctx.trials(5000);
  const std::size_t per_run_bound = slack_repetitions(eps) * vertex_sample_count(eps) * ceil_log2(P.vrep().size());
  double worst = 0.0;
  std::uint64_t cell = 800;
  for (std::size_t r = 0; r < P.vrep().size(); ++r) {
    for (std::size_t i = 0; i < P.hrep().size(); ++i) {
      ++cell;
      const double exact = 1.0 - dot(P.vrep()[r], P.hrep()[i]);
      double sum = 0.0, sq = 0.0;
      bool in_range = true;
      for (std::size_t t = 0; t < reps; ++t) {
        Rng rng = make_rng(substream_seed(ctx.options.seed, cell, t));
        const SlackEstimate est = slack_in_expectation(P, r, i, eps, rng);
        ctx.audit.record(est.bits, per_run_bound);
        in_range = in_range && est.value >= 0.0 && est.value <= 2.0;
        sum += est.value;
        sq += est.value * est.value;
      }
      const double N = static_cast<double>(reps);
      const double mean = sum / N;
      const double sigma = std::sqrt(std::max(0.0, sq / N - mean * mean));
      const double tol = 2.0 * eps + 3.0 * sigma / std::sqrt(N);
      worst = std::max(worst, std::abs(mean - exact));
      if (!in_range) out.fail("output outside [0,2]");
      if (std::abs(mean - exact) > tol)
        out.fail("pair (" + std::to_string(r) + "," + std::to_string(i) + "): mean " + fmt(mean) + " vs " + fmt(exact));
    }
  }
  out.detail << P.vrep().size() * P.hrep().size() << " pairs, max |mean - slack| " << fmt(worst);
}

void reductions(Context& ctx, Outcome& out) {
  const std::size_t k = 400;
  const double C = 2.0;
  const double eps = 2.0 * C / std::sqrt(static_cast<double>(k));
  const ProtocolSpec l2 = lp_protocol(Exponent(2.0), eps);
  const std::size_t l2_bound = declared_cost(l2, k);
  const std::size_t instances = ctx.trials(500);
  std::size_t decided = 0;
  for (std::size_t t = 0; t < instances; ++t) {
    Rng rng = make_rng(substream_seed(ctx.options.seed, 901, t));
    const GapHammingInstance g = gen_gap_hamming(k, C, rng);
    std::size_t dist = 0, wx = 0, wy = 0, overlap = 0;
    for (std::size_t i = 0; i < k; ++i) {
      dist += g.x[i] != g.y[i];
      wx += g.x[i];
      wy += g.y[i];
      overlap += g.x[i] && g.y[i];
    }
    if (dist != g.distance || wx + wy != dist + 2 * overlap) {
      out.fail("distance identity violated");
      return;
    }
    const auto o = run_protocol(l2, g.v, g.w, rng);
    ctx.audit.record(o.transcript.total_bits(), l2_bound);
    decided += decide_gap_side(g, o.estimate) == g.side;
  }
  const double gap_rate = static_cast<double>(decided) / static_cast<double>(instances);
  if (gap_rate < 0.6) out.fail("gap-hamming decided " + fmt(gap_rate));

  const std::size_t n = 64;
  const ProtocolSpec index = ProtocolSpec::swap(ProtocolSpec::one_way(SparsifierSpec::identity()));
  const std::size_t index_bound = declared_cost(index, n);
  std::size_t decoded = 0;
  for (std::size_t t = 0; t < instances; ++t) {
    Rng rng = make_rng(substream_seed(ctx.options.seed, 902, t));
    std::vector<std::uint8_t> x(n);
    for (auto& b : x) b = static_cast<std::uint8_t>(rng() & 1U);
    const std::size_t i = uniform_index(rng, n);
    const DualPair pair = gen_index_instance(x, i);
    if (dot(pair.v, pair.w) != static_cast<double>(x[i])) {
      out.fail("index instance does not encode x_i");
      return;
    }
    const auto o = run_protocol(index, pair.v, pair.w, rng);
    ctx.audit.record(o.transcript.total_bits(), index_bound);
    decoded += decode_index_bit(o.estimate) == x[i];
  }
  const double index_rate = static_cast<double>(decoded) / static_cast<double>(instances);
  if (index_rate < 2.0 / 3.0) out.fail("index decoded " + fmt(index_rate));
  out.detail << "gap-hamming decision rate " << fmt(gap_rate) << " over " << instances << " instances, index decode rate "
             << fmt(index_rate);
}

void determinism(Context& ctx, Outcome& out) {
  const Json config = Json::parse(R"({
    "seed": 99, "trials": 60,
    "cells": [
      {"name": "l2", "protocol": {"type": "lp_protocol", "p": 2, "epsilon": 0.2},
       "family": {"kind": "random_dual_pair", "norm": {"type": "lp", "p": 2}, "n": 50}},
      {"name": "topk", "protocol": {"type": "topk_protocol", "k": 3, "epsilon": 0.25},
       "family": {"kind": "random_dual_pair", "norm": {"type": "topk", "k": 3}, "n": 12}},
      {"name": "index", "protocol": {"type": "swap", "inner": {"type": "one_way", "sparsifier": {"kind": "identity"}}},
       "family": {"kind": "index", "n": 32}}
    ]})");
  const SweepResult a = run_sweep(config);
  const SweepResult b = run_sweep(config);
  if (a.json.dump() != b.json.dump()) out.fail("sweep reports differ between runs");
  if (a.summary_csv != b.summary_csv) out.fail("sweep summaries differ between runs");
  if (!a.passed) out.fail("sweep reported a failed cell");
  for (const auto& r : a.reports) ctx.audit.record(r.bits.empty() ? 0 : *std::max_element(r.bits.begin(), r.bits.end()), r.declared_bits);

  Rng rng = ctx.rng(10);
  const NormSpec norm = NormSpec::topk(3);
  const DualPair pair = random_dual_pair(norm, 12, rng);
  const ProtocolSpec spec = topk_protocol(3, 0.25);
  const auto par = protocol_trials(spec, pair.v, pair.w, ctx.trials(200), ctx.options.seed, 1001, true);
  const auto ser = protocol_trials(spec, pair.v, pair.w, ctx.trials(200), ctx.options.seed, 1001, false);
  for (std::size_t t = 0; t < par.size(); ++t)
    if (par[t].estimate != ser[t].estimate || par[t].bits != ser[t].bits) {
      out.fail("parallel and serial trials differ at " + std::to_string(t));
      break;
    }

  const ProtocolSpec twice = ProtocolSpec::swap(ProtocolSpec::swap(spec));
  Rng r1 = make_rng(17), r2 = make_rng(17), r3 = make_rng(17);
  const auto o1 = run_protocol(spec, pair.v, pair.w, r1);
  const auto o2 = run_protocol(spec, pair.v, pair.w, r2);
  const auto o3 = run_protocol(twice, pair.v, pair.w, r3);
  if (!(o1.transcript == o2.transcript) || o1.estimate != o2.estimate) out.fail("same seed, different transcript");
  if (!(o1.transcript == o3.transcript) || o1.estimate != o3.estimate) out.fail("double swap changed the transcript");

  if (ctx.audit.violations) out.fail(std::to_string(ctx.audit.violations) + " runs exceeded their declared bits");
  out.detail << "reports byte-identical; " << ctx.audit.runs << " audited runs, " << ctx.audit.violations
             << " over declared bits";
}

}  // namespace

std::vector<CriterionResult> run_acceptance(const VerifyOptions& options,
                                            const std::function<void(const CriterionResult&)>& on_result) {
  struct Entry {
    int id;
    const char* name;
    double limit;
    void (*run)(Context&, Outcome&);
  };
  static const Entry entries[] = {
      {1, "dual-norm oracle agreement", 60, dual_norm_agreement},
      {2, "top-k inf-convolution", 30, topk_inf_convolution},
      {3, "lp sparsifier contract", 600, lp_sparsifier_contract},
      {4, "weak-moment finite check", 300, weak_moment_check},
      {5, "top-k protocol end-to-end", 120, topk_protocol_end_to_end},
      {6, "h-sum composition end-to-end", 300, hsum_end_to_end},
      {7, "vertex-sampling protocol", 120, vertex_sampling},
      {8, "slack in expectation", 120, slack_expectation},
      {9, "reductions", 300, reductions},
      {10, "determinism and bit accounting", 300, determinism},
  };
  Context ctx{options, {}};
  std::vector<CriterionResult> results;
  for (const auto& e : entries) {
    if (!options.only.empty() && std::find(options.only.begin(), options.only.end(), e.id) == options.only.end())
      continue;
    CriterionResult r;
    r.id = e.id;
    r.name = e.name;
    r.time_limit = e.limit;
    Outcome o;
    const auto start = std::chrono::steady_clock::now();
    try {
      e.run(ctx, o);
    } catch (const std::exception& ex) {
      o.fail(std::string("exception: ") + ex.what());
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (r.seconds > r.time_limit) o.fail("took " + fmt(r.seconds) + " s, limit " + fmt(r.time_limit) + " s");
    r.passed = o.passed;
    r.detail = o.detail.str();
    if (on_result) on_result(r);
    results.push_back(std::move(r));
  }
  return results;
}

std::string format_result(const CriterionResult& r) {
  std::ostringstream os;
  os << (r.passed ? "PASS" : "FAIL") << " [" << r.id << "] " << r.name << ": " << r.detail << " (" << fmt(r.seconds)
     << " s)";
  return os.str();
}

}  // namespace normip
