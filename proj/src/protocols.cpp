#include "normip/protocols.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace normip {
namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// Inputs produced by splits and lifts sit on the unit sphere up to rounding.
constexpr double kNormSlack = 1e-7;

void check_pair(std::span<const double> v, std::span<const double> w, const char* what) {
  if (v.empty()) throw PreconditionError(std::string(what) + ": empty input");
  if (v.size() != w.size()) throw PreconditionError(std::string(what) + ": v and w differ in dimension");
  require_finite(v, what);
  require_finite(w, what);
}

void check_ball(double norm, const char* what) {
  if (norm > 1.0 + kNormSlack) {
    std::ostringstream os;
    os << what << ": norm " << norm << " exceeds 1";
    throw PreconditionError(os.str());
  }
}

void check_one_way_inputs(const SparsifierSpec& s, std::span<const double> cv, std::span<const double> w_over_c) {
  switch (s.kind) {
    case SparsifierKind::lp_sampling:
      check_ball(lp_norm(cv, s.p), "one-way: ||v||_p");
      check_ball(lp_norm(w_over_c, dual_exponent(s.p)), "one-way: ||w||_q");
      break;
    case SparsifierKind::level_set:
      check_ball(eval_norm(*s.norm, cv), "one-way: ||v||_N");
      break;
    case SparsifierKind::identity:
      break;
  }
}

double median_of(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const std::size_t h = values.size() / 2;
  return values.size() % 2 ? values[h] : 0.5 * (values[h - 1] + values[h]);
}

unsigned forward_bits(std::size_t n, double eps) { return Quantizer(n, eps, 1).value_bits(); }

// Alice tells Bob a real she learned; appended to the transcript.
double forward_estimate(double x, std::size_t n, double eps, Transcript& t, const char* label) {
  const Quantizer q(n, eps, 1);
  bool saturated = false;
  const auto c = q.quantize_saturating(x, saturated);
  BitWriter bw;
  bw.write(c.code, q.value_bits());
  t.append(Message{Party::alice, bw.take(), q.value_bits(), label});
  return c.value;
}

std::vector<ProtocolSpec> block_protocols(const HSumCompose& h, std::size_t blocks) {
  if (h.inner.size() == 1) return std::vector<ProtocolSpec>(blocks, h.inner.front());
  if (h.inner.size() != blocks) throw PreconditionError("hsum protocol: one inner protocol per block");
  return h.inner;
}

std::size_t vertex_count(const Polytope& P) {
  return P.has_vrep() ? P.vrep().size() : P.with_vertices().vrep().size();
}

}  // namespace

ProtocolSpec ProtocolSpec::one_way(SparsifierSpec sparsifier, double scale) {
  sparsifier.validate();
  if (!(scale > 0.0) || !std::isfinite(scale)) throw PreconditionError("one_way: scale must be positive");
  return ProtocolSpec(std::make_shared<const Node>(OneWaySparsify{std::move(sparsifier), scale}));
}

ProtocolSpec ProtocolSpec::swap(ProtocolSpec inner) {
  return ProtocolSpec(std::make_shared<const Node>(Swap{std::move(inner)}));
}

ProtocolSpec ProtocolSpec::max_split(NormSpec a, NormSpec b, ProtocolSpec inner_a, ProtocolSpec inner_b) {
  return ProtocolSpec(
      std::make_shared<const Node>(MaxSplit{std::move(a), std::move(b), std::move(inner_a), std::move(inner_b)}));
}

ProtocolSpec ProtocolSpec::hsum(NormSpec space, SparsifierSpec outer, std::vector<ProtocolSpec> inner,
                                double repeat_constant) {
  const auto* h = std::get_if<HSumNorm>(&space.node());
  if (!h) throw PreconditionError("hsum protocol: space must be an h-sum");
  if (inner.empty() || (inner.size() != 1 && inner.size() != h->parts.size()))
    throw PreconditionError("hsum protocol: one inner protocol per block, or one shared");
  if (outer.kind == SparsifierKind::lp_sampling && outer.p.value() > 2.0)
    throw PreconditionError("hsum protocol: outer sampler needs p <= 2");
  if (!(repeat_constant > 0.0)) throw PreconditionError("hsum protocol: repeat constant must be positive");
  outer.validate();
  return ProtocolSpec(
      std::make_shared<const Node>(HSumCompose{std::move(space), std::move(outer), std::move(inner), repeat_constant}));
}

ProtocolSpec ProtocolSpec::embed(Embedding embedding, ProtocolSpec inner) {
  embedding.audit();
  return ProtocolSpec(std::make_shared<const Node>(EmbedReduce{std::move(embedding), std::move(inner)}));
}

ProtocolSpec ProtocolSpec::vertex_sample(Polytope body, double eps, double constant) {
  if (!(eps > 0.0 && eps < 1.0)) throw PreconditionError("vertex_sample: eps must lie in (0,1)");
  if (!(constant > 0.0)) throw PreconditionError("vertex_sample: constant must be positive");
  Polytope full = body.with_vertices().with_inequalities();
  return ProtocolSpec(std::make_shared<const Node>(VertexSample{std::move(full), eps, constant}));
}

std::string ProtocolSpec::describe() const {
  return std::visit(
      overloaded{
          [](const OneWaySparsify& s) {
            std::ostringstream os;
            os << "OneWay(";
            switch (s.sparsifier.kind) {
              case SparsifierKind::lp_sampling:
                os << "lp p=" << s.sparsifier.p.value();
                break;
              case SparsifierKind::level_set:
                os << "level-set " << s.sparsifier.norm->describe();
                break;
              case SparsifierKind::identity:
                os << "identity";
                break;
            }
            os << ", eps=" << s.sparsifier.epsilon;
            if (s.scale != 1.0) os << ", scale=" << s.scale;
            os << ")";
            return os.str();
          },
          [](const Swap& s) { return "Swap(" + s.inner.describe() + ")"; },
          [](const MaxSplit& s) {
            return "MaxSplit(" + s.a.describe() + ", " + s.b.describe() + "; " + s.inner_a.describe() + ", " +
                   s.inner_b.describe() + ")";
          },
          [](const HSumCompose& s) {
            std::string out = "HSum(" + s.space.describe() + "; ";
            for (std::size_t i = 0; i < s.inner.size(); ++i) out += (i ? ", " : "") + s.inner[i].describe();
            return out + ")";
          },
          [](const EmbedReduce& s) {
            std::ostringstream os;
            os << "Embed(" << s.embedding.cols << "->" << s.embedding.rows << ", alpha=" << s.embedding.distortion
               << "; " << s.inner.describe() << ")";
            return os.str();
          },
          [](const VertexSample& s) {
            std::ostringstream os;
            os << "VertexSample(dim=" << s.body.dim() << ", eps=" << s.epsilon << ")";
            return os.str();
          },
      },
      node());
}

Accuracy declared_accuracy(const ProtocolSpec& spec) {
  return std::visit(
      overloaded{
          [](const OneWaySparsify& s) {
            // Identity only pays quantization.
            if (s.sparsifier.kind == SparsifierKind::identity) return Accuracy{s.sparsifier.epsilon / 4.0, 0.0};
            return Accuracy{s.sparsifier.epsilon, s.sparsifier.delta};
          },
          [](const Swap& s) { return declared_accuracy(s.inner); },
          [](const MaxSplit& s) {
            const Accuracy a = declared_accuracy(s.inner_a);
            const Accuracy b = declared_accuracy(s.inner_b);
            return Accuracy{std::max(a.epsilon, b.epsilon), a.delta + b.delta};
          },
          [](const HSumCompose& s) {
            double eps = 0.0;
            for (const auto& p : s.inner) eps = std::max(eps, declared_accuracy(p).epsilon);
            return Accuracy{2.0 * eps + s.outer.epsilon, 1.0 / 3.0};
          },
          [](const EmbedReduce& s) {
            const Accuracy a = declared_accuracy(s.inner);
            return Accuracy{s.embedding.distortion * a.epsilon, a.delta};
          },
          [](const VertexSample& s) { return Accuracy{s.epsilon, 1.0 / 3.0}; },
      },
      spec.node());
}

Party output_party(const ProtocolSpec& spec) {
  return std::visit(overloaded{
                        [](const Swap& s) { return other(output_party(s.inner)); },
                        [](const EmbedReduce& s) { return output_party(s.inner); },
                        [](const auto&) { return Party::bob; },
                    },
                    spec.node());
}

std::size_t message_terms(const SparsifierSpec& s, std::size_t n) {
  if (s.kind == SparsifierKind::identity) return n;
  return std::min(s.sample_count(n), n);
}

std::size_t median_repeats(std::size_t d2, double constant) {
  return static_cast<std::size_t>(std::ceil(constant * std::log2(static_cast<double>(d2) + 2.0) - 1e-12));
}

std::size_t declared_cost(const ProtocolSpec& spec, std::size_t n) {
  if (n == 0) throw PreconditionError("declared_cost: n must be positive");
  return std::visit(
      overloaded{
          [n](const OneWaySparsify& s) -> std::size_t {
            const std::size_t D = message_terms(s.sparsifier, n);
            return D * (bits_for(n) + Quantizer(n, s.sparsifier.epsilon, D).value_bits());
          },
          [n](const Swap& s) { return declared_cost(s.inner, n); },
          [n](const MaxSplit& s) {
            std::size_t total = 2;  // Bob's flags for the two halves
            for (const auto* c : {&s.inner_a, &s.inner_b}) {
              total += declared_cost(*c, n);
              if (output_party(*c) == Party::alice) total += forward_bits(n, declared_accuracy(*c).epsilon);
            }
            return total;
          },
          [n](const HSumCompose& s) {
            const auto sizes = hsum_block_sizes(s.space, n);
            const std::size_t d = sizes.size();
            const std::size_t d2 = message_terms(s.outer, d);
            const std::size_t reps = median_repeats(d2, s.repeat_constant);
            const auto inner = block_protocols(s, d);
            std::size_t worst = 0;
            for (std::size_t i = 0; i < d; ++i) {
              std::size_t c = reps * declared_cost(inner[i], sizes[i]);
              if (output_party(inner[i]) == Party::alice)
                c += forward_bits(sizes[i], declared_accuracy(inner[i]).epsilon);
              worst = std::max(worst, c);
            }
            return d2 * (bits_for(d) + Quantizer(d, s.outer.epsilon, d2).value_bits()) + d2 * worst;
          },
          [n](const EmbedReduce& s) {
            if (n != s.embedding.cols) throw PreconditionError("declared_cost: embedding source dimension mismatch");
            return declared_cost(s.inner, s.embedding.rows);
          },
          [](const VertexSample& s) -> std::size_t {
            return vertex_sample_count(s.epsilon, s.constant) * bits_for(vertex_count(s.body));
          },
      },
      spec.node());
}

ProtocolOutcome run_one_way(const OneWaySparsify& spec, std::span<const double> v, std::span<const double> w,
                            Rng& rng) {
  check_pair(v, w, "one-way");
  const double c = spec.scale;
  const Vector cv = scaled(v, c);
  const Vector wc = scaled(w, 1.0 / c);
  check_one_way_inputs(spec.sparsifier, cv, wc);

  const std::size_t n = v.size();
  const SparseVector phi = sparsify(cv, spec.sparsifier, rng);
  const std::size_t D = message_terms(spec.sparsifier, n);
  if (phi.nnz() > D) throw std::logic_error("one-way: sparsifier exceeded its declared support");

  const Quantizer q(n, spec.sparsifier.epsilon, D);
  const unsigned ib = bits_for(n);
  BitWriter bw;
  double est = 0.0;
  std::size_t saturated = 0;
  for (const auto& [i, x] : phi.entries) {
    bool sat = false;
    const auto code = q.quantize_saturating(x, sat);
    saturated += sat;
    bw.write(i, ib);
    bw.write(code.code, q.value_bits());
    est += code.value * wc[i];
  }
  ProtocolOutcome out;
  const std::size_t bits = bw.bits();
  out.transcript.append(Message{Party::alice, bw.take(), bits, "sparsified"});
  out.estimate = est;
  out.output_party = Party::bob;
  out.sparsity = phi.nnz();
  out.trace.emplace_back("one_way.nnz", static_cast<double>(phi.nnz()));
  if (saturated) out.trace.emplace_back("one_way.saturated", static_cast<double>(saturated));
  return out;
}

ProtocolOutcome run_swap(const Swap& spec, std::span<const double> v, std::span<const double> w, Rng& rng) {
  ProtocolOutcome out = run_protocol(spec.inner, w, v, rng);
  out.transcript = out.transcript.swapped();
  out.output_party = other(out.output_party);
  return out;
}

ProtocolOutcome run_max_split(const MaxSplit& spec, std::span<const double> v, std::span<const double> w, Rng& rng) {
  check_pair(v, w, "max-split");
  check_ball(std::max(eval_norm(spec.a, v), eval_norm(spec.b, v)), "max-split: ||v||");
  const MaxDualSplit split = split_max_dual(w, spec.a, spec.b);
  const std::size_t n = v.size();

  ProtocolOutcome out;
  out.output_party = Party::bob;
  const bool active[2] = {split.budget1 > 0.0, split.budget2 > 0.0};
  BitWriter flags;
  flags.write(active[0], 1);
  flags.write(active[1], 1);
  out.transcript.append(Message{Party::bob, flags.take(), 2, "split-flags"});

  const ProtocolSpec* children[2] = {&spec.inner_a, &spec.inner_b};
  const Vector* parts[2] = {&split.w1, &split.w2};
  const double budgets[2] = {split.budget1, split.budget2};
  double est = 0.0;
  for (int i = 0; i < 2; ++i) {
    if (!active[i]) continue;
    const Vector wi = scaled(*parts[i], 1.0 / budgets[i]);
    ProtocolOutcome child = run_protocol(*children[i], v, wi, rng);
    double e = child.estimate;
    out.transcript.append(child.transcript);
    if (child.output_party == Party::alice)
      e = forward_estimate(e, n, declared_accuracy(*children[i]).epsilon, out.transcript, "forward");
    est += budgets[i] * e;
    out.sparsity += child.sparsity;
    for (auto& t : child.trace) out.trace.push_back(std::move(t));
  }
  out.trace.emplace_back("max_split.budget_a", split.budget1);
  out.trace.emplace_back("max_split.budget_b", split.budget2);
  out.estimate = est;
  return out;
}

ProtocolOutcome run_hsum_compose(const HSumCompose& spec, std::span<const double> v, std::span<const double> w,
                                 Rng& rng) {
  check_pair(v, w, "hsum");
  const auto& h = std::get<HSumNorm>(spec.space.node());
  const auto sizes = hsum_block_sizes(spec.space, v.size());
  const std::size_t d = sizes.size();
  const auto inner = block_protocols(spec, d);

  Vector q(d), r(d);
  std::vector<std::size_t> offset(d, 0);
  for (std::size_t i = 0; i < d; ++i) {
    if (i) offset[i] = offset[i - 1] + sizes[i - 1];
    q[i] = eval_norm(h.parts[i], v.subspan(offset[i], sizes[i]));
    r[i] = eval_norm(dual_spec(h.parts[i]), w.subspan(offset[i], sizes[i]));
  }
  check_ball(eval_norm(h.outer, q), "hsum: ||v||");

  const SparseVector phi = sparsify(q, spec.outer, rng);
  const std::size_t d2 = message_terms(spec.outer, d);
  if (phi.nnz() > d2) throw std::logic_error("hsum: outer sparsifier exceeded its declared support");
  const Quantizer quant(d, spec.outer.epsilon, d2);
  const unsigned ib = bits_for(d);
  BitWriter bw;
  std::vector<std::pair<std::size_t, double>> sent;
  for (const auto& [i, x] : phi.entries) {
    bool sat = false;
    const auto code = quant.quantize_saturating(x, sat);
    bw.write(i, ib);
    bw.write(code.code, quant.value_bits());
    sent.emplace_back(i, code.value);
  }
  ProtocolOutcome out;
  out.output_party = Party::bob;
  const std::size_t bits = bw.bits();
  out.transcript.append(Message{Party::alice, bw.take(), bits, "block-weights"});
  out.sparsity = phi.nnz();

  const std::size_t reps = median_repeats(d2, spec.repeat_constant);
  double u = 0.0;
  for (const auto& [i, phi_i] : sent) {
    if (q[i] == 0.0 || r[i] == 0.0) continue;
    const Vector vi = scaled(v.subspan(offset[i], sizes[i]), 1.0 / q[i]);
    const Vector wi = scaled(w.subspan(offset[i], sizes[i]), 1.0 / r[i]);
    std::vector<double> runs;
    runs.reserve(reps);
    Party where = Party::bob;
    for (std::size_t t = 0; t < reps; ++t) {
      ProtocolOutcome child = run_protocol(inner[i], vi, wi, rng);
      runs.push_back(child.estimate);
      out.transcript.append(child.transcript);
      where = child.output_party;
    }
    double m = median_of(std::move(runs));
    if (where == Party::alice)
      m = forward_estimate(m, sizes[i], declared_accuracy(inner[i]).epsilon, out.transcript, "forward-median");
    u += phi_i * r[i] * m;
  }
  out.estimate = u;
  out.trace.emplace_back("hsum.support", static_cast<double>(phi.nnz()));
  out.trace.emplace_back("hsum.repeats", static_cast<double>(reps));
  return out;
}

ProtocolOutcome run_embed_reduce(const EmbedReduce& spec, std::span<const double> v, std::span<const double> w,
                                 Rng& rng) {
  check_pair(v, w, "embed");
  const Embedding& e = spec.embedding;
  if (v.size() != e.cols) throw PreconditionError("embed: input dimension differs from the embedding source");
  const Vector ev = e.apply(v);
  const LiftResult lift = lift_dual_vector(e, w);
  if (lift.residual > 1e-6) throw PreconditionError("embed: dual lift failed");
  // A sound lift has norm <= alpha; an inexact one may overshoot slightly.
  const double alpha = std::max(e.distortion, lift.norm);
  ProtocolOutcome out;
  if (alpha == 0.0) {
    out = run_protocol(spec.inner, ev, lift.w, rng);
    out.estimate = 0.0;
  } else {
    out = run_protocol(spec.inner, ev, scaled(lift.w, 1.0 / alpha), rng);
    out.estimate *= alpha;
  }
  out.trace.emplace_back("embed.lift_norm", lift.norm);
  if (lift.norm > e.distortion) out.trace.emplace_back("embed.lift_excess", lift.norm - e.distortion);
  return out;
}

ProtocolOutcome run_protocol(const ProtocolSpec& spec, std::span<const double> v, std::span<const double> w,
                             Rng& rng) {
  return std::visit(overloaded{
                        [&](const OneWaySparsify& s) { return run_one_way(s, v, w, rng); },
                        [&](const Swap& s) { return run_swap(s, v, w, rng); },
                        [&](const MaxSplit& s) { return run_max_split(s, v, w, rng); },
                        [&](const HSumCompose& s) { return run_hsum_compose(s, v, w, rng); },
                        [&](const EmbedReduce& s) { return run_embed_reduce(s, v, w, rng); },
                        [&](const VertexSample& s) {
                          return vertex_sampling_protocol(s.body, v, w, s.epsilon, rng, s.constant);
                        },
                    },
                    spec.node());
}

ProtocolSpec lp_protocol(Exponent p, double eps, double delta) {
  if (!p.is_infinite() && p.value() <= 2.0)
    return ProtocolSpec::one_way(SparsifierSpec::lp_sampling(p, eps, delta));
  return ProtocolSpec::swap(ProtocolSpec::one_way(SparsifierSpec::lp_sampling(dual_exponent(p), eps, delta)));
}

ProtocolSpec topk_protocol(std::size_t k, double eps, double delta) {
  if (k == 0) throw PreconditionError("topk_protocol: k must be positive");
  const double kk = static_cast<double>(k);
  auto l1 = SparsifierSpec::lp_sampling(Exponent(1.0), eps, delta / 2.0);
  return ProtocolSpec::swap(ProtocolSpec::max_split(NormSpec::linf(), NormSpec::scaled(NormSpec::lp(1.0), 1.0 / kk),
                                                    ProtocolSpec::swap(ProtocolSpec::one_way(l1)),
                                                    ProtocolSpec::one_way(l1, 1.0 / kk)));
}

ProtocolSpec hsum_topk_protocol(Exponent outer_p, std::vector<std::size_t> ks, std::size_t block, double eps,
                                double gamma) {
  if (ks.empty() || block == 0) throw PreconditionError("hsum_topk_protocol: needs blocks");
  std::vector<NormSpec> parts;
  std::vector<ProtocolSpec> inner;
  for (auto k : ks) {
    if (k > block) throw PreconditionError("hsum_topk_protocol: k exceeds the block size");
    parts.push_back(NormSpec::topk(k, block));
    inner.push_back(topk_protocol(k, eps));
  }
  std::vector<std::size_t> blocks(ks.size(), block);
  NormSpec space = NormSpec::hsum(NormSpec::lp(outer_p), std::move(parts), std::move(blocks));
  return ProtocolSpec::hsum(std::move(space), SparsifierSpec::lp_sampling(outer_p, gamma, 1.0 / 9.0),
                            std::move(inner));
}

}  // namespace normip
