#include "normip/harness.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "normip/spaces.hpp"

namespace normip {
namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

const OneWaySparsify* one_way_root(const ProtocolSpec& spec) {
  const ProtocolSpec* s = &spec;
  while (const auto* sw = std::get_if<Swap>(&s->node())) s = &sw->inner;
  return std::get_if<OneWaySparsify>(&s->node());
}

Vector gaussian(std::size_t n, Rng& rng) {
  Vector g(n);
  for (auto& x : g) x = standard_normal(rng);
  return g;
}

Vector normalized(Vector x, double norm) {
  if (!(norm > 0.0)) throw std::runtime_error("cannot normalize a zero vector");
  for (auto& e : x) e /= norm;
  return x;
}

SparsifierSpec sparsifier_with_epsilon(SparsifierSpec s, double eps) {
  s.epsilon = eps;
  s.validate();
  return s;
}

// Shortest text that reads back to the same double.
std::string format_double(double x) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return {buf, r.ptr};
}

// `family` is either {"kind": .., params..} or a bare kind whose params sit
// in `cell`.
DualPair instance_for(const Json& cell, const ProtocolSpec& spec, Rng& rng) {
  const Json& raw = cell.at("family");
  const Json& family = raw.is_string() ? cell : raw;
  const auto kind = raw.is_string() ? raw.get<std::string>() : family.at("kind").get<std::string>();
  if (kind == "random_dual_pair")
    return random_dual_pair(norm_from_json(family.at("norm")), family.at("n").get<std::size_t>(), rng);
  if (kind == "index") {
    const auto n = family.at("n").get<std::size_t>();
    std::vector<std::uint8_t> x(n);
    for (auto& b : x) b = static_cast<std::uint8_t>(rng() & 1U);
    return gen_index_instance(x, static_cast<std::size_t>(uniform_index(rng, n)));
  }
  if (kind == "gap_hamming") {
    const Exponent p = family.contains("p") ? exponent_from_json(family.at("p")) : Exponent(2.0);
    auto g = gen_gap_hamming(family.at("k").get<std::size_t>(), family.at("C").get<double>(), rng, p);
    return {std::move(g.v), std::move(g.w)};
  }
  if (kind == "worst_case_search") {
    const auto* ow = one_way_root(spec);
    if (!ow) throw std::invalid_argument("worst_case_search needs a one-way protocol");
    const NormSpec norm = norm_from_json(family.at("norm"));
    const auto n = family.at("n").get<std::size_t>();
    Vector v = random_unit_vector(norm, n, rng);
    AdversarialOptions opt;
    opt.budget = family.value("budget", std::size_t{64});
    opt.keep = 1;
    opt.seed = rng();
    auto worst = adversarial_dual_search(norm, v, ow->sparsifier, opt);
    return {std::move(v), std::move(worst.front().w)};
  }
  if (kind == "fixed") return {family.at("v").get<Vector>(), family.at("w").get<Vector>()};
  throw std::invalid_argument("unknown instance family '" + kind + "'");
}

}  // namespace

// --- reports --------------------------------------------------------------

double TrialReport::recompute_success_rate() const {
  if (errors.empty()) return 0.0;
  const auto ok = std::count_if(errors.begin(), errors.end(), [&](double z) { return std::abs(z) <= epsilon; });
  return static_cast<double>(ok) / static_cast<double>(errors.size());
}

double TrialReport::p95_abs_error() const {
  if (errors.empty()) return 0.0;
  std::vector<double> a(errors.size());
  std::transform(errors.begin(), errors.end(), a.begin(), [](double z) { return std::abs(z); });
  std::sort(a.begin(), a.end());
  const auto idx = static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(a.size()))) - 1;
  return a[std::min(idx, a.size() - 1)];
}

bool TrialReport::bits_within_bound() const {
  return std::all_of(bits.begin(), bits.end(), [&](std::size_t b) { return b <= declared_bits; });
}

bool TrialReport::contract_met() const {
  if (errors.empty()) return false;
  const double target = 1.0 - delta;
  const double se = std::sqrt(target * (1.0 - target) / static_cast<double>(errors.size()));
  return success_rate >= target - 3.0 * se;
}

std::string fingerprint(const ProtocolSpec& spec) {
  std::string text;
  try {
    text = to_json(spec).dump();
  } catch (const std::invalid_argument&) {
    text = spec.describe();
  }
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

TrialReport make_report(std::string cell, const ProtocolSpec& spec, std::size_t n, std::span<const TrialResult> results,
                        std::uint64_t seed, std::uint64_t cell_id) {
  TrialReport r;
  r.cell = std::move(cell);
  r.fingerprint = fingerprint(spec);
  r.seed = seed;
  r.cell_id = cell_id;
  r.n = n;
  const Accuracy acc = declared_accuracy(spec);
  r.epsilon = acc.epsilon;
  r.delta = acc.delta;
  r.declared_bits = declared_cost(spec, n);
  if (const auto* ow = one_way_root(spec)) {
    r.samples = ow->sparsifier.sample_count(n);
    r.support = message_terms(ow->sparsifier, n);
  }
  for (const auto& t : results) {
    r.errors.push_back(t.estimate - t.truth);
    r.bits.push_back(t.bits);
    r.sparsity.push_back(t.sparsity);
  }
  r.success_rate = r.recompute_success_rate();
  if (!r.errors.empty()) {
    const double m = std::accumulate(r.errors.begin(), r.errors.end(), 0.0) / static_cast<double>(r.errors.size());
    double ss = 0.0;
    for (double z : r.errors) ss += (z - m) * (z - m);
    r.mean_error = m;
    r.variance = r.errors.size() > 1 ? ss / static_cast<double>(r.errors.size() - 1) : 0.0;
  }
  return r;
}

Json to_json(const TrialReport& r) {
  Json j{{"cell", r.cell},
         {"fingerprint", r.fingerprint},
         {"seed", r.seed},
         {"cell_id", r.cell_id},
         {"n", r.n},
         {"epsilon", r.epsilon},
         {"delta", r.delta},
         {"declared_bits", r.declared_bits},
         {"samples", r.samples},
         {"support", r.support},
         {"trials", r.errors.size()},
         {"errors", r.errors},
         {"bits", r.bits},
         {"sparsity", r.sparsity},
         {"success_rate", r.success_rate},
         {"mean_error", r.mean_error},
         {"variance", r.variance},
         {"p95_abs_error", r.p95_abs_error()},
         {"bits_within_bound", r.bits_within_bound()},
         {"contract_met", r.contract_met()}};
  if (r.failure) j["failure"] = *r.failure;
  return j;
}

TrialReport report_from_json(const Json& j) {
  TrialReport r;
  r.cell = j.at("cell").get<std::string>();
  r.fingerprint = j.at("fingerprint").get<std::string>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.cell_id = j.at("cell_id").get<std::uint64_t>();
  r.n = j.at("n").get<std::size_t>();
  r.epsilon = j.at("epsilon").get<double>();
  r.delta = j.at("delta").get<double>();
  r.declared_bits = j.at("declared_bits").get<std::size_t>();
  r.samples = j.value("samples", std::size_t{0});
  r.support = j.value("support", std::size_t{0});
  r.errors = j.at("errors").get<std::vector<double>>();
  r.bits = j.at("bits").get<std::vector<std::size_t>>();
  r.sparsity = j.at("sparsity").get<std::vector<std::size_t>>();
  r.mean_error = j.value("mean_error", 0.0);
  r.variance = j.value("variance", 0.0);
  if (j.contains("failure")) r.failure = j.at("failure").get<std::string>();
  r.success_rate = r.recompute_success_rate();
  if (std::abs(r.success_rate - j.at("success_rate").get<double>()) > 1e-12)
    throw std::runtime_error("report: stored success rate disagrees with its error samples");
  return r;
}

// --- instances --------------------------------------------------------------

Vector random_unit_vector(const NormSpec& spec, std::size_t n, Rng& rng) {
  Vector g = gaussian(n, rng);
  return normalized(g, eval_norm(spec, g));
}

Vector random_dual_unit_vector(const NormSpec& spec, std::size_t n, Rng& rng) {
  Vector g = gaussian(n, rng);
  return normalized(g, eval_norm(dual_spec(spec), g));
}

DualPair random_dual_pair(const NormSpec& spec, std::size_t n, Rng& rng) {
  Vector v = random_unit_vector(spec, n, rng);
  Vector w = random_dual_unit_vector(spec, n, rng);
  return {std::move(v), std::move(w)};
}

DualPair gen_index_instance(std::span<const std::uint8_t> x, std::size_t i) {
  if (x.empty()) throw PreconditionError("index instance: empty bitstring");
  if (i >= x.size()) throw PreconditionError("index instance: i out of range");
  DualPair p;
  p.v.resize(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) {
    if (x[j] > 1) throw PreconditionError("index instance: x must be binary");
    p.v[j] = x[j];
  }
  p.w = unit_vector(x.size(), i);
  return p;
}

int decode_index_bit(double estimate) { return estimate > 0.5 ? 1 : 0; }

const char* to_string(GapSide s) { return s == GapSide::low ? "low" : "high"; }

GapHammingInstance gap_hamming_instance(std::vector<std::uint8_t> x, std::vector<std::uint8_t> y, double C,
                                        Exponent p) {
  const std::size_t k = x.size();
  if (k == 0 || y.size() != k) throw PreconditionError("gap hamming: x and y must have equal positive length");
  if (!(C > 0.0)) throw PreconditionError("gap hamming: needs C > 0");
  const double half = 0.5 * static_cast<double>(k);
  const double gap = C * std::sqrt(static_cast<double>(k));

  GapHammingInstance g;
  g.p = p;
  for (std::size_t i = 0; i < k; ++i) {
    if (x[i] > 1 || y[i] > 1) throw PreconditionError("gap hamming: entries must be bits");
    g.weight_x += x[i];
    g.weight_y += y[i];
    g.overlap += x[i] & y[i];
    g.distance += x[i] ^ y[i];
  }
  if (g.weight_x + g.weight_y != g.distance + 2 * g.overlap)
    throw std::logic_error("gap hamming: distance identity violated");
  const double d = static_cast<double>(g.distance);
  if (d > half - gap && d < half + gap) throw PreconditionError("gap hamming: distance falls inside the gap");
  g.side = d <= half - gap ? GapSide::low : GapSide::high;

  const Exponent q = dual_exponent(p);
  const auto lp_of_bits = [](std::size_t weight, Exponent e) {
    if (weight == 0) return 0.0;
    return e.is_infinite() ? 1.0 : std::pow(static_cast<double>(weight), 1.0 / e.value());
  };
  g.norm_x = lp_of_bits(g.weight_x, p);
  g.norm_y = lp_of_bits(g.weight_y, q);
  g.v.assign(k, 0.0);
  g.w.assign(k, 0.0);
  for (std::size_t i = 0; i < k; ++i) {
    if (x[i]) g.v[i] = 1.0 / g.norm_x;
    if (y[i]) g.w[i] = 1.0 / g.norm_y;
  }
  g.x = std::move(x);
  g.y = std::move(y);
  return g;
}

GapHammingInstance gen_gap_hamming(std::size_t k, double C, Rng& rng, Exponent p, std::uint64_t max_attempts) {
  if (k == 0 || !(C > 0.0)) throw PreconditionError("gap hamming: needs k >= 1 and C > 0");
  if (static_cast<double>(k) < 4.0 * C * C) throw PreconditionError("gap hamming: needs k >= 4 C^2");
  const double half = 0.5 * static_cast<double>(k);
  const double gap = C * std::sqrt(static_cast<double>(k));
  const std::size_t words = (k + 63) / 64;
  const std::uint64_t tail_mask = k % 64 ? (std::uint64_t{1} << (k % 64)) - 1 : ~std::uint64_t{0};
  std::vector<std::uint64_t> xw(words), yw(words);

  for (std::uint64_t attempt = 0; attempt < max_attempts; ++attempt) {
    std::size_t dist = 0;
    for (std::size_t i = 0; i < words; ++i) {
      xw[i] = rng();
      yw[i] = rng();
      if (i + 1 == words) {
        xw[i] &= tail_mask;
        yw[i] &= tail_mask;
      }
      dist += static_cast<std::size_t>(std::popcount(xw[i] ^ yw[i]));
    }
    const double d = static_cast<double>(dist);
    if (d > half - gap && d < half + gap) continue;

    std::vector<std::uint8_t> x(k), y(k);
    for (std::size_t i = 0; i < k; ++i) {
      x[i] = static_cast<std::uint8_t>((xw[i / 64] >> (i % 64)) & 1U);
      y[i] = static_cast<std::uint8_t>((yw[i / 64] >> (i % 64)) & 1U);
    }
    GapHammingInstance g = gap_hamming_instance(std::move(x), std::move(y), C, p);
    if (g.distance != dist) throw std::logic_error("gap hamming: popcount disagrees with the bitwise distance");
    return g;
  }
  throw std::runtime_error("gap hamming: rejection budget exceeded");
}

GapSide decide_gap_side(const GapHammingInstance& inst, double estimate) {
  const double overlap = estimate * inst.norm_x * inst.norm_y;
  const double dist = static_cast<double>(inst.weight_x + inst.weight_y) - 2.0 * overlap;
  return dist > 0.5 * static_cast<double>(inst.x.size()) ? GapSide::high : GapSide::low;
}

// --- adversarial search -------------------------------------------------

std::vector<AdversarialCandidate> adversarial_dual_search(const NormSpec& spec, std::span<const double> v,
                                                          const SparsifierSpec& sparsifier,
                                                          const AdversarialOptions& options) {
  if (options.budget == 0) throw PreconditionError("adversarial search: budget must be positive");
  const std::size_t n = v.size();
  const NormSpec dual = dual_spec(spec);
  std::vector<AdversarialCandidate> cands;
  const auto add = [&](Vector w, std::string origin) {
    if (cands.size() >= options.budget) return;
    const double norm = eval_norm(dual, w);
    if (!(norm > 0.0)) return;
    cands.push_back({normalized(std::move(w), norm), 1.0, std::move(origin)});
  };

  // Few dual-ball vertices: take them all.
  try {
    auto verts = ball_vertices(dual, n, options.budget);
    if (verts.size() <= options.budget)
      for (auto& w : verts) add(std::move(w), "vertex");
  } catch (const std::exception&) {
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return std::abs(v[a]) < std::abs(v[b]); });
  const auto sign = [&](std::size_t i) { return v[i] < 0.0 ? -1.0 : 1.0; };

  try {
    add(norm_subgradient(spec, v), "aligned");
  } catch (const std::logic_error&) {
  }
  {
    Vector w(n);
    for (std::size_t i = 0; i < n; ++i) w[i] = sign(i);
    add(std::move(w), "sign");
  }
  // Mass on the coordinates the sampler reaches least often, and on the
  // heaviest ones, for support sizes 1, 2, 4, ...
  for (std::size_t m = 1; m <= n && cands.size() < options.budget; m *= 2) {
    Vector lo(n, 0.0), hi(n, 0.0), mixed(n, 0.0);
    for (std::size_t r = 0; r < m; ++r) {
      lo[order[r]] = sign(order[r]);
      hi[order[n - 1 - r]] = sign(order[n - 1 - r]);
      mixed[order[r]] = r % 2 ? -sign(order[r]) : sign(order[r]);
    }
    add(std::move(lo), "light-" + std::to_string(m));
    add(std::move(hi), "heavy-" + std::to_string(m));
    add(std::move(mixed), "light-alternating-" + std::to_string(m));
  }
  Rng rng = make_rng(substream_seed(options.seed, 0xad7e, 0));
  for (const double a : {-1.0, -0.5, 0.5, 1.0}) {
    Vector w(n);
    for (std::size_t i = 0; i < n; ++i) w[i] = (rng() & 1U ? 1.0 : -1.0) * std::pow(std::abs(v[i]) + 1e-12, a);
    add(std::move(w), "profile");
  }
  while (cands.size() < options.budget) {
    Vector w(n);
    for (auto& x : w) x = rng() & 1U ? 1.0 : -1.0;
    add(std::move(w), "random-sign");
  }

  std::vector<Vector> ws;
  ws.reserve(cands.size());
  for (const auto& c : cands) ws.push_back(c.w);
  const auto rows = sparsifier_estimates(sparsifier, v, ws, options.trials, options.seed, 0xad7e + 1);
  for (std::size_t j = 0; j < cands.size(); ++j) {
    const double truth = dot(v, cands[j].w);
    std::size_t ok = 0;
    for (const auto& row : rows) ok += std::abs(row[j] - truth) <= sparsifier.epsilon;
    cands[j].success_rate = static_cast<double>(ok) / static_cast<double>(rows.size());
  }
  std::stable_sort(cands.begin(), cands.end(),
                   [](const auto& a, const auto& b) { return a.success_rate < b.success_rate; });
  if (cands.size() > options.keep) cands.resize(options.keep);
  return cands;
}

// --- sweeps -------------------------------------------------------------

ProtocolSpec with_epsilon(const ProtocolSpec& spec, double eps) {
  return std::visit(
      overloaded{
          [&](const OneWaySparsify& s) {
            return ProtocolSpec::one_way(sparsifier_with_epsilon(s.sparsifier, eps), s.scale);
          },
          [&](const Swap& s) { return ProtocolSpec::swap(with_epsilon(s.inner, eps)); },
          [&](const MaxSplit& s) {
            return ProtocolSpec::max_split(s.a, s.b, with_epsilon(s.inner_a, eps), with_epsilon(s.inner_b, eps));
          },
          [&](const HSumCompose& s) {
            std::vector<ProtocolSpec> inner;
            for (const auto& p : s.inner) inner.push_back(with_epsilon(p, eps));
            return ProtocolSpec::hsum(s.space, sparsifier_with_epsilon(s.outer, eps), std::move(inner),
                                      s.repeat_constant);
          },
          [&](const EmbedReduce& s) { return ProtocolSpec::embed(s.embedding, with_epsilon(s.inner, eps)); },
          [&](const VertexSample& s) { return ProtocolSpec::vertex_sample(s.body, eps, s.constant); },
      },
      spec.node());
}

SweepResult run_sweep(const Json& config) {
  SweepResult out;
  const auto seed = config.value("seed", std::uint64_t{0});
  const auto default_trials = config.value("trials", std::size_t{100});
  std::ostringstream csv;
  csv << "cell,epsilon,s,D,bits,success,mean_abs_z,p95_abs_z\n";
  Json reports = Json::array();

  std::uint64_t cell_id = 0;
  const Json cells = config.value("cells", Json::array());
  for (std::size_t c = 0; c < cells.size(); ++c) {
    const Json& cell = cells[c];
    const std::string base = cell.value("name", "cell" + std::to_string(c));
    std::vector<std::optional<double>> grid;
    if (cell.contains("eps_grid"))
      for (double e : cell.at("eps_grid")) grid.emplace_back(e);
    else
      grid.emplace_back(std::nullopt);

    for (const auto& eps : grid) {
      const std::uint64_t id = cell_id++;
      const std::string name = eps ? base + "@eps=" + format_double(*eps) : base;
      TrialReport report;
      report.cell = name;
      report.seed = seed;
      report.cell_id = id;
      const auto start = std::chrono::steady_clock::now();
      try {
        ProtocolSpec spec = protocol_from_json(cell.at("protocol"));
        if (eps) spec = with_epsilon(spec, *eps);
        Rng rng = make_rng(substream_seed(seed, id, ~std::uint64_t{0}));
        const DualPair pair = instance_for(cell, spec, rng);
        const auto trials = cell.value("trials", default_trials);
        const auto results = protocol_trials(spec, pair.v, pair.w, trials, seed, id);
        report = make_report(name, spec, pair.v.size(), results, seed, id);
      } catch (const std::exception& e) {
        report.failure = e.what();
        out.passed = false;
      }
      report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      if (!report.bits_within_bound()) out.passed = false;

      double mean_abs = 0.0;
      for (double z : report.errors) mean_abs += std::abs(z);
      if (!report.errors.empty()) mean_abs /= static_cast<double>(report.errors.size());
      const std::size_t max_bits = report.bits.empty() ? 0 : *std::max_element(report.bits.begin(), report.bits.end());
      csv << name << ',' << format_double(report.epsilon) << ',' << report.samples << ',' << report.support << ','
          << max_bits << ',' << format_double(report.success_rate) << ',' << format_double(mean_abs) << ','
          << format_double(report.p95_abs_error()) << '\n';
      reports.push_back(to_json(report));
      out.reports.push_back(std::move(report));
    }
  }
  out.summary_csv = csv.str();
  out.json = Json{{"seed", seed}, {"reports", reports}, {"passed", out.passed}};
  return out;
}

}  // namespace normip
