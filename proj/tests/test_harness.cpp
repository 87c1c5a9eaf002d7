#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "normip/harness.hpp"
#include "test_util.hpp"

using namespace normip;

TEST_SUITE("harness") {
  TEST_CASE("index instances") {
    const std::vector<std::uint8_t> x{1, 0, 1, 0};
    auto p = gen_index_instance(x, 1);
    CHECK(dot(p.v, p.w) == 0.0);
    CHECK(lp_norm(p.v, Exponent::infinity()) <= 1.0);
    CHECK(lp_norm(p.w, Exponent(1)) == 1.0);
    const std::vector<std::uint8_t> ones(6, 1);
    for (std::size_t i = 0; i < ones.size(); ++i) CHECK(dot(gen_index_instance(ones, i).v, gen_index_instance(ones, i).w) == 1.0);
    CHECK(decode_index_bit(0.51) == 1);
    CHECK(decode_index_bit(0.49) == 0);
    CHECK(decode_index_bit(-0.3) == 0);
  }

  TEST_CASE("index decoding through an uncompressed swapped protocol") {
    const auto spec = ProtocolSpec::swap(ProtocolSpec::one_way(SparsifierSpec::identity(0.01)));
    Rng rng(1);
    std::vector<std::uint8_t> x(32);
    for (auto& b : x) b = static_cast<std::uint8_t>(rng() & 1U);
    for (std::size_t i = 0; i < x.size(); ++i) {
      const auto p = gen_index_instance(x, i);
      CHECK(decode_index_bit(run_protocol(spec, p.v, p.w, rng).estimate) == x[i]);
    }
  }

  TEST_CASE("gap-hamming labelled examples") {
    const std::size_t k = 64;
    std::vector<std::uint8_t> x(k);
    Rng rng(2);
    for (auto& b : x) b = static_cast<std::uint8_t>(rng() & 1U);
    auto same = gap_hamming_instance(x, x, 1.0);
    CHECK(same.distance == 0);
    CHECK(same.side == GapSide::low);
    std::vector<std::uint8_t> comp(k);
    std::transform(x.begin(), x.end(), comp.begin(), [](std::uint8_t b) { return static_cast<std::uint8_t>(1 - b); });
    auto opp = gap_hamming_instance(x, comp, 1.0);
    CHECK(opp.distance == k);
    CHECK(opp.side == GapSide::high);
    CHECK(decide_gap_side(same, dot(same.v, same.w)) == GapSide::low);
    CHECK(decide_gap_side(opp, dot(opp.v, opp.w)) == GapSide::high);
  }

  TEST_CASE("gap-hamming sampling respects the gap and the identity") {
    Rng rng(3);
    const std::size_t k = 100;
    const double C = 1.0;
    for (int t = 0; t < 100; ++t) {
      const auto g = gen_gap_hamming(k, C, rng);
      const double d = static_cast<double>(g.distance);
      CHECK((d <= 50.0 - 10.0 || d >= 50.0 + 10.0));
      CHECK(g.weight_x + g.weight_y == g.distance + 2 * g.overlap);
      CHECK(g.side == (d <= 40.0 ? GapSide::low : GapSide::high));
      CHECK(decide_gap_side(g, dot(g.v, g.w)) == g.side);
      if (g.weight_x) CHECK(lp_norm(g.v, Exponent(2)) == doctest::Approx(1.0));
    }
    CHECK_THROWS_AS(gen_gap_hamming(10, 2.0, rng), PreconditionError);
  }

  TEST_CASE("instance families stay inside the unit balls") {
    Rng rng(4);
    for (const auto& s : {NormSpec::lp(1.3), NormSpec::lp(4.0), NormSpec::topk(3), NormSpec::linf()}) {
      const NormSpec d = dual_spec(s);
      for (int t = 0; t < 20; ++t) {
        const auto p = random_dual_pair(s, 12, rng);
        CHECK(eval_norm(s, p.v) <= 1.0 + 1e-12);
        CHECK(eval_norm(d, p.w) <= 1.0 + 1e-12);
      }
    }
  }

  TEST_CASE("adversarial search finds the sign vector for l1 sampling") {
    const std::size_t n = 40;
    const Vector v(n, 1.0 / static_cast<double>(n));
    const auto spec = SparsifierSpec::lp_sampling(Exponent(1), 0.2);
    AdversarialOptions opt;
    opt.keep = 64;
    const auto c = adversarial_dual_search(NormSpec::lp(1.0), v, spec, opt);
    const bool has_sign = std::any_of(c.begin(), c.end(), [&](const auto& a) {
      return std::all_of(a.w.begin(), a.w.end(), [](double x) { return std::abs(std::abs(x) - 1.0) < 1e-12; });
    });
    CHECK(has_sign);
    CHECK(std::is_sorted(c.begin(), c.end(), [](const auto& a, const auto& b) { return a.success_rate < b.success_rate; }));
  }

  TEST_CASE("worst searched rate is no better than random rates") {
    const std::size_t n = 200;
    Rng rng(5);
    const NormSpec l2 = NormSpec::lp(2.0);
    const Vector v = random_unit_vector(l2, n, rng);
    auto spec = SparsifierSpec::lp_sampling(Exponent(2), 0.2);
    spec.max_samples = 60;
    AdversarialOptions opt;
    opt.keep = 1;
    opt.trials = 600;
    const auto worst = adversarial_dual_search(l2, v, spec, opt);
    std::vector<Vector> ws;
    for (int j = 0; j < 10; ++j) ws.push_back(random_dual_unit_vector(l2, n, rng));
    const auto rows = sparsifier_estimates(spec, v, ws, opt.trials, opt.seed, 0xad7e + 1);
    for (std::size_t j = 0; j < ws.size(); ++j) {
      int ok = 0;
      for (const auto& r : rows) ok += std::abs(r[j] - dot(v, ws[j])) <= spec.epsilon;
      CHECK(worst.front().success_rate <= ok / static_cast<double>(rows.size()) + 0.05);
    }
  }

  TEST_CASE("empty sweep") {
    const auto r = run_sweep(Json::parse(R"({"cells":[]})"));
    CHECK(r.reports.empty());
    CHECK(r.passed);
  }

  TEST_CASE("one cell of 100 trials") {
    const auto cfg = Json::parse(R"({"seed":3,"trials":100,"cells":[{"name":"l2",
      "protocol":{"type":"one_way","sparsifier":{"kind":"lp_sampling","p":2,"epsilon":0.2,"max_samples":20}},
      "family":"random_dual_pair","norm":{"type":"lp","p":2},"n":500}]})");
    const auto r = run_sweep(cfg);
    REQUIRE(r.reports.size() == 1);
    const auto& rep = r.reports.front();
    CHECK_FALSE(rep.failure);
    CHECK(rep.errors.size() == 100);
    CHECK(rep.bits.size() == 100);
    CHECK(rep.bits_within_bound());
    CHECK(r.passed);
  }

  TEST_CASE("bits are constant across trials when nothing merges") {
    const auto cfg = Json::parse(R"({"seed":3,"trials":100,"cells":[{"name":"id",
      "protocol":{"type":"one_way","sparsifier":{"kind":"identity"}},
      "family":"random_dual_pair","norm":{"type":"lp","p":2},"n":50}]})");
    const auto r = run_sweep(cfg);
    const auto& bits = r.reports.front().bits;
    CHECK(std::all_of(bits.begin(), bits.end(), [&](std::size_t b) { return b == bits.front(); }));
  }

  TEST_CASE("failing cells are quarantined") {
    const auto cfg = Json::parse(R"({"cells":[{"name":"bad","protocol":{"type":"nope"},"family":"index","n":4},
      {"name":"ok","protocol":{"type":"swap","inner":{"type":"one_way","sparsifier":{"kind":"identity"}}},
       "family":"index","n":8,"trials":10}]})");
    const auto r = run_sweep(cfg);
    REQUIRE(r.reports.size() == 2);
    CHECK(r.reports[0].failure);
    CHECK_FALSE(r.reports[1].failure);
    CHECK_FALSE(r.passed);
  }

  TEST_CASE("sweeps are reproducible") {
    const auto cfg = Json::parse(R"({"seed":11,"trials":200,"cells":[{"name":"t",
      "protocol":{"type":"topk_protocol","k":2,"epsilon":0.3},
      "family":"random_dual_pair","norm":{"type":"topk","k":2},"n":12,"eps_grid":[0.3,0.2]}]})");
    CHECK(run_sweep(cfg).json.dump() == run_sweep(cfg).json.dump());
  }

  TEST_CASE("p95 error shrinks along an epsilon grid") {
    const auto cfg = Json::parse(R"({"seed":5,"trials":2000,"cells":[{"name":"l2",
      "protocol":{"type":"one_way","sparsifier":{"kind":"lp_sampling","p":2,"epsilon":0.4}},
      "family":"random_dual_pair","norm":{"type":"lp","p":2},"n":400,"eps_grid":[0.4,0.2,0.1]}]})");
    const auto r = run_sweep(cfg);
    REQUIRE(r.reports.size() == 3);
    for (std::size_t i = 1; i < r.reports.size(); ++i) {
      CHECK(r.reports[i].samples == 4 * r.reports[i - 1].samples);
      CHECK(r.reports[i].p95_abs_error() <= 1.1 * r.reports[i - 1].p95_abs_error());
    }
  }

  TEST_CASE("variance of the l2 estimate scales as 1/s") {
    const std::size_t n = 2000;
    Rng rng(6);
    const NormSpec l2 = NormSpec::lp(2.0);
    const auto pair = random_dual_pair(l2, n, rng);
    std::vector<double> vs;
    for (const std::size_t s : {25, 100, 400}) {
      auto spec = SparsifierSpec::lp_sampling(Exponent(2), 0.3);
      spec.max_samples = s;
      const auto rows = sparsifier_estimates(spec, pair.v, std::vector<Vector>{pair.w}, 4000, 7, s);
      double m = 0.0, m2 = 0.0;
      for (const auto& r : rows) {
        m += r[0];
        m2 += r[0] * r[0];
      }
      m /= 4000.0;
      vs.push_back((m2 / 4000.0 - m * m) * static_cast<double>(s));
    }
    for (double x : vs) {
      CHECK(x / vs.front() <= 1.5);
      CHECK(vs.front() / x <= 1.5);
    }
  }

  TEST_CASE("reports reload consistently") {
    const auto cfg = Json::parse(R"({"seed":2,"trials":50,"cells":[{"name":"c",
      "protocol":{"type":"lp_protocol","p":2,"epsilon":0.3},
      "family":"random_dual_pair","norm":{"type":"lp","p":2},"n":30}]})");
    const auto r = run_sweep(cfg);
    const Json j = to_json(r.reports.front());
    const TrialReport back = report_from_json(j);
    CHECK(back.success_rate == back.recompute_success_rate());
    CHECK(to_json(back).dump() == j.dump());
    CHECK(back.fingerprint == r.reports.front().fingerprint);

    Json bad = j;
    bad["success_rate"] = back.success_rate > 0.5 ? 0.0 : 1.0;
    CHECK_THROWS(report_from_json(bad));
  }
}
