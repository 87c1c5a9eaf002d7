#include <cmath>

#include "doctest.h"
#include "normip/harness.hpp"
#include "normip/kernels.hpp"
#include "normip/protocols.hpp"
#include "test_util.hpp"

using namespace normip;
using normip::test::gaussian;

TEST_SUITE("protocols") {
  TEST_CASE("quantizer examples") {
    const Quantizer q(16, 0.1, 4);
    CHECK(q.step() == doctest::Approx(0.1 / (4.0 * 4 * 16)));
    CHECK(q.dequantize(q.quantize(0.0).code) == 0.0);
    CHECK(q.quantize(3.0 * q.step()).value == 3.0 * q.step());
    CHECK(std::abs(q.quantize(0.123456).value - 0.123456) <= q.step() / 2);
    CHECK_THROWS_AS(q.quantize(2.0 * q.bound()), std::out_of_range);
    bool sat = false;
    CHECK(q.quantize_saturating(2.0 * q.bound(), sat).value == doctest::Approx(q.bound()).epsilon(1e-9));
    CHECK(sat);
  }

  TEST_CASE("bit widths") {
    CHECK(bits_for(1) == 0);
    CHECK(bits_for(2) == 1);
    CHECK(bits_for(1024) == 10);
    CHECK(bits_for(1025) == 11);
  }

  TEST_CASE("declared cost of a one-way sparsifier") {
    auto s = SparsifierSpec::lp_sampling(Exponent(2), 0.1);
    s.max_samples = 10;
    const std::size_t n = 1024;
    const Quantizer q(n, s.epsilon, 10);
    CHECK(declared_cost(ProtocolSpec::one_way(s), n) == 10 * (10 + q.value_bits()));
    // The arithmetic of D (index + value bits) with 24 value bits.
    CHECK(10 * (bits_for(n) + 24) == 340);
  }

  TEST_CASE("one-way on e1 sends one entry") {
    const std::size_t n = 64;
    Rng rng(1);
    const auto spec = OneWaySparsify{SparsifierSpec::lp_sampling(Exponent(1), 0.1), 1.0};
    const auto out = run_one_way(spec, unit_vector(n, 0), unit_vector(n, 0), rng);
    const Quantizer q(n, 0.1, message_terms(spec.sparsifier, n));
    CHECK(out.estimate == doctest::Approx(1.0).epsilon(q.step()));
    CHECK(out.transcript.total_bits() == bits_for(n) + q.value_bits());
    CHECK(out.transcript.single_sender());
    CHECK(out.transcript.messages().front().sender == Party::alice);
    CHECK(out.output_party == Party::bob);
  }

  TEST_CASE("one-way on disjoint supports estimates zero") {
    Rng rng(2);
    const auto spec = OneWaySparsify{SparsifierSpec::lp_sampling(Exponent(2), 0.2), 1.0};
    const Vector v{0.6, 0.8, 0, 0};
    const Vector w{0, 0, 1, 0};
    for (int t = 0; t < 20; ++t) CHECK(run_one_way(spec, v, w, rng).estimate == 0.0);
  }

  TEST_CASE("one-way l2 contract at n = 1000") {
    Rng rng(3);
    const NormSpec l2 = NormSpec::lp(2.0);
    const Vector v = random_unit_vector(l2, 1000, rng);
    const auto spec = ProtocolSpec::one_way(SparsifierSpec::lp_sampling(Exponent(2), 0.1));
    const auto res = protocol_trials(spec, v, v, 2000, 4);
    const auto sum = summarize(res, 0.1, 2.0 / 3.0);
    CHECK(sum.success_rate >= 2.0 / 3.0 - 3.0 * sum.standard_error);
    CHECK(sum.max_bits <= declared_cost(spec, 1000));
  }

  TEST_CASE("precondition checks") {
    Rng rng(4);
    const auto spec = OneWaySparsify{SparsifierSpec::lp_sampling(Exponent(2), 0.2), 1.0};
    CHECK_THROWS_AS(run_one_way(spec, Vector{3, 0}, Vector{1, 0}, rng), PreconditionError);
    CHECK_THROWS_AS(run_one_way(spec, Vector{1, 0}, Vector{1, 0, 0}, rng), PreconditionError);
  }

  TEST_CASE("swap relabels and is an involution") {
    Rng rng(5);
    const Vector v = scaled(Vector{1, -1, 1, 1}, 1.0);
    const Vector w = scaled(Vector{0.25, 0.25, -0.25, 0.25}, 1.0);
    const auto base = ProtocolSpec::one_way(SparsifierSpec::lp_sampling(Exponent(1), 0.2));
    const auto once = ProtocolSpec::swap(base);
    Rng r1(6);
    const auto o = run_protocol(once, v, w, r1);
    CHECK(o.transcript.messages().front().sender == Party::bob);
    CHECK(o.output_party == Party::alice);

    const auto twice = ProtocolSpec::swap(ProtocolSpec::swap(base));
    const Vector a{0.5, -0.5, 0, 0};
    const Vector b{1, 1, -1, 0.5};
    Rng r2(7), r3(7);
    const auto x = run_protocol(base, a, b, r2);
    const auto y = run_protocol(twice, a, b, r3);
    CHECK(x.transcript == y.transcript);
    CHECK(x.estimate == y.estimate);
    CHECK(x.output_party == y.output_party);
  }

  TEST_CASE("max split with w in the first dual ball") {
    Rng rng(8);
    const auto spec = topk_protocol(2, 0.2);
    const std::size_t n = 6;
    Vector v(n, 0.0);
    v[0] = 0.5;
    v[1] = 0.5;
    const Vector w = unit_vector(n, 0);
    const auto res = protocol_trials(spec, v, w, 500, 9);
    const auto sum = summarize(res, 0.2, 2.0 / 3.0);
    CHECK(sum.success_rate >= 2.0 / 3.0);
  }

  TEST_CASE("max split is additive with identity children") {
    const std::size_t n = 8;
    const auto id = ProtocolSpec::one_way(SparsifierSpec::identity(0.01));
    const auto spec = ProtocolSpec::swap(ProtocolSpec::max_split(
        NormSpec::linf(), NormSpec::scaled(NormSpec::lp(1.0), 0.5), ProtocolSpec::swap(id), id));
    Rng rng(10);
    for (int t = 0; t < 30; ++t) {
      const Vector v = random_unit_vector(NormSpec::topk(2), n, rng);
      const Vector w = random_dual_unit_vector(NormSpec::topk(2), n, rng);
      Rng r(static_cast<std::uint64_t>(t));
      const auto out = run_protocol(spec, v, w, r);
      CHECK(std::abs(out.estimate - dot(v, w)) <= declared_accuracy(spec).epsilon);
      CHECK(out.transcript.total_bits() <= declared_cost(spec, n));
    }
  }

  TEST_CASE("h-sum with w = 0 outputs exactly zero") {
    const auto spec = hsum_topk_protocol(Exponent(1), {2, 2}, 4, 0.3, 0.3);
    Rng rng(11);
    const Vector v = random_unit_vector(std::get<HSumCompose>(spec.node()).space, 8, rng);
    const auto out = run_protocol(spec, v, Vector(8, 0.0), rng);
    CHECK(out.estimate == 0.0);
  }

  TEST_CASE("h-sum with one block reduces to the inner protocol") {
    const std::size_t n = 5;
    const NormSpec space = NormSpec::hsum(NormSpec::lp(1.0), {NormSpec::lp(2.0)}, {n});
    const auto inner = ProtocolSpec::one_way(SparsifierSpec::identity(0.01));
    const auto spec = ProtocolSpec::hsum(space, SparsifierSpec::identity(0.01), {inner});
    Rng rng(12);
    for (int t = 0; t < 20; ++t) {
      const Vector v = random_unit_vector(NormSpec::lp(2.0), n, rng);
      const Vector w = random_dual_unit_vector(NormSpec::lp(2.0), n, rng);
      const auto out = run_protocol(spec, v, w, rng);
      CHECK(std::abs(out.estimate - dot(v, w)) <= 0.01);
      CHECK(out.transcript.total_bits() <= declared_cost(spec, n));
    }
  }

  TEST_CASE("embedding reductions") {
    Rng rng(13);
    const std::size_t n = 4;
    const auto inner = ProtocolSpec::one_way(SparsifierSpec::identity(0.01));

    const auto pass = ProtocolSpec::embed(identity_embedding(NormSpec::lp(2.0), n), inner);
    const Vector v = random_unit_vector(NormSpec::lp(2.0), n, rng);
    const Vector w = random_dual_unit_vector(NormSpec::lp(2.0), n, rng);
    Rng a(1), b(1);
    CHECK(run_protocol(pass, v, w, a).estimate == doctest::Approx(run_protocol(inner, v, w, b).estimate));

    const Embedding e = linf_into_lp_embedding(4, 2.0, 4);
    const auto red = ProtocolSpec::embed(e, ProtocolSpec::one_way(SparsifierSpec::lp_sampling(Exponent(2), 0.1)));
    CHECK(declared_accuracy(red).epsilon == doctest::Approx(0.2));
    const Vector x = random_unit_vector(NormSpec::linf(), n, rng);
    const Vector y = random_dual_unit_vector(NormSpec::linf(), n, rng);
    const auto sum = summarize(protocol_trials(red, x, y, 1000, 14), 0.2, 2.0 / 3.0);
    CHECK(sum.success_rate >= 2.0 / 3.0 - 3.0 * sum.standard_error);

    Rng c(2);
    CHECK(run_protocol(red, x, Vector(n, 0.0), c).estimate == 0.0);
  }

  TEST_CASE("bit soundness and determinism across trees") {
    const std::size_t n = 16;
    const std::vector<ProtocolSpec> specs = {lp_protocol(Exponent(1.5), 0.2), lp_protocol(Exponent(3), 0.2),
                                             topk_protocol(3, 0.2)};
    const std::vector<NormSpec> norms = {NormSpec::lp(1.5), NormSpec::lp(3.0), NormSpec::topk(3)};
    for (std::size_t i = 0; i < specs.size(); ++i) {
      Rng rng(15 + i);
      const auto pair = random_dual_pair(norms[i], n, rng);
      const auto a = protocol_trials(specs[i], pair.v, pair.w, 300, 16, 0, true);
      const auto b = protocol_trials(specs[i], pair.v, pair.w, 300, 16, 0, false);
      for (std::size_t t = 0; t < a.size(); ++t) {
        CHECK(a[t].bits <= declared_cost(specs[i], n));
        CHECK(a[t].estimate == b[t].estimate);
        CHECK(a[t].bits == b[t].bits);
      }
    }
  }

  TEST_CASE("exact children keep estimates within the unit range") {
    const std::size_t n = 32;
    const auto spec = ProtocolSpec::one_way(SparsifierSpec::identity(0.01));
    Rng rng(17);
    for (int t = 0; t < 50; ++t) {
      const auto pair = random_dual_pair(NormSpec::lp(2.0), n, rng);
      CHECK(std::abs(run_protocol(spec, pair.v, pair.w, rng).estimate) <= 1.0 + 0.01);
    }
  }

  TEST_CASE("transcript debug export") {
    Rng rng(18);
    const auto out = run_protocol(lp_protocol(Exponent(2), 0.3), unit_vector(8, 2), unit_vector(8, 2), rng);
    const std::string dbg = out.transcript.to_debug();
    CHECK(dbg.rfind("alice ", 0) == 0);
    CHECK(dbg.find(std::to_string(out.transcript.total_bits())) != std::string::npos);
    std::size_t lines = 0;
    for (char c : dbg) lines += c == '\n';
    CHECK(lines == out.transcript.messages().size());
  }
}
