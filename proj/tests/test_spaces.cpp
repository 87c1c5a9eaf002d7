#include <cmath>

#include "doctest.h"
#include "normip/spaces.hpp"
#include "test_util.hpp"

using namespace normip;
using normip::test::gaussian;
using normip::test::max_abs_diff;

TEST_SUITE("spaces") {
  TEST_CASE("structural duals") {
    const NormSpec d = dual_spec(NormSpec::lp(1.0));
    REQUIRE(std::holds_alternative<LpNorm>(d.node()));
    CHECK(std::get<LpNorm>(d.node()).p.is_infinite());

    const NormSpec t = dual_spec(NormSpec::topk(2));
    REQUIRE(std::holds_alternative<MaxNorm>(t.node()));
    Rng rng(1);
    for (int i = 0; i < 20; ++i) {
      const Vector w = gaussian(5, rng);
      CHECK(eval_norm(t, w) == doctest::Approx(topk_dual_norm(w, 2)));
      CHECK(eval_norm(dual_spec(t), w) == doctest::Approx(topk_norm(w, 2)));
    }
  }

  TEST_CASE("top-k decomposition examples") {
    auto s = topk_decompose(Vector{3, 1, 2, 0}, 2);
    CHECK(s.a == Vector{1, 0, 0, 0});
    CHECK(s.b == Vector{2, 1, 2, 0});
    s = topk_decompose(Vector{1, 1, 1}, 3);
    CHECK(s.a == Vector{0, 0, 0});
    CHECK(s.b == Vector{1, 1, 1});
    s = topk_decompose(Vector{5, 0, 0}, 1);
    CHECK(s.b == Vector{5, 0, 0});
    CHECK(lp_norm(s.a, Exponent(1)) + lp_norm(s.b, Exponent::infinity()) == 5.0);
  }

  TEST_CASE("top-k decomposition is optimal among clamp thresholds") {
    Rng rng(2);
    for (int t = 0; t < 200; ++t) {
      const std::size_t n = 2 + static_cast<std::size_t>(t % 9);
      const Vector v = gaussian(n, rng);
      for (std::size_t k = 1; k <= n; ++k) {
        const auto s = topk_decompose(v, k);
        CHECK(max_abs_diff(add(s.a, s.b), v) < 1e-12);
        const double cost = lp_norm(s.a, Exponent(1)) + static_cast<double>(k) * lp_norm(s.b, Exponent::infinity());
        CHECK(cost == doctest::Approx(topk_norm(v, k)).epsilon(1e-12));
        for (double th : v) {
          double c = static_cast<double>(k) * std::abs(th);
          for (double x : v) c += std::max(std::abs(x) - std::abs(th), 0.0);
          CHECK(cost <= c + 1e-12);
        }
      }
    }
  }

  TEST_CASE("max dual split examples") {
    const NormSpec a = NormSpec::linf();
    const NormSpec b = NormSpec::scaled(NormSpec::lp(1.0), 1.0 / 3.0);
    auto s = split_max_dual(unit_vector(5, 0), a, b);
    CHECK(max_abs_diff(add(s.w1, s.w2), unit_vector(5, 0)) == 0.0);
    CHECK(s.budget1 + s.budget2 <= 1.0 + 1e-9);

    s = split_max_dual(Vector(5, 0.0), a, b);
    CHECK(s.budget1 == 0.0);
    CHECK(s.budget2 == 0.0);

    const Vector w = scaled(Vector{3, 1, 2, 0}, 1.0 / 5.0);
    s = split_max_dual(w, NormSpec::linf(), NormSpec::scaled(NormSpec::lp(1.0), 0.5));
    CHECK(max_abs_diff(add(s.w1, s.w2), w) < 1e-12);
    CHECK(s.budget1 + s.budget2 <= 1.0 + 1e-9);

    CHECK_THROWS_AS(split_max_dual(Vector{3, 0, 0}, a, b), PreconditionError);
  }

  TEST_CASE("max dual split re-sums on random dual-ball points") {
    Rng rng(3);
    const NormSpec a = NormSpec::linf();
    const NormSpec b = NormSpec::scaled(NormSpec::lp(1.0), 0.25);
    const NormSpec dual = NormSpec::dual_of(NormSpec::max_of(a, b));
    for (int t = 0; t < 100; ++t) {
      Vector w = gaussian(7, rng);
      w = scaled(w, 1.0 / eval_norm(dual, w));
      const auto s = split_max_dual(w, a, b);
      CHECK(max_abs_diff(add(s.w1, s.w2), w) < 1e-12);
      CHECK(s.budget1 + s.budget2 <= 1.0 + 1e-9);
    }
  }

  TEST_CASE("inf-convolution recovers the top-k norm") {
    // max(l_inf, l1/k) is the dual of T(k), so its dual is T(k) again.
    Rng rng(4);
    for (int t = 0; t < 50; ++t) {
      const Vector w = gaussian(6, rng);
      CHECK(inf_convolution_norm(NormSpec::linf(), NormSpec::scaled(NormSpec::lp(1.0), 0.5), w) ==
            doctest::Approx(topk_norm(w, 2)).epsilon(1e-9));
    }
  }

  TEST_CASE("l_inf into l_p distortions") {
    CHECK(linf_into_lp_embedding(4, 2.0, 10).distortion == doctest::Approx(2.0));
    CHECK(linf_into_lp_embedding(1, 3.0, 5).distortion == 1.0);
    CHECK(linf_into_lp_embedding(16, 4.0, 16).distortion == doctest::Approx(2.0));
    CHECK_NOTHROW(linf_into_lp_embedding(4, 2.0, 10).audit());
  }

  TEST_CASE("dual lifting") {
    Rng rng(5);
    const Vector w = gaussian(4, rng);

    const auto id = lift_dual_vector(identity_embedding(NormSpec::lp(2.0), 4), w);
    CHECK(max_abs_diff(id.w, w) < 1e-9);

    const Embedding inc = linf_into_lp_embedding(4, 2.0, 10);
    const auto l = lift_dual_vector(inc, w);
    CHECK(l.residual <= 1e-9);
    for (std::size_t i = 4; i < 10; ++i) CHECK(std::abs(l.w[i]) < 1e-6);
    for (std::size_t i = 0; i < 4; ++i) CHECK(dot(inc.apply(unit_vector(4, i)), l.w) == doctest::Approx(w[i]));
    // Hahn-Banach: the lift costs at most distortion * ||w|| in the source dual.
    CHECK(l.norm <= inc.distortion * eval_norm(dual_spec(inc.source), w) * (1.0 + 1e-6));
  }

  TEST_CASE("dual lifting across a non-coordinate subspace") {
    // span{(1,1)} inside l_inf^2, source norm |x| (the restriction).
    Embedding e;
    e.rows = 2;
    e.cols = 1;
    e.matrix = {1.0, 1.0};
    e.source = NormSpec::lp(1.0);
    e.target = NormSpec::linf();
    const auto l = lift_dual_vector(e, Vector{1.0});
    CHECK(l.residual <= 1e-9);
    CHECK(l.norm == doctest::Approx(1.0));
    // Grid over the coset (1/2 + t, 1/2 - t): l1 minimum is 1.
    double best = 1e9;
    for (int i = -2000; i <= 2000; ++i) {
      const double t = i * 1e-3;
      best = std::min(best, std::abs(0.5 + t) + std::abs(0.5 - t));
    }
    CHECK(l.norm <= best + 1e-9);
  }

  TEST_CASE("disjoint sums grow for l_p and stay flat for l_inf") {
    CHECK(audit_disjoint_sum(NormSpec::lp(2.0), 12, 4, 1.9, 50, 1).passed);
    CHECK_FALSE(audit_disjoint_sum(NormSpec::linf(), 12, 4, 1.5, 50, 1).passed);
  }
}
