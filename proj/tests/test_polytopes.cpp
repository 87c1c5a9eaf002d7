#include <cmath>

#include "doctest.h"
#include "normip/harness.hpp"
#include "normip/kernels.hpp"
#include "normip/polytopes.hpp"
#include "test_util.hpp"

using namespace normip;
using normip::test::gaussian;

TEST_SUITE("polytopes") {
  TEST_CASE("gauge examples") {
    CHECK(gauge_norm(Polytope::cube(2), Vector{3, -1}) == 3.0);
    CHECK(gauge_norm(Polytope::cross_polytope(2), Vector{1, 1}) == doctest::Approx(2.0));
    Rng rng(1);
    for (int t = 0; t < 100; ++t) {
      const Vector x = gaussian(5, rng);
      CHECK(gauge_norm(Polytope::cube(5), x) == lp_norm(x, Exponent::infinity()));
      CHECK(gauge_norm(Polytope::cross_polytope(5), x) == doctest::Approx(lp_norm(x, Exponent(1))).epsilon(1e-9));
    }
  }

  TEST_CASE("duality swaps cube and cross-polytope") {
    const Polytope d = dual_polytope(Polytope::cube(3));
    REQUIRE(d.has_vrep());
    CHECK(d.vrep().size() <= 2 * Polytope::cube(3).hrep().size());
    Rng rng(2);
    for (int t = 0; t < 50; ++t) {
      const Vector x = gaussian(3, rng);
      CHECK(gauge_norm(d, x) == doctest::Approx(lp_norm(x, Exponent(1))).epsilon(1e-9));
    }
  }

  TEST_CASE("double dual gauge is the original gauge") {
    Rng rng(3);
    for (std::size_t n = 2; n <= 6; ++n) {
      std::vector<Vector> rows;
      for (std::size_t i = 0; i < n + 2; ++i) rows.push_back(gaussian(n, rng));
      const Polytope P = Polytope::from_hrep(rows);
      const Polytope DD = dual_polytope(dual_polytope(P));
      for (int t = 0; t < 1000 / 5; ++t) {
        const Vector x = gaussian(n, rng);
        CHECK(gauge_norm(DD, x) == doctest::Approx(gauge_norm(P, x)).epsilon(1e-9));
      }
    }
  }

  TEST_CASE("slack matrix of the square") {
    const SlackMatrix S = slack_matrix(Polytope::cube(2).with_vertices());
    CHECK(S.rows == 4);
    CHECK(S.cols == 2);
    for (double x : S.entries) CHECK((x == 0.0 || x == 2.0));
    const std::string csv = S.to_csv();
    CHECK(csv.rfind("vertex,", 0) == 0);
  }

  TEST_CASE("slack matrix of the 3-cross-polytope") {
    const SlackMatrix S = slack_matrix(Polytope::cross_polytope(3).with_inequalities());
    CHECK(S.rows == 6);
    CHECK(S.cols == 4);
    // Vertices +-e_j against sign-vector facets: <A_i, v> = +-1 exactly.
    for (std::size_t r = 0; r < S.rows; ++r)
      for (std::size_t c = 0; c < S.cols; ++c) {
        const Polytope P = Polytope::cross_polytope(3).with_inequalities();
        CHECK(S.at(r, c) == 1.0 - dot(P.hrep()[c], P.vrep()[r]));
        CHECK((S.at(r, c) == 0.0 || S.at(r, c) == 1.0 || S.at(r, c) == 2.0));
      }
  }

  TEST_CASE("interior points are rejected as vertices") {
    CHECK_THROWS_AS(Polytope::from_both({{1, 0}, {0, 1}}, {{0.5, 0.5}, {-0.5, -0.5}}), PreconditionError);
  }

  TEST_CASE("convex decomposition") {
    const Polytope sq = Polytope::cube(2).with_vertices();
    const auto c = convex_decompose(sq, sq.vrep()[0]);
    REQUIRE(c.weights.size() == 1);
    CHECK(c.weights[0].second == doctest::Approx(1.0));
    CHECK(decomposition_residual(sq, convex_decompose(sq, Vector{0, 0}), Vector{0, 0}) <= 1e-9);
    CHECK_THROWS_AS(convex_decompose(sq, Vector{2, 0}), InfeasibleError);

    Rng rng(4);
    for (std::size_t n = 2; n <= 6; ++n) {
      const Polytope P = Polytope::cross_polytope(n);
      for (int t = 0; t < 50; ++t) {
        Vector v = gaussian(n, rng);
        v = scaled(v, uniform01(rng) / lp_norm(v, Exponent(1)));
        const auto d = convex_decompose(P, v);
        CHECK(decomposition_residual(P, d, v) <= 1e-9);
        CHECK(d.weights.size() <= n + 1);
      }
    }
  }

  TEST_CASE("vertex sampling") {
    const Polytope sq = Polytope::cube(2).with_vertices();
    Rng rng(5);
    const Vector w{0.3, -0.6};
    const auto exact = vertex_sampling_protocol(sq, sq.vrep()[1], w, 0.2, rng);
    CHECK(exact.estimate == doctest::Approx(dot(sq.vrep()[1], w)));
    CHECK(exact.transcript.total_bits() == vertex_sample_count(0.2) * bits_for(sq.vrep().size()));

    for (int t = 0; t < 20; ++t) CHECK(std::abs(vertex_sampling_protocol(sq, Vector{0, 0}, w, 0.2, rng).estimate) <= 1.0);

    const Vector v{0.3, -0.2};
    const Vector u{0.5, 0.4};
    int ok = 0;
    for (int t = 0; t < 2000; ++t) {
      Rng r = make_rng(substream_seed(6, 0, static_cast<std::uint64_t>(t)));
      ok += std::abs(vertex_sampling_protocol(sq, v, u, 0.15, r).estimate - dot(v, u)) <= 0.15;
    }
    CHECK(ok / 2000.0 >= 2.0 / 3.0);
  }

  TEST_CASE("slack in expectation") {
    const Polytope sq = Polytope::cube(2).with_vertices();
    const SlackMatrix S = slack_matrix(sq);
    Rng rng(7);
    const double eps = 0.1;
    for (std::size_t vi = 0; vi < S.rows; ++vi)
      for (std::size_t i = 0; i < S.cols; ++i) {
        double mean = 0.0;
        for (int t = 0; t < 200; ++t) mean += slack_in_expectation(sq, vi, i, eps, rng).value / 200.0;
        CHECK(std::abs(mean - S.at(vi, i)) <= 2.0 * eps);
      }

    const InnerProductRunner exact = [](std::span<const double> v, std::span<const double> w, Rng&) {
      ProtocolOutcome o;
      o.estimate = dot(v, w);
      return o;
    };
    for (std::size_t vi = 0; vi < S.rows; ++vi)
      for (std::size_t i = 0; i < S.cols; ++i)
        CHECK(slack_in_expectation(sq, vi, i, eps, rng, exact).value == S.at(vi, i));
  }

  TEST_CASE("projection of the cube onto the square") {
    // The square is the 3-cube with the last coordinate dropped; run the
    // cube's vertex-sampling protocol through the inclusion x -> (x, 0).
    const double eps = 0.2;
    Embedding inc;
    inc.rows = 3;
    inc.cols = 2;
    inc.matrix = {1, 0, 0, 1, 0, 0};
    inc.source = NormSpec::polytope(Polytope::cube(2));
    inc.target = NormSpec::polytope(Polytope::cube(3));
    const auto spec = ProtocolSpec::embed(inc, ProtocolSpec::vertex_sample(Polytope::cube(3), eps));
    CHECK(declared_accuracy(spec).epsilon == doctest::Approx(eps));
    Rng rng(8);
    for (std::uint64_t t = 0; t < 5; ++t) {
      const Vector v{2 * uniform01(rng) - 1, 2 * uniform01(rng) - 1};
      Vector w = gaussian(2, rng);
      w = scaled(w, 1.0 / lp_norm(w, Exponent(1)));
      const auto res = protocol_trials(spec, v, w, 1000, 9, t);
      int ok = 0;
      for (const auto& r : res) {
        ok += std::abs(r.estimate - r.truth) <= eps;
        CHECK(r.bits <= declared_cost(spec, 2));
      }
      const double se = std::sqrt((2.0 / 3.0) * (1.0 / 3.0) / 1000.0);
      CHECK(ok / 1000.0 >= 2.0 / 3.0 - 3.0 * se);
    }
  }
}
