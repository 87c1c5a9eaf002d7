#include <cmath>
#include <thread>

#include "doctest.h"
#include "normip/norms.hpp"
#include "normip/spaces.hpp"
#include "test_util.hpp"

using namespace normip;
using normip::test::gaussian;

TEST_SUITE("norms") {
  TEST_CASE("lp norm examples") {
    CHECK(lp_norm(Vector{3, 4}, Exponent(2)) == doctest::Approx(5.0));
    CHECK(lp_norm(Vector{1, -1, 1}, Exponent::infinity()) == 1.0);
    CHECK(lp_norm(Vector{1, 1, 1, 1}, Exponent(1)) == 4.0);
  }

  TEST_CASE("dual exponent") {
    CHECK(dual_exponent(Exponent(2)).value() == 2.0);
    CHECK(dual_exponent(Exponent(1)).is_infinite());
    CHECK(dual_exponent(Exponent::infinity()).value() == 1.0);
    CHECK(dual_exponent(Exponent(4)).value() == doctest::Approx(4.0 / 3.0));
    CHECK_THROWS_AS(Exponent(0.5), PreconditionError);
  }

  TEST_CASE("top-k norm examples") {
    CHECK(topk_norm(Vector{3, 1, 2, 0}, 2) == 5.0);
    CHECK(topk_norm(Vector(7, 1.0), 7) == 7.0);
    CHECK(topk_norm(Vector{-5, 4, -3, 2, 1}, 3) == 12.0);
    CHECK(topk_dual_norm(Vector{1, 1, 1}, 2) == 1.5);
    CHECK(topk_dual_norm(Vector{2, 0, 0}, 2) == 2.0);
    CHECK(topk_dual_norm(Vector{1, 1, 1, 1}, 4) == 1.0);
    CHECK(dual_norm_bruteforce(NormSpec::topk(4), Vector{1, 1, 1, 1}).value == doctest::Approx(1.0));
  }

  TEST_CASE("top-k at the extremes is l1 and l_inf") {
    Rng rng(1);
    for (int t = 0; t < 50; ++t) {
      const Vector v = gaussian(9, rng);
      CHECK(topk_norm(v, 9) == doctest::Approx(lp_norm(v, Exponent(1))).epsilon(1e-15));
      CHECK(topk_norm(v, 1) == lp_norm(v, Exponent::infinity()));
    }
  }

  TEST_CASE("top-k ties go to the lowest index") {
    const auto idx = topk_indices(Vector{1, -2, 2, 1}, 3);
    REQUIRE(idx.size() == 3);
    CHECK(idx[0] == 1);
    CHECK(idx[1] == 2);
    CHECK(idx[2] == 0);
  }

  TEST_CASE("eval_norm examples") {
    CHECK(eval_norm(NormSpec::lp(2.0), Vector{3, 4}) == doctest::Approx(5.0));
    const NormSpec h = NormSpec::hsum(NormSpec::lp(1.0), {NormSpec::lp(2.0), NormSpec::lp(2.0)}, {2, 2});
    CHECK(eval_norm(h, Vector{3, 4, 0, 0}) == doctest::Approx(5.0));
    Rng rng(2);
    const NormSpec m = NormSpec::max_of(NormSpec::linf(), NormSpec::scaled(NormSpec::lp(1.0), 1.0 / 3.0));
    for (int t = 0; t < 50; ++t) {
      const Vector w = gaussian(8, rng);
      CHECK(eval_norm(m, w) == doctest::Approx(topk_dual_norm(w, 3)).epsilon(1e-12));
    }
  }

  TEST_CASE("brute-force dual examples") {
    CHECK(dual_norm_bruteforce(NormSpec::lp(1.0), Vector{1, 2, 3}).value == doctest::Approx(3.0));
    const auto t = dual_norm_bruteforce(NormSpec::topk(2), Vector{1, 1, 1});
    CHECK(t.exact);
    CHECK(t.value == doctest::Approx(1.5));
    CHECK(dual_norm_bruteforce(NormSpec::lp(2.0), Vector{3, 4}).value == doctest::Approx(5.0).epsilon(1e-4));
  }

  TEST_CASE("brute-force dual matches the closed form on polyhedral norms") {
    Rng rng(3);
    for (std::size_t n = 2; n <= 6; ++n) {
      for (std::size_t k = 1; k <= n; ++k) {
        const Vector w = gaussian(n, rng);
        const auto b = dual_norm_bruteforce(NormSpec::topk(k), w);
        CHECK(b.exact);
        CHECK(b.value == doctest::Approx(topk_dual_norm(w, k)).epsilon(1e-9));
      }
      const Vector w = gaussian(n, rng);
      CHECK(dual_norm_bruteforce(NormSpec::linf(), w).value == doctest::Approx(lp_norm(w, Exponent(1))));
    }
  }

  TEST_CASE("brute-force dual scales past the vertex cap") {
    Rng rng(4);
    const Vector w = gaussian(24, rng);
    const auto b = dual_norm_bruteforce(NormSpec::topk(2), w);
    CHECK(b.exact);
    CHECK(b.value == doctest::Approx(topk_dual_norm(w, 2)).epsilon(1e-9));
  }

  TEST_CASE("symmetry audit") {
    CHECK(audit_symmetry(NormSpec::lp(3.0), 100, 1, 6).passed);
    CHECK(audit_symmetry(NormSpec::topk(2), 100, 1, 6).passed);
    const NormSpec weighted = NormSpec::oracle(
        [](std::span<const double> x) { return std::abs(x[0]) + 2.0 * std::abs(x[1]); }, 2, {}, "weighted-l1");
    const auto rep = audit_symmetry(weighted, 100, 1);
    CHECK_FALSE(rep.passed);
    CHECK(rep.failed_check == "permutation");
    CHECK(rep.counterexample.size() == 2);
    CHECK_THROWS_AS(
        make_symmetric_oracle([](std::span<const double> x) { return std::abs(x[0]) + 2.0 * std::abs(x[1]); }, 2),
        PreconditionError);
  }

  TEST_CASE("unit vectors have norm one") {
    const std::vector<NormSpec> specs = {
        NormSpec::lp(1.0), NormSpec::lp(2.5), NormSpec::linf(), NormSpec::topk(3),
        NormSpec::max_of(NormSpec::linf(), NormSpec::scaled(NormSpec::lp(1.0), 0.5)),
        NormSpec::dual_of(NormSpec::topk(2))};
    for (const auto& s : specs) CHECK(normalization_defect(s, 6) < 1e-12);
  }

  TEST_CASE("Hoelder inequality on random pairs") {
    Rng rng(5);
    const std::vector<NormSpec> specs = {NormSpec::lp(1.5), NormSpec::lp(3.0), NormSpec::topk(2), NormSpec::linf(),
                                         NormSpec::hsum(NormSpec::lp(2.0), {NormSpec::topk(2), NormSpec::topk(2)}, {4, 4})};
    for (const auto& s : specs) {
      const NormSpec d = dual_spec(s);
      for (int t = 0; t < 100; ++t) {
        const Vector v = gaussian(8, rng);
        const Vector w = gaussian(8, rng);
        CHECK(std::abs(dot(v, w)) <= eval_norm(s, v) * eval_norm(d, w) + 1e-9);
      }
    }
  }

  TEST_CASE("homogeneity") {
    Rng rng(6);
    const Vector v = gaussian(10, rng);
    for (const auto& s : {NormSpec::lp(1.7), NormSpec::topk(4)})
      CHECK(eval_norm(s, scaled(v, -3.5)) == doctest::Approx(3.5 * eval_norm(s, v)).epsilon(1e-12));
  }

  TEST_CASE("oracle callbacks may run concurrently") {
    const NormSpec o = make_symmetric_oracle([](std::span<const double> x) { return topk_norm(x, 2); }, 5);
    std::vector<double> out(8);
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < out.size(); ++t)
      pool.emplace_back([&, t] {
        Rng rng(t);
        double acc = 0.0;
        for (int r = 0; r < 2000; ++r) {
          const Vector v = gaussian(5, rng);
          acc += eval_norm(o, v) - topk_norm(v, 2);
        }
        out[t] = acc;
      });
    for (auto& th : pool) th.join();
    for (double x : out) CHECK(x == 0.0);
  }
}
