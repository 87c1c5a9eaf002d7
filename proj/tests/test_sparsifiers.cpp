#include <cmath>

#include "doctest.h"
#include "normip/harness.hpp"
#include "normip/sparsifiers.hpp"
#include "test_util.hpp"

using namespace normip;
using normip::test::gaussian;

TEST_SUITE("sparsifiers") {
  TEST_CASE("lp distribution examples") {
    auto d = lp_distribution(Vector{0.5, -0.5}, Exponent(1));
    CHECK(d.probs == Vector{0.5, 0.5});
    d = lp_distribution(Vector{1, 0, 0}, Exponent(2));
    CHECK(d.probs == Vector{1, 0, 0});
    const double h = std::sqrt(0.5);
    d = lp_distribution(Vector{h, h}, Exponent(2));
    CHECK(d.probs[0] == doctest::Approx(0.5));
    CHECK(d.probs[1] == doctest::Approx(0.5));
    CHECK_THROWS_AS(lp_distribution(Vector{1, 1}, Exponent(2)), PreconditionError);
  }

  TEST_CASE("one-sparse draws") {
    Rng rng(1);
    const Vector v{0.5, -0.5};
    const auto d = lp_distribution(v, Exponent(1));
    int first = 0;
    for (int t = 0; t < 1000; ++t) {
      const auto s = draw_one_sparse(v, d, rng);
      REQUIRE(s.nnz() == 1);
      if (s.entries[0].first == 0) {
        CHECK(s.entries[0].second == 1.0);
        ++first;
      } else {
        CHECK(s.entries[0].second == -1.0);
      }
    }
    CHECK(first > 400);
    CHECK(first < 600);

    const auto e = draw_one_sparse(Vector{1, 0}, lp_distribution(Vector{1, 0}, Exponent(2)), rng);
    CHECK(e.to_dense() == Vector{1, 0});
  }

  TEST_CASE("one-sparse draws are unbiased within 3 exact standard errors") {
    Rng rng(2);
    const Vector v{0.6, 0.8};
    const auto d = lp_distribution(v, Exponent(2));
    const int N = 100000;
    Vector mean(2, 0.0);
    for (int t = 0; t < N; ++t)
      for (const auto& [i, x] : draw_one_sparse(v, d, rng).entries) mean[i] += x / N;
    for (std::size_t i = 0; i < 2; ++i) {
      const double p = d.probs[i];
      const double sd = std::sqrt(v[i] * v[i] / p - v[i] * v[i]);
      CHECK(std::abs(mean[i] - v[i]) <= 3.0 * sd / std::sqrt(static_cast<double>(N)));
    }
  }

  TEST_CASE("lp sparsify edge cases") {
    Rng rng(3);
    const auto spec = SparsifierSpec::lp_sampling(Exponent(2), 0.2);
    for (int t = 0; t < 10; ++t) CHECK(lp_sparsify(unit_vector(6, 0), spec, rng).to_dense() == unit_vector(6, 0));
    CHECK(lp_sparsify(Vector(6, 0.0), spec, rng).nnz() == 0);
  }

  TEST_CASE("sample counts") {
    CHECK(SparsifierSpec::lp_sampling(Exponent(2), 0.1).sample_count(10000) == 3600);
    CHECK(SparsifierSpec::lp_sampling(Exponent(3), 0.5).sample_count(10000) == 288);
    CHECK(SparsifierSpec::lp_sampling(Exponent(1), 0.2).sample_count(10000) == 900);
    auto capped = SparsifierSpec::lp_sampling(Exponent(2), 0.1);
    capped.max_samples = 50;
    CHECK(capped.sample_count(10000) == 50);
    CHECK_THROWS_AS(SparsifierSpec::lp_sampling(Exponent(2), 1.5).validate(), PreconditionError);
  }

  TEST_CASE("sparsity never exceeds s") {
    Rng rng(4);
    auto spec = SparsifierSpec::lp_sampling(Exponent(1.5), 0.3);
    spec.max_samples = 20;
    for (int t = 0; t < 200; ++t) {
      const Vector v = gaussian(100, rng);
      const auto phi = sparsify(v, spec, rng);
      phi.validate();
      CHECK(phi.nnz() <= spec.sample_count(100));
    }
  }

  TEST_CASE("lp sparsifier success on the sign-matched dual vector") {
    const std::size_t n = 100;
    const Vector v(n, 1.0 / static_cast<double>(n));
    const Vector w(n, 1.0);
    const auto spec = SparsifierSpec::lp_sampling(Exponent(1), 0.1);
    const auto rows = sparsifier_estimates(spec, v, std::vector<Vector>{w}, 2000, 9);
    int ok = 0;
    for (const auto& r : rows) ok += std::abs(r[0] - 1.0) <= 0.1;
    CHECK(ok / 2000.0 >= 2.0 / 3.0);
  }

  TEST_CASE("level-set distribution example") {
    const Vector v{1, 1, 0.5, std::ldexp(1.0, -40)};
    const auto d = levelset_distribution(v, 4);
    CHECK(level_count(4) == 6);
    CHECK(d.nonempty_classes == 3);
    CHECK(d.classes == std::vector<int>{1, 1, 2, 0});
    CHECK(d.probs[0] == doctest::Approx(1.0 / 6));
    CHECK(d.probs[1] == doctest::Approx(1.0 / 6));
    CHECK(d.probs[2] == doctest::Approx(1.0 / 3));
    CHECK(d.probs[3] == doctest::Approx(1.0 / 3));
  }

  TEST_CASE("level-set distribution degenerate inputs") {
    auto d = levelset_distribution(unit_vector(5, 0), 5);
    CHECK(d.probs == Vector{1, 0, 0, 0, 0});
    d = levelset_distribution(Vector(4, 0.25), 4);
    CHECK(d.nonempty_classes == 1);
    for (double p : d.probs) CHECK(p == doctest::Approx(0.25));
    Rng rng(5);
    const auto spec = SparsifierSpec::level_set(NormSpec::topk(2), 2, 0.5);
    CHECK(symmetric_sparsify(unit_vector(5, 0), spec, rng).to_dense() == unit_vector(5, 0));
  }

  TEST_CASE("distributions sum to one and vanish on zeros") {
    Rng rng(6);
    for (int t = 0; t < 50; ++t) {
      Vector v = gaussian(30, rng);
      for (std::size_t i = 0; i < v.size(); i += 3) v[i] = 0.0;
      const auto l = levelset_distribution(scaled(v, 1.0 / lp_norm(v, Exponent::infinity())), 30);
      double sum = 0.0;
      for (std::size_t i = 0; i < v.size(); ++i) {
        sum += l.probs[i];
        if (v[i] == 0.0) CHECK(l.probs[i] == 0.0);
      }
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    }
  }

  TEST_CASE("weak q-norm estimates") {
    CHECK(weak_qnorm_estimate(Vector(200, 0.7), Exponent(2)) == doctest::Approx(0.7));
    CHECK(weak_qnorm_estimate(Vector(200, 0.0), Exponent(2)) == 0.0);
    // Pareto(alpha = q) with scale 1 has weak-q norm exactly 1.
    Rng rng(7);
    const auto pareto = [&](std::size_t n) {
      Vector z(n);
      for (auto& x : z) x = std::pow(1.0 - uniform01(rng), -1.0 / 2.0);
      return weak_qnorm_estimate(z, Exponent(2));
    };
    const double a = pareto(20000);
    const double b = pareto(40000);
    CHECK(std::isfinite(a));
    CHECK(a == doctest::Approx(1.0).epsilon(0.5));
    CHECK(b / a < 2.0);
    CHECK(a / b < 2.0);
  }

  TEST_CASE("second moment for q >= 2 paths") {
    const std::size_t n = 200;
    Rng rng(8);
    const NormSpec l1 = NormSpec::lp(1.5);
    const Vector v = random_unit_vector(l1, n, rng);
    const Vector w = random_dual_unit_vector(l1, n, rng);
    const auto spec = SparsifierSpec::lp_sampling(Exponent(1.5), 0.2);
    const auto rows = sparsifier_estimates(spec, v, std::vector<Vector>{w}, 4000, 10);
    double m = 0.0, m2 = 0.0;
    for (const auto& r : rows) {
      m += r[0];
      m2 += r[0] * r[0];
    }
    m /= 4000.0;
    const double var = m2 / 4000.0 - m * m;
    CHECK(var <= 4.0 / static_cast<double>(spec.sample_count(n)) * 1.1);
  }
}
