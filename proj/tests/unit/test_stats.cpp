#include <catch_amalgamated.hpp>

#include "toolgate/rng.hpp"
#include "toolgate/stats.hpp"

#include <cmath>

using namespace toolgate;

namespace {

// Exact two-sided sign test by enumerating all 2^n sign patterns.
double enumerated_p(int k, int n) {
  const int observed = std::min(k, n - k);
  std::uint64_t extreme = 0;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
    const int pos = __builtin_popcountll(mask);
    if (std::min(pos, n - pos) <= observed) ++extreme;
  }
  return static_cast<double>(extreme) / std::ldexp(1.0, n);
}

}  // namespace

TEST_CASE("sign test matches full enumeration for small n", "[stats]") {
  for (int n = 1; n <= 16; ++n) {
    for (int k = 0; k <= n; ++k) {
      std::vector<double> d(static_cast<std::size_t>(k), 1.0);
      d.resize(static_cast<std::size_t>(n), -1.0);
      const SignTest t = sign_test_from_differences(d);
      REQUIRE(t.p_value);
      CHECK(*t.p_value == Catch::Approx(enumerated_p(k, n)).epsilon(1e-12));
    }
  }
}

TEST_CASE("sign test worked examples", "[stats]") {
  const SignTest a = sign_test_from_differences({1.0, 2.0, 0.0});
  CHECK(a.positive == 2);
  CHECK(a.negative == 0);
  CHECK(a.ties == 1);
  CHECK(*a.p_value == Catch::Approx(0.5));

  const SignTest b = sign_test_from_differences(std::vector<double>(8, 0.3));
  CHECK(*b.p_value == Catch::Approx(0.0078125));

  CHECK_FALSE(sign_test_from_differences({0.0, 0.0}).p_value);
  CHECK_FALSE(sign_test_from_differences({}).p_value);
}

TEST_CASE("paired sign test uses b minus a", "[stats]") {
  const SignTest t = paired_sign_test({{0.1, 0.2}, {0.5, 0.4}, {0.3, 0.9}, {0.2, 0.2}});
  CHECK(t.positive == 2);
  CHECK(t.negative == 1);
  CHECK(t.ties == 1);
}

TEST_CASE("binomial cdf is symmetric and sums to one", "[stats]") {
  for (int n = 1; n <= 30; ++n) {
    CHECK(binomial_half_cdf(n, n) == Catch::Approx(1.0));
    for (int k = 0; k < n; ++k) {
      CHECK(binomial_half_cdf(k, n) + binomial_half_cdf(n - k - 1, n) == Catch::Approx(1.0));
    }
  }
}

TEST_CASE("bootstrap of constant samples is degenerate", "[stats]") {
  const Interval ci = bootstrap_ci({0.5, 0.5, 0.5});
  CHECK(ci.lo == 0.5);
  CHECK(ci.hi == 0.5);
}

TEST_CASE("bootstrap interval brackets the mean and is deterministic", "[stats]") {
  const Interval ci = bootstrap_ci({0.0, 1.0});
  CHECK(ci.lo <= 0.5);
  CHECK(ci.hi >= 0.5);
  CHECK(ci.lo >= 0.0);
  CHECK(ci.hi <= 1.0);

  Rng rng(7);
  std::vector<double> xs;
  for (int i = 0; i < 40; ++i) xs.push_back(rng.uniform());
  const Interval a = bootstrap_ci(xs, 2000, 3);
  const Interval b = bootstrap_ci(xs, 2000, 3);
  CHECK(a.lo == b.lo);
  CHECK(a.hi == b.hi);
  CHECK(a.lo <= mean(xs));
  CHECK(mean(xs) <= a.hi);
  const Interval narrow = bootstrap_ci(xs, 2000, 3, 0.5);
  CHECK(narrow.hi - narrow.lo < a.hi - a.lo);
}

TEST_CASE("bootstrap rejects bad arguments", "[stats]") {
  CHECK_THROWS_AS(bootstrap_ci({}), std::invalid_argument);
  CHECK_THROWS_AS(bootstrap_ci({1.0}, 0), std::invalid_argument);
  CHECK_THROWS_AS(bootstrap_ci({1.0}, 10, 0, 1.0), std::invalid_argument);
}

TEST_CASE("nearest rank percentile", "[stats]") {
  CHECK(nearest_rank({}, 50) == 0.0);
  CHECK(nearest_rank({3, 1, 2, 4}, 50) == 2.0);
  CHECK(nearest_rank({3, 1, 2, 4}, 100) == 4.0);
  std::vector<double> hundred;
  for (int i = 1; i <= 100; ++i) hundred.push_back(i);
  CHECK(nearest_rank(hundred, 95) == 95.0);
  CHECK(nearest_rank(hundred, 99) == 99.0);
  CHECK(mean({1, 2, 3}) == 2.0);
}
