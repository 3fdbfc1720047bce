#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "quantx/metrics.hpp"
#include "quantx/prevalence.hpp"

using namespace quantx;

namespace {

// Independent generator of random simplex points for property checks.
std::vector<double> random_simplex(int l, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(1e-6, 1.0);
  std::vector<double> v(static_cast<std::size_t>(l));
  double sum = 0.0;
  for (double& x : v) {
    x = unit(rng);
    sum += x;
  }
  for (double& x : v) x /= sum;
  return v;
}

// Direct evaluation of the smoothed relative absolute error, kept separate
// from the library implementation on purpose.
double rae_oracle(const std::vector<double>& p, const std::vector<double>& q, double eps) {
  const double l = static_cast<double>(p.size());
  auto delta = [&](double x) { return (x + eps) / (l * eps + 1.0); };
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i)
    sum += std::abs(delta(p[i]) - delta(q[i])) / delta(p[i]);
  return sum / l;
}

}  // namespace

TEST_CASE("make_prevalence accepts simplex points and near-drift") {
  auto p = make_prevalence({0.5, 0.5});
  CHECK(p[0] == 0.5);
  CHECK(p[1] == 0.5);

  // drift below 1e-6 is silently renormalized to unit mass
  auto q = make_prevalence({0.5 + 2e-7, 0.5});
  double sum = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) sum += q[i];
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("make_prevalence rejects bad input") {
  CHECK_THROWS_AS(make_prevalence({-0.1, 1.1}), Error);
  CHECK_THROWS_AS(make_prevalence({0.0, 0.0}), Error);
  CHECK_THROWS_AS(make_prevalence({0.4, 0.4}), Error);  // mass 0.8, drift > 1e-6
  try {
    make_prevalence({-0.1, 1.1});
  } catch (const Error& e) {
    CHECK(e.code() == Errc::negative_entry);
  }
  try {
    make_prevalence({0.4, 0.4});
  } catch (const Error& e) {
    CHECK(e.code() == Errc::sum_out_of_tolerance);
  }
}

TEST_CASE("normalize_prevalence divides by the mass") {
  auto p = normalize_prevalence({1.0, 1.0, 2.0});
  CHECK(p[0] == doctest::Approx(0.25));
  CHECK(p[1] == doctest::Approx(0.25));
  CHECK(p[2] == doctest::Approx(0.5));
  CHECK_THROWS_AS(normalize_prevalence({0.0, 0.0}), Error);
  CHECK_THROWS_AS(normalize_prevalence({-1.0, 2.0}), Error);
}

TEST_CASE("prevalence constructor enforces the simplex invariants") {
  CHECK_THROWS_AS(Prevalence({0.6, 0.4 + 1e-7}), Error);
  CHECK_THROWS_AS(Prevalence({1.2, -0.2}), Error);
  CHECK_NOTHROW(Prevalence({0.6, 0.4}));
}

TEST_CASE("empirical_prevalence counts classes") {
  auto p = empirical_prevalence({0, 0, 1, 1}, 2);
  CHECK(p[0] == 0.5);
  CHECK(p[1] == 0.5);

  auto q = empirical_prevalence({0, 0, 0}, 2);
  CHECK(q[0] == 1.0);
  CHECK(q[1] == 0.0);

  auto r = empirical_prevalence({2, 0, 2, 2}, 3);
  CHECK(r[0] == 0.25);
  CHECK(r[1] == 0.0);
  CHECK(r[2] == 0.75);

  CHECK_THROWS_AS(empirical_prevalence({}, 2), Error);
}

TEST_CASE("absolute_error hand values") {
  Prevalence a({0.5, 0.5});
  CHECK(absolute_error(a, a) == 0.0);
  CHECK(absolute_error(Prevalence({0.7, 0.3}), Prevalence({0.6, 0.4})) ==
        doctest::Approx(0.1).epsilon(1e-12));
  CHECK(absolute_error(Prevalence({1.0, 0.0}), Prevalence({0.0, 1.0})) == doctest::Approx(1.0));
  CHECK_THROWS_AS(absolute_error(a, Prevalence({1.0, 0.0, 0.0})), Error);
}

TEST_CASE("relative_absolute_error matches direct evaluation") {
  // bag size 250 gives the default smoothing factor 1/500
  const double eps = rae_epsilon(250);
  CHECK(eps == doctest::Approx(0.002));

  Prevalence p({0.0, 1.0});
  Prevalence q({0.01, 0.99});
  const double got = relative_absolute_error(p, q, eps);
  CHECK(got == doctest::Approx(rae_oracle(p.values(), q.values(), eps)).epsilon(1e-14));
  CHECK(got == doctest::Approx(2.50499001996008).epsilon(1e-9));

  Prevalence p2({0.5, 0.5});
  Prevalence q2({0.6, 0.4});
  CHECK(relative_absolute_error(p2, q2, eps) ==
        doctest::Approx(rae_oracle(p2.values(), q2.values(), eps)).epsilon(1e-14));

  CHECK_THROWS_AS(relative_absolute_error(p, q, 0.0), Error);
  CHECK_THROWS_AS(relative_absolute_error(p, Prevalence({1.0, 0.0, 0.0}), eps), Error);
}

TEST_CASE("rae is zero at identity and asymmetric otherwise") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 1000; ++trial) {
    const int l = 2 + static_cast<int>(rng() % 5);
    Prevalence p(random_simplex(l, rng));
    CHECK(absolute_error(p, p) == 0.0);
    CHECK(relative_absolute_error(p, p, 0.002) == 0.0);
  }
  Prevalence p({0.1, 0.9});
  Prevalence q({0.3, 0.7});
  CHECK(relative_absolute_error(p, q, 0.002) != relative_absolute_error(q, p, 0.002));
  CHECK(absolute_error(p, q) == absolute_error(q, p));
}

TEST_CASE("hellinger_distance basics") {
  std::vector<double> h1{0.5, 0.5};
  CHECK(hellinger_distance(h1, h1) == 0.0);
  CHECK(hellinger_distance({1.0, 0.0}, {0.0, 1.0}) == doctest::Approx(1.0));
  CHECK_THROWS_AS(hellinger_distance({0.5, 0.5}, {0.4, 0.4}), Error);
  CHECK_THROWS_AS(hellinger_distance({0.5, 0.5}, {0.5, 0.5, 0.0}), Error);
}

TEST_CASE("hellinger_distance is a metric on random densities") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const int bins = 2 + static_cast<int>(rng() % 16);
    auto a = random_simplex(bins, rng);
    auto b = random_simplex(bins, rng);
    auto c = random_simplex(bins, rng);
    const double ab = hellinger_distance(a, b);
    const double bc = hellinger_distance(b, c);
    const double ac = hellinger_distance(a, c);
    CHECK(ab == doctest::Approx(hellinger_distance(b, a)).epsilon(1e-15));
    CHECK(ac <= ab + bc + 1e-9);
    CHECK(ab >= 0.0);
    CHECK(ab <= 1.0 + 1e-12);
  }
}
