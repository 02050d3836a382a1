#include <doctest.h>

#include <cmath>
#include <random>

#include "cocache/discrepancy.hpp"
#include "cocache/errors.hpp"
#include "helpers.hpp"

using namespace cocache;
using namespace cocache::testing;

namespace {

PsiTable make_psi(std::size_t tau, std::size_t n, Vec values) {
  return PsiTable{tau, n, tau, 1, 1, std::move(values)};
}

}  // namespace

TEST_CASE("psi_table single-slot windows") {
  Catalog c = Catalog::make({2}, 1);
  DemandTrace trace(2, 1, 1);
  trace.at(0, 0, 0) = 1;
  trace.at(1, 0, 0) = 4;
  auto psi = psi_table(trace, c, 0, 1, 1, 1, 1, DemandScale::raw);
  CHECK(psi(0, 0) == 6);
}

TEST_CASE("psi_table windows") {
  Catalog c = Catalog::make({1, 3}, 2);
  DemandTrace trace(8, 1, 2);
  for (std::size_t t = 0; t < 8; ++t) {
    trace.at(t, 0, 0) = double(t);
    trace.at(t, 0, 1) = 2;
  }
  // T = 7, tau = 3, tau1 = 2, tau2 = 4: recent mean of file 0 is 6.5; for
  // t = 5, 6, 7 the earlier windows are slots 1..4, 2..5, 3..6.
  auto psi = psi_table(trace, c, 0, 7, 3, 2, 4, DemandScale::raw);
  CHECK(psi(0, 0) == doctest::Approx(6.5 - 2.5));
  CHECK(psi(1, 0) == doctest::Approx(6.5 - 3.5));
  CHECK(psi(2, 0) == doctest::Approx(6.5 - 4.5));
  for (std::size_t i = 0; i < 3; ++i) CHECK(psi(i, 1) == 0.0);

  CHECK_NOTHROW(psi_table(trace, c, 0, 6, 3, 2, 4, DemandScale::raw));
  CHECK_THROWS_WITH_AS(psi_table(trace, c, 0, 5, 3, 2, 4, DemandScale::raw), doctest::Contains("earliest required slot is -1"),
                       ValidationError);
}

TEST_CASE("psi_table is zero on stationary demand and linear in raw demand") {
  std::mt19937_64 rng(1);
  Catalog c = Catalog::make(random_vec(rng, 5, 1, 10), 10);
  DemandTrace flat(15, 1, 5);
  Vec d = random_vec(rng, 5, 0, 4);
  for (std::size_t t = 0; t < 15; ++t)
    for (std::size_t f = 0; f < 5; ++f) flat.at(t, 0, f) = d[f];
  auto psi = psi_table(flat, c, 0, 14, 5, 3, 4, DemandScale::raw);
  for (double x : psi.values) CHECK(x == doctest::Approx(0.0).scale(1.0));

  DemandTrace trace(15, 1, 5);
  fill_random(trace, rng, 0, 10);
  DemandTrace twice = trace;
  for (std::size_t t = 0; t < 15; ++t)
    for (double& x : twice.row(t, 0)) x *= 2;
  auto a = psi_table(trace, c, 0, 14, 5, 3, 4, DemandScale::raw);
  auto b = psi_table(twice, c, 0, 14, 5, 3, 4, DemandScale::raw);
  for (std::size_t i = 0; i < a.values.size(); ++i) CHECK(b.values[i] == doctest::Approx(2 * a.values[i]));
}

TEST_CASE("discrepancy_estimate") {
  auto zero = make_psi(2, 2, Vec(4, 0.0));
  std::vector<CachingStrategy> it(2, CachingStrategy(Vec{0.4, 0.6}));
  CHECK(discrepancy_estimate(zero, Vec{0.5, 0.5}, it) == 0.0);

  auto psi = make_psi(1, 2, {6, 0});
  CHECK(discrepancy_estimate(psi, Vec{1}, {CachingStrategy(Vec{1, 0})}) == 6);
  auto neg = make_psi(1, 2, {-6, 0});
  CHECK(discrepancy_estimate(neg, Vec{1}, {CachingStrategy(Vec{1, 0})}) == 6);
  CHECK_THROWS_AS(discrepancy_estimate(psi, Vec{0.5, 0.5}, {CachingStrategy(Vec{1, 0})}), ValidationError);
}

TEST_CASE("discrepancy_sup examples") {
  Catalog c = Catalog::make({1, 1}, 1);
  auto zero = make_psi(2, 2, Vec(4, 0.0));
  auto s0 = discrepancy_sup(zero, Vec{0.5, 0.5}, c);
  CHECK(s0.value == 0.0);
  for (const auto& s : s0.strategies) CHECK(s.fractions == Vec{0, 0});

  auto s = discrepancy_sup(make_psi(1, 2, {6, -2}), Vec{1}, c);
  CHECK(s.value == 6);
  CHECK(s.sign == +1);
  CHECK(s.strategies[0].fractions == Vec{1, 0});

  // The negative branch wins when the drops dominate.
  auto n = discrepancy_sup(make_psi(1, 2, {1, -5}), Vec{1}, c);
  CHECK(n.value == 5);
  CHECK(n.sign == -1);
}

TEST_CASE("discrepancy_sup dominates sampled iterates") {
  std::mt19937_64 rng(33);
  const std::size_t tau = 4, n = 5;
  Catalog c = Catalog::make(random_vec(rng, n, 1, 10), 12);
  auto psi = make_psi(tau, n, random_vec(rng, tau * n, -3, 3));
  Vec alpha = random_vec(rng, tau, 0, 1);
  double sum = 0;
  for (double a : alpha) sum += a;
  for (double& a : alpha) a /= sum;
  const double sup = discrepancy_sup(psi, alpha, c).value;
  for (int k = 0; k < 1000; ++k) {
    std::vector<CachingStrategy> it;
    for (std::size_t i = 0; i < tau; ++i)
      it.push_back(project_budget(random_vec(rng, n, 0, 1.5), c, ProjectionMode::always_scale).strategy);
    CHECK(discrepancy_estimate(psi, alpha, it) <= sup + 1e-12);
  }
}

TEST_CASE("mismatch_estimate") {
  HitMatrix h5{1, 0, {5}}, h3{1, 0, {3}};
  CHECK(mismatch_estimate(Vec{1}, Vec{1}, {Vec{1}}, h5, {h3}) == 2);
  CHECK(mismatch_estimate(Vec{0}, Vec{1}, {Vec{1}}, h5, {h3}) == 0);
  CHECK(mismatch_estimate(Vec{0.7}, Vec{1}, {Vec{1}}, h5, {h5}) == 0);
  CHECK_THROWS_AS(mismatch_estimate(Vec{1, 0}, Vec{1}, {Vec{1}}, h5, {h3}), ValidationError);

  std::mt19937_64 rng(6);
  for (int k = 0; k < 50; ++k) {
    HitMatrix a{3, 0, random_vec(rng, 9, 0, 5)}, b{3, 0, random_vec(rng, 9, 0, 5)};
    Vec aa = random_vec(rng, 3, 0, 1), ab = random_vec(rng, 3, 0, 1);
    const double fwd = mismatch_estimate(Vec{1}, aa, {ab}, a, {b});
    const double rev = mismatch_estimate(Vec{1}, ab, {aa}, b, {a});
    CHECK(fwd == doctest::Approx(-rev));
  }
}

TEST_CASE("bound_report") {
  const double h = 3.0, delta = 0.05;
  const std::size_t tau = 4;
  Vec u(tau, 0.25);
  auto r = bound_report(u, Vec{}, 0, 0, 0, h, delta, tau);
  CHECK(r.azuma_term == doctest::Approx(h * std::sqrt(2 * std::log(1 / delta)) / tau));
  CHECK(r.alpha_deviation == 0.0);
  CHECK(r.epsilon2 == doctest::Approx(2 * r.azuma_term));
  CHECK(r.gamma == 0.0);

  auto half = bound_report(u, Vec{}, 0, 0, 0, h, std::exp(-0.5), tau);
  CHECK(half.azuma_term == doctest::Approx(h / tau));

  CHECK_THROWS_AS(bound_report(u, Vec{}, 0, 0, 0, h, 1.0, tau), ValidationError);
  CHECK_THROWS_AS(bound_report(u, Vec{}, 0, 0, 0, h, 0.0, tau), ValidationError);
  CHECK_THROWS_AS(bound_report(u, Vec{}, 0, 0, 0, 0.0, delta, tau), ValidationError);

  auto full = bound_report(Vec{0.1, 0.2, 0.3, 0.4}, Vec{0.5, 0.5}, 2.0, 0.7, 0.4, h, delta, tau);
  CHECK(full.epsilon1 == doctest::Approx(full.azuma_term + 0.4 + 0.7));
  CHECK(full.regret_term == doctest::Approx(1.0));
  CHECK(full.alpha_deviation == doctest::Approx(h * 0.4));
  CHECK(full.epsilon2 ==
        doctest::Approx(2 * full.azuma_term + 0.4 + 1.0 + full.alpha_deviation + 2 * 0.7));
}

TEST_CASE("bound terms are monotone in each input") {
  std::mt19937_64 rng(44);
  const std::size_t tau = 5;
  for (int k = 0; k < 100; ++k) {
    Vec alpha = random_vec(rng, tau, 0, 1);
    double s = 0;
    for (double a : alpha) s += a;
    for (double& a : alpha) a /= s;
    Vec in = random_vec(rng, 4, 0, 2);  // regret, disc, mismatch, h_max
    in[3] += 0.1;
    const double delta = std::uniform_real_distribution<double>(0.01, 0.5)(rng);
    auto base = bound_report(alpha, Vec{}, in[0], in[1], in[2], in[3], delta, tau);
    for (int which = 0; which < 5; ++which) {
      Vec up = in;
      double d = delta;
      if (which < 4) up[which] += 0.3;
      else d *= 0.5;  // smaller delta widens the bound
      auto r = bound_report(alpha, Vec{}, up[0], up[1], up[2], up[3], d, tau);
      CHECK(r.epsilon1 >= base.epsilon1);
      CHECK(r.epsilon2 >= base.epsilon2);
    }
  }
}

TEST_CASE("global/local discrepancy") {
  Catalog c = Catalog::make({1}, 1);
  DemandTrace two(1, 2, 1);
  two.at(0, 0, 0) = 4;
  two.at(0, 1, 0) = 2;
  CHECK(global_local_discrepancy_estimate(two, c, 0, 0, 1) == doctest::Approx(1.0));

  std::mt19937_64 rng(2);
  Catalog c5 = Catalog::make(random_vec(rng, 5, 1, 10), 10);
  DemandTrace single(10, 1, 5);
  fill_random(single, rng, 0, 5);
  CHECK(global_local_discrepancy_estimate(single, c5, 0, 9, 5) == 0.0);

  DemandTrace same(10, 3, 5);
  for (std::size_t t = 0; t < 10; ++t) {
    Vec d = random_vec(rng, 5, 0, 5);
    for (std::size_t b = 0; b < 3; ++b)
      for (std::size_t f = 0; f < 5; ++f) same.at(t, b, f) = d[f];
  }
  for (std::size_t b = 0; b < 3; ++b) CHECK(global_local_discrepancy_estimate(same, c5, b, 9, 5) == 0.0);
  CHECK_THROWS_AS(global_local_discrepancy_estimate(same, c5, 0, 2, 5), ValidationError);
}

TEST_CASE("h_max_estimate") {
  Catalog c = Catalog::make({1, 1}, 1);
  DemandTrace trace(3, 1, 2);
  trace.at(0, 0, 0) = 2;
  trace.at(1, 0, 1) = 7;
  trace.at(2, 0, 0) = 3;
  CHECK(h_max_estimate(trace, c, 0, 2, 3) == 7);
  CHECK(h_max_estimate(trace, c, 0, 2, 1) == 3);
}
