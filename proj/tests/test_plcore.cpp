#include <doctest.h>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>
#include <vector>

#include "pl_checks.hpp"
#include "sgpl/error.hpp"
#include "sgpl/plcore.hpp"

using namespace sgpl;
using sgpl::testing::max_fd_gradient;
using sgpl::testing::simulate_pairs;

namespace {

// Bivariate normal log density from an explicit 2x2 covariance.
double bvn_oracle(const Theta& t, double xi, double xl, double yi, double yl) {
  Eigen::Matrix2d cov;
  cov << t.sigma2, t.lambda * t.sigma2, t.lambda * t.sigma2, t.sigma2;
  const Eigen::Vector2d e(yi - xi * t.beta, yl - xl * t.beta);
  return -std::log(2.0 * std::numbers::pi) - 0.5 * std::log(cov.determinant()) -
         0.5 * e.dot(cov.inverse() * e);
}

bool close_rel(double a, double b, double rel) { return std::abs(a - b) <= rel * std::max(std::abs(a), std::abs(b)); }

void check_converged_fit(const PairData& d, const PLFit& f) {
  REQUIRE(f.converged);
  CHECK(fixed_point_residuals(sufficient_stats(d), f.theta()).max() < 1e-8);
  CHECK(max_fd_gradient(d, f.theta()) < 1e-4);
}

PairData two_pairs() {
  PairData d;
  d.push_back(1, 0, 2, 3);
  d.push_back(2, 1, 4, 1);
  return d;
}

}  // namespace

TEST_CASE("pair_loglik examples") {
  const double l2pi = std::log(2.0 * std::numbers::pi);
  CHECK(pair_loglik({0, 1, 0}, 0, 0, 0, 0) == doctest::Approx(-l2pi));
  CHECK(pair_loglik({0, 1, 0}, 0, 0, 1, 1) == doctest::Approx(-l2pi - 1.0));
  const Theta t{1, 2, 0.5};
  CHECK(pair_loglik(t, 1, 0, 2, 3) == doctest::Approx(bvn_oracle(t, 1, 0, 2, 3)).epsilon(1e-13));

  std::mt19937_64 rng(1);
  std::normal_distribution<double> z;
  std::uniform_real_distribution<double> lam(-0.95, 0.95), s2(0.1, 5.0);
  for (int k = 0; k < 200; ++k) {
    const Theta r{z(rng), s2(rng), lam(rng)};
    const double xi = z(rng), xl = z(rng), yi = z(rng), yl = z(rng);
    CHECK(pair_loglik(r, xi, xl, yi, yl) == doctest::Approx(bvn_oracle(r, xi, xl, yi, yl)).epsilon(1e-12));
  }
}

TEST_CASE("pair_loglik domain") {
  CHECK_THROWS_AS(pair_loglik({0, 0, 0}, 0, 0, 0, 0), std::domain_error);
  CHECK_THROWS_AS(pair_loglik({0, -1, 0}, 0, 0, 0, 0), std::domain_error);
  CHECK_THROWS_AS(pair_loglik({0, 1, 1}, 0, 0, 0, 0), std::domain_error);
  CHECK_THROWS_AS(pair_loglik({0, 1, -1.5}, 0, 0, 0, 0), std::domain_error);
}

TEST_CASE("total_loglik") {
  PairData one;
  one.push_back(0.3, -1, 2, 0.5);
  const Theta t{0.7, 1.3, -0.2};
  CHECK(total_loglik(t, one) == pair_loglik(t, 0.3, -1, 2, 0.5));

  std::mt19937_64 rng(4);
  const PairData d = simulate_pairs(20, 1.5, 1.0, 0.3, rng);
  double naive = 0.0;
  for (std::size_t k = 0; k < d.q(); ++k) naive += bvn_oracle(t, d.xi[k], d.xl[k], d.yi[k], d.yl[k]);
  CHECK(total_loglik(t, d) == doctest::Approx(naive).epsilon(1e-12));

  PairData twice = d;
  for (std::size_t k = 0; k < d.q(); ++k) twice.push_back(d.xi[k], d.xl[k], d.yi[k], d.yl[k]);
  CHECK(total_loglik(t, twice) == doctest::Approx(2.0 * total_loglik(t, d)).epsilon(1e-14));
}

TEST_CASE("sufficient statistics by hand") {
  PairData d;
  d.push_back(1, 0, 2, 3);
  auto s = sufficient_stats(d);
  CHECK(s.alpha1 == 1);
  CHECK(s.alpha2 == 13);
  CHECK(s.alpha3 == 2);
  CHECK(s.alpha4 == 3);
  CHECK(s.alpha5 == 0);
  CHECK(s.alpha6 == 6);
  CHECK(s.q == 1);

  s = sufficient_stats(two_pairs());
  CHECK(s.alpha1 == 6);
  CHECK(s.alpha2 == 30);
  CHECK(s.alpha3 == 11);
  CHECK(s.alpha4 == 9);
  CHECK(s.alpha5 == 2);
  CHECK(s.alpha6 == 10);
  CHECK(s.q == 2);

  CHECK_THROWS_AS(sufficient_stats(PairData{}), InputError);
  PairData bad = two_pairs();
  bad.yl.pop_back();
  CHECK_THROWS_AS(sufficient_stats(bad), InputError);
  PairData inf;
  inf.push_back(1, 0, std::numeric_limits<double>::infinity(), 0);
  CHECK_THROWS_AS(sufficient_stats(inf), InputError);
}

TEST_CASE("first iteration by hand") {
  const auto s = sufficient_stats(two_pairs());
  const double beta = update_beta(s, 0.0);
  CHECK(beta == doctest::Approx(11.0 / 6.0).epsilon(1e-15));
  const double sigma2 = update_sigma2(s, beta, 0.0);
  CHECK(sigma2 == doctest::Approx((30 + beta * beta * 6 - 2 * beta * 11) / 4.0).epsilon(1e-14));
  CHECK(sigma2 == doctest::Approx(2.458333).epsilon(1e-6));
  const double lambda = update_lambda(s, beta, sigma2);
  CHECK(lambda == doctest::Approx((10 - beta * 9 + beta * beta * 2) / (2 * sigma2)).epsilon(1e-14));
  CHECK(lambda == doctest::Approx(0.045198).epsilon(1e-5));

  FitOptions one;
  one.max_iter = 1;
  const PLFit f = fit_pl(s, one);
  CHECK(f.iterations == 1);
  CHECK_FALSE(f.converged);
  CHECK(f.beta == doctest::Approx(11.0 / 6.0));
  CHECK(f.sigma2 == doctest::Approx(2.458333).epsilon(1e-6));
  CHECK(f.lambda == doctest::Approx(0.045198).epsilon(1e-5));
}

TEST_CASE("closed-form updates are the first-order conditions") {
  // Each update maximizes total_loglik in its own coordinate.
  std::mt19937_64 rng(8);
  const PairData d = simulate_pairs(60, 1.2, 0.8, 0.4, rng);
  const auto s = sufficient_stats(d);
  const double lambda = 0.3, sigma2 = 0.9;
  const double beta = update_beta(s, lambda);
  auto fb = [&](double b) { return total_loglik({b, sigma2, lambda}, d); };
  CHECK((fb(beta + 1e-5) - fb(beta - 1e-5)) / 2e-5 == doctest::Approx(0.0).scale(1.0).epsilon(1e-5));
  const double s2 = update_sigma2(s, beta, lambda);
  auto fs = [&](double v) { return total_loglik({beta, v, lambda}, d); };
  CHECK((fs(s2 + 1e-6) - fs(s2 - 1e-6)) / 2e-6 == doctest::Approx(0.0).scale(1.0).epsilon(1e-5));
}

TEST_CASE("large-sample recovery at lambda 0") {
  std::mt19937_64 rng(2026);
  const PairData d = simulate_pairs(10000, 1.5, 1.0, 0.0, rng);
  const PLFit f = fit_pl(d);
  check_converged_fit(d, f);
  CHECK(std::abs(f.beta - 1.5) < 0.05);
  CHECK(std::abs(f.lambda) < 0.05);
  CHECK(std::abs(f.sigma2 - 1.0) < 0.05);
}

TEST_CASE("converged fits satisfy the fixed point and stationarity") {
  std::mt19937_64 rng(99);
  int fits = 0;
  for (double lt : {-0.9, -0.5, 0.0, 0.3, 0.5, 0.75, 0.9, 0.99}) {
    for (std::size_t q : {10, 50, 200, 1000}) {
      const PairData d = simulate_pairs(q, -0.7, 2.0, lt, rng);
      const PLFit f = fit_pl(d);
      CAPTURE(lt);
      CAPTURE(q);
      check_converged_fit(d, f);
      CHECK_FALSE(f.lambda_at_bound);
      CHECK(f.loglik == doctest::Approx(total_loglik(f.theta(), d)));
      ++fits;
    }
  }
  CHECK(fits == 32);
}

TEST_CASE("statistics-only and pair-data fits agree") {
  std::mt19937_64 rng(12);
  for (int t = 0; t < 20; ++t) {
    const PairData d = simulate_pairs(100, 1.5, 0.5, 0.4, rng);
    const PLFit a = fit_pl(sufficient_stats(d));
    const PLFit b = fit_pl(d);
    CHECK(a.beta == doctest::Approx(b.beta).epsilon(1e-10));
    CHECK(a.sigma2 == doctest::Approx(b.sigma2).epsilon(1e-10));
    CHECK(a.lambda == doctest::Approx(b.lambda).epsilon(1e-9));
    CHECK(a.loglik == 0.0);
  }
}

TEST_CASE("scale equivariance in y") {
  std::mt19937_64 rng(31);
  const PairData d = simulate_pairs(150, 1.5, 1.0, 0.5, rng);
  const PLFit f = fit_pl(d);
  for (double c : {-3.0, 0.01, 250.0}) {
    PairData s = d;
    for (auto* v : {&s.yi, &s.yl}) {
      for (double& y : *v) y *= c;
    }
    const PLFit g = fit_pl(s);
    REQUIRE(g.converged);
    CHECK(close_rel(g.beta, c * f.beta, 1e-8));
    CHECK(close_rel(g.sigma2, c * c * f.sigma2, 1e-8));
    CHECK(g.lambda == doctest::Approx(f.lambda).epsilon(1e-8));
  }
}

TEST_CASE("pair order and within-pair swap invariance") {
  std::mt19937_64 rng(41);
  const PairData d = simulate_pairs(300, 0.4, 1.5, -0.3, rng);
  const auto s = sufficient_stats(d);
  const PLFit f = fit_pl(d);

  PairData swapped;
  for (std::size_t k = 0; k < d.q(); ++k) swapped.push_back(d.xl[k], d.xi[k], d.yl[k], d.yi[k]);
  const auto ss = sufficient_stats(swapped);
  CHECK(ss.alpha1 == s.alpha1);
  CHECK(ss.alpha2 == s.alpha2);
  CHECK(ss.alpha3 == s.alpha3);
  CHECK(ss.alpha4 == s.alpha4);
  CHECK(ss.alpha5 == s.alpha5);
  CHECK(ss.alpha6 == s.alpha6);
  const PLFit fs = fit_pl(swapped);
  CHECK(fs.beta == f.beta);
  CHECK(fs.sigma2 == f.sigma2);
  CHECK(fs.lambda == f.lambda);

  // Compensated sums make the totals order-independent up to final rounding.
  std::vector<std::size_t> perm(d.q());
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  for (int t = 0; t < 5; ++t) {
    std::shuffle(perm.begin(), perm.end(), rng);
    PairData p;
    for (std::size_t k : perm) p.push_back(d.xi[k], d.xl[k], d.yi[k], d.yl[k]);
    const auto sp = sufficient_stats(p);
    CHECK(close_rel(sp.alpha1, s.alpha1, 1e-15));
    CHECK(close_rel(sp.alpha2, s.alpha2, 1e-15));
    CHECK(close_rel(sp.alpha3, s.alpha3, 1e-15));
    CHECK(close_rel(sp.alpha4, s.alpha4, 1e-15));
    CHECK(close_rel(sp.alpha5, s.alpha5, 1e-15));
    CHECK(close_rel(sp.alpha6, s.alpha6, 1e-15));
    const PLFit fp = fit_pl(p);
    CHECK(fp.beta == doctest::Approx(f.beta).epsilon(1e-12));
    CHECK(fp.sigma2 == doctest::Approx(f.sigma2).epsilon(1e-12));
    CHECK(fp.lambda == doctest::Approx(f.lambda).epsilon(1e-12));
  }
}

TEST_CASE("fit error paths") {
  PairData one;
  one.push_back(1, 2, 3, 4);
  CHECK_THROWS_AS(fit_pl(one), InputError);

  PairData zero_x;
  for (int k = 0; k < 5; ++k) zero_x.push_back(0, 0, k, -k);
  CHECK_THROWS_AS(fit_pl(zero_x), NumericalError);

  PairData const_y;
  for (int k = 0; k < 5; ++k) const_y.push_back(k, k + 1, 0, 0);
  CHECK_THROWS_AS(fit_pl(const_y), NumericalError);
  CHECK_THROWS_AS(fit_pl(sufficient_stats(const_y)), NumericalError);

  FitOptions bad;
  bad.tol = 0;
  CHECK_THROWS_AS(fit_pl(two_pairs(), bad), InputError);
  bad = {};
  bad.lambda_clamp = 1.0;
  CHECK_THROWS_AS(fit_pl(two_pairs(), bad), InputError);
}

TEST_CASE("exact fit without noise recovers beta") {
  PairData d;
  std::mt19937_64 rng(5);
  std::normal_distribution<double> z;
  for (int k = 0; k < 50; ++k) {
    const double xi = z(rng), xl = z(rng);
    d.push_back(xi, xl, 1.5 * xi + 1e-9 * z(rng), 1.5 * xl + 1e-9 * z(rng));
  }
  const PLFit f = fit_pl(d);
  CHECK(f.beta == doctest::Approx(1.5).epsilon(1e-8));
  CHECK(f.sigma2 < 1e-16);
}
