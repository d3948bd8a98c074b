#include <doctest.h>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <utility>
#include <vector>

#include "sgpl/dgp.hpp"
#include "sgpl/error.hpp"
#include "sgpl/reference.hpp"

using namespace sgpl;

namespace {

bool in_unit_square(const Point2& p) { return p.x >= 0.0 && p.x <= 1.0 && p.y >= 0.0 && p.y <= 1.0; }

double mean_nn_distance(const std::vector<Point2>& pts) {
  double total = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < pts.size(); ++j) {
      if (j != i) best = std::min(best, std::hypot(pts[i].x - pts[j].x, pts[i].y - pts[j].y));
    }
    total += best;
  }
  return total / static_cast<double>(pts.size());
}

// Exhaustive kNN: sort every other point by (distance^2, index).
std::vector<std::size_t> knn_oracle(const std::vector<Point2>& pts, int k) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    std::vector<std::pair<double, std::size_t>> d;
    for (std::size_t j = 0; j < pts.size(); ++j) {
      if (j == i) continue;
      const double dx = pts[i].x - pts[j].x, dy = pts[i].y - pts[j].y;
      d.push_back({dx * dx + dy * dy, j});
    }
    std::sort(d.begin(), d.end());
    for (int m = 0; m < k; ++m) out.push_back(d[m].second);
  }
  return out;
}

Eigen::MatrixXd dense_w(const WeightsMatrix& w) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(w.n), static_cast<Eigen::Index>(w.n));
  for (std::size_t i = 0; i < w.n; ++i) {
    for (std::size_t j : w.row(i)) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) += w.weight();
  }
  return m;
}

}  // namespace

TEST_CASE("pattern names and spec validation") {
  CHECK(pattern_from_string("uniform") == Pattern::uniform);
  CHECK(pattern_from_string("clustered") == Pattern::clustered);
  CHECK(to_string(Pattern::clustered) == "clustered");
  CHECK_THROWS_AS(pattern_from_string("poisson"), InputError);

  DGPSpec s;
  CHECK_NOTHROW(s.validate());
  s.sigma_eps2 = -1;
  CHECK_THROWS_AS(s.validate(), InputError);
  s = {};
  s.lambda_sem = 1.0;
  CHECK_THROWS_AS(s.validate(), InputError);
  s = {};
  s.k_w = 0;
  CHECK_THROWS_AS(s.validate(), InputError);
  s = {};
  s.n = 0;
  CHECK_THROWS_AS(s.validate(), InputError);
}

TEST_CASE("uniform points") {
  Rng rng(1);
  const auto one = gen_points_uniform(1, rng);
  REQUIRE(one.size() == 1);
  CHECK(in_unit_square(one[0]));

  Rng big(2);
  const auto pts = gen_points_uniform(100000, big);
  double mx = 0.0, my = 0.0;
  for (const auto& p : pts) {
    REQUIRE(in_unit_square(p));
    mx += p.x;
    my += p.y;
  }
  CHECK(std::abs(mx / 1e5 - 0.5) < 0.01);
  CHECK(std::abs(my / 1e5 - 0.5) < 0.01);

  Rng a(7), b(7);
  CHECK(gen_points_uniform(500, a) == gen_points_uniform(500, b));
}

TEST_CASE("clustered points: count and containment") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(seed);
    const auto pts = gen_points_clustered(1000, 5.0, 0.05, rng);
    CHECK(pts.size() == 1000);
    for (const auto& p : pts) CHECK(in_unit_square(p));
  }
  Rng a(3), b(3);
  CHECK(gen_points_clustered(300, 5.0, 0.05, a) == gen_points_clustered(300, 5.0, 0.05, b));
}

TEST_CASE("clustered points collapse onto balanced centroids as sigma shrinks") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(seed);
    const auto pts = gen_points_clustered(103, 5.0, 1e-9, rng);
    std::vector<Point2> reps;
    std::vector<int> sizes;
    for (const auto& p : pts) {
      bool placed = false;
      for (std::size_t g = 0; g < reps.size() && !placed; ++g) {
        if (std::hypot(p.x - reps[g].x, p.y - reps[g].y) < 1e-6) {
          ++sizes[g];
          placed = true;
        }
      }
      if (!placed) {
        reps.push_back(p);
        sizes.push_back(1);
      }
    }
    REQUIRE(!sizes.empty());
    const auto [lo, hi] = std::minmax_element(sizes.begin(), sizes.end());
    CHECK(*hi - *lo <= 1);
  }
}

TEST_CASE("clustering shortens nearest-neighbour distances") {
  double clustered = 0.0, uniform = 0.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng a(seed), b(seed + 1000);
    clustered += mean_nn_distance(gen_points_clustered(500, 5.0, 0.05, a));
    uniform += mean_nn_distance(gen_points_uniform(500, b));
  }
  CHECK(clustered < uniform);
}

TEST_CASE("knn tie rule and row structure") {
  const std::vector<Point2> line{{0, 0}, {1, 0}, {2, 0}};
  const auto w = knn_weights(line, 1);
  REQUIRE(w.n == 3);
  CHECK(w.row(0)[0] == 1);
  CHECK(w.row(1)[0] == 0);
  CHECK(w.row(2)[0] == 1);
  CHECK(w.weight() == 1.0);
  CHECK_THROWS_AS(knn_weights(line, 3), InputError);
  CHECK_THROWS_AS(knn_weights(line, 0), InputError);

  // Coincident points are each other's neighbours, never themselves.
  const std::vector<Point2> dup{{0.5, 0.5}, {0.5, 0.5}, {0.5, 0.5}, {0.9, 0.9}};
  const auto wd = knn_weights(dup, 2);
  for (std::size_t i = 0; i < wd.n; ++i) {
    for (std::size_t j : wd.row(i)) CHECK(j != i);
  }
}

TEST_CASE("knn matches the all-pairs oracle and the serial reference") {
  for (std::uint64_t seed : {1, 2, 3}) {
    Rng rng(seed);
    const auto pts = seed == 3 ? gen_points_clustered(500, 5.0, 0.05, rng) : gen_points_uniform(500, rng);
    for (int k : {1, 4, 8}) {
      const auto w = knn_weights(pts, k);
      CHECK(w.neighbors == knn_oracle(pts, k));
      CHECK(reference::knn_weights(pts, k).neighbors == w.neighbors);
      for (std::size_t i = 0; i < w.n; ++i) {
        double row_sum = 0.0;
        for (std::size_t j : w.row(i)) {
          CHECK(j != i);
          row_sum += w.weight();
        }
        CHECK(row_sum == doctest::Approx(1.0));
      }
    }
  }
  // Integer lattice: many exact ties.
  std::vector<Point2> grid;
  for (int a = 0; a < 12; ++a) {
    for (int b = 0; b < 12; ++b) grid.push_back({a * 0.1, b * 0.1});
  }
  CHECK(knn_weights(grid, 4).neighbors == knn_oracle(grid, 4));
}

TEST_CASE("spmv and Neumann series") {
  Rng rng(5);
  const auto pts = gen_points_uniform(150, rng);
  const auto w = knn_weights(pts, 4);
  std::normal_distribution<double> z;
  std::vector<double> eps(w.n);
  for (double& e : eps) e = z(rng);

  std::vector<double> wv(w.n), wv_ref(w.n);
  spmv(w, eps, wv);
  reference::spmv(w, eps, wv_ref);
  CHECK(wv == wv_ref);
  const Eigen::VectorXd e = Eigen::Map<const Eigen::VectorXd>(eps.data(), static_cast<Eigen::Index>(w.n));
  const Eigen::VectorXd dense = dense_w(w) * e;
  for (std::size_t i = 0; i < w.n; ++i) CHECK(wv[i] == doctest::Approx(dense[static_cast<Eigen::Index>(i)]).epsilon(1e-14));

  for (int k : {0, 3, 50}) CHECK(neumann_apply(w, 0.0, k, eps) == eps);

  const auto one = neumann_apply(w, 0.6, 1, eps);
  for (std::size_t i = 0; i < w.n; ++i) CHECK(one[i] == doctest::Approx(eps[i] + 0.6 * wv[i]).epsilon(1e-15));

  CHECK(neumann_apply(w, 0.5, 20, eps) == reference::neumann_apply(w, 0.5, 20, eps));
}

TEST_CASE("Neumann errors match a dense solve") {
  for (std::size_t n : {20, 100, 200}) {
    for (double lambda : {-0.7, -0.3, 0.3, 0.7}) {
      Rng rng(n * 31 + static_cast<std::uint64_t>((lambda + 1) * 10));
      const auto pts = gen_points_uniform(n, rng);
      const auto w = knn_weights(pts, 4);
      std::normal_distribution<double> z;
      std::vector<double> eps(n);
      for (double& e : eps) e = z(rng);
      const auto u = neumann_apply(w, lambda, 50, eps);

      const Eigen::MatrixXd a = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n)) - lambda * dense_w(w);
      const Eigen::VectorXd exact =
          a.partialPivLu().solve(Eigen::Map<const Eigen::VectorXd>(eps.data(), static_cast<Eigen::Index>(n)));
      double max_dev = 0.0, eps_inf = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        max_dev = std::max(max_dev, std::abs(u[i] - exact[static_cast<Eigen::Index>(i)]));
        eps_inf = std::max(eps_inf, std::abs(eps[i]));
      }
      CHECK(max_dev < 1e-6);
      const double bound = std::pow(std::abs(lambda), 51) / (1.0 - std::abs(lambda)) * eps_inf;
      CHECK(max_dev <= bound * (1.0 + 1e-6) + 1e-13);
    }
  }
}

TEST_CASE("positive dependence inflates error variance") {
  double total = 0.0;
  const int seeds = 20;
  for (int s = 0; s < seeds; ++s) {
    Rng rng(static_cast<std::uint64_t>(s));
    const auto pts = gen_points_uniform(1000, rng);
    const auto w = knn_weights(pts, 4);
    const auto u = neumann_errors(w, 0.7, 0.1, 50, rng);
    double m = 0.0;
    for (double v : u) m += v;
    m /= static_cast<double>(u.size());
    double var = 0.0;
    for (double v : u) var += (v - m) * (v - m);
    total += var / static_cast<double>(u.size() - 1);
  }
  CHECK(total / seeds > 0.1);
}

TEST_CASE("gen_dataset") {
  DGPSpec s;
  s.n = 400;
  s.sigma_eps2 = 0.0;
  s.seed = 9;
  const auto exact = gen_dataset(s);
  REQUIRE(exact.size() == 400);
  for (std::size_t i = 0; i < exact.size(); ++i) CHECK(exact.y[i] == s.beta0 + s.beta1 * exact.x[i]);

  s = {};
  s.n = 5000;
  s.seed = 123;
  const auto d = gen_dataset(s);
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    mx += d.x[i];
    my += d.y[i];
    CHECK(in_unit_square(d.coords[i]));
  }
  mx /= 5000.0;
  my /= 5000.0;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    sxy += (d.x[i] - mx) * (d.y[i] - my);
    sxx += (d.x[i] - mx) * (d.x[i] - mx);
  }
  CHECK(std::abs(sxy / sxx - 1.5) < 0.05);

  const auto again = gen_dataset(s);
  CHECK(again.coords == d.coords);
  CHECK(again.x == d.x);
  CHECK(again.y == d.y);

  s.pattern = Pattern::clustered;
  s.lambda_sem = 0.7;
  const auto c1 = gen_dataset(s);
  const auto c2 = gen_dataset(s);
  CHECK(c1.y == c2.y);
}

TEST_CASE("dataset CSV") {
  PointSet p;
  p.coords = {{0.5, 0.25}};
  p.x = {-1.0};
  p.y = {0.1};
  std::ostringstream os;
  write_dataset_csv(os, p);
  CHECK(os.str() == "px,py,x,y\n0.5,0.25,-1,0.10000000000000001\n");
}
