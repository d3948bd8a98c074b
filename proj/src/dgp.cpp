#include "sgpl/dgp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <queue>
#include <utility>

#include "sgpl/error.hpp"

namespace sgpl {

std::string to_string(Pattern p) { return p == Pattern::uniform ? "uniform" : "clustered"; }

Pattern pattern_from_string(const std::string& s) {
  if (s == "uniform") return Pattern::uniform;
  if (s == "clustered") return Pattern::clustered;
  throw InputError("unknown point pattern '" + s + "' (expected uniform or clustered)");
}

void DGPSpec::validate() const {
  if (n < 1) throw InputError("dgp: n must be >= 1");
  if (!(std::abs(lambda_sem) < 1.0)) throw InputError("dgp: |lambda_sem| must be < 1");
  if (k_w < 1) throw InputError("dgp: k_w must be >= 1");
  if (k_taylor < 1) throw InputError("dgp: k_taylor must be >= 1");
  if (!(sigma_eps2 >= 0.0)) throw InputError("dgp: sigma_eps2 must be >= 0");
  if (!(sigma_x >= 0.0)) throw InputError("dgp: sigma_x must be >= 0");
  if (!(lambda_c > 0.0)) throw InputError("dgp: lambda_c must be > 0");
  if (!(sigma_cluster > 0.0)) throw InputError("dgp: sigma_cluster must be > 0");
}

std::vector<Point2> gen_points_uniform(std::size_t n, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Point2> pts(n);
  for (auto& p : pts) {
    p.x = u(rng);
    p.y = u(rng);
  }
  return pts;
}

std::vector<Point2> gen_points_clustered(std::size_t n, double lambda_c, double sigma_cluster,
                                         Rng& rng) {
  std::poisson_distribution<int> pois(lambda_c);
  int nc = 0;
  while (nc < 1) nc = pois(rng);

  const auto centroids = gen_points_uniform(static_cast<std::size_t>(nc), rng);
  const std::size_t base = n / static_cast<std::size_t>(nc);
  const std::size_t extra = n % static_cast<std::size_t>(nc);

  std::normal_distribution<double> z(0.0, sigma_cluster);
  std::vector<Point2> pts;
  pts.reserve(n);
  for (std::size_t j = 0; j < centroids.size(); ++j) {
    const std::size_t count = base + (j < extra ? 1 : 0);
    for (std::size_t c = 0; c < count; ++c) {
      Point2 p;
      do {
        p = {centroids[j].x + z(rng), centroids[j].y + z(rng)};
      } while (p.x < 0.0 || p.x > 1.0 || p.y < 0.0 || p.y > 1.0);
      pts.push_back(p);
    }
  }
  return pts;
}

namespace {

struct Candidate {
  double d2;
  std::size_t idx;
  bool operator<(const Candidate& o) const { return d2 < o.d2 || (d2 == o.d2 && idx < o.idx); }
};

}  // namespace

WeightsMatrix knn_weights(std::span<const Point2> coords, int k) {
  const std::size_t n = coords.size();
  if (k < 1) throw InputError("knn_weights: k must be >= 1");
  if (n <= static_cast<std::size_t>(k)) throw InputError("knn_weights: need n > k");

  double minx = coords[0].x, maxx = minx, miny = coords[0].y, maxy = miny;
  for (const auto& p : coords) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) throw InputError("knn_weights: non-finite coordinate");
    minx = std::min(minx, p.x);
    maxx = std::max(maxx, p.x);
    miny = std::min(miny, p.y);
    maxy = std::max(maxy, p.y);
  }

  // Square buckets, about two points each on average.
  const double extent = std::max({maxx - minx, maxy - miny, 1e-300});
  const auto per_side = static_cast<std::int64_t>(std::max(1.0, std::floor(std::sqrt(n / 2.0))));
  const double h = extent / static_cast<double>(per_side);
  const auto gx = std::clamp<std::int64_t>(static_cast<std::int64_t>((maxx - minx) / h) + 1, 1, per_side);
  const auto gy = std::clamp<std::int64_t>(static_cast<std::int64_t>((maxy - miny) / h) + 1, 1, per_side);

  auto bucket_of = [&](const Point2& p) {
    const auto bx = std::clamp<std::int64_t>(static_cast<std::int64_t>((p.x - minx) / h), 0, gx - 1);
    const auto by = std::clamp<std::int64_t>(static_cast<std::int64_t>((p.y - miny) / h), 0, gy - 1);
    return std::pair{bx, by};
  };

  // Counting sort of point indices into buckets; indices stay ascending.
  std::vector<std::size_t> start(static_cast<std::size_t>(gx * gy) + 1, 0);
  std::vector<std::size_t> bucket(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto [bx, by] = bucket_of(coords[i]);
    bucket[i] = static_cast<std::size_t>(by * gx + bx);
    ++start[bucket[i] + 1];
  }
  for (std::size_t b = 1; b < start.size(); ++b) start[b] += start[b - 1];
  std::vector<std::size_t> order(n);
  {
    auto fill = start;
    for (std::size_t i = 0; i < n; ++i) order[fill[bucket[i]]++] = i;
  }

  WeightsMatrix w;
  w.n = n;
  w.k = k;
  w.neighbors.resize(n * static_cast<std::size_t>(k));
  const auto kk = static_cast<std::size_t>(k);
  const std::int64_t max_ring = std::max(gx, gy);

#pragma omp parallel for schedule(dynamic, 64)
  for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(n); ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    const Point2 p = coords[i];
    const auto [cx, cy] = bucket_of(p);
    std::priority_queue<Candidate> heap;  // worst of the current best k on top

    auto visit = [&](std::int64_t bx, std::int64_t by) {
      if (bx < 0 || by < 0 || bx >= gx || by >= gy) return;
      const auto b = static_cast<std::size_t>(by * gx + bx);
      for (std::size_t s = start[b]; s < start[b + 1]; ++s) {
        const std::size_t j = order[s];
        if (j == i) continue;
        const double dx = coords[j].x - p.x;
        const double dy = coords[j].y - p.y;
        const Candidate c{dx * dx + dy * dy, j};
        if (heap.size() < kk) {
          heap.push(c);
        } else if (c < heap.top()) {
          heap.pop();
          heap.push(c);
        }
      }
    };

    for (std::int64_t r = 0; r <= max_ring; ++r) {
      if (r == 0) {
        visit(cx, cy);
      } else {
        for (std::int64_t d = -r; d <= r; ++d) {
          visit(cx + d, cy - r);
          visit(cx + d, cy + r);
        }
        for (std::int64_t d = -r + 1; d <= r - 1; ++d) {
          visit(cx - r, cy + d);
          visit(cx + r, cy + d);
        }
      }
      // Anything outside rings 0..r is at least r*h away.
      const double reach = static_cast<double>(r) * h;
      if (heap.size() == kk && heap.top().d2 < reach * reach * (1.0 - 1e-12)) break;
    }

    std::vector<Candidate> best;
    best.reserve(kk);
    while (!heap.empty()) {
      best.push_back(heap.top());
      heap.pop();
    }
    std::sort(best.begin(), best.end());
    for (std::size_t m = 0; m < kk; ++m) w.neighbors[i * kk + m] = best[m].idx;
  }
  return w;
}

void spmv(const WeightsMatrix& w, std::span<const double> v, std::span<double> out) {
  const double wt = w.weight();
  const auto kk = static_cast<std::size_t>(w.k);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(w.n); ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    double s = 0.0;
    for (std::size_t m = 0; m < kk; ++m) s += v[w.neighbors[i * kk + m]];
    out[i] = wt * s;
  }
}

std::vector<double> neumann_apply(const WeightsMatrix& w, double lambda, int k_taylor,
                                  std::span<const double> eps) {
  std::vector<double> v(eps.begin(), eps.end());
  std::vector<double> wv(v.size());
  for (int j = 0; j < k_taylor; ++j) {
    spmv(w, v, wv);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = eps[i] + lambda * wv[i];
  }
  return v;
}

std::vector<double> neumann_errors(const WeightsMatrix& w, double lambda, double sigma_eps2,
                                   int k_taylor, Rng& rng) {
  std::normal_distribution<double> z(0.0, 1.0);
  const double sd = std::sqrt(sigma_eps2);
  std::vector<double> eps(w.n);
  for (auto& e : eps) e = sd * z(rng);
  return neumann_apply(w, lambda, k_taylor, eps);
}

PointSet gen_dataset(const DGPSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  PointSet ps;
  ps.coords = spec.pattern == Pattern::uniform
                  ? gen_points_uniform(spec.n, rng)
                  : gen_points_clustered(spec.n, spec.lambda_c, spec.sigma_cluster, rng);

  std::normal_distribution<double> z(0.0, 1.0);
  ps.x.resize(spec.n);
  for (auto& v : ps.x) v = spec.mu_x + spec.sigma_x * z(rng);

  const WeightsMatrix w = knn_weights(ps.coords, spec.k_w);
  const auto u = neumann_errors(w, spec.lambda_sem, spec.sigma_eps2, spec.k_taylor, rng);

  ps.y.resize(spec.n);
  for (std::size_t i = 0; i < spec.n; ++i) ps.y[i] = spec.beta0 + spec.beta1 * ps.x[i] + u[i];
  return ps;
}

void write_dataset_csv(std::ostream& os, const PointSet& points) {
  os << kDatasetCsvHeader << '\n';
  char buf[256];
  for (std::size_t i = 0; i < points.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", points.coords[i].x,
                  points.coords[i].y, points.x[i], points.y[i]);
    os << buf;
  }
}

}  // namespace sgpl
