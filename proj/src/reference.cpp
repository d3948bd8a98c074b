#include "sgpl/reference.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "sgpl/error.hpp"

namespace sgpl::reference {

CellAssignment assign_all(const GridSpec& spec, std::span<const Point2> points) {
  if (points.empty()) throw InputError("assign_all: empty point set");
  CellAssignment out;
  out.grid = spec;
  out.point_cell.reserve(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    const CellId c = point_to_cell(spec, points[i]);
    out.point_cell.push_back(c);
    out.cells[c].push_back(i);
  }
  return out;
}

WeightsMatrix knn_weights(std::span<const Point2> coords, int k) {
  const std::size_t n = coords.size();
  if (k < 1 || n <= static_cast<std::size_t>(k)) throw InputError("knn_weights: need n > k >= 1");
  WeightsMatrix w;
  w.n = n;
  w.k = k;
  w.neighbors.reserve(n * static_cast<std::size_t>(k));
  std::vector<std::pair<double, std::size_t>> d;
  d.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    d.clear();
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const double dx = coords[j].x - coords[i].x;
      const double dy = coords[j].y - coords[i].y;
      d.emplace_back(dx * dx + dy * dy, j);
    }
    std::sort(d.begin(), d.end());
    for (int m = 0; m < k; ++m) w.neighbors.push_back(d[static_cast<std::size_t>(m)].second);
  }
  return w;
}

void spmv(const WeightsMatrix& w, std::span<const double> v, std::span<double> out) {
  for (std::size_t i = 0; i < w.n; ++i) {
    double s = 0.0;
    for (std::size_t j : w.row(i)) s += v[j];
    out[i] = w.weight() * s;
  }
}

std::vector<double> neumann_apply(const WeightsMatrix& w, double lambda, int k_taylor,
                                  std::span<const double> eps) {
  std::vector<double> v(eps.begin(), eps.end());
  std::vector<double> wv(v.size());
  for (int j = 0; j < k_taylor; ++j) {
    reference::spmv(w, v, wv);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = eps[i] + lambda * wv[i];
  }
  return v;
}

}  // namespace sgpl::reference
