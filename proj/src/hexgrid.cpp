#include "sgpl/hexgrid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sgpl/error.hpp"

namespace sgpl {

namespace {

const double kSqrt3 = std::sqrt(3.0);

CellId cube_round(double fq, double fr) {
  const double fs = -fq - fr;
  double rq = std::round(fq);
  double rr = std::round(fr);
  const double rs = std::round(fs);
  const double dq = std::abs(rq - fq);
  const double dr = std::abs(rr - fr);
  const double ds = std::abs(rs - fs);
  if (dq > dr && dq > ds) {
    rq = -rr - rs;
  } else if (dr > ds) {
    rr = -rq - rs;
  }
  return {static_cast<std::int64_t>(rq), static_cast<std::int64_t>(rr)};
}

}  // namespace

double GridSpec::edge_at(double base_edge, int resolution) {
  return base_edge * std::pow(7.0, -0.5 * resolution);
}

double GridSpec::edge() const { return edge_at(base_edge, resolution); }

const std::vector<std::size_t>* CellAssignment::members(const CellId& c) const {
  auto it = cells.find(c);
  return it == cells.end() ? nullptr : &it->second;
}

Point2 cell_center(const GridSpec& spec, CellId cell) {
  const double e = spec.edge();
  const auto q = static_cast<double>(cell.q);
  const auto r = static_cast<double>(cell.r);
  return {e * kSqrt3 * (q + 0.5 * r), e * 1.5 * r};
}

CellId point_to_cell(const GridSpec& spec, Point2 p) {
  if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
    throw InputError("point_to_cell: non-finite coordinate");
  }
  const double e = spec.edge();
  const double fq = (kSqrt3 / 3.0 * p.x - p.y / 3.0) / e;
  const double fr = (2.0 / 3.0 * p.y) / e;
  return cube_round(fq, fr);
}

std::int64_t hex_distance(CellId a, CellId b) {
  const std::int64_t dq = a.q - b.q;
  const std::int64_t dr = a.r - b.r;
  return (std::abs(dq) + std::abs(dr) + std::abs(dq + dr)) / 2;
}

std::vector<CellId> k_ring(CellId center, int k) {
  std::vector<CellId> out;
  if (k < 0) return out;
  out.reserve(static_cast<std::size_t>(1 + 3 * k * (k + 1)));
  for (std::int64_t dq = -k; dq <= k; ++dq) {
    const std::int64_t lo = std::max<std::int64_t>(-k, -dq - k);
    const std::int64_t hi = std::min<std::int64_t>(k, -dq + k);
    for (std::int64_t dr = lo; dr <= hi; ++dr) {
      out.push_back({center.q + dq, center.r + dr});
    }
  }
  return out;
}

CellAssignment assign_all(const GridSpec& spec, std::span<const Point2> points) {
  if (points.empty()) throw InputError("assign_all: empty point set");
  const auto n = static_cast<std::ptrdiff_t>(points.size());

  CellAssignment out;
  out.grid = spec;
  out.point_cell.resize(points.size());

  // point_to_cell may throw; OpenMP regions must not, so flag and rethrow.
  std::ptrdiff_t bad = -1;
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const Point2 p = points[static_cast<std::size_t>(i)];
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
#pragma omp critical(sgpl_assign_bad)
      if (bad < 0 || i < bad) bad = i;
      continue;
    }
    out.point_cell[static_cast<std::size_t>(i)] = point_to_cell(spec, p);
  }
  if (bad >= 0) {
    throw InputError("assign_all: non-finite coordinate at point " + std::to_string(bad));
  }

  for (std::size_t i = 0; i < points.size(); ++i) {
    out.cells[out.point_cell[i]].push_back(i);
  }
  return out;
}

}  // namespace sgpl
