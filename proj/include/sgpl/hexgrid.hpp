#pragma once

// Planar hexagonal tessellation with aperture-7 resolution scaling.
//
// Cells are pointy-top hexagons addressed by axial coordinates (q, r); the
// implicit third cube coordinate is s = -q - r. Resolution 0 has edge length
// `base_edge`; each further level shrinks the edge by 1/sqrt(7), so cell area
// shrinks by 7 per level like the H3 hierarchy.

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <unordered_map>
#include <vector>

#include "sgpl/geometry.hpp"

namespace sgpl {

struct GridSpec {
  int resolution = 7;
  double base_edge = 4.0;

  // Hex edge length (= circumradius) at this resolution.
  double edge() const;
  static double edge_at(double base_edge, int resolution);
};

struct CellId {
  std::int64_t q = 0;
  std::int64_t r = 0;

  friend bool operator==(const CellId&, const CellId&) = default;
  friend auto operator<=>(const CellId&, const CellId&) = default;
};

struct CellIdHash {
  std::size_t operator()(const CellId& c) const noexcept {
    auto h = static_cast<std::uint64_t>(c.q) * 0x9e3779b97f4a7c15ULL;
    h ^= static_cast<std::uint64_t>(c.r) + 0x7f4a7c159e3779b9ULL + (h << 6) + (h >> 2);
    return static_cast<std::size_t>(h);
  }
};

using CellMap = std::unordered_map<CellId, std::vector<std::size_t>, CellIdHash>;

// Partition of point indices into cells. Member lists are ascending.
struct CellAssignment {
  GridSpec grid;
  CellMap cells;
  std::vector<CellId> point_cell;  // cell of each point, by index

  const std::vector<std::size_t>* members(const CellId& c) const;
};

Point2 cell_center(const GridSpec& spec, CellId cell);

// Cell containing p (fractional axial transform + cube rounding). Points on a
// shared boundary go to whichever cell the rounding's largest-residual reset
// picks; that choice is deterministic. Throws InputError on non-finite input.
CellId point_to_cell(const GridSpec& spec, Point2 p);

std::int64_t hex_distance(CellId a, CellId b);

// All cells within hex distance k of center (center included), in a fixed
// ring-major order. Size is 1 + 3k(k+1).
std::vector<CellId> k_ring(CellId center, int k);

// Parallel over points. Throws InputError on an empty point set.
CellAssignment assign_all(const GridSpec& spec, std::span<const Point2> points);

}  // namespace sgpl
