#pragma once

// Grid-based pair selection: candidate cells, spatially isolated cell
// selection, and one within-cell pair per selected cell.

#include <cstdint>
#include <iosfwd>
#include <random>
#include <string>
#include <vector>

#include "sgpl/geometry.hpp"
#include "sgpl/hexgrid.hpp"

namespace sgpl {

using Rng = std::mt19937_64;

struct SamplerConfig {
  int n_min_per_cell = 2;
  int k_ring = 1;
  int q_target = 1000;
  std::uint64_t seed = 0;

  void validate() const;  // throws InputError
};

struct SampledPair {
  std::size_t i = 0;  // always i < l
  std::size_t l = 0;
  CellId cell;

  friend bool operator==(const SampledPair&, const SampledPair&) = default;
};

struct PairSet {
  std::vector<SampledPair> pairs;
  int q_target = 0;
  bool achieved_target = false;

  std::size_t q() const { return pairs.size(); }
  friend bool operator==(const PairSet&, const PairSet&) = default;
};

// Cells with at least n_min_per_cell members, sorted by CellId.
std::vector<CellId> candidate_cells(const CellAssignment& assignment, const SamplerConfig& cfg);

// Draws cells uniformly without replacement from the available set; each
// pick removes its k-ring from availability. Stops at q_target picks or
// when nothing is left. The draw order is a seeded shuffle of the sorted
// candidate list, so the result depends only on the candidate set and the
// rng state.
std::vector<CellId> select_isolated_cells(std::vector<CellId> candidates,
                                          const SamplerConfig& cfg, Rng& rng);

// One pair per selected cell, uniform over the cell's unordered pairs of
// distinct members. Throws std::logic_error if a cell has < 2 members.
PairSet sample_pairs(const CellAssignment& assignment, const std::vector<CellId>& selected,
                     int q_target, Rng& rng);

// Sampling on a precomputed assignment. Seeds its own Rng from cfg.seed.
PairSet sample_from_assignment(const CellAssignment& assignment, const std::vector<CellId>& candidates,
                               const SamplerConfig& cfg);

// Grid overlay, candidate filter, selection, pair sampling. Throws
// InputError when N < 2 or when no cell reaches n_min_per_cell.
PairSet run_sgpl_sampling(const PointSet& points, const GridSpec& grid, const SamplerConfig& cfg);

inline constexpr const char* kPairCsvHeader = "cell_q,cell_r,i,l,xi_coord,yi_coord,xl_coord,yl_coord";

void write_pairs_csv(std::ostream& os, const PairSet& pairs, const std::vector<Point2>& coords);

}  // namespace sgpl
