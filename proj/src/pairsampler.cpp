#include "sgpl/pairsampler.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>
#include <stdexcept>
#include <numeric>

#include "sgpl/error.hpp"

namespace sgpl {

void SamplerConfig::validate() const {
  if (n_min_per_cell < 2) throw InputError("sampler: n_min_per_cell must be >= 2");
  if (k_ring < 0) throw InputError("sampler: k_ring must be >= 0");
  if (q_target < 1) throw InputError("sampler: q_target must be >= 1");
}

std::vector<CellId> candidate_cells(const CellAssignment& assignment, const SamplerConfig& cfg) {
  std::vector<CellId> out;
  for (const auto& [cell, members] : assignment.cells) {
    if (members.size() >= static_cast<std::size_t>(cfg.n_min_per_cell)) out.push_back(cell);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<CellId> select_isolated_cells(std::vector<CellId> candidates,
                                          const SamplerConfig& cfg, Rng& rng) {
  std::vector<CellId> selected;
  if (candidates.empty() || cfg.q_target <= 0) return selected;

  if (!std::is_sorted(candidates.begin(), candidates.end())) {
    std::sort(candidates.begin(), candidates.end());
  }
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

  std::vector<std::size_t> order(candidates.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng);

  // Scanning a uniformly shuffled list and skipping removed cells is the
  // same as repeatedly drawing uniformly from what is still available.
  // Ring cells that are not candidates are irrelevant, so removal only
  // needs a flag per candidate.
  std::vector<char> removed(candidates.size(), 0);
  const auto target = static_cast<std::size_t>(cfg.q_target);
  for (std::size_t idx : order) {
    if (selected.size() >= target) break;
    if (removed[idx]) continue;
    selected.push_back(candidates[idx]);
    for (const CellId& nb : k_ring(candidates[idx], cfg.k_ring)) {
      auto it = std::lower_bound(candidates.begin(), candidates.end(), nb);
      if (it != candidates.end() && *it == nb) removed[static_cast<std::size_t>(it - candidates.begin())] = 1;
    }
  }
  return selected;
}

PairSet sample_pairs(const CellAssignment& assignment, const std::vector<CellId>& selected,
                     int q_target, Rng& rng) {
  PairSet out;
  out.q_target = q_target;
  out.pairs.reserve(selected.size());
  for (const CellId& c : selected) {
    const auto* members = assignment.members(c);
    if (members == nullptr || members->size() < 2) {
      throw std::logic_error("sample_pairs: selected cell has fewer than 2 members");
    }
    const std::size_t m = members->size();
    // An ordered pair of distinct positions, uniform; its unordered version
    // is then uniform over the m(m-1)/2 pairs.
    std::uniform_int_distribution<std::size_t> first(0, m - 1);
    std::uniform_int_distribution<std::size_t> second(0, m - 2);
    const std::size_t a = first(rng);
    std::size_t b = second(rng);
    if (b >= a) ++b;
    std::size_t i = (*members)[a];
    std::size_t l = (*members)[b];
    if (i > l) std::swap(i, l);
    out.pairs.push_back({i, l, c});
  }
  out.achieved_target = out.q() == static_cast<std::size_t>(q_target);
  return out;
}

PairSet sample_from_assignment(const CellAssignment& assignment, const std::vector<CellId>& candidates,
                               const SamplerConfig& cfg) {
  Rng rng(cfg.seed);
  auto selected = select_isolated_cells(candidates, cfg, rng);
  return sample_pairs(assignment, selected, cfg.q_target, rng);
}

PairSet run_sgpl_sampling(const PointSet& points, const GridSpec& grid, const SamplerConfig& cfg) {
  cfg.validate();
  if (points.size() < 2) throw InputError("sgpl sampling needs at least 2 points");
  const CellAssignment assignment = assign_all(grid, points.coords);
  const auto candidates = candidate_cells(assignment, cfg);
  if (candidates.empty()) {
    throw InputError("no cell reaches n_min_per_cell; lower resolution or n_min");
  }
  return sample_from_assignment(assignment, candidates, cfg);
}

void write_pairs_csv(std::ostream& os, const PairSet& pairs, const std::vector<Point2>& coords) {
  os << kPairCsvHeader << '\n';
  char buf[512];
  for (const auto& p : pairs.pairs) {
    const Point2 a = coords.at(p.i);
    const Point2 b = coords.at(p.l);
    std::snprintf(buf, sizeof buf, "%lld,%lld,%zu,%zu,%.17g,%.17g,%.17g,%.17g\n",
                  static_cast<long long>(p.cell.q), static_cast<long long>(p.cell.r), p.i, p.l,
                  a.x, a.y, b.x, b.y);
    os << buf;
  }
}

}  // namespace sgpl
