#pragma once

// Serial reference versions of the OpenMP kernels. The benchmark times the
// two side by side and the tests require identical results.

#include <span>
#include <vector>

#include "sgpl/dgp.hpp"
#include "sgpl/hexgrid.hpp"

namespace sgpl::reference {

CellAssignment assign_all(const GridSpec& spec, std::span<const Point2> points);

// All-pairs distance sort per row, O(n^2 log n).
WeightsMatrix knn_weights(std::span<const Point2> coords, int k);

void spmv(const WeightsMatrix& w, std::span<const double> v, std::span<double> out);

std::vector<double> neumann_apply(const WeightsMatrix& w, double lambda, int k_taylor,
                                  std::span<const double> eps);

}  // namespace sgpl::reference
