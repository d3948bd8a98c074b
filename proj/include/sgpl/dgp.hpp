#pragma once

// Simulated spatial error model data: point patterns on the unit square,
// kNN row-standardized weights, truncated Neumann-series errors.

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "sgpl/geometry.hpp"
#include "sgpl/pairsampler.hpp"

namespace sgpl {

enum class Pattern { uniform, clustered };

std::string to_string(Pattern p);
Pattern pattern_from_string(const std::string& s);  // throws InputError

struct DGPSpec {
  std::size_t n = 1000;
  Pattern pattern = Pattern::uniform;
  double beta0 = 1.0;
  double beta1 = 1.5;
  double mu_x = 0.0;
  double sigma_x = 1.0;
  double sigma_eps2 = 0.1;
  double lambda_sem = 0.0;
  int k_w = 4;
  int k_taylor = 50;
  double lambda_c = 5.0;
  double sigma_cluster = 0.05;
  std::uint64_t seed = 0;

  void validate() const;  // throws InputError
};

// Sparse weights with exactly k entries per row, each equal to 1/k.
struct WeightsMatrix {
  std::size_t n = 0;
  int k = 0;
  std::vector<std::size_t> neighbors;  // row-major, n * k

  std::span<const std::size_t> row(std::size_t i) const {
    return {neighbors.data() + i * static_cast<std::size_t>(k), static_cast<std::size_t>(k)};
  }
  double weight() const { return 1.0 / k; }
};

std::vector<Point2> gen_points_uniform(std::size_t n, Rng& rng);

// Centroid count ~ Poisson(lambda_c), redrawn until >= 1. Points are split
// as evenly as possible (the first n mod Nc clusters get one extra) and each
// is drawn from an isotropic normal around its centroid, redrawn until it
// lands in [0,1]^2.
std::vector<Point2> gen_points_clustered(std::size_t n, double lambda_c, double sigma_cluster,
                                         Rng& rng);

// k nearest distinct points by Euclidean distance, ties to the lower index.
// Bucket-grid search, parallel over rows. Throws InputError if n <= k.
WeightsMatrix knn_weights(std::span<const Point2> coords, int k);

// out = W * v, parallel over rows.
void spmv(const WeightsMatrix& w, std::span<const double> v, std::span<double> out);

// Sum_{j=0..k_taylor} (lambda W)^j eps by Horner accumulation.
std::vector<double> neumann_apply(const WeightsMatrix& w, double lambda, int k_taylor,
                                  std::span<const double> eps);

// Draws eps ~ N(0, sigma_eps2 I) and returns neumann_apply of it.
std::vector<double> neumann_errors(const WeightsMatrix& w, double lambda, double sigma_eps2,
                                   int k_taylor, Rng& rng);

PointSet gen_dataset(const DGPSpec& spec);

inline constexpr const char* kDatasetCsvHeader = "px,py,x,y";
void write_dataset_csv(std::ostream& os, const PointSet& points);

}  // namespace sgpl
