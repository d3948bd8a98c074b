#pragma once

// Pairwise likelihood for a scalar-regressor spatial error model. Each pair
// (i, l) contributes a bivariate normal density of its residuals
// e = y - x*beta with marginal variance sigma2 and correlation lambda.

#include <cstddef>
#include <vector>

#include "sgpl/geometry.hpp"
#include "sgpl/pairsampler.hpp"

namespace sgpl {

struct Theta {
  double beta = 0.0;
  double sigma2 = 1.0;
  double lambda = 0.0;
};

struct PairData {
  std::vector<double> xi, xl, yi, yl;

  std::size_t q() const { return xi.size(); }
  void push_back(double x_i, double x_l, double y_i, double y_l);
  void validate() const;  // equal lengths, q >= 1, finite entries
};

// Gathers (x, y) for each pair, after subtracting the given centering.
PairData make_pair_data(const PointSet& points, const PairSet& pairs, double x_center = 0.0,
                        double y_center = 0.0);

struct SufficientStats {
  double alpha1 = 0.0;  // sum xi^2 + xl^2
  double alpha2 = 0.0;  // sum yi^2 + yl^2
  double alpha3 = 0.0;  // sum xi*yi + xl*yl
  double alpha4 = 0.0;  // sum xi*yl + xl*yi
  double alpha5 = 0.0;  // sum xi*xl
  double alpha6 = 0.0;  // sum yi*yl
  std::size_t q = 0;
};

struct FitOptions {
  double tol = 1e-10;
  int max_iter = 200;
  double lambda_clamp = 0.9999;

  void validate() const;
};

struct PLFit {
  double beta = 0.0;
  double sigma2 = 0.0;
  double lambda = 0.0;
  int iterations = 0;
  bool converged = false;
  bool lambda_at_bound = false;  // the clamp was active at the final iterate
  double loglik = 0.0;

  Theta theta() const { return {beta, sigma2, lambda}; }
};

// Throws std::domain_error unless sigma2 > 0 and |lambda| < 1.
double pair_loglik(const Theta& theta, double xi, double xl, double yi, double yl);
double total_loglik(const Theta& theta, const PairData& data);

// Compensated sums. Throws InputError when q == 0.
SufficientStats sufficient_stats(const PairData& data);

// Closed-form updates. Each throws NumericalError on a degenerate input.
double update_beta(const SufficientStats& s, double lambda);
double update_sigma2(const SufficientStats& s, double beta, double lambda);
double update_lambda(const SufficientStats& s, double beta, double sigma2);

// Fit from statistics alone; loglik is left at 0 (needs the raw pairs).
PLFit fit_pl(const SufficientStats& stats, const FitOptions& opts = {});
PLFit fit_pl(const PairData& data, const FitOptions& opts = {});

struct FixedPointResiduals {
  double beta = 0.0;    // |update_beta(lambda) - beta|
  double sigma2 = 0.0;  // relative: |update_sigma2 - sigma2| / sigma2
  double lambda = 0.0;  // |update_lambda - lambda|
  double max() const;
};

FixedPointResiduals fixed_point_residuals(const SufficientStats& stats, const Theta& theta);

}  // namespace sgpl
