#pragma once

// Reference estimators for small problems: the exact maximum-likelihood
// spatial error model (dense, O(N^3) per likelihood evaluation) and a
// derivative-free maximizer of the pairwise likelihood.

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "sgpl/dgp.hpp"
#include "sgpl/plcore.hpp"

namespace sgpl {

inline constexpr std::size_t kMaxDenseN = 3000;

// Column-major N x p design matrix.
struct DesignMatrix {
  std::size_t n = 0;
  std::size_t p = 0;
  std::vector<double> data;

  double operator()(std::size_t i, std::size_t j) const { return data[j * n + i]; }
  static DesignMatrix with_intercept(std::span<const double> x);
};

struct SemProfile {
  double loglik = 0.0;
  std::vector<double> beta;
  double sigma2 = 0.0;
  double log_det = 0.0;
};

// Concentrated SEM log-likelihood at a fixed lambda, with A = I - lambda W:
// beta = GLS on (AX, Ay), sigma2 = |A(y - X beta)|^2 / N,
// loglik = -N/2 log(2 pi sigma2) + log|A| - N/2.
SemProfile sem_profile_loglik(double lambda, const WeightsMatrix& w, const DesignMatrix& x,
                              std::span<const double> y);

struct MLFit {
  std::vector<double> beta;
  double beta0 = 0.0;
  double beta1 = 0.0;
  double lambda_ml = 0.0;
  double sigma2_ml = 0.0;
  double loglik = 0.0;
  int n_evals = 0;
  std::string warning;  // non-empty when the pre-scan saw several modes
};

// 21-point pre-scan on (-0.99, 0.99), then golden-section search on the
// bracket around the best scan point, to |dlambda| < 1e-6, within
// (-0.999, 0.999). Throws InputError when N > kMaxDenseN.
MLFit fit_ml_sem(const WeightsMatrix& w, const DesignMatrix& x, std::span<const double> y);

// Maximizes f on [a, b] by golden-section search until the bracket is
// narrower than tol. Returns the best abscissa evaluated.
double golden_section_max(const std::function<double(double)>& f, double a, double b, double tol,
                          int* n_evals = nullptr);

// Grid over (beta, lambda) with sigma2 profiled out, then alternating
// golden-section refinement. Evaluates the pairwise log-likelihood from the
// raw pairs, never from the sufficient statistics.
Theta maximize_pl_brute(const PairData& data);

}  // namespace sgpl
