#include "sgpl/plcore.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "sgpl/error.hpp"

namespace sgpl {

namespace {

// Neumaier compensated accumulator.
class CompensatedSum {
 public:
  void add(double v) {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v)) {
      comp_ += (sum_ - t) + v;
    } else {
      comp_ += (v - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

void check_theta(const Theta& t) {
  if (!(t.sigma2 > 0.0)) throw std::domain_error("pair loglik: sigma2 must be > 0");
  if (!(std::abs(t.lambda) < 1.0)) throw std::domain_error("pair loglik: |lambda| must be < 1");
}

double log_density(const Theta& t, double xi, double xl, double yi, double yl) {
  const double one_m_l2 = 1.0 - t.lambda * t.lambda;
  const double ei = yi - xi * t.beta;
  const double el = yl - xl * t.beta;
  const double quad = ei * ei - 2.0 * t.lambda * ei * el + el * el;
  return -std::log(2.0 * std::numbers::pi) - std::log(t.sigma2) - 0.5 * std::log(one_m_l2) -
         quad / (2.0 * t.sigma2 * one_m_l2);
}

}  // namespace

void PairData::push_back(double x_i, double x_l, double y_i, double y_l) {
  xi.push_back(x_i);
  xl.push_back(x_l);
  yi.push_back(y_i);
  yl.push_back(y_l);
}

void PairData::validate() const {
  const std::size_t n = xi.size();
  if (xl.size() != n || yi.size() != n || yl.size() != n) {
    throw InputError("pair data: arrays differ in length");
  }
  if (n == 0) throw InputError("pair data: no pairs");
  for (std::size_t k = 0; k < n; ++k) {
    if (!std::isfinite(xi[k]) || !std::isfinite(xl[k]) || !std::isfinite(yi[k]) ||
        !std::isfinite(yl[k])) {
      throw InputError("pair data: non-finite value in pair " + std::to_string(k));
    }
  }
}

PairData make_pair_data(const PointSet& points, const PairSet& pairs, double x_center,
                        double y_center) {
  PairData d;
  d.xi.reserve(pairs.q());
  d.xl.reserve(pairs.q());
  d.yi.reserve(pairs.q());
  d.yl.reserve(pairs.q());
  for (const auto& p : pairs.pairs) {
    d.push_back(points.x.at(p.i) - x_center, points.x.at(p.l) - x_center,
                points.y.at(p.i) - y_center, points.y.at(p.l) - y_center);
  }
  return d;
}

double pair_loglik(const Theta& theta, double xi, double xl, double yi, double yl) {
  check_theta(theta);
  return log_density(theta, xi, xl, yi, yl);
}

double total_loglik(const Theta& theta, const PairData& data) {
  check_theta(theta);
  CompensatedSum s;
  for (std::size_t k = 0; k < data.q(); ++k) {
    s.add(log_density(theta, data.xi[k], data.xl[k], data.yi[k], data.yl[k]));
  }
  return s.value();
}

SufficientStats sufficient_stats(const PairData& data) {
  data.validate();
  CompensatedSum a1, a2, a3, a4, a5, a6;
  for (std::size_t k = 0; k < data.q(); ++k) {
    const double xi = data.xi[k], xl = data.xl[k], yi = data.yi[k], yl = data.yl[k];
    a1.add(xi * xi + xl * xl);
    a2.add(yi * yi + yl * yl);
    a3.add(xi * yi + xl * yl);
    a4.add(xi * yl + xl * yi);
    a5.add(xi * xl);
    a6.add(yi * yl);
  }
  return {a1.value(), a2.value(), a3.value(), a4.value(), a5.value(), a6.value(), data.q()};
}

void FitOptions::validate() const {
  if (!(tol > 0.0)) throw InputError("fit options: tol must be > 0");
  if (max_iter < 1) throw InputError("fit options: max_iter must be >= 1");
  if (!(lambda_clamp > 0.0 && lambda_clamp < 1.0)) {
    throw InputError("fit options: lambda_clamp must lie in (0, 1)");
  }
}

double update_beta(const SufficientStats& s, double lambda) {
  const double den = s.alpha1 - 2.0 * lambda * s.alpha5;
  if (std::abs(den) <= 1e-12) throw NumericalError("degenerate regressor configuration");
  return (s.alpha3 - lambda * s.alpha4) / den;
}

namespace {

double sigma2_from_numerator(double num, std::size_t q, double lambda) {
  const double sigma2 = num / (2.0 * static_cast<double>(q) * (1.0 - lambda * lambda));
  if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) {
    throw NumericalError("degenerate residual variance");
  }
  return sigma2;
}

}  // namespace

double update_sigma2(const SufficientStats& s, double beta, double lambda) {
  const double num = s.alpha2 + beta * beta * s.alpha1 - 2.0 * beta * s.alpha3 -
                     2.0 * lambda * s.alpha6 - 2.0 * lambda * beta * beta * s.alpha5 +
                     2.0 * lambda * beta * s.alpha4;
  return sigma2_from_numerator(num, s.q, lambda);
}

double update_lambda(const SufficientStats& s, double beta, double sigma2) {
  return (s.alpha6 - beta * s.alpha4 + beta * beta * s.alpha5) /
         (static_cast<double>(s.q) * sigma2);
}

namespace {

struct VarianceStep {
  double sigma2;
  double lambda;  // unclamped
};

// step(beta, lambda) returns the sigma2 update followed by the lambda update.
template <typename StepFn>
PLFit fit_iterate(const SufficientStats& stats, const FitOptions& opts, StepFn&& step) {
  opts.validate();
  if (stats.q < 2) throw InputError("fit_pl: need at least 2 pairs");

  const double clamp = opts.lambda_clamp;
  auto clamp_lambda = [clamp](double v) { return std::clamp(v, -clamp, clamp); };

  // beta and sigma2 are functions of the current lambda, so one sweep
  // beta -> sigma2 -> lambda is a scalar map lambda -> g(lambda). Plain
  // substitution has slope -r^2/(1-r^2) at the fixed point r, which
  // oscillates without converging once |r| > 1/sqrt(2). When the secant
  // slope shows that regime the lambda step is relaxed with the Wegstein
  // factor 1/(1 - slope); fixed points are unchanged.
  PLFit fit;
  double lambda = 0.0;
  double prev_beta = 0.0, prev_sigma2 = 0.0;
  double prev_lambda = 0.0, prev_g = 0.0;
  bool have_prev = false;

  for (int it = 1; it <= opts.max_iter; ++it) {
    const double beta = update_beta(stats, lambda);
    const auto [sigma2, g_raw] = step(beta, lambda);
    if (!std::isfinite(g_raw)) throw NumericalError("non-finite lambda update");
    const double g = clamp_lambda(g_raw);

    double change = std::abs(g - lambda);
    if (have_prev) {
      change = std::max({change, std::abs(beta - prev_beta), std::abs(sigma2 - prev_sigma2) / sigma2});
    }

    double omega = 1.0;
    if (have_prev && std::abs(lambda - prev_lambda) > 1e-300) {
      const double slope = (g - prev_g) / (lambda - prev_lambda);
      if (std::isfinite(slope) && slope < -0.5) omega = std::max(1.0 / (1.0 - slope), 1e-8);
    }
    const double next = clamp_lambda(lambda + omega * (g - lambda));

    prev_lambda = lambda;
    prev_g = g;
    prev_beta = beta;
    prev_sigma2 = sigma2;
    have_prev = true;

    fit.beta = beta;
    fit.sigma2 = sigma2;
    fit.lambda = next;
    fit.iterations = it;
    fit.lambda_at_bound = std::abs(g_raw) >= clamp;
    lambda = next;

    if (it > 1 && change < opts.tol) {
      fit.converged = true;
      break;
    }
  }
  return fit;
}

}  // namespace

PLFit fit_pl(const SufficientStats& stats, const FitOptions& opts) {
  return fit_iterate(stats, opts, [&](double beta, double lambda) {
    const double sigma2 = update_sigma2(stats, beta, lambda);
    return VarianceStep{sigma2, update_lambda(stats, beta, sigma2)};
  });
}

// Same iteration, but the sigma2 and lambda numerators are summed from the
// residuals e = y - x*beta rather than expanded through the alphas. The two
// agree algebraically; the expanded form loses everything to cancellation
// when the residuals are near zero.
PLFit fit_pl(const PairData& data, const FitOptions& opts) {
  const auto stats = sufficient_stats(data);
  auto residual_step = [&](double beta, double lambda) {
    CompensatedSum sq, cross;
    for (std::size_t k = 0; k < data.q(); ++k) {
      const double ei = data.yi[k] - data.xi[k] * beta;
      const double el = data.yl[k] - data.xl[k] * beta;
      sq.add(ei * ei + el * el);
      cross.add(ei * el);
    }
    const double sigma2 = sigma2_from_numerator(sq.value() - 2.0 * lambda * cross.value(), data.q(), lambda);
    return VarianceStep{sigma2, cross.value() / (static_cast<double>(data.q()) * sigma2)};
  };
  PLFit fit = fit_iterate(stats, opts, residual_step);
  fit.loglik = total_loglik(fit.theta(), data);
  return fit;
}

double FixedPointResiduals::max() const { return std::max({beta, sigma2, lambda}); }

FixedPointResiduals fixed_point_residuals(const SufficientStats& stats, const Theta& t) {
  FixedPointResiduals r;
  r.beta = std::abs(update_beta(stats, t.lambda) - t.beta);
  r.sigma2 = std::abs(update_sigma2(stats, t.beta, t.lambda) - t.sigma2) / t.sigma2;
  r.lambda = std::abs(update_lambda(stats, t.beta, t.sigma2) - t.lambda);
  return r;
}

}  // namespace sgpl
