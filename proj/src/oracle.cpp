#include "sgpl/oracle.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "sgpl/error.hpp"

namespace sgpl {

DesignMatrix DesignMatrix::with_intercept(std::span<const double> x) {
  DesignMatrix m;
  m.n = x.size();
  m.p = 2;
  m.data.assign(m.n, 1.0);
  m.data.insert(m.data.end(), x.begin(), x.end());
  return m;
}

namespace {

// v - lambda * W v
Eigen::VectorXd apply_a(const WeightsMatrix& w, double lambda, const double* v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(w.n));
  const double wt = w.weight();
  for (std::size_t i = 0; i < w.n; ++i) {
    double s = 0.0;
    for (std::size_t j : w.row(i)) s += v[j];
    out(static_cast<Eigen::Index>(i)) = v[i] - lambda * wt * s;
  }
  return out;
}

double log_abs_det_a(const WeightsMatrix& w, double lambda) {
  const auto n = static_cast<Eigen::Index>(w.n);
  Eigen::MatrixXd a = Eigen::MatrixXd::Identity(n, n);
  const double off = lambda * w.weight();
  for (std::size_t i = 0; i < w.n; ++i) {
    for (std::size_t j : w.row(i)) {
      a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) -= off;
    }
  }
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);
  const auto& m = lu.matrixLU();
  double s = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) s += std::log(std::abs(m(i, i)));
  return s;
}

}  // namespace

SemProfile sem_profile_loglik(double lambda, const WeightsMatrix& w, const DesignMatrix& x,
                              std::span<const double> y) {
  const std::size_t n = w.n;
  if (n > kMaxDenseN) {
    throw InputError("dense ML is capped at N = " + std::to_string(kMaxDenseN) +
                     "; use SG-PL for larger data");
  }
  if (x.n != n || y.size() != n) throw InputError("sem profile: dimension mismatch");
  if (x.p == 0 || x.p >= n) throw InputError("sem profile: need 1 <= p < N");
  if (!(std::abs(lambda) < 1.0)) throw std::domain_error("sem profile: |lambda| must be < 1");

  const auto nn = static_cast<Eigen::Index>(n);
  const auto pp = static_cast<Eigen::Index>(x.p);
  Eigen::MatrixXd ax(nn, pp);
  for (std::size_t j = 0; j < x.p; ++j) {
    ax.col(static_cast<Eigen::Index>(j)) = apply_a(w, lambda, x.data.data() + j * n);
  }
  const Eigen::VectorXd ay = apply_a(w, lambda, y.data());

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(ax);
  if (qr.rank() < pp) throw NumericalError("sem profile: singular transformed design");
  const Eigen::VectorXd beta = qr.solve(ay);
  const Eigen::VectorXd resid = ay - ax * beta;

  SemProfile out;
  out.sigma2 = resid.squaredNorm() / static_cast<double>(n);
  const double scale = ay.squaredNorm() / static_cast<double>(n);
  if (!(out.sigma2 > 1e-20 * scale) || !(out.sigma2 > std::numeric_limits<double>::min())) {
    throw NumericalError("degenerate residual variance");
  }
  out.beta.assign(beta.data(), beta.data() + beta.size());
  out.log_det = log_abs_det_a(w, lambda);
  const double nd = static_cast<double>(n);
  out.loglik = -0.5 * nd * std::log(2.0 * std::numbers::pi * out.sigma2) + out.log_det - 0.5 * nd;
  return out;
}

double golden_section_max(const std::function<double(double)>& f, double a, double b, double tol,
                          int* n_evals) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double best_x = a, best_f = -std::numeric_limits<double>::infinity();
  auto eval = [&](double t) {
    const double v = f(t);
    if (n_evals) ++*n_evals;
    if (v > best_f) {
      best_f = v;
      best_x = t;
    }
    return v;
  };
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = eval(c), fd = eval(d);
  while (b - a > tol) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = eval(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = eval(d);
    }
  }
  return best_x;
}

MLFit fit_ml_sem(const WeightsMatrix& w, const DesignMatrix& x, std::span<const double> y) {
  if (w.n > kMaxDenseN) {
    throw InputError("dense ML is capped at N = " + std::to_string(kMaxDenseN) +
                     "; use SG-PL for larger data");
  }
  MLFit fit;
  auto profile = [&](double lam) {
    ++fit.n_evals;
    return sem_profile_loglik(lam, w, x, y);
  };

  constexpr int kScan = 21;
  std::vector<double> grid(kScan), ll(kScan);
  for (int j = 0; j < kScan; ++j) {
    grid[j] = -0.99 + 1.98 * j / (kScan - 1);
    ll[j] = profile(grid[j]).loglik;
  }
  const auto best = static_cast<int>(std::max_element(ll.begin(), ll.end()) - ll.begin());

  std::vector<double> peaks;
  for (int j = 0; j < kScan; ++j) {
    const bool left_ok = j == 0 || ll[j] > ll[j - 1];
    const bool right_ok = j == kScan - 1 || ll[j] > ll[j + 1];
    if (left_ok && right_ok) peaks.push_back(ll[j]);
  }
  if (peaks.size() > 1) {
    const auto [lo, hi] = std::minmax_element(peaks.begin(), peaks.end());
    if (*hi - *lo > 1e-6) {
      fit.warning = "profile likelihood pre-scan found " + std::to_string(peaks.size()) +
                    " local maxima; result may not be the global maximum";
    }
  }

  constexpr double kEdge = 0.999;
  const double a = best == 0 ? -kEdge : grid[best - 1];
  const double b = best == kScan - 1 ? kEdge : grid[best + 1];
  const double best_ll = ll[best];
  double best_lambda = grid[best];
  const double lam = golden_section_max([&](double t) { return profile(t).loglik; }, a, b, 1e-6);

  SemProfile at = profile(lam);
  if (at.loglik < best_ll) {
    at = profile(best_lambda);  // the scan point beat the line search
  } else {
    best_lambda = lam;
  }

  fit.lambda_ml = best_lambda;
  fit.beta = at.beta;
  fit.beta0 = at.beta.empty() ? 0.0 : at.beta[0];
  fit.beta1 = at.beta.size() > 1 ? at.beta[1] : 0.0;
  fit.sigma2_ml = at.sigma2;
  fit.loglik = at.loglik;
  return fit;
}

namespace {

struct PlProfile {
  double loglik;
  double sigma2;
};

PlProfile pl_profile(const PairData& d, double beta, double lambda) {
  const std::size_t q = d.q();
  long double quad = 0.0L;
  for (std::size_t k = 0; k < q; ++k) {
    const double ei = d.yi[k] - d.xi[k] * beta;
    const double el = d.yl[k] - d.xl[k] * beta;
    quad += static_cast<long double>(ei * ei - 2.0 * lambda * ei * el + el * el);
  }
  const double qd = static_cast<double>(q);
  const double one_m_l2 = 1.0 - lambda * lambda;
  const double sigma2 = static_cast<double>(quad) / (2.0 * qd * one_m_l2);
  if (!(sigma2 > 0.0)) return {-std::numeric_limits<double>::infinity(), sigma2};
  const double ll = -qd * std::log(2.0 * std::numbers::pi) - qd * std::log(sigma2) -
                    0.5 * qd * std::log(one_m_l2) - qd;
  return {ll, sigma2};
}

}  // namespace

Theta maximize_pl_brute(const PairData& data) {
  data.validate();
  if (data.q() < 2) throw InputError("maximize_pl_brute: need at least 2 pairs");

  long double sxx = 0.0L, sxy = 0.0L;
  for (std::size_t k = 0; k < data.q(); ++k) {
    sxx += data.xi[k] * data.xi[k] + data.xl[k] * data.xl[k];
    sxy += data.xi[k] * data.yi[k] + data.xl[k] * data.yl[k];
  }
  if (!(sxx > 0.0L)) throw NumericalError("degenerate regressor configuration");
  const double b_ols = static_cast<double>(sxy / sxx);
  const double s_ols = pl_profile(data, b_ols, 0.0).sigma2;
  const double se = std::sqrt(std::max(s_ols, 1e-300) / static_cast<double>(sxx));

  constexpr double kLamMax = 0.99999;
  constexpr int kGrid = 41;
  const double b_half = 12.0 * se + 1e-12 * (1.0 + std::abs(b_ols));
  double beta = b_ols, lambda = 0.0;
  double best = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < kGrid; ++i) {
    const double bb = b_ols - b_half + 2.0 * b_half * i / (kGrid - 1);
    for (int j = 0; j < kGrid; ++j) {
      const double ll = -0.975 + 1.95 * j / (kGrid - 1);
      const double v = pl_profile(data, bb, ll).loglik;
      if (v > best) {
        best = v;
        beta = bb;
        lambda = ll;
      }
    }
  }

  double wb = 2.0 * b_half / (kGrid - 1);
  double wl = 1.95 / (kGrid - 1);
  const double b_floor = 1e-6 * se + 1e-15 * std::abs(b_ols);
  for (int sweep = 0; sweep < 2000; ++sweep) {
    const double lo_b = beta - wb, hi_b = beta + wb;
    const double nb = golden_section_max([&](double t) { return pl_profile(data, t, lambda).loglik; },
                                         lo_b, hi_b, 1e-4 * b_floor);
    const double lo_l = std::max(lambda - wl, -kLamMax), hi_l = std::min(lambda + wl, kLamMax);
    const double nl = golden_section_max([&](double t) { return pl_profile(data, nb, t).loglik; },
                                         lo_l, hi_l, 1e-12);
    const double db = std::abs(nb - beta), dl = std::abs(nl - lambda);
    const bool b_edge = nb - lo_b < 0.02 * wb || hi_b - nb < 0.02 * wb;
    const bool l_edge = (nl - lo_l < 0.02 * wl && lo_l > -kLamMax) || (hi_l - nl < 0.02 * wl && hi_l < kLamMax);
    beta = nb;
    lambda = nl;
    if (b_edge || l_edge) {
      wb *= b_edge ? 4.0 : 1.0;
      wl = std::min(wl * (l_edge ? 4.0 : 1.0), 1.0);
      continue;
    }
    wb = std::max(4.0 * db, b_floor);
    wl = std::max(4.0 * dl, 1e-7);
    if (sweep > 2 && db <= 1e-3 * b_floor && dl <= 1e-10) break;
  }
  return {beta, pl_profile(data, beta, lambda).sigma2, lambda};
}

}  // namespace sgpl
