#pragma once
//===========================================================================//
// Small-sample bias corrections for the two-cutoff estimator.              //
//===========================================================================//

#include <Eigen/Dense>

#include <cmath>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <stdexcept>
#include <vector>

#include "jumpact/estimators.hpp"
#include "jumpact/levy_models.hpp"

namespace jumpact {

struct DegenerateDesign : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Scale of the stable component, either as theta (multiplier of the
/// standardized Y) or as the Levy-measure constant A = 2 theta^beta c / beta.
struct StableScale {
  enum class Kind { theta, levy_scale };
  Kind kind = Kind::theta;
  double value = 0.0;

  static StableScale theta(double t) { return {Kind::theta, t}; }
  static StableScale levy(double a) { return {Kind::levy_scale, a}; }

  double theta_pow_beta(double beta) const {
    if (kind == Kind::theta) return std::pow(value, beta);
    return beta * value / (2.0 * tail_coefficients(beta).c_beta);
  }
};

/// Bias terms of the two-cutoff estimator in the stable-plus-diffusion
/// model, evaluated at `beta`:
///   [ beta(beta+1) sigma2/2 (a^-2 - a'^-2) delta^{1-2 varpi}
///     + d theta^beta/(2c) (a^-beta - a'^-beta) delta^{1-varpi beta} ] / log(a'/a)
inline double closed_form_bias(double beta, double sigma2, const StableScale& scale,
                               const EstimatorConfig& cfg) {
  cfg.validate();
  const auto [c, d] = tail_coefficients(beta);
  const double a = cfg.alpha;
  const double ap = cfg.alpha_prime;
  const double diffusion = beta * (beta + 1.0) * sigma2 / 2.0 *
                           (1.0 / (a * a) - 1.0 / (ap * ap)) *
                           std::pow(cfg.delta, 1.0 - 2.0 * cfg.varpi);
  const double tail = d * scale.theta_pow_beta(beta) / (2.0 * c) *
                      (std::pow(a, -beta) - std::pow(ap, -beta)) *
                      std::pow(cfg.delta, 1.0 - cfg.varpi * beta);
  return (diffusion + tail) / cfg.log_ratio();
}

/// First-stage estimate minus its closed-form bias, with the estimate
/// itself plugged into the bias terms.
inline double closed_form_correction(double beta_hat, double sigma2, const StableScale& scale,
                                     const EstimatorConfig& cfg) {
  if (!(beta_hat > 0.0 && beta_hat < 2.0))
    throw std::domain_error("closed_form_correction: estimate must lie in (0,2)");
  return beta_hat - closed_form_bias(beta_hat, sigma2, scale, cfg);
}

/// Feasible A from the lower count: A ~ alpha^beta delta^{varpi beta} U(alpha) / T.
inline double estimate_levy_scale(std::size_t u_low, double beta, const EstimatorConfig& cfg,
                                  double horizon) {
  require(horizon > 0.0, "estimate_levy_scale: horizon must be positive");
  return std::pow(cfg.alpha, beta) * std::pow(cfg.delta, cfg.varpi * beta) *
         static_cast<double>(u_low) / horizon;
}

/// Closed-form correction of a two-cutoff result using only the data:
/// sigma2 is the average spot variance, A is estimated from the counts.
/// Results outside (0,2) are returned unchanged and flagged.
inline EstimateResult closed_form_correction(const EstimateResult& raw, double sigma2,
                                             double horizon) {
  EstimateResult out = raw;
  out.method = Method::closed_form_corrected;
  if (raw.flag_zero_count || !(raw.beta_hat > 0.0 && raw.beta_hat < 2.0)) {
    out.flag_correction_unavailable = true;
    return out;
  }
  const double a = estimate_levy_scale(raw.u_low, raw.beta_hat, raw.config, horizon);
  out.beta_hat = closed_form_correction(raw.beta_hat, sigma2, StableScale::levy(a), raw.config);
  out.flag_ge_two = out.beta_hat >= 2.0;
  return out;
}

//---------------------------------------------------------------------------//
// Regression-based correction                                               //
//---------------------------------------------------------------------------//
struct RegressionFit {
  double a0 = 0.0;
  double a1 = 0.0;
  double a2 = 0.0;
  double rss = 0.0;
  std::size_t n_points = 0;
};

inline void write_csv(std::ostream& os, const RegressionFit& f) {
  const auto old = os.precision(17);
  os << "a0,a1,a2,rss,n_points\n"
     << f.a0 << ',' << f.a1 << ',' << f.a2 << ',' << f.rss << ',' << f.n_points << '\n';
  os.precision(old);
}

/// Unweighted least squares of y on (alpha^-beta, alpha^-(2+beta), alpha^-2beta).
inline RegressionFit fit_bias_regression_points(std::span<const double> alphas,
                                                std::span<const double> y, double beta) {
  require(alphas.size() == y.size(), "fit_bias_regression: size mismatch");
  require(beta > 0.0 && beta <= 2.0, "fit_bias_regression: beta must lie in (0,2]");
  if (std::set<double>(alphas.begin(), alphas.end()).size() < 3)
    throw DegenerateDesign("fit_bias_regression: need at least 3 distinct cutoff levels");
  for (double a : alphas) require(a > 0.0, "fit_bias_regression: cutoffs must be positive");

  const auto n = static_cast<Eigen::Index>(alphas.size());
  Eigen::MatrixXd x(n, 3);
  Eigen::VectorXd rhs(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double a = alphas[static_cast<std::size_t>(i)];
    x(i, 0) = std::pow(a, -beta);
    x(i, 1) = std::pow(a, -(2.0 + beta));
    x(i, 2) = std::pow(a, -2.0 * beta);
    rhs(i) = y[static_cast<std::size_t>(i)];
  }
  // Column scaling keeps the rank decision independent of the cutoff units.
  const Eigen::VectorXd scale = x.colwise().norm().transpose();
  const Eigen::MatrixXd xs = x * scale.cwiseInverse().asDiagonal();
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(xs);
  qr.setThreshold(1e-10);
  if (qr.rank() < 3)
    throw DegenerateDesign("fit_bias_regression: collinear regressors (degenerate design)");
  const Eigen::VectorXd coef = qr.solve(rhs).cwiseQuotient(scale);
  const Eigen::VectorXd resid = rhs - x * coef;

  RegressionFit fit;
  fit.a0 = coef(0);
  fit.a1 = coef(1);
  fit.a2 = coef(2);
  fit.rss = resid.squaredNorm();
  fit.n_points = alphas.size();
  return fit;
}

/// Regression of delta^{varpi beta} U(varpi, alpha) over a grid of cutoff
/// coefficients, with beta fixed at the first-stage estimate.
inline RegressionFit fit_bias_regression(std::span<const double> returns, double delta,
                                         double varpi, std::span<const double> alpha_grid,
                                         double beta_initial) {
  require(varpi > 0.0 && varpi < 0.5, "fit_bias_regression: varpi must lie in (0,1/2)");
  require(beta_initial > 0.0 && beta_initial <= 2.0,
          "fit_bias_regression: beta_initial must lie in (0,2]");
  std::vector<double> y;
  y.reserve(alpha_grid.size());
  const double scale = std::pow(delta, varpi * beta_initial);
  for (double a : alpha_grid) {
    require(a > 0.0, "fit_bias_regression: cutoffs must be positive");
    y.push_back(scale *
                static_cast<double>(count_exceedances(returns, a * std::pow(delta, varpi))));
  }
  return fit_bias_regression_points(alpha_grid, y, beta_initial);
}

/// Bias implied by a regression fit at (alpha, alpha'); nullopt if a0 = 0.
inline std::optional<double> regression_bias(double beta_hat, const RegressionFit& fit,
                                             const EstimatorConfig& cfg) {
  if (fit.a0 == 0.0 || !std::isfinite(fit.a0)) return std::nullopt;
  const double a = cfg.alpha;
  const double ap = cfg.alpha_prime;
  const double term1 = fit.a1 / fit.a0 * (1.0 / (a * a) - 1.0 / (ap * ap));
  const double term2 = fit.a2 / fit.a0 * (std::pow(a, -beta_hat) - std::pow(ap, -beta_hat));
  return (term1 + term2) / cfg.log_ratio();
}

/// Corrected estimate; returns the raw value with the flag set when the
/// fit has a0 = 0.
inline EstimateResult regression_correction(const EstimateResult& raw, const RegressionFit& fit) {
  EstimateResult out = raw;
  out.method = Method::regression_corrected;
  const auto bias = raw.flag_zero_count ? std::nullopt
                                        : regression_bias(raw.beta_hat, fit, raw.config);
  if (!bias) {
    out.flag_correction_unavailable = true;
    return out;
  }
  out.beta_hat = raw.beta_hat - *bias;
  out.flag_ge_two = out.beta_hat >= 2.0;
  return out;
}

inline double regression_correction(double beta_hat, const RegressionFit& fit,
                                    const EstimatorConfig& cfg) {
  const auto bias = regression_bias(beta_hat, fit, cfg);
  return bias ? beta_hat - *bias : beta_hat;
}

inline const std::vector<double>& default_regression_multiples() {
  static const std::vector<double> v{5.0, 6.0, 7.0, 8.0, 9.0, 10.0};
  return v;
}

}  // namespace jumpact
