#pragma once
//===========================================================================//
// Jump activity estimators built on counts of large increments.            //
//                                                                           //
//   U(alpha) = #{ i : |dX_i| > alpha * delta^varpi }                        //
//   two cutoffs: beta = log(U(alpha)/U(alpha')) / log(alpha'/alpha)         //
//   two scales:  beta = log(U_delta(alpha)/U_2delta(alpha)) / (varpi log 2) //
//===========================================================================//

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <numeric>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "jumpact/levy_models.hpp"

namespace jumpact {

struct EstimatorConfig {
  double varpi = 0.2;
  double alpha = 1.0;
  double alpha_prime = 2.0;
  double delta = 1.0;

  double cutoff() const { return alpha * std::pow(delta, varpi); }
  double cutoff_prime() const { return alpha_prime * std::pow(delta, varpi); }
  double log_ratio() const { return std::log(alpha_prime / alpha); }

  void validate() const {
    require(varpi > 0.0 && varpi < 0.5, "EstimatorConfig: varpi must lie in (0,1/2)");
    require(alpha > 0.0 && alpha < alpha_prime,
            "EstimatorConfig: need 0 < alpha < alpha_prime");
    require(delta > 0.0 && std::isfinite(delta), "EstimatorConfig: delta must be positive");
  }
};

enum class Method {
  two_cutoffs,
  two_scales,
  oracle,
  average,
  closed_form_corrected,
  regression_corrected,
};

inline const char* to_string(Method m) {
  switch (m) {
    case Method::two_cutoffs: return "two_cutoffs";
    case Method::two_scales: return "two_scales";
    case Method::oracle: return "oracle";
    case Method::average: return "average";
    case Method::closed_form_corrected: return "closed_form_corrected";
    case Method::regression_corrected: return "regression_corrected";
  }
  return "unknown";
}

struct EstimateResult {
  Method method = Method::two_cutoffs;
  EstimatorConfig config;
  double beta_hat = 0.0;
  // Count-based standard error for single estimates; for Method::average it
  // is the cross-grid standard deviation of the averaged estimates.
  std::optional<double> std_error;
  std::size_t u_low = 0;
  std::size_t u_high = 0;
  bool flag_zero_count = false;
  bool flag_ge_two = false;
  bool flag_correction_unavailable = false;
  std::size_t n_averaged = 1;

  /// (beta_hat - beta) / std_error, when the standard error is defined.
  std::optional<double> standardized(double beta) const {
    if (!std_error || !(*std_error > 0.0)) return std::nullopt;
    return (beta_hat - beta) / *std_error;
  }

  std::string flags() const {
    std::string f;
    auto add = [&f](const char* s) {
      if (!f.empty()) f += '|';
      f += s;
    };
    if (flag_zero_count) add("zero_count");
    if (flag_ge_two) add("ge_two");
    if (flag_correction_unavailable) add("correction_unavailable");
    return f;
  }
};

inline void write_csv_header(std::ostream& os) {
  os << "method,varpi,alpha,alpha_prime,delta,u_low,u_high,beta_hat,std_error,flags\n";
}

inline void write_csv_row(std::ostream& os, const EstimateResult& r) {
  const auto old = os.precision(17);
  os << to_string(r.method) << ',' << r.config.varpi << ',' << r.config.alpha << ','
     << r.config.alpha_prime << ',' << r.config.delta << ',' << r.u_low << ',' << r.u_high << ','
     << r.beta_hat << ',';
  if (r.std_error) os << *r.std_error;
  os << ',' << r.flags() << '\n';
  os.precision(old);
}

//---------------------------------------------------------------------------//
// Counting                                                                  //
//---------------------------------------------------------------------------//
inline std::size_t count_exceedances(std::span<const double> returns, double cutoff) {
  require(cutoff > 0.0, "count_exceedances: cutoff must be positive");
  return static_cast<std::size_t>(std::count_if(
      returns.begin(), returns.end(), [cutoff](double r) { return std::abs(r) > cutoff; }));
}

namespace detail {
// Shared log-ratio estimator with the zero-count convention.
inline EstimateResult ratio_estimate(Method method, const EstimatorConfig& cfg, std::size_t u_low,
                                     std::size_t u_high, double scale) {
  EstimateResult r;
  r.method = method;
  r.config = cfg;
  r.u_low = u_low;
  r.u_high = u_high;
  if (u_low == 0 || u_high == 0) {
    r.flag_zero_count = true;
    return r;
  }
  const double ul = static_cast<double>(u_low);
  const double uh = static_cast<double>(u_high);
  r.beta_hat = std::log(ul / uh) / scale;
  const double var = 1.0 / uh - 1.0 / ul;
  r.std_error = std::sqrt(std::max(var, 0.0)) / std::abs(scale);
  r.flag_ge_two = r.beta_hat >= 2.0;
  return r;
}
}  // namespace detail

/// Two-cutoff estimator with the count-based standard error
/// sqrt(1/U(alpha') - 1/U(alpha)) / log(alpha'/alpha).
inline EstimateResult beta_hat_two_cutoffs(std::span<const double> returns,
                                           const EstimatorConfig& cfg) {
  cfg.validate();
  return detail::ratio_estimate(Method::two_cutoffs, cfg,
                                count_exceedances(returns, cfg.cutoff()),
                                count_exceedances(returns, cfg.cutoff_prime()), cfg.log_ratio());
}

/// Same estimator from precomputed counts.
inline EstimateResult beta_hat_from_counts(std::size_t u_low, std::size_t u_high,
                                           const EstimatorConfig& cfg) {
  cfg.validate();
  return detail::ratio_estimate(Method::two_cutoffs, cfg, u_low, u_high, cfg.log_ratio());
}

/// Increments at twice the sampling interval: sums of adjacent pairs
/// starting at `phase` (0 or 1).
inline std::vector<double> aggregate_pairs(std::span<const double> returns, std::size_t phase = 0) {
  require(phase <= 1, "aggregate_pairs: phase must be 0 or 1");
  std::vector<double> out;
  if (returns.size() < phase + 2) return out;
  out.reserve((returns.size() - phase) / 2);
  for (std::size_t i = phase; i + 1 < returns.size(); i += 2)
    out.push_back(returns[i] + returns[i + 1]);
  return out;
}

/// Two-scale estimator. Only `varpi`, `alpha` and `delta` of the config are
/// used; the coarse count uses the cutoff alpha (2 delta)^varpi.
inline EstimateResult beta_hat_two_scales(std::span<const double> returns,
                                          const EstimatorConfig& cfg, std::size_t phase = 0) {
  require(cfg.varpi > 0.0 && cfg.varpi < 0.5, "two_scales: varpi must lie in (0,1/2)");
  require(cfg.alpha > 0.0 && cfg.delta > 0.0, "two_scales: alpha and delta must be positive");
  require(returns.size() >= 2, "two_scales: need at least two increments");
  const auto coarse = aggregate_pairs(returns, phase);
  const std::size_t u_fine = count_exceedances(returns, cfg.cutoff());
  const std::size_t u_coarse =
      count_exceedances(coarse, cfg.alpha * std::pow(2.0 * cfg.delta, cfg.varpi));
  return detail::ratio_estimate(Method::two_scales, cfg, u_fine, u_coarse,
                                cfg.varpi * std::log(2.0));
}

/// Sum of squared increments not exceeding alpha * delta^varpi; estimates
/// the integrated diffusive variance over the sample.
inline double truncated_variance(std::span<const double> returns, double delta, double varpi,
                                 double alpha) {
  require(varpi > 0.0 && varpi < 0.5, "truncated_variance: varpi must lie in (0,1/2)");
  require(alpha > 0.0 && delta > 0.0, "truncated_variance: alpha and delta must be positive");
  const double cut = alpha * std::pow(delta, varpi);
  double s = 0.0;
  for (double r : returns)
    if (std::abs(r) <= cut) s += r * r;
  return s;
}

//---------------------------------------------------------------------------//
// Data-driven cutoffs                                                       //
//---------------------------------------------------------------------------//
struct CutoffSelection {
  double sigma_hat = 0.0;  // per unit time
  std::vector<EstimatorConfig> configs;
  std::optional<std::string> diagnostic;
};

inline constexpr double kPreliminarySdMultiple = 3.0;

/// E[Z^2 1{|Z| <= 3}] for standard normal Z.
inline constexpr double kTruncatedSecondMoment3 = 0.9707091134651118;

/// Median realized variance: squared medians of adjacent triples, scaled to
/// be unbiased for Gaussian increments. Insensitive to isolated jumps of
/// any size. Falls back to realized variance below three increments.
inline double median_realized_variance(std::span<const double> r) {
  const std::size_t n = r.size();
  double s = 0.0;
  if (n < 3) {
    for (double x : r) s += x * x;
    return s;
  }
  for (std::size_t i = 1; i + 1 < n; ++i) {
    double a = std::abs(r[i - 1]), b = std::abs(r[i]), c = std::abs(r[i + 1]);
    const double med = std::max(std::min(a, b), std::min(std::max(a, b), c));
    s += med * med;
  }
  const double pi = std::numbers::pi;
  return pi / (6.0 - 4.0 * std::sqrt(3.0) + pi) * static_cast<double>(n) /
         static_cast<double>(n - 2) * s;
}

inline constexpr int kMaxTruncationPasses = 2000;
inline constexpr std::size_t kVolBlock = 390;

namespace detail {
// Sum of squared diffusive increments in one block. Starts from the median
// realized variance and repeats truncation at 3 sd of the current estimate
// (rescaled to be unbiased for Gaussian increments) until it stops moving.
// Adjacent large jumps can inflate the start; the passes then decrease
// monotonically to the diffusive level.
inline double block_diffusive_variance(std::span<const double> block) {
  if (block.empty()) return 0.0;
  const double n = static_cast<double>(block.size());
  double sd = std::sqrt(median_realized_variance(block) / n);
  for (int pass = 0; pass < kMaxTruncationPasses && sd > 0.0; ++pass) {
    const double cut = kPreliminarySdMultiple * sd;
    double s = 0.0;
    for (double r : block)
      if (std::abs(r) <= cut) s += r * r;
    const double next = std::sqrt(s / n / kTruncatedSecondMoment3);
    const bool done = std::abs(next - sd) <= 1e-12 * sd;
    sd = next;
    if (done) break;
  }
  return sd * sd * n;
}
}  // namespace detail

/// Volatility of the continuous part (per unit time) from small increments.
/// Blocks of kVolBlock increments are truncated separately, so stretches of
/// near-zero volatility neither drag down nor inflate the cutoff used on
/// active stretches. `varpi` is validated for interface symmetry; the
/// truncation is in sd units.
inline double estimate_continuous_vol(std::span<const double> returns, double delta,
                                      double varpi) {
  require(delta > 0.0, "estimate_continuous_vol: delta must be positive");
  require(varpi > 0.0 && varpi < 0.5, "estimate_continuous_vol: varpi must lie in (0,1/2)");
  if (returns.empty()) return 0.0;
  const std::size_t n = returns.size();
  // a short tail is merged into the previous block
  const std::size_t n_blocks = std::max<std::size_t>(1, n / kVolBlock);
  double total = 0.0;
  for (std::size_t b = 0; b < n_blocks; ++b) {
    const std::size_t lo = b * kVolBlock;
    const std::size_t hi = b + 1 == n_blocks ? n : lo + kVolBlock;
    total += detail::block_diffusive_variance(returns.subspan(lo, hi - lo));
  }
  return std::sqrt(total / (static_cast<double>(n) * delta));
}

/// Cutoff coefficient placing the cutoff at `multiple` continuous sd's.
inline double alpha_for_sd_multiple(double multiple, double sigma_hat, double delta,
                                    double varpi) {
  return multiple * sigma_hat * std::pow(delta, 0.5 - varpi);
}

inline CutoffSelection select_cutoffs(std::span<const double> returns, double delta, double varpi,
                                      std::span<const double> sd_multiples,
                                      std::span<const double> ratios) {
  require(varpi > 0.0 && varpi < 0.5, "select_cutoffs: varpi must lie in (0,1/2)");
  for (double m : sd_multiples) require(m > 0.0, "select_cutoffs: sd multiples must be > 0");
  for (double r : ratios) require(r > 1.0, "select_cutoffs: ratios must be > 1");

  CutoffSelection sel;
  sel.sigma_hat = estimate_continuous_vol(returns, delta, varpi);
  if (!(sel.sigma_hat > 0.0)) {
    sel.diagnostic = "continuous volatility estimate is zero; no cutoffs selected";
    return sel;
  }
  for (double m : sd_multiples) {
    const double alpha = alpha_for_sd_multiple(m, sel.sigma_hat, delta, varpi);
    for (double r : ratios) sel.configs.push_back({varpi, alpha, r * alpha, delta});
  }
  return sel;
}

inline const std::vector<double>& default_avg_multiples() {
  static const std::vector<double> v{7.0, 8.0, 9.0};
  return v;
}
inline const std::vector<double>& default_avg_ratios() {
  static const std::vector<double> v{1.5, 2.0, 2.5, 3.0, 3.5, 4.0};
  return v;
}

/// Mean of the estimates over a cutoff grid, skipping zero-count entries.
/// The reported standard error is the cross-grid standard deviation.
inline EstimateResult avg_estimator(std::span<const EstimateResult> results) {
  require(!results.empty(), "avg_estimator: empty input");
  EstimateResult out;
  out.method = Method::average;
  out.config = results.front().config;
  out.n_averaged = 0;
  double sum = 0.0;
  for (const auto& r : results) {
    if (r.flag_zero_count) continue;
    sum += r.beta_hat;
    out.u_low += r.u_low;
    out.u_high += r.u_high;
    ++out.n_averaged;
  }
  if (out.n_averaged == 0) {
    out.flag_zero_count = true;
    return out;
  }
  const double k = static_cast<double>(out.n_averaged);
  out.beta_hat = sum / k;
  if (out.n_averaged >= 2) {
    double ss = 0.0;
    for (const auto& r : results)
      if (!r.flag_zero_count) ss += (r.beta_hat - out.beta_hat) * (r.beta_hat - out.beta_hat);
    out.std_error = std::sqrt(ss / (k - 1.0));
  }
  out.flag_ge_two = out.beta_hat >= 2.0;
  return out;
}

//---------------------------------------------------------------------------//
// Oracle estimator on the true jumps                                        //
//---------------------------------------------------------------------------//
inline EstimateResult beta_bar_oracle(const JumpSeries& jumps, const EstimatorConfig& cfg) {
  cfg.validate();
  if (!(cfg.cutoff() > jumps.truncation_floor))
    throw std::invalid_argument(
        "beta_bar_oracle: cutoff below the jump-series truncation floor");
  return detail::ratio_estimate(Method::oracle, cfg, jumps.count_above(cfg.cutoff()),
                                jumps.count_above(cfg.cutoff_prime()), cfg.log_ratio());
}

//---------------------------------------------------------------------------//
// Asymptotics                                                               //
//---------------------------------------------------------------------------//
struct EstimandContext {
  double a_bar_t = 0.0;  // integrated activity scale over the window
  std::optional<double> beta_true;
};

/// Variance of the delta^{-varpi beta / 2}-normalized estimation error.
inline double asymptotic_variance(double beta, double alpha, double alpha_prime,
                                  const EstimandContext& ctx) {
  require(ctx.a_bar_t > 0.0, "asymptotic_variance: a_bar_t must be positive");
  require(alpha > 0.0 && alpha_prime > alpha, "asymptotic_variance: need 0 < alpha < alpha'");
  const double lr = std::log(alpha_prime / alpha);
  return (std::pow(alpha_prime, beta) - std::pow(alpha, beta)) / (ctx.a_bar_t * lr * lr);
}

}  // namespace jumpact
