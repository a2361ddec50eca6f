#pragma once
//===========================================================================//
// Stochastic-volatility log-price simulator with stable or compound-Poisson //
// price jumps, and tail-probability calibration of the jump scale.         //
//                                                                           //
//   dX = sigma dW + theta dY,  sigma = v^{1/2}                              //
//   dv = kappa (eta - v) dt + gamma v^{1/2} dB + dJ,  d<W,B> = rho dt        //
//                                                                           //
// Time is measured in trading days: 1 second = 1/23400.                     //
//===========================================================================//

#include <cmath>
#include <cstdint>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <variant>
#include <vector>

#include "jumpact/levy_models.hpp"
#include "jumpact/random.hpp"

namespace jumpact {

inline constexpr double kSecondsPerDay = 23400.0;

/// Sampling interval in model time for a given number of seconds.
constexpr double seconds(double s) { return s / kSecondsPerDay; }

struct StableJumps {
  double beta = 1.0;
  double theta = 0.0;
};

using PriceJumps = std::variant<std::monostate, StableJumps, CompoundPoissonSpec>;

struct SVModelSpec {
  double kappa = 5.0;
  double eta = 0.0625;
  double gamma_v = 0.5;
  double rho = -0.5;
  double v0 = 0.0625;
  CompoundPoissonSpec var_jumps{1.0, UniformSize{-0.30, 0.30}};
  PriceJumps price_jumps{};
  double x0 = 1.0;

  void validate() const {
    auto finite = [](double x) { return std::isfinite(x); };
    require(finite(kappa) && finite(eta) && finite(gamma_v) && finite(rho) && finite(v0) &&
                finite(x0),
            "SVModelSpec: non-finite parameter");
    require(kappa >= 0.0, "SVModelSpec: kappa must be >= 0");
    require(eta >= 0.0, "SVModelSpec: eta must be >= 0");
    require(gamma_v >= 0.0, "SVModelSpec: gamma_v must be >= 0");
    require(std::abs(rho) <= 1.0, "SVModelSpec: |rho| must be <= 1");
    require(v0 >= 0.0, "SVModelSpec: v0 must be >= 0");
    var_jumps.validate();
    if (const auto* s = std::get_if<StableJumps>(&price_jumps)) {
      StableLaw law(s->beta);
      require(std::isfinite(s->theta) && s->theta >= 0.0, "SVModelSpec: theta must be >= 0");
    } else if (const auto* cp = std::get_if<CompoundPoissonSpec>(&price_jumps)) {
      cp->validate();
    }
  }
};

/// Base model of the Monte Carlo study (no price jumps attached yet).
inline SVModelSpec reference_sv_model() { return SVModelSpec{}; }

struct PathGrid {
  double delta = 0.0;
  std::vector<double> values;                       // X at 0, delta, 2 delta, ...
  std::optional<std::vector<double>> spot_variance; // v at the same points
  std::optional<JumpSeries> jumps;                  // price-jump component
  // Increments as simulated. Differences of `values` lose precision once
  // the level is large (heavy-tailed jumps), so the simulator keeps these.
  std::optional<std::vector<double>> exact_increments;

  std::size_t n_increments() const noexcept {
    return values.empty() ? 0 : values.size() - 1;
  }

  std::vector<double> increments() const {
    if (exact_increments) return *exact_increments;
    std::vector<double> r;
    if (values.size() < 2) return r;
    r.reserve(values.size() - 1);
    for (std::size_t i = 1; i < values.size(); ++i) r.push_back(values[i] - values[i - 1]);
    return r;
  }
};

inline void write_csv(std::ostream& os, const PathGrid& g) {
  const auto old = os.precision(17);
  const bool with_v = g.spot_variance.has_value();
  os << (with_v ? "t,x,v\n" : "t,x\n");
  for (std::size_t i = 0; i < g.values.size(); ++i) {
    os << static_cast<double>(i) * g.delta << ',' << g.values[i];
    if (with_v) os << ',' << (*g.spot_variance)[i];
    os << '\n';
  }
  os.precision(old);
}

struct SimOptions {
  /// Draw stable price jumps as an explicit jump series (above `jump_floor`)
  /// and attach it to the output. Otherwise stable increments are drawn
  /// directly as theta * delta^{1/beta} * Y_1.
  bool exact_jumps = false;
  double jump_floor = 0.0;
  bool store_variance = true;
};

namespace detail {
inline std::size_t grid_steps(double horizon, double delta) {
  require(std::isfinite(horizon) && std::isfinite(delta), "simulate: non-finite grid");
  require(delta > 0.0, "simulate: delta must be > 0");
  require(horizon >= delta * (1.0 - 1e-12), "simulate: delta must not exceed horizon");
  return static_cast<std::size_t>(std::floor(horizon / delta + 1e-9));
}

// Adds each jump to the increment of the grid step containing it, i.e.
// step k covers ((k) delta, (k+1) delta].
inline void bucket_jumps(const JumpSeries& js, double delta, std::vector<double>& per_step) {
  const std::size_t n = per_step.size();
  for (std::size_t j = 0; j < js.size(); ++j) {
    auto k = static_cast<std::size_t>(std::max(0.0, std::ceil(js.times[j] / delta) - 1.0));
    if (k >= n) k = n - 1;
    per_step[k] += js.sizes[j];
  }
}
}  // namespace detail

/// Full-truncation Euler scheme. Randomness is split into independent
/// sub-streams of `seed` (diffusion, price jumps, variance jumps), so
/// switching the price-jump component on or off leaves the Brownian path
/// unchanged.
inline PathGrid simulate_sv_path(const SVModelSpec& spec, double horizon, double delta,
                                 std::uint64_t seed, const SimOptions& opt = {}) {
  spec.validate();
  const std::size_t n = detail::grid_steps(horizon, delta);
  const double t_grid = static_cast<double>(n) * delta;

  Engine rng_w = make_engine(seed, {0});
  Engine rng_y = make_engine(seed, {1});
  Engine rng_j = make_engine(seed, {2});

  std::vector<double> var_jump(n, 0.0);
  detail::bucket_jumps(compound_poisson_series(spec.var_jumps, t_grid, rng_j), delta, var_jump);

  PathGrid out;
  out.delta = delta;

  std::vector<double> price_jump(n, 0.0);
  std::optional<StableLaw> per_step_law;
  double per_step_scale = 0.0;
  if (const auto* s = std::get_if<StableJumps>(&spec.price_jumps)) {
    if (s->theta > 0.0) {
      if (opt.exact_jumps) {
        JumpSeries js = lepage_jump_series(levy_scale_from_theta(s->theta, s->beta), s->beta,
                                           t_grid, opt.jump_floor, rng_y);
        detail::bucket_jumps(js, delta, price_jump);
        out.jumps = std::move(js);
      } else {
        per_step_law.emplace(s->beta);
        per_step_scale = s->theta * std::pow(delta, 1.0 / s->beta);
      }
    }
  } else if (const auto* cp = std::get_if<CompoundPoissonSpec>(&spec.price_jumps)) {
    JumpSeries js = compound_poisson_series(*cp, t_grid, rng_y);
    detail::bucket_jumps(js, delta, price_jump);
    if (opt.exact_jumps) out.jumps = std::move(js);
  }

  const double sq_dt = std::sqrt(delta);
  const double rho_c = std::sqrt(std::max(0.0, 1.0 - spec.rho * spec.rho));
  std::normal_distribution<double> normal(0.0, 1.0);

  out.values.resize(n + 1);
  out.exact_increments.emplace(n);
  if (opt.store_variance) out.spot_variance.emplace(n + 1);
  double x = spec.x0;
  double v = spec.v0;
  out.values[0] = x;
  if (opt.store_variance) (*out.spot_variance)[0] = v;

  for (std::size_t i = 0; i < n; ++i) {
    const double v_plus = std::max(v, 0.0);
    const double vol = std::sqrt(v_plus);
    const double z1 = normal(rng_w);
    const double z2 = normal(rng_w);
    double dx = vol * sq_dt * z1;
    if (per_step_law) dx += per_step_scale * cms_sample(*per_step_law, rng_y);
    dx += price_jump[i];
    (*out.exact_increments)[i] = dx;
    x += dx;
    v += spec.kappa * (spec.eta - v_plus) * delta +
         spec.gamma_v * vol * sq_dt * (spec.rho * z1 + rho_c * z2) + var_jump[i];
    out.values[i + 1] = x;
    if (opt.store_variance) (*out.spot_variance)[i + 1] = v;
  }
  return out;
}

/// Stable scale theta such that one increment theta * delta^{1/beta} Y_1
/// exceeds the cutoff alpha * delta^varpi with probability `target`, using
/// the two-term tail expansion. Solved by bisection around the leading-term
/// inverse.
inline double calibrate_theta(double beta, double alpha, double varpi, double delta,
                              double target) {
  const StableLaw law(beta);
  require(target > 0.0 && target < 1.0, "calibrate_theta: target must lie in (0,1)");
  require(varpi > 0.0 && varpi < 0.5, "calibrate_theta: varpi must lie in (0,1/2)");
  require(alpha > 0.0 && delta > 0.0, "calibrate_theta: alpha and delta must be positive");

  // Standardized cutoff is x = level / theta.
  const double level = alpha * std::pow(delta, varpi - 1.0 / beta);
  if (stable_tail(beta, 1.0) < target)
    throw std::domain_error("calibrate_theta: target tail probability outside the validity "
                            "region of the tail expansion (cutoff/theta < 1)");

  const auto [c, d] = tail_coefficients(beta);
  (void)d;
  const double theta0 = level * std::pow(target * beta / (2.0 * c), 1.0 / beta);
  auto excess = [&](double theta) { return stable_tail(beta, level / theta) - target; };

  double hi = std::min(theta0, level);
  while (excess(hi) < 0.0 && hi < level) hi = std::min(hi * 2.0, level);
  double lo = hi;
  while (excess(lo) > 0.0) lo *= 0.5;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (excess(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

/// Compound-Poisson arrival rate giving P(at least one jump in delta) = target.
inline double calibrate_lambda(double target, double delta) {
  require(target > 0.0 && target < 1.0, "calibrate_lambda: target must lie in (0,1)");
  require(delta > 0.0, "calibrate_lambda: delta must be positive");
  return -std::log1p(-target) / delta;
}

}  // namespace jumpact
