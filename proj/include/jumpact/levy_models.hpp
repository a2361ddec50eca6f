#pragma once
//===========================================================================//
// Symmetric stable laws and jump-component samplers.                       //
//                                                                           //
// Convention: the standardized stable variable Y_1 has characteristic      //
// function E exp(iuY_1) = exp(-|u|^beta / 2). At beta = 1 this is Cauchy   //
// with scale 1/2; as beta -> 2 it tends to N(0,1).                          //
//===========================================================================//

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "jumpact/random.hpp"

namespace jumpact {

inline void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

//===========================================================================//
// StableLaw                                                                 //
//===========================================================================//
class StableLaw {
 public:
  explicit StableLaw(double beta) : beta_(beta) {
    if (!(beta > 0.0 && beta < 2.0))
      throw std::domain_error("stable index must lie in (0,2)");
  }
  double beta() const noexcept { return beta_; }

 private:
  double beta_;
};

struct TailCoefficients {
  double c_beta;
  double d_beta;
};

/// Coefficients of the large-x expansion of the standardized stable density
///   g(x) = c / x^{beta+1} + d / x^{2 beta+1} + O(x^{-3 beta-1}).
inline TailCoefficients tail_coefficients(double beta) {
  const StableLaw law(beta);
  const double pi = std::numbers::pi;
  const double b = law.beta();
  // sin(pi) is not exactly zero in floating point
  const double s2 = b == 1.0 ? 0.0 : std::sin(pi * b);
  return {std::tgamma(b + 1.0) * std::sin(pi * b / 2.0) / (2.0 * pi),
          -std::tgamma(2.0 * b + 1.0) * s2 / (8.0 * pi)};
}

/// Two-term expansion of P(|Y_1| > x), clamped to [0,1]. Only meaningful
/// for x >= 1; below that the expansion is not a probability.
inline double stable_tail(double beta, double x) {
  if (!(x > 0.0)) throw std::domain_error("stable_tail: x must be positive");
  const auto [c, d] = tail_coefficients(beta);
  const double xb = std::pow(x, beta);
  const double g = 2.0 * c / (beta * xb) + d / (beta * xb * xb);
  return std::clamp(g, 0.0, 1.0);
}

/// Levy-measure tail F([-x,x]^c) = A / x^beta.
inline double levy_tail(double scale_a, double beta, double x) {
  require(scale_a > 0.0, "levy_tail: A must be positive");
  require(x > 0.0, "levy_tail: x must be positive");
  return scale_a / std::pow(x, beta);
}

/// Scale A of the Levy measure of theta * Y, i.e. A = 2 theta^beta c_beta / beta.
inline double levy_scale_from_theta(double theta, double beta) {
  return 2.0 * std::pow(theta, beta) * tail_coefficients(beta).c_beta / beta;
}

inline double theta_from_levy_scale(double scale_a, double beta) {
  return std::pow(beta * scale_a / (2.0 * tail_coefficients(beta).c_beta), 1.0 / beta);
}

/// Exact draw of Y_1 (Chambers-Mallows-Stuck, symmetric case), rescaled
/// from the unit convention exp(-|u|^beta) by 2^{-1/beta}.
inline double cms_sample(const StableLaw& law, Engine& rng) {
  const double pi = std::numbers::pi;
  const double b = law.beta();
  const double v = pi * (uniform_open(rng) - 0.5);
  const double w = -std::log(uniform_open(rng));
  double y;
  if (b == 1.0) {
    y = std::tan(v);
  } else {
    y = std::sin(b * v) / std::pow(std::cos(v), 1.0 / b) *
        std::pow(std::cos((1.0 - b) * v) / w, (1.0 - b) / b);
  }
  return y * std::pow(2.0, -1.0 / b);
}

//===========================================================================//
// Jump series                                                               //
//===========================================================================//
struct JumpSeries {
  double horizon = 0.0;
  std::vector<double> times;  // strictly increasing, in (0, horizon]
  std::vector<double> sizes;  // nonzero, |size| > truncation_floor
  double truncation_floor = 0.0;

  std::size_t size() const noexcept { return times.size(); }
  bool empty() const noexcept { return times.empty(); }

  /// Number of jumps with |size| > level.
  std::size_t count_above(double level) const {
    return static_cast<std::size_t>(std::count_if(
        sizes.begin(), sizes.end(), [level](double s) { return std::abs(s) > level; }));
  }
};

inline void write_csv(std::ostream& os, const JumpSeries& js) {
  const auto old = os.precision(17);
  os << "time,size\n";
  for (std::size_t i = 0; i < js.size(); ++i) os << js.times[i] << ',' << js.sizes[i] << '\n';
  os.precision(old);
}

namespace detail {
// Sorted uniform arrival times on (0, T], with ties (probability ~0) nudged
// so that the sequence is strictly increasing.
inline std::vector<double> arrival_times(std::size_t n, double horizon, Engine& rng) {
  std::vector<double> t(n);
  for (auto& x : t) x = horizon * (1.0 - std::generate_canonical<double, 64>(rng));
  std::sort(t.begin(), t.end());
  for (std::size_t i = 1; i < n; ++i)
    if (!(t[i] > t[i - 1])) t[i] = std::nextafter(t[i - 1], horizon + 1.0);
  return t;
}

inline std::size_t poisson_count(double mean, Engine& rng) {
  if (mean <= 0.0) return 0;
  std::poisson_distribution<long long> pd(mean);
  return static_cast<std::size_t>(pd(rng));
}
}  // namespace detail

/// Jumps of a symmetric stable Levy process with measure tail A/x^beta,
/// restricted to magnitudes above `floor`. These form a marked Poisson
/// process with rate A/floor^beta and Pareto(beta) magnitudes.
inline JumpSeries lepage_jump_series(double scale_a, double beta, double horizon, double floor,
                                     Engine& rng) {
  const StableLaw law(beta);
  require(scale_a > 0.0, "lepage_jump_series: A must be positive");
  require(floor > 0.0, "lepage_jump_series: floor must be positive (full series is infinite)");
  require(horizon >= 0.0, "lepage_jump_series: horizon must be nonnegative");

  JumpSeries js;
  js.horizon = horizon;
  js.truncation_floor = floor;
  const std::size_t n = detail::poisson_count(horizon * scale_a / std::pow(floor, beta), rng);
  js.times = detail::arrival_times(n, horizon, rng);
  js.sizes.resize(n);
  for (auto& s : js.sizes) {
    double mag = floor * std::pow(uniform_open(rng), -1.0 / law.beta());
    if (!(mag > floor)) mag = std::nextafter(floor, 2.0 * floor);
    s = (std::generate_canonical<double, 64>(rng) < 0.5) ? -mag : mag;
  }
  return js;
}

//===========================================================================//
// Compound Poisson                                                          //
//===========================================================================//
struct FixedSize {
  double size;
};
struct UniformSize {
  double lo;
  double hi;
};
using SizeLaw = std::variant<FixedSize, UniformSize>;

struct CompoundPoissonSpec {
  double lambda = 0.0;
  SizeLaw size_law = FixedSize{0.0};

  void validate() const {
    require(lambda >= 0.0 && std::isfinite(lambda), "compound Poisson: lambda must be >= 0");
    if (const auto* u = std::get_if<UniformSize>(&size_law))
      require(u->lo < u->hi, "compound Poisson: uniform law needs lo < hi");
  }
};

inline JumpSeries compound_poisson_series(const CompoundPoissonSpec& spec, double horizon,
                                          Engine& rng) {
  spec.validate();
  require(horizon >= 0.0, "compound_poisson_series: horizon must be nonnegative");
  JumpSeries js;
  js.horizon = horizon;
  const std::size_t n = detail::poisson_count(spec.lambda * horizon, rng);
  js.times = detail::arrival_times(n, horizon, rng);
  js.sizes.resize(n);
  for (auto& s : js.sizes) {
    if (const auto* f = std::get_if<FixedSize>(&spec.size_law)) {
      s = f->size;
    } else {
      const auto& u = std::get<UniformSize>(spec.size_law);
      s = u.lo + (u.hi - u.lo) * std::generate_canonical<double, 64>(rng);
    }
  }
  return js;
}

}  // namespace jumpact
