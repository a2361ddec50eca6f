#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

#include "jumpact/levy_models.hpp"

using namespace jumpact;

namespace {
constexpr double kPi = std::numbers::pi;

// Exact tail of the beta = 1 law (Cauchy, scale 1/2).
double cauchy_tail(double x) { return 1.0 - 2.0 / kPi * std::atan(2.0 * x); }

std::vector<double> draws(double beta, std::size_t n, std::uint64_t seed) {
  Engine rng = make_engine(seed);
  StableLaw law(beta);
  std::vector<double> v(n);
  for (auto& y : v) y = cms_sample(law, rng);
  return v;
}

double frac_above(const std::vector<double>& v, double x) {
  return static_cast<double>(std::count_if(v.begin(), v.end(),
                                           [x](double y) { return std::abs(y) > x; })) /
         static_cast<double>(v.size());
}
}  // namespace

TEST(TailCoefficients, CauchyCase) {
  const auto tc = tail_coefficients(1.0);
  EXPECT_NEAR(tc.c_beta, 1.0 / (2.0 * kPi), 1e-15);
  EXPECT_NEAR(tc.d_beta, 0.0, 1e-15);
}

TEST(TailCoefficients, BetaOnePointFive) {
  // Gamma(2.5) sin(3 pi/4) / (2 pi), 30-digit reference.
  EXPECT_NEAR(tail_coefficients(1.5).c_beta, 0.149603355150537254227, 1e-15);
  // -Gamma(4) sin(3 pi/2) / (8 pi) = 6 / (8 pi)
  EXPECT_NEAR(tail_coefficients(1.5).d_beta, 6.0 / (8.0 * kPi), 1e-15);
}

TEST(TailCoefficients, Signs) {
  for (double b = 0.05; b < 2.0; b += 0.05) {
    const auto tc = tail_coefficients(b);
    EXPECT_GT(tc.c_beta, 0.0) << b;
    if (b < 0.999) {
      EXPECT_LT(tc.d_beta, 0.0) << b;
    } else if (b > 1.001) {
      EXPECT_GT(tc.d_beta, 0.0) << b;
    }
  }
}

TEST(TailCoefficients, DomainErrors) {
  EXPECT_THROW(tail_coefficients(0.0), std::domain_error);
  EXPECT_THROW(tail_coefficients(2.0), std::domain_error);
  EXPECT_THROW(tail_coefficients(-1.0), std::domain_error);
}

TEST(Gamma, TwelveDigitsOnBetaGrid) {
  // Gamma(beta+1) and Gamma(2 beta+1) for beta = 0.25..1.75, mpmath at 30 digits.
  struct Ref {
    double beta, g1, g2;
  };
  const Ref refs[] = {
      {0.25, 0.906402477055477077983, 0.886226925452758013649},
      {0.50, 0.886226925452758013649, 1.0},
      {0.75, 0.919062526848883233847, 1.32934038817913702047},
      {1.00, 1.0, 2.0},
      {1.25, 1.13300309631934634748, 3.32335097044784255118},
      {1.50, 1.32934038817913702047, 6.0},
      {1.75, 1.60835942198554565923, 11.6317283965674489291},
  };
  for (const auto& r : refs) {
    EXPECT_NEAR(std::tgamma(r.beta + 1.0) / r.g1, 1.0, 1e-12) << r.beta;
    EXPECT_NEAR(std::tgamma(2.0 * r.beta + 1.0) / r.g2, 1.0, 1e-12) << r.beta;
  }
}

TEST(StableTail, AgreesWithQuadratureAtTen) {
  // P(|Y_1| > 10), beta = 1.5, by oscillatory quadrature of the
  // characteristic function (mpmath quadosc).
  const double oracle = 0.00647042832450955149;
  const double leading = 2.0 * tail_coefficients(1.5).c_beta / (1.5 * std::pow(10.0, 1.5));
  EXPECT_NEAR(leading, 0.006308, 5e-7);
  EXPECT_NEAR(stable_tail(1.5, 10.0) / oracle, 1.0, 1e-3);
  EXPECT_GT(stable_tail(1.5, 10.0), leading);
}

TEST(StableTail, CauchyLargeX) {
  for (double x : {5.0, 20.0, 100.0})
    EXPECT_NEAR(stable_tail(1.0, x) / cauchy_tail(x), 1.0, 1.0 / (x * x)) << x;
}

TEST(StableTail, LimitsAndClamp) {
  EXPECT_LT(stable_tail(0.75, 1e12), 1e-8);
  EXPECT_LE(stable_tail(0.25, 1e-6), 1.0);
  EXPECT_GE(stable_tail(1.9, 1e-6), 0.0);
  EXPECT_THROW(stable_tail(1.0, 0.0), std::domain_error);
  EXPECT_THROW(stable_tail(1.0, -1.0), std::domain_error);
}

TEST(LevyTail, Examples) {
  EXPECT_DOUBLE_EQ(levy_tail(1.0, 1.0, 1.0), 1.0);
  EXPECT_DOUBLE_EQ(levy_tail(2.0, 0.5, 4.0), 1.0);
  EXPECT_NEAR(levy_scale_from_theta(1.0, 1.5), 0.199471140200716338970, 1e-15);
  EXPECT_THROW(levy_tail(0.0, 1.0, 1.0), std::invalid_argument);
  EXPECT_THROW(levy_tail(1.0, 1.0, 0.0), std::invalid_argument);
}

TEST(LevyTail, BridgesToStableLeadingTerm) {
  for (double theta : {0.01, 0.5, 3.0})
    for (double beta : {0.3, 1.0, 1.7})
      for (double x : {0.1, 2.0, 50.0}) {
        const double c = tail_coefficients(beta).c_beta;
        const double lhs = levy_tail(levy_scale_from_theta(theta, beta), beta, x);
        const double rhs = 2.0 * c * std::pow(theta, beta) / (beta * std::pow(x, beta));
        EXPECT_NEAR(lhs / rhs, 1.0, 1e-14);
        EXPECT_NEAR(theta_from_levy_scale(levy_scale_from_theta(theta, beta), beta) / theta, 1.0,
                    1e-13);
      }
}

TEST(CmsSample, CauchyExceedanceAtHalf) {
  const std::size_t n = 1'000'000;
  const auto v = draws(1.0, n, 11);
  const double se = std::sqrt(0.25 / static_cast<double>(n));
  EXPECT_NEAR(frac_above(v, 0.5), 0.5, 3.0 * se);
}

TEST(CmsSample, CauchyCdfAtFiveQuantiles) {
  const std::size_t n = 1'000'000;
  const auto v = draws(1.0, n, 12);
  for (double q : {-2.0, -0.3, 0.1, 0.7, 4.0}) {
    const double p = 0.5 + std::atan(2.0 * q) / kPi;
    const double emp = static_cast<double>(std::count_if(v.begin(), v.end(),
                                                         [q](double y) { return y <= q; })) /
                       static_cast<double>(n);
    EXPECT_NEAR(emp, p, 3.0 * std::sqrt(p * (1.0 - p) / static_cast<double>(n))) << q;
  }
}

TEST(CmsSample, NearGaussianLimit) {
  // The variance is infinite for every beta < 2, so the check is on the
  // body of the law: P(|Y|>1) and P(|Y|>2) against N(0,1).
  const std::size_t n = 400'000;
  const auto v = draws(1.999, n, 13);
  for (auto [x, p] : {std::pair{1.0, 0.31731050786291410}, std::pair{2.0, 0.04550026389635842}}) {
    const double se = std::sqrt(p * (1.0 - p) / static_cast<double>(n));
    EXPECT_NEAR(frac_above(v, x), p, 4.0 * se + 2e-3) << x;
  }
}

TEST(CmsSample, SymmetricMedian) {
  for (double beta : {0.3, 0.8, 1.0, 1.5, 1.9}) {
    auto v = draws(beta, 200'001, 14);
    std::nth_element(v.begin(), v.begin() + 100'000, v.end());
    // median of n draws has sd ~ 1/(2 g(0) sqrt(n)); g(0) >= 0.1 here
    EXPECT_NEAR(v[100'000], 0.0, 0.02) << beta;
  }
}

TEST(CmsSample, TailAtTenForBetaOnePointFive) {
  const std::size_t n = 1'000'000;
  const auto v = draws(1.5, n, 15);
  EXPECT_NEAR(frac_above(v, 10.0) / 0.00647042832450955149, 1.0, 0.1);
}

TEST(CmsSample, Deterministic) {
  EXPECT_EQ(draws(1.3, 1000, 99), draws(1.3, 1000, 99));
  EXPECT_NE(draws(1.3, 1000, 99), draws(1.3, 1000, 100));
}

TEST(LepageSeries, MeanCountAndStructure) {
  const std::size_t reps = 200;
  double total = 0.0;
  std::size_t pos = 0, all = 0;
  for (std::size_t r = 0; r < reps; ++r) {
    Engine rng = make_engine(7, {r});
    const auto js = lepage_jump_series(1.0, 1.0, 1.0, 0.01, rng);
    total += static_cast<double>(js.size());
    ASSERT_EQ(js.times.size(), js.sizes.size());
    for (std::size_t i = 0; i < js.size(); ++i) {
      EXPECT_GT(js.times[i], 0.0);
      EXPECT_LE(js.times[i], 1.0);
      if (i > 0) {
        EXPECT_GT(js.times[i], js.times[i - 1]);
      }
      EXPECT_GT(std::abs(js.sizes[i]), 0.01);
      pos += js.sizes[i] > 0.0;
      ++all;
    }
  }
  EXPECT_NEAR(total / static_cast<double>(reps), 100.0, 3.0 * std::sqrt(100.0 / reps));
  const double n = static_cast<double>(all);
  EXPECT_NEAR(static_cast<double>(pos) / n, 0.5, 3.0 * std::sqrt(0.25 / n));
}

TEST(LepageSeries, CountRatioAcrossLevels) {
  for (double beta : {0.5, 1.0, 1.5}) {
    double above1 = 0.0, above2 = 0.0;
    for (std::size_t r = 0; r < 200; ++r) {
      Engine rng = make_engine(8, {r});
      const auto js = lepage_jump_series(1.0, beta, 1.0, 0.001, rng);
      above1 += static_cast<double>(js.count_above(0.01));
      above2 += static_cast<double>(js.count_above(0.03));
    }
    EXPECT_NEAR((above2 / above1) / std::pow(1.0 / 3.0, beta), 1.0, 0.05) << beta;
  }
}

TEST(LepageSeries, EdgeCases) {
  Engine rng = make_engine(1);
  EXPECT_TRUE(lepage_jump_series(1.0, 1.0, 0.0, 0.01, rng).empty());
  EXPECT_THROW(lepage_jump_series(1.0, 1.0, 1.0, 0.0, rng), std::invalid_argument);
  EXPECT_THROW(lepage_jump_series(1.0, 2.5, 1.0, 0.1, rng), std::domain_error);
}

TEST(LepageSeries, Deterministic) {
  Engine a = make_engine(5, {1, 2});
  Engine b = make_engine(5, {1, 2});
  const auto x = lepage_jump_series(0.7, 1.2, 2.0, 0.005, a);
  const auto y = lepage_jump_series(0.7, 1.2, 2.0, 0.005, b);
  EXPECT_EQ(x.times, y.times);
  EXPECT_EQ(x.sizes, y.sizes);
}

TEST(CompoundPoisson, Examples) {
  Engine rng = make_engine(3);
  EXPECT_TRUE(compound_poisson_series({0.0, FixedSize{0.1}}, 1.0, rng).empty());

  double total = 0.0;
  const int reps = 400;
  for (int r = 0; r < reps; ++r)
    total += static_cast<double>(compound_poisson_series({10.0, FixedSize{0.1}}, 1.0, rng).size());
  EXPECT_NEAR(total / reps, 10.0, 3.0 * std::sqrt(10.0 / reps));

  const auto js = compound_poisson_series({50.0, FixedSize{0.10}}, 1.0, rng);
  EXPECT_FALSE(js.empty());
  for (double s : js.sizes) EXPECT_DOUBLE_EQ(std::abs(s), 0.10);
  EXPECT_EQ(js.truncation_floor, 0.0);

  const auto ju = compound_poisson_series({200.0, UniformSize{-0.3, 0.3}}, 1.0, rng);
  for (double s : ju.sizes) {
    EXPECT_GE(s, -0.3);
    EXPECT_LT(s, 0.3);
  }
  EXPECT_THROW(compound_poisson_series({-1.0, FixedSize{0.1}}, 1.0, rng), std::invalid_argument);
  EXPECT_THROW(compound_poisson_series({1.0, UniformSize{0.3, -0.3}}, 1.0, rng),
               std::invalid_argument);
}

TEST(JumpSeriesCsv, Header) {
  JumpSeries js;
  js.horizon = 1.0;
  js.times = {0.25, 0.5};
  js.sizes = {0.1, -0.125};
  std::ostringstream os;
  write_csv(os, js);
  EXPECT_EQ(os.str(), "time,size\n0.25,0.10000000000000001\n0.5,-0.125\n");
}
