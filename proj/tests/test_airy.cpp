#include <gtest/gtest.h>

#include <cmath>

#include <boost/math/special_functions/airy.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "vibra/airy.hpp"
#include "vibra/error.hpp"

using namespace vibra;

TEST(Airy, ValueAtZero) {
  const double ai0 = std::pow(3.0, -2.0 / 3.0) / std::tgamma(2.0 / 3.0);
  EXPECT_NEAR(airy_ai(0.0).ai, ai0, 1e-15);
  EXPECT_NEAR(ai0, 0.3550280539, 1e-10);
}

TEST(Airy, DensityAtZero) {
  const double aip0 = std::pow(3.0, -1.0 / 3.0) / std::tgamma(1.0 / 3.0);
  EXPECT_NEAR(airy_density(0.0), aip0 * aip0, 1e-15);
  EXPECT_NEAR(airy_density(0.0), 0.06699, 1e-5);
}

TEST(Airy, DecaysOnTheRight) {
  EXPECT_LE(airy_density(8.0), 1e-6);
  EXPECT_GT(airy_density(8.0), 0.0);
}

TEST(Airy, MatchesBoostAcrossWindow) {
  double worst = 0.0;
  for (int i = 0; i <= 2000; ++i) {
    const double eta = kAiryWindowLo + (kAiryWindowHi - kAiryWindowLo) * i / 2000.0;
    const auto v = airy_ai(eta);
    const double ai = boost::math::airy_ai(eta), aip = boost::math::airy_ai_prime(eta);
    worst = std::max({worst, std::abs(v.ai - ai), std::abs(v.aip - aip)});
    const double rho = aip * aip - eta * ai * ai;
    EXPECT_NEAR(airy_density(eta), rho, 1e-10) << eta;
  }
  EXPECT_LT(worst, 1e-11);
}

// RK4 on y'' = eta y from boost initial values at 5, integrated back to -10.
TEST(Airy, OdeOracle) {
  double y = boost::math::airy_ai(5.0), yp = boost::math::airy_ai_prime(5.0), eta = 5.0;
  const int steps = 60000;
  const double h = -15.0 / steps;
  auto f = [](double e, double a, double b) { return std::pair{b, e * a}; };
  for (int i = 0; i < steps; ++i) {
    auto [k1a, k1b] = f(eta, y, yp);
    auto [k2a, k2b] = f(eta + h / 2, y + h / 2 * k1a, yp + h / 2 * k1b);
    auto [k3a, k3b] = f(eta + h / 2, y + h / 2 * k2a, yp + h / 2 * k2b);
    auto [k4a, k4b] = f(eta + h, y + h * k3a, yp + h * k3b);
    y += h / 6 * (k1a + 2 * k2a + 2 * k3a + k4a);
    yp += h / 6 * (k1b + 2 * k2b + 2 * k3b + k4b);
    eta += h;
  }
  EXPECT_NEAR(airy_ai(-10.0).ai, y, 1e-8);
  EXPECT_NEAR(airy_ai(-10.0).aip, yp, 1e-7);
}

TEST(Airy, DensityNonNegative) {
  for (int i = 0; i <= 400; ++i) EXPECT_GE(airy_density(-12.0 + 20.0 * i / 400), 0.0);
}

TEST(Airy, OutOfWindow) {
  for (double eta : {-12.5, 8.5}) {
    try {
      airy_ai(eta);
      FAIL() << "no throw at " << eta;
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::OutOfWindow);
    }
  }
}
