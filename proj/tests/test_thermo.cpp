#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "vibra/error.hpp"
#include "vibra/thermo.hpp"

using namespace vibra;

namespace {

const double kMus[] = {1e-4, 0.1, 1.0, 100.0};

double zero_point_energy(const AnalyticLaw& law) {
  const double x1 = support_endpoint(law.mu);
  auto g = [&](double t) {
    const double s = std::sin(t), c = std::cos(t);
    const double x = x1 * s * s;
    return 0.5 * std::sqrt(law.omega0_sq * x) * analytic_density(x, law.mu) * 2 * x1 * s * c;
  };
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(g, 0.0, std::numbers::pi / 2, 5, 1e-13);
}

}  // namespace

TEST(ModeEnergy, Examples) {
  EXPECT_NEAR(mode_energy(1.0, 1.0), 0.5 + 1.0 / (std::exp(1.0) - 1.0), 1e-15);
  EXPECT_NEAR(mode_energy(1.0, 1.0), 1.08198, 1e-5);
  EXPECT_NEAR(mode_energy(2.0, 200.0), 1.0, 1e-15);
  EXPECT_NEAR(mode_energy(1.0, 1e-4) * 1e-4, 1.0, 1e-8);
  EXPECT_DOUBLE_EQ(mode_energy(0.0, 4.0), 0.25);
  EXPECT_THROW(mode_energy(1.0, 0.0), Error);
  EXPECT_THROW(mode_energy(-1.0, 1.0), Error);
}

TEST(ModeEnergy, SpecificHeatIsDerivative) {
  for (double w : {0.01, 0.5, 2.0}) {
    for (double b : {0.1, 1.0, 5.0}) {
      const double h = 1e-5 * b;
      const double d = (mode_energy(w, b + h) - mode_energy(w, b - h)) / (2 * h);
      EXPECT_NEAR(-b * b * d, mode_specific_heat(w, b), 1e-8);
    }
  }
  EXPECT_DOUBLE_EQ(mode_specific_heat(0.0, 1.0), 1.0);
}

TEST(Thermo, ClassicalLimit) {
  for (double mu : kMus) {
    const AnalyticLaw law{mu, 1.0};
    EXPECT_NEAR(specific_heat(1e-3, law), 1.0, 1e-3) << mu;
    EXPECT_NEAR(energy_density(1e-3, law) * 1e-3, 1.0, 1e-3) << mu;
  }
}

TEST(Thermo, FiniteDifferenceMatchesDirect) {
  for (double mu : kMus) {
    const AnalyticLaw law{mu, 1.0};
    for (double b : log_grid(1e-2, 1e2, 9)) {
      const double h = 1e-3 * b;
      const double d = (energy_density(b + h, law) - energy_density(b - h, law)) / (2 * h);
      const double c = specific_heat(b, law);
      EXPECT_NEAR(-b * b * d / c, 1.0, 1e-5) << mu << " " << b;
    }
  }
}

TEST(Thermo, MonotoneAndBounded) {
  for (double mu : kMus) {
    const auto curve = analytic_curve(AnalyticLaw{mu, 2.0}, log_grid(1e-3, 1e2, 30));
    for (std::size_t i = 1; i < curve.points.size(); ++i) {
      EXPECT_LE(curve.points[i].u, curve.points[i - 1].u);
      EXPECT_GT(curve.points[i].c_v, 0.0);
      EXPECT_LE(curve.points[i].c_v, 1.0 + 1e-12);
    }
  }
}

TEST(Thermo, ZeroPointLimit) {
  for (double mu : {0.1, 1.0}) {
    const AnalyticLaw law{mu, 1.0};
    const double zpe = zero_point_energy(law);
    EXPECT_NEAR(energy_density(1e4, law) / zpe, 1.0, 1e-6);
    EXPECT_LT(specific_heat(1e4, law), 1e-3);
  }
}

TEST(Thermo, LargeMuFreezesLast) {
  double best = 0.0, best_mu = 0.0;
  for (double mu : kMus) {
    const double c = specific_heat(100.0, AnalyticLaw{mu, 1.0});
    if (c > best) {
      best = c;
      best_mu = mu;
    }
  }
  EXPECT_EQ(best_mu, 100.0);
}

TEST(Thermo, EmpiricalMatchesAnalyticOnExactHistogram) {
  const AnalyticLaw law{1.0, 1.0};
  const double wmax = std::sqrt(support_endpoint(1.0));
  SpectralHistogram h(0.0, 1.25 * wmax, 4096, Axis::Omega);
  const double events = 2e7;
  for (std::size_t i = 0; i < h.bins(); ++i) {
    const double a = h.edge(i), b = h.edge(i + 1);
    const auto c = std::llround(events * analytic_mass(a * a, b * b, 1.0));
    for (long long k = 0; k < c; ++k) h.add(h.center(i));
  }
  for (double b : log_grid(1e-2, 10.0, 7)) {
    EXPECT_NEAR(energy_density(b, h) / energy_density(b, law), 1.0, 1e-3) << b;
    EXPECT_NEAR(specific_heat(b, h) / specific_heat(b, law), 1.0, 1e-3) << b;
  }
  const auto emp = empirical_curve(h, log_grid(0.1, 1.0, 3));
  EXPECT_EQ(emp.source, ThermoSource::Empirical);
}

TEST(Thermo, EmpiricalNeedsOmegaAxis) {
  SpectralHistogram h(0.0, 1.0, 4, Axis::OmegaSq);
  h.add(0.5);
  EXPECT_THROW(energy_density(1.0, h), Error);
}

TEST(LogGrid, Endpoints) {
  const auto g = log_grid(1e-3, 1e2, 51);
  ASSERT_EQ(g.size(), 51u);
  EXPECT_DOUBLE_EQ(g.front(), 1e-3);
  EXPECT_DOUBLE_EQ(g.back(), 1e2);
  EXPECT_NEAR(g[10], 1e-2, 1e-15);
  EXPECT_THROW(log_grid(0.0, 1.0, 3), Error);
}
