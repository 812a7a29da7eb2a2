#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>

#include <Eigen/Eigenvalues>

#include "vibra/ensembles.hpp"
#include "vibra/error.hpp"
#include "vibra/freeprob.hpp"

using namespace vibra;

namespace {

double ks_statistic(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(double(i) / a.size() - double(j) / b.size()));
  }
  return d;
}

}  // namespace

TEST(Rng, SameIndexSameStream) {
  RngStream a = derive_stream(42, 7), b = derive_stream(42, 7);
  for (int i = 0; i < 1000; ++i) ASSERT_EQ(a.normal(), b.normal());
}

TEST(Rng, NeighbouringStreamsPassKs) {
  RngStream a = derive_stream(42, 0), b = derive_stream(42, 1);
  const std::size_t n = 10000;
  std::vector<double> x(n), y(n);
  for (auto& v : x) v = a.uniform(0.0, 1.0);
  for (auto& v : y) v = b.uniform(0.0, 1.0);
  EXPECT_NE(x[0], y[0]);
  // Two-sample critical value at alpha = 0.001.
  EXPECT_LT(ks_statistic(x, y), 1.9495 * std::sqrt(2.0 / n));
}

TEST(Rng, NormalsPassKsAgainstEachOther) {
  RngStream a = derive_stream(1, 0), b = derive_stream(2, 0);
  std::vector<double> x(10000), y(10000);
  for (auto& v : x) v = a.normal();
  for (auto& v : y) v = b.normal();
  EXPECT_LT(ks_statistic(x, y), 1.9495 * std::sqrt(2.0 / 10000));
}

TEST(Ginibre, TraceFirstMoment) {
  const double sigma = 1.5;
  const int n = 64, reps = 1000;
  double sum = 0.0, sum2 = 0.0;
  for (int r = 0; r < reps; ++r) {
    RngStream s = derive_stream(99, static_cast<std::uint64_t>(r));
    const ComplexMat c = sample_ginibre<Complex>(n, sigma, s);
    const double t = c.squaredNorm() / n;
    sum += t;
    sum2 += t * t;
  }
  const double mean = sum / reps;
  const double se = std::sqrt((sum2 / reps - mean * mean) / reps);
  EXPECT_LT(std::abs(mean - sigma * sigma), 3.0 * se);
}

TEST(Ginibre, RealTraceFirstMoment) {
  const int n = 64, reps = 1000;
  double sum = 0.0, sum2 = 0.0;
  for (int r = 0; r < reps; ++r) {
    RngStream s = derive_stream(98, static_cast<std::uint64_t>(r));
    const double t = sample_ginibre<double>(n, 1.0, s).squaredNorm() / n;
    sum += t;
    sum2 += t * t;
  }
  const double mean = sum / reps;
  EXPECT_LT(std::abs(mean - 1.0), 3.0 * std::sqrt((sum2 / reps - mean * mean) / reps));
}

TEST(Ginibre, ZeroSigmaIsZero) {
  RngStream s = derive_stream(1, 0);
  EXPECT_EQ(sample_ginibre<Complex>(5, 0.0, s).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Wishart, DeterministicMassLimit) {
  EnsembleSpec spec{32, 1e-8, 1.0, 1.0, Field::Complex, 5};
  RngStream s = derive_stream(5, 0);
  const auto p = build_wishart_pencil<Complex>(spec, s);
  EXPECT_LT((p.mass - ComplexMat::Identity(32, 32)).cwiseAbs().maxCoeff(), 1e-12);
  const auto w = solve_omega_sq(p);
  Eigen::SelfAdjointEigenSolver<ComplexMat> es(p.stiffness, Eigen::EigenvaluesOnly);
  for (int i = 0; i < 32; ++i) EXPECT_NEAR(w[static_cast<std::size_t>(i)], es.eigenvalues()(i), 1e-10);
}

TEST(Wishart, BitwiseReproducible) {
  EnsembleSpec spec{2, 1.0, 1.0, 1.0, Field::Complex, 77};
  RngStream a = derive_stream(77, 3), b = derive_stream(77, 3);
  const auto p = build_wishart_pencil<Complex>(spec, a);
  const auto q = build_wishart_pencil<Complex>(spec, b);
  EXPECT_TRUE(p.mass == q.mass);
  EXPECT_TRUE(p.stiffness == q.stiffness);
}

TEST(Wishart, MassBoundedBelowByM0) {
  EnsembleSpec spec{128, 1.0, 1.0, 0.3, Field::Real, 8};
  RngStream s = derive_stream(8, 0);
  const auto p = build_wishart_pencil<double>(spec, s);
  Eigen::SelfAdjointEigenSolver<RealMat> es(p.mass, Eigen::EigenvaluesOnly);
  EXPECT_GE(es.eigenvalues().minCoeff(), 0.3 - 1e-12);
  EXPECT_TRUE(p.mass.isApprox(p.mass.transpose(), 0.0));
}

TEST(Wishart, InverseMassFirstMoment) {
  const double m0 = 0.7, sm = 1.3;
  EnsembleSpec spec{256, sm, 1.0, m0, Field::Complex, 21};
  double sum = 0.0;
  const int reps = 8;
  for (int r = 0; r < reps; ++r) {
    RngStream s = derive_stream(21, static_cast<std::uint64_t>(r));
    const auto p = build_wishart_pencil<Complex>(spec, s);
    sum += p.mass.inverse().trace().real() / 256.0;
  }
  EXPECT_NEAR(sum / reps, inv_mass_first_moment(m0, sm), 0.01 * inv_mass_first_moment(m0, sm));
}

TEST(Wishart, InvalidSpec) {
  EnsembleSpec spec{4, -1.0, 1.0, 1.0, Field::Real, 0};
  EXPECT_THROW(spec.validate(), Error);
}

TEST(Pendulum, SimplePendulum) {
  const auto p = build_pendulum(PendulumParams{{1.0}, {1.0}, {0.0, 0.0}, 1.0});
  EXPECT_DOUBLE_EQ(p.mass(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(p.stiffness(0, 0), 1.0);
}

TEST(Pendulum, ChargeFreeStiffnessIsDiagonal) {
  const auto pp = uniform_pendulum(4, 0.0, 1.0);
  for (double q : pp.charges) EXPECT_EQ(q, 0.0);
  const auto p = build_pendulum(pp);
  const RealMat off = p.stiffness - RealMat(p.stiffness.diagonal().asDiagonal());
  EXPECT_EQ(off.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Pendulum, PureCoulombRowSumsVanish) {
  const auto p = build_pendulum(uniform_pendulum(2, 1.0, 0.0));
  const Eigen::VectorXd r = p.stiffness * Eigen::VectorXd::Ones(2);
  EXPECT_LT(r.cwiseAbs().maxCoeff(), 1e-12 * p.stiffness.cwiseAbs().maxCoeff());
}

TEST(Pendulum, CoulombNullVector) {
  RngStream s = derive_stream(4, 0);
  const auto pp = sample_disordered_pendulum(200, 1.0, 1.0, s);
  const RealMat u = coulomb_matrix(pp);
  const Eigen::VectorXd r = u * Eigen::VectorXd::Ones(200);
  EXPECT_LT(r.cwiseAbs().maxCoeff(), 1e-12 * linalg::norm1(u));
}

TEST(Pendulum, FastBuilderMatchesReference) {
  RngStream s = derive_stream(6, 0);
  const auto pp = sample_disordered_pendulum(14, 1.0, 1.0, s);
  const auto a = build_pendulum(pp);
  const auto b = build_pendulum_reference(pp);
  EXPECT_LT((a.mass - b.mass).cwiseAbs().maxCoeff(), 1e-12 * b.mass.cwiseAbs().maxCoeff());
  EXPECT_LT((a.stiffness - b.stiffness).cwiseAbs().maxCoeff(), 1e-12 * b.stiffness.cwiseAbs().maxCoeff());
}

TEST(Pendulum, UniformParameters) {
  const auto pp = uniform_pendulum(16, 1.0, 1.0);
  ASSERT_EQ(pp.charges.size(), 17u);
  for (double l : pp.lengths) EXPECT_DOUBLE_EQ(l, 1.0 / 16);
  for (double q : pp.charges) EXPECT_NEAR(q, 1.0 / (16 * std::sqrt(std::log(16.0))), 1e-15);
}

TEST(Pendulum, DisorderedRanges) {
  const std::size_t n = 300;
  RngStream s = derive_stream(9, 0);
  const auto pp = sample_disordered_pendulum(n, 2.0, 1.0, s);
  const double unit = 2.0 / (n * std::sqrt(std::log(double(n))));
  int high = 0;
  for (double l : pp.lengths) {
    EXPECT_GE(l, 0.8 / n);
    EXPECT_LT(l, 1.2 / n);
  }
  for (double m : pp.masses) {
    EXPECT_GE(m, 0.5 / n);
    EXPECT_LT(m, 1.5 / n);
  }
  for (double q : pp.charges) {
    const bool lo = std::abs(q - 0.5 * unit) < 1e-15, hi = std::abs(q - 1.5 * unit) < 1e-15;
    EXPECT_TRUE(lo || hi);
    high += hi;
  }
  EXPECT_GT(high, 100);
  EXPECT_LT(high, 201);
}

TEST(Pendulum, MassAndStiffnessPositive) {
  RngStream s = derive_stream(10, 0);
  const auto p = build_pendulum(sample_disordered_pendulum(64, 1.0, 1.0, s));
  const auto w = solve_omega_sq(p);
  EXPECT_GT(w.front(), 0.0);
}

TEST(Pendulum, JsonRoundTrip) {
  RngStream s = derive_stream(11, 0);
  const auto pp = sample_disordered_pendulum(10, 1.0, 0.5, s);
  const auto path = std::filesystem::temp_directory_path() / "vibra_pendulum_roundtrip.json";
  save_pendulum(pp, path);
  const auto back = load_pendulum(path);
  std::filesystem::remove(path);
  EXPECT_EQ(back.lengths, pp.lengths);
  EXPECT_EQ(back.masses, pp.masses);
  EXPECT_EQ(back.charges, pp.charges);
  EXPECT_EQ(back.g, pp.g);
}

TEST(Pendulum, InvalidParams) {
  PendulumParams pp{{1.0, -1.0}, {1.0, 1.0}, {0.0, 0.0, 0.0}, 1.0};
  EXPECT_THROW(pp.validate(), Error);
  PendulumParams short_charges{{1.0}, {1.0}, {0.0}, 1.0};
  EXPECT_THROW(short_charges.validate(), Error);
}
