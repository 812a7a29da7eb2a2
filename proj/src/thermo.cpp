#include "vibra/thermo.hpp"

#include <cmath>
#include <string>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "vibra/error.hpp"

namespace vibra {
namespace {

void check_beta(double beta) {
  if (!(beta > 0.0) || !std::isfinite(beta)) fail(ErrorKind::InvalidParams, "beta must be finite and > 0");
}

template <class F>
double integrate(F f, double hi, const char* what) {
  thread_local boost::math::quadrature::tanh_sinh<double> integrator(15);
  double err = 0.0;
  double l1 = 0.0;
  const double v = integrator.integrate(f, 0.0, hi, 1e-13, &err, &l1);
  if (!std::isfinite(v) || err > 1e-9 * std::max(l1, 1e-300)) {
    fail(ErrorKind::QuadratureFailure, std::string(what) + ": refinement limit reached (error estimate " +
                                           std::to_string(err) + ")");
  }
  return v;
}

}  // namespace

std::string_view to_string(ThermoSource s) { return s == ThermoSource::Analytic ? "analytic" : "empirical"; }

double mode_energy(double omega, double beta) {
  check_beta(beta);
  if (omega < 0.0) fail(ErrorKind::InvalidParams, "omega must be >= 0");
  if (omega == 0.0) return 1.0 / beta;
  return omega * (0.5 + 1.0 / std::expm1(beta * omega));
}

double mode_specific_heat(double omega, double beta) {
  const double y = beta * omega;
  if (y < 1e-4) return 1.0 - y * y / 12.0;
  const double e = std::exp(-y);
  const double d = -std::expm1(-y);
  return 0.25 * y * y * 4.0 * e / (d * d);
}

double energy_density(double beta, const AnalyticLaw& law) {
  check_beta(beta);
  law.validate();
  const double omega_max = std::sqrt(law.omega0_sq * support_endpoint(law.mu));
  return 2.0 * integrate(
                   [&](double w) { return mode_energy(w, beta) * w * physical_density(w * w, law); }, omega_max,
                   "energy density");
}

double specific_heat(double beta, const AnalyticLaw& law) {
  check_beta(beta);
  law.validate();
  const double omega_max = std::sqrt(law.omega0_sq * support_endpoint(law.mu));
  // (beta^2/2) w^3 / sinh^2 = 2 w * (beta w / 2)^2 / sinh^2
  return integrate([&](double w) { return 2.0 * w * mode_specific_heat(w, beta) * physical_density(w * w, law); },
                   omega_max, "specific heat");
}

double energy_density(double beta, const SpectralHistogram& h) {
  check_beta(beta);
  if (h.axis() != Axis::Omega) fail(ErrorKind::InvalidParams, "thermodynamics needs an omega-axis histogram");
  if (h.n_events() == 0) fail(ErrorKind::InsufficientData, "empty frequency histogram");
  double u = 0.0;
  for (std::size_t i = 0; i < h.bins(); ++i) {
    if (h.counts()[i] == 0) continue;
    u += static_cast<double>(h.counts()[i]) * mode_energy(std::max(h.center(i), 0.0), beta);
  }
  return u / static_cast<double>(h.n_events());
}

double specific_heat(double beta, const SpectralHistogram& h) {
  check_beta(beta);
  if (h.axis() != Axis::Omega) fail(ErrorKind::InvalidParams, "thermodynamics needs an omega-axis histogram");
  if (h.n_events() == 0) fail(ErrorKind::InsufficientData, "empty frequency histogram");
  double c = 0.0;
  for (std::size_t i = 0; i < h.bins(); ++i) {
    if (h.counts()[i] == 0) continue;
    c += static_cast<double>(h.counts()[i]) * mode_specific_heat(std::max(h.center(i), 0.0), beta);
  }
  return c / static_cast<double>(h.n_events());
}

ThermoCurve analytic_curve(const AnalyticLaw& law, std::span<const double> betas) {
  ThermoCurve c;
  c.source = ThermoSource::Analytic;
  for (double b : betas) c.points.push_back({b, energy_density(b, law), specific_heat(b, law)});
  return c;
}

ThermoCurve empirical_curve(const SpectralHistogram& h, std::span<const double> betas) {
  ThermoCurve c;
  c.source = ThermoSource::Empirical;
  for (double b : betas) c.points.push_back({b, energy_density(b, h), specific_heat(b, h)});
  return c;
}

std::vector<double> log_grid(double lo, double hi, std::size_t n) {
  if (!(lo > 0.0) || !(hi >= lo) || n == 0) fail(ErrorKind::InvalidParams, "log grid needs 0 < lo <= hi and n >= 1");
  std::vector<double> g(n);
  if (n == 1) {
    g[0] = lo;
    return g;
  }
  const double step = std::log(hi / lo) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) g[i] = lo * std::exp(step * static_cast<double>(i));
  g.back() = hi;
  return g;
}

}  // namespace vibra
