#pragma once

// Harmonic phonon thermodynamics in reduced units (hbar = k_B = 1).

#include <span>
#include <string_view>
#include <vector>

#include "vibra/freeprob.hpp"
#include "vibra/histogram.hpp"

namespace vibra {

enum class ThermoSource { Analytic, Empirical };
std::string_view to_string(ThermoSource s);

struct ThermoPoint {
  double beta = 0.0;
  double u = 0.0;
  double c_v = 0.0;
};

struct ThermoCurve {
  std::vector<ThermoPoint> points;
  ThermoSource source = ThermoSource::Analytic;
};

/// omega (1/2 + 1/(e^{beta omega} - 1)); 1/beta at omega = 0.
double mode_energy(double omega, double beta);

/// (beta omega / 2)^2 / sinh^2(beta omega / 2), the per-mode specific heat.
double mode_specific_heat(double omega, double beta);

/// u = 2 int_0^{omega_max} E(omega) omega rho_H(omega^2) d omega, omega_max = omega0 sqrt(x1).
double energy_density(double beta, const AnalyticLaw& law);
/// c_v = (beta^2 / 2) int omega^3 rho_H(omega^2) / sinh^2(beta omega / 2) d omega.
double specific_heat(double beta, const AnalyticLaw& law);

/// Midpoint rule over an omega-axis histogram of mode frequencies.
double energy_density(double beta, const SpectralHistogram& omega_hist);
double specific_heat(double beta, const SpectralHistogram& omega_hist);

ThermoCurve analytic_curve(const AnalyticLaw& law, std::span<const double> betas);
ThermoCurve empirical_curve(const SpectralHistogram& omega_hist, std::span<const double> betas);

/// n log-spaced values from lo to hi inclusive.
std::vector<double> log_grid(double lo, double hi, std::size_t n);

}  // namespace vibra
