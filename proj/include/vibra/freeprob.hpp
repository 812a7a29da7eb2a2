#pragma once

// Large-N spectral laws of H = M^{-1} K for the Wishart pencil ensemble.
//
// Rescaled variables: zeta = z / omega0^2, mu = m0 / sigma_M^2,
// Gamma(zeta; mu) = (sigma_K / sigma_M)^2 G_H(z). The rescaled density is
// rho(x; mu) = Im Gamma(x - i0) / pi, supported on (0, x1(mu)).

#include <array>
#include <complex>
#include <functional>
#include <span>

namespace vibra {

using Complex = std::complex<double>;

inline constexpr double kMinMu = 1e-8;

struct AnalyticLaw {
  double mu = 1.0;
  double omega0_sq = 1.0;

  void validate() const;
};

AnalyticLaw scale_map(double m0, double sigma_m, double sigma_k);

// Marchenko-Pastur law of C^H C.
Complex mp_resolvent(Complex z, double sigma);
double mp_density(double x, double sigma);
double mp_cdf(double x, double sigma);

// Law of M^{-1} with M = C^H C + m0.
Complex inv_mass_resolvent(Complex z, double m0, double sigma_m);
double inv_mass_density(double x, double m0, double sigma_m);
double inv_mass_first_moment(double m0, double sigma_m);

struct STransforms {
  double s_k = 0.0;
  double s_minv = 0.0;
};

STransforms s_transforms(double u, double m0, double sigma_m, double sigma_k);

Complex chi_k(Complex u, double sigma_k);
Complex chi_minv(Complex u, double m0, double sigma_m);
Complex chi_h(Complex u, double m0, double sigma_m, double sigma_k);

/// phi(z) = G(1/z) / z - 1.
Complex phi(const std::function<Complex(Complex)>& resolvent, Complex z);

struct CubicCoeffs {
  Complex c3, c2, c1, c0;

  Complex eval(Complex g) const { return ((c3 * g + c2) * g + c1) * g + c0; }
  Complex derivative(Complex g) const { return (3.0 * c3 * g + 2.0 * c2) * g + c1; }
};

/// (zeta + zeta^2) G^3 - ((2 + mu) zeta + mu zeta^2) G^2 + (1 + mu + 2 mu zeta) G - mu.
CubicCoeffs cubic_coeffs(Complex zeta, double mu);

/// All roots of c3 g^3 + c2 g^2 + c1 g + c0, Newton-polished. When the
/// leading coefficient vanishes the missing root is reported as infinite.
std::array<Complex, 3> cubic_roots(const CubicCoeffs& c);

/// Physical root (Gamma ~ 1/zeta at infinity), tracked by radial homotopy.
Complex resolvent_h(Complex zeta, double mu);

/// Boundary value Gamma(x - i0) on the real axis, including the support.
Complex resolvent_h_real(double x, double mu);

/// G_H(z) in physical units.
Complex resolvent_h_physical(Complex z, double m0, double sigma_m, double sigma_k);

double p3(double x, double mu);
/// Delta_Gamma(x) = x p3(x).
double discriminant(double x, double mu);

/// Upper edge of the support: the single real root of p3.
double support_endpoint(double mu);

double analytic_density(double x, double mu);
/// max Im(root) / pi straight from the cubic; a second evaluation path.
double density_from_cubic(double x, double mu);
double physical_density(double omega_sq, const AnalyticLaw& law);

/// Integral of analytic_density over [a, b].
double analytic_mass(double a, double b, double mu);

/// lim sqrt(x) rho(x) as x -> 0+, equal to sqrt(1 + mu) / pi.
double origin_coefficient(double mu);
/// lim rho(x) / sqrt(x1 - x) as x -> x1-.
double edge_coefficient(double mu);
/// Edge length scale r with N^{-2/3} r the Airy unit: (pi c_edge)^{-2/3}.
double edge_scale(double mu);

/// out[i] = analytic_density(xs[i], mu).
void analytic_density_grid_serial(double mu, std::span<const double> xs, std::span<double> out);
void analytic_density_grid(double mu, std::span<const double> xs, std::span<double> out);

}  // namespace vibra
