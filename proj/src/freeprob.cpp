#include "vibra/freeprob.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "vibra/error.hpp"

namespace vibra {
namespace {

constexpr double kPi = std::numbers::pi;
const double kCbrt2 = std::cbrt(2.0);
constexpr double kInf = std::numeric_limits<double>::infinity();

void check_mu(double mu) {
  if (!(mu >= kMinMu) || !std::isfinite(mu)) {
    fail(ErrorKind::InvalidParams, "mu must be finite and >= 1e-8, got " + std::to_string(mu));
  }
}

bool is_infinite(Complex z) { return !std::isfinite(z.real()) || !std::isfinite(z.imag()); }

Complex polish(const CubicCoeffs& c, Complex g) {
  if (is_infinite(g)) return g;
  Complex f = c.eval(g);
  for (int it = 0; it < 4 && std::abs(f) > 0.0; ++it) {
    const Complex d = c.derivative(g);
    if (d == Complex(0.0)) break;
    const Complex next = g - f / d;
    const Complex fn = c.eval(next);
    if (!(std::abs(fn) < std::abs(f))) break;
    g = next;
    f = fn;
  }
  return g;
}

// Aberth-Ehrlich sweeps from the Cardano guesses. Cardano alone loses the
// small roots when one root is much larger than the others.
void refine_all(const CubicCoeffs& c, std::array<Complex, 3>& r) {
  for (int it = 0; it < 60; ++it) {
    double moved = 0.0;
    for (int k = 0; k < 3; ++k) {
      const Complex f = c.eval(r[k]);
      const Complex d = c.derivative(r[k]);
      if (f == Complex(0.0) || d == Complex(0.0)) continue;
      const Complex w = f / d;
      Complex repel(0.0);
      for (int j = 0; j < 3; ++j) {
        if (j != k) repel += 1.0 / (r[k] - r[j]);
      }
      const Complex step = w / (1.0 - w * repel);
      if (is_infinite(step)) continue;
      r[k] -= step;
      moved = std::max(moved, std::abs(step) / std::max(std::abs(r[k]), 1e-300));
    }
    if (moved < 1e-15) break;
  }
}

// Physical root at large |zeta|: 1/zeta + a/zeta^2 + b/zeta^3.
Complex large_zeta_series(Complex zeta, double mu) {
  const double a = 0.5 * (std::sqrt(1.0 + 4.0 / mu) - 1.0);
  const double b = (a * a * (1.0 - mu) + 3.0 * a) / (mu * (2.0 * a + 1.0));
  const Complex w = 1.0 / zeta;
  return w * (1.0 + w * (a + w * b));
}

struct Pick {
  Complex root;
  bool clear;
};

Pick nearest_root(const std::array<Complex, 3>& roots, Complex target) {
  std::array<double, 3> d{};
  for (int k = 0; k < 3; ++k) d[k] = is_infinite(roots[k]) ? kInf : std::abs(roots[k] - target);
  const int best = static_cast<int>(std::min_element(d.begin(), d.end()) - d.begin());
  double second = kInf;
  for (int k = 0; k < 3; ++k) {
    if (k != best) second = std::min(second, d[k]);
  }
  return {roots[best], second > 3.0 * d[best]};
}

// y = zeta^2 G - zeta, so G = (1 + y / zeta) / zeta. At large |zeta| the two
// roots with G ~ 1/zeta sit near the two roots of y^2 + y = 1/mu.
CubicCoeffs scaled_cubic(Complex z, double mu) {
  return {(z + 1.0) / (z * z * z), (3.0 + z - mu * z * (z + 1.0)) / (z * z), (3.0 - mu * z) / z, Complex(1.0)};
}

Complex gamma_of(bool scaled, Complex v, Complex z) { return scaled ? (1.0 + v / z) / z : v; }

[[noreturn]] void tracking_failed(Complex z) {
  fail(ErrorKind::BranchAmbiguity, "root tracking failed near zeta = " + std::to_string(z.real()) +
                                       (std::signbit(z.imag()) ? "-" : "+") + std::to_string(std::abs(z.imag())) + "i");
}

// One radial step from |zeta| = r0 to r1, with the root held as v (G itself,
// or y when scaled). Two predictors must pick the same, clearly nearest root:
// an Euler step from dG/dzeta = -F_zeta / F_G, and y held fixed. Otherwise
// the step is bisected.
Complex track(Complex v, bool scaled, Complex dir, double r0, double r1, double mu, int depth) {
  const Complex z0 = dir * r0;
  const Complex z1 = dir * r1;
  const Complex g = gamma_of(scaled, v, z0);
  const Complex f_zeta = ((1.0 + 2.0 * z0) * g - ((2.0 + mu) + 2.0 * mu * z0)) * g * g + 2.0 * mu * g;
  const Complex f_g = cubic_coeffs(z0, mu).derivative(g);
  const Complex dg = f_g == Complex(0.0) ? Complex(0.0) : -f_zeta / f_g;

  Complex euler, hold;
  if (scaled) {
    euler = v + (z1 - z0) * (1.0 + 2.0 * v / z0 + z0 * z0 * dg);
    hold = v;
  } else {
    euler = g + (z1 - z0) * dg;
    const Complex w0 = 1.0 / z0;
    const Complex w1 = 1.0 / z1;
    hold = w1 + w1 * w1 * ((g - w0) / (w0 * w0));
  }
  const auto roots = cubic_roots(scaled ? scaled_cubic(z1, mu) : cubic_coeffs(z1, mu));
  const Pick pe = nearest_root(roots, euler);
  const Pick ph = nearest_root(roots, hold);
  if (pe.clear && ph.clear && pe.root == ph.root) return pe.root;
  if (depth >= 40) tracking_failed(z1);
  const double mid = std::sqrt(r0 * r1);
  const Complex v_mid = track(v, scaled, dir, r0, mid, mu, depth + 1);
  return track(v_mid, scaled, dir, mid, r1, mu, depth + 1);
}

// Geometric steps of ratio at most 4.
Complex advance(Complex v, bool scaled, Complex dir, double r0, double r1, double mu) {
  const int steps = std::max(1, static_cast<int>(std::ceil(std::log(r0 / r1) / std::log(4.0))));
  double r = r0;
  for (int s = 1; s <= steps; ++s) {
    const double next = s == steps ? r1 : r0 * std::pow(r1 / r0, static_cast<double>(s) / steps);
    v = track(v, scaled, dir, r, next, mu, 0);
    r = next;
  }
  return v;
}

Complex closest_pair_mean(const std::array<Complex, 3>& r) {
  double best = kInf;
  Complex mean{};
  for (int i = 0; i < 3; ++i) {
    for (int j = i + 1; j < 3; ++j) {
      if (is_infinite(r[i]) || is_infinite(r[j])) continue;
      const double d = std::abs(r[i] - r[j]);
      if (d < best) {
        best = d;
        mean = 0.5 * (r[i] + r[j]);
      }
    }
  }
  return mean;
}

double density_closed_form(double x, double mu, double x1) {
  if (!(x > 0.0) || !(x < x1) || x1 - x < 1e-12 * x1) return 0.0;
  if (x < 1e-30) return origin_coefficient(mu) / std::sqrt(x);
  const double mu2 = mu * mu;
  const double mu3 = mu2 * mu;
  const double x2 = x * x;
  const double xi =
      -x2 * ((((2.0 * mu3 * x + 6.0 * mu2 * (mu - 1.0)) * x + 3.0 * mu * (2.0 * mu2 - 7.0 * mu + 2.0)) * x +
              2.0 * (mu3 - 12.0 * mu2 + 3.0 * mu - 1.0)) *
                 x -
             9.0 * (mu2 + 2.0));
  const double disc = discriminant(x, mu);
  const double delta = x * (x + 1.0) * std::sqrt(std::max(-27.0 * disc, 0.0));
  const double chi = (((mu2 * x + 2.0 * mu * (mu - 1.0)) * x + (mu2 - 5.0 * mu + 1.0)) * x - 3.0 * (mu + 1.0)) * x;
  const double a = std::cbrt(xi + delta);
  const double rho = (a / kCbrt2 - kCbrt2 * chi / a) / (2.0 * std::sqrt(3.0) * x * (x + 1.0) * kPi);
  if (!std::isfinite(rho) || a == 0.0) return density_from_cubic(x, mu);
  return std::max(rho, 0.0);
}

}  // namespace

void AnalyticLaw::validate() const {
  check_mu(mu);
  if (!(omega0_sq > 0.0) || !std::isfinite(omega0_sq)) fail(ErrorKind::InvalidParams, "omega0_sq must be > 0");
}

AnalyticLaw scale_map(double m0, double sigma_m, double sigma_k) {
  if (!(m0 > 0.0) || !(sigma_m > 0.0) || !(sigma_k > 0.0)) {
    fail(ErrorKind::InvalidParams, "m0, sigma_M and sigma_K must all be > 0");
  }
  AnalyticLaw law{m0 / (sigma_m * sigma_m), (sigma_k / sigma_m) * (sigma_k / sigma_m)};
  law.validate();
  return law;
}

Complex mp_resolvent(Complex z, double sigma) {
  const double s2 = sigma * sigma;
  if (z.imag() == 0.0 && z.real() >= 0.0 && z.real() <= 4.0 * s2) {
    fail(ErrorKind::OutOfSupport, "resolvent evaluated on its cut");
  }
  return (1.0 - std::sqrt(1.0 - 4.0 * s2 / z)) / (2.0 * s2);
}

double mp_density(double x, double sigma) {
  const double s2 = sigma * sigma;
  if (!(x > 0.0) || !(x < 4.0 * s2)) return 0.0;
  return std::sqrt((4.0 * s2 - x) / x) / (2.0 * kPi * s2);
}

double mp_cdf(double x, double sigma) {
  const double t = std::clamp(x / (4.0 * sigma * sigma), 0.0, 1.0);
  return (2.0 / kPi) * (std::asin(std::sqrt(t)) + std::sqrt(t * (1.0 - t)));
}

Complex inv_mass_resolvent(Complex z, double m0, double sigma_m) {
  const double s2 = sigma_m * sigma_m;
  const double lo = 1.0 / (m0 + 4.0 * s2);
  const double hi = 1.0 / m0;
  if (z.imag() == 0.0 && z.real() >= lo && z.real() <= hi) fail(ErrorKind::OutOfSupport, "resolvent evaluated on its cut");
  const Complex z2 = z * z;
  return 1.0 / z - 1.0 / (2.0 * s2 * z2) + std::sqrt((1.0 - (m0 + 4.0 * s2) * z) / (1.0 - m0 * z)) / (2.0 * s2 * z2);
}

double inv_mass_density(double x, double m0, double sigma_m) {
  const double s2 = sigma_m * sigma_m;
  const double lo = 1.0 / (m0 + 4.0 * s2);
  const double hi = 1.0 / m0;
  if (!(x > lo) || !(x < hi)) return 0.0;
  return std::sqrt(1.0 + 4.0 * s2 / m0) / (2.0 * kPi * s2) / (x * x) * std::sqrt((x - lo) / (hi - x));
}

double inv_mass_first_moment(double m0, double sigma_m) {
  const double s2 = sigma_m * sigma_m;
  return (std::sqrt(1.0 + 4.0 * s2 / m0) - 1.0) / (2.0 * s2);
}

STransforms s_transforms(double u, double m0, double sigma_m, double sigma_k) {
  const double s2 = sigma_m * sigma_m;
  const double mu = m0 / s2;
  STransforms out;
  out.s_k = 1.0 / (sigma_k * sigma_k * (u + 1.0));
  out.s_minv = 0.5 * s2 * (mu - u + std::sqrt((u + mu) * (u + mu) + 4.0 * mu));
  return out;
}

Complex chi_k(Complex u, double sigma_k) { return u / (sigma_k * sigma_k * (u + 1.0) * (u + 1.0)); }

Complex chi_minv(Complex u, double m0, double sigma_m) {
  const double s2 = sigma_m * sigma_m;
  const double mu = m0 / s2;
  return u / (u + 1.0) * (0.5 * s2) * (mu - u + std::sqrt((u + mu) * (u + mu) + 4.0 * mu));
}

Complex chi_h(Complex u, double m0, double sigma_m, double sigma_k) {
  const double s2 = sigma_m * sigma_m;
  const double mu = m0 / s2;
  return s2 / (2.0 * sigma_k * sigma_k) * u / ((u + 1.0) * (u + 1.0)) *
         (mu - u + std::sqrt((u + mu) * (u + mu) + 4.0 * mu));
}

Complex phi(const std::function<Complex(Complex)>& resolvent, Complex z) { return resolvent(1.0 / z) / z - 1.0; }

CubicCoeffs cubic_coeffs(Complex zeta, double mu) {
  return {zeta + zeta * zeta, -((2.0 + mu) * zeta + mu * zeta * zeta), 1.0 + mu + 2.0 * mu * zeta, Complex(-mu)};
}

std::array<Complex, 3> cubic_roots(const CubicCoeffs& c) {
  const double scale = std::max({std::abs(c.c3), std::abs(c.c2), std::abs(c.c1), std::abs(c.c0)});
  const Complex inf(kInf, 0.0);
  std::array<Complex, 3> r{inf, inf, inf};
  if (scale == 0.0) return r;

  if (std::abs(c.c3) <= 1e-15 * scale) {
    if (std::abs(c.c2) <= 1e-15 * scale) {
      if (c.c1 != Complex(0.0)) r[0] = -c.c0 / c.c1;
    } else {
      const Complex s = std::sqrt(c.c1 * c.c1 - 4.0 * c.c2 * c.c0);
      const Complex q = std::abs(c.c1 + s) >= std::abs(c.c1 - s) ? -0.5 * (c.c1 + s) : -0.5 * (c.c1 - s);
      r[0] = q / c.c2;
      r[1] = q != Complex(0.0) ? c.c0 / q : Complex(0.0);
    }
  } else {
    const Complex a = c.c2 / c.c3;
    const Complex b = c.c1 / c.c3;
    const Complex d = c.c0 / c.c3;
    const Complex p = b - a * a / 3.0;
    const Complex q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + d;
    const Complex s = std::sqrt(q * q / 4.0 + p * p * p / 27.0);
    Complex u = -0.5 * q + s;
    if (std::abs(-0.5 * q - s) > std::abs(u)) u = -0.5 * q - s;
    const Complex cc = u == Complex(0.0) ? Complex(0.0) : std::pow(u, 1.0 / 3.0);
    const Complex omega(-0.5, 0.5 * std::sqrt(3.0));
    Complex ck = cc;
    for (int k = 0; k < 3; ++k) {
      const Complex t = ck == Complex(0.0) ? Complex(0.0) : ck - p / (3.0 * ck);
      r[k] = t - a / 3.0;
      ck *= omega;
    }
    refine_all(c, r);
    return r;
  }
  for (auto& g : r) g = polish(c, g);
  return r;
}

Complex resolvent_h(Complex zeta, double mu) {
  check_mu(mu);
  if (is_infinite(zeta)) fail(ErrorKind::InvalidParams, "zeta must be finite");
  const double radius = std::abs(zeta);
  if (radius == 0.0) fail(ErrorKind::BranchAmbiguity, "zeta = 0 is a branch point");
  const double x1 = support_endpoint(mu);
  if (zeta.imag() == 0.0 && zeta.real() > 0.0 && zeta.real() <= x1) {
    fail(ErrorKind::BranchAmbiguity, "zeta = " + std::to_string(zeta.real()) + " lies on the support");
  }
  // Truncation error of the series is about (x1 / |zeta|)^3 relative.
  const double r_series = 1e4 * x1;
  if (radius >= r_series) return large_zeta_series(zeta, mu);

  const Complex dir = zeta / radius;
  const Complex z_start = dir * r_series;
  const double a = 0.5 * (std::sqrt(1.0 + 4.0 / mu) - 1.0);
  const double b = (a * a * (1.0 - mu) + 3.0 * a) / (mu * (2.0 * a + 1.0));
  const Pick start = nearest_root(cubic_roots(scaled_cubic(z_start, mu)), a + b / z_start);
  if (!start.clear) fail(ErrorKind::BranchAmbiguity, "large-zeta root selection is ambiguous");

  const double r_switch = std::max(radius, x1);
  Complex y = advance(start.root, true, dir, r_series, r_switch, mu);
  if (radius == r_switch) return gamma_of(true, y, zeta);
  return advance(gamma_of(true, y, dir * r_switch), false, dir, r_switch, radius, mu);
}

Complex resolvent_h_real(double x, double mu) {
  check_mu(mu);
  const double x1 = support_endpoint(mu);
  if (x == 0.0) fail(ErrorKind::BranchAmbiguity, "x = 0 is a branch point");
  if (std::abs(x - x1) <= 1e-12 * x1) return closest_pair_mean(cubic_roots(cubic_coeffs(Complex(x1), mu)));
  if (x > 0.0 && x < x1) {
    const auto r = cubic_roots(cubic_coeffs(Complex(x), mu));
    Complex best(0.0, -kInf);
    for (const auto& g : r) {
      if (!is_infinite(g) && g.imag() > best.imag()) best = g;
    }
    return best;
  }
  return resolvent_h(Complex(x), mu);
}

Complex resolvent_h_physical(Complex z, double m0, double sigma_m, double sigma_k) {
  const AnalyticLaw law = scale_map(m0, sigma_m, sigma_k);
  return resolvent_h(z / law.omega0_sq, law.mu) / law.omega0_sq;
}

double p3(double x, double mu) {
  const double mu2 = mu * mu;
  const double mu3 = mu2 * mu;
  return (((mu + 4.0) * mu3 * x + 2.0 * mu2 * (mu2 + 2.0 * mu - 6.0)) * x + (mu3 - 4.0 * mu2 - 20.0 * mu + 12.0) * mu) *
             x -
         4.0 * (mu + 1.0) * (mu + 1.0) * (mu + 1.0);
}

double discriminant(double x, double mu) { return x * p3(x, mu); }

double support_endpoint(double mu) {
  check_mu(mu);
  const double mu2 = mu * mu;
  const double mu3 = mu2 * mu;
  const double mu7 = mu3 * mu3 * mu;
  const double xi = 2.0 * mu7 * (((((mu + 24.0) * mu + 264.0) * mu + 1574.0) * mu + 4806.0) * mu + 5832.0);
  const double root_delta = std::sqrt(432.0) * mu7 * (mu + 4.0) * std::pow(mu2 + 10.0 * mu + 27.0, 1.5);
  const double guess = (-2.0 * mu2 * (mu2 + 2.0 * mu - 6.0) + (std::cbrt(xi + root_delta) + std::cbrt(xi - root_delta)) / kCbrt2) /
                       (3.0 * mu3 * (mu + 4.0));

  // Safeguarded Newton on p3; p3 < 0 left of its single real root.
  double lo = 0.0;
  double hi = (std::isfinite(guess) && guess > 0.0) ? guess : 1.0;
  while (p3(hi, mu) < 0.0) {
    lo = hi;
    hi *= 2.0;
  }
  double x = (std::isfinite(guess) && guess > 0.0) ? guess : hi;
  if (p3(x, mu) < 0.0) lo = std::max(lo, x);
  for (int it = 0; it < 200; ++it) {
    const double f = p3(x, mu);
    if (f == 0.0) return x;
    if (f < 0.0) lo = std::max(lo, x);
    else hi = std::min(hi, x);
    const double mu2b = mu * mu;
    const double df = (3.0 * (mu + 4.0) * mu2b * mu * x + 4.0 * mu2b * (mu2b + 2.0 * mu - 6.0)) * x +
                      (mu2b * mu - 4.0 * mu2b - 20.0 * mu + 12.0) * mu;
    double next = x - f / df;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - x) <= 4.0 * std::numeric_limits<double>::epsilon() * x) return next;
    x = next;
  }
  return x;
}

double analytic_density(double x, double mu) {
  check_mu(mu);
  return density_closed_form(x, mu, support_endpoint(mu));
}

double density_from_cubic(double x, double mu) {
  check_mu(mu);
  const double x1 = support_endpoint(mu);
  if (!(x > 0.0) || !(x < x1)) return 0.0;
  double best = 0.0;
  for (const auto& g : cubic_roots(cubic_coeffs(Complex(x), mu))) {
    if (!is_infinite(g)) best = std::max(best, g.imag());
  }
  return best / kPi;
}

double physical_density(double omega_sq, const AnalyticLaw& law) {
  law.validate();
  return analytic_density(omega_sq / law.omega0_sq, law.mu) / law.omega0_sq;
}

double analytic_mass(double a, double b, double mu) {
  check_mu(mu);
  const double x1 = support_endpoint(mu);
  a = std::max(a, 0.0);
  b = std::min(b, x1);
  if (!(b > a)) return 0.0;
  double err = 0.0;
  double l1 = 0.0;
  // x = t^2 removes the inverse square root at the origin; u maps [sqrt a, sqrt b] onto [0, 1].
  const double ta = std::sqrt(a), span = std::sqrt(b) - ta;
  auto f = [&](double u) {
    const double t = ta + span * u;
    const double x = t * t;
    return span * (x < 1e-300 ? 2.0 * origin_coefficient(mu) : 2.0 * t * density_closed_form(x, mu, x1));
  };
  double value = 0.0;
  if (b <= 0.5 * x1) {
    // Smooth in t away from the upper edge.
    value = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, 0.0, 1.0, 15, 1e-12, &err, &l1);
  } else {
    thread_local boost::math::quadrature::tanh_sinh<double> integrator;
    value = integrator.integrate(f, 0.0, 1.0, 1e-12, &err, &l1);
  }
  if (!std::isfinite(value) || err > 1e-8 * std::max(l1, 1e-300)) {
    std::ostringstream msg;
    msg << "density integral over [" << a << ", " << b << "] did not converge (error estimate " << err << ")";
    fail(ErrorKind::QuadratureFailure, msg.str());
  }
  return value;
}

double origin_coefficient(double mu) {
  check_mu(mu);
  return std::sqrt(1.0 + mu) / kPi;
}

double edge_coefficient(double mu) {
  const double x1 = support_endpoint(mu);
  const CubicCoeffs c = cubic_coeffs(Complex(x1), mu);
  const Complex pair = closest_pair_mean(cubic_roots(c));

  // The double root also solves F_G = 0; take that quadratic's nearer root.
  const double q2 = 3.0 * c.c3.real();
  const double q1 = 2.0 * c.c2.real();
  const double q0 = c.c1.real();
  const double s = std::sqrt(std::max(q1 * q1 - 4.0 * q2 * q0, 0.0));
  const double q = -0.5 * (q1 + std::copysign(s, q1));
  const double ga = q / q2;
  const double gb = q0 / q;
  const double g = std::abs(ga - pair.real()) < std::abs(gb - pair.real()) ? ga : gb;

  const double fx = ((1.0 + 2.0 * x1) * g - ((2.0 + mu) + 2.0 * mu * x1)) * g * g + 2.0 * mu * g;
  const double fgg = 6.0 * c.c3.real() * g + 2.0 * c.c2.real();
  return std::sqrt(2.0 * std::abs(fx / fgg)) / kPi;
}

double edge_scale(double mu) { return std::pow(kPi * edge_coefficient(mu), -2.0 / 3.0); }

void analytic_density_grid_serial(double mu, std::span<const double> xs, std::span<double> out) {
  check_mu(mu);
  if (xs.size() != out.size()) fail(ErrorKind::InvalidParams, "density grid: size mismatch");
  const double x1 = support_endpoint(mu);
  for (std::size_t i = 0; i < xs.size(); ++i) out[i] = density_closed_form(xs[i], mu, x1);
}

void analytic_density_grid(double mu, std::span<const double> xs, std::span<double> out) {
  check_mu(mu);
  if (xs.size() != out.size()) fail(ErrorKind::InvalidParams, "density grid: size mismatch");
  const double x1 = support_endpoint(mu);
  const auto n = static_cast<std::ptrdiff_t>(xs.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = density_closed_form(xs[i], mu, x1);
}

}  // namespace vibra
