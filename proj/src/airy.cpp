#include "vibra/airy.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "vibra/error.hpp"

namespace vibra {
namespace {

constexpr double kSwitch = 5.5;

// One Taylor step of y'' = x y from x0 by h.
AiryValue taylor_step(double x0, AiryValue y, double h) {
  double a_prev2 = 0.0;  // a_{k-1}
  double a_prev = y.ai;  // a_k
  double a_cur = y.aip;  // a_{k+1}
  double hp = h;         // h^{k+1}
  double val = y.ai + y.aip * h;
  double der = y.aip;
  int quiet = 0;
  for (int k = 0; k < 400; ++k) {
    // a_{k+2} = (x0 a_k + a_{k-1}) / ((k+2)(k+1))
    const double a_next = (x0 * a_prev + a_prev2) / ((k + 2.0) * (k + 1.0));
    const double dterm = (k + 2.0) * a_next * hp;
    hp *= h;
    const double term = a_next * hp;
    val += term;
    der += dterm;
    if (std::abs(term) <= 1e-18 * (1.0 + std::abs(val)) && std::abs(dterm) <= 1e-18 * (1.0 + std::abs(der))) {
      if (++quiet >= 3) break;
    } else {
      quiet = 0;
    }
    a_prev2 = a_prev;
    a_prev = a_cur;
    a_cur = a_next;
  }
  return {val, der};
}

AiryValue at_origin() {
  return {std::pow(3.0, -2.0 / 3.0) / std::tgamma(2.0 / 3.0), -std::pow(3.0, -1.0 / 3.0) / std::tgamma(1.0 / 3.0)};
}

AiryValue asymptotic_positive(double x) {
  const double zeta = 2.0 / 3.0 * x * std::sqrt(x);
  double u = 1.0;
  double sum_u = 1.0;
  double sum_v = 1.0;
  double last = 1.0;
  for (int k = 1; k < 60; ++k) {
    u *= (6.0 * k - 5.0) * (6.0 * k - 3.0) * (6.0 * k - 1.0) / ((2.0 * k - 1.0) * 216.0 * k);
    const double v = -(6.0 * k + 1.0) / (6.0 * k - 1.0) * u;
    const double scale = std::pow(zeta, -k) * ((k % 2) ? -1.0 : 1.0);
    const double term = u * scale;
    if (std::abs(term) > last) break;
    sum_u += term;
    sum_v += v * scale;
    last = std::abs(term);
    if (last < 1e-17) break;
  }
  const double pre = std::exp(-zeta) / (2.0 * std::sqrt(std::numbers::pi));
  const double q = std::sqrt(std::sqrt(x));
  return {pre / q * sum_u, -pre * q * sum_v};
}

}  // namespace

AiryValue airy_ai(double eta) {
  if (!(eta >= kAiryWindowLo && eta <= kAiryWindowHi)) {
    fail(ErrorKind::OutOfWindow, "Airy evaluation outside [-12, 8]: " + std::to_string(eta));
  }
  if (eta > kSwitch) return asymptotic_positive(eta);
  if (eta >= -kSwitch) return taylor_step(0.0, at_origin(), eta);

  AiryValue y = taylor_step(0.0, at_origin(), -kSwitch);
  const int steps = static_cast<int>(std::ceil((-kSwitch - eta) / 0.5));
  const double h = (eta + kSwitch) / steps;
  double x = -kSwitch;
  for (int s = 0; s < steps; ++s) {
    y = taylor_step(x, y, h);
    x = -kSwitch + (s + 1) * h;
  }
  return y;
}

double airy_density(double eta) {
  const AiryValue v = airy_ai(eta);
  return v.aip * v.aip - eta * v.ai * v.ai;
}

}  // namespace vibra
