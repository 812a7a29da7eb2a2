#pragma once

// Airy function Ai and its derivative on the window [-12, 8], absolute
// accuracy about 1e-12. Power series about 0 for |eta| <= 5.5, the large-
// argument expansion above, and Taylor stepping of y'' = eta y below.

namespace vibra {

inline constexpr double kAiryWindowLo = -12.0;
inline constexpr double kAiryWindowHi = 8.0;

struct AiryValue {
  double ai = 0.0;
  double aip = 0.0;
};

AiryValue airy_ai(double eta);

/// Diagonal of the Airy kernel, Ai'(eta)^2 - eta Ai(eta)^2.
double airy_density(double eta);

}  // namespace vibra
