#pragma once

// Generalized hermitian eigenproblems K A = w M A for mass/stiffness pencils.
//
// The reduction to a standard hermitian problem uses the Cholesky factor
// M = L L^H rather than the symmetric square root of M:
//     h = L^{-1} K L^{-H},   A = L^{-H} v.
// Both are similarity reductions of H = M^{-1} K, so the spectra agree; the
// back-transformed amplitudes differ from the square-root route by a
// column scaling, which is removed by renormalizing every A to unit norm.
// M^{-1} is never formed explicitly outside build_liouvillian.

#include <vector>

#include "vibra/linalg.hpp"

namespace vibra {

template <class Scalar>
struct PencilSystem {
  Mat<Scalar> mass;       // M, hermitian positive definite
  Mat<Scalar> stiffness;  // K, hermitian positive semi-definite

  Eigen::Index n() const { return mass.rows(); }
  static constexpr Field field = field_of<Scalar>;
};

using RealPencil = PencilSystem<double>;
using ComplexPencil = PencilSystem<Complex>;

template <class Scalar>
struct ModeSpectrum {
  std::vector<double> omega_sq;  // ascending
  Mat<Scalar> vectors;           // column a is A_a, unit standard norm
};

struct QuasiHermitianReport {
  double intertwining = 0.0;   // |H^H M - M H|_1 / |K|_1
  double negative_part = 0.0;  // max(0, -min omega_sq)
  double mode_residual = 0.0;  // max_a |K A - w M A| / (|K| + w |M|)

  bool within(double tol) const {
    return intertwining <= tol && negative_part <= tol && mode_residual <= tol;
  }
};

inline constexpr double kDefaultTolerance = 1e-10;

/// Shape and hermiticity checks; positivity is established by the solvers.
template <class Scalar>
void validate(const PencilSystem<Scalar>& p);

template <class Scalar>
Mat<Scalar> cholesky_factor(const Mat<Scalar>& m);

template <class Scalar>
Mat<Scalar> reduce_to_hermitian(const PencilSystem<Scalar>& p);

template <class Scalar>
ModeSpectrum<Scalar> solve_modes(const PencilSystem<Scalar>& p);

/// Eigenvalues only; the Monte Carlo hot path.
template <class Scalar>
std::vector<double> solve_omega_sq(const PencilSystem<Scalar>& p);

/// Clamps roundoff negatives in [-n ulp |h|, 0) to zero. Anything further
/// below zero means K was not positive semi-definite.
void clamp_spectrum(std::vector<double>& omega_sq);

template <class Scalar>
QuasiHermitianReport check_quasi_hermitian(const PencilSystem<Scalar>& p, const ModeSpectrum<Scalar>& spectrum);

/// The phase-space generator [[0, M^{-1}], [-K, 0]] (2n x 2n).
template <class Scalar>
Mat<Scalar> build_liouvillian(const PencilSystem<Scalar>& p);

/// Eigenvalues of a general square matrix, sorted by imaginary part.
template <class Scalar>
std::vector<Complex> general_eigenvalues(const Mat<Scalar>& a);

}  // namespace vibra
