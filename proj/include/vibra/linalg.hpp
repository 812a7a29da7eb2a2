#pragma once

// Thin, typed wrappers over the LAPACK/BLAS routines the solvers need.
// Matrices are Eigen column-major; routines touching hermitian input read the
// lower triangle only, and every routine returning a hermitian matrix fills
// both triangles.

#include <complex>
#include <string_view>
#include <type_traits>
#include <vector>

#include <Eigen/Dense>

namespace vibra {

enum class Field { Real, Complex };

std::string_view to_string(Field f);
Field parse_field(std::string_view s);

template <class Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <class Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Complex = std::complex<double>;
using RealMat = Mat<double>;
using ComplexMat = Mat<Complex>;

template <class Scalar>
inline constexpr Field field_of = std::is_same_v<Scalar, double> ? Field::Real : Field::Complex;

namespace linalg {

/// In place: a <- L with a = L L^H. The strict upper triangle is zeroed.
/// Throws NotPositiveDefinite naming the failing pivot.
template <class Scalar>
void cholesky_lower(Mat<Scalar>& a);

/// In place: k <- L^{-1} k L^{-H} for a lower Cholesky factor L.
template <class Scalar>
void reduce_generalized(Mat<Scalar>& k, const Mat<Scalar>& chol);

/// Eigenvalues only (two-stage tridiagonal reduction). Destroys h.
template <class Scalar>
std::vector<double> eigenvalues_hermitian(Mat<Scalar>& h);

/// Eigenvalues ascending; h is overwritten with the orthonormal eigenvectors.
template <class Scalar>
std::vector<double> eigensystem_hermitian(Mat<Scalar>& h);

/// b <- L^{-H} b.
template <class Scalar>
void solve_lower_adjoint(const Mat<Scalar>& chol, Mat<Scalar>& b);

/// b <- L^{-1} b.
template <class Scalar>
void solve_lower(const Mat<Scalar>& chol, Mat<Scalar>& b);

/// out <- alpha C^H C + shift I, both triangles filled.
template <class Scalar>
void gram(const Mat<Scalar>& c, double alpha, double shift, Mat<Scalar>& out);

/// Mirrors the lower triangle into the upper one (conjugated).
template <class Scalar>
void mirror_lower(Mat<Scalar>& a);

/// Induced 1-norm (max column sum of moduli).
template <class Scalar>
double norm1(const Mat<Scalar>& a) {
  return a.size() == 0 ? 0.0 : a.cwiseAbs().colwise().sum().maxCoeff();
}

/// Compares real dgemm and dtrsm against naive loops at sizes that exercise
/// the blocked kernels. True when both agree to 1e-10.
bool blas_self_check();

/// Call first thing in main. When blas_self_check fails and
/// OPENBLAS_CORETYPE is unset, re-executes the process with
/// OPENBLAS_CORETYPE=SkylakeX; when it still fails, throws EigenFailure.
void ensure_working_blas(char** argv);

/// Pins the BLAS thread pool for the lifetime of the scope.
class BlasThreadScope {
 public:
  explicit BlasThreadScope(int threads);
  ~BlasThreadScope();
  BlasThreadScope(const BlasThreadScope&) = delete;
  BlasThreadScope& operator=(const BlasThreadScope&) = delete;

 private:
  int saved_;
};

}  // namespace linalg
}  // namespace vibra
