#include "vibra/linalg.hpp"

#include <complex>
#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>
#include <cblas.h>

#include <cstdlib>
#include <string>

#include <unistd.h>

#include "vibra/error.hpp"

namespace vibra {

std::string_view to_string(Field f) { return f == Field::Real ? "real" : "complex"; }

Field parse_field(std::string_view s) {
  if (s == "real") return Field::Real;
  if (s == "complex") return Field::Complex;
  fail(ErrorKind::Validation, "field must be 'real' or 'complex', got '" + std::string(s) + "'");
}

namespace linalg {
namespace {

lapack_int dim(Eigen::Index n) { return static_cast<lapack_int>(n); }

void check_square(Eigen::Index rows, Eigen::Index cols, const char* what) {
  if (rows != cols) fail(ErrorKind::InvalidParams, std::string(what) + ": matrix is not square");
}

}  // namespace

template <class Scalar>
void mirror_lower(Mat<Scalar>& a) {
  const Eigen::Index n = a.rows();
  for (Eigen::Index j = 0; j < n; ++j) {
    if constexpr (std::is_same_v<Scalar, Complex>) a(j, j) = Complex(a(j, j).real(), 0.0);
    for (Eigen::Index i = j + 1; i < n; ++i) {
      if constexpr (std::is_same_v<Scalar, Complex>) {
        a(j, i) = std::conj(a(i, j));
      } else {
        a(j, i) = a(i, j);
      }
    }
  }
}

template <class Scalar>
void cholesky_lower(Mat<Scalar>& a) {
  check_square(a.rows(), a.cols(), "cholesky");
  const lapack_int n = dim(a.rows());
  if (n == 0) return;
  lapack_int info;
  if constexpr (std::is_same_v<Scalar, double>) {
    info = LAPACKE_dpotrf(LAPACK_COL_MAJOR, 'L', n, a.data(), n);
  } else {
    info = LAPACKE_zpotrf(LAPACK_COL_MAJOR, 'L', n, a.data(), n);
  }
  if (info > 0) {
    fail(ErrorKind::NotPositiveDefinite,
         "mass matrix is not positive definite (pivot " + std::to_string(info) + ")");
  }
  if (info < 0) fail(ErrorKind::EigenFailure, "potrf: illegal argument " + std::to_string(-info));
  a.template triangularView<Eigen::StrictlyUpper>().setZero();
}

template <class Scalar>
void reduce_generalized(Mat<Scalar>& k, const Mat<Scalar>& chol) {
  check_square(k.rows(), k.cols(), "reduce");
  const lapack_int n = dim(k.rows());
  if (n == 0) return;
  lapack_int info;
  if constexpr (std::is_same_v<Scalar, double>) {
    info = LAPACKE_dsygst(LAPACK_COL_MAJOR, 1, 'L', n, k.data(), n, chol.data(), n);
  } else {
    info = LAPACKE_zhegst(LAPACK_COL_MAJOR, 1, 'L', n, k.data(), n, chol.data(), n);
  }
  if (info != 0) fail(ErrorKind::EigenFailure, "hegst failed: info " + std::to_string(info));
  mirror_lower(k);
}

template <class Scalar>
std::vector<double> eigenvalues_hermitian(Mat<Scalar>& h) {
  check_square(h.rows(), h.cols(), "eigenvalues");
  const lapack_int n = dim(h.rows());
  std::vector<double> w(static_cast<std::size_t>(n));
  if (n == 0) return w;
  lapack_int info;
  if constexpr (std::is_same_v<Scalar, double>) {
    info = LAPACKE_dsyev_2stage(LAPACK_COL_MAJOR, 'N', 'L', n, h.data(), n, w.data());
  } else {
    info = LAPACKE_zheev_2stage(LAPACK_COL_MAJOR, 'N', 'L', n, h.data(), n, w.data());
  }
  if (info != 0) fail(ErrorKind::EigenFailure, "heev_2stage did not converge: info " + std::to_string(info));
  return w;
}

template <class Scalar>
std::vector<double> eigensystem_hermitian(Mat<Scalar>& h) {
  check_square(h.rows(), h.cols(), "eigensystem");
  const lapack_int n = dim(h.rows());
  std::vector<double> w(static_cast<std::size_t>(n));
  if (n == 0) return w;
  lapack_int info;
  if constexpr (std::is_same_v<Scalar, double>) {
    info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'L', n, h.data(), n, w.data());
  } else {
    info = LAPACKE_zheevd(LAPACK_COL_MAJOR, 'V', 'L', n, h.data(), n, w.data());
  }
  if (info != 0) fail(ErrorKind::EigenFailure, "heevd did not converge: info " + std::to_string(info));
  return w;
}

template <class Scalar>
void solve_lower_adjoint(const Mat<Scalar>& chol, Mat<Scalar>& b) {
  const int n = static_cast<int>(chol.rows());
  const int m = static_cast<int>(b.cols());
  if (n == 0 || m == 0) return;
  if constexpr (std::is_same_v<Scalar, double>) {
    cblas_dtrsm(CblasColMajor, CblasLeft, CblasLower, CblasTrans, CblasNonUnit, n, m, 1.0, chol.data(), n,
                b.data(), n);
  } else {
    const Complex one(1.0, 0.0);
    cblas_ztrsm(CblasColMajor, CblasLeft, CblasLower, CblasConjTrans, CblasNonUnit, n, m, &one, chol.data(), n,
                b.data(), n);
  }
}

template <class Scalar>
void solve_lower(const Mat<Scalar>& chol, Mat<Scalar>& b) {
  const int n = static_cast<int>(chol.rows());
  const int m = static_cast<int>(b.cols());
  if (n == 0 || m == 0) return;
  if constexpr (std::is_same_v<Scalar, double>) {
    cblas_dtrsm(CblasColMajor, CblasLeft, CblasLower, CblasNoTrans, CblasNonUnit, n, m, 1.0, chol.data(), n,
                b.data(), n);
  } else {
    const Complex one(1.0, 0.0);
    cblas_ztrsm(CblasColMajor, CblasLeft, CblasLower, CblasNoTrans, CblasNonUnit, n, m, &one, chol.data(), n,
                b.data(), n);
  }
}

template <class Scalar>
void gram(const Mat<Scalar>& c, double alpha, double shift, Mat<Scalar>& out) {
  const int n = static_cast<int>(c.cols());
  const int k = static_cast<int>(c.rows());
  out.resize(n, n);
  out.setZero();
  if (n > 0 && k > 0) {
    if constexpr (std::is_same_v<Scalar, double>) {
      cblas_dsyrk(CblasColMajor, CblasLower, CblasTrans, n, k, alpha, c.data(), k, 0.0, out.data(), n);
    } else {
      cblas_zherk(CblasColMajor, CblasLower, CblasConjTrans, n, k, alpha, c.data(), k, 0.0, out.data(), n);
    }
  }
  for (int i = 0; i < n; ++i) out(i, i) += shift;
  mirror_lower(out);
}

bool blas_self_check() {
  constexpr int n = 96;
  RealMat a(n, n), b(n, n), c(n, n), ref = RealMat::Zero(n, n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      a(i, j) = std::sin(0.37 * i + 1.3 * j);
      b(i, j) = std::cos(0.11 * i - 0.7 * j);
    }
  }
  cblas_dgemm(CblasColMajor, CblasNoTrans, CblasNoTrans, n, n, n, 1.0, a.data(), n, b.data(), n, 0.0, c.data(), n);
  for (int j = 0; j < n; ++j) {
    for (int k = 0; k < n; ++k) {
      for (int i = 0; i < n; ++i) ref(i, j) += a(i, k) * b(k, j);
    }
  }
  double err = (c - ref).cwiseAbs().maxCoeff();

  RealMat l = a.triangularView<Eigen::Lower>();
  l.diagonal().array() += 10.0;
  RealMat x = b;
  cblas_dtrsm(CblasColMajor, CblasLeft, CblasLower, CblasNoTrans, CblasNonUnit, n, n, 1.0, l.data(), n, x.data(), n);
  RealMat back = RealMat::Zero(n, n);
  for (int j = 0; j < n; ++j) {
    for (int k = 0; k < n; ++k) {
      for (int i = k; i < n; ++i) back(i, j) += l(i, k) * x(k, j);
    }
  }
  err = std::max(err, (back - b).cwiseAbs().maxCoeff());
  return err < 1e-10;
}

void ensure_working_blas(char** argv) {
  if (blas_self_check()) return;
  if (std::getenv("OPENBLAS_CORETYPE") == nullptr && argv != nullptr) {
    ::setenv("OPENBLAS_CORETYPE", "SkylakeX", 1);
    ::execv("/proc/self/exe", argv);
  }
  fail(ErrorKind::EigenFailure, "BLAS self-check failed (real dgemm/dtrsm give wrong results)");
}

BlasThreadScope::BlasThreadScope(int threads) : saved_(openblas_get_num_threads()) {
  openblas_set_num_threads(threads);
}

BlasThreadScope::~BlasThreadScope() { openblas_set_num_threads(saved_); }

#define VIBRA_INSTANTIATE(S)                                                            \
  template void mirror_lower<S>(Mat<S>&);                                               \
  template void cholesky_lower<S>(Mat<S>&);                                             \
  template void reduce_generalized<S>(Mat<S>&, const Mat<S>&);                          \
  template std::vector<double> eigenvalues_hermitian<S>(Mat<S>&);                       \
  template std::vector<double> eigensystem_hermitian<S>(Mat<S>&);                       \
  template void solve_lower_adjoint<S>(const Mat<S>&, Mat<S>&);                         \
  template void solve_lower<S>(const Mat<S>&, Mat<S>&);                                 \
  template void gram<S>(const Mat<S>&, double, double, Mat<S>&);

VIBRA_INSTANTIATE(double)
VIBRA_INSTANTIATE(Complex)
#undef VIBRA_INSTANTIATE

}  // namespace linalg
}  // namespace vibra
