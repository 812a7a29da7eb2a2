#include "vibra/pencil.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Eigenvalues>

#include "vibra/error.hpp"

namespace vibra {
namespace {

template <class Scalar>
double hermitian_defect(const Mat<Scalar>& a) {
  return (a - a.adjoint()).cwiseAbs().maxCoeff();
}

}  // namespace

template <class Scalar>
void validate(const PencilSystem<Scalar>& p) {
  if (p.mass.rows() != p.mass.cols() || p.stiffness.rows() != p.stiffness.cols() ||
      p.mass.rows() != p.stiffness.rows()) {
    fail(ErrorKind::InvalidParams, "pencil matrices must be square and of equal size");
  }
  if (p.n() == 0) fail(ErrorKind::InvalidParams, "pencil dimension must be at least 1");
  const double n = static_cast<double>(p.n());
  const double eps = std::numeric_limits<double>::epsilon();
  if (hermitian_defect(p.mass) > 16.0 * n * eps * std::max(linalg::norm1(p.mass), 1e-300)) {
    fail(ErrorKind::InvalidParams, "mass matrix is not hermitian");
  }
  if (hermitian_defect(p.stiffness) > 16.0 * n * eps * std::max(linalg::norm1(p.stiffness), 1e-300)) {
    fail(ErrorKind::InvalidParams, "stiffness matrix is not hermitian");
  }
}

template <class Scalar>
Mat<Scalar> cholesky_factor(const Mat<Scalar>& m) {
  Mat<Scalar> l = m;
  linalg::cholesky_lower(l);
  return l;
}

template <class Scalar>
Mat<Scalar> reduce_to_hermitian(const PencilSystem<Scalar>& p) {
  validate(p);
  const Mat<Scalar> l = cholesky_factor(p.mass);
  Mat<Scalar> h = p.stiffness;
  linalg::reduce_generalized(h, l);
  return h;
}

void clamp_spectrum(std::vector<double>& omega_sq) {
  if (omega_sq.empty()) return;
  const auto [lo, hi] = std::minmax_element(omega_sq.begin(), omega_sq.end());
  const double scale = std::max(std::abs(*lo), std::abs(*hi));
  const double floor =
      -static_cast<double>(omega_sq.size()) * std::numeric_limits<double>::epsilon() * scale;
  for (double& w : omega_sq) {
    if (w < floor) {
      fail(ErrorKind::IndefiniteStiffness,
           "negative squared frequency " + std::to_string(w) + " below roundoff floor " + std::to_string(floor));
    }
    if (w < 0.0) w = 0.0;
  }
}

template <class Scalar>
ModeSpectrum<Scalar> solve_modes(const PencilSystem<Scalar>& p) {
  validate(p);
  const Mat<Scalar> l = cholesky_factor(p.mass);
  Mat<Scalar> h = p.stiffness;
  linalg::reduce_generalized(h, l);

  ModeSpectrum<Scalar> out;
  out.omega_sq = linalg::eigensystem_hermitian(h);
  clamp_spectrum(out.omega_sq);
  linalg::solve_lower_adjoint(l, h);
  h.colwise().normalize();
  out.vectors = std::move(h);
  return out;
}

template <class Scalar>
std::vector<double> solve_omega_sq(const PencilSystem<Scalar>& p) {
  if (p.mass.rows() != p.stiffness.rows()) fail(ErrorKind::InvalidParams, "pencil size mismatch");
  Mat<Scalar> l = p.mass;
  linalg::cholesky_lower(l);
  Mat<Scalar> h = p.stiffness;
  linalg::reduce_generalized(h, l);
  auto w = linalg::eigenvalues_hermitian(h);
  clamp_spectrum(w);
  return w;
}

template <class Scalar>
QuasiHermitianReport check_quasi_hermitian(const PencilSystem<Scalar>& p, const ModeSpectrum<Scalar>& spectrum) {
  QuasiHermitianReport report;
  const Mat<Scalar> l = cholesky_factor(p.mass);

  // H = M^{-1} K = L^{-H} L^{-1} K
  Mat<Scalar> hm = p.stiffness;
  linalg::solve_lower(l, hm);
  linalg::solve_lower_adjoint(l, hm);
  const Mat<Scalar> defect = hm.adjoint() * p.mass - p.mass * hm;
  const double k_norm = linalg::norm1(p.stiffness);
  report.intertwining = k_norm > 0.0 ? linalg::norm1(defect) / k_norm : linalg::norm1(defect);

  for (double w : spectrum.omega_sq) report.negative_part = std::max(report.negative_part, -w);

  const double m_norm = linalg::norm1(p.mass);
  const Mat<Scalar> ka = p.stiffness * spectrum.vectors;
  const Mat<Scalar> ma = p.mass * spectrum.vectors;
  for (Eigen::Index a = 0; a < spectrum.vectors.cols(); ++a) {
    const double w = spectrum.omega_sq[static_cast<std::size_t>(a)];
    const double r = (ka.col(a) - w * ma.col(a)).norm() / (k_norm + w * m_norm);
    report.mode_residual = std::max(report.mode_residual, r);
  }
  return report;
}

template <class Scalar>
Mat<Scalar> build_liouvillian(const PencilSystem<Scalar>& p) {
  validate(p);
  const Eigen::Index n = p.n();
  const Mat<Scalar> l = cholesky_factor(p.mass);
  Mat<Scalar> m_inv = Mat<Scalar>::Identity(n, n);
  linalg::solve_lower(l, m_inv);
  linalg::solve_lower_adjoint(l, m_inv);

  Mat<Scalar> out = Mat<Scalar>::Zero(2 * n, 2 * n);
  out.topRightCorner(n, n) = m_inv;
  out.bottomLeftCorner(n, n) = -p.stiffness;
  return out;
}

template <class Scalar>
std::vector<Complex> general_eigenvalues(const Mat<Scalar>& a) {
  Eigen::ComplexEigenSolver<ComplexMat> solver(a.template cast<Complex>(), false);
  if (solver.info() != Eigen::Success) fail(ErrorKind::EigenFailure, "general eigensolver did not converge");
  std::vector<Complex> out(solver.eigenvalues().data(), solver.eigenvalues().data() + solver.eigenvalues().size());
  std::sort(out.begin(), out.end(), [](Complex x, Complex y) { return x.imag() < y.imag(); });
  return out;
}

#define VIBRA_INSTANTIATE(S)                                                                           \
  template void validate<S>(const PencilSystem<S>&);                                                   \
  template Mat<S> cholesky_factor<S>(const Mat<S>&);                                                   \
  template Mat<S> reduce_to_hermitian<S>(const PencilSystem<S>&);                                      \
  template ModeSpectrum<S> solve_modes<S>(const PencilSystem<S>&);                                     \
  template std::vector<double> solve_omega_sq<S>(const PencilSystem<S>&);                              \
  template QuasiHermitianReport check_quasi_hermitian<S>(const PencilSystem<S>&, const ModeSpectrum<S>&); \
  template Mat<S> build_liouvillian<S>(const PencilSystem<S>&);                                        \
  template std::vector<Complex> general_eigenvalues<S>(const Mat<S>&);

VIBRA_INSTANTIATE(double)
VIBRA_INSTANTIATE(Complex)
#undef VIBRA_INSTANTIATE

}  // namespace vibra
