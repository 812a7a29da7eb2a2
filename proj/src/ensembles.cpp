#include "vibra/ensembles.hpp"

#include <cmath>
#include <fstream>
#include <string>

#include <json.hpp>

#include "vibra/error.hpp"

namespace vibra {

void EnsembleSpec::validate() const {
  std::string problems;
  if (n < 1) problems += " n must be >= 1;";
  if (!(sigma_m > 0.0)) problems += " sigma_m must be > 0;";
  if (!(sigma_k > 0.0)) problems += " sigma_k must be > 0;";
  if (!(m0 > 0.0)) problems += " m0 must be > 0;";
  if (!problems.empty()) fail(ErrorKind::InvalidParams, "ensemble:" + problems);
}

void PendulumParams::validate() const {
  const std::size_t count = lengths.size();
  if (count < 1) fail(ErrorKind::InvalidParams, "pendulum needs at least one segment");
  if (masses.size() != count || charges.size() != count + 1) {
    fail(ErrorKind::InvalidParams, "pendulum needs n lengths, n masses and n+1 charges");
  }
  for (std::size_t k = 0; k < count; ++k) {
    if (!(lengths[k] > 0.0)) fail(ErrorKind::InvalidParams, "segment length " + std::to_string(k + 1) + " must be > 0");
    if (!(masses[k] > 0.0)) fail(ErrorKind::InvalidParams, "mass " + std::to_string(k + 1) + " must be > 0");
  }
  for (std::size_t k = 0; k <= count; ++k) {
    if (!(charges[k] >= 0.0)) fail(ErrorKind::InvalidParams, "charge " + std::to_string(k) + " must be >= 0");
  }
  if (!(g >= 0.0)) fail(ErrorKind::InvalidParams, "gravity must be >= 0");
}

template <class Scalar>
Mat<Scalar> sample_ginibre(Eigen::Index n, double sigma, RngStream& stream) {
  Mat<Scalar> c(n, n);
  const double dn = static_cast<double>(n);
  if constexpr (std::is_same_v<Scalar, double>) {
    const double sd = sigma / std::sqrt(dn);
    for (Eigen::Index k = 0; k < c.size(); ++k) c.data()[k] = sd * stream.normal();
  } else {
    const double sd = sigma / std::sqrt(2.0 * dn);
    for (Eigen::Index k = 0; k < c.size(); ++k) {
      const double re = stream.normal();
      const double im = stream.normal();
      c.data()[k] = Complex(sd * re, sd * im);
    }
  }
  return c;
}

template <class Scalar>
PencilSystem<Scalar> build_wishart_pencil(const EnsembleSpec& spec, RngStream& stream) {
  PencilSystem<Scalar> p;
  {
    const Mat<Scalar> c1 = sample_ginibre<Scalar>(spec.n, spec.sigma_k, stream);
    linalg::gram(c1, 1.0, 0.0, p.stiffness);
  }
  {
    const Mat<Scalar> c2 = sample_ginibre<Scalar>(spec.n, spec.sigma_m, stream);
    linalg::gram(c2, 1.0, spec.m0, p.mass);
  }
  return p;
}

template Mat<double> sample_ginibre<double>(Eigen::Index, double, RngStream&);
template Mat<Complex> sample_ginibre<Complex>(Eigen::Index, double, RngStream&);
template PencilSystem<double> build_wishart_pencil<double>(const EnsembleSpec&, RngStream&);
template PencilSystem<Complex> build_wishart_pencil<Complex>(const EnsembleSpec&, RngStream&);

namespace {

// tail[i] = sum_{k >= i} m_k
std::vector<double> mass_tail(const std::vector<double>& masses) {
  std::vector<double> tail(masses.size() + 1, 0.0);
  for (std::size_t i = masses.size(); i-- > 0;) tail[i] = tail[i + 1] + masses[i];
  return tail;
}

void fill_mass(const PendulumParams& p, const std::vector<double>& tail, RealMat& m) {
  const auto n = static_cast<Eigen::Index>(p.n());
  m.resize(n, n);
#pragma omp parallel for schedule(static)
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      m(i, j) = p.lengths[i] * p.lengths[j] * tail[static_cast<std::size_t>(std::max(i, j))];
    }
  }
}

// Turns the symmetric pair-sum matrix Utilde (stored in u) into
// U = diag(row sums excluding the diagonal) - offdiag(Utilde).
void finish_coulomb(RealMat& u) {
  const Eigen::Index n = u.rows();
  std::vector<double> diag(static_cast<std::size_t>(n), 0.0);
#pragma omp parallel for schedule(static)
  for (Eigen::Index i = 0; i < n; ++i) {
    double s = 0.0;
    for (Eigen::Index k = 0; k < n; ++k) {
      if (k != i) s += u(k, i);
    }
    diag[static_cast<std::size_t>(i)] = s;
  }
#pragma omp parallel for schedule(static)
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) u(i, j) = (i == j) ? diag[static_cast<std::size_t>(i)] : -u(i, j);
  }
}

}  // namespace

RealMat coulomb_matrix(const PendulumParams& p) {
  p.validate();
  const auto n = static_cast<Eigen::Index>(p.n());
  const auto& l = p.lengths;
  const auto& q = p.charges;

  // pos[k] = l_1 + ... + l_k, so the span of segments a..b (1-based) is pos[b] - pos[a-1].
  std::vector<double> pos(p.n() + 1, 0.0);
  for (std::size_t k = 0; k < p.n(); ++k) pos[k + 1] = pos[k] + l[k];

  // Pair kernel for 0-based a <= b: Q_a Q_{b+1} / (l_{a+1} + ... + l_{b+1})^3,
  // i.e. wall/mass charge above segment a+1 against the mass below segment b+1.
  RealMat w = RealMat::Zero(n, n);

  // Row pass: w(a, j) = sum_{b >= j} pair(a, b)   (upper triangle, j >= a)
#pragma omp parallel for schedule(dynamic, 16)
  for (Eigen::Index a = 0; a < n; ++a) {
    const double qa = q[static_cast<std::size_t>(a)];
    double run = 0.0;
    for (Eigen::Index b = n - 1; b >= a; --b) {
      const double span = pos[static_cast<std::size_t>(b) + 1] - pos[static_cast<std::size_t>(a)];
      run += qa * q[static_cast<std::size_t>(b) + 1] / (span * span * span);
      w(a, b) = run;
    }
  }
  // Column pass: w(i, j) = sum_{a <= i} w(a, j), then scale by l_i l_j.
#pragma omp parallel for schedule(dynamic, 16)
  for (Eigen::Index j = 0; j < n; ++j) {
    double run = 0.0;
    for (Eigen::Index i = 0; i <= j; ++i) {
      run += w(i, j);
      w(i, j) = run * l[static_cast<std::size_t>(i)] * l[static_cast<std::size_t>(j)];
    }
  }
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = j + 1; i < n; ++i) w(i, j) = w(j, i);
  }
  finish_coulomb(w);
  return w;
}

RealPencil build_pendulum(const PendulumParams& p) {
  p.validate();
  const auto tail = mass_tail(p.masses);
  RealPencil out;
  fill_mass(p, tail, out.mass);
  out.stiffness = coulomb_matrix(p);
  for (std::size_t i = 0; i < p.n(); ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    out.stiffness(ii, ii) += p.lengths[i] * p.g * tail[i];
  }
  return out;
}

RealPencil build_pendulum_reference(const PendulumParams& p) {
  p.validate();
  const std::size_t n = p.n();
  const auto& l = p.lengths;
  const auto& m = p.masses;
  const auto& q = p.charges;
  RealPencil out;
  out.mass = RealMat::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  RealMat ut = RealMat::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));

  // 1-based indices as in the defining sums.
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= n; ++j) {
      double msum = 0.0;
      for (std::size_t k = std::max(i, j); k <= n; ++k) msum += m[k - 1];
      out.mass(static_cast<Eigen::Index>(i - 1), static_cast<Eigen::Index>(j - 1)) = l[i - 1] * l[j - 1] * msum;

      double usum = 0.0;
      for (std::size_t k = 1; k <= std::min(i, j); ++k) {
        for (std::size_t ll = std::max(i, j); ll <= n; ++ll) {
          double span = 0.0;
          for (std::size_t s = k; s <= ll; ++s) span += l[s - 1];
          usum += q[k - 1] * q[ll] / (span * span * span);
        }
      }
      ut(static_cast<Eigen::Index>(i - 1), static_cast<Eigen::Index>(j - 1)) = l[i - 1] * l[j - 1] * usum;
    }
  }

  out.stiffness = RealMat::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t i = 1; i <= n; ++i) {
    double row = 0.0;
    for (std::size_t k = 1; k <= n; ++k) {
      if (k != i) {
        row += ut(static_cast<Eigen::Index>(i - 1), static_cast<Eigen::Index>(k - 1));
        out.stiffness(static_cast<Eigen::Index>(i - 1), static_cast<Eigen::Index>(k - 1)) =
            -ut(static_cast<Eigen::Index>(i - 1), static_cast<Eigen::Index>(k - 1));
      }
    }
    double tail = 0.0;
    for (std::size_t k = i; k <= n; ++k) tail += m[k - 1];
    out.stiffness(static_cast<Eigen::Index>(i - 1), static_cast<Eigen::Index>(i - 1)) = row + l[i - 1] * p.g * tail;
  }
  return out;
}

namespace {

double charge_unit(std::size_t n, double calq) {
  if (calq == 0.0) return 0.0;
  if (n < 2) fail(ErrorKind::InvalidParams, "charged pendulum needs n >= 2 (charges scale with 1/sqrt(log n))");
  const double dn = static_cast<double>(n);
  return calq / (dn * std::sqrt(std::log(dn)));
}

}  // namespace

PendulumParams uniform_pendulum(std::size_t n, double calq, double g) {
  if (n < 1) fail(ErrorKind::InvalidParams, "pendulum needs n >= 1");
  if (calq < 0.0 || g < 0.0) fail(ErrorKind::InvalidParams, "charge scale and gravity must be >= 0");
  const double dn = static_cast<double>(n);
  PendulumParams p;
  p.lengths.assign(n, 1.0 / dn);
  p.masses.assign(n, 1.0 / dn);
  p.charges.assign(n + 1, charge_unit(n, calq));
  p.g = g;
  return p;
}

PendulumParams sample_disordered_pendulum(std::size_t n, double calq, double g, RngStream& stream) {
  if (n < 2) fail(ErrorKind::InvalidParams, "disordered pendulum needs n >= 2");
  if (calq < 0.0 || g < 0.0) fail(ErrorKind::InvalidParams, "charge scale and gravity must be >= 0");
  const double dn = static_cast<double>(n);
  const double unit = charge_unit(n, calq);
  PendulumParams p;
  p.g = g;
  p.lengths.resize(n);
  p.masses.resize(n);
  p.charges.resize(n + 1);
  for (auto& l : p.lengths) l = stream.uniform(0.8 / dn, 1.2 / dn);
  for (auto& m : p.masses) m = stream.uniform(0.5 / dn, 1.5 / dn);
  for (auto& q : p.charges) q = (stream.coin() ? 1.5 : 0.5) * unit;
  return p;
}

void to_json(nlohmann::json& j, const PendulumParams& p) {
  j = nlohmann::json{{"n", p.n()}, {"g", p.g}, {"lengths", p.lengths}, {"masses", p.masses}, {"charges", p.charges}};
}

void from_json(const nlohmann::json& j, PendulumParams& p) {
  j.at("g").get_to(p.g);
  j.at("lengths").get_to(p.lengths);
  j.at("masses").get_to(p.masses);
  j.at("charges").get_to(p.charges);
  if (j.contains("n") && j.at("n").get<std::size_t>() != p.lengths.size()) {
    fail(ErrorKind::InvalidParams, "pendulum file: n does not match the number of lengths");
  }
}

PendulumParams load_pendulum(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Io, "cannot open pendulum file " + path.string());
  PendulumParams p;
  try {
    p = nlohmann::json::parse(in).get<PendulumParams>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::InvalidParams, "pendulum file " + path.string() + ": " + e.what());
  }
  p.validate();
  return p;
}

void save_pendulum(const PendulumParams& params, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::Io, "cannot write pendulum file " + path.string());
  out << nlohmann::json(params).dump(2) << '\n';
}

}  // namespace vibra
