#pragma once

// Pencil generators: Wishart-type random pencils and multi-segmented pendula.

#include <cstdint>
#include <filesystem>
#include <vector>

#include <json.hpp>

#include "vibra/pencil.hpp"
#include "vibra/rng.hpp"

namespace vibra {

/// K = C1^H C1 with Var scale sigma_k, M = C2^H C2 + m0 with scale sigma_m.
struct EnsembleSpec {
  Eigen::Index n = 0;
  double sigma_m = 1.0;
  double sigma_k = 1.0;
  double m0 = 1.0;
  Field field = Field::Complex;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Segment k hangs from hinge k-1; charges[0] sits on the wall and
/// charges[k] (k >= 1) on mass k. Reduced units throughout.
struct PendulumParams {
  std::vector<double> lengths;  // l_1..l_n
  std::vector<double> masses;   // m_1..m_n
  std::vector<double> charges;  // Q_0..Q_n
  double g = 0.0;

  std::size_t n() const { return lengths.size(); }
  void validate() const;
};

/// i.i.d. Gaussian entries with E|C_ij|^2 = sigma^2 / n (real and imaginary
/// parts each carry half the variance in the complex case). Entries are drawn
/// column by column, real part before imaginary part.
template <class Scalar>
Mat<Scalar> sample_ginibre(Eigen::Index n, double sigma, RngStream& stream);

/// Draws C1 (stiffness factor) first, then C2 (mass factor).
template <class Scalar>
PencilSystem<Scalar> build_wishart_pencil(const EnsembleSpec& spec, RngStream& stream);

/// O(n^2) builder. Row and column passes run under OpenMP.
RealPencil build_pendulum(const PendulumParams& params);

/// Direct evaluation of the nested charge sums, O(n^5). Serial; for tests.
RealPencil build_pendulum_reference(const PendulumParams& params);

/// The Coulomb part U of the stiffness matrix alone (g = 0).
RealMat coulomb_matrix(const PendulumParams& params);

/// l_k = m_k = 1/n, Q_k = calq / (n sqrt(log n)) for k = 0..n.
PendulumParams uniform_pendulum(std::size_t n, double calq, double g);

/// l_k ~ U(0.8/n, 1.2/n), m_k ~ U(0.5/n, 1.5/n), Q_k in {0.5, 1.5} calq/(n sqrt(log n))
/// with equal probability (wall charge included). Draw order: all lengths,
/// all masses, then Q_0..Q_n.
PendulumParams sample_disordered_pendulum(std::size_t n, double calq, double g, RngStream& stream);

void to_json(nlohmann::json& j, const PendulumParams& p);
void from_json(const nlohmann::json& j, PendulumParams& p);

PendulumParams load_pendulum(const std::filesystem::path& path);
void save_pendulum(const PendulumParams& params, const std::filesystem::path& path);

}  // namespace vibra
