#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "vibra/histogram.hpp"
#include "vibra/linalg.hpp"

namespace vibra {

/// (sum |A|^2)^2 / (N sum |A|^4); equals 1/(N sum |A|^4) for unit A.
template <class Scalar>
double participation_ratio(const Eigen::Ref<const Vec<Scalar>>& a);

/// Mean participation ratio per bin of a spectral axis.
class PrCurve {
 public:
  PrCurve() = default;
  PrCurve(double lo, double hi, std::size_t bins, Axis axis);

  void add(double position, double p);
  void merge(const PrCurve& other);

  const SpectralHistogram& occupancy() const { return occupancy_; }
  const std::vector<double>& sums() const { return sums_; }
  /// Mean p per bin; NaN for empty bins.
  std::vector<double> mean() const;
  double overall_mean() const;
  std::int64_t total() const { return occupancy_.in_range(); }

  bool operator==(const PrCurve& other) const = default;

 private:
  SpectralHistogram occupancy_;
  std::vector<double> sums_;
};

struct RegionCuts {
  double r1 = 0.0;
  double r2 = 0.0;
};

/// Half-maximum crossings around the main peak of the 5-bin moving average
/// of the mean PR curve, linearly interpolated between bin centers. The main
/// peak is the maximum after the leading descent, if the curve starts with one.
RegionCuts fwhm_cuts(const PrCurve& curve);

enum class Region { Low, Mid, High, All };
std::string_view to_string(Region r);

/// Mean number of modes below omega per sample, from a pooled histogram:
/// linear interpolation of the cumulative count at bin edges.
class Unfolding {
 public:
  Unfolding(const SpectralHistogram& pooled, double samples);
  double operator()(double omega) const;

 private:
  double lo_, width_;
  std::vector<double> cumulative_;
};

struct SpacingSample {
  std::vector<double> s;
  std::vector<Region> region;

  std::size_t count(Region r) const;
  std::vector<double> values(Region r) const;
  double mean(Region r) const;
};

/// s_k = F(omega_{k+1}) - F(omega_k) for each sorted sample, tagged by where
/// the midpoint falls relative to the cuts (Low < r1 <= Mid <= r2 < High).
/// Pass no cuts to tag everything All.
SpacingSample unfold_spacings(std::span<const std::vector<double>> sorted_samples, const Unfolding& unfold,
                              const RegionCuts* cuts);

/// Throws InsufficientData if any of the listed regions holds < min_count spacings.
void require_spacings(const SpacingSample& sample, std::span<const Region> regions, std::size_t min_count = 100);

SpectralHistogram spacing_histogram(const SpacingSample& sample, Region r, double width = 0.1, double s_max = 5.0);

/// max_i |density_i - (exp(-a_i) - exp(-b_i)) / width| over bins [a_i, b_i).
double poisson_sup_deviation(const SpectralHistogram& spacing_hist);

/// Share of spacings below s (empirical probability, not a density).
double fraction_below(const SpacingSample& sample, Region r, double s);

struct EdgeFit {
  double r = 0.0;
  double gof = 0.0;
  std::vector<double> eta;
  std::vector<double> rho_edge;
  std::vector<double> rho_airy;
};

inline constexpr double kEdgeEtaLo = -6.0;
inline constexpr double kEdgeEtaHi = 3.0;
inline constexpr double kEdgeEtaStep = 0.25;
inline constexpr double kDefaultMaxGof = 0.2;

/// Window x1 +- 8 r_pilot N^{-2/3} for the dedicated edge histogram.
SpectralHistogram make_edge_histogram(double x1, double r_pilot, std::size_t n, std::size_t bins = 320);

/// Least-squares r over [0.5, 1.3] r_pilot of
///   rho_edge(eta) = r N^{1/3} rho_num(x1 + r N^{-2/3} eta)
/// against the Airy density on eta in [-6, 3], step 0.25. gof is the
/// normalized RMS residual.
EdgeFit fit_edge(const SpectralHistogram& edge_hist, std::size_t n, double x1, double r_pilot);

/// fit_edge, throwing PoorFit when gof exceeds max_gof.
EdgeFit edge_rescale_fit(const SpectralHistogram& edge_hist, std::size_t n, double x1, double r_pilot,
                         double max_gof = kDefaultMaxGof);

}  // namespace vibra
