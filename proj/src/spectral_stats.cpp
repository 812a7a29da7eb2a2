#include "vibra/spectral_stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <boost/math/tools/minima.hpp>

#include "vibra/airy.hpp"
#include "vibra/error.hpp"

namespace vibra {

template <class Scalar>
double participation_ratio(const Eigen::Ref<const Vec<Scalar>>& a) {
  const double n = static_cast<double>(a.size());
  double s2 = 0.0;
  double s4 = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    const double m = std::norm(a[i]);
    s2 += m;
    s4 += m * m;
  }
  if (s4 == 0.0) fail(ErrorKind::InvalidParams, "participation ratio of a zero vector");
  return s2 * s2 / (n * s4);
}

template double participation_ratio<double>(const Eigen::Ref<const Vec<double>>&);
template double participation_ratio<Complex>(const Eigen::Ref<const Vec<Complex>>&);

PrCurve::PrCurve(double lo, double hi, std::size_t bins, Axis axis) : occupancy_(lo, hi, bins, axis), sums_(bins, 0.0) {}

void PrCurve::add(double position, double p) {
  occupancy_.add(position);
  if (position >= occupancy_.lo() && position < occupancy_.hi()) {
    auto i = static_cast<std::size_t>((position - occupancy_.lo()) / occupancy_.width());
    if (i >= sums_.size()) i = sums_.size() - 1;
    sums_[i] += p;
  }
}

void PrCurve::merge(const PrCurve& other) {
  occupancy_.merge(other.occupancy_);
  for (std::size_t i = 0; i < sums_.size(); ++i) sums_[i] += other.sums_[i];
}

std::vector<double> PrCurve::mean() const {
  std::vector<double> m(sums_.size(), std::numeric_limits<double>::quiet_NaN());
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (occupancy_.counts()[i] > 0) m[i] = sums_[i] / static_cast<double>(occupancy_.counts()[i]);
  }
  return m;
}

double PrCurve::overall_mean() const {
  double s = 0.0;
  for (double v : sums_) s += v;
  return total() > 0 ? s / static_cast<double>(total()) : std::numeric_limits<double>::quiet_NaN();
}

RegionCuts fwhm_cuts(const PrCurve& curve) {
  const auto m = curve.mean();
  const std::size_t nb = m.size();
  std::vector<double> smooth(nb, 0.0);
  for (std::size_t i = 0; i < nb; ++i) {
    double s = 0.0;
    int k = 0;
    for (std::ptrdiff_t j = static_cast<std::ptrdiff_t>(i) - 2; j <= static_cast<std::ptrdiff_t>(i) + 2; ++j) {
      if (j < 0 || j >= static_cast<std::ptrdiff_t>(nb) || std::isnan(m[static_cast<std::size_t>(j)])) continue;
      s += m[static_cast<std::size_t>(j)];
      ++k;
    }
    smooth[i] = k > 0 ? s / k : 0.0;
  }
  // Skip a leading descent (extended lowest modes) before looking for the peak.
  std::size_t start = 0;
  while (start + 1 < nb && smooth[start + 1] <= smooth[start]) ++start;
  if (start + 1 == nb) start = 0;
  const auto peak_it = std::max_element(smooth.begin() + static_cast<std::ptrdiff_t>(start), smooth.end());
  if (peak_it == smooth.end() || *peak_it <= 0.0) fail(ErrorKind::InsufficientData, "PR curve is empty");
  const std::size_t peak = static_cast<std::size_t>(peak_it - smooth.begin());
  const double half = 0.5 * *peak_it;
  const auto& occ = curve.occupancy();

  auto crossing = [&](std::size_t inside, std::size_t outside) {
    const double a = smooth[inside] - half;
    const double b = smooth[outside] - half;
    const double t = a / (a - b);
    return occ.center(inside) + t * (occ.center(outside) - occ.center(inside));
  };
  RegionCuts cuts{occ.lo(), occ.hi()};
  for (std::size_t i = peak; i-- > 0;) {
    if (smooth[i] < half) {
      cuts.r1 = crossing(i + 1, i);
      break;
    }
  }
  for (std::size_t i = peak + 1; i < nb; ++i) {
    if (smooth[i] < half) {
      cuts.r2 = crossing(i - 1, i);
      break;
    }
  }
  return cuts;
}

std::string_view to_string(Region r) {
  switch (r) {
    case Region::Low: return "low";
    case Region::Mid: return "mid";
    case Region::High: return "high";
    case Region::All: return "all";
  }
  return "?";
}

Unfolding::Unfolding(const SpectralHistogram& pooled, double samples)
    : lo_(pooled.lo()), width_(pooled.width()), cumulative_(pooled.bins() + 1, 0.0) {
  if (!(samples > 0.0)) fail(ErrorKind::InsufficientData, "unfolding needs at least one sample");
  double run = static_cast<double>(pooled.underflow());
  cumulative_[0] = run / samples;
  for (std::size_t i = 0; i < pooled.bins(); ++i) {
    run += static_cast<double>(pooled.counts()[i]);
    cumulative_[i + 1] = run / samples;
  }
}

double Unfolding::operator()(double omega) const {
  const double t = (omega - lo_) / width_;
  if (t <= 0.0) return cumulative_.front();
  const auto last = static_cast<double>(cumulative_.size() - 1);
  if (t >= last) return cumulative_.back();
  const auto i = static_cast<std::size_t>(t);
  const double f = t - static_cast<double>(i);
  return cumulative_[i] + f * (cumulative_[i + 1] - cumulative_[i]);
}

std::size_t SpacingSample::count(Region r) const {
  if (r == Region::All) return s.size();
  return static_cast<std::size_t>(std::count(region.begin(), region.end(), r));
}

std::vector<double> SpacingSample::values(Region r) const {
  std::vector<double> out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (r == Region::All || region[i] == r) out.push_back(s[i]);
  }
  return out;
}

double SpacingSample::mean(Region r) const {
  const auto v = values(r);
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  double sum = 0.0;
  for (double x : v) sum += x;
  return sum / static_cast<double>(v.size());
}

SpacingSample unfold_spacings(std::span<const std::vector<double>> sorted_samples, const Unfolding& unfold,
                              const RegionCuts* cuts) {
  SpacingSample out;
  for (const auto& omega : sorted_samples) {
    for (std::size_t k = 0; k + 1 < omega.size(); ++k) {
      out.s.push_back(std::max(unfold(omega[k + 1]) - unfold(omega[k]), 0.0));
      Region r = Region::All;
      if (cuts != nullptr) {
        const double mid = 0.5 * (omega[k] + omega[k + 1]);
        r = mid < cuts->r1 ? Region::Low : (mid > cuts->r2 ? Region::High : Region::Mid);
      }
      out.region.push_back(r);
    }
  }
  return out;
}

void require_spacings(const SpacingSample& sample, std::span<const Region> regions, std::size_t min_count) {
  for (Region r : regions) {
    const std::size_t c = sample.count(r);
    if (c < min_count) {
      fail(ErrorKind::InsufficientData, std::string("region ") + std::string(to_string(r)) + " holds " +
                                            std::to_string(c) + " spacings, fewer than " + std::to_string(min_count));
    }
  }
}

SpectralHistogram spacing_histogram(const SpacingSample& sample, Region r, double width, double s_max) {
  const auto bins = static_cast<std::size_t>(std::llround(s_max / width));
  SpectralHistogram h(0.0, s_max, bins, Axis::Spacing);
  for (std::size_t i = 0; i < sample.s.size(); ++i) {
    if (r == Region::All || sample.region[i] == r) h.add(sample.s[i]);
  }
  return h;
}

double poisson_sup_deviation(const SpectralHistogram& h) {
  const auto d = h.density();
  double worst = 0.0;
  for (std::size_t i = 0; i < h.bins(); ++i) {
    const double expected = (std::exp(-h.edge(i)) - std::exp(-h.edge(i + 1))) / h.width();
    worst = std::max(worst, std::abs(d[i] - expected));
  }
  return worst;
}

double fraction_below(const SpacingSample& sample, Region r, double s) {
  std::size_t hit = 0;
  std::size_t all = 0;
  for (std::size_t i = 0; i < sample.s.size(); ++i) {
    if (r != Region::All && sample.region[i] != r) continue;
    ++all;
    if (sample.s[i] < s) ++hit;
  }
  if (all == 0) fail(ErrorKind::InsufficientData, "no spacings in region");
  return static_cast<double>(hit) / static_cast<double>(all);
}

SpectralHistogram make_edge_histogram(double x1, double r_pilot, std::size_t n, std::size_t bins) {
  const double half = 8.0 * r_pilot * std::pow(static_cast<double>(n), -2.0 / 3.0);
  return SpectralHistogram(x1 - half, x1 + half, bins, Axis::X);
}

namespace {

double interpolate_density(const SpectralHistogram& h, const std::vector<double>& d, double x) {
  const double t = (x - h.lo()) / h.width() - 0.5;
  if (t <= 0.0) return d.front();
  if (t >= static_cast<double>(d.size() - 1)) return d.back();
  const auto i = static_cast<std::size_t>(t);
  const double f = t - static_cast<double>(i);
  return d[i] + f * (d[i + 1] - d[i]);
}

}  // namespace

EdgeFit fit_edge(const SpectralHistogram& h, std::size_t n, double x1, double r_pilot) {
  if (h.in_range() == 0) fail(ErrorKind::InsufficientData, "edge histogram is empty");
  const auto d = h.density();
  const double dn = static_cast<double>(n);
  const double n13 = std::cbrt(dn);
  const double n23 = n13 * n13;

  std::vector<double> eta;
  for (double e = kEdgeEtaLo; e <= kEdgeEtaHi + 1e-12; e += kEdgeEtaStep) eta.push_back(e);
  std::vector<double> airy(eta.size());
  double airy_norm = 0.0;
  for (std::size_t i = 0; i < eta.size(); ++i) {
    airy[i] = airy_density(eta[i]);
    airy_norm += airy[i] * airy[i];
  }

  auto rescaled = [&](double r) {
    std::vector<double> out(eta.size());
    for (std::size_t i = 0; i < eta.size(); ++i) out[i] = r * n13 * interpolate_density(h, d, x1 + r * eta[i] / n23);
    return out;
  };
  auto residual = [&](double r) {
    const auto v = rescaled(r);
    double s = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) s += (v[i] - airy[i]) * (v[i] - airy[i]);
    return s;
  };

  const auto best = boost::math::tools::brent_find_minima(residual, 0.5 * r_pilot, 1.3 * r_pilot, 40);
  EdgeFit fit;
  fit.r = best.first;
  fit.gof = std::sqrt(best.second / airy_norm);
  fit.eta = eta;
  fit.rho_edge = rescaled(fit.r);
  fit.rho_airy = airy;
  return fit;
}

EdgeFit edge_rescale_fit(const SpectralHistogram& h, std::size_t n, double x1, double r_pilot, double max_gof) {
  EdgeFit fit = fit_edge(h, n, x1, r_pilot);
  if (fit.gof > max_gof) {
    fail(ErrorKind::PoorFit, "Airy fit gof " + std::to_string(fit.gof) + " exceeds " + std::to_string(max_gof) +
                                 " (r = " + std::to_string(fit.r) + ")");
  }
  return fit;
}

}  // namespace vibra
