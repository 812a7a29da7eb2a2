#include "vibra/histogram.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "vibra/error.hpp"

namespace vibra {

std::string_view to_string(Axis axis) {
  switch (axis) {
    case Axis::OmegaSq: return "omega_sq";
    case Axis::Omega: return "omega";
    case Axis::OmegaOverN: return "omega_over_n";
    case Axis::OmegaSqOverN2: return "omega_sq_over_n2";
    case Axis::X: return "x";
    case Axis::Eta: return "eta";
    case Axis::Spacing: return "s";
  }
  return "?";
}

std::string_view axis_label(Axis axis) {
  switch (axis) {
    case Axis::OmegaSq: return "omega_sq[freq^2]";
    case Axis::Omega: return "omega[freq]";
    case Axis::OmegaOverN: return "omega_over_n[freq]";
    case Axis::OmegaSqOverN2: return "omega_sq_over_n2[freq^2]";
    case Axis::X: return "x[omega_sq/omega0_sq]";
    case Axis::Eta: return "eta[1]";
    case Axis::Spacing: return "s[1]";
  }
  return "?";
}

SpectralHistogram::SpectralHistogram(double lo, double hi, std::size_t bins, Axis axis)
    : lo_(lo), hi_(hi), axis_(axis), counts_(bins, 0) {
  if (!(hi > lo) || !std::isfinite(lo) || !std::isfinite(hi)) {
    fail(ErrorKind::InvalidParams, "histogram range must satisfy lo < hi");
  }
  if (bins == 0) fail(ErrorKind::InvalidParams, "histogram needs at least one bin");
}

void SpectralHistogram::add(double v) {
  ++n_events_;
  if (v < lo_) {
    ++underflow_;
    return;
  }
  if (!(v < hi_)) {
    ++overflow_;
    return;
  }
  auto i = static_cast<std::size_t>((v - lo_) / width());
  if (i >= counts_.size()) i = counts_.size() - 1;
  ++counts_[i];
}

void SpectralHistogram::add(std::span<const double> values) {
  for (double v : values) add(v);
}

bool SpectralHistogram::compatible(const SpectralHistogram& o) const {
  return lo_ == o.lo_ && hi_ == o.hi_ && counts_.size() == o.counts_.size() && axis_ == o.axis_;
}

void SpectralHistogram::merge(const SpectralHistogram& o) {
  if (!compatible(o)) {
    fail(ErrorKind::BinMismatch, "cannot merge histograms with different range, bin count or axis");
  }
  for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += o.counts_[i];
  underflow_ += o.underflow_;
  overflow_ += o.overflow_;
  n_events_ += o.n_events_;
}

std::vector<double> SpectralHistogram::density() const {
  std::vector<double> d(counts_.size(), 0.0);
  if (n_events_ == 0) return d;
  const double norm = static_cast<double>(n_events_) * width();
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = static_cast<double>(counts_[i]) / norm;
  return d;
}

std::vector<double> SpectralHistogram::normalized_density() const {
  std::vector<double> d(counts_.size(), 0.0);
  if (in_range() == 0) return d;
  const double norm = static_cast<double>(in_range()) * width();
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = static_cast<double>(counts_[i]) / norm;
  return d;
}

std::size_t default_bins(std::uint64_t events) {
  const auto b = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(events))));
  return std::clamp<std::size_t>(b, 1, 4096);
}

double l1_distance(const SpectralHistogram& h, const std::function<double(double, double)>& mass, double a, double b) {
  if (h.n_events() == 0) fail(ErrorKind::InsufficientData, "L1 distance of an empty histogram");
  double sum = 0.0;
  std::size_t used = 0;
  for (std::size_t i = 0; i < h.bins(); ++i) {
    const double u = h.edge(i);
    const double v = h.edge(i + 1);
    if (u < a || v > b) continue;
    sum += std::abs(static_cast<double>(h.counts()[i]) / static_cast<double>(h.n_events()) - mass(u, v));
    ++used;
  }
  if (used == 0) fail(ErrorKind::InsufficientData, "no histogram bin lies inside the comparison window");
  return sum;
}

}  // namespace vibra
