#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

namespace vibra {

enum class Axis { OmegaSq, Omega, OmegaOverN, OmegaSqOverN2, X, Eta, Spacing };

std::string_view to_string(Axis axis);
/// Column label with units for CSV headers, e.g. "omega_sq[freq^2]".
std::string_view axis_label(Axis axis);

/// Fixed-range histogram with exact integer counts. Merging is a commutative
/// monoid; values outside [lo, hi) land in underflow/overflow but still count
/// toward n_events.
class SpectralHistogram {
 public:
  SpectralHistogram() = default;
  SpectralHistogram(double lo, double hi, std::size_t bins, Axis axis);

  void add(double v);
  void add(std::span<const double> values);
  void merge(const SpectralHistogram& other);

  double lo() const { return lo_; }
  double hi() const { return hi_; }
  std::size_t bins() const { return counts_.size(); }
  Axis axis() const { return axis_; }
  double width() const { return (hi_ - lo_) / static_cast<double>(counts_.size()); }
  double edge(std::size_t i) const { return lo_ + static_cast<double>(i) * width(); }
  double center(std::size_t i) const { return lo_ + (static_cast<double>(i) + 0.5) * width(); }

  const std::vector<std::int64_t>& counts() const { return counts_; }
  std::int64_t underflow() const { return underflow_; }
  std::int64_t overflow() const { return overflow_; }
  std::int64_t n_events() const { return n_events_; }
  std::int64_t in_range() const { return n_events_ - underflow_ - overflow_; }

  /// counts / (n_events * width): the share of all events per unit axis.
  std::vector<double> density() const;
  /// counts / (in_range * width): integrates to 1 over [lo, hi).
  std::vector<double> normalized_density() const;

  bool compatible(const SpectralHistogram& other) const;
  bool operator==(const SpectralHistogram& other) const = default;

 private:
  double lo_ = 0.0;
  double hi_ = 1.0;
  Axis axis_ = Axis::OmegaSq;
  std::vector<std::int64_t> counts_;
  std::int64_t underflow_ = 0;
  std::int64_t overflow_ = 0;
  std::int64_t n_events_ = 0;
};

/// ceil(sqrt(events)) capped at 4096, at least 1.
std::size_t default_bins(std::uint64_t events);

/// sum over bins inside [a, b] of |count_i / n_events - mass(edge_i, edge_i+1)|.
/// mass(u, v) must return the reference probability of [u, v).
double l1_distance(const SpectralHistogram& h, const std::function<double(double, double)>& mass, double a, double b);

}  // namespace vibra
