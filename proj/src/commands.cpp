#include "vibra/commands.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

#include <CLI11.hpp>
#include <boost/math/tools/minima.hpp>

#include "vibra/ensembles.hpp"
#include "vibra/error.hpp"
#include "vibra/farm.hpp"
#include "vibra/freeprob.hpp"
#include "vibra/histogram.hpp"
#include "vibra/pencil.hpp"
#include "vibra/spectral_stats.hpp"
#include "vibra/thermo.hpp"

namespace vibra {

namespace fs = std::filesystem;
using nlohmann::json;

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {

// ---------------------------------------------------------------- output

class Csv {
 public:
  explicit Csv(std::initializer_list<std::string_view> header) {
    bool first = true;
    for (auto h : header) {
      os_ << (first ? "" : ",") << h;
      first = false;
    }
    os_ << '\n';
  }

  template <class... T>
  void row(const T&... cells) {
    bool first = true;
    ((os_ << (first ? "" : ",") << cell(cells), first = false), ...);
    os_ << '\n';
  }

  std::string str() const { return os_.str(); }

 private:
  static std::string cell(double v) { return format_double(v); }
  static std::string cell(std::int64_t v) { return std::to_string(v); }
  static std::string cell(std::uint64_t v) { return std::to_string(v); }
  static std::string cell(std::string_view v) { return std::string(v); }
  static std::string cell(const std::string& v) { return v; }
  static std::string cell(const char* v) { return v; }

  std::ostringstream os_;
};

json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

class Writer {
 public:
  explicit Writer(fs::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) fail(ErrorKind::Io, "cannot create " + dir_.string() + ": " + ec.message());
  }

  void text(const std::string& name, const std::string& body) {
    const fs::path p = dir_ / name;
    std::ofstream f(p, std::ios::binary | std::ios::trunc);
    f << body;
    f.close();
    if (!f) fail(ErrorKind::Io, "cannot write " + p.string());
    files_.push_back(p);
  }
  void csv(const std::string& name, const Csv& c) { text(name, c.str()); }

  std::vector<fs::path> take() { return std::move(files_); }

 private:
  fs::path dir_;
  std::vector<fs::path> files_;
};

Csv histogram_csv(const SpectralHistogram& h) {
  Csv c({"bin_lo", "bin_hi", axis_label(h.axis()), "count", "density"});
  const auto d = h.density();
  for (std::size_t i = 0; i < h.bins(); ++i) {
    c.row(h.edge(i), h.edge(i + 1), h.center(i), h.counts()[i], d[i]);
  }
  return c;
}

json histogram_json(const SpectralHistogram& h) {
  return {{"axis", std::string(to_string(h.axis()))}, {"lo", h.lo()},          {"hi", h.hi()},
          {"bins", h.bins()},                        {"events", h.n_events()}, {"underflow", h.underflow()},
          {"overflow", h.overflow()}};
}

Csv pr_csv(const PrCurve& pr) {
  const auto& occ = pr.occupancy();
  Csv c({axis_label(occ.axis()), "modes", "mean_pr"});
  const auto m = pr.mean();
  for (std::size_t i = 0; i < occ.bins(); ++i) c.row(occ.center(i), occ.counts()[i], m[i]);
  return c;
}

/// max |mean_i - overall| over bins holding at least min_count modes.
double pr_flatness(const PrCurve& pr, std::int64_t min_count) {
  const auto m = pr.mean();
  const double all = pr.overall_mean();
  double dev = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (pr.occupancy().counts()[i] >= min_count) dev = std::max(dev, std::abs(m[i] - all));
  }
  return dev;
}

FarmProgress progress(const RunConfig& cfg, const char* label) { return FarmProgress{cfg.quiet ? nullptr : label}; }

std::size_t bins_for(const RunConfig& cfg, std::uint64_t events) {
  return cfg.bins > 0 ? cfg.bins : default_bins(events);
}

// ---------------------------------------------------------------- spectra

struct Spectrum {
  std::vector<double> omega_sq;
  std::vector<double> pr;  // empty unless vectors were requested
};

template <class Scalar>
Spectrum solve(const PencilSystem<Scalar>& p, bool vectors, bool stiffness_only) {
  Spectrum s;
  auto fill_pr = [&](const Mat<Scalar>& v) {
    s.pr.resize(static_cast<std::size_t>(v.cols()));
    for (Eigen::Index a = 0; a < v.cols(); ++a) s.pr[static_cast<std::size_t>(a)] = participation_ratio<Scalar>(v.col(a));
  };
  if (stiffness_only) {
    Mat<Scalar> h = p.stiffness;
    s.omega_sq = vectors ? linalg::eigensystem_hermitian(h) : linalg::eigenvalues_hermitian(h);
    clamp_spectrum(s.omega_sq);
    if (vectors) fill_pr(h);
    return s;
  }
  if (vectors) {
    auto m = solve_modes(p);
    s.omega_sq = std::move(m.omega_sq);
    fill_pr(m.vectors);
  } else {
    s.omega_sq = solve_omega_sq(p);
  }
  return s;
}

std::vector<double> sqrt_all(const std::vector<double>& v, double scale) {
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = std::sqrt(std::max(v[i], 0.0)) * scale;
  return out;
}

/// Per-chunk state of a Monte Carlo run over one spectral axis.
struct SpectrumAcc {
  SpectralHistogram density;  // cfg.bins over [0, hi)
  SpectralHistogram bulk;     // 128 bins over the bulk window, for L1
  SpectralHistogram pooled;   // 4096-bin omega-type histogram: unfolding and thermodynamics
  SpectralHistogram coarse;   // 100 bins over [0, hi), flatness near zero
  PrCurve pr;
  std::vector<std::vector<double>> kept;  // sorted pooled-axis values of the first `keep` samples
  std::int64_t beyond = 0;                // values above the limiting edge

  void merge(const SpectrumAcc& o) {
    density.merge(o.density);
    bulk.merge(o.bulk);
    pooled.merge(o.pooled);
    coarse.merge(o.coarse);
    pr.merge(o.pr);
    kept.insert(kept.end(), o.kept.begin(), o.kept.end());
    beyond += o.beyond;
  }
};

constexpr std::size_t kBulkBins = 128;
constexpr std::size_t kPooledBins = 4096;
constexpr std::size_t kCoarseBins = 100;
constexpr std::size_t kPrBins = 64;
constexpr std::uint64_t kKeptValues = std::uint64_t{1} << 24;

// ---------------------------------------------------------------- sample

struct SampleLayout {
  double edge = 0.0;  // limiting upper edge in omega^2
  double hi = 0.0;
  std::size_t bins = 0;
  std::uint64_t keep = 0;
};

template <class Scalar>
void sample_one(const RunConfig& cfg, const SampleLayout& lay, std::uint64_t i, SpectrumAcc& acc) {
  RngStream stream = derive_stream(cfg.seed, i);
  const EnsembleSpec spec{static_cast<Eigen::Index>(cfg.n), cfg.sigma_m, cfg.sigma_k, cfg.m0, cfg.field_kind(), cfg.seed};
  const auto p = build_wishart_pencil<Scalar>(spec, stream);
  const Spectrum s = solve(p, cfg.vectors, cfg.target == "stiffness");
  acc.density.add(s.omega_sq);
  acc.bulk.add(s.omega_sq);
  const auto omega = sqrt_all(s.omega_sq, 1.0);
  acc.pooled.add(omega);
  for (double w : s.omega_sq) acc.beyond += w > lay.edge;
  for (std::size_t a = 0; a < s.pr.size(); ++a) acc.pr.add(s.omega_sq[a], s.pr[a]);
  if (i < lay.keep) acc.kept.push_back(omega);
}

json spacing_report(const SpacingSample& sp, std::span<const Region> regions, Writer& w) {
  Csv raw({"s[1]", "region"});
  for (std::size_t k = 0; k < sp.s.size(); ++k) raw.row(sp.s[k], to_string(sp.region[k]));
  w.csv("spacings.csv", raw);

  Csv hist({"region", "s_lo[1]", "s_hi[1]", "density", "poisson"});
  json out = json::object();
  for (Region r : regions) {
    json jr = {{"count", sp.count(r)}};
    if (sp.count(r) > 0) {
      const auto h = spacing_histogram(sp, r);
      const auto d = h.density();
      for (std::size_t i = 0; i < h.bins(); ++i) {
        const double a = h.edge(i), b = h.edge(i + 1);
        hist.row(to_string(r), a, b, d[i], (std::exp(-a) - std::exp(-b)) / h.width());
      }
      jr["mean"] = num(sp.mean(r));
      jr["poisson_sup_deviation"] = num(poisson_sup_deviation(h));
      jr["density_below_0.1"] = num(fraction_below(sp, r, 0.1) / 0.1);
    }
    out[std::string(to_string(r))] = jr;
  }
  w.csv("spacing_hist.csv", hist);
  return out;
}

}  // namespace

CommandOutput cmd_sample(const RunConfig& cfg) {
  const bool stiffness = cfg.target == "stiffness";
  const AnalyticLaw law = scale_map(cfg.m0, cfg.sigma_m, cfg.sigma_k);
  const double x1 = support_endpoint(law.mu);

  SampleLayout lay;
  lay.edge = stiffness ? 4.0 * cfg.sigma_k * cfg.sigma_k : law.omega0_sq * x1;
  lay.hi = 1.25 * lay.edge;
  lay.bins = bins_for(cfg, cfg.samples * cfg.n);
  lay.keep = std::min<std::uint64_t>(cfg.samples, std::max<std::uint64_t>(1, kKeptValues / cfg.n));
  const double bulk_lo = 0.05 * lay.edge, bulk_hi = 0.9 * lay.edge;

  auto make = [&] {
    SpectrumAcc a;
    a.density = SpectralHistogram(0.0, lay.hi, lay.bins, Axis::OmegaSq);
    a.bulk = SpectralHistogram(bulk_lo, bulk_hi, kBulkBins, Axis::OmegaSq);
    a.pooled = SpectralHistogram(0.0, std::sqrt(lay.hi), kPooledBins, Axis::Omega);
    a.coarse = SpectralHistogram(0.0, lay.hi, kCoarseBins, Axis::OmegaSq);
    a.pr = PrCurve(0.0, lay.edge, kPrBins, Axis::OmegaSq);
    return a;
  };
  auto work = [&](SpectrumAcc& acc, std::uint64_t i) {
    if (cfg.field_kind() == Field::Complex) {
      sample_one<Complex>(cfg, lay, i, acc);
    } else {
      sample_one<double>(cfg, lay, i, acc);
    }
  };
  const SpectrumAcc acc = farm<SpectrumAcc>(cfg.samples, cfg.workers, make, work, progress(cfg, "sample"));

  auto mass = [&](double u, double v) {
    if (stiffness) return mp_cdf(v, cfg.sigma_k) - mp_cdf(u, cfg.sigma_k);
    return analytic_mass(u / law.omega0_sq, v / law.omega0_sq, law.mu);
  };
  const double l1 = l1_distance(acc.bulk, mass, bulk_lo, bulk_hi);

  Writer w(cfg.out_dir);
  w.csv("density.csv", histogram_csv(acc.density));
  {
    Csv c({"omega_sq[freq^2]", "rho_empirical", "rho_analytic"});
    const auto d = acc.density.density();
    for (std::size_t i = 0; i < acc.density.bins(); ++i) {
      const double x = acc.density.center(i);
      const double th = stiffness ? mp_density(x, cfg.sigma_k) : physical_density(x, law);
      c.row(x, d[i], th);
    }
    w.csv("density_vs_analytic.csv", c);
  }

  json res;
  res["law"] = {{"mu", law.mu}, {"omega0_sq", law.omega0_sq}, {"x1", x1}, {"edge_omega_sq", lay.edge}};
  res["density"] = histogram_json(acc.density);
  res["bulk_window"] = {bulk_lo, bulk_hi};
  res["bulk_l1"] = l1;
  res["beyond_edge"] = acc.beyond;
  res["beyond_edge_fraction"] = static_cast<double>(acc.beyond) / static_cast<double>(acc.density.n_events());

  if (cfg.vectors) {
    w.csv("pr.csv", pr_csv(acc.pr));
    res["pr"] = {{"mean", num(acc.pr.overall_mean())},
                 {"max_bin_deviation", num(pr_flatness(acc.pr, 1000))},
                 {"modes", acc.pr.total()}};
  }

  const Unfolding unfold(acc.pooled, static_cast<double>(cfg.samples));
  // Unfolding is built from all samples; spacings come from the kept ones.
  const SpacingSample sp = unfold_spacings(acc.kept, unfold, nullptr);
  const Region all[] = {Region::All};
  res["spacings"] = spacing_report(sp, all, w);
  res["spacings"]["samples_used"] = lay.keep;

  CommandOutput out;
  out.summary = {{"results", res}};
  out.files = w.take();
  return out;
}

// ---------------------------------------------------------------- pendulum

namespace {

struct PendulumSpectrum {
  std::vector<double> omega_sq;
  std::vector<double> pr;
  double row_sum = 0.0;  // max |K 1| / |K|_1
};

PendulumSpectrum solve_pendulum(const PendulumParams& params, bool vectors) {
  const RealPencil p = build_pendulum(params);
  const Spectrum s = solve(p, vectors, false);
  PendulumSpectrum out{s.omega_sq, s.pr, 0.0};
  const double k1 = linalg::norm1(p.stiffness);
  out.row_sum = k1 > 0.0 ? p.stiffness.rowwise().sum().cwiseAbs().maxCoeff() / k1 : 0.0;
  return out;
}

/// L1 of a histogram against the Marchenko-Pastur law with scale sigma, over every bin.
double mp_l1(const SpectralHistogram& h, double sigma) {
  return l1_distance(h, [sigma](double u, double v) { return mp_cdf(v, sigma) - mp_cdf(u, sigma); }, h.lo(), h.hi());
}

CommandOutput pendulum_single(const RunConfig& cfg) {
  const PendulumParams params =
      cfg.pendulum == "file" ? load_pendulum(cfg.params_file) : uniform_pendulum(cfg.n, cfg.calq, cfg.g);
  const std::size_t n = params.n();
  const double n2 = static_cast<double>(n) * static_cast<double>(n);
  const PendulumSpectrum s = solve_pendulum(params, cfg.vectors);

  std::vector<double> y(s.omega_sq.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = s.omega_sq[i] / n2;
  const double top = y.empty() ? 1.0 : std::max(y.back(), 1e-300);
  SpectralHistogram h(0.0, 1.05 * top, bins_for(cfg, n), Axis::OmegaSqOverN2);
  h.add(y);

  Writer w(cfg.out_dir);
  w.csv("density.csv", histogram_csv(h));
  {
    Csv c({"mode", "omega_sq[freq^2]", "omega_sq_over_n2[freq^2]"});
    for (std::size_t i = 0; i < y.size(); ++i) c.row(static_cast<std::uint64_t>(i), s.omega_sq[i], y[i]);
    w.csv("spectrum.csv", c);
  }

  json res;
  res["modes"] = n;
  res["k_row_sum_residual"] = s.row_sum;
  res["omega_sq_range"] = {y.empty() ? 0.0 : s.omega_sq.front(), y.empty() ? 0.0 : s.omega_sq.back()};

  double mean = 0.0;
  for (double v : y) mean += v;
  mean /= std::max<std::size_t>(1, y.size());
  if (mean > 0.0) {
    const double s0 = std::sqrt(mean);
    const auto best = boost::math::tools::brent_find_minima([&](double sg) { return mp_l1(h, sg); }, 0.5 * s0,
                                                            1.5 * s0, 40);
    res["mp_fit"] = {{"sigma", best.first}, {"sigma_sq", best.first * best.first}, {"l1", best.second}};
    Csv c({"omega_sq_over_n2[freq^2]", "rho_empirical", "rho_mp"});
    const auto d = h.density();
    for (std::size_t i = 0; i < h.bins(); ++i) c.row(h.center(i), d[i], mp_density(h.center(i), best.first));
    w.csv("mp_fit.csv", c);
  }
  if (cfg.vectors) {
    PrCurve pr(0.0, 1.05 * top, kPrBins, Axis::OmegaSqOverN2);
    for (std::size_t i = 0; i < y.size(); ++i) pr.add(y[i], s.pr[i]);
    w.csv("pr.csv", pr_csv(pr));
    res["pr"] = {{"mean", num(pr.overall_mean())}};
  }

  CommandOutput out;
  out.summary = {{"results", res}};
  out.files = w.take();
  return out;
}

CommandOutput pendulum_disordered(const RunConfig& cfg) {
  const std::size_t n = cfg.n;
  const double dn = static_cast<double>(n);

  // Pilot: sample 0 fixes the axis range.
  RngStream pilot_stream = derive_stream(cfg.seed, 0);
  const PendulumSpectrum pilot =
      solve_pendulum(sample_disordered_pendulum(n, cfg.calq, cfg.g, pilot_stream), false);
  const double top = std::sqrt(std::max(pilot.omega_sq.back(), 0.0)) / dn;
  if (!(top > 0.0)) fail(ErrorKind::InsufficientData, "pilot spectrum is identically zero");
  const double hi = 1.25 * top;
  const std::uint64_t keep = std::min<std::uint64_t>(cfg.samples, std::max<std::uint64_t>(1, kKeptValues / n));

  auto make = [&] {
    SpectrumAcc a;
    a.density = SpectralHistogram(0.0, hi, bins_for(cfg, cfg.samples * n), Axis::OmegaOverN);
    a.pooled = SpectralHistogram(0.0, hi, kPooledBins, Axis::OmegaOverN);
    a.coarse = SpectralHistogram(0.0, hi, kCoarseBins, Axis::OmegaOverN);
    a.bulk = SpectralHistogram(0.0, hi, 1, Axis::OmegaOverN);
    a.pr = PrCurve(0.0, hi, kCoarseBins, Axis::OmegaOverN);
    return a;
  };
  double row_sum = 0.0;
  auto work = [&](SpectrumAcc& acc, std::uint64_t i) {
    RngStream stream = derive_stream(cfg.seed, i);
    const PendulumSpectrum s = solve_pendulum(sample_disordered_pendulum(n, cfg.calq, cfg.g, stream), cfg.vectors);
    const auto v = sqrt_all(s.omega_sq, 1.0 / dn);
    acc.density.add(v);
    acc.pooled.add(v);
    acc.coarse.add(v);
    acc.bulk.add(v);
    for (std::size_t a = 0; a < s.pr.size(); ++a) acc.pr.add(v[a], s.pr[a]);
    if (i < keep) acc.kept.push_back(v);
    if (i == 0) row_sum = s.row_sum;
  };
  const SpectrumAcc acc = farm<SpectrumAcc>(cfg.samples, cfg.workers, make, work, progress(cfg, "pendulum"));

  Writer w(cfg.out_dir);
  w.csv("density.csv", histogram_csv(acc.density));
  w.csv("density_coarse.csv", histogram_csv(acc.coarse));

  json res;
  res["modes_per_sample"] = n;
  res["k_row_sum_residual_sample0"] = row_sum;
  res["axis_hi"] = hi;
  res["density"] = histogram_json(acc.density);

  {
    const auto& c = acc.coarse.counts();
    std::size_t first = 0;
    while (first < c.size() && c[first] == 0) ++first;
    json flat;
    if (first + 3 <= c.size()) {
      const double m = static_cast<double>(c[first] + c[first + 1] + c[first + 2]) / 3.0;
      double dev = 0.0;
      for (std::size_t k = first; k < first + 3; ++k) dev = std::max(dev, std::abs(static_cast<double>(c[k]) / m - 1.0));
      const auto d = acc.coarse.density();
      flat = {{"first_bin", first},
              {"bin_width", acc.coarse.width()},
              {"densities", {d[first], d[first + 1], d[first + 2]}},
              {"max_relative_deviation", dev}};
    }
    res["low_frequency_flatness"] = flat;
  }

  RegionCuts cuts;
  if (!std::isnan(cfg.r1)) {
    cuts = {cfg.r1, cfg.r2};
    res["cuts_source"] = "config";
  } else {
    cuts = fwhm_cuts(acc.pr);
    res["cuts_source"] = "pr_fwhm";
  }
  res["cuts"] = {{"r1", cuts.r1}, {"r2", cuts.r2}};
  if (cfg.vectors) {
    w.csv("pr.csv", pr_csv(acc.pr));
    res["pr"] = {{"mean", num(acc.pr.overall_mean())}};
  }

  const Unfolding unfold(acc.pooled, static_cast<double>(cfg.samples));
  const SpacingSample sp = unfold_spacings(acc.kept, unfold, &cuts);
  const Region regions[] = {Region::Low, Region::Mid, Region::High};
  res["spacings"] = spacing_report(sp, regions, w);
  double pooled_mean = 0.0;
  for (double s : sp.s) pooled_mean += s;
  res["spacings"]["pooled_mean"] = num(pooled_mean / static_cast<double>(sp.s.size()));
  res["spacings"]["samples_used"] = keep;

  CommandOutput out;
  out.summary = {{"results", res}};
  out.files = w.take();
  require_spacings(sp, regions);
  return out;
}

}  // namespace

CommandOutput cmd_pendulum(const RunConfig& cfg) {
  return cfg.pendulum == "disordered" ? pendulum_disordered(cfg) : pendulum_single(cfg);
}

// ---------------------------------------------------------------- analytic

CommandOutput cmd_analytic(const RunConfig& cfg) {
  std::vector<double> mus = cfg.mu_list;
  std::sort(mus.begin(), mus.end());

  Csv endpoints({"mu", "x1", "p3_at_x1", "mass", "origin_coefficient", "edge_coefficient", "edge_scale"});
  Csv density({"mu", "x[omega_sq/omega0_sq]", "rho", "rho_cubic"});
  Csv resolvent({"mu", "re_zeta", "im_zeta", "re_gamma", "im_gamma", "cubic_residual"});

  json rows = json::array();
  bool monotone = true;
  double prev = std::numeric_limits<double>::infinity();
  double max_cross = 0.0;
  for (double mu : mus) {
    const double x1 = support_endpoint(mu);
    const double m = analytic_mass(0.0, x1, mu);
    endpoints.row(mu, x1, p3(x1, mu), m, origin_coefficient(mu), edge_coefficient(mu), edge_scale(mu));
    monotone = monotone && x1 < prev;
    prev = x1;

    std::vector<double> xs(cfg.points), rho(cfg.points);
    for (std::size_t i = 0; i < cfg.points; ++i) xs[i] = x1 * (static_cast<double>(i) + 0.5) / static_cast<double>(cfg.points);
    analytic_density_grid(mu, xs, rho);
    for (std::size_t i = 0; i < cfg.points; ++i) {
      const double rc = density_from_cubic(xs[i], mu);
      density.row(mu, xs[i], rho[i], rc);
      if (xs[i] > 0.05 * x1 && xs[i] < 0.95 * x1) max_cross = std::max(max_cross, std::abs(rc - rho[i]));
    }

    for (int j = 0; j <= 20; ++j) {
      const Complex zeta(x1 * (-0.5 + 0.1 * j), 0.1 * x1);
      const Complex g = resolvent_h(zeta, mu);
      resolvent.row(mu, zeta.real(), zeta.imag(), g.real(), g.imag(), std::abs(cubic_coeffs(zeta, mu).eval(g)));
    }
    rows.push_back({{"mu", mu}, {"x1", x1}, {"mass", m}, {"x1_mu_over_4", x1 * mu / 4.0}});
  }

  Writer w(cfg.out_dir);
  w.csv("endpoints.csv", endpoints);
  w.csv("analytic_density.csv", density);
  w.csv("resolvent.csv", resolvent);

  CommandOutput out;
  out.summary = {{"results",
                  {{"laws", rows}, {"x1_monotone_decreasing", monotone}, {"max_closed_form_vs_cubic", max_cross}}}};
  out.files = w.take();
  return out;
}

// ---------------------------------------------------------------- edge

namespace {

struct EdgeAcc {
  SpectralHistogram hist;
  void merge(const EdgeAcc& o) { hist.merge(o.hist); }
};

}  // namespace

CommandOutput cmd_edge(const RunConfig& cfg) {
  const bool stiffness = cfg.target == "stiffness";
  const AnalyticLaw law = scale_map(cfg.m0, cfg.sigma_m, cfg.sigma_k);
  // The stiffness-only control is Marchenko-Pastur in x = omega^2 / sigma_K^2:
  // edge 4, coefficient 1 / (4 pi), so r = 4^{2/3}.
  const double unit = stiffness ? cfg.sigma_k * cfg.sigma_k : law.omega0_sq;
  const double x1 = stiffness ? 4.0 : support_endpoint(law.mu);
  const double r_large_n = stiffness ? std::cbrt(16.0) : edge_scale(law.mu);
  const double r_pilot = cfg.r_pilot > 0.0 ? cfg.r_pilot : r_large_n;

  auto make = [&] { return EdgeAcc{make_edge_histogram(x1, r_pilot, cfg.n, cfg.edge_bins)}; };
  auto work = [&](EdgeAcc& acc, std::uint64_t i) {
    RngStream stream = derive_stream(cfg.seed, i);
    const EnsembleSpec spec{static_cast<Eigen::Index>(cfg.n), cfg.sigma_m, cfg.sigma_k, cfg.m0, cfg.field_kind(), cfg.seed};
    std::vector<double> w;
    if (cfg.field_kind() == Field::Complex) {
      w = solve(build_wishart_pencil<Complex>(spec, stream), false, stiffness).omega_sq;
    } else {
      w = solve(build_wishart_pencil<double>(spec, stream), false, stiffness).omega_sq;
    }
    for (double& v : w) v /= unit;
    acc.hist.add(w);
  };
  const EdgeAcc acc = farm<EdgeAcc>(cfg.samples, cfg.workers, make, work, progress(cfg, "edge"));
  const EdgeFit fit = fit_edge(acc.hist, cfg.n, x1, r_pilot);

  Writer w(cfg.out_dir);
  w.csv("edge_hist.csv", histogram_csv(acc.hist));
  {
    Csv c({"eta[1]", "rho_edge", "rho_airy"});
    for (std::size_t i = 0; i < fit.eta.size(); ++i) c.row(fit.eta[i], fit.rho_edge[i], fit.rho_airy[i]);
    w.csv("edge.csv", c);
  }

  const double n23 = std::pow(static_cast<double>(cfg.n), 2.0 / 3.0);
  json res = {{"x1", x1},
              {"r_pilot", r_pilot},
              {"r_large_n", r_large_n},
              {"r", fit.r},
              {"gof", fit.gof},
              {"max_gof", cfg.max_gof},
              {"accepted", fit.gof <= cfg.max_gof},
              {"window_half_width_x", 8.0 * r_pilot / n23},
              {"airy_unit_x", fit.r / n23},
              {"edge_hist", histogram_json(acc.hist)}};
  CommandOutput out;
  out.summary = {{"results", res}};
  out.files = w.take();
  return out;
}

// ---------------------------------------------------------------- thermo

namespace {

struct OmegaAcc {
  SpectralHistogram hist;
  void merge(const OmegaAcc& o) { hist.merge(o.hist); }
};

}  // namespace

CommandOutput cmd_thermo(const RunConfig& cfg) {
  const auto betas = log_grid(cfg.beta_min, cfg.beta_max, cfg.beta_points);
  const double omega0_sq = (cfg.sigma_k / cfg.sigma_m) * (cfg.sigma_k / cfg.sigma_m);

  Csv c({"mu", "beta[1/energy]", "u[energy]", "c_v[1]", "source"});
  json laws = json::array();
  for (double mu : cfg.mu_list) {
    const AnalyticLaw law{mu, omega0_sq};
    const ThermoCurve curve = analytic_curve(law, betas);
    double fd = 0.0;
    for (const auto& p : curve.points) {
      c.row(mu, p.beta, p.u, p.c_v, to_string(curve.source));
      const double h = 1e-3 * p.beta;
      const double du = (energy_density(p.beta + h, law) - energy_density(p.beta - h, law)) / (2.0 * h);
      fd = std::max(fd, std::abs(-p.beta * p.beta * du - p.c_v) / p.c_v);
    }
    laws.push_back({{"mu", mu},
                    {"c_v_at_beta_min", curve.points.front().c_v},
                    {"u_beta_at_beta_min", curve.points.front().u * curve.points.front().beta},
                    {"c_v_at_beta_max", curve.points.back().c_v},
                    {"finite_difference_rel", fd}});
  }
  json res = {{"analytic", laws}};

  if (cfg.empirical) {
    const AnalyticLaw law = scale_map(cfg.m0, cfg.sigma_m, cfg.sigma_k);
    const double wmax = std::sqrt(law.omega0_sq * support_endpoint(law.mu));
    auto make = [&] { return OmegaAcc{SpectralHistogram(0.0, 1.25 * wmax, kPooledBins, Axis::Omega)}; };
    auto work = [&](OmegaAcc& acc, std::uint64_t i) {
      RngStream stream = derive_stream(cfg.seed, i);
      const EnsembleSpec spec{static_cast<Eigen::Index>(cfg.n), cfg.sigma_m, cfg.sigma_k, cfg.m0, cfg.field_kind(), cfg.seed};
      const auto w = cfg.field_kind() == Field::Complex ? solve_omega_sq(build_wishart_pencil<Complex>(spec, stream))
                                                 : solve_omega_sq(build_wishart_pencil<double>(spec, stream));
      acc.hist.add(sqrt_all(w, 1.0));
    };
    const OmegaAcc acc = farm<OmegaAcc>(cfg.samples, cfg.workers, make, work, progress(cfg, "thermo"));
    const ThermoCurve emp = empirical_curve(acc.hist, betas);
    const ThermoCurve ana = analytic_curve(law, betas);
    double du = 0.0, dc = 0.0;
    for (std::size_t i = 0; i < betas.size(); ++i) {
      const auto& e = emp.points[i];
      const auto& a = ana.points[i];
      c.row(law.mu, e.beta, e.u, e.c_v, to_string(emp.source));
      du = std::max(du, std::abs(e.u - a.u) / std::abs(a.u));
      dc = std::max(dc, std::abs(e.c_v - a.c_v) / std::abs(a.c_v));
    }
    res["empirical"] = {{"mu", law.mu},
                        {"omega0_sq", law.omega0_sq},
                        {"max_rel_u", du},
                        {"max_rel_c_v", dc},
                        {"overflow", acc.hist.overflow()}};
  }

  Writer w(cfg.out_dir);
  w.csv("thermo.csv", c);
  CommandOutput out;
  out.summary = {{"results", res}};
  out.files = w.take();
  return out;
}

// ---------------------------------------------------------------- selftest

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

std::vector<RunConfig> selftest_configs(const RunConfig& base) {
  RunConfig s = base;
  s.command = "sample";
  s.n = 48;
  s.samples = 40;
  s.field = "complex";
  s.m0 = 0.5;
  s.sigma_m = s.sigma_k = 1.0;
  s.seed = 20240611;
  s.bins = 0;
  s.vectors = true;
  s.target = "pencil";

  RunConfig p = s;
  p.command = "pendulum";
  p.pendulum = "disordered";
  p.n = 96;
  p.samples = 48;
  p.calq = 0.0;
  p.g = 1.0;

  RunConfig e = s;
  e.command = "edge";
  e.n = 32;
  e.samples = 64;
  e.m0 = 0.1;
  e.max_gof = 1e9;

  RunConfig t = s;
  t.command = "thermo";
  t.n = 32;
  t.samples = 16;
  t.m0 = 1.0;
  t.mu_list = {1.0};
  t.beta_points = 9;
  t.empirical = true;
  return {s, p, e, t};
}

}  // namespace

CommandOutput cmd_selftest(const RunConfig& cfg) {
  const int workers[] = {1, 8};
  const auto configs = selftest_configs(cfg);
  Writer w(cfg.out_dir);

  json checks = json::array();
  bool identical = true;
  for (const auto& base : configs) {
    std::vector<std::vector<fs::path>> written;
    for (int k : workers) {
      RunConfig c = base;
      c.workers = k;
      c.out_dir = cfg.out_dir / "selftest" / ("workers_" + std::to_string(k)) / c.command;
      written.push_back(run(c).files);
    }
    for (const auto& a : written[0]) {
      if (a.filename() == "timing.json") continue;
      const fs::path b = written[1].front().parent_path() / a.filename();
      const bool same = fs::exists(b) && slurp(a) == slurp(b);
      identical = identical && same;
      checks.push_back({{"command", base.command}, {"file", a.filename().string()}, {"identical", same}});
    }
    identical = identical && written[0].size() == written[1].size();
  }

  CommandOutput out;
  out.summary = {{"results", {{"workers", {1, 8}}, {"files", checks}, {"identical", identical}}}};
  out.files = w.take();
  return out;
}

// ---------------------------------------------------------------- driver

CommandOutput run(const RunConfig& cfg) {
  validate(cfg);
  const auto t0 = std::chrono::steady_clock::now();
  CommandOutput out;
  if (cfg.command == "sample") {
    out = cmd_sample(cfg);
  } else if (cfg.command == "pendulum") {
    out = cmd_pendulum(cfg);
  } else if (cfg.command == "analytic") {
    out = cmd_analytic(cfg);
  } else if (cfg.command == "edge") {
    out = cmd_edge(cfg);
  } else if (cfg.command == "thermo") {
    out = cmd_thermo(cfg);
  } else {
    out = cmd_selftest(cfg);
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  json summary = {{"schema_version", kSchemaVersion}, {"command", cfg.command}, {"config", to_json(cfg)}};
  summary["results"] = out.summary["results"];
  summary["timing_file"] = "timing.json";
  json files = json::array();
  for (const auto& f : out.files) files.push_back(f.filename().string());
  summary["files"] = files;

  Writer w(cfg.out_dir);
  w.text("summary.json", summary.dump(2) + "\n");
  w.text("timing.json", json{{"wall_seconds", secs}, {"workers", cfg.workers}}.dump(2) + "\n");
  for (auto& f : w.take()) out.files.push_back(f);
  out.summary = std::move(summary);

  if (cfg.command == "edge" && !out.summary["results"]["accepted"].get<bool>()) {
    fail(ErrorKind::PoorFit, "Airy fit gof " + format_double(out.summary["results"]["gof"].get<double>()) +
                                 " exceeds " + format_double(cfg.max_gof));
  }
  if (cfg.command == "selftest" && !out.summary["results"]["identical"].get<bool>()) {
    fail(ErrorKind::Mismatch, "outputs differ between 1 and 8 workers");
  }
  return out;
}

namespace {

int report_error(std::ostream& out, std::string_view kind, const std::string& msg, int code) {
  out << json{{"error", kind}, {"message", msg}, {"exit_code", code}}.dump() << '\n';
  return code;
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Vibrational spectra of random and pendulum mass/stiffness pencils"};
  RunConfig cfg;
  cfg.workers = default_workers();
  bind_options(app, cfg);
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    return report_error(out, "Validation", e.what(), kExitValidation);
  } catch (const Error& e) {
    return report_error(out, to_string(e.kind()), e.what(), kExitValidation);
  }

  try {
    const CommandOutput res = run(cfg);
    for (const auto& f : res.files) out << f.string() << '\n';
    return kExitOk;
  } catch (const Error& e) {
    return report_error(out, to_string(e.kind()), e.what(),
                        is_validation_error(e.kind()) ? kExitValidation : kExitNumerical);
  } catch (const std::exception& e) {
    return report_error(out, "Internal", e.what(), kExitNumerical);
  }
}

}  // namespace vibra
