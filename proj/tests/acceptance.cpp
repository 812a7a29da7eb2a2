// Runs the acceptance criteria and prints one PASS/FAIL line per criterion.
// Exit status is 0 only when every criterion passes.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "vibra/commands.hpp"
#include "vibra/config.hpp"
#include "vibra/ensembles.hpp"
#include "vibra/error.hpp"
#include "vibra/freeprob.hpp"
#include "vibra/pencil.hpp"
#include "vibra/spectral_stats.hpp"

using namespace vibra;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
  std::string analysis;  // printed only on failure
};

struct Options {
  fs::path out = "acceptance_out";
  int workers = 1;
  bool full = false;
  std::set<int> only;
};

std::string fmt(double v, int prec = 4) {
  std::ostringstream s;
  s.precision(prec);
  s << v;
  return s.str();
}

json run_cmd(RunConfig cfg, const Options& o, const std::string& sub) {
  cfg.workers = o.workers;
  cfg.out_dir = o.out / sub;
  cfg.quiet = true;
  return run(cfg).summary["results"];
}

Verdict c1_structure(const Options&) {
  double worst = 0.0, worst_neg = 0.0;
  int bad = 0;
  for (int i = 0; i < 100; ++i) {
    const Eigen::Index n = 8 + (i * 37) % 249;
    const bool complex = i % 2 == 0;
    const EnsembleSpec spec{n, 1.0, 1.0, 1.0, complex ? Field::Complex : Field::Real, 1000};
    RngStream s = derive_stream(1000, static_cast<std::uint64_t>(i));
    QuasiHermitianReport r;
    double min_w = 0.0;
    if (complex) {
      const auto p = build_wishart_pencil<Complex>(spec, s);
      const auto m = solve_modes(p);
      r = check_quasi_hermitian(p, m);
      min_w = m.omega_sq.front();
    } else {
      const auto p = build_wishart_pencil<double>(spec, s);
      const auto m = solve_modes(p);
      r = check_quasi_hermitian(p, m);
      min_w = m.omega_sq.front();
    }
    worst = std::max(worst, r.intertwining);
    worst_neg = std::min(worst_neg, min_w);
    bad += r.intertwining > 1e-10 || min_w < 0.0;
  }
  return {bad == 0, "100 pencils n<=256, max intertwining " + fmt(worst, 3) + " (<= 1e-10), min omega^2 " + fmt(worst_neg),
          std::to_string(bad) + " pencils out of tolerance"};
}

Verdict c2_marchenko_pastur(const Options& o) {
  RunConfig c;
  c.command = "sample";
  c.target = "stiffness";
  c.n = 1024;
  c.samples = 500;
  c.vectors = false;
  const json r = run_cmd(c, o, "c2_mp");
  const double l1 = r["bulk_l1"], spill = r["beyond_edge_fraction"];
  return {l1 <= 0.03 && spill <= 0.005,
          "n=1024 x500 stiffness spectra: bulk L1 " + fmt(l1) + " (<= 0.03), beyond 4 sigma^2 " + fmt(100 * spill) +
              "% (<= 0.5%)",
          "bulk L1 or edge spill above tolerance"};
}

Verdict c3_analytic(const Options& o) {
  RunConfig c;
  c.command = "analytic";
  c.mu_list = {0.1, 0.5, 1.0, 10.0};
  c.points = 1000;
  const json r = run_cmd(c, o, "c3_analytic");
  const double cross = r["max_closed_form_vs_cubic"];
  double mass_err = 0.0;
  for (const auto& law : r["laws"]) mass_err = std::max(mass_err, std::abs(law["mass"].get<double>() - 1.0));
  int sign_bad = 0;
  for (double mu : c.mu_list) {
    const double x1 = support_endpoint(mu);
    for (int i = 1; i < 100000; ++i) sign_bad += discriminant(x1 * i / 100000.0, mu) >= 0.0;
    for (int i = 1; i <= 1000; ++i) sign_bad += discriminant(x1 * (1.0 + i / 1000.0), mu) <= 0.0;
  }
  return {cross <= 1e-9 && mass_err <= 1e-8 && sign_bad == 0,
          "closed form vs cubic " + fmt(cross, 3) + " (<= 1e-9), |mass - 1| " + fmt(mass_err, 3) +
              " (<= 1e-8), discriminant sign violations " + std::to_string(sign_bad),
          "closed form, normalization or discriminant sign out of tolerance"};
}

Verdict c4_monte_carlo(const Options& o) {
  RunConfig c;
  c.command = "sample";
  c.n = 1024;
  c.samples = 2000;
  c.m0 = 0.5;
  c.vectors = false;
  const json r = run_cmd(c, o, "c4_pencil");
  const double l1 = r["bulk_l1"];
  return {l1 <= 0.02, "complex n=1024 x2000, mu=0.5: bulk L1 " + fmt(l1) + " (<= 0.02)",
          "Monte Carlo density deviates from the analytic law in the bulk window"};
}

Verdict c5_endpoint(const Options&) {
  auto f = [](double x) { return ((5.0 * x - 6.0) * x - 11.0) * x - 32.0; };
  double lo = 0.0, hi = 10.0;
  for (int i = 0; i < 200; ++i) {
    const double m = 0.5 * (lo + hi);
    (f(m) < 0 ? lo : hi) = m;
  }
  const double oracle = 0.5 * (lo + hi), x1 = support_endpoint(1.0);
  bool monotone = true;
  double prev = INFINITY;
  for (double mu : {0.01, 0.02, 0.05, 0.1, 0.2, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 100.0}) {
    const double v = support_endpoint(mu);
    monotone = monotone && v < prev;
    prev = v;
  }
  const double ratio = support_endpoint(100.0) * 100.0 / 4.0;
  const bool pass = std::abs(x1 - 2.8005) <= 1e-3 && std::abs(x1 - oracle) <= 1e-12 && monotone &&
                    std::abs(ratio - 1.0) <= 0.05;
  return {pass,
          "x1(1) = " + fmt(x1, 8) + " (bisection " + fmt(oracle, 8) + ", target 2.8005 +- 1e-3), monotone " +
              (monotone ? "yes" : "no") + ", x1 mu/4 at mu=100 = " + fmt(ratio),
          "endpoint law out of tolerance"};
}

Verdict c6_participation(const Options& o) {
  std::string detail;
  bool pass = true;
  for (const auto& [field, target] : {std::pair{"complex", 0.50}, {"real", 0.33}}) {
    RunConfig c;
    c.command = "sample";
    c.n = 128;
    c.samples = 10000;
    c.field = field;
    const json r = run_cmd(c, o, std::string("c6_pr_") + field);
    const double mean = r["pr"]["mean"], dev = r["pr"]["max_bin_deviation"];
    pass = pass && std::abs(mean - target) <= 0.02 && dev <= 0.05;
    detail += std::string(field) + " mean p " + fmt(mean) + " (" + fmt(target, 2) + " +- 0.02), flatness " + fmt(dev) +
              " (<= 0.05); ";
  }
  return {pass, "n=128 x1e4: " + detail, "participation ratio level or flatness out of tolerance"};
}

Verdict c7_edge(const Options& o) {
  const double r_ref = 19.7;
  RunConfig c;
  c.command = "edge";
  c.m0 = 0.1;
  c.max_gof = 1e9;
  c.n = o.full ? 2048 : 512;
  c.samples = o.full ? 100000 : 1500;
  const json r = run_cmd(c, o, o.full ? "c7_edge_full" : "c7_edge_reduced");
  const double gof = r["gof"], fit_r = r["r"];
  const auto w1 = make_edge_histogram(1.0, 10.0, 512), w2 = make_edge_histogram(1.0, 10.0, 1024);
  const double scaling = (w1.hi() - w1.lo()) / (w2.hi() - w2.lo());
  const bool window_ok = std::abs(scaling - std::pow(2.0, 2.0 / 3.0)) <= 1e-12;
  const double r_dev = std::abs(fit_r - r_ref) / r_ref;
  std::string detail = "n=" + std::to_string(c.n) + " x" + std::to_string(c.samples) + ", mu=0.1: gof " + fmt(gof) +
                       ", r " + fmt(fit_r) + " (" + fmt(100 * r_dev, 3) + "% from 19.7), window ratio " +
                       fmt(scaling, 6) + " (2^(2/3))";
  if (o.full) {
    return {gof <= 0.1 && r_dev <= 0.15 && window_ok, "full " + detail + "; needs gof <= 0.1, r within 15%",
            "full-scale edge fit out of tolerance"};
  }
  return {gof <= 0.2 && window_ok,
          "reduced " + detail + "; needs gof <= 0.2 (full n=2048 x1e5 run via --full)",
          "reduced edge fit above gof 0.2: the edge window holds too few eigenvalues per bin"};
}

// C9 runs first; C8 reads its low-frequency flatness.
json g_disordered;

Verdict c9_spacings(const Options& o) {
  RunConfig c;
  c.command = "pendulum";
  c.pendulum = "disordered";
  c.calq = 0.0;
  c.g = 1.0;
  c.n = 1024;
  c.samples = 500;
  g_disordered = run_cmd(c, o, "c9_disordered");
  const json& sp = g_disordered["spacings"];
  const double high = sp["high"]["poisson_sup_deviation"], low = sp["low"]["density_below_0.1"];
  const double high_small = sp["high"]["density_below_0.1"];
  const double cut1 = g_disordered["cuts"]["r1"], cut2 = g_disordered["cuts"]["r2"];
  const double count = sp["high"]["count"];
  std::string detail = "disordered gravity n=1024 x500: high-region sup|P(s) - e^-s| " + fmt(high) +
                       " (<= 0.1), low-region density at s<0.1 " + fmt(low) + " (< 0.3); cuts " + fmt(cut1) + ", " +
                       fmt(cut2) + "; counts low/mid/high " + sp["low"]["count"].dump() + "/" +
                       sp["mid"]["count"].dump() + "/" + sp["high"]["count"].dump();
  // Poisson noise of one 0.1-wide bin near s = 0 is about sqrt(0.1 count) / (0.1 count).
  const double noise = std::sqrt(0.1 * count) / (0.1 * count);
  std::string analysis = "high-region density at s<0.1 is " + fmt(high_small) + " against " +
                         fmt((1.0 - std::exp(-0.1)) / 0.1) +
                         " for e^-s; the shortfall sits at small s, so levels above the PR peak still repel at "
                         "n=1024. With " + fmt(count, 6) + " spacings the per-bin noise is about " + fmt(noise, 2) +
                         ", so the gap is systematic, consistent with modes in this band not yet being localized enough at this size "
                         "for uncorrelated levels.";
  return {high <= 0.1 && low < 0.3, detail, analysis};
}

Verdict c8_pendulum(const Options& o) {
  RunConfig c;
  c.command = "pendulum";
  c.pendulum = "uniform";
  c.calq = 0.0;
  c.g = 1.0;
  c.n = 4096;
  c.samples = 1;
  c.vectors = false;
  const json r = run_cmd(c, o, "c8_uniform");
  const double l1 = r["mp_fit"]["l1"], sigma_sq = r["mp_fit"]["sigma_sq"];
  if (g_disordered.is_null()) return {false, "disordered run missing", "criterion 9 did not produce its run"};
  const json& flat = g_disordered["low_frequency_flatness"];
  const double dev = flat.is_null() ? INFINITY : flat["max_relative_deviation"].get<double>();
  return {l1 <= 0.05 && dev <= 0.1,
          "uniform gravity n=4096: MP fit L1 " + fmt(l1) + " (<= 0.05, sigma^2 " + fmt(sigma_sq) +
              "); disordered gravity n=1024: low-frequency density spread " + fmt(dev) + " (<= 0.1)",
          "pendulum density shape out of tolerance"};
}

Verdict c10_thermo(const Options& o) {
  RunConfig c;
  c.command = "thermo";
  c.mu_list = {1e-4, 0.1, 1.0, 100.0};
  c.empirical = true;
  c.n = 1024;
  c.samples = 200;
  c.m0 = 1.0;
  const json r = run_cmd(c, o, "c10_thermo");
  double cv_dev = 0.0, fd = 0.0;
  for (const auto& law : r["analytic"]) {
    cv_dev = std::max(cv_dev, std::abs(law["c_v_at_beta_min"].get<double>() - 1.0));
    fd = std::max(fd, law["finite_difference_rel"].get<double>());
  }
  const double du = r["empirical"]["max_rel_u"], dc = r["empirical"]["max_rel_c_v"];
  return {cv_dev <= 1e-3 && fd <= 1e-5 && du <= 1e-3 && dc <= 1e-3,
          "|c_v(1e-3) - 1| " + fmt(cv_dev, 3) + " (<= 1e-3), finite difference " + fmt(fd, 3) +
              " (<= 1e-5), empirical n=1024 x200 vs analytic: u " + fmt(du, 3) + ", c_v " + fmt(dc, 3) + " (<= 1e-3)",
          "the empirical curve differs from the analytic law at the largest beta, where only the few lowest "
          "modes of each finite-n sample contribute"};
}

Verdict c11_determinism(const Options& o) {
  RunConfig c;
  c.command = "selftest";
  const json r = run_cmd(c, o, "c11_selftest");
  return {r["identical"].get<bool>(),
          std::to_string(r["files"].size()) + " files byte-identical between 1 and 8 workers",
          "outputs differ between worker counts"};
}

}  // namespace

int main(int argc, char** argv) {
  linalg::ensure_working_blas(argv);
  Options o;
  o.workers = default_workers();
  std::vector<int> only;
  CLI::App app{"acceptance criteria"};
  app.add_option("--out", o.out, "output directory");
  app.add_option("--workers", o.workers, "worker threads");
  app.add_flag("--full", o.full, "run the full-scale edge criterion (n=2048, 1e5 samples)");
  app.add_option("--only", only, "criterion numbers to run")->delimiter(',');
  CLI11_PARSE(app, argc, argv);
  o.only.insert(only.begin(), only.end());

  struct Criterion {
    int id;
    const char* name;
    std::function<Verdict(const Options&)> run;
  };
  const std::vector<Criterion> criteria{
      {1, "structure exactness", c1_structure},  {2, "Marchenko-Pastur reference", c2_marchenko_pastur},
      {3, "analytic self-consistency", c3_analytic}, {4, "Monte Carlo vs theory", c4_monte_carlo},
      {5, "endpoint law", c5_endpoint},           {6, "participation ratios", c6_participation},
      {7, "edge universality", c7_edge},          {9, "spacing statistics", c9_spacings},
      {8, "pendulum reproduction", c8_pendulum},  {10, "thermodynamics", c10_thermo},
      {11, "determinism", c11_determinism},
  };

  int failed = 0;
  for (const auto& c : criteria) {
    if (!o.only.empty() && !o.only.count(c.id) && !(c.id == 9 && o.only.count(8))) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.run(o);
    } catch (const Error& e) {
      v = {false, std::string(to_string(e.kind())) + ": " + e.what(), "the run raised an error"};
    } catch (const std::exception& e) {
      v = {false, e.what(), "the run raised an error"};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!o.only.empty() && !o.only.count(c.id)) continue;
    failed += !v.pass;
    std::printf("[%s] C%-2d %s: %s (%.1f s)\n", v.pass ? "PASS" : "FAIL", c.id, c.name, v.detail.c_str(), secs);
    if (!v.pass) std::printf("       analysis: %s\n", v.analysis.c_str());
    std::fflush(stdout);
  }
  std::printf("%d criteria failed\n", failed);
  return failed == 0 ? 0 : 1;
}
