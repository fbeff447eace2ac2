// One [PASS]/[FAIL] line per acceptance criterion; exit status 1 if any fails.
// Usage: acceptance <photodet-cli> <source dir>

#include "photodet/experiment.hpp"
#include "test_util.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <sstream>

using namespace photodet;
namespace fs = std::filesystem;

namespace {

// Tolerances
constexpr double kFig3Snr = 0.70, kFig3SnrTol = 0.10;
constexpr double kFig3Fidelity = 0.70, kFig3FidelityTol = 0.05;
constexpr double kAgreementSigmas = 3.0;
constexpr double kCascadeN2MinSnr = 1.0;
constexpr double kSqrtFitResidual = 0.15;
constexpr double kGeneratorTol = 1e-10;
constexpr double kHalvingFactorTol = 1.5;
constexpr double kUnravelMaxError = 0.05;
constexpr double kAbsorptionPeak = 0.99;
constexpr double kOpenLinePeak = 0.50, kOpenLineTol = 0.02;
constexpr double kMirrorMin = 0.98;
constexpr double kOracleRelTol = 0.02;
constexpr double kJcMinFidelity = 0.78;
constexpr double kVacuumVarianceTol = 0.10;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string source_dir;
std::string cli_path;

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

ExperimentConfig load(const std::string& name) { return load_config(source_dir + "/configs/" + name).config; }

std::vector<double> signals_of(const std::vector<TrajectoryResult>& runs, std::size_t filter = 0) {
  std::vector<double> out;
  for (const auto& r : runs) out.push_back(r.signals.at(filter));
  return out;
}

double mean_of(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / v.size(); }

double variance_of(const std::vector<double>& v) {
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / (v.size() - 1);
}

const ExperimentResult& fig3_run() {
  static const ExperimentResult r = run_experiment(load("fig3.cfg"));
  return r;
}

Outcome fig3_snr_and_fidelity() {
  const ExperimentResult& r = fig3_run();
  const double snr = r.summary.snr.snr;
  const double f = r.summary.thresholds.fidelity;
  return {std::abs(snr - kFig3Snr) <= kFig3SnrTol && std::abs(f - kFig3Fidelity) <= kFig3FidelityTol,
          fmt("SNR %.4f +- %.4f, F %.4f, window [%g, %g], %zu+%zu trajectories", snr, r.summary.snr.stderr_, f,
              r.filter.t_begin, r.filter.t_end, r.empty.size(), r.photon.size())};
}

Outcome analytic_matches_empirical() {
  const ExperimentResult& r = fig3_run();
  // Discretization error of the analytic value: compare against twice the step.
  ExperimentConfig coarse = load("fig3.cfg");
  coarse.dt *= 2.0;
  const double analytic_coarse = snr_analytic(build_setup(coarse), r.filter);
  const double se_analytic = std::abs(r.snr_analytic - analytic_coarse);
  const double combined = std::hypot(r.summary.snr.stderr_, se_analytic);
  const double diff = std::abs(r.summary.snr.snr - r.snr_analytic);
  return {diff <= kAgreementSigmas * combined,
          fmt("analytic %.4f, empirical %.4f, |diff| %.4f vs %.1f x %.4f", r.snr_analytic, r.summary.snr.snr, diff,
              kAgreementSigmas, combined)};
}

Outcome cascade_scaling() {
  const std::vector<double> begins{3.0, 3.5, 4.0};
  std::vector<double> snr;
  std::string detail;
  for (int n = 1; n <= 4; ++n) {
    ExperimentConfig cfg;
    cfg.kind = ExperimentKind::cascade;
    cfg.n_transmons = n;
    cfg.omega_p = 0.35;
    cfg.gamma12 = 4.0;
    cfg.t1 = 16.0;
    cfg.window_end = 16.0;
    cfg.dt = 0.01;
    const DetectorSetup setup = build_setup(cfg);
    const auto ends = candidate_times(4.5, cfg.t1, 0.5);
    const WindowChoice w = optimize_window(setup, FilterSpec::square(0.0, cfg.t1), begins, ends);
    snr.push_back(w.score);
    detail += fmt("N=%d %.4f [%g,%g] ", n, w.score, w.t_begin, w.t_end);
  }
  // Least-squares fit of a·√N
  double num = 0.0, den = 0.0;
  for (int n = 1; n <= 4; ++n) {
    num += snr[n - 1] * std::sqrt(n);
    den += n;
  }
  const double a = num / den;
  double worst = 0.0;
  for (int n = 1; n <= 4; ++n) worst = std::max(worst, std::abs(snr[n - 1] / (a * std::sqrt(n)) - 1.0));
  detail += fmt("| fit %.4f sqrt(N), worst residual %.1f%%", a, 100.0 * worst);
  return {snr[1] >= kCascadeN2MinSnr && worst < kSqrtFitResidual, detail};
}

Outcome slh_matches_explicit() {
  double worst = 0.0;
  const double omega = 0.35;
  const Envelope k = sqrt_kappa_envelope(Wavepacket{WavepacketShape::gaussian, 0.8, 4.0});
  for (int n : {2, 3}) {
    std::vector<TransmonParams> params;
    for (int j = 0; j < n; ++j) {
      TransmonParams p;
      p.delta01 = 0.1 * (j + 1);
      p.delta12 = -0.05 * j;
      p.gamma01 = 1.0 + 0.2 * j;
      p.gamma12 = 2.0 - 0.3 * j;
      params.push_back(p);
    }
    const Liouvillian slh(me_from_slh(cascade_transmons(params, k, kI * omega)));
    const Generator ref = explicit_cascaded_generator(params, k, omega);
    std::mt19937_64 rng(500 + n);
    for (int i = 0; i < 50; ++i) {
      const Matrix rho = testutil::random_density(ref.layout.dim(), rng);
      for (double t : {0.0, 2.5, 3.9, 4.6, 7.0}) {
        worst = std::max(worst, testutil::max_abs(slh.apply(t, rho) - ref.apply(t, rho)));
      }
    }
  }
  return {worst <= kGeneratorTol, fmt("max |L_slh rho - L_explicit rho| = %.3g over 2 x 50 x 5 cases", worst)};
}

Outcome unravelling_converges() {
  ExperimentConfig cfg = load("fig3.cfg");
  cfg.t1 = 6.0;
  cfg.window_end = 6.0;
  const DetectorSetup setup = build_setup(cfg);
  const MeSolution me = evolve_me(setup.liouvillian, setup.initial_photon, setup.grid);
  std::vector<double> err;
  std::uint64_t seed = 7000;
  for (int m : {100, 400, 1600}) {
    const MeSolution mean = ensemble_mean_states(setup, 1, m, seed);
    seed += m;
    double worst = 0.0;
    for (std::size_t s = 0; s < me.states.size(); ++s) worst = std::max(worst, trace_distance(mean.states[s], me.states[s]));
    err.push_back(worst);
  }
  bool halves = true;
  for (int i = 0; i + 1 < 3; ++i) {
    const double ratio = err[i] / err[i + 1];
    halves = halves && ratio >= 2.0 / kHalvingFactorTol && ratio <= 2.0 * kHalvingFactorTol;
  }
  return {halves && err[2] <= kUnravelMaxError,
          fmt("max trace distance M=100 %.4f, M=400 %.4f, M=1600 %.4f (ratios %.2f, %.2f)", err[0], err[1], err[2],
              err[0] / err[1], err[1] / err[2])};
}

Outcome absorption_peak() {
  auto peak = [](double omega_p) {
    ExperimentConfig cfg;
    cfg.photon_shape = WavepacketShape::rising_exponential;
    cfg.gamma_ph = 1.0;
    cfg.t_ph = 6.0;
    cfg.omega_p = omega_p;
    const DetectorSetup setup = build_setup(cfg);
    const auto p = excitation_probability(setup.liouvillian, setup.initial_photon, setup.grid);
    return *std::max_element(p.begin(), p.end());
  };
  const double off = peak(0.0);
  const double on = peak(0.35);
  return {off >= kAbsorptionPeak && on < off, fmt("max P1 %.5f without probe, %.5f with probe 0.35", off, on)};
}

Outcome lambda_efficiency() {
  auto matched = [](LineGeometry g) {
    LambdaConfig cfg;
    cfg.gamma = 1.0;
    cfg.coupling = g == LineGeometry::open_line ? std::sqrt(0.5) : 0.5;
    cfg.geometry = g;
    return cfg;
  };
  const Wavepacket wp{WavepacketShape::gaussian, 0.1, 0.0};
  ScanAxes axes;
  for (double v = 0.0; v <= 1.5 + 1e-9; v += 0.125) axes.coupling.push_back(v);
  axes.gamma_ph = {0.05, 0.1, 0.3};
  axes.detuning = {-0.5, 0.0, 0.5};
  const ScanTable open = efficiency_scan(matched(LineGeometry::open_line), wp, axes);
  const ScanTable mirror = efficiency_scan(matched(LineGeometry::mirror), wp, axes);
  const double open_max = open.rows[open.best].p_g;
  const double mirror_max = mirror.rows[mirror.best].p_g;

  struct Point {
    LineGeometry geometry;
    double coupling, gamma_ph, detuning;
  };
  const Point points[] = {
      {LineGeometry::open_line, std::sqrt(0.5), 0.3, 0.0}, {LineGeometry::open_line, 0.4, 1.0, 0.3},
      {LineGeometry::open_line, 1.0, 0.5, -0.4},           {LineGeometry::mirror, 0.5, 0.3, 0.0},
      {LineGeometry::mirror, 0.35, 0.8, 0.5},
  };
  double worst = 0.0;
  for (const Point& p : points) {
    LambdaConfig cfg = matched(p.geometry);
    cfg.coupling = p.coupling;
    cfg.detuning = p.detuning;
    const Wavepacket w{WavepacketShape::gaussian, p.gamma_ph, 0.0};
    worst = std::max(worst, std::abs(scatter_efficiency(cfg, w) / scatter_efficiency_pde_oracle(cfg, w) - 1.0));
  }
  return {std::abs(open_max - kOpenLinePeak) <= kOpenLineTol && mirror_max >= kMirrorMin && worst <= kOracleRelTol,
          fmt("open-line max %.4f, mirror max %.4f, ODE vs oracle worst %.2f%%", open_max, mirror_max,
              100.0 * worst)};
}

Outcome jc_matched_beats_square() {
  const ExperimentConfig cfg = load("jc.cfg");
  const DetectorSetup setup = build_setup(cfg);
  const auto begins = candidate_times(cfg.window_begin, cfg.window_end - cfg.window_step, cfg.window_step);
  const auto ends = candidate_times(cfg.window_begin + cfg.window_step, cfg.window_end, cfg.window_step);
  const FilterSpec square_shape = FilterSpec::square(cfg.window_begin, cfg.window_end);
  const FilterSpec matched_shape = matched_filter_template(setup, cfg.window_begin, cfg.window_end);
  const WindowChoice ws = optimize_window(setup, square_shape, begins, ends);
  const WindowChoice wm = optimize_window(setup, matched_shape, begins, ends);
  const std::vector<FilterSpec> filters{square_shape.with_window(ws.t_begin, ws.t_end),
                                        matched_shape.with_window(wm.t_begin, wm.t_end)};
  const auto n = static_cast<std::uint64_t>(cfg.trajectories);
  const auto empty = run_ensemble(setup, filters, 0, cfg.trajectories, cfg.base_seed, cfg.threads);
  const auto photon = run_ensemble(setup, filters, 1, cfg.trajectories, cfg.base_seed + n, cfg.threads);
  const Priors priors{cfg.prior0, 1.0 - cfg.prior0};
  const double f_square = optimize_threshold(signals_of(empty, 0), signals_of(photon, 0), priors).fidelity;
  const double f_matched = optimize_threshold(signals_of(empty, 1), signals_of(photon, 1), priors).fidelity;
  return {f_matched > f_square && std::max(f_square, f_matched) >= kJcMinFidelity,
          fmt("E %g g %g kappa_b %g gamma12 %g phase %g levels %d | square F %.4f (SNR %.3f [%g,%g]), matched F "
              "%.4f (SNR %.3f [%g,%g]), %d+%d trajectories",
              cfg.jc_drive, cfg.jc_coupling, cfg.jc_kappa_b, cfg.jc_gamma12, cfg.phase, cfg.jc_levels, f_square,
              ws.score, ws.t_begin, ws.t_end, f_matched, wm.score, wm.t_begin, wm.t_end, cfg.trajectories,
              cfg.trajectories)};
}

Outcome vacuum_noise_floor() {
  ExperimentConfig cfg = load("fig3.cfg");
  cfg.t1 = 4.0;
  cfg.window_end = 4.0;
  cfg.dt = 1e-2;
  const DetectorSetup setup = build_setup(cfg);
  const double t_m = 4.0;
  const FilterSpec square = FilterSpec::square(0.0, t_m);
  const auto s = signals_of(run_ensemble(setup, std::span(&square, 1), 0, 2000, 900));
  const double var = variance_of(s);
  return {std::abs(var / t_m - 1.0) <= kVacuumVarianceTol,
          fmt("Var S %.4f for t_m %g (ratio %.4f), mean %.4f, M = 2000", var, t_m, var / t_m, mean_of(s))};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome csv_reproducible() {
  if (cli_path.empty()) return {false, "no CLI path given"};
  const fs::path work = fs::temp_directory_path() / "photodet_acceptance";
  fs::remove_all(work);
  const std::string cfg = source_dir + "/tests/data/small.cfg";
  const char* runs[][2] = {{"a", ""}, {"b", ""}, {"c", " --threads 4"}};
  for (const auto& r : runs) {
    const std::string cmd = "\"" + cli_path + "\" run \"" + cfg + "\" --out \"" + (work / r[0]).string() + "\"" + r[1] +
                            " > /dev/null";
    if (std::system(cmd.c_str()) != 0) return {false, "CLI run failed: " + cmd};
  }
  bool same = true;
  std::size_t bytes = 0;
  for (const char* f : {"trajectories.csv", "histogram.csv"}) {
    const std::string a = slurp(work / "a" / f);
    bytes += a.size();
    same = same && !a.empty() && a == slurp(work / "b" / f) && a == slurp(work / "c" / f);
  }
  same = same && slurp(work / "a" / "summary.json") == slurp(work / "b" / "summary.json");
  return {same, fmt("trajectories.csv and histogram.csv (%zu bytes) identical across 3 runs, 1 and 4 threads", bytes)};
}

}  // namespace

int main(int argc, char** argv) {
  cli_path = argc > 1 ? argv[1] : "";
  source_dir = argc > 2 ? argv[2] : PHOTODET_SOURCE_DIR;

  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"fig3 SNR and fidelity", fig3_snr_and_fidelity},
      {"analytic SNR vs empirical", analytic_matches_empirical},
      {"cascade sqrt(N) gain", cascade_scaling},
      {"SLH vs explicit generator", slh_matches_explicit},
      {"unravelling convergence", unravelling_converges},
      {"absorption peak", absorption_peak},
      {"lambda scatterer efficiency", lambda_efficiency},
      {"jc unit matched filter", jc_matched_beats_square},
      {"vacuum noise floor", vacuum_noise_floor},
      {"reproducible CSV", csv_reproducible},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("[%s] %zu %s: %s (%.0f s)\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.c_str(), secs);
    std::fflush(stdout);
    failed += o.pass ? 0 : 1;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
