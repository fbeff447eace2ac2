#include "photodet/lambda_scatter.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

using namespace photodet;

namespace {

constexpr double kPi = std::numbers::pi;

// Line emission equal to Γ: Γr = Γ on the open line, 2Γr = Γ at the mirror.
LambdaConfig matched(LineGeometry geometry) {
  LambdaConfig cfg;
  cfg.gamma = 1.0;
  cfg.coupling = geometry == LineGeometry::open_line ? std::sqrt(0.5) : 0.5;
  cfg.geometry = geometry;
  return cfg;
}

// Steady-state efficiency for a monochromatic resonant photon.
double monochromatic_limit(const LambdaConfig& cfg) {
  const double total = cfg.gamma + cfg.line_rate();
  return 4.0 * cfg.gamma * cfg.input_rate() / (total * total);
}

}  // namespace

TEST(Washboard, Examples) {
  const double ic = 2e-6;
  const double scale = ic * kFluxQuantum / (2.0 * kPi);
  EXPECT_DOUBLE_EQ(washboard_potential(0.0, ic, 0.0), -scale);
  for (double d : {-2.0, 0.3, 1.7, 5.0}) {
    EXPECT_NEAR(washboard_potential(d + 2.0 * kPi, ic, 0.0), washboard_potential(d, ic, 0.0), 1e-12 * scale);
  }
  // Tilt: U(δ + 2π) = U(δ) − 2π Ib.
  EXPECT_NEAR(washboard_potential(1.0 + 2.0 * kPi, ic, 0.3 * scale) - washboard_potential(1.0, ic, 0.3 * scale),
              -2.0 * kPi * 0.3 * scale, 1e-12 * scale);
  EXPECT_THROW(washboard_potential(0.0, 0.0, 0.0), std::invalid_argument);
  EXPECT_THROW(washboard_slope(0.0, -1.0, 0.0), std::invalid_argument);
}

TEST(Washboard, OvertiltedHasNoStationaryPoint) {
  const double ic = 1e-6;
  const double scale = ic * kFluxQuantum / (2.0 * kPi);
  for (int i = 0; i <= 1000; ++i) {
    const double d = -kPi + 4.0 * kPi * i / 1000;
    EXPECT_LT(washboard_slope(d, ic, 1.01 * scale), 0.0);
    // Finite-difference check of the slope formula.
    const double h = 1e-5;
    const double fd = (washboard_potential(d + h, ic, 0.4 * scale) - washboard_potential(d - h, ic, 0.4 * scale)) / (2 * h);
    EXPECT_NEAR(fd, washboard_slope(d, ic, 0.4 * scale), 1e-8 * scale);
  }
}

TEST(LambdaConfig, RatesAndValidation) {
  LambdaConfig open = matched(LineGeometry::open_line);
  EXPECT_DOUBLE_EQ(open.radiative_rate(), 1.0);
  EXPECT_DOUBLE_EQ(open.input_rate(), 0.5);
  EXPECT_DOUBLE_EQ(open.line_rate(), 1.0);
  EXPECT_DOUBLE_EQ(matched(LineGeometry::mirror).input_rate(), 1.0);
  EXPECT_DOUBLE_EQ(matched(LineGeometry::mirror).line_rate(), 1.0);
  EXPECT_EQ(parse_geometry(to_string(LineGeometry::mirror)), LineGeometry::mirror);
  EXPECT_THROW(parse_geometry("ring"), std::invalid_argument);
  open.gamma = -1.0;
  EXPECT_THROW(open.validate(), std::invalid_argument);
  open.gamma = 1.0;
  open.v_g = 0.0;
  EXPECT_THROW(open.validate(), std::invalid_argument);
}

TEST(ScatterEfficiency, NoCouplingNoAbsorption) {
  LambdaConfig cfg = matched(LineGeometry::open_line);
  cfg.coupling = 0.0;
  EXPECT_EQ(scatter_efficiency(cfg, Wavepacket{WavepacketShape::gaussian, 0.5, 0.0}), 0.0);
}

TEST(ScatterEfficiency, NoDecayNoAbsorption) {
  LambdaConfig cfg = matched(LineGeometry::mirror);
  cfg.gamma = 0.0;
  EXPECT_EQ(scatter_efficiency(cfg, Wavepacket{WavepacketShape::gaussian, 0.5, 0.0}), 0.0);
}

TEST(ScatterEfficiency, ApproachesMonochromaticLimit) {
  for (auto geometry : {LineGeometry::open_line, LineGeometry::mirror}) {
    const LambdaConfig cfg = matched(geometry);
    double last = 0.0;
    for (double bw : {1.0, 0.3, 0.1, 0.03}) {
      const double p = scatter_efficiency(cfg, Wavepacket{WavepacketShape::gaussian, bw, 0.0});
      EXPECT_GT(p, last);
      EXPECT_LE(p, monochromatic_limit(cfg) + 1e-6);
      last = p;
    }
    EXPECT_NEAR(last, monochromatic_limit(cfg), 0.02);
  }
  EXPECT_DOUBLE_EQ(monochromatic_limit(matched(LineGeometry::open_line)), 0.5);
  EXPECT_DOUBLE_EQ(monochromatic_limit(matched(LineGeometry::mirror)), 1.0);
}

TEST(ScatterEfficiency, RejectsUnnormalizedPulse) {
  const Wavepacket wp{WavepacketShape::gaussian, 0.5, 0.0};
  IncidentPulse pulse = IncidentPulse::from(wp);
  EXPECT_NEAR(pulse.norm(), 1.0, 1e-8);
  pulse.amplitude = [wp](double t) { return Complex(1.1 * wp.amplitude(t), 0.0); };
  EXPECT_THROW(scatter_efficiency(matched(LineGeometry::open_line), pulse), std::invalid_argument);
}

TEST(EfficiencyScan, OpenLineBoundAndMirrorPeak) {
  const Wavepacket wp{WavepacketShape::gaussian, 0.1, 0.0};
  ScanAxes axes;
  for (double v = 0.0; v <= 1.5 + 1e-9; v += 0.125) axes.coupling.push_back(v);
  axes.gamma_ph = {0.05, 0.1, 0.3};
  axes.detuning = {-0.5, 0.0, 0.5};

  const ScanTable open = efficiency_scan(matched(LineGeometry::open_line), wp, axes);
  ASSERT_EQ(open.rows.size(), axes.coupling.size() * 9);
  for (const ScanRow& r : open.rows) {
    EXPECT_LE(r.p_g, 0.52);
    if (r.coupling == 0.0) {
      EXPECT_EQ(r.p_g, 0.0);
    }
  }
  EXPECT_NEAR(open.rows[open.best].p_g, 0.50, 0.02);
  for (const ScanRow& r : open.rows) EXPECT_LE(r.p_g, open.rows[open.best].p_g);

  const ScanTable mirror = efficiency_scan(matched(LineGeometry::mirror), wp, axes);
  EXPECT_GE(mirror.rows[mirror.best].p_g, 0.98);
  EXPECT_LE(mirror.rows[mirror.best].p_g, 1.0 + 1e-9);
}

TEST(EfficiencyScan, EmptyAxesKeepTemplate) {
  const Wavepacket wp{WavepacketShape::gaussian, 0.2, 0.0};
  const LambdaConfig cfg = matched(LineGeometry::open_line);
  const ScanTable t = efficiency_scan(cfg, wp, ScanAxes{});
  ASSERT_EQ(t.rows.size(), 1u);
  EXPECT_EQ(t.rows[0].coupling, cfg.coupling);
  EXPECT_EQ(t.rows[0].p_g, scatter_efficiency(cfg, wp));
}

TEST(PdeOracle, FreePropagationConservesNorm) {
  LambdaConfig cfg = matched(LineGeometry::open_line);
  cfg.coupling = 0.0;
  const OracleResult r = evolve_pde_oracle(cfg, IncidentPulse::from(Wavepacket{WavepacketShape::gaussian, 0.5, 0.0}), 2e-3);
  EXPECT_EQ(r.p_g, 0.0);
  for (double n : r.trace.norm) EXPECT_NEAR(n, 1.0, 1e-6);
}

TEST(PdeOracle, NoDecayNoLoss) {
  LambdaConfig cfg = matched(LineGeometry::mirror);
  cfg.gamma = 0.0;
  const OracleResult r = evolve_pde_oracle(cfg, IncidentPulse::from(Wavepacket{WavepacketShape::gaussian, 0.5, 0.0}), 2e-3);
  // P_g = 1 − ‖φ‖² on the grid, exact up to rounding of the unitary steps.
  EXPECT_NEAR(r.p_g, 0.0, 1e-12);
  for (double n : r.trace.norm) EXPECT_NEAR(n, 1.0, 1e-6);
}

TEST(PdeOracle, NormBookkeepingAndMonotoneLoss) {
  for (auto geometry : {LineGeometry::open_line, LineGeometry::mirror}) {
    const LambdaConfig cfg = matched(geometry);
    const OracleResult r = evolve_pde_oracle(cfg, IncidentPulse::from(Wavepacket{WavepacketShape::gaussian, 0.4, 0.0}), 2e-3);
    ASSERT_GT(r.trace.times.size(), 10u);
    for (std::size_t i = 0; i < r.trace.times.size(); ++i) {
      EXPECT_NEAR(r.trace.norm[i] + r.trace.absorbed[i], 1.0, 1e-6) << "t = " << r.trace.times[i];
      if (i > 0) {
        EXPECT_GE(r.trace.absorbed[i], r.trace.absorbed[i - 1]);
      }
    }
    EXPECT_NEAR(r.p_g, r.trace.absorbed.back(), 1e-12);
  }
}

TEST(PdeOracle, AgreesWithReducedModel) {
  struct Point {
    LineGeometry geometry;
    double coupling;
    double gamma_ph;
    double detuning;
  };
  const Point points[] = {
      {LineGeometry::open_line, std::sqrt(0.5), 0.3, 0.0}, {LineGeometry::open_line, 0.4, 1.0, 0.3},
      {LineGeometry::open_line, 1.0, 0.5, -0.4},           {LineGeometry::mirror, 0.5, 0.3, 0.0},
      {LineGeometry::mirror, 0.35, 0.8, 0.5},
  };
  for (const Point& p : points) {
    LambdaConfig cfg = matched(p.geometry);
    cfg.coupling = p.coupling;
    cfg.detuning = p.detuning;
    const Wavepacket wp{WavepacketShape::gaussian, p.gamma_ph, 0.0};
    const double reduced = scatter_efficiency(cfg, wp);
    const double oracle = scatter_efficiency_pde_oracle(cfg, wp);
    EXPECT_GT(oracle, 0.05);
    EXPECT_NEAR(reduced / oracle, 1.0, 0.02) << to_string(p.geometry) << " V = " << p.coupling
                                              << " Γph = " << p.gamma_ph << " Δ = " << p.detuning;
  }
}

TEST(PdeOracle, CoarseGridFailsResolutionGate) {
  const Wavepacket wp{WavepacketShape::gaussian, 4.0, 0.0};
  LambdaConfig cfg = matched(LineGeometry::open_line);
  cfg.coupling = 2.0;
  EXPECT_THROW(scatter_efficiency_pde_oracle(cfg, wp, 0.25), std::runtime_error);
}
