#pragma once

#include "photodet/sources.hpp"

#include <functional>
#include <string_view>
#include <vector>

namespace photodet {

/// Flux quantum h/2e in webers.
inline constexpr double kFluxQuantum = 2.067833848e-15;

/// U(δ) = −(Ic Φ0 / 2π) cos δ − Ib δ
double washboard_potential(double delta, double ic, double ib);
/// dU/dδ = (Ic Φ0 / 2π) sin δ − Ib
double washboard_slope(double delta, double ic, double ib);

enum class LineGeometry { open_line, mirror };

LineGeometry parse_geometry(std::string_view name);
std::string_view to_string(LineGeometry g);

/// Single Λ scatterer at x = 0. Frequencies are measured in a frame rotating
/// at the photon carrier, so only the detuning ω − ω_photon enters.
struct LambdaConfig {
  double gamma = 1.0;     // |1⟩ → |g⟩
  double coupling = 0.0;  // V
  double v_g = 1.0;
  LineGeometry geometry = LineGeometry::open_line;
  double detuning = 0.0;

  /// Γr = 2V²/v_g
  double radiative_rate() const { return 2.0 * coupling * coupling / v_g; }
  /// Total emission rate into the line: Γr, or 2Γr in front of the mirror.
  double line_rate() const;
  /// Amplitude-squared rate at which the incident photon drives |1⟩:
  /// Γr/2 on the open line, 2Γr in front of the mirror.
  double input_rate() const;
  void validate() const;
};

/// Incident one-photon pulse as seen at x = 0.
struct IncidentPulse {
  std::function<Complex(double)> amplitude;
  double t_begin = 0.0;
  double t_end = 0.0;

  static IncidentPulse from(const Wavepacket& wp);
  /// ∫|ξ|² by composite Simpson on n intervals.
  double norm(int n = 20000) const;
};

/// Long-time P_g from ė = −(iΔ + (Γ + Γ_line)/2) e − i√γ_in ξ(t), P_g = Γ∫|e|² dt.
/// Throws std::invalid_argument if the pulse norm differs from 1 by more than 1e-6.
double scatter_efficiency(const LambdaConfig& cfg, const IncidentPulse& pulse, double dt = 1e-3);
double scatter_efficiency(const LambdaConfig& cfg, const Wavepacket& wp, double dt = 1e-3);

struct OracleTrace {
  std::vector<double> times;
  std::vector<double> norm;     // ‖φ(t)‖² from the spatial grid
  std::vector<double> absorbed;  // accumulated loss to |g⟩
};

struct OracleResult {
  double p_g = 0.0;
  OracleTrace trace;
};

/// Time-bin discretization of the real-space field: cells of width v_g·dt
/// advect by exactly one cell per step and the cell at x = 0 exchanges
/// amplitude with e(t) through the exact one-step propagator. With a mirror
/// the left-going output returns after `mirror_delay` steps with reflection +1.
OracleResult evolve_pde_oracle(const LambdaConfig& cfg, const IncidentPulse& pulse, double dt,
                               int mirror_delay = 1, int record_every = 64);

/// Oracle at dt and dt/2; throws std::runtime_error when the two differ by
/// more than 1% (absolute floor 1e-4). Returns the finer value.
double scatter_efficiency_pde_oracle(const LambdaConfig& cfg, const Wavepacket& wp, double dt = 2e-3);

struct ScanAxes {
  std::vector<double> coupling;  // V
  std::vector<double> gamma_ph;
  std::vector<double> detuning;
};

struct ScanRow {
  double coupling = 0.0;
  double gamma_ph = 0.0;
  double detuning = 0.0;
  double p_g = 0.0;
};

struct ScanTable {
  std::vector<ScanRow> rows;
  std::size_t best = 0;
};

/// Cartesian scan of scatter_efficiency; an empty axis keeps the template value.
/// The first maximum in row order wins.
ScanTable efficiency_scan(const LambdaConfig& base, const Wavepacket& wp, const ScanAxes& axes, double dt = 1e-3);

}  // namespace photodet
