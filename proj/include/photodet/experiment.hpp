#pragma once

#include "photodet/detection.hpp"
#include "photodet/lambda_scatter.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace photodet {

enum class ExperimentKind { single_transmon, cascade, jc_unit, lambda, snr_analytic };

ExperimentKind parse_kind(std::string_view name);
std::string_view to_string(ExperimentKind kind);

/// Flat experiment description. Rates and times are in units of Γ01.
struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::single_transmon;

  // transmons
  int n_transmons = 1;
  double delta01 = 0.0;
  double delta12 = 0.0;
  double gamma12 = 2.0;
  double omega_p = 0.35;

  // control photon
  WavepacketShape photon_shape = WavepacketShape::gaussian;
  double gamma_ph = 0.8;
  double t_ph = 4.0;

  // probe cavity unit
  double jc_delta1 = 0.0;
  double jc_delta2 = 0.0;
  double jc_drive = 0.1;
  double jc_coupling = 1.0;
  double jc_kappa_b = 0.5;
  double jc_gamma12 = 0.1;
  int jc_levels = 8;

  // Λ scatterer
  double lambda_gamma = 1.0;
  double lambda_coupling = 0.70710678118654757;
  double lambda_vg = 1.0;
  LineGeometry lambda_geometry = LineGeometry::open_line;
  double lambda_detuning = 0.0;

  // measurement
  double phase = 1.5707963267948966;
  double eta = 1.0;

  // time grid
  double t0 = 0.0;
  double t1 = 12.0;
  double dt = 1e-3;

  // ensemble
  int trajectories = 2000;
  std::uint64_t base_seed = 1;
  int threads = 1;

  // filter and window
  FilterKind filter = FilterKind::square;
  bool optimize_window = true;
  double window_begin = 0.0;
  double window_end = 12.0;
  double window_step = 0.25;

  // decision
  double prior0 = 0.5;
  bool histogram = true;

  bool operator==(const ExperimentConfig&) const = default;
};

struct ConfigIssue {
  enum class Severity { error, warning };
  Severity severity = Severity::error;
  int line = 0;  // 0 when not tied to a line
  std::string field;
  std::string message;
};

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<ConfigIssue> issues);
  const std::vector<ConfigIssue>& issues() const { return issues_; }

 private:
  std::vector<ConfigIssue> issues_;
};

std::string format_issue(const ConfigIssue& issue, const std::string& source = {});

/// Parsed config plus the line on which each key was set.
struct ParsedConfig {
  ExperimentConfig config;
  std::map<std::string, int> lines;
};

/// `key = value` lines, `#` starts a comment. Unknown keys, duplicates and
/// malformed values throw ConfigError with line numbers.
ParsedConfig parse_config(const std::string& text);
ParsedConfig load_config(const std::string& path);

/// Every key in a fixed order; doubles use the shortest round-trip form.
std::string serialize_config(const ExperimentConfig& cfg);

/// Physics and schema checks. Errors name the offending field.
std::vector<ConfigIssue> validate_config(const ExperimentConfig& cfg, const std::map<std::string, int>& lines = {});
bool has_errors(const std::vector<ConfigIssue>& issues);

/// FNV-1a 64 of serialize_config, as 16 hex digits.
std::string config_digest(const ExperimentConfig& cfg);

/// Sets one key from its text form, as a config line would.
void set_field(ExperimentConfig& cfg, const std::string& key, const std::string& value);
std::vector<std::string> config_keys();

Wavepacket control_photon(const ExperimentConfig& cfg);

/// Generator, initial states and measurement for the transmon or jc kinds.
DetectorSetup build_setup(const ExperimentConfig& cfg);

LambdaConfig lambda_config(const ExperimentConfig& cfg);

struct ExperimentResult {
  FilterSpec filter;
  double snr_analytic = 0.0;
  std::vector<TrajectoryResult> empty;
  std::vector<TrajectoryResult> photon;
  DetectionSummary summary;
};

/// Window choice (analytic scan when enabled), then the two ensembles. The
/// n = 1 ensemble starts at base_seed + trajectories so the two never share noise.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

/// Filter for the configured window and kind (matched template built from the setup).
FilterSpec configured_filter(const ExperimentConfig& cfg, const DetectorSetup& setup);

}  // namespace photodet
