#include "photodet/experiment.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

namespace photodet {

ExperimentKind parse_kind(std::string_view name) {
  if (name == "single_transmon") return ExperimentKind::single_transmon;
  if (name == "cascade") return ExperimentKind::cascade;
  if (name == "jc_unit") return ExperimentKind::jc_unit;
  if (name == "lambda") return ExperimentKind::lambda;
  if (name == "snr_analytic") return ExperimentKind::snr_analytic;
  throw std::invalid_argument("unknown experiment kind '" + std::string(name) + "'");
}

std::string_view to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::single_transmon: return "single_transmon";
    case ExperimentKind::cascade: return "cascade";
    case ExperimentKind::jc_unit: return "jc_unit";
    case ExperimentKind::lambda: return "lambda";
    case ExperimentKind::snr_analytic: return "snr_analytic";
  }
  return "?";
}

namespace {

std::string issues_text(const std::vector<ConfigIssue>& issues) {
  std::string out;
  for (const auto& i : issues) {
    if (!out.empty()) out += "\n";
    out += format_issue(i);
  }
  return out;
}

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string format_double(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

double parse_double(std::string_view s) {
  double v = 0.0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc{} || r.ptr != s.data() + s.size()) throw std::invalid_argument("expected a number");
  return v;
}

template <typename Int>
Int parse_integer(std::string_view s) {
  Int v{};
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc{} || r.ptr != s.data() + s.size()) throw std::invalid_argument("expected an integer");
  return v;
}

bool parse_bool(std::string_view s) {
  if (s == "true") return true;
  if (s == "false") return false;
  throw std::invalid_argument("expected true or false");
}

struct Field {
  std::string name;
  std::function<void(ExperimentConfig&, std::string_view)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

Field real(const char* name, double ExperimentConfig::*m) {
  return {name, [m](ExperimentConfig& c, std::string_view v) { c.*m = parse_double(v); },
          [m](const ExperimentConfig& c) { return format_double(c.*m); }};
}

Field integer(const char* name, int ExperimentConfig::*m) {
  return {name, [m](ExperimentConfig& c, std::string_view v) { c.*m = parse_integer<int>(v); },
          [m](const ExperimentConfig& c) { return std::to_string(c.*m); }};
}

Field flag(const char* name, bool ExperimentConfig::*m) {
  return {name, [m](ExperimentConfig& c, std::string_view v) { c.*m = parse_bool(v); },
          [m](const ExperimentConfig& c) { return std::string(c.*m ? "true" : "false"); }};
}

template <typename E, E (*Parse)(std::string_view)>
Field choice(const char* name, E ExperimentConfig::*m) {
  return {name, [m](ExperimentConfig& c, std::string_view v) { c.*m = Parse(v); },
          [m](const ExperimentConfig& c) { return std::string(to_string(c.*m)); }};
}

const std::vector<Field>& fields() {
  using C = ExperimentConfig;
  static const std::vector<Field> table = {
      choice<ExperimentKind, parse_kind>("kind", &C::kind),
      integer("n_transmons", &C::n_transmons),
      real("delta01", &C::delta01),
      real("delta12", &C::delta12),
      real("gamma12", &C::gamma12),
      real("omega_p", &C::omega_p),
      choice<WavepacketShape, parse_shape>("photon_shape", &C::photon_shape),
      real("gamma_ph", &C::gamma_ph),
      real("t_ph", &C::t_ph),
      real("jc_delta1", &C::jc_delta1),
      real("jc_delta2", &C::jc_delta2),
      real("jc_drive", &C::jc_drive),
      real("jc_coupling", &C::jc_coupling),
      real("jc_kappa_b", &C::jc_kappa_b),
      real("jc_gamma12", &C::jc_gamma12),
      integer("jc_levels", &C::jc_levels),
      real("lambda_gamma", &C::lambda_gamma),
      real("lambda_coupling", &C::lambda_coupling),
      real("lambda_vg", &C::lambda_vg),
      choice<LineGeometry, parse_geometry>("lambda_geometry", &C::lambda_geometry),
      real("lambda_detuning", &C::lambda_detuning),
      real("phase", &C::phase),
      real("eta", &C::eta),
      real("t0", &C::t0),
      real("t1", &C::t1),
      real("dt", &C::dt),
      integer("trajectories", &C::trajectories),
      {"base_seed", [](C& c, std::string_view v) { c.base_seed = parse_integer<std::uint64_t>(v); },
       [](const C& c) { return std::to_string(c.base_seed); }},
      integer("threads", &C::threads),
      choice<FilterKind, parse_filter_kind>("filter", &C::filter),
      flag("optimize_window", &C::optimize_window),
      real("window_begin", &C::window_begin),
      real("window_end", &C::window_end),
      real("window_step", &C::window_step),
      real("prior0", &C::prior0),
      flag("histogram", &C::histogram),
  };
  return table;
}

const Field* find_field(std::string_view key) {
  for (const auto& f : fields()) {
    if (f.name == key) return &f;
  }
  return nullptr;
}

bool whole_steps(double span, double dt) {
  const double n = span / dt;
  return std::abs(n - std::round(n)) <= 1e-6;
}

}  // namespace

ConfigError::ConfigError(std::vector<ConfigIssue> issues)
    : std::runtime_error(issues_text(issues)), issues_(std::move(issues)) {}

std::string format_issue(const ConfigIssue& issue, const std::string& source) {
  std::string out;
  if (!source.empty()) out += source + ":";
  if (issue.line > 0) out += std::to_string(issue.line) + ":";
  if (!out.empty()) out += " ";
  out += issue.severity == ConfigIssue::Severity::error ? "error" : "warning";
  if (!issue.field.empty()) out += " [" + issue.field + "]";
  out += ": " + issue.message;
  return out;
}

std::vector<std::string> config_keys() {
  std::vector<std::string> out;
  for (const auto& f : fields()) out.push_back(f.name);
  return out;
}

void set_field(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
  const Field* f = find_field(key);
  if (!f) throw std::invalid_argument("unknown key '" + key + "'");
  try {
    f->set(cfg, trim(value));
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(key + ": " + e.what() + " (got '" + value + "')");
  }
}

ParsedConfig parse_config(const std::string& text) {
  ParsedConfig out;
  std::vector<ConfigIssue> issues;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::string_view s = raw;
    if (const auto hash = s.find('#'); hash != std::string_view::npos) s = s.substr(0, hash);
    s = trim(s);
    if (s.empty()) continue;
    const auto eq = s.find('=');
    if (eq == std::string_view::npos) {
      issues.push_back({ConfigIssue::Severity::error, line, "", "expected 'key = value'"});
      continue;
    }
    const std::string key(trim(s.substr(0, eq)));
    const std::string_view value = trim(s.substr(eq + 1));
    const Field* f = find_field(key);
    if (!f) {
      issues.push_back({ConfigIssue::Severity::error, line, key, "unknown key"});
      continue;
    }
    if (out.lines.count(key)) {
      issues.push_back({ConfigIssue::Severity::error, line, key,
                        "duplicate key (first set on line " + std::to_string(out.lines[key]) + ")"});
      continue;
    }
    try {
      f->set(out.config, value);
      out.lines[key] = line;
    } catch (const std::exception& e) {
      issues.push_back({ConfigIssue::Severity::error, line, key, std::string(e.what()) + ", got '" +
                                                                     std::string(value) + "'"});
    }
  }
  if (!issues.empty()) throw ConfigError(std::move(issues));
  return out;
}

ParsedConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError({{ConfigIssue::Severity::error, 0, "", "cannot read '" + path + "'"}});
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string serialize_config(const ExperimentConfig& cfg) {
  std::string out = "# rates in units of gamma01, times in units of 1/gamma01\n";
  for (const auto& f : fields()) out += f.name + " = " + f.get(cfg) + "\n";
  return out;
}

std::vector<ConfigIssue> validate_config(const ExperimentConfig& cfg, const std::map<std::string, int>& lines) {
  std::vector<ConfigIssue> issues;
  auto at = [&](const std::string& field) {
    const auto it = lines.find(field);
    return it == lines.end() ? 0 : it->second;
  };
  auto error = [&](const std::string& field, const std::string& msg) {
    issues.push_back({ConfigIssue::Severity::error, at(field), field, msg});
  };
  auto warning = [&](const std::string& field, const std::string& msg) {
    issues.push_back({ConfigIssue::Severity::warning, at(field), field, msg});
  };
  auto nonnegative = [&](const std::string& field, double v) {
    if (!(v >= 0.0)) error(field, "must be non-negative, got " + format_double(v));
  };
  auto positive = [&](const std::string& field, double v) {
    if (!(v > 0.0)) error(field, "must be positive, got " + format_double(v));
  };
  auto finite = [&](const std::string& field, double v) {
    if (!std::isfinite(v)) error(field, "must be finite");
  };

  finite("delta01", cfg.delta01);
  finite("delta12", cfg.delta12);
  finite("jc_delta1", cfg.jc_delta1);
  finite("jc_delta2", cfg.jc_delta2);
  finite("lambda_detuning", cfg.lambda_detuning);
  finite("phase", cfg.phase);
  finite("t_ph", cfg.t_ph);
  finite("lambda_coupling", cfg.lambda_coupling);
  nonnegative("gamma12", cfg.gamma12);
  nonnegative("omega_p", cfg.omega_p);
  positive("gamma_ph", cfg.gamma_ph);
  nonnegative("jc_drive", cfg.jc_drive);
  nonnegative("jc_coupling", cfg.jc_coupling);
  positive("jc_kappa_b", cfg.jc_kappa_b);
  nonnegative("jc_gamma12", cfg.jc_gamma12);
  nonnegative("lambda_gamma", cfg.lambda_gamma);
  positive("lambda_vg", cfg.lambda_vg);
  if (cfg.jc_levels < 2) error("jc_levels", "must be at least 2");
  if (cfg.n_transmons < 1) error("n_transmons", "must be at least 1");
  if (cfg.kind == ExperimentKind::single_transmon && cfg.n_transmons != 1) {
    error("n_transmons", "single_transmon runs need n_transmons = 1");
  }
  if (cfg.n_transmons > 4) warning("n_transmons", "state dimension 2*3^N grows steeply beyond N = 4");
  if (!(cfg.eta >= 0.0 && cfg.eta <= 1.0)) error("eta", "must lie in [0, 1]");
  if (cfg.trajectories < 1) error("trajectories", "must be at least 1");
  if (cfg.threads < 1) error("threads", "must be at least 1");
  if (!(cfg.prior0 >= 0.0 && cfg.prior0 <= 1.0)) error("prior0", "must lie in [0, 1]");

  bool grid_ok = true;
  if (!(cfg.dt > 0.0)) {
    error("dt", "must be positive");
    grid_ok = false;
  }
  if (!(cfg.t1 > cfg.t0)) {
    error("t1", "must exceed t0");
    grid_ok = false;
  }
  if (grid_ok && !whole_steps(cfg.t1 - cfg.t0, cfg.dt)) error("dt", "t1 - t0 is not a whole number of steps");

  if (cfg.kind != ExperimentKind::lambda) {
    if (!(cfg.window_end > cfg.window_begin)) error("window_end", "must exceed window_begin");
    if (cfg.window_begin < cfg.t0 || cfg.window_end > cfg.t1) error("window_begin", "window must lie inside [t0, t1]");
    if (grid_ok && (!whole_steps(cfg.window_begin - cfg.t0, cfg.dt) || !whole_steps(cfg.window_end - cfg.t0, cfg.dt))) {
      error("window_begin", "window edges must fall on the time grid");
    }
    if (cfg.optimize_window) {
      if (!(cfg.window_step > 0.0)) {
        error("window_step", "must be positive");
      } else if (grid_ok && !whole_steps(cfg.window_step, cfg.dt)) {
        error("window_step", "must be a whole number of time steps");
      }
    }
  }

  if (grid_ok) {
    double fastest = 1.0;
    switch (cfg.kind) {
      case ExperimentKind::jc_unit:
        fastest = std::max({1.0, cfg.jc_gamma12, cfg.jc_kappa_b, 2.0 * cfg.jc_coupling, 2.0 * cfg.jc_drive,
                            std::abs(cfg.jc_delta1), std::abs(cfg.jc_delta1 + cfg.jc_delta2), cfg.gamma_ph});
        break;
      case ExperimentKind::lambda:
        fastest = std::max({cfg.lambda_gamma, lambda_config(cfg).line_rate(), std::abs(cfg.lambda_detuning),
                            cfg.gamma_ph});
        break;
      default:
        fastest = std::max({1.0, cfg.gamma12 * cfg.n_transmons, 2.0 * cfg.omega_p, std::abs(cfg.delta01),
                            std::abs(cfg.delta12), cfg.gamma_ph});
    }
    if (cfg.dt * fastest > 0.05) {
      warning("dt", "time step is coarse: dt * fastest rate = " + format_double(cfg.dt * fastest) + " > 0.05");
    }
  }
  return issues;
}

bool has_errors(const std::vector<ConfigIssue>& issues) {
  for (const auto& i : issues) {
    if (i.severity == ConfigIssue::Severity::error) return true;
  }
  return false;
}

std::string config_digest(const ExperimentConfig& cfg) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : serialize_config(cfg)) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

Wavepacket control_photon(const ExperimentConfig& cfg) { return {cfg.photon_shape, cfg.gamma_ph, cfg.t_ph}; }

namespace {

DetectorSetup transmon_setup(const ExperimentConfig& cfg) {
  std::vector<TransmonParams> params(cfg.n_transmons);
  for (auto& p : params) {
    p.delta01 = cfg.delta01;
    p.delta12 = cfg.delta12;
    p.gamma12 = cfg.gamma12;
  }
  const SlhTriple net = cascade_transmons(params, sqrt_kappa_envelope(control_photon(cfg)), kI * cfg.omega_p);
  const SpaceLayout& layout = net.layout;
  Operator collective = Operator::zero(layout);
  for (int k = 1; k <= cfg.n_transmons; ++k) {
    collective += embed(transmon_lowering(1, 2, cfg.gamma12), transmon_label(k), layout);
  }
  std::vector<int> ground(layout.size(), 0);
  std::vector<int> excited = ground;
  excited[layout.index_of("source")] = 1;

  TimeGrid grid{cfg.t0, cfg.t1, cfg.dt, 1};
  return {Liouvillian(me_from_slh(net)), DensityMatrix::basis(layout, ground), DensityMatrix::basis(layout, excited),
          Measurement{collective, cfg.phase, cfg.eta}, grid};
}

DetectorSetup jc_setup(const ExperimentConfig& cfg) {
  JcUnitParams p;
  p.delta1 = cfg.jc_delta1;
  p.delta2 = cfg.jc_delta2;
  p.drive = cfg.jc_drive;
  p.coupling = cfg.jc_coupling;
  p.gamma12 = cfg.jc_gamma12;
  p.kappa_b = cfg.jc_kappa_b;
  p.probe_levels = cfg.jc_levels;
  JcUnit unit = jc_unit_generator(p, sqrt_kappa_envelope(control_photon(cfg)));
  const SpaceLayout& layout = unit.generator.layout;

  // Probe starts in its undriven-atom steady state, the coherent state 2E/κb.
  const double beta = 2.0 * p.drive / p.kappa_b;
  Vector probe(p.probe_levels);
  double term = std::exp(-0.5 * beta * beta);
  for (int n = 0; n < p.probe_levels; ++n) {
    probe(n) = term;
    term *= beta / std::sqrt(static_cast<double>(n + 1));
  }
  auto product = [&](int source_level) {
    Vector psi = Vector::Zero(layout.dim());
    for (int n = 0; n < p.probe_levels; ++n) psi(layout.flat_index({source_level, 0, n})) = probe(n);
    return DensityMatrix::pure(layout, psi);
  };

  TimeGrid grid{cfg.t0, cfg.t1, cfg.dt, 1};
  // The probe current is read with the conjugate phase convention.
  return {Liouvillian(unit.generator), product(0), product(1), Measurement{unit.measured, -cfg.phase, cfg.eta},
          grid};
}

}  // namespace

DetectorSetup build_setup(const ExperimentConfig& cfg) {
  const auto issues = validate_config(cfg);
  if (has_errors(issues)) throw ConfigError(issues);
  switch (cfg.kind) {
    case ExperimentKind::jc_unit: return jc_setup(cfg);
    case ExperimentKind::lambda: throw std::invalid_argument("lambda experiments have no detector setup");
    default: return transmon_setup(cfg);
  }
}

LambdaConfig lambda_config(const ExperimentConfig& cfg) {
  return {cfg.lambda_gamma, cfg.lambda_coupling, cfg.lambda_vg, cfg.lambda_geometry, cfg.lambda_detuning};
}

FilterSpec configured_filter(const ExperimentConfig& cfg, const DetectorSetup& setup) {
  if (cfg.filter == FilterKind::square) return FilterSpec::square(cfg.window_begin, cfg.window_end);
  return matched_filter_template(setup, cfg.window_begin, cfg.window_end);
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  const DetectorSetup setup = build_setup(cfg);
  ExperimentResult out;
  out.filter = configured_filter(cfg, setup);
  if (cfg.optimize_window) {
    const auto begins = candidate_times(cfg.window_begin, cfg.window_end - cfg.window_step, cfg.window_step);
    const auto ends = candidate_times(cfg.window_begin + cfg.window_step, cfg.window_end, cfg.window_step);
    const WindowChoice best = optimize_window(setup, out.filter, begins, ends);
    out.filter = out.filter.with_window(best.t_begin, best.t_end);
  }
  out.snr_analytic = snr_analytic(setup, out.filter);
  if (cfg.kind == ExperimentKind::snr_analytic) return out;

  const std::vector<FilterSpec> filters{out.filter};
  const auto n = static_cast<std::uint64_t>(cfg.trajectories);
  out.empty = run_ensemble(setup, filters, 0, cfg.trajectories, cfg.base_seed, cfg.threads);
  out.photon = run_ensemble(setup, filters, 1, cfg.trajectories, cfg.base_seed + n, cfg.threads);
  std::vector<double> s0, s1;
  for (const auto& r : out.empty) s0.push_back(r.signals.front());
  for (const auto& r : out.photon) s1.push_back(r.signals.front());
  out.summary = summarize(std::move(s0), std::move(s1), Priors{cfg.prior0, 1.0 - cfg.prior0}, config_digest(cfg));
  return out;
}

}  // namespace photodet
