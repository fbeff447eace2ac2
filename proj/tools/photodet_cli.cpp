#include "photodet/experiment.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <optional>

namespace fs = std::filesystem;
using namespace photodet;
using json = nlohmann::json;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;
constexpr int kHistogramBins = 61;

struct ExitError {
  int code;
  std::string message;
};

std::string num(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

// Writes next to the target and renames, so readers never see a partial file.
void write_atomic(const fs::path& path, const std::string& content) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    if (!out.flush()) throw std::runtime_error("cannot write " + tmp.string());
  }
  fs::rename(tmp, path);
}

void report(const std::vector<ConfigIssue>& issues, const std::string& source) {
  for (const auto& i : issues) std::cerr << format_issue(i, source) << "\n";
}

ParsedConfig load_checked(const std::string& path) {
  try {
    ParsedConfig p = load_config(path);
    const auto issues = validate_config(p.config, p.lines);
    report(issues, path);
    if (has_errors(issues)) throw ExitError{kExitConfig, ""};
    return p;
  } catch (const ConfigError& e) {
    report(e.issues(), path);
    throw ExitError{kExitConfig, ""};
  }
}

void revalidate(const ExperimentConfig& cfg, const std::string& source) {
  const auto issues = validate_config(cfg);
  if (has_errors(issues)) {
    report(issues, source);
    throw ExitError{kExitConfig, ""};
  }
}

std::string trajectories_csv(const ExperimentResult& r) {
  std::string out = "traj_index,seed,n_control,S\n";
  std::size_t index = 0;
  for (const auto* runs : {&r.empty, &r.photon}) {
    for (const auto& t : *runs) {
      out += std::to_string(index++) + "," + std::to_string(t.seed) + "," + std::to_string(t.n_control) + "," +
             num(t.signals.front()) + "\n";
    }
  }
  return out;
}

// 61 bins over mean ± 4σ of the pooled samples; the edge bins absorb anything outside.
std::string histogram_csv(const std::vector<double>& s0, const std::vector<double>& s1) {
  std::vector<double> pooled(s0);
  pooled.insert(pooled.end(), s1.begin(), s1.end());
  const double mean = std::accumulate(pooled.begin(), pooled.end(), 0.0) / pooled.size();
  double var = 0.0;
  for (double x : pooled) var += (x - mean) * (x - mean);
  double sigma = std::sqrt(var / pooled.size());
  if (!(sigma > 0.0)) sigma = 1.0;
  const double lo = mean - 4.0 * sigma;
  const double width = 8.0 * sigma / kHistogramBins;
  auto bin = [&](double x) {
    const auto k = static_cast<long>(std::floor((x - lo) / width));
    return static_cast<std::size_t>(std::clamp(k, 0L, static_cast<long>(kHistogramBins - 1)));
  };
  std::vector<long> c0(kHistogramBins, 0), c1(kHistogramBins, 0);
  for (double x : s0) ++c0[bin(x)];
  for (double x : s1) ++c1[bin(x)];

  std::string out = "# bins=" + std::to_string(kHistogramBins) + " lo=" + num(lo) + " width=" + num(width) +
                    " span=mean+-4sigma edge_bins_include_overflow\n";
  out += "bin_left,count_n0,count_n1\n";
  for (int i = 0; i < kHistogramBins; ++i) {
    out += num(lo + i * width) + "," + std::to_string(c0[i]) + "," + std::to_string(c1[i]) + "\n";
  }
  return out;
}

json window_json(const FilterSpec& f) {
  return {{"kind", std::string(to_string(f.kind))}, {"t_begin", f.t_begin}, {"t_end", f.t_end}};
}

void run_one(const ExperimentConfig& cfg, const fs::path& out_dir) {
  fs::create_directories(out_dir);
  json summary;
  summary["kind"] = std::string(to_string(cfg.kind));
  summary["config_digest"] = config_digest(cfg);
  summary["code_version"] = PHOTODET_VERSION;
  write_atomic(out_dir / "config.cfg", serialize_config(cfg));

  if (cfg.kind == ExperimentKind::lambda) {
    summary["p_g"] = scatter_efficiency(lambda_config(cfg), control_photon(cfg), cfg.dt);
    summary["geometry"] = std::string(to_string(cfg.lambda_geometry));
    write_atomic(out_dir / "summary.json", summary.dump(2) + "\n");
    return;
  }

  const ExperimentResult r = run_experiment(cfg);
  summary["filter"] = window_json(r.filter);
  summary["snr_analytic"] = r.snr_analytic;
  if (cfg.kind == ExperimentKind::snr_analytic) {
    summary["snr"] = r.snr_analytic;
    write_atomic(out_dir / "summary.json", summary.dump(2) + "\n");
    return;
  }

  const DetectionSummary& d = r.summary;
  summary["snr"] = d.snr.snr;
  summary["snr_stderr"] = d.snr.stderr_;
  summary["fidelity"] = d.thresholds.fidelity;
  summary["thresholds"] = {{"s0t", d.thresholds.s0t}, {"s1t", d.thresholds.s1t}};
  summary["trajectories"] = {{"n0", d.s0.size()}, {"n1", d.s1.size()}};
  write_atomic(out_dir / "trajectories.csv", trajectories_csv(r));
  if (cfg.histogram) write_atomic(out_dir / "histogram.csv", histogram_csv(d.s0, d.s1));
  write_atomic(out_dir / "summary.json", summary.dump(2) + "\n");
  std::cout << "snr " << num(d.snr.snr) << " +- " << num(d.snr.stderr_) << "  fidelity " << num(d.thresholds.fidelity)
            << "  window [" << num(r.filter.t_begin) << ", " << num(r.filter.t_end) << ")\n";
}

void apply_overrides(ExperimentConfig& cfg, std::optional<std::uint64_t> seed, std::optional<int> threads) {
  if (seed) cfg.base_seed = *seed;
  if (threads) cfg.threads = *threads;
}

std::vector<std::string> split_list(const std::string& list) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = list.find(',', start);
    std::string item = list.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (item.empty()) throw ExitError{kExitConfig, "empty value in axis list '" + list + "'"};
    out.push_back(item);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

void sweep(const std::string& path, ExperimentConfig cfg, const std::vector<std::string>& axes,
           const fs::path& out_dir) {
  if (axes.size() != 1) throw ExitError{kExitConfig, "sweep needs exactly one --axis name=v1,v2,..."};
  const auto eq = axes[0].find('=');
  if (eq == std::string::npos) throw ExitError{kExitConfig, "axis must look like name=v1,v2,..."};
  const std::string name = axes[0].substr(0, eq);
  const std::string list = axes[0].substr(eq + 1);
  if (list.find_first_not_of(" \t") == std::string::npos) throw ExitError{kExitConfig, "axis '" + name + "' is empty"};
  const auto keys = config_keys();
  if (std::find(keys.begin(), keys.end(), name) == keys.end()) {
    throw ExitError{kExitConfig, "unknown axis '" + name + "'"};
  }

  // Check every point before running any.
  std::vector<std::pair<std::string, ExperimentConfig>> points;
  for (const auto& value : split_list(list)) {
    ExperimentConfig point = cfg;
    try {
      set_field(point, name, value);
    } catch (const std::invalid_argument& e) {
      throw ExitError{kExitConfig, e.what()};
    }
    revalidate(point, path + " (" + name + " = " + value + ")");
    points.emplace_back(value, point);
  }

  fs::create_directories(out_dir);
  const bool lambda = cfg.kind == ExperimentKind::lambda;
  std::string csv = lambda ? "axis_value,p_g\n" : "axis_value,snr,fidelity\n";
  for (const auto& [value, point] : points) {
    if (lambda) {
      const double p = scatter_efficiency(lambda_config(point), control_photon(point), point.dt);
      csv += value + "," + num(p) + "\n";
      std::cout << name << " = " << value << "  p_g " << num(p) << "\n";
      continue;
    }
    const ExperimentResult r = run_experiment(point);
    const bool analytic = point.kind == ExperimentKind::snr_analytic;
    const double snr = analytic ? r.snr_analytic : r.summary.snr.snr;
    const std::string fid = analytic ? "" : num(r.summary.thresholds.fidelity);
    csv += value + "," + num(snr) + "," + fid + "\n";
    std::cout << name << " = " << value << "  snr " << num(snr) << (analytic ? "" : "  fidelity " + fid) << "\n";
  }
  write_atomic(out_dir / "sweep.csv", csv);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Single-photon detector simulations"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "out";
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::vector<std::string> axes;

  auto* run_cmd = app.add_subcommand("run", "Run one experiment and write its artifacts");
  run_cmd->add_option("config", config_path, "Config file")->required();
  run_cmd->add_option("--out", out_dir, "Output directory");
  run_cmd->add_option("--seed", seed, "Override base_seed");
  run_cmd->add_option("--threads", threads, "Override threads");

  auto* sweep_cmd = app.add_subcommand("sweep", "Run one experiment per value of a single axis");
  sweep_cmd->add_option("config", config_path, "Config file")->required();
  sweep_cmd->add_option("--axis", axes, "name=v1,v2,...");
  sweep_cmd->add_option("--out", out_dir, "Output directory");
  sweep_cmd->add_option("--seed", seed, "Override base_seed");
  sweep_cmd->add_option("--threads", threads, "Override threads");

  auto* validate_cmd = app.add_subcommand("validate", "Check a config without running it");
  validate_cmd->add_option("config", config_path, "Config file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    ParsedConfig parsed = load_checked(config_path);
    ExperimentConfig& cfg = parsed.config;
    if (*validate_cmd) {
      std::cout << config_path << ": valid " << to_string(cfg.kind) << " config, digest " << config_digest(cfg)
                << "\n";
      return 0;
    }
    apply_overrides(cfg, seed, threads);
    revalidate(cfg, config_path);
    if (*run_cmd) {
      run_one(cfg, out_dir);
    } else {
      sweep(config_path, cfg, axes, out_dir);
    }
  } catch (const ExitError& e) {
    if (!e.message.empty()) std::cerr << "error: " << e.message << "\n";
    return e.code;
  } catch (const ConfigError& e) {
    report(e.issues(), config_path);
    return kExitConfig;
  } catch (const NumericalError& e) {
    std::cerr << "numerical abort: " << e.what() << " (seed " << e.seed() << ", step " << e.step() << ")\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
