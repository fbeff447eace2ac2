#pragma once

#include "photodet/dynamics.hpp"
#include "photodet/filter.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace photodet {

struct Priors {
  double p0 = 0.5;
  double p1 = 0.5;
  void validate() const;
};

struct SnrEstimate {
  double snr = 0.0;
  double stderr_ = 0.0;  // bootstrap
};

/// Plug-in (E[S1]−E[S0]) / √(Var S1 + Var S0) with unbiased sample variances.
double snr_plugin(std::span<const double> s0, std::span<const double> s1);

/// Plug-in SNR with a bootstrap standard error over `resamples` draws.
/// The resampling stream is fixed by `seed`.
SnrEstimate snr_empirical(std::span<const double> s0, std::span<const double> s1, int resamples = 400,
                          std::uint64_t seed = 0x5eedULL);

/// F = p0·P(S ≤ S0T | 0) + p1·P(S ≥ S1T | 1) from counting.
double fidelity(std::span<const double> s0, std::span<const double> s1, double s0t, double s1t,
                const Priors& priors = {});

struct ThresholdChoice {
  double s0t = 0.0;
  double s1t = 0.0;
  double fidelity = 0.0;
};

/// Single cut maximizing F over midpoints of the pooled sorted samples (plus
/// one cut below and one above all samples). Ties go to the lowest cut.
ThresholdChoice optimize_threshold(std::span<const double> s0, std::span<const double> s1,
                                   const Priors& priors = {});

/// Template √η(⟨ŷ⟩₁ − ⟨ŷ⟩₀)(t) on the setup grid, scaled to peak |f| = 1.
/// Throws std::invalid_argument if the photon leaves no trace in the current.
FilterSpec matched_filter_template(const DetectorSetup& setup, double t_begin, double t_end);

struct WindowChoice {
  double t_begin = 0.0;
  double t_end = 0.0;
  double score = 0.0;
};

/// Exhaustive argmax of score(t_begin, t_end) over all pairs with t_end > t_begin.
/// Ties go to the shortest window, then the earliest.
WindowChoice optimize_window(std::span<const double> begins, std::span<const double> ends,
                             const std::function<double(double, double)>& score);

/// Same scan with the analytic SNR. One master-equation pass per begin time;
/// all end times come from that pass and must lie on the setup grid.
WindowChoice optimize_window(const DetectorSetup& setup, const FilterSpec& shape, std::span<const double> begins,
                             std::span<const double> ends);

/// Evenly spaced candidate times from first to last inclusive.
std::vector<double> candidate_times(double first, double last, double step);

struct DetectionSummary {
  std::vector<double> s0;
  std::vector<double> s1;
  SnrEstimate snr;
  ThresholdChoice thresholds;
  std::string config_digest;
};

DetectionSummary summarize(std::vector<double> s0, std::vector<double> s1, const Priors& priors = {},
                           std::string config_digest = {});

}  // namespace photodet
