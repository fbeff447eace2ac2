#pragma once

#include "photodet/filter.hpp"
#include "photodet/liouvillian.hpp"

#include <cstdint>
#include <functional>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

namespace photodet {

/// Fixed-step grid t0, t0 + dt, …, t1. States are recorded every `stride` steps.
struct TimeGrid {
  double t0 = 0.0;
  double t1 = 1.0;
  double dt = 1e-3;
  int stride = 1;

  int steps() const;
  double time(int k) const { return t0 + k * dt; }
  void validate() const;
};

/// Homodyne detection of channel operator c with current
/// j dt = √η⟨e^{iφ}c + e^{−iφ}c†⟩dt + dW.
struct Measurement {
  Operator op;
  double phase = std::numbers::pi / 2;
  double eta = 1.0;

  /// e^{iφ}c + e^{−iφ}c†
  Matrix quadrature() const;
};

class NumericalError : public std::runtime_error {
 public:
  NumericalError(const std::string& what, std::uint64_t seed, long step)
      : std::runtime_error(what), seed_(seed), step_(step) {}
  std::uint64_t seed() const { return seed_; }
  long step() const { return step_; }

 private:
  std::uint64_t seed_;
  long step_;
};

struct MeSolution {
  std::vector<double> times;
  std::vector<Matrix> states;
};

/// Classical RK4 on ρ̇ = L(t)ρ. Hermiticity is restored at every recorded
/// sample; a trace drift above 1e-3 aborts with NumericalError.
MeSolution evolve_me(const Liouvillian& l, const DensityMatrix& rho0, const TimeGrid& grid);

/// Population of `level` of the labeled subsystem, one value per recorded sample.
std::vector<double> level_population(const MeSolution& sol, const SpaceLayout& layout, std::string_view label,
                                     int level);

/// P1(t) of the labeled transmon.
std::vector<double> excitation_probability(const Liouvillian& l, const DensityMatrix& rho0, const TimeGrid& grid,
                                           std::string_view transmon = "transmon1");

struct HomodyneRecord {
  double t0 = 0.0;
  double dt = 0.0;
  std::vector<double> current;     // j_k, one per step
  std::vector<double> increments;  // ΔW_k
  std::uint64_t seed = 0;
  double eta = 1.0;
  double phase = 0.0;

  double time(std::size_t k) const { return t0 + static_cast<double>(k) * dt; }
  double t_end() const { return time(current.size()); }
};

struct SmeResult {
  HomodyneRecord record;
  MeSolution samples;  // filled when requested
  Matrix final_state;
};

/// Euler–Maruyama on dρ = L(t)ρ dt + √η M[c]ρ dW with the trace renormalized
/// after every step. j_k = √η⟨ŷ⟩(t_k) + ΔW_k/dt.
SmeResult evolve_sme(const Liouvillian& l, const Measurement& meas, const DensityMatrix& rho0, const TimeGrid& grid,
                     std::uint64_t seed, bool keep_states = false);

/// Everything needed to simulate detection of a control field holding 0 or 1 photon.
struct DetectorSetup {
  Liouvillian liouvillian;
  DensityMatrix initial_empty;
  DensityMatrix initial_photon;
  Measurement measurement;
  TimeGrid grid;

  const DensityMatrix& initial(int n_control) const { return n_control == 0 ? initial_empty : initial_photon; }
};

struct TrajectoryResult {
  int n_control = 0;
  std::uint64_t seed = 0;
  std::vector<double> signals;  // one per filter
  std::vector<double> populations;  // diagonal of the final state
};

/// Trajectory i uses seed base_seed + i. Output order and content do not
/// depend on the thread count.
std::vector<TrajectoryResult> run_ensemble(const DetectorSetup& setup, std::span<const FilterSpec> filters,
                                           int n_control, int count, std::uint64_t base_seed, int threads = 1);

/// Ensemble average of trajectory states at the grid's recorded samples.
MeSolution ensemble_mean_states(const DetectorSetup& setup, int n_control, int count, std::uint64_t base_seed);

/// Smooth part η·tr[ŷ T(|t2−t1|) Y(min(t1,t2))] of E[j(t1)j(t2)], with
/// Y = e^{iφ}cρ + e^{−iφ}ρc†. min(t1,t2) must be a recorded sample of `sol`;
/// Y is propagated with RK4 at step dt.
double two_time_correlation(const Liouvillian& l, const Measurement& meas, const MeSolution& sol, double dt,
                            double t1, double t2);

/// Mean and variance of S = ∫_{t_begin}^{t} f j dt for every grid time t past
/// t_begin, from the master equation and the quantum regression theorem.
/// The δ(t1−t2) shot noise contributes ∫f² exactly.
struct SignalMoments {
  std::vector<double> t_end;
  std::vector<double> mean;
  std::vector<double> variance;
};

SignalMoments signal_moments(const Liouvillian& l, const Measurement& meas, const Matrix& rho_at_begin,
                             double t_begin, double t_end, double dt, const std::function<double(double)>& filter);

struct SnrCurve {
  double t_begin = 0.0;
  std::vector<double> t_end;
  std::vector<double> snr;
  SignalMoments empty;
  SignalMoments photon;
};

/// SNR = (E[S1]−E[S0]) / √(Var S1 + Var S0) for every window [t_begin, t].
/// The filter's own window is ignored; its shape f(t) is used.
SnrCurve snr_curve(const DetectorSetup& setup, double t_begin, double t_end, const FilterSpec& filter);

/// SNR for the filter's window.
double snr_analytic(const DetectorSetup& setup, const FilterSpec& filter);

/// Expected current √η⟨ŷ⟩(t) on the grid for the given photon number.
std::vector<double> expected_current(const DetectorSetup& setup, int n_control);

}  // namespace photodet
