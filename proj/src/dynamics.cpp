#include "photodet/dynamics.hpp"

#include "photodet/rng.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <string>
#include <thread>

namespace photodet {

namespace {

void rk4_step(const Liouvillian& l, double t, double dt, Matrix& rho) {
  const Matrix k1 = l.apply(t, rho);
  const Matrix k2 = l.apply(t + 0.5 * dt, rho + (0.5 * dt) * k1);
  const Matrix k3 = l.apply(t + 0.5 * dt, rho + (0.5 * dt) * k2);
  const Matrix k4 = l.apply(t + dt, rho + dt * k3);
  rho += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

double real_trace_product(const Matrix& a, const Matrix& b) {
  return (a.transpose().array() * b.array()).sum().real();
}

void check_trace(const Matrix& rho, std::uint64_t seed, long step) {
  const Complex tr = rho.trace();
  if (!std::isfinite(tr.real()) || !std::isfinite(tr.imag()) || std::abs(tr - 1.0) > 1e-3) {
    throw NumericalError("trace drift (tr = " + std::to_string(tr.real()) + ") at step " + std::to_string(step),
                         seed, step);
  }
}

int steps_between(double a, double b, double dt) {
  const double n = (b - a) / dt;
  const double rounded = std::round(n);
  if (rounded < 0 || std::abs(n - rounded) > 1e-6) {
    throw std::invalid_argument("interval [" + std::to_string(a) + ", " + std::to_string(b) +
                                "] is not a whole number of steps of " + std::to_string(dt));
  }
  return static_cast<int>(rounded);
}

}  // namespace

int TimeGrid::steps() const {
  validate();
  return steps_between(t0, t1, dt);
}

void TimeGrid::validate() const {
  if (!(dt > 0.0)) throw std::invalid_argument("time step must be positive");
  if (!(t1 > t0)) throw std::invalid_argument("time grid must have t1 > t0");
  if (stride < 1) throw std::invalid_argument("sample stride must be at least 1");
  steps_between(t0, t1, dt);
}

Matrix Measurement::quadrature() const {
  const Matrix x = std::polar(1.0, phase) * op.matrix();
  return x + x.adjoint();
}

MeSolution evolve_me(const Liouvillian& l, const DensityMatrix& rho0, const TimeGrid& grid) {
  if (!(rho0.layout() == l.layout())) throw std::invalid_argument("initial state layout does not match generator");
  const int n = grid.steps();
  MeSolution sol;
  Matrix rho = rho0.matrix();
  sol.times.push_back(grid.t0);
  sol.states.push_back(rho);
  for (int k = 0; k < n; ++k) {
    rk4_step(l, grid.time(k), grid.dt, rho);
    if ((k + 1) % grid.stride == 0 || k + 1 == n) {
      symmetrize(rho);
      check_trace(rho, 0, k + 1);
      sol.times.push_back(grid.time(k + 1));
      sol.states.push_back(rho);
    }
  }
  return sol;
}

std::vector<double> level_population(const MeSolution& sol, const SpaceLayout& layout, std::string_view label,
                                     int level) {
  const int which = layout.index_of(label);
  if (level < 0 || level >= layout[which].dim) throw std::invalid_argument("level out of range");
  Matrix projector = Matrix::Zero(layout[which].dim, layout[which].dim);
  projector(level, level) = 1.0;
  const Matrix p = embed(projector, label, layout).matrix();
  std::vector<double> out;
  out.reserve(sol.states.size());
  for (const auto& rho : sol.states) out.push_back(real_trace_product(p, rho));
  return out;
}

std::vector<double> excitation_probability(const Liouvillian& l, const DensityMatrix& rho0, const TimeGrid& grid,
                                           std::string_view transmon) {
  return level_population(evolve_me(l, rho0, grid), l.layout(), transmon, 1);
}

SmeResult evolve_sme(const Liouvillian& l, const Measurement& meas, const DensityMatrix& rho0, const TimeGrid& grid,
                     std::uint64_t seed, bool keep_states) {
  if (!(rho0.layout() == l.layout())) throw std::invalid_argument("initial state layout does not match generator");
  if (!(meas.op.layout() == l.layout())) throw std::invalid_argument("measurement layout does not match generator");
  if (!(meas.eta >= 0.0 && meas.eta <= 1.0)) throw std::invalid_argument("detector efficiency must lie in [0, 1]");

  const int n = grid.steps();
  const double dt = grid.dt;
  const double sqrt_dt = std::sqrt(dt);
  const double sqrt_eta = std::sqrt(meas.eta);
  SparseMatrix c = (std::polar(1.0, meas.phase) * meas.op.matrix()).sparseView(1.0, 0.0);
  c.makeCompressed();

  SmeResult out;
  out.record.t0 = grid.t0;
  out.record.dt = dt;
  out.record.seed = seed;
  out.record.eta = meas.eta;
  out.record.phase = meas.phase;
  out.record.current.reserve(n);
  out.record.increments.reserve(n);

  GaussianStream noise(seed);
  Matrix rho = rho0.matrix();
  Matrix drift;
  Matrix x;
  if (keep_states) {
    out.samples.times.push_back(grid.t0);
    out.samples.states.push_back(rho);
  }
  for (int k = 0; k < n; ++k) {
    const double t = grid.time(k);
    x.noalias() = c * rho;
    const double mean_y = 2.0 * x.trace().real();
    const double dw = sqrt_dt * noise.next();
    out.record.current.push_back(sqrt_eta * mean_y + dw / dt);
    out.record.increments.push_back(dw);

    l.apply(t, rho, drift);
    const double kick = sqrt_eta * dw;
    x += x.adjoint().eval();
    x -= mean_y * rho;
    rho += dt * drift + kick * x;
    const double tr = rho.trace().real();
    if (!std::isfinite(tr) || tr <= 0.0) {
      throw NumericalError("stochastic step produced an invalid state (seed " + std::to_string(seed) + ", step " +
                               std::to_string(k) + ")",
                           seed, k);
    }
    rho /= tr;
    if ((k + 1) % grid.stride == 0 || k + 1 == n) {
      symmetrize(rho);
      if (keep_states) {
        out.samples.times.push_back(grid.time(k + 1));
        out.samples.states.push_back(rho);
      }
    }
  }
  out.final_state = std::move(rho);
  return out;
}

namespace {

template <typename Fn>
void parallel_for(int count, int threads, Fn&& fn) {
  threads = std::max(1, std::min(threads, count));
  if (threads == 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::jthread> pool;
  for (int w = 0; w < threads; ++w) {
    pool.emplace_back([&] {
      for (int i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          next = count;
        }
      }
    });
  }
  pool.clear();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace

std::vector<TrajectoryResult> run_ensemble(const DetectorSetup& setup, std::span<const FilterSpec> filters,
                                           int n_control, int count, std::uint64_t base_seed, int threads) {
  if (count < 1) throw std::invalid_argument("ensemble size must be at least 1");
  if (n_control != 0 && n_control != 1) throw std::invalid_argument("control photon number must be 0 or 1");
  std::vector<TrajectoryResult> results(count);
  parallel_for(count, threads, [&](int i) {
    const std::uint64_t seed = base_seed + static_cast<std::uint64_t>(i);
    const SmeResult r = evolve_sme(setup.liouvillian, setup.measurement, setup.initial(n_control), setup.grid, seed);
    TrajectoryResult& out = results[i];
    out.n_control = n_control;
    out.seed = seed;
    for (const auto& f : filters) out.signals.push_back(integrate_signal(r.record, f));
    const Eigen::VectorXd diag = r.final_state.diagonal().real();
    out.populations.assign(diag.data(), diag.data() + diag.size());
  });
  return results;
}

MeSolution ensemble_mean_states(const DetectorSetup& setup, int n_control, int count, std::uint64_t base_seed) {
  if (count < 1) throw std::invalid_argument("ensemble size must be at least 1");
  MeSolution mean;
  for (int i = 0; i < count; ++i) {
    const SmeResult r = evolve_sme(setup.liouvillian, setup.measurement, setup.initial(n_control), setup.grid,
                                   base_seed + static_cast<std::uint64_t>(i), true);
    if (i == 0) {
      mean = r.samples;
      continue;
    }
    for (std::size_t s = 0; s < mean.states.size(); ++s) mean.states[s] += r.samples.states[s];
  }
  for (auto& m : mean.states) m /= static_cast<double>(count);
  return mean;
}

double two_time_correlation(const Liouvillian& l, const Measurement& meas, const MeSolution& sol, double dt,
                            double t1, double t2) {
  const double first = std::min(t1, t2);
  const double second = std::max(t1, t2);
  if (sol.times.empty() || first < sol.times.front() - 1e-9 || second > sol.times.back() + 1e-9) {
    throw std::invalid_argument("correlation times outside the evolved range");
  }
  std::size_t idx = sol.times.size();
  for (std::size_t i = 0; i < sol.times.size(); ++i) {
    if (std::abs(sol.times[i] - first) < 1e-9) {
      idx = i;
      break;
    }
  }
  if (idx == sol.times.size()) throw std::invalid_argument("earlier correlation time is not a recorded sample");

  const Matrix c = std::polar(1.0, meas.phase) * meas.op.matrix();
  Matrix y = c * sol.states[idx];
  y += y.adjoint().eval();
  const int n = steps_between(first, second, dt);
  for (int k = 0; k < n; ++k) rk4_step(l, first + k * dt, dt, y);
  return meas.eta * real_trace_product(meas.quadrature(), y);
}

SignalMoments signal_moments(const Liouvillian& l, const Measurement& meas, const Matrix& rho_at_begin,
                             double t_begin, double t_end, double dt, const std::function<double(double)>& filter) {
  const int n = steps_between(t_begin, t_end, dt);
  const SparseMatrix c = (std::polar(1.0, meas.phase) * meas.op.matrix()).sparseView(1.0, 0.0);
  const Matrix yq = meas.quadrature();
  const double eta = meas.eta;

  auto emission = [&](const Matrix& rho) -> Matrix {
    Matrix y = c * rho;
    return y + y.adjoint();
  };

  Matrix rho = rho_at_begin;
  Matrix z = Matrix::Zero(rho.rows(), rho.cols());

  SignalMoments out;
  out.t_end.reserve(n);
  out.mean.reserve(n);
  out.variance.reserve(n);

  double mean_integral = 0.0;  // ∫ f⟨ŷ⟩
  double corr_integral = 0.0;  // ∫ f(t) tr[ŷ Z(t)]
  double shot_integral = 0.0;  // ∫ f²
  double f_prev = filter(t_begin);
  double g1_prev = f_prev * real_trace_product(yq, rho);
  double g2_prev = 0.0;

  for (int k = 0; k < n; ++k) {
    const double t = t_begin + k * dt;
    const double th = t + 0.5 * dt;
    const double tn = t + dt;
    const double f0 = filter(t);
    const double fh = filter(th);
    const double f1 = filter(tn);

    const Matrix kr1 = l.apply(t, rho);
    const Matrix kz1 = l.apply(t, z) + f0 * emission(rho);
    const Matrix r2 = rho + (0.5 * dt) * kr1;
    const Matrix z2 = z + (0.5 * dt) * kz1;
    const Matrix kr2 = l.apply(th, r2);
    const Matrix kz2 = l.apply(th, z2) + fh * emission(r2);
    const Matrix r3 = rho + (0.5 * dt) * kr2;
    const Matrix z3 = z + (0.5 * dt) * kz2;
    const Matrix kr3 = l.apply(th, r3);
    const Matrix kz3 = l.apply(th, z3) + fh * emission(r3);
    const Matrix r4 = rho + dt * kr3;
    const Matrix z4 = z + dt * kz3;
    const Matrix kr4 = l.apply(tn, r4);
    const Matrix kz4 = l.apply(tn, z4) + f1 * emission(r4);
    rho += (dt / 6.0) * (kr1 + 2.0 * kr2 + 2.0 * kr3 + kr4);
    z += (dt / 6.0) * (kz1 + 2.0 * kz2 + 2.0 * kz3 + kz4);

    const double g1 = f1 * real_trace_product(yq, rho);
    const double g2 = f1 * real_trace_product(yq, z);
    mean_integral += 0.5 * dt * (g1_prev + g1);
    corr_integral += 0.5 * dt * (g2_prev + g2);
    shot_integral += 0.5 * dt * (f_prev * f_prev + f1 * f1);
    g1_prev = g1;
    g2_prev = g2;
    f_prev = f1;

    out.t_end.push_back(tn);
    out.mean.push_back(std::sqrt(eta) * mean_integral);
    out.variance.push_back(shot_integral + 2.0 * eta * corr_integral - eta * mean_integral * mean_integral);
  }
  return out;
}

namespace {

Matrix propagate_to(const Liouvillian& l, const Matrix& rho0, double t0, double t1, double dt) {
  Matrix rho = rho0;
  const int n = steps_between(t0, t1, dt);
  for (int k = 0; k < n; ++k) rk4_step(l, t0 + k * dt, dt, rho);
  return rho;
}

}  // namespace

SnrCurve snr_curve(const DetectorSetup& setup, double t_begin, double t_end, const FilterSpec& filter) {
  const auto& g = setup.grid;
  if (t_begin < g.t0 - 1e-9 || t_end > g.t1 + 1e-9) throw std::invalid_argument("window outside the time grid");
  // Only the filter shape matters here; the window comes from the arguments.
  FilterSpec unbounded = filter;
  unbounded.t_begin = g.t0 - g.dt;
  unbounded.t_end = g.t1 + g.dt;
  auto fn = [&unbounded](double t) { return unbounded.value(t); };

  SnrCurve out;
  out.t_begin = t_begin;
  const Matrix r0 = propagate_to(setup.liouvillian, setup.initial_empty.matrix(), g.t0, t_begin, g.dt);
  const Matrix r1 = propagate_to(setup.liouvillian, setup.initial_photon.matrix(), g.t0, t_begin, g.dt);
  out.empty = signal_moments(setup.liouvillian, setup.measurement, r0, t_begin, t_end, g.dt, fn);
  out.photon = signal_moments(setup.liouvillian, setup.measurement, r1, t_begin, t_end, g.dt, fn);
  out.t_end = out.photon.t_end;
  out.snr.resize(out.t_end.size());
  for (std::size_t k = 0; k < out.t_end.size(); ++k) {
    const double v = out.empty.variance[k] + out.photon.variance[k];
    out.snr[k] = v > 0.0 ? (out.photon.mean[k] - out.empty.mean[k]) / std::sqrt(v) : 0.0;
  }
  return out;
}

double snr_analytic(const DetectorSetup& setup, const FilterSpec& filter) {
  filter.validate();
  const SnrCurve curve = snr_curve(setup, filter.t_begin, filter.t_end, filter);
  return curve.snr.empty() ? 0.0 : curve.snr.back();
}

std::vector<double> expected_current(const DetectorSetup& setup, int n_control) {
  const auto& g = setup.grid;
  const int n = g.steps();
  const Matrix yq = setup.measurement.quadrature();
  const double scale = std::sqrt(setup.measurement.eta);
  Matrix rho = setup.initial(n_control).matrix();
  std::vector<double> out;
  out.reserve(n + 1);
  out.push_back(scale * real_trace_product(yq, rho));
  for (int k = 0; k < n; ++k) {
    rk4_step(setup.liouvillian, g.time(k), g.dt, rho);
    out.push_back(scale * real_trace_product(yq, rho));
  }
  return out;
}

}  // namespace photodet
