#include "photodet/sources.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace photodet {

namespace {
constexpr double kGaussianHalfWidth = 6.0;     // in units of 1/Γ
constexpr double kExponentialSpan = 40.0;      // e^{-40} ≈ 4e-18 mass left out
}  // namespace

WavepacketShape parse_shape(std::string_view name) {
  if (name == "gaussian") return WavepacketShape::gaussian;
  if (name == "rising_exponential") return WavepacketShape::rising_exponential;
  if (name == "decaying_exponential") return WavepacketShape::decaying_exponential;
  throw std::invalid_argument("unknown wavepacket shape '" + std::string(name) + "'");
}

std::string_view to_string(WavepacketShape shape) {
  switch (shape) {
    case WavepacketShape::gaussian:
      return "gaussian";
    case WavepacketShape::rising_exponential:
      return "rising_exponential";
    case WavepacketShape::decaying_exponential:
      return "decaying_exponential";
  }
  return "gaussian";
}

double Wavepacket::amplitude(double t) const {
  const double g = gamma_ph;
  const double x = t - t_ph;
  switch (shape) {
    case WavepacketShape::gaussian:
      return std::pow(g * g / (2.0 * std::numbers::pi), 0.25) * std::exp(-g * g * x * x / 4.0);
    case WavepacketShape::rising_exponential:
      return x <= 0.0 ? std::sqrt(g) * std::exp(g * x / 2.0) : 0.0;
    case WavepacketShape::decaying_exponential:
      return x >= 0.0 ? std::sqrt(g) * std::exp(-g * x / 2.0) : 0.0;
  }
  return 0.0;
}

double Wavepacket::remaining(double t) const {
  const double g = gamma_ph;
  const double x = t - t_ph;
  switch (shape) {
    case WavepacketShape::gaussian:
      // |ξ|² is a normal density with σ = 1/Γ.
      return 0.5 * std::erfc(g * x / std::numbers::sqrt2);
    case WavepacketShape::rising_exponential:
      return x >= 0.0 ? 0.0 : -std::expm1(g * x);
    case WavepacketShape::decaying_exponential:
      return x <= 0.0 ? 1.0 : std::exp(-g * x);
  }
  return 0.0;
}

double Wavepacket::support_begin() const {
  switch (shape) {
    case WavepacketShape::gaussian:
      return t_ph - kGaussianHalfWidth / gamma_ph;
    case WavepacketShape::rising_exponential:
      return t_ph - kExponentialSpan / gamma_ph;
    case WavepacketShape::decaying_exponential:
      return t_ph;
  }
  return t_ph;
}

double Wavepacket::support_end() const {
  switch (shape) {
    case WavepacketShape::gaussian:
      return t_ph + kGaussianHalfWidth / gamma_ph;
    case WavepacketShape::rising_exponential:
      return t_ph;
    case WavepacketShape::decaying_exponential:
      return t_ph + kExponentialSpan / gamma_ph;
  }
  return t_ph;
}

double kappa_of_t(const Wavepacket& wp, double t) {
  if (!(wp.gamma_ph > 0.0)) throw std::invalid_argument("gamma_ph must be positive");
  if (wp.shape == WavepacketShape::decaying_exponential) {
    return t >= wp.t_ph ? wp.gamma_ph : 0.0;
  }
  if (t > wp.support_end()) return 0.0;
  const double rest = wp.remaining(t);
  if (rest < kRemainingFloor) return kKappaMax;
  const double k = wp.intensity(t) / rest;
  return k < kKappaMax ? k : kKappaMax;
}

Envelope sqrt_kappa_envelope(const Wavepacket& wp) {
  if (!(wp.gamma_ph > 0.0)) throw std::invalid_argument("gamma_ph must be positive");
  return Envelope([wp](double t) { return std::sqrt(kappa_of_t(wp, t)); });
}

Envelope sqrt_rate_envelope(std::function<double(double)> kappa) {
  return Envelope([kappa = std::move(kappa)](double t) {
    const double k = kappa(t);
    if (k < 0.0) throw std::domain_error("negative decay rate sampled at t = " + std::to_string(t));
    return std::sqrt(k);
  });
}

}  // namespace photodet
