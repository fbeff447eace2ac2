#pragma once

#include "photodet/slh.hpp"

#include <string_view>

namespace photodet {

enum class WavepacketShape { gaussian, rising_exponential, decaying_exponential };

WavepacketShape parse_shape(std::string_view name);
std::string_view to_string(WavepacketShape shape);

/// Normalized single-photon temporal mode ξ(t).
///
///  gaussian:              (Γ²/2π)^{1/4} exp(−Γ²(t−T)²/4), support T ± 6/Γ
///  rising_exponential:    √Γ exp(Γ(t−T)/2) for t ≤ T, zero after the peak
///  decaying_exponential:  √Γ exp(−Γ(t−T)/2) for t ≥ T, zero before
///
/// Γ is gamma_ph and T is t_ph.
struct Wavepacket {
  WavepacketShape shape = WavepacketShape::gaussian;
  double gamma_ph = 1.0;
  double t_ph = 0.0;

  double amplitude(double t) const;
  double intensity(double t) const { return amplitude(t) * amplitude(t); }
  /// ∫_t^∞ |ξ(s)|² ds, evaluated in closed form.
  double remaining(double t) const;
  /// Interval outside which ξ is treated as zero.
  double support_begin() const;
  double support_end() const;
};

inline constexpr double kKappaMax = 1e4;
inline constexpr double kRemainingFloor = 1e-12;

/// Source-cavity decay rate κ(t) = |ξ(t)|² / ∫_t^∞|ξ|² that releases the photon
/// in the mode ξ. Clamped at kKappaMax; once the remaining norm drops below
/// kRemainingFloor inside the support the clamp value is returned, and outside
/// the support κ = 0.
double kappa_of_t(const Wavepacket& wp, double t);

/// √κ(t) as an envelope for cavity_source_triple.
Envelope sqrt_kappa_envelope(const Wavepacket& wp);

/// √κ(t) from an arbitrary rate function; throws std::domain_error when a
/// negative rate is sampled.
Envelope sqrt_rate_envelope(std::function<double(double)> kappa);

}  // namespace photodet
