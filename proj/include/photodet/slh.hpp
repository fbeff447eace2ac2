#pragma once

#include "photodet/qops.hpp"

#include <functional>
#include <memory>
#include <vector>

namespace photodet {

/// Real scalar time profile, stored as scale × Π factor_k(t). Keeping the
/// factors symbolic lets products of envelopes stay envelopes and lets the
/// evaluator group terms that share the same time dependence.
class Envelope {
 public:
  using Function = std::function<double(double)>;

  Envelope() = default;
  explicit Envelope(double scale) : scale_(scale) {}
  explicit Envelope(Function f);

  double operator()(double t) const;
  bool is_constant() const { return factors_.empty(); }
  double scale() const { return scale_; }

  /// Two envelopes with the same signature differ only by their scale.
  bool same_signature(const Envelope& other) const { return factors_ == other.factors_; }

  friend Envelope operator*(const Envelope& a, const Envelope& b);
  friend Envelope operator*(const Envelope& a, double s);
  friend Envelope operator*(double s, const Envelope& a) { return a * s; }

 private:
  double scale_ = 1.0;
  std::vector<std::shared_ptr<const Function>> factors_;  // sorted by address
};

/// envelope(t) · op
struct CouplingTerm {
  Operator op;
  Envelope envelope;
};

/// A channel coupling operator L(t) = Σ_k envelope_k(t) op_k.
class Coupling {
 public:
  explicit Coupling(SpaceLayout layout) : layout_(std::move(layout)) {}
  Coupling(SpaceLayout layout, std::vector<CouplingTerm> terms);
  Coupling(const Operator& op, Envelope envelope = Envelope{});

  /// c-number channel amplitude, represented as amplitude × identity.
  static Coupling scalar(Complex amplitude, const SpaceLayout& layout);

  const SpaceLayout& layout() const { return layout_; }
  const std::vector<CouplingTerm>& terms() const { return terms_; }
  Matrix at(double t) const;

  Coupling& add(const Operator& op, Envelope envelope = Envelope{});
  Coupling& operator+=(const Coupling& other);
  Coupling scaled(Complex s) const;
  Coupling lifted(const SpaceLayout& layout) const;

 private:
  SpaceLayout layout_;
  std::vector<CouplingTerm> terms_;
};

struct HamiltonianTerm {
  Envelope coefficient;
  Operator op;  // Hermitian
};

class HamiltonianSpec {
 public:
  explicit HamiltonianSpec(SpaceLayout layout) : layout_(std::move(layout)) {}

  const SpaceLayout& layout() const { return layout_; }
  const std::vector<HamiltonianTerm>& terms() const { return terms_; }
  Matrix at(double t) const;

  /// Throws if op is not Hermitian within 1e-10.
  HamiltonianSpec& add(const Operator& op, Envelope coefficient = Envelope{});
  HamiltonianSpec& operator+=(const HamiltonianSpec& other);
  HamiltonianSpec lifted(const SpaceLayout& layout) const;

 private:
  SpaceLayout layout_;
  std::vector<HamiltonianTerm> terms_;
};

/// (S, L, H) description of an open subsystem. S is restricted to c-number
/// matrices and feedback connections are not supported.
struct SlhTriple {
  SpaceLayout layout;
  Matrix scattering;  // channels × channels
  std::vector<Coupling> couplings;
  HamiltonianSpec hamiltonian;

  SlhTriple(SpaceLayout layout, Matrix scattering, std::vector<Coupling> couplings, HamiltonianSpec hamiltonian);

  static SlhTriple empty(const SpaceLayout& layout);
  /// (1, 0, 0) with the given number of channels.
  static SlhTriple identity(const SpaceLayout& layout, int channels = 1);

  int channels() const { return static_cast<int>(couplings.size()); }
  SlhTriple lifted(const SpaceLayout& target) const;
};

/// w(t)·S[first, second]ρ
struct CrossCoupling {
  Coupling first;
  Coupling second;
  Envelope weight;
};

/// ρ̇ = −i[H(t), ρ] + Σ D[L_i(t)]ρ + Σ w_k(t) S[c1_k(t), c2_k(t)]ρ
class Generator {
 public:
  explicit Generator(SpaceLayout layout) : layout(layout), hamiltonian(layout) {}

  SpaceLayout layout;
  HamiltonianSpec hamiltonian;
  std::vector<Coupling> dissipators;
  std::vector<CrossCoupling> cross_couplings;

  /// Term-by-term evaluation through the qops superoperators.
  Matrix apply(double t, const Matrix& rho) const;
};

/// G2 ◁ G1: the output of G1 feeds G2.
SlhTriple series(const SlhTriple& downstream, const SlhTriple& upstream);
/// G2 ⊞ G1: channels of G2 stacked above those of G1.
SlhTriple concat(const SlhTriple& top, const SlhTriple& bottom);
Generator me_from_slh(const SlhTriple& g);

struct TransmonParams {
  double delta01 = 0.0;
  double delta12 = 0.0;
  double gamma01 = 1.0;
  double gamma12 = 2.0;
  double omega_p = 0.0;
};

/// L_ij = √Γ_ij |i⟩⟨j| on a 3-level subsystem.
Matrix transmon_lowering(int lower, int upper, double rate);

/// Channels (L01, L12) and H = −Δ01|0⟩⟨0| + Δ12|2⟩⟨2| + Ωp(L12 + L21).
/// Ωp here is a locally applied drive; inside a cascade the probe enters
/// through the coherent-drive channel instead and Ωp must be zero.
SlhTriple transmon_triple(const TransmonParams& p, const std::string& label = "transmon");
/// (1, √κ(t) a, 0) on a two-level source cavity.
SlhTriple cavity_source_triple(const Envelope& sqrt_kappa, const std::string& label = "source");
/// (1, α, 0)
SlhTriple coherent_drive_triple(Complex alpha, const SpaceLayout& layout = SpaceLayout{});

/// G_tr^(N) ◁ … ◁ G_tr^(1) ◁ (G_cav ⊞ G_α). Layout [source, transmon1, …, transmonN];
/// channel 0 carries √κ a + Λ01, channel 1 carries α + Λ12. The per-transmon Ωp
/// fields are ignored; the probe is set by alpha.
SlhTriple cascade_transmons(const std::vector<TransmonParams>& transmons, const Envelope& sqrt_kappa,
                            Complex alpha);

/// The cascaded master equation assembled term by term with H_eff = Σ H^(k)
/// (each H^(k) with drive Ωp), independent of the SLH products.
Generator explicit_cascaded_generator(const std::vector<TransmonParams>& transmons, const Envelope& sqrt_kappa,
                                      double omega_p);

SpaceLayout cascade_layout(int n_transmons);
std::string transmon_label(int k);  // "transmon1", …

struct JcUnitParams {
  double delta1 = 0.0;
  double delta2 = 0.0;
  double drive = 0.0;     // E
  double coupling = 0.0;  // g
  double gamma01 = 1.0;
  double gamma12 = 0.1;
  double kappa_b = 1.0;
  int probe_levels = 10;
};

struct JcUnit {
  Generator generator;
  Operator measured;  // √κb b
};

/// Source ⊗ transmon ⊗ probe cavity with
/// H = δ1|1⟩⟨1| + (δ1+δ2)|2⟩⟨2| − iE(b − b†) − ig(bσ21 − b†σ12).
/// With g = 0 the probe relaxes to the coherent state ⟨b⟩ = +2E/κb.
JcUnit jc_unit_generator(const JcUnitParams& p, const Envelope& sqrt_kappa_a);

}  // namespace photodet
