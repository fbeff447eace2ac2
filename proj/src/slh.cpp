#include "photodet/slh.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace photodet {

Envelope::Envelope(Function f) {
  if (!f) throw std::invalid_argument("envelope function is empty");
  factors_.push_back(std::make_shared<const Function>(std::move(f)));
}

double Envelope::operator()(double t) const {
  double v = scale_;
  for (const auto& f : factors_) v *= (*f)(t);
  return v;
}

Envelope operator*(const Envelope& a, const Envelope& b) {
  Envelope out;
  out.scale_ = a.scale_ * b.scale_;
  out.factors_ = a.factors_;
  out.factors_.insert(out.factors_.end(), b.factors_.begin(), b.factors_.end());
  std::sort(out.factors_.begin(), out.factors_.end(), std::owner_less<>{});
  return out;
}

Envelope operator*(const Envelope& a, double s) {
  Envelope out = a;
  out.scale_ *= s;
  return out;
}

// ---------------------------------------------------------------------------

Coupling::Coupling(SpaceLayout layout, std::vector<CouplingTerm> terms)
    : layout_(std::move(layout)), terms_(std::move(terms)) {
  for (const auto& term : terms_) {
    if (!(term.op.layout() == layout_)) throw std::invalid_argument("coupling term layout mismatch");
  }
}

Coupling::Coupling(const Operator& op, Envelope envelope) : layout_(op.layout()) {
  terms_.push_back({op, std::move(envelope)});
}

Coupling Coupling::scalar(Complex amplitude, const SpaceLayout& layout) {
  Coupling c(layout);
  if (amplitude != Complex{}) c.add(Operator::identity(layout) * amplitude);
  return c;
}

Matrix Coupling::at(double t) const {
  Matrix m = Matrix::Zero(layout_.dim(), layout_.dim());
  for (const auto& term : terms_) m += term.envelope(t) * term.op.matrix();
  return m;
}

Coupling& Coupling::add(const Operator& op, Envelope envelope) {
  if (!(op.layout() == layout_)) throw std::invalid_argument("coupling term layout mismatch");
  terms_.push_back({op, std::move(envelope)});
  return *this;
}

Coupling& Coupling::operator+=(const Coupling& other) {
  for (const auto& term : other.terms_) add(term.op, term.envelope);
  return *this;
}

Coupling Coupling::scaled(Complex s) const {
  Coupling out(layout_);
  if (s == Complex{}) return out;
  for (const auto& term : terms_) out.add(term.op * s, term.envelope);
  return out;
}

Coupling Coupling::lifted(const SpaceLayout& layout) const {
  Coupling out(layout);
  for (const auto& term : terms_) out.add(embed(term.op, layout), term.envelope);
  return out;
}

// ---------------------------------------------------------------------------

Matrix HamiltonianSpec::at(double t) const {
  Matrix m = Matrix::Zero(layout_.dim(), layout_.dim());
  for (const auto& term : terms_) m += term.coefficient(t) * term.op.matrix();
  return m;
}

HamiltonianSpec& HamiltonianSpec::add(const Operator& op, Envelope coefficient) {
  if (!(op.layout() == layout_)) throw std::invalid_argument("Hamiltonian term layout mismatch");
  if (!op.is_hermitian(1e-10)) throw std::invalid_argument("Hamiltonian term is not Hermitian");
  terms_.push_back({std::move(coefficient), op});
  return *this;
}

HamiltonianSpec& HamiltonianSpec::operator+=(const HamiltonianSpec& other) {
  for (const auto& term : other.terms_) add(term.op, term.coefficient);
  return *this;
}

HamiltonianSpec HamiltonianSpec::lifted(const SpaceLayout& layout) const {
  HamiltonianSpec out(layout);
  for (const auto& term : terms_) out.add(embed(term.op, layout), term.coefficient);
  return out;
}

// ---------------------------------------------------------------------------

SlhTriple::SlhTriple(SpaceLayout layout_, Matrix scattering_, std::vector<Coupling> couplings_,
                     HamiltonianSpec hamiltonian_)
    : layout(std::move(layout_)),
      scattering(std::move(scattering_)),
      couplings(std::move(couplings_)),
      hamiltonian(std::move(hamiltonian_)) {
  const auto n = static_cast<Eigen::Index>(couplings.size());
  if (scattering.rows() != n || scattering.cols() != n) {
    throw std::invalid_argument("scattering matrix size does not match channel count");
  }
  if (n > 0 && (scattering.adjoint() * scattering - Matrix::Identity(n, n)).cwiseAbs().maxCoeff() > 1e-10) {
    throw std::invalid_argument("scattering matrix is not unitary");
  }
  for (const auto& c : couplings) {
    if (!(c.layout() == layout)) throw std::invalid_argument("coupling layout differs from triple layout");
  }
  if (!(hamiltonian.layout() == layout)) throw std::invalid_argument("Hamiltonian layout differs from triple layout");
}

SlhTriple SlhTriple::empty(const SpaceLayout& layout) {
  return {layout, Matrix(0, 0), {}, HamiltonianSpec(layout)};
}

SlhTriple SlhTriple::identity(const SpaceLayout& layout, int channels) {
  return {layout, Matrix::Identity(channels, channels), std::vector<Coupling>(channels, Coupling(layout)),
          HamiltonianSpec(layout)};
}

SlhTriple SlhTriple::lifted(const SpaceLayout& target) const {
  if (target == layout) return *this;
  std::vector<Coupling> lifted_couplings;
  for (const auto& c : couplings) lifted_couplings.push_back(c.lifted(target));
  return {target, scattering, std::move(lifted_couplings), hamiltonian.lifted(target)};
}

// ---------------------------------------------------------------------------

Matrix Generator::apply(double t, const Matrix& rho) const {
  const Matrix h = hamiltonian.at(t);
  Matrix out = -kI * (h * rho - rho * h);
  for (const auto& c : dissipators) out += dissipator(c.at(t), rho);
  for (const auto& cc : cross_couplings) out += cc.weight(t) * coupling_super(cc.first.at(t), cc.second.at(t), rho);
  return out;
}

SlhTriple series(const SlhTriple& downstream_in, const SlhTriple& upstream_in) {
  if (downstream_in.channels() != upstream_in.channels()) {
    throw std::invalid_argument("series product: channel counts differ (" +
                                std::to_string(downstream_in.channels()) + " vs " +
                                std::to_string(upstream_in.channels()) + ")");
  }
  const SpaceLayout layout = upstream_in.layout.merged_with(downstream_in.layout);
  const SlhTriple g2 = downstream_in.lifted(layout);
  const SlhTriple g1 = upstream_in.lifted(layout);
  const int n = g1.channels();

  std::vector<Coupling> fed(n, Coupling(layout));  // S2 L1
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) fed[i] += g1.couplings[j].scaled(g2.scattering(i, j));
  }

  HamiltonianSpec h = g1.hamiltonian;
  h += g2.hamiltonian;
  const Complex half_over_i = 1.0 / (2.0 * kI);
  for (int i = 0; i < n; ++i) {
    for (const auto& x : g2.couplings[i].terms()) {
      for (const auto& y : fed[i].terms()) {
        const Matrix xy = x.op.matrix().adjoint() * y.op.matrix();
        Matrix term = half_over_i * (xy - xy.adjoint());
        if (term.cwiseAbs().maxCoeff() == 0.0) continue;
        h.add(Operator(layout, std::move(term)), x.envelope * y.envelope);
      }
    }
  }

  std::vector<Coupling> l;
  for (int i = 0; i < n; ++i) {
    Coupling c = fed[i];
    c += g2.couplings[i];
    l.push_back(std::move(c));
  }
  return {layout, g2.scattering * g1.scattering, std::move(l), std::move(h)};
}

SlhTriple concat(const SlhTriple& top_in, const SlhTriple& bottom_in) {
  const SpaceLayout layout = top_in.layout.merged_with(bottom_in.layout);
  const SlhTriple top = top_in.lifted(layout);
  const SlhTriple bottom = bottom_in.lifted(layout);
  const int n2 = top.channels();
  const int n1 = bottom.channels();

  Matrix s = Matrix::Zero(n2 + n1, n2 + n1);
  s.topLeftCorner(n2, n2) = top.scattering;
  s.bottomRightCorner(n1, n1) = bottom.scattering;

  std::vector<Coupling> l = top.couplings;
  l.insert(l.end(), bottom.couplings.begin(), bottom.couplings.end());

  HamiltonianSpec h = top.hamiltonian;
  h += bottom.hamiltonian;
  return {layout, std::move(s), std::move(l), std::move(h)};
}

Generator me_from_slh(const SlhTriple& g) {
  Generator gen(g.layout);
  gen.hamiltonian = g.hamiltonian;
  gen.dissipators = g.couplings;
  return gen;
}

// ---------------------------------------------------------------------------

namespace {

void require_nonnegative(double v, const char* name) {
  if (!(v >= 0.0)) throw std::invalid_argument(std::string(name) + " must be non-negative");
}

void validate(const TransmonParams& p) {
  require_nonnegative(p.gamma01, "gamma01");
  require_nonnegative(p.gamma12, "gamma12");
  require_nonnegative(p.omega_p, "omega_p");
}

Matrix transmon_bare_hamiltonian(const TransmonParams& p) {
  Matrix h = -p.delta01 * ket_bra(0, 0, 3) + p.delta12 * ket_bra(2, 2, 3);
  const Matrix l12 = transmon_lowering(1, 2, p.gamma12);
  return h + p.omega_p * (l12 + l12.adjoint());
}

}  // namespace

Matrix transmon_lowering(int lower, int upper, double rate) {
  require_nonnegative(rate, "decay rate");
  return std::sqrt(rate) * ket_bra(lower, upper, 3);
}

SlhTriple transmon_triple(const TransmonParams& p, const std::string& label) {
  validate(p);
  const SpaceLayout layout({{label, 3}});
  std::vector<Coupling> l{Coupling(embed(transmon_lowering(0, 1, p.gamma01), label, layout)),
                          Coupling(embed(transmon_lowering(1, 2, p.gamma12), label, layout))};
  HamiltonianSpec h(layout);
  h.add(embed(transmon_bare_hamiltonian(p), label, layout));
  return {layout, Matrix::Identity(2, 2), std::move(l), std::move(h)};
}

SlhTriple cavity_source_triple(const Envelope& sqrt_kappa, const std::string& label) {
  const SpaceLayout layout({{label, 2}});
  std::vector<Coupling> l{Coupling(embed(annihilation(2), label, layout), sqrt_kappa)};
  return {layout, Matrix::Identity(1, 1), std::move(l), HamiltonianSpec(layout)};
}

SlhTriple coherent_drive_triple(Complex alpha, const SpaceLayout& layout) {
  return {layout, Matrix::Identity(1, 1), {Coupling::scalar(alpha, layout)}, HamiltonianSpec(layout)};
}

std::string transmon_label(int k) { return "transmon" + std::to_string(k); }

SpaceLayout cascade_layout(int n_transmons) {
  std::vector<SpaceLayout::Subsystem> subs{{"source", 2}};
  for (int k = 1; k <= n_transmons; ++k) subs.push_back({transmon_label(k), 3});
  return SpaceLayout(std::move(subs));
}

SlhTriple cascade_transmons(const std::vector<TransmonParams>& transmons, const Envelope& sqrt_kappa,
                            Complex alpha) {
  if (transmons.empty()) throw std::invalid_argument("cascade needs at least one transmon");
  SlhTriple g = concat(cavity_source_triple(sqrt_kappa, "source"), coherent_drive_triple(alpha));
  for (std::size_t k = 0; k < transmons.size(); ++k) {
    TransmonParams p = transmons[k];
    p.omega_p = 0.0;
    g = series(transmon_triple(p, transmon_label(static_cast<int>(k) + 1)), g);
  }
  return g;
}

Generator explicit_cascaded_generator(const std::vector<TransmonParams>& transmons, const Envelope& sqrt_kappa,
                                      double omega_p) {
  if (transmons.empty()) throw std::invalid_argument("cascade needs at least one transmon");
  const int n = static_cast<int>(transmons.size());
  const SpaceLayout layout = cascade_layout(n);
  Generator gen(layout);

  std::vector<Operator> l01;
  std::vector<Operator> l12;
  for (int k = 0; k < n; ++k) {
    TransmonParams p = transmons[k];
    validate(p);
    p.omega_p = omega_p;
    const std::string label = transmon_label(k + 1);
    gen.hamiltonian.add(embed(transmon_bare_hamiltonian(p), label, layout));
    l01.push_back(embed(transmon_lowering(0, 1, p.gamma01), label, layout));
    l12.push_back(embed(transmon_lowering(1, 2, p.gamma12), label, layout));
  }

  Coupling lambda01(layout);
  for (int k = 0; k < n; ++k) {
    gen.dissipators.emplace_back(l01[k]);
    gen.dissipators.emplace_back(l12[k]);
    lambda01.add(l01[k]);
  }
  const Operator a = embed(annihilation(2), "source", layout);
  gen.dissipators.emplace_back(a, sqrt_kappa);
  gen.cross_couplings.push_back({Coupling(a), lambda01, sqrt_kappa});
  for (int j = 0; j < n; ++j) {
    for (int k = j + 1; k < n; ++k) {
      gen.cross_couplings.push_back({Coupling(l01[j]), Coupling(l01[k]), Envelope(1.0)});
      gen.cross_couplings.push_back({Coupling(l12[j]), Coupling(l12[k]), Envelope(1.0)});
    }
  }
  return gen;
}

JcUnit jc_unit_generator(const JcUnitParams& p, const Envelope& sqrt_kappa_a) {
  if (p.probe_levels < 2) throw std::invalid_argument("probe cavity truncation must be at least 2");
  require_nonnegative(p.gamma01, "gamma01");
  require_nonnegative(p.gamma12, "gamma12");
  require_nonnegative(p.kappa_b, "kappa_b");
  require_nonnegative(p.drive, "drive");
  require_nonnegative(p.coupling, "coupling");

  const SpaceLayout layout({{"source", 2}, {"transmon", 3}, {"probe", p.probe_levels}});
  const Operator a = embed(annihilation(2), "source", layout);
  const Operator b = embed(annihilation(p.probe_levels), "probe", layout);
  const Operator s21 = embed(ket_bra(2, 1, 3), "transmon", layout);
  const Operator l01 = embed(transmon_lowering(0, 1, p.gamma01), "transmon", layout);
  const Operator l12 = embed(transmon_lowering(1, 2, p.gamma12), "transmon", layout);

  Generator gen(layout);
  const Matrix h_atom = p.delta1 * ket_bra(1, 1, 3) + (p.delta1 + p.delta2) * ket_bra(2, 2, 3);
  gen.hamiltonian.add(embed(h_atom, "transmon", layout));
  gen.hamiltonian.add((b - b.adjoint()) * (-kI * p.drive));
  const Operator bs21 = b * s21;
  gen.hamiltonian.add((bs21 - bs21.adjoint()) * (-kI * p.coupling));

  gen.dissipators.emplace_back(l01);
  gen.dissipators.emplace_back(l12);
  gen.dissipators.emplace_back(a, sqrt_kappa_a);
  gen.dissipators.emplace_back(b * std::sqrt(p.kappa_b));
  gen.cross_couplings.push_back({Coupling(a), Coupling(l01), sqrt_kappa_a});

  return {std::move(gen), b * std::sqrt(p.kappa_b)};
}

}  // namespace photodet
