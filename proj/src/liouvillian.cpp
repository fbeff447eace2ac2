#include "photodet/liouvillian.hpp"

namespace photodet {

namespace {

struct DenseTerm {
  Envelope envelope;  // unit scale
  Matrix op;
};

// Accumulates env·op into the group sharing env's time dependence.
void accumulate(std::vector<DenseTerm>& terms, const Envelope& env, const Matrix& op) {
  const Matrix scaled = env.scale() * op;
  for (auto& t : terms) {
    if (t.envelope.same_signature(env)) {
      t.op += scaled;
      return;
    }
  }
  terms.push_back({env * (1.0 / env.scale()), scaled});
}

std::vector<DenseTerm> grouped(const Coupling& c, Complex factor = 1.0) {
  std::vector<DenseTerm> out;
  for (const auto& term : c.terms()) {
    if (term.envelope.scale() == 0.0) continue;
    accumulate(out, term.envelope, factor * term.op.matrix());
  }
  return out;
}

}  // namespace

Liouvillian::Liouvillian(const Generator& gen) : layout_(gen.layout) {
  std::vector<DenseTerm> drift;
  std::vector<std::pair<std::vector<DenseTerm>, std::vector<DenseTerm>>> sandwiches;

  for (const auto& h : gen.hamiltonian.terms()) {
    if (h.coefficient.scale() == 0.0) continue;
    accumulate(drift, h.coefficient, -kI * h.op.matrix());
  }
  for (const auto& c : gen.dissipators) {
    for (const auto& x : c.terms()) {
      for (const auto& y : c.terms()) {
        const Envelope e = x.envelope * y.envelope;
        if (e.scale() == 0.0) continue;
        accumulate(drift, e, -0.5 * x.op.matrix().adjoint() * y.op.matrix());
      }
    }
    sandwiches.emplace_back(grouped(c, 0.5), grouped(c));
  }
  for (const auto& cc : gen.cross_couplings) {
    if (cc.weight.scale() == 0.0) continue;
    for (const auto& x : cc.second.terms()) {
      for (const auto& y : cc.first.terms()) {
        const Envelope e = cc.weight * x.envelope * y.envelope;
        if (e.scale() == 0.0) continue;
        accumulate(drift, e, -(x.op.matrix().adjoint() * y.op.matrix()));
      }
    }
    std::vector<DenseTerm> left;
    for (const auto& y : cc.first.terms()) {
      const Envelope e = cc.weight * y.envelope;
      if (e.scale() == 0.0) continue;
      accumulate(left, e, y.op.matrix());
    }
    sandwiches.emplace_back(std::move(left), grouped(cc.second));
  }

  auto to_sparse = [](std::vector<DenseTerm>& dense) {
    std::vector<Term> out;
    for (auto& d : dense) {
      Term term{d.envelope, {}};
      for (int j = 0; j < d.op.cols(); ++j) {
        for (int i = 0; i < d.op.rows(); ++i) {
          if (d.op(i, j) != Complex{}) term.entries.push_back({i, j, d.op(i, j)});
        }
      }
      if (!term.entries.empty()) out.push_back(std::move(term));
    }
    return out;
  };
  drift_ = to_sparse(drift);
  for (auto& [left, right] : sandwiches) {
    Sandwich s{to_sparse(left), to_sparse(right)};
    if (s.left.empty() || s.right.empty()) continue;
    sandwiches_.push_back(std::move(s));
  }
}

void Liouvillian::add_left(const Term& a, double scale, const Matrix& x, Matrix& out) {
  const auto cols = x.cols();
  for (Eigen::Index c = 0; c < cols; ++c) {
    const Complex* xc = x.col(c).data();
    Complex* oc = out.col(c).data();
    for (const auto& e : a.entries) oc[e.row] += scale * (e.value * xc[e.col]);
  }
}

// out += scale · y · B†, i.e. column j of out gains conj(B_jk) · column k of y.
void Liouvillian::add_right_adjoint(const Term& b, double scale, const Matrix& y, Matrix& out) {
  for (const auto& e : b.entries) out.col(e.row) += (scale * std::conj(e.value)) * y.col(e.col);
}

Matrix Liouvillian::half(double t, const Matrix& x) const {
  const int d = dim();
  Matrix m = Matrix::Zero(d, d);
  for (const auto& term : drift_) {
    const double e = term.envelope(t);
    if (e != 0.0) add_left(term, e, x, m);
  }
  Matrix ax(d, d);
  for (const auto& s : sandwiches_) {
    ax.setZero();
    bool any = false;
    for (const auto& term : s.left) {
      const double e = term.envelope(t);
      if (e == 0.0) continue;
      add_left(term, e, x, ax);
      any = true;
    }
    if (!any) continue;
    for (const auto& term : s.right) {
      const double e = term.envelope(t);
      if (e != 0.0) add_right_adjoint(term, e, ax, m);
    }
  }
  return m;
}

void Liouvillian::apply(double t, const Matrix& x, Matrix& out) const {
  const Matrix m = half(t, x);
  out = m + m.adjoint();
}

Matrix Liouvillian::apply(double t, const Matrix& x) const {
  Matrix out;
  apply(t, x, out);
  return out;
}

Matrix Liouvillian::apply_general(double t, const Matrix& x) const {
  const Matrix m1 = half(t, x);
  const Matrix m2 = half(t, x.adjoint());
  return m1 + m2.adjoint();
}

}  // namespace photodet
