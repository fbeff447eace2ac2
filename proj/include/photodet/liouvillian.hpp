#pragma once

#include "photodet/slh.hpp"

#include <Eigen/SparseCore>

namespace photodet {

using SparseMatrix = Eigen::SparseMatrix<Complex, Eigen::RowMajor>;

/// Evaluation form of a Generator. Every term is rewritten as
///
///   L(t)ρ = M + M†,   M = K(t)ρ + Σ_s A_s(t) ρ B_s(t)†
///
/// with K = −iH − ½ΣL†L + Σ w c2†c1 and one (A, B) pair per dissipator or
/// cross coupling. Operators are grouped by envelope signature and kept as
/// nonzero triplets; A·x runs column by column and y·B† as column updates.
class Liouvillian {
 public:
  explicit Liouvillian(const Generator& gen);

  const SpaceLayout& layout() const { return layout_; }
  int dim() const { return layout_.dim(); }

  /// L(t)x for Hermitian x.
  void apply(double t, const Matrix& x, Matrix& out) const;
  Matrix apply(double t, const Matrix& x) const;
  /// L(t)x for arbitrary x (twice the cost).
  Matrix apply_general(double t, const Matrix& x) const;

 private:
  struct Entry {
    int row;
    int col;
    Complex value;
  };
  struct Term {
    Envelope envelope;
    std::vector<Entry> entries;
  };

  static void add_left(const Term& a, double scale, const Matrix& x, Matrix& out);
  static void add_right_adjoint(const Term& b, double scale, const Matrix& y, Matrix& out);
  struct Sandwich {
    std::vector<Term> left;
    std::vector<Term> right;
  };

  Matrix half(double t, const Matrix& x) const;

  SpaceLayout layout_;
  std::vector<Term> drift_;
  std::vector<Sandwich> sandwiches_;
};

}  // namespace photodet
