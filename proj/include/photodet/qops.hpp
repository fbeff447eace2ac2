#pragma once

#include <Eigen/Dense>

#include <complex>
#include <string>
#include <string_view>
#include <vector>

namespace photodet {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

inline constexpr Complex kI{0.0, 1.0};

/// Ordered tensor-product structure of a Hilbert space. Subsystem 0 is the
/// most significant factor of the Kronecker product.
class SpaceLayout {
 public:
  struct Subsystem {
    std::string label;
    int dim = 1;
    bool operator==(const Subsystem&) const = default;
  };

  SpaceLayout() = default;
  explicit SpaceLayout(std::vector<Subsystem> subsystems);

  int dim() const { return dim_; }
  int size() const { return static_cast<int>(subsystems_.size()); }
  const Subsystem& operator[](int i) const { return subsystems_.at(i); }
  const std::vector<Subsystem>& subsystems() const { return subsystems_; }

  bool contains(std::string_view label) const;
  int index_of(std::string_view label) const;
  int dim_of(std::string_view label) const { return subsystems_[index_of(label)].dim; }

  /// Product-basis index of the given per-subsystem levels.
  int flat_index(const std::vector<int>& levels) const;

  /// Subsystems of *this followed by those of other not already present.
  /// Shared labels must agree on dimension.
  SpaceLayout merged_with(const SpaceLayout& other) const;

  bool operator==(const SpaceLayout& other) const { return subsystems_ == other.subsystems_; }

 private:
  std::vector<Subsystem> subsystems_;
  int dim_ = 1;
};

class Operator {
 public:
  Operator(SpaceLayout layout, Matrix entries);

  static Operator identity(const SpaceLayout& layout);
  static Operator zero(const SpaceLayout& layout);

  const SpaceLayout& layout() const { return layout_; }
  const Matrix& matrix() const { return entries_; }
  int dim() const { return layout_.dim(); }

  Operator adjoint() const { return {layout_, entries_.adjoint()}; }
  bool is_hermitian(double tol = 1e-12) const;

  Operator& operator+=(const Operator& rhs);
  Operator& operator-=(const Operator& rhs);
  Operator& operator*=(Complex s);

  friend Operator operator+(Operator lhs, const Operator& rhs) { return lhs += rhs; }
  friend Operator operator-(Operator lhs, const Operator& rhs) { return lhs -= rhs; }
  friend Operator operator*(Operator lhs, Complex s) { return lhs *= s; }
  friend Operator operator*(Complex s, Operator rhs) { return rhs *= s; }
  friend Operator operator*(const Operator& lhs, const Operator& rhs);

 private:
  SpaceLayout layout_;
  Matrix entries_;
};

class DensityMatrix {
 public:
  /// Validates Hermiticity (1e-10) and unit trace (1e-8).
  DensityMatrix(SpaceLayout layout, Matrix entries);

  static DensityMatrix pure(const SpaceLayout& layout, const Vector& psi);
  /// Product basis state with one level per subsystem.
  static DensityMatrix basis(const SpaceLayout& layout, const std::vector<int>& levels);

  const SpaceLayout& layout() const { return layout_; }
  const Matrix& matrix() const { return entries_; }
  int dim() const { return layout_.dim(); }

  double min_eigenvalue() const;
  double population(const std::vector<int>& levels) const;

 private:
  SpaceLayout layout_;
  Matrix entries_;
};

// Single-subsystem building blocks.
Matrix ket_bra(int row, int col, int dim);
Matrix annihilation(int dim);

/// identity ⊗ … ⊗ op ⊗ … ⊗ identity with op on the labeled subsystem.
Operator embed(const Matrix& op, std::string_view label, const SpaceLayout& layout);

/// Lifts an operator on a sub-layout (any subset of labels, any order) onto a
/// larger layout, acting as identity on the remaining subsystems.
Operator embed(const Operator& op, const SpaceLayout& layout);

/// D[c]ρ = cρc† − ½c†cρ − ½ρc†c
Matrix dissipator(const Matrix& c, const Matrix& rho);
/// S[c1,c2]ρ = [c1ρ, c2†] + [c2, ρc1†], so S[c,c] = 2D[c]
Matrix coupling_super(const Matrix& c1, const Matrix& c2, const Matrix& rho);
/// M[c]ρ = e^{iφ}cρ + e^{−iφ}ρc† − ⟨e^{iφ}c + e^{−iφ}c†⟩ρ
Matrix measurement_super(const Matrix& c, double phase, const Matrix& rho);
Complex expectation(const Matrix& a, const Matrix& rho);

Matrix dissipator(const Operator& c, const DensityMatrix& rho);
Matrix coupling_super(const Operator& c1, const Operator& c2, const DensityMatrix& rho);
Matrix measurement_super(const Operator& c, double phase, const DensityMatrix& rho);
Complex expectation(const Operator& a, const DensityMatrix& rho);

/// ½‖a − b‖₁ for Hermitian arguments.
double trace_distance(const Matrix& a, const Matrix& b);

/// ρ ← (ρ + ρ†)/2
void symmetrize(Matrix& rho);

}  // namespace photodet
