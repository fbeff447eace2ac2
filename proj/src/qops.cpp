#include "photodet/qops.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace photodet {

namespace {

void require_same_shape(const Matrix& a, const Matrix& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols() || a.rows() != a.cols()) {
    throw std::invalid_argument(std::string(what) + ": shape mismatch (" + std::to_string(a.rows()) +
                                "x" + std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) +
                                "x" + std::to_string(b.cols()) + ")");
  }
}

// Digits of a flat product-basis index, most significant subsystem first.
std::vector<int> digits(int index, const SpaceLayout& layout) {
  std::vector<int> out(layout.size());
  for (int s = layout.size() - 1; s >= 0; --s) {
    out[s] = index % layout[s].dim;
    index /= layout[s].dim;
  }
  return out;
}

}  // namespace

SpaceLayout::SpaceLayout(std::vector<Subsystem> subsystems) : subsystems_(std::move(subsystems)) {
  for (std::size_t i = 0; i < subsystems_.size(); ++i) {
    if (subsystems_[i].dim < 1) {
      throw std::invalid_argument("subsystem '" + subsystems_[i].label + "' has non-positive dimension");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (subsystems_[j].label == subsystems_[i].label) {
        throw std::invalid_argument("duplicate subsystem label '" + subsystems_[i].label + "'");
      }
    }
    dim_ *= subsystems_[i].dim;
  }
}

bool SpaceLayout::contains(std::string_view label) const {
  return std::any_of(subsystems_.begin(), subsystems_.end(),
                     [&](const Subsystem& s) { return s.label == label; });
}

int SpaceLayout::index_of(std::string_view label) const {
  for (int i = 0; i < size(); ++i) {
    if (subsystems_[i].label == label) return i;
  }
  throw std::invalid_argument("unknown subsystem label '" + std::string(label) + "'");
}

int SpaceLayout::flat_index(const std::vector<int>& levels) const {
  if (static_cast<int>(levels.size()) != size()) {
    throw std::invalid_argument("flat_index: expected " + std::to_string(size()) + " levels");
  }
  int index = 0;
  for (int s = 0; s < size(); ++s) {
    if (levels[s] < 0 || levels[s] >= subsystems_[s].dim) {
      throw std::invalid_argument("flat_index: level out of range for '" + subsystems_[s].label + "'");
    }
    index = index * subsystems_[s].dim + levels[s];
  }
  return index;
}

SpaceLayout SpaceLayout::merged_with(const SpaceLayout& other) const {
  std::vector<Subsystem> out = subsystems_;
  for (const auto& s : other.subsystems_) {
    if (contains(s.label)) {
      if (dim_of(s.label) != s.dim) {
        throw std::invalid_argument("subsystem '" + s.label + "' has conflicting dimensions");
      }
      continue;
    }
    out.push_back(s);
  }
  return SpaceLayout(std::move(out));
}

Operator::Operator(SpaceLayout layout, Matrix entries)
    : layout_(std::move(layout)), entries_(std::move(entries)) {
  if (entries_.rows() != layout_.dim() || entries_.cols() != layout_.dim()) {
    throw std::invalid_argument("operator is " + std::to_string(entries_.rows()) + "x" +
                                std::to_string(entries_.cols()) + " but layout dimension is " +
                                std::to_string(layout_.dim()));
  }
}

Operator Operator::identity(const SpaceLayout& layout) {
  return {layout, Matrix::Identity(layout.dim(), layout.dim())};
}

Operator Operator::zero(const SpaceLayout& layout) {
  return {layout, Matrix::Zero(layout.dim(), layout.dim())};
}

bool Operator::is_hermitian(double tol) const {
  return (entries_ - entries_.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

Operator& Operator::operator+=(const Operator& rhs) {
  if (!(layout_ == rhs.layout_)) throw std::invalid_argument("operator sum: layout mismatch");
  entries_ += rhs.entries_;
  return *this;
}

Operator& Operator::operator-=(const Operator& rhs) {
  if (!(layout_ == rhs.layout_)) throw std::invalid_argument("operator difference: layout mismatch");
  entries_ -= rhs.entries_;
  return *this;
}

Operator& Operator::operator*=(Complex s) {
  entries_ *= s;
  return *this;
}

Operator operator*(const Operator& lhs, const Operator& rhs) {
  if (!(lhs.layout_ == rhs.layout_)) throw std::invalid_argument("operator product: layout mismatch");
  return {lhs.layout_, lhs.entries_ * rhs.entries_};
}

DensityMatrix::DensityMatrix(SpaceLayout layout, Matrix entries)
    : layout_(std::move(layout)), entries_(std::move(entries)) {
  if (entries_.rows() != layout_.dim() || entries_.cols() != layout_.dim()) {
    throw std::invalid_argument("density matrix dimension does not match layout");
  }
  if ((entries_ - entries_.adjoint()).cwiseAbs().maxCoeff() > 1e-10) {
    throw std::invalid_argument("density matrix is not Hermitian");
  }
  if (std::abs(entries_.trace() - 1.0) > 1e-8) {
    throw std::invalid_argument("density matrix trace is not 1");
  }
}

DensityMatrix DensityMatrix::pure(const SpaceLayout& layout, const Vector& psi) {
  if (psi.size() != layout.dim()) throw std::invalid_argument("state vector dimension mismatch");
  const double norm = psi.norm();
  if (norm == 0.0) throw std::invalid_argument("zero state vector");
  const Vector v = psi / norm;
  return {layout, v * v.adjoint()};
}

DensityMatrix DensityMatrix::basis(const SpaceLayout& layout, const std::vector<int>& levels) {
  Matrix m = Matrix::Zero(layout.dim(), layout.dim());
  const int i = layout.flat_index(levels);
  m(i, i) = 1.0;
  return {layout, std::move(m)};
}

double DensityMatrix::min_eigenvalue() const {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(entries_, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

double DensityMatrix::population(const std::vector<int>& levels) const {
  const int i = layout_.flat_index(levels);
  return entries_(i, i).real();
}

Matrix ket_bra(int row, int col, int dim) {
  if (row < 0 || col < 0 || row >= dim || col >= dim) throw std::invalid_argument("ket_bra: index out of range");
  Matrix m = Matrix::Zero(dim, dim);
  m(row, col) = 1.0;
  return m;
}

Matrix annihilation(int dim) {
  Matrix m = Matrix::Zero(dim, dim);
  for (int n = 1; n < dim; ++n) m(n - 1, n) = std::sqrt(static_cast<double>(n));
  return m;
}

Operator embed(const Matrix& op, std::string_view label, const SpaceLayout& layout) {
  const int which = layout.index_of(label);
  if (op.rows() != layout[which].dim || op.cols() != layout[which].dim) {
    throw std::invalid_argument("embed: operator dimension " + std::to_string(op.rows()) +
                                " does not match subsystem '" + std::string(label) + "' of dimension " +
                                std::to_string(layout[which].dim));
  }
  int left = 1;
  for (int s = 0; s < which; ++s) left *= layout[s].dim;
  const int right = layout.dim() / (left * layout[which].dim);
  const int d = layout[which].dim;

  Matrix out = Matrix::Zero(layout.dim(), layout.dim());
  for (int l = 0; l < left; ++l) {
    for (int i = 0; i < d; ++i) {
      for (int j = 0; j < d; ++j) {
        const Complex v = op(i, j);
        if (v == Complex{}) continue;
        for (int r = 0; r < right; ++r) {
          out((l * d + i) * right + r, (l * d + j) * right + r) = v;
        }
      }
    }
  }
  return {layout, std::move(out)};
}

Operator embed(const Operator& op, const SpaceLayout& layout) {
  const SpaceLayout& sub = op.layout();
  if (sub == layout) return op;
  std::vector<int> position(sub.size());
  for (int s = 0; s < sub.size(); ++s) {
    position[s] = layout.index_of(sub[s].label);
    if (layout[position[s]].dim != sub[s].dim) {
      throw std::invalid_argument("embed: subsystem '" + sub[s].label + "' dimension mismatch");
    }
  }
  std::vector<bool> in_sub(layout.size(), false);
  for (int p : position) in_sub[p] = true;

  const int full = layout.dim();
  std::vector<int> sub_index(full);
  std::vector<long long> spectator_key(full);
  for (int i = 0; i < full; ++i) {
    const auto d = digits(i, layout);
    int si = 0;
    for (int s = 0; s < sub.size(); ++s) si = si * sub[s].dim + d[position[s]];
    sub_index[i] = si;
    long long key = 0;
    for (int s = 0; s < layout.size(); ++s) {
      if (!in_sub[s]) key = key * layout[s].dim + d[s];
    }
    spectator_key[i] = key;
  }

  Matrix out = Matrix::Zero(full, full);
  const Matrix& m = op.matrix();
  for (int i = 0; i < full; ++i) {
    for (int j = 0; j < full; ++j) {
      if (spectator_key[i] == spectator_key[j]) out(i, j) = m(sub_index[i], sub_index[j]);
    }
  }
  return {layout, std::move(out)};
}

Matrix dissipator(const Matrix& c, const Matrix& rho) {
  require_same_shape(c, rho, "dissipator");
  const Matrix cdc = c.adjoint() * c;
  return c * rho * c.adjoint() - 0.5 * (cdc * rho + rho * cdc);
}

Matrix coupling_super(const Matrix& c1, const Matrix& c2, const Matrix& rho) {
  require_same_shape(c1, rho, "coupling_super");
  require_same_shape(c2, rho, "coupling_super");
  const Matrix c1rho = c1 * rho;
  const Matrix rhoc1d = rho * c1.adjoint();
  return c1rho * c2.adjoint() - c2.adjoint() * c1rho + c2 * rhoc1d - rhoc1d * c2;
}

Matrix measurement_super(const Matrix& c, double phase, const Matrix& rho) {
  require_same_shape(c, rho, "measurement_super");
  const Complex w = std::polar(1.0, phase);
  const Matrix x = w * c * rho;
  const Matrix y = x + x.adjoint();
  return y - y.trace() * rho;
}

Complex expectation(const Matrix& a, const Matrix& rho) {
  require_same_shape(a, rho, "expectation");
  return (a.transpose().array() * rho.array()).sum();
}

Matrix dissipator(const Operator& c, const DensityMatrix& rho) { return dissipator(c.matrix(), rho.matrix()); }

Matrix coupling_super(const Operator& c1, const Operator& c2, const DensityMatrix& rho) {
  return coupling_super(c1.matrix(), c2.matrix(), rho.matrix());
}

Matrix measurement_super(const Operator& c, double phase, const DensityMatrix& rho) {
  return measurement_super(c.matrix(), phase, rho.matrix());
}

Complex expectation(const Operator& a, const DensityMatrix& rho) { return expectation(a.matrix(), rho.matrix()); }

double trace_distance(const Matrix& a, const Matrix& b) {
  Matrix diff = a - b;
  symmetrize(diff);
  Eigen::SelfAdjointEigenSolver<Matrix> solver(diff, Eigen::EigenvaluesOnly);
  return 0.5 * solver.eigenvalues().cwiseAbs().sum();
}

void symmetrize(Matrix& rho) {
  Matrix tmp = 0.5 * (rho + rho.adjoint());
  rho.swap(tmp);
}

}  // namespace photodet
