#pragma once

#include <array>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <utility>
#include <vector>

namespace ehrlab {

inline constexpr std::size_t kMaxDim = 64;

// PSD tolerance: a matrix counts as PSD when its smallest eigenvalue is at
// least -kPsdTol * max(1, ||M||).
inline constexpr double kPsdTol = 1e-10;

// Dense symmetric matrix, dimension 1..64. Symmetry is enforced on
// construction and by set().
class SymMatrix {
 public:
  SymMatrix() = default;
  explicit SymMatrix(std::size_t dim);

  static SymMatrix identity(std::size_t dim);
  static SymMatrix diagonal(std::span<const double> d);
  static SymMatrix outer(std::span<const double> u);
  // Rows must be square and symmetric to 1e-12 relative; the stored matrix
  // is the exact average of the input and its transpose.
  static SymMatrix from_rows(const std::vector<std::vector<double>>& rows);
  static SymMatrix from_rows(std::initializer_list<std::initializer_list<double>> rows);

  std::size_t dim() const noexcept { return n_; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return a_[i * n_ + j]; }
  void set(std::size_t i, std::size_t j, double v) noexcept {
    a_[i * n_ + j] = v;
    a_[j * n_ + i] = v;
  }

  SymMatrix operator+(const SymMatrix& o) const;
  SymMatrix operator-(const SymMatrix& o) const;
  SymMatrix operator*(double s) const;
  friend SymMatrix operator*(double s, const SymMatrix& m) { return m * s; }

  double quad_form(std::span<const double> v) const;
  std::vector<double> apply(std::span<const double> v) const;
  double max_abs() const noexcept;
  // Frobenius norm, a cheap upper bound for the operator norm.
  double frobenius() const noexcept;

 private:
  std::size_t n_ = 0;
  std::vector<double> a_;
};

struct PsdVerdict {
  double min_eigenvalue = 0.0;
  std::vector<double> witness_vector;  // unit vector; witness' M witness == min_eigenvalue
  bool is_psd = false;
  double norm = 0.0;  // operator norm of M
};

struct EigenSystem {
  std::vector<double> values;                // ascending
  std::vector<std::vector<double>> vectors;  // vectors[k] belongs to values[k]
};

SymMatrix hadamard(const SymMatrix& a, const SymMatrix& b);

// Replaces entry (i,j) by a d_i x d_j block filled with M(i,j).
SymMatrix block_expand(const SymMatrix& m, std::span<const int> dims);

PsdVerdict min_eig(const SymMatrix& m);
double op_norm(const SymMatrix& m);

// Cyclic Jacobi eigendecomposition.
EigenSystem eigen_decompose(const SymMatrix& m);

// delta^2 / (||B||^2 + delta ||B||); +inf when ||B|| == 0.
double perturbation_bound(double delta, double norm_b);

// Largest eps such that A + e B is PSD for all e in [0, eps], under the
// hypotheses: A PSD, u'Bu >= delta |u|^2 on ker A, v'Av >= delta |v|^2 on
// (ker A)^perp. Throws PreconditionError with a violating vector otherwise.
double psd_perturbation_bound(const SymMatrix& a, const SymMatrix& b, double delta);

// For a PSD 3x3 matrix of rank at most 2: vectors a, b with A = aa' + bb'.
std::pair<std::vector<double>, std::vector<double>> rank2_factor(const SymMatrix& a);

// Compact 3x3 symmetric matrix for inner loops.
struct Sym3 {
  double a00 = 0, a01 = 0, a02 = 0, a11 = 0, a12 = 0, a22 = 0;
};

struct MinEig3 {
  double value = 0.0;
  std::array<double, 3> vector{1.0, 0.0, 0.0};
  double norm = 0.0;
};

// Smallest eigenvalue of a 3x3 symmetric matrix: trigonometric closed form,
// then a Rayleigh-quotient polish on an eigenvector built from cross
// products. Falls back to Jacobi when the polish is inconsistent.
MinEig3 min_eig3(const Sym3& m) noexcept;

Sym3 to_sym3(const SymMatrix& m);
SymMatrix from_sym3(const Sym3& m);

}  // namespace ehrlab
