#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace gpebo {

using Vector = std::vector<double>;

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class NonFiniteError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Thrown by solve_sylvester when the Kronecker system is singular, i.e. the
/// two spectra share an eigenvalue (or come numerically too close).
class SpectraNotDisjointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Thrown by is_hurwitz when a Routh pivot is too close to zero to decide.
class InconclusiveError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Dense row-major matrix of doubles. Sizes in this project stay below ~100.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> row_major);
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix identity(std::size_t n);
  static Matrix zeros(std::size_t rows, std::size_t cols) { return {rows, cols}; }
  static Matrix column(std::span<const double> v);
  static Matrix diagonal(std::span<const double> v);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool is_square() const noexcept { return rows_ == cols_; }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }

  Vector row(std::size_t i) const;
  Vector col(std::size_t j) const;

  Matrix transpose() const;
  double max_abs() const noexcept;
  double trace() const;
  bool all_finite() const noexcept;

  Matrix& operator+=(const Matrix& o);
  Matrix& operator-=(const Matrix& o);
  Matrix& operator*=(double s) noexcept;

  bool operator==(const Matrix& o) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Matrix operator+(Matrix a, const Matrix& b);
Matrix operator-(Matrix a, const Matrix& b);
Matrix operator*(const Matrix& a, const Matrix& b);
Matrix operator*(Matrix a, double s);
Matrix operator*(double s, Matrix a);
Vector operator*(const Matrix& a, std::span<const double> x);

// Small vector helpers. Vectors are plain std::vector<double>.
Vector add(std::span<const double> a, std::span<const double> b);
Vector sub(std::span<const double> a, std::span<const double> b);
Vector scale(std::span<const double> a, double s);
double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);
double max_abs(std::span<const double> a);
Vector concat(std::initializer_list<std::span<const double>> parts);
/// Row-vector times matrix: returns vᵀ·M as a vector of length M.cols().
Vector vec_mat(std::span<const double> v, const Matrix& m);
Vector unit_vector(std::size_t n, std::size_t index);

/// Monic characteristic polynomial λⁿ + γ₁λⁿ⁻¹ + … + γₙ, stored as (γ₁..γₙ).
struct CharPoly {
  Vector gamma;

  std::size_t degree() const noexcept { return gamma.size(); }
  /// Horner evaluation of the monic polynomial at x.
  double evaluate(double x) const noexcept;
  bool operator==(const CharPoly&) const = default;
};

struct DetAdjugate {
  double determinant = 0.0;
  Matrix adjugate;
  CharPoly char_poly;
};

/// Faddeev–LeVerrier pass: determinant, adjugate and characteristic polynomial
/// together. Well defined for singular input.
DetAdjugate det_adjugate(const Matrix& m);

CharPoly char_poly(const Matrix& m);

/// Determinant by LU with partial pivoting. Independent of det_adjugate.
double lu_determinant(const Matrix& m);

/// Solves A x = b (A square) by LU with partial pivoting. Throws
/// std::runtime_error when a pivot falls below rel_pivot_tol·max|A|.
Vector solve_linear(const Matrix& a, std::span<const double> b, double rel_pivot_tol = 1e-12);

/// Solves Π S = A Π + C for Π (n×m) by Kronecker vectorization.
Matrix solve_sylvester(const Matrix& a, const Matrix& s, const Matrix& c);

/// Routh–Hurwitz test on the characteristic polynomial of m.
bool is_hurwitz(const Matrix& m);
bool is_hurwitz(const CharPoly& p);

/// Largest real part of the eigenvalues of m, located by bisecting on the
/// shift σ with the Routh test on char_poly(m − σI). Accurate to `tol`.
double spectral_abscissa(const Matrix& m, double tol = 1e-9);

/// A_K = A − K e₁ᵀ with A the n×n upper-shift matrix.
Matrix companion_first_col(std::span<const double> k, std::size_t n);
/// Identity superdiagonal block with last row fᵀ.
Matrix companion_last_row(std::span<const double> f, std::size_t m);
/// Γ with Γᵢ = −γ_{n−i+1}, so companion_last_row(Γ) reproduces the spectrum.
Vector gamma_from_charpoly(const CharPoly& p);

/// Lower bound on the smallest eigenvalue of a symmetric matrix: bisection
/// on μ with an LDLᵀ positivity test of M − μI.
double min_eigenvalue_symmetric(const Matrix& m, double tol = 1e-12);
/// Gershgorin lower bound min_i (m_ii − Σ_{j≠i} |m_ij|).
double gershgorin_lower_bound(const Matrix& m);

/// True iff the symmetric matrix m is positive definite (Cholesky succeeds).
bool is_positive_definite(const Matrix& m);

}  // namespace gpebo
