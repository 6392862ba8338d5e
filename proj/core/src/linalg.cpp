#include "gpebo/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <utility>

namespace gpebo {

namespace {

void require_square(const Matrix& m, const char* what) {
  if (!m.is_square()) {
    throw DimensionError(std::string(what) + ": matrix must be square, got " +
                         std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
  }
}

void require_finite(const Matrix& m, const char* what) {
  if (!m.all_finite()) {
    throw NonFiniteError(std::string(what) + ": matrix has non-finite entries");
  }
}

void require_same_shape(const Matrix& a, const Matrix& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError(std::string(what) + ": shape mismatch " + std::to_string(a.rows()) + "x" +
                         std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                         std::to_string(b.cols()));
  }
}

void require_same_length(std::span<const double> a, std::span<const double> b, const char* what) {
  if (a.size() != b.size()) {
    throw DimensionError(std::string(what) + ": length mismatch " + std::to_string(a.size()) +
                         " vs " + std::to_string(b.size()));
  }
}

// In-place LU with partial pivoting. Returns false when a pivot is below
// `pivot_floor`; `sign` receives the permutation parity.
bool lu_factor(Matrix& a, std::vector<std::size_t>& perm, int& sign, double pivot_floor) {
  const std::size_t n = a.rows();
  perm.resize(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  sign = 1;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    double best = std::abs(a(k, k));
    for (std::size_t i = k + 1; i < n; ++i) {
      if (std::abs(a(i, k)) > best) {
        best = std::abs(a(i, k));
        piv = i;
      }
    }
    if (best <= pivot_floor) {
      return false;
    }
    if (piv != k) {
      for (std::size_t j = 0; j < n; ++j) {
        std::swap(a(k, j), a(piv, j));
      }
      std::swap(perm[k], perm[piv]);
      sign = -sign;
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      const double factor = a(i, k) / a(k, k);
      a(i, k) = factor;
      for (std::size_t j = k + 1; j < n; ++j) {
        a(i, j) -= factor * a(k, j);
      }
    }
  }
  return true;
}

}  // namespace

// ---------------------------------------------------------------------------
// Matrix

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> row_major)
    : rows_(rows), cols_(cols), data_(std::move(row_major)) {
  if (data_.size() != rows_ * cols_) {
    throw DimensionError("Matrix: entry count " + std::to_string(data_.size()) + " does not match " +
                         std::to_string(rows_) + "x" + std::to_string(cols_));
  }
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows)
    : rows_(rows.size()), cols_(rows.size() == 0 ? 0 : rows.begin()->size()) {
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) {
      throw DimensionError("Matrix: ragged initializer list");
    }
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    m(i, i) = 1.0;
  }
  return m;
}

Matrix Matrix::column(std::span<const double> v) {
  return Matrix(v.size(), 1, std::vector<double>(v.begin(), v.end()));
}

Matrix Matrix::diagonal(std::span<const double> v) {
  Matrix m(v.size(), v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    m(i, i) = v[i];
  }
  return m;
}

Vector Matrix::row(std::size_t i) const {
  return Vector(data_.begin() + static_cast<std::ptrdiff_t>(i * cols_),
                data_.begin() + static_cast<std::ptrdiff_t>((i + 1) * cols_));
}

Vector Matrix::col(std::size_t j) const {
  Vector out(rows_);
  for (std::size_t i = 0; i < rows_; ++i) {
    out[i] = (*this)(i, j);
  }
  return out;
}

Matrix Matrix::transpose() const {
  Matrix t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i) {
    for (std::size_t j = 0; j < cols_; ++j) {
      t(j, i) = (*this)(i, j);
    }
  }
  return t;
}

double Matrix::max_abs() const noexcept { return gpebo::max_abs(data_); }

double Matrix::trace() const {
  require_square(*this, "trace");
  double s = 0.0;
  for (std::size_t i = 0; i < rows_; ++i) {
    s += (*this)(i, i);
  }
  return s;
}

bool Matrix::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

Matrix& Matrix::operator+=(const Matrix& o) {
  require_same_shape(*this, o, "operator+");
  for (std::size_t k = 0; k < data_.size(); ++k) {
    data_[k] += o.data_[k];
  }
  return *this;
}

Matrix& Matrix::operator-=(const Matrix& o) {
  require_same_shape(*this, o, "operator-");
  for (std::size_t k = 0; k < data_.size(); ++k) {
    data_[k] -= o.data_[k];
  }
  return *this;
}

Matrix& Matrix::operator*=(double s) noexcept {
  for (double& v : data_) {
    v *= s;
  }
  return *this;
}

Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
Matrix operator*(Matrix a, double s) { return a *= s; }
Matrix operator*(double s, Matrix a) { return a *= s; }

Matrix operator*(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw DimensionError("operator*: inner dimensions " + std::to_string(a.cols()) + " and " +
                         std::to_string(b.rows()) + " differ");
  }
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) {
        continue;
      }
      for (std::size_t j = 0; j < b.cols(); ++j) {
        c(i, j) += aik * b(k, j);
      }
    }
  }
  return c;
}

Vector operator*(const Matrix& a, std::span<const double> x) {
  if (a.cols() != x.size()) {
    throw DimensionError("matrix-vector: " + std::to_string(a.cols()) + " columns vs vector of " +
                         std::to_string(x.size()));
  }
  Vector y(a.rows(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < a.cols(); ++j) {
      s += a(i, j) * x[j];
    }
    y[i] = s;
  }
  return y;
}

// ---------------------------------------------------------------------------
// Vector helpers

Vector add(std::span<const double> a, std::span<const double> b) {
  require_same_length(a, b, "add");
  Vector out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    out[i] = a[i] + b[i];
  }
  return out;
}

Vector sub(std::span<const double> a, std::span<const double> b) {
  require_same_length(a, b, "sub");
  Vector out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    out[i] = a[i] - b[i];
  }
  return out;
}

Vector scale(std::span<const double> a, double s) {
  Vector out(a.begin(), a.end());
  for (double& v : out) {
    v *= s;
  }
  return out;
}

double dot(std::span<const double> a, std::span<const double> b) {
  require_same_length(a, b, "dot");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    s += a[i] * b[i];
  }
  return s;
}

double norm2(std::span<const double> a) {
  double s = 0.0;
  for (double v : a) {
    s += v * v;
  }
  return std::sqrt(s);
}

double max_abs(std::span<const double> a) {
  double m = 0.0;
  for (double v : a) {
    m = std::max(m, std::abs(v));
  }
  return m;
}

Vector concat(std::initializer_list<std::span<const double>> parts) {
  Vector out;
  for (auto p : parts) {
    out.insert(out.end(), p.begin(), p.end());
  }
  return out;
}

Vector vec_mat(std::span<const double> v, const Matrix& m) {
  if (v.size() != m.rows()) {
    throw DimensionError("vec_mat: vector of " + std::to_string(v.size()) + " vs " +
                         std::to_string(m.rows()) + " rows");
  }
  Vector out(m.cols(), 0.0);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
      out[j] += v[i] * m(i, j);
    }
  }
  return out;
}

Vector unit_vector(std::size_t n, std::size_t index) {
  Vector e(n, 0.0);
  e.at(index) = 1.0;
  return e;
}

// ---------------------------------------------------------------------------
// Characteristic polynomial, determinant, adjugate

double CharPoly::evaluate(double x) const noexcept {
  double acc = 1.0;
  for (double g : gamma) {
    acc = acc * x + g;
  }
  return acc;
}

DetAdjugate det_adjugate(const Matrix& m) {
  require_square(m, "det_adjugate");
  require_finite(m, "det_adjugate");
  const std::size_t n = m.rows();
  DetAdjugate out;
  out.char_poly.gamma.assign(n, 0.0);
  if (n == 0) {
    out.determinant = 1.0;
    return out;
  }

  // B_1 = I, γ_k = −tr(M B_k)/k, B_{k+1} = M B_k + γ_k I.
  // After n steps, adj(M) = (−1)^{n−1} B_n and det(M) = (−1)^n γ_n.
  Matrix b = Matrix::identity(n);
  for (std::size_t k = 1; k <= n; ++k) {
    if (k > 1) {
      b = m * b;
      const double g = out.char_poly.gamma[k - 2];
      for (std::size_t i = 0; i < n; ++i) {
        b(i, i) += g;
      }
    }
    // tr(M B_k) without forming the product.
    double tr = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        tr += m(i, j) * b(j, i);
      }
    }
    out.char_poly.gamma[k - 1] = -tr / static_cast<double>(k);
  }
  const double sign = (n % 2 == 0) ? 1.0 : -1.0;
  out.determinant = sign * out.char_poly.gamma[n - 1];
  out.adjugate = std::move(b);
  if (n % 2 == 0) {
    out.adjugate *= -1.0;
  }
  return out;
}

CharPoly char_poly(const Matrix& m) { return det_adjugate(m).char_poly; }

double lu_determinant(const Matrix& m) {
  require_square(m, "lu_determinant");
  require_finite(m, "lu_determinant");
  Matrix a = m;
  std::vector<std::size_t> perm;
  int sign = 1;
  if (!lu_factor(a, perm, sign, 0.0)) {
    return 0.0;
  }
  double det = sign;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    det *= a(i, i);
  }
  return det;
}

Vector solve_linear(const Matrix& a, std::span<const double> b, double rel_pivot_tol) {
  require_square(a, "solve_linear");
  require_finite(a, "solve_linear");
  if (b.size() != a.rows()) {
    throw DimensionError("solve_linear: rhs length " + std::to_string(b.size()) + " vs " +
                         std::to_string(a.rows()));
  }
  Matrix lu = a;
  std::vector<std::size_t> perm;
  int sign = 1;
  const double floor = rel_pivot_tol * std::max(a.max_abs(), 1e-300);
  if (!lu_factor(lu, perm, sign, floor)) {
    throw std::runtime_error("solve_linear: matrix is numerically singular");
  }
  const std::size_t n = a.rows();
  Vector x(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = b[perm[i]];
    for (std::size_t j = 0; j < i; ++j) {
      s -= lu(i, j) * x[j];
    }
    x[i] = s;
  }
  for (std::size_t ii = n; ii-- > 0;) {
    double s = x[ii];
    for (std::size_t j = ii + 1; j < n; ++j) {
      s -= lu(ii, j) * x[j];
    }
    x[ii] = s / lu(ii, ii);
  }
  return x;
}

// ---------------------------------------------------------------------------
// Sylvester

Matrix solve_sylvester(const Matrix& a, const Matrix& s, const Matrix& c) {
  require_square(a, "solve_sylvester(A)");
  require_square(s, "solve_sylvester(S)");
  require_finite(a, "solve_sylvester(A)");
  require_finite(s, "solve_sylvester(S)");
  require_finite(c, "solve_sylvester(C)");
  const std::size_t n = a.rows();
  const std::size_t m = s.rows();
  if (c.rows() != n || c.cols() != m) {
    throw DimensionError("solve_sylvester: C must be " + std::to_string(n) + "x" + std::to_string(m));
  }
  // Unknown Π_{ij} sits at index i*m + j; equation (i,j) is
  // Σ_k Π_{ik} S_{kj} − Σ_k A_{ik} Π_{kj} = C_{ij}.
  const std::size_t nm = n * m;
  Matrix kron(nm, nm);
  Vector rhs(nm);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      const std::size_t row = i * m + j;
      for (std::size_t k = 0; k < m; ++k) {
        kron(row, i * m + k) += s(k, j);
      }
      for (std::size_t k = 0; k < n; ++k) {
        kron(row, k * m + j) -= a(i, k);
      }
      rhs[row] = c(i, j);
    }
  }
  Vector vec;
  try {
    vec = solve_linear(kron, rhs, 1e-12);
  } catch (const std::runtime_error&) {
    throw SpectraNotDisjointError("solve_sylvester: spectra not disjoint (singular Kronecker system)");
  }
  Matrix pi(n, m, std::move(vec));
  const double residual = (pi * s - a * pi - c).max_abs();
  if (!(residual < 1e-10 * (1.0 + c.max_abs()))) {
    throw SpectraNotDisjointError("solve_sylvester: spectra not disjoint (residual " +
                                  std::to_string(residual) + " after solve)");
  }
  return pi;
}

// ---------------------------------------------------------------------------
// Stability

bool is_hurwitz(const CharPoly& p) {
  const std::size_t n = p.degree();
  for (double g : p.gamma) {
    if (!std::isfinite(g)) {
      throw NonFiniteError("is_hurwitz: non-finite coefficient");
    }
  }
  if (n == 0) {
    return true;
  }
  // Stodola: a Hurwitz polynomial has strictly positive coefficients.
  for (double g : p.gamma) {
    if (g <= 0.0) {
      return false;
    }
  }
  double scale = 1.0;
  for (double g : p.gamma) {
    scale = std::max(scale, std::abs(g));
  }
  const double pivot_tol = 1e-12 * scale;

  // Full coefficient list a_0 = 1, a_i = γ_i.
  Vector a(n + 1);
  a[0] = 1.0;
  std::copy(p.gamma.begin(), p.gamma.end(), a.begin() + 1);

  const std::size_t width = n / 2 + 1;
  Vector prev(width, 0.0);
  Vector cur(width, 0.0);
  for (std::size_t j = 0; 2 * j <= n; ++j) {
    prev[j] = a[2 * j];
  }
  for (std::size_t j = 0; 2 * j + 1 <= n; ++j) {
    cur[j] = a[2 * j + 1];
  }
  for (std::size_t row = 1; row <= n; ++row) {
    const double pivot = cur[0];
    if (std::abs(pivot) <= pivot_tol) {
      throw InconclusiveError("is_hurwitz: degenerate Routh pivot at row " + std::to_string(row));
    }
    if (pivot < 0.0) {
      return false;
    }
    if (row == n) {
      break;
    }
    Vector next(width, 0.0);
    for (std::size_t j = 0; j + 1 < width; ++j) {
      next[j] = (pivot * prev[j + 1] - prev[0] * cur[j + 1]) / pivot;
    }
    prev = std::move(cur);
    cur = std::move(next);
  }
  return true;
}

bool is_hurwitz(const Matrix& m) {
  require_square(m, "is_hurwitz");
  return is_hurwitz(char_poly(m));
}

double spectral_abscissa(const Matrix& m, double tol) {
  require_square(m, "spectral_abscissa");
  require_finite(m, "spectral_abscissa");
  const std::size_t n = m.rows();
  double radius = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      s += std::abs(m(i, j));
    }
    radius = std::max(radius, s);
  }
  // Every eigenvalue satisfies |λ| ≤ radius, so Re λ < hi and the shift by lo
  // leaves at least one root in the closed right half-plane.
  double lo = -radius - 1.0;
  double hi = radius + 1.0;
  const auto shifted = [&](double sigma) {
    Matrix t = m;
    for (std::size_t i = 0; i < n; ++i) {
      t(i, i) -= sigma;
    }
    return t;
  };
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    try {
      if (is_hurwitz(shifted(mid))) {
        hi = mid;
      } else {
        lo = mid;
      }
    } catch (const InconclusiveError&) {
      return mid;
    }
  }
  return 0.5 * (lo + hi);
}

// ---------------------------------------------------------------------------
// Companion builders

Matrix companion_first_col(std::span<const double> k, std::size_t n) {
  if (k.size() != n || n == 0) {
    throw DimensionError("companion_first_col: K has length " + std::to_string(k.size()) +
                         ", expected " + std::to_string(n));
  }
  Matrix a(n, n);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    a(i, i + 1) = 1.0;
  }
  for (std::size_t i = 0; i < n; ++i) {
    a(i, 0) -= k[i];
  }
  return a;
}

Matrix companion_last_row(std::span<const double> f, std::size_t m) {
  if (f.size() != m || m == 0) {
    throw DimensionError("companion_last_row: vector has length " + std::to_string(f.size()) +
                         ", expected " + std::to_string(m));
  }
  Matrix a(m, m);
  for (std::size_t i = 0; i + 1 < m; ++i) {
    a(i, i + 1) = 1.0;
  }
  for (std::size_t j = 0; j < m; ++j) {
    a(m - 1, j) = f[j];
  }
  return a;
}

Vector gamma_from_charpoly(const CharPoly& p) {
  const std::size_t n = p.degree();
  Vector g(n);
  for (std::size_t i = 0; i < n; ++i) {
    g[i] = -p.gamma[n - 1 - i];
  }
  return g;
}

// ---------------------------------------------------------------------------
// Symmetric positivity

bool is_positive_definite(const Matrix& m) {
  require_square(m, "is_positive_definite");
  const std::size_t n = m.rows();
  Matrix l(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    double d = m(j, j);
    for (std::size_t k = 0; k < j; ++k) {
      d -= l(j, k) * l(j, k);
    }
    if (!(d > 0.0)) {
      return false;
    }
    l(j, j) = std::sqrt(d);
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = m(i, j);
      for (std::size_t k = 0; k < j; ++k) {
        s -= l(i, k) * l(j, k);
      }
      l(i, j) = s / l(j, j);
    }
  }
  return true;
}

double gershgorin_lower_bound(const Matrix& m) {
  require_square(m, "gershgorin_lower_bound");
  double bound = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    double off = 0.0;
    for (std::size_t j = 0; j < m.cols(); ++j) {
      if (j != i) {
        off += std::abs(m(i, j));
      }
    }
    bound = std::min(bound, m(i, i) - off);
  }
  return m.rows() == 0 ? 0.0 : bound;
}

double min_eigenvalue_symmetric(const Matrix& m, double tol) {
  require_square(m, "min_eigenvalue_symmetric");
  require_finite(m, "min_eigenvalue_symmetric");
  const std::size_t n = m.rows();
  if (n == 0) {
    return 0.0;
  }
  double lo = gershgorin_lower_bound(m);
  double hi = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    hi = std::max(hi, m(i, i));
  }
  lo -= 1e-300;
  const double abs_tol = tol * std::max(1.0, m.max_abs());
  Matrix shifted = m;
  while (hi - lo > abs_tol) {
    const double mid = 0.5 * (lo + hi);
    for (std::size_t i = 0; i < n; ++i) {
      shifted(i, i) = m(i, i) - mid;
    }
    if (is_positive_definite(shifted)) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return lo;
}

}  // namespace gpebo
