#pragma once

// Dense complex tensors with a row index group (I_1..I_M) and a column index
// group (J_1..J_N). Entries are stored in the unfolded order: row-major
// lexicographic over the row multi-index, then the column multi-index, so
// entry (i_1..i_M; j_1..j_N) sits at row(i) * col_size + col(j).

#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace hwt {

using Complex = std::complex<double>;
using Dims = std::vector<std::size_t>;

/// Default relative tolerance for structural predicates (Hermitian, unitary).
inline constexpr double kStructuralTol = 1e-10;

class TensorShape {
 public:
  TensorShape(Dims row_dims, Dims col_dims);

  /// Square shape with identical row and column groups.
  static TensorShape square(Dims dims) { return TensorShape(dims, dims); }

  const Dims& row_dims() const noexcept { return row_dims_; }
  const Dims& col_dims() const noexcept { return col_dims_; }
  std::size_t row_order() const noexcept { return row_dims_.size(); }
  std::size_t col_order() const noexcept { return col_dims_.size(); }
  std::size_t row_size() const noexcept { return row_size_; }
  std::size_t col_size() const noexcept { return col_size_; }
  std::size_t size() const noexcept { return row_size_ * col_size_; }
  bool is_square() const noexcept { return row_dims_ == col_dims_; }

  TensorShape transposed() const { return TensorShape(col_dims_, row_dims_); }

  /// Linear position of a row (or column) multi-index in the bijection.
  std::size_t row_offset(std::span<const std::size_t> index) const;
  std::size_t col_offset(std::span<const std::size_t> index) const;

  std::string to_string() const;

  friend bool operator==(const TensorShape&, const TensorShape&) = default;

 private:
  Dims row_dims_;
  Dims col_dims_;
  std::size_t row_size_ = 1;
  std::size_t col_size_ = 1;
};

/// Matrix view of a tensor under the fixed bijection. Row-major storage.
struct UnfoldedMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<Complex> entries;

  Complex operator()(std::size_t r, std::size_t c) const { return entries[r * cols + c]; }
  Complex& operator()(std::size_t r, std::size_t c) { return entries[r * cols + c]; }
};

class DenseTensor {
 public:
  /// Zero tensor of the given shape.
  explicit DenseTensor(TensorShape shape);

  /// Takes ownership of entries laid out in bijection order. Rejects a
  /// length mismatch and non-finite values.
  DenseTensor(TensorShape shape, std::vector<Complex> entries);

  const TensorShape& shape() const noexcept { return shape_; }
  std::span<const Complex> entries() const noexcept { return entries_; }

  /// Entry at unfolded position (row, col).
  Complex operator()(std::size_t row, std::size_t col) const {
    return entries_[row * shape_.col_size() + col];
  }

  /// Entry at a full multi-index.
  Complex at(std::span<const std::size_t> row_index, std::span<const std::size_t> col_index) const;

  /// Largest absolute entry; 0 for the zero tensor.
  double max_abs() const noexcept;

  friend bool operator==(const DenseTensor&, const DenseTensor&) = default;

 private:
  struct Unchecked {};
  DenseTensor(TensorShape shape, std::vector<Complex> entries, Unchecked);

  TensorShape shape_;
  std::vector<Complex> entries_;

  friend DenseTensor make_unchecked(TensorShape shape, std::vector<Complex> entries);
};

/// Internal constructor used by kernels whose output is finite by construction.
DenseTensor make_unchecked(TensorShape shape, std::vector<Complex> entries);

DenseTensor add(const DenseTensor& a, const DenseTensor& b);
DenseTensor subtract(const DenseTensor& a, const DenseTensor& b);
DenseTensor scale(Complex factor, const DenseTensor& a);

inline DenseTensor operator+(const DenseTensor& a, const DenseTensor& b) { return add(a, b); }
inline DenseTensor operator-(const DenseTensor& a, const DenseTensor& b) { return subtract(a, b); }
inline DenseTensor operator*(Complex factor, const DenseTensor& a) { return scale(factor, a); }
inline DenseTensor operator*(double factor, const DenseTensor& a) { return scale(Complex(factor), a); }

/// Contraction of a's column group against b's row group. Requires
/// a.col_dims == b.row_dims; the result has shape (a.row_dims, b.col_dims).
DenseTensor einstein_product(const DenseTensor& a, const DenseTensor& b);

/// Identity tensor over dims x dims: entry = prod_k delta(i_k, j_k).
DenseTensor identity(const Dims& dims);

DenseTensor zeros(const TensorShape& shape);

/// Swaps the index groups and conjugates every entry.
DenseTensor conjugate_transpose(const DenseTensor& a);

/// Sum of diagonal entries of a square tensor.
Complex trace(const DenseTensor& a);

/// <a, b> = Tr(a^H * b).
Complex inner_product(const DenseTensor& a, const DenseTensor& b);

double frobenius_norm(const DenseTensor& a);

UnfoldedMatrix unfold(const DenseTensor& a);
DenseTensor fold(const UnfoldedMatrix& m, const TensorShape& shape);

/// max |a - a^H| <= tol * (1 + max|a|). Non-square tensors are never Hermitian.
bool is_hermitian(const DenseTensor& a, double tol = kStructuralTol);

/// Largest entry of |a - a^H|; the asymmetry measure reported on rejection.
double hermitian_residual(const DenseTensor& a);

/// Both U^H * U and U * U^H within tol of the identity in max-abs.
bool is_unitary(const DenseTensor& u, double tol = kStructuralTol);

/// Throws SingularError (with a condition estimate) for singular unfoldings.
DenseTensor inverse(const DenseTensor& a);

/// a^j under the Einstein product; j = 0 yields the identity.
DenseTensor tensor_power(const DenseTensor& a, unsigned j);

/// max |a - b| over all entries; shapes must match.
double max_abs_diff(const DenseTensor& a, const DenseTensor& b);

/// Commutator a*b - b*a for square tensors of one shape.
DenseTensor commutator(const DenseTensor& a, const DenseTensor& b);

}  // namespace hwt
