#include "hwt/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "eigen_bridge.hpp"
#include "hwt/error.hpp"

namespace hwt {

namespace {

std::size_t checked_product(const Dims& dims) {
  std::size_t p = 1;
  for (auto d : dims) {
    if (d == 0) throw ShapeError("tensor dimensions must be >= 1");
    if (p > std::numeric_limits<std::size_t>::max() / d) throw ShapeError("tensor size overflows");
    p *= d;
  }
  return p;
}

std::size_t offset_in(const Dims& dims, std::span<const std::size_t> index) {
  if (index.size() != dims.size()) throw ShapeError("multi-index has wrong order");
  std::size_t off = 0;
  for (std::size_t k = 0; k < dims.size(); ++k) {
    if (index[k] >= dims[k]) throw ShapeError("multi-index out of range");
    off = off * dims[k] + index[k];
  }
  return off;
}

void require_same_shape(const DenseTensor& a, const DenseTensor& b, const char* op) {
  if (a.shape() != b.shape())
    throw ShapeError(std::string(op) + ": shape mismatch " + a.shape().to_string() + " vs " +
                     b.shape().to_string());
}

void require_square(const DenseTensor& a, const char* op) {
  if (!a.shape().is_square())
    throw ShapeError(std::string(op) + ": tensor is not square: " + a.shape().to_string());
}

}  // namespace

TensorShape::TensorShape(Dims row_dims, Dims col_dims)
    : row_dims_(std::move(row_dims)), col_dims_(std::move(col_dims)) {
  if (row_dims_.empty() && col_dims_.empty())
    throw ShapeError("tensor shape needs at least one index");
  row_size_ = checked_product(row_dims_);
  col_size_ = checked_product(col_dims_);
  if (row_size_ > std::numeric_limits<std::size_t>::max() / col_size_)
    throw ShapeError("tensor size overflows");
}

std::size_t TensorShape::row_offset(std::span<const std::size_t> index) const {
  return offset_in(row_dims_, index);
}

std::size_t TensorShape::col_offset(std::span<const std::size_t> index) const {
  return offset_in(col_dims_, index);
}

std::string TensorShape::to_string() const {
  std::ostringstream os;
  os << '(';
  for (std::size_t k = 0; k < row_dims_.size(); ++k) os << (k ? "x" : "") << row_dims_[k];
  os << ")x(";
  for (std::size_t k = 0; k < col_dims_.size(); ++k) os << (k ? "x" : "") << col_dims_[k];
  os << ')';
  return os.str();
}

DenseTensor::DenseTensor(TensorShape shape)
    : shape_(std::move(shape)), entries_(shape_.size(), Complex(0.0, 0.0)) {}

DenseTensor::DenseTensor(TensorShape shape, std::vector<Complex> entries)
    : shape_(std::move(shape)), entries_(std::move(entries)) {
  if (entries_.size() != shape_.size())
    throw ShapeError("entry count " + std::to_string(entries_.size()) + " does not match shape " +
                     shape_.to_string());
  for (const auto& z : entries_)
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
      throw DomainError("tensor entries must be finite");
}

DenseTensor::DenseTensor(TensorShape shape, std::vector<Complex> entries, Unchecked)
    : shape_(std::move(shape)), entries_(std::move(entries)) {}

DenseTensor make_unchecked(TensorShape shape, std::vector<Complex> entries) {
  return DenseTensor(std::move(shape), std::move(entries), DenseTensor::Unchecked{});
}

Complex DenseTensor::at(std::span<const std::size_t> row_index,
                        std::span<const std::size_t> col_index) const {
  return (*this)(shape_.row_offset(row_index), shape_.col_offset(col_index));
}

double DenseTensor::max_abs() const noexcept {
  double m = 0.0;
  for (const auto& z : entries_) m = std::max(m, std::abs(z));
  return m;
}

DenseTensor add(const DenseTensor& a, const DenseTensor& b) {
  require_same_shape(a, b, "add");
  std::vector<Complex> out(a.entries().begin(), a.entries().end());
  const auto be = b.entries();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += be[i];
  return make_unchecked(a.shape(), std::move(out));
}

DenseTensor subtract(const DenseTensor& a, const DenseTensor& b) {
  require_same_shape(a, b, "subtract");
  std::vector<Complex> out(a.entries().begin(), a.entries().end());
  const auto be = b.entries();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= be[i];
  return make_unchecked(a.shape(), std::move(out));
}

DenseTensor scale(Complex factor, const DenseTensor& a) {
  std::vector<Complex> out(a.entries().begin(), a.entries().end());
  for (auto& z : out) z *= factor;
  return make_unchecked(a.shape(), std::move(out));
}

DenseTensor einstein_product(const DenseTensor& a, const DenseTensor& b) {
  if (a.shape().col_dims() != b.shape().row_dims())
    throw ShapeError("einstein_product: contraction mismatch " + a.shape().to_string() + " * " +
                     b.shape().to_string());
  const std::size_t rows = a.shape().row_size();
  const std::size_t inner = a.shape().col_size();
  const std::size_t cols = b.shape().col_size();
  std::vector<Complex> out(rows * cols, Complex(0.0, 0.0));
  const auto ae = a.entries();
  const auto be = b.entries();
  for (std::size_t r = 0; r < rows; ++r) {
    Complex* row = out.data() + r * cols;
    for (std::size_t k = 0; k < inner; ++k) {
      const Complex x = ae[r * inner + k];
      if (x == Complex(0.0, 0.0)) continue;
      const Complex* brow = be.data() + k * cols;
      for (std::size_t c = 0; c < cols; ++c) row[c] += x * brow[c];
    }
  }
  return make_unchecked(TensorShape(a.shape().row_dims(), b.shape().col_dims()), std::move(out));
}

DenseTensor identity(const Dims& dims) {
  TensorShape shape = TensorShape::square(dims);
  std::vector<Complex> out(shape.size(), Complex(0.0, 0.0));
  const std::size_t n = shape.row_size();
  for (std::size_t i = 0; i < n; ++i) out[i * n + i] = Complex(1.0, 0.0);
  return make_unchecked(std::move(shape), std::move(out));
}

DenseTensor zeros(const TensorShape& shape) { return DenseTensor(shape); }

DenseTensor conjugate_transpose(const DenseTensor& a) {
  const std::size_t rows = a.shape().row_size();
  const std::size_t cols = a.shape().col_size();
  std::vector<Complex> out(rows * cols);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) out[c * rows + r] = std::conj(a(r, c));
  return make_unchecked(a.shape().transposed(), std::move(out));
}

Complex trace(const DenseTensor& a) {
  require_square(a, "trace");
  Complex t(0.0, 0.0);
  const std::size_t n = a.shape().row_size();
  for (std::size_t i = 0; i < n; ++i) t += a(i, i);
  return t;
}

Complex inner_product(const DenseTensor& a, const DenseTensor& b) {
  require_same_shape(a, b, "inner_product");
  // Tr(a^H * b) collapses to the entrywise sum of conj(a) * b.
  Complex s(0.0, 0.0);
  const auto ae = a.entries();
  const auto be = b.entries();
  for (std::size_t i = 0; i < ae.size(); ++i) s += std::conj(ae[i]) * be[i];
  return s;
}

double frobenius_norm(const DenseTensor& a) {
  double s = 0.0;
  for (const auto& z : a.entries()) s += std::norm(z);
  return std::sqrt(s);
}

UnfoldedMatrix unfold(const DenseTensor& a) {
  UnfoldedMatrix m;
  m.rows = a.shape().row_size();
  m.cols = a.shape().col_size();
  m.entries.assign(a.entries().begin(), a.entries().end());
  return m;
}

DenseTensor fold(const UnfoldedMatrix& m, const TensorShape& shape) {
  if (m.rows != shape.row_size() || m.cols != shape.col_size() ||
      m.entries.size() != m.rows * m.cols)
    throw ShapeError("fold: " + std::to_string(m.rows) + "x" + std::to_string(m.cols) +
                     " matrix does not fit shape " + shape.to_string());
  return DenseTensor(shape, m.entries);
}

double hermitian_residual(const DenseTensor& a) {
  require_square(a, "hermitian_residual");
  const std::size_t n = a.shape().row_size();
  double worst = 0.0;
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = r; c < n; ++c) worst = std::max(worst, std::abs(a(r, c) - std::conj(a(c, r))));
  return worst;
}

bool is_hermitian(const DenseTensor& a, double tol) {
  if (!a.shape().is_square()) return false;
  return hermitian_residual(a) <= tol * (1.0 + a.max_abs());
}

bool is_unitary(const DenseTensor& u, double tol) {
  if (!u.shape().is_square()) return false;
  const auto uh = conjugate_transpose(u);
  const auto id = identity(u.shape().row_dims());
  return max_abs_diff(einstein_product(uh, u), id) <= tol &&
         max_abs_diff(einstein_product(u, uh), id) <= tol;
}

DenseTensor inverse(const DenseTensor& a) {
  require_square(a, "inverse");
  const Eigen::MatrixXcd m = detail::to_eigen(a);
  const Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m);
  const auto& sv = svd.singularValues();
  const double smax = sv(0);
  const double smin = sv(sv.size() - 1);
  const double cond = smin > 0.0 ? smax / smin : std::numeric_limits<double>::infinity();
  if (!(cond < 1e14))
    throw SingularError("inverse: unfolded matrix is singular (condition estimate " +
                            std::to_string(cond) + ")",
                        cond);
  const Eigen::MatrixXcd inv = m.partialPivLu().inverse();
  detail::MatrixXc out = inv;
  return detail::from_eigen(out, a.shape());
}

DenseTensor tensor_power(const DenseTensor& a, unsigned j) {
  require_square(a, "tensor_power");
  DenseTensor result = identity(a.shape().row_dims());
  if (j == 0) return result;
  DenseTensor base = a;
  bool first = true;
  // Square-and-multiply; the first factor is copied rather than multiplied by I.
  while (j > 0) {
    if (j & 1u) {
      result = first ? base : einstein_product(result, base);
      first = false;
    }
    j >>= 1u;
    if (j > 0) base = einstein_product(base, base);
  }
  return result;
}

double max_abs_diff(const DenseTensor& a, const DenseTensor& b) {
  require_same_shape(a, b, "max_abs_diff");
  double m = 0.0;
  const auto ae = a.entries();
  const auto be = b.entries();
  for (std::size_t i = 0; i < ae.size(); ++i) m = std::max(m, std::abs(ae[i] - be[i]));
  return m;
}

DenseTensor commutator(const DenseTensor& a, const DenseTensor& b) {
  return subtract(einstein_product(a, b), einstein_product(b, a));
}

}  // namespace hwt
