#pragma once

#include <Eigen/Dense>

#include "hwt/tensor.hpp"

namespace hwt::detail {

using MatrixXc = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline MatrixXc to_eigen(const DenseTensor& a) {
  const auto& s = a.shape();
  MatrixXc m(static_cast<Eigen::Index>(s.row_size()), static_cast<Eigen::Index>(s.col_size()));
  const auto e = a.entries();
  std::copy(e.begin(), e.end(), m.data());
  return m;
}

inline DenseTensor from_eigen(const MatrixXc& m, const TensorShape& shape) {
  std::vector<Complex> entries(m.data(), m.data() + m.size());
  return DenseTensor(shape, std::move(entries));
}

inline UnfoldedMatrix to_unfolded(const Eigen::MatrixXcd& m) {
  UnfoldedMatrix out;
  out.rows = static_cast<std::size_t>(m.rows());
  out.cols = static_cast<std::size_t>(m.cols());
  out.entries.resize(out.rows * out.cols);
  for (std::size_t r = 0; r < out.rows; ++r)
    for (std::size_t c = 0; c < out.cols; ++c)
      out(r, c) = m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
  return out;
}

inline Eigen::MatrixXcd from_unfolded(const UnfoldedMatrix& u) {
  Eigen::MatrixXcd m(static_cast<Eigen::Index>(u.rows), static_cast<Eigen::Index>(u.cols));
  for (std::size_t r = 0; r < u.rows; ++r)
    for (std::size_t c = 0; c < u.cols; ++c)
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = u(r, c);
  return m;
}

}  // namespace hwt::detail
