#pragma once

#include <complex>
#include <random>
#include <vector>

#include "hwt/tensor.hpp"
#include "oracles.hpp"

namespace testing_support {

/// All multi-indices of `dims` in lexicographic order (last index fastest).
inline std::vector<std::vector<std::size_t>> multi_indices(const hwt::Dims& dims) {
  std::vector<std::vector<std::size_t>> out;
  std::vector<std::size_t> idx(dims.size(), 0);
  while (true) {
    out.push_back(idx);
    std::size_t p = dims.size();
    while (p > 0) {
      --p;
      if (++idx[p] < dims[p]) break;
      idx[p] = 0;
      if (p == 0) return out;
    }
    if (dims.empty()) return out;
  }
}

/// Oracle matrix built entry by entry from multi-index access.
inline oracle::Mat to_mat(const hwt::DenseTensor& t) {
  const auto rows = multi_indices(t.shape().row_dims());
  const auto cols = multi_indices(t.shape().col_dims());
  oracle::Mat m(rows.size(), cols.size());
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < cols.size(); ++c) m(r, c) = t.at(rows[r], cols[c]);
  return m;
}

inline hwt::DenseTensor from_mat(const oracle::Mat& m, const hwt::TensorShape& shape) {
  return hwt::DenseTensor(shape, m.a);
}

inline hwt::DenseTensor random_tensor(const hwt::TensorShape& shape, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<hwt::Complex> e(shape.size());
  for (auto& z : e) z = hwt::Complex(g(rng), g(rng));
  return hwt::DenseTensor(shape, std::move(e));
}

inline hwt::DenseTensor random_hermitian(const hwt::Dims& dims, std::mt19937_64& rng) {
  const auto g = random_tensor(hwt::TensorShape::square(dims), rng);
  const auto m = to_mat(g);
  return from_mat(oracle::add(m, oracle::adjoint(m)), hwt::TensorShape::square(dims));
}

inline hwt::DenseTensor random_pd(const hwt::Dims& dims, std::mt19937_64& rng, double floor = 0.1) {
  const auto g = to_mat(random_tensor(hwt::TensorShape::square(dims), rng));
  auto p = oracle::matmul(g, oracle::adjoint(g));
  for (std::size_t i = 0; i < p.rows; ++i) p(i, i) += floor;
  return from_mat(p, hwt::TensorShape::square(dims));
}

inline hwt::Dims random_dims(std::mt19937_64& rng, std::size_t max_order = 2, std::size_t max_dim = 3) {
  std::uniform_int_distribution<std::size_t> ord(1, max_order);
  std::uniform_int_distribution<std::size_t> dim(1, max_dim);
  hwt::Dims d(ord(rng));
  for (auto& v : d) v = dim(rng);
  return d;
}

}  // namespace testing_support
