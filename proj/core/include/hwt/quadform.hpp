#pragma once

// Block quadratic forms X^T A X over tensors, their diagonal/coupling split,
// polynomial images, and sample-level checks of the assumptions behind the
// block Hanson-Wright bound.

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hwt/bounds.hpp"
#include "hwt/tensor.hpp"

namespace hwt {

class BlockVector {
 public:
  explicit BlockVector(std::vector<DenseTensor> blocks);

  std::size_t size() const noexcept { return blocks_.size(); }
  const DenseTensor& operator[](std::size_t i) const { return blocks_[i]; }
  const std::vector<DenseTensor>& blocks() const noexcept { return blocks_; }
  const TensorShape& base_shape() const { return blocks_.front().shape(); }

 private:
  std::vector<DenseTensor> blocks_;
};

class BlockMatrix {
 public:
  /// `blocks` is the n x n grid in row-major order. Every block must be
  /// Hermitian and share one square shape.
  BlockMatrix(std::size_t n, std::vector<DenseTensor> blocks);

  std::size_t size() const noexcept { return n_; }
  const DenseTensor& operator()(std::size_t i, std::size_t j) const { return blocks_[i * n_ + j]; }
  const std::vector<DenseTensor>& blocks() const noexcept { return blocks_; }
  const TensorShape& base_shape() const { return blocks_.front().shape(); }

  /// A_{i,i} on the diagonal, zero elsewhere.
  BlockMatrix diagonal_part() const;

 private:
  std::size_t n_;
  std::vector<DenseTensor> blocks_;
};

struct QuadDecomposition {
  std::vector<DenseTensor> diagonal_terms;    ///< D_i = X_i A_ii X_i
  std::vector<DenseTensor> coupling_terms;    ///< C = X_i A_ij X_j, (i, j) lexicographic, i != j
  std::vector<std::pair<std::size_t, std::size_t>> coupling_index;
  DenseTensor total;                          ///< direct double sum over (i, j)

  DenseTensor diagonal_sum() const;
  DenseTensor coupling_sum() const;
};

QuadDecomposition quadratic_form(const BlockVector& x, const BlockMatrix& a);

/// a_0 I + a_1 T + ... + a_m T^m by Horner's rule.
DenseTensor poly_apply(std::span<const double> coeffs, const DenseTensor& t);

enum class ThetaSplitPolicy { equal, proportional };

std::string to_string(ThetaSplitPolicy p);
ThetaSplitPolicy parse_split_policy(const std::string& s);

/// theta_1..theta_m with sum Theta - |a_0| k. Terms with a_j = 0 receive 0
/// since they are skipped by the bound.
std::vector<double> theta_split(double Theta, std::span<const double> a, std::size_t k,
                                ThetaSplitPolicy policy);

struct AssumptionReport {
  std::size_t samples = 0;

  bool commute_ok = true;
  double commute_residual = 0.0;       ///< worst relative max-abs commutator

  bool exp_domination_ok = true;
  double exp_domination_margin = 0.0;  ///< worst scaled min eigenvalue of the difference
  std::vector<double> t_grid;
  std::vector<unsigned> j_range;

  bool pd_ok = true;
  double pd_margin = 0.0;              ///< smallest eigenvalue over D_i and C terms

  double R_d_observed = 0.0;
  double R_c_observed = 0.0;
  bool R_d_ok = true;
  bool R_c_ok = true;

  std::vector<std::vector<double>> K_table;  ///< [i][j-1] observed max ||X_i^j||_(k)
  bool K_ok = true;

  double hermitian_residual = 0.0;     ///< worst residual of the total
  std::vector<std::string> notes;

  bool all_ok() const noexcept {
    return commute_ok && exp_domination_ok && pd_ok && R_d_ok && R_c_ok && K_ok;
  }

  /// Combines two reports over disjoint sample sets.
  void merge(const AssumptionReport& other);
};

/// 8 log-spaced points in [1e-3, t_max].
std::vector<double> default_t_grid(double t_max);

/// Checks one realization against the declared limits in `params`. Notes are
/// deduplicated so merged reports stay small.
AssumptionReport check_assumptions(const BlockVector& x, const BlockMatrix& a,
                                   const BoundInputs& params, std::span<const double> t_grid,
                                   std::span<const unsigned> j_range);

}  // namespace hwt
