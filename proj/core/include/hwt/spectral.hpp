#pragma once

// Singular values, Ky Fan norms, Hermitian eigendecompositions and spectral
// functions of tensors, all computed through the unfolding bijection.

#include <functional>
#include <span>
#include <vector>

#include "hwt/tensor.hpp"

namespace hwt {

/// Slack used by inequality checks (Ky Fan triangle, power-mean, ...).
inline constexpr double kInequalitySlack = 1e-9;

struct SpectralDecomposition {
  std::vector<double> sigma;  ///< descending, nonnegative
  UnfoldedMatrix left;        ///< row_size x r, orthonormal columns
  UnfoldedMatrix right;       ///< col_size x r, orthonormal columns
};

struct EigDecomposition {
  std::vector<double> lambdas;             ///< descending
  std::vector<DenseTensor> eigentensors;   ///< shape (dims) x (), orthonormal

  /// sum_i lambda_i U_i * U_i^H
  DenseTensor reconstruct() const;
};

/// Thin SVD of the unfolded tensor: unfold(a) = left * diag(sigma) * right^H.
SpectralDecomposition svd(const DenseTensor& a);
std::vector<double> singular_values(const DenseTensor& a);

/// Sum of the k largest singular values, 1 <= k <= min(row_size, col_size).
double ky_fan_norm(const DenseTensor& a, std::size_t k);
double ky_fan_norm_from_sigma(std::span<const double> sigma_desc, std::size_t k);

/// True when b is weakly majorized by a: every prefix sum of the
/// descending-sorted b is at most the matching prefix sum of a (+tol).
bool weakly_majorizes(std::span<const double> a, std::span<const double> b, double tol = 1e-12);

/// Eigendecomposition of a Hermitian tensor. Throws NotHermitianError
/// carrying the asymmetry when the input is not Hermitian within tol.
EigDecomposition herm_eig(const DenseTensor& h, double tol = kStructuralTol);

/// Eigenvalues only, descending.
std::vector<double> herm_eigenvalues(const DenseTensor& h, double tol = kStructuralTol);

/// f(H) = U f(S) U^H. Throws DomainError if f is not finite at an eigenvalue.
DenseTensor spectral_function(const DenseTensor& h, const std::function<double(double)>& f);
DenseTensor spectral_function(const EigDecomposition& eig, const TensorShape& shape,
                              const std::function<double(double)>& f);

double max_eigenvalue(const DenseTensor& h);
double min_eigenvalue(const DenseTensor& h);

bool is_positive_definite(const DenseTensor& h, double tol = kStructuralTol);

/// a >= b in the Loewner order: min eigenvalue of (a - b) >= -tol.
bool loewner_geq(const DenseTensor& a, const DenseTensor& b, double tol = kStructuralTol);

/// ||(a+b)^n||_(k)^(1/n) - (||a^n||_(k)^(1/n) + ||b^n||_(k)^(1/n)).
/// Requires positive definite a and b.
double power_norm_gap(const DenseTensor& a, const DenseTensor& b, unsigned n, std::size_t k);

/// power_norm_gap <= kInequalitySlack.
bool power_norm_subadditivity_check(const DenseTensor& a, const DenseTensor& b, unsigned n,
                                    std::size_t k);

}  // namespace hwt
