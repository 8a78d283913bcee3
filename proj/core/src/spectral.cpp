#include "hwt/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "eigen_bridge.hpp"
#include "hwt/error.hpp"

namespace hwt {

namespace {

void require_finite(const DenseTensor& a) {
  for (const auto& z : a.entries())
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
      throw DomainError("spectral: tensor has non-finite entries");
}

void require_hermitian(const DenseTensor& h, double tol, const char* op) {
  if (!h.shape().is_square())
    throw NotHermitianError(std::string(op) + ": tensor is not square", 0.0);
  const double residual = hermitian_residual(h);
  if (residual > tol * (1.0 + h.max_abs()))
    throw NotHermitianError(std::string(op) + ": tensor is not Hermitian (asymmetry " +
                                std::to_string(residual) + ")",
                            residual);
}

Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solve_hermitian(const DenseTensor& h,
                                                                bool vectors) {
  Eigen::MatrixXcd m = detail::to_eigen(h);
  const Eigen::MatrixXcd sym = 0.5 * (m + m.adjoint());
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd>(
      sym, vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
}

// Descending order, ties keep the solver's order.
std::vector<Eigen::Index> descending_order(const Eigen::VectorXd& values) {
  std::vector<Eigen::Index> order(static_cast<std::size_t>(values.size()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return values(a) > values(b); });
  return order;
}

}  // namespace

DenseTensor EigDecomposition::reconstruct() const {
  if (eigentensors.empty()) throw DomainError("reconstruct: empty decomposition");
  const Dims& dims = eigentensors.front().shape().row_dims();
  DenseTensor acc = zeros(TensorShape::square(dims));
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    const auto& u = eigentensors[i];
    acc = acc + lambdas[i] * einstein_product(u, conjugate_transpose(u));
  }
  return acc;
}

SpectralDecomposition svd(const DenseTensor& a) {
  require_finite(a);
  const Eigen::MatrixXcd m = detail::to_eigen(a);
  Eigen::JacobiSVD<Eigen::MatrixXcd> solver(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  SpectralDecomposition out;
  const auto& sv = solver.singularValues();
  out.sigma.assign(sv.data(), sv.data() + sv.size());
  out.left = detail::to_unfolded(solver.matrixU());
  out.right = detail::to_unfolded(solver.matrixV());
  return out;
}

std::vector<double> singular_values(const DenseTensor& a) {
  require_finite(a);
  const Eigen::MatrixXcd m = detail::to_eigen(a);
  Eigen::JacobiSVD<Eigen::MatrixXcd> solver(m);
  const auto& sv = solver.singularValues();
  return {sv.data(), sv.data() + sv.size()};
}

double ky_fan_norm_from_sigma(std::span<const double> sigma_desc, std::size_t k) {
  if (k < 1 || k > sigma_desc.size())
    throw DomainError("ky_fan_norm: k=" + std::to_string(k) + " outside [1, " +
                      std::to_string(sigma_desc.size()) + "]");
  return std::accumulate(sigma_desc.begin(), sigma_desc.begin() + static_cast<std::ptrdiff_t>(k),
                         0.0);
}

double ky_fan_norm(const DenseTensor& a, std::size_t k) {
  const auto& s = a.shape();
  const std::size_t r = std::min(s.row_size(), s.col_size());
  if (k < 1 || k > r)
    throw DomainError("ky_fan_norm: k=" + std::to_string(k) + " outside [1, " +
                      std::to_string(r) + "]");
  return ky_fan_norm_from_sigma(singular_values(a), k);
}

bool weakly_majorizes(std::span<const double> a, std::span<const double> b, double tol) {
  if (a.size() != b.size()) throw ShapeError("weakly_majorizes: vectors differ in length");
  std::vector<double> as(a.begin(), a.end());
  std::vector<double> bs(b.begin(), b.end());
  std::sort(as.begin(), as.end(), std::greater<>());
  std::sort(bs.begin(), bs.end(), std::greater<>());
  double sa = 0.0;
  double sb = 0.0;
  for (std::size_t i = 0; i < as.size(); ++i) {
    sa += as[i];
    sb += bs[i];
    if (sb > sa + tol) return false;
  }
  return true;
}

EigDecomposition herm_eig(const DenseTensor& h, double tol) {
  require_finite(h);
  require_hermitian(h, tol, "herm_eig");
  const auto solver = solve_hermitian(h, true);
  const auto& values = solver.eigenvalues();
  const auto& vectors = solver.eigenvectors();
  const TensorShape vec_shape(h.shape().row_dims(), {});

  EigDecomposition out;
  for (Eigen::Index idx : descending_order(values)) {
    out.lambdas.push_back(values(idx));
    std::vector<Complex> col(static_cast<std::size_t>(vectors.rows()));
    for (Eigen::Index r = 0; r < vectors.rows(); ++r) col[static_cast<std::size_t>(r)] = vectors(r, idx);
    out.eigentensors.emplace_back(vec_shape, std::move(col));
  }
  return out;
}

std::vector<double> herm_eigenvalues(const DenseTensor& h, double tol) {
  require_finite(h);
  require_hermitian(h, tol, "herm_eigenvalues");
  const auto solver = solve_hermitian(h, false);
  const auto& values = solver.eigenvalues();
  std::vector<double> out;
  for (Eigen::Index idx : descending_order(values)) out.push_back(values(idx));
  return out;
}

DenseTensor spectral_function(const EigDecomposition& eig, const TensorShape& shape,
                              const std::function<double(double)>& f) {
  const std::size_t n = shape.row_size();
  std::vector<Complex> out(n * n, Complex(0.0, 0.0));
  for (std::size_t i = 0; i < eig.lambdas.size(); ++i) {
    const double fl = f(eig.lambdas[i]);
    if (!std::isfinite(fl))
      throw DomainError("spectral_function: f is not finite at eigenvalue " +
                        std::to_string(eig.lambdas[i]));
    const auto u = eig.eigentensors[i].entries();
    for (std::size_t r = 0; r < n; ++r) {
      const Complex ur = fl * u[r];
      for (std::size_t c = 0; c < n; ++c) out[r * n + c] += ur * std::conj(u[c]);
    }
  }
  return DenseTensor(shape, std::move(out));
}

DenseTensor spectral_function(const DenseTensor& h, const std::function<double(double)>& f) {
  return spectral_function(herm_eig(h), h.shape(), f);
}

double max_eigenvalue(const DenseTensor& h) { return herm_eigenvalues(h).front(); }

double min_eigenvalue(const DenseTensor& h) { return herm_eigenvalues(h).back(); }

bool is_positive_definite(const DenseTensor& h, double tol) { return min_eigenvalue(h) > tol; }

bool loewner_geq(const DenseTensor& a, const DenseTensor& b, double tol) {
  if (a.shape() != b.shape()) throw ShapeError("loewner_geq: shape mismatch");
  require_hermitian(a, kStructuralTol, "loewner_geq");
  require_hermitian(b, kStructuralTol, "loewner_geq");
  return min_eigenvalue(a - b) >= -tol;
}

double power_norm_gap(const DenseTensor& a, const DenseTensor& b, unsigned n, std::size_t k) {
  if (n < 1) throw DomainError("power_norm_gap: n must be >= 1");
  if (!is_positive_definite(a, 0.0) || !is_positive_definite(b, 0.0))
    throw DomainError("power_norm_gap: inputs must be positive definite");
  const double inv_n = 1.0 / static_cast<double>(n);
  const double lhs = std::pow(ky_fan_norm(tensor_power(a + b, n), k), inv_n);
  const double rhs = std::pow(ky_fan_norm(tensor_power(a, n), k), inv_n) +
                     std::pow(ky_fan_norm(tensor_power(b, n), k), inv_n);
  return lhs - rhs;
}

bool power_norm_subadditivity_check(const DenseTensor& a, const DenseTensor& b, unsigned n,
                                    std::size_t k) {
  return power_norm_gap(a, b, n, k) <= kInequalitySlack;
}

}  // namespace hwt
