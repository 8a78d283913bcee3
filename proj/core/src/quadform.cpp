#include "hwt/quadform.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hwt/error.hpp"
#include "hwt/spectral.hpp"

namespace hwt {

namespace {

constexpr double kCommuteTol = 1e-8;
constexpr double kLoewnerTol = 1e-9;
constexpr double kDeclaredSlack = 1e-9;

void add_note(std::vector<std::string>& notes, std::string note) {
  if (std::find(notes.begin(), notes.end(), note) == notes.end()) notes.push_back(std::move(note));
}

}  // namespace

BlockVector::BlockVector(std::vector<DenseTensor> blocks) : blocks_(std::move(blocks)) {
  if (blocks_.empty()) throw ShapeError("BlockVector: need at least one block");
  const TensorShape& s = blocks_.front().shape();
  if (!s.is_square()) throw ShapeError("BlockVector: blocks must be square");
  for (const auto& b : blocks_)
    if (b.shape() != s) throw ShapeError("BlockVector: blocks differ in shape");
}

BlockMatrix::BlockMatrix(std::size_t n, std::vector<DenseTensor> blocks)
    : n_(n), blocks_(std::move(blocks)) {
  if (n_ == 0) throw ShapeError("BlockMatrix: n must be >= 1");
  if (blocks_.size() != n_ * n_)
    throw ShapeError("BlockMatrix: expected " + std::to_string(n_ * n_) + " blocks, got " +
                     std::to_string(blocks_.size()));
  const TensorShape& s = blocks_.front().shape();
  if (!s.is_square()) throw ShapeError("BlockMatrix: blocks must be square");
  for (std::size_t b = 0; b < blocks_.size(); ++b) {
    if (blocks_[b].shape() != s) throw ShapeError("BlockMatrix: blocks differ in shape");
    if (!is_hermitian(blocks_[b]))
      throw NotHermitianError("BlockMatrix: block (" + std::to_string(b / n_) + "," +
                                  std::to_string(b % n_) + ") is not Hermitian",
                              hermitian_residual(blocks_[b]));
  }
}

BlockMatrix BlockMatrix::diagonal_part() const {
  std::vector<DenseTensor> out;
  out.reserve(blocks_.size());
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = 0; j < n_; ++j)
      out.push_back(i == j ? (*this)(i, j) : zeros(base_shape()));
  return BlockMatrix(n_, std::move(out));
}

DenseTensor QuadDecomposition::diagonal_sum() const {
  DenseTensor acc = zeros(total.shape());
  for (const auto& d : diagonal_terms) acc = acc + d;
  return acc;
}

DenseTensor QuadDecomposition::coupling_sum() const {
  DenseTensor acc = zeros(total.shape());
  for (const auto& c : coupling_terms) acc = acc + c;
  return acc;
}

QuadDecomposition quadratic_form(const BlockVector& x, const BlockMatrix& a) {
  const std::size_t n = x.size();
  if (a.size() != n)
    throw ShapeError("quadratic_form: block vector has " + std::to_string(n) +
                     " blocks but block matrix is " + std::to_string(a.size()) + "x" +
                     std::to_string(a.size()));
  if (x.base_shape() != a.base_shape())
    throw ShapeError("quadratic_form: block shapes differ (" + x.base_shape().to_string() +
                     " vs " + a.base_shape().to_string() + ")");

  QuadDecomposition out{{}, {}, {}, zeros(x.base_shape())};
  for (std::size_t i = 0; i < n; ++i) {
    const DenseTensor xa = einstein_product(x[i], a(i, i));
    out.diagonal_terms.push_back(einstein_product(xa, x[i]));
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      out.coupling_terms.push_back(einstein_product(einstein_product(x[i], a(i, j)), x[j]));
      out.coupling_index.emplace_back(i, j);
    }
  for (std::size_t i = 0; i < n; ++i) {
    DenseTensor row = zeros(x.base_shape());
    for (std::size_t j = 0; j < n; ++j) row = row + einstein_product(a(i, j), x[j]);
    out.total = out.total + einstein_product(x[i], row);
  }
  return out;
}

DenseTensor poly_apply(std::span<const double> coeffs, const DenseTensor& t) {
  if (!t.shape().is_square()) throw ShapeError("poly_apply: tensor must be square");
  const DenseTensor id = identity(t.shape().row_dims());
  if (coeffs.empty()) return zeros(t.shape());
  DenseTensor acc = coeffs.back() * id;
  for (std::size_t j = coeffs.size() - 1; j-- > 0;)
    acc = einstein_product(acc, t) + coeffs[j] * id;
  return acc;
}

std::string to_string(ThetaSplitPolicy p) {
  return p == ThetaSplitPolicy::equal ? "equal" : "proportional";
}

ThetaSplitPolicy parse_split_policy(const std::string& s) {
  if (s == "equal") return ThetaSplitPolicy::equal;
  if (s == "proportional") return ThetaSplitPolicy::proportional;
  throw DomainError("unknown theta split policy '" + s + "'");
}

std::vector<double> theta_split(double Theta, std::span<const double> a, std::size_t k,
                                ThetaSplitPolicy policy) {
  if (a.size() < 2) throw DomainError("theta_split: polynomial needs degree >= 1");
  const double target = Theta - std::abs(a[0]) * static_cast<double>(k);
  if (!(target > 0.0))
    throw DomainError("theta_split: infeasible, Theta=" + std::to_string(Theta) +
                      " does not exceed |a_0| k=" + std::to_string(std::abs(a[0]) * k));

  const std::size_t m = a.size() - 1;
  std::vector<std::size_t> active;
  double weight_sum = 0.0;
  for (std::size_t j = 1; j <= m; ++j)
    if (a[j] != 0.0) {
      active.push_back(j);
      weight_sum += std::abs(a[j]);
    }
  if (active.empty()) throw DomainError("theta_split: all a_j (j >= 1) are zero");

  std::vector<double> theta(m, 0.0);
  double assigned = 0.0;
  for (std::size_t q = 0; q + 1 < active.size(); ++q) {
    const std::size_t j = active[q];
    const double share = policy == ThetaSplitPolicy::equal
                             ? target / static_cast<double>(active.size())
                             : target * std::abs(a[j]) / weight_sum;
    theta[j - 1] = share;
    assigned += share;
  }
  theta[active.back() - 1] = target - assigned;
  return theta;
}

void AssumptionReport::merge(const AssumptionReport& o) {
  if (o.samples == 0) return;
  if (samples == 0) {
    *this = o;
    return;
  }
  samples += o.samples;
  commute_ok = commute_ok && o.commute_ok;
  commute_residual = std::max(commute_residual, o.commute_residual);
  exp_domination_ok = exp_domination_ok && o.exp_domination_ok;
  exp_domination_margin = std::min(exp_domination_margin, o.exp_domination_margin);
  pd_ok = pd_ok && o.pd_ok;
  pd_margin = std::min(pd_margin, o.pd_margin);
  R_d_observed = std::max(R_d_observed, o.R_d_observed);
  R_c_observed = std::max(R_c_observed, o.R_c_observed);
  R_d_ok = R_d_ok && o.R_d_ok;
  R_c_ok = R_c_ok && o.R_c_ok;
  for (std::size_t i = 0; i < K_table.size() && i < o.K_table.size(); ++i)
    for (std::size_t j = 0; j < K_table[i].size() && j < o.K_table[i].size(); ++j)
      K_table[i][j] = std::max(K_table[i][j], o.K_table[i][j]);
  K_ok = K_ok && o.K_ok;
  hermitian_residual = std::max(hermitian_residual, o.hermitian_residual);
  for (const auto& note : o.notes) add_note(notes, note);
}

std::vector<double> default_t_grid(double t_max) {
  constexpr double t_min = 1e-3;
  constexpr int points = 8;
  if (!(t_max > t_min)) throw DomainError("default_t_grid: t_max must exceed 1e-3");
  std::vector<double> grid(points);
  for (int p = 0; p < points; ++p)
    grid[p] = std::exp(std::log(t_min) + (std::log(t_max) - std::log(t_min)) * p / (points - 1));
  grid.front() = t_min;
  grid.back() = t_max;
  return grid;
}

AssumptionReport check_assumptions(const BlockVector& x, const BlockMatrix& a,
                                   const BoundInputs& params, std::span<const double> t_grid,
                                   std::span<const unsigned> j_range) {
  const std::size_t n = x.size();
  if (a.size() != n) throw ShapeError("check_assumptions: block counts differ");
  const std::size_t k = params.k;
  const std::size_t m = params.degree();

  AssumptionReport rep;
  rep.samples = 1;
  rep.t_grid.assign(t_grid.begin(), t_grid.end());
  rep.j_range.assign(j_range.begin(), j_range.end());
  rep.exp_domination_margin = std::numeric_limits<double>::infinity();
  rep.pd_margin = std::numeric_limits<double>::infinity();

  const QuadDecomposition q = quadratic_form(x, a);
  rep.hermitian_residual = hermitian_residual(q.total);

  auto check_pd = [&](const DenseTensor& term, const std::string& label) {
    if (!is_hermitian(term)) {
      rep.pd_ok = false;
      rep.pd_margin = std::min(rep.pd_margin, -hermitian_residual(term));
      add_note(rep.notes, label + " is not Hermitian");
      return;
    }
    const double lmin = min_eigenvalue(term);
    rep.pd_margin = std::min(rep.pd_margin, lmin);
    if (!(lmin > 0.0)) {
      rep.pd_ok = false;
      add_note(rep.notes, label + " is not positive definite");
    }
  };
  for (std::size_t i = 0; i < n; ++i) check_pd(q.diagonal_terms[i], "D_i");
  for (const auto& c : q.coupling_terms) check_pd(c, "coupling term");

  // R_d: lambda_max of D_i.
  for (const auto& d : q.diagonal_terms) {
    const double r = is_hermitian(d) ? max_eigenvalue(d) : singular_values(d).front();
    rep.R_d_observed = std::max(rep.R_d_observed, r);
  }
  if (rep.R_d_observed > params.R_d * (1.0 + kDeclaredSlack)) {
    rep.R_d_ok = false;
    add_note(rep.notes, "observed lambda_max(D_i) exceeds declared R_d");
  }

  // R_c: lambda_max of A_il X_l (sigma_1 when the product is not Hermitian).
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t l = 0; l < n; ++l) {
      if (i == l) continue;
      const DenseTensor ax = einstein_product(a(i, l), x[l]);
      const double r = is_hermitian(ax) ? max_eigenvalue(ax) : singular_values(ax).front();
      rep.R_c_observed = std::max(rep.R_c_observed, r);
    }
  if (n > 1 && rep.R_c_observed > params.R_c * (1.0 + kDeclaredSlack)) {
    rep.R_c_ok = false;
    add_note(rep.notes, "observed lambda_max(A_il X_l) exceeds declared R_c");
  }

  // Ky Fan norms of powers of X_i.
  rep.K_table.assign(n, std::vector<double>(m, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 1; j <= m; ++j) {
      const double v = ky_fan_norm(tensor_power(x[i], static_cast<unsigned>(j)), k);
      rep.K_table[i][j - 1] = v;
      if (!params.K.empty() && v > params.K[i][j - 1] * (1.0 + kDeclaredSlack)) {
        rep.K_ok = false;
        add_note(rep.notes, "observed ||X_i^j||_(k) exceeds declared K");
      }
    }

  // Commutation and exponential domination for S_i = sum_{l != i} A_il X_l.
  for (std::size_t i = 0; i < n && n > 1; ++i) {
    DenseTensor s = zeros(x.base_shape());
    for (std::size_t l = 0; l < n; ++l)
      if (l != i) s = s + einstein_product(a(i, l), x[l]);

    const double scale = 1.0 + x[i].max_abs() * s.max_abs();
    const double comm = commutator(x[i], s).max_abs() / scale;
    rep.commute_residual = std::max(rep.commute_residual, comm);
    if (comm > kCommuteTol) {
      rep.commute_ok = false;
      add_note(rep.notes, "X_i does not commute with sum_l A_il X_l");
    }

    if (!is_hermitian(s)) {
      rep.exp_domination_ok = false;
      rep.exp_domination_margin = std::min(rep.exp_domination_margin, -hermitian_residual(s));
      add_note(rep.notes, "sum_l A_il X_l is not Hermitian; exponential domination undefined");
      continue;
    }
    const EigDecomposition eig = herm_eig(s);
    for (unsigned j : j_range) {
      if (j == 0) continue;
      const DenseTensor sj = spectral_function(
          eig, s.shape(), [j](double lam) { return std::pow(lam, static_cast<double>(j)); });
      const EigDecomposition eig_sj = herm_eig(sj);
      for (double t : t_grid) {
        try {
          const DenseTensor lhs =
              tensor_power(spectral_function(eig, s.shape(), [t](double lam) { return std::exp(t * lam); }), j);
          const DenseTensor rhs =
              spectral_function(eig_sj, s.shape(), [t](double lam) { return std::exp(t * lam); });
          const DenseTensor diff = lhs - rhs;
          const double sym_scale = 1.0 + std::max(lhs.max_abs(), rhs.max_abs());
          const DenseTensor sym = 0.5 * (diff + conjugate_transpose(diff));
          const double margin = min_eigenvalue(sym) / sym_scale;
          rep.exp_domination_margin = std::min(rep.exp_domination_margin, margin);
          if (margin < -kLoewnerTol) {
            rep.exp_domination_ok = false;
            add_note(rep.notes, "exp(tS)^j does not dominate exp(tS^j) on the t grid");
          }
        } catch (const DomainError&) {
          rep.exp_domination_ok = false;
          add_note(rep.notes, "exponential overflow on the t grid");
        }
      }
    }
  }
  return rep;
}

}  // namespace hwt
