#include "hwt/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hwt/error.hpp"
#include "hwt/spectral.hpp"

namespace hwt {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double log_sum_exp(const std::vector<double>& logs) {
  double hi = -kInf;
  for (double v : logs) hi = std::max(hi, v);
  if (!std::isfinite(hi)) return hi;
  double s = 0.0;
  for (double v : logs) s += std::exp(v - hi);
  return hi + std::log(s);
}

double resolve_t_max(const TSearch& search, double max_rate) {
  double guard = max_rate > 0.0 ? kMaxExponentArgument / max_rate : 1e6;
  if (search.t_max > 0.0) guard = std::min(guard, search.t_max);
  return std::max(guard, search.t_min);
}

MinimizeResult search_min(const std::function<double(double)>& f, double t_min, double t_max,
                          double tol, std::size_t grid_points) {
  if (!(t_min > 0.0) || !(t_max >= t_min))
    throw DomainError("minimize_over_t: need 0 < t_min <= t_max");
  grid_points = std::max<std::size_t>(grid_points, 2);

  MinimizeResult best;
  best.value = kInf;
  best.t_star = t_min;
  bool found = false;
  auto probe = [&](double t) {
    const double v = f(t);
    if (std::isnan(v) || v == kInf) return v;
    if (!found || v < best.value) {
      best.value = v;
      best.t_star = t;
      found = true;
    }
    return v;
  };

  std::vector<double> grid(grid_points);
  const double log_lo = std::log(t_min);
  const double log_hi = std::log(t_max);
  for (std::size_t i = 0; i < grid_points; ++i)
    grid[i] = std::exp(log_lo + (log_hi - log_lo) * static_cast<double>(i) /
                                    static_cast<double>(grid_points - 1));
  grid.front() = t_min;
  grid.back() = t_max;

  std::size_t best_idx = 0;
  double best_grid = kInf;
  for (std::size_t i = 0; i < grid_points; ++i) {
    const double v = probe(grid[i]);
    if (v < best_grid) {
      best_grid = v;
      best_idx = i;
    }
  }
  if (!found) {
    best.overflow = true;
    best.boundary = true;
    best.t_star = t_min;
    return best;
  }

  // Golden-section refinement inside the bracketing grid cell pair.
  double lo = grid[best_idx == 0 ? 0 : best_idx - 1];
  double hi = grid[std::min(best_idx + 1, grid_points - 1)];
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - invphi * (hi - lo);
  double x2 = lo + invphi * (hi - lo);
  double f1 = probe(x1);
  double f2 = probe(x2);
  for (int iter = 0; iter < 200 && (hi - lo) > tol * (std::abs(lo) + std::abs(hi)); ++iter) {
    if (!(f2 < f1)) {  // non-finite f2 also shrinks toward x1
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - invphi * (hi - lo);
      f1 = probe(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + invphi * (hi - lo);
      f2 = probe(x2);
    }
  }
  best.boundary = best.t_star == t_min || best.t_star == t_max;
  return best;
}

}  // namespace

MinimizeResult minimize_over_t(const std::function<double(double)>& objective, double t_min,
                               double t_max, double tol, std::size_t grid_points) {
  MinimizeResult r = search_min(objective, t_min, t_max, tol, grid_points);
  r.log_value = r.value > 0.0 ? std::log(r.value) : -kInf;
  return r;
}

MinimizeResult minimize_log_over_t(const std::function<double(double)>& log_objective,
                                   double t_min, double t_max, double tol,
                                   std::size_t grid_points) {
  MinimizeResult r = search_min(log_objective, t_min, t_max, tol, grid_points);
  r.log_value = r.value;
  r.value = std::exp(r.log_value);
  return r;
}

double log_chernoff_factor(double rate_t, double q) {
  if (q <= 0.0) return 0.0;
  if (rate_t > 30.0) return rate_t + std::log(q + (1.0 - q) * std::exp(-rate_t));
  return std::log1p(std::expm1(rate_t) * q);
}

void ChernoffParams::validate() const {
  if (!(s >= 1.0)) throw DomainError("chernoff: s must be >= 1");
  if (a.empty()) throw DomainError("chernoff: polynomial g needs coefficients");
  for (double c : a)
    if (!(c >= 0.0) || !std::isfinite(c)) throw DomainError("chernoff: coefficients must be >= 0");
  if (m < 1) throw DomainError("chernoff: need at least one summand");
  if (k < 1) throw DomainError("chernoff: k must be >= 1");
  if (!(R > 0.0)) throw DomainError("chernoff: R must be > 0");
  if (!(c_cher >= 0.0)) throw DomainError("chernoff: C_cher must be >= 0");
  if (stats.size() != m) throw DomainError("chernoff: need one statistics entry per summand");
  for (const auto& st : stats)
    if (!(st.mean_sigma1 >= 0.0) || !(st.xi >= 0.0))
      throw DomainError("chernoff: summand statistics must be >= 0");
}

BoundValue chernoff_bound(const ChernoffParams& p, double theta, const TSearch& search) {
  p.validate();
  if (!(theta > 0.0)) throw DomainError("chernoff_bound: theta must be > 0");
  const double kd = static_cast<double>(p.k);
  const double md = static_cast<double>(p.m);
  const std::size_t degree = p.a.size() - 1;

  double max_rate = 0.0;
  for (std::size_t l = 1; l <= degree; ++l)
    if (p.a[l] > 0.0) max_rate = std::max(max_rate, md * l * p.s * p.R);

  const double log_prefactor = (p.s - 1.0) * std::log(static_cast<double>(degree) + 1.0);
  std::vector<double> logs;
  auto log_objective = [&](double t) {
    logs.clear();
    if (p.a[0] > 0.0) logs.push_back(std::log(kd) + p.s * std::log(p.a[0]));
    for (std::size_t l = 1; l <= degree; ++l) {
      if (p.a[l] <= 0.0) continue;
      const double log_w = std::log(kd / md) + static_cast<double>(l) * p.s * std::log(p.a[l]);
      const double rate_t = md * l * p.s * p.R * t;
      for (const auto& st : p.stats)
        logs.push_back(log_w + log_chernoff_factor(rate_t, st.mean_sigma1 + p.c_cher * st.xi));
    }
    return log_prefactor - theta * t + log_sum_exp(logs);
  };

  const double t_max = resolve_t_max(search, max_rate);
  const auto r = minimize_log_over_t(log_objective, search.t_min, t_max, search.tol,
                                     search.grid_points);
  BoundValue out;
  out.value = r.value;
  out.t_star = r.t_star;
  out.boundary = r.boundary;
  out.overflow = r.overflow;
  out.trace.push_back({"chernoff", 0, std::nullopt, r.value, r.t_star});
  return out;
}

void BoundInputs::validate() const {
  if (n < 1) throw DomainError("bound inputs: n must be >= 1");
  if (a.size() < 2) throw DomainError("bound inputs: f needs degree >= 1");
  if (k < 1) throw DomainError("bound inputs: k must be >= 1");
  const std::size_t m = degree();
  if (theta.size() != m) throw DomainError("bound inputs: need theta_1..theta_m");
  double sum = 0.0;
  for (std::size_t j = 1; j <= m; ++j) {
    if (a[j] != 0.0 && !(theta[j - 1] > 0.0))
      throw DomainError("bound inputs: theta_j must be > 0 for every nonzero a_j");
    sum += theta[j - 1];
  }
  const double target = Theta - std::abs(a[0]) * static_cast<double>(k);
  if (!(target > 0.0)) throw DomainError("bound inputs: Theta must exceed |a_0| k");
  if (std::abs(sum - target) > 1e-12 * std::max(1.0, std::abs(Theta)))
    throw DomainError("bound inputs: theta_j must sum to Theta - |a_0| k");
  if (!(R_d > 0.0)) throw DomainError("bound inputs: R_d must be > 0");
  if (n > 1 && !(R_c > 0.0)) throw DomainError("bound inputs: R_c must be > 0");
  if (!(c_cher > 0.0) || !(d2 > 0.0)) throw DomainError("bound inputs: C_cher and D_2 must be > 0");
  if (diag_stats.size() != n) throw DomainError("bound inputs: need statistics for every D_i");
  if (n > 1) {
    if (K.size() != n) throw DomainError("bound inputs: K table needs n rows");
    for (const auto& row : K) {
      if (row.size() < m) throw DomainError("bound inputs: K table needs m columns");
      for (double v : row)
        if (!(v > 0.0)) throw DomainError("bound inputs: K entries must be > 0");
    }
    if (coupling_stats.size() != n) throw DomainError("bound inputs: coupling statistics need n rows");
    for (const auto& row : coupling_stats)
      if (row.size() != n) throw DomainError("bound inputs: coupling statistics need n columns");
  }
}

namespace {

void require_term(const BoundInputs& in, std::size_t j) {
  if (j < 1 || j > in.degree()) throw DomainError("bound: j must lie in [1, m]");
  if (in.a[j] == 0.0) throw DomainError("bound: a_j = 0 terms are skipped, not evaluated");
}

}  // namespace

BoundValue diag_bound(const BoundInputs& in, std::size_t j, const TSearch& search) {
  in.validate();
  require_term(in, j);
  const double nd = static_cast<double>(in.n);
  const double kd = static_cast<double>(in.k);
  const double rate = in.theta[j - 1] / (std::ldexp(1.0, static_cast<int>(j)) * std::abs(in.a[j]));
  const double growth = nd * in.R_d;

  std::vector<double> logs(in.n);
  auto log_objective = [&](double t) {
    for (std::size_t i = 0; i < in.n; ++i) {
      const auto& st = in.diag_stats[i];
      logs[i] = std::log(kd / nd) + log_chernoff_factor(growth * t, st.mean_sigma1 + in.c_cher * st.xi);
    }
    return -rate * t + log_sum_exp(logs);
  };
  const auto r = minimize_log_over_t(log_objective, search.t_min, resolve_t_max(search, growth),
                                     search.tol, search.grid_points);
  BoundValue out;
  out.value = r.value;
  out.t_star = r.t_star;
  out.boundary = r.boundary;
  out.overflow = r.overflow;
  out.trace.push_back({"diag", j, std::nullopt, r.value, r.t_star});
  return out;
}

BoundValue coupling_bound(const BoundInputs& in, std::size_t j, const TSearch& search) {
  in.validate();
  require_term(in, j);
  BoundValue out;
  if (in.n == 1) return out;

  const double nd = static_cast<double>(in.n);
  const double kd = static_cast<double>(in.k);
  const double growth = (nd - 1.0) * in.R_c;
  const double t_max = resolve_t_max(search, growth);
  const double base = in.theta[j - 1] / (std::ldexp(1.0, static_cast<int>(j)) *
                                         std::pow(nd, static_cast<double>(j) - 1.0) *
                                         std::abs(in.a[j]) * in.d2);
  double largest = -1.0;
  std::vector<double> logs;
  for (std::size_t i = 0; i < in.n; ++i) {
    const double rate = base / in.K[i][j - 1];
    auto log_objective = [&](double t) {
      logs.clear();
      for (std::size_t l = 0; l < in.n; ++l) {
        if (l == i) continue;
        const auto& st = in.coupling_stats[i][l];
        logs.push_back(std::log(kd / (nd - 1.0)) +
                       log_chernoff_factor(growth * t, st.mean_sigma1 + in.c_cher * st.xi));
      }
      return -rate * t + log_sum_exp(logs);
    };
    const auto r = minimize_log_over_t(log_objective, search.t_min, t_max, search.tol,
                                       search.grid_points);
    const double term = in.d2 * r.value;
    out.trace.push_back({"coupling", j, i, term, r.t_star});
    out.value += term;
    out.boundary = out.boundary || r.boundary;
    out.overflow = out.overflow || r.overflow;
    if (term > largest) {
      largest = term;
      out.t_star = r.t_star;
    }
  }
  return out;
}

BoundValue hanson_wright_bound(const BoundInputs& in, const TSearch& search) {
  in.validate();
  BoundValue out;
  double largest = -1.0;
  for (std::size_t j = 1; j <= in.degree(); ++j) {
    if (in.a[j] == 0.0) continue;
    for (const auto& part : {diag_bound(in, j, search), coupling_bound(in, j, search)}) {
      out.boundary = out.boundary || part.boundary;
      out.overflow = out.overflow || part.overflow;
      for (const auto& term : part.trace) out.trace.push_back(term);
    }
  }
  for (const auto& term : out.trace) {
    out.value += term.value;
    if (term.value > largest) {
      largest = term.value;
      out.t_star = term.t_star;
    }
  }
  return out;
}

double scalar_hw_reference(const DenseTensor& a, double beta, double theta, double c) {
  if (!(theta > 0.0) || !(beta > 0.0) || !(c > 0.0))
    throw DomainError("scalar_hw_reference: theta, beta and C must be > 0");
  if (!a.shape().is_square() || a.shape().row_order() != 1)
    throw ShapeError("scalar_hw_reference: A must be an [n] x [n] matrix");
  for (const auto& z : a.entries())
    if (z.imag() != 0.0) throw DomainError("scalar_hw_reference: A must be real");
  if (!is_hermitian(a)) throw DomainError("scalar_hw_reference: A must be symmetric");

  const double hs = frobenius_norm(a);
  const double op = singular_values(a).front();
  if (hs == 0.0) return 0.0;
  const double b2 = beta * beta;
  const double exponent = std::min(theta * theta / (b2 * b2 * hs), theta / (b2 * op));
  return 2.0 * std::exp(-exponent / c);
}

}  // namespace hwt
