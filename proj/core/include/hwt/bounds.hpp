#pragma once

// Closed-form tail-bound evaluators. Each bound contains an infimum over the
// Chernoff parameter t > 0, realized numerically by minimize_over_t on a
// bounded interval and evaluated in the log domain.

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "hwt/tensor.hpp"

namespace hwt {

/// Largest exponent argument allowed inside exp() when choosing t_max.
inline constexpr double kMaxExponentArgument = 700.0;

struct TSearch {
  double t_min = 1e-6;
  /// Upper end of the search; <= 0 means "use the overflow guard only".
  /// A positive value is still capped by the overflow guard.
  double t_max = 0.0;
  std::size_t grid_points = 512;
  double tol = 1e-10;
};

struct MinimizeResult {
  double t_star = 0.0;
  double value = 0.0;      ///< exp(log_value) for log-domain searches
  double log_value = 0.0;
  bool boundary = false;   ///< t_star sits on t_min or t_max
  bool overflow = false;   ///< objective was non-finite everywhere
};

/// Log-spaced grid search followed by golden-section refinement around the
/// best grid point. The returned value never exceeds the objective at any
/// probed t.
MinimizeResult minimize_over_t(const std::function<double(double)>& objective, double t_min,
                               double t_max, double tol = 1e-10, std::size_t grid_points = 512);

/// Same search over log(objective); value = exp(log_value).
MinimizeResult minimize_log_over_t(const std::function<double(double)>& log_objective,
                                   double t_min, double t_max, double tol = 1e-10,
                                   std::size_t grid_points = 512);

/// log(1 + (e^{rate t} - 1) q) for q >= 0 without overflow.
double log_chernoff_factor(double rate_t, double q);

/// E[sigma_1] and Xi of one random summand.
struct SummandStats {
  double mean_sigma1 = 0.0;
  double xi = 0.0;
};

struct ChernoffParams {
  double s = 1.0;                  ///< outer power of g, s >= 1
  std::vector<double> a;           ///< nonnegative coefficients a_0..a_deg of g
  std::size_t m = 1;               ///< number of summands
  std::size_t k = 1;               ///< Ky Fan order
  double R = 1.0;                  ///< lambda_max bound of each summand
  double c_cher = 1.0;
  std::vector<SummandStats> stats; ///< one per summand (length m)

  void validate() const;
};

struct BoundTerm {
  std::string kind;                ///< "chernoff", "diag", "coupling"
  std::size_t j = 0;               ///< polynomial power (0 for chernoff)
  std::optional<std::size_t> i;    ///< block index for coupling terms
  double value = 0.0;
  double t_star = 0.0;
};

struct BoundValue {
  double value = 0.0;              ///< raw, may exceed 1
  double t_star = 0.0;             ///< t of the single infimum, or of the largest term
  bool boundary = false;
  bool overflow = false;
  std::vector<BoundTerm> trace;

  double clamped() const { return value < 1.0 ? value : 1.0; }
};

/// Generalized tensor Chernoff bound for ||g(sum X_j)||_(k) >= theta with
/// g = (a_0 + a_1 x + ... + a_deg x^deg)^s.
BoundValue chernoff_bound(const ChernoffParams& params, double theta, const TSearch& search = {});

struct BoundInputs {
  std::size_t n = 1;                 ///< block count
  std::vector<double> a;             ///< real coefficients a_0..a_m of f
  std::size_t k = 1;
  double Theta = 0.0;
  std::vector<double> theta;         ///< theta_1..theta_m (0 where a_j = 0)
  double R_d = 1.0;
  double R_c = 1.0;
  std::vector<std::vector<double>> K;  ///< K[i][j-1] bounds ||X_i^j||_(k)
  double c_cher = 1.0;
  double d2 = 8.0;
  std::vector<SummandStats> diag_stats;                   ///< per i, for D_i
  std::vector<std::vector<SummandStats>> coupling_stats;  ///< [i][l], for A_{i,l} * X_l

  std::size_t degree() const { return a.empty() ? 0 : a.size() - 1; }
  void validate() const;
};

/// Tail bound for ||(sum D_i)^j||_(k) >= theta_j / (2^j |a_j|).
BoundValue diag_bound(const BoundInputs& in, std::size_t j, const TSearch& search = {});

/// Tail bound for ||(sum C)^j||_(k) >= theta_j / (2^j |a_j|) via decoupling;
/// the infimum over t is taken separately for each block row i.
BoundValue coupling_bound(const BoundInputs& in, std::size_t j, const TSearch& search = {});

/// Sum over j with a_j != 0 of diag_bound(j) + coupling_bound(j). The value
/// is the in-order sum of the trace entries.
BoundValue hanson_wright_bound(const BoundInputs& in, const TSearch& search = {});

/// Scalar Hanson-Wright reference
///   2 exp(-(1/C) min{theta^2 / (beta^4 ||A||_HS), theta / (beta^2 ||A||_OP)})
/// for a real symmetric matrix A given as an [n] x [n] tensor.
double scalar_hw_reference(const DenseTensor& a, double beta, double theta, double c);

}  // namespace hwt
