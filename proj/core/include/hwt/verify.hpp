#pragma once

// Monte Carlo estimation of tail probabilities with exact binomial
// confidence intervals, and empirical checks of the inequalities used to
// build the block Hanson-Wright bound.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "hwt/bounds.hpp"
#include "hwt/quadform.hpp"
#include "hwt/random.hpp"
#include "hwt/tensor.hpp"

namespace hwt {

/// Calls fn(i) for i in [0, count) on up to `threads` workers using static
/// contiguous chunks. Result slot i only ever holds fn(i), so the output is
/// independent of the thread count.
template <class T, class F>
std::vector<T> parallel_map(std::size_t count, std::size_t threads, F&& fn) {
  std::vector<T> out(count);
  threads = std::max<std::size_t>(1, std::min(threads, count));
  if (threads == 1) {
    for (std::size_t i = 0; i < count; ++i) out[i] = fn(i);
    return out;
  }
  std::vector<std::exception_ptr> errors(threads);
  std::vector<std::thread> pool;
  const std::size_t chunk = (count + threads - 1) / threads;
  for (std::size_t w = 0; w < threads; ++w) {
    pool.emplace_back([&, w] {
      try {
        const std::size_t end = std::min(count, (w + 1) * chunk);
        for (std::size_t i = w * chunk; i < end; ++i) out[i] = fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

inline constexpr double kConfidence = 0.95;
/// Largest fraction of non-finite trials tolerated before a run is invalid.
inline constexpr double kMaxExcludedFraction = 0.001;

struct TailEstimate {
  double theta = 0.0;
  std::size_t trials = 0;
  std::size_t hits = 0;
  double p_hat = 0.0;
  double ci_low = 0.0;
  double ci_high = 1.0;
};

/// Two-sided Clopper-Pearson interval for hits out of trials.
std::pair<double, double> clopper_pearson(std::size_t hits, std::size_t trials,
                                          double confidence = kConfidence);

TailEstimate make_tail_estimate(double theta, std::size_t hits, std::size_t trials);

struct TailRun {
  std::vector<TailEstimate> rows;
  std::size_t excluded = 0;  ///< non-finite draws left out of every row
  bool valid = true;         ///< excluded fraction within kMaxExcludedFraction
};

/// Tail counts stat >= theta (or stat > theta when `strict`) over a fixed set
/// of draws. Non-finite draws are excluded.
TailRun tail_from_values(std::span<const double> values, std::span<const double> theta_grid,
                         bool strict = false);

/// Draw i uses seeds.stream(stream_id, i). Requires trials >= 100.
TailRun empirical_tail(const std::function<double(Rng&)>& statistic,
                       std::span<const double> theta_grid, std::size_t trials,
                       const SeedPolicy& seeds, std::uint64_t stream_id = streams::kEvaluation,
                       std::size_t threads = 1);

// ---------------------------------------------------------------- symmetrization

struct SymmetrizationRow {
  double theta = 0.0;
  TailEstimate lhs;   ///< Pr(||X||_(k) >= theta)
  TailEstimate rhs;   ///< Pr(||X + Y||_(k) >= 2 theta / 3)
  bool pass = false;  ///< lhs.ci_low <= 3 rhs.ci_high
};

struct SymmetrizationReport {
  std::size_t k = 1;
  std::size_t trials = 0;
  std::vector<SymmetrizationRow> rows;
  bool valid = true;
  bool all_pass() const;
};

SymmetrizationReport check_symmetrization(const EnsembleSampler& sampler, std::size_t k,
                                          std::span<const double> theta_grid, std::size_t trials,
                                          const SeedPolicy& seeds, std::size_t threads = 1);

/// Finite distribution over scalar values.
struct DiscreteLaw {
  std::vector<double> values;
  std::vector<double> probabilities;
  void validate() const;
};

struct ExactSymmetrization {
  double theta = 0.0;
  double lhs = 0.0;       ///< Pr(|X| >= theta)
  double rhs = 0.0;       ///< 3 Pr(|X + Y| >= 2 theta / 3)
  bool holds() const { return lhs <= rhs + 1e-15; }
};

/// Exact evaluation for a zero-mean scalar law by enumerating (X, Y).
ExactSymmetrization symmetrization_exact(const DiscreteLaw& law, double theta);

// ---------------------------------------------------------------- Paley-Zygmund

struct PaleyZygmundReport {
  std::size_t draws = 0;
  double mean = 0.0;
  double mean_se = 0.0;
  bool mean_ok = false;      ///< |mean| <= 3 standard errors
  double abs_mean = 0.0;     ///< E|x|
  double second_moment = 0.0;
  double rhs = 0.0;          ///< (E|x|)^2 / (4 E x^2)
  TailEstimate nonnegative;  ///< Pr(x >= 0)
  bool pass = false;         ///< mean_ok and nonnegative.ci_high >= rhs
};

PaleyZygmundReport check_paley_zygmund(std::span<const double> samples);

struct TensorPaleyZygmundReport {
  PaleyZygmundReport functional;  ///< x = Re <W, X> for the norming functional W
  double reference_norm = 0.0;    ///< ||A||_(k)
  TailEstimate norm_increase;     ///< Pr(||A + X||_(k) >= ||A||_(k))
  bool pass = false;              ///< functional.pass and norm_increase.ci_high >= functional.rhs
};

/// Norming functional of ||.||_(k) at A: W = sum_{i<=k} u_i v_i^H.
DenseTensor norming_functional(const DenseTensor& a, std::size_t k);

TensorPaleyZygmundReport check_paley_zygmund_tensor(const DenseTensor& a, std::size_t k,
                                                    const EnsembleSampler& sampler,
                                                    std::size_t trials, const SeedPolicy& seeds,
                                                    std::size_t threads = 1);

// ---------------------------------------------------------------- Bernoulli chaos

/// One coefficient tensor attached to the product of signs at `indices`
/// (pairwise distinct, each < n).
struct ChaosTerm {
  std::vector<std::size_t> indices;
  DenseTensor coefficient;
};

struct ChaosRow {
  double b_norm = 0.0;
  TailEstimate estimate;        ///< Pr(||B + chaos||_(k) >= ||B||_(k))
  std::optional<double> exact;  ///< by enumeration of all sign patterns
};

struct ChaosReport {
  std::size_t n = 0;
  std::size_t k = 1;
  std::vector<ChaosRow> rows;
  double c_hat = 1.0;                 ///< min over B of the estimate
  double c_hat_ci_low = 1.0;
  std::optional<double> c_hat_exact;  ///< min over B of the exact values
};

/// Largest n for which the 2^n enumeration is attempted.
inline constexpr std::size_t kMaxChaosEnumeration = 20;

double chaos_probability_exact(std::span<const ChaosTerm> terms, std::size_t n,
                               const DenseTensor& b, std::size_t k);

ChaosReport check_bernoulli_chaos(std::span<const ChaosTerm> terms, std::size_t n,
                                  std::span<const DenseTensor> b_instances, std::size_t k,
                                  std::size_t trials, const SeedPolicy& seeds,
                                  std::size_t threads = 1);

// ---------------------------------------------------------------- decoupling

/// f_{i_1..i_m}(args): `indices` are the block indices, `args` the tensors.
using DecouplingKernel =
    std::function<DenseTensor(std::span<const std::size_t> indices, std::span<const DenseTensor> args)>;

/// Kernel by name: "product" (ordered product of the arguments) or "zero".
DecouplingKernel named_kernel(const std::string& name, const TensorShape& shape);

/// All ordered tuples of m pairwise distinct indices in [0, n), lexicographic.
std::vector<std::vector<std::size_t>> distinct_tuples(std::size_t n, std::size_t m);

/// ||sum f(X^(c_1)_{i_1}, ..., X^(c_m)_{i_m})||_(k); copies[c] is sequence c.
/// With one sequence every argument comes from copies[0].
double decoupling_statistic(const DecouplingKernel& kernel, std::size_t m,
                            const std::vector<std::vector<DenseTensor>>& copies, std::size_t k);

struct DecouplingReport {
  std::size_t m_order = 2;
  std::size_t n = 0;
  std::size_t k = 1;
  std::size_t trials = 0;  ///< 0 for exact enumeration
  std::vector<double> theta_grid;
  std::vector<TailEstimate> lhs;  ///< Pr(coupled > theta)
  std::vector<TailEstimate> rhs;  ///< Pr(decoupled > theta)
  /// Smallest D in [1, d_max] with lhs(theta) <= D Pr(D decoupled > theta) on the grid.
  std::optional<double> d_hat;
  std::optional<double> d_hat_lenient;       ///< lhs.ci_low vs rhs.ci_high
  std::optional<double> d_hat_conservative;  ///< lhs.ci_high vs rhs.ci_low
  std::optional<double> c_m;
  std::optional<double> e_m;
  bool uninformative = false;  ///< every tail on the grid is 0 or 1
  bool exact = false;
  bool valid = true;
  std::string label = "empirical lower-evidence estimate";
};

inline constexpr double kDecouplingDMax = 1e4;

DecouplingReport estimate_decoupling(const EnsembleSampler& sampler, const DecouplingKernel& kernel,
                                     std::size_t m_order, std::size_t k,
                                     std::span<const double> theta_grid, std::size_t trials,
                                     const SeedPolicy& seeds, std::size_t threads = 1);

/// Exact version for X_i drawn uniformly from a finite support of tensors;
/// enumerates support^n (coupled) and support^(n m) (decoupled).
DecouplingReport estimate_decoupling_exact(std::span<const DenseTensor> support, std::size_t n,
                                           const DecouplingKernel& kernel, std::size_t m_order,
                                           std::size_t k, std::span<const double> theta_grid);

// ---------------------------------------------------------------- dominance

enum class DominanceMode { hanson_wright, chernoff };
/// bound_only marks rows of a run without the evaluation stream.
enum class Verdict { pass, violation, refused, bound_only };

std::string to_string(DominanceMode m);
std::string to_string(Verdict v);
DominanceMode parse_mode(const std::string& s);

struct BlockMatrixSpec {
  /// Commuting generator: A_ij = U diag(alpha) U^H with the ensemble's
  /// shared U, alpha uniform in the diagonal or off-diagonal range.
  double diag_low = 0.5;
  double diag_high = 1.0;
  double off_low = 0.1;
  double off_high = 0.5;
  /// When non-empty, the n x n blocks in row-major order (overrides the generator).
  std::vector<DenseTensor> fixtures;
};

/// Chernoff mode always zeroes the off-diagonal blocks.
BlockMatrix build_block_matrix(const BlockMatrixSpec& spec, const EnsembleSampler& sampler,
                               bool diagonal_only);

struct DominanceConfig {
  DominanceMode mode = DominanceMode::hanson_wright;
  EnsembleSpec ensemble;
  BlockMatrixSpec block_matrix;
  std::vector<double> poly{0.0, 1.0};  ///< a_0..a_m of f (g in chernoff mode)
  double s = 1.0;                      ///< outer power of g (chernoff mode)
  std::size_t k = 1;
  std::vector<double> Theta_grid;
  ThetaSplitPolicy split = ThetaSplitPolicy::equal;
  std::size_t trials = 10000;
  std::size_t pilot_trials = 2000;
  TSearch search;
  double c_cher = 1.0;
  double d2 = 8.0;
  std::uint64_t master_seed = 0;
  std::optional<std::uint64_t> pilot_seed;
  std::optional<double> R_d;
  std::optional<double> R_c;
  std::optional<std::vector<std::vector<double>>> K;
  double exp_check_t_max = 10.0;
  std::size_t threads = 1;

  void validate() const;
};

struct DominanceRow {
  double Theta = 0.0;
  TailEstimate tail;
  std::optional<BoundValue> bound;
  std::vector<double> theta_split;
  Verdict verdict = Verdict::refused;
  std::string reason;
};

struct DominanceReport {
  DominanceMode mode = DominanceMode::hanson_wright;
  std::vector<DominanceRow> rows;
  AssumptionReport assumptions;
  std::uint64_t master_seed = 0;
  std::uint64_t pilot_seed = 0;
  std::size_t trials = 0;
  std::size_t pilot_trials = 0;
  std::size_t excluded = 0;
  bool valid = true;
  bool evaluated = true;
  double R_d = 0.0;
  double R_c = 0.0;
  std::vector<std::vector<double>> K;
  std::vector<SummandStats> diag_stats;
  std::vector<std::vector<SummandStats>> coupling_stats;
  std::size_t mean_estimate_trials = 0;

  /// violation if any row violates, else refused if any row is refused.
  Verdict overall() const;
};

/// With evaluate = false only the pilot stream and the bounds are computed.
DominanceReport run_dominance_experiment(const DominanceConfig& config, bool evaluate = true);

}  // namespace hwt
