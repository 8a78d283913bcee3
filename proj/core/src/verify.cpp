#include "hwt/verify.hpp"

#include <boost/math/special_functions/beta.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "hwt/error.hpp"
#include "hwt/spectral.hpp"

namespace hwt {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
// Relative slack for events of the form ||.|| >= reference, where equality
// holds exactly in real arithmetic on a set of positive probability.
constexpr double kTieSlack = 1e-12;

bool at_least(double value, double reference) {
  return value >= reference - kTieSlack * std::abs(reference);
}

std::size_t finite_count(std::span<const double> v) {
  return static_cast<std::size_t>(std::count_if(v.begin(), v.end(), [](double x) { return std::isfinite(x); }));
}

bool excluded_ok(std::size_t excluded, std::size_t total) {
  return static_cast<double>(excluded) <= kMaxExcludedFraction * static_cast<double>(total);
}

}  // namespace

std::pair<double, double> clopper_pearson(std::size_t hits, std::size_t trials, double confidence) {
  if (trials == 0) throw DomainError("clopper_pearson: trials must be >= 1");
  if (hits > trials) throw DomainError("clopper_pearson: hits exceed trials");
  if (!(confidence > 0.0 && confidence < 1.0))
    throw DomainError("clopper_pearson: confidence must lie in (0, 1)");
  const double alpha = 1.0 - confidence;
  const double h = static_cast<double>(hits);
  const double n = static_cast<double>(trials);
  const double lo = hits == 0 ? 0.0 : boost::math::ibeta_inv(h, n - h + 1.0, alpha / 2.0);
  const double hi = hits == trials ? 1.0 : boost::math::ibeta_inv(h + 1.0, n - h, 1.0 - alpha / 2.0);
  return {lo, hi};
}

TailEstimate make_tail_estimate(double theta, std::size_t hits, std::size_t trials) {
  TailEstimate e;
  e.theta = theta;
  e.trials = trials;
  e.hits = hits;
  if (trials == 0) return e;
  e.p_hat = static_cast<double>(hits) / static_cast<double>(trials);
  std::tie(e.ci_low, e.ci_high) = clopper_pearson(hits, trials);
  e.ci_low = std::min(e.ci_low, e.p_hat);
  e.ci_high = std::max(e.ci_high, e.p_hat);
  return e;
}

TailRun tail_from_values(std::span<const double> values, std::span<const double> theta_grid,
                         bool strict) {
  TailRun run;
  const std::size_t valid = finite_count(values);
  run.excluded = values.size() - valid;
  run.valid = valid > 0 && excluded_ok(run.excluded, values.size());
  for (double theta : theta_grid) {
    std::size_t hits = 0;
    for (double v : values)
      if (std::isfinite(v) && (strict ? v > theta : v >= theta)) ++hits;
    run.rows.push_back(make_tail_estimate(theta, hits, valid));
  }
  return run;
}

TailRun empirical_tail(const std::function<double(Rng&)>& statistic,
                       std::span<const double> theta_grid, std::size_t trials,
                       const SeedPolicy& seeds, std::uint64_t stream_id, std::size_t threads) {
  if (trials < 100) throw DomainError("empirical_tail: trials must be >= 100");
  const auto values = parallel_map<double>(trials, threads, [&](std::size_t i) {
    Rng rng = seeds.stream(stream_id, i);
    return statistic(rng);
  });
  return tail_from_values(values, theta_grid);
}

// ---------------------------------------------------------------- symmetrization

bool SymmetrizationReport::all_pass() const {
  return valid && std::all_of(rows.begin(), rows.end(), [](const auto& r) { return r.pass; });
}

SymmetrizationReport check_symmetrization(const EnsembleSampler& sampler, std::size_t k,
                                          std::span<const double> theta_grid, std::size_t trials,
                                          const SeedPolicy& seeds, std::size_t threads) {
  if (!sampler.spec().mean_zero) throw DomainError("check_symmetrization: ensemble must be mean-zero");
  if (trials < 100) throw DomainError("check_symmetrization: trials must be >= 100");
  struct Draw {
    double x = kNaN;
    double sum = kNaN;
  };
  const auto draws = parallel_map<Draw>(trials, threads, [&](std::size_t i) {
    Rng rng = seeds.stream(streams::kSymmetrization, i);
    const DenseTensor x = sampler.sample(rng);
    const DenseTensor y = sampler.sample(rng);
    return Draw{ky_fan_norm(x, k), ky_fan_norm(x + y, k)};
  });
  std::vector<double> xs(trials);
  std::vector<double> sums(trials);
  for (std::size_t i = 0; i < trials; ++i) {
    xs[i] = draws[i].x;
    sums[i] = draws[i].sum;
  }
  std::vector<double> rhs_grid;
  for (double t : theta_grid) rhs_grid.push_back(2.0 * t / 3.0);
  const TailRun lhs = tail_from_values(xs, theta_grid);
  const TailRun rhs = tail_from_values(sums, rhs_grid);

  SymmetrizationReport rep;
  rep.k = k;
  rep.trials = trials;
  rep.valid = lhs.valid && rhs.valid;
  for (std::size_t g = 0; g < theta_grid.size(); ++g) {
    SymmetrizationRow row{theta_grid[g], lhs.rows[g], rhs.rows[g], false};
    row.pass = row.lhs.ci_low <= 3.0 * row.rhs.ci_high;
    rep.rows.push_back(row);
  }
  return rep;
}

void DiscreteLaw::validate() const {
  if (values.empty() || values.size() != probabilities.size())
    throw DomainError("discrete law: values and probabilities must be non-empty and aligned");
  double total = 0.0;
  for (double p : probabilities) {
    if (!(p >= 0.0)) throw DomainError("discrete law: probabilities must be >= 0");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-12) throw DomainError("discrete law: probabilities must sum to 1");
}

ExactSymmetrization symmetrization_exact(const DiscreteLaw& law, double theta) {
  law.validate();
  if (!(theta > 0.0)) throw DomainError("symmetrization_exact: theta must be > 0");
  double mean = 0.0;
  for (std::size_t i = 0; i < law.values.size(); ++i) mean += law.values[i] * law.probabilities[i];
  if (std::abs(mean) > 1e-12) throw DomainError("symmetrization_exact: law must be mean-zero");

  ExactSymmetrization out;
  out.theta = theta;
  double pair_tail = 0.0;
  for (std::size_t i = 0; i < law.values.size(); ++i) {
    if (std::abs(law.values[i]) >= theta) out.lhs += law.probabilities[i];
    for (std::size_t j = 0; j < law.values.size(); ++j)
      if (std::abs(law.values[i] + law.values[j]) >= 2.0 * theta / 3.0)
        pair_tail += law.probabilities[i] * law.probabilities[j];
  }
  out.rhs = 3.0 * pair_tail;
  return out;
}

// ---------------------------------------------------------------- Paley-Zygmund

PaleyZygmundReport check_paley_zygmund(std::span<const double> samples) {
  if (samples.size() < 2) throw DomainError("check_paley_zygmund: need at least two draws");
  for (double x : samples)
    if (!std::isfinite(x)) throw DomainError("check_paley_zygmund: non-finite draw");
  PaleyZygmundReport rep;
  const double n = static_cast<double>(samples.size());
  rep.draws = samples.size();
  rep.mean = std::accumulate(samples.begin(), samples.end(), 0.0) / n;
  double ss = 0.0;
  std::size_t nonneg = 0;
  for (double x : samples) {
    ss += (x - rep.mean) * (x - rep.mean);
    rep.abs_mean += std::abs(x);
    rep.second_moment += x * x;
    if (x >= 0.0) ++nonneg;
  }
  rep.abs_mean /= n;
  rep.second_moment /= n;
  rep.mean_se = std::sqrt(ss / (n - 1.0) / n);
  rep.mean_ok = std::abs(rep.mean) <= 3.0 * rep.mean_se;
  rep.rhs = rep.second_moment > 0.0 ? rep.abs_mean * rep.abs_mean / (4.0 * rep.second_moment) : 0.0;
  rep.nonnegative = make_tail_estimate(0.0, nonneg, samples.size());
  rep.pass = rep.mean_ok && rep.nonnegative.ci_high >= rep.rhs;
  return rep;
}

DenseTensor norming_functional(const DenseTensor& a, std::size_t k) {
  const SpectralDecomposition d = svd(a);
  if (k < 1 || k > d.sigma.size()) throw DomainError("norming_functional: k out of range");
  const std::size_t rows = a.shape().row_size();
  const std::size_t cols = a.shape().col_size();
  std::vector<Complex> w(rows * cols, Complex(0.0, 0.0));
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < cols; ++c) w[r * cols + c] += d.left(r, i) * std::conj(d.right(c, i));
  return DenseTensor(a.shape(), std::move(w));
}

TensorPaleyZygmundReport check_paley_zygmund_tensor(const DenseTensor& a, std::size_t k,
                                                    const EnsembleSampler& sampler,
                                                    std::size_t trials, const SeedPolicy& seeds,
                                                    std::size_t threads) {
  if (!sampler.spec().mean_zero) throw DomainError("check_paley_zygmund_tensor: ensemble must be mean-zero");
  if (a.shape() != sampler.spec().base_shape)
    throw ShapeError("check_paley_zygmund_tensor: reference tensor shape differs from ensemble");
  TensorPaleyZygmundReport rep;
  rep.reference_norm = ky_fan_norm(a, k);
  if (!(rep.reference_norm > 0.0)) throw DomainError("check_paley_zygmund_tensor: ||A||_(k) must be > 0");
  const DenseTensor w = norming_functional(a, k);

  struct Draw {
    double f = kNaN;
    bool increase = false;
  };
  const auto draws = parallel_map<Draw>(trials, threads, [&](std::size_t i) {
    Rng rng = seeds.stream(streams::kPaleyZygmund, i);
    const DenseTensor x = sampler.sample(rng);
    return Draw{inner_product(w, x).real(), at_least(ky_fan_norm(a + x, k), rep.reference_norm)};
  });
  std::vector<double> fs;
  std::size_t hits = 0;
  for (const auto& d : draws) {
    fs.push_back(d.f);
    if (d.increase) ++hits;
  }
  rep.functional = check_paley_zygmund(fs);
  rep.norm_increase = make_tail_estimate(rep.reference_norm, hits, trials);
  rep.pass = rep.functional.pass && rep.norm_increase.ci_high >= rep.functional.rhs;
  return rep;
}

// ---------------------------------------------------------------- Bernoulli chaos

namespace {

void validate_chaos(std::span<const ChaosTerm> terms, std::size_t n, const TensorShape& shape) {
  if (n < 1) throw DomainError("chaos: n must be >= 1");
  for (const auto& t : terms) {
    if (t.indices.empty()) throw DomainError("chaos: every term needs at least one index");
    if (t.coefficient.shape() != shape) throw ShapeError("chaos: coefficient shape differs from B");
    for (std::size_t a = 0; a < t.indices.size(); ++a) {
      if (t.indices[a] >= n) throw DomainError("chaos: index out of range");
      for (std::size_t b = a + 1; b < t.indices.size(); ++b)
        if (t.indices[a] == t.indices[b]) throw DomainError("chaos: indices must be pairwise distinct");
    }
  }
}

DenseTensor chaos_value(std::span<const ChaosTerm> terms, const DenseTensor& b,
                        std::span<const int> signs) {
  DenseTensor acc = b;
  for (const auto& t : terms) {
    int sign = 1;
    for (std::size_t idx : t.indices) sign *= signs[idx];
    acc = acc + static_cast<double>(sign) * t.coefficient;
  }
  return acc;
}

}  // namespace

double chaos_probability_exact(std::span<const ChaosTerm> terms, std::size_t n,
                               const DenseTensor& b, std::size_t k) {
  validate_chaos(terms, n, b.shape());
  if (n > kMaxChaosEnumeration) throw DomainError("chaos_probability_exact: n too large to enumerate");
  const double ref = ky_fan_norm(b, k);
  const std::uint64_t patterns = std::uint64_t{1} << n;
  std::uint64_t hits = 0;
  std::vector<int> signs(n);
  for (std::uint64_t mask = 0; mask < patterns; ++mask) {
    for (std::size_t i = 0; i < n; ++i) signs[i] = (mask >> i) & 1U ? -1 : 1;
    if (at_least(ky_fan_norm(chaos_value(terms, b, signs), k), ref)) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(patterns);
}

ChaosReport check_bernoulli_chaos(std::span<const ChaosTerm> terms, std::size_t n,
                                  std::span<const DenseTensor> b_instances, std::size_t k,
                                  std::size_t trials, const SeedPolicy& seeds,
                                  std::size_t threads) {
  if (b_instances.empty()) throw DomainError("check_bernoulli_chaos: need at least one B");
  if (trials < 1) throw DomainError("check_bernoulli_chaos: trials must be >= 1");
  for (const auto& b : b_instances) {
    if (!is_hermitian(b)) throw NotHermitianError("check_bernoulli_chaos: B must be Hermitian", hermitian_residual(b));
    validate_chaos(terms, n, b.shape());
  }
  for (const auto& t : terms)
    if (!is_hermitian(t.coefficient))
      throw NotHermitianError("check_bernoulli_chaos: coefficients must be Hermitian",
                              hermitian_residual(t.coefficient));

  ChaosReport rep;
  rep.n = n;
  rep.k = k;
  const std::size_t nb = b_instances.size();
  std::vector<double> refs;
  for (const auto& b : b_instances) refs.push_back(ky_fan_norm(b, k));

  // Every B instance sees the same sign draws.
  const auto hit_rows = parallel_map<std::vector<char>>(trials, threads, [&](std::size_t i) {
    Rng rng = seeds.stream(streams::kChaos, i);
    const auto signs = sample_symmetric_bernoulli(n, rng);
    std::vector<char> hit(nb);
    for (std::size_t q = 0; q < nb; ++q)
      hit[q] = at_least(ky_fan_norm(chaos_value(terms, b_instances[q], signs), k), refs[q]) ? 1 : 0;
    return hit;
  });

  rep.c_hat = 1.0;
  rep.c_hat_ci_low = 1.0;
  const bool enumerate = n <= kMaxChaosEnumeration;
  for (std::size_t q = 0; q < nb; ++q) {
    std::size_t hits = 0;
    for (const auto& row : hit_rows) hits += static_cast<std::size_t>(row[q]);
    ChaosRow row;
    row.b_norm = refs[q];
    row.estimate = make_tail_estimate(refs[q], hits, trials);
    if (enumerate) row.exact = chaos_probability_exact(terms, n, b_instances[q], k);
    rep.c_hat = std::min(rep.c_hat, row.estimate.p_hat);
    rep.c_hat_ci_low = std::min(rep.c_hat_ci_low, row.estimate.ci_low);
    if (row.exact) rep.c_hat_exact = std::min(rep.c_hat_exact.value_or(1.0), *row.exact);
    rep.rows.push_back(row);
  }
  return rep;
}

// ---------------------------------------------------------------- decoupling

DecouplingKernel named_kernel(const std::string& name, const TensorShape& shape) {
  if (name == "product")
    return [](std::span<const std::size_t>, std::span<const DenseTensor> args) {
      DenseTensor acc = args[0];
      for (std::size_t a = 1; a < args.size(); ++a) acc = einstein_product(acc, args[a]);
      return acc;
    };
  if (name == "zero")
    return [shape](std::span<const std::size_t>, std::span<const DenseTensor>) { return zeros(shape); };
  throw DomainError("unknown decoupling kernel '" + name + "'");
}

std::vector<std::vector<std::size_t>> distinct_tuples(std::size_t n, std::size_t m) {
  std::vector<std::vector<std::size_t>> out;
  std::vector<std::size_t> cur;
  std::vector<char> used(n, 0);
  std::function<void()> rec = [&] {
    if (cur.size() == m) {
      out.push_back(cur);
      return;
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (used[i]) continue;
      used[i] = 1;
      cur.push_back(i);
      rec();
      cur.pop_back();
      used[i] = 0;
    }
  };
  if (m >= 1 && m <= n) rec();
  return out;
}

double decoupling_statistic(const DecouplingKernel& kernel, std::size_t m,
                            const std::vector<std::vector<DenseTensor>>& copies, std::size_t k) {
  if (copies.empty()) throw DomainError("decoupling_statistic: need at least one sequence");
  if (copies.size() != 1 && copies.size() != m)
    throw DomainError("decoupling_statistic: need one sequence or m copies");
  const std::size_t n = copies.front().size();
  const auto tuples = distinct_tuples(n, m);
  if (tuples.empty()) throw DomainError("decoupling_statistic: need n >= m");
  std::vector<DenseTensor> args;
  std::optional<DenseTensor> acc;
  for (const auto& tuple : tuples) {
    args.clear();
    for (std::size_t c = 0; c < m; ++c) args.push_back(copies[copies.size() == 1 ? 0 : c][tuple[c]]);
    DenseTensor term = kernel(tuple, args);
    acc = acc ? *acc + term : term;
  }
  return ky_fan_norm(*acc, k);
}

namespace {

enum class DVariant { point, lenient, conservative };

// Right-hand tail Pr(R > x) with its interval, from equally weighted outcomes.
class RhsTail {
 public:
  RhsTail(std::vector<double> values, bool exact) : sorted_(std::move(values)), exact_(exact) {
    sorted_.erase(std::remove_if(sorted_.begin(), sorted_.end(), [](double v) { return !std::isfinite(v); }),
                  sorted_.end());
    std::sort(sorted_.begin(), sorted_.end());
  }

  double prob(double x, DVariant variant) const {
    const std::size_t n = sorted_.size();
    const auto count = static_cast<std::size_t>(sorted_.end() - std::upper_bound(sorted_.begin(), sorted_.end(), x));
    if (exact_ || variant == DVariant::point) return static_cast<double>(count) / static_cast<double>(n);
    const auto [lo, hi] = clopper_pearson(count, n);
    return variant == DVariant::lenient ? hi : lo;
  }

 private:
  std::vector<double> sorted_;
  bool exact_;
};

double lhs_prob(const TailEstimate& e, DVariant variant) {
  switch (variant) {
    case DVariant::lenient: return e.ci_low;
    case DVariant::conservative: return e.ci_high;
    default: return e.p_hat;
  }
}

std::optional<double> smallest_d(const std::vector<TailEstimate>& lhs, const RhsTail& rhs,
                                 DVariant variant) {
  auto holds = [&](double d) {
    for (const auto& row : lhs)
      if (lhs_prob(row, variant) > d * rhs.prob(row.theta / d, variant)) return false;
    return true;
  };
  if (holds(1.0)) return 1.0;
  if (!holds(kDecouplingDMax)) return std::nullopt;
  double lo = 1.0;
  double hi = kDecouplingDMax;
  for (int iter = 0; iter < 200 && hi - lo > 1e-14 * hi; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (holds(mid))
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

void finish_decoupling(DecouplingReport& rep, const std::vector<double>& lhs_values,
                       const std::vector<double>& rhs_values) {
  const TailRun lhs = tail_from_values(lhs_values, rep.theta_grid, true);
  const TailRun rhs = tail_from_values(rhs_values, rep.theta_grid, true);
  rep.lhs = lhs.rows;
  rep.rhs = rhs.rows;
  rep.valid = lhs.valid && rhs.valid;
  if (rep.exact)
    for (auto* rows : {&rep.lhs, &rep.rhs})
      for (auto& e : *rows) e.ci_low = e.ci_high = e.p_hat;

  rep.uninformative = true;
  for (const auto* rows : {&rep.lhs, &rep.rhs})
    for (const auto& e : *rows)
      if (e.p_hat > 0.0 && e.p_hat < 1.0) rep.uninformative = false;

  const RhsTail tail(rhs_values, rep.exact);
  rep.d_hat = smallest_d(rep.lhs, tail, DVariant::point);
  rep.d_hat_lenient = rep.exact ? rep.d_hat : smallest_d(rep.lhs, tail, DVariant::lenient);
  rep.d_hat_conservative = rep.exact ? rep.d_hat : smallest_d(rep.lhs, tail, DVariant::conservative);
}

void check_decoupling_args(std::size_t m_order, std::size_t n, std::span<const double> theta_grid) {
  if (m_order != 2 && m_order != 3) throw DomainError("estimate_decoupling: m must be 2 or 3");
  if (n < m_order) throw DomainError("estimate_decoupling: need n >= m");
  if (theta_grid.empty()) throw DomainError("estimate_decoupling: theta grid is empty");
  for (double t : theta_grid)
    if (!(t > 0.0)) throw DomainError("estimate_decoupling: theta must be > 0");
}

}  // namespace

DecouplingReport estimate_decoupling(const EnsembleSampler& sampler, const DecouplingKernel& kernel,
                                     std::size_t m_order, std::size_t k,
                                     std::span<const double> theta_grid, std::size_t trials,
                                     const SeedPolicy& seeds, std::size_t threads) {
  const std::size_t n = sampler.spec().n;
  check_decoupling_args(m_order, n, theta_grid);
  if (trials < 100) throw DomainError("estimate_decoupling: trials must be >= 100");

  DecouplingReport rep;
  rep.m_order = m_order;
  rep.n = n;
  rep.k = k;
  rep.trials = trials;
  rep.theta_grid.assign(theta_grid.begin(), theta_grid.end());

  struct Draw {
    double lhs = kNaN;
    double rhs = kNaN;
  };
  const auto draws = parallel_map<Draw>(trials, threads, [&](std::size_t i) {
    Rng rng = seeds.stream(streams::kDecouplingLhs, i);
    const std::vector<std::vector<DenseTensor>> one{sampler.sample_sequence(rng)};
    const auto copies = independent_copies(sampler, m_order, seeds, i);
    return Draw{decoupling_statistic(kernel, m_order, one, k),
                decoupling_statistic(kernel, m_order, copies, k)};
  });
  std::vector<double> lhs(trials);
  std::vector<double> rhs(trials);
  for (std::size_t i = 0; i < trials; ++i) {
    lhs[i] = draws[i].lhs;
    rhs[i] = draws[i].rhs;
  }
  finish_decoupling(rep, lhs, rhs);
  return rep;
}

DecouplingReport estimate_decoupling_exact(std::span<const DenseTensor> support, std::size_t n,
                                           const DecouplingKernel& kernel, std::size_t m_order,
                                           std::size_t k, std::span<const double> theta_grid) {
  check_decoupling_args(m_order, n, theta_grid);
  if (support.empty()) throw DomainError("estimate_decoupling_exact: support is empty");
  const std::size_t s = support.size();
  const double outcomes = std::pow(static_cast<double>(s), static_cast<double>(n * m_order));
  if (outcomes > 1e6) throw DomainError("estimate_decoupling_exact: too many outcomes to enumerate");

  // Enumerates every assignment of `slots` support indices in odometer order.
  auto enumerate = [&](std::size_t slots, const std::function<void(const std::vector<std::size_t>&)>& visit) {
    std::vector<std::size_t> digits(slots, 0);
    while (true) {
      visit(digits);
      std::size_t p = 0;
      while (p < slots && ++digits[p] == s) digits[p++] = 0;
      if (p == slots) break;
    }
  };

  std::vector<double> lhs;
  enumerate(n, [&](const std::vector<std::size_t>& d) {
    std::vector<std::vector<DenseTensor>> seq(1);
    for (std::size_t i = 0; i < n; ++i) seq[0].push_back(support[d[i]]);
    lhs.push_back(decoupling_statistic(kernel, m_order, seq, k));
  });
  std::vector<double> rhs;
  enumerate(n * m_order, [&](const std::vector<std::size_t>& d) {
    std::vector<std::vector<DenseTensor>> copies(m_order);
    for (std::size_t c = 0; c < m_order; ++c)
      for (std::size_t i = 0; i < n; ++i) copies[c].push_back(support[d[c * n + i]]);
    rhs.push_back(decoupling_statistic(kernel, m_order, copies, k));
  });

  DecouplingReport rep;
  rep.m_order = m_order;
  rep.n = n;
  rep.k = k;
  rep.trials = 0;
  rep.exact = true;
  rep.label = "exact enumeration";
  rep.theta_grid.assign(theta_grid.begin(), theta_grid.end());
  finish_decoupling(rep, lhs, rhs);
  return rep;
}

// ---------------------------------------------------------------- dominance

std::string to_string(DominanceMode m) {
  return m == DominanceMode::hanson_wright ? "hanson_wright" : "chernoff";
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::pass: return "pass";
    case Verdict::violation: return "violation";
    case Verdict::bound_only: return "bound_only";
    default: return "refused";
  }
}

DominanceMode parse_mode(const std::string& s) {
  if (s == "hanson_wright") return DominanceMode::hanson_wright;
  if (s == "chernoff") return DominanceMode::chernoff;
  throw DomainError("unknown experiment mode '" + s + "'");
}

BlockMatrix build_block_matrix(const BlockMatrixSpec& spec, const EnsembleSampler& sampler,
                               bool diagonal_only) {
  const std::size_t n = sampler.spec().n;
  const TensorShape& shape = sampler.spec().base_shape;
  if (!spec.fixtures.empty()) {
    if (spec.fixtures.size() != n * n)
      throw ShapeError("block matrix fixtures: expected n*n = " + std::to_string(n * n) + " tensors");
    std::vector<DenseTensor> blocks = spec.fixtures;
    if (diagonal_only)
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
          if (i != j) blocks[i * n + j] = zeros(shape);
    return BlockMatrix(n, std::move(blocks));
  }
  if (spec.diag_low > spec.diag_high || spec.off_low > spec.off_high)
    throw DomainError("block matrix generator: ranges must satisfy low <= high");

  const DenseTensor& u = sampler.shared_unitary();
  const DenseTensor uh = conjugate_transpose(u);
  const std::size_t d = shape.row_size();
  const SeedPolicy seeds(sampler.spec().shared_unitary_seed);
  std::vector<DenseTensor> blocks(n * n, zeros(shape));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) {
      if (i != j && diagonal_only) continue;
      Rng rng = seeds.stream(streams::kBlockMatrix, 1 + i * n + j);
      const bool diag = i == j;
      std::uniform_real_distribution<double> dist(diag ? spec.diag_low : spec.off_low,
                                                  diag ? spec.diag_high : spec.off_high);
      std::vector<Complex> alpha(d * d, Complex(0.0, 0.0));
      for (std::size_t q = 0; q < d; ++q) alpha[q * d + q] = dist(rng);
      const DenseTensor a = einstein_product(einstein_product(u, DenseTensor(shape, std::move(alpha))), uh);
      // Exact Hermitian symmetrization removes rounding asymmetry.
      const DenseTensor h = 0.5 * (a + conjugate_transpose(a));
      blocks[i * n + j] = h;
      blocks[j * n + i] = h;
    }
  return BlockMatrix(n, std::move(blocks));
}

void DominanceConfig::validate() const {
  ensemble.validate();
  if (k < 1 || k > ensemble.base_shape.row_size())
    throw DomainError("config: k must lie in [1, " + std::to_string(ensemble.base_shape.row_size()) + "]");
  if (poly.size() < 2) throw DomainError("config: polynomial needs degree >= 1");
  for (double c : poly)
    if (!std::isfinite(c)) throw DomainError("config: polynomial coefficients must be finite");
  if (Theta_grid.empty()) throw DomainError("config: Theta grid is empty");
  for (double t : Theta_grid)
    if (!std::isfinite(t)) throw DomainError("config: Theta values must be finite");
  if (trials < 100) throw DomainError("config: trials must be >= 100");
  if (pilot_trials < 2) throw DomainError("config: pilot_trials must be >= 2");
  if (!(s >= 1.0)) throw DomainError("config: s must be >= 1");
  if (!(c_cher > 0.0) || !(d2 > 0.0)) throw DomainError("config: C_cher and D2 must be > 0");
  if (!(exp_check_t_max > 1e-3)) throw DomainError("config: exp_check_t_max must exceed 1e-3");
  if (!(search.t_min > 0.0) || search.grid_points < 2 || !(search.tol > 0.0))
    throw DomainError("config: invalid t search settings");
  if (threads < 1) throw DomainError("config: threads must be >= 1");
  if (R_d && !(*R_d > 0.0)) throw DomainError("config: R_d must be > 0");
  if (R_c && !(*R_c > 0.0)) throw DomainError("config: R_c must be > 0");
  if (K) {
    if (K->size() != ensemble.n) throw DomainError("config: K needs one row per block");
    for (const auto& row : *K) {
      if (row.size() != poly.size() - 1) throw DomainError("config: K rows need one entry per power j");
      for (double v : row)
        if (!(v > 0.0)) throw DomainError("config: K entries must be > 0");
    }
  }
  const bool bounded = ensemble.law != EigenLaw::gaussian && !ensemble.mean_zero;
  if (!bounded && (!R_d || !R_c || !K))
    throw DomainError("config: R_d, R_c and K must be declared for unbounded or centered ensembles");
}

Verdict DominanceReport::overall() const {
  bool refused = false;
  for (const auto& r : rows) {
    if (r.verdict == Verdict::violation) return Verdict::violation;
    if (r.verdict == Verdict::refused) refused = true;
  }
  return refused ? Verdict::refused : Verdict::pass;
}

namespace {

double poly_eval(std::span<const double> a, double x) {
  double acc = 0.0;
  for (std::size_t j = a.size(); j-- > 0;) acc = acc * x + a[j];
  return acc;
}

// Assumptions of the tensor Chernoff bound for summands D_1..D_n with
// g = poly^s: D_i >= 0, lambda_max(D_i) <= R and g(exp(tS)) >= exp(t g(S)).
AssumptionReport chernoff_assumptions(const std::vector<DenseTensor>& summands,
                                      std::span<const double> poly, double s, double R,
                                      std::span<const double> t_grid) {
  AssumptionReport rep;
  rep.samples = 1;
  rep.t_grid.assign(t_grid.begin(), t_grid.end());
  rep.pd_margin = std::numeric_limits<double>::infinity();
  rep.exp_domination_margin = std::numeric_limits<double>::infinity();
  auto note = [&](const std::string& text) {
    if (std::find(rep.notes.begin(), rep.notes.end(), text) == rep.notes.end()) rep.notes.push_back(text);
  };

  DenseTensor sum = zeros(summands.front().shape());
  for (const auto& x : summands) {
    sum = sum + x;
    if (!is_hermitian(x)) {
      rep.pd_ok = false;
      rep.pd_margin = std::min(rep.pd_margin, -hermitian_residual(x));
      note("summand is not Hermitian");
      continue;
    }
    const auto lambdas = herm_eigenvalues(x);
    rep.pd_margin = std::min(rep.pd_margin, lambdas.back());
    if (lambdas.back() < -kStructuralTol * (1.0 + x.max_abs())) {
      rep.pd_ok = false;
      note("summand is not positive semidefinite");
    }
    rep.R_d_observed = std::max(rep.R_d_observed, lambdas.front());
  }
  if (rep.R_d_observed > R * (1.0 + 1e-9)) {
    rep.R_d_ok = false;
    note("observed lambda_max of a summand exceeds declared R");
  }
  rep.hermitian_residual = hermitian_residual(sum);
  if (!is_hermitian(sum)) {
    rep.exp_domination_ok = false;
    note("summand total is not Hermitian; g(exp(tS)) >= exp(t g(S)) undefined");
    return rep;
  }
  auto g = [&](double x) { return std::pow(poly_eval(poly, x), s); };
  // Both sides are spectral functions of S, so the Loewner comparison reduces
  // to the eigenvalues of S.
  for (double lam : herm_eigenvalues(sum)) {
    for (double t : t_grid) {
      const double lhs = g(std::exp(t * lam));
      const double rhs = std::exp(t * g(lam));
      if (!std::isfinite(lhs) || !std::isfinite(rhs)) {
        rep.exp_domination_ok = false;
        note("g(exp(tS)) or exp(t g(S)) is not finite on the t grid");
        continue;
      }
      const double margin = (lhs - rhs) / (1.0 + std::max(std::abs(lhs), std::abs(rhs)));
      rep.exp_domination_margin = std::min(rep.exp_domination_margin, margin);
      if (margin < -1e-9) {
        rep.exp_domination_ok = false;
        note("g(exp(tS)) does not dominate exp(t g(S)) on the t grid");
      }
    }
  }
  return rep;
}

struct PilotDraw {
  std::vector<DenseTensor> diag;      // D_i
  std::vector<DenseTensor> coupling;  // A_il X_l, (i, l) lexicographic, i != l
  AssumptionReport report;
};

}  // namespace

DominanceReport run_dominance_experiment(const DominanceConfig& cfg, bool evaluate) {
  cfg.validate();
  const bool chernoff = cfg.mode == DominanceMode::chernoff;
  const EnsembleSampler sampler(cfg.ensemble);
  const BlockMatrix abar = build_block_matrix(cfg.block_matrix, sampler, chernoff);
  const std::size_t n = cfg.ensemble.n;
  const std::size_t m = cfg.poly.size() - 1;

  DominanceReport rep;
  rep.mode = cfg.mode;
  rep.master_seed = cfg.master_seed;
  rep.pilot_seed = cfg.pilot_seed.value_or(cfg.master_seed);
  rep.trials = evaluate ? cfg.trials : 0;
  rep.evaluated = evaluate;
  rep.pilot_trials = cfg.pilot_trials;
  rep.mean_estimate_trials = sampler.mean_estimate_trials();

  // Declared limits from the eigenvalue range unless given explicitly.
  const double h = std::max(std::abs(cfg.ensemble.eig_low), std::abs(cfg.ensemble.eig_high));
  double sig_diag = 0.0;
  double sig_off = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const double s1 = singular_values(abar(i, j)).front();
      (i == j ? sig_diag : sig_off) = std::max(i == j ? sig_diag : sig_off, s1);
    }
  rep.R_d = cfg.R_d.value_or(sig_diag * h * h);
  rep.R_c = cfg.R_c.value_or(sig_off > 0.0 ? sig_off * h : 1.0);
  if (cfg.K) {
    rep.K = *cfg.K;
  } else {
    rep.K.assign(n, std::vector<double>(m));
    for (auto& row : rep.K)
      for (std::size_t j = 1; j <= m; ++j)
        row[j - 1] = static_cast<double>(cfg.k) * std::pow(h, static_cast<double>(j));
  }

  BoundInputs base;
  base.n = n;
  base.a = cfg.poly;
  base.k = cfg.k;
  base.R_d = rep.R_d;
  base.R_c = rep.R_c;
  base.K = rep.K;
  base.c_cher = cfg.c_cher;
  base.d2 = cfg.d2;

  const std::vector<double> t_grid = default_t_grid(cfg.exp_check_t_max);
  std::vector<unsigned> j_range;
  for (std::size_t j = 1; j <= m; ++j)
    if (cfg.poly[j] != 0.0) j_range.push_back(static_cast<unsigned>(j));

  // Pilot stream: bound statistics and assumption checks.
  const SeedPolicy pilot_seeds(rep.pilot_seed);
  const auto pilot = parallel_map<PilotDraw>(cfg.pilot_trials, cfg.threads, [&](std::size_t t) {
    Rng rng = pilot_seeds.stream(streams::kPilot, t);
    const BlockVector x(sampler.sample_sequence(rng));
    PilotDraw d;
    for (std::size_t i = 0; i < n; ++i)
      d.diag.push_back(einstein_product(einstein_product(x[i], abar(i, i)), x[i]));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t l = 0; l < n; ++l)
        if (i != l) d.coupling.push_back(einstein_product(abar(i, l), x[l]));
    d.report = chernoff ? chernoff_assumptions(d.diag, cfg.poly, cfg.s, rep.R_d, t_grid)
                        : check_assumptions(x, abar, base, t_grid, j_range);
    return d;
  });
  for (const auto& d : pilot) rep.assumptions.merge(d.report);

  auto stats_of = [&](auto select) {
    std::vector<DenseTensor> samples;
    samples.reserve(pilot.size());
    double sigma = 0.0;
    for (const auto& d : pilot) {
      samples.push_back(select(d));
      sigma += singular_values(samples.back()).front();
    }
    return SummandStats{sigma / static_cast<double>(pilot.size()), xi_from_samples(samples).xi};
  };
  for (std::size_t i = 0; i < n; ++i)
    rep.diag_stats.push_back(stats_of([i](const PilotDraw& d) { return d.diag[i]; }));
  rep.coupling_stats.assign(n, std::vector<SummandStats>(n));
  for (std::size_t i = 0, slot = 0; i < n; ++i)
    for (std::size_t l = 0; l < n; ++l)
      if (i != l) {
        rep.coupling_stats[i][l] = stats_of([slot](const PilotDraw& d) { return d.coupling[slot]; });
        ++slot;
      }
  base.diag_stats = rep.diag_stats;
  base.coupling_stats = rep.coupling_stats;

  // Evaluation stream.
  const SeedPolicy seeds(cfg.master_seed);
  const auto values = parallel_map<double>(evaluate ? cfg.trials : 0, cfg.threads, [&](std::size_t t) {
    Rng rng = seeds.stream(streams::kEvaluation, t);
    const BlockVector x(sampler.sample_sequence(rng));
    try {
      const DenseTensor total = quadratic_form(x, abar).total;
      if (chernoff)
        return ky_fan_norm(spectral_function(total, [&](double lam) {
                             return std::pow(poly_eval(cfg.poly, lam), cfg.s);
                           }),
                           cfg.k);
      return ky_fan_norm(poly_apply(cfg.poly, total), cfg.k);
    } catch (const std::exception&) {
      return kNaN;
    }
  });
  const TailRun tails = tail_from_values(values, cfg.Theta_grid);
  rep.excluded = tails.excluded;
  rep.valid = !evaluate || tails.valid;

  const bool assumptions_ok = rep.assumptions.all_ok();
  for (std::size_t g = 0; g < cfg.Theta_grid.size(); ++g) {
    DominanceRow row;
    row.Theta = cfg.Theta_grid[g];
    row.tail = tails.rows[g];
    try {
      if (chernoff) {
        ChernoffParams p;
        p.s = cfg.s;
        p.a = cfg.poly;
        p.m = n;
        p.k = cfg.k;
        p.R = rep.R_d;
        p.c_cher = cfg.c_cher;
        p.stats = rep.diag_stats;
        row.bound = chernoff_bound(p, row.Theta, cfg.search);
      } else {
        row.theta_split = theta_split(row.Theta, cfg.poly, cfg.k, cfg.split);
        BoundInputs in = base;
        in.Theta = row.Theta;
        in.theta = row.theta_split;
        row.bound = hanson_wright_bound(in, cfg.search);
      }
    } catch (const DomainError& e) {
      row.verdict = Verdict::refused;
      row.reason = e.what();
      rep.rows.push_back(row);
      continue;
    }
    if (!evaluate) {
      row.verdict = assumptions_ok ? Verdict::bound_only : Verdict::refused;
      if (!assumptions_ok) row.reason = "assumption check failed on the pilot sample";
    } else if (!rep.valid) {
      row.verdict = Verdict::refused;
      row.reason = "too many non-finite trials";
    } else if (!assumptions_ok) {
      row.verdict = Verdict::refused;
      row.reason = "assumption check failed on the pilot sample";
    } else {
      row.verdict = row.tail.ci_low <= row.bound->clamped() ? Verdict::pass : Verdict::violation;
    }
    rep.rows.push_back(row);
  }
  return rep;
}

}  // namespace hwt
