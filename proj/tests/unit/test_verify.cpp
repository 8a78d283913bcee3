#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "hwt/error.hpp"
#include "hwt/spectral.hpp"
#include "hwt/verify.hpp"
#include "oracles.hpp"

using namespace hwt;

namespace {

DenseTensor scalar(double v) { return DenseTensor(TensorShape::square({1}), {Complex(v)}); }

EnsembleSpec commuting(std::size_t n, double lo, double hi, Dims dims = {2}) {
  EnsembleSpec s;
  s.base_shape = TensorShape::square(dims);
  s.n = n;
  s.family = EnsembleFamily::commuting;
  s.eig_low = lo;
  s.eig_high = hi;
  s.shared_unitary_seed = 7;
  return s;
}

}  // namespace

TEST(Tail, ConstantStatistic) {
  const double grid[] = {4.0, 6.0};
  const auto run = empirical_tail([](Rng&) { return 5.0; }, grid, 200, SeedPolicy(1));
  EXPECT_TRUE(run.valid);
  EXPECT_EQ(run.rows[0].p_hat, 1.0);
  EXPECT_EQ(run.rows[1].p_hat, 0.0);
  EXPECT_EQ(run.rows[1].ci_low, 0.0);
}

TEST(Tail, FairSignAtHalf) {
  const double grid[] = {0.5};
  const auto run = empirical_tail(
      [](Rng& r) { return std::bernoulli_distribution(0.5)(r) ? 1.0 : -1.0; }, grid, 100000, SeedPolicy(2));
  EXPECT_GE(run.rows[0].p_hat, 0.49);
  EXPECT_LE(run.rows[0].p_hat, 0.51);
  EXPECT_LE(run.rows[0].ci_low, run.rows[0].p_hat);
  EXPECT_GE(run.rows[0].ci_high, run.rows[0].p_hat);
}

TEST(Tail, RejectsTooFewTrials) {
  const double grid[] = {1.0};
  EXPECT_THROW(empirical_tail([](Rng&) { return 0.0; }, grid, 99, SeedPolicy(1)), DomainError);
}

TEST(Tail, NonFiniteDrawsExcluded) {
  std::vector<double> v(1000, 1.0);
  v[3] = std::nan("");
  const double grid[] = {0.5};
  const auto run = tail_from_values(v, grid);
  EXPECT_EQ(run.excluded, 1u);
  EXPECT_TRUE(run.valid);
  EXPECT_EQ(run.rows[0].trials, 999u);
  v[4] = std::nan("");
  EXPECT_FALSE(tail_from_values(v, grid).valid);
}

TEST(Tail, StrictVersusInclusive) {
  const std::vector<double> v{1.0, 2.0, 2.0, 3.0};
  const double grid[] = {2.0};
  EXPECT_EQ(tail_from_values(v, grid, false).rows[0].hits, 3u);
  EXPECT_EQ(tail_from_values(v, grid, true).rows[0].hits, 1u);
}

TEST(Tail, ThreadCountDoesNotChangeCounts) {
  const double grid[] = {0.2, 0.5, 0.8};
  auto stat = [](Rng& r) { return std::uniform_real_distribution<double>(0, 1)(r); };
  const auto a = empirical_tail(stat, grid, 5000, SeedPolicy(3), streams::kEvaluation, 1);
  const auto b = empirical_tail(stat, grid, 5000, SeedPolicy(3), streams::kEvaluation, 4);
  for (std::size_t g = 0; g < 3; ++g) EXPECT_EQ(a.rows[g].hits, b.rows[g].hits);
}

TEST(ClopperPearson, MatchesBisectionOracle) {
  for (auto [h, n] : {std::pair<std::size_t, std::size_t>{0, 50}, {3, 50}, {25, 50}, {50, 50}, {1234, 10000}}) {
    const auto [lo, hi] = clopper_pearson(h, n);
    const auto [olo, ohi] = oracle::clopper_pearson(h, n);
    EXPECT_NEAR(lo, olo, 1e-9);
    EXPECT_NEAR(hi, ohi, 1e-9);
  }
}

TEST(Symmetrization, ExactScalarSign) {
  const DiscreteLaw law{{-1.0, 1.0}, {0.5, 0.5}};
  const auto r = symmetrization_exact(law, 0.5);
  EXPECT_DOUBLE_EQ(r.lhs, 1.0);
  EXPECT_DOUBLE_EQ(r.rhs, 1.5);
  EXPECT_TRUE(r.holds());
  const auto z = symmetrization_exact(DiscreteLaw{{0.0}, {1.0}}, 0.5);
  EXPECT_EQ(z.lhs, 0.0);
  EXPECT_EQ(z.rhs, 0.0);
}

TEST(Symmetrization, GaussianHermitianEnsemblePasses) {
  EnsembleSpec spec;
  spec.base_shape = TensorShape::square({2, 2});
  spec.family = EnsembleFamily::generic_hermitian;
  spec.law = EigenLaw::gaussian;
  spec.eig_low = -1.0;
  spec.eig_high = 1.0;
  spec.mean_zero = true;
  spec.mean_estimate_trials = 500;
  const EnsembleSampler sampler(spec);
  std::vector<double> grid;
  for (int i = 1; i <= 10; ++i) grid.push_back(0.4 * i);
  const auto rep = check_symmetrization(sampler, 1, grid, 10000, SeedPolicy(4));
  EXPECT_TRUE(rep.valid);
  EXPECT_TRUE(rep.all_pass());
  for (std::size_t g = 1; g < rep.rows.size(); ++g)
    EXPECT_GE(rep.rows[g - 1].lhs.p_hat, rep.rows[g].lhs.p_hat);
}

TEST(Symmetrization, RequiresMeanZero) {
  const EnsembleSampler sampler(commuting(1, 0.1, 1.0));
  const double grid[] = {1.0};
  EXPECT_THROW(check_symmetrization(sampler, 1, grid, 1000, SeedPolicy(1)), DomainError);
}

TEST(PaleyZygmund, SymmetricSign) {
  std::vector<double> x(100000);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = i % 2 ? 1.0 : -1.0;
  const auto r = check_paley_zygmund(x);
  EXPECT_TRUE(r.mean_ok);
  EXPECT_DOUBLE_EQ(r.rhs, 0.25);
  EXPECT_NEAR(r.nonnegative.p_hat, 0.5, 1e-12);
  EXPECT_TRUE(r.pass);
}

TEST(PaleyZygmund, CenteredExponential) {
  std::mt19937_64 rng(5);
  std::exponential_distribution<double> e(1.0);
  std::vector<double> x(100000);
  for (auto& v : x) v = e(rng);
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= x.size();
  for (auto& v : x) v -= mean;
  const auto r = check_paley_zygmund(x);
  EXPECT_TRUE(r.mean_ok);
  EXPECT_TRUE(r.pass);
  // Pr(Exp(1) >= 1) = 1/e; (E|x|)^2/(4 Ex^2) = (2/e)^2/4 = 1/e^2
  EXPECT_NEAR(r.nonnegative.p_hat, std::exp(-1.0), 0.01);
  EXPECT_NEAR(r.rhs, std::exp(-2.0), 0.01);
}

TEST(PaleyZygmund, OffCenterSampleFails) {
  std::vector<double> x(1000, 1.0);
  x[0] = 2.0;
  EXPECT_FALSE(check_paley_zygmund(x).mean_ok);
  EXPECT_FALSE(check_paley_zygmund(x).pass);
}

TEST(PaleyZygmund, TensorFunctional) {
  const DenseTensor a(TensorShape::square({2}), {3.0, 0.0, 0.0, 1.0});
  const auto w = norming_functional(a, 1);
  EXPECT_NEAR(inner_product(w, a).real(), ky_fan_norm(a, 1), 1e-12);
  EXPECT_NEAR(ky_fan_norm(w, 1), 1.0, 1e-12);

  auto spec = commuting(1, 0.1, 1.0);
  spec.mean_zero = true;
  const auto rep = check_paley_zygmund_tensor(a, 1, EnsembleSampler(spec), 10000, SeedPolicy(6));
  EXPECT_TRUE(rep.pass);
  EXPECT_DOUBLE_EQ(rep.reference_norm, 3.0);
}

TEST(Chaos, ScalarExamples) {
  const std::vector<ChaosTerm> zero{{{0}, scalar(0.0)}};
  const DenseTensor b2[] = {scalar(2.0)};
  EXPECT_DOUBLE_EQ(chaos_probability_exact(zero, 1, b2[0], 1), 1.0);

  const std::vector<ChaosTerm> single{{{0}, scalar(1.0)}};
  EXPECT_DOUBLE_EQ(chaos_probability_exact(single, 1, scalar(0.0), 1), 1.0);

  const std::vector<ChaosTerm> two{{{0}, scalar(1.0)}, {{1}, scalar(1.0)}};
  // enumerate |2 + b1 + b2| >= 2 over four sign patterns
  int hits = 0;
  for (int s1 : {-1, 1})
    for (int s2 : {-1, 1}) hits += std::abs(2 + s1 + s2) >= 2;
  EXPECT_DOUBLE_EQ(chaos_probability_exact(two, 2, b2[0], 1), hits / 4.0);
  EXPECT_DOUBLE_EQ(hits / 4.0, 0.75);

  const auto rep = check_bernoulli_chaos(two, 2, b2, 1, 20000, SeedPolicy(7));
  ASSERT_TRUE(rep.c_hat_exact.has_value());
  EXPECT_DOUBLE_EQ(*rep.c_hat_exact, 0.75);
  EXPECT_LE(rep.rows[0].estimate.ci_low, 0.75);
  EXPECT_GE(rep.rows[0].estimate.ci_high, 0.75);
}

TEST(Chaos, SecondOrderTensorTerms) {
  std::mt19937_64 rng(8);
  std::vector<ChaosTerm> terms;
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = i + 1; j < 3; ++j) {
      const auto h = sample_hermitian(TensorShape::square({2}), rng);
      terms.push_back({{i, j}, h});
    }
  const DenseTensor bs[] = {identity({2}), sample_hermitian(TensorShape::square({2}), rng)};
  const auto rep = check_bernoulli_chaos(terms, 3, bs, 1, 5000, SeedPolicy(9));
  ASSERT_EQ(rep.rows.size(), 2u);
  ASSERT_TRUE(rep.c_hat_exact.has_value());
  EXPECT_GT(*rep.c_hat_exact, 0.0);
  EXPECT_LE(rep.c_hat, std::min(rep.rows[0].estimate.p_hat, rep.rows[1].estimate.p_hat));
}

TEST(Decoupling, DistinctTuples) {
  const auto t = distinct_tuples(3, 2);
  ASSERT_EQ(t.size(), 6u);
  EXPECT_EQ(t.front(), (std::vector<std::size_t>{0, 1}));
  EXPECT_EQ(t.back(), (std::vector<std::size_t>{2, 1}));
  EXPECT_EQ(distinct_tuples(3, 3).size(), 6u);
}

TEST(Decoupling, ScalarSixteenOutcomes) {
  const DenseTensor support[] = {scalar(-1.0), scalar(1.0)};
  const double grid[] = {0.5, 1.0, 1.5};
  const auto kernel = named_kernel("product", TensorShape::square({1}));
  const auto rep = estimate_decoupling_exact(support, 2, kernel, 2, 1, grid);
  EXPECT_TRUE(rep.exact);
  EXPECT_FALSE(rep.uninformative);

  // oracle: 4 coupled outcomes, 16 decoupled outcomes
  std::vector<double> lhs, rhs;
  for (int a : {-1, 1})
    for (int b : {-1, 1}) lhs.push_back(std::abs(2.0 * a * b));
  for (int a1 : {-1, 1})
    for (int a2 : {-1, 1})
      for (int b1 : {-1, 1})
        for (int b2 : {-1, 1}) rhs.push_back(std::abs(double(a1 * b2 + a2 * b1)));
  auto tail = [](const std::vector<double>& v, double x) {
    double c = 0;
    for (double s : v) c += s > x;
    return c / v.size();
  };
  auto holds = [&](double d) {
    for (double th : grid)
      if (tail(lhs, th) > d * tail(rhs, th / d)) return false;
    return true;
  };
  double lo = 1.0, hi = 1e4;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (holds(mid) ? hi : lo) = mid;
  }
  ASSERT_TRUE(rep.d_hat.has_value());
  EXPECT_NEAR(*rep.d_hat, hi, 1e-9);
  EXPECT_NEAR(*rep.d_hat, 2.0, 1e-9);
}

TEST(Decoupling, ZeroKernelHoldsAtOne) {
  const DenseTensor support[] = {scalar(-1.0), scalar(1.0)};
  const double grid[] = {0.5};
  const auto rep = estimate_decoupling_exact(support, 2, named_kernel("zero", TensorShape::square({1})), 2, 1, grid);
  EXPECT_TRUE(rep.uninformative);
  EXPECT_EQ(rep.d_hat, std::optional<double>(1.0));
}

TEST(Decoupling, TensorCaseReproducible) {
  const EnsembleSampler sampler(commuting(3, 0.1, 1.0));
  const auto kernel = named_kernel("product", sampler.spec().base_shape);
  const double grid[] = {1.0, 1.5, 2.0, 2.5};
  const auto a = estimate_decoupling(sampler, kernel, 2, 1, grid, 2000, SeedPolicy(10), 1);
  const auto b = estimate_decoupling(sampler, kernel, 2, 1, grid, 2000, SeedPolicy(10), 3);
  ASSERT_TRUE(a.d_hat.has_value());
  EXPECT_GE(*a.d_hat, 1.0);
  EXPECT_EQ(a.d_hat, b.d_hat);
  EXPECT_EQ(a.d_hat_lenient, b.d_hat_lenient);
  for (std::size_t g = 0; g < 4; ++g) EXPECT_EQ(a.lhs[g].hits, b.lhs[g].hits);
  EXPECT_THROW(estimate_decoupling(sampler, kernel, 4, 1, grid, 200, SeedPolicy(1)), DomainError);
}

TEST(Dominance, InfeasibleThetaIsRefused) {
  DominanceConfig cfg;
  cfg.ensemble = commuting(2, 0.1, 1.0);
  cfg.poly = {1.0, 1.0};
  cfg.Theta_grid = {0.5, 4.0};
  cfg.trials = 500;
  cfg.pilot_trials = 200;
  cfg.master_seed = 11;
  const auto rep = run_dominance_experiment(cfg);
  EXPECT_EQ(rep.rows[0].verdict, Verdict::refused);
  EXPECT_FALSE(rep.rows[0].bound.has_value());
  EXPECT_EQ(rep.rows[0].tail.p_hat, 1.0);
  EXPECT_EQ(rep.rows[1].verdict, Verdict::pass);
  EXPECT_EQ(rep.overall(), Verdict::refused);
}

TEST(Dominance, ScalarEmbeddingDominated) {
  DominanceConfig cfg;
  cfg.ensemble = commuting(1, 0.1, 1.0, {1});
  cfg.poly = {0.0, 1.0};
  for (int i = 1; i <= 10; ++i) cfg.Theta_grid.push_back(0.1 * i);
  cfg.trials = 10000;
  cfg.master_seed = 12;
  cfg.block_matrix.diag_low = cfg.block_matrix.diag_high = 1.0;
  const auto rep = run_dominance_experiment(cfg);
  EXPECT_TRUE(rep.assumptions.all_ok());
  for (const auto& row : rep.rows) {
    ASSERT_TRUE(row.bound.has_value());
    EXPECT_EQ(row.verdict, Verdict::pass);
    EXPECT_LE(row.tail.ci_low, std::min(row.bound->value, 1.0));
  }
  // x^2 with x uniform on [0.1, 1]: Pr(x^2 >= Theta) = (1 - sqrt(Theta)) / 0.9
  for (const auto& row : rep.rows) {
    const double want = std::clamp((1.0 - std::sqrt(row.Theta)) / 0.9, 0.0, 1.0);
    EXPECT_LE(row.tail.ci_low, want + 1e-12);
    EXPECT_GE(row.tail.ci_high, want - 1e-12);
  }
  EXPECT_EQ(rep.overall(), Verdict::pass);
}

TEST(Dominance, ChernoffModeDiagonalOnly) {
  DominanceConfig cfg;
  cfg.mode = DominanceMode::chernoff;
  cfg.ensemble = commuting(3, 0.1, 1.0);
  cfg.poly = {0.0, 1.0};
  cfg.Theta_grid = {0.5, 1.0, 2.0, 3.0};
  cfg.trials = 2000;
  cfg.pilot_trials = 500;
  cfg.master_seed = 13;
  const auto rep = run_dominance_experiment(cfg);
  EXPECT_TRUE(rep.assumptions.all_ok());
  EXPECT_EQ(rep.overall(), Verdict::pass);
  for (const auto& row : rep.rows) {
    ASSERT_TRUE(row.bound.has_value());
    ASSERT_EQ(row.bound->trace.size(), 1u);
    EXPECT_EQ(row.bound->trace[0].kind, "chernoff");
  }
}

TEST(Dominance, DeterministicAcrossThreads) {
  DominanceConfig cfg;
  cfg.ensemble = commuting(3, 0.1, 1.0);
  cfg.poly = {0.0, 1.0, 0.5};
  cfg.k = 2;
  cfg.Theta_grid = {1.0, 3.0, 6.0};
  cfg.trials = 1000;
  cfg.pilot_trials = 300;
  cfg.master_seed = 14;
  const auto a = run_dominance_experiment(cfg);
  cfg.threads = 3;
  const auto b = run_dominance_experiment(cfg);
  for (std::size_t g = 0; g < 3; ++g) {
    EXPECT_EQ(a.rows[g].tail.hits, b.rows[g].tail.hits);
    EXPECT_EQ(a.rows[g].bound->value, b.rows[g].bound->value);
  }
}

TEST(Dominance, BoundOnlyRunHasNoVerdicts) {
  DominanceConfig cfg;
  cfg.ensemble = commuting(2, 0.1, 1.0);
  cfg.Theta_grid = {1.0, 2.0};
  cfg.trials = 500;
  cfg.pilot_trials = 200;
  const auto rep = run_dominance_experiment(cfg, false);
  EXPECT_FALSE(rep.evaluated);
  for (const auto& row : rep.rows) EXPECT_EQ(row.verdict, Verdict::bound_only);
}

TEST(Dominance, MeanZeroNeedsDeclaredLimits) {
  DominanceConfig cfg;
  cfg.ensemble = commuting(2, 0.1, 1.0);
  cfg.ensemble.mean_zero = true;
  cfg.Theta_grid = {1.0};
  EXPECT_THROW(cfg.validate(), DomainError);
}
