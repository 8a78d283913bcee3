#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "hwt/error.hpp"
#include "hwt/quadform.hpp"
#include "hwt/random.hpp"
#include "hwt/spectral.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace hwt;
namespace ts = testing_support;

namespace {

BlockMatrix uniform_blocks(std::size_t n, const Dims& dims, double diag, double off) {
  std::vector<DenseTensor> blocks;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) blocks.push_back((i == j ? diag : off) * identity(dims));
  return BlockMatrix(n, std::move(blocks));
}

BoundInputs loose_params(std::size_t n, std::vector<double> a) {
  BoundInputs p;
  p.n = n;
  p.a = std::move(a);
  p.k = 1;
  p.R_d = 1e6;
  p.R_c = 1e6;
  return p;
}

}  // namespace

TEST(BlockTypes, Validation) {
  EXPECT_THROW(BlockVector(std::vector<DenseTensor>{}), ShapeError);
  EXPECT_THROW(BlockVector({identity({2}), identity({3})}), ShapeError);
  EXPECT_THROW(BlockMatrix(2, {identity({2}), identity({2}), identity({2})}), ShapeError);
  const DenseTensor bad(TensorShape::square({2}), {1.0, 2.0, 0.0, 1.0});
  EXPECT_THROW(BlockMatrix(1, {bad}), NotHermitianError);
}

TEST(QuadraticForm, SingleBlockHasNoCoupling) {
  std::mt19937_64 rng(41);
  const auto x = ts::random_hermitian({2}, rng);
  const auto a = ts::random_hermitian({2}, rng);
  const auto q = quadratic_form(BlockVector({x}), BlockMatrix(1, {a}));
  EXPECT_TRUE(q.coupling_terms.empty());
  EXPECT_LE(max_abs_diff(q.total, q.diagonal_terms[0]), 1e-12);
  EXPECT_LE(max_abs_diff(q.total, einstein_product(einstein_product(x, a), x)), 1e-12);
}

TEST(QuadraticForm, ZeroOffDiagonalGivesZeroCoupling) {
  std::mt19937_64 rng(42);
  const Dims d{2, 2};
  const BlockVector x({ts::random_hermitian(d, rng), ts::random_hermitian(d, rng), ts::random_hermitian(d, rng)});
  const auto q = quadratic_form(x, uniform_blocks(3, d, 1.0, 0.0));
  ASSERT_EQ(q.coupling_terms.size(), 6u);
  for (const auto& c : q.coupling_terms) EXPECT_EQ(c.max_abs(), 0.0);
  EXPECT_LE(max_abs_diff(q.total, q.diagonal_sum()), 1e-12);
}

TEST(QuadraticForm, MatchesBlockMatrixOracle) {
  std::mt19937_64 rng(43);
  const Dims d{2, 2};
  const std::size_t n = 3;
  const std::size_t r = 4;
  std::vector<DenseTensor> xs;
  for (std::size_t i = 0; i < n; ++i) xs.push_back(ts::random_hermitian(d, rng));
  std::vector<DenseTensor> blocks;
  for (std::size_t i = 0; i < n * n; ++i) blocks.push_back(ts::random_hermitian(d, rng));
  const auto q = quadratic_form(BlockVector(xs), BlockMatrix(n, blocks));

  // big (n r) x r column of X blocks, big (n r) x (n r) A
  oracle::Mat xcol(n * r, r);
  oracle::Mat big(n * r, n * r);
  for (std::size_t i = 0; i < n; ++i) {
    const auto xm = ts::to_mat(xs[i]);
    for (std::size_t p = 0; p < r; ++p)
      for (std::size_t c = 0; c < r; ++c) xcol(i * r + p, c) = xm(p, c);
    for (std::size_t j = 0; j < n; ++j) {
      const auto am = ts::to_mat(blocks[i * n + j]);
      for (std::size_t p = 0; p < r; ++p)
        for (std::size_t c = 0; c < r; ++c) big(i * r + p, j * r + c) = am(p, c);
    }
  }
  const auto want = oracle::matmul(oracle::matmul(oracle::adjoint(xcol), big), xcol);
  const auto got = ts::to_mat(q.total);
  EXPECT_LE(oracle::max_abs(oracle::add(got, want, -1.0)), 1e-10 * (1.0 + oracle::max_abs(want)));
  EXPECT_LE(max_abs_diff(q.total, q.diagonal_sum() + q.coupling_sum()), 1e-10 * (1.0 + q.total.max_abs()));
  EXPECT_EQ(q.coupling_index.front(), (std::pair<std::size_t, std::size_t>{0, 1}));
  EXPECT_EQ(q.coupling_index.back(), (std::pair<std::size_t, std::size_t>{2, 1}));
}

TEST(PolyApply, Examples) {
  const double one[] = {1.0};
  EXPECT_EQ(poly_apply(one, DenseTensor(TensorShape::square({2, 3}))), identity({2, 3}));
  const double sq[] = {0.0, 0.0, 1.0};
  const DenseTensor d(TensorShape::square({2}), {2.0, 0.0, 0.0, 3.0});
  EXPECT_LE(max_abs_diff(poly_apply(sq, d), DenseTensor(TensorShape::square({2}), {4.0, 0.0, 0.0, 9.0})), 1e-15);
}

TEST(PolyApply, AgreesWithSpectralFunction) {
  std::mt19937_64 rng(44);
  const auto t = ts::random_hermitian({3, 2}, rng);
  const double f[] = {1.0, 2.0, 1.0};
  const auto got = poly_apply(f, t);
  const auto want = spectral_function(t, [](double x) { return 1.0 + 2.0 * x + x * x; });
  EXPECT_LE(max_abs_diff(got, want), 1e-9 * (1.0 + want.max_abs()));
}

TEST(ThetaSplit, Examples) {
  const double a1[] = {0.5, 2.0};
  const auto t1 = theta_split(5.0, a1, 2, ThetaSplitPolicy::equal);
  ASSERT_EQ(t1.size(), 1u);
  EXPECT_DOUBLE_EQ(t1[0], 4.0);

  const double a2[] = {1.0, 1.0, 3.0};
  const auto eq = theta_split(5.0, a2, 1, ThetaSplitPolicy::equal);
  EXPECT_DOUBLE_EQ(eq[0], 2.0);
  EXPECT_DOUBLE_EQ(eq[1], 2.0);
  const auto pr = theta_split(5.0, a2, 1, ThetaSplitPolicy::proportional);
  EXPECT_DOUBLE_EQ(pr[0], 1.0);
  EXPECT_DOUBLE_EQ(pr[1], 3.0);
}

TEST(ThetaSplit, ZeroCoefficientsAndInfeasible) {
  const double a[] = {0.0, 1.0, 0.0, 2.0};
  const auto t = theta_split(6.0, a, 1, ThetaSplitPolicy::equal);
  EXPECT_DOUBLE_EQ(t[0], 3.0);
  EXPECT_DOUBLE_EQ(t[1], 0.0);
  EXPECT_DOUBLE_EQ(t[2], 3.0);
  const double b[] = {2.0, 1.0};
  EXPECT_THROW(theta_split(2.0, b, 1, ThetaSplitPolicy::equal), DomainError);
  EXPECT_EQ(parse_split_policy(to_string(ThetaSplitPolicy::proportional)), ThetaSplitPolicy::proportional);
}

TEST(Assumptions, CommutingUnitIntervalPasses) {
  EnsembleSpec spec;
  spec.base_shape = TensorShape::square({2, 2});
  spec.n = 3;
  spec.eig_low = 0.05;
  spec.eig_high = 1.0;
  spec.shared_unitary_seed = 3;
  const EnsembleSampler sampler(spec);
  const auto a = uniform_blocks(3, {2, 2}, 1.0, 0.3);
  const auto params = loose_params(3, {0.0, 1.0, 1.0, 1.0});
  const unsigned js[] = {1, 2, 3};
  const auto grid = default_t_grid(10.0);
  for (std::uint64_t trial = 0; trial < 5; ++trial) {
    Rng rng(100 + trial);
    const BlockVector x(sampler.sample_sequence(rng));
    const auto rep = check_assumptions(x, a, params, grid, js);
    EXPECT_TRUE(rep.all_ok()) << (rep.notes.empty() ? "" : rep.notes.front());
    EXPECT_LE(rep.commute_residual, 1e-8);

    // scalar reduction: S_i has eigenvalues s in (0, 0.6], so e^{tjs} >= e^{t s^j}
    for (double s = 0.01; s <= 0.6; s += 0.01)
      for (unsigned j : js)
        for (double t : grid) EXPECT_GE(std::exp(t * j * s), std::exp(t * std::pow(s, j)));
  }
}

TEST(Assumptions, GenericFamilyDoesNotCommute) {
  std::mt19937_64 rng(45);
  const BlockVector x({ts::random_pd({3}, rng), ts::random_pd({3}, rng)});
  const auto a = uniform_blocks(2, {3}, 1.0, 0.5);
  const unsigned js[] = {1};
  const auto grid = default_t_grid(1.0);
  const auto rep = check_assumptions(x, a, loose_params(2, {0.0, 1.0}), grid, js);
  EXPECT_FALSE(rep.commute_ok);
  EXPECT_FALSE(rep.all_ok());
}

TEST(Assumptions, ScaledIdentityObservedLimits) {
  const double c = 0.7;
  const BlockVector x({c * identity({2}), c * identity({2})});
  const auto a = uniform_blocks(2, {2}, 1.0, 1.0);
  auto params = loose_params(2, {0.0, 1.0, 1.0});
  params.K = {{c, c * c}, {c, c * c}};
  const unsigned js[] = {1, 2};
  const auto grid = default_t_grid(5.0);
  const auto rep = check_assumptions(x, a, params, grid, js);
  EXPECT_NEAR(rep.R_d_observed, c * c, 1e-14);
  EXPECT_NEAR(rep.R_c_observed, c, 1e-14);
  EXPECT_NEAR(rep.K_table[0][1], c * c, 1e-14);
  EXPECT_TRUE(rep.all_ok());

  params.R_d = 0.5 * c * c;
  EXPECT_FALSE(check_assumptions(x, a, params, grid, js).R_d_ok);
}

TEST(Assumptions, ExpDominationFailsForLargeS) {
  // S = 3 I, j = 2: e^{6t} < e^{9t}
  const BlockVector x({identity({2}), identity({2})});
  const auto a = uniform_blocks(2, {2}, 1.0, 3.0);
  const unsigned js[] = {2};
  const auto grid = default_t_grid(1.0);
  const auto rep = check_assumptions(x, a, loose_params(2, {0.0, 0.0, 1.0}), grid, js);
  EXPECT_TRUE(rep.commute_ok);
  EXPECT_FALSE(rep.exp_domination_ok);
  EXPECT_LT(rep.exp_domination_margin, 0.0);
}

TEST(Assumptions, MergeCombinesFlags) {
  AssumptionReport a;
  a.samples = 1;
  a.R_d_observed = 1.0;
  AssumptionReport b;
  b.samples = 2;
  b.R_d_observed = 2.0;
  b.pd_ok = false;
  a.merge(b);
  EXPECT_EQ(a.samples, 3u);
  EXPECT_DOUBLE_EQ(a.R_d_observed, 2.0);
  EXPECT_FALSE(a.pd_ok);
}
