#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "hwt/error.hpp"
#include "hwt/spectral.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace hwt;
namespace ts = testing_support;

namespace {

DenseTensor diag2(double a, double b) {
  return DenseTensor(TensorShape::square({2}), {a, 0.0, 0.0, b});
}

}  // namespace

TEST(Svd, IdentityHasUnitSingularValues) {
  const auto s = singular_values(identity({2, 3}));
  ASSERT_EQ(s.size(), 6u);
  for (double v : s) EXPECT_NEAR(v, 1.0, 1e-14);
}

TEST(Svd, MatchesJacobiOracle) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 30; ++trial) {
    const auto a = ts::random_tensor(TensorShape(ts::random_dims(rng), ts::random_dims(rng)), rng);
    const auto got = singular_values(a);
    const auto want = oracle::singular_values(ts::to_mat(a));
    ASSERT_EQ(got.size(), std::min(a.shape().row_size(), a.shape().col_size()));
    for (std::size_t i = 0; i < got.size(); ++i) EXPECT_NEAR(got[i], want[i], 1e-10 * (1.0 + want[0]));
  }
}

TEST(Svd, ReconstructsAndIsSorted) {
  std::mt19937_64 rng(32);
  const auto a = ts::random_tensor(TensorShape({2, 2}, {3}), rng);
  const auto d = svd(a);
  for (std::size_t i = 0; i + 1 < d.sigma.size(); ++i) EXPECT_GE(d.sigma[i], d.sigma[i + 1]);
  const auto u = unfold(a);
  const std::size_t r = d.sigma.size();
  for (std::size_t i = 0; i < u.rows; ++i)
    for (std::size_t j = 0; j < u.cols; ++j) {
      Complex z = 0.0;
      for (std::size_t q = 0; q < r; ++q) z += d.left(i, q) * d.sigma[q] * std::conj(d.right(j, q));
      EXPECT_NEAR(std::abs(z - u(i, j)), 0.0, 1e-9);
    }
}

TEST(Svd, ScalingByComplexFactor) {
  std::mt19937_64 rng(33);
  const auto a = ts::random_tensor(TensorShape::square({3}), rng);
  const Complex c(-1.5, 2.0);
  const auto s = singular_values(a);
  const auto sc = singular_values(c * a);
  for (std::size_t i = 0; i < s.size(); ++i) EXPECT_NEAR(sc[i], std::abs(c) * s[i], 1e-12);
}

TEST(KyFan, ExampleFromSigma) {
  const double sigma[] = {3.0, 2.0, 1.0};
  EXPECT_DOUBLE_EQ(ky_fan_norm_from_sigma(sigma, 2), 5.0);
  EXPECT_DOUBLE_EQ(ky_fan_norm_from_sigma(sigma, 3), 6.0);
  EXPECT_THROW(ky_fan_norm_from_sigma(sigma, 0), DomainError);
  EXPECT_THROW(ky_fan_norm_from_sigma(sigma, 4), DomainError);
}

TEST(KyFan, NuclearNormOracle) {
  std::mt19937_64 rng(34);
  const auto a = ts::random_tensor(TensorShape::square({2, 2}), rng);
  EXPECT_NEAR(ky_fan_norm(a, 4), oracle::ky_fan(ts::to_mat(a), 4), 1e-10);
  EXPECT_NEAR(ky_fan_norm(a, 1), oracle::singular_values(ts::to_mat(a))[0], 1e-10);
  EXPECT_THROW(ky_fan_norm(a, 5), DomainError);
}

TEST(KyFan, TriangleAndSubmultiplicative) {
  std::mt19937_64 rng(35);
  for (int trial = 0; trial < 30; ++trial) {
    const auto dims = ts::random_dims(rng);
    const auto a = ts::random_tensor(TensorShape::square(dims), rng);
    const auto b = ts::random_tensor(TensorShape::square(dims), rng);
    const std::size_t r = a.shape().row_size();
    for (std::size_t k = 1; k <= r; ++k) {
      EXPECT_LE(ky_fan_norm(a + b, k), ky_fan_norm(a, k) + ky_fan_norm(b, k) + kInequalitySlack);
      EXPECT_LE(ky_fan_norm(einstein_product(a, b), k),
                ky_fan_norm(a, k) * ky_fan_norm(b, k) + kInequalitySlack);
    }
  }
}

TEST(Majorization, Examples) {
  const double a[] = {3.0, 1.0};
  const double b[] = {2.0, 2.0};
  EXPECT_TRUE(weakly_majorizes(a, b));
  EXPECT_FALSE(weakly_majorizes(b, a));
}

TEST(Majorization, SumOfSingularValues) {
  std::mt19937_64 rng(36);
  for (int trial = 0; trial < 30; ++trial) {
    const auto dims = ts::random_dims(rng);
    const auto a = ts::random_tensor(TensorShape::square(dims), rng);
    const auto b = ts::random_tensor(TensorShape::square(dims), rng);
    auto sa = singular_values(a);
    const auto sb = singular_values(b);
    for (std::size_t i = 0; i < sa.size(); ++i) sa[i] += sb[i];
    EXPECT_TRUE(weakly_majorizes(sa, singular_values(a + b), 1e-9));
  }
}

TEST(HermEig, DiagonalExample) {
  const auto l = herm_eigenvalues(diag2(-2.0, 5.0));
  ASSERT_EQ(l.size(), 2u);
  EXPECT_NEAR(l[0], 5.0, 1e-14);
  EXPECT_NEAR(l[1], -2.0, 1e-14);
}

TEST(HermEig, MatchesOracleAndReconstructs) {
  std::mt19937_64 rng(37);
  for (int trial = 0; trial < 20; ++trial) {
    const auto h = ts::random_hermitian(ts::random_dims(rng), rng);
    const auto d = herm_eig(h);
    const auto want = oracle::hermitian_eigenvalues(ts::to_mat(h));
    for (std::size_t i = 0; i < want.size(); ++i) EXPECT_NEAR(d.lambdas[i], want[i], 1e-9);
    EXPECT_LE(max_abs_diff(d.reconstruct(), h), 1e-9);
    for (std::size_t i = 0; i < d.eigentensors.size(); ++i)
      for (std::size_t j = 0; j < d.eigentensors.size(); ++j) {
        const double want_ip = i == j ? 1.0 : 0.0;
        EXPECT_NEAR(std::abs(inner_product(d.eigentensors[i], d.eigentensors[j]) - want_ip), 0.0, 1e-9);
      }
  }
}

TEST(HermEig, RejectsNonHermitian) {
  const DenseTensor a(TensorShape::square({2}), {1.0, 2.0, 3.0, 4.0});
  try {
    herm_eig(a);
    FAIL();
  } catch (const NotHermitianError& e) {
    EXPECT_DOUBLE_EQ(e.asymmetry(), 1.0);
  }
}

TEST(SpectralFunction, ExpOfDiagonal) {
  const auto e = spectral_function(diag2(0.0, std::log(2.0)), [](double x) { return std::exp(x); });
  EXPECT_LE(max_abs_diff(e, diag2(1.0, 2.0)), 1e-14);
}

TEST(SpectralFunction, SquareEqualsPowerAndExpMatchesOracle) {
  std::mt19937_64 rng(38);
  const auto h = ts::random_hermitian({2, 2}, rng);
  const auto sq = spectral_function(h, [](double x) { return x * x; });
  EXPECT_LE(max_abs_diff(sq, tensor_power(h, 2)), 1e-9 * (1.0 + sq.max_abs()));
  const auto ex = spectral_function(h, [](double x) { return std::exp(x); });
  const auto want = oracle::expm(ts::to_mat(h));
  EXPECT_LE(oracle::max_abs(oracle::add(ts::to_mat(ex), want, -1.0)), 1e-9 * (1.0 + oracle::max_abs(want)));
}

TEST(SpectralFunction, NonFiniteThrows) {
  EXPECT_THROW(spectral_function(diag2(-1.0, 1.0), [](double x) { return std::log(x); }), DomainError);
}

TEST(SpectralFunction, CommutesWithStoredFactors) {
  std::mt19937_64 rng(39);
  const auto h = ts::random_hermitian({3}, rng);
  const auto d = herm_eig(h);
  const auto f = spectral_function(d, h.shape(), [](double x) { return std::tanh(x); });
  for (std::size_t i = 0; i < d.eigentensors.size(); ++i) {
    const auto& u = d.eigentensors[i];
    const auto fu = einstein_product(f, u);
    EXPECT_LE(max_abs_diff(fu, std::tanh(d.lambdas[i]) * u), 1e-9);
  }
}

TEST(Loewner, Predicates) {
  EXPECT_TRUE(loewner_geq(diag2(2, 3), diag2(1, 3)));
  EXPECT_FALSE(loewner_geq(diag2(2, 3), diag2(1, 4)));
  EXPECT_TRUE(is_positive_definite(diag2(0.1, 3)));
  EXPECT_FALSE(is_positive_definite(diag2(0.0, 3)));
  EXPECT_DOUBLE_EQ(max_eigenvalue(diag2(-4, 1)), 1.0);
  EXPECT_DOUBLE_EQ(min_eigenvalue(diag2(-4, 1)), -4.0);
}

TEST(PowerNorm, SubadditivityOnRandomPd) {
  std::mt19937_64 rng(40);
  for (int trial = 0; trial < 20; ++trial) {
    const auto dims = ts::random_dims(rng);
    const auto a = ts::random_pd(dims, rng);
    const auto b = ts::random_pd(dims, rng);
    for (unsigned n = 1; n <= 3; ++n) {
      EXPECT_TRUE(power_norm_subadditivity_check(a, b, n, 1));
      EXPECT_LE(power_norm_gap(a, b, n, 1), kInequalitySlack);
    }
  }
}

TEST(PowerNorm, DiagonalExample) {
  EXPECT_NEAR(power_norm_gap(diag2(1, 2), diag2(3, 1), 2, 1), 4.0 - 5.0, 1e-12);
  EXPECT_THROW(power_norm_gap(diag2(1, -2), diag2(3, 1), 2, 1), DomainError);
}
