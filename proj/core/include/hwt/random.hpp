#pragma once

// Reproducible samplers for random Hermitian / positive definite tensors,
// symmetric Bernoulli signs, and the six-term moment statistic Xi(X).
//
// Every random draw is keyed by (master seed, stream id, index). Results
// therefore do not depend on the order in which trials are executed.

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "hwt/tensor.hpp"

namespace hwt {

using Rng = std::mt19937_64;

/// Stream identifiers; each purpose gets a disjoint family of substreams.
namespace streams {
inline constexpr std::uint64_t kPilot = 1;
inline constexpr std::uint64_t kEvaluation = 2;
inline constexpr std::uint64_t kBlockMatrix = 3;
inline constexpr std::uint64_t kMeanEstimate = 4;
inline constexpr std::uint64_t kSymmetrization = 5;
inline constexpr std::uint64_t kDecouplingLhs = 6;
inline constexpr std::uint64_t kChaos = 7;
inline constexpr std::uint64_t kSelftest = 8;
inline constexpr std::uint64_t kPaleyZygmund = 9;
/// Copy c of a decoupled sequence uses stream kCopyBase + c.
inline constexpr std::uint64_t kCopyBase = 1000;
}  // namespace streams

class SeedPolicy {
 public:
  explicit SeedPolicy(std::uint64_t master_seed) : master_seed_(master_seed) {}

  std::uint64_t master_seed() const noexcept { return master_seed_; }

  /// 64-bit seed for trial `index` of stream `stream_id`.
  std::uint64_t derive(std::uint64_t stream_id, std::uint64_t index) const noexcept;

  /// Engine positioned at the start of the (stream_id, index) substream.
  Rng stream(std::uint64_t stream_id, std::uint64_t index) const;

 private:
  std::uint64_t master_seed_;
};

/// SplitMix64 finalizer, exposed for digests and seed derivation.
std::uint64_t mix64(std::uint64_t x) noexcept;

enum class EnsembleFamily { commuting, generic_hermitian, scalar };

/// Eigenvalue law. Bounds [low, high] give the support for `uniform` and
/// `rademacher` (values low/high with probability 1/2); for `gaussian` they
/// give mean (low+high)/2 and standard deviation (high-low)/2.
enum class EigenLaw { uniform, gaussian, rademacher };

std::string to_string(EnsembleFamily f);
std::string to_string(EigenLaw l);
EnsembleFamily parse_family(const std::string& s);
EigenLaw parse_law(const std::string& s);

struct EnsembleSpec {
  TensorShape base_shape = TensorShape::square({2});
  std::size_t n = 1;
  EnsembleFamily family = EnsembleFamily::commuting;
  EigenLaw law = EigenLaw::uniform;
  double eig_low = 0.1;
  double eig_high = 1.0;
  std::uint64_t shared_unitary_seed = 0;
  bool mean_zero = false;
  bool real = false;  ///< real orthogonal factors / real symmetric draws
  std::size_t mean_estimate_trials = 2000;

  /// Throws DomainError/ShapeError when the spec is inconsistent.
  void validate() const;
  bool positive_definite() const noexcept;
};

/// Entry-wise complex standard normal G (E|g|^2 = 1), returned as (G + G^H)/2.
DenseTensor sample_hermitian(const TensorShape& shape, Rng& rng);

/// Haar-like unitary from the QR factor of a complex (or real) Gaussian matrix.
DenseTensor random_unitary(const Dims& dims, Rng& rng, bool real = false);

/// One eigenvalue draw from the spec's law.
double draw_eigenvalue(const EnsembleSpec& spec, Rng& rng);

class EnsembleSampler {
 public:
  explicit EnsembleSampler(EnsembleSpec spec);

  const EnsembleSpec& spec() const noexcept { return spec_; }

  /// Shared unitary factor of the commuting family (identity otherwise).
  const DenseTensor& shared_unitary() const noexcept { return unitary_; }

  /// Mean subtracted when spec.mean_zero is set.
  const DenseTensor& mean() const noexcept { return mean_; }

  /// Trials used to estimate the mean; 0 when the mean is analytic.
  std::size_t mean_estimate_trials() const noexcept { return mean_trials_; }

  /// A single tensor (centered when mean_zero).
  DenseTensor sample(Rng& rng) const;

  /// Same as sample() but also returns the drawn eigenvalues (commuting and
  /// scalar families); empty for the generic family.
  DenseTensor sample_with_eigenvalues(Rng& rng, std::vector<double>& eigenvalues) const;

  /// X_1..X_n, one independent draw per block.
  std::vector<DenseTensor> sample_sequence(Rng& rng) const;

 private:
  DenseTensor draw_uncentered(Rng& rng, std::vector<double>* eigenvalues) const;

  EnsembleSpec spec_;
  DenseTensor unitary_;
  DenseTensor mean_;
  std::size_t mean_trials_ = 0;
};

/// Bounded positive definite draw: generic family rescales the eigenvalues
/// of a Hermitian Gaussian draw affinely into [eig_low, eig_high].
DenseTensor sample_pd_bounded(const EnsembleSpec& spec, Rng& rng);

/// n tensors U diag(lambda) U^H sharing the sampler's unitary U.
std::vector<DenseTensor> sample_commuting_family(const EnsembleSampler& sampler, Rng& rng);

/// `count` independent copies of the sequence X_1..X_n for one trial; copy c
/// is driven by substream (kCopyBase + c, trial).
std::vector<std::vector<DenseTensor>> independent_copies(const EnsembleSampler& sampler,
                                                         std::size_t count,
                                                         const SeedPolicy& seeds,
                                                         std::uint64_t trial);

/// i.i.d. +-1 with probability 1/2 each.
std::vector<int> sample_symmetric_bernoulli(std::size_t count, Rng& rng);

struct XiStatistic {
  double xi = 0.0;
  /// x row max, x column max, x fourth-moment root, then the same for y.
  std::array<double, 6> components{};
  /// Delete-group jackknife standard error (Monte Carlo path only).
  double standard_error = 0.0;
  std::size_t trials = 0;
};

/// Xi from per-entry second and fourth central moments of the real part (x)
/// and imaginary part (y), each given row-major as rows x cols.
XiStatistic xi_from_moments(std::size_t rows, std::size_t cols, std::span<const double> x2,
                            std::span<const double> x4, std::span<const double> y2,
                            std::span<const double> y4);

/// Monte Carlo Xi over a fixed sample set (central moments use the sample mean).
XiStatistic xi_from_samples(std::span<const DenseTensor> samples);

/// Monte Carlo Xi drawing `trials` samples from `sampler`.
XiStatistic xi_statistic(const std::function<DenseTensor(Rng&)>& sampler, std::size_t trials,
                         Rng& rng);

/// Exact Xi of Z = U diag(alpha_c * lambda_c^power) U^H where the lambda_c
/// follow the spec's law: independent per slot for the commuting family,
/// a single shared lambda for the scalar family. U is the sampler's unitary.
XiStatistic xi_closed_form(const EnsembleSampler& sampler, std::span<const double> alpha,
                           unsigned power);

/// Raw moment E[lambda^q] of the spec's eigenvalue law.
double eigen_raw_moment(const EnsembleSpec& spec, unsigned q);

}  // namespace hwt
