#include "hwt/random.hpp"

#include <algorithm>
#include <cmath>

#include "eigen_bridge.hpp"
#include "hwt/error.hpp"
#include "hwt/spectral.hpp"

namespace hwt {

std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t SeedPolicy::derive(std::uint64_t stream_id, std::uint64_t index) const noexcept {
  std::uint64_t h = mix64(master_seed_);
  h = mix64(h ^ mix64(stream_id + 0x632BE59BD9B4E019ULL));
  h = mix64(h ^ mix64(index + 0x8CB92BA72F3D8DD7ULL));
  return h;
}

Rng SeedPolicy::stream(std::uint64_t stream_id, std::uint64_t index) const {
  return Rng(derive(stream_id, index));
}

std::string to_string(EnsembleFamily f) {
  switch (f) {
    case EnsembleFamily::commuting: return "commuting";
    case EnsembleFamily::generic_hermitian: return "generic-hermitian";
    case EnsembleFamily::scalar: return "scalar";
  }
  return "?";
}

std::string to_string(EigenLaw l) {
  switch (l) {
    case EigenLaw::uniform: return "uniform";
    case EigenLaw::gaussian: return "gaussian";
    case EigenLaw::rademacher: return "rademacher";
  }
  return "?";
}

EnsembleFamily parse_family(const std::string& s) {
  if (s == "commuting") return EnsembleFamily::commuting;
  if (s == "generic-hermitian") return EnsembleFamily::generic_hermitian;
  if (s == "scalar") return EnsembleFamily::scalar;
  throw DomainError("unknown ensemble family '" + s + "'");
}

EigenLaw parse_law(const std::string& s) {
  if (s == "uniform") return EigenLaw::uniform;
  if (s == "gaussian") return EigenLaw::gaussian;
  if (s == "rademacher") return EigenLaw::rademacher;
  throw DomainError("unknown eigenvalue law '" + s + "'");
}

void EnsembleSpec::validate() const {
  if (!base_shape.is_square()) throw ShapeError("ensemble base shape must be square");
  if (n < 1) throw DomainError("ensemble block count n must be >= 1");
  if (!std::isfinite(eig_low) || !std::isfinite(eig_high) || eig_low > eig_high)
    throw DomainError("ensemble eigenvalue bounds must satisfy low <= high");
  if (family == EnsembleFamily::generic_hermitian && law == EigenLaw::rademacher)
    throw DomainError("generic-hermitian family does not support the rademacher law");
}

bool EnsembleSpec::positive_definite() const noexcept {
  return law != EigenLaw::gaussian && eig_low > 0.0 && !mean_zero;
}

namespace {

double std_normal(Rng& rng) {
  std::normal_distribution<double> dist(0.0, 1.0);
  return dist(rng);
}

DenseTensor diag_conjugate(const DenseTensor& u, std::span<const double> values) {
  const std::size_t d = u.shape().row_size();
  std::vector<Complex> out(d * d, Complex(0.0, 0.0));
  for (std::size_t r = 0; r < d; ++r)
    for (std::size_t c = 0; c < d; ++c) {
      Complex s(0.0, 0.0);
      for (std::size_t k = 0; k < d; ++k) s += u(r, k) * values[k] * std::conj(u(c, k));
      out[r * d + c] = s;
    }
  return make_unchecked(u.shape(), std::move(out));
}

}  // namespace

DenseTensor sample_hermitian(const TensorShape& shape, Rng& rng) {
  if (!shape.is_square()) throw ShapeError("sample_hermitian: shape must be square");
  const std::size_t d = shape.row_size();
  const double s = std::sqrt(0.5);
  std::vector<Complex> g(d * d);
  for (auto& z : g) {
    const double re = std_normal(rng);
    const double im = std_normal(rng);
    z = Complex(s * re, s * im);
  }
  std::vector<Complex> h(d * d);
  for (std::size_t r = 0; r < d; ++r)
    for (std::size_t c = 0; c < d; ++c) h[r * d + c] = 0.5 * (g[r * d + c] + std::conj(g[c * d + r]));
  return DenseTensor(shape, std::move(h));
}

namespace {

DenseTensor sample_real_symmetric(const TensorShape& shape, Rng& rng) {
  const std::size_t d = shape.row_size();
  std::vector<double> g(d * d);
  for (auto& x : g) x = std_normal(rng);
  std::vector<Complex> h(d * d);
  for (std::size_t r = 0; r < d; ++r)
    for (std::size_t c = 0; c < d; ++c) h[r * d + c] = Complex(0.5 * (g[r * d + c] + g[c * d + r]), 0.0);
  return DenseTensor(shape, std::move(h));
}

}  // namespace

DenseTensor random_unitary(const Dims& dims, Rng& rng, bool real) {
  const TensorShape shape = TensorShape::square(dims);
  const auto d = static_cast<Eigen::Index>(shape.row_size());
  Eigen::MatrixXcd g(d, d);
  // Fill row by row so the draw order matches the bijection order.
  for (Eigen::Index r = 0; r < d; ++r)
    for (Eigen::Index c = 0; c < d; ++c) {
      const double re = std_normal(rng);
      const double im = real ? 0.0 : std_normal(rng);
      g(r, c) = Complex(re, im);
    }
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(g);
  Eigen::MatrixXcd q = qr.householderQ() * Eigen::MatrixXcd::Identity(d, d);
  const Eigen::MatrixXcd rmat = qr.matrixQR().triangularView<Eigen::Upper>();
  // Phase correction makes the factor Haar distributed.
  for (Eigen::Index c = 0; c < d; ++c) {
    const Complex diag = rmat(c, c);
    const double mag = std::abs(diag);
    if (mag > 0.0) q.col(c) *= diag / mag;
  }
  detail::MatrixXc out = q;
  if (real)
    for (Eigen::Index i = 0; i < out.size(); ++i) out.data()[i] = Complex(out.data()[i].real(), 0.0);
  return detail::from_eigen(out, shape);
}

double draw_eigenvalue(const EnsembleSpec& spec, Rng& rng) {
  switch (spec.law) {
    case EigenLaw::uniform: {
      if (spec.eig_low == spec.eig_high) return spec.eig_low;
      std::uniform_real_distribution<double> dist(spec.eig_low, spec.eig_high);
      return dist(rng);
    }
    case EigenLaw::gaussian: {
      const double center = 0.5 * (spec.eig_low + spec.eig_high);
      const double sd = 0.5 * (spec.eig_high - spec.eig_low);
      return center + sd * std_normal(rng);
    }
    case EigenLaw::rademacher: {
      std::bernoulli_distribution coin(0.5);
      return coin(rng) ? spec.eig_high : spec.eig_low;
    }
  }
  return 0.0;
}

EnsembleSampler::EnsembleSampler(EnsembleSpec spec)
    : spec_(std::move(spec)),
      unitary_(identity(spec_.base_shape.row_dims())),
      mean_(zeros(spec_.base_shape)) {
  spec_.validate();
  const SeedPolicy shared(spec_.shared_unitary_seed);
  if (spec_.family == EnsembleFamily::commuting) {
    Rng rng = shared.stream(streams::kBlockMatrix, 0xC0FFEE);
    unitary_ = random_unitary(spec_.base_shape.row_dims(), rng, spec_.real);
  }
  const double center = spec_.law == EigenLaw::uniform || spec_.law == EigenLaw::rademacher ||
                                spec_.law == EigenLaw::gaussian
                            ? 0.5 * (spec_.eig_low + spec_.eig_high)
                            : 0.0;
  if (spec_.family == EnsembleFamily::generic_hermitian && spec_.law == EigenLaw::uniform) {
    // The affine eigenvalue rescaling has no closed-form mean; estimate it.
    mean_trials_ = std::max<std::size_t>(1, spec_.mean_estimate_trials);
    DenseTensor acc = zeros(spec_.base_shape);
    for (std::size_t t = 0; t < mean_trials_; ++t) {
      Rng rng = shared.stream(streams::kMeanEstimate, t);
      acc = acc + draw_uncentered(rng, nullptr);
    }
    mean_ = (1.0 / static_cast<double>(mean_trials_)) * acc;
  } else {
    mean_ = center * identity(spec_.base_shape.row_dims());
  }
}

DenseTensor EnsembleSampler::draw_uncentered(Rng& rng, std::vector<double>* eigenvalues) const {
  const auto& shape = spec_.base_shape;
  const std::size_t d = shape.row_size();
  switch (spec_.family) {
    case EnsembleFamily::commuting: {
      std::vector<double> lambda(d);
      for (auto& l : lambda) l = draw_eigenvalue(spec_, rng);
      if (eigenvalues) *eigenvalues = lambda;
      return diag_conjugate(unitary_, lambda);
    }
    case EnsembleFamily::scalar: {
      const double l = draw_eigenvalue(spec_, rng);
      if (eigenvalues) eigenvalues->assign(d, l);
      return l * identity(shape.row_dims());
    }
    case EnsembleFamily::generic_hermitian: {
      if (eigenvalues) eigenvalues->clear();
      DenseTensor h = spec_.real ? sample_real_symmetric(shape, rng) : sample_hermitian(shape, rng);
      const double center = 0.5 * (spec_.eig_low + spec_.eig_high);
      const double half = 0.5 * (spec_.eig_high - spec_.eig_low);
      if (spec_.law == EigenLaw::gaussian) return center * identity(shape.row_dims()) + half * h;
      const auto eig = herm_eig(h);
      const double lo = eig.lambdas.back();
      const double hi = eig.lambdas.front();
      const double span = hi - lo;
      return spectral_function(eig, shape, [&](double l) {
        if (span <= 0.0) return center;
        return spec_.eig_low + (l - lo) / span * (spec_.eig_high - spec_.eig_low);
      });
    }
  }
  return zeros(shape);
}

DenseTensor EnsembleSampler::sample(Rng& rng) const {
  DenseTensor x = draw_uncentered(rng, nullptr);
  return spec_.mean_zero ? x - mean_ : x;
}

DenseTensor EnsembleSampler::sample_with_eigenvalues(Rng& rng,
                                                     std::vector<double>& eigenvalues) const {
  DenseTensor x = draw_uncentered(rng, &eigenvalues);
  return spec_.mean_zero ? x - mean_ : x;
}

std::vector<DenseTensor> EnsembleSampler::sample_sequence(Rng& rng) const {
  std::vector<DenseTensor> out;
  out.reserve(spec_.n);
  for (std::size_t i = 0; i < spec_.n; ++i) out.push_back(sample(rng));
  return out;
}

DenseTensor sample_pd_bounded(const EnsembleSpec& spec, Rng& rng) {
  if (!(spec.eig_low > 0.0) || spec.eig_low > spec.eig_high)
    throw DomainError("sample_pd_bounded: need 0 < eig_low <= eig_high");
  if (spec.law != EigenLaw::uniform)
    throw DomainError("sample_pd_bounded: bounded draws need the uniform law");
  EnsembleSpec s = spec;
  s.mean_zero = false;
  s.mean_estimate_trials = 1;
  const EnsembleSampler sampler(s);
  return sampler.sample(rng);
}

std::vector<DenseTensor> sample_commuting_family(const EnsembleSampler& sampler, Rng& rng) {
  if (sampler.spec().family != EnsembleFamily::commuting)
    throw DomainError("sample_commuting_family: spec family is not commuting");
  return sampler.sample_sequence(rng);
}

std::vector<std::vector<DenseTensor>> independent_copies(const EnsembleSampler& sampler,
                                                         std::size_t count,
                                                         const SeedPolicy& seeds,
                                                         std::uint64_t trial) {
  if (count < 1) throw DomainError("independent_copies: count must be >= 1");
  std::vector<std::vector<DenseTensor>> out;
  out.reserve(count);
  for (std::size_t c = 0; c < count; ++c) {
    Rng rng = seeds.stream(streams::kCopyBase + c, trial);
    out.push_back(sampler.sample_sequence(rng));
  }
  return out;
}

std::vector<int> sample_symmetric_bernoulli(std::size_t count, Rng& rng) {
  if (count < 1) throw DomainError("sample_symmetric_bernoulli: count must be >= 1");
  std::vector<int> out(count);
  std::bernoulli_distribution coin(0.5);
  for (auto& b : out) b = coin(rng) ? 1 : -1;
  return out;
}

XiStatistic xi_from_moments(std::size_t rows, std::size_t cols, std::span<const double> x2,
                            std::span<const double> x4, std::span<const double> y2,
                            std::span<const double> y4) {
  const std::size_t n = rows * cols;
  if (x2.size() != n || x4.size() != n || y2.size() != n || y4.size() != n)
    throw ShapeError("xi_from_moments: moment arrays do not match rows x cols");

  auto three_terms = [&](std::span<const double> m2, std::span<const double> m4, double* out) {
    double row_max = 0.0;
    for (std::size_t i = 0; i < rows; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < cols; ++j) s += m2[i * cols + j];
      row_max = std::max(row_max, std::sqrt(std::max(0.0, s)));
    }
    double col_max = 0.0;
    for (std::size_t j = 0; j < cols; ++j) {
      double s = 0.0;
      for (std::size_t i = 0; i < rows; ++i) s += m2[i * cols + j];
      col_max = std::max(col_max, std::sqrt(std::max(0.0, s)));
    }
    double fourth = 0.0;
    for (double v : m4) fourth += v;
    out[0] = row_max;
    out[1] = col_max;
    out[2] = std::pow(std::max(0.0, fourth), 0.25);
  };

  XiStatistic xi;
  three_terms(x2, x4, xi.components.data());
  three_terms(y2, y4, xi.components.data() + 3);
  for (double c : xi.components) xi.xi += c;
  return xi;
}

namespace {

// Xi over samples[i] for i not in [skip_begin, skip_end).
XiStatistic xi_subset(std::span<const DenseTensor> samples, std::size_t skip_begin,
                      std::size_t skip_end) {
  const auto& shape = samples.front().shape();
  const std::size_t rows = shape.row_size();
  const std::size_t cols = shape.col_size();
  const std::size_t n = rows * cols;
  std::vector<double> mean_x(n, 0.0), mean_y(n, 0.0);
  std::size_t count = 0;
  for (std::size_t t = 0; t < samples.size(); ++t) {
    if (t >= skip_begin && t < skip_end) continue;
    const auto e = samples[t].entries();
    for (std::size_t i = 0; i < n; ++i) {
      mean_x[i] += e[i].real();
      mean_y[i] += e[i].imag();
    }
    ++count;
  }
  const double inv = 1.0 / static_cast<double>(count);
  for (std::size_t i = 0; i < n; ++i) {
    mean_x[i] *= inv;
    mean_y[i] *= inv;
  }
  std::vector<double> x2(n, 0.0), x4(n, 0.0), y2(n, 0.0), y4(n, 0.0);
  for (std::size_t t = 0; t < samples.size(); ++t) {
    if (t >= skip_begin && t < skip_end) continue;
    const auto e = samples[t].entries();
    for (std::size_t i = 0; i < n; ++i) {
      const double dx = e[i].real() - mean_x[i];
      const double dy = e[i].imag() - mean_y[i];
      x2[i] += dx * dx;
      x4[i] += dx * dx * dx * dx;
      y2[i] += dy * dy;
      y4[i] += dy * dy * dy * dy;
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    x2[i] *= inv;
    x4[i] *= inv;
    y2[i] *= inv;
    y4[i] *= inv;
  }
  XiStatistic xi = xi_from_moments(rows, cols, x2, x4, y2, y4);
  xi.trials = count;
  return xi;
}

}  // namespace

XiStatistic xi_from_samples(std::span<const DenseTensor> samples) {
  if (samples.empty()) throw DomainError("xi_from_samples: need at least one sample");
  for (const auto& s : samples)
    if (s.shape() != samples.front().shape()) throw ShapeError("xi_from_samples: mixed shapes");
  XiStatistic full = xi_subset(samples, 0, 0);

  constexpr std::size_t kGroups = 20;
  if (samples.size() >= 2 * kGroups) {
    const std::size_t per = samples.size() / kGroups;
    std::vector<double> loo(kGroups);
    for (std::size_t g = 0; g < kGroups; ++g) {
      const std::size_t begin = g * per;
      const std::size_t end = g + 1 == kGroups ? samples.size() : begin + per;
      loo[g] = xi_subset(samples, begin, end).xi;
    }
    double mean = 0.0;
    for (double v : loo) mean += v;
    mean /= kGroups;
    double ss = 0.0;
    for (double v : loo) ss += (v - mean) * (v - mean);
    full.standard_error = std::sqrt(static_cast<double>(kGroups - 1) / kGroups * ss);
  }
  return full;
}

XiStatistic xi_statistic(const std::function<DenseTensor(Rng&)>& sampler, std::size_t trials,
                         Rng& rng) {
  if (trials < 1) throw DomainError("xi_statistic: trials must be >= 1");
  std::vector<DenseTensor> samples;
  samples.reserve(trials);
  for (std::size_t t = 0; t < trials; ++t) samples.push_back(sampler(rng));
  return xi_from_samples(samples);
}

double eigen_raw_moment(const EnsembleSpec& spec, unsigned q) {
  const double lo = spec.eig_low;
  const double hi = spec.eig_high;
  switch (spec.law) {
    case EigenLaw::uniform:
      if (hi == lo) return std::pow(hi, q);
      return (std::pow(hi, q + 1) - std::pow(lo, q + 1)) / ((q + 1.0) * (hi - lo));
    case EigenLaw::rademacher:
      return 0.5 * (std::pow(lo, q) + std::pow(hi, q));
    case EigenLaw::gaussian: {
      const double c = 0.5 * (lo + hi);
      const double s = 0.5 * (hi - lo);
      double total = 0.0;
      double binom = 1.0;      // C(q, i)
      double double_fact = 1.0;  // (i-1)!!
      for (unsigned i = 0; i <= q; ++i) {
        if (i > 0) binom = binom * (q - i + 1) / i;
        if (i % 2 == 0) {
          if (i >= 2) double_fact *= (i - 1);
          total += binom * std::pow(c, q - i) * std::pow(s, i) * double_fact;
        }
      }
      return total;
    }
  }
  return 0.0;
}

XiStatistic xi_closed_form(const EnsembleSampler& sampler, std::span<const double> alpha,
                           unsigned power) {
  const auto& spec = sampler.spec();
  if (spec.family == EnsembleFamily::generic_hermitian)
    throw DomainError("xi_closed_form: only commuting and scalar families have a closed form");
  const std::size_t d = spec.base_shape.row_size();
  if (alpha.size() != d) throw ShapeError("xi_closed_form: alpha length must match dimension");

  // Central second and fourth moments of lambda^power.
  const double mu = eigen_raw_moment(spec, power);
  const double r2 = eigen_raw_moment(spec, 2 * power);
  const double r3 = eigen_raw_moment(spec, 3 * power);
  const double r4 = eigen_raw_moment(spec, 4 * power);
  double m2 = std::max(0.0, r2 - mu * mu);
  double m4 = std::max(0.0, r4 - 4 * mu * r3 + 6 * mu * mu * r2 - 3 * mu * mu * mu * mu);
  if (spec.eig_low == spec.eig_high) m2 = m4 = 0.0;

  const DenseTensor& u = sampler.shared_unitary();
  std::vector<double> x2(d * d), x4(d * d), y2(d * d), y4(d * d);
  for (std::size_t a = 0; a < d; ++a)
    for (std::size_t b = 0; b < d; ++b) {
      const std::size_t idx = a * d + b;
      if (spec.family == EnsembleFamily::scalar) {
        Complex s(0.0, 0.0);
        for (std::size_t c = 0; c < d; ++c) s += u(a, c) * alpha[c] * std::conj(u(b, c));
        const double re = s.real();
        const double im = s.imag();
        x2[idx] = re * re * m2;
        x4[idx] = re * re * re * re * m4;
        y2[idx] = im * im * m2;
        y4[idx] = im * im * im * im * m4;
        continue;
      }
      double sx2 = 0.0, sx4 = 0.0, sx22 = 0.0, sy2 = 0.0, sy4 = 0.0, sy22 = 0.0;
      for (std::size_t c = 0; c < d; ++c) {
        const Complex w = u(a, c) * std::conj(u(b, c));
        const double a2 = alpha[c] * alpha[c];
        const double wx = w.real() * w.real();
        const double wy = w.imag() * w.imag();
        sx2 += wx * a2 * m2;
        sx4 += wx * wx * a2 * a2 * m4;
        sx22 += wx * wx * a2 * a2 * m2 * m2;
        sy2 += wy * a2 * m2;
        sy4 += wy * wy * a2 * a2 * m4;
        sy22 += wy * wy * a2 * a2 * m2 * m2;
      }
      // E(sum w z)^4 = sum w^4 E z^4 + 3 [(sum w^2 E z^2)^2 - sum w^4 (E z^2)^2]
      x2[idx] = sx2;
      x4[idx] = sx4 + 3.0 * (sx2 * sx2 - sx22);
      y2[idx] = sy2;
      y4[idx] = sy4 + 3.0 * (sy2 * sy2 - sy22);
    }
  return xi_from_moments(d, d, x2, x4, y2, y4);
}

}  // namespace hwt
