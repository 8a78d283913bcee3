#include "commands.hpp"

#include <fmt/format.h>

#include <CLI11.hpp>
#include <cmath>
#include <fstream>
#include <functional>
#include <random>
#include <vector>

#include "hwt/error.hpp"
#include "hwt/fixture.hpp"
#include "hwt/quadform.hpp"
#include "hwt/spectral.hpp"
#include "report.hpp"

namespace hwt::cli {

std::uint64_t fnv1a(const std::string& text, std::uint64_t state) {
  for (unsigned char c : text) {
    state ^= c;
    state *= 0x100000001b3ULL;
  }
  return state;
}

namespace {

DenseTensor random_tensor(const TensorShape& shape, Rng& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<Complex> e(shape.size());
  for (auto& z : e) z = Complex(g(rng), g(rng));
  return DenseTensor(shape, std::move(e));
}

Dims random_dims(Rng& rng, std::size_t order) {
  std::uniform_int_distribution<std::size_t> d(1, 3);
  Dims out(order);
  for (auto& v : out) v = d(rng);
  return out;
}

DenseTensor random_pd(const Dims& dims, Rng& rng) {
  const DenseTensor g = random_tensor(TensorShape::square(dims), rng);
  return einstein_product(g, conjugate_transpose(g)) + 0.1 * identity(dims);
}

struct Invariant {
  std::string name;
  double tolerance;
  // Returns the worst deviation over one random case (<= tolerance passes).
  std::function<double(Rng&)> worst_case;
};

std::vector<Invariant> invariant_suite() {
  std::vector<Invariant> suite;
  suite.push_back({"tensor.unfold_homomorphism", 1e-10, [](Rng& rng) {
                     std::uniform_int_distribution<std::size_t> ord(1, 2);
                     const Dims i = random_dims(rng, ord(rng));
                     const Dims j = random_dims(rng, ord(rng));
                     const Dims k = random_dims(rng, ord(rng));
                     const DenseTensor a = random_tensor(TensorShape(i, j), rng);
                     const DenseTensor b = random_tensor(TensorShape(j, k), rng);
                     const UnfoldedMatrix c = unfold(einstein_product(a, b));
                     const UnfoldedMatrix ua = unfold(a);
                     const UnfoldedMatrix ub = unfold(b);
                     double worst = 0.0;
                     for (std::size_t r = 0; r < c.rows; ++r)
                       for (std::size_t q = 0; q < c.cols; ++q) {
                         Complex s(0.0, 0.0);
                         for (std::size_t p = 0; p < ua.cols; ++p) s += ua(r, p) * ub(p, q);
                         worst = std::max(worst, std::abs(s - c(r, q)));
                       }
                     return worst;
                   }});
  suite.push_back({"tensor.fold_unfold_roundtrip", 0.0, [](Rng& rng) {
                     const TensorShape s(random_dims(rng, 2), random_dims(rng, 1));
                     const DenseTensor a = random_tensor(s, rng);
                     return max_abs_diff(fold(unfold(a), s), a);
                   }});
  suite.push_back({"tensor.conjugate_transpose_involution", 0.0, [](Rng& rng) {
                     const DenseTensor a = random_tensor(TensorShape(random_dims(rng, 2), random_dims(rng, 2)), rng);
                     return max_abs_diff(conjugate_transpose(conjugate_transpose(a)), a);
                   }});
  suite.push_back({"tensor.einstein_associativity", 1e-10, [](Rng& rng) {
                     const Dims d = random_dims(rng, 2);
                     const TensorShape s = TensorShape::square(d);
                     const DenseTensor a = random_tensor(s, rng);
                     const DenseTensor b = random_tensor(s, rng);
                     const DenseTensor c = random_tensor(s, rng);
                     return max_abs_diff(einstein_product(einstein_product(a, b), c),
                                         einstein_product(a, einstein_product(b, c)));
                   }});
  suite.push_back({"tensor.inverse", 1e-8, [](Rng& rng) {
                     const Dims d = random_dims(rng, 2);
                     const DenseTensor a = random_pd(d, rng);
                     return max_abs_diff(einstein_product(a, inverse(a)), identity(d));
                   }});
  suite.push_back({"spectral.ky_fan_triangle", 1e-9, [](Rng& rng) {
                     const TensorShape s(random_dims(rng, 2), random_dims(rng, 1));
                     const DenseTensor a = random_tensor(s, rng);
                     const DenseTensor b = random_tensor(s, rng);
                     const std::size_t r = std::min(s.row_size(), s.col_size());
                     double worst = 0.0;
                     for (std::size_t k = 1; k <= r; ++k)
                       worst = std::max(worst, ky_fan_norm(a + b, k) - ky_fan_norm(a, k) - ky_fan_norm(b, k));
                     return worst;
                   }});
  suite.push_back({"spectral.weak_majorization", 0.0, [](Rng& rng) {
                     const TensorShape s = TensorShape::square(random_dims(rng, 2));
                     const DenseTensor a = random_tensor(s, rng);
                     const DenseTensor b = random_tensor(s, rng);
                     const auto sab = singular_values(a + b);
                     auto sa = singular_values(a);
                     const auto sb = singular_values(b);
                     for (std::size_t i = 0; i < sa.size(); ++i) sa[i] += sb[i];
                     return weakly_majorizes(sa, sab, 1e-9) ? 0.0 : 1.0;
                   }});
  suite.push_back({"spectral.spectral_mapping", 1e-8, [](Rng& rng) {
                     const DenseTensor h = sample_hermitian(TensorShape::square(random_dims(rng, 2)), rng);
                     const auto lam = herm_eigenvalues(h);
                     const auto mapped = herm_eigenvalues(spectral_function(h, [](double x) { return x * x; }));
                     std::vector<double> expect;
                     for (double l : lam) expect.push_back(l * l);
                     std::sort(expect.begin(), expect.end(), std::greater<>());
                     double worst = 0.0;
                     for (std::size_t i = 0; i < expect.size(); ++i)
                       worst = std::max(worst, std::abs(expect[i] - mapped[i]) / (1.0 + std::abs(expect[i])));
                     return worst;
                   }});
  suite.push_back({"spectral.power_norm_subadditivity", 1e-9, [](Rng& rng) {
                     const Dims d = random_dims(rng, 1);
                     const DenseTensor a = random_pd(d, rng);
                     const DenseTensor b = random_pd(d, rng);
                     double worst = -1.0;
                     for (unsigned n = 1; n <= 3; ++n)
                       for (std::size_t k = 1; k <= a.shape().row_size(); ++k)
                         worst = std::max(worst, power_norm_gap(a, b, n, k));
                     return std::max(worst, 0.0);
                   }});
  suite.push_back({"quadform.decomposition_identity", 1e-9, [](Rng& rng) {
                     std::uniform_int_distribution<std::size_t> nd(1, 4);
                     const std::size_t n = nd(rng);
                     const TensorShape s = TensorShape::square(random_dims(rng, 1));
                     std::vector<DenseTensor> xs;
                     for (std::size_t i = 0; i < n; ++i) xs.push_back(sample_hermitian(s, rng));
                     std::vector<DenseTensor> blocks(n * n, zeros(s));
                     for (std::size_t i = 0; i < n; ++i)
                       for (std::size_t j = i; j < n; ++j) {
                         const DenseTensor h = sample_hermitian(s, rng);
                         blocks[i * n + j] = h;
                         blocks[j * n + i] = h;
                       }
                     const QuadDecomposition q = quadratic_form(BlockVector(xs), BlockMatrix(n, blocks));
                     const DenseTensor resid = q.total - q.diagonal_sum() - q.coupling_sum();
                     return resid.max_abs() / (1.0 + q.total.max_abs());
                   }});
  suite.push_back({"quadform.poly_apply_spectral", 1e-9, [](Rng& rng) {
                     const DenseTensor h = sample_hermitian(TensorShape::square(random_dims(rng, 2)), rng);
                     const std::vector<double> a{1.0, 2.0, 1.0};
                     const DenseTensor p = poly_apply(a, h);
                     const DenseTensor s = spectral_function(h, [](double x) { return 1.0 + 2.0 * x + x * x; });
                     return max_abs_diff(p, s) / (1.0 + s.max_abs());
                   }});
  suite.push_back({"quadform.theta_split_sum", 1e-12, [](Rng& rng) {
                     std::uniform_real_distribution<double> u(0.1, 3.0);
                     const std::vector<double> a{u(rng), u(rng), u(rng), u(rng)};
                     const double Theta = a[0] * 2.0 + u(rng);
                     double worst = 0.0;
                     for (auto policy : {ThetaSplitPolicy::equal, ThetaSplitPolicy::proportional}) {
                       const auto th = theta_split(Theta, a, 2, policy);
                       double sum = 0.0;
                       for (double t : th) sum += t;
                       worst = std::max(worst, std::abs(sum - (Theta - a[0] * 2.0)));
                     }
                     return worst;
                   }});
  return suite;
}

int write_outputs(const ExperimentConfig& cfg, const nlohmann::json& report,
                  const std::function<void(std::ostream&)>& csv, std::ostream& err) {
  std::error_code ec;
  std::filesystem::create_directories(cfg.out_dir, ec);
  if (ec) {
    err << "error: cannot create output directory " << cfg.out_dir.string() << ": " << ec.message() << '\n';
    return kExitConfigError;
  }
  std::ofstream js(cfg.out_dir / cfg.json_name);
  std::ofstream cs(cfg.out_dir / cfg.csv_name);
  if (!js || !cs) {
    err << "error: cannot write reports under " << cfg.out_dir.string() << '\n';
    return kExitConfigError;
  }
  js << report.dump(2) << '\n';
  csv(cs);
  return kExitPass;
}


int run_dominance(const ExperimentConfig& cfg, bool evaluate, std::ostream& out, std::ostream& err) {
  if (cfg.dominance.Theta_grid.empty()) {
    err << "error: config has no Theta grid\n";
    return kExitConfigError;
  }
  DominanceReport rep;
  try {
    rep = run_dominance_experiment(cfg.dominance, evaluate);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfigError;
  }
  const int io = write_outputs(cfg, to_json(rep), [&](std::ostream& os) { write_csv(os, rep); }, err);
  if (io != kExitPass) return io;
  for (const auto& row : rep.rows) {
    out << fmt::format("Theta={:<10.6g} ", row.Theta);
    if (evaluate) out << fmt::format("p_hat={:<10.6g} ci_low={:<10.6g} ", row.tail.p_hat, row.tail.ci_low);
    if (row.bound) out << fmt::format("bound={:<12.6g} ", row.bound->value);
    out << to_string(row.verdict);
    if (!row.reason.empty()) out << " (" << row.reason << ')';
    out << '\n';
  }
  if (!rep.assumptions.all_ok())
    for (const auto& note : rep.assumptions.notes) out << "assumption: " << note << '\n';
  out << "verdict: " << to_string(rep.overall()) << '\n';
  return exit_code_for(rep.overall());
}

}  // namespace

int cmd_selftest(const SelftestOptions& opts, std::ostream& out, std::ostream& err) {
  std::uint64_t digest = fnv1a("");
  auto log = [&](const std::string& line) {
    out << line << '\n';
    digest = fnv1a(line + "\n", digest);
  };
  if (opts.fixture) {
    try {
      const DenseTensor t = load_fixture(*opts.fixture);
      log(fmt::format("ok fixture.parse {} {}", opts.fixture->filename().string(), t.shape().to_string()));
    } catch (const std::exception& e) {
      err << "FAIL fixture.parse: " << e.what() << '\n';
      return kExitConfigError;
    }
  }
  const SeedPolicy seeds(opts.seed);
  int failures = 0;
  std::uint64_t index = 0;
  for (const auto& inv : invariant_suite()) {
    double worst = 0.0;
    std::string error;
    for (std::size_t c = 0; c < opts.cases; ++c) {
      Rng rng = seeds.stream(streams::kSelftest, index * 100000 + c);
      try {
        worst = std::max(worst, inv.worst_case(rng));
      } catch (const std::exception& e) {
        error = e.what();
        break;
      }
    }
    ++index;
    if (!error.empty() || worst > inv.tolerance) {
      ++failures;
      log(fmt::format("FAIL {} worst={:.17g} tol={:.3g}{}", inv.name, worst, inv.tolerance,
                      error.empty() ? "" : " error=" + error));
    } else {
      log(fmt::format("ok {} cases={} worst={:.3e}", inv.name, opts.cases, worst));
    }
  }
  out << fmt::format("digest {:016x}\n", digest);
  if (failures > 0) {
    err << failures << " invariant(s) violated\n";
    return kExitViolation;
  }
  return kExitPass;
}

int exit_code_for(Verdict v) {
  switch (v) {
    case Verdict::violation: return kExitViolation;
    case Verdict::refused: return kExitRefusal;
    default: return kExitPass;
  }
}

int cmd_bound(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err) {
  return run_dominance(cfg, false, out, err);
}

int cmd_experiment(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err) {
  return run_dominance(cfg, true, out, err);
}

int cmd_decouple(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err) {
  if (!cfg.decoupling) {
    err << "error: config has no 'decoupling' section\n";
    return kExitConfigError;
  }
  const DecouplingSettings& s = *cfg.decoupling;
  DecouplingReport rep;
  try {
    const EnsembleSampler sampler(cfg.dominance.ensemble);
    rep = estimate_decoupling(sampler, named_kernel(s.kernel, cfg.dominance.ensemble.base_shape), s.m, s.k,
                              s.theta, s.trials, SeedPolicy(cfg.dominance.master_seed),
                              cfg.dominance.threads);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfigError;
  }
  const int io = write_outputs(cfg, to_json(rep), [&](std::ostream& os) { write_decoupling_csv(os, rep); }, err);
  if (io != kExitPass) return io;
  out << "D_hat: " << (rep.d_hat ? format_double(*rep.d_hat) : std::string("not found")) << " ("
      << rep.label << ")\n";
  if (!rep.valid || rep.uninformative) {
    out << "verdict: refused (" << (rep.valid ? "uninformative grid" : "too many non-finite trials") << ")\n";
    return kExitRefusal;
  }
  if (!rep.d_hat) {
    out << "verdict: violation (no D up to " << kDecouplingDMax << ")\n";
    return kExitViolation;
  }
  out << "verdict: pass\n";
  return kExitPass;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Block Hanson-Wright bounds for random tensors"};
  app.require_subcommand(1);

  SelftestOptions self;
  std::string fixture;
  auto* selftest = app.add_subcommand("selftest", "Run the invariant suite");
  selftest->add_option("--seed", self.seed, "Master seed");
  selftest->add_option("--fixture", fixture, "Tensor fixture to parse first");

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> trials;
  std::string out_dir;
  std::size_t threads = 1;
  std::vector<CLI::App*> config_cmds;
  for (const auto& [name, help] : {std::pair{"bound", "Evaluate bounds from pilot statistics"},
                                   std::pair{"experiment", "Run the dominance experiment"},
                                   std::pair{"decouple", "Estimate the decoupling constant"}}) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "JSON configuration")->required();
    sub->add_option("--seed", seed, "Override master_seed");
    sub->add_option("--trials", trials, "Override trial count");
    sub->add_option("--out", out_dir, "Output directory");
    sub->add_option("--threads", threads, "Worker threads (does not change results)")
        ->check(CLI::PositiveNumber);
    config_cmds.push_back(sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitConfigError;
  }

  if (selftest->parsed()) {
    if (!fixture.empty()) self.fixture = fixture;
    return cmd_selftest(self, out, err);
  }

  ExperimentConfig cfg;
  try {
    cfg = load_config(config_path);
    Overrides o;
    o.seed = seed;
    o.trials = trials;
    if (!out_dir.empty()) o.out_dir = out_dir;
    o.threads = threads;
    apply_overrides(cfg, o);
  } catch (const std::exception& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfigError;
  }
  if (config_cmds[0]->parsed()) return cmd_bound(cfg, out, err);
  if (config_cmds[1]->parsed()) return cmd_experiment(cfg, out, err);
  return cmd_decouple(cfg, out, err);
}

}  // namespace hwt::cli
