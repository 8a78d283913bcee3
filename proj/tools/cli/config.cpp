#include "config.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include "hwt/error.hpp"
#include "hwt/fixture.hpp"

namespace hwt::cli {

using nlohmann::json;

namespace {

void require_keys(const json& j, const std::string& where, const std::set<std::string>& allowed) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, value] : j.items())
    if (!allowed.count(key)) throw ConfigError(where + ": unknown key '" + key + "'");
}

template <class T>
T get(const json& j, const std::string& key, const std::string& where) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(where + "." + key + ": " + e.what());
  }
}

template <class T>
void maybe(const json& j, const std::string& key, const std::string& where, T& out) {
  if (j.contains(key)) out = get<T>(j, key, where);
}

std::vector<double> parse_grid(const json& j, const std::string& where) {
  if (j.is_array()) {
    std::vector<double> out;
    for (const auto& v : j) {
      if (!v.is_number()) throw ConfigError(where + ": grid entries must be numbers");
      out.push_back(v.get<double>());
    }
    if (out.empty()) throw ConfigError(where + ": grid is empty");
    return out;
  }
  require_keys(j, where, {"from", "to", "points", "spacing"});
  const double from = get<double>(j, "from", where);
  const double to = get<double>(j, "to", where);
  const auto points = get<std::size_t>(j, "points", where);
  std::string spacing = "linear";
  maybe(j, "spacing", where, spacing);
  if (points < 1) throw ConfigError(where + ": points must be >= 1");
  if (spacing != "linear" && spacing != "log") throw ConfigError(where + ": spacing must be linear or log");
  if (spacing == "log" && !(from > 0.0 && to > 0.0)) throw ConfigError(where + ": log spacing needs positive ends");
  std::vector<double> out(points);
  for (std::size_t p = 0; p < points; ++p) {
    const double f = points == 1 ? 0.0 : static_cast<double>(p) / static_cast<double>(points - 1);
    out[p] = spacing == "linear" ? from + (to - from) * f
                                 : std::exp(std::log(from) + (std::log(to) - std::log(from)) * f);
  }
  out.front() = from;
  if (points > 1) out.back() = to;
  return out;
}

EnsembleSpec parse_ensemble(const json& j) {
  const std::string w = "ensemble";
  require_keys(j, w, {"dims", "n", "family", "law", "eig_low", "eig_high", "shared_unitary_seed",
                      "mean_zero", "real", "mean_estimate_trials"});
  EnsembleSpec e;
  if (j.contains("dims")) e.base_shape = TensorShape::square(get<Dims>(j, "dims", w));
  maybe(j, "n", w, e.n);
  if (j.contains("family")) e.family = parse_family(get<std::string>(j, "family", w));
  if (j.contains("law")) e.law = parse_law(get<std::string>(j, "law", w));
  maybe(j, "eig_low", w, e.eig_low);
  maybe(j, "eig_high", w, e.eig_high);
  maybe(j, "shared_unitary_seed", w, e.shared_unitary_seed);
  maybe(j, "mean_zero", w, e.mean_zero);
  maybe(j, "real", w, e.real);
  maybe(j, "mean_estimate_trials", w, e.mean_estimate_trials);
  return e;
}

BlockMatrixSpec parse_block_matrix(const json& j, const std::filesystem::path& base_dir) {
  const std::string w = "block_matrix";
  require_keys(j, w, {"generator", "diag_low", "diag_high", "off_low", "off_high", "fixtures"});
  BlockMatrixSpec b;
  std::string generator = "commuting";
  maybe(j, "generator", w, generator);
  if (generator != "commuting" && generator != "fixtures")
    throw ConfigError(w + ".generator: expected 'commuting' or 'fixtures'");
  maybe(j, "diag_low", w, b.diag_low);
  maybe(j, "diag_high", w, b.diag_high);
  maybe(j, "off_low", w, b.off_low);
  maybe(j, "off_high", w, b.off_high);
  if (generator == "fixtures") {
    if (!j.contains("fixtures")) throw ConfigError(w + ": fixtures generator needs a 'fixtures' list");
    for (const auto& p : get<std::vector<std::string>>(j, "fixtures", w)) {
      std::filesystem::path path(p);
      if (path.is_relative()) path = base_dir / path;
      if (!std::filesystem::exists(path)) throw ConfigError(w + ": fixture not found: " + path.string());
      try {
        b.fixtures.push_back(load_fixture(path));
      } catch (const ParseError& e) {
        throw ConfigError(w + ": " + path.string() + ": " + e.what());
      }
    }
  }
  return b;
}

}  // namespace

ExperimentConfig parse_config(const json& j, const std::filesystem::path& base_dir) {
  const std::string w = "config";
  require_keys(j, w, {"schema_version", "mode", "ensemble", "block_matrix", "polynomial", "s", "k",
                      "Theta", "theta_split", "trials", "pilot_trials", "pilot_seed", "t_search",
                      "C_cher", "D2", "master_seed", "declared", "exp_check_t_max", "output",
                      "decoupling"});
  if (!j.contains("schema_version")) throw ConfigError("config: missing schema_version");
  const int version = get<int>(j, "schema_version", w);
  if (version != kSchemaVersion)
    throw ConfigError("config: unsupported schema_version " + std::to_string(version) + " (expected " +
                      std::to_string(kSchemaVersion) + ")");

  ExperimentConfig cfg;
  DominanceConfig& d = cfg.dominance;
  try {
    if (j.contains("mode")) d.mode = parse_mode(get<std::string>(j, "mode", w));
    if (j.contains("ensemble")) d.ensemble = parse_ensemble(j.at("ensemble"));
    if (j.contains("block_matrix")) d.block_matrix = parse_block_matrix(j.at("block_matrix"), base_dir);
    maybe(j, "polynomial", w, d.poly);
    maybe(j, "s", w, d.s);
    maybe(j, "k", w, d.k);
    if (j.contains("Theta")) d.Theta_grid = parse_grid(j.at("Theta"), "config.Theta");
    if (j.contains("theta_split")) d.split = parse_split_policy(get<std::string>(j, "theta_split", w));
    maybe(j, "trials", w, d.trials);
    maybe(j, "pilot_trials", w, d.pilot_trials);
    if (j.contains("pilot_seed")) d.pilot_seed = get<std::uint64_t>(j, "pilot_seed", w);
    if (j.contains("t_search")) {
      const json& t = j.at("t_search");
      require_keys(t, "t_search", {"t_min", "t_max", "grid_points", "tol"});
      maybe(t, "t_min", "t_search", d.search.t_min);
      maybe(t, "t_max", "t_search", d.search.t_max);
      maybe(t, "grid_points", "t_search", d.search.grid_points);
      maybe(t, "tol", "t_search", d.search.tol);
    }
    maybe(j, "C_cher", w, d.c_cher);
    maybe(j, "D2", w, d.d2);
    maybe(j, "master_seed", w, d.master_seed);
    if (j.contains("declared")) {
      const json& dj = j.at("declared");
      require_keys(dj, "declared", {"R_d", "R_c", "K"});
      if (dj.contains("R_d")) d.R_d = get<double>(dj, "R_d", "declared");
      if (dj.contains("R_c")) d.R_c = get<double>(dj, "R_c", "declared");
      if (dj.contains("K")) d.K = get<std::vector<std::vector<double>>>(dj, "K", "declared");
    }
    maybe(j, "exp_check_t_max", w, d.exp_check_t_max);
    if (j.contains("output")) {
      const json& o = j.at("output");
      require_keys(o, "output", {"dir", "json", "csv"});
      if (o.contains("dir")) cfg.out_dir = get<std::string>(o, "dir", "output");
      maybe(o, "json", "output", cfg.json_name);
      maybe(o, "csv", "output", cfg.csv_name);
    }
    if (j.contains("decoupling")) {
      const json& dc = j.at("decoupling");
      require_keys(dc, "decoupling", {"m", "kernel", "k", "theta", "trials"});
      DecouplingSettings s;
      maybe(dc, "m", "decoupling", s.m);
      maybe(dc, "kernel", "decoupling", s.kernel);
      maybe(dc, "k", "decoupling", s.k);
      maybe(dc, "trials", "decoupling", s.trials);
      if (!dc.contains("theta")) throw ConfigError("decoupling: missing theta grid");
      s.theta = parse_grid(dc.at("theta"), "decoupling.theta");
      if (s.m != 2 && s.m != 3) throw ConfigError("decoupling.m: must be 2 or 3");
      cfg.decoupling = s;
    }
    if (d.Theta_grid.empty() && !cfg.decoupling) throw ConfigError("config: missing Theta grid");
    if (!d.Theta_grid.empty()) d.validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return parse_config(j, path.parent_path());
}

void apply_overrides(ExperimentConfig& cfg, const Overrides& o) {
  if (o.seed) cfg.dominance.master_seed = *o.seed;
  if (o.trials) {
    cfg.dominance.trials = *o.trials;
    if (cfg.decoupling) cfg.decoupling->trials = *o.trials;
  }
  if (o.out_dir) cfg.out_dir = *o.out_dir;
  cfg.dominance.threads = o.threads;
  if (!cfg.dominance.Theta_grid.empty()) {
    try {
      cfg.dominance.validate();
    } catch (const std::exception& e) {
      throw ConfigError(e.what());
    }
  }
}

}  // namespace hwt::cli
