#include "report.hpp"

#include <fmt/format.h>

#include <cmath>

namespace hwt::cli {

using nlohmann::json;

namespace {

json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

template <class T>
json opt(const std::optional<T>& v) {
  return v ? num(*v) : json(nullptr);
}

json num_table(const std::vector<std::vector<double>>& t) {
  json out = json::array();
  for (const auto& row : t) {
    json r = json::array();
    for (double v : row) r.push_back(num(v));
    out.push_back(r);
  }
  return out;
}

json stats_json(const SummandStats& s) {
  return {{"mean_sigma1", num(s.mean_sigma1)}, {"xi", num(s.xi)}};
}

}  // namespace

std::string format_double(double v) { return std::isfinite(v) ? fmt::format("{:.17g}", v) : std::string(); }

json to_json(const TailEstimate& e) {
  return {{"theta", num(e.theta)}, {"trials", e.trials},      {"hits", e.hits},
          {"p_hat", num(e.p_hat)}, {"ci_low", num(e.ci_low)}, {"ci_high", num(e.ci_high)}};
}

json to_json(const BoundValue& b) {
  json trace = json::array();
  for (const auto& t : b.trace) {
    json term = {{"kind", t.kind}, {"j", t.j}, {"value", num(t.value)}, {"t_star", num(t.t_star)}};
    term["i"] = t.i ? json(*t.i) : json(nullptr);
    trace.push_back(term);
  }
  return {{"value", num(b.value)},   {"clamped", num(b.clamped())}, {"t_star", num(b.t_star)},
          {"boundary", b.boundary}, {"overflow", b.overflow},      {"trace", trace}};
}

json to_json(const AssumptionReport& r) {
  return {{"samples", r.samples},
          {"all_ok", r.all_ok()},
          {"commute_ok", r.commute_ok},
          {"commute_residual", num(r.commute_residual)},
          {"exp_domination_ok", r.exp_domination_ok},
          {"exp_domination_margin", num(r.exp_domination_margin)},
          {"t_grid", r.t_grid},
          {"j_range", r.j_range},
          {"pd_ok", r.pd_ok},
          {"pd_margin", num(r.pd_margin)},
          {"R_d_observed", num(r.R_d_observed)},
          {"R_c_observed", num(r.R_c_observed)},
          {"R_d_ok", r.R_d_ok},
          {"R_c_ok", r.R_c_ok},
          {"K_table", num_table(r.K_table)},
          {"K_ok", r.K_ok},
          {"hermitian_residual", num(r.hermitian_residual)},
          {"notes", r.notes}};
}

json to_json(const DominanceReport& r) {
  json rows = json::array();
  for (const auto& row : r.rows) {
    json jr = {{"Theta", num(row.Theta)},
               {"verdict", to_string(row.verdict)},
               {"reason", row.reason},
               {"theta_split", row.theta_split}};
    jr["tail"] = r.evaluated ? to_json(row.tail) : json(nullptr);
    jr["bound"] = row.bound ? to_json(*row.bound) : json(nullptr);
    rows.push_back(jr);
  }
  json diag = json::array();
  for (const auto& s : r.diag_stats) diag.push_back(stats_json(s));
  json coupling = json::array();
  for (const auto& row : r.coupling_stats) {
    json jr = json::array();
    for (const auto& s : row) jr.push_back(stats_json(s));
    coupling.push_back(jr);
  }
  return {{"report", "dominance"},
          {"mode", to_string(r.mode)},
          {"verdict", to_string(r.overall())},
          {"seed_policy",
           {{"master_seed", r.master_seed},
            {"pilot_seed", r.pilot_seed},
            {"generator", "mt19937_64 seeded by splitmix64(master, stream, index)"}}},
          {"trials", r.trials},
          {"pilot_trials", r.pilot_trials},
          {"excluded_trials", r.excluded},
          {"valid", r.valid},
          {"evaluated", r.evaluated},
          {"mean_estimate_trials", r.mean_estimate_trials},
          {"declared", {{"R_d", num(r.R_d)}, {"R_c", num(r.R_c)}, {"K", num_table(r.K)}}},
          {"statistics", {{"diag", diag}, {"coupling", coupling}}},
          {"assumptions", to_json(r.assumptions)},
          {"rows", rows}};
}

json to_json(const DecouplingReport& r) {
  json lhs = json::array();
  for (const auto& e : r.lhs) lhs.push_back(to_json(e));
  json rhs = json::array();
  for (const auto& e : r.rhs) rhs.push_back(to_json(e));
  return {{"report", "decoupling"},
          {"label", r.label},
          {"m_order", r.m_order},
          {"n", r.n},
          {"k", r.k},
          {"trials", r.trials},
          {"exact", r.exact},
          {"valid", r.valid},
          {"uninformative", r.uninformative},
          {"theta_grid", r.theta_grid},
          {"lhs", lhs},
          {"rhs", rhs},
          {"D_hat", opt(r.d_hat)},
          {"D_hat_lenient", opt(r.d_hat_lenient)},
          {"D_hat_conservative", opt(r.d_hat_conservative)},
          {"C_m", opt(r.c_m)},
          {"E_m", opt(r.e_m)}};
}

void write_csv(std::ostream& os, const DominanceReport& r) {
  os << kCsvHeader << '\n';
  for (const auto& row : r.rows) {
    const bool tail = r.evaluated;
    os << format_double(row.Theta) << ','
       << (tail ? format_double(row.tail.p_hat) : "") << ','
       << (tail ? format_double(row.tail.ci_low) : "") << ','
       << (tail ? format_double(row.tail.ci_high) : "") << ','
       << (row.bound ? format_double(row.bound->value) : "") << ','
       << (row.bound ? format_double(row.bound->t_star) : "") << ','
       << to_string(row.verdict) << '\n';
  }
}

void write_decoupling_csv(std::ostream& os, const DecouplingReport& r) {
  os << "theta,lhs_p_hat,lhs_ci_low,lhs_ci_high,rhs_p_hat,rhs_ci_low,rhs_ci_high\n";
  for (std::size_t g = 0; g < r.theta_grid.size(); ++g) {
    const auto& l = r.lhs[g];
    const auto& q = r.rhs[g];
    os << format_double(r.theta_grid[g]) << ',' << format_double(l.p_hat) << ','
       << format_double(l.ci_low) << ',' << format_double(l.ci_high) << ','
       << format_double(q.p_hat) << ',' << format_double(q.ci_low) << ','
       << format_double(q.ci_high) << '\n';
  }
}

}  // namespace hwt::cli
