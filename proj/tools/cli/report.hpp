#pragma once

#include <ostream>
#include <string>

#include <json.hpp>

#include "hwt/verify.hpp"

namespace hwt::cli {

/// theta,p_hat,ci_low,ci_high,bound,t_star,verdict
inline constexpr const char* kCsvHeader = "theta,p_hat,ci_low,ci_high,bound,t_star,verdict";

/// 17 significant digits; empty string for non-finite values.
std::string format_double(double v);

nlohmann::json to_json(const TailEstimate& e);
nlohmann::json to_json(const BoundValue& b);
nlohmann::json to_json(const AssumptionReport& r);
nlohmann::json to_json(const DominanceReport& r);
nlohmann::json to_json(const DecouplingReport& r);

void write_csv(std::ostream& os, const DominanceReport& r);
void write_decoupling_csv(std::ostream& os, const DecouplingReport& r);

}  // namespace hwt::cli
