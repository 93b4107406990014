#pragma once

#include "epivalue/policy.h"

#include <nlohmann/json_fwd.hpp>

#include <optional>
#include <string>
#include <utility>

namespace epivalue {

/// VSL benefit-transfer inputs. The reference country is the one whose VSL is known.
struct ValuationParams {
    double base_vsl_usd{10.0e6};
    double reference_income_usd{65000.0};
    double income_elasticity{1.0};
    double vsl_floor_usd{0.0};
};

void validate(const ValuationParams &params);

/// Infant deaths attributable to an economic contraction, low and high coefficient.
struct InfantDeathRange {
    double low{0.0};
    double high{0.0};
};

struct ValuationResult {
    std::string country_id;
    ScenarioKind scenario{ScenarioKind::unmitigated};
    double total_deaths{0.0};
    double vsl_usd{0.0};
    double vsl_loss_usd{0.0};
    double loss_pct_gdp{0.0};
    double marginal_value_pct_gdp{0.0};
    std::optional<InfantDeathRange> contraction_infant_deaths;
};

/// VSL_c = max(floor, base * (income / reference_income)^elasticity).
double transfer_vsl(const ValuationParams &params, double country_income_usd);

/// deaths * vsl.
double value_mortality(double deaths, double vsl_usd);

/// 100 * loss / gdp.
double welfare_loss_pct_gdp(double loss_usd, double gdp_usd);

/// 100 * (unmitigated loss - scenario loss) / gdp; negative when the scenario costs lives.
double marginal_value(const ValuationResult &scenario, const ValuationResult &unmitigated,
                      double gdp_usd);

/// Per-1% GDP contraction infant mortality coefficients, per 1,000 births.
inline constexpr double infant_deaths_per_1000_births_low = 0.24;
inline constexpr double infant_deaths_per_1000_births_high = 0.40;

InfantDeathRange contraction_mortality(double gdp_shock_pct, double annual_births);

/// Fills deaths, VSL, loss and %GDP for one scenario; marginal value is left at 0.
ValuationResult value_scenario(const std::string &country_id, ScenarioKind scenario,
                               double deaths, double gdp_usd, double gni_per_capita_usd,
                               const ValuationParams &params);

void to_json(nlohmann::json &j, const ValuationParams &params);
void from_json(const nlohmann::json &j, ValuationParams &params);

} // namespace epivalue
