#include "epivalue/valuation.h"

#include "epivalue/error.h"

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>

namespace epivalue {

void validate(const ValuationParams &p) {
    if (!(p.base_vsl_usd > 0.0) || !std::isfinite(p.base_vsl_usd)) {
        throw Error{ErrorCode::invalid_parameter, "base_vsl_usd must be > 0"};
    }
    if (!(p.reference_income_usd > 0.0) || !std::isfinite(p.reference_income_usd)) {
        throw Error{ErrorCode::invalid_parameter, "reference_income_usd must be > 0"};
    }
    if (!(p.income_elasticity >= 0.0) || !std::isfinite(p.income_elasticity)) {
        throw Error{ErrorCode::invalid_parameter, "income elasticity must be >= 0"};
    }
    if (!(p.vsl_floor_usd >= 0.0)) {
        throw Error{ErrorCode::invalid_parameter, "vsl floor must be >= 0"};
    }
}

double transfer_vsl(const ValuationParams &params, double country_income_usd) {
    validate(params);
    if (!(country_income_usd > 0.0) || !std::isfinite(country_income_usd)) {
        throw Error{ErrorCode::non_positive_income,
                    fmt::format("country income {} must be > 0", country_income_usd)};
    }
    const double ratio = country_income_usd / params.reference_income_usd;
    const double transferred =
        ratio == 1.0 ? params.base_vsl_usd
                     : params.base_vsl_usd * std::pow(ratio, params.income_elasticity);
    return std::max(params.vsl_floor_usd, transferred);
}

double value_mortality(double deaths, double vsl_usd) {
    if (!(deaths >= 0.0) || !(vsl_usd >= 0.0)) {
        throw Error{ErrorCode::invalid_parameter, "deaths and vsl must be >= 0"};
    }
    return deaths * vsl_usd;
}

double welfare_loss_pct_gdp(double loss_usd, double gdp_usd) {
    if (!(gdp_usd > 0.0)) {
        throw Error{ErrorCode::non_positive_gdp, fmt::format("gdp {} must be > 0", gdp_usd)};
    }
    return 100.0 * loss_usd / gdp_usd;
}

double marginal_value(const ValuationResult &scenario, const ValuationResult &unmitigated,
                      double gdp_usd) {
    if (scenario.country_id != unmitigated.country_id) {
        throw Error{ErrorCode::country_mismatch,
                    fmt::format("cannot compare {} against {}", scenario.country_id,
                                unmitigated.country_id)};
    }
    if (!(gdp_usd > 0.0)) {
        throw Error{ErrorCode::non_positive_gdp, fmt::format("gdp {} must be > 0", gdp_usd)};
    }
    return 100.0 * (unmitigated.vsl_loss_usd - scenario.vsl_loss_usd) / gdp_usd;
}

InfantDeathRange contraction_mortality(double gdp_shock_pct, double annual_births) {
    if (!(gdp_shock_pct >= 0.0) || !(annual_births >= 0.0)) {
        throw Error{ErrorCode::invalid_parameter, "shock and births must be >= 0"};
    }
    return {gdp_shock_pct * infant_deaths_per_1000_births_low / 1000.0 * annual_births,
            gdp_shock_pct * infant_deaths_per_1000_births_high / 1000.0 * annual_births};
}

ValuationResult value_scenario(const std::string &country_id, ScenarioKind scenario,
                               double deaths, double gdp_usd, double gni_per_capita_usd,
                               const ValuationParams &params) {
    ValuationResult r;
    r.country_id = country_id;
    r.scenario = scenario;
    r.total_deaths = deaths;
    r.vsl_usd = transfer_vsl(params, gni_per_capita_usd);
    r.vsl_loss_usd = value_mortality(deaths, r.vsl_usd);
    r.loss_pct_gdp = welfare_loss_pct_gdp(r.vsl_loss_usd, gdp_usd);
    return r;
}

void to_json(nlohmann::json &j, const ValuationParams &p) {
    j = nlohmann::json{{"base_vsl_usd", p.base_vsl_usd},
                       {"reference_income_usd", p.reference_income_usd},
                       {"elasticity", p.income_elasticity},
                       {"floor_usd", p.vsl_floor_usd}};
}

void from_json(const nlohmann::json &j, ValuationParams &p) {
    p = ValuationParams{};
    p.base_vsl_usd = j.value("base_vsl_usd", p.base_vsl_usd);
    p.reference_income_usd = j.value("reference_income_usd", p.reference_income_usd);
    p.income_elasticity = j.value("elasticity", p.income_elasticity);
    p.vsl_floor_usd = j.value("floor_usd", p.vsl_floor_usd);
    validate(p);
}

} // namespace epivalue
