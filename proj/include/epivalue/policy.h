#pragma once

#include "epivalue/bands.h"

#include <nlohmann/json_fwd.hpp>

#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace epivalue {

enum class ScenarioKind {
    unmitigated,
    social_distancing,
    social_distancing_plus,
    late_suppression,
    early_suppression,
};

std::string_view to_string(ScenarioKind kind) noexcept;
std::optional<ScenarioKind> parse_scenario_kind(std::string_view text);

/// The five shipped strategies in presentation order.
inline constexpr ScenarioKind all_scenario_kinds[] = {
    ScenarioKind::unmitigated, ScenarioKind::social_distancing,
    ScenarioKind::social_distancing_plus, ScenarioKind::late_suppression,
    ScenarioKind::early_suppression};

/// @brief One intervention strategy expressed as contact scaling.
///
/// Distancing kinds act from t = 0. Suppression kinds act from the day their
/// trigger fires. An active measure lasts `duration` days, or to the end of the
/// horizon when `duration` is empty.
struct PolicyScenario {
    ScenarioKind kind{ScenarioKind::unmitigated};
    double uniform_reduction{0.45};
    double elderly_reduction{0.60};
    std::size_t elderly_band{band_70_plus};
    double suppression_reduction{0.75};
    std::optional<double> trigger_threshold; ///< deaths per 100k per week
    std::optional<double> duration;
    /// When set, pairs involving the elderly get (1 - uniform)(1 - elderly) instead of
    /// (1 - elderly).
    bool compound_elderly_reduction{false};

    /// Shipped parameters for `kind` (1.6 late, 0.2 early trigger).
    static PolicyScenario make(ScenarioKind kind);

    bool is_suppression() const noexcept {
        return kind == ScenarioKind::late_suppression || kind == ScenarioKind::early_suppression;
    }

    bool operator==(const PolicyScenario &) const = default;
};

void validate(const PolicyScenario &scenario);

/// State a scenario reacts to: only the trigger time matters.
struct PolicyState {
    std::optional<double> trigger_time;
};

/// True while the scenario's measure is in force at day t.
bool measure_active(const PolicyScenario &scenario, double t, const PolicyState &state);

/// Multiplier on baseline contacts between bands i and j at day t, in [0, 1].
double contact_scaling(const PolicyScenario &scenario, double t, const PolicyState &state,
                       std::size_t band_i, std::size_t band_j);

/// Full n x n scaling matrix at day t.
SquareMatrix contact_scaling_matrix(const PolicyScenario &scenario, double t,
                                    const PolicyState &state, std::size_t bands);

/// Latching threshold detector fed one weekly death rate per simulated day.
class TriggerLatch {
  public:
    explicit TriggerLatch(double threshold);

    /// Returns whether the latch is (now) fired. Fires when rate >= threshold and
    /// rate > 0, so a zero threshold waits for the first death.
    bool update(double day, double weekly_rate_per_100k);

    bool fired() const noexcept { return fired_at_.has_value(); }
    std::optional<double> fired_at() const noexcept { return fired_at_; }
    double threshold() const noexcept { return threshold_; }

  private:
    double threshold_;
    std::optional<double> fired_at_;
};

/// Index of the first daily rate that fires the latch, if any.
std::optional<std::size_t> first_trigger_index(std::span<const double> daily_rates,
                                               double threshold);

/// Whether the latch has fired anywhere in this prefix of daily rates.
bool check_trigger(std::span<const double> daily_rates, double threshold);

void to_json(nlohmann::json &j, const PolicyScenario &scenario);
void from_json(const nlohmann::json &j, PolicyScenario &scenario);

} // namespace epivalue
