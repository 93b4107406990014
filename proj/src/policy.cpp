#include "epivalue/policy.h"

#include "epivalue/error.h"

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include <cmath>

namespace epivalue {

std::string_view to_string(ScenarioKind kind) noexcept {
    switch (kind) {
    case ScenarioKind::unmitigated: return "unmitigated";
    case ScenarioKind::social_distancing: return "social_distancing";
    case ScenarioKind::social_distancing_plus: return "social_distancing_plus";
    case ScenarioKind::late_suppression: return "late_suppression";
    case ScenarioKind::early_suppression: return "early_suppression";
    }
    return "unmitigated";
}

std::optional<ScenarioKind> parse_scenario_kind(std::string_view text) {
    for (auto kind : all_scenario_kinds) {
        if (to_string(kind) == text) {
            return kind;
        }
    }
    return std::nullopt;
}

PolicyScenario PolicyScenario::make(ScenarioKind kind) {
    PolicyScenario s;
    s.kind = kind;
    if (kind == ScenarioKind::late_suppression) {
        s.trigger_threshold = 1.6;
    } else if (kind == ScenarioKind::early_suppression) {
        s.trigger_threshold = 0.2;
    }
    return s;
}

void validate(const PolicyScenario &s) {
    auto fraction = [](double f) { return std::isfinite(f) && f >= 0.0 && f <= 1.0; };
    if (!fraction(s.uniform_reduction) || !fraction(s.elderly_reduction) ||
        !fraction(s.suppression_reduction)) {
        throw Error{ErrorCode::invalid_parameter,
                    fmt::format("{}: reductions must lie in [0,1]", to_string(s.kind))};
    }
    if (s.trigger_threshold && !(*s.trigger_threshold >= 0.0)) {
        throw Error{ErrorCode::invalid_parameter,
                    fmt::format("{}: trigger threshold must be >= 0", to_string(s.kind))};
    }
    if (s.is_suppression() && !s.trigger_threshold) {
        throw Error{ErrorCode::invalid_parameter,
                    fmt::format("{}: suppression needs a trigger threshold", to_string(s.kind))};
    }
    if (s.duration && !(*s.duration > 0.0)) {
        throw Error{ErrorCode::invalid_parameter,
                    fmt::format("{}: duration must be positive", to_string(s.kind))};
    }
}

bool measure_active(const PolicyScenario &s, double t, const PolicyState &state) {
    double start = 0.0;
    switch (s.kind) {
    case ScenarioKind::unmitigated:
        return false;
    case ScenarioKind::social_distancing:
    case ScenarioKind::social_distancing_plus:
        break;
    case ScenarioKind::late_suppression:
    case ScenarioKind::early_suppression:
        if (!state.trigger_time) {
            return false;
        }
        start = *state.trigger_time;
        break;
    }
    return t >= start && (!s.duration || t < start + *s.duration);
}

double contact_scaling(const PolicyScenario &s, double t, const PolicyState &state,
                       std::size_t band_i, std::size_t band_j) {
    if (!measure_active(s, t, state)) {
        return 1.0;
    }
    switch (s.kind) {
    case ScenarioKind::unmitigated:
        return 1.0;
    case ScenarioKind::social_distancing:
        return 1.0 - s.uniform_reduction;
    case ScenarioKind::social_distancing_plus:
        if (band_i >= s.elderly_band || band_j >= s.elderly_band) {
            const double elderly = 1.0 - s.elderly_reduction;
            return s.compound_elderly_reduction ? (1.0 - s.uniform_reduction) * elderly : elderly;
        }
        return 1.0 - s.uniform_reduction;
    case ScenarioKind::late_suppression:
    case ScenarioKind::early_suppression:
        return 1.0 - s.suppression_reduction;
    }
    return 1.0;
}

SquareMatrix contact_scaling_matrix(const PolicyScenario &s, double t, const PolicyState &state,
                                    std::size_t bands) {
    SquareMatrix m{bands};
    for (std::size_t i = 0; i < bands; ++i) {
        for (std::size_t j = 0; j < bands; ++j) {
            m(i, j) = contact_scaling(s, t, state, i, j);
        }
    }
    return m;
}

TriggerLatch::TriggerLatch(double threshold) : threshold_{threshold} {
    if (!(threshold >= 0.0)) {
        throw Error{ErrorCode::invalid_parameter, "trigger threshold must be >= 0"};
    }
}

bool TriggerLatch::update(double day, double weekly_rate_per_100k) {
    if (!fired_at_ && weekly_rate_per_100k > 0.0 && weekly_rate_per_100k >= threshold_) {
        fired_at_ = day;
    }
    return fired();
}

std::optional<std::size_t> first_trigger_index(std::span<const double> daily_rates,
                                               double threshold) {
    TriggerLatch latch{threshold};
    for (std::size_t d = 0; d < daily_rates.size(); ++d) {
        if (latch.update(static_cast<double>(d), daily_rates[d])) {
            return d;
        }
    }
    return std::nullopt;
}

bool check_trigger(std::span<const double> daily_rates, double threshold) {
    return first_trigger_index(daily_rates, threshold).has_value();
}

void to_json(nlohmann::json &j, const PolicyScenario &s) {
    j = nlohmann::json{{"kind", to_string(s.kind)},
                       {"uniform_reduction", s.uniform_reduction},
                       {"elderly_reduction", s.elderly_reduction},
                       {"elderly_band", s.elderly_band},
                       {"suppression_reduction", s.suppression_reduction},
                       {"compound_elderly_reduction", s.compound_elderly_reduction}};
    j["trigger_threshold"] =
        s.trigger_threshold ? nlohmann::json(*s.trigger_threshold) : nlohmann::json(nullptr);
    j["duration"] = s.duration ? nlohmann::json(*s.duration) : nlohmann::json(nullptr);
}

void from_json(const nlohmann::json &j, PolicyScenario &s) {
    // A bare string is shorthand for the shipped parameters of that kind.
    const auto kind_text = j.is_string() ? j.get<std::string>() : j.at("kind").get<std::string>();
    const auto kind = parse_scenario_kind(kind_text);
    if (!kind) {
        throw Error{ErrorCode::config_error, fmt::format("unknown scenario kind '{}'", kind_text)};
    }
    s = PolicyScenario::make(*kind);
    if (j.is_string()) {
        return;
    }
    s.uniform_reduction = j.value("uniform_reduction", s.uniform_reduction);
    s.elderly_reduction = j.value("elderly_reduction", s.elderly_reduction);
    s.elderly_band = j.value("elderly_band", s.elderly_band);
    s.suppression_reduction = j.value("suppression_reduction", s.suppression_reduction);
    s.compound_elderly_reduction =
        j.value("compound_elderly_reduction", s.compound_elderly_reduction);
    if (auto it = j.find("trigger_threshold"); it != j.end()) {
        s.trigger_threshold =
            it->is_null() ? std::nullopt : std::optional<double>{it->get<double>()};
    }
    if (auto it = j.find("duration"); it != j.end()) {
        s.duration = it->is_null() ? std::nullopt : std::optional<double>{it->get<double>()};
    }
    validate(s);
}

} // namespace epivalue
