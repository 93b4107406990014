#include "epivalue/epi_engine.h"

#include "epivalue/error.h"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace epivalue {

namespace {

constexpr double time_epsilon = 1e-9;

std::size_t point_index_at(std::span<const double> time, double t) {
    // Last grid point with time <= t.
    auto it = std::upper_bound(time.begin(), time.end(), t + time_epsilon);
    if (it == time.begin()) {
        return 0;
    }
    return static_cast<std::size_t>(std::distance(time.begin(), it)) - 1;
}

BandVector seed_distribution(const BandVector &pop, const EpiParams &params) {
    const auto n = pop.size();
    BandVector seeds(n, 0.0);
    std::size_t first = params.seed_band_first;
    std::size_t last = std::min(params.seed_band_last, n - 1);
    double weight = 0.0;
    if (first <= last) {
        for (std::size_t b = first; b <= last; ++b) weight += pop[b];
    }
    if (first > last || weight <= 0.0) {
        first = 0;
        last = n - 1;
        weight = std::accumulate(pop.begin(), pop.end(), 0.0);
    }
    for (std::size_t b = first; b <= last; ++b) {
        seeds[b] = std::min(pop[b], params.seed_infections * pop[b] / weight);
    }
    return seeds;
}

/// beta * scaling(i, j) * c(i, j) and the share of contacts each band keeps.
struct MixingPhase {
    SquareMatrix transmission;
    BandVector kept_share;
};

MixingPhase build_phase(const PolicyScenario &scenario, double t, const PolicyState &state,
                        const ContactMatrix &contacts, double beta) {
    const auto n = contacts.entries.size();
    const auto scaling = contact_scaling_matrix(scenario, t, state, n);
    MixingPhase phase{SquareMatrix{n}, BandVector(n, 1.0)};
    for (std::size_t i = 0; i < n; ++i) {
        double base = 0.0;
        double kept = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double c = contacts.entries(i, j);
            phase.transmission(i, j) = beta * scaling(i, j) * c;
            base += c;
            kept += scaling(i, j) * c;
        }
        // Bands without contacts report the scaling of their diagonal entry.
        phase.kept_share[i] = base > 0.0 ? kept / base : scaling(i, i);
    }
    return phase;
}

void check_step_fraction(double fraction, const char *what) {
    if (!(fraction <= 1.0) || !std::isfinite(fraction)) {
        throw Error{ErrorCode::non_finite_state,
                    fmt::format("{} per step is {:.3g} > 1; reduce dt", what, fraction)};
    }
}

} // namespace

void validate(const EpiParams &p) {
    if (!(p.r0_target > 0.0) || !std::isfinite(p.r0_target)) {
        throw Error{ErrorCode::invalid_r0, fmt::format("r0_target {} must be > 0", p.r0_target)};
    }
    if (!(p.dt > 0.0) || !std::isfinite(p.dt)) {
        throw Error{ErrorCode::invalid_parameter, fmt::format("dt {} must be > 0", p.dt)};
    }
    if (!(p.horizon >= p.dt) || !std::isfinite(p.horizon)) {
        throw Error{ErrorCode::invalid_parameter,
                    fmt::format("horizon {} must be >= dt {}", p.horizon, p.dt)};
    }
    if (!(p.seed_infections >= 1.0)) {
        throw Error{ErrorCode::invalid_parameter,
                    fmt::format("seed_infections {} must be >= 1", p.seed_infections)};
    }
    validate(p.severity);
}

double ModelPopulation::total() const noexcept {
    return std::accumulate(by_band.begin(), by_band.end(), 0.0);
}

ModelPopulation model_population(const CountryProfile &profile) {
    validate(profile);
    return ModelPopulation{profile.population_by_band, profile.general_beds(), profile.icu_beds};
}

double CompartmentState::total(Compartment c) const noexcept {
    const auto v = of(c);
    return std::accumulate(v.begin(), v.end(), 0.0);
}

double CompartmentState::band_total(std::size_t band) const noexcept {
    double sum = 0.0;
    for (std::size_t c = 0; c < compartment_count; ++c) {
        sum += values_[c * bands_ + band];
    }
    return sum;
}

double EpidemicTrajectory::total_population() const noexcept {
    return std::accumulate(population.begin(), population.end(), 0.0);
}

SquareMatrix unit_next_generation_matrix(const ContactMatrix &contacts, const BandVector &pop) {
    const auto n = contacts.entries.size();
    if (pop.size() != n) {
        throw Error{ErrorCode::invariant_violation, "population and contact matrix sizes differ"};
    }
    SquareMatrix k{n};
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (!(pop[j] > 0.0)) {
                throw Error{ErrorCode::zero_population_band,
                            fmt::format("band {} has population {}", j, pop[j])};
            }
            k(i, j) = contacts.entries(i, j) * pop[i] / pop[j];
        }
    }
    return k;
}

SquareMatrix next_generation_matrix(const ContactMatrix &contacts, const BandVector &pop,
                                    double beta, double infectious_period) {
    auto k = unit_next_generation_matrix(contacts, pop);
    const double factor = beta * infectious_period;
    for (std::size_t i = 0; i < k.size() * k.size(); ++i) {
        k.data()[i] *= factor;
    }
    return k;
}

double spectral_radius(const SquareMatrix &a) {
    const auto n = a.size();
    if (n == 0) {
        return 0.0;
    }
    double max_row = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            if (a(i, j) < 0.0) {
                throw Error{ErrorCode::invariant_violation, "spectral_radius needs a non-negative matrix"};
            }
            row += a(i, j);
        }
        max_row = std::max(max_row, row);
    }
    if (max_row == 0.0) {
        return 0.0;
    }

    // Shifting by half the largest row sum (an upper bound on rho) makes the iteration
    // converge for periodic matrices and keeps the contraction ratio small.
    const double shift = 0.5 * max_row;
    const auto &k = kernels::active_kernels();
    std::vector<double> x(n, 1.0), y(n);
    double estimate = 0.0;
    for (int iter = 0; iter < 200000; ++iter) {
        k.matvec(a.data(), x.data(), y.data(), n);
        double lo = std::numeric_limits<double>::infinity();
        double hi = 0.0;
        double ymax = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            y[i] += shift * x[i];
            ymax = std::max(ymax, y[i]);
        }
        const double xmax = *std::max_element(x.begin(), x.end());
        for (std::size_t i = 0; i < n; ++i) {
            if (x[i] > 1e-12 * xmax) {
                const double ratio = y[i] / x[i];
                lo = std::min(lo, ratio);
                hi = std::max(hi, ratio);
            }
        }
        estimate = 0.5 * (lo + hi) - shift;
        for (std::size_t i = 0; i < n; ++i) {
            x[i] = y[i] / ymax;
        }
        if (hi - lo <= 1e-14 * hi) {
            break;
        }
    }
    return std::max(estimate, 0.0);
}

double calibrate_beta(const ContactMatrix &contacts, const EpiParams &params,
                      const BandVector &pop) {
    if (!(params.r0_target > 0.0) || !std::isfinite(params.r0_target)) {
        throw Error{ErrorCode::invalid_r0,
                    fmt::format("r0_target {} must be > 0", params.r0_target)};
    }
    const double infectious_period = params.severity.infectious_period;
    if (!(infectious_period > 0.0)) {
        throw Error{ErrorCode::invalid_parameter, "infectious_period must be > 0"};
    }
    const double rho = spectral_radius(unit_next_generation_matrix(contacts, pop));
    if (!(rho > 0.0)) {
        throw Error{ErrorCode::singular_contact_matrix, "contact matrix has spectral radius 0"};
    }
    return params.r0_target / (infectious_period * rho);
}

CapacityAllocation allocate_capacity(double demand_general, double demand_icu, double free_general,
                                     double free_icu) {
    demand_general = std::max(demand_general, 0.0);
    demand_icu = std::max(demand_icu, 0.0);
    CapacityAllocation out;
    out.treated_general = std::min(demand_general, std::max(free_general, 0.0));
    out.untreated_general = demand_general - out.treated_general;
    out.treated_icu = std::min(demand_icu, std::max(free_icu, 0.0));
    out.untreated_icu = demand_icu - out.treated_icu;
    return out;
}

CapacityAllocation allocate_capacity(double demand_general, double demand_icu,
                                     const CountryProfile &profile) {
    return allocate_capacity(demand_general, demand_icu, profile.general_beds(), profile.icu_beds);
}

void ration_by_band(std::span<const double> demand, double treated_total, std::span<double> treated,
                    std::span<double> untreated) {
    const double total = std::accumulate(demand.begin(), demand.end(), 0.0);
    const double share = total > 0.0 ? std::clamp(treated_total / total, 0.0, 1.0) : 0.0;
    for (std::size_t b = 0; b < demand.size(); ++b) {
        treated[b] = share == 1.0 ? demand[b] : demand[b] * share;
        untreated[b] = demand[b] - treated[b];
    }
}

EpidemicTrajectory simulate(const ModelPopulation &population, const ContactMatrix &contacts,
                            const EpiParams &params, const PolicyScenario &scenario) {
    return simulate(population, contacts, params, scenario, kernels::active_kernels());
}

EpidemicTrajectory simulate(const ModelPopulation &population, const ContactMatrix &contacts,
                            const EpiParams &params, const PolicyScenario &scenario,
                            const kernels::KernelTable &kern) {
    validate(params);
    validate(scenario);
    const auto n = population.by_band.size();
    const auto &sev = params.severity;
    if (n == 0 || contacts.entries.size() != n || sev.bands() != n) {
        throw Error{ErrorCode::invariant_violation,
                    fmt::format("band counts differ: population {}, contacts {}, severity {}", n,
                                contacts.entries.size(), sev.bands())};
    }
    if (!(params.beta > 0.0) || !std::isfinite(params.beta)) {
        throw Error{ErrorCode::invalid_parameter, "beta is not calibrated"};
    }
    for (double v : population.by_band) {
        if (!(v >= 0.0)) {
            throw Error{ErrorCode::negative_value, "negative population band"};
        }
    }

    const double dt = params.dt;
    const double latent_out = dt / sev.latent_period;
    const double infectious_out = dt / sev.infectious_period;
    const double general_out = dt / sev.hosp_stay_general;
    const double icu_out = dt / sev.hosp_stay_icu;
    check_step_fraction(latent_out, "latent outflow");
    check_step_fraction(infectious_out, "infectious outflow");
    check_step_fraction(general_out, "general-ward discharge");
    check_step_fraction(icu_out, "ICU discharge");

    const auto steps = static_cast<std::size_t>(std::llround(params.horizon / dt));

    EpidemicTrajectory traj;
    traj.dt = dt;
    traj.bands = n;
    traj.population = population.by_band;
    traj.general_capacity = population.general_beds;
    traj.icu_capacity = population.icu_beds;
    traj.isa = kern.isa;
    traj.time.reserve(steps + 1);
    traj.states.reserve(steps + 1);
    traj.new_infections.reserve(steps);
    traj.contact_scaling.reserve(steps);

    using C = Compartment;
    CompartmentState state{n};
    const auto seeds = seed_distribution(population.by_band, params);
    for (std::size_t b = 0; b < n; ++b) {
        state.at(C::susceptible, b) = population.by_band[b] - seeds[b];
        state.at(C::exposed, b) = seeds[b];
    }
    const double total_pop = population.total();

    auto record_point = [&](double t) {
        traj.time.push_back(t);
        const double gt = state.total(C::general_treated);
        const double it = state.total(C::icu_treated);
        traj.general_occupancy.push_back(gt);
        traj.general_demand.push_back(gt + state.total(C::general_untreated));
        traj.icu_occupancy.push_back(it);
        traj.icu_demand.push_back(it + state.total(C::icu_untreated));
        traj.cumulative_deaths.push_back(state.total(C::dead));
        traj.states.push_back(state);
    };
    record_point(0.0);

    PolicyState policy_state;
    std::optional<TriggerLatch> latch;
    if (scenario.is_suppression()) {
        latch.emplace(*scenario.trigger_threshold);
    }
    long last_evaluated_day = -1;

    std::optional<MixingPhase> phase_off;
    std::optional<MixingPhase> phase_on;

    BandVector alive(n), prevalence(n), force(n), infected_share(n), infections(n);
    BandVector progress(n), to_case(n), mild_out(n), case_out(n);
    BandVector general_demand(n), icu_demand(n);
    BandVector general_treated(n), general_untreated(n), icu_treated(n), icu_untreated(n);

    for (std::size_t k = 0; k < steps; ++k) {
        const double t = static_cast<double>(k) * dt;

        const auto day = static_cast<long>(std::floor(t + time_epsilon));
        if (latch && !latch->fired() && day > last_evaluated_day) {
            last_evaluated_day = day;
            const double rate = weekly_death_rate_per_100k(traj.time, traj.cumulative_deaths,
                                                           total_pop, static_cast<double>(day));
            if (latch->update(static_cast<double>(day), rate)) {
                policy_state.trigger_time = latch->fired_at();
                traj.trigger_time = latch->fired_at();
            }
        }

        const bool active = measure_active(scenario, t, policy_state);
        auto &phase = active ? phase_on : phase_off;
        if (!phase) {
            phase = build_phase(scenario, t, policy_state, contacts, params.beta);
        }
        traj.contact_scaling.push_back(phase->kept_share);

        for (std::size_t b = 0; b < n; ++b) {
            alive[b] = state.band_total(b) - state.at(C::dead, b);
        }
        kern.prevalence(state.of(C::infectious_mild).data(), state.of(C::infectious_case).data(),
                        alive.data(), prevalence.data(), n);
        kern.matvec(phase->transmission.data(), prevalence.data(), force.data(), n);
        // Share of susceptibles infected over the step at a constant force of infection.
        for (std::size_t b = 0; b < n; ++b) {
            if (!std::isfinite(force[b])) {
                throw Error{ErrorCode::non_finite_state,
                            fmt::format("force of infection is {} at t={}", force[b], t)};
            }
            infected_share[b] = -std::expm1(-force[b] * dt);
        }
        kern.scaled_product(state.of(C::susceptible).data(), infected_share.data(), 1.0,
                            infections.data(),
                            n);

        // Admission demand this step, split by ward.
        for (std::size_t b = 0; b < n; ++b) {
            progress[b] = state.at(C::exposed, b) * latent_out;
            to_case[b] = progress[b] * sev.p_hosp[b];
            mild_out[b] = state.at(C::infectious_mild, b) * infectious_out;
            case_out[b] = state.at(C::infectious_case, b) * infectious_out;
            icu_demand[b] = case_out[b] * sev.p_icu[b];
            general_demand[b] = case_out[b] - icu_demand[b];
        }

        // Beds freed by this step's discharges are available to this step's admissions.
        const double general_staying = state.total(C::general_treated) * (1.0 - general_out);
        const double icu_staying = state.total(C::icu_treated) * (1.0 - icu_out);
        const auto alloc = allocate_capacity(
            std::accumulate(general_demand.begin(), general_demand.end(), 0.0),
            std::accumulate(icu_demand.begin(), icu_demand.end(), 0.0),
            population.general_beds - general_staying, population.icu_beds - icu_staying);
        ration_by_band(general_demand, alloc.treated_general, general_treated, general_untreated);
        ration_by_band(icu_demand, alloc.treated_icu, icu_treated, icu_untreated);

        for (std::size_t b = 0; b < n; ++b) {
            const double gt_out = state.at(C::general_treated, b) * general_out;
            const double gu_out = state.at(C::general_untreated, b) * general_out;
            const double it_out = state.at(C::icu_treated, b) * icu_out;
            const double iu_out = state.at(C::icu_untreated, b) * icu_out;
            const double deaths = gt_out * sev.d_hosp_treated[b] + gu_out * sev.d_hosp_untreated[b] +
                                  it_out * sev.d_icu_treated[b] + iu_out * sev.d_icu_untreated[b];
            const double discharged = gt_out + gu_out + it_out + iu_out;

            state.at(C::susceptible, b) -= infections[b];
            state.at(C::exposed, b) += infections[b] - progress[b];
            state.at(C::infectious_mild, b) += (progress[b] - to_case[b]) - mild_out[b];
            state.at(C::infectious_case, b) += to_case[b] - case_out[b];
            state.at(C::general_treated, b) += general_treated[b] - gt_out;
            state.at(C::general_untreated, b) += general_untreated[b] - gu_out;
            state.at(C::icu_treated, b) += icu_treated[b] - it_out;
            state.at(C::icu_untreated, b) += icu_untreated[b] - iu_out;
            state.at(C::recovered, b) += mild_out[b] + (discharged - deaths);
            state.at(C::dead, b) += deaths;
        }

        for (double v : state.values()) {
            if (!std::isfinite(v) || v < -1e-9 * total_pop) {
                throw Error{ErrorCode::non_finite_state,
                            fmt::format("state became {} at t={}; reduce dt", v, t + dt)};
            }
        }

        traj.new_infections.push_back(infections);
        record_point(static_cast<double>(k + 1) * dt);
    }

    const auto per_day = static_cast<std::size_t>(std::ceil(1.0 / dt - time_epsilon));
    const auto from = traj.new_infections.size() > per_day ? traj.new_infections.size() - per_day : 0;
    for (std::size_t k = from; k < traj.new_infections.size(); ++k) {
        const auto &v = traj.new_infections[k];
        traj.final_daily_incidence += std::accumulate(v.begin(), v.end(), 0.0);
    }
    return traj;
}

EpidemicTrajectory simulate(const CountryProfile &profile, const ContactMatrix &contacts,
                            const EpiParams &params, const PolicyScenario &scenario) {
    return simulate(model_population(profile), contacts, params, scenario);
}

double weekly_death_rate_per_100k(std::span<const double> time,
                                  std::span<const double> cumulative_deaths, double population,
                                  double t) {
    if (time.empty() || time.size() != cumulative_deaths.size() || !(population > 0.0)) {
        return 0.0;
    }
    t = std::max(t, 0.0);
    const double now = cumulative_deaths[point_index_at(time, t)];
    const double before = t < 7.0 ? cumulative_deaths[0] : cumulative_deaths[point_index_at(time, t - 7.0)];
    return (now - before) / population * 100000.0;
}

double weekly_death_rate_per_100k(const EpidemicTrajectory &traj, double t) {
    return weekly_death_rate_per_100k(traj.time, traj.cumulative_deaths, traj.total_population(), t);
}

std::vector<double> daily_weekly_death_rates(const EpidemicTrajectory &traj, double t) {
    std::vector<double> out;
    if (traj.time.empty()) {
        return out;
    }
    const double last = std::min(t, traj.time.back());
    for (long day = 0; static_cast<double>(day) <= last + time_epsilon; ++day) {
        out.push_back(weekly_death_rate_per_100k(traj, static_cast<double>(day)));
    }
    return out;
}

bool check_trigger(const EpidemicTrajectory &traj, double threshold, double t) {
    return check_trigger(daily_weekly_death_rates(traj, t), threshold);
}

double total_deaths(const EpidemicTrajectory &traj) {
    return traj.cumulative_deaths.empty() ? 0.0 : traj.cumulative_deaths.back();
}

double attack_rate(const EpidemicTrajectory &traj) {
    const double n = traj.total_population();
    if (traj.states.empty() || !(n > 0.0)) {
        return 0.0;
    }
    const double s = traj.states.back().total(Compartment::susceptible);
    return std::clamp((n - s) / n, 0.0, 1.0);
}

std::vector<double> daily_incidence(const EpidemicTrajectory &traj) {
    std::vector<double> out;
    for (std::size_t k = 0; k < traj.new_infections.size(); ++k) {
        const auto day = static_cast<std::size_t>(std::floor(static_cast<double>(k) * traj.dt + time_epsilon));
        if (out.size() <= day) {
            out.resize(day + 1, 0.0);
        }
        const auto &v = traj.new_infections[k];
        out[day] += std::accumulate(v.begin(), v.end(), 0.0);
    }
    return out;
}

} // namespace epivalue
