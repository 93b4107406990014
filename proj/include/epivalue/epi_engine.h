#pragma once

#include "epivalue/bands.h"
#include "epivalue/country_data.h"
#include "epivalue/kernels.h"
#include "epivalue/policy.h"

#include <array>
#include <optional>
#include <span>
#include <vector>

namespace epivalue {

/// @brief Simulation controls. `beta` is filled in by calibrate_beta().
struct EpiParams {
    double r0_target{3.0};
    double beta{0.0};
    SeverityProfile severity;
    double dt{0.25};
    double horizon{365.0};
    double seed_infections{20.0};
    std::size_t seed_band_first{default_seed_band_first};
    std::size_t seed_band_last{default_seed_band_last};
};

void validate(const EpiParams &params);

/// Population and bed capacity the engine needs; built from a CountryProfile or by hand
/// for reduced test models with fewer bands.
struct ModelPopulation {
    BandVector by_band;
    double general_beds{0.0};
    double icu_beds{0.0};

    double total() const noexcept;
};

ModelPopulation model_population(const CountryProfile &profile);

enum class Compartment : std::size_t {
    susceptible,
    exposed,
    infectious_mild,
    infectious_case,
    general_treated,
    general_untreated,
    icu_treated,
    icu_untreated,
    recovered,
    dead,
};

inline constexpr std::size_t compartment_count = 10;

/// Person counts per compartment and band, compartment-major.
class CompartmentState {
  public:
    CompartmentState() = default;
    explicit CompartmentState(std::size_t bands) : bands_{bands}, values_(bands * compartment_count) {}

    std::size_t bands() const noexcept { return bands_; }

    double &at(Compartment c, std::size_t band) noexcept {
        return values_[static_cast<std::size_t>(c) * bands_ + band];
    }
    double at(Compartment c, std::size_t band) const noexcept {
        return values_[static_cast<std::size_t>(c) * bands_ + band];
    }

    std::span<double> of(Compartment c) noexcept {
        return {values_.data() + static_cast<std::size_t>(c) * bands_, bands_};
    }
    std::span<const double> of(Compartment c) const noexcept {
        return {values_.data() + static_cast<std::size_t>(c) * bands_, bands_};
    }

    /// Sum over bands of one compartment.
    double total(Compartment c) const noexcept;

    /// Sum over compartments of one band.
    double band_total(std::size_t band) const noexcept;

    std::span<const double> values() const noexcept { return values_; }

  private:
    std::size_t bands_{0};
    std::vector<double> values_;
};

/// @brief Full output of one simulation.
///
/// Point series (`time`, `states`, bed series, `cumulative_deaths`) have one entry per
/// grid point including t = 0. Step series (`new_infections`, `contact_scaling`) have one
/// entry per step [t_k, t_k + dt).
struct EpidemicTrajectory {
    double dt{0.25};
    std::size_t bands{0};
    BandVector population;
    double general_capacity{0.0};
    double icu_capacity{0.0};

    std::vector<double> time;
    std::vector<CompartmentState> states;
    std::vector<BandVector> new_infections;
    std::vector<double> general_demand;
    std::vector<double> general_occupancy;
    std::vector<double> icu_demand;
    std::vector<double> icu_occupancy;
    std::vector<double> cumulative_deaths;
    /// Share of baseline contacts kept by each band during each step.
    std::vector<BandVector> contact_scaling;

    std::optional<double> trigger_time;
    /// New infections during the last simulated day.
    double final_daily_incidence{0.0};
    kernels::Isa isa{kernels::Isa::scalar};

    double total_population() const noexcept;
    std::size_t steps() const noexcept { return new_infections.size(); }

    /// Incidence below one new infection per day at the horizon.
    bool burned_out() const noexcept { return final_daily_incidence < 1.0; }
};

/// K_hat(i, j) = c(i, j) N_i / N_j: expected infections in band i per unit time of
/// infectiousness of one band-j case at beta = 1.
SquareMatrix unit_next_generation_matrix(const ContactMatrix &contacts, const BandVector &pop);

/// Next-generation matrix beta * infectious_period * K_hat.
SquareMatrix next_generation_matrix(const ContactMatrix &contacts, const BandVector &pop,
                                    double beta, double infectious_period);

/// Perron root of a non-negative square matrix by shifted power iteration.
double spectral_radius(const SquareMatrix &matrix);

/// beta = r0_target / (infectious_period * rho(K_hat)).
double calibrate_beta(const ContactMatrix &contacts, const EpiParams &params,
                      const BandVector &pop);

struct CapacityAllocation {
    double treated_general{0.0};
    double untreated_general{0.0};
    double treated_icu{0.0};
    double untreated_icu{0.0};
};

/// Treated = min(demand, free beds); the remainder goes untreated.
CapacityAllocation allocate_capacity(double demand_general, double demand_icu,
                                     double free_general, double free_icu);

/// Same rule against an empty hospital system of `profile`.
CapacityAllocation allocate_capacity(double demand_general, double demand_icu,
                                     const CountryProfile &profile);

/// Splits admissions proportionally across bands given the treated share.
void ration_by_band(std::span<const double> demand, double treated_total,
                    std::span<double> treated, std::span<double> untreated);

/// Runs the scenario. `params.beta` must already be calibrated.
EpidemicTrajectory simulate(const ModelPopulation &population, const ContactMatrix &contacts,
                            const EpiParams &params, const PolicyScenario &scenario);

/// Same, with an explicit kernel table instead of active_kernels().
EpidemicTrajectory simulate(const ModelPopulation &population, const ContactMatrix &contacts,
                            const EpiParams &params, const PolicyScenario &scenario,
                            const kernels::KernelTable &kern);

EpidemicTrajectory simulate(const CountryProfile &profile, const ContactMatrix &contacts,
                            const EpiParams &params, const PolicyScenario &scenario);

/// Deaths in [t - 7, t] (or [0, t] when t < 7) per 100k population.
double weekly_death_rate_per_100k(std::span<const double> time,
                                  std::span<const double> cumulative_deaths, double population,
                                  double t);

double weekly_death_rate_per_100k(const EpidemicTrajectory &traj, double t);

/// Weekly death rate evaluated at days 0, 1, ..., floor(t).
std::vector<double> daily_weekly_death_rates(const EpidemicTrajectory &traj, double t);

/// Whether a latch with `threshold` has fired on this trajectory by day t.
bool check_trigger(const EpidemicTrajectory &traj, double threshold, double t);

double total_deaths(const EpidemicTrajectory &traj);
double attack_rate(const EpidemicTrajectory &traj);

/// New infections summed per whole day.
std::vector<double> daily_incidence(const EpidemicTrajectory &traj);

} // namespace epivalue
