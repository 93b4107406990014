#pragma once

#include "epivalue/bands.h"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace epivalue {

enum class IncomeGroup { low, lower_middle, upper_middle, high };

std::string_view to_string(IncomeGroup group) noexcept;

/// Accepts World Bank labels ("Low income", "Lower-middle income", ...) and the short
/// forms "low", "lower-middle", "upper-middle", "high".
std::optional<IncomeGroup> parse_income_group(std::string_view text);

/// @brief Demography, health-system capacity and economic indicators for one country.
struct CountryProfile {
    std::string country_id; ///< ISO3
    std::string name;
    IncomeGroup income_group{IncomeGroup::low};
    BandVector population_by_band; ///< 16 five-year bands
    double gdp_total_usd{0.0};
    double gni_per_capita_usd{0.0};
    double hospital_beds{0.0}; ///< all beds, ICU included
    double icu_beds{0.0};
    std::optional<double> annual_births;
    std::optional<double> informal_employment_share;

    double total_population() const noexcept;

    /// Beds available to non-ICU admissions.
    double general_beds() const noexcept { return hospital_beds - icu_beds; }

    /// Annual births or MissingField.
    double births_or_throw() const;

    /// Informal share or MissingField.
    double informal_share_or_throw() const;

    bool operator==(const CountryProfile &) const = default;
};

/// Throws InvariantViolation / NegativeValue when a profile breaks its invariants.
void validate(const CountryProfile &profile);

/// Reciprocity-balanced mean daily contacts; entries(i, j) is contacts a person in band i
/// has with people in band j.
struct ContactMatrix {
    SquareMatrix entries;
    BandVector reference_population;
    bool fallback_used{false};
};

/// Per-band clinical pathway probabilities plus durations in days.
struct SeverityProfile {
    BandVector p_hosp;           ///< P(hospitalisation | infection)
    BandVector p_icu;            ///< P(ICU | hospitalisation)
    BandVector d_hosp_treated;   ///< P(death | general-bed case with a bed)
    BandVector d_hosp_untreated; ///< P(death | general-bed case without a bed)
    BandVector d_icu_treated;
    BandVector d_icu_untreated;
    double latent_period{4.6};
    double infectious_period{4.5};
    double hosp_stay_general{9.5};
    double hosp_stay_icu{11.3};

    std::size_t bands() const noexcept { return p_hosp.size(); }
};

void validate(const SeverityProfile &severity);

/// Per-country override of the economic columns of countries.csv.
struct EconomicIndicators {
    double gdp_usd{0.0};
    double gni_per_capita_usd{0.0};
};

std::vector<CountryProfile> load_country_profiles(const std::filesystem::path &path);

/// Writes profiles in the countries.csv schema; numbers round-trip exactly.
void write_country_profiles(const std::filesystem::path &path,
                            const std::vector<CountryProfile> &profiles);

SeverityProfile load_severity_profile(const std::filesystem::path &path);

/// Every raw (unbalanced) matrix in contacts.csv keyed by iso3; each block must be complete.
std::map<std::string, SquareMatrix, std::less<>>
load_raw_contact_matrices(const std::filesystem::path &path);

/// The country's raw matrix or the DEFAULT block; `fallback_used` reports which.
const SquareMatrix &select_contact_matrix(
    const std::map<std::string, SquareMatrix, std::less<>> &matrices, std::string_view country_id,
    bool *fallback_used = nullptr);

SquareMatrix load_raw_contact_matrix(const std::filesystem::path &path,
                                     std::string_view country_id, bool *fallback_used = nullptr);

/// Loads the country's matrix (or the fallback) and balances it against `population`.
ContactMatrix load_contact_matrix(const std::filesystem::path &path, std::string_view country_id,
                                  const BandVector &population);

std::map<std::string, EconomicIndicators> load_economics(const std::filesystem::path &path);

/// Overwrites gdp/gni on profiles that have an economics row.
void apply_economics(std::vector<CountryProfile> &profiles,
                     const std::map<std::string, EconomicIndicators> &economics);

/// M(i, j) = (raw(i, j) + raw(j, i) * N_j / N_i) / 2.
ContactMatrix balance_contact_matrix(const SquareMatrix &raw, const BandVector &population);

/// Largest relative reciprocity error |M_ij N_i - M_ji N_j| / max(M_ij N_i, M_ji N_j).
double reciprocity_error(const SquareMatrix &matrix, const BandVector &population);

/// Share of the population in bands >= cutoff_band.
double elderly_share(const CountryProfile &profile, std::size_t cutoff_band = band_65_plus);

/// Key for the shared contact matrix in contacts.csv.
inline constexpr std::string_view fallback_contact_key = "DEFAULT";

} // namespace epivalue
