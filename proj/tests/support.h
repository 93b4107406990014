#pragma once

#include "epivalue/country_data.h"
#include "epivalue/epi_engine.h"
#include "epivalue/sweep.h"

#include <filesystem>
#include <random>
#include <string>
#include <vector>

namespace epivalue::test {

std::filesystem::path data_dir();
std::filesystem::path cli_path();

/// Fresh empty directory under the system temp dir.
std::filesystem::path scratch_dir(const std::string &name);

void write_file(const std::filesystem::path &path, const std::string &content);
std::string read_file(const std::filesystem::path &path);

/// Largest |eigenvalue| via Eigen's general eigensolver.
double eigen_spectral_radius(const SquareMatrix &m);

/// Root in (0, 1] of z = 1 - exp(-r0 z) by bisection; 0 when r0 <= 1.
double final_size_bisection(double r0);

/// Severity profile with no hospital pathway.
SeverityProfile no_hospital_severity(std::size_t bands);

SeverityProfile default_severity();
std::vector<CountryProfile> default_countries();
const CountryProfile &find_country(const std::vector<CountryProfile> &all, const std::string &id);
ContactMatrix default_contacts(const CountryProfile &profile);

/// Default parameters with beta calibrated for the profile.
EpiParams calibrated_params(const CountryProfile &profile, const ContactMatrix &contacts,
                            double r0 = 3.0);

/// Homogeneous one-band model: c contacts/day, population n.
ContactMatrix one_band_contacts(double c, double n);

SquareMatrix random_matrix(std::mt19937_64 &rng, std::size_t n, double lo = 0.0, double hi = 5.0);
BandVector random_population(std::mt19937_64 &rng, std::size_t n);

/// 16-band pyramid of `total` people whose 65+ share is exactly `elderly`.
BandVector pyramid_with_elderly_share(double elderly, double total);

/// Small synthetic profile with the given pyramid; beds per 1,000 and ICU per 100k.
CountryProfile synthetic_profile(const std::string &id, IncomeGroup group, BandVector pop,
                                 double beds_per_1000, double icu_per_100k, double gni_pc);

/// Minimal run setup in `dir`: countries, contacts (DEFAULT only), severity, run.json.
std::filesystem::path write_run_files(const std::filesystem::path &dir,
                                      const std::vector<CountryProfile> &profiles,
                                      const std::string &scenarios_json);

} // namespace epivalue::test
