#include "support.h"

#include <Eigen/Eigenvalues>
#include <fmt/format.h>

#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace epivalue::test {

namespace fs = std::filesystem;

fs::path data_dir() { return EPIVALUE_TEST_DATA_DIR; }
fs::path cli_path() { return EPIVALUE_TEST_CLI; }

fs::path scratch_dir(const std::string &name) {
    auto dir = fs::temp_directory_path() / ("epivalue_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

void write_file(const fs::path &path, const std::string &content) {
    std::ofstream out{path, std::ios::binary};
    out << content;
}

std::string read_file(const fs::path &path) {
    std::ifstream in{path, std::ios::binary};
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

double eigen_spectral_radius(const SquareMatrix &m) {
    const auto n = static_cast<Eigen::Index>(m.size());
    Eigen::MatrixXd a(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            a(i, j) = m(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
        }
    }
    Eigen::EigenSolver<Eigen::MatrixXd> solver(a, false);
    return solver.eigenvalues().cwiseAbs().maxCoeff();
}

double final_size_bisection(double r0) {
    if (r0 <= 1.0) return 0.0;
    double lo = 1e-12, hi = 1.0;
    auto f = [r0](double z) { return z - 1.0 + std::exp(-r0 * z); };
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (f(mid) < 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

SeverityProfile no_hospital_severity(std::size_t bands) {
    SeverityProfile s;
    for (auto *v : {&s.p_hosp, &s.p_icu, &s.d_hosp_treated, &s.d_hosp_untreated, &s.d_icu_treated,
                    &s.d_icu_untreated}) {
        v->assign(bands, 0.0);
    }
    return s;
}

SeverityProfile default_severity() { return load_severity_profile(data_dir() / "severity.csv"); }

std::vector<CountryProfile> default_countries() {
    auto profiles = load_country_profiles(data_dir() / "countries.csv");
    apply_economics(profiles, load_economics(data_dir() / "economics.csv"));
    return profiles;
}

const CountryProfile &find_country(const std::vector<CountryProfile> &all, const std::string &id) {
    for (const auto &p : all) {
        if (p.country_id == id) return p;
    }
    throw std::runtime_error("no country " + id);
}

ContactMatrix default_contacts(const CountryProfile &profile) {
    return load_contact_matrix(data_dir() / "contacts.csv", profile.country_id,
                               profile.population_by_band);
}

EpiParams calibrated_params(const CountryProfile &profile, const ContactMatrix &contacts,
                            double r0) {
    EpiParams p;
    p.r0_target = r0;
    p.severity = default_severity();
    p.beta = calibrate_beta(contacts, p, profile.population_by_band);
    return p;
}

ContactMatrix one_band_contacts(double c, double n) {
    SquareMatrix m{1};
    m(0, 0) = c;
    return ContactMatrix{m, BandVector{n}, false};
}

SquareMatrix random_matrix(std::mt19937_64 &rng, std::size_t n, double lo, double hi) {
    std::uniform_real_distribution<double> u(lo, hi);
    SquareMatrix m{n};
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) m(i, j) = u(rng);
    }
    return m;
}

BandVector random_population(std::mt19937_64 &rng, std::size_t n) {
    std::uniform_real_distribution<double> u(1e4, 5e6);
    BandVector pop(n);
    for (auto &v : pop) v = std::round(u(rng));
    return pop;
}

BandVector pyramid_with_elderly_share(double elderly, double total) {
    BandVector shape(age_band_count);
    for (std::size_t b = 0; b < age_band_count; ++b) {
        shape[b] = std::exp(-0.03 * 5.0 * static_cast<double>(b));
    }
    const double young = std::accumulate(shape.begin(), shape.begin() + band_65_plus, 0.0);
    const double old = std::accumulate(shape.begin() + band_65_plus, shape.end(), 0.0);
    BandVector pop(age_band_count);
    for (std::size_t b = 0; b < age_band_count; ++b) {
        pop[b] = b < band_65_plus ? total * (1.0 - elderly) * shape[b] / young
                                  : total * elderly * shape[b] / old;
    }
    return pop;
}

CountryProfile synthetic_profile(const std::string &id, IncomeGroup group, BandVector pop,
                                 double beds_per_1000, double icu_per_100k, double gni_pc) {
    CountryProfile p;
    p.country_id = id;
    p.name = "Synthetic " + id;
    p.income_group = group;
    p.population_by_band = std::move(pop);
    const double total = p.total_population();
    p.hospital_beds = std::round(beds_per_1000 * total / 1000.0);
    p.icu_beds = std::round(icu_per_100k * total / 100000.0);
    p.gni_per_capita_usd = gni_pc;
    p.gdp_total_usd = gni_pc * total;
    p.annual_births = std::round(0.02 * total);
    return p;
}

fs::path write_run_files(const fs::path &dir, const std::vector<CountryProfile> &profiles,
                         const std::string &scenarios_json) {
    write_country_profiles(dir / "countries.csv", profiles);
    fs::copy_file(data_dir() / "severity.csv", dir / "severity.csv",
                  fs::copy_options::overwrite_existing);
    std::string contacts = "iso3,row_band,col_band,contacts_per_day\n";
    const auto raw = load_raw_contact_matrix(data_dir() / "contacts.csv", "DEFAULT");
    for (std::size_t i = 0; i < age_band_count; ++i) {
        for (std::size_t j = 0; j < age_band_count; ++j) {
            contacts += fmt::format("DEFAULT,{},{},{}\n", i, j, raw(i, j));
        }
    }
    write_file(dir / "contacts.csv", contacts);
    const auto config = dir / "run.json";
    write_file(config, fmt::format(R"({{
  "countries": "countries.csv",
  "contacts": "contacts.csv",
  "severity": "severity.csv",
  "scenarios": {},
  "valuation": {{"base_vsl_usd": 9.6e6, "reference_income_usd": 65760, "elasticity": 1.0}},
  "output_dir": "out"
}}
)",
                                   scenarios_json));
    return config;
}

} // namespace epivalue::test
