#include "epivalue/epi_engine.h"
#include "epivalue/error.h"
#include "epivalue/report.h"

#include "support.h"

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>

using namespace epivalue;
using C = Compartment;

namespace {

ErrorCode code_of(const std::function<void()> &fn) {
    try {
        fn();
    } catch (const Error &e) {
        return e.code();
    }
    ADD_FAILURE() << "no error thrown";
    return ErrorCode::io;
}

struct OneBand {
    ModelPopulation pop;
    ContactMatrix contacts;
    EpiParams params;
};

OneBand one_band(double r0, double n = 1e7, double horizon = 730.0) {
    OneBand m{ModelPopulation{{n}, 0.0, 0.0}, test::one_band_contacts(10.0, n), {}};
    m.params.r0_target = r0;
    m.params.severity = test::no_hospital_severity(1);
    m.params.horizon = horizon;
    m.params.beta = calibrate_beta(m.contacts, m.params, m.pop.by_band);
    return m;
}

PolicyScenario uniform(double reduction) {
    auto s = PolicyScenario::make(ScenarioKind::social_distancing);
    s.uniform_reduction = reduction;
    return s;
}

} // namespace

TEST(CalibrateBeta, HomogeneousCase) {
    EpiParams p;
    p.r0_target = 3.0;
    p.severity = test::no_hospital_severity(1);
    p.severity.infectious_period = 5.0;
    const double beta = calibrate_beta(test::one_band_contacts(10.0, 1e6), p, {1e6});
    EXPECT_DOUBLE_EQ(beta, 0.06);
}

TEST(CalibrateBeta, InvalidInputs) {
    EpiParams p;
    p.severity = test::no_hospital_severity(1);
    p.r0_target = 0.0;
    EXPECT_EQ(code_of([&] { calibrate_beta(test::one_band_contacts(10.0, 1e6), p, {1e6}); }),
              ErrorCode::invalid_r0);
    p.r0_target = 3.0;
    EXPECT_EQ(code_of([&] { calibrate_beta(test::one_band_contacts(0.0, 1e6), p, {1e6}); }),
              ErrorCode::singular_contact_matrix);
}

TEST(CalibrateBeta, DoublingContactsHalvesBeta) {
    std::mt19937_64 rng{5};
    const auto pop = test::random_population(rng, 16);
    auto contacts = balance_contact_matrix(test::random_matrix(rng, 16), pop);
    EpiParams p;
    p.severity = test::default_severity();
    const double beta = calibrate_beta(contacts, p, pop);
    for (std::size_t k = 0; k < 256; ++k) contacts.entries.data()[k] *= 2.0;
    EXPECT_NEAR(calibrate_beta(contacts, p, pop), beta / 2.0, 1e-12 * beta);
}

TEST(SpectralRadius, MatchesEigenOracle) {
    std::mt19937_64 rng{17};
    for (int trial = 0; trial < 25; ++trial) {
        const std::size_t n = 1 + static_cast<std::size_t>(trial % 16);
        const auto pop = test::random_population(rng, n);
        const auto c = balance_contact_matrix(test::random_matrix(rng, n), pop);
        const auto k = unit_next_generation_matrix(c, pop);
        const double oracle = test::eigen_spectral_radius(k);
        EXPECT_NEAR(spectral_radius(k), oracle, 1e-9 * oracle) << "n=" << n;
    }
}

TEST(SpectralRadius, NgmAtCalibratedBetaHitsTarget) {
    std::mt19937_64 rng{99};
    EpiParams p;
    p.severity = test::default_severity();
    for (double r0 : {1.5, 2.0, 3.0}) {
        p.r0_target = r0;
        const auto pop = test::random_population(rng, 16);
        const auto c = balance_contact_matrix(test::random_matrix(rng, 16), pop);
        const double beta = calibrate_beta(c, p, pop);
        const auto ngm = next_generation_matrix(c, pop, beta, p.severity.infectious_period);
        EXPECT_NEAR(test::eigen_spectral_radius(ngm), r0, 1e-6);
    }
}

TEST(Simulate, FullContactReductionKeepsOnlySeeds) {
    auto m = one_band(3.0, 1e6, 120.0);
    const auto traj = simulate(m.pop, m.contacts, m.params, uniform(1.0));
    EXPECT_NEAR(attack_rate(traj), m.params.seed_infections / 1e6, 1e-15);
    EXPECT_EQ(traj.states.back().at(C::susceptible, 0), 1e6 - m.params.seed_infections);
    for (const auto &inc : traj.new_infections) EXPECT_EQ(inc[0], 0.0);
}

TEST(Simulate, FinalSizeMatchesBisectionOracle) {
    for (double r0 : {1.5, 2.0, 3.0}) {
        auto m = one_band(r0);
        const auto traj = simulate(m.pop, m.contacts, m.params, PolicyScenario{});
        EXPECT_NEAR(attack_rate(traj), test::final_size_bisection(r0), 1e-3) << "R0=" << r0;
    }
    EXPECT_NEAR(test::final_size_bisection(3.0), 0.9405, 5e-5);
}

TEST(Simulate, SubcriticalEpidemicDiesOut) {
    auto m = one_band(3.0, 1e7, 365.0);
    const auto traj = simulate(m.pop, m.contacts, m.params, uniform(0.75));
    EXPECT_LT(attack_rate(traj), 5.0 * m.params.seed_infections / 1e7);
}

TEST(Simulate, DistancingMonotone) {
    const auto countries = test::default_countries();
    const auto &gbr = test::find_country(countries, "GBR");
    const auto contacts = test::default_contacts(gbr);
    const auto params = test::calibrated_params(gbr, contacts);
    double previous = std::numeric_limits<double>::infinity();
    for (double r : {0.0, 0.1, 0.2, 0.3, 0.45, 0.6, 0.8}) {
        const auto traj = simulate(gbr, contacts, params, uniform(r));
        const double infected = attack_rate(traj);
        EXPECT_LE(infected, previous) << "reduction " << r;
        previous = infected;
    }
}

TEST(Simulate, InvariantsAcrossScenarios) {
    const auto countries = test::default_countries();
    for (const char *id : {"USA", "BGD", "XSA"}) {
        const auto &country = test::find_country(countries, id);
        const auto contacts = test::default_contacts(country);
        const auto params = test::calibrated_params(country, contacts);
        for (auto kind : all_scenario_kinds) {
            const auto traj = simulate(country, contacts, params, PolicyScenario::make(kind));
            for (std::size_t k = 0; k < traj.states.size(); ++k) {
                const auto &s = traj.states[k];
                for (std::size_t b = 0; b < 16; ++b) {
                    const double n = country.population_by_band[b];
                    EXPECT_NEAR(s.band_total(b), n, 1e-9 * n);
                }
                for (double v : s.values()) ASSERT_GE(v, 0.0);
                EXPECT_LE(traj.general_occupancy[k], traj.general_capacity * (1 + 1e-12));
                EXPECT_LE(traj.icu_occupancy[k], traj.icu_capacity * (1 + 1e-12));
                EXPECT_GE(traj.general_demand[k], traj.general_occupancy[k]);
                EXPECT_GE(traj.icu_demand[k], traj.icu_occupancy[k]);
                if (k > 0) {
                    const auto &prev = traj.states[k - 1];
                    for (std::size_t b = 0; b < 16; ++b) {
                        ASSERT_GE(s.at(C::dead, b), prev.at(C::dead, b));
                        ASSERT_LE(s.at(C::susceptible, b), prev.at(C::susceptible, b));
                    }
                }
            }
        }
    }
}

TEST(Simulate, AgeGradient) {
    const auto countries = test::default_countries();
    const auto &usa = test::find_country(countries, "USA");
    auto old = usa;
    old.population_by_band = test::pyramid_with_elderly_share(0.174, usa.total_population());
    auto young = usa;
    young.population_by_band = test::pyramid_with_elderly_share(0.03, usa.total_population());
    auto mortality = [](const CountryProfile &p) {
        const auto contacts = test::default_contacts(p);
        const auto params = test::calibrated_params(p, contacts);
        return total_deaths(simulate(p, contacts, params, PolicyScenario{})) / p.total_population();
    };
    const double m_old = mortality(old), m_young = mortality(young);
    EXPECT_GT(m_old, m_young);
    EXPECT_GT(m_old / m_young, 2.0);
}

TEST(Simulate, CapacityNeverReducesDeaths) {
    const auto countries = test::default_countries();
    for (const char *id : {"USA", "NGA"}) {
        auto country = test::find_country(countries, id);
        const auto contacts = test::default_contacts(country);
        const auto params = test::calibrated_params(country, contacts);
        for (auto kind : {ScenarioKind::unmitigated, ScenarioKind::social_distancing}) {
            const auto scenario = PolicyScenario::make(kind);
            auto none = country;
            none.hospital_beds = 0.0;
            none.icu_beds = 0.0;
            const double deaths_none = total_deaths(simulate(none, contacts, params, scenario));
            for (double factor : {0.5, 1.0, 4.0}) {
                auto more = country;
                more.hospital_beds *= factor;
                more.icu_beds *= factor;
                EXPECT_GE(deaths_none, total_deaths(simulate(more, contacts, params, scenario)));
            }
        }
    }
}

TEST(Simulate, ZeroIcuCapacityLeavesEveryIcuCaseUntreated) {
    const auto countries = test::default_countries();
    auto country = test::find_country(countries, "BGD");
    country.icu_beds = 0.0;
    const auto contacts = test::default_contacts(country);
    const auto params = test::calibrated_params(country, contacts);
    const auto traj = simulate(country, contacts, params, PolicyScenario{});
    for (const auto &s : traj.states) EXPECT_EQ(s.total(C::icu_treated), 0.0);
    EXPECT_GT(traj.states.back().total(C::icu_untreated) + total_deaths(traj), 0.0);
}

TEST(Simulate, HalvingDtChangesDeathsLittle) {
    const auto countries = test::default_countries();
    const auto &usa = test::find_country(countries, "USA");
    const auto contacts = test::default_contacts(usa);
    auto params = test::calibrated_params(usa, contacts);
    const double coarse = total_deaths(simulate(usa, contacts, params, PolicyScenario{}));
    params.dt = 0.125;
    const double fine = total_deaths(simulate(usa, contacts, params, PolicyScenario{}));
    EXPECT_LT(std::abs(fine - coarse) / fine, 0.005);
}

TEST(Simulate, OversizedStepRaisesNonFiniteState) {
    auto m = one_band(3.0, 1e6, 100.0);
    m.params.dt = 5.0;
    EXPECT_EQ(code_of([&] { simulate(m.pop, m.contacts, m.params, PolicyScenario{}); }),
              ErrorCode::non_finite_state);
}

TEST(Simulate, UsLikeMortalityJustBelowOnePercent) {
    const auto countries = test::default_countries();
    const auto &usa = test::find_country(countries, "USA");
    const auto contacts = test::default_contacts(usa);
    const auto traj = simulate(usa, contacts, test::calibrated_params(usa, contacts), PolicyScenario{});
    EXPECT_NEAR(100.0 * total_deaths(traj) / usa.total_population(), 0.8, 0.15);
    EXPECT_TRUE(traj.burned_out());
}

TEST(Simulate, SubSaharanLikeMortality) {
    const auto countries = test::default_countries();
    const auto &ssa = test::find_country(countries, "XSA");
    const auto contacts = test::default_contacts(ssa);
    const auto traj = simulate(ssa, contacts, test::calibrated_params(ssa, contacts), PolicyScenario{});
    EXPECT_NEAR(100.0 * total_deaths(traj) / ssa.total_population(), 0.21, 0.1);
}

TEST(AllocateCapacity, Examples) {
    auto a = allocate_capacity(100.0, 0.0, 250.0, 0.0);
    EXPECT_EQ(a.treated_general, 100.0);
    EXPECT_EQ(a.untreated_general, 0.0);
    a = allocate_capacity(400.0, 0.0, 250.0, 0.0);
    EXPECT_EQ(a.treated_general, 250.0);
    EXPECT_EQ(a.untreated_general, 150.0);
    a = allocate_capacity(0.0, 30.0, 250.0, 0.0);
    EXPECT_EQ(a.treated_icu, 0.0);
    EXPECT_EQ(a.untreated_icu, 30.0);
    a = allocate_capacity(10.0, 10.0, -5.0, -1.0);
    EXPECT_EQ(a.treated_general, 0.0);
    EXPECT_EQ(a.treated_icu, 0.0);
}

TEST(AllocateCapacity, ProfileOverloadUsesGeneralAndIcuBeds) {
    CountryProfile p = test::synthetic_profile("XCP", IncomeGroup::low, BandVector(16, 1000.0), 1, 1, 1);
    p.hospital_beds = 300.0;
    p.icu_beds = 50.0;
    const auto a = allocate_capacity(400.0, 80.0, p);
    EXPECT_EQ(a.treated_general, 250.0);
    EXPECT_EQ(a.untreated_general, 150.0);
    EXPECT_EQ(a.treated_icu, 50.0);
    EXPECT_EQ(a.untreated_icu, 30.0);
}

TEST(AllocateCapacity, RationingIsProportional) {
    const std::vector<double> demand{10.0, 30.0, 60.0};
    std::vector<double> treated(3), untreated(3);
    ration_by_band(demand, 50.0, treated, untreated);
    EXPECT_DOUBLE_EQ(treated[0], 5.0);
    EXPECT_DOUBLE_EQ(treated[1], 15.0);
    EXPECT_DOUBLE_EQ(treated[2], 30.0);
    for (std::size_t b = 0; b < 3; ++b) EXPECT_DOUBLE_EQ(treated[b] + untreated[b], demand[b]);
}

TEST(WeeklyDeathRate, Examples) {
    const std::vector<double> time{0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    std::vector<double> cum(time.size(), 0.0);
    EXPECT_EQ(weekly_death_rate_per_100k(time, cum, 1e7, 10.0), 0.0);
    for (std::size_t k = 0; k < time.size(); ++k) cum[k] = k <= 3 ? 0.0 : 160.0 * (k - 3) / 7.0;
    EXPECT_NEAR(weekly_death_rate_per_100k(time, cum, 1e7, 10.0), 1.6, 1e-12);
    for (std::size_t k = 0; k < time.size(); ++k) cum[k] = k <= 3 ? 0.0 : 20.0 * (k - 3) / 7.0;
    EXPECT_NEAR(weekly_death_rate_per_100k(time, cum, 1e7, 10.0), 0.2, 1e-12);
    // Before day 7 the window starts at 0.
    EXPECT_NEAR(weekly_death_rate_per_100k(time, cum, 1e7, 5.0), cum[5] / 1e7 * 1e5, 1e-12);
}

TEST(TrajectoryOutput, CsvAndJsonSummary) {
    auto m = one_band(2.0, 1e5, 10.0);
    const auto traj = simulate(m.pop, m.contacts, m.params, PolicyScenario{});
    const auto dir = test::scratch_dir("trajectory_out");
    write_trajectory_csv(traj, "abc", dir / "t.csv");
    const auto text = test::read_file(dir / "t.csv");
    EXPECT_EQ(text.rfind("# config_hash=abc\n", 0), 0u);
    const auto lines = std::count(text.begin(), text.end(), '\n');
    EXPECT_EQ(static_cast<std::size_t>(lines), 2 + traj.states.size() * traj.bands);
    const auto j = trajectory_summary_json(traj);
    EXPECT_DOUBLE_EQ(j["attack_rate"].get<double>(), attack_rate(traj));
    EXPECT_TRUE(j["trigger_time"].is_null());
}
