#include "epivalue/epi_engine.h"
#include "epivalue/error.h"
#include "epivalue/policy.h"
#include "epivalue/report.h"
#include "epivalue/sweep.h"
#include "epivalue/valuation.h"

#include "support.h"

#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <random>
#include <thread>

using namespace epivalue;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;
using C = Compartment;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
    bool pass{true};
    std::string detail;

    void check(bool ok, const std::string &what) {
        if (!ok) {
            pass = false;
            if (!detail.empty()) detail += "; ";
            detail += what;
        }
    }
};

/// Shared by criteria 5, 6, 7 and 9.
struct FullSweep {
    RunConfig config;
    SweepResult result;
    double seconds{0.0};
};

FullSweep &full_sweep() {
    static FullSweep sweep = [] {
        FullSweep s;
        s.config = load_run_config(test::data_dir() / "run.json");
        s.config.workers = std::max(1u, std::thread::hardware_concurrency());
        const auto start = Clock::now();
        s.result = run_sweep(s.config);
        s.seconds = seconds_since(start);
        return s;
    }();
    return sweep;
}

double mortality_pct(const CountryProfile &profile) {
    const auto contacts = test::default_contacts(profile);
    const auto params = test::calibrated_params(profile, contacts);
    return 100.0 * total_deaths(simulate(profile, contacts, params, PolicyScenario{})) /
           profile.total_population();
}

Outcome ngm_calibration() {
    Outcome out;
    const auto start = Clock::now();
    std::mt19937_64 rng{20200401};
    double worst = 0.0;
    for (int trial = 0; trial < 10; ++trial) {
        const auto pop = test::random_population(rng, age_band_count);
        const auto contacts = balance_contact_matrix(test::random_matrix(rng, age_band_count, 0.1, 5.0), pop);
        EpiParams params;
        params.severity = test::default_severity();
        params.r0_target = 3.0;
        const double beta = calibrate_beta(contacts, params, pop);
        const double rho = test::eigen_spectral_radius(
            next_generation_matrix(contacts, pop, beta, params.severity.infectious_period));
        worst = std::max(worst, std::abs(rho - 3.0));
    }
    out.check(worst <= 1e-6, fmt::format("max |rho - 3| = {:.3g}", worst));

    EpiParams homogeneous;
    homogeneous.severity = test::no_hospital_severity(1);
    homogeneous.severity.infectious_period = 5.0;
    homogeneous.r0_target = 3.0;
    const double c = 10.0;
    const double beta = calibrate_beta(test::one_band_contacts(c, 1e6), homogeneous, {1e6});
    const double expected = homogeneous.r0_target / (c * homogeneous.severity.infectious_period);
    out.check(beta == expected, fmt::format("homogeneous beta {} vs {}", beta, expected));

    const double secs = seconds_since(start);
    out.check(secs < 1.0, fmt::format("{:.2f} s", secs));
    if (out.pass) out.detail = fmt::format("max |rho - 3| = {:.2g}, {:.3f} s", worst, secs);
    return out;
}

Outcome final_size() {
    Outcome out;
    const auto start = Clock::now();
    std::string values;
    for (double r0 : {1.5, 2.0, 3.0}) {
        const double n = 1e7;
        const ModelPopulation pop{{n}, 0.0, 0.0};
        const auto contacts = test::one_band_contacts(10.0, n);
        EpiParams params;
        params.r0_target = r0;
        params.severity = test::no_hospital_severity(1);
        params.horizon = 730.0;
        params.beta = calibrate_beta(contacts, params, pop.by_band);
        const double z = attack_rate(simulate(pop, contacts, params, PolicyScenario{}));
        const double oracle = test::final_size_bisection(r0);
        out.check(std::abs(z - oracle) <= 1e-3,
                  fmt::format("R0 {}: {:.5f} vs {:.5f}", r0, z, oracle));
        values += fmt::format("R0 {} {:.4f}/{:.4f} ", r0, z, oracle);
    }
    const double secs = seconds_since(start);
    out.check(secs < 5.0, fmt::format("{:.2f} s", secs));
    if (out.pass) out.detail = fmt::format("{}({:.2f} s)", values, secs);
    return out;
}

Outcome conservation() {
    Outcome out;
    const std::vector<CountryProfile> countries{
        test::synthetic_profile("XAA", IncomeGroup::high, test::pyramid_with_elderly_share(0.19, 6e7), 3.0,
                                12.0, 45000),
        test::synthetic_profile("XAB", IncomeGroup::lower_middle,
                                test::pyramid_with_elderly_share(0.06, 1.2e8), 0.8, 1.5, 2200),
        test::synthetic_profile("XAC", IncomeGroup::low, test::pyramid_with_elderly_share(0.03, 2e7), 0.4,
                                0.2, 600)};
    double worst_drift = 0.0;
    bool d_monotone = true, s_monotone = true;
    for (const auto &country : countries) {
        const auto contacts = test::default_contacts(country);
        const auto params = test::calibrated_params(country, contacts);
        for (auto kind : all_scenario_kinds) {
            const auto traj = simulate(country, contacts, params, PolicyScenario::make(kind));
            for (std::size_t k = 0; k < traj.states.size(); ++k) {
                const auto &s = traj.states[k];
                for (std::size_t b = 0; b < age_band_count; ++b) {
                    const double n = country.population_by_band[b];
                    worst_drift = std::max(worst_drift, std::abs(s.band_total(b) - n) / n);
                    if (k > 0) {
                        const auto &prev = traj.states[k - 1];
                        d_monotone = d_monotone && s.at(C::dead, b) >= prev.at(C::dead, b);
                        s_monotone = s_monotone && s.at(C::susceptible, b) <= prev.at(C::susceptible, b);
                    }
                }
            }
        }
    }
    out.check(worst_drift <= 1e-9, fmt::format("drift {:.3g}", worst_drift));
    out.check(d_monotone, "deaths decreased");
    out.check(s_monotone, "susceptibles increased");
    if (out.pass) out.detail = fmt::format("max relative drift {:.2g} over 3 countries x 5 scenarios", worst_drift);
    return out;
}

Outcome demography_gradient() {
    Outcome out;
    const auto countries = test::default_countries();
    const double us = mortality_pct(test::find_country(countries, "USA"));
    const double young = mortality_pct(test::find_country(countries, "XLO"));
    out.check(std::abs(us - 0.8) <= 0.15, fmt::format("US {:.3f}%", us));
    out.check(young < 0.45, fmt::format("3% elderly {:.3f}%", young));
    out.check(us / young > 2.0, fmt::format("ratio {:.2f}", us / young));
    if (out.pass) {
        out.detail = fmt::format("US {:.3f}%, 3% elderly {:.3f}%, ratio {:.2f}", us, young, us / young);
    }
    return out;
}

Outcome table_direction() {
    Outcome out;
    const auto &result = full_sweep().result;
    const auto *us = result.find("USA", ScenarioKind::social_distancing);
    const auto *bgd = result.find("BGD", ScenarioKind::social_distancing);
    if (us == nullptr || bgd == nullptr) {
        out.check(false, "USA or BGD missing from the sweep");
        return out;
    }
    const double mv_us = us->valuation.marginal_value_pct_gdp;
    const double mv_bgd = bgd->valuation.marginal_value_pct_gdp;
    out.check(mv_us >= 2.0 * mv_bgd, fmt::format("US {:.1f} vs BGD {:.1f}", mv_us, mv_bgd));
    out.check(std::abs(mv_us - 62.0) <= 15.0, fmt::format("US {:.1f} outside 62 +- 15", mv_us));
    out.check(std::abs(mv_bgd - 16.0) <= 15.0, fmt::format("BGD {:.1f} outside 16 +- 15", mv_bgd));
    if (out.pass) out.detail = fmt::format("US {:.1f}% GDP, BGD {:.1f}% GDP", mv_us, mv_bgd);
    return out;
}

Outcome trigger_semantics() {
    Outcome out;
    const auto &result = full_sweep().result;
    std::size_t countries = 0, violations = 0;
    constexpr double never = std::numeric_limits<double>::infinity();
    for (const auto &row : result.rows) {
        if (row.scenario != ScenarioKind::early_suppression) continue;
        const auto *late = result.find(row.country_id, ScenarioKind::late_suppression);
        if (late == nullptr) continue;
        ++countries;
        if (row.summary.trigger_time.value_or(never) > late->summary.trigger_time.value_or(never)) {
            ++violations;
            out.check(false, fmt::format("{} early after late", row.country_id));
        }
    }
    out.check(countries >= 150, fmt::format("{} countries compared", countries));

    const auto all = test::default_countries();
    const auto &gbr = test::find_country(all, "GBR");
    const auto contacts = test::default_contacts(gbr);
    const auto params = test::calibrated_params(gbr, contacts);
    const auto baseline = simulate(gbr, contacts, params, PolicyScenario{});
    const auto rates = daily_weekly_death_rates(baseline, params.horizon);
    const auto first_death = std::find_if(rates.begin(), rates.end(), [](double r) { return r > 0.0; });
    auto zero = PolicyScenario::make(ScenarioKind::early_suppression);
    zero.trigger_threshold = 0.0;
    const auto triggered = simulate(gbr, contacts, params, zero);
    if (first_death == rates.end() || !triggered.trigger_time) {
        out.check(false, "threshold 0 never fired");
    } else {
        const double expected = static_cast<double>(first_death - rates.begin());
        out.check(*triggered.trigger_time == expected,
                  fmt::format("threshold 0 fired at {} not {}", *triggered.trigger_time, expected));
    }

    std::mt19937_64 rng{7};
    std::uniform_real_distribution<double> rate(0.0, 3.0);
    std::bernoulli_distribution zero_rate(0.3);
    bool latching = true;
    for (int trial = 0; trial < 500; ++trial) {
        std::vector<double> series(60);
        for (auto &r : series) r = zero_rate(rng) ? 0.0 : rate(rng);
        const double threshold = rate(rng);
        TriggerLatch latch{threshold};
        bool seen = false;
        for (std::size_t k = 0; k < series.size(); ++k) {
            seen = seen || (series[k] >= threshold && series[k] > 0.0);
            const bool fired = latch.update(static_cast<double>(k), series[k]);
            const bool prefix = check_trigger(std::span{series}.first(k + 1), threshold);
            latching = latching && fired == seen && prefix == seen;
        }
    }
    out.check(latching, "latch disagrees with prefix property");
    if (out.pass) {
        out.detail = fmt::format("{} countries, 0 violations, threshold 0 at day {}", countries,
                                 triggered.trigger_time.value_or(-1.0));
    }
    (void)violations;
    return out;
}

Outcome vsl_transfer() {
    Outcome out;
    ValuationParams params{9.6e6, 65760.0, 1.0, 0.0};
    out.check(transfer_vsl(params, params.reference_income_usd) == params.base_vsl_usd, "identity");
    for (double eta : {0.5, 1.0, 1.5}) {
        params.income_elasticity = eta;
        for (double income : {700.0, 4500.0, 42000.0}) {
            for (double k : {0.5, 2.0, 4.0}) {
                auto scaled = params;
                scaled.base_vsl_usd *= k;
                out.check(transfer_vsl(scaled, income) == k * transfer_vsl(params, income),
                          fmt::format("linearity eta {} income {}", eta, income));
            }
        }
    }

    const auto &result = full_sweep().result;
    const auto &config = full_sweep().config;
    std::size_t checked = 0;
    for (std::size_t i = 0; i < result.rows.size(); i += std::size(all_scenario_kinds)) {
        const auto &first = result.rows[i];
        auto argmax = [&](double scale) {
            auto vp = config.valuation;
            vp.base_vsl_usd *= scale;
            const auto base = value_scenario(first.country_id, ScenarioKind::unmitigated,
                                             first.summary.total_deaths, first.gdp_usd,
                                             first.gni_per_capita_usd, vp);
            std::vector<double> values;
            for (std::size_t k = i; k < result.rows.size() && result.rows[k].country_id == first.country_id; ++k) {
                const auto &row = result.rows[k];
                const auto v = value_scenario(row.country_id, row.scenario, row.summary.total_deaths,
                                              row.gdp_usd, row.gni_per_capita_usd, vp);
                values.push_back(marginal_value(v, base, row.gdp_usd));
            }
            return std::max_element(values.begin(), values.end()) - values.begin();
        };
        const auto reference = argmax(1.0);
        for (double scale : {0.1, 0.37, 3.0, 25.0}) {
            if (argmax(scale) != reference) {
                out.check(false, fmt::format("{} argmax changes at scale {}", first.country_id, scale));
            }
        }
        ++checked;
    }
    if (out.pass) out.detail = fmt::format("identity exact, linearity exact, argmax stable for {} countries", checked);
    return out;
}

Outcome contraction() {
    Outcome out;
    const auto unit = contraction_mortality(1.0, 1000.0);
    out.check(unit.low == 0.24 && unit.high == 0.40,
              fmt::format("(1%, 1000 births) gave ({}, {})", unit.low, unit.high));
    const auto spot = contraction_mortality(2.5, 40000.0); // 2.5 * 40 * (0.24, 0.40) = (24, 40)
    out.check(std::abs(spot.low - 24.0) <= 1e-12 && std::abs(spot.high - 40.0) <= 1e-12,
              fmt::format("(2.5%, 40000 births) gave ({}, {})", spot.low, spot.high));
    const auto zero = contraction_mortality(0.0, 5e6);
    out.check(zero.low == 0.0 && zero.high == 0.0, "zero shock");
    if (out.pass) out.detail = "(0.24, 0.40) per 1,000 births per 1% exact";
    return out;
}

std::string results_bytes(const SweepResult &result, const RunConfig &config, const fs::path &dir) {
    write_results(result, config, dir);
    const auto columns = table_countries(result, config.table_countries);
    write_marginal_table(result, columns, dir);
    emit_figure_data(result, columns, dir);
    std::string all;
    for (const char *f : {results_files::results, results_files::failures, results_files::config,
                          results_files::table_csv, results_files::table_text,
                          results_files::fig1_countries, results_files::fig1_groups,
                          results_files::fig2_csv, results_files::fig3_csv}) {
        all += test::read_file(dir / f);
    }
    return all;
}

Outcome determinism_and_scale() {
    Outcome out;
    auto &sweep = full_sweep();
    const std::size_t countries = sweep.result.rows.size() / std::size(all_scenario_kinds);
    out.check(countries >= 150, fmt::format("{} countries", countries));
    out.check(sweep.result.failures.empty(), fmt::format("{} failures", sweep.result.failures.size()));
    out.check(sweep.seconds < 60.0, fmt::format("{:.1f} s", sweep.seconds));

    const auto dir = test::scratch_dir("acceptance_sweep");
    const auto reference = results_bytes(sweep.result, sweep.config, dir / "many");
    for (std::size_t workers : {std::size_t{1}, std::size_t{3}}) {
        auto config = sweep.config;
        config.workers = workers;
        const auto bytes = results_bytes(run_sweep(config), config, dir / fmt::format("w{}", workers));
        out.check(bytes == reference, fmt::format("output differs with {} workers", workers));
    }
    if (out.pass) {
        out.detail = fmt::format("{} countries x 5 scenarios in {:.2f} s with workers={}, identical with 1 and 3",
                                 countries, sweep.seconds, sweep.config.workers);
    }
    return out;
}

Outcome dt_robustness() {
    Outcome out;
    const auto countries = test::default_countries();
    std::string values;
    for (const char *id : {"USA", "BGD", "XSA"}) {
        const auto &country = test::find_country(countries, id);
        const auto contacts = test::default_contacts(country);
        auto params = test::calibrated_params(country, contacts);
        const double coarse = total_deaths(simulate(country, contacts, params, PolicyScenario{}));
        params.dt /= 2.0;
        const double fine = total_deaths(simulate(country, contacts, params, PolicyScenario{}));
        const double rel = std::abs(fine - coarse) / fine;
        out.check(rel < 0.005, fmt::format("{} changed {:.3f}%", id, 100.0 * rel));
        values += fmt::format("{} {:.3f}% ", id, 100.0 * rel);
    }
    if (out.pass) out.detail = "relative change " + values;
    return out;
}

} // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"NGM calibration", ngm_calibration},
        {"final-size oracle", final_size},
        {"conservation and monotonicity", conservation},
        {"demography gradient", demography_gradient},
        {"social distancing value by income", table_direction},
        {"trigger semantics", trigger_semantics},
        {"VSL transfer", vsl_transfer},
        {"contraction mortality", contraction},
        {"determinism and scale", determinism_and_scale},
        {"dt robustness", dt_robustness},
    };
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome outcome;
        try {
            outcome = criteria[i].second();
        } catch (const std::exception &e) {
            outcome = {false, fmt::format("exception: {}", e.what())};
        }
        failures += outcome.pass ? 0 : 1;
        std::cout << fmt::format("{} {:>2} {}: {}\n", outcome.pass ? "PASS" : "FAIL", i + 1,
                                 criteria[i].first, outcome.detail);
    }
    std::cout << fmt::format("{} of {} criteria passed\n", criteria.size() - failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
