#pragma once

#include "epivalue/country_data.h"
#include "epivalue/epi_engine.h"
#include "epivalue/error.h"
#include "epivalue/policy.h"
#include "epivalue/valuation.h"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace epivalue {

/// Engine settings a run config may override; unset fields keep EpiParams defaults.
struct EpiOverrides {
    std::optional<double> r0_target;
    std::optional<double> dt;
    std::optional<double> horizon;
    std::optional<double> seed_infections;
};

struct RunConfig {
    std::filesystem::path countries_path;
    std::filesystem::path contacts_path;
    std::filesystem::path severity_path;
    std::optional<std::filesystem::path> economics_path;
    std::vector<PolicyScenario> scenarios;
    EpiOverrides epi;
    ValuationParams valuation;
    std::filesystem::path output_dir{"results"};
    /// Empty optional means every country in the file.
    std::optional<std::vector<std::string>> country_filter;
    /// Column order for the marginal-value table and highlighted figure countries.
    std::vector<std::string> table_countries;
    /// GDP contraction per scenario, in percent, for the infant-mortality columns.
    std::map<ScenarioKind, double> gdp_shock_pct;
    std::size_t workers{1};
    bool write_trajectories{false};
};

/// Parses run.json. Relative paths resolve against the config file's directory.
RunConfig load_run_config(const std::filesystem::path &path);
RunConfig parse_run_config(const nlohmann::json &j, const std::filesystem::path &base_dir);

/// Throws ConfigError when referenced files are missing, no scenario is listed, a
/// scenario kind repeats, or workers is 0.
void validate(const RunConfig &config);

/// Canonical description of everything that determines the results: input files are
/// represented by content checksums; output directory and worker count are excluded.
nlohmann::json canonical_config(const RunConfig &config);

/// Hex SHA-256 of canonical_config(config).dump().
std::string config_hash(const RunConfig &config);

std::string sha256_hex(std::string_view bytes);
std::string file_sha256(const std::filesystem::path &path);

struct TrajectorySummary {
    double population{0.0};
    double total_deaths{0.0};
    double attack_rate{0.0};
    double peak_general_demand{0.0};
    double peak_icu_demand{0.0};
    double general_capacity{0.0};
    double icu_capacity{0.0};
    std::optional<double> trigger_time;
    bool burned_out{true};
    double final_daily_incidence{0.0};

    double mortality_pct() const noexcept {
        return population > 0.0 ? 100.0 * total_deaths / population : 0.0;
    }
};

TrajectorySummary summarize(const EpidemicTrajectory &traj);

struct SweepRow {
    std::string country_id;
    std::string name;
    IncomeGroup income_group{IncomeGroup::low};
    double elderly_share{0.0};
    double gdp_usd{0.0};
    double gni_per_capita_usd{0.0};
    std::optional<double> informal_share;
    bool contact_fallback{false};
    ScenarioKind scenario{ScenarioKind::unmitigated};
    TrajectorySummary summary;
    ValuationResult valuation;
};

struct CountryFailure {
    std::string country_id;
    ErrorCode code{ErrorCode::invariant_violation};
    std::string reason;
};

struct RunMetadata {
    std::string config_hash;
    std::string timestamp;
    std::map<std::string, std::string> file_checksums;
    std::vector<std::string> notices;
    std::string kernels;
    std::size_t workers{1};
};

struct SweepResult {
    /// Sorted by (country_id, scenario kind).
    std::vector<SweepRow> rows;
    std::vector<CountryFailure> failures;
    RunMetadata metadata;

    const SweepRow *find(std::string_view country_id, ScenarioKind scenario) const;
};

/// Called from worker threads with each completed trajectory; must be safe to call
/// concurrently for distinct (country, scenario) pairs.
using TrajectorySink = std::function<void(const CountryProfile &, const PolicyScenario &,
                                          const EpidemicTrajectory &)>;

/// Runs every (country, scenario) simulation on `config.workers` threads. Output does not
/// depend on the worker count. Countries whose data or simulations fail are reported in
/// `failures` and left out of `rows`; load errors of the shared input files throw.
SweepResult run_sweep(const RunConfig &config, const TrajectorySink &sink = {});

/// Exit status for a completed sweep: 0 clean, 2 partial failure, 3 numerical failure.
int sweep_exit_code(const SweepResult &result);

} // namespace epivalue
