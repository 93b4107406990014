#include "epivalue/sweep.h"

#include <fmt/format.h>
#include <openssl/evp.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <ctime>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>
#include <variant>

namespace epivalue {

namespace fs = std::filesystem;

namespace {

fs::path resolve(const fs::path &base, const std::string &value) {
    fs::path p{value};
    return p.is_absolute() ? p : base / p;
}

template <typename T> std::optional<T> optional_value(const nlohmann::json &j, const char *key) {
    if (auto it = j.find(key); it != j.end() && !it->is_null()) {
        return it->get<T>();
    }
    return std::nullopt;
}

EpiParams make_epi_params(const RunConfig &config, const SeverityProfile &severity) {
    EpiParams p;
    p.severity = severity;
    if (config.epi.r0_target) p.r0_target = *config.epi.r0_target;
    if (config.epi.dt) p.dt = *config.epi.dt;
    if (config.epi.horizon) p.horizon = *config.epi.horizon;
    if (config.epi.seed_infections) p.seed_infections = *config.epi.seed_infections;
    return p;
}

std::vector<PolicyScenario> effective_scenarios(const RunConfig &config, bool *added) {
    auto scenarios = config.scenarios;
    const bool has_baseline = std::any_of(scenarios.begin(), scenarios.end(), [](const auto &s) {
        return s.kind == ScenarioKind::unmitigated;
    });
    if (!has_baseline) {
        scenarios.push_back(PolicyScenario::make(ScenarioKind::unmitigated));
    }
    if (added) {
        *added = !has_baseline;
    }
    std::sort(scenarios.begin(), scenarios.end(),
              [](const auto &a, const auto &b) { return a.kind < b.kind; });
    return scenarios;
}

std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

struct PreparedCountry {
    CountryProfile profile;
    ContactMatrix contacts;
    EpiParams params;
};

using TaskOutcome = std::variant<std::monostate, TrajectorySummary, CountryFailure>;

} // namespace

RunConfig parse_run_config(const nlohmann::json &j, const fs::path &base_dir) {
    try {
        RunConfig c;
        c.countries_path = resolve(base_dir, j.at("countries").get<std::string>());
        c.contacts_path = resolve(base_dir, j.at("contacts").get<std::string>());
        c.severity_path = resolve(base_dir, j.at("severity").get<std::string>());
        if (auto econ = optional_value<std::string>(j, "economics")) {
            c.economics_path = resolve(base_dir, *econ);
        }
        for (const auto &s : j.at("scenarios")) {
            c.scenarios.push_back(s.get<PolicyScenario>());
        }
        if (auto it = j.find("epi"); it != j.end()) {
            c.epi.r0_target = optional_value<double>(*it, "r0_target");
            c.epi.dt = optional_value<double>(*it, "dt");
            c.epi.horizon = optional_value<double>(*it, "horizon");
            c.epi.seed_infections = optional_value<double>(*it, "seed_infections");
        }
        if (auto it = j.find("valuation"); it != j.end()) {
            c.valuation = it->get<ValuationParams>();
        }
        if (auto out = optional_value<std::string>(j, "output_dir")) {
            c.output_dir = resolve(base_dir, *out);
        }
        if (auto it = j.find("country_filter"); it != j.end() && !it->is_null()) {
            if (it->is_string()) {
                if (it->get<std::string>() != "all") {
                    throw Error{ErrorCode::config_error,
                                "country_filter must be \"all\" or a list of ISO3 codes"};
                }
            } else {
                c.country_filter = it->get<std::vector<std::string>>();
            }
        }
        c.table_countries = j.value("table_countries", std::vector<std::string>{});
        if (auto it = j.find("gdp_shock_pct"); it != j.end() && !it->is_null()) {
            if (it->is_number()) {
                for (auto kind : all_scenario_kinds) {
                    if (kind != ScenarioKind::unmitigated) {
                        c.gdp_shock_pct[kind] = it->get<double>();
                    }
                }
            } else {
                for (const auto &[key, value] : it->items()) {
                    auto kind = parse_scenario_kind(key);
                    if (!kind) {
                        throw Error{ErrorCode::config_error,
                                    fmt::format("gdp_shock_pct: unknown scenario '{}'", key)};
                    }
                    c.gdp_shock_pct[*kind] = value.get<double>();
                }
            }
        }
        c.workers = j.value("workers", std::size_t{1});
        c.write_trajectories = j.value("write_trajectories", false);
        return c;
    } catch (const nlohmann::json::exception &e) {
        throw Error{ErrorCode::config_error, e.what()};
    }
}

RunConfig load_run_config(const fs::path &path) {
    std::ifstream in{path};
    if (!in) {
        throw Error{ErrorCode::config_error, fmt::format("cannot open config '{}'", path.string())};
    }
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception &e) {
        throw Error{ErrorCode::config_error, fmt::format("'{}': {}", path.string(), e.what())};
    }
    return parse_run_config(j, path.parent_path());
}

void validate(const RunConfig &c) {
    auto require = [](const fs::path &p, const char *what) {
        if (!fs::is_regular_file(p)) {
            throw Error{ErrorCode::config_error,
                        fmt::format("{} file '{}' does not exist", what, p.string())};
        }
    };
    require(c.countries_path, "countries");
    require(c.contacts_path, "contacts");
    require(c.severity_path, "severity");
    if (c.economics_path) {
        require(*c.economics_path, "economics");
    }
    if (c.scenarios.empty()) {
        throw Error{ErrorCode::config_error, "scenario list is empty"};
    }
    std::set<ScenarioKind> kinds;
    for (const auto &s : c.scenarios) {
        validate(s);
        if (!kinds.insert(s.kind).second) {
            throw Error{ErrorCode::config_error,
                        fmt::format("scenario '{}' listed twice", to_string(s.kind))};
        }
    }
    if (c.workers < 1) {
        throw Error{ErrorCode::config_error, "workers must be >= 1"};
    }
    for (const auto &[kind, shock] : c.gdp_shock_pct) {
        if (!(shock >= 0.0)) {
            throw Error{ErrorCode::config_error, "gdp_shock_pct must be >= 0"};
        }
    }
    validate(c.valuation);
}

std::string sha256_hex(std::string_view bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
        throw Error{ErrorCode::io, "SHA-256 failed"};
    }
    std::string hex;
    hex.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        hex += fmt::format("{:02x}", digest[i]);
    }
    return hex;
}

std::string file_sha256(const fs::path &path) {
    std::ifstream in{path, std::ios::binary};
    if (!in) {
        throw Error{ErrorCode::io, fmt::format("cannot read '{}'", path.string())};
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return sha256_hex(buf.str());
}

nlohmann::json canonical_config(const RunConfig &c) {
    nlohmann::json j;
    j["inputs"] = {{"countries", file_sha256(c.countries_path)},
                   {"contacts", file_sha256(c.contacts_path)},
                   {"severity", file_sha256(c.severity_path)}};
    j["inputs"]["economics"] =
        c.economics_path ? nlohmann::json(file_sha256(*c.economics_path)) : nlohmann::json(nullptr);
    auto scenarios = nlohmann::json::array();
    for (const auto &s : effective_scenarios(c, nullptr)) {
        scenarios.push_back(s);
    }
    j["scenarios"] = scenarios;
    const auto epi = make_epi_params(c, SeverityProfile{});
    j["epi"] = {{"r0_target", epi.r0_target},
                {"dt", epi.dt},
                {"horizon", epi.horizon},
                {"seed_infections", epi.seed_infections}};
    j["valuation"] = c.valuation;
    j["country_filter"] = c.country_filter ? nlohmann::json(*c.country_filter) : nlohmann::json("all");
    j["table_countries"] = c.table_countries;
    auto shocks = nlohmann::json::object();
    for (const auto &[kind, shock] : c.gdp_shock_pct) {
        shocks[std::string{to_string(kind)}] = shock;
    }
    j["gdp_shock_pct"] = shocks;
    return j;
}

std::string config_hash(const RunConfig &config) {
    return sha256_hex(canonical_config(config).dump());
}

TrajectorySummary summarize(const EpidemicTrajectory &traj) {
    TrajectorySummary s;
    s.population = traj.total_population();
    s.total_deaths = total_deaths(traj);
    s.attack_rate = attack_rate(traj);
    if (!traj.general_demand.empty()) {
        s.peak_general_demand = *std::max_element(traj.general_demand.begin(), traj.general_demand.end());
        s.peak_icu_demand = *std::max_element(traj.icu_demand.begin(), traj.icu_demand.end());
    }
    s.general_capacity = traj.general_capacity;
    s.icu_capacity = traj.icu_capacity;
    s.trigger_time = traj.trigger_time;
    s.burned_out = traj.burned_out();
    s.final_daily_incidence = traj.final_daily_incidence;
    return s;
}

const SweepRow *SweepResult::find(std::string_view country_id, ScenarioKind scenario) const {
    for (const auto &row : rows) {
        if (row.country_id == country_id && row.scenario == scenario) {
            return &row;
        }
    }
    return nullptr;
}

SweepResult run_sweep(const RunConfig &config, const TrajectorySink &sink) {
    validate(config);

    SweepResult result;
    auto &meta = result.metadata;
    meta.config_hash = config_hash(config);
    meta.timestamp = utc_timestamp();
    meta.workers = config.workers;
    meta.kernels = std::string{kernels::to_string(kernels::active_kernels().isa)};
    meta.file_checksums["countries"] = file_sha256(config.countries_path);
    meta.file_checksums["contacts"] = file_sha256(config.contacts_path);
    meta.file_checksums["severity"] = file_sha256(config.severity_path);
    if (config.economics_path) {
        meta.file_checksums["economics"] = file_sha256(*config.economics_path);
    }

    bool added_baseline = false;
    const auto scenarios = effective_scenarios(config, &added_baseline);
    if (added_baseline) {
        meta.notices.push_back("unmitigated scenario was not listed and has been added");
        spdlog::info("unmitigated scenario added to the sweep");
    }

    auto profiles = load_country_profiles(config.countries_path);
    if (config.economics_path) {
        apply_economics(profiles, load_economics(*config.economics_path));
    }
    const auto severity = load_severity_profile(config.severity_path);
    const auto base_params = make_epi_params(config, severity);
    validate(base_params);

    std::map<std::string, CountryFailure> failures;
    if (config.country_filter) {
        std::set<std::string> wanted(config.country_filter->begin(), config.country_filter->end());
        for (const auto &id : wanted) {
            const bool known = std::any_of(profiles.begin(), profiles.end(),
                                           [&](const auto &p) { return p.country_id == id; });
            if (!known) {
                failures[id] = {id, ErrorCode::unknown_country, "not present in countries file"};
            }
        }
        std::erase_if(profiles, [&](const auto &p) { return !wanted.contains(p.country_id); });
    }
    std::sort(profiles.begin(), profiles.end(),
              [](const auto &a, const auto &b) { return a.country_id < b.country_id; });

    const auto raw_contacts = load_raw_contact_matrices(config.contacts_path);
    std::vector<PreparedCountry> prepared;
    for (auto &profile : profiles) {
        try {
            validate(profile);
            bool fallback = false;
            const auto &raw = select_contact_matrix(raw_contacts, profile.country_id, &fallback);
            auto contacts = balance_contact_matrix(raw, profile.population_by_band);
            contacts.fallback_used = fallback;
            if (contacts.fallback_used) {
                meta.notices.push_back(
                    fmt::format("{}: using {} contact matrix", profile.country_id, fallback_contact_key));
            }
            auto params = base_params;
            params.beta = calibrate_beta(contacts, params, profile.population_by_band);
            prepared.push_back({std::move(profile), std::move(contacts), std::move(params)});
        } catch (const Error &e) {
            failures[profile.country_id] = {profile.country_id, e.code(), e.what()};
        }
    }

    const std::size_t task_count = prepared.size() * scenarios.size();
    spdlog::debug("{} countries x {} scenarios on {} workers, {} kernels", prepared.size(),
                  scenarios.size(), config.workers, meta.kernels);
    std::vector<TaskOutcome> outcomes(task_count);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t task = next++; task < task_count; task = next++) {
            const auto &country = prepared[task / scenarios.size()];
            const auto &scenario = scenarios[task % scenarios.size()];
            try {
                const auto traj = simulate(country.profile, country.contacts, country.params, scenario);
                if (sink) {
                    sink(country.profile, scenario, traj);
                }
                outcomes[task] = summarize(traj);
            } catch (const Error &e) {
                outcomes[task] = CountryFailure{country.profile.country_id, e.code(), e.what()};
            } catch (const std::exception &e) {
                outcomes[task] = CountryFailure{country.profile.country_id,
                                                ErrorCode::invariant_violation, e.what()};
            }
        }
    };
    {
        const auto threads = std::min<std::size_t>(config.workers, std::max<std::size_t>(task_count, 1));
        std::vector<std::jthread> pool;
        for (std::size_t w = 1; w < threads; ++w) {
            pool.emplace_back(worker);
        }
        worker();
    }

    for (std::size_t c = 0; c < prepared.size(); ++c) {
        const auto &country = prepared[c];
        const auto &p = country.profile;
        std::vector<SweepRow> rows;
        std::optional<CountryFailure> failure;
        for (std::size_t s = 0; s < scenarios.size() && !failure; ++s) {
            auto &outcome = outcomes[c * scenarios.size() + s];
            if (auto *f = std::get_if<CountryFailure>(&outcome)) {
                failure = *f;
                break;
            }
            SweepRow row;
            row.country_id = p.country_id;
            row.name = p.name;
            row.income_group = p.income_group;
            row.elderly_share = elderly_share(p);
            row.gdp_usd = p.gdp_total_usd;
            row.gni_per_capita_usd = p.gni_per_capita_usd;
            row.informal_share = p.informal_employment_share;
            row.contact_fallback = country.contacts.fallback_used;
            row.scenario = scenarios[s].kind;
            row.summary = std::get<TrajectorySummary>(outcome);
            if (!row.summary.burned_out) {
                meta.notices.push_back(fmt::format(
                    "{} {}: epidemic still active at horizon ({:.1f} infections/day)", p.country_id,
                    to_string(row.scenario), row.summary.final_daily_incidence));
            }
            try {
                row.valuation = value_scenario(p.country_id, row.scenario, row.summary.total_deaths,
                                               p.gdp_total_usd, p.gni_per_capita_usd,
                                               config.valuation);
                if (auto it = config.gdp_shock_pct.find(row.scenario);
                    it != config.gdp_shock_pct.end() && p.annual_births) {
                    row.valuation.contraction_infant_deaths =
                        contraction_mortality(it->second, *p.annual_births);
                }
            } catch (const Error &e) {
                failure = CountryFailure{p.country_id, e.code(), e.what()};
                break;
            }
            rows.push_back(std::move(row));
        }
        if (failure) {
            failures[p.country_id] = *failure;
            continue;
        }
        const auto baseline = std::find_if(rows.begin(), rows.end(), [](const auto &r) {
            return r.scenario == ScenarioKind::unmitigated;
        });
        const auto baseline_valuation = baseline->valuation;
        for (auto &row : rows) {
            row.valuation.marginal_value_pct_gdp =
                row.scenario == ScenarioKind::unmitigated
                    ? 0.0
                    : marginal_value(row.valuation, baseline_valuation, p.gdp_total_usd);
        }
        std::move(rows.begin(), rows.end(), std::back_inserter(result.rows));
    }

    for (auto &[id, failure] : failures) {
        spdlog::warn("{} failed: {}", id, failure.reason);
        result.failures.push_back(std::move(failure));
    }
    return result;
}

int sweep_exit_code(const SweepResult &result) {
    if (result.failures.empty()) {
        return 0;
    }
    const bool numerical = std::any_of(result.failures.begin(), result.failures.end(), [](const auto &f) {
        return f.code == ErrorCode::non_finite_state;
    });
    return numerical ? 3 : 2;
}

} // namespace epivalue
