#include "epivalue/report.h"
#include "epivalue/sweep.h"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>

namespace fs = std::filesystem;
using namespace epivalue;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_config = 1;
constexpr int exit_numerical = 3;

void setup_logging() {
    auto logger = spdlog::stderr_color_mt("epivalue");
    spdlog::set_default_logger(logger);
    spdlog::set_pattern("[%l] %v");
    spdlog::set_level(spdlog::level::warn);
    if (const char *env = std::getenv("EPIVALUE_LOG")) {
        const auto level = spdlog::level::from_str(env);
        if (level == spdlog::level::off && std::string_view{env} != "off") {
            spdlog::warn("unknown EPIVALUE_LOG level '{}'", env);
        } else {
            spdlog::set_level(level);
        }
    }
}

std::vector<std::string> split_ids(const std::string &text) {
    std::vector<std::string> out;
    std::stringstream ss{text};
    std::string id;
    while (std::getline(ss, id, ',')) {
        if (!id.empty()) out.push_back(id);
    }
    return out;
}

/// Table column order recorded with the run, falling back to every country.
std::vector<std::string> recorded_table_countries(const fs::path &dir, const SweepResult &results) {
    std::vector<std::string> preferred;
    std::ifstream in{dir / results_files::config};
    if (in) {
        const auto j = nlohmann::json::parse(in, nullptr, false);
        if (!j.is_discarded() && j.contains("table_countries")) {
            preferred = j["table_countries"].get<std::vector<std::string>>();
        }
    }
    return table_countries(results, preferred);
}

int run_command(const fs::path &config_path, const std::string &countries,
                std::optional<std::size_t> workers, const std::string &out) {
    auto config = load_run_config(config_path);
    if (!countries.empty()) {
        config.country_filter = split_ids(countries);
    }
    if (workers) {
        config.workers = *workers;
    }
    if (!out.empty()) {
        config.output_dir = out;
    }
    validate(config);

    const auto trajectory_dir = config.output_dir / "trajectories";
    const auto hash = config_hash(config);
    TrajectorySink sink;
    if (config.write_trajectories) {
        fs::create_directories(trajectory_dir);
        sink = [&](const CountryProfile &country, const PolicyScenario &scenario,
                   const EpidemicTrajectory &traj) {
            const auto stem = fmt::format("{}_{}", country.country_id, to_string(scenario.kind));
            write_trajectory_csv(traj, hash, trajectory_dir / (stem + ".csv"));
            std::ofstream json{trajectory_dir / (stem + ".json")};
            json << trajectory_summary_json(traj).dump(2) << '\n';
        };
    }

    const auto result = run_sweep(config, sink);
    write_results(result, config, config.output_dir);
    const auto columns = table_countries(result, config.table_countries);
    write_marginal_table(result, columns, config.output_dir);
    emit_figure_data(result, columns, config.output_dir);

    if (!result.rows.empty()) {
        std::cout << emit_marginal_table(result, columns).text;
    }
    for (const auto &f : result.failures) {
        std::cerr << fmt::format("failed: {} ({}): {}\n", f.country_id, to_string(f.code), f.reason);
    }
    spdlog::info("{} rows written to {}", result.rows.size(), config.output_dir.string());
    return sweep_exit_code(result);
}

int table_command(const fs::path &dir) {
    const auto results = read_results(dir);
    const auto columns = recorded_table_countries(dir, results);
    write_marginal_table(results, columns, dir);
    std::cout << emit_marginal_table(results, columns).text;
    return exit_ok;
}

int figures_command(const fs::path &dir) {
    const auto results = read_results(dir);
    emit_figure_data(results, recorded_table_countries(dir, results), dir);
    std::cout << fmt::format("figure data written to {}\n", dir.string());
    return exit_ok;
}

} // namespace

int main(int argc, char **argv) {
    setup_logging();

    CLI::App app{"Age-structured epidemic scenarios valued in statistical lives"};
    app.require_subcommand(1);

    std::string config_path;
    std::string countries;
    std::size_t workers = 0;
    std::string out;
    auto *run = app.add_subcommand("run", "Run the country x scenario sweep");
    run->add_option("--config", config_path, "Run configuration JSON")->required();
    run->add_option("--countries", countries, "Comma-separated ISO3 filter");
    auto *workers_opt =
        run->add_option("--workers", workers, "Worker threads")->check(CLI::PositiveNumber);
    run->add_option("--out", out, "Output directory");

    std::string table_dir;
    auto *table = app.add_subcommand("table", "Print the marginal-value table");
    table->add_option("--results", table_dir, "Results directory")->required();

    std::string figures_dir;
    auto *figures = app.add_subcommand("figures", "Write figure datasets and SVG charts");
    figures->add_option("--results", figures_dir, "Results directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e);
        return code == 0 ? exit_ok : exit_config;
    }

    try {
        if (run->parsed()) {
            std::optional<std::size_t> w;
            if (workers_opt->count() > 0) w = workers;
            return run_command(config_path, countries, w, out);
        }
        if (table->parsed()) {
            return table_command(table_dir);
        }
        return figures_command(figures_dir);
    } catch (const Error &e) {
        spdlog::error("{}: {}", to_string(e.code()), e.what());
        return e.code() == ErrorCode::non_finite_state ? exit_numerical : exit_config;
    } catch (const std::exception &e) {
        spdlog::error("{}", e.what());
        return exit_config;
    }
}
