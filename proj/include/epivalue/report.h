#pragma once

#include "epivalue/sweep.h"

#include <filesystem>
#include <string>
#include <vector>

namespace epivalue {

/// File names inside a results directory.
namespace results_files {
inline constexpr const char *results = "results.csv";
inline constexpr const char *failures = "failures.csv";
inline constexpr const char *metadata = "metadata.json";
inline constexpr const char *config = "run_config.json";
inline constexpr const char *table_text = "marginal_table.txt";
inline constexpr const char *table_csv = "marginal_table.csv";
inline constexpr const char *fig1_countries = "fig1_mortality.csv";
inline constexpr const char *fig1_groups = "fig1_income_groups.csv";
inline constexpr const char *fig1_svg = "fig1_mortality.svg";
inline constexpr const char *fig2_csv = "fig2_vsl_loss.csv";
inline constexpr const char *fig2_svg = "fig2_vsl_loss.svg";
inline constexpr const char *fig3_csv = "fig3_loss_pct_gdp.csv";
inline constexpr const char *fig3_svg = "fig3_loss_pct_gdp.svg";
} // namespace results_files

/// First line of every CSV this project writes.
std::string hash_comment(const std::string &config_hash);

/// Reads the hash from a file's "# config_hash=..." first line; empty when absent.
std::string read_hash_comment(const std::filesystem::path &path);

/// Writes results.csv, failures.csv, metadata.json and run_config.json.
void write_results(const SweepResult &result, const RunConfig &config,
                   const std::filesystem::path &dir);

/// Rebuilds a SweepResult from a results directory (rows, failures, hash).
SweepResult read_results(const std::filesystem::path &dir);

struct MarginalTable {
    std::string text;
    std::string csv;
};

/// Rows are scenarios, columns the listed countries grouped high to low income (listed
/// order kept within a group). Text cells are rounded percentages of GDP, the baseline
/// row renders as "--"; the CSV keeps full precision.
MarginalTable emit_marginal_table(const SweepResult &results,
                                  const std::vector<std::string> &countries);

/// Default table columns: `preferred` entries present in the results, or every country.
std::vector<std::string> table_countries(const SweepResult &results,
                                         const std::vector<std::string> &preferred);

void write_marginal_table(const SweepResult &results, const std::vector<std::string> &countries,
                          const std::filesystem::path &dir);

/// Writes the three figure datasets (CSV) and a static SVG chart for each.
/// `highlight` picks the countries drawn in the per-country charts.
void emit_figure_data(const SweepResult &results, const std::vector<std::string> &highlight,
                      const std::filesystem::path &dir);

/// One row per step per band.
void write_trajectory_csv(const EpidemicTrajectory &traj, const std::string &config_hash,
                          const std::filesystem::path &path);

nlohmann::json trajectory_summary_json(const EpidemicTrajectory &traj);

} // namespace epivalue
