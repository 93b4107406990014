#include "epivalue/country_data.h"

#include "epivalue/csv.h"
#include "epivalue/error.h"

#include <fmt/format.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>

namespace epivalue {

namespace {

std::string lower(std::string_view text) {
    std::string out{text};
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

double non_negative(const csv::Table &table, const csv::Record &row, std::size_t col) {
    const double value = table.number(row, col);
    if (!std::isfinite(value) || value < 0.0) {
        throw Error{ErrorCode::negative_value,
                    fmt::format("value {} must be finite and non-negative", value), row.line,
                    table.header()[col]};
    }
    return value;
}

std::optional<double> optional_non_negative(const csv::Table &table, const csv::Record &row,
                                            std::size_t col) {
    if (table.field(row, col).empty()) {
        return std::nullopt;
    }
    return non_negative(table, row, col);
}

bool is_iso3(std::string_view id) {
    return id.size() == 3 && std::all_of(id.begin(), id.end(), [](unsigned char c) {
               return std::isupper(c) != 0;
           });
}

} // namespace

std::string_view to_string(IncomeGroup group) noexcept {
    switch (group) {
    case IncomeGroup::low: return "low";
    case IncomeGroup::lower_middle: return "lower-middle";
    case IncomeGroup::upper_middle: return "upper-middle";
    case IncomeGroup::high: return "high";
    }
    return "low";
}

std::optional<IncomeGroup> parse_income_group(std::string_view text) {
    auto key = lower(text);
    if (key.size() > 7 && key.ends_with(" income")) {
        key.resize(key.size() - 7);
    }
    std::replace(key.begin(), key.end(), ' ', '-');
    std::replace(key.begin(), key.end(), '_', '-');
    if (key == "low") return IncomeGroup::low;
    if (key == "lower-middle") return IncomeGroup::lower_middle;
    if (key == "upper-middle") return IncomeGroup::upper_middle;
    if (key == "high") return IncomeGroup::high;
    return std::nullopt;
}

double CountryProfile::total_population() const noexcept {
    return std::accumulate(population_by_band.begin(), population_by_band.end(), 0.0);
}

double CountryProfile::births_or_throw() const {
    if (!annual_births) {
        throw Error{ErrorCode::missing_field,
                    fmt::format("{} has no annual births figure", country_id)};
    }
    return *annual_births;
}

double CountryProfile::informal_share_or_throw() const {
    if (!informal_employment_share) {
        throw Error{ErrorCode::missing_field,
                    fmt::format("{} has no informal employment share", country_id)};
    }
    return *informal_employment_share;
}

void validate(const CountryProfile &profile) {
    const auto &id = profile.country_id;
    if (profile.population_by_band.size() != age_band_count) {
        throw Error{ErrorCode::invariant_violation,
                    fmt::format("{}: expected {} population bands, got {}", id, age_band_count,
                                profile.population_by_band.size())};
    }
    for (std::size_t b = 0; b < age_band_count; ++b) {
        const double n = profile.population_by_band[b];
        if (!std::isfinite(n) || n < 0.0) {
            throw Error{ErrorCode::negative_value,
                        fmt::format("{}: population band {} is {}", id, b, n)};
        }
    }
    if (!(profile.total_population() > 0.0)) {
        throw Error{ErrorCode::invariant_violation, fmt::format("{}: total population is 0", id)};
    }
    for (double v : {profile.gdp_total_usd, profile.gni_per_capita_usd, profile.hospital_beds,
                     profile.icu_beds}) {
        if (!std::isfinite(v) || v < 0.0) {
            throw Error{ErrorCode::negative_value, fmt::format("{}: negative indicator {}", id, v)};
        }
    }
    if (profile.icu_beds > profile.hospital_beds) {
        throw Error{ErrorCode::invariant_violation,
                    fmt::format("{}: icu_beds {} exceed hospital_beds {}", id, profile.icu_beds,
                                profile.hospital_beds)};
    }
    if (profile.informal_employment_share && (*profile.informal_employment_share < 0.0 ||
                                              *profile.informal_employment_share > 1.0)) {
        throw Error{ErrorCode::invariant_violation,
                    fmt::format("{}: informal share outside [0,1]", id)};
    }
}

std::vector<CountryProfile> load_country_profiles(const std::filesystem::path &path) {
    const auto table = csv::read_table(path);
    const auto c_iso = table.column("iso3");
    const auto c_name = table.column("name");
    const auto c_income = table.column("income_group");
    std::vector<std::size_t> c_bands;
    for (std::size_t b = 0; b < age_band_count; ++b) {
        c_bands.push_back(table.column(fmt::format("pop_band_{}", b)));
    }
    const auto c_gdp = table.column("gdp_usd");
    const auto c_gni = table.column("gni_pc_usd");
    const auto c_hosp = table.column("hosp_beds");
    const auto c_icu = table.column("icu_beds");
    const auto c_births = table.column("births");
    const auto c_informal = table.column("informal_share");
    if (table.rows().empty()) {
        throw Error{ErrorCode::empty_file, fmt::format("'{}' has no country rows", path.string()),
                    table.header_line(), ""};
    }

    std::vector<CountryProfile> profiles;
    std::set<std::string> seen;
    for (const auto &row : table.rows()) {
        CountryProfile p;
        p.country_id = std::string{table.field(row, c_iso)};
        if (!is_iso3(p.country_id)) {
            throw Error{ErrorCode::parse_error,
                        fmt::format("'{}' is not an upper-case ISO3 code", p.country_id), row.line,
                        "iso3"};
        }
        if (!seen.insert(p.country_id).second) {
            throw Error{ErrorCode::duplicate_country,
                        fmt::format("country '{}' appears more than once", p.country_id), row.line,
                        "iso3"};
        }
        p.name = std::string{table.field(row, c_name)};
        auto group = parse_income_group(table.field(row, c_income));
        if (!group) {
            throw Error{ErrorCode::parse_error,
                        fmt::format("unknown income group '{}'", table.field(row, c_income)),
                        row.line, "income_group"};
        }
        p.income_group = *group;
        for (auto col : c_bands) {
            p.population_by_band.push_back(non_negative(table, row, col));
        }
        p.gdp_total_usd = non_negative(table, row, c_gdp);
        p.gni_per_capita_usd = non_negative(table, row, c_gni);
        p.hospital_beds = non_negative(table, row, c_hosp);
        p.icu_beds = non_negative(table, row, c_icu);
        p.annual_births = optional_non_negative(table, row, c_births);
        p.informal_employment_share = optional_non_negative(table, row, c_informal);

        if (p.total_population() <= 0.0) {
            throw Error{ErrorCode::invariant_violation, "population bands sum to zero", row.line,
                        "pop_band_0"};
        }
        if (p.icu_beds > p.hospital_beds) {
            throw Error{ErrorCode::invariant_violation, "icu_beds exceed hosp_beds", row.line,
                        "icu_beds"};
        }
        if (p.informal_employment_share && *p.informal_employment_share > 1.0) {
            throw Error{ErrorCode::invariant_violation, "informal_share above 1", row.line,
                        "informal_share"};
        }
        profiles.push_back(std::move(p));
    }
    return profiles;
}

void write_country_profiles(const std::filesystem::path &path,
                            const std::vector<CountryProfile> &profiles) {
    std::ofstream out{path, std::ios::binary};
    if (!out) {
        throw Error{ErrorCode::io, fmt::format("cannot write '{}'", path.string())};
    }
    out << "iso3,name,income_group";
    for (std::size_t b = 0; b < age_band_count; ++b) {
        out << ",pop_band_" << b;
    }
    out << ",gdp_usd,gni_pc_usd,hosp_beds,icu_beds,births,informal_share\n";
    auto opt = [](const std::optional<double> &v) {
        return v ? csv::format_double(*v) : std::string{};
    };
    for (const auto &p : profiles) {
        out << p.country_id << ',' << csv::escape(p.name) << ',' << to_string(p.income_group);
        for (double n : p.population_by_band) {
            out << ',' << csv::format_double(n);
        }
        out << ',' << csv::format_double(p.gdp_total_usd) << ','
            << csv::format_double(p.gni_per_capita_usd) << ','
            << csv::format_double(p.hospital_beds) << ',' << csv::format_double(p.icu_beds) << ','
            << opt(p.annual_births) << ',' << opt(p.informal_employment_share) << '\n';
    }
}

void validate(const SeverityProfile &s) {
    const auto n = s.bands();
    if (n == 0) {
        throw Error{ErrorCode::invariant_violation, "severity profile has no bands"};
    }
    for (const auto *v : {&s.p_icu, &s.d_hosp_treated, &s.d_hosp_untreated, &s.d_icu_treated,
                          &s.d_icu_untreated}) {
        if (v->size() != n) {
            throw Error{ErrorCode::invariant_violation, "severity vectors differ in length"};
        }
    }
    auto probability = [](double p) { return std::isfinite(p) && p >= 0.0 && p <= 1.0; };
    for (std::size_t b = 0; b < n; ++b) {
        for (double p : {s.p_hosp[b], s.p_icu[b], s.d_hosp_treated[b], s.d_hosp_untreated[b],
                         s.d_icu_treated[b], s.d_icu_untreated[b]}) {
            if (!probability(p)) {
                throw Error{ErrorCode::invariant_violation,
                            fmt::format("band {}: probability {} outside [0,1]", b, p)};
            }
        }
        if (s.d_hosp_untreated[b] < s.d_hosp_treated[b] ||
            s.d_icu_untreated[b] < s.d_icu_treated[b]) {
            throw Error{ErrorCode::invariant_violation,
                        fmt::format("band {}: untreated death probability below treated", b)};
        }
    }
    for (double d : {s.latent_period, s.infectious_period, s.hosp_stay_general, s.hosp_stay_icu}) {
        if (!std::isfinite(d) || d <= 0.0) {
            throw Error{ErrorCode::invariant_violation,
                        fmt::format("duration {} must be positive", d)};
        }
    }
}

SeverityProfile load_severity_profile(const std::filesystem::path &path) {
    auto records = csv::read_records(path);
    if (records.empty()) {
        throw Error{ErrorCode::empty_file, fmt::format("'{}' is empty", path.string()), 1, ""};
    }

    // Band rows come first; a "[durations]" marker line starts the key,value section.
    auto marker = std::find_if(records.begin(), records.end(), [](const csv::Record &r) {
        return r.fields.size() == 1 && r.fields.front() == "[durations]";
    });
    std::vector<csv::Record> band_records(records.begin(), marker);
    std::vector<csv::Record> duration_records;
    if (marker != records.end()) {
        duration_records.assign(marker + 1, records.end());
    }

    const csv::Table bands{path, std::move(band_records)};
    const auto c_band = bands.column("band");
    const auto c_hosp = bands.column("p_hosp");
    const auto c_icu = bands.column("p_icu");
    const auto c_dht = bands.column("d_hosp_t");
    const auto c_dhu = bands.column("d_hosp_u");
    const auto c_dit = bands.column("d_icu_t");
    const auto c_diu = bands.column("d_icu_u");

    SeverityProfile s;
    for (auto *v : {&s.p_hosp, &s.p_icu, &s.d_hosp_treated, &s.d_hosp_untreated, &s.d_icu_treated,
                    &s.d_icu_untreated}) {
        v->assign(age_band_count, 0.0);
    }
    std::vector<bool> present(age_band_count, false);
    for (const auto &row : bands.rows()) {
        const auto band = bands.integer(row, c_band);
        if (band < 0 || band >= static_cast<long long>(age_band_count)) {
            throw Error{ErrorCode::invariant_violation, fmt::format("band {} out of range", band),
                        row.line, "band"};
        }
        const auto b = static_cast<std::size_t>(band);
        if (present[b]) {
            throw Error{ErrorCode::invariant_violation, fmt::format("band {} repeated", band),
                        row.line, "band"};
        }
        present[b] = true;
        s.p_hosp[b] = bands.number(row, c_hosp);
        s.p_icu[b] = bands.number(row, c_icu);
        s.d_hosp_treated[b] = bands.number(row, c_dht);
        s.d_hosp_untreated[b] = bands.number(row, c_dhu);
        s.d_icu_treated[b] = bands.number(row, c_dit);
        s.d_icu_untreated[b] = bands.number(row, c_diu);
        for (double p : {s.p_hosp[b], s.p_icu[b], s.d_hosp_treated[b], s.d_hosp_untreated[b],
                         s.d_icu_treated[b], s.d_icu_untreated[b]}) {
            if (!(p >= 0.0 && p <= 1.0)) {
                throw Error{ErrorCode::invariant_violation,
                            fmt::format("band {}: probability {} outside [0,1]", band, p),
                            row.line, "p_hosp"};
            }
        }
        if (s.d_hosp_untreated[b] < s.d_hosp_treated[b]) {
            throw Error{ErrorCode::invariant_violation, "d_hosp_u below d_hosp_t", row.line,
                        "d_hosp_u"};
        }
        if (s.d_icu_untreated[b] < s.d_icu_treated[b]) {
            throw Error{ErrorCode::invariant_violation, "d_icu_u below d_icu_t", row.line,
                        "d_icu_u"};
        }
    }
    for (std::size_t b = 0; b < age_band_count; ++b) {
        if (!present[b]) {
            throw Error{ErrorCode::missing_band, fmt::format("no row for band {}", b),
                        bands.header_line(), "band"};
        }
    }

    if (!duration_records.empty()) {
        const csv::Table durations{path, std::move(duration_records)};
        const auto c_key = durations.column("key");
        const auto c_value = durations.column("value");
        for (const auto &row : durations.rows()) {
            const auto key = durations.field(row, c_key);
            const double value = durations.number(row, c_value);
            if (key == "latent_period") {
                s.latent_period = value;
            } else if (key == "infectious_period") {
                s.infectious_period = value;
            } else if (key == "hosp_stay_general") {
                s.hosp_stay_general = value;
            } else if (key == "hosp_stay_icu") {
                s.hosp_stay_icu = value;
            } else {
                throw Error{ErrorCode::parse_error, fmt::format("unknown duration '{}'", key),
                            row.line, "key"};
            }
        }
    }
    validate(s);
    return s;
}

std::map<std::string, SquareMatrix, std::less<>>
load_raw_contact_matrices(const std::filesystem::path &path) {
    const auto table = csv::read_table(path);
    const auto c_iso = table.column("iso3");
    const auto c_row = table.column("row_band");
    const auto c_col = table.column("col_band");
    const auto c_val = table.column("contacts_per_day");

    constexpr std::size_t n = age_band_count;
    struct Block {
        SquareMatrix matrix{n};
        std::vector<bool> seen = std::vector<bool>(n * n, false);
        std::size_t first_line{0};
    };
    std::map<std::string, Block, std::less<>> blocks;
    for (const auto &row : table.rows()) {
        auto &block = blocks[std::string{table.field(row, c_iso)}];
        block.first_line = block.first_line == 0 ? row.line : block.first_line;
        const auto i = table.integer(row, c_row);
        const auto j = table.integer(row, c_col);
        if (i < 0 || j < 0 || i >= static_cast<long long>(n) || j >= static_cast<long long>(n)) {
            throw Error{ErrorCode::invariant_violation, fmt::format("band ({}, {}) out of range", i, j),
                        row.line, "row_band"};
        }
        const auto idx = static_cast<std::size_t>(i) * n + static_cast<std::size_t>(j);
        if (block.seen[idx]) {
            throw Error{ErrorCode::invariant_violation,
                        fmt::format("entry ({}, {}) repeated for {}", i, j, table.field(row, c_iso)),
                        row.line, "col_band"};
        }
        block.seen[idx] = true;
        block.matrix.data()[idx] = non_negative(table, row, c_val);
    }

    std::map<std::string, SquareMatrix, std::less<>> out;
    for (auto &[key, block] : blocks) {
        for (std::size_t idx = 0; idx < block.seen.size(); ++idx) {
            if (!block.seen[idx]) {
                throw Error{ErrorCode::missing_band,
                            fmt::format("contacts for '{}' lack entry ({}, {})", key, idx / n,
                                        idx % n),
                            block.first_line, "row_band"};
            }
        }
        out.emplace(key, std::move(block.matrix));
    }
    return out;
}

const SquareMatrix &select_contact_matrix(
    const std::map<std::string, SquareMatrix, std::less<>> &matrices, std::string_view country_id,
    bool *fallback_used) {
    auto it = matrices.find(country_id);
    const bool fallback = it == matrices.end();
    if (fallback) {
        it = matrices.find(fallback_contact_key);
        if (it == matrices.end()) {
            throw Error{ErrorCode::missing_band,
                        fmt::format("no contact rows for '{}' and no {} fallback", country_id,
                                    fallback_contact_key)};
        }
    }
    if (fallback_used) {
        *fallback_used = fallback;
    }
    return it->second;
}

SquareMatrix load_raw_contact_matrix(const std::filesystem::path &path,
                                     std::string_view country_id, bool *fallback_used) {
    return select_contact_matrix(load_raw_contact_matrices(path), country_id, fallback_used);
}

ContactMatrix load_contact_matrix(const std::filesystem::path &path, std::string_view country_id,
                                  const BandVector &population) {
    bool fallback = false;
    auto raw = load_raw_contact_matrix(path, country_id, &fallback);
    auto balanced = balance_contact_matrix(raw, population);
    balanced.fallback_used = fallback;
    return balanced;
}

std::map<std::string, EconomicIndicators> load_economics(const std::filesystem::path &path) {
    const auto table = csv::read_table(path);
    const auto c_iso = table.column("iso3");
    const auto c_gdp = table.column("gdp_usd");
    const auto c_gni = table.column("gni_pc_usd");
    std::map<std::string, EconomicIndicators> out;
    for (const auto &row : table.rows()) {
        std::string id{table.field(row, c_iso)};
        EconomicIndicators e{non_negative(table, row, c_gdp), non_negative(table, row, c_gni)};
        if (!out.emplace(id, e).second) {
            throw Error{ErrorCode::duplicate_country,
                        fmt::format("country '{}' appears more than once", id), row.line, "iso3"};
        }
    }
    return out;
}

void apply_economics(std::vector<CountryProfile> &profiles,
                     const std::map<std::string, EconomicIndicators> &economics) {
    for (auto &p : profiles) {
        if (auto it = economics.find(p.country_id); it != economics.end()) {
            p.gdp_total_usd = it->second.gdp_usd;
            p.gni_per_capita_usd = it->second.gni_per_capita_usd;
        }
    }
}

ContactMatrix balance_contact_matrix(const SquareMatrix &raw, const BandVector &population) {
    const auto n = raw.size();
    if (population.size() != n) {
        throw Error{ErrorCode::invariant_violation,
                    fmt::format("population has {} bands, matrix {}", population.size(), n)};
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (!(population[i] > 0.0)) {
            throw Error{ErrorCode::zero_population_band,
                        fmt::format("band {} has population {}", i, population[i])};
        }
        for (std::size_t j = 0; j < n; ++j) {
            if (!(raw(i, j) >= 0.0) || !std::isfinite(raw(i, j))) {
                throw Error{ErrorCode::negative_value,
                            fmt::format("contact entry ({}, {}) is {}", i, j, raw(i, j))};
            }
        }
    }
    ContactMatrix out{SquareMatrix{n}, population, false};
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            out.entries(i, j) = (raw(i, j) + raw(j, i) * population[j] / population[i]) / 2.0;
        }
    }
    return out;
}

double reciprocity_error(const SquareMatrix &m, const BandVector &population) {
    double worst = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i) {
        for (std::size_t j = i + 1; j < m.size(); ++j) {
            const double a = m(i, j) * population[i];
            const double b = m(j, i) * population[j];
            const double scale = std::max(std::abs(a), std::abs(b));
            if (scale > 0.0) {
                worst = std::max(worst, std::abs(a - b) / scale);
            }
        }
    }
    return worst;
}

double elderly_share(const CountryProfile &profile, std::size_t cutoff_band) {
    const double total = profile.total_population();
    if (total <= 0.0) {
        return 0.0;
    }
    double elderly = 0.0;
    for (std::size_t b = cutoff_band; b < profile.population_by_band.size(); ++b) {
        elderly += profile.population_by_band[b];
    }
    return std::clamp(elderly / total, 0.0, 1.0);
}

} // namespace epivalue
