#include "epivalue/report.h"

#include "epivalue/csv.h"

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace epivalue {

namespace fs = std::filesystem;

namespace {

std::ofstream open_output(const fs::path &path) {
    std::ofstream out{path, std::ios::binary};
    if (!out) {
        throw Error{ErrorCode::io, fmt::format("cannot write '{}'", path.string())};
    }
    return out;
}

std::string num(double v) { return csv::format_double(v); }

std::string opt_num(const std::optional<double> &v) { return v ? num(*v) : std::string{}; }

std::string_view scenario_label(ScenarioKind kind) {
    switch (kind) {
    case ScenarioKind::unmitigated: return "Unmitigated";
    case ScenarioKind::social_distancing: return "Social distancing";
    case ScenarioKind::social_distancing_plus: return "Social distancing+targeting";
    case ScenarioKind::late_suppression: return "Late suppression";
    case ScenarioKind::early_suppression: return "Early suppression";
    }
    return "";
}

std::string_view group_label(IncomeGroup g) {
    switch (g) {
    case IncomeGroup::high: return "High Income";
    case IncomeGroup::upper_middle: return "Upper-Middle Income";
    case IncomeGroup::lower_middle: return "Lower-Middle Income";
    case IncomeGroup::low: return "Low Income";
    }
    return "";
}

std::string_view group_abbreviation(IncomeGroup g) {
    switch (g) {
    case IncomeGroup::high: return "HIC";
    case IncomeGroup::upper_middle: return "UMIC";
    case IncomeGroup::lower_middle: return "LMIC";
    case IncomeGroup::low: return "LIC";
    }
    return "";
}

constexpr IncomeGroup groups_high_to_low[] = {IncomeGroup::high, IncomeGroup::upper_middle,
                                              IncomeGroup::lower_middle, IncomeGroup::low};

std::vector<ScenarioKind> scenarios_in(const SweepResult &r) {
    std::vector<ScenarioKind> kinds;
    for (const auto &row : r.rows) {
        if (std::find(kinds.begin(), kinds.end(), row.scenario) == kinds.end()) {
            kinds.push_back(row.scenario);
        }
    }
    std::sort(kinds.begin(), kinds.end());
    return kinds;
}

/// One representative row per country (the first scenario), in id order.
std::vector<const SweepRow *> countries_in(const SweepResult &r) {
    std::vector<const SweepRow *> out;
    for (const auto &row : r.rows) {
        if (out.empty() || out.back()->country_id != row.country_id) {
            out.push_back(&row);
        }
    }
    return out;
}

const SweepRow *any_row(const SweepResult &r, std::string_view id) {
    for (const auto &row : r.rows) {
        if (row.country_id == id) return &row;
    }
    return nullptr;
}

double quantile(std::vector<double> v, double q) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const double pos = q * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

std::string xml_escape(std::string_view text) {
    std::string out;
    for (char c : text) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out.push_back(c);
        }
    }
    return out;
}

constexpr const char *scenario_colours[] = {"#444444", "#1b9e77", "#d95f02", "#7570b3", "#e7298a"};

/// Minimal hand-written SVG canvas.
class Svg {
  public:
    Svg(double width, double height, const std::string &config_hash) : width_{width}, height_{height} {
        out_ << fmt::format("<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" "
                            "viewBox=\"0 0 {} {}\" font-family=\"sans-serif\" font-size=\"11\">\n",
                            width, height, width, height);
        out_ << fmt::format("<!-- config_hash={} -->\n", config_hash);
        out_ << fmt::format("<rect width=\"{}\" height=\"{}\" fill=\"white\"/>\n", width, height);
    }

    void rect(double x, double y, double w, double h, std::string_view fill) {
        out_ << fmt::format("<rect x=\"{:.2f}\" y=\"{:.2f}\" width=\"{:.2f}\" height=\"{:.2f}\" fill=\"{}\"/>\n",
                            x, y, std::max(w, 0.0), std::max(h, 0.0), fill);
    }
    void line(double x1, double y1, double x2, double y2, std::string_view stroke = "#000") {
        out_ << fmt::format("<line x1=\"{:.2f}\" y1=\"{:.2f}\" x2=\"{:.2f}\" y2=\"{:.2f}\" stroke=\"{}\"/>\n",
                            x1, y1, x2, y2, stroke);
    }
    void text(double x, double y, std::string_view s, std::string_view anchor = "start",
              double rotate = 0.0) {
        if (rotate != 0.0) {
            out_ << fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"{}\" "
                                "transform=\"rotate({} {:.2f} {:.2f})\">{}</text>\n",
                                x, y, anchor, rotate, x, y, xml_escape(s));
        } else {
            out_ << fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"{}\">{}</text>\n", x,
                                y, anchor, xml_escape(s));
        }
    }
    std::string finish() {
        out_ << "</svg>\n";
        return out_.str();
    }
    double width() const { return width_; }
    double height() const { return height_; }

  private:
    double width_;
    double height_;
    std::ostringstream out_;
};

struct Series {
    std::string label;
    std::vector<double> values; // one per category
};

/// Grouped vertical bars: categories along x, one bar per series.
void grouped_bars(Svg &svg, double x0, double y0, double w, double h, const std::string &title,
                  const std::string &y_label, const std::vector<std::string> &categories,
                  const std::vector<Series> &series) {
    svg.text(x0 + w / 2, y0 - 8, title, "middle");
    double vmax = 0.0;
    for (const auto &s : series) {
        for (double v : s.values) vmax = std::max(vmax, v);
    }
    if (vmax <= 0.0) vmax = 1.0;
    svg.line(x0, y0 + h, x0 + w, y0 + h);
    svg.line(x0, y0, x0, y0 + h);
    for (int tick = 0; tick <= 4; ++tick) {
        const double v = vmax * tick / 4.0;
        const double y = y0 + h - h * tick / 4.0;
        svg.line(x0 - 3, y, x0, y);
        svg.text(x0 - 5, y + 4, fmt::format("{:.3g}", v), "end");
    }
    svg.text(x0 - 45, y0 + h / 2, y_label, "middle", -90);
    if (categories.empty() || series.empty()) {
        return;
    }
    const double slot = w / static_cast<double>(categories.size());
    const double bar = slot * 0.8 / static_cast<double>(series.size());
    for (std::size_t c = 0; c < categories.size(); ++c) {
        const double sx = x0 + slot * static_cast<double>(c) + slot * 0.1;
        for (std::size_t s = 0; s < series.size(); ++s) {
            const double v = std::max(series[s].values[c], 0.0);
            const double bh = h * v / vmax;
            svg.rect(sx + bar * static_cast<double>(s), y0 + h - bh, bar * 0.95, bh,
                     scenario_colours[s % std::size(scenario_colours)]);
        }
        svg.text(sx + slot * 0.4, y0 + h + 14, categories[c], "middle");
    }
    for (std::size_t s = 0; s < series.size(); ++s) {
        const double ly = y0 + 12.0 * static_cast<double>(s);
        svg.rect(x0 + w + 10, ly - 8, 10, 10, scenario_colours[s % std::size(scenario_colours)]);
        svg.text(x0 + w + 24, ly, series[s].label);
    }
}

void write_text(const fs::path &path, const std::string &content) {
    auto out = open_output(path);
    out << content;
}

} // namespace

std::string hash_comment(const std::string &config_hash) {
    return fmt::format("# config_hash={}\n", config_hash);
}

std::string read_hash_comment(const fs::path &path) {
    std::ifstream in{path, std::ios::binary};
    std::string line;
    if (!in || !std::getline(in, line)) {
        return {};
    }
    constexpr std::string_view prefix = "# config_hash=";
    if (line.rfind(prefix, 0) != 0) {
        return {};
    }
    auto hash = line.substr(prefix.size());
    if (!hash.empty() && hash.back() == '\r') hash.pop_back();
    return hash;
}

void write_results(const SweepResult &result, const RunConfig &config, const fs::path &dir) {
    fs::create_directories(dir);
    const auto &hash = result.metadata.config_hash;
    {
        auto out = open_output(dir / results_files::results);
        out << hash_comment(hash);
        out << "iso3,name,income_group,scenario,population,elderly_share,gdp_usd,gni_pc_usd,"
               "informal_share,contact_fallback,total_deaths,mortality_pct,attack_rate,"
               "peak_general_demand,peak_icu_demand,general_capacity,icu_capacity,trigger_time,"
               "burned_out,final_daily_incidence,vsl_usd,vsl_loss_usd,loss_pct_gdp,"
               "marginal_value_pct_gdp,infant_deaths_low,infant_deaths_high\n";
        for (const auto &r : result.rows) {
            const auto &s = r.summary;
            const auto &v = r.valuation;
            const auto &infant = v.contraction_infant_deaths;
            out << r.country_id << ',' << csv::escape(r.name) << ',' << to_string(r.income_group)
                << ',' << to_string(r.scenario) << ',' << num(s.population) << ','
                << num(r.elderly_share) << ',' << num(r.gdp_usd) << ',' << num(r.gni_per_capita_usd)
                << ',' << opt_num(r.informal_share) << ',' << (r.contact_fallback ? 1 : 0) << ','
                << num(s.total_deaths) << ',' << num(s.mortality_pct()) << ','
                << num(s.attack_rate) << ',' << num(s.peak_general_demand) << ','
                << num(s.peak_icu_demand) << ',' << num(s.general_capacity) << ','
                << num(s.icu_capacity) << ',' << opt_num(s.trigger_time) << ','
                << (s.burned_out ? 1 : 0) << ',' << num(s.final_daily_incidence) << ','
                << num(v.vsl_usd) << ',' << num(v.vsl_loss_usd) << ',' << num(v.loss_pct_gdp)
                << ',' << num(v.marginal_value_pct_gdp) << ','
                << (infant ? num(infant->low) : std::string{}) << ','
                << (infant ? num(infant->high) : std::string{}) << '\n';
        }
    }
    {
        auto out = open_output(dir / results_files::failures);
        out << hash_comment(hash);
        out << "iso3,error,reason\n";
        for (const auto &f : result.failures) {
            out << f.country_id << ',' << to_string(f.code) << ',' << csv::escape(f.reason) << '\n';
        }
    }
    {
        const auto &m = result.metadata;
        nlohmann::json j;
        j["config_hash"] = m.config_hash;
        j["timestamp"] = m.timestamp;
        j["file_checksums"] = m.file_checksums;
        j["notices"] = m.notices;
        j["kernels"] = m.kernels;
        j["workers"] = m.workers;
        j["rows"] = result.rows.size();
        j["failures"] = result.failures.size();
        j["caveats"] = nlohmann::json::array(
            {"VSL values are estimated from small mortality-risk changes (order 1:10,000); "
             "scenario risk changes are far larger, so monetised losses are an extrapolation.",
             "Severity does not account for comorbidity or endemic-disease burden."});
        write_text(dir / results_files::metadata, j.dump(2) + "\n");
    }
    write_text(dir / results_files::config, canonical_config(config).dump(2) + "\n");
}

SweepResult read_results(const fs::path &dir) {
    SweepResult result;
    const auto path = dir / results_files::results;
    result.metadata.config_hash = read_hash_comment(path);
    const auto table = csv::read_table(path);
    const auto col = [&](const char *name) { return table.column(name); };
    const auto c_iso = col("iso3"), c_name = col("name"), c_group = col("income_group"),
               c_scen = col("scenario"), c_pop = col("population"), c_eld = col("elderly_share"),
               c_gdp = col("gdp_usd"), c_gni = col("gni_pc_usd"), c_inf = col("informal_share"),
               c_fb = col("contact_fallback"), c_deaths = col("total_deaths"),
               c_attack = col("attack_rate"), c_pg = col("peak_general_demand"),
               c_pi = col("peak_icu_demand"), c_gc = col("general_capacity"),
               c_ic = col("icu_capacity"), c_trig = col("trigger_time"), c_bo = col("burned_out"),
               c_fdi = col("final_daily_incidence"), c_vsl = col("vsl_usd"),
               c_loss = col("vsl_loss_usd"), c_pct = col("loss_pct_gdp"),
               c_mv = col("marginal_value_pct_gdp"), c_il = col("infant_deaths_low"),
               c_ih = col("infant_deaths_high");
    for (const auto &rec : table.rows()) {
        SweepRow r;
        r.country_id = std::string{table.field(rec, c_iso)};
        r.name = std::string{table.field(rec, c_name)};
        auto group = parse_income_group(table.field(rec, c_group));
        auto kind = parse_scenario_kind(table.field(rec, c_scen));
        if (!group || !kind) {
            throw Error{ErrorCode::parse_error, "bad income group or scenario", rec.line, "scenario"};
        }
        r.income_group = *group;
        r.scenario = *kind;
        r.summary.population = table.number(rec, c_pop);
        r.elderly_share = table.number(rec, c_eld);
        r.gdp_usd = table.number(rec, c_gdp);
        r.gni_per_capita_usd = table.number(rec, c_gni);
        r.informal_share = table.optional_number(rec, c_inf);
        r.contact_fallback = table.integer(rec, c_fb) != 0;
        r.summary.total_deaths = table.number(rec, c_deaths);
        r.summary.attack_rate = table.number(rec, c_attack);
        r.summary.peak_general_demand = table.number(rec, c_pg);
        r.summary.peak_icu_demand = table.number(rec, c_pi);
        r.summary.general_capacity = table.number(rec, c_gc);
        r.summary.icu_capacity = table.number(rec, c_ic);
        r.summary.trigger_time = table.optional_number(rec, c_trig);
        r.summary.burned_out = table.integer(rec, c_bo) != 0;
        r.summary.final_daily_incidence = table.number(rec, c_fdi);
        r.valuation.country_id = r.country_id;
        r.valuation.scenario = r.scenario;
        r.valuation.total_deaths = r.summary.total_deaths;
        r.valuation.vsl_usd = table.number(rec, c_vsl);
        r.valuation.vsl_loss_usd = table.number(rec, c_loss);
        r.valuation.loss_pct_gdp = table.number(rec, c_pct);
        r.valuation.marginal_value_pct_gdp = table.number(rec, c_mv);
        auto low = table.optional_number(rec, c_il);
        auto high = table.optional_number(rec, c_ih);
        if (low && high) {
            r.valuation.contraction_infant_deaths = InfantDeathRange{*low, *high};
        }
        result.rows.push_back(std::move(r));
    }
    const auto failures_path = dir / results_files::failures;
    if (fs::exists(failures_path)) {
        const auto ft = csv::read_table(failures_path);
        const auto f_iso = ft.column("iso3"), f_err = ft.column("error"), f_reason = ft.column("reason");
        for (const auto &rec : ft.rows()) {
            CountryFailure f;
            f.country_id = std::string{ft.field(rec, f_iso)};
            for (int c = 0; c <= static_cast<int>(ErrorCode::config_error); ++c) {
                if (to_string(static_cast<ErrorCode>(c)) == ft.field(rec, f_err)) {
                    f.code = static_cast<ErrorCode>(c);
                }
            }
            f.reason = std::string{ft.field(rec, f_reason)};
            result.failures.push_back(std::move(f));
        }
    }
    return result;
}

std::vector<std::string> table_countries(const SweepResult &results,
                                         const std::vector<std::string> &preferred) {
    std::vector<std::string> out;
    for (const auto &id : preferred) {
        if (any_row(results, id)) out.push_back(id);
    }
    if (!out.empty()) {
        return out;
    }
    for (const auto *row : countries_in(results)) {
        out.push_back(row->country_id);
    }
    return out;
}

MarginalTable emit_marginal_table(const SweepResult &results,
                                  const std::vector<std::string> &countries) {
    std::vector<const SweepRow *> columns;
    for (const auto &id : countries) {
        const auto *row = any_row(results, id);
        if (!row) {
            throw Error{ErrorCode::unknown_country, fmt::format("'{}' is not in the results", id)};
        }
        columns.push_back(row);
    }
    std::stable_sort(columns.begin(), columns.end(), [](const auto *a, const auto *b) {
        return a->income_group > b->income_group; // enum order is low .. high
    });

    const auto scenarios = scenarios_in(results);
    constexpr int label_width = 28;
    constexpr int cell_width = 6;
    std::string text;

    // Group header spans.
    text += fmt::format("{:<{}}", "", label_width);
    for (auto group : groups_high_to_low) {
        const auto n = std::count_if(columns.begin(), columns.end(),
                                     [&](const auto *c) { return c->income_group == group; });
        if (n == 0) continue;
        const auto span = static_cast<int>(n) * cell_width;
        auto label = std::string{group_label(group)};
        if (static_cast<int>(label.size()) > span - 1) label = group_abbreviation(group);
        text += fmt::format(" {:^{}}", label, span - 1);
    }
    text += "\n";
    text += fmt::format("{:<{}}", "Strategy", label_width);
    for (const auto *c : columns) {
        text += fmt::format("{:>{}}", c->country_id, cell_width);
    }
    text += "\n";
    text += std::string(static_cast<std::size_t>(label_width + cell_width * static_cast<int>(columns.size())), '-') + "\n";

    std::string table_csv = hash_comment(results.metadata.config_hash);
    table_csv += "scenario,iso3,name,income_group,marginal_value_pct_gdp\n";
    for (auto kind : scenarios) {
        text += fmt::format("{:<{}}", scenario_label(kind), label_width);
        for (const auto *c : columns) {
            const auto *row = results.find(c->country_id, kind);
            std::string cell;
            if (!row) {
                cell = "n/a";
            } else if (kind == ScenarioKind::unmitigated) {
                cell = "--";
            } else {
                cell = fmt::format("{}", std::lround(row->valuation.marginal_value_pct_gdp));
            }
            text += fmt::format("{:>{}}", cell, cell_width);
            if (row) {
                table_csv += fmt::format("{},{},{},{},{}\n", to_string(kind), c->country_id,
                                         csv::escape(c->name), to_string(c->income_group),
                                         num(row->valuation.marginal_value_pct_gdp));
            }
        }
        text += "\n";
    }
    return {text, table_csv};
}

void write_marginal_table(const SweepResult &results, const std::vector<std::string> &countries,
                          const fs::path &dir) {
    fs::create_directories(dir);
    const auto table = emit_marginal_table(results, countries);
    write_text(dir / results_files::table_text, table.text);
    write_text(dir / results_files::table_csv, table.csv);
}

void emit_figure_data(const SweepResult &results, const std::vector<std::string> &highlight,
                      const fs::path &dir) {
    fs::create_directories(dir);
    const auto &hash = results.metadata.config_hash;
    const auto countries = countries_in(results);
    const auto scenarios = scenarios_in(results);

    // Figure 1: unmitigated mortality and age structure.
    {
        std::string data = hash_comment(hash);
        data += "iso3,name,income_group,population,elderly_share,unmitigated_deaths,mortality_pct\n";
        for (const auto *c : countries) {
            const auto *u = results.find(c->country_id, ScenarioKind::unmitigated);
            if (!u) continue;
            data += fmt::format("{},{},{},{},{},{},{}\n", c->country_id, csv::escape(c->name),
                                to_string(c->income_group), num(u->summary.population),
                                num(c->elderly_share), num(u->summary.total_deaths),
                                num(u->summary.mortality_pct()));
        }
        write_text(dir / results_files::fig1_countries, data);

        std::string groups = hash_comment(hash);
        groups += "income_group,countries,population,elderly_share_min,elderly_share_q1,"
                  "elderly_share_median,elderly_share_q3,elderly_share_max,"
                  "elderly_share_pop_weighted,mortality_pct_pop_weighted\n";
        struct Box {
            double q[5];
        };
        std::vector<std::pair<IncomeGroup, Box>> boxes;
        for (auto group : groups_high_to_low) {
            std::vector<double> shares;
            double pop = 0.0, elderly = 0.0, deaths = 0.0;
            for (const auto *c : countries) {
                const auto *u = results.find(c->country_id, ScenarioKind::unmitigated);
                if (c->income_group != group || !u) continue;
                shares.push_back(c->elderly_share);
                pop += u->summary.population;
                elderly += c->elderly_share * u->summary.population;
                deaths += u->summary.total_deaths;
            }
            if (shares.empty()) continue;
            Box box{{quantile(shares, 0.0), quantile(shares, 0.25), quantile(shares, 0.5),
                     quantile(shares, 0.75), quantile(shares, 1.0)}};
            boxes.emplace_back(group, box);
            groups += fmt::format("{},{},{},{},{},{},{},{},{},{}\n", to_string(group), shares.size(),
                                  num(pop), num(box.q[0]), num(box.q[1]), num(box.q[2]),
                                  num(box.q[3]), num(box.q[4]), num(elderly / pop),
                                  num(100.0 * deaths / pop));
        }
        write_text(dir / results_files::fig1_groups, groups);

        Svg svg{900, 380, hash};
        std::vector<std::string> cats;
        Series mort{"Unmitigated mortality (%)", {}};
        for (const auto &id : highlight) {
            if (const auto *u = results.find(id, ScenarioKind::unmitigated)) {
                cats.push_back(id);
                mort.values.push_back(u->summary.mortality_pct());
            }
        }
        grouped_bars(svg, 70, 40, 330, 280, "Predicted mortality, unmitigated", "% of population",
                     cats, {mort});
        // Box plot of elderly share by income group.
        const double bx0 = 580, by0 = 40, bw = 280, bh = 280;
        svg.text(bx0 + bw / 2, by0 - 8, "Population aged 65+ by income group", "middle");
        svg.line(bx0, by0 + bh, bx0 + bw, by0 + bh);
        svg.line(bx0, by0, bx0, by0 + bh);
        double smax = 0.0;
        for (const auto &[g, box] : boxes) smax = std::max(smax, box.q[4]);
        if (smax <= 0.0) smax = 1.0;
        auto ypos = [&](double v) { return by0 + bh - bh * v / smax; };
        for (int tick = 0; tick <= 4; ++tick) {
            const double v = smax * tick / 4.0;
            svg.text(bx0 - 5, ypos(v) + 4, fmt::format("{:.0f}%", 100.0 * v), "end");
        }
        const double slot = boxes.empty() ? bw : bw / static_cast<double>(boxes.size());
        for (std::size_t i = 0; i < boxes.size(); ++i) {
            const auto &box = boxes[i].second;
            const double cx = bx0 + slot * (static_cast<double>(i) + 0.5);
            svg.line(cx, ypos(box.q[0]), cx, ypos(box.q[4]), "#555");
            svg.rect(cx - slot * 0.25, ypos(box.q[3]), slot * 0.5, ypos(box.q[1]) - ypos(box.q[3]),
                     "#9ecae1");
            svg.line(cx - slot * 0.25, ypos(box.q[2]), cx + slot * 0.25, ypos(box.q[2]));
            svg.text(cx, by0 + bh + 14, to_string(boxes[i].first), "middle");
        }
        write_text(dir / results_files::fig1_svg, svg.finish());
    }

    // Figures 2 and 3: losses per scenario, absolute and relative to GDP.
    {
        std::string fig2 = hash_comment(hash);
        fig2 += "iso3,name,income_group,scenario,total_deaths,vsl_usd,vsl_loss_usd\n";
        std::string fig3 = hash_comment(hash);
        fig3 += "iso3,name,income_group,scenario,gdp_usd,loss_pct_gdp,marginal_value_pct_gdp\n";
        for (const auto &r : results.rows) {
            fig2 += fmt::format("{},{},{},{},{},{},{}\n", r.country_id, csv::escape(r.name),
                                to_string(r.income_group), to_string(r.scenario),
                                num(r.valuation.total_deaths), num(r.valuation.vsl_usd),
                                num(r.valuation.vsl_loss_usd));
            fig3 += fmt::format("{},{},{},{},{},{},{}\n", r.country_id, csv::escape(r.name),
                                to_string(r.income_group), to_string(r.scenario), num(r.gdp_usd),
                                num(r.valuation.loss_pct_gdp),
                                num(r.valuation.marginal_value_pct_gdp));
        }
        write_text(dir / results_files::fig2_csv, fig2);
        write_text(dir / results_files::fig3_csv, fig3);

        std::vector<std::string> cats;
        for (const auto &id : highlight) {
            if (any_row(results, id)) cats.push_back(id);
        }
        std::vector<Series> loss, pct;
        for (auto kind : scenarios) {
            Series l{std::string{scenario_label(kind)}, {}};
            Series p{std::string{scenario_label(kind)}, {}};
            for (const auto &id : cats) {
                const auto *row = results.find(id, kind);
                l.values.push_back(row ? row->valuation.vsl_loss_usd / 1e9 : 0.0);
                p.values.push_back(row ? row->valuation.loss_pct_gdp : 0.0);
            }
            loss.push_back(std::move(l));
            pct.push_back(std::move(p));
        }
        Svg svg2{900, 380, hash};
        grouped_bars(svg2, 80, 40, 620, 280, "Total VSL lost by scenario", "USD billion", cats, loss);
        write_text(dir / results_files::fig2_svg, svg2.finish());
        Svg svg3{900, 380, hash};
        grouped_bars(svg3, 80, 40, 620, 280, "VSL lost relative to GDP by scenario", "% of GDP",
                     cats, pct);
        write_text(dir / results_files::fig3_svg, svg3.finish());
    }
}

void write_trajectory_csv(const EpidemicTrajectory &traj, const std::string &config_hash,
                          const fs::path &path) {
    auto out = open_output(path);
    out << hash_comment(config_hash);
    out << "time,band,S,E,I_mild,I_case,H_gen_treated,H_gen_untreated,ICU_treated,ICU_untreated,"
           "R,D,new_infections,contact_scaling\n";
    for (std::size_t k = 0; k < traj.states.size(); ++k) {
        const auto &state = traj.states[k];
        for (std::size_t b = 0; b < traj.bands; ++b) {
            out << num(traj.time[k]) << ',' << b;
            for (std::size_t c = 0; c < compartment_count; ++c) {
                out << ',' << num(state.at(static_cast<Compartment>(c), b));
            }
            if (k < traj.steps()) {
                out << ',' << num(traj.new_infections[k][b]) << ',' << num(traj.contact_scaling[k][b]);
            } else {
                out << ",,";
            }
            out << '\n';
        }
    }
}

nlohmann::json trajectory_summary_json(const EpidemicTrajectory &traj) {
    const auto s = summarize(traj);
    nlohmann::json j;
    j["population"] = s.population;
    j["total_deaths"] = s.total_deaths;
    j["attack_rate"] = s.attack_rate;
    j["peak_general_demand"] = s.peak_general_demand;
    j["peak_icu_demand"] = s.peak_icu_demand;
    j["general_capacity"] = s.general_capacity;
    j["icu_capacity"] = s.icu_capacity;
    j["trigger_time"] = s.trigger_time ? nlohmann::json(*s.trigger_time) : nlohmann::json(nullptr);
    j["burned_out"] = s.burned_out;
    j["final_daily_incidence"] = s.final_daily_incidence;
    j["kernels"] = kernels::to_string(traj.isa);
    return j;
}

} // namespace epivalue
