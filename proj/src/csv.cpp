#include "epivalue/csv.h"

#include "epivalue/error.h"

#include <fmt/format.h>

#include <charconv>
#include <cmath>
#include <fstream>

namespace epivalue::csv {

std::vector<std::string> split_line(std::string_view line) {
    std::vector<std::string> fields;
    std::string current;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    current.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                current.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(current));
            current.clear();
        } else {
            current.push_back(c);
        }
    }
    fields.push_back(std::move(current));
    for (auto &f : fields) {
        const auto first = f.find_first_not_of(" \t");
        const auto last = f.find_last_not_of(" \t");
        f = first == std::string::npos ? std::string{} : f.substr(first, last - first + 1);
    }
    return fields;
}

std::vector<Record> read_records(const std::filesystem::path &path) {
    std::ifstream in{path, std::ios::binary};
    if (!in) {
        throw Error{ErrorCode::io, fmt::format("cannot open '{}'", path.string())};
    }
    std::vector<Record> records;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line_no == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) {
            line.erase(0, 3);
        }
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.find_first_not_of(" \t") == std::string::npos || line.front() == '#') {
            continue;
        }
        records.push_back(Record{line_no, split_line(line)});
    }
    return records;
}

Table::Table(const std::filesystem::path &source, std::vector<Record> records)
    : source_{source.string()} {
    if (records.empty()) {
        throw Error{ErrorCode::empty_file, fmt::format("'{}' has no header", source_)};
    }
    header_line_ = records.front().line;
    header_ = std::move(records.front().fields);
    rows_.assign(std::make_move_iterator(records.begin() + 1),
                 std::make_move_iterator(records.end()));
}

std::optional<std::size_t> Table::find_column(std::string_view name) const {
    for (std::size_t i = 0; i < header_.size(); ++i) {
        if (header_[i] == name) {
            return i;
        }
    }
    return std::nullopt;
}

std::size_t Table::column(std::string_view name) const {
    if (auto idx = find_column(name)) {
        return *idx;
    }
    throw Error{ErrorCode::missing_column, fmt::format("'{}' has no column '{}'", source_, name),
                header_line_, std::string{name}};
}

std::string_view Table::field(const Record &row, std::size_t col) const {
    return col < row.fields.size() ? std::string_view{row.fields[col]} : std::string_view{};
}

double Table::number(const Record &row, std::size_t col) const {
    const auto text = field(row, col);
    if (text.empty()) {
        throw Error{ErrorCode::missing_field, fmt::format("'{}': empty value", source_), row.line,
                    header_[col]};
    }
    auto value = parse_double(text);
    if (!value) {
        throw Error{ErrorCode::parse_error, fmt::format("'{}': '{}' is not a number", source_, text),
                    row.line, header_[col]};
    }
    return *value;
}

std::optional<double> Table::optional_number(const Record &row, std::size_t col) const {
    if (field(row, col).empty()) {
        return std::nullopt;
    }
    return number(row, col);
}

long long Table::integer(const Record &row, std::size_t col) const {
    const auto text = field(row, col);
    long long value = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size()) {
        throw Error{ErrorCode::parse_error,
                    fmt::format("'{}': '{}' is not an integer", source_, text), row.line,
                    header_[col]};
    }
    return value;
}

Table read_table(const std::filesystem::path &path) { return Table{path, read_records(path)}; }

std::optional<double> parse_double(std::string_view text) {
    if (!text.empty() && text.front() == '+') {
        text.remove_prefix(1);
    }
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size()) {
        return std::nullopt;
    }
    return value;
}

std::string format_double(double value) {
    if (value == 0.0) {
        return "0"; // also folds -0
    }
    return fmt::format("{}", value);
}

std::string escape(std::string_view field) {
    if (field.find_first_of(",\"\n") == std::string_view::npos) {
        return std::string{field};
    }
    std::string out{"\""};
    for (char c : field) {
        if (c == '"') {
            out.push_back('"');
        }
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

} // namespace epivalue::csv
