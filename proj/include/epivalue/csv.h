#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace epivalue::csv {

/// One parsed line. `line` is the 1-based physical line number in the file.
struct Record {
    std::size_t line{0};
    std::vector<std::string> fields;
};

/// Splits a single CSV line. Double-quoted fields may contain commas and "" escapes.
std::vector<std::string> split_line(std::string_view line);

/// Reads every non-blank line that does not start with '#'. Strips a UTF-8 BOM and CR.
std::vector<Record> read_records(const std::filesystem::path &path);

/// Header-indexed view over a block of records.
class Table {
  public:
    Table(const std::filesystem::path &source, std::vector<Record> records);

    const std::vector<std::string> &header() const noexcept { return header_; }
    const std::vector<Record> &rows() const noexcept { return rows_; }
    std::size_t header_line() const noexcept { return header_line_; }

    std::optional<std::size_t> find_column(std::string_view name) const;

    /// Column index or MissingColumn.
    std::size_t column(std::string_view name) const;

    /// Field text of `row` in column `col`; empty when the row is short.
    std::string_view field(const Record &row, std::size_t col) const;

    double number(const Record &row, std::size_t col) const;
    std::optional<double> optional_number(const Record &row, std::size_t col) const;
    long long integer(const Record &row, std::size_t col) const;

  private:
    std::string source_;
    std::size_t header_line_{0};
    std::vector<std::string> header_;
    std::vector<Record> rows_;
};

Table read_table(const std::filesystem::path &path);

/// Locale-independent parse of a decimal number; nullopt on failure or trailing junk.
std::optional<double> parse_double(std::string_view text);

/// Shortest round-trip representation of `value`.
std::string format_double(double value);

/// Quotes a field when it contains a comma, quote or newline.
std::string escape(std::string_view field);

} // namespace epivalue::csv
