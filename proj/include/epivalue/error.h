#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace epivalue {

enum class ErrorCode {
    io,
    empty_file,
    missing_column,
    missing_band,
    negative_value,
    parse_error,
    duplicate_country,
    invariant_violation,
    zero_population_band,
    singular_contact_matrix,
    invalid_r0,
    invalid_parameter,
    non_finite_state,
    non_positive_income,
    non_positive_gdp,
    country_mismatch,
    unknown_country,
    missing_field,
    config_error,
};

std::string_view to_string(ErrorCode code) noexcept;

/// @brief Error raised by every epivalue operation.
///
/// Load errors carry the offending row (1-based, header is row 1) and column
/// name when they are known; both are empty otherwise.
class Error : public std::runtime_error {
  public:
    Error(ErrorCode code, const std::string &message);
    Error(ErrorCode code, const std::string &message, std::size_t row, std::string column);

    ErrorCode code() const noexcept { return code_; }
    std::size_t row() const noexcept { return row_; }
    const std::string &column() const noexcept { return column_; }

  private:
    ErrorCode code_;
    std::size_t row_{0};
    std::string column_;
};

} // namespace epivalue
