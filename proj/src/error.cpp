#include "epivalue/error.h"

#include <fmt/format.h>

namespace epivalue {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::io: return "IoError";
    case ErrorCode::empty_file: return "EmptyFile";
    case ErrorCode::missing_column: return "MissingColumn";
    case ErrorCode::missing_band: return "MissingBand";
    case ErrorCode::negative_value: return "NegativeValue";
    case ErrorCode::parse_error: return "ParseError";
    case ErrorCode::duplicate_country: return "DuplicateCountry";
    case ErrorCode::invariant_violation: return "InvariantViolation";
    case ErrorCode::zero_population_band: return "ZeroPopulationBand";
    case ErrorCode::singular_contact_matrix: return "SingularContactMatrix";
    case ErrorCode::invalid_r0: return "InvalidR0";
    case ErrorCode::invalid_parameter: return "InvalidParameter";
    case ErrorCode::non_finite_state: return "NonFiniteState";
    case ErrorCode::non_positive_income: return "NonPositiveIncome";
    case ErrorCode::non_positive_gdp: return "NonPositiveGDP";
    case ErrorCode::country_mismatch: return "CountryMismatch";
    case ErrorCode::unknown_country: return "UnknownCountry";
    case ErrorCode::missing_field: return "MissingField";
    case ErrorCode::config_error: return "ConfigError";
    }
    return "Unknown";
}

Error::Error(ErrorCode code, const std::string &message)
    : std::runtime_error{fmt::format("{}: {}", to_string(code), message)}, code_{code} {}

Error::Error(ErrorCode code, const std::string &message, std::size_t row, std::string column)
    : std::runtime_error{fmt::format("{}: {} (row {}, column '{}')", to_string(code), message, row,
                                     column)},
      code_{code}, row_{row}, column_{std::move(column)} {}

} // namespace epivalue
