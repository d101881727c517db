#ifndef PVCAGG_ERROR_HPP
#define PVCAGG_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace pvcagg {

enum class ErrorCode {
    UnboundVariable,
    CarrierMismatch,
    ArithmeticOverflow,
    LengthMismatch,
    WeightSumOutOfTolerance,
    UnorderedCarrier,
    MissingDistribution,
    BudgetExceeded,
    WrongMonoid,
    NoVariables,
    WorldLimitExceeded,
    UnknownRelation,
    SchemaMismatch,
    IllegalAggregate,
    InvalidQuery,
    ParseError,
    DuplicateVariable,
    InvalidDistribution,
    InvalidParams,
    RepeatedRelation,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library carries one of the codes above so
/// callers (and tests) can branch on the kind without parsing messages.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

/// Parse failures additionally remember where they happened (1-based).
class ParseError : public Error {
public:
    ParseError(const std::string& message, std::size_t line, std::size_t column)
        : Error(ErrorCode::ParseError,
                message + " at line " + std::to_string(line) + ", column " + std::to_string(column)),
          detail_(message), line_(line), column_(column) {}

    /// The message without the position.
    const std::string& detail() const noexcept { return detail_; }
    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }

private:
    std::string detail_;
    std::size_t line_;
    std::size_t column_;
};

}  // namespace pvcagg

#endif  // PVCAGG_ERROR_HPP
