#include "pvcagg/error.hpp"

namespace pvcagg {

std::string_view to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::UnboundVariable: return "UnboundVariable";
    case ErrorCode::CarrierMismatch: return "CarrierMismatch";
    case ErrorCode::ArithmeticOverflow: return "ArithmeticOverflow";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::WeightSumOutOfTolerance: return "WeightSumOutOfTolerance";
    case ErrorCode::UnorderedCarrier: return "UnorderedCarrier";
    case ErrorCode::MissingDistribution: return "MissingDistribution";
    case ErrorCode::BudgetExceeded: return "BudgetExceeded";
    case ErrorCode::WrongMonoid: return "WrongMonoid";
    case ErrorCode::NoVariables: return "NoVariables";
    case ErrorCode::WorldLimitExceeded: return "WorldLimitExceeded";
    case ErrorCode::UnknownRelation: return "UnknownRelation";
    case ErrorCode::SchemaMismatch: return "SchemaMismatch";
    case ErrorCode::IllegalAggregate: return "IllegalAggregate";
    case ErrorCode::InvalidQuery: return "InvalidQuery";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::DuplicateVariable: return "DuplicateVariable";
    case ErrorCode::InvalidDistribution: return "InvalidDistribution";
    case ErrorCode::InvalidParams: return "InvalidParams";
    case ErrorCode::RepeatedRelation: return "RepeatedRelation";
    }
    return "Error";
}

}  // namespace pvcagg
