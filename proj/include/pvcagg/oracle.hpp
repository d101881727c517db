#ifndef PVCAGG_ORACLE_HPP
#define PVCAGG_ORACLE_HPP

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pvcagg/algebra.hpp"
#include "pvcagg/distribution.hpp"
#include "pvcagg/pvc.hpp"
#include "pvcagg/query.hpp"

namespace pvcagg {

// Brute-force ground truth. Everything here evaluates the original
// expression trees valuation by valuation and shares no code with the
// compiler or the rewriting engine.

inline constexpr std::uint64_t kDefaultWorldLimit = std::uint64_t{1} << 20;

Distribution brute_distribution(const Operand& expr, const VarDistributions& dists, SemiringKind sk,
                                std::uint64_t limit = kDefaultWorldLimit);

struct BruteAnswer {
    std::vector<Attribute> schema;
    std::map<AnswerKey, OutcomeDistribution> tuples;
};

/// Evaluates q in every world and collects per-key outcome distributions.
BruteAnswer brute_query(const Query& q, const PvcDatabase& db, std::uint64_t limit = kDefaultWorldLimit);

/// Deterministic evaluation of q in one world. Keys map to (multiplicity,
/// aggregate values).
std::map<AnswerKey, std::pair<std::uint64_t, Tuple>> evaluate_in_world(const Query& q, const PvcDatabase& db,
                                                                       const Valuation& nu);

/// Calls visit(answer, probability) once per world.
void for_each_world_answer(
    const Query& q, const PvcDatabase& db, std::uint64_t limit,
    const std::function<void(const std::map<AnswerKey, std::pair<std::uint64_t, Tuple>>&, double)>& visit);

}  // namespace pvcagg

#endif  // PVCAGG_ORACLE_HPP
