#ifndef PVCAGG_ENGINE_HPP
#define PVCAGG_ENGINE_HPP

#include <cstddef>
#include <optional>
#include <vector>

#include "pvcagg/distribution.hpp"
#include "pvcagg/dtree.hpp"
#include "pvcagg/pvc.hpp"
#include "pvcagg/query.hpp"
#include "pvcagg/tractability.hpp"

namespace pvcagg {

/// Result pvc-table of q: annotations and aggregate cells are built
/// symbolically, operator by operator. Joins are evaluated through their
/// product/select/project expansion. Throws UnknownRelation, SchemaMismatch,
/// InvalidQuery or IllegalAggregate.
PvcTable evaluate(const QueryPtr& q, const PvcDatabase& db);

struct AnswerOptions {
    bool joint = false;       // joint (annotation, cells...) distribution per tuple
    bool fast_paths = true;   // closed forms for classified queries
    CompileOptions compile;
};

struct TupleAnswer {
    AnswerKey key;                      // non-aggregation values
    Row row;
    Distribution annotation;
    std::vector<Distribution> cells;    // one per aggregation attribute
    std::optional<JointDistribution> joint;
    std::size_t nodes = 0;              // d-tree nodes over all compilations
    std::size_t mutex_nodes = 0;
    bool fast_path = false;
};

struct Answer {
    PvcTable table;
    Classification classification;
    std::vector<TupleAnswer> tuples;
};

Answer answer_distributions(const QueryPtr& q, const PvcDatabase& db, const AnswerOptions& options = {});

/// Presence / multiplicity / cell outcomes of one answer tuple. Needs the
/// joint distribution when the tuple has aggregation cells.
OutcomeDistribution outcomes(const TupleAnswer& t, SemiringKind sk);

/// For an annotation  [S != 0] * [gamma theta c]  where gamma is a MIN sum
/// whose scalars are exactly the summands of S, theta is <= or >=, and no
/// value of gamma is +inf: the distribution from the two factors alone.
std::optional<Distribution> min_selection_shortcut(const SemiringExpr& annotation, const VarDistributions& dists,
                                                   SemiringKind sk, const CompileOptions& options = {});

}  // namespace pvcagg

#endif  // PVCAGG_ENGINE_HPP
