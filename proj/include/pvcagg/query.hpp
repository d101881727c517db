#ifndef PVCAGG_QUERY_HPP
#define PVCAGG_QUERY_HPP

#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "pvcagg/algebra.hpp"
#include "pvcagg/pvc.hpp"

namespace pvcagg {

/// Side of a selection predicate: an attribute or a constant.
struct PredTerm {
    bool is_attribute = false;
    std::string attribute;
    Value constant;

    static PredTerm attr(std::string name) { return PredTerm{true, std::move(name), Value{}}; }
    static PredTerm value(Value v) { return PredTerm{false, {}, std::move(v)}; }
};

struct Predicate {
    PredTerm lhs;
    Theta theta = Theta::Eq;
    PredTerm rhs;
};

/// target <- monoid(source)
struct AggSpec {
    std::string target;
    MonoidKind monoid = MonoidKind::Sum;
    std::string source;  // empty for count(*)
};

struct Query;
using QueryPtr = std::shared_ptr<const Query>;

/// Relational algebra with aggregation:
///   R | rename | select | project | product | union | agg,
/// plus `join` (natural join) as sugar for project(select(product(., rename(.)))).
struct Query {
    enum class Kind { Relation, Rename, Select, Project, Product, Union, Aggregate, Join };

    Kind kind = Kind::Relation;
    std::string relation;
    std::vector<std::pair<std::string, std::string>> renames;  // (new, old)
    std::vector<Predicate> predicates;                          // conjunction
    std::vector<std::string> attributes;                        // projection / grouping list
    std::vector<AggSpec> aggregates;
    std::vector<QueryPtr> children;

    static QueryPtr base(std::string name);
    static QueryPtr rename(std::vector<std::pair<std::string, std::string>> renames, QueryPtr child);
    static QueryPtr select(std::vector<Predicate> predicates, QueryPtr child);
    static QueryPtr project(std::vector<std::string> attributes, QueryPtr child);
    static QueryPtr product(QueryPtr left, QueryPtr right);
    static QueryPtr union_of(QueryPtr left, QueryPtr right);
    static QueryPtr aggregate(std::vector<std::string> group_by, std::vector<AggSpec> aggregates, QueryPtr child);
    static QueryPtr join(QueryPtr left, QueryPtr right);
};

/// Query DSL, e.g.
///   project[shop](select[P <= 50](agg[shop; P <- max(price)](join(S, PS))))
QueryPtr parse_query(std::string_view text);
std::string print(const Query& q);

using SchemaLookup = std::function<const std::vector<Attribute>*(std::string_view)>;
SchemaLookup schema_lookup(const PvcDatabase& db);

/// Output schema; throws UnknownRelation / SchemaMismatch / InvalidQuery.
std::vector<Attribute> infer_schema(const Query& q, const SchemaLookup& lookup);

/// All structural violations (unknown names, aggregation attributes where
/// they are not allowed, schema clashes). Empty means valid.
std::vector<std::string> validate_query(const Query& q, const SchemaLookup& lookup);
std::vector<std::string> validate_query(const Query& q, const PvcDatabase& db);

/// Base relation names in order of occurrence (with repetitions).
std::vector<std::string> base_relations(const Query& q);

/// Rewrites every join into product, rename, select and project.
QueryPtr expand_joins(const QueryPtr& q, const SchemaLookup& lookup);

}  // namespace pvcagg

#endif  // PVCAGG_QUERY_HPP
