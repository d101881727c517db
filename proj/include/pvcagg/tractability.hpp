#ifndef PVCAGG_TRACTABILITY_HPP
#define PVCAGG_TRACTABILITY_HPP

#include <cstddef>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "pvcagg/pvc.hpp"
#include "pvcagg/query.hpp"

namespace pvcagg {

/// A select-project-product block  project[head](select[phi](Q1 x ... x Qn)).
/// Renames, inner projections and selections are folded in; every node that
/// is not one of those (base relation, union, aggregation) is a child.
/// Attributes are numbered per child, e.g. "PS.sid" or "#1.alpha".
struct FlatBlock {
    std::vector<QueryPtr> children;
    std::vector<std::string> labels;

    std::vector<std::string> attributes;  // qualified names
    std::vector<std::size_t> owner;       // child index per attribute
    std::vector<bool> aggregate;
    std::vector<std::size_t> closure;     // representative of A* per attribute
    std::vector<bool> head;               // in the projection list
    std::set<std::size_t> constant;       // closures equated with a constant

    std::vector<Predicate> comparisons;   // theta-comparisons on aggregation attributes
    std::vector<std::pair<std::size_t, std::size_t>> compared;  // their attribute ids (npos for constants)
    bool projected = false;               // the block has an explicit projection
    bool irregular = false;               // a predicate outside the supported shape

    /// Children holding some attribute of A*.
    std::set<std::size_t> at(std::size_t attribute) const;
};

FlatBlock flatten(const QueryPtr& q, const SchemaLookup& lookup);
/// Same, with the head given explicitly (used for the body of an aggregation).
FlatBlock flatten(const QueryPtr& q, const SchemaLookup& lookup, const std::vector<std::string>& head);

/// Every base relation occurs at most once.
bool is_non_repeating(const Query& q);

/// Attributes outside the head and not equated with a constant have
/// pairwise disjoint or nested at() sets. Throws RepeatedRelation.
bool is_hierarchical(const FlatBlock& block);
bool is_hierarchical(const QueryPtr& q, const SchemaLookup& lookup);

/// Attributes whose closure reaches every child.
std::set<std::string> root_attributes(const FlatBlock& block);
std::set<std::string> root_attributes(const QueryPtr& q, const SchemaLookup& lookup);

/// One line per closure: members, at() set and flags.
std::string describe(const FlatBlock& block);

enum class QueryClass { Ind, Hie, Unknown };
std::string_view to_string(QueryClass c);

struct Classification {
    QueryClass cls = QueryClass::Unknown;
    std::string rule;    // which case matched, or why none did
};

/// Most specific class the recursive rules derive. Sound but incomplete.
Classification classify(const QueryPtr& q, const PvcDatabase& db);

/// The relation's rows carry distinct single-variable annotations and no
/// aggregation cells.
bool is_tuple_independent(const PvcTable& table);

}  // namespace pvcagg

#endif  // PVCAGG_TRACTABILITY_HPP
