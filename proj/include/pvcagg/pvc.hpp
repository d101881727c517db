#ifndef PVCAGG_PVC_HPP
#define PVCAGG_PVC_HPP

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "pvcagg/algebra.hpp"
#include "pvcagg/distribution.hpp"

namespace pvcagg {

/// A constant cell: a number or a string.
using Value = std::variant<ExtNat, std::string>;

std::string to_string(const Value& v);

struct Attribute {
    std::string name;
    bool aggregate = false;  // cells hold semimodule expressions
    bool operator==(const Attribute&) const = default;
};

/// Constant for ordinary attributes, semimodule expression for aggregation ones.
using Cell = std::variant<Value, SemimoduleExpr>;

struct Row {
    std::vector<Cell> cells;
    SemiringExpr annotation = SemiringExpr::constant(1);
};

class PvcTable {
public:
    PvcTable() = default;
    PvcTable(std::string name, std::vector<Attribute> schema);

    const std::string& name() const { return name_; }
    const std::vector<Attribute>& schema() const { return schema_; }
    const std::vector<Row>& rows() const { return rows_; }

    /// Checks arity and cell kinds against the schema (SchemaMismatch).
    void add_row(Row row);

    std::optional<std::size_t> find(std::string_view attribute) const;
    /// Throws SchemaMismatch when absent.
    std::size_t index_of(std::string_view attribute) const;

    std::set<std::string> variables() const;

private:
    std::string name_;
    std::vector<Attribute> schema_;
    std::vector<Row> rows_;
};

class PvcDatabase {
public:
    explicit PvcDatabase(SemiringKind sk = SemiringKind::Boolean) : sk_(sk) {}

    SemiringKind semiring() const { return sk_; }

    /// Replaces a table of the same name.
    void add_table(PvcTable table);
    bool has_table(std::string_view name) const { return tables_.find(name) != tables_.end(); }
    /// Throws UnknownRelation.
    const PvcTable& table(std::string_view name) const;
    const std::map<std::string, PvcTable, std::less<>>& tables() const { return tables_; }

    void set_distribution(const std::string& var, Distribution d) { dists_[var] = std::move(d); }
    const VarDistributions& distributions() const { return dists_; }

    std::set<std::string> variables() const;

    /// Every variable has a valid distribution, every constant is in the
    /// carrier, and SUM/COUNT/PROD cells only occur under the natural semiring.
    void validate() const;

private:
    SemiringKind sk_;
    std::map<std::string, PvcTable, std::less<>> tables_;
    VarDistributions dists_;
};

/// Throws IllegalAggregate for SUM, COUNT and PROD under the Boolean semiring.
void check_aggregate_allowed(MonoidKind kind, SemiringKind sk);

enum class SemanticsMode { DeterministicSet, DeterministicBag, ProbabilisticSet, ProbabilisticBag };
std::string_view to_string(SemanticsMode mode);
SemanticsMode semantics_mode(const PvcDatabase& db);

/// Calls visit(valuation, probability) for every valuation of `vars` with
/// non-zero probability, in lexicographic order of the sorted variable
/// supports. Throws WorldLimitExceeded when there are more than `limit`.
void for_each_valuation(const std::set<std::string>& vars, const VarDistributions& dists, std::uint64_t limit,
                        const std::function<void(const Valuation&, double)>& visit);

/// Outcome of one answer tuple in one world: absent, or present with its
/// multiplicity (1 under set semantics) and aggregate cell values.
struct TupleOutcome {
    bool present = false;
    std::uint64_t multiplicity = 0;
    Tuple cells;
    auto operator<=>(const TupleOutcome&) const = default;
};

/// Probability of each outcome of one answer key.
using OutcomeDistribution = std::map<TupleOutcome, double>;

/// Answer key: the values of the non-aggregation attributes.
using AnswerKey = std::vector<Value>;

std::string serialize(const OutcomeDistribution& d);

/// Constant comparison. Numbers and strings are ordered among themselves;
/// a number never equals a string and is never ordered against one.
bool compare_values(const Value& a, Theta theta, const Value& b);

/// A deterministic relation: full value tuple (aggregation cells evaluated)
/// to multiplicity. Under set semantics every multiplicity is 1.
using WorldRelation = std::map<std::vector<Value>, std::uint64_t>;

struct World {
    std::map<std::string, WorldRelation, std::less<>> tables;
    double probability = 0;
};

/// The relation `table` becomes under valuation nu.
WorldRelation instantiate(const PvcTable& table, const Valuation& nu, SemiringKind sk);

void for_each_world(const PvcDatabase& db, std::uint64_t limit, const std::function<void(const World&)>& visit);
std::vector<World> enumerate_worlds(const PvcDatabase& db, std::uint64_t limit);

}  // namespace pvcagg

#endif  // PVCAGG_PVC_HPP
