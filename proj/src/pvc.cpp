#include "pvcagg/pvc.hpp"

#include <cstdio>

#include "pvcagg/error.hpp"

namespace pvcagg {

std::string to_string(const Value& v) {
    if (const auto* n = std::get_if<ExtNat>(&v)) return n->to_string();
    return "'" + std::get<std::string>(v) + "'";
}

std::string serialize(const OutcomeDistribution& d) {
    std::string out;
    char buf[32];
    for (const auto& [o, p] : d) {
        if (!o.present) {
            out += "absent";
        } else {
            out += "present x" + std::to_string(o.multiplicity);
            for (const auto& c : o.cells) out += " " + c.to_string();
        }
        std::snprintf(buf, sizeof buf, "%.17g", p);
        out += std::string("\t") + buf + "\n";
    }
    return out;
}

bool compare_values(const Value& a, Theta theta, const Value& b) {
    if (a.index() != b.index()) return theta == Theta::Ne;
    if (const auto* x = std::get_if<ExtNat>(&a)) return compare(*x, theta, std::get<ExtNat>(b));
    const int c = std::get<std::string>(a).compare(std::get<std::string>(b));
    switch (theta) {
    case Theta::Eq: return c == 0;
    case Theta::Ne: return c != 0;
    case Theta::Le: return c <= 0;
    case Theta::Ge: return c >= 0;
    case Theta::Lt: return c < 0;
    case Theta::Gt: return c > 0;
    }
    return false;
}

PvcTable::PvcTable(std::string name, std::vector<Attribute> schema) : name_(std::move(name)), schema_(std::move(schema)) {
    std::set<std::string> seen;
    for (const auto& a : schema_)
        if (!seen.insert(a.name).second)
            throw Error(ErrorCode::SchemaMismatch, "duplicate attribute " + a.name + " in " + name_);
}

void PvcTable::add_row(Row row) {
    if (row.cells.size() != schema_.size())
        throw Error(ErrorCode::SchemaMismatch, name_ + ": row has " + std::to_string(row.cells.size()) +
                                                   " cells, schema has " + std::to_string(schema_.size()));
    for (std::size_t i = 0; i < schema_.size(); ++i) {
        const bool expr = std::holds_alternative<SemimoduleExpr>(row.cells[i]);
        if (expr != schema_[i].aggregate)
            throw Error(ErrorCode::SchemaMismatch, name_ + "." + schema_[i].name +
                                                       (expr ? " holds constants, got an expression"
                                                             : " holds semimodule expressions, got a constant"));
    }
    rows_.push_back(std::move(row));
}

std::optional<std::size_t> PvcTable::find(std::string_view attribute) const {
    for (std::size_t i = 0; i < schema_.size(); ++i)
        if (schema_[i].name == attribute) return i;
    return std::nullopt;
}

std::size_t PvcTable::index_of(std::string_view attribute) const {
    if (auto i = find(attribute)) return *i;
    throw Error(ErrorCode::SchemaMismatch, "no attribute " + std::string(attribute) + " in " + name_);
}

std::set<std::string> PvcTable::variables() const {
    std::set<std::string> out;
    for (const auto& row : rows_) {
        auto v = pvcagg::variables(row.annotation);
        out.insert(v.begin(), v.end());
        for (const auto& c : row.cells)
            if (const auto* m = std::get_if<SemimoduleExpr>(&c)) {
                auto w = pvcagg::variables(*m);
                out.insert(w.begin(), w.end());
            }
    }
    return out;
}

void PvcDatabase::add_table(PvcTable table) {
    std::string name = table.name();
    tables_.insert_or_assign(std::move(name), std::move(table));
}

const PvcTable& PvcDatabase::table(std::string_view name) const {
    auto it = tables_.find(name);
    if (it == tables_.end()) throw Error(ErrorCode::UnknownRelation, "no relation named " + std::string(name));
    return it->second;
}

std::set<std::string> PvcDatabase::variables() const {
    std::set<std::string> out;
    for (const auto& [name, t] : tables_) {
        auto v = t.variables();
        out.insert(v.begin(), v.end());
    }
    return out;
}

void check_aggregate_allowed(MonoidKind kind, SemiringKind sk) {
    if (sk == SemiringKind::Boolean && !monoid::is_selective(kind))
        throw Error(ErrorCode::IllegalAggregate,
                    std::string(to_string(kind)) + " aggregation needs bag semantics (the natural semiring)");
}

namespace {

void check_constants(const SemiringExpr& e, SemiringKind sk) {
    using K = SemiringExpr::Kind;
    switch (e.kind()) {
    case K::Constant: semiring::check_carrier(sk, e.value()); break;
    case K::Sum:
    case K::Product:
        for (const auto& c : e.children()) check_constants(c, sk);
        break;
    case K::Conditional:
        for (const Operand* side : {&e.lhs(), &e.rhs()}) {
            if (const auto* phi = std::get_if<SemiringExpr>(side))
                check_constants(*phi, sk);
            else
                for (const auto& t : std::get<SemimoduleExpr>(*side).terms())
                    if (t.scalar) check_constants(*t.scalar, sk);
        }
        break;
    default: break;
    }
}

}  // namespace

void PvcDatabase::validate() const {
    for (const auto& var : variables()) {
        auto it = dists_.find(var);
        if (it == dists_.end()) throw Error(ErrorCode::MissingDistribution, "no distribution for variable " + var);
    }
    for (const auto& [var, d] : dists_) validate_variable_distribution(var, d, sk_);
    for (const auto& [name, t] : tables_) {
        for (const auto& row : t.rows()) {
            check_constants(row.annotation, sk_);
            for (const auto& c : row.cells) {
                if (const auto* m = std::get_if<SemimoduleExpr>(&c)) {
                    check_aggregate_allowed(m->monoid(), sk_);
                    for (const auto& term : m->terms())
                        if (term.scalar) check_constants(*term.scalar, sk_);
                }
            }
        }
    }
}

std::string_view to_string(SemanticsMode mode) {
    switch (mode) {
    case SemanticsMode::DeterministicSet: return "deterministic-set";
    case SemanticsMode::DeterministicBag: return "deterministic-bag";
    case SemanticsMode::ProbabilisticSet: return "probabilistic-set";
    case SemanticsMode::ProbabilisticBag: return "probabilistic-bag";
    }
    return "?";
}

SemanticsMode semantics_mode(const PvcDatabase& db) {
    bool deterministic = true;
    for (const auto& [var, d] : db.distributions())
        if (d.size() > 1) deterministic = false;
    if (db.semiring() == SemiringKind::Boolean)
        return deterministic ? SemanticsMode::DeterministicSet : SemanticsMode::ProbabilisticSet;
    return deterministic ? SemanticsMode::DeterministicBag : SemanticsMode::ProbabilisticBag;
}

void for_each_valuation(const std::set<std::string>& vars, const VarDistributions& dists, std::uint64_t limit,
                        const std::function<void(const Valuation&, double)>& visit) {
    std::vector<std::string> names(vars.begin(), vars.end());
    std::vector<const Distribution*> supports;
    std::uint64_t total = 1;
    for (const auto& name : names) {
        auto it = dists.find(name);
        if (it == dists.end()) throw Error(ErrorCode::MissingDistribution, "no distribution for variable " + name);
        if (it->second.empty()) return;
        supports.push_back(&it->second);
        if (total > limit / it->second.size())
            throw Error(ErrorCode::WorldLimitExceeded,
                        "more than " + std::to_string(limit) + " valuations over " + std::to_string(names.size()) +
                            " variables");
        total *= it->second.size();
    }
    std::vector<std::size_t> pos(names.size(), 0);
    Valuation nu;
    for (std::size_t i = 0; i < names.size(); ++i) nu.set(names[i], supports[i]->entries()[0].first.value());
    while (true) {
        double p = 1;
        for (std::size_t i = 0; i < names.size(); ++i) p *= supports[i]->entries()[pos[i]].second;
        visit(nu, p);
        // Odometer with the last variable varying fastest.
        std::size_t i = names.size();
        while (i > 0) {
            --i;
            if (++pos[i] < supports[i]->size()) {
                nu.set(names[i], supports[i]->entries()[pos[i]].first.value());
                break;
            }
            pos[i] = 0;
            nu.set(names[i], supports[i]->entries()[0].first.value());
            if (i == 0) return;
        }
        if (names.empty()) return;
    }
}

WorldRelation instantiate(const PvcTable& table, const Valuation& nu, SemiringKind sk) {
    WorldRelation out;
    for (const auto& row : table.rows()) {
        std::uint64_t mult = eval_semiring(row.annotation, nu, sk);
        if (mult == 0) continue;
        std::vector<Value> values;
        values.reserve(row.cells.size());
        for (const auto& c : row.cells) {
            if (const auto* m = std::get_if<SemimoduleExpr>(&c))
                values.emplace_back(eval_semimodule(*m, nu, sk));
            else
                values.push_back(std::get<Value>(c));
        }
        auto& slot = out[std::move(values)];
        slot = sk == SemiringKind::Boolean ? 1 : checked_add(slot, mult);
    }
    return out;
}

void for_each_world(const PvcDatabase& db, std::uint64_t limit, const std::function<void(const World&)>& visit) {
    for_each_valuation(db.variables(), db.distributions(), limit, [&](const Valuation& nu, double p) {
        World w;
        w.probability = p;
        for (const auto& [name, t] : db.tables()) w.tables.emplace(name, instantiate(t, nu, db.semiring()));
        visit(w);
    });
}

std::vector<World> enumerate_worlds(const PvcDatabase& db, std::uint64_t limit) {
    std::vector<World> out;
    for_each_world(db, limit, [&](const World& w) { out.push_back(w); });
    return out;
}

}  // namespace pvcagg
