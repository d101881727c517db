#include "pvcagg/tractability.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <numeric>

#include "pvcagg/error.hpp"

namespace pvcagg {

namespace {

constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

using Scope = std::vector<std::pair<std::string, std::size_t>>;

class Flattener {
public:
    explicit Flattener(const SchemaLookup& lookup) : lookup_(lookup) {}

    FlatBlock run(const QueryPtr& q, const std::vector<std::string>* head) {
        Scope scope = walk(q);
        for (std::size_t i = 0; i < block_.attributes.size(); ++i) block_.closure.push_back(find(i));
        for (std::size_t id : constant_ids_) block_.constant.insert(find(id));
        block_.head.assign(block_.attributes.size(), false);
        if (head) {
            block_.projected = true;
            for (const auto& name : *head) {
                std::size_t id = resolve(scope, name);
                if (id == npos)
                    block_.irregular = true;
                else
                    block_.head[id] = true;
            }
        } else {
            block_.projected = q->kind == Query::Kind::Project;
            for (const auto& [name, id] : scope) block_.head[id] = true;
        }
        return std::move(block_);
    }

private:
    std::size_t find(std::size_t x) {
        while (parent_[x] != x) x = parent_[x] = parent_[parent_[x]];
        return x;
    }

    static std::size_t resolve(const Scope& scope, const std::string& name) {
        for (const auto& [n, id] : scope)
            if (n == name) return id;
        return npos;
    }

    Scope walk(const QueryPtr& q) {
        using K = Query::Kind;
        switch (q->kind) {
        case K::Rename: {
            Scope s = walk(q->children[0]);
            for (const auto& [to, from] : q->renames)
                for (auto& entry : s)
                    if (entry.first == from) {
                        entry.first = to;
                        break;
                    }
            return s;
        }
        case K::Project: {
            Scope s = walk(q->children[0]);
            Scope out;
            for (const auto& name : q->attributes) {
                std::size_t id = resolve(s, name);
                if (id == npos)
                    block_.irregular = true;
                else
                    out.emplace_back(name, id);
            }
            return out;
        }
        case K::Select: {
            Scope s = walk(q->children[0]);
            for (const auto& p : q->predicates) predicate(p, s);
            return s;
        }
        case K::Product: {
            Scope s = walk(q->children[0]);
            Scope r = walk(q->children[1]);
            s.insert(s.end(), r.begin(), r.end());
            return s;
        }
        default: break;
        }
        const std::size_t child = block_.children.size();
        block_.children.push_back(q);
        block_.labels.push_back(q->kind == K::Relation ? q->relation : "#" + std::to_string(child + 1));
        Scope s;
        for (const auto& a : infer_schema(*q, lookup_)) {
            const std::size_t id = block_.attributes.size();
            block_.attributes.push_back(block_.labels.back() + "." + a.name);
            block_.owner.push_back(child);
            block_.aggregate.push_back(a.aggregate);
            parent_.push_back(id);
            s.emplace_back(a.name, id);
        }
        return s;
    }

    void predicate(const Predicate& p, const Scope& s) {
        auto id_of = [&](const PredTerm& t) {
            if (!t.is_attribute) return npos;
            std::size_t id = resolve(s, t.attribute);
            if (id == npos) block_.irregular = true;
            return id;
        };
        const std::size_t l = id_of(p.lhs);
        const std::size_t r = id_of(p.rhs);
        const bool agg = (l != npos && block_.aggregate[l]) || (r != npos && block_.aggregate[r]);
        if (agg) {
            block_.comparisons.push_back(p);
            block_.compared.emplace_back(l, r);
            return;
        }
        if (p.theta != Theta::Eq) {
            block_.irregular = true;
            return;
        }
        if (l != npos && r != npos)
            parent_[find(l)] = find(r);
        else if (l != npos)
            constant_ids_.push_back(l);
        else if (r != npos)
            constant_ids_.push_back(r);
    }

    const SchemaLookup& lookup_;
    FlatBlock block_;
    std::vector<std::size_t> parent_;
    std::vector<std::size_t> constant_ids_;
};

QueryPtr strip_renames(QueryPtr q) {
    while (q->kind == Query::Kind::Rename) q = q->children[0];
    return q;
}

bool monoid_supported(MonoidKind kind) { return kind != MonoidKind::Prod; }

class Classifier {
public:
    Classifier(const PvcDatabase& db, const SchemaLookup& lookup) : db_(db), lookup_(lookup) {}

    bool independent(const QueryPtr& q, std::string& rule) {
        const QueryPtr s = strip_renames(q);
        if (s->kind == Query::Kind::Relation) {
            if (!is_tuple_independent(db_.table(s->relation))) return false;
            rule = "tuple-independent relation";
            return true;
        }
        if (s->kind == Query::Kind::Aggregate || s->kind == Query::Kind::Union) return false;

        const FlatBlock b = flatten(q, lookup_);
        if (b.irregular) return false;
        std::string sub;

        if (b.children.size() == 1 && b.projected) {
            const QueryPtr& a = b.children[0];
            if (a->kind == Query::Kind::Aggregate && a->aggregates.size() == 1) {
                bool keeps_aggregate = false;
                for (std::size_t i = 0; i < b.attributes.size(); ++i)
                    keeps_aggregate = keeps_aggregate || (b.head[i] && b.aggregate[i]);
                if (!keeps_aggregate && monoid_supported(a->aggregates[0].monoid) && neutral_absent(*a) &&
                    independent(a->children[0], sub)) {
                    rule = "selection over an aggregation of an independent query";
                    return true;
                }
            }
        }

        if (b.children.size() == 2 && b.projected &&
            std::none_of(b.head.begin(), b.head.end(), [](bool h) { return h; })) {
            const QueryPtr& a1 = b.children[0];
            const QueryPtr& a2 = b.children[1];
            auto ungrouped = [&](const QueryPtr& a) {
                return a->kind == Query::Kind::Aggregate && a->attributes.empty() && a->aggregates.size() == 1 &&
                       monoid_supported(a->aggregates[0].monoid) && independent(a->children[0], sub);
            };
            bool compares = false;
            for (const auto& [l, r] : b.compared)
                compares = compares ||
                           (l != npos && r != npos && b.aggregate[l] && b.aggregate[r] && b.owner[l] != b.owner[r]);
            if (compares && ungrouped(a1) && ungrouped(a2)) {
                rule = "comparison of two ungrouped aggregations";
                return true;
            }
        }

        if (!b.comparisons.empty()) return false;
        for (const auto& c : b.children)
            if (!independent(c, sub)) return false;
        if (!hierarchical(b)) return false;
        const auto roots = root_closures(b);
        for (std::size_t i = 0; i < b.attributes.size(); ++i)
            if (b.head[i] && !roots.count(b.closure[i])) return false;
        rule = "hierarchical join of independent queries projecting on root attributes";
        return true;
    }

    bool hierarchical_class(const QueryPtr& q, std::string& rule) {
        std::string sub;
        QueryPtr s = q->kind == Query::Kind::Project ? strip_renames(q->children[0]) : q;
        if (s->kind == Query::Kind::Aggregate && s->aggregates.size() == 1 &&
            monoid_supported(s->aggregates[0].monoid) && neutral_absent(*s)) {
            const FlatBlock b = flatten(s->children[0], lookup_, s->attributes);
            if (!b.irregular && b.comparisons.empty() && all_independent(b) && hierarchical(b)) {
                rule = "aggregation over a hierarchical join of independent queries";
                return true;
            }
        }
        const FlatBlock b = flatten(q, lookup_);
        if (!b.irregular && b.comparisons.empty() && all_independent(b) && hierarchical(b)) {
            rule = "hierarchical join of independent queries";
            return true;
        }
        return false;
    }

private:
    bool all_independent(const FlatBlock& b) {
        std::string sub;
        for (const auto& c : b.children)
            if (!independent(c, sub)) return false;
        return true;
    }

    static bool hierarchical(const FlatBlock& b) {
        try {
            return is_hierarchical(b);
        } catch (const Error&) {
            return false;
        }
    }

    static std::set<std::size_t> root_closures(const FlatBlock& b) {
        std::set<std::size_t> out;
        for (std::size_t i = 0; i < b.attributes.size(); ++i)
            if (b.at(i).size() == b.children.size()) out.insert(b.closure[i]);
        return out;
    }

    // Grouped aggregation is only safe when 0_M never occurs in the data the
    // query reads; without grouping the annotation is 1 and nothing is needed.
    bool neutral_absent(const Query& a) const {
        if (a.attributes.empty()) return true;
        for (const auto& spec : a.aggregates) {
            if (spec.monoid == MonoidKind::Count) continue;
            const ExtNat zero = monoid::neutral(spec.monoid);
            for (const auto& name : base_relations(a)) {
                for (const auto& row : db_.table(name).rows()) {
                    for (const auto& cell : row.cells) {
                        if (const auto* v = std::get_if<Value>(&cell)) {
                            const auto* n = std::get_if<ExtNat>(v);
                            if (n && *n == zero) return false;
                        } else {
                            for (const auto& t : std::get<SemimoduleExpr>(cell).terms())
                                if (t.value == zero) return false;
                        }
                    }
                }
            }
        }
        return true;
    }

    const PvcDatabase& db_;
    const SchemaLookup& lookup_;
};

}  // namespace

std::set<std::size_t> FlatBlock::at(std::size_t attribute) const {
    std::set<std::size_t> out;
    for (std::size_t i = 0; i < attributes.size(); ++i)
        if (closure[i] == closure[attribute]) out.insert(owner[i]);
    return out;
}

FlatBlock flatten(const QueryPtr& q, const SchemaLookup& lookup) {
    return Flattener(lookup).run(expand_joins(q, lookup), nullptr);
}

FlatBlock flatten(const QueryPtr& q, const SchemaLookup& lookup, const std::vector<std::string>& head) {
    return Flattener(lookup).run(expand_joins(q, lookup), &head);
}

bool is_non_repeating(const Query& q) {
    auto names = base_relations(q);
    std::sort(names.begin(), names.end());
    return std::adjacent_find(names.begin(), names.end()) == names.end();
}

bool is_hierarchical(const FlatBlock& block) {
    std::vector<std::string> names;
    for (const auto& c : block.children) {
        auto sub = base_relations(*c);
        names.insert(names.end(), sub.begin(), sub.end());
    }
    std::sort(names.begin(), names.end());
    if (auto it = std::adjacent_find(names.begin(), names.end()); it != names.end())
        throw Error(ErrorCode::RepeatedRelation, "relation " + *it + " occurs more than once");

    std::set<std::size_t> excluded(block.constant);
    for (std::size_t i = 0; i < block.attributes.size(); ++i)
        if (block.head[i]) excluded.insert(block.closure[i]);
    std::map<std::size_t, std::set<std::size_t>> sets;
    for (std::size_t i = 0; i < block.attributes.size(); ++i)
        if (!excluded.count(block.closure[i])) sets[block.closure[i]].insert(block.owner[i]);

    for (auto a = sets.begin(); a != sets.end(); ++a) {
        for (auto b = std::next(a); b != sets.end(); ++b) {
            const auto& x = a->second;
            const auto& y = b->second;
            const bool disjoint = std::none_of(x.begin(), x.end(), [&](std::size_t c) { return y.count(c) > 0; });
            const bool nested = std::includes(x.begin(), x.end(), y.begin(), y.end()) ||
                                std::includes(y.begin(), y.end(), x.begin(), x.end());
            if (!disjoint && !nested) return false;
        }
    }
    return true;
}

bool is_hierarchical(const QueryPtr& q, const SchemaLookup& lookup) { return is_hierarchical(flatten(q, lookup)); }

std::set<std::string> root_attributes(const FlatBlock& block) {
    std::set<std::string> out;
    if (block.children.empty()) return out;
    for (std::size_t i = 0; i < block.attributes.size(); ++i)
        if (block.at(i).size() == block.children.size()) out.insert(block.attributes[i]);
    return out;
}

std::set<std::string> root_attributes(const QueryPtr& q, const SchemaLookup& lookup) {
    return root_attributes(flatten(q, lookup));
}

std::string describe(const FlatBlock& block) {
    std::map<std::size_t, std::vector<std::size_t>> members;
    std::vector<std::size_t> order;
    for (std::size_t i = 0; i < block.attributes.size(); ++i) {
        auto& m = members[block.closure[i]];
        if (m.empty()) order.push_back(block.closure[i]);
        m.push_back(i);
    }
    std::string out;
    for (std::size_t rep : order) {
        const auto& m = members[rep];
        out += "{";
        for (std::size_t k = 0; k < m.size(); ++k) out += (k ? ", " : "") + block.attributes[m[k]];
        out += "} at {";
        const auto at = block.at(rep);
        std::size_t k = 0;
        for (std::size_t c : at) out += (k++ ? ", " : "") + block.labels[c];
        out += "}";
        if (std::any_of(m.begin(), m.end(), [&](std::size_t i) { return block.head[i]; })) out += " head";
        if (block.constant.count(rep)) out += " const";
        if (at.size() == block.children.size()) out += " root";
        out += "\n";
    }
    return out;
}

std::string_view to_string(QueryClass c) {
    switch (c) {
    case QueryClass::Ind: return "Q_ind";
    case QueryClass::Hie: return "Q_hie";
    case QueryClass::Unknown: return "unknown";
    }
    return "?";
}

bool is_tuple_independent(const PvcTable& table) {
    for (const auto& a : table.schema())
        if (a.aggregate) return false;
    std::set<std::string> seen;
    for (const auto& row : table.rows()) {
        if (row.annotation.kind() != SemiringExpr::Kind::Variable) return false;
        if (!seen.insert(row.annotation.name()).second) return false;
    }
    return true;
}

Classification classify(const QueryPtr& q, const PvcDatabase& db) {
    const SchemaLookup lookup = schema_lookup(db);
    infer_schema(*q, lookup);
    const QueryPtr e = expand_joins(q, lookup);
    if (!is_non_repeating(*e)) return {QueryClass::Unknown, "a base relation occurs more than once"};
    Classifier c(db, lookup);
    std::string rule;
    if (c.independent(e, rule)) return {QueryClass::Ind, rule};
    if (c.hierarchical_class(e, rule)) return {QueryClass::Hie, rule};
    return {QueryClass::Unknown, "no tractable pattern matches"};
}

}  // namespace pvcagg
