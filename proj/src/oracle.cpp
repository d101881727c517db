#include "pvcagg/oracle.hpp"

#include <map>
#include <set>

#include "pvcagg/error.hpp"

namespace pvcagg {

Distribution brute_distribution(const Operand& expr, const VarDistributions& dists, SemiringKind sk,
                                std::uint64_t limit) {
    std::map<ExtNat, double> mass;
    for_each_valuation(variables(expr), dists, limit,
                       [&](const Valuation& nu, double p) { mass[eval_operand(expr, nu, sk)] += p; });
    return Distribution::from_entries({mass.begin(), mass.end()}, 0);
}

namespace {

// A deterministic relation: schema plus value tuples with multiplicities.
struct Table {
    std::vector<Attribute> schema;
    std::map<std::vector<Value>, std::uint64_t> rows;

    std::size_t index(const std::string& name) const {
        for (std::size_t i = 0; i < schema.size(); ++i)
            if (schema[i].name == name) return i;
        throw Error(ErrorCode::SchemaMismatch, "unknown attribute " + name);
    }
};

class WorldEvaluator {
public:
    WorldEvaluator(const PvcDatabase& db, const Valuation& nu) : db_(db), nu_(nu), sk_(db.semiring()) {}

    Table eval(const Query& q) {
        using K = Query::Kind;
        switch (q.kind) {
        case K::Relation: {
            const PvcTable& t = db_.table(q.relation);
            return Table{t.schema(), instantiate(t, nu_, sk_)};
        }
        case K::Rename: {
            Table t = eval(*q.children[0]);
            for (const auto& [to, from] : q.renames) t.schema[t.index(from)].name = to;
            return t;
        }
        case K::Select: {
            Table in = eval(*q.children[0]);
            Table out{in.schema, {}};
            for (const auto& [tuple, mult] : in.rows) {
                bool keep = true;
                for (const auto& p : q.predicates) {
                    auto side = [&](const PredTerm& t) { return t.is_attribute ? tuple[in.index(t.attribute)] : t.constant; };
                    if (!compare_values(side(p.lhs), p.theta, side(p.rhs))) keep = false;
                }
                if (keep) out.rows[tuple] = mult;
            }
            return out;
        }
        case K::Project: {
            Table in = eval(*q.children[0]);
            std::vector<std::size_t> pos;
            for (const auto& name : q.attributes) pos.push_back(in.index(name));
            return project(in, pos);
        }
        case K::Product: {
            Table l = eval(*q.children[0]);
            Table r = eval(*q.children[1]);
            Table out{l.schema, {}};
            out.schema.insert(out.schema.end(), r.schema.begin(), r.schema.end());
            for (const auto& [a, m] : l.rows)
                for (const auto& [b, n] : r.rows) {
                    auto t = a;
                    t.insert(t.end(), b.begin(), b.end());
                    add(out.rows[t], semiring::mul(sk_, m, n));
                }
            return out;
        }
        case K::Union: {
            Table l = eval(*q.children[0]);
            Table r = eval(*q.children[1]);
            for (const auto& [t, m] : r.rows) add(l.rows[t], m);
            return l;
        }
        case K::Join: {
            Table l = eval(*q.children[0]);
            Table r = eval(*q.children[1]);
            std::vector<std::pair<std::size_t, std::size_t>> common;
            std::vector<std::size_t> rest;
            Table out{l.schema, {}};
            for (std::size_t j = 0; j < r.schema.size(); ++j) {
                bool shared = false;
                for (std::size_t i = 0; i < l.schema.size(); ++i)
                    if (l.schema[i].name == r.schema[j].name) {
                        common.emplace_back(i, j);
                        shared = true;
                    }
                if (!shared) {
                    rest.push_back(j);
                    out.schema.push_back(r.schema[j]);
                }
            }
            for (const auto& [a, m] : l.rows)
                for (const auto& [b, n] : r.rows) {
                    bool match = true;
                    for (const auto& [i, j] : common) match = match && a[i] == b[j];
                    if (!match) continue;
                    auto t = a;
                    for (std::size_t j : rest) t.push_back(b[j]);
                    add(out.rows[t], semiring::mul(sk_, m, n));
                }
            return out;
        }
        case K::Aggregate: {
            Table in = eval(*q.children[0]);
            Table out;
            std::vector<std::size_t> pos;
            for (const auto& name : q.attributes) {
                pos.push_back(in.index(name));
                out.schema.push_back(in.schema[pos.back()]);
            }
            for (const auto& spec : q.aggregates) out.schema.push_back(Attribute{spec.target, true});

            std::map<std::vector<Value>, std::vector<ExtNat>> groups;
            auto fresh = [&] {
                std::vector<ExtNat> acc;
                for (const auto& spec : q.aggregates) acc.push_back(monoid::neutral(spec.monoid));
                return acc;
            };
            if (pos.empty()) groups[{}] = fresh();
            for (const auto& [tuple, mult] : in.rows) {
                std::vector<Value> key;
                for (std::size_t p : pos) key.push_back(tuple[p]);
                auto it = groups.find(key);
                if (it == groups.end()) it = groups.emplace(key, fresh()).first;
                for (std::size_t k = 0; k < q.aggregates.size(); ++k) {
                    const auto& spec = q.aggregates[k];
                    ExtNat part;
                    if (spec.monoid == MonoidKind::Count) {
                        part = ExtNat(mult);
                    } else {
                        const auto& v = std::get<ExtNat>(tuple[in.index(spec.source)]);
                        part = monoid::scale(spec.monoid, sk_, mult, v);
                    }
                    it->second[k] = monoid::plus(spec.monoid, it->second[k], part);
                }
            }
            for (auto& [key, acc] : groups) {
                std::vector<Value> t = key;
                for (const auto& v : acc) t.emplace_back(v);
                out.rows[t] = 1;
            }
            return out;
        }
        }
        return {};
    }

private:
    void add(std::uint64_t& slot, std::uint64_t m) const { slot = semiring::add(sk_, slot, m); }

    Table project(const Table& in, const std::vector<std::size_t>& pos) const {
        Table out;
        for (std::size_t p : pos) out.schema.push_back(in.schema[p]);
        for (const auto& [tuple, mult] : in.rows) {
            std::vector<Value> t;
            for (std::size_t p : pos) t.push_back(tuple[p]);
            add(out.rows[t], mult);
        }
        return out;
    }

    const PvcDatabase& db_;
    const Valuation& nu_;
    SemiringKind sk_;
};

std::set<std::string> query_variables(const Query& q, const PvcDatabase& db) {
    std::set<std::string> vars;
    for (const auto& name : base_relations(q)) {
        auto v = db.table(name).variables();
        vars.insert(v.begin(), v.end());
    }
    return vars;
}

}  // namespace

std::map<AnswerKey, std::pair<std::uint64_t, Tuple>> evaluate_in_world(const Query& q, const PvcDatabase& db,
                                                                       const Valuation& nu) {
    const Table t = WorldEvaluator(db, nu).eval(q);
    std::map<AnswerKey, std::pair<std::uint64_t, Tuple>> out;
    for (const auto& [tuple, mult] : t.rows) {
        if (mult == 0) continue;
        AnswerKey key;
        Tuple cells;
        for (std::size_t i = 0; i < t.schema.size(); ++i) {
            if (t.schema[i].aggregate)
                cells.push_back(std::get<ExtNat>(tuple[i]));
            else
                key.push_back(tuple[i]);
        }
        auto [it, fresh] = out.emplace(std::move(key), std::make_pair(mult, cells));
        if (!fresh)
            throw Error(ErrorCode::InvalidQuery, "two answer tuples share their non-aggregation values");
    }
    return out;
}

void for_each_world_answer(
    const Query& q, const PvcDatabase& db, std::uint64_t limit,
    const std::function<void(const std::map<AnswerKey, std::pair<std::uint64_t, Tuple>>&, double)>& visit) {
    infer_schema(q, schema_lookup(db));
    for_each_valuation(query_variables(q, db), db.distributions(), limit,
                       [&](const Valuation& nu, double p) { visit(evaluate_in_world(q, db, nu), p); });
}

BruteAnswer brute_query(const Query& q, const PvcDatabase& db, std::uint64_t limit) {
    BruteAnswer ans;
    ans.schema = infer_schema(q, schema_lookup(db));
    double total = 0;
    std::map<AnswerKey, double> present;
    for_each_world_answer(q, db, limit, [&](const auto& answer, double p) {
        total += p;
        for (const auto& [key, value] : answer) {
            TupleOutcome o{true, value.first, value.second};
            ans.tuples[key][o] += p;
            present[key] += p;
        }
    });
    for (auto& [key, dist] : ans.tuples) {
        const double absent = total - present[key];
        if (absent > 0) dist[TupleOutcome{}] += absent;
    }
    return ans;
}

}  // namespace pvcagg
