#include "pvcagg/engine.hpp"

#include <algorithm>
#include <map>

#include "pvcagg/error.hpp"

namespace pvcagg {

namespace {

struct Relation {
    std::vector<Attribute> schema;
    std::vector<Row> rows;

    std::size_t index(const std::string& name) const {
        for (std::size_t i = 0; i < schema.size(); ++i)
            if (schema[i].name == name) return i;
        throw Error(ErrorCode::SchemaMismatch, "unknown attribute " + name);
    }
};

const Value& constant_cell(const Row& row, std::size_t i) { return std::get<Value>(row.cells[i]); }

ExtNat number(const Value& v, const std::string& what) {
    if (const auto* n = std::get_if<ExtNat>(&v)) return *n;
    throw Error(ErrorCode::SchemaMismatch, what + " holds a string where a number is needed");
}

SemiringExpr sum_of(std::vector<SemiringExpr> parts) {
    if (parts.size() == 1) return std::move(parts[0]);
    return SemiringExpr::sum(std::move(parts));
}

/// Rows grouped by the values at `positions`, in order of first occurrence.
std::vector<std::vector<const Row*>> group_rows(const std::vector<Row>& rows, const std::vector<std::size_t>& positions) {
    std::map<std::vector<Value>, std::size_t> index;
    std::vector<std::vector<const Row*>> groups;
    for (const auto& row : rows) {
        std::vector<Value> key;
        for (std::size_t p : positions) key.push_back(constant_cell(row, p));
        auto [it, fresh] = index.emplace(std::move(key), groups.size());
        if (fresh) groups.emplace_back();
        groups[it->second].push_back(&row);
    }
    return groups;
}

Relation project_rows(const Relation& in, const std::vector<std::size_t>& positions) {
    Relation out;
    for (std::size_t p : positions) out.schema.push_back(in.schema[p]);
    for (const auto& group : group_rows(in.rows, positions)) {
        Row row;
        for (std::size_t p : positions) row.cells.push_back(group.front()->cells[p]);
        std::vector<SemiringExpr> phis;
        for (const Row* r : group) phis.push_back(r->annotation);
        row.annotation = sum_of(std::move(phis));
        out.rows.push_back(std::move(row));
    }
    return out;
}

class Evaluator {
public:
    explicit Evaluator(const PvcDatabase& db) : db_(db) {}

    Relation eval(const Query& q) {
        using K = Query::Kind;
        switch (q.kind) {
        case K::Relation: {
            const PvcTable& t = db_.table(q.relation);
            return Relation{t.schema(), t.rows()};
        }
        case K::Rename: {
            Relation r = eval(*q.children[0]);
            for (const auto& [to, from] : q.renames) r.schema[r.index(from)].name = to;
            return r;
        }
        case K::Select: return select(q, eval(*q.children[0]));
        case K::Project: {
            Relation r = eval(*q.children[0]);
            std::vector<std::size_t> positions;
            for (const auto& name : q.attributes) positions.push_back(r.index(name));
            return project_rows(r, positions);
        }
        case K::Product: {
            Relation l = eval(*q.children[0]);
            Relation r = eval(*q.children[1]);
            Relation out;
            out.schema = l.schema;
            out.schema.insert(out.schema.end(), r.schema.begin(), r.schema.end());
            for (const auto& a : l.rows) {
                for (const auto& b : r.rows) {
                    Row row;
                    row.cells = a.cells;
                    row.cells.insert(row.cells.end(), b.cells.begin(), b.cells.end());
                    row.annotation = SemiringExpr::product({a.annotation, b.annotation});
                    out.rows.push_back(std::move(row));
                }
            }
            return out;
        }
        case K::Union: {
            Relation l = eval(*q.children[0]);
            Relation r = eval(*q.children[1]);
            l.rows.insert(l.rows.end(), r.rows.begin(), r.rows.end());
            std::vector<std::size_t> all(l.schema.size());
            for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
            return project_rows(l, all);
        }
        case K::Aggregate: return aggregate(q, eval(*q.children[0]));
        case K::Join: break;
        }
        throw Error(ErrorCode::InvalidQuery, "join must be expanded before evaluation");
    }

private:
    Relation select(const Query& q, Relation in) {
        Relation out;
        out.schema = in.schema;
        for (auto& row : in.rows) {
            bool keep = true;
            std::vector<SemiringExpr> factors{row.annotation};
            for (const auto& p : q.predicates) {
                const bool lagg = p.lhs.is_attribute && in.schema[in.index(p.lhs.attribute)].aggregate;
                const bool ragg = p.rhs.is_attribute && in.schema[in.index(p.rhs.attribute)].aggregate;
                if (!lagg && !ragg) {
                    keep = compare_values(value(p.lhs, in, row), p.theta, value(p.rhs, in, row));
                    if (!keep) break;
                    continue;
                }
                const MonoidKind kind = lagg ? module(p.lhs, in, row).monoid() : module(p.rhs, in, row).monoid();
                factors.push_back(
                    SemiringExpr::conditional(operand(p.lhs, lagg, kind, in, row), p.theta,
                                              operand(p.rhs, ragg, kind, in, row)));
            }
            if (!keep) continue;
            if (factors.size() > 1) row.annotation = SemiringExpr::product(std::move(factors));
            out.rows.push_back(std::move(row));
        }
        return out;
    }

    static Value value(const PredTerm& t, const Relation& r, const Row& row) {
        return t.is_attribute ? constant_cell(row, r.index(t.attribute)) : t.constant;
    }

    static const SemimoduleExpr& module(const PredTerm& t, const Relation& r, const Row& row) {
        return std::get<SemimoduleExpr>(row.cells[r.index(t.attribute)]);
    }

    static Operand operand(const PredTerm& t, bool aggregate, MonoidKind kind, const Relation& r, const Row& row) {
        if (aggregate) return module(t, r, row);
        return SemimoduleExpr::constant(kind, number(value(t, r, row), t.is_attribute ? t.attribute : "constant"));
    }

    Relation aggregate(const Query& q, const Relation& in) {
        Relation out;
        std::vector<std::size_t> positions;
        for (const auto& name : q.attributes) {
            positions.push_back(in.index(name));
            out.schema.push_back(in.schema[positions.back()]);
        }
        for (const auto& spec : q.aggregates) {
            check_aggregate_allowed(spec.monoid, db_.semiring());
            out.schema.push_back(Attribute{spec.target, true});
        }

        auto groups = group_rows(in.rows, positions);
        if (positions.empty() && groups.empty()) groups.emplace_back();
        for (const auto& group : groups) {
            Row row;
            for (std::size_t p : positions) row.cells.push_back(group.front()->cells[p]);
            for (const auto& spec : q.aggregates) {
                const bool count = spec.monoid == MonoidKind::Count;
                const std::size_t source = count ? 0 : in.index(spec.source);
                std::vector<SemimoduleExpr::Term> terms;
                for (const Row* r : group) {
                    const ExtNat v = count ? ExtNat(1) : number(constant_cell(*r, source), spec.source);
                    terms.push_back(SemimoduleExpr::Term{r->annotation, v});
                }
                // COUNT is the SUM of one per contributing tuple.
                row.cells.emplace_back(SemimoduleExpr(count ? MonoidKind::Sum : spec.monoid, std::move(terms)));
            }
            if (positions.empty()) {
                row.annotation = SemiringExpr::constant(semiring::one(db_.semiring()));
            } else {
                std::vector<SemiringExpr> phis;
                for (const Row* r : group) phis.push_back(r->annotation);
                row.annotation = SemiringExpr::conditional(sum_of(std::move(phis)), Theta::Ne,
                                                           SemiringExpr::constant(semiring::zero(db_.semiring())));
            }
            out.rows.push_back(std::move(row));
        }
        return out;
    }

    const PvcDatabase& db_;
};

std::optional<SemiringExpr> nonempty_guard(const SemiringExpr& e) {
    if (e.kind() != SemiringExpr::Kind::Conditional || e.theta() != Theta::Ne) return std::nullopt;
    const auto* l = std::get_if<SemiringExpr>(&e.lhs());
    const auto* r = std::get_if<SemiringExpr>(&e.rhs());
    if (!l || !r || r->kind() != SemiringExpr::Kind::Constant || r->value() != 0) return std::nullopt;
    return *l;
}

std::optional<ExtNat> constant_operand(const Operand& op) {
    if (const auto* m = std::get_if<SemimoduleExpr>(&op)) {
        if (m->terms().size() == 1 && !m->terms()[0].scalar) return m->terms()[0].value;
        return std::nullopt;
    }
    const auto& s = std::get<SemiringExpr>(op);
    if (s.kind() == SemiringExpr::Kind::Constant) return ExtNat(s.value());
    return std::nullopt;
}

}  // namespace

PvcTable evaluate(const QueryPtr& q, const PvcDatabase& db) {
    const SchemaLookup lookup = schema_lookup(db);
    infer_schema(*q, lookup);
    Relation r = Evaluator(db).eval(*expand_joins(q, lookup));
    PvcTable out("result", r.schema);
    for (auto& row : r.rows) out.add_row(std::move(row));
    return out;
}

std::optional<Distribution> min_selection_shortcut(const SemiringExpr& annotation, const VarDistributions& dists,
                                                   SemiringKind sk, const CompileOptions& options) {
    if (annotation.kind() != SemiringExpr::Kind::Product || annotation.children().size() != 2) return std::nullopt;
    for (int first = 0; first < 2; ++first) {
        const SemiringExpr& guard = annotation.children()[first];
        const SemiringExpr& cond = annotation.children()[1 - first];
        const auto group = nonempty_guard(guard);
        if (!group || cond.kind() != SemiringExpr::Kind::Conditional) continue;

        Theta theta = cond.theta();
        const SemimoduleExpr* gamma = std::get_if<SemimoduleExpr>(&cond.lhs());
        std::optional<ExtNat> c = constant_operand(cond.rhs());
        if (!gamma || gamma->is_constant()) {
            gamma = std::get_if<SemimoduleExpr>(&cond.rhs());
            c = constant_operand(cond.lhs());
            theta = mirror(theta);
        }
        if (!gamma || !c || gamma->monoid() != MonoidKind::Min) continue;
        if (theta != Theta::Le && theta != Theta::Ge) continue;
        if (theta == Theta::Le && c->is_pos_inf()) continue;

        // gamma is +inf exactly when the group is empty.
        std::vector<SemiringExpr> summands = group->kind() == SemiringExpr::Kind::Sum
                                                 ? group->children()
                                                 : std::vector<SemiringExpr>{*group};
        bool matches = summands.size() == gamma->terms().size();
        for (const auto& t : gamma->terms()) {
            if (!matches) break;
            if (!t.scalar || t.value.is_pos_inf()) {
                matches = false;
                break;
            }
            auto it = std::find(summands.begin(), summands.end(), *t.scalar);
            if (it == summands.end())
                matches = false;
            else
                summands.erase(it);
        }
        if (!matches) continue;

        const Distribution selected = distribution(compile(Operand(cond), dists, sk, options));
        if (theta == Theta::Le) return selected;
        const Distribution nonempty = distribution(compile(Operand(guard), dists, sk, options));
        const double p1 = std::clamp(nonempty.probability(ExtNat(1)) + selected.probability(ExtNat(1)) - 1.0, 0.0, 1.0);
        return Distribution::from_entries({{ExtNat(0), 1.0 - p1}, {ExtNat(1), p1}}, 0);
    }
    return std::nullopt;
}

Answer answer_distributions(const QueryPtr& q, const PvcDatabase& db, const AnswerOptions& options) {
    Answer ans;
    ans.table = evaluate(q, db);
    ans.classification = classify(q, db);
    const bool fast = options.fast_paths && ans.classification.cls != QueryClass::Unknown;
    const SemiringKind sk = db.semiring();
    const auto& dists = db.distributions();
    const auto& schema = ans.table.schema();

    for (const auto& row : ans.table.rows()) {
        TupleAnswer t;
        t.row = row;
        auto account = [&](const DTree& tree) {
            t.nodes += tree.size();
            t.mutex_nodes += tree.count(DTree::Kind::Mutex) + tree.count(DTree::Kind::JointMutex);
        };
        std::vector<Operand> exprs{row.annotation};
        for (std::size_t i = 0; i < schema.size(); ++i) {
            if (schema[i].aggregate)
                exprs.emplace_back(std::get<SemimoduleExpr>(row.cells[i]));
            else
                t.key.push_back(std::get<Value>(row.cells[i]));
        }
        if (fast) {
            if (auto d = min_selection_shortcut(row.annotation, dists, sk, options.compile)) {
                t.annotation = std::move(*d);
                t.fast_path = true;
            }
        }
        if (!t.fast_path) {
            const DTree tree = compile(exprs[0], dists, sk, options.compile);
            account(tree);
            t.annotation = distribution(tree);
        }
        for (std::size_t i = 1; i < exprs.size(); ++i) {
            const DTree tree = compile(exprs[i], dists, sk, options.compile);
            account(tree);
            t.cells.push_back(distribution(tree));
        }
        if (options.joint && exprs.size() > 1) {
            const DTree tree = compile_joint(exprs, dists, sk, options.compile);
            account(tree);
            t.joint = joint_distribution(tree);
        }
        ans.tuples.push_back(std::move(t));
    }
    return ans;
}

OutcomeDistribution outcomes(const TupleAnswer& t, SemiringKind sk) {
    OutcomeDistribution out;
    auto outcome = [&](ExtNat annotation, Tuple cells) {
        TupleOutcome o;
        if (annotation != ExtNat(0)) {
            o.present = true;
            o.multiplicity = sk == SemiringKind::Boolean ? 1 : annotation.value();
            o.cells = std::move(cells);
        }
        return o;
    };
    if (t.joint) {
        for (const auto& [tuple, p] : t.joint->entries())
            out[outcome(tuple[0], Tuple(tuple.begin() + 1, tuple.end()))] += p;
        return out;
    }
    if (!t.cells.empty())
        throw Error(ErrorCode::InvalidParams, "outcomes of a tuple with aggregation cells need the joint distribution");
    for (const auto& [v, p] : t.annotation.entries()) out[outcome(v, {})] += p;
    return out;
}

}  // namespace pvcagg
