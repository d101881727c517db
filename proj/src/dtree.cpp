#include "pvcagg/dtree.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <numeric>
#include <sstream>

#include "pvcagg/error.hpp"

namespace pvcagg {

namespace {

struct UnionFind {
    explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), std::size_t{0}); }
    std::size_t find(std::size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    }
    void unite(std::size_t a, std::size_t b) { parent[find(a)] = find(b); }
    std::vector<std::size_t> parent;
};

/// Groups items into connected components of shared variables. Items without
/// variables form singleton groups. Groups are ordered by their first item.
std::vector<std::vector<std::size_t>> components(const std::vector<std::vector<VarId>>& item_vars) {
    const std::size_t n = item_vars.size();
    UnionFind uf(n);
    std::map<VarId, std::size_t> owner;
    for (std::size_t i = 0; i < n; ++i) {
        for (VarId x : item_vars[i]) {
            auto [it, fresh] = owner.emplace(x, i);
            if (!fresh) uf.unite(i, it->second);
        }
    }
    std::vector<std::vector<std::size_t>> groups;
    std::map<std::size_t, std::size_t> group_of_root;
    for (std::size_t i = 0; i < n; ++i) {
        auto [it, fresh] = group_of_root.emplace(uf.find(i), groups.size());
        if (fresh) groups.emplace_back();
        groups[it->second].push_back(i);
    }
    return groups;
}

bool disjoint(const std::vector<VarId>& a, const std::vector<VarId>& b) {
    auto i = a.begin();
    auto j = b.begin();
    while (i != a.end() && j != b.end()) {
        if (*i == *j) return false;
        if (*i < *j)
            ++i;
        else
            ++j;
    }
    return true;
}

// --- atoms of a polynomial -------------------------------------------------

struct Atom {
    std::optional<VarPower> power;
    CondPtr cond;
    std::vector<VarId> vars;
};

struct AtomTable {
    std::vector<Atom> atoms;
    std::map<std::string, std::size_t> ids;
    std::vector<std::vector<std::size_t>> clause_atoms;  // per clause, atom ids

    std::size_t intern(const std::string& key, Atom atom) {
        auto [it, fresh] = ids.emplace(key, atoms.size());
        if (fresh) atoms.push_back(std::move(atom));
        return it->second;
    }

    void add_clause(const Clause& c) {
        std::vector<std::size_t> ids_here;
        for (const auto& vp : c.vars)
            ids_here.push_back(intern("v" + std::to_string(vp.var) + "^" + std::to_string(vp.exp),
                                      Atom{vp, nullptr, {vp.var}}));
        for (const auto& cond : c.conds) ids_here.push_back(intern("c" + cond->key, Atom{std::nullopt, cond, cond->vars}));
        clause_atoms.push_back(std::move(ids_here));
    }
};

Clause clause_of(const AtomTable& table, const std::vector<std::size_t>& atom_ids, std::uint64_t coef) {
    Clause c;
    c.coef = coef;
    for (std::size_t a : atom_ids) {
        const Atom& atom = table.atoms[a];
        if (atom.power)
            c.vars.push_back(*atom.power);
        else
            c.conds.push_back(atom.cond);
    }
    std::sort(c.vars.begin(), c.vars.end());
    std::sort(c.conds.begin(), c.conds.end(), [](const CondPtr& a, const CondPtr& b) { return a->key < b->key; });
    return c;
}

Poly poly_of_monomials(const AtomTable& table, const std::set<std::vector<std::size_t>>& monomials, SemiringKind sk) {
    std::vector<Clause> clauses;
    for (const auto& m : monomials) clauses.push_back(clause_of(table, m, 1));
    return make_poly(std::move(clauses), sk);
}

std::optional<std::pair<Poly, Poly>> split_product(const Poly& p, SemiringKind sk) {
    if (p.is_constant()) return std::nullopt;
    if (sk == SemiringKind::Natural) {
        std::uint64_t g = 0;
        for (const auto& c : p.clauses) g = std::gcd(g, c.coef);
        if (g > 1) {
            Poly rest = p;
            for (auto& c : rest.clauses) c.coef /= g;
            return std::make_pair(poly_constant(g, sk), std::move(rest));
        }
    }

    AtomTable table;
    for (const auto& c : p.clauses) table.add_clause(c);
    const std::size_t na = table.atoms.size();

    // Blocks: atoms connected through shared variables must stay together.
    UnionFind uf(na);
    std::map<VarId, std::size_t> owner;
    for (std::size_t a = 0; a < na; ++a)
        for (VarId x : table.atoms[a].vars) {
            auto [it, fresh] = owner.emplace(x, a);
            if (!fresh) uf.unite(a, it->second);
        }
    std::vector<std::size_t> block_of(na);
    std::map<std::size_t, std::size_t> block_ids;
    for (std::size_t a = 0; a < na; ++a) {
        auto [it, fresh] = block_ids.emplace(uf.find(a), block_ids.size());
        block_of[a] = it->second;
    }
    const std::size_t nb = block_ids.size();
    if (nb < 2) return std::nullopt;

    // Co-occurrence graph on blocks; the polynomial is a product exactly along
    // the connected components of its complement.
    std::vector<std::vector<std::size_t>> adj(nb);
    for (const auto& atoms : table.clause_atoms) {
        std::vector<std::size_t> blocks;
        for (std::size_t a : atoms) blocks.push_back(block_of[a]);
        std::sort(blocks.begin(), blocks.end());
        blocks.erase(std::unique(blocks.begin(), blocks.end()), blocks.end());
        for (std::size_t i = 0; i < blocks.size(); ++i)
            for (std::size_t j = 0; j < blocks.size(); ++j)
                if (i != j) adj[blocks[i]].push_back(blocks[j]);
    }
    for (auto& a : adj) {
        std::sort(a.begin(), a.end());
        a.erase(std::unique(a.begin(), a.end()), a.end());
    }
    std::vector<std::size_t> comp_of(nb, nb);
    std::vector<std::size_t> unvisited(nb);
    std::iota(unvisited.begin(), unvisited.end(), std::size_t{0});
    std::size_t ncomp = 0;
    while (!unvisited.empty()) {
        std::deque<std::size_t> queue{unvisited.front()};
        unvisited.erase(unvisited.begin());
        comp_of[queue.front()] = ncomp;
        while (!queue.empty()) {
            std::size_t u = queue.front();
            queue.pop_front();
            std::vector<std::size_t> still;
            for (std::size_t v : unvisited) {
                if (std::binary_search(adj[u].begin(), adj[u].end(), v)) {
                    still.push_back(v);
                } else {
                    comp_of[v] = ncomp;
                    queue.push_back(v);
                }
            }
            unvisited = std::move(still);
        }
        ++ncomp;
    }
    if (ncomp < 2) return std::nullopt;

    std::vector<std::set<std::vector<std::size_t>>> projections(ncomp);
    for (const auto& atoms : table.clause_atoms) {
        std::vector<std::vector<std::size_t>> parts(ncomp);
        for (std::size_t a : atoms) parts[comp_of[block_of[a]]].push_back(a);
        for (std::size_t k = 0; k < ncomp; ++k) projections[k].insert(std::move(parts[k]));
    }

    const bool unit_coefs = std::all_of(p.clauses.begin(), p.clauses.end(), [](const Clause& c) { return c.coef == 1; });
    std::size_t combos = 1;
    for (const auto& proj : projections) {
        combos *= proj.size();
        if (combos > p.clauses.size()) break;
    }
    if (unit_coefs && combos == p.clauses.size()) {
        std::set<std::vector<std::size_t>> rest;
        for (const auto& atoms : table.clause_atoms) {
            std::vector<std::size_t> r;
            for (std::size_t a : atoms)
                if (comp_of[block_of[a]] != 0) r.push_back(a);
            rest.insert(std::move(r));
        }
        return std::make_pair(poly_of_monomials(table, projections[0], sk), poly_of_monomials(table, rest, sk));
    }

    // Otherwise factor out the components that contribute one fixed monomial
    // to every clause; the coefficients stay with the remainder.
    std::vector<bool> common(ncomp, false);
    bool any = false;
    for (std::size_t k = 0; k < ncomp; ++k) {
        if (projections[k].size() == 1 && !projections[k].begin()->empty()) {
            common[k] = true;
            any = true;
        }
    }
    if (!any) return std::nullopt;
    std::vector<std::size_t> factor;
    std::vector<Clause> rest;
    for (std::size_t i = 0; i < table.clause_atoms.size(); ++i) {
        std::vector<std::size_t> r;
        for (std::size_t a : table.clause_atoms[i]) {
            if (!common[comp_of[block_of[a]]])
                r.push_back(a);
            else if (i == 0)
                factor.push_back(a);
        }
        rest.push_back(clause_of(table, r, p.clauses[i].coef));
    }
    Poly left = make_poly({clause_of(table, factor, 1)}, sk);
    return std::make_pair(std::move(left), make_poly(std::move(rest), sk));
}

std::optional<std::pair<Form, Form>> split_sum(const Form& f, SemiringKind sk) {
    if (const auto* p = std::get_if<Poly>(&f)) {
        std::vector<std::vector<VarId>> vars;
        for (const auto& c : p->clauses) vars.push_back(variables(c));
        auto groups = components(vars);
        if (groups.size() < 2) return std::nullopt;
        std::vector<Clause> left;
        std::vector<Clause> right;
        for (std::size_t g = 0; g < groups.size(); ++g)
            for (std::size_t i : groups[g]) (g < groups.size() / 2 ? left : right).push_back(p->clauses[i]);
        return std::make_pair(Form(make_poly(std::move(left), sk)), Form(make_poly(std::move(right), sk)));
    }
    const Module& m = std::get<Module>(f);
    std::vector<std::vector<VarId>> vars;
    for (const auto& t : m.terms) vars.push_back(variables(t.scalar));
    auto groups = components(vars);
    const ExtNat neutral = monoid::neutral(m.kind);
    const bool has_constant = m.constant != neutral;
    const std::size_t pieces = groups.size() + (has_constant ? 1 : 0);
    if (pieces < 2) return std::nullopt;
    // Piece 0 is the constant when there is one.
    const std::size_t half = pieces / 2;
    ExtNat lc = neutral;
    ExtNat rc = neutral;
    std::vector<Term> left;
    std::vector<Term> right;
    std::size_t piece = 0;
    if (has_constant) (piece++ < half ? lc : rc) = m.constant;
    for (const auto& g : groups) {
        auto& side = piece++ < half ? left : right;
        for (std::size_t i : g) side.push_back(m.terms[i]);
    }
    return std::make_pair(Form(make_module(m.kind, lc, std::move(left), sk)),
                          Form(make_module(m.kind, rc, std::move(right), sk)));
}

/// Scalar-action split of a module without constant part. For a single term
/// Phi (x) m the scalar is split as a product when possible; otherwise the
/// result pairs Phi with the constant module m.
std::optional<std::pair<Form, Form>> split_scale(const Form& f, SemiringKind sk) {
    const auto* m = std::get_if<Module>(&f);
    if (!m || m->terms.empty() || m->constant != monoid::neutral(m->kind)) return std::nullopt;
    if (m->terms.size() == 1) {
        const Term& t = m->terms[0];
        if (auto ps = split_product(t.scalar, sk))
            return std::make_pair(Form(ps->first), Form(make_module(m->kind, monoid::neutral(m->kind),
                                                                    {Term{ps->second, t.value}}, sk)));
        return std::make_pair(Form(t.scalar),
                              Form(make_module(m->kind, monoid::neutral(m->kind),
                                               {Term{poly_constant(1, sk), t.value}}, sk)));
    }

    // Atoms present in every clause of every scalar and whose variables occur
    // nowhere else.
    AtomTable table;
    for (const auto& t : m->terms)
        for (const auto& c : t.scalar.clauses) table.add_clause(c);
    std::vector<std::size_t> seen(table.atoms.size(), 0);
    for (const auto& atoms : table.clause_atoms)
        for (std::size_t a : atoms) ++seen[a];
    const std::size_t nclauses = table.clause_atoms.size();
    std::vector<bool> common(table.atoms.size(), false);
    for (std::size_t a = 0; a < table.atoms.size(); ++a) common[a] = seen[a] == nclauses;
    std::map<VarId, bool> var_elsewhere;
    for (std::size_t a = 0; a < table.atoms.size(); ++a)
        if (!common[a])
            for (VarId x : table.atoms[a].vars) var_elsewhere[x] = true;
    std::vector<std::size_t> factor;
    for (std::size_t a = 0; a < table.atoms.size(); ++a) {
        if (!common[a]) continue;
        const auto& vs = table.atoms[a].vars;
        if (std::any_of(vs.begin(), vs.end(), [&](VarId x) { return var_elsewhere.count(x) != 0; })) {
            common[a] = false;
            continue;
        }
        factor.push_back(a);
    }
    // Dropping a candidate may expose a variable it shares with another one.
    bool changed = true;
    while (changed) {
        changed = false;
        std::map<VarId, bool> outside;
        for (std::size_t a = 0; a < table.atoms.size(); ++a)
            if (!common[a])
                for (VarId x : table.atoms[a].vars) outside[x] = true;
        for (std::size_t a : factor) {
            if (!common[a]) continue;
            const auto& vs = table.atoms[a].vars;
            if (std::any_of(vs.begin(), vs.end(), [&](VarId x) { return outside.count(x) != 0; })) {
                common[a] = false;
                changed = true;
            }
        }
    }
    std::erase_if(factor, [&](std::size_t a) { return !common[a]; });
    if (factor.empty()) return std::nullopt;

    std::vector<Term> rest;
    std::size_t ci = 0;
    for (const auto& t : m->terms) {
        std::vector<Clause> clauses;
        for (const auto& c : t.scalar.clauses) {
            std::vector<std::size_t> r;
            for (std::size_t a : table.clause_atoms[ci])
                if (!common[a]) r.push_back(a);
            clauses.push_back(clause_of(table, r, c.coef));
            ++ci;
        }
        rest.push_back(Term{make_poly(std::move(clauses), sk), t.value});
    }
    std::sort(factor.begin(), factor.end());
    return std::make_pair(Form(make_poly({clause_of(table, factor, 1)}, sk)),
                          Form(make_module(m->kind, monoid::neutral(m->kind), std::move(rest), sk)));
}

std::optional<std::pair<Form, Form>> split_compare(const Form& f) {
    const auto* p = std::get_if<Poly>(&f);
    if (!p || p->clauses.size() != 1) return std::nullopt;
    const Clause& c = p->clauses[0];
    if (c.coef != 1 || !c.vars.empty() || c.conds.size() != 1) return std::nullopt;
    const Cond& cond = *c.conds[0];
    if (!disjoint(variables(cond.lhs), variables(cond.rhs))) return std::nullopt;
    return std::make_pair(cond.lhs, cond.rhs);
}

// --- pruning ----------------------------------------------------------------

struct Interval {
    ExtNat lo;
    ExtNat hi;
};

Interval interval(const Form& f, SemiringKind sk) {
    if (is_constant(f)) {
        ExtNat v = constant_value(f);
        return {v, v};
    }
    if (std::holds_alternative<Poly>(f))
        return {ExtNat(0), sk == SemiringKind::Boolean ? ExtNat(1) : ExtNat::pos_inf()};
    const Module& m = std::get<Module>(f);
    const Interval unknown{ExtNat::neg_inf(), ExtNat::pos_inf()};
    switch (m.kind) {
    case MonoidKind::Min: {
        ExtNat lo = m.constant;
        for (const auto& t : m.terms) lo = std::min(lo, t.value);
        return {lo, m.constant};
    }
    case MonoidKind::Max: {
        ExtNat hi = m.constant;
        for (const auto& t : m.terms) hi = std::max(hi, t.value);
        return {m.constant, hi};
    }
    case MonoidKind::Sum:
    case MonoidKind::Count: {
        if (!m.constant.is_finite()) return unknown;
        ExtNat hi = m.constant;
        for (const auto& t : m.terms) {
            if (!t.value.is_finite()) return unknown;
            if (sk == SemiringKind::Natural && t.value != ExtNat(0)) return {m.constant, ExtNat::pos_inf()};
            try {
                hi = checked_add(hi, t.value);
            } catch (const Error&) {
                hi = ExtNat::pos_inf();
            }
        }
        return {m.constant, hi};
    }
    case MonoidKind::Prod: {
        if (!m.constant.is_finite()) return unknown;
        bool has_zero = false;
        for (const auto& t : m.terms) {
            if (!t.value.is_finite()) return unknown;
            has_zero = has_zero || t.value == ExtNat(0);
        }
        ExtNat lo = has_zero ? ExtNat(0) : m.constant;
        ExtNat hi = m.constant;
        if (sk == SemiringKind::Natural) return {lo, ExtNat::pos_inf()};
        for (const auto& t : m.terms) {
            try {
                hi = checked_mul(hi, t.value);
            } catch (const Error&) {
                hi = ExtNat::pos_inf();
            }
        }
        return {lo, std::max(hi, m.constant)};
    }
    }
    return unknown;
}

std::optional<bool> decide(const Interval& l, Theta theta, const Interval& r) {
    switch (theta) {
    case Theta::Le:
        if (l.hi <= r.lo) return true;
        if (l.lo > r.hi) return false;
        return std::nullopt;
    case Theta::Lt:
        if (l.hi < r.lo) return true;
        if (l.lo >= r.hi) return false;
        return std::nullopt;
    case Theta::Ge: return decide(r, Theta::Le, l);
    case Theta::Gt: return decide(r, Theta::Lt, l);
    case Theta::Eq:
        if (l.lo == l.hi && r.lo == r.hi && l.lo == r.lo) return true;
        if (l.hi < r.lo || r.hi < l.lo) return false;
        return std::nullopt;
    case Theta::Ne:
        if (auto eq = decide(l, Theta::Eq, r)) return !*eq;
        return std::nullopt;
    }
    return std::nullopt;
}

/// Drops MIN/MAX terms of the left side that cannot affect [side theta r].
Form drop_terms(const Form& side, Theta theta, const Interval& r, SemiringKind sk) {
    const auto* m = std::get_if<Module>(&side);
    if (!m || m->terms.empty()) return side;
    std::function<bool(const ExtNat&)> irrelevant;
    if (m->kind == MonoidKind::Min) {
        if (theta == Theta::Lt || theta == Theta::Ge)
            irrelevant = [&](const ExtNat& v) { return v >= r.hi; };
        else
            irrelevant = [&](const ExtNat& v) { return v > r.hi; };
    } else if (m->kind == MonoidKind::Max) {
        if (theta == Theta::Gt || theta == Theta::Le)
            irrelevant = [&](const ExtNat& v) { return v <= r.lo; };
        else
            irrelevant = [&](const ExtNat& v) { return v < r.lo; };
    } else {
        return side;
    }
    std::vector<Term> kept;
    for (const auto& t : m->terms)
        if (!irrelevant(t.value)) kept.push_back(t);
    if (kept.size() == m->terms.size()) return side;
    return make_module(m->kind, m->constant, std::move(kept), sk);
}

Poly prune_condition(const Form& lhs, Theta theta, const Form& rhs, SemiringKind sk) {
    Form l = prune(lhs, sk);
    Form r = prune(rhs, sk);
    l = drop_terms(l, theta, interval(r, sk), sk);
    r = drop_terms(r, mirror(theta), interval(l, sk), sk);
    if (auto d = decide(interval(l, sk), theta, interval(r, sk))) return poly_constant(*d ? 1 : 0, sk);
    return make_conditional(std::move(l), theta, std::move(r), sk);
}

}  // namespace

Form prune(const Form& f, SemiringKind sk) {
    if (const auto* p = std::get_if<Poly>(&f)) {
        std::vector<Clause> out;
        for (const auto& c : p->clauses) {
            if (c.conds.empty()) {
                out.push_back(c);
                continue;
            }
            Clause base = c;
            base.conds.clear();
            Poly acc = make_poly({base}, sk);
            for (const auto& cond : c.conds) {
                acc = poly_mul(acc, prune_condition(cond->lhs, cond->theta, cond->rhs, sk), sk);
                if (acc.is_zero()) break;
            }
            out.insert(out.end(), acc.clauses.begin(), acc.clauses.end());
        }
        return make_poly(std::move(out), sk);
    }
    const Module& m = std::get<Module>(f);
    std::vector<Term> terms;
    for (const auto& t : m.terms) terms.push_back(Term{std::get<Poly>(prune(Form(t.scalar), sk)), t.value});
    return make_module(m.kind, m.constant, std::move(terms), sk);
}

Operand prune(const Operand& expr, SemiringKind sk) {
    VarIndex index(variables(expr));
    return to_expression(prune(normalize(expr, index, sk), sk), index);
}

std::optional<std::pair<Form, Form>> partition_independent(const Form& f, SplitRule rule, SemiringKind sk) {
    switch (rule) {
    case SplitRule::Sum: return split_sum(f, sk);
    case SplitRule::Product: {
        const auto* p = std::get_if<Poly>(&f);
        if (!p) return std::nullopt;
        auto r = split_product(*p, sk);
        if (!r) return std::nullopt;
        return std::make_pair(Form(std::move(r->first)), Form(std::move(r->second)));
    }
    case SplitRule::Scale: return split_scale(f, sk);
    case SplitRule::Compare: return split_compare(f);
    }
    return std::nullopt;
}

std::optional<std::pair<Operand, Operand>> partition_independent(const Operand& expr, SplitRule rule,
                                                                 SemiringKind sk) {
    VarIndex index(variables(expr));
    auto r = partition_independent(normalize(expr, index, sk), rule, sk);
    if (!r) return std::nullopt;
    return std::make_pair(to_expression(r->first, index), to_expression(r->second, index));
}

VarId choose_branch_variable(const Form& f) {
    std::map<VarId, std::size_t> counts;
    count_occurrences(f, counts);
    if (counts.empty()) throw Error(ErrorCode::NoVariables, "expression has no variables to branch on");
    auto best = counts.begin();
    for (auto it = counts.begin(); it != counts.end(); ++it)
        if (it->second > best->second) best = it;
    return best->first;
}

std::string choose_branch_variable(const Operand& expr, SemiringKind sk) {
    VarIndex index(variables(expr));
    return index.name(choose_branch_variable(normalize(expr, index, sk)));
}

// --- compilation ------------------------------------------------------------

class Compiler {
public:
    Compiler(DTree& tree, const CompileOptions& options) : tree_(tree), options_(options) {}

    DTree::NodeId compile(const Form& f) {
        using K = DTree::Kind;
        const SemiringKind sk = tree_.sk_;
        if (is_constant(f)) {
            DTree::Node n{};
            if (const auto* m = std::get_if<Module>(&f)) {
                n.kind = K::MonoidConst;
                n.monoid = m->kind;
                n.value = m->constant;
            } else {
                n.kind = K::SemiringConst;
                n.scalar = std::get<Poly>(f).constant_value();
            }
            return add(std::move(n));
        }
        if (const auto* p = std::get_if<Poly>(&f)) {
            const auto& cs = p->clauses;
            if (cs.size() == 1 && cs[0].coef == 1 && cs[0].vars.size() == 1 && cs[0].conds.empty()) {
                DTree::Node n{};
                n.kind = K::Variable;
                n.var = cs[0].vars[0].var;
                n.exponent = cs[0].vars[0].exp;
                return add(std::move(n));
            }
        }
        if (auto s = split_sum(f, sk)) {
            DTree::Node n{};
            n.kind = K::Sum;
            if (const auto* m = std::get_if<Module>(&f)) n.monoid = m->kind;
            n.children = {compile(s->first), compile(s->second)};
            return add(std::move(n));
        }
        if (const auto* p = std::get_if<Poly>(&f)) {
            if (auto s = split_product(*p, sk)) {
                DTree::Node n{};
                n.kind = K::Product;
                n.children = {compile(s->first), compile(s->second)};
                return add(std::move(n));
            }
        }
        if (auto s = split_scale(f, sk)) {
            const MonoidKind kind = std::get<Module>(f).kind;
            DTree::Node n{};
            n.kind = K::Scale;
            n.monoid = kind;
            DTree::NodeId right;
            if (is_constant(s->second)) {
                DTree::Node leaf{};
                leaf.kind = K::ScaledConst;
                leaf.monoid = kind;
                leaf.scalar = 1;
                leaf.value = constant_value(s->second);
                right = add(std::move(leaf));
            } else {
                right = compile(s->second);
            }
            n.children = {compile(s->first), right};
            return add(std::move(n));
        }
        if (auto s = split_compare(f)) {
            DTree::Node n{};
            n.kind = K::Compare;
            n.theta = std::get<Poly>(f).clauses[0].conds[0]->theta;
            n.children = {compile(s->first), compile(s->second)};
            return add(std::move(n));
        }
        const VarId x = choose_branch_variable(f);
        DTree::Node n{};
        n.kind = K::Mutex;
        n.var = x;
        for (const auto& [v, pv] : tree_.dists_.at(x).entries()) {
            Form sub = substitute(f, x, v.value(), sk);
            if (options_.prune_after_substitution) sub = prune(sub, sk);
            n.children.push_back(compile(sub));
            n.branch_values.push_back(v.value());
            n.branch_probs.push_back(pv);
        }
        return add(std::move(n));
    }

    DTree::NodeId compile_joint(std::vector<std::pair<std::size_t, Form>> items) {
        using K = DTree::Kind;
        const SemiringKind sk = tree_.sk_;
        std::vector<std::size_t> all_slots;
        for (const auto& it : items) all_slots.push_back(it.first);

        if (items.size() == 1 && !is_constant(items[0].second)) {
            DTree::Node n{};
            n.kind = K::JointLift;
            n.slots = all_slots;
            n.children = {compile(items[0].second)};
            return add(std::move(n));
        }

        std::vector<std::pair<std::size_t, Form>> constants;
        std::vector<std::pair<std::size_t, Form>> open;
        for (auto& it : items) (is_constant(it.second) ? constants : open).push_back(std::move(it));

        auto constant_node = [&]() {
            DTree::Node n{};
            n.kind = K::JointConst;
            for (const auto& [slot, f] : constants) {
                n.slots.push_back(slot);
                n.tuple.push_back(constant_value(f));
            }
            return add(std::move(n));
        };
        if (open.empty()) return constant_node();

        std::vector<std::vector<VarId>> vars;
        for (const auto& it : open) vars.push_back(variables(it.second));
        auto groups = components(vars);
        if (groups.size() > 1 || !constants.empty()) {
            DTree::Node n{};
            n.kind = K::JointProduct;
            n.slots = all_slots;
            if (!constants.empty()) n.children.push_back(constant_node());
            for (const auto& g : groups) {
                std::vector<std::pair<std::size_t, Form>> sub;
                for (std::size_t i : g) sub.push_back(open[i]);
                n.children.push_back(compile_joint(std::move(sub)));
            }
            return add(std::move(n));
        }

        std::map<VarId, std::size_t> counts;
        for (const auto& it : open) count_occurrences(it.second, counts);
        auto best = counts.begin();
        for (auto it = counts.begin(); it != counts.end(); ++it)
            if (it->second > best->second) best = it;
        const VarId x = best->first;
        DTree::Node n{};
        n.kind = K::JointMutex;
        n.var = x;
        n.slots = all_slots;
        for (const auto& [v, pv] : tree_.dists_.at(x).entries()) {
            std::vector<std::pair<std::size_t, Form>> sub;
            for (const auto& it : open) {
                Form s = substitute(it.second, x, v.value(), sk);
                if (options_.prune_after_substitution) s = prune(s, sk);
                sub.emplace_back(it.first, std::move(s));
            }
            n.children.push_back(compile_joint(std::move(sub)));
            n.branch_values.push_back(v.value());
            n.branch_probs.push_back(pv);
        }
        return add(std::move(n));
    }

    void finish(DTree::NodeId root, std::size_t width) {
        tree_.root_ = root;
        tree_.width_ = width;
    }

    static void setup(DTree& tree, const std::set<std::string>& names, const VarDistributions& dists,
                      SemiringKind sk) {
        tree.sk_ = sk;
        tree.index_ = VarIndex(names);
        for (const auto& name : names) {
            auto it = dists.find(name);
            if (it == dists.end())
                throw Error(ErrorCode::MissingDistribution, "no distribution for variable " + name);
            validate_variable_distribution(name, it->second, sk);
            tree.dists_.push_back(it->second);
        }
    }

private:
    DTree::NodeId add(DTree::Node n) {
        if (options_.node_budget != 0 && tree_.nodes_.size() >= options_.node_budget)
            throw Error(ErrorCode::BudgetExceeded,
                        "d-tree exceeds the budget of " + std::to_string(options_.node_budget) + " nodes");
        tree_.nodes_.push_back(std::move(n));
        return tree_.nodes_.size() - 1;
    }

    DTree& tree_;
    const CompileOptions& options_;
};

std::size_t DTree::count(Kind kind) const {
    return static_cast<std::size_t>(
        std::count_if(nodes_.begin(), nodes_.end(), [kind](const Node& n) { return n.kind == kind; }));
}

DTree compile(const Operand& expr, const VarDistributions& dists, SemiringKind sk, const CompileOptions& options) {
    DTree tree;
    Compiler::setup(tree, variables(expr), dists, sk);
    Form f = normalize(expr, tree.index(), sk);
    if (options.prune) f = prune(f, sk);
    Compiler c(tree, options);
    c.finish(c.compile(f), 0);
    return tree;
}

DTree compile_joint(const std::vector<Operand>& exprs, const VarDistributions& dists, SemiringKind sk,
                    const CompileOptions& options) {
    std::set<std::string> names;
    for (const auto& e : exprs) {
        auto v = variables(e);
        names.insert(v.begin(), v.end());
    }
    DTree tree;
    Compiler::setup(tree, names, dists, sk);
    std::vector<std::pair<std::size_t, Form>> items;
    for (std::size_t i = 0; i < exprs.size(); ++i) {
        Form f = normalize(exprs[i], tree.index(), sk);
        if (options.prune) f = prune(f, sk);
        items.emplace_back(i, std::move(f));
    }
    Compiler c(tree, options);
    if (items.empty()) {
        c.finish(c.compile_joint({}), 0);
        return tree;
    }
    c.finish(c.compile_joint(std::move(items)), exprs.size());
    return tree;
}

// --- distributions ----------------------------------------------------------

namespace {

Distribution node_distribution(const DTree& d, DTree::NodeId id) {
    using K = DTree::Kind;
    const DTree::Node& n = d.node(id);
    const SemiringKind sk = d.semiring();
    switch (n.kind) {
    case K::Variable: {
        const Distribution& px = d.variable_distribution(n.var);
        if (n.exponent == 1) return px;
        std::vector<Distribution::Entry> out;
        for (const auto& [v, pv] : px.entries()) out.emplace_back(ExtNat(checked_pow(v.value(), n.exponent)), pv);
        return Distribution::from_entries(std::move(out));
    }
    case K::SemiringConst: return Distribution::point(ExtNat(n.scalar));
    case K::MonoidConst: return Distribution::point(n.value);
    case K::ScaledConst: return Distribution::point(monoid::scale(*n.monoid, sk, n.scalar, n.value));
    case K::Sum: {
        Distribution a = node_distribution(d, n.children[0]);
        Distribution b = node_distribution(d, n.children[1]);
        if (n.monoid) {
            const MonoidKind kind = *n.monoid;
            return convolve(a, b, [kind](ExtNat x, ExtNat y) { return monoid::plus(kind, x, y); });
        }
        return convolve(a, b, [sk](ExtNat x, ExtNat y) { return ExtNat(semiring::add(sk, x.value(), y.value())); });
    }
    case K::Product: {
        Distribution a = node_distribution(d, n.children[0]);
        Distribution b = node_distribution(d, n.children[1]);
        return convolve(a, b, [sk](ExtNat x, ExtNat y) { return ExtNat(semiring::mul(sk, x.value(), y.value())); });
    }
    case K::Scale: {
        Distribution s = node_distribution(d, n.children[0]);
        Distribution m = node_distribution(d, n.children[1]);
        const MonoidKind kind = *n.monoid;
        return convolve(s, m, [kind, sk](ExtNat x, ExtNat y) { return monoid::scale(kind, sk, x.value(), y); });
    }
    case K::Compare:
        return compare_convolve(node_distribution(d, n.children[0]), node_distribution(d, n.children[1]), n.theta);
    case K::Mutex: {
        std::vector<Distribution> children;
        for (auto c : n.children) children.push_back(node_distribution(d, c));
        return mix(n.branch_probs, children);
    }
    default: throw Error(ErrorCode::InvalidQuery, "joint node in a scalar distribution");
    }
}

JointDistribution node_joint(const DTree& d, DTree::NodeId id) {
    using K = DTree::Kind;
    const DTree::Node& n = d.node(id);
    switch (n.kind) {
    case K::JointLift: {
        const Distribution scalar = node_distribution(d, n.children[0]);
        std::vector<JointDistribution::Entry> out;
        for (const auto& [v, pv] : scalar.entries()) out.emplace_back(Tuple{v}, pv);
        return JointDistribution::from_entries(std::move(out));
    }
    case K::JointConst: return JointDistribution::point(n.tuple);
    case K::JointMutex: {
        std::vector<JointDistribution> children;
        for (auto c : n.children) children.push_back(node_joint(d, c));
        return mix(n.branch_probs, children);
    }
    case K::JointProduct: {
        // Each child covers a subset of the slots; interleave by position.
        JointDistribution acc = JointDistribution::point({});
        std::vector<std::size_t> acc_slots;
        for (auto c : n.children) {
            const auto& cs = d.node(c).slots;
            std::vector<std::size_t> merged;
            std::merge(acc_slots.begin(), acc_slots.end(), cs.begin(), cs.end(), std::back_inserter(merged));
            acc = convolve(acc, node_joint(d, c), [&](const Tuple& a, const Tuple& b) {
                Tuple t;
                t.reserve(a.size() + b.size());
                std::size_t i = 0;
                std::size_t j = 0;
                for (std::size_t slot : merged) {
                    if (i < acc_slots.size() && acc_slots[i] == slot)
                        t.push_back(a[i++]);
                    else
                        t.push_back(b[j++]);
                }
                return t;
            });
            acc_slots = std::move(merged);
        }
        return acc;
    }
    default: throw Error(ErrorCode::InvalidQuery, "scalar node in a joint distribution");
    }
}

}  // namespace

Distribution distribution(const DTree& d) {
    if (d.width() != 0) throw Error(ErrorCode::InvalidQuery, "joint d-tree has no scalar distribution");
    return node_distribution(d, d.root());
}

JointDistribution joint_distribution(const DTree& d) {
    if (d.width() == 0) {
        if (d.size() == 0 || d.node(d.root()).kind == DTree::Kind::JointConst) return JointDistribution::point({});
        const Distribution scalar = distribution(d);
        std::vector<JointDistribution::Entry> out;
        for (const auto& [v, pv] : scalar.entries()) out.emplace_back(Tuple{v}, pv);
        return JointDistribution::from_entries(std::move(out));
    }
    return node_joint(d, d.root());
}

// --- evaluation, validation, display -----------------------------------------

namespace {

ExtNat evaluate_node(const DTree& d, DTree::NodeId id, const std::vector<std::uint64_t>& values) {
    using K = DTree::Kind;
    const DTree::Node& n = d.node(id);
    const SemiringKind sk = d.semiring();
    auto child = [&](std::size_t i) { return evaluate_node(d, n.children[i], values); };
    switch (n.kind) {
    case K::Variable: return ExtNat(checked_pow(values[n.var], n.exponent));
    case K::SemiringConst: return ExtNat(n.scalar);
    case K::MonoidConst: return n.value;
    case K::ScaledConst: return monoid::scale(*n.monoid, sk, n.scalar, n.value);
    case K::Sum:
        if (n.monoid) return monoid::plus(*n.monoid, child(0), child(1));
        return ExtNat(semiring::add(sk, child(0).value(), child(1).value()));
    case K::Product: return ExtNat(semiring::mul(sk, child(0).value(), child(1).value()));
    case K::Scale: return monoid::scale(*n.monoid, sk, child(0).value(), child(1));
    case K::Compare: return ExtNat(compare(child(0), n.theta, child(1)) ? 1 : 0);
    case K::Mutex:
        for (std::size_t i = 0; i < n.branch_values.size(); ++i)
            if (n.branch_values[i] == values[n.var]) return child(i);
        throw Error(ErrorCode::InvalidDistribution,
                    "value " + std::to_string(values[n.var]) + " of " + d.index().name(n.var) + " has probability 0");
    default: throw Error(ErrorCode::InvalidQuery, "joint node in scalar evaluation");
    }
}

std::vector<VarId> collect_vars(const DTree& d, DTree::NodeId id, std::vector<std::string>& problems) {
    using K = DTree::Kind;
    const DTree::Node& n = d.node(id);
    std::vector<std::vector<VarId>> child_vars;
    for (auto c : n.children) child_vars.push_back(collect_vars(d, c, problems));
    std::vector<VarId> out;
    auto label = [&] { return "node " + std::to_string(id); };
    switch (n.kind) {
    case K::Variable: out.push_back(n.var); break;
    case K::Sum:
    case K::Product:
    case K::Scale:
    case K::Compare:
        if (n.children.size() != 2) problems.push_back(label() + ": binary node with " + std::to_string(n.children.size()) + " children");
        if (child_vars.size() == 2 && !disjoint(child_vars[0], child_vars[1]))
            problems.push_back(label() + ": children share variables");
        break;
    case K::JointProduct:
        for (std::size_t i = 0; i < child_vars.size(); ++i)
            for (std::size_t j = i + 1; j < child_vars.size(); ++j)
                if (!disjoint(child_vars[i], child_vars[j])) problems.push_back(label() + ": children share variables");
        break;
    case K::Mutex:
    case K::JointMutex: {
        for (const auto& cv : child_vars)
            if (std::binary_search(cv.begin(), cv.end(), n.var))
                problems.push_back(label() + ": " + d.index().name(n.var) + " occurs below its own case split");
        std::vector<std::uint64_t> support;
        for (const auto& [v, pv] : d.variable_distribution(n.var).entries()) support.push_back(v.value());
        if (support != n.branch_values) problems.push_back(label() + ": branches do not match the support of " + d.index().name(n.var));
        if (n.children.size() != n.branch_values.size()) problems.push_back(label() + ": branch count mismatch");
        out.push_back(n.var);
        break;
    }
    default: break;
    }
    for (const auto& cv : child_vars) {
        std::vector<VarId> merged;
        std::set_union(out.begin(), out.end(), cv.begin(), cv.end(), std::back_inserter(merged));
        out = std::move(merged);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::string label(const DTree& d, const DTree::Node& n) {
    using K = DTree::Kind;
    auto mon = [&] { return n.monoid ? std::string(to_string(*n.monoid)) : std::string(to_string(d.semiring())); };
    switch (n.kind) {
    case K::Sum: return "sum " + mon();
    case K::Product: return "product";
    case K::Scale: return "scale " + mon();
    case K::Compare: return "compare " + std::string(to_string(n.theta));
    case K::Mutex: return "mutex " + d.index().name(n.var);
    case K::Variable:
        return "var " + d.index().name(n.var) + (n.exponent != 1 ? "^" + std::to_string(n.exponent) : "");
    case K::SemiringConst: return "const " + std::to_string(n.scalar);
    case K::MonoidConst: return "const " + mon() + " " + n.value.to_string();
    case K::ScaledConst: return "const " + std::to_string(n.scalar) + " (x) " + n.value.to_string() + " " + mon();
    case K::JointProduct: return "joint product";
    case K::JointMutex: return "joint mutex " + d.index().name(n.var);
    case K::JointConst: {
        std::string s = "joint const (";
        for (std::size_t i = 0; i < n.tuple.size(); ++i) s += (i ? "," : "") + n.tuple[i].to_string();
        return s + ")";
    }
    case K::JointLift: return "slot " + std::to_string(n.slots.empty() ? 0 : n.slots[0]);
    }
    return "?";
}

void dump_node(const DTree& d, DTree::NodeId id, int depth, std::ostringstream& out, const std::string& prefix) {
    const DTree::Node& n = d.node(id);
    out << std::string(static_cast<std::size_t>(depth) * 2, ' ') << prefix << label(d, n) << '\n';
    for (std::size_t i = 0; i < n.children.size(); ++i) {
        std::string p;
        if (!n.branch_values.empty())
            p = "[" + std::to_string(n.branch_values[i]) + " p=" + std::to_string(n.branch_probs[i]) + "] ";
        dump_node(d, n.children[i], depth + 1, out, p);
    }
}

}  // namespace

ExtNat evaluate(const DTree& d, const Valuation& nu) {
    std::vector<std::uint64_t> values(d.index().size(), 0);
    for (VarId x = 0; x < d.index().size(); ++x) {
        auto v = nu.get(d.index().name(x));
        if (!v) throw Error(ErrorCode::UnboundVariable, "no value for variable " + d.index().name(x));
        values[x] = *v;
    }
    return evaluate_node(d, d.root(), values);
}

std::vector<std::string> validate(const DTree& d) {
    std::vector<std::string> problems;
    if (d.size() == 0) return problems;
    collect_vars(d, d.root(), problems);
    for (std::size_t i = 0; i < d.size(); ++i)
        for (auto c : d.node(i).children)
            if (c >= i) problems.push_back("node " + std::to_string(i) + ": child does not precede its parent");
    return problems;
}

std::string dump(const DTree& d) {
    std::ostringstream out;
    if (d.size() != 0) dump_node(d, d.root(), 0, out, "");
    return out.str();
}

std::string dump_dot(const DTree& d) {
    std::ostringstream out;
    out << "digraph dtree {\n  node [shape=box, fontname=\"monospace\"];\n";
    for (std::size_t i = 0; i < d.size(); ++i) {
        const DTree::Node& n = d.node(i);
        out << "  n" << i << " [label=\"" << label(d, n) << "\"];\n";
        for (std::size_t k = 0; k < n.children.size(); ++k) {
            out << "  n" << i << " -> n" << n.children[k];
            if (!n.branch_values.empty()) out << " [label=\"" << n.branch_values[k] << "\"]";
            out << ";\n";
        }
    }
    out << "}\n";
    return out.str();
}

// --- Boolean reduction -------------------------------------------------------

namespace {

SemiringExpr booleanize(const SemiringExpr& e) {
    using K = SemiringExpr::Kind;
    switch (e.kind()) {
    case K::Variable: return e;
    case K::Constant: return SemiringExpr::constant(e.value() != 0 ? 1 : 0);
    case K::Sum:
    case K::Product: {
        std::vector<SemiringExpr> children;
        for (const auto& c : e.children()) children.push_back(booleanize(c));
        return e.kind() == K::Sum ? SemiringExpr::sum(std::move(children)) : SemiringExpr::product(std::move(children));
    }
    case K::Conditional:
        throw Error(ErrorCode::WrongMonoid, "nested comparisons depend on natural values; cannot reduce to Boolean");
    }
    return e;
}

SemimoduleExpr booleanize(const SemimoduleExpr& m) {
    if (!monoid::is_selective(m.monoid()))
        throw Error(ErrorCode::WrongMonoid,
                    "Boolean reduction needs MIN or MAX, not " + std::string(to_string(m.monoid())));
    std::vector<SemimoduleExpr::Term> terms;
    for (const auto& t : m.terms())
        terms.push_back(SemimoduleExpr::Term{t.scalar ? std::optional(booleanize(*t.scalar)) : std::nullopt, t.value});
    return SemimoduleExpr(m.monoid(), std::move(terms));
}

Operand booleanize_side(const Operand& side) {
    if (const auto* m = std::get_if<SemimoduleExpr>(&side)) return booleanize(*m);
    const auto& phi = std::get<SemiringExpr>(side);
    if (phi.kind() != SemiringExpr::Kind::Constant)
        throw Error(ErrorCode::WrongMonoid, "comparison side is neither MIN/MAX nor a constant");
    return phi;
}

}  // namespace

std::pair<Operand, VarDistributions> reduce_to_boolean(const Operand& expr, const VarDistributions& dists) {
    Operand out = expr;
    if (const auto* m = std::get_if<SemimoduleExpr>(&expr)) {
        out = booleanize(*m);
    } else {
        const auto& phi = std::get<SemiringExpr>(expr);
        if (phi.kind() != SemiringExpr::Kind::Conditional)
            throw Error(ErrorCode::WrongMonoid, "Boolean reduction needs a MIN/MAX expression or a comparison of them");
        out = SemiringExpr::conditional(booleanize_side(phi.lhs()), phi.theta(), booleanize_side(phi.rhs()));
    }
    VarDistributions reduced;
    for (const auto& [name, d] : dists) {
        double p0 = d.probability(ExtNat(0));
        reduced.emplace(name, Distribution::from_entries({{ExtNat(0), p0}, {ExtNat(1), 1.0 - p0}}));
    }
    return {std::move(out), std::move(reduced)};
}

}  // namespace pvcagg
