#include "pvcagg/canonical.hpp"

#include <algorithm>

#include "pvcagg/error.hpp"
#include "pvcagg/syntax.hpp"

namespace pvcagg {

VarIndex::VarIndex(const std::set<std::string>& names) : names_(names.begin(), names.end()) {
    for (VarId i = 0; i < names_.size(); ++i) ids_.emplace(names_[i], i);
}

VarId VarIndex::id(const std::string& name) const {
    auto it = ids_.find(name);
    if (it == ids_.end()) throw Error(ErrorCode::UnboundVariable, "unknown variable " + name);
    return it->second;
}

namespace {

template <class T>
int three_way(const T& a, const T& b) {
    if (a < b) return -1;
    if (b < a) return 1;
    return 0;
}

int compare_poly(const Poly& a, const Poly& b) {
    const std::size_t n = std::min(a.clauses.size(), b.clauses.size());
    for (std::size_t i = 0; i < n; ++i) {
        if (int c = compare_monomials(a.clauses[i], b.clauses[i])) return c;
        if (int c = three_way(a.clauses[i].coef, b.clauses[i].coef)) return c;
    }
    return three_way(a.clauses.size(), b.clauses.size());
}

std::string key_of(const Form& f);

std::string key_of(const Poly& p) {
    if (p.clauses.empty()) return "0";
    std::string out;
    for (std::size_t i = 0; i < p.clauses.size(); ++i) {
        const Clause& c = p.clauses[i];
        if (i) out += '+';
        out += std::to_string(c.coef);
        for (const auto& vp : c.vars) {
            out += "*#" + std::to_string(vp.var);
            if (vp.exp != 1) out += '^' + std::to_string(vp.exp);
        }
        for (const auto& cond : c.conds) out += '*' + cond->key;
    }
    return out;
}

std::string key_of(const Module& m) {
    std::string out(to_string(m.kind));
    out += '{' + m.constant.to_string();
    for (const auto& t : m.terms) out += ";(" + key_of(t.scalar) + ")@" + t.value.to_string();
    return out + '}';
}

std::string key_of(const Form& f) {
    return std::visit([](const auto& x) { return key_of(x); }, f);
}

void sort_clause(Clause& c) {
    std::sort(c.vars.begin(), c.vars.end());
    std::vector<VarPower> merged;
    for (const auto& vp : c.vars) {
        if (!merged.empty() && merged.back().var == vp.var)
            merged.back().exp += vp.exp;
        else
            merged.push_back(vp);
    }
    c.vars = std::move(merged);
    std::sort(c.conds.begin(), c.conds.end(), [](const CondPtr& a, const CondPtr& b) { return a->key < b->key; });
    c.conds.erase(std::unique(c.conds.begin(), c.conds.end(),
                              [](const CondPtr& a, const CondPtr& b) { return a->key == b->key; }),
                  c.conds.end());
}

bool contains(const std::vector<VarId>& sorted, VarId x) {
    return std::binary_search(sorted.begin(), sorted.end(), x);
}

void merge_into(std::vector<VarId>& out, const std::vector<VarId>& more) {
    std::vector<VarId> merged;
    merged.reserve(out.size() + more.size());
    std::set_union(out.begin(), out.end(), more.begin(), more.end(), std::back_inserter(merged));
    out = std::move(merged);
}

}  // namespace

int compare_monomials(const Clause& a, const Clause& b) {
    if (int c = three_way(a.vars, b.vars)) return c;
    const std::size_t n = std::min(a.conds.size(), b.conds.size());
    for (std::size_t i = 0; i < n; ++i)
        if (int c = three_way(a.conds[i]->key, b.conds[i]->key)) return c;
    return three_way(a.conds.size(), b.conds.size());
}

bool operator==(const Clause& a, const Clause& b) {
    return a.coef == b.coef && compare_monomials(a, b) == 0;
}
bool operator==(const Poly& a, const Poly& b) { return a.clauses == b.clauses; }
bool operator==(const Term& a, const Term& b) { return a.value == b.value && a.scalar == b.scalar; }
bool operator==(const Module& a, const Module& b) {
    return a.kind == b.kind && a.constant == b.constant && a.terms == b.terms;
}

Poly poly_constant(std::uint64_t s, SemiringKind sk) {
    semiring::check_carrier(sk, s);
    Poly p;
    if (s != 0) p.clauses.push_back(Clause{s, {}, {}});
    return p;
}

Poly poly_variable(VarId x) {
    Poly p;
    p.clauses.push_back(Clause{1, {VarPower{x, 1}}, {}});
    return p;
}

Poly make_poly(std::vector<Clause> clauses, SemiringKind sk) {
    std::vector<Clause> kept;
    kept.reserve(clauses.size());
    for (auto& c : clauses) {
        if (c.coef == 0) continue;
        if (sk == SemiringKind::Boolean) {
            c.coef = 1;
            for (auto& vp : c.vars) vp.exp = 1;
        }
        kept.push_back(std::move(c));
    }
    std::sort(kept.begin(), kept.end(), [](const Clause& a, const Clause& b) { return compare_monomials(a, b) < 0; });
    Poly out;
    for (auto& c : kept) {
        if (!out.clauses.empty() && compare_monomials(out.clauses.back(), c) == 0)
            out.clauses.back().coef = semiring::add(sk, out.clauses.back().coef, c.coef);
        else
            out.clauses.push_back(std::move(c));
    }
    if (sk == SemiringKind::Boolean && !out.clauses.empty() && out.clauses.front().is_constant())
        return poly_constant(1, sk);
    return out;
}

Poly poly_add(const Poly& a, const Poly& b, SemiringKind sk) {
    std::vector<Clause> all = a.clauses;
    all.insert(all.end(), b.clauses.begin(), b.clauses.end());
    return make_poly(std::move(all), sk);
}

Poly poly_mul(const Poly& a, const Poly& b, SemiringKind sk) {
    std::vector<Clause> all;
    all.reserve(a.clauses.size() * b.clauses.size());
    for (const auto& x : a.clauses) {
        for (const auto& y : b.clauses) {
            Clause c;
            c.coef = semiring::mul(sk, x.coef, y.coef);
            c.vars = x.vars;
            c.vars.insert(c.vars.end(), y.vars.begin(), y.vars.end());
            c.conds = x.conds;
            c.conds.insert(c.conds.end(), y.conds.begin(), y.conds.end());
            sort_clause(c);
            all.push_back(std::move(c));
        }
    }
    return make_poly(std::move(all), sk);
}

Module make_module(MonoidKind kind, ExtNat constant, std::vector<Term> terms, SemiringKind sk) {
    Module m;
    m.kind = kind;
    m.constant = constant;
    for (auto& t : terms) {
        if (kind == MonoidKind::Count) t.value = ExtNat(1);
        if (t.scalar.is_zero()) continue;
        if (t.scalar.is_constant()) {
            m.constant = monoid::plus(kind, m.constant, monoid::scale(kind, sk, t.scalar.constant_value(), t.value));
            continue;
        }
        if (kind != MonoidKind::Count && t.value == monoid::neutral(kind)) continue;
        m.terms.push_back(std::move(t));
    }
    if (kind == MonoidKind::Prod && m.constant == ExtNat(0)) m.terms.clear();
    if (kind == MonoidKind::Min)
        std::erase_if(m.terms, [&](const Term& t) { return t.value >= m.constant; });
    if (kind == MonoidKind::Max)
        std::erase_if(m.terms, [&](const Term& t) { return t.value <= m.constant; });
    std::sort(m.terms.begin(), m.terms.end(), [](const Term& a, const Term& b) {
        if (int c = compare_poly(a.scalar, b.scalar)) return c < 0;
        return a.value < b.value;
    });
    if (monoid::is_selective(kind))
        m.terms.erase(std::unique(m.terms.begin(), m.terms.end()), m.terms.end());
    return m;
}

Poly make_conditional(Form lhs, Theta theta, Form rhs, SemiringKind sk) {
    if (is_constant(lhs) && is_constant(rhs))
        return poly_constant(compare(constant_value(lhs), theta, constant_value(rhs)) ? 1 : 0, sk);
    auto cond = std::make_shared<Cond>();
    cond->vars = variables(lhs);
    merge_into(cond->vars, variables(rhs));
    cond->key = "[" + key_of(lhs) + std::string(to_string(theta)) + key_of(rhs) + "]";
    cond->lhs = std::move(lhs);
    cond->rhs = std::move(rhs);
    cond->theta = theta;
    Poly p;
    p.clauses.push_back(Clause{1, {}, {std::move(cond)}});
    return p;
}

Poly normalize(const SemiringExpr& expr, const VarIndex& index, SemiringKind sk) {
    using K = SemiringExpr::Kind;
    switch (expr.kind()) {
    case K::Variable: return poly_variable(index.id(expr.name()));
    case K::Constant: return poly_constant(expr.value(), sk);
    case K::Sum: {
        std::vector<Clause> all;
        for (const auto& c : expr.children()) {
            Poly p = normalize(c, index, sk);
            all.insert(all.end(), p.clauses.begin(), p.clauses.end());
        }
        return make_poly(std::move(all), sk);
    }
    case K::Product: {
        Poly acc = poly_constant(1, sk);
        for (const auto& c : expr.children()) {
            acc = poly_mul(acc, normalize(c, index, sk), sk);
            if (acc.is_zero()) break;
        }
        return acc;
    }
    case K::Conditional:
        return make_conditional(normalize(expr.lhs(), index, sk), expr.theta(), normalize(expr.rhs(), index, sk), sk);
    }
    return Poly{};
}

Module normalize(const SemimoduleExpr& expr, const VarIndex& index, SemiringKind sk) {
    const MonoidKind kind = expr.monoid();
    ExtNat constant = monoid::neutral(kind);
    std::vector<Term> terms;
    for (const auto& t : expr.terms()) {
        if (t.scalar)
            terms.push_back(Term{normalize(*t.scalar, index, sk), t.value});
        else
            constant = monoid::plus(kind, constant, t.value);
    }
    return make_module(kind, constant, std::move(terms), sk);
}

Form normalize(const Operand& expr, const VarIndex& index, SemiringKind sk) {
    if (const auto* phi = std::get_if<SemiringExpr>(&expr)) return normalize(*phi, index, sk);
    return normalize(std::get<SemimoduleExpr>(expr), index, sk);
}

bool is_constant(const Form& f) {
    return std::visit([](const auto& x) { return x.is_constant(); }, f);
}

ExtNat constant_value(const Form& f) {
    if (const auto* p = std::get_if<Poly>(&f)) return ExtNat(p->constant_value());
    return std::get<Module>(f).constant;
}

std::vector<VarId> variables(const Clause& c) {
    std::vector<VarId> out;
    out.reserve(c.vars.size());
    for (const auto& vp : c.vars) out.push_back(vp.var);
    for (const auto& cond : c.conds) merge_into(out, cond->vars);
    return out;
}

std::vector<VarId> variables(const Poly& p) {
    std::vector<VarId> out;
    for (const auto& c : p.clauses) merge_into(out, variables(c));
    return out;
}

std::vector<VarId> variables(const Module& m) {
    std::vector<VarId> out;
    for (const auto& t : m.terms) merge_into(out, variables(t.scalar));
    return out;
}

std::vector<VarId> variables(const Form& f) {
    return std::visit([](const auto& x) { return variables(x); }, f);
}

void count_occurrences(const Form& f, std::map<VarId, std::size_t>& counts) {
    if (const auto* p = std::get_if<Poly>(&f)) {
        for (const auto& c : p->clauses) {
            for (const auto& vp : c.vars) ++counts[vp.var];
            for (const auto& cond : c.conds) {
                count_occurrences(cond->lhs, counts);
                count_occurrences(cond->rhs, counts);
            }
        }
        return;
    }
    for (const auto& t : std::get<Module>(f).terms)
        for (VarId x : variables(t.scalar)) ++counts[x];
}

Poly substitute(const Poly& p, VarId x, std::uint64_t s, SemiringKind sk) {
    semiring::check_carrier(sk, s);
    std::vector<Clause> out;
    out.reserve(p.clauses.size());
    for (const auto& c : p.clauses) {
        auto vp = std::find_if(c.vars.begin(), c.vars.end(), [x](const VarPower& v) { return v.var == x; });
        bool in_conds = std::any_of(c.conds.begin(), c.conds.end(),
                                    [x](const CondPtr& cond) { return contains(cond->vars, x); });
        if (vp == c.vars.end() && !in_conds) {
            out.push_back(c);
            continue;
        }
        Clause n;
        n.coef = c.coef;
        if (vp != c.vars.end()) {
            if (s == 0) continue;
            if (sk == SemiringKind::Natural) n.coef = checked_mul(n.coef, checked_pow(s, vp->exp));
        }
        for (const auto& v : c.vars)
            if (v.var != x) n.vars.push_back(v);
        bool dead = false;
        for (const auto& cond : c.conds) {
            if (!contains(cond->vars, x)) {
                n.conds.push_back(cond);
                continue;
            }
            Poly cp = make_conditional(substitute(cond->lhs, x, s, sk), cond->theta,
                                       substitute(cond->rhs, x, s, sk), sk);
            if (cp.is_zero()) {
                dead = true;
                break;
            }
            if (!cp.is_constant()) n.conds.push_back(cp.clauses[0].conds[0]);
        }
        if (dead) continue;
        sort_clause(n);
        out.push_back(std::move(n));
    }
    return make_poly(std::move(out), sk);
}

Module substitute(const Module& m, VarId x, std::uint64_t s, SemiringKind sk) {
    std::vector<Term> terms;
    terms.reserve(m.terms.size());
    for (const auto& t : m.terms) {
        if (contains(variables(t.scalar), x))
            terms.push_back(Term{substitute(t.scalar, x, s, sk), t.value});
        else
            terms.push_back(t);
    }
    return make_module(m.kind, m.constant, std::move(terms), sk);
}

Form substitute(const Form& f, VarId x, std::uint64_t s, SemiringKind sk) {
    return std::visit([&](const auto& v) -> Form { return substitute(v, x, s, sk); }, f);
}

namespace {

std::uint64_t eval_poly(const Poly& p, const std::vector<std::uint64_t>& values, SemiringKind sk) {
    std::uint64_t acc = 0;
    for (const auto& c : p.clauses) {
        std::uint64_t prod = c.coef;
        for (const auto& vp : c.vars) {
            if (prod == 0) break;
            std::uint64_t v = values.at(vp.var);
            prod = semiring::mul(sk, prod, sk == SemiringKind::Boolean ? v : checked_pow(v, vp.exp));
        }
        for (const auto& cond : c.conds) {
            if (prod == 0) break;
            bool holds = compare(eval(cond->lhs, values, sk), cond->theta, eval(cond->rhs, values, sk));
            if (!holds) prod = 0;
        }
        acc = semiring::add(sk, acc, prod);
    }
    return acc;
}

}  // namespace

ExtNat eval(const Form& f, const std::vector<std::uint64_t>& values, SemiringKind sk) {
    if (const auto* p = std::get_if<Poly>(&f)) return ExtNat(eval_poly(*p, values, sk));
    const Module& m = std::get<Module>(f);
    ExtNat acc = m.constant;
    for (const auto& t : m.terms)
        acc = monoid::plus(m.kind, acc, monoid::scale(m.kind, sk, eval_poly(t.scalar, values, sk), t.value));
    return acc;
}

SemiringExpr to_expression(const Poly& p, const VarIndex& index) {
    std::vector<SemiringExpr> sum;
    for (const auto& c : p.clauses) {
        std::vector<SemiringExpr> prod;
        if (c.coef != 1 || c.is_constant()) prod.push_back(SemiringExpr::constant(c.coef));
        for (const auto& vp : c.vars)
            for (std::uint32_t k = 0; k < vp.exp; ++k) prod.push_back(SemiringExpr::variable(index.name(vp.var)));
        for (const auto& cond : c.conds)
            prod.push_back(SemiringExpr::conditional(to_expression(cond->lhs, index), cond->theta,
                                                     to_expression(cond->rhs, index)));
        sum.push_back(SemiringExpr::product(std::move(prod)));
    }
    return SemiringExpr::sum(std::move(sum));
}

SemimoduleExpr to_expression(const Module& m, const VarIndex& index) {
    std::vector<SemimoduleExpr::Term> terms;
    if (m.constant != monoid::neutral(m.kind) || m.terms.empty())
        terms.push_back(SemimoduleExpr::Term{std::nullopt, m.constant});
    for (const auto& t : m.terms) terms.push_back(SemimoduleExpr::Term{to_expression(t.scalar, index), t.value});
    return SemimoduleExpr(m.kind, std::move(terms));
}

Operand to_expression(const Form& f, const VarIndex& index) {
    return std::visit([&](const auto& x) -> Operand { return to_expression(x, index); }, f);
}

std::string to_string(const Form& f, const VarIndex& index) { return print(to_expression(f, index)); }

}  // namespace pvcagg
