#include "pvcagg/algebra.hpp"

#include <algorithm>

#include "pvcagg/error.hpp"

namespace pvcagg {

std::string_view to_string(SemiringKind kind) {
    return kind == SemiringKind::Boolean ? "bool" : "nat";
}

std::string_view to_string(MonoidKind kind) {
    switch (kind) {
    case MonoidKind::Min: return "min";
    case MonoidKind::Max: return "max";
    case MonoidKind::Sum: return "sum";
    case MonoidKind::Count: return "count";
    case MonoidKind::Prod: return "prod";
    }
    return "?";
}

std::string_view to_string(Theta theta) {
    switch (theta) {
    case Theta::Eq: return "=";
    case Theta::Ne: return "!=";
    case Theta::Le: return "<=";
    case Theta::Ge: return ">=";
    case Theta::Lt: return "<";
    case Theta::Gt: return ">";
    }
    return "?";
}

std::optional<SemiringKind> parse_semiring_kind(std::string_view text) {
    if (text == "bool" || text == "boolean") return SemiringKind::Boolean;
    if (text == "nat" || text == "natural") return SemiringKind::Natural;
    return std::nullopt;
}

std::optional<MonoidKind> parse_monoid_kind(std::string_view text) {
    if (text == "min") return MonoidKind::Min;
    if (text == "max") return MonoidKind::Max;
    if (text == "sum") return MonoidKind::Sum;
    if (text == "count") return MonoidKind::Count;
    if (text == "prod") return MonoidKind::Prod;
    return std::nullopt;
}

std::optional<Theta> parse_theta(std::string_view text) {
    if (text == "=" || text == "==") return Theta::Eq;
    if (text == "!=" || text == "<>") return Theta::Ne;
    if (text == "<=") return Theta::Le;
    if (text == ">=") return Theta::Ge;
    if (text == "<") return Theta::Lt;
    if (text == ">") return Theta::Gt;
    return std::nullopt;
}

namespace semiring {

std::uint64_t zero(SemiringKind) { return 0; }
std::uint64_t one(SemiringKind) { return 1; }

bool in_carrier(SemiringKind kind, std::uint64_t s) {
    return kind == SemiringKind::Natural || s <= 1;
}

void check_carrier(SemiringKind kind, std::uint64_t s) {
    if (!in_carrier(kind, s))
        throw Error(ErrorCode::CarrierMismatch,
                    std::to_string(s) + " is not an element of the " + std::string(to_string(kind)) +
                        " semiring");
}

std::uint64_t add(SemiringKind kind, std::uint64_t a, std::uint64_t b) {
    if (kind == SemiringKind::Boolean) return (a | b) != 0 ? 1 : 0;
    return checked_add(a, b);
}

std::uint64_t mul(SemiringKind kind, std::uint64_t a, std::uint64_t b) {
    if (kind == SemiringKind::Boolean) return (a != 0 && b != 0) ? 1 : 0;
    return checked_mul(a, b);
}

}  // namespace semiring

namespace monoid {

ExtNat neutral(MonoidKind kind) {
    switch (kind) {
    case MonoidKind::Min: return ExtNat::pos_inf();
    case MonoidKind::Max: return ExtNat::neg_inf();
    case MonoidKind::Prod: return ExtNat(1);
    case MonoidKind::Sum:
    case MonoidKind::Count: return ExtNat(0);
    }
    return ExtNat(0);
}

ExtNat plus(MonoidKind kind, ExtNat a, ExtNat b) {
    switch (kind) {
    case MonoidKind::Min: return std::min(a, b);
    case MonoidKind::Max: return std::max(a, b);
    case MonoidKind::Prod: return checked_mul(a, b);
    case MonoidKind::Sum:
    case MonoidKind::Count: return checked_add(a, b);
    }
    return a;
}

ExtNat scale(MonoidKind kind, SemiringKind sk, std::uint64_t s, ExtNat m) {
    semiring::check_carrier(sk, s);
    if (s == 0) return neutral(kind);
    switch (kind) {
    case MonoidKind::Min:
    case MonoidKind::Max: return m;
    case MonoidKind::Sum:
    case MonoidKind::Count:
        if (!m.is_finite()) return m;
        return ExtNat(checked_mul(s, m.value()));
    case MonoidKind::Prod:
        if (!m.is_finite()) return (m.is_neg_inf() && s % 2 == 0) ? ExtNat::pos_inf() : m;
        return ExtNat(checked_pow(m.value(), s));
    }
    return m;
}

bool is_selective(MonoidKind kind) { return kind == MonoidKind::Min || kind == MonoidKind::Max; }

}  // namespace monoid

bool compare(ExtNat a, Theta theta, ExtNat b) {
    switch (theta) {
    case Theta::Eq: return a == b;
    case Theta::Ne: return a != b;
    case Theta::Le: return a <= b;
    case Theta::Ge: return a >= b;
    case Theta::Lt: return a < b;
    case Theta::Gt: return a > b;
    }
    return false;
}

Theta mirror(Theta theta) {
    switch (theta) {
    case Theta::Le: return Theta::Ge;
    case Theta::Ge: return Theta::Le;
    case Theta::Lt: return Theta::Gt;
    case Theta::Gt: return Theta::Lt;
    default: return theta;
    }
}

// ---------------------------------------------------------------------------

struct SemiringExpr::Node {
    Kind kind;
    std::string name;
    std::uint64_t value = 0;
    std::vector<SemiringExpr> children;
    std::vector<Operand> operands;  // lhs, rhs for conditionals
    Theta theta = Theta::Eq;
};

SemiringExpr SemiringExpr::variable(std::string name) {
    auto n = std::make_shared<Node>();
    n->kind = Kind::Variable;
    n->name = std::move(name);
    return SemiringExpr(std::move(n));
}

SemiringExpr SemiringExpr::constant(std::uint64_t value) {
    auto n = std::make_shared<Node>();
    n->kind = Kind::Constant;
    n->value = value;
    return SemiringExpr(std::move(n));
}

SemiringExpr SemiringExpr::sum(std::vector<SemiringExpr> children) {
    if (children.empty()) return constant(0);
    if (children.size() == 1) return children.front();
    auto n = std::make_shared<Node>();
    n->kind = Kind::Sum;
    n->children = std::move(children);
    return SemiringExpr(std::move(n));
}

SemiringExpr SemiringExpr::product(std::vector<SemiringExpr> children) {
    if (children.empty()) return constant(1);
    if (children.size() == 1) return children.front();
    auto n = std::make_shared<Node>();
    n->kind = Kind::Product;
    n->children = std::move(children);
    return SemiringExpr(std::move(n));
}

SemiringExpr SemiringExpr::conditional(Operand lhs, Theta theta, Operand rhs) {
    auto n = std::make_shared<Node>();
    n->kind = Kind::Conditional;
    n->operands.push_back(std::move(lhs));
    n->operands.push_back(std::move(rhs));
    n->theta = theta;
    return SemiringExpr(std::move(n));
}

SemiringExpr::Kind SemiringExpr::kind() const { return node_->kind; }
const std::string& SemiringExpr::name() const { return node_->name; }
std::uint64_t SemiringExpr::value() const { return node_->value; }
const std::vector<SemiringExpr>& SemiringExpr::children() const { return node_->children; }
const Operand& SemiringExpr::lhs() const { return node_->operands.at(0); }
const Operand& SemiringExpr::rhs() const { return node_->operands.at(1); }
Theta SemiringExpr::theta() const { return node_->theta; }

bool SemiringExpr::operator==(const SemiringExpr& other) const {
    if (node_ == other.node_) return true;
    const Node& a = *node_;
    const Node& b = *other.node_;
    if (a.kind != b.kind) return false;
    switch (a.kind) {
    case Kind::Variable: return a.name == b.name;
    case Kind::Constant: return a.value == b.value;
    case Kind::Sum:
    case Kind::Product: return a.children == b.children;
    case Kind::Conditional: return a.theta == b.theta && a.operands == b.operands;
    }
    return false;
}

SemiringExpr operator+(const SemiringExpr& a, const SemiringExpr& b) {
    std::vector<SemiringExpr> children;
    for (const auto* e : {&a, &b}) {
        if (e->kind() == SemiringExpr::Kind::Sum)
            children.insert(children.end(), e->children().begin(), e->children().end());
        else
            children.push_back(*e);
    }
    return SemiringExpr::sum(std::move(children));
}

SemiringExpr operator*(const SemiringExpr& a, const SemiringExpr& b) {
    std::vector<SemiringExpr> children;
    for (const auto* e : {&a, &b}) {
        if (e->kind() == SemiringExpr::Kind::Product)
            children.insert(children.end(), e->children().begin(), e->children().end());
        else
            children.push_back(*e);
    }
    return SemiringExpr::product(std::move(children));
}

SemimoduleExpr::SemimoduleExpr(MonoidKind kind, std::vector<Term> terms)
    : kind_(kind), terms_(std::make_shared<const std::vector<Term>>(std::move(terms))) {}

SemimoduleExpr SemimoduleExpr::scaled(MonoidKind kind, SemiringExpr scalar, ExtNat value) {
    return SemimoduleExpr(kind, {Term{std::move(scalar), value}});
}

SemimoduleExpr SemimoduleExpr::constant(MonoidKind kind, ExtNat value) {
    return SemimoduleExpr(kind, {Term{std::nullopt, value}});
}

bool SemimoduleExpr::is_constant() const {
    return std::none_of(terms_->begin(), terms_->end(), [](const Term& t) { return t.scalar.has_value(); });
}

bool SemimoduleExpr::operator==(const SemimoduleExpr& other) const {
    return kind_ == other.kind_ && (terms_ == other.terms_ || *terms_ == *other.terms_);
}

SemimoduleExpr monoid_sum(const SemimoduleExpr& a, const SemimoduleExpr& b) {
    if (a.monoid() != b.monoid())
        throw Error(ErrorCode::WrongMonoid, "cannot add " + std::string(to_string(a.monoid())) + " and " +
                                                std::string(to_string(b.monoid())) + " expressions");
    std::vector<SemimoduleExpr::Term> terms = a.terms();
    terms.insert(terms.end(), b.terms().begin(), b.terms().end());
    return SemimoduleExpr(a.monoid(), std::move(terms));
}

std::optional<std::uint64_t> Valuation::get(std::string_view name) const {
    auto it = values_.find(name);
    if (it == values_.end()) return std::nullopt;
    return it->second;
}

// ---------------------------------------------------------------------------

std::uint64_t eval_semiring(const SemiringExpr& expr, const Valuation& nu, SemiringKind sk) {
    using K = SemiringExpr::Kind;
    switch (expr.kind()) {
    case K::Variable: {
        auto v = nu.get(expr.name());
        if (!v) throw Error(ErrorCode::UnboundVariable, "no value for variable " + expr.name());
        semiring::check_carrier(sk, *v);
        return *v;
    }
    case K::Constant:
        semiring::check_carrier(sk, expr.value());
        return expr.value();
    case K::Sum: {
        std::uint64_t acc = semiring::zero(sk);
        for (const auto& c : expr.children()) acc = semiring::add(sk, acc, eval_semiring(c, nu, sk));
        return acc;
    }
    case K::Product: {
        std::uint64_t acc = semiring::one(sk);
        for (const auto& c : expr.children()) acc = semiring::mul(sk, acc, eval_semiring(c, nu, sk));
        return acc;
    }
    case K::Conditional: {
        ExtNat l = eval_operand(expr.lhs(), nu, sk);
        ExtNat r = eval_operand(expr.rhs(), nu, sk);
        return compare(l, expr.theta(), r) ? semiring::one(sk) : semiring::zero(sk);
    }
    }
    return 0;
}

ExtNat eval_semimodule(const SemimoduleExpr& expr, const Valuation& nu, SemiringKind sk) {
    const MonoidKind kind = expr.monoid();
    ExtNat acc = monoid::neutral(kind);
    for (const auto& term : expr.terms()) {
        // A COUNT term counts its scalar; the stored value is ignored.
        ExtNat value = kind == MonoidKind::Count ? ExtNat(1) : term.value;
        ExtNat part = term.scalar ? monoid::scale(kind, sk, eval_semiring(*term.scalar, nu, sk), value) : term.value;
        acc = monoid::plus(kind, acc, part);
    }
    return acc;
}

ExtNat eval_operand(const Operand& op, const Valuation& nu, SemiringKind sk) {
    if (const auto* phi = std::get_if<SemiringExpr>(&op)) return ExtNat(eval_semiring(*phi, nu, sk));
    return eval_semimodule(std::get<SemimoduleExpr>(op), nu, sk);
}

namespace {

void collect(const SemiringExpr& expr, std::set<std::string>& out);

void collect(const SemimoduleExpr& expr, std::set<std::string>& out) {
    for (const auto& t : expr.terms())
        if (t.scalar) collect(*t.scalar, out);
}

void collect(const Operand& op, std::set<std::string>& out) {
    std::visit([&out](const auto& e) { collect(e, out); }, op);
}

void collect(const SemiringExpr& expr, std::set<std::string>& out) {
    using K = SemiringExpr::Kind;
    switch (expr.kind()) {
    case K::Variable: out.insert(expr.name()); break;
    case K::Constant: break;
    case K::Sum:
    case K::Product:
        for (const auto& c : expr.children()) collect(c, out);
        break;
    case K::Conditional:
        collect(expr.lhs(), out);
        collect(expr.rhs(), out);
        break;
    }
}

}  // namespace

std::set<std::string> variables(const SemiringExpr& expr) {
    std::set<std::string> out;
    collect(expr, out);
    return out;
}

std::set<std::string> variables(const SemimoduleExpr& expr) {
    std::set<std::string> out;
    collect(expr, out);
    return out;
}

std::set<std::string> variables(const Operand& op) {
    std::set<std::string> out;
    collect(op, out);
    return out;
}

}  // namespace pvcagg
