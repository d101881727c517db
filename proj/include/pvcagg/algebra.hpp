#ifndef PVCAGG_ALGEBRA_HPP
#define PVCAGG_ALGEBRA_HPP

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "pvcagg/extnat.hpp"

namespace pvcagg {

// ---------------------------------------------------------------------------
// Algebraic structures
// ---------------------------------------------------------------------------

/// Annotation semiring. BOOLEAN is ({0,1}, or, and, 0, 1); NATURAL is
/// (N, +, *, 0, 1) with checked arithmetic.
enum class SemiringKind { Boolean, Natural };

/// Aggregation monoid. COUNT behaves as SUM over the constant 1.
enum class MonoidKind { Min, Max, Sum, Count, Prod };

enum class Theta { Eq, Ne, Le, Ge, Lt, Gt };

std::string_view to_string(SemiringKind kind);
std::string_view to_string(MonoidKind kind);
std::string_view to_string(Theta theta);

std::optional<SemiringKind> parse_semiring_kind(std::string_view text);
std::optional<MonoidKind> parse_monoid_kind(std::string_view text);
std::optional<Theta> parse_theta(std::string_view text);

namespace semiring {
std::uint64_t zero(SemiringKind kind);
std::uint64_t one(SemiringKind kind);
bool in_carrier(SemiringKind kind, std::uint64_t s);
/// Throws CarrierMismatch when s is not a carrier element.
void check_carrier(SemiringKind kind, std::uint64_t s);
std::uint64_t add(SemiringKind kind, std::uint64_t a, std::uint64_t b);
std::uint64_t mul(SemiringKind kind, std::uint64_t a, std::uint64_t b);
}  // namespace semiring

namespace monoid {
ExtNat neutral(MonoidKind kind);
ExtNat plus(MonoidKind kind, ExtNat a, ExtNat b);
/// s (x) m: the s-fold monoid sum of m. COUNT scales like SUM; COUNT terms
/// always carry the value 1.
ExtNat scale(MonoidKind kind, SemiringKind sk, std::uint64_t s, ExtNat m);
/// MIN and MAX are idempotent: a + a = a.
bool is_selective(MonoidKind kind);
}  // namespace monoid

/// [a theta b]; every carrier used here is totally ordered.
bool compare(ExtNat a, Theta theta, ExtNat b);
/// Theta' such that [a theta b] == [b theta' a].
Theta mirror(Theta theta);

// ---------------------------------------------------------------------------
// Symbolic expressions
// ---------------------------------------------------------------------------

class SemiringExpr;
class SemimoduleExpr;

/// Either side of a conditional [lhs theta rhs].
using Operand = std::variant<SemiringExpr, SemimoduleExpr>;

/// Immutable semiring expression tree:
///   phi ::= x | s | phi + phi | phi * phi | [op theta op]
/// Sums and products are n-ary; nesting of same-kind nodes is kept as written.
class SemiringExpr {
public:
    enum class Kind { Variable, Constant, Sum, Product, Conditional };

    struct Node;

    static SemiringExpr variable(std::string name);
    static SemiringExpr constant(std::uint64_t value);
    static SemiringExpr sum(std::vector<SemiringExpr> children);
    static SemiringExpr product(std::vector<SemiringExpr> children);
    static SemiringExpr conditional(Operand lhs, Theta theta, Operand rhs);

    Kind kind() const;
    const std::string& name() const;                 // Variable
    std::uint64_t value() const;                     // Constant
    const std::vector<SemiringExpr>& children() const;  // Sum, Product
    const Operand& lhs() const;                      // Conditional
    const Operand& rhs() const;                      // Conditional
    Theta theta() const;                             // Conditional

    bool operator==(const SemiringExpr& other) const;

private:
    explicit SemiringExpr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
    std::shared_ptr<const Node> node_;
};

SemiringExpr operator+(const SemiringExpr& a, const SemiringExpr& b);
SemiringExpr operator*(const SemiringExpr& a, const SemiringExpr& b);

/// A monoid sum  t1 +_op t2 +_op ...  where each term is either phi (x) m or a
/// bare monoid constant m. The empty sum denotes 0_M. A single scaled term or a
/// single constant are sums of length one, so every semimodule expression
/// carries exactly one monoid kind.
class SemimoduleExpr {
public:
    struct Term {
        std::optional<SemiringExpr> scalar;  // absent: bare constant
        ExtNat value;
        bool operator==(const Term& other) const = default;
    };

    SemimoduleExpr(MonoidKind kind, std::vector<Term> terms);

    static SemimoduleExpr scaled(MonoidKind kind, SemiringExpr scalar, ExtNat value);
    static SemimoduleExpr constant(MonoidKind kind, ExtNat value);

    MonoidKind monoid() const { return kind_; }
    const std::vector<Term>& terms() const { return *terms_; }
    bool is_constant() const;

    bool operator==(const SemimoduleExpr& other) const;

private:
    MonoidKind kind_;
    std::shared_ptr<const std::vector<Term>> terms_;
};

/// Concatenates the terms of two sums over the same monoid.
SemimoduleExpr monoid_sum(const SemimoduleExpr& a, const SemimoduleExpr& b);

/// Total mapping from variable names to semiring carrier values.
class Valuation {
public:
    Valuation() = default;
    Valuation(std::initializer_list<std::pair<const std::string, std::uint64_t>> init) : values_(init) {}

    void set(const std::string& name, std::uint64_t value) { values_[name] = value; }
    std::optional<std::uint64_t> get(std::string_view name) const;
    std::size_t size() const { return values_.size(); }
    const std::map<std::string, std::uint64_t, std::less<>>& entries() const { return values_; }

private:
    std::map<std::string, std::uint64_t, std::less<>> values_;
};

std::uint64_t eval_semiring(const SemiringExpr& expr, const Valuation& nu, SemiringKind sk);
ExtNat eval_semimodule(const SemimoduleExpr& expr, const Valuation& nu, SemiringKind sk);
/// Semiring operands evaluate to a finite ExtNat.
ExtNat eval_operand(const Operand& op, const Valuation& nu, SemiringKind sk);

std::set<std::string> variables(const SemiringExpr& expr);
std::set<std::string> variables(const SemimoduleExpr& expr);
std::set<std::string> variables(const Operand& op);

}  // namespace pvcagg

#endif  // PVCAGG_ALGEBRA_HPP
