#ifndef PVCAGG_CANONICAL_HPP
#define PVCAGG_CANONICAL_HPP

#include <cstdint>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "pvcagg/algebra.hpp"

namespace pvcagg {

/// Dense variable identifier. Ids are assigned in lexicographic order of the
/// variable names, so comparing ids compares names.
using VarId = std::uint32_t;

class VarIndex {
public:
    VarIndex() = default;
    explicit VarIndex(const std::set<std::string>& names);

    VarId id(const std::string& name) const;
    const std::string& name(VarId id) const { return names_.at(id); }
    std::size_t size() const { return names_.size(); }
    const std::vector<std::string>& names() const { return names_; }

private:
    std::vector<std::string> names_;
    std::map<std::string, VarId, std::less<>> ids_;
};

// Canonical forms. A semiring expression is flattened into a sum of clauses;
// each clause is coefficient * product of variable powers * product of
// conditional atoms. Clauses are sorted and equal monomials are merged, so two
// expressions equal up to associativity, commutativity and distributivity have
// identical canonical forms. Semimodule expressions become a monoid constant
// plus a sorted list of (poly, value) terms.

struct Cond;
using CondPtr = std::shared_ptr<const Cond>;

struct VarPower {
    VarId var;
    std::uint32_t exp;
    bool operator==(const VarPower&) const = default;
    auto operator<=>(const VarPower&) const = default;
};

struct Clause {
    std::uint64_t coef = 1;
    std::vector<VarPower> vars;  // sorted by var, each var once
    std::vector<CondPtr> conds;  // sorted by key, each condition once

    bool is_constant() const { return vars.empty() && conds.empty(); }
};

struct Poly {
    std::vector<Clause> clauses;  // sorted by monomial, no zero coefficients

    bool is_zero() const { return clauses.empty(); }
    bool is_constant() const { return clauses.empty() || (clauses.size() == 1 && clauses[0].is_constant()); }
    std::uint64_t constant_value() const { return clauses.empty() ? 0 : clauses[0].coef; }
};

struct Term {
    Poly scalar;
    ExtNat value;
};

struct Module {
    MonoidKind kind = MonoidKind::Sum;
    ExtNat constant;          // folded constant part; the neutral element if none
    std::vector<Term> terms;  // non-constant terms, sorted

    bool is_constant() const { return terms.empty(); }
};

using Form = std::variant<Poly, Module>;

struct Cond {
    Form lhs;
    Theta theta;
    Form rhs;
    std::string key;            // canonical text, used for ordering and equality
    std::vector<VarId> vars;    // sorted variables of both sides
};

bool operator==(const Clause& a, const Clause& b);
bool operator==(const Poly& a, const Poly& b);
bool operator==(const Term& a, const Term& b);
bool operator==(const Module& a, const Module& b);

/// Orders clauses by monomial (variables, then conditions), ignoring coefficients.
int compare_monomials(const Clause& a, const Clause& b);

// --- construction ----------------------------------------------------------

Poly poly_constant(std::uint64_t s, SemiringKind sk);
Poly poly_variable(VarId x);
Poly poly_add(const Poly& a, const Poly& b, SemiringKind sk);
Poly poly_mul(const Poly& a, const Poly& b, SemiringKind sk);
/// Sorts, merges equal monomials and applies Boolean absorption of 1.
Poly make_poly(std::vector<Clause> clauses, SemiringKind sk);
/// Folds constant terms, drops neutral and dominated terms, sorts.
Module make_module(MonoidKind kind, ExtNat constant, std::vector<Term> terms, SemiringKind sk);
/// [lhs theta rhs] as a polynomial: constant 0/1 when both sides are constant,
/// otherwise a single clause holding the condition.
Poly make_conditional(Form lhs, Theta theta, Form rhs, SemiringKind sk);

Poly normalize(const SemiringExpr& expr, const VarIndex& index, SemiringKind sk);
Module normalize(const SemimoduleExpr& expr, const VarIndex& index, SemiringKind sk);
Form normalize(const Operand& expr, const VarIndex& index, SemiringKind sk);

// --- queries ---------------------------------------------------------------

bool is_constant(const Form& f);
/// Value of a constant form.
ExtNat constant_value(const Form& f);

std::vector<VarId> variables(const Clause& c);
std::vector<VarId> variables(const Poly& p);
std::vector<VarId> variables(const Module& m);
std::vector<VarId> variables(const Form& f);

/// Occurrence count per variable: the number of top-level clauses (for a
/// polynomial) or terms (for a semimodule expression) it occurs in, summed
/// recursively through conditions.
void count_occurrences(const Form& f, std::map<VarId, std::size_t>& counts);

// --- transformation --------------------------------------------------------

Poly substitute(const Poly& p, VarId x, std::uint64_t s, SemiringKind sk);
Module substitute(const Module& m, VarId x, std::uint64_t s, SemiringKind sk);
Form substitute(const Form& f, VarId x, std::uint64_t s, SemiringKind sk);

/// Evaluates a canonical form; `values` is indexed by VarId.
ExtNat eval(const Form& f, const std::vector<std::uint64_t>& values, SemiringKind sk);

SemiringExpr to_expression(const Poly& p, const VarIndex& index);
SemimoduleExpr to_expression(const Module& m, const VarIndex& index);
Operand to_expression(const Form& f, const VarIndex& index);

/// Canonical text (variables printed by name).
std::string to_string(const Form& f, const VarIndex& index);

}  // namespace pvcagg

#endif  // PVCAGG_CANONICAL_HPP
