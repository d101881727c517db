#include <gtest/gtest.h>

#include <random>

#include "pvcagg/algebra.hpp"
#include "pvcagg/error.hpp"
#include "pvcagg/syntax.hpp"

namespace pvcagg {
namespace {

SemiringExpr var(const char* n) { return SemiringExpr::variable(n); }
SemiringExpr cst(std::uint64_t v) { return SemiringExpr::constant(v); }

TEST(Monoid, NeutralAndOperation) {
    const std::vector<ExtNat> samples{ExtNat(0), ExtNat(3), ExtNat(17), ExtNat::pos_inf(), ExtNat::neg_inf()};
    for (auto kind : {MonoidKind::Min, MonoidKind::Max}) {
        for (auto m : samples) {
            EXPECT_EQ(monoid::plus(kind, monoid::neutral(kind), m), m);
            EXPECT_EQ(monoid::plus(kind, m, monoid::neutral(kind)), m);
        }
    }
    for (auto kind : {MonoidKind::Sum, MonoidKind::Count, MonoidKind::Prod})
        for (std::uint64_t m : {0u, 1u, 9u}) EXPECT_EQ(monoid::plus(kind, monoid::neutral(kind), m), ExtNat(m));
    EXPECT_EQ(monoid::neutral(MonoidKind::Min), ExtNat::pos_inf());
    EXPECT_EQ(monoid::neutral(MonoidKind::Max), ExtNat::neg_inf());
    EXPECT_EQ(monoid::neutral(MonoidKind::Sum), ExtNat(0));
    EXPECT_EQ(monoid::neutral(MonoidKind::Prod), ExtNat(1));
    EXPECT_EQ(monoid::plus(MonoidKind::Prod, 3, 4), ExtNat(12));
}

TEST(Monoid, CommutativeAndAssociative) {
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<std::uint64_t> d(0, 1000);
    for (auto kind : {MonoidKind::Min, MonoidKind::Max, MonoidKind::Sum, MonoidKind::Prod}) {
        for (int i = 0; i < 200; ++i) {
            ExtNat a = d(rng), b = d(rng), c = d(rng);
            EXPECT_EQ(monoid::plus(kind, a, b), monoid::plus(kind, b, a));
            EXPECT_EQ(monoid::plus(kind, monoid::plus(kind, a, b), c), monoid::plus(kind, a, monoid::plus(kind, b, c)));
        }
    }
}

TEST(Semiring, Laws) {
    std::mt19937_64 rng(11);
    for (auto sk : {SemiringKind::Boolean, SemiringKind::Natural}) {
        std::uniform_int_distribution<std::uint64_t> d(0, sk == SemiringKind::Boolean ? 1 : 500);
        for (int i = 0; i < 300; ++i) {
            const auto a = d(rng), b = d(rng), c = d(rng);
            EXPECT_EQ(semiring::add(sk, a, b), semiring::add(sk, b, a));
            EXPECT_EQ(semiring::mul(sk, a, b), semiring::mul(sk, b, a));
            EXPECT_EQ(semiring::add(sk, semiring::add(sk, a, b), c), semiring::add(sk, a, semiring::add(sk, b, c)));
            EXPECT_EQ(semiring::mul(sk, semiring::mul(sk, a, b), c), semiring::mul(sk, a, semiring::mul(sk, b, c)));
            EXPECT_EQ(semiring::mul(sk, a, semiring::add(sk, b, c)),
                      semiring::add(sk, semiring::mul(sk, a, b), semiring::mul(sk, a, c)));
            EXPECT_EQ(semiring::mul(sk, semiring::zero(sk), a), semiring::zero(sk));
            EXPECT_EQ(semiring::mul(sk, semiring::one(sk), a), a);
        }
    }
}

TEST(EvalSemiring, Examples) {
    const Valuation all{{"x1", 1}, {"y11", 1}, {"z1", 1}, {"z5", 1}};
    EXPECT_EQ(eval_semiring(parse_semiring("x1*y11*(z1+z5)"), all, SemiringKind::Boolean), 1u);
    EXPECT_EQ(eval_semiring(var("x") + var("y"), Valuation{{"x", 2}, {"y", 3}}, SemiringKind::Natural), 5u);
    EXPECT_EQ(eval_semiring(parse_semiring("x*(y+2)"), Valuation{{"x", 3}, {"y", 4}}, SemiringKind::Natural), 18u);
}

TEST(EvalSemimodule, WorkedValues) {
    const auto alpha = parse_semimodule("min{x*y (x) 5 + (x+z) (x) 10}");
    EXPECT_EQ(eval_semimodule(alpha, Valuation{{"x", 2}, {"y", 3}, {"z", 0}}, SemiringKind::Natural), ExtNat(5));

    const auto sum = parse_semimodule("sum{z1 (x) 4 + z2 (x) 8 + z3 (x) 7 + z4 (x) 6}");
    EXPECT_EQ(eval_semimodule(sum, Valuation{{"z1", 2}, {"z2", 2}, {"z3", 0}, {"z4", 0}}, SemiringKind::Natural),
              ExtNat(24));

    const auto min = parse_semimodule("min{z1 (x) 4 + z2 (x) 8 + z3 (x) 7 + z4 (x) 6}");
    EXPECT_EQ(eval_semimodule(min, Valuation{{"z1", 0}, {"z2", 1}, {"z3", 1}, {"z4", 1}}, SemiringKind::Boolean),
              ExtNat(6));

    const Valuation none{{"z1", 0}, {"z2", 0}, {"z3", 0}, {"z4", 0}};
    EXPECT_EQ(eval_semimodule(sum, none, SemiringKind::Natural), ExtNat(0));
    EXPECT_EQ(eval_semimodule(min, none, SemiringKind::Boolean), ExtNat::pos_inf());
}

TEST(EvalSemiring, Errors) {
    try {
        eval_semiring(var("x") * var("y"), Valuation{{"x", 1}}, SemiringKind::Boolean);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::UnboundVariable);
    }
    try {
        eval_semiring(cst(2), Valuation{}, SemiringKind::Boolean);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::CarrierMismatch);
    }
    try {
        eval_semiring(var("x") * var("x"), Valuation{{"x", std::uint64_t{1} << 40}}, SemiringKind::Natural);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::ArithmeticOverflow);
    }
    try {
        eval_semimodule(SemimoduleExpr::scaled(MonoidKind::Sum, var("x"), ExtNat(std::uint64_t{1} << 63)),
                        Valuation{{"x", 2}}, SemiringKind::Natural);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::ArithmeticOverflow);
    }
}

TEST(Variables, Sets) {
    EXPECT_TRUE(variables(cst(1)).empty());
    EXPECT_EQ(variables(var("x") + var("x") * var("y")), (std::set<std::string>{"x", "y"}));
    const auto phi = variables(parse_semiring("x+y"));
    const auto alpha = variables(parse_semimodule("sum{a*(b+c) (x) 10 + c (x) 20}"));
    EXPECT_EQ(alpha, (std::set<std::string>{"a", "b", "c"}));
    for (const auto& v : phi) EXPECT_FALSE(alpha.count(v));
}

// Random expressions over x, y, z for the quantified properties below.
SemiringExpr random_expr(std::mt19937_64& rng, int depth, SemiringKind sk) {
    std::uniform_int_distribution<int> pick(0, depth > 0 ? 4 : 1);
    switch (pick(rng)) {
        case 0: return var(std::vector<const char*>{"x", "y", "z"}[rng() % 3]);
        case 1: return cst(sk == SemiringKind::Boolean ? rng() % 2 : rng() % 4);
        case 2: return random_expr(rng, depth - 1, sk) + random_expr(rng, depth - 1, sk);
        case 3: return random_expr(rng, depth - 1, sk) * random_expr(rng, depth - 1, sk);
        default: {
            const Theta t = static_cast<Theta>(rng() % 6);
            return SemiringExpr::conditional(random_expr(rng, depth - 1, sk), t, random_expr(rng, depth - 1, sk));
        }
    }
}

TEST(Properties, HomomorphismAndTotality) {
    std::mt19937_64 rng(3);
    for (auto sk : {SemiringKind::Boolean, SemiringKind::Natural}) {
        const std::uint64_t hi = sk == SemiringKind::Boolean ? 1 : 3;
        for (int i = 0; i < 300; ++i) {
            const auto a = random_expr(rng, 3, sk);
            const auto b = random_expr(rng, 3, sk);
            const Valuation nu{{"x", rng() % (hi + 1)}, {"y", rng() % (hi + 1)}, {"z", rng() % (hi + 1)}};
            const auto va = eval_semiring(a, nu, sk);
            const auto vb = eval_semiring(b, nu, sk);
            EXPECT_EQ(eval_semiring(a + b, nu, sk), semiring::add(sk, va, vb));
            EXPECT_EQ(eval_semiring(a * b, nu, sk), semiring::mul(sk, va, vb));
            EXPECT_EQ(eval_semiring(b + a, nu, sk), eval_semiring(a + b, nu, sk));
            const auto c = eval_semiring(SemiringExpr::conditional(a, Theta::Le, b), nu, sk);
            EXPECT_TRUE(c == semiring::zero(sk) || c == semiring::one(sk));
        }
    }
}

TEST(Properties, SemimoduleLaws) {
    std::mt19937_64 rng(5);
    const SemiringKind sk = SemiringKind::Natural;
    for (auto kind : {MonoidKind::Min, MonoidKind::Max, MonoidKind::Sum}) {
        for (int i = 0; i < 200; ++i) {
            const auto s1 = random_expr(rng, 2, sk);
            const auto s2 = random_expr(rng, 2, sk);
            const ExtNat m1 = rng() % 50, m2 = rng() % 50;
            const Valuation nu{{"x", rng() % 3}, {"y", rng() % 3}, {"z", rng() % 3}};
            const auto lhs = SemimoduleExpr::scaled(kind, s1 + s2, m1);
            const auto rhs = monoid_sum(SemimoduleExpr::scaled(kind, s1, m1), SemimoduleExpr::scaled(kind, s2, m1));
            EXPECT_EQ(eval_semimodule(lhs, nu, sk), eval_semimodule(rhs, nu, sk));
            const auto s = eval_semiring(s1, nu, sk);
            EXPECT_EQ(monoid::scale(kind, sk, s, monoid::plus(kind, m1, m2)),
                      monoid::plus(kind, monoid::scale(kind, sk, s, m1), monoid::scale(kind, sk, s, m2)));
        }
    }
}

TEST(Syntax, RoundTrip) {
    for (const char* text : {"x1*y11*(z1+z5)", "[min{x (x) 10 + y (x) 20} <= 15]", "max{x1*y11 (x) 10 + x2 (x) 50}",
                             "[sum{a*b (x) 3} != sum{c (x) 3 + 4}]", "x*[y >= 2] + 1", "count{x (x) 1}"}) {
        const Operand e = parse_expression(text);
        EXPECT_EQ(parse_expression(print(e)), e) << text;
        EXPECT_EQ(print(parse_expression(print(e))), print(e)) << text;
    }
    std::mt19937_64 rng(9);
    for (int i = 0; i < 200; ++i) {
        const auto e = random_expr(rng, 4, SemiringKind::Natural);
        EXPECT_EQ(parse_semiring(print(e)), e) << print(e);
    }
}

TEST(Syntax, ErrorsCarryPosition) {
    try {
        parse_semiring("x + * y");
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 1u);
        EXPECT_EQ(e.column(), 5u);
    }
    EXPECT_THROW(parse_semimodule("x (x) 5"), Error);
}

}  // namespace
}  // namespace pvcagg
