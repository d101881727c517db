#include <gtest/gtest.h>

#include "pvcagg/engine.hpp"
#include "pvcagg/error.hpp"
#include "pvcagg/oracle.hpp"
#include "pvcagg/syntax.hpp"
#include "support.hpp"

namespace pvcagg {
namespace {

using testing::same_form;

const Row* find_row(const PvcTable& t, const std::vector<Value>& key) {
    for (const auto& r : t.rows()) {
        std::vector<Value> k;
        for (std::size_t i = 0; i < t.schema().size(); ++i)
            if (!t.schema()[i].aggregate) k.push_back(std::get<Value>(r.cells[i]));
        if (k == key) return &r;
    }
    return nullptr;
}

Value str(const char* s) { return Value(std::string(s)); }

TEST(Evaluate, UngroupedAggregation) {
    const auto db = testing::fig1(SemiringKind::Natural);
    const auto t = evaluate(parse_query("agg[; alpha <- sum(weight)](P1)"), db);
    ASSERT_EQ(t.rows().size(), 1u);
    EXPECT_EQ(t.rows()[0].annotation, SemiringExpr::constant(1));
    EXPECT_TRUE(same_form(std::get<SemimoduleExpr>(t.rows()[0].cells[0]),
                          parse_semimodule("sum{z1 (x) 4 + z2 (x) 8 + z3 (x) 7 + z4 (x) 6}"), SemiringKind::Natural));
}

TEST(Evaluate, SelectionOverUngroupedMin) {
    const auto db = testing::fig1();
    const auto t = evaluate(parse_query("project[](select[5 <= alpha](agg[; alpha <- min(weight)](P1)))"), db);
    ASSERT_EQ(t.rows().size(), 1u);
    EXPECT_TRUE(t.schema().empty());
    EXPECT_TRUE(same_form(t.rows()[0].annotation,
                          parse_semiring("1*[5 <= min{z1 (x) 4 + z2 (x) 8 + z3 (x) 7 + z4 (x) 6}]"),
                          SemiringKind::Boolean));
}

TEST(Evaluate, FigureOnePositiveQuery) {
    const auto db = testing::fig1();
    const auto t = evaluate(parse_query(testing::fig1_query("Q1")), db);
    const std::vector<std::tuple<const char*, std::uint64_t, const char*>> expect{
        {"M&S", 10, "x1*y11*(z1+z5)"}, {"M&S", 50, "x1*y12*z2"}, {"M&S", 11, "x2*y21*(z1+z5)"},
        {"M&S", 60, "x2*y22*z2"},      {"M&S", 15, "x3*y33*z3"}, {"M&S", 40, "x3*y34*z4"},
        {"Gap", 15, "x4*y41*(z1+z5)"}, {"Gap", 60, "x4*y43*z3"}, {"Gap", 10, "x5*y51*(z1+z5)"}};
    EXPECT_EQ(t.rows().size(), expect.size());
    for (const auto& [shop, price, phi] : expect) {
        const Row* r = find_row(t, {str(shop), Value(ExtNat(price))});
        ASSERT_NE(r, nullptr) << shop << " " << price;
        EXPECT_TRUE(same_form(r->annotation, parse_semiring(phi), SemiringKind::Boolean)) << print(r->annotation);
    }
}

TEST(Evaluate, FigureOneAggregateQuery) {
    const auto db = testing::fig1();
    const auto t = evaluate(parse_query(testing::fig1_query("Q2")), db);
    ASSERT_EQ(t.rows().size(), 2u);
    const char* ms =
        "[max{x1*y11*(z1+z5) (x) 10 + x1*y12*z2 (x) 50 + x2*y21*(z1+z5) (x) 11 + x2*y22*z2 (x) 60 + "
        "x3*y33*z3 (x) 15 + x3*y34*z4 (x) 40} <= 50] * "
        "[x1*y11*(z1+z5) + x1*y12*z2 + x2*y21*(z1+z5) + x2*y22*z2 + x3*y33*z3 + x3*y34*z4 != 0]";
    const char* gap =
        "[max{x4*y41*(z1+z5) (x) 15 + x4*y43*z3 (x) 60 + x5*y51*(z1+z5) (x) 10} <= 50] * "
        "[x4*y41*(z1+z5) + x4*y43*z3 + x5*y51*(z1+z5) != 0]";
    EXPECT_TRUE(same_form(find_row(t, {str("M&S")})->annotation, parse_semiring(ms), SemiringKind::Boolean));
    EXPECT_TRUE(same_form(find_row(t, {str("Gap")})->annotation, parse_semiring(gap), SemiringKind::Boolean));

    // x1, x2, y11, y21, z1, z2, z5 true, everything else false.
    Valuation nu;
    for (const auto& v : db.variables()) nu.set(v, 0);
    for (const char* v : {"x1", "x2", "y11", "y21", "z1", "z2", "z5"}) nu.set(v, 1);
    EXPECT_EQ(eval_semiring(find_row(t, {str("M&S")})->annotation, nu, SemiringKind::Boolean), 1u);
}

TEST(Evaluate, GroupedAggregationCarriesNonEmptiness) {
    const auto db = testing::fig1(SemiringKind::Natural);
    const auto t = evaluate(parse_query("agg[shop; n <- count(*), s <- sum(sid)](S)"), db);
    ASSERT_EQ(t.rows().size(), 2u);
    for (const auto& r : t.rows()) {
        ASSERT_EQ(r.annotation.kind(), SemiringExpr::Kind::Conditional);
        EXPECT_EQ(r.annotation.theta(), Theta::Ne);
        const auto& count = std::get<SemimoduleExpr>(r.cells[1]);
        EXPECT_EQ(count.monoid(), MonoidKind::Sum);
        for (const auto& term : count.terms()) EXPECT_EQ(term.value, ExtNat(1));
    }
    const auto u = evaluate(parse_query("agg[; m <- max(sid)](select[shop = 'none'](S))"), db);
    ASSERT_EQ(u.rows().size(), 1u);
    EXPECT_EQ(u.rows()[0].annotation, SemiringExpr::constant(1));
}

TEST(Evaluate, SingletonProjectionKeepsAnnotation) {
    PvcDatabase db(SemiringKind::Boolean);
    PvcTable t("R", {{"a", false}, {"b", false}});
    t.add_row(Row{{Value(ExtNat(1)), Value(ExtNat(2))}, SemiringExpr::variable("x")});
    db.add_table(t);
    db.set_distribution("x", testing::boolean(0.5));
    const auto r = evaluate(parse_query("project[a](R)"), db);
    ASSERT_EQ(r.rows().size(), 1u);
    EXPECT_EQ(r.rows()[0].annotation, SemiringExpr::variable("x"));
}

TEST(Evaluate, Errors) {
    const auto db = testing::fig1();
    auto code = [&](const char* q) {
        try {
            evaluate(parse_query(q), db);
        } catch (const Error& e) {
            return e.code();
        }
        return ErrorCode::ParseError;
    };
    EXPECT_EQ(code("agg[; s <- sum(price)](PS)"), ErrorCode::IllegalAggregate);
    EXPECT_EQ(code("agg[; s <- count(*)](PS)"), ErrorCode::IllegalAggregate);
    EXPECT_EQ(code("Nope"), ErrorCode::UnknownRelation);
    EXPECT_EQ(code("project[colour](S)"), ErrorCode::SchemaMismatch);
    EXPECT_EQ(code("union(S, agg[shop; m <- max(sid)](S))"), ErrorCode::InvalidQuery);
}

TEST(Answer, PositiveTupleProbability) {
    auto db = testing::fig1();
    const double p = 0.7;
    for (const auto& v : db.variables()) db.set_distribution(v, testing::boolean(p));
    const auto ans = answer_distributions(parse_query(testing::fig1_query("Q1")), db);
    bool seen = false;
    for (const auto& t : ans.tuples) {
        if (t.key != AnswerKey{str("M&S"), Value(ExtNat(10))}) continue;
        seen = true;
        EXPECT_NEAR(t.annotation.probability(1), p * p * (1 - (1 - p) * (1 - p)), 1e-12);
    }
    EXPECT_TRUE(seen);
}

TEST(Answer, ConstantAnnotationIsCertain) {
    const auto db = testing::fig1();
    const auto ans = answer_distributions(parse_query("agg[; m <- min(weight)](P1)"), db);
    ASSERT_EQ(ans.tuples.size(), 1u);
    EXPECT_TRUE(ans.tuples[0].annotation.approx_equal(Distribution::point(1), 0));
}

TEST(Answer, AggregateQueryMatchesOracle) {
    const auto db = testing::fig1();
    const auto ans = answer_distributions(parse_query(testing::fig1_query("Q2")), db);
    const auto brute = brute_query(*parse_query(testing::fig1_query("Q2")), db);
    ASSERT_EQ(ans.tuples.size(), 2u);
    for (const auto& t : ans.tuples) {
        const auto& o = brute.tuples.at(t.key);
        double present = 0;
        for (const auto& [outcome, pr] : o)
            if (outcome.present) present += pr;
        EXPECT_NEAR(t.annotation.probability(1), present, 1e-9);
    }
    EXPECT_NEAR(ans.tuples[0].annotation.probability(1) + ans.tuples[1].annotation.probability(1),
                0.44317626953125 + 0.26953125, 1e-12);
}

TEST(Answer, JointCellsMatchOracle) {
    const auto db = testing::fig1(SemiringKind::Natural);
    std::string why;
    EXPECT_TRUE(testing::answers_agree(
        parse_query("agg[shop; n <- count(*), m <- max(sid)](select[sid <= 4](S))"), db, 1e-9, &why))
        << why;
    EXPECT_TRUE(testing::answers_agree(parse_query("agg[sid; s <- sum(price)](select[sid <= 2](PS))"), db, 1e-9, &why))
        << why;
}

TEST(Answer, SuiteMatchesOracleOnRandomDatabases) {
    for (std::uint64_t seed = 100; seed < 104; ++seed) {
        for (auto sk : {SemiringKind::Boolean, SemiringKind::Natural}) {
            const auto db = testing::random_database(seed, sk);
            for (const auto& q : testing::query_suite()) {
                std::string why;
                EXPECT_TRUE(testing::answers_agree(parse_query(q), db, 1e-9, &why)) << q << ": " << why;
            }
        }
    }
}

TEST(Answer, NaturalAggregatesMatchOracle) {
    for (std::uint64_t seed = 200; seed < 204; ++seed) {
        const auto db = testing::random_database(seed, SemiringKind::Natural);
        for (const char* q : {"agg[a; s <- sum(v), n <- count(*)](T)", "agg[; p <- prod(v)](T)",
                              "select[s >= 10](agg[; s <- sum(v)](T))", "agg[c; n <- count(*)](join(R, S))"}) {
            std::string why;
            EXPECT_TRUE(testing::answers_agree(parse_query(q), db, 1e-9, &why)) << q << ": " << why;
        }
    }
}

TEST(Evaluate, SizeGrowsPolynomially) {
    // |join(R, S)| for R, S with n rows each sharing one key is n^2; the
    // aggregation on top stays a single row whose expression has n^2 terms.
    for (std::size_t n : {2u, 4u, 8u}) {
        PvcDatabase db(SemiringKind::Boolean);
        PvcTable r("R", {{"k", false}, {"a", false}}), s("S", {{"k", false}, {"b", false}});
        for (std::size_t i = 0; i < n; ++i) {
            r.add_row(Row{{Value(ExtNat(1)), Value(ExtNat(i))}, SemiringExpr::variable("r" + std::to_string(i))});
            s.add_row(Row{{Value(ExtNat(1)), Value(ExtNat(i))}, SemiringExpr::variable("s" + std::to_string(i))});
        }
        db.add_table(r);
        db.add_table(s);
        EXPECT_EQ(evaluate(parse_query("join(R, S)"), db).rows().size(), n * n);
        const auto agg = evaluate(parse_query("agg[; m <- max(a)](join(R, S))"), db);
        EXPECT_EQ(std::get<SemimoduleExpr>(agg.rows()[0].cells[0]).terms().size(), n * n);
    }
}

TEST(MinShortcut, MatchesCompilation) {
    const auto db = testing::fig1();
    for (const char* q : {"project[sid](select[P <= 15](agg[sid; P <- min(price)](PS)))",
                          "project[sid](select[P >= 15](agg[sid; P <- min(price)](PS)))"}) {
        AnswerOptions fast, slow;
        slow.fast_paths = false;
        const auto a = answer_distributions(parse_query(q), db, fast);
        const auto b = answer_distributions(parse_query(q), db, slow);
        ASSERT_EQ(a.tuples.size(), b.tuples.size());
        bool used = false;
        for (std::size_t i = 0; i < a.tuples.size(); ++i) {
            used = used || a.tuples[i].fast_path;
            EXPECT_TRUE(a.tuples[i].annotation.approx_equal(b.tuples[i].annotation, 1e-12)) << q;
        }
        EXPECT_TRUE(used) << q;
    }
}

}  // namespace
}  // namespace pvcagg
