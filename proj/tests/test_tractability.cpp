#include <gtest/gtest.h>

#include "pvcagg/error.hpp"
#include "pvcagg/oracle.hpp"
#include "pvcagg/tractability.hpp"
#include "support.hpp"

namespace pvcagg {
namespace {

PvcTable independent_table(const std::string& name, std::vector<std::string> attrs,
                           const std::vector<std::vector<std::uint64_t>>& rows, PvcDatabase& db) {
    std::vector<Attribute> schema;
    for (auto& a : attrs) schema.push_back({a, false});
    PvcTable t(name, schema);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        Row r;
        for (auto v : rows[i]) r.cells.push_back(Value(ExtNat(v)));
        const std::string var = name + std::to_string(i);
        r.annotation = SemiringExpr::variable(var);
        db.set_distribution(var, testing::boolean(0.3 + 0.1 * static_cast<double>(i % 5)));
        t.add_row(r);
    }
    db.add_table(t);
    return t;
}

PvcDatabase chain() {
    PvcDatabase db(SemiringKind::Natural);
    independent_table("R", {"A"}, {{1}, {2}}, db);
    independent_table("S", {"A", "B"}, {{1, 1}, {2, 1}, {2, 2}}, db);
    independent_table("T", {"B"}, {{1}, {2}}, db);
    independent_table("U", {"A", "C"}, {{1, 0}, {2, 3}}, db);
    return db;
}

TEST(Hierarchical, Examples) {
    const auto fig = testing::fig1();
    const auto lookup = schema_lookup(fig);
    EXPECT_TRUE(is_hierarchical(parse_query("project[](join(select[shop = 'M&S'](S), PS))"), lookup));
    EXPECT_TRUE(is_hierarchical(parse_query("S"), lookup));

    const auto db = chain();
    const auto cl = schema_lookup(db);
    EXPECT_FALSE(is_hierarchical(parse_query("project[](join(join(R, S), T))"), cl));
    EXPECT_TRUE(is_hierarchical(parse_query("project[](join(R, S))"), cl));
    // Head attributes are exempt.
    EXPECT_TRUE(is_hierarchical(parse_query("project[B](join(join(R, S), T))"), cl));
    try {
        is_hierarchical(parse_query("join(R, rename[A2 <- A](R))"), cl);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::RepeatedRelation);
    }
}

TEST(Hierarchical, FlatBlockStructure) {
    const auto db = chain();
    const auto b = flatten(parse_query("project[](select[A = 2](join(R, S)))"), schema_lookup(db));
    EXPECT_EQ(b.children.size(), 2u);
    EXPECT_EQ(b.labels, (std::vector<std::string>{"R", "S"}));
    EXPECT_EQ(b.constant.size(), 1u);
    EXPECT_FALSE(describe(b).empty());
}

TEST(RootAttributes, Examples) {
    const auto db = chain();
    const auto lookup = schema_lookup(db);
    EXPECT_EQ(root_attributes(parse_query("join(S, U)"), lookup), (std::set<std::string>{"S.A", "U.A"}));
    EXPECT_EQ(root_attributes(parse_query("S"), lookup), (std::set<std::string>{"S.A", "S.B"}));
    EXPECT_TRUE(root_attributes(parse_query("product(R, T)"), lookup).empty());
}

TEST(Classify, Examples) {
    const auto fig = testing::fig1(SemiringKind::Natural);
    EXPECT_EQ(classify(parse_query("S"), fig).cls, QueryClass::Ind);
    const auto ex = classify(parse_query("agg[; alpha <- sum(price)](join(select[shop = 'M&S'](S), PS))"), fig);
    EXPECT_EQ(ex.cls, QueryClass::Hie);
    EXPECT_EQ(ex.rule, "aggregation over a hierarchical join of independent queries");
    EXPECT_EQ(classify(parse_query("join(S, rename[sid2 <- sid, shop2 <- shop](S))"), fig).cls, QueryClass::Unknown);
    EXPECT_EQ(classify(parse_query("agg[; p <- prod(price)](PS)"), fig).cls, QueryClass::Unknown);
    EXPECT_EQ(classify(parse_query("project[sid](select[P <= 15](agg[sid; P <- min(price)](PS)))"), fig).cls,
              QueryClass::Ind);
    EXPECT_EQ(classify(parse_query("project[](select[m <= n](product(agg[; m <- min(weight)](P1), "
                                   "agg[; n <- max(price)](PS))))"),
                       fig)
                  .cls,
              QueryClass::Ind);
    EXPECT_EQ(classify(parse_query("project[shop](join(S, PS))"), fig).cls, QueryClass::Hie);
    EXPECT_EQ(classify(parse_query("project[sid](join(S, PS))"), fig).cls, QueryClass::Ind);
}

TEST(Classify, CorrelatedInputIsNotIndependent) {
    PvcDatabase db(SemiringKind::Boolean);
    PvcTable t("R", {{"a", false}});
    t.add_row(Row{{Value(ExtNat(1))}, SemiringExpr::variable("x")});
    t.add_row(Row{{Value(ExtNat(2))}, SemiringExpr::variable("x")});
    db.add_table(t);
    db.set_distribution("x", testing::boolean(0.5));
    EXPECT_FALSE(is_tuple_independent(db.table("R")));
    EXPECT_EQ(classify(parse_query("R"), db).cls, QueryClass::Unknown);
}

TEST(Classify, NeutralValueDowngradesGroupedAggregation) {
    const auto db = chain();
    // U.C holds 0, the neutral element of SUM.
    EXPECT_EQ(classify(parse_query("agg[A; s <- sum(C)](U)"), db).cls, QueryClass::Unknown);
    EXPECT_NE(classify(parse_query("agg[A; n <- count(*)](U)"), db).cls, QueryClass::Unknown);
    EXPECT_NE(classify(parse_query("agg[A; s <- max(C)](U)"), db).cls, QueryClass::Unknown);
    EXPECT_NE(classify(parse_query("agg[; s <- sum(C)](U)"), db).cls, QueryClass::Unknown);
}

// Presence probabilities of single keys and pairs of keys, by enumeration.
void presence(const QueryPtr& q, const PvcDatabase& db, std::map<AnswerKey, double>& single,
              std::map<std::pair<AnswerKey, AnswerKey>, double>& pairs) {
    for_each_world_answer(*q, db, 1 << 16, [&](const auto& answer, double p) {
        for (const auto& [k1, v1] : answer) {
            single[k1] += p;
            for (const auto& [k2, v2] : answer)
                if (k1 < k2) pairs[{k1, k2}] += p;
        }
    });
}

TEST(Classify, IndependentResultsArePairwiseIndependent) {
    const auto db = chain();
    for (const char* text : {"R", "project[A](S)", "project[A](join(S, U))", "project[B](S)",
                             "project[A](select[m <= 1](agg[A; m <- min(B)](S)))"}) {
        const auto q = parse_query(text);
        ASSERT_EQ(classify(q, db).cls, QueryClass::Ind) << text;
        std::map<AnswerKey, double> single;
        std::map<std::pair<AnswerKey, AnswerKey>, double> pairs;
        presence(q, db, single, pairs);
        for (auto i = single.begin(); i != single.end(); ++i)
            for (auto j = std::next(i); j != single.end(); ++j)
                EXPECT_NEAR(pairs[std::make_pair(i->first, j->first)], i->second * j->second, 1e-9) << text;
    }
}

TEST(Classify, CorrelatedResultsAreNotIndependent) {
    const auto db = chain();
    const auto q = parse_query("project[A](join(S, T))");
    EXPECT_NE(classify(q, db).cls, QueryClass::Ind);
    std::map<AnswerKey, double> single;
    std::map<std::pair<AnswerKey, AnswerKey>, double> pairs;
    presence(q, db, single, pairs);
    const AnswerKey one{Value(ExtNat(1))}, two{Value(ExtNat(2))};
    EXPECT_GT(std::abs(pairs[std::make_pair(one, two)] - single[one] * single[two]), 1e-3);
}

TEST(Classify, HierarchicalAggregationCompilesWithoutMutex) {
    const auto db = testing::fig1(SemiringKind::Natural);
    const auto ans =
        answer_distributions(parse_query("agg[; alpha <- sum(price)](join(select[shop = 'M&S'](S), PS))"), db);
    ASSERT_EQ(ans.tuples.size(), 1u);
    EXPECT_EQ(ans.tuples[0].mutex_nodes, 0u);
}

}  // namespace
}  // namespace pvcagg
