#include <gtest/gtest.h>

#include <cmath>

#include "pvcagg/error.hpp"
#include "pvcagg/generator.hpp"
#include "pvcagg/io.hpp"
#include "pvcagg/syntax.hpp"
#include "support.hpp"

namespace pvcagg {
namespace {

TEST(Load, FigureOneDatabase) {
    const auto db = testing::fig1();
    EXPECT_EQ(db.tables().size(), 4u);
    EXPECT_EQ(db.variables().size(), 19u);
    EXPECT_EQ(db.table("PS").rows().size(), 9u);
    EXPECT_EQ(db.table("S").schema()[1].name, "shop");
}

TEST(Load, MissingDistributionNamesVariable) {
    std::string probs = read_file(testing::data_dir() + "/fig1/probabilities.tsv");
    std::string kept;
    std::istringstream in(probs);
    for (std::string line; std::getline(in, line);)
        if (line.rfind("z5\t", 0) != 0) kept += line + "\n";
    try {
        parse_database({{"P2", read_file(testing::data_dir() + "/fig1/P2.tsv")}}, kept, SemiringKind::Boolean);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::MissingDistribution);
        EXPECT_NE(std::string(e.what()).find("z5"), std::string::npos);
    }
}

TEST(Load, HeaderOnlyTable) {
    const auto t = parse_table("E", "a\tb\tphi\n");
    EXPECT_EQ(t.schema().size(), 2u);
    EXPECT_TRUE(t.rows().empty());
}

TEST(Load, RoundTrip) {
    for (auto sk : {SemiringKind::Boolean, SemiringKind::Natural}) {
        std::vector<PvcDatabase> dbs{testing::fig1(sk), testing::random_database(3, sk)};
        PvcDatabase cells(SemiringKind::Natural);
        PvcTable t("A", {{"k", false}, {"s", true}, {"name", false}});
        t.add_row(Row{{Value(ExtNat(1)), parse_semimodule("sum{x (x) 3 + y*z (x) 4}"), Value(std::string("it's"))},
                      parse_semiring("[max{x (x) 2} >= 1]*y")});
        t.add_row(Row{{Value(ExtNat::pos_inf()), parse_semimodule("min{x (x) 3}"), Value(std::string("a b"))},
                      parse_semiring("1")});
        cells.add_table(t);
        for (const char* v : {"x", "y", "z"}) cells.set_distribution(v, testing::dist({{0, 0.25}, {3, 0.75}}));
        if (sk == SemiringKind::Natural) dbs.push_back(cells);
        for (const auto& db : dbs) {
            std::vector<NamedText> tables;
            for (const auto& [name, table] : db.tables()) tables.push_back({name, print_table(table)});
            const auto back = parse_database(tables, print_probabilities(db.distributions()), sk);
            ASSERT_EQ(back.tables().size(), db.tables().size());
            for (const auto& [name, table] : db.tables()) {
                const auto& other = back.table(name);
                EXPECT_EQ(other.schema(), table.schema());
                ASSERT_EQ(other.rows().size(), table.rows().size());
                for (std::size_t i = 0; i < table.rows().size(); ++i) {
                    EXPECT_EQ(other.rows()[i].annotation, table.rows()[i].annotation);
                    EXPECT_EQ(other.rows()[i].cells, table.rows()[i].cells);
                }
            }
            for (const auto& [v, d] : db.distributions()) EXPECT_TRUE(back.distributions().at(v).approx_equal(d, 0));
        }
    }
}

TEST(Load, Errors) {
    try {
        parse_probabilities("x\t0\t0.5\nx\t1\t0.5\nx\t0\t0.1\n", SemiringKind::Boolean);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::DuplicateVariable);
    }
    try {
        parse_probabilities("x\t0\t0.5\nx\t1\t0.4\n", SemiringKind::Boolean);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::InvalidDistribution);
    }
    try {
        parse_table("R", "a\tphi\n1\tx\n2\tx + * y\n");
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 3u);
        EXPECT_EQ(e.column(), 7u);
    }
    try {
        parse_table("R", "a\tphi\n1\t2\tx\n");
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 2u);
    }
    EXPECT_THROW(parse_table("R", "a\tb\n"), ParseError);
}

std::size_t count_products(const SemiringExpr& e) {
    return e.kind() == SemiringExpr::Kind::Product ? e.children().size() : 1;
}

void check_scalars(const SemimoduleExpr& side, const GenParams& p, std::size_t terms) {
    ASSERT_EQ(side.terms().size(), terms);
    for (const auto& t : side.terms()) {
        ASSERT_TRUE(t.scalar);
        EXPECT_LE(t.value, ExtNat(p.maxv));
        const SemiringExpr& s = *t.scalar;
        const std::vector<SemiringExpr> clauses =
            p.clauses == 1 ? std::vector<SemiringExpr>{s} : s.children();
        if (p.clauses > 1) {
            EXPECT_EQ(s.kind(), SemiringExpr::Kind::Sum);
        }
        ASSERT_EQ(clauses.size(), p.clauses);
        for (const auto& c : clauses) {
            EXPECT_EQ(count_products(c), p.literals);
            EXPECT_EQ(variables(c).size(), p.literals);
        }
    }
}

TEST(Generator, Shape) {
    GenParams p;
    p.vars = 25;
    p.L = 200;
    p.clauses = 3;
    p.literals = 3;
    p.maxv = 200;
    const auto e = gen_expression(p);
    ASSERT_EQ(e.kind(), SemiringExpr::Kind::Conditional);
    check_scalars(std::get<SemimoduleExpr>(e.lhs()), p, 200);
    EXPECT_TRUE(std::get<SemimoduleExpr>(e.rhs()).is_constant());

    for (std::uint64_t seed = 1; seed < 40; ++seed) {
        GenParams q;
        q.seed = seed;
        q.L = 1 + seed % 7;
        q.R = seed % 4;
        q.vars = 4 + seed % 5;
        q.clauses = 1 + seed % 3;
        q.literals = 1 + seed % 4;
        const auto g = gen_expression(q);
        check_scalars(std::get<SemimoduleExpr>(g.lhs()), q, q.L);
        if (q.R > 0) check_scalars(std::get<SemimoduleExpr>(g.rhs()), q, q.R);
    }
}

TEST(Generator, MinimalShapeAndDeterminism) {
    GenParams p;
    p.L = 1;
    p.clauses = 1;
    p.literals = 1;
    const auto e = gen_expression(p);
    const auto& lhs = std::get<SemimoduleExpr>(e.lhs());
    ASSERT_EQ(lhs.terms().size(), 1u);
    EXPECT_EQ(lhs.terms()[0].scalar->kind(), SemiringExpr::Kind::Variable);
    EXPECT_EQ(print(gen_expression(p)), print(gen_expression(p)));
    GenParams q = p;
    q.L = 30;
    q.seed = 2;
    EXPECT_NE(print(gen_expression(q)), print(gen_expression(p)));
    EXPECT_EQ(gen_distributions(q).size(), q.vars);
}

TEST(Generator, InvalidParams) {
    for (auto mutate : std::vector<std::function<void(GenParams&)>>{
             [](GenParams& p) { p.L = 0; }, [](GenParams& p) { p.vars = 0; }, [](GenParams& p) { p.clauses = 0; },
             [](GenParams& p) { p.literals = 11; }, [](GenParams& p) { p.runs = 0; },
             [](GenParams& p) { p.probability = 1.5; }}) {
        GenParams p;
        mutate(p);
        try {
            gen_expression(p);
            ADD_FAILURE();
        } catch (const Error& e) {
            EXPECT_EQ(e.code(), ErrorCode::InvalidParams);
        }
    }
    GenParams p;
    EXPECT_THROW(set_param(p, "bogus", 1), Error);
    set_param(p, "cl", 4);
    EXPECT_EQ(p.clauses, 4u);
}

TEST(Benchmark, TrimmingAndReport) {
    GenParams p;
    p.L = 5;
    p.vars = 6;
    p.runs = 3;
    const auto rows = run_benchmark(p, "c", {0, 5, 10});
    ASSERT_EQ(rows.size(), 3u);
    for (const auto& r : rows) {
        EXPECT_EQ(r.sweep_var, "c");
        EXPECT_EQ(r.stddev_ms, 0.0);  // one sample survives trimming
        EXPECT_GT(r.nodes, 0);
    }
    const auto again = run_benchmark(p, "c", {0, 5, 10});
    for (std::size_t i = 0; i < rows.size(); ++i) {
        EXPECT_EQ(rows[i].nodes, again[i].nodes);
        EXPECT_EQ(rows[i].dist_size, again[i].dist_size);
    }
    const auto parallel = run_benchmark(p, "c", {0, 5, 10}, BenchMode::Compile, 3);
    for (std::size_t i = 0; i < rows.size(); ++i) EXPECT_EQ(rows[i].nodes, parallel[i].nodes);
    const std::string csv = bench_csv(rows);
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "sweep_var,value,mean_ms,stddev_ms,nodes,dist_size");

    const auto brute = run_benchmark(p, "c", {5}, BenchMode::BruteForce);
    EXPECT_EQ(brute[0].dist_size, rows[1].dist_size);
    try {
        run_benchmark(p, "c", {});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::InvalidParams);
    }
}

}  // namespace
}  // namespace pvcagg
