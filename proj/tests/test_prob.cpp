#include <gtest/gtest.h>

#include <random>

#include "pvcagg/distribution.hpp"
#include "pvcagg/error.hpp"
#include "support.hpp"

namespace pvcagg {
namespace {

using testing::dist;

TEST(Convolve, BooleanOr) {
    const auto half = testing::boolean(0.5);
    const auto r = convolve(half, half, [](ExtNat a, ExtNat b) { return ExtNat(a.value() | b.value()); });
    EXPECT_TRUE(r.approx_equal(dist({{0, 0.25}, {1, 0.75}})));
}

TEST(Convolve, ScaledValue) {
    const auto px = dist({{0, 0.3}, {1, 0.3}, {2, 0.4}});
    const auto pa = dist({{5, 0.4}, {10, 0.4}, {15, 0.2}});
    const auto r = convolve(px, pa, [](ExtNat s, ExtNat m) {
        return monoid::scale(MonoidKind::Sum, SemiringKind::Natural, s.value(), m);
    });
    EXPECT_NEAR(r.probability(10), 0.3 * 0.4 + 0.4 * 0.4, 1e-12);
    EXPECT_NEAR(r.probability(10), 0.28, 1e-12);
}

TEST(Convolve, UnitIsIdentity) {
    const auto p = dist({{0, 0.2}, {3, 0.5}, {7, 0.3}});
    const auto r = convolve(p, Distribution::point(1), [](ExtNat a, ExtNat b) { return checked_mul(a, b); });
    EXPECT_TRUE(r.approx_equal(p, 0));
}

TEST(Convolve, Overflow) {
    const auto p = Distribution::point(ExtNat(std::uint64_t{1} << 40));
    try {
        convolve(p, p, [](ExtNat a, ExtNat b) { return checked_mul(a, b); });
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::ArithmeticOverflow);
    }
}

Distribution random_dist(std::mt19937_64& rng, std::size_t n) {
    std::vector<std::pair<ExtNat, double>> e;
    double total = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double w = 0.05 + std::uniform_real_distribution<double>(0, 1)(rng);
        e.emplace_back(ExtNat(rng() % 20), w);
        total += w;
    }
    for (auto& [v, p] : e) p /= total;
    return Distribution::from_entries(e, 0);
}

TEST(Convolve, MatchesPairwiseEnumeration) {
    std::mt19937_64 rng(21);
    for (int i = 0; i < 200; ++i) {
        const auto p = random_dist(rng, 1 + rng() % 6);
        const auto q = random_dist(rng, 1 + rng() % 6);
        for (auto kind : {MonoidKind::Min, MonoidKind::Max, MonoidKind::Sum}) {
            auto op = [kind](ExtNat a, ExtNat b) { return monoid::plus(kind, a, b); };
            const auto r = convolve(p, q, op);
            std::map<ExtNat, double> expect;
            for (const auto& [a, pa] : p.entries())
                for (const auto& [b, pb] : q.entries()) expect[op(a, b)] += pa * pb;
            ASSERT_EQ(r.size(), expect.size());
            for (const auto& [v, pv] : expect) EXPECT_DOUBLE_EQ(r.probability(v), pv);
            EXPECT_NEAR(r.mass(), p.mass() * q.mass(), 1e-9);
            EXPECT_LE(r.size(), p.size() * q.size());
            if (kind != MonoidKind::Sum) {
                std::set<ExtNat> support;
                for (const auto& e : p.entries()) support.insert(e.first);
                for (const auto& e : q.entries()) support.insert(e.first);
                EXPECT_LE(r.size(), support.size());
            }
        }
    }
}

TEST(Mix, Basics) {
    const auto p = dist({{1, 0.5}, {2, 0.5}});
    EXPECT_TRUE(mix<ExtNat>({1.0}, {p}).approx_equal(p, 0));
    EXPECT_TRUE(mix<ExtNat>({0.3, 0.7}, {p, p}).approx_equal(p));
    try {
        mix<ExtNat>({0.5}, {p, p});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::LengthMismatch);
    }
    try {
        mix<ExtNat>({0.5, 0.4}, {p, p});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::WeightSumOutOfTolerance);
    }
}

TEST(Mix, PreservesMass) {
    std::mt19937_64 rng(4);
    for (int i = 0; i < 100; ++i) {
        const double w = std::uniform_real_distribution<double>(0, 1)(rng);
        const auto r = mix<ExtNat>({w, 1 - w}, {random_dist(rng, 4), random_dist(rng, 5)});
        EXPECT_NEAR(r.mass(), 1.0, 1e-9);
    }
}

TEST(Mix, MutexBranchesOfTheWorkedSumTree) {
    // a(b+c) (x) 10 + c (x) 20 with every variable in {1, 2}, split on c.
    const double pa = 0.6, pb = 0.3, pc = 0.8;
    const double qa = 1 - pa, qb = 1 - pb, qc = 1 - pc;
    // c = 1: 10a(b+1) + 20; c = 2: 10a(b+2) + 40.
    const auto left = dist({{40, pa * pb}, {50, pa * qb}, {60, qa * pb}, {80, qa * qb}});
    const auto right = dist({{70, pa * pb}, {80, pa * qb}, {100, qa * pb}, {120, qa * qb}});
    const auto r = mix<ExtNat>({pc, qc}, {left, right});
    EXPECT_NEAR(r.probability(80), qa * qb * pc + pa * qb * qc, 1e-12);
    EXPECT_EQ(r.size(), 7u);
}

TEST(CompareConvolve, Examples) {
    EXPECT_TRUE(compare_convolve(Distribution::point(10), Distribution::point(50), Theta::Le)
                    .approx_equal(Distribution::point(1), 0));
    EXPECT_TRUE(compare_convolve(dist({{5, 0.4}, {10, 0.6}}), Distribution::point(7), Theta::Le)
                    .approx_equal(dist({{0, 0.6}, {1, 0.4}})));
    EXPECT_TRUE(compare_convolve(Distribution::point(3), Distribution::point(3), Theta::Ne)
                    .approx_equal(Distribution::point(0), 0));
}

TEST(CompareConvolve, SumsToOne) {
    std::mt19937_64 rng(8);
    for (int i = 0; i < 100; ++i) {
        const auto r = compare_convolve(random_dist(rng, 4), random_dist(rng, 4), static_cast<Theta>(rng() % 6));
        EXPECT_NEAR(r.mass(), 1.0, 1e-9);
        EXPECT_LE(r.size(), 2u);
    }
}

TEST(Distribution, Representation) {
    const auto d = Distribution::from_entries({{3, 0.2}, {1, 0.3}, {3, 0.5}, {9, 0.0}});
    ASSERT_EQ(d.size(), 2u);
    EXPECT_EQ(d.entries()[0].first, ExtNat(1));
    EXPECT_DOUBLE_EQ(d.probability(3), 0.7);
    const auto inf = dist({{ExtNat::pos_inf(), 0.5}, {ExtNat(4), 0.5}});
    EXPECT_EQ(serialize(inf), "4\t0.5\n+inf\t0.5\n");
    EXPECT_TRUE(parse_distribution(serialize(inf)).approx_equal(inf, 0));
}

TEST(Distribution, VariableValidation) {
    EXPECT_NO_THROW(validate_variable_distribution("x", testing::boolean(0.3), SemiringKind::Boolean));
    for (const auto& bad : {dist({{0, 0.5}, {1, 0.4}}), dist({{0, 0.5}, {2, 0.5}}), Distribution()}) {
        try {
            validate_variable_distribution("x", bad, SemiringKind::Boolean);
            FAIL();
        } catch (const Error& e) {
            EXPECT_EQ(e.code(), ErrorCode::InvalidDistribution);
        }
    }
    EXPECT_NO_THROW(validate_variable_distribution("x", dist({{0, 0.5}, {2, 0.5}}), SemiringKind::Natural));
}

}  // namespace
}  // namespace pvcagg
