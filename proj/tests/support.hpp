// Shared fixtures for the unit tests and the acceptance runner.
#ifndef PVCAGG_TESTS_SUPPORT_HPP
#define PVCAGG_TESTS_SUPPORT_HPP

#include <cmath>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "pvcagg/canonical.hpp"
#include "pvcagg/engine.hpp"
#include "pvcagg/io.hpp"
#include "pvcagg/oracle.hpp"
#include "pvcagg/pvc.hpp"
#include "pvcagg/syntax.hpp"

namespace pvcagg::testing {

inline std::string data_dir() { return PVCAGG_DATA_DIR; }

inline PvcDatabase fig1(SemiringKind sk = SemiringKind::Boolean) {
    const std::string d = data_dir() + "/fig1/";
    return load_database({d + "S.tsv", d + "PS.tsv", d + "P1.tsv", d + "P2.tsv"}, d + "probabilities.tsv", sk);
}

inline std::string fig1_query(const std::string& name) { return read_file(data_dir() + "/fig1/" + name + ".q"); }

inline Distribution dist(std::initializer_list<std::pair<ExtNat, double>> entries) {
    return Distribution::from_entries(std::vector<std::pair<ExtNat, double>>(entries), 0);
}

inline Distribution boolean(double p_true) { return dist({{ExtNat(0), 1 - p_true}, {ExtNat(1), p_true}}); }

/// Equal up to associativity, commutativity and distributivity.
inline bool same_form(const Operand& a, const Operand& b, SemiringKind sk) {
    std::set<std::string> vars = variables(a);
    for (const auto& v : variables(b)) vars.insert(v);
    const VarIndex index(vars);
    return to_string(normalize(a, index, sk), index) == to_string(normalize(b, index, sk), index);
}

inline bool near(const OutcomeDistribution& a, const OutcomeDistribution& b, double tol) {
    for (const auto& [o, p] : a) {
        auto it = b.find(o);
        if (std::abs(p - (it == b.end() ? 0.0 : it->second)) > tol) return false;
    }
    for (const auto& [o, p] : b)
        if (!a.count(o) && p > tol) return false;
    return true;
}

/// Engine answers against the brute-force oracle, tuple by tuple. Keys
/// missing on either side must be absent with probability 1.
inline bool answers_agree(const QueryPtr& q, const PvcDatabase& db, double tol, std::string* why = nullptr) {
    AnswerOptions opts;
    opts.joint = true;
    const Answer ans = answer_distributions(q, db, opts);
    const BruteAnswer brute = brute_query(*q, db, std::uint64_t{1} << 16);
    std::map<AnswerKey, OutcomeDistribution> engine;
    for (const auto& t : ans.tuples) {
        if (engine.count(t.key)) {
            if (why) *why = "duplicate engine key";
            return false;
        }
        engine[t.key] = outcomes(t, db.semiring());
    }
    const OutcomeDistribution absent{{TupleOutcome{}, 1.0}};
    auto fail = [&](const AnswerKey& key, const std::string& msg) {
        if (why) {
            *why = msg + " for key (";
            for (const auto& v : key) *why += to_string(v) + " ";
            *why += ")";
        }
        return false;
    };
    for (const auto& [key, d] : engine) {
        auto it = brute.tuples.find(key);
        if (!near(d, it == brute.tuples.end() ? absent : it->second, tol)) return fail(key, "engine differs");
    }
    for (const auto& [key, d] : brute.tuples)
        if (!engine.count(key) && !near(d, absent, tol)) return fail(key, "engine misses tuple");
    return true;
}

/// Small random database over R(a,b), S(b,c), T(a,v), U(a,b). Rows are
/// distinct; annotations are mostly fresh variables, sometimes shared ones or
/// products, so tuples can be correlated. At most 12 variables; under the
/// natural semiring a few variables range over {0,1,2}.
inline PvcDatabase random_database(std::uint64_t seed, SemiringKind sk) {
    std::mt19937_64 rng(seed);
    auto uniform = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
    PvcDatabase db(sk);
    int next_var = 0;
    std::vector<std::string> vars;
    auto annotation = [&]() {
        const int roll = uniform(0, 9);
        if (roll < 2 && vars.size() >= 2) {
            const auto& a = vars[uniform(0, static_cast<int>(vars.size()) - 1)];
            const auto& b = vars[uniform(0, static_cast<int>(vars.size()) - 1)];
            return SemiringExpr::variable(a) * SemiringExpr::variable(b);
        }
        if (roll < 3 && !vars.empty()) return SemiringExpr::variable(vars[uniform(0, static_cast<int>(vars.size()) - 1)]);
        vars.push_back("v" + std::to_string(++next_var));
        return SemiringExpr::variable(vars.back());
    };
    auto table = [&](const std::string& name, const std::string& a, const std::string& b, int rows, int amax, int bmax) {
        PvcTable t(name, {{a, false}, {b, false}});
        std::set<std::pair<int, int>> seen;
        while (static_cast<int>(seen.size()) < rows) {
            const int x = uniform(1, amax);
            const int y = uniform(name == "T" ? 0 : 1, bmax);
            if (!seen.insert({x, y}).second) continue;
            t.add_row(Row{{Value(ExtNat(std::uint64_t(x))), Value(ExtNat(std::uint64_t(y)))}, annotation()});
        }
        db.add_table(std::move(t));
    };
    table("R", "a", "b", 3, 2, 3);
    table("S", "b", "c", 3, 3, 2);
    table("T", "a", "v", 3, 2, 20);
    table("U", "a", "b", 2, 2, 3);
    std::uint64_t worlds = 1;
    for (const auto& v : vars) {
        std::vector<std::pair<ExtNat, double>> entries;
        const double p = 0.2 + 0.6 * std::uniform_real_distribution<double>(0, 1)(rng);
        if (sk == SemiringKind::Natural && worlds * 3 <= (1u << 13) && uniform(0, 3) == 0) {
            entries = {{ExtNat(0), 1 - p}, {ExtNat(1), p / 2}, {ExtNat(2), p / 2}};
            worlds *= 3;
        } else {
            entries = {{ExtNat(0), 1 - p}, {ExtNat(1), p}};
            worlds *= 2;
        }
        db.set_distribution(v, Distribution::from_entries(entries, 0));
    }
    db.validate();
    return db;
}

/// Ten queries touching every operator, valid under both semirings.
inline std::vector<std::string> query_suite() {
    return {
        "R",
        "project[a](R)",
        "select[c = 1](rename[d <- b](S))",
        "product(R, rename[a2 <- a](T))",
        "union(R, U)",
        "join(R, S)",
        "project[a, c](join(R, S))",
        "agg[a; m <- max(v)](T)",
        "project[a](select[m <= 10](agg[a; m <- min(v)](T)))",
        "project[](select[m <= n](product(agg[; m <- min(v)](T), agg[; n <- max(v)](select[a = 1](T)))))",
    };
}

}  // namespace pvcagg::testing

#endif  // PVCAGG_TESTS_SUPPORT_HPP
