#include "pvcagg/generator.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <future>
#include <numeric>

#include "pvcagg/dtree.hpp"
#include "pvcagg/error.hpp"
#include "pvcagg/oracle.hpp"

namespace pvcagg {

void GenParams::validate() const {
    auto need = [](bool ok, const std::string& what) {
        if (!ok) throw Error(ErrorCode::InvalidParams, what);
    };
    need(L >= 1, "L must be positive");
    need(vars >= 1, "#v must be positive");
    need(clauses >= 1, "#cl must be positive");
    need(literals >= 1, "#l must be positive");
    need(literals <= vars, "#l cannot exceed #v");
    need(runs >= 1, "runs must be positive");
    need(probability >= 0 && probability <= 1, "probability must lie in [0, 1]");
}

namespace {

SemiringExpr random_phi(const GenParams& p, std::mt19937_64& rng) {
    std::vector<std::size_t> pool(p.vars);
    std::iota(pool.begin(), pool.end(), 1);
    std::vector<SemiringExpr> clauses;
    for (std::size_t k = 0; k < p.clauses; ++k) {
        // partial Fisher-Yates: the first `literals` entries become the clause
        for (std::size_t i = 0; i < p.literals; ++i) {
            std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
            std::swap(pool[i], pool[pick(rng)]);
        }
        std::vector<SemiringExpr> lits;
        for (std::size_t i = 0; i < p.literals; ++i) lits.push_back(SemiringExpr::variable("x" + std::to_string(pool[i])));
        clauses.push_back(lits.size() == 1 ? lits[0] : SemiringExpr::product(std::move(lits)));
    }
    return clauses.size() == 1 ? clauses[0] : SemiringExpr::sum(std::move(clauses));
}

SemimoduleExpr random_side(const GenParams& p, std::size_t terms, MonoidKind kind, std::mt19937_64& rng) {
    std::uniform_int_distribution<std::uint64_t> value(0, p.maxv);
    std::vector<SemimoduleExpr::Term> out;
    for (std::size_t i = 0; i < terms; ++i) {
        SemiringExpr phi = random_phi(p, rng);
        const std::uint64_t v = value(rng);
        out.push_back({std::move(phi), ExtNat(kind == MonoidKind::Count ? 1 : v)});
    }
    return SemimoduleExpr(kind, std::move(out));
}

}  // namespace

SemiringExpr gen_expression(const GenParams& p, std::mt19937_64& rng) {
    p.validate();
    SemimoduleExpr lhs = random_side(p, p.L, p.aggl, rng);
    if (p.R == 0) return SemiringExpr::conditional(lhs, p.theta, SemimoduleExpr::constant(p.aggl, ExtNat(p.c)));
    SemimoduleExpr rhs = random_side(p, p.R, p.aggr, rng);
    return SemiringExpr::conditional(lhs, p.theta, rhs);
}

SemiringExpr gen_expression(const GenParams& p) {
    std::mt19937_64 rng(p.seed);
    return gen_expression(p, rng);
}

VarDistributions gen_distributions(const GenParams& p) {
    VarDistributions out;
    for (std::size_t i = 1; i <= p.vars; ++i)
        out.emplace("x" + std::to_string(i),
                    Distribution::from_entries({{ExtNat(0), 1 - p.probability}, {ExtNat(1), p.probability}}, 0));
    return out;
}

void set_param(GenParams& p, const std::string& name, std::uint64_t value) {
    if (name == "L") p.L = value;
    else if (name == "R") p.R = value;
    else if (name == "vars" || name == "v") p.vars = value;
    else if (name == "clauses" || name == "cl") p.clauses = value;
    else if (name == "literals" || name == "l") p.literals = value;
    else if (name == "maxv") p.maxv = value;
    else if (name == "c") p.c = value;
    else if (name == "runs") p.runs = value;
    else throw Error(ErrorCode::InvalidParams, "unknown parameter " + name);
}

namespace {

BenchRow bench_point(GenParams p, const std::string& sweep_var, std::uint64_t value, BenchMode mode) {
    set_param(p, sweep_var, value);
    p.validate();
    const VarDistributions dists = gen_distributions(p);
    std::mt19937_64 rng(p.seed);
    std::vector<double> times;
    double nodes = 0;
    double size = 0;
    for (std::size_t run = 0; run < p.runs; ++run) {
        const SemiringExpr e = gen_expression(p, rng);
        const auto start = std::chrono::steady_clock::now();
        std::size_t support = 0;
        if (mode == BenchMode::Compile) {
            const DTree tree = compile(Operand(e), dists, SemiringKind::Boolean);
            support = distribution(tree).size();
            nodes += static_cast<double>(tree.size());
        } else {
            support = brute_distribution(Operand(e), dists, SemiringKind::Boolean).size();
        }
        const auto stop = std::chrono::steady_clock::now();
        times.push_back(std::chrono::duration<double, std::milli>(stop - start).count());
        size += static_cast<double>(support);
    }
    std::sort(times.begin(), times.end());
    if (times.size() >= 3) times = std::vector<double>(times.begin() + 1, times.end() - 1);
    const double n = static_cast<double>(times.size());
    const double mean = std::accumulate(times.begin(), times.end(), 0.0) / n;
    double var = 0;
    for (double t : times) var += (t - mean) * (t - mean);
    BenchRow row;
    row.sweep_var = sweep_var;
    row.value = value;
    row.mean_ms = mean;
    row.stddev_ms = times.size() > 1 ? std::sqrt(var / (n - 1)) : 0.0;
    row.nodes = nodes / static_cast<double>(p.runs);
    row.dist_size = size / static_cast<double>(p.runs);
    return row;
}

}  // namespace

std::vector<BenchRow> run_benchmark(const GenParams& base, const std::string& sweep_var,
                                    const std::vector<std::uint64_t>& values, BenchMode mode, unsigned threads) {
    if (values.empty()) throw Error(ErrorCode::InvalidParams, "empty sweep");
    GenParams probe = base;
    set_param(probe, sweep_var, values.front());
    std::vector<BenchRow> rows(values.size());
    if (threads <= 1) {
        for (std::size_t i = 0; i < values.size(); ++i) rows[i] = bench_point(base, sweep_var, values[i], mode);
        return rows;
    }
    for (std::size_t start = 0; start < values.size(); start += threads) {
        std::vector<std::future<BenchRow>> batch;
        for (std::size_t i = start; i < std::min(values.size(), start + threads); ++i)
            batch.push_back(std::async(std::launch::async, bench_point, base, sweep_var, values[i], mode));
        for (std::size_t i = 0; i < batch.size(); ++i) rows[start + i] = batch[i].get();
    }
    return rows;
}

std::string bench_csv(const std::vector<BenchRow>& rows) {
    std::string out = "sweep_var,value,mean_ms,stddev_ms,nodes,dist_size\n";
    char buf[160];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%s,%llu,%.6f,%.6f,%.2f,%.2f\n", r.sweep_var.c_str(),
                      static_cast<unsigned long long>(r.value), r.mean_ms, r.stddev_ms, r.nodes, r.dist_size);
        out += buf;
    }
    return out;
}

}  // namespace pvcagg
