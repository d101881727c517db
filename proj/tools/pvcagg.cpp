// Command-line front end: expression and query evaluation, brute-force
// checks, classification, the random expression generator and benchmarks.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11/CLI11.hpp>

#include "pvcagg/canonical.hpp"
#include "pvcagg/dtree.hpp"
#include "pvcagg/engine.hpp"
#include "pvcagg/error.hpp"
#include "pvcagg/generator.hpp"
#include "pvcagg/io.hpp"
#include "pvcagg/oracle.hpp"
#include "pvcagg/syntax.hpp"
#include "pvcagg/tractability.hpp"

namespace fs = std::filesystem;
using namespace pvcagg;

namespace {

struct Common {
    std::string semiring = "bool";
    std::uint64_t world_limit = kDefaultWorldLimit;
    std::size_t node_budget = 0;
    bool joint = false;
    bool no_prune = false;

    SemiringKind sk() const {
        auto k = parse_semiring_kind(semiring);
        if (!k) throw Error(ErrorCode::InvalidParams, "unknown semiring " + semiring);
        return *k;
    }
    CompileOptions compile() const {
        CompileOptions o;
        o.node_budget = node_budget;
        o.prune = o.prune_after_substitution = !no_prune;
        return o;
    }
};

// "@path" reads the text from a file.
std::string text_arg(const std::string& arg) { return !arg.empty() && arg[0] == '@' ? read_file(arg.substr(1)) : arg; }

struct DbArgs {
    std::string dir;
    std::vector<std::string> tables;
    std::string probs;

    void add(CLI::App* app) {
        app->add_option("--db", dir, "directory with *.tsv tables and probabilities.tsv");
        app->add_option("--table", tables, "table file (repeatable)");
        app->add_option("--probs", probs, "probability file");
    }

    PvcDatabase load(SemiringKind sk) const {
        std::vector<fs::path> files(tables.begin(), tables.end());
        fs::path prob = probs;
        if (!dir.empty()) {
            for (const auto& entry : fs::directory_iterator(dir)) {
                if (entry.path().extension() != ".tsv") continue;
                if (entry.path().filename() == "probabilities.tsv")
                    prob = prob.empty() ? entry.path() : prob;
                else
                    files.push_back(entry.path());
            }
        }
        std::sort(files.begin(), files.end());
        if (prob.empty()) throw Error(ErrorCode::InvalidParams, "no probability file given");
        return load_database(files, prob, sk);
    }
};

VarDistributions load_probs(const std::string& path, SemiringKind sk) {
    if (path.empty()) return {};
    return parse_probabilities(read_file(path), sk);
}

std::string key_string(const AnswerKey& key) {
    std::string out = "(";
    for (std::size_t i = 0; i < key.size(); ++i) out += (i ? ", " : "") + to_string(key[i]);
    return out + ")";
}

GenParams gen_params(CLI::App* app, GenParams& p, std::string& aggl, std::string& aggr, std::string& theta) {
    app->add_option("-L", p.L, "terms left of theta");
    app->add_option("-R", p.R, "terms right of theta (0 compares with c)");
    app->add_option("--aggl", aggl, "left monoid");
    app->add_option("--aggr", aggr, "right monoid");
    app->add_option("--vars", p.vars, "distinct variables");
    app->add_option("--clauses", p.clauses, "clauses per term");
    app->add_option("--literals", p.literals, "literals per clause");
    app->add_option("--maxv", p.maxv, "value ceiling");
    app->add_option("-c", p.c, "comparison constant");
    app->add_option("--theta", theta, "comparison");
    app->add_option("--runs", p.runs, "expressions per setting");
    app->add_option("--prob", p.probability, "P[x = 1] for every variable");
    return p;
}

void finish_params(GenParams& p, const std::string& aggl, const std::string& aggr, const std::string& theta,
                   std::uint64_t seed) {
    auto l = parse_monoid_kind(aggl);
    auto r = parse_monoid_kind(aggr);
    auto t = parse_theta(theta);
    if (!l || !r || !t) throw Error(ErrorCode::InvalidParams, "bad monoid or comparison");
    p.aggl = *l;
    p.aggr = *r;
    p.theta = *t;
    p.seed = seed;
}

std::vector<std::uint64_t> parse_values(const std::string& spec) {
    // "a:b:step" or "v1,v2,..."
    std::vector<std::uint64_t> out;
    if (spec.find(':') != std::string::npos) {
        unsigned long long a = 0, b = 0, step = 1;
        if (std::sscanf(spec.c_str(), "%llu:%llu:%llu", &a, &b, &step) < 2 || step == 0)
            throw Error(ErrorCode::InvalidParams, "bad range " + spec);
        for (unsigned long long v = a; v <= b; v += step) out.push_back(v);
        return out;
    }
    std::size_t start = 0;
    while (start < spec.size()) {
        std::size_t comma = spec.find(',', start);
        if (comma == std::string::npos) comma = spec.size();
        out.push_back(std::stoull(spec.substr(start, comma - start)));
        start = comma + 1;
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Exact probability computation for aggregate queries on pvc-tables"};
    app.require_subcommand(1);
    app.fallthrough();
    Common common;
    std::uint64_t seed = 1;
    app.add_option("--semiring", common.semiring, "bool or nat")->check(CLI::IsMember({"bool", "nat"}));
    app.add_option("--seed", seed, "generator seed");
    app.add_option("--world-limit", common.world_limit, "largest brute-force enumeration");
    app.add_option("--node-budget", common.node_budget, "largest d-tree (0: no limit)");
    app.add_flag("--joint", common.joint, "joint distribution of annotation and cells");
    app.add_flag("--no-prune", common.no_prune, "disable interval pruning");

    // parse
    auto* parse_cmd = app.add_subcommand("parse", "check and normalize an expression or query");
    std::string parse_text;
    bool parse_query_flag = false;
    parse_cmd->add_option("text", parse_text, "expression, or @file")->required();
    parse_cmd->add_flag("--query", parse_query_flag, "parse a query instead");

    // prob / oracle / dtree dump share an expression argument
    std::string expr_text;
    std::string probs_path;
    auto* prob_cmd = app.add_subcommand("prob", "distribution of an expression via its d-tree");
    prob_cmd->add_option("expr", expr_text, "expression, or @file")->required();
    prob_cmd->add_option("--probs", probs_path, "probability file");

    auto* oracle_cmd = app.add_subcommand("oracle", "brute-force distribution of an expression or query");
    std::string oracle_query;
    DbArgs oracle_db;
    oracle_cmd->add_option("expr", expr_text, "expression, or @file");
    oracle_cmd->add_option("--query", oracle_query, "query, or @file");
    oracle_db.add(oracle_cmd);

    auto* query_cmd = app.add_subcommand("query", "evaluate a query and its answer distributions");
    std::string query_text;
    DbArgs query_db;
    bool table_only = false;
    bool no_fast = false;
    query_cmd->add_option("query", query_text, "query, or @file")->required();
    query_cmd->add_flag("--table-only", table_only, "print the result pvc-table only");
    query_cmd->add_flag("--no-fast-path", no_fast, "always compile the full annotation");
    query_db.add(query_cmd);

    auto* classify_cmd = app.add_subcommand("classify", "tractability class of a query");
    std::string classify_text;
    DbArgs classify_db;
    classify_cmd->add_option("query", classify_text, "query, or @file")->required();
    classify_db.add(classify_cmd);

    GenParams gp;
    std::string aggl = "min", aggr = "min", theta = "<=";
    auto* gen_cmd = app.add_subcommand("gen", "random comparison expressions");
    gen_params(gen_cmd, gp, aggl, aggr, theta);

    auto* bench_cmd = app.add_subcommand("bench", "time compilation over a parameter sweep (CSV)");
    std::string sweep_var = "c", sweep_values = "0:10:1";
    unsigned threads = 1;
    bool brute = false;
    gen_params(bench_cmd, gp, aggl, aggr, theta);
    bench_cmd->add_option("--sweep", sweep_var, "parameter to vary");
    bench_cmd->add_option("--values", sweep_values, "a:b:step or comma list");
    bench_cmd->add_option("--threads", threads, "sweep points run in parallel");
    bench_cmd->add_flag("--brute", brute, "time brute-force enumeration instead");

    auto* dtree_cmd = app.add_subcommand("dtree", "d-tree inspection");
    auto* dump_cmd = dtree_cmd->add_subcommand("dump", "print the d-tree of an expression");
    dtree_cmd->require_subcommand(1);
    dtree_cmd->fallthrough();
    bool dot = false;
    dump_cmd->add_option("expr", expr_text, "expression, or @file")->required();
    dump_cmd->add_option("--probs", probs_path, "probability file");
    dump_cmd->add_flag("--dot", dot, "Graphviz output");

    CLI11_PARSE(app, argc, argv);

    try {
        const SemiringKind sk = common.sk();
        if (parse_cmd->parsed()) {
            if (parse_query_flag) {
                std::cout << print(*parse_query(text_arg(parse_text))) << "\n";
            } else {
                const Operand e = parse_expression(text_arg(parse_text));
                std::cout << print(e) << "\n";
                const VarIndex index(variables(e));
                std::cout << "normalized: " << to_string(normalize(e, index, sk), index) << "\n";
            }
        } else if (prob_cmd->parsed()) {
            const Operand e = parse_expression(text_arg(expr_text));
            const DTree d = compile(e, load_probs(probs_path, sk), sk, common.compile());
            std::cout << serialize(distribution(d));
        } else if (oracle_cmd->parsed()) {
            if (!oracle_query.empty()) {
                const PvcDatabase db = oracle_db.load(sk);
                const BruteAnswer ans = brute_query(*parse_query(text_arg(oracle_query)), db, common.world_limit);
                for (const auto& [key, dist] : ans.tuples) std::cout << "tuple " << key_string(key) << "\n" << serialize(dist);
            } else {
                if (expr_text.empty()) throw Error(ErrorCode::InvalidParams, "give an expression or --query");
                const Operand e = parse_expression(text_arg(expr_text));
                std::cout << serialize(brute_distribution(e, load_probs(oracle_db.probs, sk), sk, common.world_limit));
            }
        } else if (query_cmd->parsed()) {
            const PvcDatabase db = query_db.load(sk);
            const QueryPtr q = parse_query(text_arg(query_text));
            if (table_only) {
                std::cout << print_table(evaluate(q, db));
                return 0;
            }
            AnswerOptions opts;
            opts.joint = common.joint;
            opts.fast_paths = !no_fast;
            opts.compile = common.compile();
            const Answer ans = answer_distributions(q, db, opts);
            std::cout << "# class " << to_string(ans.classification.cls) << ": " << ans.classification.rule << "\n";
            std::cout << print_table(ans.table);
            std::vector<std::string> cells;
            for (const auto& a : ans.table.schema())
                if (a.aggregate) cells.push_back(a.name);
            for (const auto& t : ans.tuples) {
                std::cout << "tuple " << key_string(t.key) << "  nodes=" << t.nodes << " mutex=" << t.mutex_nodes
                          << (t.fast_path ? " fast-path" : "") << "\n";
                std::cout << "phi\n" << serialize(t.annotation);
                for (std::size_t i = 0; i < t.cells.size(); ++i) std::cout << cells[i] << "\n" << serialize(t.cells[i]);
                if (t.joint) std::cout << "joint\n" << serialize(*t.joint);
                if (t.joint || t.cells.empty()) std::cout << "outcomes\n" << serialize(outcomes(t, sk));
            }
        } else if (classify_cmd->parsed()) {
            const PvcDatabase db = classify_db.load(sk);
            const QueryPtr q = parse_query(text_arg(classify_text));
            const Classification c = classify(q, db);
            std::cout << to_string(c.cls) << "\n" << c.rule << "\n";
            const FlatBlock block = flatten(q, schema_lookup(db));
            if (block.children.size() > 1 || block.projected) std::cout << describe(block);
        } else if (gen_cmd->parsed()) {
            finish_params(gp, aggl, aggr, theta, seed);
            std::mt19937_64 rng(gp.seed);
            for (std::size_t i = 0; i < gp.runs; ++i) std::cout << print(gen_expression(gp, rng)) << "\n";
        } else if (bench_cmd->parsed()) {
            finish_params(gp, aggl, aggr, theta, seed);
            const auto rows = run_benchmark(gp, sweep_var, parse_values(sweep_values),
                                            brute ? BenchMode::BruteForce : BenchMode::Compile, threads);
            std::cout << bench_csv(rows);
        } else if (dump_cmd->parsed()) {
            const Operand e = parse_expression(text_arg(expr_text));
            const DTree d = compile(e, load_probs(probs_path, sk), sk, common.compile());
            std::cout << (dot ? dump_dot(d) : dump(d));
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
