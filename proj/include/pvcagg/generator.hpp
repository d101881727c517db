#ifndef PVCAGG_GENERATOR_HPP
#define PVCAGG_GENERATOR_HPP

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "pvcagg/algebra.hpp"
#include "pvcagg/distribution.hpp"

namespace pvcagg {

/// Shape of a random comparison
///   [ sum_AGGL^L Phi_i (x) v_i  theta  sum_AGGR^R Psi_j (x) w_j ]   (R > 0)
///   [ sum_AGGL^L Phi_i (x) v_i  theta  c ]                         (R = 0)
/// Every Phi_i / Psi_j is a sum of `clauses` products of `literals` distinct
/// variables drawn from x1..x<vars>; values are uniform in [0, maxv].
struct GenParams {
    std::size_t L = 10;
    std::size_t R = 0;
    MonoidKind aggl = MonoidKind::Min;
    MonoidKind aggr = MonoidKind::Min;
    std::size_t vars = 10;
    std::size_t clauses = 1;
    std::size_t literals = 1;
    std::uint64_t maxv = 10;
    std::uint64_t c = 5;
    Theta theta = Theta::Le;
    std::size_t runs = 1;
    std::uint64_t seed = 1;
    double probability = 0.5;  // P[x = 1] for every variable

    /// Throws InvalidParams.
    void validate() const;
};

/// The generator is std::mt19937_64 seeded with `seed`; expression k of a
/// run series is the k-th draw from that one stream.
SemiringExpr gen_expression(const GenParams& p);
SemiringExpr gen_expression(const GenParams& p, std::mt19937_64& rng);

/// Boolean distributions for x1..x<vars>.
VarDistributions gen_distributions(const GenParams& p);

/// Sets a parameter by name: L, R, vars, clauses, literals, maxv, c, runs.
void set_param(GenParams& p, const std::string& name, std::uint64_t value);

enum class BenchMode { Compile, BruteForce };

struct BenchRow {
    std::string sweep_var;
    std::uint64_t value = 0;
    double mean_ms = 0;
    double stddev_ms = 0;
    double nodes = 0;      // mean d-tree size (0 for brute force)
    double dist_size = 0;  // mean support size
};

/// One row per sweep value; timings drop the fastest and slowest run when
/// there are at least three. `threads` > 1 shards sweep points.
std::vector<BenchRow> run_benchmark(const GenParams& base, const std::string& sweep_var,
                                    const std::vector<std::uint64_t>& values, BenchMode mode = BenchMode::Compile,
                                    unsigned threads = 1);

std::string bench_csv(const std::vector<BenchRow>& rows);

}  // namespace pvcagg

#endif  // PVCAGG_GENERATOR_HPP
