#ifndef PVCAGG_DISTRIBUTION_HPP
#define PVCAGG_DISTRIBUTION_HPP

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "pvcagg/algebra.hpp"
#include "pvcagg/error.hpp"
#include "pvcagg/extnat.hpp"

namespace pvcagg {

/// Absolute tolerance for every probability comparison.
inline constexpr double kTolerance = 1e-9;
/// Entries whose probability falls below this after combination are dropped.
inline constexpr double kPruneEpsilon = 1e-15;

/// Finite discrete distribution: value-sorted (value, probability) pairs with
/// unique values and strictly positive probabilities. The empty distribution
/// has mass 0 and is the identity of mixing.
template <class V>
class BasicDistribution {
public:
    using Entry = std::pair<V, double>;

    BasicDistribution() = default;

    static BasicDistribution point(V value) {
        BasicDistribution d;
        d.entries_.emplace_back(std::move(value), 1.0);
        return d;
    }

    /// Sorts, merges duplicate values and drops entries below `prune`.
    static BasicDistribution from_entries(std::vector<Entry> entries, double prune = kPruneEpsilon) {
        std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) { return a.first < b.first; });
        BasicDistribution d;
        d.entries_.reserve(entries.size());
        for (auto& e : entries) {
            if (!d.entries_.empty() && d.entries_.back().first == e.first)
                d.entries_.back().second += e.second;
            else
                d.entries_.push_back(std::move(e));
        }
        std::erase_if(d.entries_, [prune](const Entry& e) { return !(e.second > 0) || e.second < prune; });
        return d;
    }

    const std::vector<Entry>& entries() const { return entries_; }
    std::size_t size() const { return entries_.size(); }
    bool empty() const { return entries_.empty(); }

    double mass() const {
        double m = 0;
        for (const auto& e : entries_) m += e.second;
        return m;
    }

    double probability(const V& value) const {
        auto it = std::lower_bound(entries_.begin(), entries_.end(), value,
                                   [](const Entry& e, const V& v) { return e.first < v; });
        return (it != entries_.end() && it->first == value) ? it->second : 0.0;
    }

    /// Same support (ignoring entries below tol) and probabilities within tol.
    bool approx_equal(const BasicDistribution& other, double tol = kTolerance) const {
        auto a = entries_.begin();
        auto b = other.entries_.begin();
        while (a != entries_.end() || b != other.entries_.end()) {
            if (b == other.entries_.end() || (a != entries_.end() && a->first < b->first)) {
                if (a->second > tol) return false;
                ++a;
            } else if (a == entries_.end() || b->first < a->first) {
                if (b->second > tol) return false;
                ++b;
            } else {
                if (std::abs(a->second - b->second) > tol) return false;
                ++a;
                ++b;
            }
        }
        return true;
    }

private:
    std::vector<Entry> entries_;
};

using Distribution = BasicDistribution<ExtNat>;
using Tuple = std::vector<ExtNat>;
using JointDistribution = BasicDistribution<Tuple>;

/// Per-variable distributions of one probability space.
using VarDistributions = std::map<std::string, Distribution, std::less<>>;

/// Distribution of op(X, Y) for independent X ~ p and Y ~ q.
template <class V, class W, class Op>
auto convolve(const BasicDistribution<V>& p, const BasicDistribution<W>& q, Op op) {
    using R = decltype(op(std::declval<const V&>(), std::declval<const W&>()));
    std::vector<std::pair<R, double>> out;
    out.reserve(p.size() * q.size());
    for (const auto& [a, pa] : p.entries())
        for (const auto& [b, pb] : q.entries()) out.emplace_back(op(a, b), pa * pb);
    return BasicDistribution<R>::from_entries(std::move(out));
}

/// Weighted mixture sum_i w_i * child_i, merged by value.
template <class V>
BasicDistribution<V> mix(const std::vector<double>& weights, const std::vector<BasicDistribution<V>>& children) {
    if (weights.size() != children.size())
        throw Error(ErrorCode::LengthMismatch, std::to_string(weights.size()) + " weights for " +
                                                   std::to_string(children.size()) + " children");
    double total = 0;
    for (double w : weights) total += w;
    if (std::abs(total - 1.0) > kTolerance)
        throw Error(ErrorCode::WeightSumOutOfTolerance, "mixture weights sum to " + std::to_string(total));
    std::vector<typename BasicDistribution<V>::Entry> out;
    for (std::size_t i = 0; i < children.size(); ++i)
        for (const auto& [v, pv] : children[i].entries()) out.emplace_back(v, weights[i] * pv);
    return BasicDistribution<V>::from_entries(std::move(out));
}

/// Distribution of [X theta Y] over {0, 1} for independent X ~ p and Y ~ q.
Distribution compare_convolve(const Distribution& p, const Distribution& q, Theta theta);

/// Throws InvalidDistribution unless d is non-empty, has values in the
/// semiring carrier and sums to 1 within tolerance.
void validate_variable_distribution(const std::string& name, const Distribution& d, SemiringKind sk);

/// `value<TAB>probability` lines in value order.
std::string serialize(const Distribution& d);
std::string serialize(const JointDistribution& d);
Distribution parse_distribution(std::string_view text);

}  // namespace pvcagg

#endif  // PVCAGG_DISTRIBUTION_HPP
