#include "pvcagg/distribution.hpp"

#include <cstdio>
#include <sstream>

namespace pvcagg {

Distribution compare_convolve(const Distribution& p, const Distribution& q, Theta theta) {
    double yes = 0;
    double no = 0;
    for (const auto& [a, pa] : p.entries())
        for (const auto& [b, pb] : q.entries()) (compare(a, theta, b) ? yes : no) += pa * pb;
    return Distribution::from_entries({{ExtNat(0), no}, {ExtNat(1), yes}});
}

void validate_variable_distribution(const std::string& name, const Distribution& d, SemiringKind sk) {
    if (d.empty()) throw Error(ErrorCode::InvalidDistribution, "variable " + name + " has an empty distribution");
    for (const auto& [v, pv] : d.entries()) {
        if (!v.is_finite() || !semiring::in_carrier(sk, v.value()))
            throw Error(ErrorCode::InvalidDistribution,
                        "variable " + name + " takes value " + v.to_string() + " outside the " +
                            std::string(to_string(sk)) + " carrier");
        if (!(pv > 0) || pv > 1 + kTolerance)
            throw Error(ErrorCode::InvalidDistribution, "variable " + name + " has probability out of range");
    }
    if (std::abs(d.mass() - 1.0) > kTolerance)
        throw Error(ErrorCode::InvalidDistribution,
                    "distribution of " + name + " sums to " + std::to_string(d.mass()));
}

namespace {

std::string format_probability(double p) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", p);
    return buf;
}

}  // namespace

std::string serialize(const Distribution& d) {
    std::string out;
    for (const auto& [v, pv] : d.entries()) out += v.to_string() + '\t' + format_probability(pv) + '\n';
    return out;
}

std::string serialize(const JointDistribution& d) {
    std::string out;
    for (const auto& [v, pv] : d.entries()) {
        out += '(';
        for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + v[i].to_string();
        out += ")\t" + format_probability(pv) + '\n';
    }
    return out;
}

Distribution parse_distribution(std::string_view text) {
    std::vector<Distribution::Entry> entries;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        auto tab = line.find('\t');
        if (tab == std::string::npos) throw ParseError("expected value<TAB>probability", lineno, 1);
        auto value = ExtNat::parse(std::string_view(line).substr(0, tab));
        if (!value) throw ParseError("bad value", lineno, 1);
        double p = 0;
        try {
            std::size_t used = 0;
            p = std::stod(line.substr(tab + 1), &used);
        } catch (const std::exception&) {
            throw ParseError("bad probability", lineno, tab + 2);
        }
        entries.emplace_back(*value, p);
    }
    return Distribution::from_entries(std::move(entries), 0.0);
}

}  // namespace pvcagg
