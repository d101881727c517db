#ifndef PVCAGG_IO_HPP
#define PVCAGG_IO_HPP

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "pvcagg/pvc.hpp"

namespace pvcagg {

// Table files are TSV. The header names the attributes and ends with `phi`;
// aggregation attributes carry the suffix `:agg`. Ordinary cells are numbers
// (or inf) or strings, optionally 'quoted'; aggregation cells and phi are
// expressions. Blank lines and lines starting with # are skipped.
//
//   sid   shop    phi
//   1     M&S     x1
//
// Probability files hold  variable <TAB> value <TAB> probability  lines.

PvcTable parse_table(std::string name, std::string_view text);
std::string print_table(const PvcTable& table);

/// Throws ParseError, DuplicateVariable (same variable and value twice) and
/// InvalidDistribution.
VarDistributions parse_probabilities(std::string_view text, SemiringKind sk);
std::string print_probabilities(const VarDistributions& dists);

struct NamedText {
    std::string name;
    std::string text;
};

/// Builds and validates a database (MissingDistribution for unlisted variables).
PvcDatabase parse_database(const std::vector<NamedText>& tables, std::string_view probabilities, SemiringKind sk);

/// Table names are the file stems.
PvcDatabase load_database(const std::vector<std::filesystem::path>& tables, const std::filesystem::path& probabilities,
                          SemiringKind sk);

std::string read_file(const std::filesystem::path& path);

}  // namespace pvcagg

#endif  // PVCAGG_IO_HPP
