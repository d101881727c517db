#include "pvcagg/io.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include "pvcagg/error.hpp"
#include "pvcagg/syntax.hpp"

namespace pvcagg {

namespace {

constexpr std::string_view kAggSuffix = ":agg";

std::vector<std::string> split_tabs(std::string_view line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        std::size_t tab = line.find('\t', start);
        out.emplace_back(line.substr(start, tab == std::string_view::npos ? std::string_view::npos : tab - start));
        if (tab == std::string_view::npos) break;
        start = tab + 1;
    }
    return out;
}

/// Lines with their 1-based numbers, minus blanks and comments.
std::vector<std::pair<std::size_t, std::string>> content_lines(std::string_view text) {
    std::vector<std::pair<std::size_t, std::string>> out;
    std::size_t number = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        std::string line(text.substr(start, end - start));
        ++number;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty() && line[0] != '#' && line.find_first_not_of(" \t") != std::string::npos)
            out.emplace_back(number, std::move(line));
        start = end + 1;
    }
    return out;
}

std::size_t column_of(const std::vector<std::string>& fields, std::size_t k) {
    std::size_t col = 1;
    for (std::size_t i = 0; i < k; ++i) col += fields[i].size() + 1;
    return col;
}

Value parse_value(const std::string& text) {
    if (text.size() >= 2 && text.front() == '\'' && text.back() == '\'') return text.substr(1, text.size() - 2);
    if (auto n = ExtNat::parse(text)) return *n;
    return text;
}

std::string print_value(const Value& v) {
    if (const auto* n = std::get_if<ExtNat>(&v)) return n->to_string();
    const auto& s = std::get<std::string>(v);
    if (ExtNat::parse(s) || (!s.empty() && s.front() == '\'') || s.empty()) return "'" + s + "'";
    return s;
}

template <typename F>
auto at_cell(std::size_t line, std::size_t col, F&& f) {
    try {
        return f();
    } catch (const ParseError& e) {
        throw ParseError(e.detail(), line, col + e.column() - 1);
    }
}

}  // namespace

PvcTable parse_table(std::string name, std::string_view text) {
    const auto lines = content_lines(text);
    if (lines.empty()) throw ParseError("missing header in table " + name, 1, 1);
    const auto header = split_tabs(lines[0].second);
    if (header.back() != "phi") throw ParseError("last header column must be phi", lines[0].first, 1);
    std::vector<Attribute> schema;
    for (std::size_t i = 0; i + 1 < header.size(); ++i) {
        std::string attr = header[i];
        bool agg = attr.size() > kAggSuffix.size() && attr.compare(attr.size() - kAggSuffix.size(), kAggSuffix.size(), kAggSuffix) == 0;
        if (agg) attr.resize(attr.size() - kAggSuffix.size());
        if (attr.empty()) throw ParseError("empty attribute name", lines[0].first, column_of(header, i));
        schema.push_back(Attribute{attr, agg});
    }
    PvcTable table(std::move(name), schema);
    for (std::size_t k = 1; k < lines.size(); ++k) {
        const auto& [number, line] = lines[k];
        const auto fields = split_tabs(line);
        if (fields.size() != header.size())
            throw ParseError("expected " + std::to_string(header.size()) + " fields, found " +
                                 std::to_string(fields.size()),
                             number, 1);
        Row row;
        for (std::size_t i = 0; i < schema.size(); ++i) {
            if (schema[i].aggregate)
                row.cells.emplace_back(
                    at_cell(number, column_of(fields, i), [&] { return parse_semimodule(fields[i]); }));
            else
                row.cells.emplace_back(parse_value(fields[i]));
        }
        row.annotation = at_cell(number, column_of(fields, schema.size()),
                                 [&] { return parse_semiring(fields[schema.size()]); });
        table.add_row(std::move(row));
    }
    return table;
}

std::string print_table(const PvcTable& table) {
    std::string out;
    for (const auto& a : table.schema()) out += a.name + (a.aggregate ? std::string(kAggSuffix) : "") + "\t";
    out += "phi\n";
    for (const auto& row : table.rows()) {
        for (const auto& c : row.cells) {
            if (const auto* m = std::get_if<SemimoduleExpr>(&c))
                out += print(*m);
            else
                out += print_value(std::get<Value>(c));
            out += "\t";
        }
        out += print(row.annotation) + "\n";
    }
    return out;
}

VarDistributions parse_probabilities(std::string_view text, SemiringKind sk) {
    std::map<std::string, std::map<std::uint64_t, double>> raw;
    for (const auto& [number, line] : content_lines(text)) {
        const auto fields = split_tabs(line);
        if (fields.size() != 3) throw ParseError("expected variable, value and probability", number, 1);
        auto value = ExtNat::parse(fields[1]);
        if (!value || !value->is_finite())
            throw ParseError("value must be a natural number", number, column_of(fields, 1));
        char* end = nullptr;
        const double p = std::strtod(fields[2].c_str(), &end);
        if (fields[2].empty() || *end != '\0')
            throw ParseError("probability must be a number", number, column_of(fields, 2));
        if (!raw[fields[0]].emplace(value->value(), p).second)
            throw Error(ErrorCode::DuplicateVariable,
                        "variable " + fields[0] + " lists value " + fields[1] + " twice (line " + std::to_string(number) + ")");
    }
    VarDistributions out;
    for (const auto& [var, entries] : raw) {
        std::vector<std::pair<ExtNat, double>> list;
        for (const auto& [v, p] : entries) list.emplace_back(ExtNat(v), p);
        Distribution d = Distribution::from_entries(list, 0);
        validate_variable_distribution(var, d, sk);
        out.emplace(var, std::move(d));
    }
    return out;
}

std::string print_probabilities(const VarDistributions& dists) {
    std::string out;
    char buf[32];
    for (const auto& [var, d] : dists) {
        for (const auto& [v, p] : d.entries()) {
            std::snprintf(buf, sizeof buf, "%.17g", p);
            out += var + "\t" + v.to_string() + "\t" + buf + "\n";
        }
    }
    return out;
}

PvcDatabase parse_database(const std::vector<NamedText>& tables, std::string_view probabilities, SemiringKind sk) {
    PvcDatabase db(sk);
    for (const auto& t : tables) {
        if (db.has_table(t.name)) throw Error(ErrorCode::SchemaMismatch, "table " + t.name + " given twice");
        db.add_table(parse_table(t.name, t.text));
    }
    for (auto& [var, d] : parse_probabilities(probabilities, sk)) db.set_distribution(var, std::move(d));
    db.validate();
    return db;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::InvalidParams, "cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

PvcDatabase load_database(const std::vector<std::filesystem::path>& tables, const std::filesystem::path& probabilities,
                          SemiringKind sk) {
    std::vector<NamedText> texts;
    for (const auto& p : tables) texts.push_back({p.stem().string(), read_file(p)});
    return parse_database(texts, read_file(probabilities), sk);
}

}  // namespace pvcagg
