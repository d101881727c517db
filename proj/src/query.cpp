#include "pvcagg/query.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <set>

#include "pvcagg/error.hpp"

namespace pvcagg {

QueryPtr Query::base(std::string name) {
    auto q = std::make_shared<Query>();
    q->kind = Kind::Relation;
    q->relation = std::move(name);
    return q;
}

QueryPtr Query::rename(std::vector<std::pair<std::string, std::string>> renames, QueryPtr child) {
    auto q = std::make_shared<Query>();
    q->kind = Kind::Rename;
    q->renames = std::move(renames);
    q->children = {std::move(child)};
    return q;
}

QueryPtr Query::select(std::vector<Predicate> predicates, QueryPtr child) {
    auto q = std::make_shared<Query>();
    q->kind = Kind::Select;
    q->predicates = std::move(predicates);
    q->children = {std::move(child)};
    return q;
}

QueryPtr Query::project(std::vector<std::string> attributes, QueryPtr child) {
    auto q = std::make_shared<Query>();
    q->kind = Kind::Project;
    q->attributes = std::move(attributes);
    q->children = {std::move(child)};
    return q;
}

QueryPtr Query::product(QueryPtr left, QueryPtr right) {
    auto q = std::make_shared<Query>();
    q->kind = Kind::Product;
    q->children = {std::move(left), std::move(right)};
    return q;
}

QueryPtr Query::union_of(QueryPtr left, QueryPtr right) {
    auto q = std::make_shared<Query>();
    q->kind = Kind::Union;
    q->children = {std::move(left), std::move(right)};
    return q;
}

QueryPtr Query::aggregate(std::vector<std::string> group_by, std::vector<AggSpec> aggregates, QueryPtr child) {
    auto q = std::make_shared<Query>();
    q->kind = Kind::Aggregate;
    q->attributes = std::move(group_by);
    q->aggregates = std::move(aggregates);
    q->children = {std::move(child)};
    return q;
}

QueryPtr Query::join(QueryPtr left, QueryPtr right) {
    auto q = std::make_shared<Query>();
    q->kind = Kind::Join;
    q->children = {std::move(left), std::move(right)};
    return q;
}

// --- parsing ------------------------------------------------------------------

namespace {

enum class Tok { Ident, Number, String, LParen, RParen, LBracket, RBracket, Comma, Semicolon, Arrow, Theta, Star, End };

struct Token {
    Tok kind;
    std::string text;
    std::size_t line;
    std::size_t column;
};

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

std::vector<Token> tokenize(std::string_view src) {
    std::vector<Token> out;
    std::size_t line = 1;
    std::size_t col = 1;
    std::size_t i = 0;
    auto push = [&](Tok k, std::string text, std::size_t len) {
        out.push_back(Token{k, std::move(text), line, col});
        i += len;
        col += len;
    };
    while (i < src.size()) {
        const char c = src[i];
        if (c == '\n') {
            ++line;
            col = 1;
            ++i;
            continue;
        }
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
            ++col;
            continue;
        }
        if (ident_start(c)) {
            std::size_t j = i;
            while (j < src.size() && ident_char(src[j])) ++j;
            while (j < src.size() && src[j] == '\'') ++j;  // primed names
            push(Tok::Ident, std::string(src.substr(i, j - i)), j - i);
            continue;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            std::size_t j = i;
            while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
            push(Tok::Number, std::string(src.substr(i, j - i)), j - i);
            continue;
        }
        if (c == '\'') {
            std::string text;
            std::size_t j = i + 1;
            while (true) {
                if (j >= src.size()) throw ParseError("unterminated string", line, col);
                if (src[j] == '\'') {
                    if (j + 1 < src.size() && src[j + 1] == '\'') {
                        text += '\'';
                        j += 2;
                        continue;
                    }
                    break;
                }
                text += src[j++];
            }
            push(Tok::String, std::move(text), j + 1 - i);
            continue;
        }
        const std::string_view two = src.substr(i, 2);
        if (two == "<-") {
            push(Tok::Arrow, "<-", 2);
            continue;
        }
        if (two == "<=" || two == ">=" || two == "!=" || two == "<>" || two == "==") {
            push(Tok::Theta, std::string(two), 2);
            continue;
        }
        switch (c) {
        case '(': push(Tok::LParen, "(", 1); continue;
        case ')': push(Tok::RParen, ")", 1); continue;
        case '[': push(Tok::LBracket, "[", 1); continue;
        case ']': push(Tok::RBracket, "]", 1); continue;
        case ',': push(Tok::Comma, ",", 1); continue;
        case ';': push(Tok::Semicolon, ";", 1); continue;
        case '*': push(Tok::Star, "*", 1); continue;
        case '=':
        case '<':
        case '>': push(Tok::Theta, std::string(1, c), 1); continue;
        default: break;
        }
        throw ParseError(std::string("unexpected character '") + c + "'", line, col);
    }
    out.push_back(Token{Tok::End, "", line, col});
    return out;
}

class QueryParser {
public:
    explicit QueryParser(std::string_view src) : toks_(tokenize(src)) {}

    QueryPtr parse_top() {
        QueryPtr q = parse_query();
        expect(Tok::End, "end of input");
        return q;
    }

private:
    const Token& peek(std::size_t ahead = 0) const { return toks_[std::min(pos_ + ahead, toks_.size() - 1)]; }
    const Token& next() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }

    [[noreturn]] void fail(const std::string& what) const {
        const Token& t = peek();
        throw ParseError("expected " + what + (t.kind == Tok::End ? " but input ended" : " near '" + t.text + "'"),
                         t.line, t.column);
    }

    const Token& expect(Tok kind, const std::string& what) {
        if (peek().kind != kind) fail(what);
        return next();
    }

    std::string ident(const std::string& what) { return expect(Tok::Ident, what).text; }

    QueryPtr parenthesized() {
        expect(Tok::LParen, "'('");
        QueryPtr q = parse_query();
        expect(Tok::RParen, "')'");
        return q;
    }

    std::pair<QueryPtr, QueryPtr> pair() {
        expect(Tok::LParen, "'('");
        QueryPtr a = parse_query();
        expect(Tok::Comma, "','");
        QueryPtr b = parse_query();
        expect(Tok::RParen, "')'");
        return {std::move(a), std::move(b)};
    }

    std::vector<std::string> names_until(Tok end) {
        std::vector<std::string> out;
        if (peek().kind == end) return out;
        out.push_back(ident("attribute name"));
        while (peek().kind == Tok::Comma) {
            next();
            out.push_back(ident("attribute name"));
        }
        return out;
    }

    PredTerm pred_term() {
        const Token& t = peek();
        if (t.kind == Tok::Ident) {
            next();
            if (t.text == "inf") return PredTerm::value(ExtNat::pos_inf());
            return PredTerm::attr(t.text);
        }
        if (t.kind == Tok::Number) {
            next();
            auto v = ExtNat::parse(t.text);
            if (!v) throw ParseError("number out of range", t.line, t.column);
            return PredTerm::value(*v);
        }
        if (t.kind == Tok::String) {
            next();
            return PredTerm::value(t.text);
        }
        fail("attribute, number or string");
    }

    Predicate predicate() {
        Predicate p;
        p.lhs = pred_term();
        const Token& t = expect(Tok::Theta, "comparison operator");
        p.theta = *parse_theta(t.text);
        p.rhs = pred_term();
        return p;
    }

    QueryPtr parse_query() {
        const Token& t = peek();
        if (t.kind != Tok::Ident) fail("query");
        const std::string word = t.text;
        const Tok after = peek(1).kind;
        if (word == "rename" && after == Tok::LBracket) {
            next();
            next();
            std::vector<std::pair<std::string, std::string>> renames;
            do {
                if (!renames.empty()) next();
                std::string to = ident("new attribute name");
                expect(Tok::Arrow, "'<-'");
                std::string from = ident("attribute name");
                renames.emplace_back(std::move(to), std::move(from));
            } while (peek().kind == Tok::Comma);
            expect(Tok::RBracket, "']'");
            return Query::rename(std::move(renames), parenthesized());
        }
        if (word == "select" && after == Tok::LBracket) {
            next();
            next();
            std::vector<Predicate> preds{predicate()};
            while (peek().kind == Tok::Comma || (peek().kind == Tok::Ident && peek().text == "and")) {
                next();
                preds.push_back(predicate());
            }
            expect(Tok::RBracket, "']'");
            return Query::select(std::move(preds), parenthesized());
        }
        if (word == "project" && after == Tok::LBracket) {
            next();
            next();
            auto attrs = names_until(Tok::RBracket);
            expect(Tok::RBracket, "']'");
            return Query::project(std::move(attrs), parenthesized());
        }
        if (word == "agg" && after == Tok::LBracket) {
            next();
            next();
            std::vector<std::string> group;
            if (peek().kind != Tok::Semicolon) group = names_until(Tok::Semicolon);
            expect(Tok::Semicolon, "';'");
            std::vector<AggSpec> aggs;
            do {
                if (!aggs.empty()) next();
                AggSpec a;
                a.target = ident("aggregate name");
                expect(Tok::Arrow, "'<-'");
                const Token& m = expect(Tok::Ident, "aggregation function");
                auto kind = parse_monoid_kind(m.text);
                if (!kind) throw ParseError("unknown aggregation '" + m.text + "'", m.line, m.column);
                a.monoid = *kind;
                expect(Tok::LParen, "'('");
                if (peek().kind == Tok::Star) {
                    if (a.monoid != MonoidKind::Count) fail("attribute name");
                    next();
                } else {
                    a.source = ident("attribute name");
                }
                expect(Tok::RParen, "')'");
                aggs.push_back(std::move(a));
            } while (peek().kind == Tok::Comma);
            expect(Tok::RBracket, "']'");
            return Query::aggregate(std::move(group), std::move(aggs), parenthesized());
        }
        if ((word == "product" || word == "union" || word == "join") && after == Tok::LParen) {
            next();
            auto [a, b] = pair();
            if (word == "product") return Query::product(std::move(a), std::move(b));
            if (word == "union") return Query::union_of(std::move(a), std::move(b));
            return Query::join(std::move(a), std::move(b));
        }
        next();
        return Query::base(word);
    }

    std::vector<Token> toks_;
    std::size_t pos_ = 0;
};

std::string print_term(const PredTerm& t) {
    if (t.is_attribute) return t.attribute;
    if (const auto* n = std::get_if<ExtNat>(&t.constant)) return n->is_pos_inf() ? "inf" : n->to_string();
    std::string s = "'";
    for (char c : std::get<std::string>(t.constant)) s += c == '\'' ? std::string("''") : std::string(1, c);
    return s + "'";
}

std::string join_names(const std::vector<std::string>& names) {
    std::string out;
    for (std::size_t i = 0; i < names.size(); ++i) out += (i ? ", " : "") + names[i];
    return out;
}

}  // namespace

QueryPtr parse_query(std::string_view text) { return QueryParser(text).parse_top(); }

std::string print(const Query& q) {
    using K = Query::Kind;
    switch (q.kind) {
    case K::Relation: return q.relation;
    case K::Rename: {
        std::string out = "rename[";
        for (std::size_t i = 0; i < q.renames.size(); ++i)
            out += (i ? ", " : "") + q.renames[i].first + " <- " + q.renames[i].second;
        return out + "](" + print(*q.children[0]) + ")";
    }
    case K::Select: {
        std::string out = "select[";
        for (std::size_t i = 0; i < q.predicates.size(); ++i) {
            const auto& p = q.predicates[i];
            out += (i ? ", " : "") + print_term(p.lhs) + " " + std::string(to_string(p.theta)) + " " + print_term(p.rhs);
        }
        return out + "](" + print(*q.children[0]) + ")";
    }
    case K::Project: return "project[" + join_names(q.attributes) + "](" + print(*q.children[0]) + ")";
    case K::Product: return "product(" + print(*q.children[0]) + ", " + print(*q.children[1]) + ")";
    case K::Union: return "union(" + print(*q.children[0]) + ", " + print(*q.children[1]) + ")";
    case K::Join: return "join(" + print(*q.children[0]) + ", " + print(*q.children[1]) + ")";
    case K::Aggregate: {
        std::string out = "agg[" + join_names(q.attributes) + "; ";
        for (std::size_t i = 0; i < q.aggregates.size(); ++i) {
            const auto& a = q.aggregates[i];
            out += (i ? ", " : "") + a.target + " <- " + std::string(to_string(a.monoid)) + "(" +
                   (a.source.empty() ? "*" : a.source) + ")";
        }
        return out + "](" + print(*q.children[0]) + ")";
    }
    }
    return "?";
}

SchemaLookup schema_lookup(const PvcDatabase& db) {
    return [&db](std::string_view name) -> const std::vector<Attribute>* {
        if (!db.has_table(name)) return nullptr;
        return &db.table(name).schema();
    };
}

// --- schema inference and validation -----------------------------------------

namespace {

/// Reports a problem either by throwing or by recording it.
struct Reporter {
    std::vector<std::string>* sink = nullptr;

    void operator()(ErrorCode code, const Query& q, const std::string& message) const {
        if (!sink) throw Error(code, message);
        std::string where = print(q);
        if (where.size() > 60) where = where.substr(0, 57) + "...";
        sink->push_back(where + ": " + message);
    }
};

const Attribute* find_attr(const std::vector<Attribute>& schema, const std::string& name) {
    for (const auto& a : schema)
        if (a.name == name) return &a;
    return nullptr;
}

std::vector<Attribute> infer(const Query& q, const SchemaLookup& lookup, const Reporter& report) {
    using K = Query::Kind;
    switch (q.kind) {
    case K::Relation: {
        const auto* s = lookup(q.relation);
        if (!s) {
            report(ErrorCode::UnknownRelation, q, "no relation named " + q.relation);
            return {};
        }
        return *s;
    }
    case K::Rename: {
        auto schema = infer(*q.children[0], lookup, report);
        for (const auto& [to, from] : q.renames) {
            auto it = std::find_if(schema.begin(), schema.end(), [&](const Attribute& a) { return a.name == from; });
            if (it == schema.end()) {
                report(ErrorCode::SchemaMismatch, q, "cannot rename missing attribute " + from);
                continue;
            }
            if (to != from && find_attr(schema, to)) {
                report(ErrorCode::SchemaMismatch, q, "attribute " + to + " already exists");
                continue;
            }
            it->name = to;
        }
        return schema;
    }
    case K::Select: {
        auto schema = infer(*q.children[0], lookup, report);
        for (const auto& p : q.predicates) {
            bool aggregate = false;
            bool text = false;
            for (const PredTerm* t : {&p.lhs, &p.rhs}) {
                if (t->is_attribute) {
                    const Attribute* a = find_attr(schema, t->attribute);
                    if (!a)
                        report(ErrorCode::SchemaMismatch, q, "unknown attribute " + t->attribute);
                    else
                        aggregate = aggregate || a->aggregate;
                } else {
                    text = text || std::holds_alternative<std::string>(t->constant);
                }
            }
            if (aggregate && text) report(ErrorCode::SchemaMismatch, q, "aggregation attribute compared with a string");
        }
        return schema;
    }
    case K::Project: {
        auto child = infer(*q.children[0], lookup, report);
        std::vector<Attribute> schema;
        std::set<std::string> seen;
        for (const auto& name : q.attributes) {
            const Attribute* a = find_attr(child, name);
            if (!a) {
                report(ErrorCode::SchemaMismatch, q, "unknown attribute " + name);
                continue;
            }
            if (a->aggregate)
                report(ErrorCode::InvalidQuery, q, "projection keeps aggregation attribute " + name);
            if (!seen.insert(name).second) report(ErrorCode::SchemaMismatch, q, "attribute " + name + " listed twice");
            schema.push_back(*a);
        }
        return schema;
    }
    case K::Product: {
        auto schema = infer(*q.children[0], lookup, report);
        for (const auto& a : infer(*q.children[1], lookup, report)) {
            if (find_attr(schema, a.name))
                report(ErrorCode::SchemaMismatch, q, "both operands have attribute " + a.name + "; rename one");
            schema.push_back(a);
        }
        return schema;
    }
    case K::Union: {
        auto left = infer(*q.children[0], lookup, report);
        auto right = infer(*q.children[1], lookup, report);
        for (const auto* side : {&left, &right})
            for (const auto& a : *side)
                if (a.aggregate) report(ErrorCode::InvalidQuery, q, "union operand has aggregation attribute " + a.name);
        if (left.size() != right.size() ||
            !std::equal(left.begin(), left.end(), right.begin(),
                        [](const Attribute& a, const Attribute& b) { return a.name == b.name; }))
            report(ErrorCode::SchemaMismatch, q, "union operands have different schemas");
        return left;
    }
    case K::Join: {
        auto left = infer(*q.children[0], lookup, report);
        auto right = infer(*q.children[1], lookup, report);
        auto schema = left;
        for (const auto& a : right) {
            const Attribute* l = find_attr(left, a.name);
            if ((l && l->aggregate) || a.aggregate)
                report(ErrorCode::InvalidQuery, q, "join operand has aggregation attribute " + a.name);
            if (!l) schema.push_back(a);
        }
        for (const auto& a : left)
            if (a.aggregate) report(ErrorCode::InvalidQuery, q, "join operand has aggregation attribute " + a.name);
        return schema;
    }
    case K::Aggregate: {
        auto child = infer(*q.children[0], lookup, report);
        std::vector<Attribute> schema;
        std::set<std::string> seen;
        for (const auto& name : q.attributes) {
            const Attribute* a = find_attr(child, name);
            if (!a) {
                report(ErrorCode::SchemaMismatch, q, "unknown attribute " + name);
                continue;
            }
            if (a->aggregate) report(ErrorCode::InvalidQuery, q, "grouping on aggregation attribute " + name);
            if (!seen.insert(name).second) report(ErrorCode::SchemaMismatch, q, "attribute " + name + " listed twice");
            schema.push_back(*a);
        }
        for (const auto& agg : q.aggregates) {
            if (!agg.source.empty()) {
                const Attribute* a = find_attr(child, agg.source);
                if (!a)
                    report(ErrorCode::SchemaMismatch, q, "unknown attribute " + agg.source);
                else if (a->aggregate)
                    report(ErrorCode::InvalidQuery, q, "cannot aggregate aggregation attribute " + agg.source);
            } else if (agg.monoid != MonoidKind::Count) {
                report(ErrorCode::InvalidQuery, q, "only count may omit its attribute");
            }
            if (!seen.insert(agg.target).second)
                report(ErrorCode::SchemaMismatch, q, "attribute " + agg.target + " defined twice");
            schema.push_back(Attribute{agg.target, true});
        }
        return schema;
    }
    }
    return {};
}

}  // namespace

std::vector<Attribute> infer_schema(const Query& q, const SchemaLookup& lookup) {
    return infer(q, lookup, Reporter{});
}

std::vector<std::string> validate_query(const Query& q, const SchemaLookup& lookup) {
    std::vector<std::string> problems;
    infer(q, lookup, Reporter{&problems});
    return problems;
}

std::vector<std::string> validate_query(const Query& q, const PvcDatabase& db) {
    return validate_query(q, schema_lookup(db));
}

std::vector<std::string> base_relations(const Query& q) {
    if (q.kind == Query::Kind::Relation) return {q.relation};
    std::vector<std::string> out;
    for (const auto& c : q.children) {
        auto sub = base_relations(*c);
        out.insert(out.end(), sub.begin(), sub.end());
    }
    return out;
}

QueryPtr expand_joins(const QueryPtr& q, const SchemaLookup& lookup) {
    if (q->kind == Query::Kind::Relation) return q;
    std::vector<QueryPtr> children;
    for (const auto& c : q->children) children.push_back(expand_joins(c, lookup));
    if (q->kind != Query::Kind::Join) {
        auto copy = std::make_shared<Query>(*q);
        copy->children = std::move(children);
        return copy;
    }
    auto left = infer_schema(*children[0], lookup);
    auto right = infer_schema(*children[1], lookup);
    std::set<std::string> taken;
    for (const auto* side : {&left, &right})
        for (const auto& a : *side) taken.insert(a.name);
    std::vector<std::pair<std::string, std::string>> renames;
    std::vector<Predicate> equalities;
    std::vector<std::string> keep;
    for (const auto& a : left) keep.push_back(a.name);
    for (const auto& a : right) {
        if (!find_attr(left, a.name)) {
            keep.push_back(a.name);
            continue;
        }
        std::string fresh = a.name + "'";
        while (taken.count(fresh)) fresh += "'";
        taken.insert(fresh);
        renames.emplace_back(fresh, a.name);
        equalities.push_back(Predicate{PredTerm::attr(a.name), Theta::Eq, PredTerm::attr(fresh)});
    }
    if (renames.empty()) return Query::product(children[0], children[1]);
    QueryPtr body = Query::product(children[0], Query::rename(std::move(renames), children[1]));
    return Query::project(std::move(keep), Query::select(std::move(equalities), std::move(body)));
}

}  // namespace pvcagg
