#include "pvcagg/syntax.hpp"

#include <cctype>
#include <vector>

#include "pvcagg/error.hpp"

namespace pvcagg {

namespace {

enum class Tok { Ident, Number, Plus, Minus, Star, LParen, RParen, LBracket, RBracket, LBrace, RBrace, Otimes, Theta, End };

struct Token {
    Tok kind;
    std::string text;
    std::size_t line;
    std::size_t column;
};

std::vector<Token> tokenize(std::string_view src) {
    std::vector<Token> out;
    std::size_t line = 1;
    std::size_t col = 1;
    std::size_t i = 0;
    auto push = [&](Tok k, std::size_t len) {
        out.push_back(Token{k, std::string(src.substr(i, len)), line, col});
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
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t j = i;
            while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_')) ++j;
            push(Tok::Ident, j - i);
            continue;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            std::size_t j = i;
            while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
            push(Tok::Number, j - i);
            continue;
        }
        if (src.substr(i, 3) == "(x)") {
            push(Tok::Otimes, 3);
            continue;
        }
        if (src.substr(i, 3) == "\xE2\x8A\x97") {  // U+2297
            push(Tok::Otimes, 3);
            continue;
        }
        const std::string_view two = src.substr(i, 2);
        if (two == "<=" || two == ">=" || two == "!=" || two == "<>" || two == "==") {
            push(Tok::Theta, 2);
            continue;
        }
        switch (c) {
        case '+': push(Tok::Plus, 1); continue;
        case '-': push(Tok::Minus, 1); continue;
        case '*': push(Tok::Star, 1); continue;
        case '(': push(Tok::LParen, 1); continue;
        case ')': push(Tok::RParen, 1); continue;
        case '[': push(Tok::LBracket, 1); continue;
        case ']': push(Tok::RBracket, 1); continue;
        case '{': push(Tok::LBrace, 1); continue;
        case '}': push(Tok::RBrace, 1); continue;
        case '=':
        case '<':
        case '>': push(Tok::Theta, 1); continue;
        default: break;
        }
        throw ParseError(std::string("unexpected character '") + c + "'", line, col);
    }
    out.push_back(Token{Tok::End, "", line, col});
    return out;
}

// A parsed comparison side before the bare-number rule is applied.
struct Side {
    std::optional<Operand> operand;
    std::optional<ExtNat> bare;  // bare number or inf literal
};

class Parser {
public:
    explicit Parser(std::string_view src) : toks_(tokenize(src)) {}

    Operand parse_top() {
        Operand result = peek_module() ? Operand(parse_module()) : Operand(parse_sum());
        expect(Tok::End, "end of input");
        return result;
    }

private:
    const Token& peek(std::size_t ahead = 0) const { return toks_[std::min(pos_ + ahead, toks_.size() - 1)]; }
    const Token& next() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }

    [[noreturn]] void fail(const std::string& what) const {
        const Token& t = peek();
        throw ParseError("expected " + what + (t.kind == Tok::End ? " but input ended" : " near '" + t.text + "'"),
                         t.line, t.column);
    }

    void expect(Tok kind, const std::string& what) {
        if (peek().kind != kind) fail(what);
        next();
    }

    bool peek_module() const {
        return peek().kind == Tok::Ident && parse_monoid_kind(peek().text) && peek(1).kind == Tok::LBrace;
    }

    bool peek_inf() const {
        if (peek().kind == Tok::Ident && peek().text == "inf") return true;
        return (peek().kind == Tok::Plus || peek().kind == Tok::Minus) && peek(1).kind == Tok::Ident &&
               peek(1).text == "inf";
    }

    ExtNat parse_inf() {
        bool neg = false;
        if (peek().kind == Tok::Minus) neg = true;
        if (peek().kind == Tok::Plus || peek().kind == Tok::Minus) next();
        next();
        return neg ? ExtNat::neg_inf() : ExtNat::pos_inf();
    }

    ExtNat parse_number() {
        const Token& t = next();
        auto v = ExtNat::parse(t.text);
        if (!v) throw ParseError("number out of range '" + t.text + "'", t.line, t.column);
        return *v;
    }

    SemiringExpr parse_sum() {
        std::vector<SemiringExpr> parts;
        parts.push_back(parse_product());
        while (peek().kind == Tok::Plus && !plus_starts_inf()) {
            next();
            parts.push_back(parse_product());
        }
        return SemiringExpr::sum(std::move(parts));
    }

    bool plus_starts_inf() const { return peek(1).kind == Tok::Ident && peek(1).text == "inf"; }

    SemiringExpr parse_product() {
        std::vector<SemiringExpr> parts;
        parts.push_back(parse_factor());
        while (peek().kind == Tok::Star) {
            next();
            parts.push_back(parse_factor());
        }
        return SemiringExpr::product(std::move(parts));
    }

    SemiringExpr parse_factor() {
        bare_number_ = false;
        const Token& t = peek();
        switch (t.kind) {
        case Tok::Ident: {
            if (t.text == "inf") fail("a semiring expression (inf is only a monoid value)");
            if (peek_module()) fail("a semiring expression");
            next();
            return SemiringExpr::variable(t.text);
        }
        case Tok::Number: {
            ExtNat v = parse_number();
            bare_number_ = true;
            return SemiringExpr::constant(v.value());
        }
        case Tok::LParen: {
            next();
            SemiringExpr inner = parse_sum();
            expect(Tok::RParen, "')'");
            bare_number_ = false;
            return inner;
        }
        case Tok::LBracket: return parse_conditional();
        default: fail("a variable, number, '(' or '['");
        }
    }

    SemiringExpr parse_conditional() {
        expect(Tok::LBracket, "'['");
        Side lhs = parse_side();
        if (peek().kind != Tok::Theta) fail("a comparison operator");
        const Token& th = next();
        const Theta theta = *parse_theta(th.text);
        Side rhs = parse_side();
        expect(Tok::RBracket, "']'");
        bare_number_ = false;
        return SemiringExpr::conditional(resolve(lhs, rhs, th), theta, resolve(rhs, lhs, th));
    }

    // Bare numbers opposite a semimodule side become monoid constants.
    static Operand resolve(const Side& self, const Side& other, const Token& at) {
        if (!self.bare) return *self.operand;
        if (other.operand) {
            if (const auto* m = std::get_if<SemimoduleExpr>(&*other.operand))
                return SemimoduleExpr::constant(m->monoid(), *self.bare);
        }
        if (!self.bare->is_finite())
            throw ParseError("inf can only be compared with a semimodule expression", at.line, at.column);
        return SemiringExpr::constant(self.bare->value());
    }

    Side parse_side() {
        if (peek_module()) return Side{Operand(parse_module()), std::nullopt};
        if (peek_inf()) return Side{std::nullopt, parse_inf()};
        SemiringExpr phi = parse_sum();
        if (phi.kind() == SemiringExpr::Kind::Constant && bare_number_) return Side{std::nullopt, ExtNat(phi.value())};
        return Side{Operand(phi), std::nullopt};
    }

    SemimoduleExpr parse_module() {
        const MonoidKind kind = *parse_monoid_kind(next().text);
        expect(Tok::LBrace, "'{'");
        std::vector<SemimoduleExpr::Term> terms;
        if (peek().kind != Tok::RBrace) {
            terms.push_back(parse_term());
            while (peek().kind == Tok::Plus) {
                next();
                terms.push_back(parse_term());
            }
        }
        expect(Tok::RBrace, "'}' or '+'");
        return SemimoduleExpr(kind, std::move(terms));
    }

    SemimoduleExpr::Term parse_term() {
        if (peek_inf()) return SemimoduleExpr::Term{std::nullopt, parse_inf()};
        SemiringExpr phi = parse_product();
        const bool bare = phi.kind() == SemiringExpr::Kind::Constant && bare_number_;
        if (peek().kind == Tok::Otimes) {
            next();
            ExtNat value;
            if (peek_inf()) {
                value = parse_inf();
            } else {
                if (peek().kind != Tok::Number) fail("a monoid value after (x)");
                value = parse_number();
            }
            return SemimoduleExpr::Term{phi, value};
        }
        if (!bare) fail("'(x)' followed by a monoid value");
        return SemimoduleExpr::Term{std::nullopt, ExtNat(phi.value())};
    }

    std::vector<Token> toks_;
    std::size_t pos_ = 0;
    bool bare_number_ = false;
};

std::string value_text(ExtNat v) { return v.is_pos_inf() ? "inf" : v.to_string(); }

void print_to(const SemiringExpr& e, std::string& out);
void print_to(const SemimoduleExpr& e, std::string& out);

void print_side(const Operand& self, const Operand& other, std::string& out) {
    const bool other_module = std::holds_alternative<SemimoduleExpr>(other);
    if (const auto* m = std::get_if<SemimoduleExpr>(&self)) {
        if (other_module && m->terms().size() == 1 && !m->terms()[0].scalar &&
            m->monoid() == std::get<SemimoduleExpr>(other).monoid()) {
            out += value_text(m->terms()[0].value);
            return;
        }
        print_to(*m, out);
        return;
    }
    const auto& phi = std::get<SemiringExpr>(self);
    if (other_module && phi.kind() == SemiringExpr::Kind::Constant) {
        out += '(';
        print_to(phi, out);
        out += ')';
        return;
    }
    print_to(phi, out);
}

void print_to(const SemiringExpr& e, std::string& out) {
    using K = SemiringExpr::Kind;
    switch (e.kind()) {
    case K::Variable: out += e.name(); return;
    case K::Constant: out += std::to_string(e.value()); return;
    case K::Sum: {
        bool first = true;
        for (const auto& c : e.children()) {
            if (!first) out += " + ";
            first = false;
            const bool paren = c.kind() == K::Sum;
            if (paren) out += '(';
            print_to(c, out);
            if (paren) out += ')';
        }
        return;
    }
    case K::Product: {
        bool first = true;
        for (const auto& c : e.children()) {
            if (!first) out += '*';
            first = false;
            const bool paren = c.kind() == K::Sum || c.kind() == K::Product;
            if (paren) out += '(';
            print_to(c, out);
            if (paren) out += ')';
        }
        return;
    }
    case K::Conditional:
        out += '[';
        print_side(e.lhs(), e.rhs(), out);
        out += ' ';
        out += to_string(e.theta());
        out += ' ';
        print_side(e.rhs(), e.lhs(), out);
        out += ']';
        return;
    }
}

void print_to(const SemimoduleExpr& e, std::string& out) {
    out += to_string(e.monoid());
    out += '{';
    bool first = true;
    for (const auto& t : e.terms()) {
        if (!first) out += " + ";
        first = false;
        if (!t.scalar) {
            out += t.value.is_neg_inf() ? "-inf" : value_text(t.value);
            continue;
        }
        const bool paren = t.scalar->kind() == SemiringExpr::Kind::Sum;
        if (paren) out += '(';
        print_to(*t.scalar, out);
        if (paren) out += ')';
        out += " (x) ";
        out += value_text(t.value);
    }
    out += '}';
}

}  // namespace

Operand parse_expression(std::string_view text) { return Parser(text).parse_top(); }

SemiringExpr parse_semiring(std::string_view text) {
    Operand op = parse_expression(text);
    if (auto* phi = std::get_if<SemiringExpr>(&op)) return *phi;
    throw ParseError("expected a semiring expression, got a semimodule expression", 1, 1);
}

SemimoduleExpr parse_semimodule(std::string_view text) {
    Operand op = parse_expression(text);
    if (auto* m = std::get_if<SemimoduleExpr>(&op)) return *m;
    throw ParseError("expected a semimodule expression (tag{...})", 1, 1);
}

std::string print(const SemiringExpr& expr) {
    std::string out;
    print_to(expr, out);
    return out;
}

std::string print(const SemimoduleExpr& expr) {
    std::string out;
    print_to(expr, out);
    return out;
}

std::string print(const Operand& expr) {
    return std::visit([](const auto& e) { return print(e); }, expr);
}

}  // namespace pvcagg
