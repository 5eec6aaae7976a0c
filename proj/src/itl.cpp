#include "ltlkit/itl.hpp"

#include <algorithm>
#include <array>
#include <cctype>

namespace ltlkit::itl {

namespace {

bool is_word_char(char c) noexcept
{
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

bool is_space(char c) noexcept { return std::isspace(static_cast<unsigned char>(c)) != 0; }

std::string lower(std::string_view s)
{
    std::string out(s);
    for (char& c : out)
        c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

const std::vector<std::string> kOperandStarts = {
    "(", "always,", "eventually,", "false", "identifier", "if", "in the next state,", "not", "true",
};

const std::vector<std::string> kBinaryOps = {
    "and", "if and only if", "or", "releases", "until", "weakly until",
};

std::vector<std::string> with(std::vector<std::string> base, std::string extra)
{
    base.push_back(std::move(extra));
    std::sort(base.begin(), base.end());
    base.erase(std::unique(base.begin(), base.end()), base.end());
    return base;
}

// ---------------------------------------------------------------------------
// Lexer

class Lexer {
public:
    explicit Lexer(std::string_view s) : s_(s) {}

    Result<std::vector<Token>> run()
    {
        while (true) {
            skip_ws();
            if (pos_ >= s_.size())
                break;
            char c = s_[pos_];
            if (c == '(' || c == ')') {
                push(c == '(' ? TokenKind::LParen : TokenKind::RParen, pos_, pos_ + 1);
                ++pos_;
            } else if (c == ',') {
                if (!lex_comma())
                    return *error_;
            } else if (is_word_char(c)) {
                if (!lex_word())
                    return *error_;
            } else {
                fail(pos_, std::string(1, c), {"(", ")", "identifier", "keyword"});
                return *error_;
            }
        }
        return std::move(tokens_);
    }

private:
    struct Word {
        std::size_t start, end;
        std::string low;
    };

    void skip_ws()
    {
        while (pos_ < s_.size() && is_space(s_[pos_]))
            ++pos_;
    }

    std::optional<Word> word_at(std::size_t p) const
    {
        while (p < s_.size() && is_space(s_[p]))
            ++p;
        std::size_t e = p;
        while (e < s_.size() && is_word_char(s_[e]))
            ++e;
        if (e == p)
            return std::nullopt;
        return Word{p, e, lower(s_.substr(p, e - p))};
    }

    std::optional<std::size_t> comma_at(std::size_t p) const
    {
        while (p < s_.size() && is_space(s_[p]))
            ++p;
        if (p < s_.size() && s_[p] == ',')
            return p;
        return std::nullopt;
    }

    void push(TokenKind k, std::size_t start, std::size_t end)
    {
        tokens_.push_back(Token{k, start, end, std::string(s_.substr(start, end - start))});
    }

    void fail(std::size_t at, std::optional<std::string> found, std::vector<std::string> expected)
    {
        ParseError e;
        e.position = at;
        e.found = std::move(found);
        std::sort(expected.begin(), expected.end());
        e.expected = std::move(expected);
        e.lexical = true;
        error_ = std::move(e);
    }

    bool lex_comma()
    {
        std::size_t comma = pos_;
        auto w = word_at(comma + 1);
        if (w && w->low == "then") {
            push(TokenKind::Then, comma, w->end);
            pos_ = w->end;
            return true;
        }
        // A stray comma right after a word usually means the word was meant
        // to be a comma keyword ("eventual, p"); blame the word.
        if (!tokens_.empty() && tokens_.back().kind == TokenKind::Ident) {
            const Token& prev = tokens_.back();
            fail(prev.start, prev.text, {"identifier", "keyword"});
        } else {
            fail(comma, std::string(","), {", then"});
        }
        return false;
    }

    bool lex_word()
    {
        Word w = *word_at(pos_);
        const std::string& k = w.low;
        auto simple = [&](TokenKind kind) {
            push(kind, w.start, w.end);
            pos_ = w.end;
            return true;
        };
        if (k == "true")
            return simple(TokenKind::True);
        if (k == "false")
            return simple(TokenKind::False);
        if (k == "not")
            return simple(TokenKind::Not);
        if (k == "and")
            return simple(TokenKind::And);
        if (k == "or")
            return simple(TokenKind::Or);
        if (k == "until")
            return simple(TokenKind::Until);
        if (k == "releases")
            return simple(TokenKind::Releases);
        if (k == "if") {
            // Greedy: "if and only if" before the implication "if".
            std::size_t end = w.end;
            bool iff = true;
            for (const char* next : {"and", "only", "if"}) {
                auto nw = word_at(end);
                if (!nw || nw->low != next) {
                    iff = false;
                    break;
                }
                end = nw->end;
            }
            if (iff) {
                push(TokenKind::Iff, w.start, end);
                pos_ = end;
                return true;
            }
            return simple(TokenKind::If);
        }
        if (k == "weakly") {
            auto nw = word_at(w.end);
            if (nw && nw->low == "until") {
                push(TokenKind::WeaklyUntil, w.start, nw->end);
                pos_ = nw->end;
                return true;
            }
            fail(w.start, std::string(s_.substr(w.start, w.end - w.start)), {"weakly until"});
            return false;
        }
        if (k == "always" || k == "eventually") {
            if (auto c = comma_at(w.end)) {
                push(k == "always" ? TokenKind::Always : TokenKind::Eventually, w.start, *c + 1);
                pos_ = *c + 1;
                return true;
            }
            fail(w.start, std::string(s_.substr(w.start, w.end - w.start)), {k + ","});
            return false;
        }
        if (k == "in") {
            std::size_t end = w.end;
            bool ok = true;
            for (const char* next : {"the", "next", "state"}) {
                auto nw = word_at(end);
                if (!nw || nw->low != next) {
                    ok = false;
                    break;
                }
                end = nw->end;
            }
            auto c = ok ? comma_at(end) : std::nullopt;
            if (c) {
                push(TokenKind::Next, w.start, *c + 1);
                pos_ = *c + 1;
                return true;
            }
            fail(w.start, std::string(s_.substr(w.start, w.end - w.start)), {"in the next state,"});
            return false;
        }
        std::string raw(s_.substr(w.start, w.end - w.start));
        if (k == "then") {
            fail(w.start, raw, {", then"});
            return false;
        }
        if (is_reserved_word(k)) {
            fail(w.start, raw, {"identifier", "keyword"});
            return false;
        }
        if (!is_valid_atom_name(raw)) {
            fail(w.start, raw, {"identifier"});
            return false;
        }
        return simple(TokenKind::Ident);
    }

    std::string_view s_;
    std::size_t pos_ = 0;
    std::vector<Token> tokens_;
    std::optional<ParseError> error_;
};

// ---------------------------------------------------------------------------
// Parser

struct Failure {
    ParseError err;
    std::optional<Formula> partial;
};

Formula or_hole(const std::optional<Formula>& f) { return f ? *f : ltl::hole(); }

class Parser {
public:
    Parser(std::string_view src, const std::vector<Token>& toks) : src_(src), toks_(toks) {}

    Formula parse_top()
    {
        Formula f = parse_expr();
        if (i_ != toks_.size())
            fail(with(kBinaryOps, "end of input"), f);
        return f;
    }

private:
    const Token* peek() const { return i_ < toks_.size() ? &toks_[i_] : nullptr; }
    bool at(TokenKind k) const { return i_ < toks_.size() && toks_[i_].kind == k; }

    [[noreturn]] void fail(std::vector<std::string> expected, std::optional<Formula> partial)
    {
        Failure f;
        if (const Token* t = peek()) {
            f.err.position = t->start;
            f.err.found = t->text;
        } else {
            f.err.position = src_.size();
        }
        f.err.expected = std::move(expected);
        f.partial = std::move(partial);
        throw f;
    }

    Formula parse_expr() { return parse_iff(); }

    template <typename Next>
    Formula binary_loop(Next next, std::initializer_list<std::pair<TokenKind, Op>> ops)
    {
        Formula lhs = (this->*next)();
        while (true) {
            const Token* t = peek();
            if (!t)
                return lhs;
            auto it = std::find_if(ops.begin(), ops.end(), [&](const auto& p) { return p.first == t->kind; });
            if (it == ops.end())
                return lhs;
            ++i_;
            try {
                Formula rhs = (this->*next)();
                lhs = ltl::binary(it->second, lhs, rhs);
            } catch (Failure& f) {
                f.partial = ltl::binary(it->second, lhs, or_hole(f.partial));
                throw;
            }
        }
    }

    Formula parse_iff() { return binary_loop(&Parser::parse_or, {{TokenKind::Iff, Op::Iff}}); }
    Formula parse_or() { return binary_loop(&Parser::parse_and, {{TokenKind::Or, Op::Or}}); }
    Formula parse_and() { return binary_loop(&Parser::parse_temporal, {{TokenKind::And, Op::And}}); }
    Formula parse_temporal()
    {
        return binary_loop(&Parser::parse_unary,
                           {{TokenKind::Until, Op::Until},
                            {TokenKind::Releases, Op::Release},
                            {TokenKind::WeaklyUntil, Op::WeakUntil}});
    }

    Formula parse_unary()
    {
        std::optional<Op> op;
        if (at(TokenKind::Not))
            op = Op::Not;
        else if (at(TokenKind::Next))
            op = Op::Next;
        else if (at(TokenKind::Always))
            op = Op::Globally;
        else if (at(TokenKind::Eventually))
            op = Op::Eventually;
        if (!op)
            return parse_primary();
        ++i_;
        try {
            return ltl::unary(*op, parse_unary());
        } catch (Failure& f) {
            f.partial = ltl::unary(*op, or_hole(f.partial));
            throw;
        }
    }

    Formula parse_primary()
    {
        const Token* t = peek();
        if (!t)
            fail(kOperandStarts, std::nullopt);
        switch (t->kind) {
        case TokenKind::True:
            ++i_;
            return ltl::tt();
        case TokenKind::False:
            ++i_;
            return ltl::ff();
        case TokenKind::Ident:
            ++i_;
            return ltl::atom(t->text);
        case TokenKind::LParen: {
            ++i_;
            Formula inner = parse_expr();
            if (!at(TokenKind::RParen))
                fail(with(kBinaryOps, ")"), inner);
            ++i_;
            return inner;
        }
        case TokenKind::If: {
            ++i_;
            Formula ante;
            try {
                ante = parse_expr();
            } catch (Failure& f) {
                f.partial = ltl::implies(or_hole(f.partial), ltl::hole());
                throw;
            }
            if (!at(TokenKind::Then))
                fail(with(kBinaryOps, ", then"), ltl::implies(ante, ltl::hole()));
            ++i_;
            try {
                return ltl::implies(ante, parse_expr());
            } catch (Failure& f) {
                f.partial = ltl::implies(ante, or_hole(f.partial));
                throw;
            }
        }
        default:
            fail(kOperandStarts, std::nullopt);
        }
    }

    std::string_view src_;
    const std::vector<Token>& toks_;
    std::size_t i_ = 0;
};

// ---------------------------------------------------------------------------
// Printing

Token kw(TokenKind k) { return Token{k, 0, 0, std::string(canonical_text(k))}; }

TokenKind keyword_for(Op op)
{
    switch (op) {
    case Op::Not: return TokenKind::Not;
    case Op::And: return TokenKind::And;
    case Op::Or: return TokenKind::Or;
    case Op::Iff: return TokenKind::Iff;
    case Op::Next: return TokenKind::Next;
    case Op::Globally: return TokenKind::Always;
    case Op::Eventually: return TokenKind::Eventually;
    case Op::Until: return TokenKind::Until;
    case Op::Release: return TokenKind::Releases;
    case Op::WeakUntil: return TokenKind::WeaklyUntil;
    default: return TokenKind::If;
    }
}

void emit_leaf(const Formula& f, std::vector<Token>& out)
{
    switch (f.op()) {
    case Op::True:
        out.push_back(kw(TokenKind::True));
        break;
    case Op::False:
        out.push_back(kw(TokenKind::False));
        break;
    case Op::Atom:
        out.push_back(Token{TokenKind::Ident, 0, 0, f.name()});
        break;
    default:
        out.push_back(Token{TokenKind::Ident, 0, 0, "?"});
    }
}

void emit_full(const Formula& f, std::vector<Token>& out)
{
    if (is_leaf(f.op())) {
        emit_leaf(f, out);
        return;
    }
    if (is_unary(f.op())) {
        out.push_back(kw(keyword_for(f.op())));
        emit_full(f.lhs(), out);
        return;
    }
    out.push_back(kw(TokenKind::LParen));
    if (f.op() == Op::Implies) {
        out.push_back(kw(TokenKind::If));
        emit_full(f.lhs(), out);
        out.push_back(kw(TokenKind::Then));
        emit_full(f.rhs(), out);
    } else {
        emit_full(f.lhs(), out);
        out.push_back(kw(keyword_for(f.op())));
        emit_full(f.rhs(), out);
    }
    out.push_back(kw(TokenKind::RParen));
}

int level(Op op) noexcept
{
    switch (op) {
    case Op::Implies: return 0;
    case Op::Iff: return 1;
    case Op::Or: return 2;
    case Op::And: return 3;
    case Op::Until:
    case Op::Release:
    case Op::WeakUntil: return 4;
    default: return is_unary(op) ? 6 : 7;
    }
}

void emit_min(const Formula& f, bool tail_free, std::vector<Token>& out);

void emit_group(const Formula& f, bool paren, bool tail_free, std::vector<Token>& out)
{
    if (!paren) {
        emit_min(f, tail_free, out);
        return;
    }
    out.push_back(kw(TokenKind::LParen));
    emit_min(f, true, out);
    out.push_back(kw(TokenKind::RParen));
}

// `tail_free`: nothing but end of input, ")" or ", then" follows this
// subterm, so a trailing if-form cannot swallow anything.
void emit_min(const Formula& f, bool tail_free, std::vector<Token>& out)
{
    const Op op = f.op();
    if (is_leaf(op)) {
        emit_leaf(f, out);
        return;
    }
    if (is_unary(op)) {
        out.push_back(kw(keyword_for(op)));
        const Formula& c = f.lhs();
        bool paren = c.op() == Op::Implies ? !tail_free : is_binary(c.op());
        emit_group(c, paren, tail_free, out);
        return;
    }
    if (op == Op::Implies) {
        out.push_back(kw(TokenKind::If));
        emit_min(f.lhs(), true, out);
        out.push_back(kw(TokenKind::Then));
        emit_min(f.rhs(), tail_free, out);
        return;
    }
    const int L = level(op);
    const Formula& a = f.lhs();
    const Formula& b = f.rhs();
    emit_group(a, is_binary(a.op()) && level(a.op()) < L, false, out);
    out.push_back(kw(keyword_for(op)));
    bool paren_b = b.op() == Op::Implies ? !tail_free : (is_binary(b.op()) && level(b.op()) <= L);
    emit_group(b, paren_b, tail_free, out);
}

std::string join(std::vector<Token>& toks)
{
    std::string out;
    for (std::size_t i = 0; i < toks.size(); ++i) {
        Token& t = toks[i];
        bool space = i > 0 && toks[i - 1].kind != TokenKind::LParen && t.kind != TokenKind::RParen
            && t.kind != TokenKind::Then;
        if (space)
            out += ' ';
        t.start = out.size();
        out += t.text;
        t.end = out.size();
    }
    return out;
}

} // namespace

bool Token::is_keyword() const noexcept
{
    return kind != TokenKind::Ident && kind != TokenKind::LParen && kind != TokenKind::RParen;
}

std::string_view token_name(TokenKind kind) noexcept
{
    switch (kind) {
    case TokenKind::True: return "true";
    case TokenKind::False: return "false";
    case TokenKind::Not: return "not";
    case TokenKind::And: return "and";
    case TokenKind::Or: return "or";
    case TokenKind::If: return "if";
    case TokenKind::Then: return "then";
    case TokenKind::Iff: return "iff";
    case TokenKind::Next: return "next";
    case TokenKind::Always: return "always";
    case TokenKind::Eventually: return "eventually";
    case TokenKind::Until: return "until";
    case TokenKind::Releases: return "releases";
    case TokenKind::WeaklyUntil: return "weakly_until";
    case TokenKind::Ident: return "identifier";
    case TokenKind::LParen: return "(";
    case TokenKind::RParen: return ")";
    }
    return "?";
}

std::string_view canonical_text(TokenKind kind) noexcept
{
    switch (kind) {
    case TokenKind::True: return "true";
    case TokenKind::False: return "false";
    case TokenKind::Not: return "not";
    case TokenKind::And: return "and";
    case TokenKind::Or: return "or";
    case TokenKind::If: return "if";
    case TokenKind::Then: return ", then";
    case TokenKind::Iff: return "if and only if";
    case TokenKind::Next: return "in the next state,";
    case TokenKind::Always: return "always,";
    case TokenKind::Eventually: return "eventually,";
    case TokenKind::Until: return "until";
    case TokenKind::Releases: return "releases";
    case TokenKind::WeaklyUntil: return "weakly until";
    case TokenKind::Ident: return "";
    case TokenKind::LParen: return "(";
    case TokenKind::RParen: return ")";
    }
    return "";
}

std::string ParseError::message() const
{
    std::string s = "at offset " + std::to_string(position) + ": ";
    s += found ? "unexpected '" + *found + "'" : std::string("unexpected end of input");
    s += ", expected one of:";
    for (const auto& e : expected)
        s += " '" + e + "'";
    return s;
}

Result<std::vector<Token>> lex(std::string_view source)
{
    return Lexer(source).run();
}

Result<Formula> parse(std::string_view source)
{
    auto toks = lex(source);
    if (!toks)
        return toks.error();
    Parser p(source, toks.value());
    try {
        return p.parse_top();
    } catch (Failure& f) {
        std::sort(f.err.expected.begin(), f.err.expected.end());
        if (f.partial && f.partial->op() != Op::Hole)
            f.err.partial_ast = std::move(f.partial);
        return std::move(f.err);
    }
}

std::string serialize(const Formula& f)
{
    std::vector<Token> toks;
    emit_full(f, toks);
    return join(toks);
}

std::vector<Token> minimal_tokens(const Formula& f)
{
    std::vector<Token> toks;
    emit_min(f, true, toks);
    join(toks);
    return toks;
}

std::string serialize_minimal(const Formula& f)
{
    std::vector<Token> toks;
    emit_min(f, true, toks);
    return join(toks);
}

bool roundtrip_check(const Formula& f)
{
    auto r = parse(serialize(f));
    return r.ok() && r.value() == f;
}

ItlDocument ItlDocument::from_source(std::string source)
{
    auto toks = lex(source);
    std::optional<std::vector<Token>> tokens;
    if (toks)
        tokens = toks.value();
    auto result = parse(source);
    return ItlDocument{std::move(source), std::move(tokens), std::move(result)};
}

} // namespace ltlkit::itl
