#pragma once

// Intermediate Technical Language: a keyword surface syntax in bijection
// with LTL.
//
//   T(p) = p            T(true) = true        T(false) = false
//   T(!a)     = not a
//   T(a & b)  = (a and b)          T(a | b)  = (a or b)
//   T(a -> b) = (if a, then b)     T(a <-> b) = (a if and only if b)
//   T(X a)    = in the next state, a
//   T(G a)    = always, a          T(F a)    = eventually, a
//   T(a U b)  = (a until b)        T(a R b)  = (a releases b)
//   T(a W b)  = (a weakly until b)
//
// serialize() wraps every binary node in parentheses, which makes the output
// unambiguous. parse() additionally accepts unparenthesised input with the
// precedence (tightest first):
//
//   not, in the next state, always, eventually   (prefix; operand is a unary
//                                                 expression or an if-form)
//   until, releases, weakly until                 left-assoc
//   and                                           left-assoc
//   or                                            left-assoc
//   if and only if                                left-assoc
//   if A, then B                                  prefix form; A is delimited
//                                                 by ", then", B extends as
//                                                 far right as possible
//
// The full grammar is in docs/itl_grammar.ebnf.

#include "ltlkit/formula.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace ltlkit::itl {

enum class TokenKind {
    True,
    False,
    Not,
    And,
    Or,
    If,
    Then,
    Iff,
    Next,
    Always,
    Eventually,
    Until,
    Releases,
    WeaklyUntil,
    Ident,
    LParen,
    RParen,
};

struct Token {
    TokenKind kind;
    std::size_t start;
    std::size_t end; // one past the last byte
    std::string text; // identifier name, or the source slice for keywords

    bool is_keyword() const noexcept;
    friend bool operator==(const Token&, const Token&) = default;
};

/// Keyword token name: "eventually", "weakly_until", ...; "identifier", "(" or ")" otherwise.
std::string_view token_name(TokenKind kind) noexcept;

/// Canonical surface text of a token kind as it appears in serialized ITL,
/// without surrounding spaces: "always,", ", then", "weakly until", ...
std::string_view canonical_text(TokenKind kind) noexcept;

struct ParseError {
    std::size_t position = 0;
    /// Offending token text; nullopt at end of input.
    std::optional<std::string> found;
    /// Sorted, nonempty.
    std::vector<std::string> expected;
    /// What parsed before the failure, with Hole nodes where input was missing.
    std::optional<Formula> partial_ast;
    /// True when the failure happened while tokenizing.
    bool lexical = false;

    std::string message() const;
};

template <typename T>
class Result {
public:
    Result(T value) : v_(std::move(value)) {}
    Result(ParseError err) : v_(std::move(err)) {}

    bool ok() const noexcept { return v_.index() == 0; }
    explicit operator bool() const noexcept { return ok(); }
    const T& value() const { return std::get<0>(v_); }
    const ParseError& error() const { return std::get<1>(v_); }

private:
    std::variant<T, ParseError> v_;
};

Result<std::vector<Token>> lex(std::string_view source);
Result<Formula> parse(std::string_view source);

std::string serialize(const Formula& f);

/// Rendering with only the parentheses the precedence rules require.
/// parse(serialize_minimal(f)) == f.
std::string serialize_minimal(const Formula& f);

/// Token stream of serialize_minimal(f); lets callers rewrite atoms and
/// grouping without re-lexing. Atom tokens carry the atom name in `text`.
std::vector<Token> minimal_tokens(const Formula& f);

bool roundtrip_check(const Formula& f);

/// A source string together with its tokens (when lexing succeeded) and parse outcome.
struct ItlDocument {
    std::string source;
    std::optional<std::vector<Token>> tokens;
    Result<Formula> parse_result;

    static ItlDocument from_source(std::string source);
    bool ok() const noexcept { return parse_result.ok(); }
};

} // namespace ltlkit::itl
