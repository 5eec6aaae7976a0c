#pragma once

// LTL abstract syntax trees.
//
// A Formula is an immutable, reference-counted tree. Copies are cheap and
// subtrees may be shared (to_nnf relies on this for Iff). Equality is
// structural; pointer identity is only a shortcut.
//
// Node kinds:
//   True, False, Atom           leaves
//   Not, Next, Globally, Eventually          unary
//   And, Or, Implies, Iff, Until, Release, WeakUntil    binary
//   Hole                        error placeholder, only inside partial ASTs
//                               produced by the ITL parser

#include <cstdint>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ltlkit {

enum class Op : std::uint8_t {
    True,
    False,
    Atom,
    Not,
    And,
    Or,
    Implies,
    Iff,
    Next,
    Globally,
    Eventually,
    Until,
    Release,
    WeakUntil,
    Hole,
};

inline constexpr int kOpCount = 15;
/// Number of real operators (every kind except Hole).
inline constexpr int kFormulaOpCount = 14;

int arity(Op op) noexcept;
bool is_binary(Op op) noexcept;
bool is_unary(Op op) noexcept;
bool is_leaf(Op op) noexcept;
std::string_view op_name(Op op) noexcept;

/// True for words that may not be used as atom identifiers.
bool is_reserved_word(std::string_view word) noexcept;
/// `[a-z_][a-z0-9_]*` and not reserved.
bool is_valid_atom_name(std::string_view text) noexcept;

/// Validated atomic proposition name.
class AtomName {
public:
    explicit AtomName(std::string text);
    const std::string& str() const noexcept { return text_; }
    friend auto operator<=>(const AtomName&, const AtomName&) = default;

private:
    std::string text_;
};

class Formula {
public:
    /// Default-constructed formula is `true`.
    Formula();

    Op op() const noexcept;
    /// Atom name; empty for non-atoms.
    const std::string& name() const noexcept;
    std::span<const Formula> children() const noexcept;
    const Formula& child(std::size_t i) const;
    const Formula& lhs() const { return child(0); }
    const Formula& rhs() const { return child(1); }

    std::size_t hash() const noexcept;
    /// Node identity, valid while the formula is alive.
    const void* identity() const noexcept { return node_.get(); }

    friend bool operator==(const Formula& a, const Formula& b) noexcept;
    friend bool operator!=(const Formula& a, const Formula& b) noexcept { return !(a == b); }

    static Formula make(Op op, std::vector<Formula> children, std::string name = {});

private:
    struct Node;
    explicit Formula(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
    std::shared_ptr<const Node> node_;
};

struct FormulaHash {
    std::size_t operator()(const Formula& f) const noexcept { return f.hash(); }
};

namespace ltl {
Formula tt();
Formula ff();
Formula atom(const AtomName& name);
Formula atom(std::string name);
Formula hole();
Formula neg(Formula f);
Formula conj(Formula a, Formula b);
Formula disj(Formula a, Formula b);
Formula implies(Formula a, Formula b);
Formula iff(Formula a, Formula b);
Formula next(Formula f);
Formula always(Formula f);
Formula eventually(Formula f);
Formula until(Formula a, Formula b);
Formula release(Formula a, Formula b);
Formula weak_until(Formula a, Formula b);
Formula unary(Op op, Formula f);
Formula binary(Op op, Formula a, Formula b);
} // namespace ltl

/// Rewrites into {True, Atom, Not, And, Next, Globally, Eventually, Until}.
Formula expand_derived(const Formula& f);

/// Negation normal form over {True, False, Atom, Not(Atom), And, Or, Next, Until, Release}.
Formula to_nnf(const Formula& f);

bool is_nnf(const Formula& f) noexcept;
bool contains_hole(const Formula& f) noexcept;

enum class Stratum { Simple, Medium, High, VeryHigh };
std::string_view stratum_name(Stratum s) noexcept;
Stratum stratum_for_depth(int depth) noexcept;

struct FormulaStats {
    int ast_depth = 1;
    int node_count = 1;
    std::set<std::string> atoms;
    Stratum stratum = Stratum::Simple;
};

FormulaStats stats(const Formula& f);
int depth(const Formula& f) noexcept;
std::set<std::string> atoms_of(const Formula& f);

/// Exact-depth random formula with atoms drawn from `atom_pool`.
/// Deterministic for a fixed (seed, target_depth, atom_pool).
Formula random_formula(std::uint64_t seed, int target_depth, std::span<const AtomName> atom_pool);
Formula random_formula(std::uint64_t seed, int target_depth, const std::vector<std::string>& atom_pool);

/// Infix model-checker syntax: `G F X`, `U R W`, `! & | -> <->`, `1`/`0`.
/// Binary subterms are always parenthesised.
std::string to_infix(const Formula& f);

/// Parses infix text. Throws InvalidInput with a position on malformed input.
Formula parse_infix(std::string_view text);

} // namespace ltlkit
