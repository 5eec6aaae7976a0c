#include "ltlkit/formula.hpp"

#include "ltlkit/error.hpp"
#include "rng.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <functional>
#include <unordered_map>

namespace ltlkit {

struct Formula::Node {
    Op op;
    std::string name;
    std::vector<Formula> kids;
    std::size_t hash;
};

namespace {

std::size_t combine(std::size_t seed, std::size_t v) noexcept
{
    return seed ^ (v + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2));
}

constexpr std::array<std::string_view, 17> kReserved = {
    "true", "false", "not", "and", "or", "if", "then", "only", "until",
    "releases", "weakly", "always", "eventually", "in", "the", "next", "state",
};

} // namespace

int arity(Op op) noexcept
{
    switch (op) {
    case Op::True:
    case Op::False:
    case Op::Atom:
    case Op::Hole:
        return 0;
    case Op::Not:
    case Op::Next:
    case Op::Globally:
    case Op::Eventually:
        return 1;
    default:
        return 2;
    }
}

bool is_binary(Op op) noexcept { return arity(op) == 2; }
bool is_unary(Op op) noexcept { return arity(op) == 1; }
bool is_leaf(Op op) noexcept { return arity(op) == 0; }

std::string_view op_name(Op op) noexcept
{
    switch (op) {
    case Op::True: return "True";
    case Op::False: return "False";
    case Op::Atom: return "Atom";
    case Op::Not: return "Not";
    case Op::And: return "And";
    case Op::Or: return "Or";
    case Op::Implies: return "Implies";
    case Op::Iff: return "Iff";
    case Op::Next: return "Next";
    case Op::Globally: return "Globally";
    case Op::Eventually: return "Eventually";
    case Op::Until: return "Until";
    case Op::Release: return "Release";
    case Op::WeakUntil: return "WeakUntil";
    case Op::Hole: return "Hole";
    }
    return "?";
}

bool is_reserved_word(std::string_view word) noexcept
{
    return std::find(kReserved.begin(), kReserved.end(), word) != kReserved.end();
}

bool is_valid_atom_name(std::string_view text) noexcept
{
    if (text.empty())
        return false;
    auto first = static_cast<unsigned char>(text.front());
    if (!(std::islower(first) || first == '_'))
        return false;
    for (char c : text) {
        auto u = static_cast<unsigned char>(c);
        if (!(std::islower(u) || std::isdigit(u) || u == '_'))
            return false;
    }
    return !is_reserved_word(text);
}

AtomName::AtomName(std::string text) : text_(std::move(text))
{
    if (!is_valid_atom_name(text_))
        throw InvalidInput("invalid atom name '" + text_ + "'");
}

Formula::Formula() : Formula(ltl::tt()) {}

Formula Formula::make(Op op, std::vector<Formula> children, std::string name)
{
    if (static_cast<int>(children.size()) != arity(op))
        throw InvalidInput(std::string("wrong number of children for ") + std::string(op_name(op)));
    std::size_t h = std::hash<int>{}(static_cast<int>(op));
    h = combine(h, std::hash<std::string>{}(name));
    for (const auto& c : children)
        h = combine(h, c.hash());
    return Formula(std::make_shared<const Node>(Node{op, std::move(name), std::move(children), h}));
}

Op Formula::op() const noexcept { return node_->op; }
const std::string& Formula::name() const noexcept { return node_->name; }
std::span<const Formula> Formula::children() const noexcept { return node_->kids; }
std::size_t Formula::hash() const noexcept { return node_->hash; }

const Formula& Formula::child(std::size_t i) const
{
    if (i >= node_->kids.size())
        throw InvalidInput("child index out of range");
    return node_->kids[i];
}

bool operator==(const Formula& a, const Formula& b) noexcept
{
    if (a.node_ == b.node_)
        return true;
    const auto& x = *a.node_;
    const auto& y = *b.node_;
    if (x.hash != y.hash || x.op != y.op || x.name != y.name)
        return false;
    for (std::size_t i = 0; i < x.kids.size(); ++i)
        if (!(x.kids[i] == y.kids[i]))
            return false;
    return true;
}

namespace ltl {

Formula tt()
{
    static const Formula f = Formula::make(Op::True, {});
    return f;
}

Formula ff()
{
    static const Formula f = Formula::make(Op::False, {});
    return f;
}

Formula hole()
{
    static const Formula f = Formula::make(Op::Hole, {});
    return f;
}

Formula atom(const AtomName& name) { return Formula::make(Op::Atom, {}, name.str()); }
Formula atom(std::string name) { return atom(AtomName(std::move(name))); }
Formula neg(Formula f) { return Formula::make(Op::Not, {std::move(f)}); }
Formula conj(Formula a, Formula b) { return Formula::make(Op::And, {std::move(a), std::move(b)}); }
Formula disj(Formula a, Formula b) { return Formula::make(Op::Or, {std::move(a), std::move(b)}); }
Formula implies(Formula a, Formula b) { return Formula::make(Op::Implies, {std::move(a), std::move(b)}); }
Formula iff(Formula a, Formula b) { return Formula::make(Op::Iff, {std::move(a), std::move(b)}); }
Formula next(Formula f) { return Formula::make(Op::Next, {std::move(f)}); }
Formula always(Formula f) { return Formula::make(Op::Globally, {std::move(f)}); }
Formula eventually(Formula f) { return Formula::make(Op::Eventually, {std::move(f)}); }
Formula until(Formula a, Formula b) { return Formula::make(Op::Until, {std::move(a), std::move(b)}); }
Formula release(Formula a, Formula b) { return Formula::make(Op::Release, {std::move(a), std::move(b)}); }
Formula weak_until(Formula a, Formula b) { return Formula::make(Op::WeakUntil, {std::move(a), std::move(b)}); }

Formula unary(Op op, Formula f)
{
    if (!is_unary(op))
        throw InvalidInput("not a unary operator");
    return Formula::make(op, {std::move(f)});
}

Formula binary(Op op, Formula a, Formula b)
{
    if (!is_binary(op))
        throw InvalidInput("not a binary operator");
    return Formula::make(op, {std::move(a), std::move(b)});
}

} // namespace ltl

namespace {

// Negation that cancels an existing one, keeping expansions readable.
Formula negate_core(const Formula& f)
{
    return f.op() == Op::Not ? f.lhs() : ltl::neg(f);
}

Formula or_core(const Formula& a, const Formula& b)
{
    return ltl::neg(ltl::conj(negate_core(a), negate_core(b)));
}

} // namespace

Formula expand_derived(const Formula& f)
{
    using namespace ltl;
    switch (f.op()) {
    case Op::True:
    case Op::Atom:
    case Op::Hole:
        return f;
    case Op::False:
        return neg(tt());
    case Op::Not:
        return neg(expand_derived(f.lhs()));
    case Op::Next:
    case Op::Globally:
    case Op::Eventually:
        return unary(f.op(), expand_derived(f.lhs()));
    default:
        break;
    }
    const Formula a = expand_derived(f.lhs());
    const Formula b = expand_derived(f.rhs());
    switch (f.op()) {
    case Op::And:
        return conj(a, b);
    case Op::Or:
        return or_core(a, b);
    case Op::Implies:
        return or_core(negate_core(a), b);
    case Op::Iff:
        return conj(or_core(negate_core(a), b), or_core(negate_core(b), a));
    case Op::Until:
        return until(a, b);
    case Op::Release:
        return neg(until(negate_core(a), negate_core(b)));
    case Op::WeakUntil:
        return or_core(until(a, b), always(a));
    default:
        return f;
    }
}

namespace {

class NnfBuilder {
public:
    Formula run(const Formula& f, bool negated)
    {
        Key key{f.identity(), negated};
        if (auto it = memo_.find(key); it != memo_.end())
            return it->second;
        Formula out = build(f, negated);
        memo_.emplace(key, out);
        keep_.push_back(f);
        return out;
    }

private:
    struct Key {
        const void* node;
        bool negated;
        bool operator==(const Key&) const = default;
    };
    struct KeyHash {
        std::size_t operator()(const Key& k) const noexcept
        {
            return std::hash<const void*>{}(k.node) * 2 + (k.negated ? 1 : 0);
        }
    };

    Formula build(const Formula& f, bool n)
    {
        using namespace ltl;
        switch (f.op()) {
        case Op::True:
            return n ? ff() : tt();
        case Op::False:
            return n ? tt() : ff();
        case Op::Atom:
        case Op::Hole:
            return n ? neg(f) : f;
        case Op::Not:
            return run(f.lhs(), !n);
        case Op::Next:
            return next(run(f.lhs(), n));
        case Op::Globally:
            // G a = false R a ; !G a = true U !a
            return n ? until(tt(), run(f.lhs(), true)) : release(ff(), run(f.lhs(), false));
        case Op::Eventually:
            return n ? release(ff(), run(f.lhs(), true)) : until(tt(), run(f.lhs(), false));
        case Op::And:
            return n ? disj(run(f.lhs(), true), run(f.rhs(), true))
                     : conj(run(f.lhs(), false), run(f.rhs(), false));
        case Op::Or:
            return n ? conj(run(f.lhs(), true), run(f.rhs(), true))
                     : disj(run(f.lhs(), false), run(f.rhs(), false));
        case Op::Implies:
            return n ? conj(run(f.lhs(), false), run(f.rhs(), true))
                     : disj(run(f.lhs(), true), run(f.rhs(), false));
        case Op::Iff: {
            Formula a = run(f.lhs(), false), na = run(f.lhs(), true);
            Formula b = run(f.rhs(), false), nb = run(f.rhs(), true);
            return n ? disj(conj(a, nb), conj(na, b)) : conj(disj(na, b), disj(a, nb));
        }
        case Op::Until:
            return n ? release(run(f.lhs(), true), run(f.rhs(), true))
                     : until(run(f.lhs(), false), run(f.rhs(), false));
        case Op::Release:
            return n ? until(run(f.lhs(), true), run(f.rhs(), true))
                     : release(run(f.lhs(), false), run(f.rhs(), false));
        case Op::WeakUntil: {
            // a W b = b R (a | b) ; !(a W b) = !b U (!a & !b)
            Formula nb = run(f.rhs(), true);
            if (n)
                return until(nb, conj(run(f.lhs(), true), nb));
            Formula b = run(f.rhs(), false);
            return release(b, disj(run(f.lhs(), false), b));
        }
        }
        return f;
    }

    std::unordered_map<Key, Formula, KeyHash> memo_;
    std::vector<Formula> keep_; // pins keys' nodes so identities stay unique
};

} // namespace

Formula to_nnf(const Formula& f)
{
    NnfBuilder b;
    return b.run(f, false);
}

bool is_nnf(const Formula& f) noexcept
{
    switch (f.op()) {
    case Op::True:
    case Op::False:
    case Op::Atom:
        return true;
    case Op::Not:
        return f.lhs().op() == Op::Atom;
    case Op::And:
    case Op::Or:
    case Op::Until:
    case Op::Release:
        return is_nnf(f.lhs()) && is_nnf(f.rhs());
    case Op::Next:
        return is_nnf(f.lhs());
    default:
        return false;
    }
}

bool contains_hole(const Formula& f) noexcept
{
    if (f.op() == Op::Hole)
        return true;
    for (const auto& c : f.children())
        if (contains_hole(c))
            return true;
    return false;
}

std::string_view stratum_name(Stratum s) noexcept
{
    switch (s) {
    case Stratum::Simple: return "simple";
    case Stratum::Medium: return "medium";
    case Stratum::High: return "high";
    case Stratum::VeryHigh: return "very_high";
    }
    return "?";
}

Stratum stratum_for_depth(int d) noexcept
{
    if (d <= 4)
        return Stratum::Simple;
    if (d <= 8)
        return Stratum::Medium;
    if (d <= 12)
        return Stratum::High;
    return Stratum::VeryHigh;
}

int depth(const Formula& f) noexcept
{
    int best = 0;
    for (const auto& c : f.children())
        best = std::max(best, depth(c));
    return best + 1;
}

namespace {
void collect(const Formula& f, FormulaStats& s)
{
    ++s.node_count;
    if (f.op() == Op::Atom)
        s.atoms.insert(f.name());
    for (const auto& c : f.children())
        collect(c, s);
}
} // namespace

FormulaStats stats(const Formula& f)
{
    FormulaStats s;
    s.node_count = 0;
    collect(f, s);
    s.ast_depth = depth(f);
    s.stratum = stratum_for_depth(s.ast_depth);
    return s;
}

std::set<std::string> atoms_of(const Formula& f)
{
    std::set<std::string> out;
    std::function<void(const Formula&)> walk = [&](const Formula& g) {
        if (g.op() == Op::Atom)
            out.insert(g.name());
        for (const auto& c : g.children())
            walk(c);
    };
    walk(f);
    return out;
}

namespace {

// Kind weights: unary temporal 0.3, binary temporal 0.2, boolean binary 0.3, negation 0.1.
constexpr std::array<Op, 11> kInternalOps = {
    Op::Next, Op::Globally, Op::Eventually,
    Op::Until, Op::Release, Op::WeakUntil,
    Op::And, Op::Or, Op::Implies, Op::Iff,
    Op::Not,
};
constexpr std::array<double, 11> kInternalWeights = {
    0.1, 0.1, 0.1,
    0.2 / 3, 0.2 / 3, 0.2 / 3,
    0.075, 0.075, 0.075, 0.075,
    0.1,
};

Formula random_leaf(detail::Rng& rng, std::span<const AtomName> pool)
{
    static constexpr std::array<double, 3> w = {0.9, 0.05, 0.05};
    switch (detail::weighted_index(rng, w)) {
    case 0:
        return ltl::atom(pool[detail::uniform_index(rng, pool.size())]);
    case 1:
        return ltl::tt();
    default:
        return ltl::ff();
    }
}

Formula random_exact(detail::Rng& rng, int d, std::span<const AtomName> pool)
{
    if (d <= 1)
        return random_leaf(rng, pool);
    Op op = kInternalOps[detail::weighted_index(rng, kInternalWeights)];
    if (is_unary(op))
        return ltl::unary(op, random_exact(rng, d - 1, pool));
    // One side carries the exact depth; the sibling stays shallow so trees
    // do not grow exponentially with depth.
    int sibling = detail::uniform_int(rng, 1, std::max(1, std::min(d - 1, 1 + (d - 1) / 2)));
    bool deep_left = detail::uniform_index(rng, 2) == 0;
    Formula deep = random_exact(rng, d - 1, pool);
    Formula shallow = random_exact(rng, sibling, pool);
    return deep_left ? ltl::binary(op, deep, shallow) : ltl::binary(op, shallow, deep);
}

} // namespace

Formula random_formula(std::uint64_t seed, int target_depth, std::span<const AtomName> atom_pool)
{
    if (atom_pool.empty())
        throw InvalidInput("random_formula: empty atom pool");
    if (target_depth < 1)
        throw InvalidInput("random_formula: target depth must be >= 1");
    detail::Rng rng(detail::splitmix64(seed));
    return random_exact(rng, target_depth, atom_pool);
}

Formula random_formula(std::uint64_t seed, int target_depth, const std::vector<std::string>& atom_pool)
{
    std::vector<AtomName> names;
    names.reserve(atom_pool.size());
    for (const auto& a : atom_pool)
        names.emplace_back(a);
    return random_formula(seed, target_depth, names);
}

// ---------------------------------------------------------------------------
// Infix text

namespace {

std::string_view infix_symbol(Op op)
{
    switch (op) {
    case Op::Not: return "!";
    case Op::Next: return "X";
    case Op::Globally: return "G";
    case Op::Eventually: return "F";
    case Op::And: return "&";
    case Op::Or: return "|";
    case Op::Implies: return "->";
    case Op::Iff: return "<->";
    case Op::Until: return "U";
    case Op::Release: return "R";
    case Op::WeakUntil: return "W";
    default: return "?";
    }
}

void write_infix(const Formula& f, std::string& out)
{
    switch (f.op()) {
    case Op::True: out += '1'; return;
    case Op::False: out += '0'; return;
    case Op::Atom: out += f.name(); return;
    case Op::Hole: out += "?"; return;
    case Op::Not:
        out += '!';
        write_infix(f.lhs(), out);
        return;
    case Op::Next:
    case Op::Globally:
    case Op::Eventually:
        out += infix_symbol(f.op());
        out += ' ';
        write_infix(f.lhs(), out);
        return;
    default:
        out += '(';
        write_infix(f.lhs(), out);
        out += ' ';
        out += infix_symbol(f.op());
        out += ' ';
        write_infix(f.rhs(), out);
        out += ')';
    }
}

class InfixParser {
public:
    explicit InfixParser(std::string_view s) : s_(s) {}

    Formula parse()
    {
        Formula f = parse_iff();
        skip_ws();
        if (pos_ != s_.size())
            fail("unexpected trailing input");
        return f;
    }

private:
    [[noreturn]] void fail(const std::string& what) const
    {
        throw InvalidInput("ltl syntax error at offset " + std::to_string(pos_) + ": " + what);
    }

    void skip_ws()
    {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_])))
            ++pos_;
    }

    bool eat(std::string_view tok)
    {
        skip_ws();
        if (s_.substr(pos_, tok.size()) == tok) {
            pos_ += tok.size();
            return true;
        }
        return false;
    }

    // Atoms are lowercase, so an uppercase operator letter is never part of one.
    bool eat_letter(char c)
    {
        skip_ws();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    Formula parse_iff()
    {
        Formula lhs = parse_implies();
        while (eat("<->") || eat("<=>"))
            lhs = ltl::iff(lhs, parse_implies());
        return lhs;
    }

    Formula parse_implies()
    {
        Formula lhs = parse_or();
        if (eat("->") || eat("=>"))
            return ltl::implies(lhs, parse_implies());
        return lhs;
    }

    Formula parse_or()
    {
        Formula lhs = parse_and();
        while (eat("||") || eat("|"))
            lhs = ltl::disj(lhs, parse_and());
        return lhs;
    }

    Formula parse_and()
    {
        Formula lhs = parse_temporal();
        while (eat("&&") || eat("&"))
            lhs = ltl::conj(lhs, parse_temporal());
        return lhs;
    }

    Formula parse_temporal()
    {
        Formula lhs = parse_unary();
        skip_ws();
        for (Op op : {Op::Until, Op::Release, Op::WeakUntil}) {
            if (eat_letter(infix_symbol(op)[0]))
                return ltl::binary(op, lhs, parse_temporal());
        }
        return lhs;
    }

    Formula parse_unary()
    {
        if (eat("!") || eat("~"))
            return ltl::neg(parse_unary());
        for (Op op : {Op::Next, Op::Globally, Op::Eventually}) {
            if (eat_letter(infix_symbol(op)[0]))
                return ltl::unary(op, parse_unary());
        }
        return parse_primary();
    }

    Formula parse_primary()
    {
        skip_ws();
        if (eat("(")) {
            Formula f = parse_iff();
            if (!eat(")"))
                fail("expected ')'");
            return f;
        }
        if (pos_ >= s_.size())
            fail("unexpected end of input");
        char c = s_[pos_];
        if (c == '1') {
            ++pos_;
            return ltl::tt();
        }
        if (c == '0') {
            ++pos_;
            return ltl::ff();
        }
        if (std::islower(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t start = pos_;
            while (pos_ < s_.size()
                   && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
                ++pos_;
            std::string word(s_.substr(start, pos_ - start));
            if (word == "true")
                return ltl::tt();
            if (word == "false")
                return ltl::ff();
            if (!is_valid_atom_name(word)) {
                pos_ = start;
                fail("invalid atom name '" + word + "'");
            }
            return ltl::atom(std::move(word));
        }
        fail(std::string("unexpected character '") + c + "'");
    }

    std::string_view s_;
    std::size_t pos_ = 0;
};

} // namespace

std::string to_infix(const Formula& f)
{
    std::string out;
    write_infix(f, out);
    return out;
}

Formula parse_infix(std::string_view text)
{
    return InfixParser(text).parse();
}

} // namespace ltlkit
