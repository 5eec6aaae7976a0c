#include "ltlkit/automata.hpp"

#include "ltlkit/error.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <deque>
#include <map>
#include <sstream>
#include <tuple>
#include <unordered_map>

namespace ltlkit {

// ---------------------------------------------------------------------------
// Automaton basics

std::vector<std::vector<int>> GenBuchiAutomaton::successors() const
{
    std::vector<std::vector<int>> out(static_cast<std::size_t>(num_states));
    for (std::size_t i = 0; i < edges.size(); ++i)
        out[static_cast<std::size_t>(edges[i].src)].push_back(static_cast<int>(i));
    return out;
}

void GenBuchiAutomaton::validate() const
{
    auto in_range = [&](int s) { return s >= 0 && s < num_states; };
    for (int s : initial)
        if (!in_range(s))
            throw InvalidInput("initial state out of range");
    for (const auto& e : edges) {
        if (!in_range(e.src) || !in_range(e.dst))
            throw InvalidInput("edge endpoint is not a declared state");
        if (static_cast<int>(e.acc.size()) != num_acceptance_sets)
            throw InvalidInput("edge acceptance vector has wrong size");
        if (!e.label.consistent())
            throw InvalidInput("edge label requires and forbids the same atom");
    }
    if (atoms.size() > 64)
        throw InvalidInput("atom universe larger than 64");
}

std::string GenBuchiAutomaton::dump() const
{
    std::ostringstream os;
    os << "atoms:";
    for (const auto& a : atoms)
        os << ' ' << a;
    os << "\nstates: " << num_states << "\ninitial:";
    for (int s : initial)
        os << ' ' << s;
    os << "\nacceptance-sets: " << num_acceptance_sets << '\n';
    for (const auto& e : edges) {
        os << e.src << " -> " << e.dst << " [";
        bool first = true;
        for (std::size_t i = 0; i < atoms.size(); ++i) {
            std::uint64_t bit = 1ULL << i;
            if ((e.label.required | e.label.forbidden) & bit) {
                os << (first ? "" : " & ") << ((e.label.forbidden & bit) ? "!" : "") << atoms[i];
                first = false;
            }
        }
        if (first)
            os << "true";
        os << "] {";
        first = true;
        for (std::size_t i = 0; i < e.acc.size(); ++i) {
            if (e.acc[i]) {
                os << (first ? "" : " ") << i;
                first = false;
            }
        }
        os << "}\n";
    }
    return os.str();
}

// ---------------------------------------------------------------------------
// Tableau

namespace {

struct Sub {
    Op op;
    int atom = -1; // universe index, for Atom and Not(Atom)
    int l = -1;
    int r = -1;
};

class Closure {
public:
    explicit Closure(std::vector<std::string> universe) : atoms_(std::move(universe))
    {
        true_id_ = add(Sub{Op::True});
        false_id_ = add(Sub{Op::False});
    }

    int intern(const Formula& f)
    {
        if (auto it = memo_.find(f.identity()); it != memo_.end())
            return it->second;
        int id = build(f);
        memo_.emplace(f.identity(), id);
        pinned_.push_back(f);
        return id;
    }

    const Sub& operator[](int id) const { return subs_[static_cast<std::size_t>(id)]; }
    int size() const noexcept { return static_cast<int>(subs_.size()); }
    int true_id() const noexcept { return true_id_; }
    int false_id() const noexcept { return false_id_; }
    const std::vector<int>& untils() const noexcept { return untils_; }
    int until_index(int id) const { return until_index_.at(id); }
    std::vector<std::string>& atoms() { return atoms_; }

private:
    int add(Sub s)
    {
        auto key = std::make_tuple(static_cast<int>(s.op), s.atom, s.l, s.r);
        if (auto it = index_.find(key); it != index_.end())
            return it->second;
        int id = static_cast<int>(subs_.size());
        subs_.push_back(s);
        index_.emplace(key, id);
        if (s.op == Op::Until) {
            until_index_.emplace(id, static_cast<int>(untils_.size()));
            untils_.push_back(id);
        }
        return id;
    }

    int atom_index(const std::string& name)
    {
        auto it = std::find(atoms_.begin(), atoms_.end(), name);
        if (it != atoms_.end())
            return static_cast<int>(it - atoms_.begin());
        atoms_.push_back(name);
        if (atoms_.size() > 64)
            throw InvalidInput("ltl_to_gba supports at most 64 atoms");
        return static_cast<int>(atoms_.size()) - 1;
    }

    // Constant folding, absorption and idempotence happen here; they keep
    // the closure small without changing the language.
    int build(const Formula& f)
    {
        const int T = true_id_, F = false_id_;
        switch (f.op()) {
        case Op::True:
            return T;
        case Op::False:
            return F;
        case Op::Atom:
            return add(Sub{Op::Atom, atom_index(f.name())});
        case Op::Not:
            if (f.lhs().op() != Op::Atom)
                throw InvalidInput("ltl_to_gba expects negation normal form");
            return add(Sub{Op::Not, atom_index(f.lhs().name())});
        case Op::Next: {
            int a = intern(f.lhs());
            if (a == T || a == F)
                return a;
            return add(Sub{Op::Next, -1, a});
        }
        case Op::And: {
            int a = intern(f.lhs()), b = intern(f.rhs());
            if (complementary(a, b))
                return F;
            if (implies(a, b))
                return a;
            if (implies(b, a))
                return b;
            return add(Sub{Op::And, -1, std::min(a, b), std::max(a, b)});
        }
        case Op::Or: {
            int a = intern(f.lhs()), b = intern(f.rhs());
            if (complementary(a, b))
                return T;
            if (implies(a, b))
                return b;
            if (implies(b, a))
                return a;
            return add(Sub{Op::Or, -1, std::min(a, b), std::max(a, b)});
        }
        case Op::Until: {
            int a = intern(f.lhs()), b = intern(f.rhs());
            // a => b makes a U b hold exactly when b does; a U (x U c) with
            // a => x collapses to x U c.
            if (b == T || b == F || a == F || implies(a, b))
                return b;
            if (subs_[b].op == Op::Until && implies(a, subs_[b].l))
                return b;
            return add(Sub{Op::Until, -1, a, b});
        }
        case Op::Release: {
            int a = intern(f.lhs()), b = intern(f.rhs());
            if (b == T || b == F || a == T || implies(b, a))
                return b;
            if (subs_[b].op == Op::Release && implies(subs_[b].l, a))
                return b;
            return add(Sub{Op::Release, -1, a, b});
        }
        default:
            throw InvalidInput("ltl_to_gba expects negation normal form");
        }
    }

    bool complementary(int a, int b) const
    {
        const Sub& x = subs_[a];
        const Sub& y = subs_[b];
        return x.atom >= 0 && x.atom == y.atom && x.op != y.op;
    }

public:
    // Sound but incomplete syntactic implication between closure members.
    bool implies(int a, int b)
    {
        if (a == b || a == false_id_ || b == true_id_)
            return true;
        if (a == true_id_ || b == false_id_)
            return false;
        const auto key = (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b);
        if (auto it = implies_memo_.find(key); it != implies_memo_.end())
            return it->second;
        const Sub x = subs_[a];
        const Sub y = subs_[b];
        bool r = false;
        if (y.op == Op::Or)
            r = implies(a, y.l) || implies(a, y.r);
        if (!r && y.op == Op::And)
            r = implies(a, y.l) && implies(a, y.r);
        if (!r && x.op == Op::And)
            r = implies(x.l, b) || implies(x.r, b);
        if (!r && x.op == Op::Or)
            r = implies(x.l, b) && implies(x.r, b);
        if (!r && y.op == Op::Until) // a => c gives a => x U c
            r = implies(a, y.r);
        if (!r && x.op == Op::Release) // x R c => c
            r = implies(x.r, b);
        if (!r && x.op == Op::Until) // both disjuncts at position 0 imply b
            r = implies(x.l, b) && implies(x.r, b);
        if (!r && y.op == Op::Release) // a => x and a => c gives a => x R c
            r = implies(a, y.l) && implies(a, y.r);
        if (!r && x.op == Op::Next && y.op == Op::Next)
            r = implies(x.l, y.l);
        if (!r && x.op == Op::Until && y.op == Op::Until)
            r = implies(x.l, y.l) && implies(x.r, y.r);
        if (!r && x.op == Op::Release && y.op == Op::Release)
            r = implies(x.l, y.l) && implies(x.r, y.r);
        implies_memo_.emplace(key, r);
        return r;
    }

private:
    std::vector<std::string> atoms_;
    std::vector<Sub> subs_;
    std::unordered_map<std::uint64_t, bool> implies_memo_;
    std::map<std::tuple<int, int, int, int>, int> index_;
    std::unordered_map<const void*, int> memo_;
    std::vector<Formula> pinned_;
    std::vector<int> untils_;
    std::unordered_map<int, int> until_index_;
    int true_id_ = 0;
    int false_id_ = 1;
};

struct Term {
    std::uint64_t pos = 0;
    std::uint64_t neg = 0;
    std::vector<int> next;
    std::vector<bool> postponed;
};

// Expands a state into its one-step terms. Every closure member is expanded
// once into a pruned term set (memoized); a state's terms are the pruned
// pairwise conjunction of its members' sets. A term is a row of words:
// positive literals, negative literals, next obligations (bitset over
// closure ids), postponed untils (bitset over until indices). Term sets are
// stored flat, one row after another.
class Expander {
public:
    explicit Expander(const Closure& c, std::size_t* work = nullptr, std::size_t budget = 0)
        : c_(c), work_(work), budget_(budget)
    {
    }

    std::vector<Term> expand(const std::vector<int>& state)
    {
        if (memo_.empty())
            init();
        Rows terms = unit();
        for (int g : state) {
            terms = conjoin(terms, of(g));
            if (terms.empty())
                break;
        }
        std::vector<Term> out;
        out.reserve(count(terms));
        for (std::size_t t = 0; t < count(terms); ++t) {
            const Word* r = row(terms, t);
            Term term;
            term.pos = r[0];
            term.neg = r[1];
            for (std::size_t i = 0; i < n_words_ * 64; ++i)
                if (bit(r, 2, i))
                    term.next.push_back(static_cast<int>(i));
            term.postponed.resize(k_);
            for (std::size_t i = 0; i < k_; ++i)
                term.postponed[i] = bit(r, 2 + n_words_, i);
            out.push_back(std::move(term));
        }
        return out;
    }

private:
    using Word = std::uint64_t;
    using Rows = std::vector<Word>;

    void init()
    {
        n_words_ = (static_cast<std::size_t>(c_.size()) + 63) / 64;
        k_ = c_.untils().size();
        width_ = 2 + n_words_ + (k_ + 63) / 64;
        memo_.resize(static_cast<std::size_t>(c_.size()));
    }

    std::size_t count(const Rows& r) const { return r.size() / width_; }
    const Word* row(const Rows& r, std::size_t i) const { return r.data() + i * width_; }
    static bool bit(const Word* r, std::size_t offset, std::size_t i) { return (r[offset + (i >> 6)] >> (i & 63)) & 1; }
    static void set_bit(Word* r, std::size_t offset, std::size_t i) { r[offset + (i >> 6)] |= Word{1} << (i & 63); }

    Rows unit() const { return Rows(width_, 0); }

    void charge(std::size_t n)
    {
        if (work_ && budget_ > 0 && (*work_ += n) > budget_)
            throw SearchLimitExceeded("automaton search exceeds a budget of " + std::to_string(budget_));
    }

    const Rows& of(int g)
    {
        auto& slot = memo_[static_cast<std::size_t>(g)];
        if (!slot)
            slot = compute(g);
        return *slot;
    }

    Rows compute(int g)
    {
        const Sub s = c_[g];
        Rows r = unit();
        switch (s.op) {
        case Op::True:
            return r;
        case Op::False:
            return {};
        case Op::Atom:
            r[0] = Word{1} << s.atom;
            return r;
        case Op::Not:
            r[1] = Word{1} << s.atom;
            return r;
        case Op::Next:
            set_bit(r.data(), 2, static_cast<std::size_t>(s.l));
            return r;
        case Op::And:
            return conjoin(of(s.l), of(s.r));
        case Op::Or: {
            Rows out = of(s.l);
            const Rows& b = of(s.r);
            out.insert(out.end(), b.begin(), b.end());
            return prune(out);
        }
        case Op::Until: {
            // b now, or a now with a U b next, outside this until's acceptance set
            set_bit(r.data(), 2, static_cast<std::size_t>(g));
            set_bit(r.data(), 2 + n_words_, static_cast<std::size_t>(c_.until_index(g)));
            Rows out = of(s.r);
            Rows later = conjoin(of(s.l), r);
            out.insert(out.end(), later.begin(), later.end());
            return prune(out);
        }
        case Op::Release: {
            set_bit(r.data(), 2, static_cast<std::size_t>(g));
            Rows out = conjoin(of(s.l), of(s.r));
            Rows later = conjoin(of(s.r), r);
            out.insert(out.end(), later.begin(), later.end());
            return prune(out);
        }
        default:
            return {};
        }
    }

    Rows conjoin(const Rows& a, const Rows& b)
    {
        const std::size_t na = count(a), nb = count(b);
        charge(na * nb);
        Rows out;
        out.reserve(na * nb * width_);
        for (std::size_t i = 0; i < na; ++i) {
            const Word* x = row(a, i);
            for (std::size_t j = 0; j < nb; ++j) {
                const Word* y = row(b, j);
                if ((x[0] & y[1]) || (x[1] & y[0]))
                    continue;
                for (std::size_t w = 0; w < width_; ++w)
                    out.push_back(x[w] | y[w]);
            }
        }
        return prune(out);
    }

    static int weight(const Word* r, std::size_t width)
    {
        int w = 0;
        for (std::size_t i = 0; i < width; ++i)
            w += std::popcount(r[i]);
        return w;
    }

    // Drops duplicates and terms implied by a weaker one (fewer literals,
    // obligations and postponements accept a superset of words).
    Rows prune(const Rows& rows) const
    {
        const std::size_t n = count(rows);
        if (n < 2)
            return rows;
        std::vector<std::pair<int, std::size_t>> order;
        order.reserve(n);
        for (std::size_t i = 0; i < n; ++i)
            order.emplace_back(weight(row(rows, i), width_), i);
        std::sort(order.begin(), order.end(), [&](const auto& a, const auto& b) {
            if (a.first != b.first)
                return a.first < b.first;
            const Word* x = row(rows, a.second);
            const Word* y = row(rows, b.second);
            return std::lexicographical_compare(x, x + width_, y, y + width_);
        });
        Rows kept;
        for (const auto& [w, i] : order) {
            const Word* r = row(rows, i);
            bool subsumed = false;
            for (std::size_t k = 0; k < count(kept) && !subsumed; ++k) {
                const Word* q = row(kept, k);
                bool sub = true;
                for (std::size_t j = 0; j < width_ && sub; ++j)
                    sub = (q[j] & ~r[j]) == 0;
                subsumed = sub;
            }
            if (!subsumed)
                kept.insert(kept.end(), r, r + width_);
        }
        return kept;
    }

    const Closure& c_;
    std::size_t* work_;
    std::size_t budget_;
    std::size_t n_words_ = 0;
    std::size_t k_ = 0;
    std::size_t width_ = 0;
    std::vector<std::optional<Rows>> memo_;
};

// Tableau states numbered in discovery order, expanded on first request.
class LazyTableau {
public:
    LazyTableau(const Formula& f, std::vector<std::string> universe, std::size_t budget = 0)
        : closure_(std::move(universe)), expander_(closure_, &work_, budget), budget_(budget)
    {
        if (!is_nnf(f))
            throw InvalidInput("ltl_to_gba expects a formula in negation normal form");
        initial_ = state_id({closure_.intern(f)});
    }

    int initial() const noexcept { return initial_; }
    int num_states() const noexcept { return static_cast<int>(states_.size()); }
    int num_acceptance_sets() const noexcept { return static_cast<int>(closure_.untils().size()); }
    const std::vector<std::string>& atoms() { return closure_.atoms(); }

    // References stay valid: edges_ is a deque and never shrinks.
    const std::vector<GbaEdge>& out(int s)
    {
        auto i = static_cast<std::size_t>(s);
        if (!expanded_[i]) {
            std::vector<GbaEdge> edges;
            for (auto& term : expander_.expand(states_[i])) {
                GbaEdge e;
                e.src = s;
                e.label = SymbolicLabel{term.pos, term.neg};
                e.dst = state_id(std::move(term.next));
                e.acc.resize(term.postponed.size());
                for (std::size_t k = 0; k < term.postponed.size(); ++k)
                    e.acc[k] = !term.postponed[k];
                edges.push_back(std::move(e));
            }
            edges_[i] = std::move(edges);
            expanded_[i] = true;
        }
        return edges_[i];
    }

private:
    int state_id(std::vector<int> s)
    {
        std::erase(s, closure_.true_id());
        // A state stands for the conjunction of its obligations, so members
        // implied by another member can go.
        std::vector<int> kept;
        for (std::size_t i = 0; i < s.size(); ++i) {
            bool implied = false;
            for (std::size_t j = 0; j < s.size() && !implied; ++j)
                implied = j != i && closure_.implies(s[j], s[i]) && (j < i || !closure_.implies(s[i], s[j]));
            if (!implied)
                kept.push_back(s[i]);
        }
        s = std::move(kept);
        auto [it, inserted] = ids_.emplace(s, num_states());
        if (inserted) {
            if (budget_ > 0 && ++work_ > budget_)
                throw SearchLimitExceeded("automaton search exceeds a budget of " + std::to_string(budget_));
            states_.push_back(std::move(s));
            edges_.emplace_back();
            expanded_.push_back(false);
        }
        return it->second;
    }

    std::size_t work_ = 0;
    Closure closure_;
    Expander expander_;
    std::size_t budget_;
    int initial_ = 0;
    std::map<std::vector<int>, int> ids_;
    std::vector<std::vector<int>> states_;
    std::deque<std::vector<GbaEdge>> edges_;
    std::vector<bool> expanded_;
};

} // namespace

GenBuchiAutomaton ltl_to_gba(const Formula& f, std::vector<std::string> universe)
{
    LazyTableau t(f, std::move(universe));
    GenBuchiAutomaton a;
    a.initial.push_back(t.initial());
    for (int s = 0; s < t.num_states(); ++s)
        for (const auto& e : t.out(s))
            a.edges.push_back(e);
    a.num_states = t.num_states();
    a.atoms = t.atoms();
    a.num_acceptance_sets = t.num_acceptance_sets();
    return a;
}

GenBuchiAutomaton degeneralize(const GenBuchiAutomaton& a)
{
    const int k = a.num_acceptance_sets;
    GenBuchiAutomaton out;
    out.atoms = a.atoms;
    out.num_acceptance_sets = 1;
    if (k <= 1) {
        out.num_states = a.num_states;
        out.initial = a.initial;
        out.edges = a.edges;
        for (auto& e : out.edges)
            e.acc = {k == 0 ? true : static_cast<bool>(e.acc[0])};
        return out;
    }

    const auto succ = a.successors();
    std::map<std::pair<int, int>, int> ids;
    std::deque<std::pair<int, int>> queue;
    auto id_of = [&](int q, int level) {
        auto [it, inserted] = ids.emplace(std::make_pair(q, level), out.num_states);
        if (inserted) {
            ++out.num_states;
            queue.emplace_back(q, level);
        }
        return it->second;
    };
    for (int q : a.initial)
        out.initial.push_back(id_of(q, 0));
    while (!queue.empty()) {
        auto [q, level] = queue.front();
        queue.pop_front();
        const int src = ids.at({q, level});
        for (int ei : succ[static_cast<std::size_t>(q)]) {
            const GbaEdge& e = a.edges[static_cast<std::size_t>(ei)];
            int j = level;
            while (j < k && e.acc[static_cast<std::size_t>(j)])
                ++j;
            bool accepting = j == k;
            if (accepting)
                j = 0;
            out.edges.push_back(GbaEdge{src, e.label, id_of(e.dst, j), {accepting}});
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Emptiness

namespace {

Event event_of(const GenBuchiAutomaton& a, const SymbolicLabel& l)
{
    Event ev;
    for (std::size_t i = 0; i < a.atoms.size(); ++i)
        if (l.required & (1ULL << i))
            ev.insert(a.atoms[i]);
    return ev;
}

class NestedDfs {
public:
    explicit NestedDfs(const GenBuchiAutomaton& a) : a_(a), succ_(a.successors())
    {
        const auto n = static_cast<std::size_t>(a.num_states);
        color_.assign(n, White);
        red_.assign(n, false);
        stack_pos_.assign(n, -1);
    }

    EmptinessResult run()
    {
        for (int s0 : a_.initial) {
            if (color_[static_cast<std::size_t>(s0)] != White)
                continue;
            if (auto w = outer(s0))
                return EmptinessResult{false, std::move(w)};
        }
        return EmptinessResult{true, std::nullopt};
    }

private:
    enum Color : std::uint8_t { White, Cyan, Blue };
    struct Frame {
        int state;
        int via; // edge used to enter, -1 for the root
        std::size_t next = 0;
    };

    bool accepting(int edge) const { return a_.edges[static_cast<std::size_t>(edge)].acc[0]; }

    void push(int s, int via)
    {
        color_[static_cast<std::size_t>(s)] = Cyan;
        stack_pos_[static_cast<std::size_t>(s)] = static_cast<int>(stack_.size());
        stack_.push_back(Frame{s, via});
    }

    std::optional<LassoWitness> outer(int s0)
    {
        push(s0, -1);
        while (!stack_.empty()) {
            Frame& f = stack_.back();
            const auto& out = succ_[static_cast<std::size_t>(f.state)];
            if (f.next < out.size()) {
                int e = out[f.next++];
                int t = a_.edges[static_cast<std::size_t>(e)].dst;
                if (color_[static_cast<std::size_t>(t)] == White) {
                    push(t, e);
                    continue;
                }
                if (accepting(e))
                    if (auto w = inner(e))
                        return w;
                continue;
            }
            // Postorder of f.state: the edge that entered it is now fully explored.
            int done = f.state;
            int via = f.via;
            color_[static_cast<std::size_t>(done)] = Blue;
            stack_pos_[static_cast<std::size_t>(done)] = -1;
            stack_.pop_back();
            if (via >= 0 && accepting(via))
                if (auto w = inner(via))
                    return w;
        }
        return std::nullopt;
    }

    // Searches from the target of accepting edge `seed` for a state on the
    // outer stack; any hit closes a cycle through `seed`.
    std::optional<LassoWitness> inner(int seed)
    {
        const int t = a_.edges[static_cast<std::size_t>(seed)].dst;
        std::vector<int> path; // edges from t
        if (color_[static_cast<std::size_t>(t)] == Cyan)
            return build(seed, path, t);
        if (red_[static_cast<std::size_t>(t)])
            return std::nullopt;
        struct IFrame {
            int state;
            std::size_t next = 0;
        };
        std::vector<IFrame> st;
        red_[static_cast<std::size_t>(t)] = true;
        st.push_back({t});
        while (!st.empty()) {
            IFrame& f = st.back();
            const auto& out = succ_[static_cast<std::size_t>(f.state)];
            if (f.next >= out.size()) {
                st.pop_back();
                if (!path.empty())
                    path.pop_back();
                continue;
            }
            int e = out[f.next++];
            int u = a_.edges[static_cast<std::size_t>(e)].dst;
            if (color_[static_cast<std::size_t>(u)] == Cyan) {
                path.push_back(e);
                return build(seed, path, u);
            }
            if (!red_[static_cast<std::size_t>(u)]) {
                red_[static_cast<std::size_t>(u)] = true;
                path.push_back(e);
                st.push_back({u});
            }
        }
        return std::nullopt;
    }

    LassoWitness build(int seed, const std::vector<int>& inner_path, int cyan)
    {
        LassoWitness w;
        const int cut = stack_pos_[static_cast<std::size_t>(cyan)];
        for (int i = 1; i <= cut; ++i)
            w.prefix.push_back(label_event(stack_[static_cast<std::size_t>(i)].via));
        // The seed edge leaves the state on top of the outer stack.
        const int src = a_.edges[static_cast<std::size_t>(seed)].src;
        const int top = stack_pos_[static_cast<std::size_t>(src)];
        w.loop.push_back(label_event(seed));
        for (int e : inner_path)
            w.loop.push_back(label_event(e));
        for (int i = cut + 1; i <= top; ++i)
            w.loop.push_back(label_event(stack_[static_cast<std::size_t>(i)].via));
        return w;
    }

    Event label_event(int e) const { return event_of(a_, a_.edges[static_cast<std::size_t>(e)].label); }

    const GenBuchiAutomaton& a_;
    std::vector<std::vector<int>> succ_;
    std::vector<Color> color_;
    std::vector<bool> red_;
    std::vector<int> stack_pos_;
    std::vector<Frame> stack_;
};

} // namespace

EmptinessResult is_empty(const GenBuchiAutomaton& a)
{
    if (a.num_acceptance_sets != 1)
        return NestedDfs(degeneralize(a)).run();
    return NestedDfs(a).run();
}

namespace {

// Couvreur-style SCC search over the generalized automaton. Acceptance
// marks are bitmasks of 64-bit words.
class OnTheFlySearch {
public:
    explicit OnTheFlySearch(LazyTableau& t)
        : t_(t), k_(t.num_acceptance_sets()), words_((static_cast<std::size_t>(k_) + 63) / 64)
    {
        full_.assign(words_, 0);
        for (int i = 0; i < k_; ++i)
            full_[static_cast<std::size_t>(i) / 64] |= 1ULL << (i % 64);
    }

    EmptinessResult run()
    {
        push(t_.initial(), Mask(words_, 0));
        while (!todo_.empty()) {
            Frame& fr = todo_.back();
            const auto& out = t_.out(fr.state);
            if (fr.next < out.size()) {
                const GbaEdge& e = out[fr.next++];
                ensure(e.dst);
                int d = num_[static_cast<std::size_t>(e.dst)];
                if (d == 0) {
                    push(e.dst, mask(e));
                    continue;
                }
                if (d < 0)
                    continue;
                Mask acc = mask(e);
                while (roots_.back().num > d) {
                    merge(acc, roots_.back().acc);
                    merge(acc, roots_.back().in);
                    roots_.pop_back();
                }
                merge(roots_.back().acc, acc);
                if (roots_.back().acc == full_)
                    return EmptinessResult{false, witness()};
                continue;
            }
            const int s = fr.state;
            todo_.pop_back();
            if (roots_.back().num == num_[static_cast<std::size_t>(s)]) {
                roots_.pop_back();
                for (;;) {
                    int x = live_.back();
                    live_.pop_back();
                    num_[static_cast<std::size_t>(x)] = -1;
                    if (x == s)
                        break;
                }
            }
        }
        return EmptinessResult{true, std::nullopt};
    }

private:
    using Mask = std::vector<std::uint64_t>;
    struct Root {
        int num;
        Mask acc; // marks on edges inside the component
        Mask in;  // marks on the edge that entered the root
    };
    struct Frame {
        int state;
        std::size_t next = 0;
    };

    Mask mask(const GbaEdge& e) const
    {
        Mask m(words_, 0);
        for (int i = 0; i < k_; ++i)
            if (e.acc[static_cast<std::size_t>(i)])
                m[static_cast<std::size_t>(i) / 64] |= 1ULL << (i % 64);
        return m;
    }

    static void merge(Mask& into, const Mask& from)
    {
        for (std::size_t i = 0; i < into.size(); ++i)
            into[i] |= from[i];
    }

    void ensure(int s)
    {
        if (num_.size() <= static_cast<std::size_t>(s))
            num_.resize(static_cast<std::size_t>(s) + 1, 0);
    }

    void push(int s, Mask in)
    {
        ensure(s);
        num_[static_cast<std::size_t>(s)] = ++counter_;
        roots_.push_back(Root{counter_, Mask(words_, 0), std::move(in)});
        todo_.push_back(Frame{s});
        live_.push_back(s);
    }

    Event event(const GbaEdge& e)
    {
        Event ev;
        const auto& atoms = t_.atoms();
        for (std::size_t i = 0; i < atoms.size(); ++i)
            if (e.label.required & (1ULL << i))
                ev.insert(atoms[i]);
        return ev;
    }

    // Shortest path inside the component from `from` to the first edge
    // satisfying `goal`, goal edge included.
    template <typename Goal>
    std::vector<const GbaEdge*> bfs(int from, const std::vector<char>& inside, Goal goal)
    {
        std::unordered_map<int, const GbaEdge*> parent{{from, nullptr}};
        std::deque<int> queue{from};
        while (!queue.empty()) {
            int u = queue.front();
            queue.pop_front();
            for (const auto& e : t_.out(u)) {
                auto d = static_cast<std::size_t>(e.dst);
                if (d >= inside.size() || !inside[d])
                    continue;
                if (goal(e)) {
                    std::vector<const GbaEdge*> path{&e};
                    for (const GbaEdge* p = parent[u]; p; p = parent[p->src])
                        path.push_back(p);
                    std::reverse(path.begin(), path.end());
                    return path;
                }
                if (parent.emplace(e.dst, &e).second)
                    queue.push_back(e.dst);
            }
        }
        throw Error("internal: accepting component is not strongly connected");
    }

    LassoWitness witness()
    {
        const int root_num = roots_.back().num;
        std::vector<char> inside(num_.size(), 0);
        int root = -1;
        for (int s : live_)
            if (num_[static_cast<std::size_t>(s)] >= root_num) {
                inside[static_cast<std::size_t>(s)] = 1;
                if (num_[static_cast<std::size_t>(s)] == root_num)
                    root = s;
            }

        LassoWitness w;
        for (const Frame& fr : todo_) {
            if (fr.state == root)
                break;
            w.prefix.push_back(event(t_.out(fr.state)[fr.next - 1]));
        }

        std::vector<const GbaEdge*> loop;
        Mask needed = full_;
        int cur = root;
        auto any = [](const Mask& m) { return std::any_of(m.begin(), m.end(), [](std::uint64_t x) { return x != 0; }); };
        while (any(needed)) {
            auto path = bfs(cur, inside, [&](const GbaEdge& e) {
                Mask m = mask(e);
                for (std::size_t i = 0; i < m.size(); ++i)
                    if (m[i] & needed[i])
                        return true;
                return false;
            });
            for (const GbaEdge* e : path) {
                Mask m = mask(*e);
                for (std::size_t i = 0; i < m.size(); ++i)
                    needed[i] &= ~m[i];
                loop.push_back(e);
            }
            cur = path.back()->dst;
        }
        if (cur != root || loop.empty())
            for (const GbaEdge* e : bfs(cur, inside, [&](const GbaEdge& e) { return e.dst == root; }))
                loop.push_back(e);
        for (const GbaEdge* e : loop)
            w.loop.push_back(event(*e));
        return w;
    }

    LazyTableau& t_;
    int k_;
    std::size_t words_;
    Mask full_;
    std::vector<int> num_; // 0 unvisited, -1 finished component, else DFS number
    std::vector<Root> roots_;
    std::vector<Frame> todo_;
    std::vector<int> live_;
    int counter_ = 0;
};

} // namespace

EmptinessResult ltl_emptiness(const Formula& f, std::vector<std::string> universe, std::size_t budget)
{
    LazyTableau t(f, std::move(universe), budget);
    return OnTheFlySearch(t).run();
}

// ---------------------------------------------------------------------------
// Lasso semantics

namespace {

class LassoEvaluator {
public:
    explicit LassoEvaluator(const LassoWitness& w)
    {
        for (const auto& e : w.prefix)
            events_.push_back(&e);
        for (const auto& e : w.loop)
            events_.push_back(&e);
        n_ = events_.size();
        loop_start_ = w.prefix.size();
    }

    std::vector<char> eval(const Formula& f)
    {
        if (auto it = memo_.find(f.identity()); it != memo_.end())
            return it->second;
        std::vector<char> v = compute(f);
        memo_.emplace(f.identity(), v);
        pinned_.push_back(f);
        return v;
    }

private:
    std::size_t succ(std::size_t i) const { return i + 1 < n_ ? i + 1 : loop_start_; }

    // val[i] = now[i] || (keep[i] && val[succ i]), least or greatest fixpoint.
    std::vector<char> fixpoint(const std::vector<char>& now, const std::vector<char>& keep, bool greatest) const
    {
        std::vector<char> val(n_, greatest ? 1 : 0);
        bool changed = true;
        while (changed) {
            changed = false;
            for (std::size_t k = n_; k-- > 0;) {
                char v = now[k] || (keep[k] && val[succ(k)]);
                if (v != val[k]) {
                    val[k] = v;
                    changed = true;
                }
            }
        }
        return val;
    }

    std::vector<char> compute(const Formula& f)
    {
        std::vector<char> out(n_, 0);
        switch (f.op()) {
        case Op::True:
            out.assign(n_, 1);
            return out;
        case Op::False:
        case Op::Hole:
            return out;
        case Op::Atom:
            for (std::size_t i = 0; i < n_; ++i)
                out[i] = events_[i]->count(f.name()) ? 1 : 0;
            return out;
        case Op::Not: {
            auto a = eval(f.lhs());
            for (std::size_t i = 0; i < n_; ++i)
                out[i] = !a[i];
            return out;
        }
        case Op::Next: {
            auto a = eval(f.lhs());
            for (std::size_t i = 0; i < n_; ++i)
                out[i] = a[succ(i)];
            return out;
        }
        case Op::Globally:
            return fixpoint(std::vector<char>(n_, 0), eval(f.lhs()), true);
        case Op::Eventually:
            return fixpoint(eval(f.lhs()), std::vector<char>(n_, 1), false);
        default:
            break;
        }
        auto a = eval(f.lhs());
        auto b = eval(f.rhs());
        switch (f.op()) {
        case Op::And:
            for (std::size_t i = 0; i < n_; ++i)
                out[i] = a[i] && b[i];
            return out;
        case Op::Or:
            for (std::size_t i = 0; i < n_; ++i)
                out[i] = a[i] || b[i];
            return out;
        case Op::Implies:
            for (std::size_t i = 0; i < n_; ++i)
                out[i] = !a[i] || b[i];
            return out;
        case Op::Iff:
            for (std::size_t i = 0; i < n_; ++i)
                out[i] = (a[i] != 0) == (b[i] != 0);
            return out;
        case Op::Until:
            return fixpoint(b, a, false);
        case Op::WeakUntil:
            return fixpoint(b, a, true);
        case Op::Release: {
            // a R b = b && (a || X(a R b)), greatest fixpoint
            std::vector<char> val(n_, 1);
            bool changed = true;
            while (changed) {
                changed = false;
                for (std::size_t k = n_; k-- > 0;) {
                    char v = b[k] && (a[k] || val[succ(k)]);
                    if (v != val[k]) {
                        val[k] = v;
                        changed = true;
                    }
                }
            }
            return val;
        }
        default:
            return out;
        }
    }

    std::vector<const Event*> events_;
    std::size_t n_ = 0;
    std::size_t loop_start_ = 0;
    std::unordered_map<const void*, std::vector<char>> memo_;
    std::vector<Formula> pinned_;
};

} // namespace

bool evaluate_on_lasso(const Formula& f, const LassoWitness& w)
{
    if (w.loop.empty())
        throw InvalidInput("evaluate_on_lasso: loop must be nonempty");
    LassoEvaluator ev(w);
    return ev.eval(f)[0] != 0;
}

bool accepts_lasso(const GenBuchiAutomaton& a, const LassoWitness& w)
{
    if (w.loop.empty())
        throw InvalidInput("accepts_lasso: loop must be nonempty");
    std::vector<std::uint64_t> events;
    auto encode = [&](const Event& ev) {
        std::uint64_t m = 0;
        for (std::size_t i = 0; i < a.atoms.size(); ++i)
            if (ev.count(a.atoms[i]))
                m |= 1ULL << i;
        return m;
    };
    for (const auto& e : w.prefix)
        events.push_back(encode(e));
    for (const auto& e : w.loop)
        events.push_back(encode(e));
    const std::size_t n = events.size();
    const std::size_t loop_start = w.prefix.size();
    auto next_pos = [&](std::size_t i) { return i + 1 < n ? i + 1 : loop_start; };

    // Product graph (state, position); accepting iff some reachable SCC has
    // an internal edge in every acceptance set.
    const auto succ = a.successors();
    const std::size_t N = static_cast<std::size_t>(a.num_states) * n;
    auto node = [&](int q, std::size_t i) { return static_cast<std::size_t>(q) * n + i; };
    struct PEdge {
        std::size_t to;
        int edge;
    };
    std::vector<std::vector<PEdge>> adj(N);
    for (int q = 0; q < a.num_states; ++q)
        for (std::size_t i = 0; i < n; ++i)
            for (int e : succ[static_cast<std::size_t>(q)]) {
                const auto& ed = a.edges[static_cast<std::size_t>(e)];
                if (ed.label.admits(events[i]))
                    adj[node(q, i)].push_back({node(ed.dst, next_pos(i)), e});
            }

    std::vector<char> reach(N, 0);
    std::vector<std::size_t> work;
    for (int q : a.initial) {
        reach[node(q, 0)] = 1;
        work.push_back(node(q, 0));
    }
    while (!work.empty()) {
        std::size_t v = work.back();
        work.pop_back();
        for (const auto& pe : adj[v])
            if (!reach[pe.to]) {
                reach[pe.to] = 1;
                work.push_back(pe.to);
            }
    }

    // Tarjan, iterative.
    std::vector<int> index(N, -1), low(N, 0), comp(N, -1);
    std::vector<char> on(N, 0);
    std::vector<std::size_t> st;
    int counter = 0, ncomp = 0;
    struct CallFrame {
        std::size_t v;
        std::size_t i;
    };
    for (std::size_t root = 0; root < N; ++root) {
        if (!reach[root] || index[root] >= 0)
            continue;
        std::vector<CallFrame> calls{{root, 0}};
        index[root] = low[root] = counter++;
        st.push_back(root);
        on[root] = 1;
        while (!calls.empty()) {
            auto& cf = calls.back();
            if (cf.i < adj[cf.v].size()) {
                std::size_t u = adj[cf.v][cf.i++].to;
                if (index[u] < 0) {
                    index[u] = low[u] = counter++;
                    st.push_back(u);
                    on[u] = 1;
                    calls.push_back({u, 0});
                } else if (on[u]) {
                    low[cf.v] = std::min(low[cf.v], index[u]);
                }
                continue;
            }
            std::size_t v = cf.v;
            calls.pop_back();
            if (!calls.empty())
                low[calls.back().v] = std::min(low[calls.back().v], low[v]);
            if (low[v] == index[v]) {
                while (true) {
                    std::size_t x = st.back();
                    st.pop_back();
                    on[x] = 0;
                    comp[x] = ncomp;
                    if (x == v)
                        break;
                }
                ++ncomp;
            }
        }
    }
    const std::size_t k = static_cast<std::size_t>(a.num_acceptance_sets);
    std::vector<std::vector<bool>> seen(static_cast<std::size_t>(ncomp), std::vector<bool>(k, false));
    std::vector<char> cyclic(static_cast<std::size_t>(ncomp), 0);
    for (std::size_t v = 0; v < N; ++v) {
        if (!reach[v])
            continue;
        for (const auto& pe : adj[v]) {
            if (comp[pe.to] != comp[v])
                continue;
            auto c = static_cast<std::size_t>(comp[v]);
            cyclic[c] = 1;
            const auto& acc = a.edges[static_cast<std::size_t>(pe.edge)].acc;
            for (std::size_t j = 0; j < k; ++j)
                if (acc[j])
                    seen[c][j] = true;
        }
    }
    for (std::size_t c = 0; c < static_cast<std::size_t>(ncomp); ++c) {
        if (!cyclic[c])
            continue;
        if (std::all_of(seen[c].begin(), seen[c].end(), [](bool b) { return b; }))
            return true;
    }
    return false;
}

} // namespace ltlkit
