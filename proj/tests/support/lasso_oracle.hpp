#pragma once

// Exhaustive small-lasso search, used as an independent oracle for the
// automata-based checks. Lassos are enumerated 64 at a time: each bit of a
// machine word is one candidate trace, and every subformula is evaluated on
// all of them at once per trace position.

#include "ltlkit/automata.hpp"
#include "ltlkit/formula.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace ltlkit::testing {

class LassoOracle {
public:
    LassoOracle(std::vector<std::string> atoms, int max_prefix = 4, int max_loop = 4)
        : atoms_(std::move(atoms)), max_prefix_(max_prefix), max_loop_(max_loop)
    {
    }

    /// First lasso (shortest shapes first) satisfying f, if any.
    std::optional<LassoWitness> find_model(const Formula& f)
    {
        flatten(f);
        for (int p = 0; p <= max_prefix_; ++p)
            for (int l = 1; l <= max_loop_; ++l)
                if (auto w = search(p, l))
                    return w;
        return std::nullopt;
    }

    /// A lasso on which exactly one of f1, f2 holds.
    std::optional<LassoWitness> find_separating(const Formula& f1, const Formula& f2)
    {
        return find_model(ltl::neg(ltl::iff(f1, f2)));
    }

private:
    struct Node {
        Op op;
        int atom = -1;
        int l = -1;
        int r = -1;
    };

    void flatten(const Formula& f)
    {
        nodes_.clear();
        ids_.clear();
        keep_.clear();
        root_ = add(f);
    }

    int add(const Formula& f)
    {
        if (auto it = ids_.find(f.identity()); it != ids_.end())
            return it->second;
        Node n{f.op()};
        if (f.op() == Op::Atom) {
            for (std::size_t i = 0; i < atoms_.size(); ++i)
                if (atoms_[i] == f.name())
                    n.atom = static_cast<int>(i);
        }
        if (f.children().size() >= 1)
            n.l = add(f.lhs());
        if (f.children().size() == 2)
            n.r = add(f.rhs());
        int id = static_cast<int>(nodes_.size());
        nodes_.push_back(n);
        ids_.emplace(f.identity(), id);
        keep_.push_back(f);
        return id;
    }

    std::optional<LassoWitness> search(int p, int l)
    {
        const int n = p + l;
        const int A = static_cast<int>(atoms_.size());
        const int bits = A * n;
        const std::uint64_t lanes_total = bits >= 64 ? 0 : (1ULL << bits);
        const std::uint64_t words = bits <= 6 ? 1 : (1ULL << (bits - 6));
        const std::uint64_t lane_mask = bits >= 6 ? ~0ULL : ((1ULL << lanes_total) - 1);

        std::vector<int> succ(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i)
            succ[static_cast<std::size_t>(i)] = i + 1 < n ? i + 1 : p;

        // Bit patterns for the six in-word index bits.
        std::uint64_t low[6];
        for (int j = 0; j < 6; ++j) {
            low[j] = 0;
            for (int b = 0; b < 64; ++b)
                if ((b >> j) & 1)
                    low[j] |= 1ULL << b;
        }

        const std::size_t N = nodes_.size();
        std::vector<std::uint64_t> val(N * static_cast<std::size_t>(n));
        auto at = [&](int node, int pos) -> std::uint64_t& {
            return val[static_cast<std::size_t>(node) * static_cast<std::size_t>(n) + static_cast<std::size_t>(pos)];
        };

        for (std::uint64_t w = 0; w < words; ++w) {
            for (std::size_t k = 0; k < N; ++k) {
                const Node& nd = nodes_[k];
                const int id = static_cast<int>(k);
                switch (nd.op) {
                case Op::True:
                    for (int i = 0; i < n; ++i)
                        at(id, i) = ~0ULL;
                    break;
                case Op::False:
                case Op::Hole:
                    for (int i = 0; i < n; ++i)
                        at(id, i) = 0;
                    break;
                case Op::Atom:
                    for (int i = 0; i < n; ++i) {
                        if (nd.atom < 0) {
                            at(id, i) = 0;
                            continue;
                        }
                        int j = A * i + nd.atom;
                        at(id, i) = j < 6 ? low[j] : (((w >> (j - 6)) & 1) ? ~0ULL : 0);
                    }
                    break;
                case Op::Not:
                    for (int i = 0; i < n; ++i)
                        at(id, i) = ~at(nd.l, i);
                    break;
                case Op::And:
                    for (int i = 0; i < n; ++i)
                        at(id, i) = at(nd.l, i) & at(nd.r, i);
                    break;
                case Op::Or:
                    for (int i = 0; i < n; ++i)
                        at(id, i) = at(nd.l, i) | at(nd.r, i);
                    break;
                case Op::Implies:
                    for (int i = 0; i < n; ++i)
                        at(id, i) = ~at(nd.l, i) | at(nd.r, i);
                    break;
                case Op::Iff:
                    for (int i = 0; i < n; ++i)
                        at(id, i) = ~(at(nd.l, i) ^ at(nd.r, i));
                    break;
                case Op::Next:
                    for (int i = 0; i < n; ++i)
                        at(id, i) = at(nd.l, succ[static_cast<std::size_t>(i)]);
                    break;
                case Op::Globally:
                    fix(id, n, succ, [](int) { return 0ULL; }, [&](int i) { return at(nd.l, i); }, true, at);
                    break;
                case Op::Eventually:
                    fix(id, n, succ, [&](int i) { return at(nd.l, i); }, [&](int) { return ~0ULL; }, false, at);
                    break;
                case Op::Until:
                    fix(id, n, succ, [&](int i) { return at(nd.r, i); }, [&](int i) { return at(nd.l, i); }, false, at);
                    break;
                case Op::WeakUntil:
                    fix(id, n, succ, [&](int i) { return at(nd.r, i); }, [&](int i) { return at(nd.l, i); }, true, at);
                    break;
                case Op::Release:
                    // a R b == !(!a U !b)
                    fix(id, n, succ, [&](int i) { return ~at(nd.r, i); }, [&](int i) { return ~at(nd.l, i); },
                        false, at);
                    for (int i = 0; i < n; ++i)
                        at(id, i) = ~at(id, i);
                    break;
                }
            }
            std::uint64_t hit = at(root_, 0) & lane_mask;
            if (hit) {
                int lane = __builtin_ctzll(hit);
                std::uint64_t index = (w << 6) | static_cast<std::uint64_t>(lane);
                return decode(index, p, l);
            }
        }
        return std::nullopt;
    }

    template <typename Now, typename Keep, typename At>
    static void fix(int id, int n, const std::vector<int>& succ, Now now, Keep keep, bool greatest, At& at)
    {
        for (int i = 0; i < n; ++i)
            at(id, i) = greatest ? ~0ULL : 0ULL;
        bool changed = true;
        while (changed) {
            changed = false;
            for (int i = n - 1; i >= 0; --i) {
                std::uint64_t v = now(i) | (keep(i) & at(id, succ[static_cast<std::size_t>(i)]));
                if (v != at(id, i)) {
                    at(id, i) = v;
                    changed = true;
                }
            }
        }
    }

    LassoWitness decode(std::uint64_t index, int p, int l) const
    {
        LassoWitness w;
        const int A = static_cast<int>(atoms_.size());
        for (int i = 0; i < p + l; ++i) {
            Event ev;
            for (int a = 0; a < A; ++a)
                if ((index >> (A * i + a)) & 1)
                    ev.insert(atoms_[static_cast<std::size_t>(a)]);
            (i < p ? w.prefix : w.loop).push_back(std::move(ev));
        }
        return w;
    }

    std::vector<std::string> atoms_;
    int max_prefix_;
    int max_loop_;
    std::vector<Node> nodes_;
    std::unordered_map<const void*, int> ids_;
    std::vector<Formula> keep_;
    int root_ = 0;
};

} // namespace ltlkit::testing
