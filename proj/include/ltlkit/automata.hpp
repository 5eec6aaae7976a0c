#pragma once

// Generalized Büchi automata with transition-based acceptance.
//
// ltl_to_gba builds the automaton by tableau expansion: a state is the set of
// obligations that must hold from the current position on. Expanding a state
// yields terms (literal conjunction, next obligations, postponed untils); each
// term becomes one edge. An edge belongs to acceptance set i unless it
// postpones the i-th until subformula.

#include "ltlkit/formula.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace ltlkit {

/// Conjunction of literals over an atom universe of at most 64 atoms.
struct SymbolicLabel {
    std::uint64_t required = 0;
    std::uint64_t forbidden = 0;

    bool consistent() const noexcept { return (required & forbidden) == 0; }
    bool admits(std::uint64_t event) const noexcept
    {
        return (event & required) == required && (event & forbidden) == 0;
    }
    friend bool operator==(const SymbolicLabel&, const SymbolicLabel&) = default;
};

struct GbaEdge {
    int src = 0;
    SymbolicLabel label;
    int dst = 0;
    /// acc[i] set iff the edge is in acceptance set i.
    std::vector<bool> acc;
};

class GenBuchiAutomaton {
public:
    int num_states = 0;
    std::vector<int> initial;
    std::vector<GbaEdge> edges;
    int num_acceptance_sets = 0;
    std::vector<std::string> atoms;

    /// Edge indices leaving `state`, in insertion order.
    std::vector<std::vector<int>> successors() const;

    /// Checks endpoint and acceptance-vector invariants; throws InvalidInput.
    void validate() const;

    /// Human-readable text dump (see docs/automaton_format.md).
    std::string dump() const;
};

using Event = std::set<std::string>;

/// Ultimately periodic trace prefix · loop^ω.
struct LassoWitness {
    std::vector<Event> prefix;
    std::vector<Event> loop;
    friend bool operator==(const LassoWitness&, const LassoWitness&) = default;
};

/// `f` must be in NNF (see to_nnf). `universe` lists the atoms labels range
/// over; atoms of `f` missing from it are appended.
GenBuchiAutomaton ltl_to_gba(const Formula& f, std::vector<std::string> universe = {});

/// Counter construction; result has exactly one acceptance set.
GenBuchiAutomaton degeneralize(const GenBuchiAutomaton& a);

struct EmptinessResult {
    bool empty = true;
    std::optional<LassoWitness> witness;
};

/// Degeneralizes when needed, then runs a nested depth-first search.
EmptinessResult is_empty(const GenBuchiAutomaton& a);

/// Same answer as is_empty(ltl_to_gba(f, universe)), but states are expanded
/// only when the search reaches them and the search stops at the first
/// strongly connected component whose internal edges cover every acceptance
/// set. A nonzero budget caps the work (states built plus expansion
/// branches); exceeding it throws SearchLimitExceeded.
EmptinessResult ltl_emptiness(const Formula& f, std::vector<std::string> universe = {},
                              std::size_t budget = 0);

/// Whether the trace prefix · loop^ω satisfies `f` at position 0.
bool evaluate_on_lasso(const Formula& f, const LassoWitness& w);

/// True iff the automaton has an accepting run over the lasso's trace.
/// Used to replay witnesses independently of the search that produced them.
bool accepts_lasso(const GenBuchiAutomaton& a, const LassoWitness& w);

} // namespace ltlkit
