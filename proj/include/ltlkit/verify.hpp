#pragma once

#include "ltlkit/automata.hpp"
#include "ltlkit/formula.hpp"
#include "ltlkit/itl.hpp"

#include <optional>
#include <string>
#include <string_view>

namespace ltlkit {

enum class VerdictKind { ParseFailure, Unsatisfiable, TrivialValid, Verified };

std::string_view verdict_name(VerdictKind k) noexcept;

struct Verdict {
    VerdictKind kind = VerdictKind::Verified;
    std::optional<itl::ParseError> parse_error;
    /// Trace satisfying the formula (Verified, TrivialValid).
    std::optional<LassoWitness> witness;
    /// Trace falsifying the formula (Verified only).
    std::optional<LassoWitness> counter_witness;

    bool verified() const noexcept { return kind == VerdictKind::Verified; }
};

struct SatResult {
    bool satisfiable = false;
    std::optional<LassoWitness> witness;
};

/// L(f) nonempty, decided on the automaton of to_nnf(f). `universe` widens
/// the atom set of the check (extra atoms are unconstrained). A nonzero
/// budget bounds the search work (see ltl_emptiness).
SatResult is_satisfiable(const Formula& f, const std::vector<std::string>& universe = {},
                         std::size_t budget = 0);

/// Sat first, then validity (sat of the negation), each within `budget`.
Verdict is_nontrivial(const Formula& f, std::size_t budget = 0);

struct EquivalenceResult {
    bool equivalent = true;
    /// A trace on which exactly one of the two formulas holds.
    std::optional<LassoWitness> separating;
};

/// Both f1 & !f2 and !f1 & f2 unsatisfiable, over the union of their atoms.
EquivalenceResult check_equivalence(const Formula& f1, const Formula& f2);
bool are_equivalent(const Formula& f1, const Formula& f2);

/// Runtime filter: parse, then is_nontrivial.
Verdict classify(std::string_view candidate_source);

} // namespace ltlkit
