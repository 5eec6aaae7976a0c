#include "ltlkit/verify.hpp"

#include "ltlkit/error.hpp"
#include "rng.hpp"

#include <algorithm>
#include <array>

namespace ltlkit {

namespace {

constexpr int kSampledLassos = 256;

// Random short lassos; one on which the formulas disagree separates them
// without building either product automaton.
std::optional<LassoWitness> sampled_separator(const Formula& f1, const Formula& f2,
                                              const std::vector<std::string>& atoms)
{
    detail::Rng rng(0x5eed);
    auto event = [&] {
        Event e;
        for (const auto& a : atoms)
            if (detail::uniform_index(rng, 2))
                e.insert(a);
        return e;
    };
    for (int i = 0; i < kSampledLassos; ++i) {
        LassoWitness w;
        w.prefix.resize(static_cast<std::size_t>(detail::uniform_int(rng, 0, 3)));
        w.loop.resize(static_cast<std::size_t>(detail::uniform_int(rng, 1, 4)));
        for (auto& e : w.prefix)
            e = event();
        for (auto& e : w.loop)
            e = event();
        if (evaluate_on_lasso(f1, w) != evaluate_on_lasso(f2, w))
            return w;
    }
    return std::nullopt;
}

} // namespace

std::string_view verdict_name(VerdictKind k) noexcept
{
    switch (k) {
    case VerdictKind::ParseFailure: return "ParseFailure";
    case VerdictKind::Unsatisfiable: return "Unsatisfiable";
    case VerdictKind::TrivialValid: return "TrivialValid";
    case VerdictKind::Verified: return "Verified";
    }
    return "?";
}

SatResult is_satisfiable(const Formula& f, const std::vector<std::string>& universe, std::size_t budget)
{
    std::vector<std::string> atoms = universe;
    for (const auto& a : atoms_of(f))
        if (std::find(atoms.begin(), atoms.end(), a) == atoms.end())
            atoms.push_back(a);
    std::sort(atoms.begin(), atoms.end());
    auto res = ltl_emptiness(to_nnf(f), atoms, budget);
    return SatResult{!res.empty, std::move(res.witness)};
}

Verdict is_nontrivial(const Formula& f, std::size_t budget)
{
    Verdict v;
    auto sat = is_satisfiable(f, {}, budget);
    if (!sat.satisfiable) {
        v.kind = VerdictKind::Unsatisfiable;
        return v;
    }
    v.witness = std::move(sat.witness);
    auto refute = is_satisfiable(ltl::neg(f), {}, budget);
    if (!refute.satisfiable) {
        v.kind = VerdictKind::TrivialValid;
        return v;
    }
    v.counter_witness = std::move(refute.witness);
    v.kind = VerdictKind::Verified;
    return v;
}

EquivalenceResult check_equivalence(const Formula& f1, const Formula& f2)
{
    if (f1 == f2)
        return {};
    std::vector<std::string> universe;
    for (const auto& a : atoms_of(f1))
        universe.push_back(a);
    for (const auto& a : atoms_of(f2))
        if (std::find(universe.begin(), universe.end(), a) == universe.end())
            universe.push_back(a);
    if (auto w = sampled_separator(f1, f2, universe))
        return EquivalenceResult{false, std::move(w)};
    // An empty direction must be explored in full while a nonempty one can
    // stop at its first witness, so both run under a growing budget.
    const std::array<Formula, 2> diffs = {ltl::conj(f1, ltl::neg(f2)), ltl::conj(ltl::neg(f1), f2)};
    std::array<bool, 2> empty = {false, false};
    for (std::size_t budget = 4096;; budget *= 4) {
        bool last_round = budget > (std::size_t{1} << 26);
        for (std::size_t i = 0; i < 2; ++i) {
            if (empty[i])
                continue;
            try {
                auto r = is_satisfiable(diffs[i], universe, last_round ? 0 : budget);
                if (r.satisfiable)
                    return EquivalenceResult{false, std::move(r.witness)};
                empty[i] = true;
            } catch (const SearchLimitExceeded&) {
            }
        }
        if (empty[0] && empty[1])
            return {};
    }
}

bool are_equivalent(const Formula& f1, const Formula& f2)
{
    return check_equivalence(f1, f2).equivalent;
}

Verdict classify(std::string_view candidate_source)
{
    auto parsed = itl::parse(candidate_source);
    if (!parsed) {
        Verdict v;
        v.kind = VerdictKind::ParseFailure;
        v.parse_error = parsed.error();
        return v;
    }
    return is_nontrivial(parsed.value());
}

} // namespace ltlkit
