#pragma once

// Minimal-edit repair of ITL candidates.
//
// Layer 1 (heuristic_repair) edits the text near the reported parse error:
// parenthesis insertion/deletion, inserting "and" between adjacent operands,
// and snapping misspelled keywords to the keyword table. Every candidate
// string it builds counts as one attempt against the budget.
//
// Layer 2 (structural_repair) searches over AST edits (fill a hole with an
// atom from the source, relabel a node, delete a subtree) in order of total
// cost, keeping a bounded beam per cost level.
//
// Repaired strings are proposals: relabeling or deleting nodes changes the
// meaning of the candidate.

#include "ltlkit/itl.hpp"
#include "ltlkit/verify.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ltlkit::repair {

enum class EditKind {
    InsertParen,
    DeleteParen,
    InsertOperator,
    NormalizeKeyword,
    RelabelNode,
    DeleteSubtree,
    InsertSubtree,
};

std::string_view edit_kind_name(EditKind k) noexcept;

struct Edit {
    EditKind kind = EditKind::InsertParen;
    /// Byte offset for text edits (start of the replaced span for NormalizeKeyword).
    std::size_t position = 0;
    /// End of the replaced span (NormalizeKeyword only).
    std::size_t span_end = 0;
    /// Node address for AST edits: child indices joined by '.', "" for the
    /// root, "$rest" for the unparsed tail of the input.
    std::string path;
    /// "open"/"close" for parens, the keyword text, the new operator name,
    /// or the inserted subtree.
    std::string detail;
    /// Document text before and after the edit. AST edits render holes as "?".
    std::string before;
    std::string after;
    int cost = 1;

    friend bool operator==(const Edit&, const Edit&) = default;
};

enum class RepairStatus { RepairedVerified, RepairedParsedOnly, Failed };
std::string_view status_name(RepairStatus s) noexcept;

enum class RepairLayer { None, Heuristic, Structural };
std::string_view layer_name(RepairLayer l) noexcept;

struct RepairOutcome {
    RepairStatus status = RepairStatus::Failed;
    /// The repaired document; for a passthrough, the input itself.
    std::optional<itl::ItlDocument> result;
    std::vector<Edit> edits;
    /// Number of edits applied; the budget when status is Failed.
    int repair_cost = 0;
    /// Layer that produced the result (None for passthrough and failures).
    RepairLayer layer = RepairLayer::None;
    /// Candidate strings or ASTs examined across both layers.
    int attempts = 0;

    bool parsed() const noexcept { return status != RepairStatus::Failed; }
};

inline constexpr int kDefaultBudget = 5;
inline constexpr int kStructuralCostCap = 4;
inline constexpr int kDefaultBeamWidth = 16;

/// Text-level repair. `verdict` is the classification that made the input
/// fail. Parse failures are accepted as soon as a candidate parses;
/// verification failures need a candidate that is Verified (text edits are
/// keyed on a parse error, so a parseable input has none to try).
RepairOutcome heuristic_repair(std::string_view source, const Verdict& verdict, int budget_m = kDefaultBudget);

/// AST-level search with total edit cost at most min(budget_m, 4).
/// Accepts the first hole-free candidate that is Verified; otherwise reports
/// the first parseable candidate it met as RepairedParsedOnly.
RepairOutcome structural_repair(const itl::ItlDocument& doc, int budget_m = kDefaultBudget,
                                int beam_width = kDefaultBeamWidth);

/// classify, then the heuristic layer, then the structural layer on the
/// heuristic layer's best attempt with the remaining budget.
RepairOutcome repair(std::string_view source, int budget_m = kDefaultBudget);

/// Same, reusing an already computed classify(source).
RepairOutcome repair(std::string_view source, const Verdict& verdict, int budget_m);

/// Atom-like identifiers in `source`, in order of first appearance. Works on
/// text that does not lex.
std::vector<std::string> source_identifiers(std::string_view source);

/// Levenshtein distance.
int edit_distance(std::string_view a, std::string_view b);

} // namespace ltlkit::repair
