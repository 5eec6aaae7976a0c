#pragma once

// Dataset records, synthetic corpus generation, the verify/repair filter,
// grounded explanations, and evaluation metrics.

#include "ltlkit/context.hpp"
#include "ltlkit/formula.hpp"
#include "ltlkit/repair.hpp"
#include "ltlkit/verify.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace ltlkit::pipeline {

struct DatasetRecord {
    std::string id;
    std::string requirement;
    DomainContext context; ///< context.domain_label is the record's domain
    std::string itl;
    std::string ltl; ///< infix syntax, see to_infix
    int depth = 1;

    friend bool operator==(const DatasetRecord&, const DatasetRecord&) = default;
};

/// Checks every record invariant and returns the parsed ITL formula.
/// Throws IngestError (line 0) naming the id on the first violation.
Formula validate_record(const DatasetRecord& r);

enum class IngestMode { Strict, Lenient };

struct IngestIssue {
    std::size_t line = 0;
    std::string id;
    std::string message;
};

struct IngestResult {
    std::vector<DatasetRecord> records;
    /// Rejected lines (Lenient mode only; Strict throws on the first).
    std::vector<IngestIssue> issues;
};

/// Newline-delimited JSON, one record per line; blank lines are skipped.
IngestResult ingest(std::istream& in, IngestMode mode = IngestMode::Strict);
IngestResult ingest(const std::filesystem::path& path, IngestMode mode = IngestMode::Strict);

void write_jsonl(std::ostream& out, const std::vector<DatasetRecord>& records);

/// Records per stratum (simple, medium, high, very high).
using StratumCounts = std::array<int, 4>;
inline constexpr StratumCounts kDefaultStratumMix = {31, 42, 19, 8};

/// Inclusive depth range sampled for a stratum; very high uses 13..16.
std::pair<int, int> depth_range(Stratum s) noexcept;

/// Four-atom automotive context used when none is given.
DomainContext default_context();

/// Search budget (see ltl_emptiness) for each of a corpus formula's sat and
/// validity checks.
inline constexpr std::size_t kCorpusSearchBudget = 20000;

/// Random formulas per stratum, resampled until Verified (within
/// kCorpusSearchBudget) and distinct; requirement text is explain() of the
/// formula. Atoms come from the context's keys.
std::vector<DatasetRecord> generate_corpus(std::uint64_t seed, const StratumCounts& counts = kDefaultStratumMix,
                                           const DomainContext& context = default_context());

/// Templated English rendering grounded in the context. Throws
/// GroundingError for the first atom without a description.
std::string explain(const Formula& f, const DomainContext& ctx);

struct FilterResult {
    std::string id;
    Verdict verdict; ///< classification of the raw candidate
    repair::RepairOutcome outcome;
};

/// classify, then repair anything not Verified; preserves input order.
std::vector<FilterResult> run_filter(const std::vector<std::pair<std::string, std::string>>& candidates,
                                     int budget_m = repair::kDefaultBudget);

enum class MismatchClass { ScopeError, OperatorMismatch, AtomError, Other };
std::string_view mismatch_name(MismatchClass c) noexcept;

/// Diagnoses why two inequivalent formulas differ. Throws InvalidInput when
/// they are equivalent.
MismatchClass classify_mismatch(const Formula& generated, const Formula& reference);

struct MetricBlock {
    int count = 0;
    int syn_count = 0;
    int sat_count = 0;
    int nontriv_count = 0;
    int sem_eq_count = 0;

    double sem_eq = 0.0;
    double syn_corr = 0.0;
    double sat = 0.0;      ///< conditional on syn_corr
    double non_triv = 0.0; ///< conditional on sat
    double pass_rate = 0.0;

    void finalize();
};

struct EvalReport {
    MetricBlock overall;
    std::map<Stratum, MetricBlock> strata;
    /// Non-equivalent candidates by verdict of the evaluated formula.
    std::map<VerdictKind, int> filter_counts;
    std::map<VerdictKind, double> filter_breakdown;
    /// Verified but inequivalent candidates by mismatch class.
    std::map<MismatchClass, int> mismatch_counts;
    std::map<MismatchClass, double> mismatch_breakdown;
    /// Candidates that needed repair to parse.
    int repaired = 0;
};

struct EvalOptions {
    int budget_m = repair::kDefaultBudget;
    /// Measure syntactic correctness after repair (default) or on raw text.
    bool post_repair = true;
};

/// Every candidate id must name a reference (InvalidInput otherwise).
EvalReport evaluate(const std::vector<DatasetRecord>& refs,
                    const std::vector<std::pair<std::string, std::string>>& candidates, const EvalOptions& opts = {});

/// Candidate lines: {"id": ..., "candidate": ...} ("itl" accepted in place of "candidate").
std::vector<std::pair<std::string, std::string>> read_candidates(std::istream& in);

} // namespace ltlkit::pipeline
