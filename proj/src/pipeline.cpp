#include "ltlkit/pipeline.hpp"

#include "ltlkit/error.hpp"
#include "ltlkit/itl.hpp"
#include "ltlkit/json_io.hpp"
#include "rng.hpp"

#include <array>
#include <cctype>
#include <fstream>
#include <istream>
#include <ostream>
#include <unordered_map>
#include <unordered_set>

namespace ltlkit::pipeline {

namespace {

// Empty string when the record is valid.
std::string check_record(const DatasetRecord& r, Formula* out)
{
    try {
        r.context.validate();
    } catch (const InvalidInput& e) {
        return e.what();
    }
    auto parsed = itl::parse(r.itl);
    if (!parsed)
        return "itl does not parse: " + parsed.error().message();
    const Formula& f = parsed.value();
    if (!itl::roundtrip_check(f))
        return "itl does not round-trip through serialization";
    Formula reference;
    try {
        reference = parse_infix(r.ltl);
    } catch (const InvalidInput& e) {
        return std::string("ltl does not parse: ") + e.what();
    }
    if (!are_equivalent(f, reference))
        return "itl and ltl are not equivalent";
    if (int d = depth(f); d != r.depth)
        return "stored depth " + std::to_string(r.depth) + " differs from computed depth " + std::to_string(d);
    for (const auto& a : atoms_of(f))
        if (!r.context.has(a))
            return "atom '" + a + "' has no description in context";
    if (out)
        *out = f;
    return {};
}

bool blank(const std::string& line)
{
    for (unsigned char c : line)
        if (!std::isspace(c))
            return false;
    return true;
}

std::array<int, kOpCount> node_kinds(const Formula& f)
{
    std::array<int, kOpCount> counts{};
    std::vector<const Formula*> stack{&f};
    while (!stack.empty()) {
        const Formula* g = stack.back();
        stack.pop_back();
        ++counts[static_cast<int>(g->op())];
        for (const auto& c : g->children())
            stack.push_back(&c);
    }
    return counts;
}

constexpr std::array<Stratum, 4> kStrata = {Stratum::Simple, Stratum::Medium, Stratum::High, Stratum::VeryHigh};

} // namespace

Formula validate_record(const DatasetRecord& r)
{
    Formula f;
    if (auto msg = check_record(r, &f); !msg.empty())
        throw IngestError(0, r.id, msg);
    return f;
}

IngestResult ingest(std::istream& in, IngestMode mode)
{
    IngestResult result;
    std::unordered_set<std::string> ids;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (blank(line))
            continue;
        std::string id;
        std::string problem;
        DatasetRecord rec;
        try {
            auto j = json_io::json::parse(line);
            if (j.is_object() && j.contains("id") && j["id"].is_string())
                id = j["id"].get<std::string>();
            rec = json_io::record_from_json(j);
            if (!ids.insert(rec.id).second)
                problem = "duplicate id";
            else
                problem = check_record(rec, nullptr);
        } catch (const json_io::json::exception& e) {
            problem = std::string("invalid JSON: ") + e.what();
        } catch (const InvalidInput& e) {
            problem = e.what();
        }
        if (problem.empty()) {
            result.records.push_back(std::move(rec));
            continue;
        }
        if (mode == IngestMode::Strict)
            throw IngestError(lineno, id, problem);
        result.issues.push_back({lineno, id, problem});
    }
    if (in.bad())
        throw IngestError(lineno, "", "read error");
    return result;
}

IngestResult ingest(const std::filesystem::path& path, IngestMode mode)
{
    std::ifstream in(path);
    if (!in)
        throw IngestError(0, "", "cannot open " + path.string());
    return ingest(in, mode);
}

void write_jsonl(std::ostream& out, const std::vector<DatasetRecord>& records)
{
    // Field order follows the wire format.
    for (const auto& r : records) {
        nlohmann::ordered_json j;
        j["id"] = r.id;
        j["requirement"] = r.requirement;
        j["domain"] = r.context.domain_label;
        j["context"] = r.context.definitions;
        j["itl"] = r.itl;
        j["ltl"] = r.ltl;
        j["depth"] = r.depth;
        out << j.dump() << '\n';
    }
}

std::pair<int, int> depth_range(Stratum s) noexcept
{
    switch (s) {
    case Stratum::Simple: return {1, 4};
    case Stratum::Medium: return {5, 8};
    case Stratum::High: return {9, 12};
    case Stratum::VeryHigh: return {13, 16};
    }
    return {1, 4};
}

DomainContext default_context()
{
    return {"automotive",
            {{"p", "lane departure detected"},
             {"q", "obstacle detection active"},
             {"r", "the brake is engaged"},
             {"s", "the sensor is calibrated"}}};
}

std::vector<DatasetRecord> generate_corpus(std::uint64_t seed, const StratumCounts& counts,
                                           const DomainContext& context)
{
    for (int c : counts)
        if (c < 0)
            throw InvalidInput("stratum counts must be nonnegative");
    context.validate();
    std::vector<std::string> pool;
    for (const auto& [atom, _] : context.definitions)
        pool.push_back(atom);

    constexpr int kMaxDraws = 10000;
    std::vector<DatasetRecord> out;
    std::unordered_set<std::string> seen;
    for (std::size_t si = 0; si < kStrata.size(); ++si) {
        auto [lo, hi] = depth_range(kStrata[si]);
        for (int i = 0; i < counts[si]; ++i) {
            bool placed = false;
            for (int draw = 0; draw < kMaxDraws && !placed; ++draw) {
                std::uint64_t s = detail::mix_seed(detail::mix_seed(detail::mix_seed(seed, si), i), draw);
                detail::Rng rng(s);
                int d = detail::uniform_int(rng, lo, hi);
                Formula f = random_formula(detail::splitmix64(s), d, pool);
                std::string text = itl::serialize(f);
                if (seen.count(text))
                    continue;
                try {
                    if (!is_nontrivial(f, kCorpusSearchBudget).verified())
                        continue;
                } catch (const SearchLimitExceeded&) {
                    continue;
                }
                seen.insert(text);
                char id[32];
                std::snprintf(id, sizeof id, "syn-%04zu", out.size() + 1);
                out.push_back({id, explain(f, context), context, text, to_infix(f), d});
                placed = true;
            }
            if (!placed)
                throw Error("no new verified formula found for stratum " + std::string(stratum_name(kStrata[si])));
        }
    }
    return out;
}

std::string explain(const Formula& f, const DomainContext& ctx)
{
    auto tokens = itl::minimal_tokens(f);
    while (!tokens.empty() && tokens.back().kind == itl::TokenKind::RParen)
        tokens.pop_back();

    std::string out;
    auto append = [&out](std::string_view piece) {
        bool attach = piece.front() == ',' || piece.front() == ';';
        if (!out.empty() && !attach)
            out += ' ';
        out += piece;
    };
    for (const auto& t : tokens) {
        switch (t.kind) {
        case itl::TokenKind::Ident: {
            auto it = ctx.definitions.find(t.text);
            if (it == ctx.definitions.end() || it->second.empty())
                throw GroundingError(t.text);
            append(it->second);
            break;
        }
        case itl::TokenKind::LParen: append("the following holds:"); break;
        case itl::TokenKind::RParen: append(";"); break;
        default: append(itl::canonical_text(t.kind));
        }
    }
    if (!out.empty())
        out[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(out[0])));
    return out + ".";
}

std::vector<FilterResult> run_filter(const std::vector<std::pair<std::string, std::string>>& candidates,
                                     int budget_m)
{
    if (budget_m <= 0)
        throw InvalidInput("repair budget must be positive");
    std::vector<FilterResult> out;
    out.reserve(candidates.size());
    for (const auto& [id, text] : candidates) {
        Verdict v = classify(text);
        auto outcome = repair::repair(text, v, budget_m);
        out.push_back({id, std::move(v), std::move(outcome)});
    }
    return out;
}

std::string_view mismatch_name(MismatchClass c) noexcept
{
    switch (c) {
    case MismatchClass::ScopeError: return "ScopeError";
    case MismatchClass::OperatorMismatch: return "OperatorMismatch";
    case MismatchClass::AtomError: return "AtomError";
    case MismatchClass::Other: return "Other";
    }
    return "Other";
}

namespace {

// classify_mismatch without the equivalence precondition check.
MismatchClass mismatch_of(const Formula& generated, const Formula& reference)
{
    if (atoms_of(generated) != atoms_of(reference))
        return MismatchClass::AtomError;
    auto a = node_kinds(generated);
    auto b = node_kinds(reference);
    if (a == b)
        return MismatchClass::ScopeError;
    for (int k = 0; k < kOpCount; ++k) {
        Op op = static_cast<Op>(k);
        bool temporal_binary = op == Op::Until || op == Op::WeakUntil || op == Op::Release;
        if (!temporal_binary && a[k] != b[k])
            return MismatchClass::Other;
    }
    return MismatchClass::OperatorMismatch;
}

} // namespace

MismatchClass classify_mismatch(const Formula& generated, const Formula& reference)
{
    if (are_equivalent(generated, reference))
        throw InvalidInput("classify_mismatch called on equivalent formulas");
    return mismatch_of(generated, reference);
}

void MetricBlock::finalize()
{
    auto ratio = [](int num, int den) { return den == 0 ? 0.0 : static_cast<double>(num) / den; };
    sem_eq = ratio(sem_eq_count, count);
    syn_corr = ratio(syn_count, count);
    sat = ratio(sat_count, syn_count);
    non_triv = ratio(nontriv_count, sat_count);
    pass_rate = ratio(nontriv_count, count);
}

EvalReport evaluate(const std::vector<DatasetRecord>& refs,
                    const std::vector<std::pair<std::string, std::string>>& candidates, const EvalOptions& opts)
{
    if (opts.budget_m <= 0)
        throw InvalidInput("repair budget must be positive");
    struct Ref {
        Formula formula;
        Stratum stratum;
    };
    std::unordered_map<std::string, Ref> by_id;
    for (const auto& r : refs) {
        auto parsed = itl::parse(r.itl);
        if (!parsed)
            throw InvalidInput("reference " + r.id + " does not parse: " + parsed.error().message());
        if (!by_id.emplace(r.id, Ref{parsed.value(), stratum_for_depth(r.depth)}).second)
            throw InvalidInput("duplicate reference id " + r.id);
    }

    EvalReport report;
    for (Stratum s : kStrata)
        report.strata[s];
    for (const auto& [id, text] : candidates) {
        auto it = by_id.find(id);
        if (it == by_id.end())
            throw InvalidInput("unknown id " + id);
        const Ref& ref = it->second;

        Verdict v = classify(text);
        std::optional<Formula> g;
        VerdictKind kind = v.kind;
        if (kind != VerdictKind::ParseFailure) {
            g = itl::parse(text).value();
        } else if (opts.post_repair) {
            auto outcome = repair::repair(text, v, opts.budget_m);
            if (outcome.parsed()) {
                g = outcome.result->parse_result.value();
                kind = is_nontrivial(*g).kind;
                ++report.repaired;
            }
        }

        bool equivalent = g && are_equivalent(*g, ref.formula);
        for (MetricBlock* b : {&report.overall, &report.strata[ref.stratum]}) {
            ++b->count;
            if (g)
                ++b->syn_count;
            if (g && kind != VerdictKind::Unsatisfiable)
                ++b->sat_count;
            if (kind == VerdictKind::Verified)
                ++b->nontriv_count;
            if (equivalent)
                ++b->sem_eq_count;
        }
        if (equivalent)
            continue;
        ++report.filter_counts[kind];
        if (kind == VerdictKind::Verified)
            ++report.mismatch_counts[mismatch_of(*g, ref.formula)];
    }

    report.overall.finalize();
    for (auto& [_, b] : report.strata)
        b.finalize();
    auto fractions = [](const auto& counts, auto& out) {
        int total = 0;
        for (const auto& [_, n] : counts)
            total += n;
        for (const auto& [k, n] : counts)
            out[k] = static_cast<double>(n) / total;
    };
    fractions(report.filter_counts, report.filter_breakdown);
    fractions(report.mismatch_counts, report.mismatch_breakdown);
    return report;
}

std::vector<std::pair<std::string, std::string>> read_candidates(std::istream& in)
{
    std::vector<std::pair<std::string, std::string>> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (blank(line))
            continue;
        json_io::json j;
        try {
            j = json_io::json::parse(line);
        } catch (const json_io::json::exception& e) {
            throw IngestError(lineno, "", std::string("invalid JSON: ") + e.what());
        }
        if (!j.is_object() || !j.contains("id") || !j["id"].is_string())
            throw IngestError(lineno, "", "candidate needs a string 'id'");
        std::string id = j["id"].get<std::string>();
        const char* key = j.contains("candidate") ? "candidate" : "itl";
        if (!j.contains(key) || !j[key].is_string())
            throw IngestError(lineno, id, "candidate needs a string 'candidate' field");
        out.emplace_back(id, j[key].get<std::string>());
    }
    return out;
}

} // namespace ltlkit::pipeline
