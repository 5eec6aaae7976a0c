#include "ltlkit/repair.hpp"

#include "ltlkit/error.hpp"

#include <algorithm>
#include <cctype>
#include <tuple>
#include <unordered_set>

namespace ltlkit::repair {

std::string_view edit_kind_name(EditKind k) noexcept
{
    switch (k) {
    case EditKind::InsertParen: return "InsertParen";
    case EditKind::DeleteParen: return "DeleteParen";
    case EditKind::InsertOperator: return "InsertOperator";
    case EditKind::NormalizeKeyword: return "NormalizeKeyword";
    case EditKind::RelabelNode: return "RelabelNode";
    case EditKind::DeleteSubtree: return "DeleteSubtree";
    case EditKind::InsertSubtree: return "InsertSubtree";
    }
    return "?";
}

std::string_view status_name(RepairStatus s) noexcept
{
    switch (s) {
    case RepairStatus::RepairedVerified: return "RepairedVerified";
    case RepairStatus::RepairedParsedOnly: return "RepairedParsedOnly";
    case RepairStatus::Failed: return "Failed";
    }
    return "?";
}

std::string_view layer_name(RepairLayer l) noexcept
{
    switch (l) {
    case RepairLayer::None: return "none";
    case RepairLayer::Heuristic: return "heuristic";
    case RepairLayer::Structural: return "structural";
    }
    return "?";
}

int edit_distance(std::string_view a, std::string_view b)
{
    std::vector<int> row(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j)
        row[j] = static_cast<int>(j);
    for (std::size_t i = 1; i <= a.size(); ++i) {
        int diag = row[0];
        row[0] = static_cast<int>(i);
        for (std::size_t j = 1; j <= b.size(); ++j) {
            int up = row[j];
            row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0 : 1)});
            diag = up;
        }
    }
    return row[b.size()];
}

namespace {

bool word_char(char c) noexcept
{
    return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_';
}

std::string lowered(std::string_view s)
{
    std::string out(s);
    for (auto& c : out)
        c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

} // namespace

std::vector<std::string> source_identifiers(std::string_view source)
{
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < source.size()) {
        if (!word_char(source[i])) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < source.size() && word_char(source[j]))
            ++j;
        std::string w(source.substr(i, j - i));
        if (is_valid_atom_name(w) && std::find(out.begin(), out.end(), w) == out.end())
            out.push_back(std::move(w));
        i = j;
    }
    return out;
}

namespace {

// ---------------------------------------------------------------------------
// Heuristic layer

struct Candidate {
    std::string text;
    Edit edit;
};

Edit text_edit(EditKind kind, std::size_t pos, std::string detail, const std::string& before, std::string after)
{
    Edit e;
    e.kind = kind;
    e.position = pos;
    e.span_end = pos;
    e.detail = std::move(detail);
    e.before = before;
    e.after = std::move(after);
    return e;
}

Candidate insert_text(const std::string& src, std::size_t pos, const std::string& piece, EditKind kind,
                      std::string detail)
{
    std::string out = src.substr(0, pos) + piece + src.substr(pos);
    return {out, text_edit(kind, pos, std::move(detail), src, out)};
}

Candidate erase_char(const std::string& src, std::size_t pos, EditKind kind, std::string detail)
{
    std::string out = src.substr(0, pos) + src.substr(pos + 1);
    Candidate c{out, text_edit(kind, pos, std::move(detail), src, out)};
    c.edit.span_end = pos + 1;
    return c;
}

bool ends_operand(itl::TokenKind k)
{
    using itl::TokenKind;
    return k == TokenKind::Ident || k == TokenKind::True || k == TokenKind::False || k == TokenKind::RParen;
}

bool starts_operand(itl::TokenKind k)
{
    using itl::TokenKind;
    switch (k) {
    case TokenKind::Ident:
    case TokenKind::True:
    case TokenKind::False:
    case TokenKind::LParen:
    case TokenKind::Not:
    case TokenKind::Next:
    case TokenKind::Always:
    case TokenKind::Eventually:
    case TokenKind::If: return true;
    default: return false;
    }
}

bool expects(const itl::ParseError& err, std::string_view what)
{
    return std::find(err.expected.begin(), err.expected.end(), what) != err.expected.end();
}

void paren_candidates(const std::string& src, const std::vector<itl::Token>& toks, const itl::ParseError& err,
                      std::vector<Candidate>& out)
{
    using itl::TokenKind;
    std::size_t k = 0;
    while (k < toks.size() && toks[k].start < err.position)
        ++k;

    if (k < toks.size() && toks[k].kind == TokenKind::RParen)
        out.push_back(erase_char(src, toks[k].start, EditKind::DeleteParen, "close"));

    const bool close_here = expects(err, ")");
    if (close_here) {
        // Attach the paren to the end of the preceding token.
        std::size_t at = k > 0 ? toks[k - 1].end : err.position;
        out.push_back(insert_text(src, at, ")", EditKind::InsertParen, "close"));
    }

    int depth = 0;
    std::optional<std::size_t> unmatched;
    for (const auto& t : toks) {
        if (t.kind == TokenKind::LParen)
            ++depth;
        else if (t.kind == TokenKind::RParen && --depth < 0 && !unmatched)
            unmatched = t.start;
    }
    if (unmatched)
        out.push_back(erase_char(src, *unmatched, EditKind::DeleteParen, "close"));
    else if (depth > 0 && !close_here) {
        std::size_t end = src.size();
        while (end > 0 && std::isspace(static_cast<unsigned char>(src[end - 1])))
            --end;
        out.push_back(insert_text(src, end, ")", EditKind::InsertParen, "close"));
    }
}

void operator_candidates(const std::string& src, const std::vector<itl::Token>& toks, const itl::ParseError& err,
                         std::vector<Candidate>& out)
{
    std::size_t k = 0;
    while (k < toks.size() && toks[k].start < err.position)
        ++k;
    if (k == 0 || k >= toks.size())
        return;
    if (!ends_operand(toks[k - 1].kind) || !starts_operand(toks[k].kind))
        return;
    // Inside an if-antecedent the parser is waiting for ", then".
    if (expects(err, ", then"))
        out.push_back(insert_text(src, toks[k - 1].end, ", then", EditKind::InsertOperator, ", then"));
    else
        out.push_back(insert_text(src, toks[k].start, "and ", EditKind::InsertOperator, "and"));
}

struct Unit {
    std::size_t start;
    std::size_t end;
    bool comma;
};

std::vector<Unit> units_of(const std::string& src)
{
    std::vector<Unit> out;
    std::size_t i = 0;
    while (i < src.size()) {
        if (src[i] == ',') {
            out.push_back({i, i + 1, true});
            ++i;
        } else if (word_char(src[i])) {
            std::size_t j = i;
            while (j < src.size() && word_char(src[j]))
                ++j;
            out.push_back({i, j, false});
            i = j;
        } else {
            ++i;
        }
    }
    return out;
}

const std::vector<itl::TokenKind>& keyword_table()
{
    using itl::TokenKind;
    static const std::vector<TokenKind> table = {
        TokenKind::True,  TokenKind::False,   TokenKind::Not,      TokenKind::And,        TokenKind::Or,
        TokenKind::If,    TokenKind::Then,    TokenKind::Iff,      TokenKind::Next,       TokenKind::Always,
        TokenKind::Eventually, TokenKind::Until, TokenKind::Releases, TokenKind::WeaklyUntil,
    };
    return table;
}

std::size_t common_prefix(std::string_view a, std::string_view b)
{
    std::size_t n = 0;
    while (n < a.size() && n < b.size() && a[n] == b[n])
        ++n;
    return n;
}

int keyword_words(std::string_view kw)
{
    int n = 0;
    bool in_word = false;
    for (char c : kw) {
        bool w = word_char(c);
        n += (w && !in_word) ? 1 : 0;
        in_word = w;
    }
    return n;
}

void keyword_candidates(const std::string& src, const itl::ParseError& err, std::vector<Candidate>& out)
{
    auto units = units_of(src);
    if (units.empty())
        return;
    std::size_t e = 0;
    while (e < units.size() && units[e].end <= err.position)
        ++e;
    if (e == units.size())
        e = units.size() - 1;

    struct Scored {
        std::tuple<bool, int, long, std::size_t, std::size_t> key;
        Candidate cand;
    };
    std::vector<Scored> scored;
    const std::size_t first = e >= 3 ? e - 3 : 0;
    const std::size_t last = std::min(units.size() - 1, e + 1);
    for (std::size_t s = first; s <= last; ++s) {
        std::string text;
        int words = 0;
        for (std::size_t len = 1; len <= 5 && s + len <= units.size(); ++len) {
            const Unit& u = units[s + len - 1];
            if (!u.comma && len > 1)
                text += ' ';
            text += lowered(std::string_view(src).substr(u.start, u.end - u.start));
            words += u.comma ? 0 : 1;
            if (words == 0)
                continue;
            for (std::size_t t = 0; t < keyword_table().size(); ++t) {
                std::string_view kw = itl::canonical_text(keyword_table()[t]);
                // Misspellings keep the keyword's word count.
                if (words != keyword_words(kw))
                    continue;
                int d = edit_distance(text, kw);
                if (d == 0 || d > 2 || d >= static_cast<int>(kw.size()))
                    continue;
                std::size_t from = units[s].start;
                std::size_t to = u.end;
                std::string after = src.substr(0, from) + std::string(kw) + src.substr(to);
                Edit ed = text_edit(EditKind::NormalizeKeyword, from, std::string(kw), src, after);
                ed.span_end = to;
                std::size_t pre = common_prefix(text, kw);
                std::size_t dist = s > e ? s - e : e - s;
                scored.push_back({{pre == 0, d, -static_cast<long>(pre), dist, t}, {after, std::move(ed)}});
            }
        }
    }
    std::stable_sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) { return a.key < b.key; });
    for (auto& s : scored)
        out.push_back(std::move(s.cand));
}

std::vector<Candidate> heuristic_candidates(const std::string& src, const itl::ParseError& err)
{
    std::vector<Candidate> raw;
    if (!err.lexical) {
        auto toks = itl::lex(src);
        if (toks.ok()) {
            paren_candidates(src, toks.value(), err, raw);
            operator_candidates(src, toks.value(), err, raw);
        }
    }
    keyword_candidates(src, err, raw);

    std::vector<Candidate> out;
    std::unordered_set<std::string> seen{src};
    for (auto& c : raw)
        if (seen.insert(c.text).second)
            out.push_back(std::move(c));
    return out;
}

using ProgressKey = std::pair<int, std::size_t>;

ProgressKey progress_of(const itl::ParseError& err)
{
    return {err.lexical ? 0 : 1, err.position};
}

// Error position of an edited candidate, mapped back to offsets of the text
// before the edit, so insertions do not look like progress by themselves.
ProgressKey progress_of(const itl::ParseError& err, const Edit& e)
{
    const std::size_t a = e.position;
    const std::size_t b = e.span_end;
    const std::size_t inserted = e.after.size() + (b - a) - e.before.size();
    std::size_t pos = err.position;
    if (pos >= a + inserted)
        pos = pos - inserted + (b - a);
    else if (pos > a)
        pos = a;
    return {err.lexical ? 0 : 1, pos};
}

struct HeuristicRun {
    std::string text;
    std::vector<Edit> edits;
    int attempts = 0;
    std::optional<Formula> parsed;
};

HeuristicRun run_heuristic(std::string_view source, const Verdict& verdict, int budget)
{
    HeuristicRun run;
    run.text = std::string(source);
    if (verdict.kind != VerdictKind::ParseFailure || !verdict.parse_error)
        return run;

    itl::ParseError err = *verdict.parse_error;
    while (run.attempts < budget) {
        auto cands = heuristic_candidates(run.text, err);
        if (cands.empty())
            break;
        std::optional<std::size_t> best;
        std::optional<itl::ParseError> best_err;
        ProgressKey best_key = progress_of(err);
        for (std::size_t i = 0; i < cands.size() && run.attempts < budget; ++i) {
            ++run.attempts;
            auto res = itl::parse(cands[i].text);
            if (res.ok()) {
                run.text = std::move(cands[i].text);
                run.edits.push_back(std::move(cands[i].edit));
                run.parsed = res.value();
                return run;
            }
            auto key = progress_of(res.error(), cands[i].edit);
            if (key > best_key) {
                best_key = key;
                best = i;
                best_err = res.error();
            }
        }
        if (!best)
            break;
        run.text = std::move(cands[*best].text);
        run.edits.push_back(std::move(cands[*best].edit));
        err = *best_err;
    }
    return run;
}

RepairOutcome success(std::string text, std::vector<Edit> edits, bool verified, RepairLayer layer, int attempts)
{
    RepairOutcome out;
    out.status = verified ? RepairStatus::RepairedVerified : RepairStatus::RepairedParsedOnly;
    out.result = itl::ItlDocument::from_source(std::move(text));
    out.repair_cost = static_cast<int>(edits.size());
    out.edits = std::move(edits);
    out.layer = layer;
    out.attempts = attempts;
    return out;
}

RepairOutcome failure(int budget, int attempts)
{
    RepairOutcome out;
    out.status = RepairStatus::Failed;
    out.repair_cost = budget;
    out.attempts = attempts;
    return out;
}

// ---------------------------------------------------------------------------
// Structural layer

using Path = std::vector<std::size_t>;

std::string path_text(const Path& p)
{
    std::string s;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (i)
            s += '.';
        s += std::to_string(p[i]);
    }
    return s;
}

void preorder(const Formula& f, Path& at, std::vector<std::pair<Path, Formula>>& out)
{
    out.emplace_back(at, f);
    for (std::size_t i = 0; i < f.children().size(); ++i) {
        at.push_back(i);
        preorder(f.child(i), at, out);
        at.pop_back();
    }
}

Formula replace_at(const Formula& f, const Path& path, std::size_t depth, const Formula& with)
{
    if (depth == path.size())
        return with;
    std::vector<Formula> kids(f.children().begin(), f.children().end());
    kids[path[depth]] = replace_at(kids[path[depth]], path, depth + 1, with);
    return Formula::make(f.op(), std::move(kids), f.name());
}

std::vector<Op> relabel_targets(Op op)
{
    switch (op) {
    case Op::And: return {Op::Or};
    case Op::Or: return {Op::And};
    case Op::Implies: return {Op::Iff};
    case Op::Iff: return {Op::Implies};
    case Op::Until: return {Op::WeakUntil, Op::Release};
    case Op::WeakUntil: return {Op::Until, Op::Release};
    case Op::Release: return {Op::Until, Op::WeakUntil};
    case Op::Globally: return {Op::Eventually};
    case Op::Eventually: return {Op::Globally};
    case Op::True: return {Op::False};
    case Op::False: return {Op::True};
    default: return {};
    }
}

struct SearchState {
    Formula ast;
    std::vector<Edit> edits;
};

int hole_count(const Formula& f)
{
    if (f.op() == Op::Hole)
        return 1;
    int n = 0;
    for (const auto& c : f.children())
        n += hole_count(c);
    return n;
}

Edit ast_edit(EditKind kind, const Path& path, std::string detail, const Formula& before, const Formula& after)
{
    Edit e;
    e.kind = kind;
    e.path = path_text(path);
    e.detail = std::move(detail);
    e.before = itl::serialize(before);
    e.after = itl::serialize(after);
    return e;
}

void successors(const SearchState& s, const std::vector<std::string>& atoms, std::vector<SearchState>& out)
{
    std::vector<std::pair<Path, Formula>> nodes;
    Path at;
    preorder(s.ast, at, nodes);

    // `target` is the node replaced; `path` is the node the edit names (the
    // removed child for deletions).
    auto push = [&](EditKind kind, const Path& target, const Path& path, std::string detail,
                    const Formula& replacement) {
        SearchState next{replace_at(s.ast, target, 0, replacement), s.edits};
        next.edits.push_back(ast_edit(kind, path, std::move(detail), s.ast, next.ast));
        out.push_back(std::move(next));
    };

    // While holes remain, only hole edits can lead to a parseable tree.
    if (contains_hole(s.ast)) {
        for (const auto& [path, node] : nodes) {
            if (node.op() != Op::Hole)
                continue;
            for (const auto& a : atoms)
                push(EditKind::InsertSubtree, path, path, a, ltl::atom(a));
            if (atoms.empty()) {
                push(EditKind::InsertSubtree, path, path, "true", ltl::tt());
                push(EditKind::InsertSubtree, path, path, "false", ltl::ff());
            }
            if (!path.empty()) {
                Path parent(path.begin(), path.end() - 1);
                const Formula& up = nodes[0].second;
                Formula p = up;
                for (std::size_t i : parent)
                    p = p.child(i);
                if (is_binary(p.op()))
                    push(EditKind::DeleteSubtree, parent, path, "?", p.child(1 - path.back()));
            }
        }
        return;
    }

    for (const auto& [path, node] : nodes) {
        if (node.op() == Op::Atom) {
            for (const auto& a : atoms)
                if (a != node.name())
                    push(EditKind::RelabelNode, path, path, a, ltl::atom(a));
            continue;
        }
        for (Op target : relabel_targets(node.op())) {
            std::vector<Formula> kids(node.children().begin(), node.children().end());
            push(EditKind::RelabelNode, path, path, std::string(op_name(target)),
                 Formula::make(target, std::move(kids)));
        }
        if (is_binary(node.op())) {
            Path right = path;
            right.push_back(1);
            push(EditKind::DeleteSubtree, path, right, itl::serialize(node.rhs()), node.lhs());
            Path left = path;
            left.push_back(0);
            push(EditKind::DeleteSubtree, path, left, itl::serialize(node.lhs()), node.rhs());
        }
    }
}

} // namespace

RepairOutcome heuristic_repair(std::string_view source, const Verdict& verdict, int budget_m)
{
    if (budget_m < 1)
        throw InvalidInput("repair budget must be at least 1");
    auto run = run_heuristic(source, verdict, budget_m);
    if (!run.parsed)
        return failure(budget_m, run.attempts);
    bool verified = is_nontrivial(*run.parsed).verified();
    return success(std::move(run.text), std::move(run.edits), verified, RepairLayer::Heuristic, run.attempts);
}

RepairOutcome structural_repair(const itl::ItlDocument& doc, int budget_m, int beam_width)
{
    if (budget_m < 1)
        throw InvalidInput("repair budget must be at least 1");
    if (beam_width < 1)
        throw InvalidInput("beam width must be at least 1");
    const int budget = std::min(budget_m, kStructuralCostCap);

    SearchState root;
    if (doc.ok()) {
        root.ast = doc.parse_result.value();
    } else {
        const auto& err = doc.parse_result.error();
        if (!err.partial_ast)
            return failure(budget_m, 0);
        root.ast = *err.partial_ast;
        if (!contains_hole(root.ast)) {
            Edit e;
            e.before = doc.source;
            e.after = itl::serialize(root.ast);
            if (!err.found) {
                e.kind = EditKind::InsertParen;
                e.position = doc.source.size();
                e.span_end = e.position;
                e.detail = "close";
            } else {
                e.kind = EditKind::DeleteSubtree;
                e.path = "$rest";
                e.position = err.position;
                e.span_end = doc.source.size();
                e.detail = doc.source.substr(err.position);
            }
            root.edits.push_back(std::move(e));
        }
    }
    if (static_cast<int>(root.edits.size()) > budget)
        return failure(budget_m, 0);

    // Identifiers the partial tree did not consume come first: they are the
    // likeliest filler for a hole.
    const auto used = atoms_of(root.ast);
    std::vector<std::string> atoms;
    for (const auto& a : source_identifiers(doc.source))
        if (!used.count(a))
            atoms.push_back(a);
    for (const auto& a : source_identifiers(doc.source))
        if (used.count(a))
            atoms.push_back(a);
    for (const auto& a : used)
        if (std::find(atoms.begin(), atoms.end(), a) == atoms.end())
            atoms.push_back(a);

    int attempts = 0;
    std::optional<SearchState> fallback;
    auto consider = [&](const SearchState& s) {
        if (contains_hole(s.ast))
            return false;
        if (is_nontrivial(s.ast).verified())
            return true;
        if (!fallback && !doc.ok())
            fallback = s;
        return false;
    };
    auto finish = [&](const SearchState& s, bool verified) {
        return success(itl::serialize(s.ast), s.edits, verified, RepairLayer::Structural, attempts);
    };

    if (!root.edits.empty()) {
        ++attempts;
        if (consider(root))
            return finish(root, true);
    }

    std::unordered_set<Formula, FormulaHash> seen{root.ast};
    std::vector<SearchState> frontier{root};
    for (int cost = static_cast<int>(root.edits.size()) + 1; cost <= budget && !frontier.empty(); ++cost) {
        std::vector<SearchState> next;
        for (const auto& s : frontier) {
            std::vector<SearchState> succ;
            successors(s, atoms, succ);
            for (auto& n : succ) {
                if (!seen.insert(n.ast).second)
                    continue;
                ++attempts;
                if (consider(n))
                    return finish(n, true);
                next.push_back(std::move(n));
            }
        }
        std::stable_sort(next.begin(), next.end(), [](const SearchState& a, const SearchState& b) {
            return hole_count(a.ast) < hole_count(b.ast);
        });
        if (next.size() > static_cast<std::size_t>(beam_width))
            next.resize(static_cast<std::size_t>(beam_width));
        frontier = std::move(next);
    }
    if (fallback)
        return finish(*fallback, false);
    return failure(budget_m, attempts);
}

RepairOutcome repair(std::string_view source, int budget_m)
{
    if (budget_m < 1)
        throw InvalidInput("repair budget must be at least 1");
    return repair(source, classify(source), budget_m);
}

RepairOutcome repair(std::string_view source, const Verdict& verdict, int budget_m)
{
    if (budget_m < 1)
        throw InvalidInput("repair budget must be at least 1");
    if (verdict.verified()) {
        RepairOutcome out;
        out.status = RepairStatus::RepairedVerified;
        out.result = itl::ItlDocument::from_source(std::string(source));
        return out;
    }

    auto run = run_heuristic(source, verdict, budget_m);
    std::optional<RepairOutcome> parsed_only;
    if (run.parsed) {
        if (is_nontrivial(*run.parsed).verified())
            return success(std::move(run.text), std::move(run.edits), true, RepairLayer::Heuristic, run.attempts);
        parsed_only = success(run.text, run.edits, false, RepairLayer::Heuristic, run.attempts);
    }

    const int remaining = budget_m - static_cast<int>(run.edits.size());
    int attempts = run.attempts;
    if (remaining >= 1) {
        auto doc = itl::ItlDocument::from_source(run.text);
        auto s = structural_repair(doc, remaining, kDefaultBeamWidth);
        attempts += s.attempts;
        if (s.status == RepairStatus::RepairedVerified || (!parsed_only && s.parsed())) {
            std::vector<Edit> edits = std::move(run.edits);
            edits.insert(edits.end(), s.edits.begin(), s.edits.end());
            return success(s.result->source, std::move(edits), s.status == RepairStatus::RepairedVerified,
                           RepairLayer::Structural, attempts);
        }
    }
    if (parsed_only) {
        parsed_only->attempts = attempts;
        return *parsed_only;
    }
    return failure(budget_m, attempts);
}

} // namespace ltlkit::repair
