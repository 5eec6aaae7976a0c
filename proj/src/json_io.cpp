#include "ltlkit/json_io.hpp"

#include "ltlkit/error.hpp"

namespace ltlkit::json_io {

namespace {

json events(const std::vector<Event>& seq)
{
    json out = json::array();
    for (const auto& e : seq)
        out.push_back(json(std::vector<std::string>(e.begin(), e.end())));
    return out;
}

const json& field(const json& j, const char* key)
{
    auto it = j.find(key);
    if (it == j.end())
        throw InvalidInput(std::string("missing field '") + key + "'");
    return *it;
}

std::string string_field(const json& j, const char* key)
{
    const json& v = field(j, key);
    if (!v.is_string())
        throw InvalidInput(std::string("field '") + key + "' must be a string");
    return v.get<std::string>();
}

json fractions(const json& counts, int total)
{
    json out = json::object();
    for (auto it = counts.begin(); it != counts.end(); ++it)
        out[it.key()] = total == 0 ? 0.0 : it.value().get<double>() / total;
    return out;
}

} // namespace

json to_json(const LassoWitness& w)
{
    return {{"prefix", events(w.prefix)}, {"loop", events(w.loop)}};
}

json to_json(const itl::ParseError& e)
{
    json j = {{"position", e.position},
              {"found", e.found ? json(*e.found) : json(nullptr)},
              {"expected", e.expected},
              {"lexical", e.lexical},
              {"message", e.message()}};
    j["partial_ast"] = e.partial_ast ? json(itl::serialize(*e.partial_ast)) : json(nullptr);
    return j;
}

json to_json(const Verdict& v)
{
    json j = {{"kind", verdict_name(v.kind)}};
    if (v.parse_error)
        j["parse_error"] = to_json(*v.parse_error);
    if (v.witness)
        j["witness"] = to_json(*v.witness);
    if (v.counter_witness)
        j["counter_witness"] = to_json(*v.counter_witness);
    return j;
}

json to_json(const repair::Edit& e)
{
    json j = {{"kind", repair::edit_kind_name(e.kind)}, {"detail", e.detail}, {"before", e.before},
              {"after", e.after}, {"cost", e.cost}};
    switch (e.kind) {
    case repair::EditKind::RelabelNode:
    case repair::EditKind::DeleteSubtree:
    case repair::EditKind::InsertSubtree:
        j["path"] = e.path;
        break;
    case repair::EditKind::NormalizeKeyword:
        j["position"] = e.position;
        j["span_end"] = e.span_end;
        break;
    default:
        j["position"] = e.position;
    }
    return j;
}

json to_json(const repair::RepairOutcome& o)
{
    json edits = json::array();
    for (const auto& e : o.edits)
        edits.push_back(to_json(e));
    json j = {{"status", repair::status_name(o.status)},
              {"repair_cost", o.repair_cost},
              {"layer", repair::layer_name(o.layer)},
              {"attempts", o.attempts},
              {"edits", std::move(edits)}};
    if (o.result && o.result->ok())
        j["result"] = itl::serialize(o.result->parse_result.value());
    else
        j["result"] = nullptr;
    return j;
}

json to_json(const DomainContext& c)
{
    return json(c.definitions);
}

json to_json(const pipeline::DatasetRecord& r)
{
    json j = json::object();
    j["id"] = r.id;
    j["requirement"] = r.requirement;
    j["domain"] = r.context.domain_label;
    j["context"] = to_json(r.context);
    j["itl"] = r.itl;
    j["ltl"] = r.ltl;
    j["depth"] = r.depth;
    return j;
}

json to_json(const pipeline::FilterResult& r)
{
    return {{"id", r.id}, {"verdict", to_json(r.verdict)}, {"repair", to_json(r.outcome)}};
}

json to_json(const pipeline::MetricBlock& m)
{
    return {{"count", m.count},
            {"syn_count", m.syn_count},
            {"sat_count", m.sat_count},
            {"nontriv_count", m.nontriv_count},
            {"sem_eq_count", m.sem_eq_count},
            {"sem_eq", m.sem_eq},
            {"syn_corr", m.syn_corr},
            {"sat", m.sat},
            {"non_triv", m.non_triv},
            {"pass_rate", m.pass_rate}};
}

json to_json(const pipeline::EvalReport& r)
{
    json strata = json::object();
    for (const auto& [s, block] : r.strata)
        strata[std::string(stratum_name(s))] = to_json(block);

    json filter = json::object();
    int filter_total = 0;
    for (const auto& [k, n] : r.filter_counts) {
        filter[std::string(verdict_name(k))] = n;
        filter_total += n;
    }
    json mismatch = json::object();
    int mismatch_total = 0;
    for (const auto& [k, n] : r.mismatch_counts) {
        mismatch[std::string(pipeline::mismatch_name(k))] = n;
        mismatch_total += n;
    }
    return {{"overall", to_json(r.overall)},
            {"strata", std::move(strata)},
            {"repaired", r.repaired},
            {"filter_counts", filter},
            {"filter_breakdown", fractions(filter, filter_total)},
            {"mismatch_counts", mismatch},
            {"mismatch_breakdown", fractions(mismatch, mismatch_total)}};
}

json to_json(const policy::RewardResult& r)
{
    json j = {{"reward", r.reward},
              {"parsed", r.parsed},
              {"verified", r.verified},
              {"repair_cost", r.repair_cost},
              {"verdict", to_json(r.verdict)}};
    if (r.outcome)
        j["repair"] = to_json(*r.outcome);
    return j;
}

json to_json(const policy::StepReport& r)
{
    return {{"step", r.step},
            {"mean_reward", r.mean_reward},
            {"pass_rate", r.pass_rate},
            {"advantage_sums", r.advantage_sums},
            {"max_update", r.max_update}};
}

json policy_weights(const policy::GrammarPolicy& p)
{
    static const char* buckets[policy::kAtomBuckets] = {"1", "2", "3+"};
    json out = json::object();
    for (int parent = 0; parent < policy::kParentSlots; ++parent) {
        std::optional<Op> parent_op;
        if (static_cast<Op>(parent) != Op::Hole)
            parent_op = static_cast<Op>(parent);
        std::string pname = parent_op ? std::string(op_name(*parent_op)) : "root";
        for (int b = 0; b < policy::kAtomBuckets; ++b) {
            int feat = policy::GrammarPolicy::feature(parent_op, static_cast<std::size_t>(b + 1));
            json row = json::object();
            for (int prod = 0; prod < policy::kProductionCount; ++prod)
                row[std::string(op_name(static_cast<Op>(prod)))] = p.weight(feat, static_cast<Op>(prod));
            out[pname][buckets[b]] = std::move(row);
        }
    }
    return out;
}

DomainContext context_from_json(const json& j)
{
    if (!j.is_object())
        throw InvalidInput("context must be a JSON object");
    DomainContext ctx;
    const json* defs = &j;
    if (j.contains("definitions")) {
        defs = &j.at("definitions");
        if (j.contains("domain"))
            ctx.domain_label = string_field(j, "domain");
        if (!defs->is_object())
            throw InvalidInput("context definitions must be a JSON object");
    }
    for (auto it = defs->begin(); it != defs->end(); ++it) {
        if (!it.value().is_string())
            throw InvalidInput("description of '" + it.key() + "' must be a string");
        ctx.definitions[it.key()] = it.value().get<std::string>();
    }
    return ctx;
}

pipeline::DatasetRecord record_from_json(const json& j)
{
    if (!j.is_object())
        throw InvalidInput("record must be a JSON object");
    pipeline::DatasetRecord r;
    r.id = string_field(j, "id");
    r.requirement = string_field(j, "requirement");
    r.context = context_from_json(field(j, "context"));
    r.context.domain_label = string_field(j, "domain");
    r.itl = string_field(j, "itl");
    r.ltl = string_field(j, "ltl");
    const json& d = field(j, "depth");
    if (!d.is_number_integer() || d.get<long long>() < 1)
        throw InvalidInput("field 'depth' must be a positive integer");
    r.depth = d.get<int>();
    return r;
}

} // namespace ltlkit::json_io
