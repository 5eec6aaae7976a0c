#pragma once

// JSON encodings shared by the CLI, the dataset format, and the Python module.

#include "ltlkit/automata.hpp"
#include "ltlkit/context.hpp"
#include "ltlkit/pipeline.hpp"
#include "ltlkit/policy.hpp"
#include "ltlkit/repair.hpp"
#include "ltlkit/verify.hpp"

#include <json.hpp>

namespace ltlkit::json_io {

using json = nlohmann::json;

json to_json(const LassoWitness& w);
json to_json(const itl::ParseError& e);
json to_json(const Verdict& v);
json to_json(const repair::Edit& e);
json to_json(const repair::RepairOutcome& o);
json to_json(const DomainContext& c);
json to_json(const pipeline::DatasetRecord& r);
json to_json(const pipeline::FilterResult& r);
json to_json(const pipeline::MetricBlock& m);
json to_json(const pipeline::EvalReport& r);
json to_json(const policy::RewardResult& r);
json to_json(const policy::StepReport& r);

/// Weights as {parent: {atom_bucket: {production: w}}}.
json policy_weights(const policy::GrammarPolicy& p);

/// Object of atom -> description. The label is taken from `domain_label`
/// when the object has "domain" and "definitions" keys instead.
DomainContext context_from_json(const json& j);

/// Throws InvalidInput naming the offending field.
pipeline::DatasetRecord record_from_json(const json& j);

} // namespace ltlkit::json_io
