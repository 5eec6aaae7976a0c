#include "ltlkit/automata.hpp"
#include "ltlkit/error.hpp"
#include "ltlkit/itl.hpp"
#include "ltlkit/json_io.hpp"
#include "ltlkit/pipeline.hpp"
#include "ltlkit/policy.hpp"
#include "ltlkit/repair.hpp"
#include "ltlkit/verify.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace ltlkit;
using json_io::json;

namespace {

py::object to_py(const json& j)
{
    switch (j.type()) {
    case json::value_t::null:
        return py::none();
    case json::value_t::boolean:
        return py::bool_(j.get<bool>());
    case json::value_t::number_integer:
        return py::int_(j.get<std::int64_t>());
    case json::value_t::number_unsigned:
        return py::int_(j.get<std::uint64_t>());
    case json::value_t::number_float:
        return py::float_(j.get<double>());
    case json::value_t::string:
        return py::str(j.get_ref<const std::string&>());
    case json::value_t::array: {
        py::list out;
        for (const auto& x : j)
            out.append(to_py(x));
        return out;
    }
    case json::value_t::object: {
        py::dict out;
        for (auto it = j.begin(); it != j.end(); ++it)
            out[py::str(it.key())] = to_py(it.value());
        return out;
    }
    default:
        throw InvalidInput("unsupported JSON value");
    }
}

json from_py(const py::handle& o)
{
    if (o.is_none())
        return nullptr;
    if (py::isinstance<py::bool_>(o))
        return o.cast<bool>();
    if (py::isinstance<py::int_>(o))
        return o.cast<std::int64_t>();
    if (py::isinstance<py::float_>(o))
        return o.cast<double>();
    if (py::isinstance<py::str>(o))
        return o.cast<std::string>();
    if (py::isinstance<py::dict>(o)) {
        json out = json::object();
        for (auto item : o.cast<py::dict>())
            out[item.first.cast<std::string>()] = from_py(item.second);
        return out;
    }
    if (py::isinstance<py::list>(o) || py::isinstance<py::tuple>(o)) {
        json out = json::array();
        for (auto item : o)
            out.push_back(from_py(item));
        return out;
    }
    throw InvalidInput("cannot convert " + std::string(py::str(o.get_type())) + " to JSON");
}

Formula parse_or_throw(const std::string& text)
{
    auto r = itl::parse(text);
    if (!r)
        throw InvalidInput(r.error().message());
    return r.value();
}

DomainContext context_of(const py::dict& d)
{
    return json_io::context_from_json(from_py(d));
}

std::vector<pipeline::DatasetRecord> records_of(const py::list& records)
{
    std::vector<pipeline::DatasetRecord> out;
    for (auto r : records)
        out.push_back(json_io::record_from_json(from_py(r)));
    return out;
}

py::list records_to_py(const std::vector<pipeline::DatasetRecord>& records)
{
    py::list out;
    for (const auto& r : records)
        out.append(to_py(json_io::to_json(r)));
    return out;
}

} // namespace

PYBIND11_MODULE(_core, m)
{
    m.doc() = "Core bindings: formulas, verification, repair, pipeline and policy training.";

    auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<InvalidInput>(m, "InvalidInput", PyExc_ValueError);
    py::register_exception<GroundingError>(m, "GroundingError", base.ptr());
    py::register_exception<IngestError>(m, "IngestError", base.ptr());
    py::register_exception<GeneratorError>(m, "GeneratorError", base.ptr());
    py::register_exception<SearchLimitExceeded>(m, "SearchLimitExceeded", base.ptr());

    py::class_<Formula>(m, "Formula")
        .def("__str__", [](const Formula& f) { return itl::serialize(f); })
        .def("__repr__", [](const Formula& f) { return "Formula(" + to_infix(f) + ")"; })
        .def("__eq__", [](const Formula& a, const Formula& b) { return a == b; })
        .def("__hash__", [](const Formula& f) { return f.hash(); })
        .def("itl", [](const Formula& f) { return itl::serialize(f); }, "Canonical ITL text")
        .def("infix", [](const Formula& f) { return to_infix(f); }, "Infix model-checker syntax")
        .def("nnf", [](const Formula& f) { return to_nnf(f); })
        .def_property_readonly("depth", [](const Formula& f) { return depth(f); })
        .def_property_readonly("op", [](const Formula& f) { return std::string(op_name(f.op())); })
        .def_property_readonly("atoms", [](const Formula& f) { return atoms_of(f); })
        .def_property_readonly("stratum",
                               [](const Formula& f) { return std::string(stratum_name(stratum_for_depth(depth(f)))); });

    m.def("parse", &parse_or_throw, py::arg("text"), "Parse ITL text; raises InvalidInput on a syntax error.");
    m.def("parse_infix", [](const std::string& s) { return parse_infix(s); }, py::arg("text"));
    m.def("random_formula",
          [](std::uint64_t seed, int depth, const std::vector<std::string>& atoms) {
              return random_formula(seed, depth, atoms);
          },
          py::arg("seed"), py::arg("depth"), py::arg("atoms") = std::vector<std::string>{"p", "q", "r", "s"});

    m.def("classify",
          [](const std::string& text) {
              Verdict v;
              {
                  py::gil_scoped_release release;
                  v = classify(text);
              }
              return to_py(json_io::to_json(v));
          },
          py::arg("text"), "Parse, then check satisfiability and non-validity.");
    m.def("is_satisfiable",
          [](const Formula& f) {
              SatResult r;
              {
                  py::gil_scoped_release release;
                  r = is_satisfiable(f);
              }
              py::dict out;
              out["satisfiable"] = r.satisfiable;
              out["witness"] = r.witness ? to_py(json_io::to_json(*r.witness)) : py::none();
              return out;
          },
          py::arg("formula"));
    m.def("check_equivalence",
          [](const Formula& a, const Formula& b) {
              EquivalenceResult r;
              {
                  py::gil_scoped_release release;
                  r = check_equivalence(a, b);
              }
              py::dict out;
              out["equivalent"] = r.equivalent;
              out["separating"] = r.separating ? to_py(json_io::to_json(*r.separating)) : py::none();
              return out;
          },
          py::arg("a"), py::arg("b"));
    m.def("are_equivalent", &are_equivalent, py::arg("a"), py::arg("b"),
          py::call_guard<py::gil_scoped_release>());
    m.def("automaton", [](const Formula& f) { return ltl_to_gba(to_nnf(f)).dump(); }, py::arg("formula"),
          "Text dump of the generalized Buchi automaton for the formula.");

    m.def("repair",
          [](const std::string& text, int budget) {
              repair::RepairOutcome o;
              {
                  py::gil_scoped_release release;
                  o = repair::repair(text, budget);
              }
              return to_py(json_io::to_json(o));
          },
          py::arg("text"), py::arg("budget") = repair::kDefaultBudget);

    m.def("explain",
          [](const Formula& f, const py::dict& ctx) { return pipeline::explain(f, context_of(ctx)); },
          py::arg("formula"), py::arg("context"));
    m.def("classify_mismatch",
          [](const Formula& g, const Formula& ref) {
              return std::string(pipeline::mismatch_name(pipeline::classify_mismatch(g, ref)));
          },
          py::arg("generated"), py::arg("reference"));
    m.def("default_context", [] { return to_py(json_io::to_json(pipeline::default_context())); });
    m.def("generate_corpus",
          [](std::uint64_t seed, const std::array<int, 4>& counts) {
              std::vector<pipeline::DatasetRecord> records;
              {
                  py::gil_scoped_release release;
                  records = pipeline::generate_corpus(seed, counts);
              }
              return records_to_py(records);
          },
          py::arg("seed"), py::arg("counts") = pipeline::kDefaultStratumMix);
    m.def("validate_record",
          [](const py::dict& record) {
              return pipeline::validate_record(json_io::record_from_json(from_py(record)));
          },
          py::arg("record"), "Check a record's invariants and return its formula.");
    m.def("run_filter",
          [](const std::vector<std::pair<std::string, std::string>>& cands, int budget) {
              std::vector<pipeline::FilterResult> results;
              {
                  py::gil_scoped_release release;
                  results = pipeline::run_filter(cands, budget);
              }
              py::list out;
              for (const auto& r : results)
                  out.append(to_py(json_io::to_json(r)));
              return out;
          },
          py::arg("candidates"), py::arg("budget") = repair::kDefaultBudget);
    m.def("evaluate",
          [](const py::list& refs, const std::vector<std::pair<std::string, std::string>>& cands, int budget,
             bool post_repair) {
              auto records = records_of(refs);
              pipeline::EvalReport rep;
              {
                  py::gil_scoped_release release;
                  rep = pipeline::evaluate(records, cands, {budget, post_repair});
              }
              return to_py(json_io::to_json(rep));
          },
          py::arg("refs"), py::arg("candidates"), py::arg("budget") = repair::kDefaultBudget,
          py::arg("post_repair") = true);

    m.def("compute_reward",
          [](const std::string& text, double alpha, double beta, double gamma, int budget, bool use_repair) {
              policy::RewardConfig cfg{alpha, beta, gamma, budget, use_repair};
              cfg.validate();
              policy::RewardResult r;
              {
                  py::gil_scoped_release release;
                  r = policy::compute_reward(text, cfg);
              }
              return to_py(json_io::to_json(r));
          },
          py::arg("text"), py::arg("alpha") = 1.0, py::arg("beta") = 1.0, py::arg("gamma") = 0.1,
          py::arg("budget") = repair::kDefaultBudget, py::arg("use_repair") = true);
    m.def("train",
          [](const py::list& tasks, int steps, int group, double lr, std::uint64_t seed, int max_depth,
             double alpha, double beta, double gamma, int eval_samples) {
              std::vector<policy::TrainingTask> ts;
              for (auto t : tasks) {
                  auto d = t.cast<py::dict>();
                  policy::TrainingTask task;
                  task.prompt = d.contains("prompt") ? d["prompt"].cast<std::string>() : "";
                  task.context = context_of(d["context"].cast<py::dict>());
                  task.domain = d.contains("domain") ? d["domain"].cast<std::string>() : task.context.domain_label;
                  task.target_atoms = d["atoms"].cast<std::vector<std::string>>();
                  ts.push_back(std::move(task));
              }
              policy::TrainConfig cfg;
              cfg.steps = steps;
              cfg.group_size = group;
              cfg.learning_rate = lr;
              cfg.seed = seed;
              policy::RewardConfig rcfg;
              rcfg.alpha = alpha;
              rcfg.beta = beta;
              rcfg.gamma = gamma;
              std::vector<double> mean_rewards;
              policy::TrainResult res{policy::GrammarPolicy(1.0, max_depth), {}, 0.0, 0.0};
              {
                  py::gil_scoped_release release;
                  res = policy::train(policy::GrammarPolicy(1.0, max_depth), ts, cfg, rcfg, eval_samples,
                                      [&](const policy::StepReport& r) { mean_rewards.push_back(r.mean_reward); });
              }
              py::dict out;
              out["initial_pass_rate"] = res.initial_pass_rate;
              out["final_pass_rate"] = res.final_pass_rate;
              out["mean_rewards"] = mean_rewards;
              out["weights"] = to_py(json_io::policy_weights(res.policy));
              return out;
          },
          py::arg("tasks"), py::arg("steps") = 500, py::arg("group") = 8, py::arg("lr") = 0.05,
          py::arg("seed") = 0, py::arg("max_depth") = 4, py::arg("alpha") = 1.0, py::arg("beta") = 1.0,
          py::arg("gamma") = 0.1, py::arg("eval_samples") = 256);
}
