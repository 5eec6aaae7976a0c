// Command-line front end. Every subcommand prints one JSON document to
// stdout (gen-corpus prints JSON lines); diagnostics go to stderr.

#include "ltlkit/error.hpp"
#include "ltlkit/itl.hpp"
#include "ltlkit/json_io.hpp"
#include "ltlkit/pipeline.hpp"
#include "ltlkit/policy.hpp"
#include "ltlkit/repair.hpp"
#include "ltlkit/verify.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

using namespace ltlkit;
using json_io::json;

namespace {

// Exit codes by error class.
enum Exit : int {
    kOk = 0,
    kInternal = 1,
    kUsage = 2,
    kInvalidInput = 3,
    kGrounding = 4,
    kIngest = 5,
    kGenerator = 6,
    kSearchLimit = 7,
};

constexpr const char* kBudgetEnv = "LTLKIT_REPAIR_BUDGET";

int default_budget()
{
    const char* env = std::getenv(kBudgetEnv);
    if (!env || !*env)
        return repair::kDefaultBudget;
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (*end != '\0' || v < 1 || v > 1000)
        throw InvalidInput(std::string(kBudgetEnv) + " must be an integer in [1, 1000], got '" + env + "'");
    return static_cast<int>(v);
}

std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw InvalidInput("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::ifstream open_input(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw InvalidInput("cannot open " + path);
    return in;
}

// Positional text, or the contents of --file with one trailing newline dropped.
std::string source_text(const CLI::App* cmd, const std::string& text, const std::string& file)
{
    if (cmd->count("text") == 0 && file.empty())
        throw InvalidInput("give the source text or --file");
    if (!file.empty()) {
        std::string s = read_file(file);
        if (!s.empty() && s.back() == '\n')
            s.pop_back();
        return s;
    }
    return text;
}

void print(const json& j)
{
    std::cout << j.dump() << '\n';
}

DomainContext load_context(const std::string& path)
{
    return json_io::context_from_json(json::parse(read_file(path)));
}

std::vector<int> parse_counts(const std::string& text)
{
    std::vector<int> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            int v = std::stoi(item, &used);
            if (used != item.size())
                throw std::invalid_argument(item);
            out.push_back(v);
        } catch (const std::exception&) {
            throw InvalidInput("--counts expects four comma-separated integers, got '" + text + "'");
        }
    }
    if (out.size() != 4)
        throw InvalidInput("--counts expects four comma-separated integers, got '" + text + "'");
    return out;
}

std::vector<policy::TrainingTask> default_tasks()
{
    auto ctx = pipeline::default_context();
    std::vector<policy::TrainingTask> tasks;
    for (std::vector<std::string> atoms :
         {std::vector<std::string>{"p"}, {"p", "q"}, {"p", "q", "r"}, {"q", "s"}})
        tasks.push_back({"", ctx.domain_label, ctx, atoms});
    return tasks;
}

std::vector<policy::TrainingTask> tasks_from_records(const std::vector<pipeline::DatasetRecord>& records)
{
    std::vector<policy::TrainingTask> tasks;
    for (const auto& r : records) {
        auto f = itl::parse(r.itl).value();
        auto atoms = atoms_of(f);
        tasks.push_back({r.requirement, r.context.domain_label, r.context, {atoms.begin(), atoms.end()}});
    }
    return tasks;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Intermediate temporal language toolkit: verify, repair, explain, evaluate and train.\n"
                 "Set " + std::string(kBudgetEnv) + " to change the default repair budget (5)."};
    app.require_subcommand(1);

    std::string text, file;
    int budget = 0;

    auto* verify = app.add_subcommand("verify", "Parse and classify an ITL string");
    verify->add_option("text", text, "ITL source");
    verify->add_option("--file", file, "Read the ITL source from a file");
    verify->add_flag("--ltl", "Also print the formula in infix syntax");

    auto* rep = app.add_subcommand("repair", "Repair an ITL string");
    rep->add_option("text", text, "ITL source");
    rep->add_option("--file", file, "Read the ITL source from a file");
    rep->add_option("--budget", budget, "Edit budget")->check(CLI::Range(1, 1000));

    std::string context_path;
    auto* explain = app.add_subcommand("explain", "Render an ITL formula as grounded English");
    explain->add_option("text", text, "ITL source");
    explain->add_option("--file", file, "Read the ITL source from a file");
    explain->add_option("--context", context_path, "JSON file mapping atom -> description")->required();

    std::uint64_t seed = 0;
    std::string counts_text = "31,42,19,8";
    auto* gen = app.add_subcommand("gen-corpus", "Generate a synthetic dataset as JSON lines");
    gen->add_option("--seed", seed, "Random seed");
    gen->add_option("--counts", counts_text, "Records per stratum: simple,medium,high,very_high");
    gen->add_option("--context", context_path, "Domain context JSON file (default: automotive)");

    std::string refs_path, cands_path;
    auto* eval = app.add_subcommand("eval", "Score candidates against reference records");
    eval->add_option("--refs", refs_path, "Reference records (JSON lines)")->required();
    eval->add_option("--cands", cands_path, "Candidates: JSON lines of {id, candidate}")->required();
    eval->add_option("--budget", budget, "Repair budget")->check(CLI::Range(1, 1000));
    eval->add_flag("--pre-repair", "Measure syntactic correctness before repair");

    policy::TrainConfig tcfg;
    policy::RewardConfig rcfg;
    int max_depth = 4;
    int eval_samples = 256;
    std::string weights_out;
    auto* train = app.add_subcommand("train", "Train the grammar policy with group-relative updates");
    train->add_option("--steps", tcfg.steps, "Update steps")->check(CLI::PositiveNumber);
    train->add_option("--group", tcfg.group_size, "Samples per task")->check(CLI::Range(2, 4096));
    train->add_option("--lr", tcfg.learning_rate, "Learning rate");
    train->add_option("--seed", tcfg.seed, "Random seed");
    train->add_option("--alpha", rcfg.alpha, "Parse reward weight");
    train->add_option("--beta", rcfg.beta, "Verification reward weight");
    train->add_option("--gamma", rcfg.gamma, "Repair cost weight");
    train->add_option("--budget", budget, "Repair budget")->check(CLI::Range(1, 1000));
    train->add_option("--depth", max_depth, "Derivation depth cap")->check(CLI::Range(1, 16));
    train->add_option("--eval-samples", eval_samples, "Held-out samples per task for pass rates")
        ->check(CLI::PositiveNumber);
    train->add_option("--tasks", refs_path, "Derive tasks from dataset records (default: four built-in tasks)");
    train->add_option("--weights-out", weights_out, "Write the trained weights as JSON");
    train->add_flag("--unnormalized", "Do not divide advantages by the group standard deviation");

    std::string in_path;
    auto* filter = app.add_subcommand("filter", "Classify and repair a batch of candidates");
    filter->add_option("--in", in_path, "Candidates: JSON lines of {id, candidate}")->required();
    filter->add_option("--budget", budget, "Repair budget")->check(CLI::Range(1, 1000));

    std::vector<std::string> gen_cmd;
    std::string atoms_text;
    int timeout_ms = 5000;
    auto* generate = app.add_subcommand("generate", "Ask an external generator for a candidate and score it");
    generate->add_option("--cmd", gen_cmd, "Generator command line")->required()->expected(1, -1);
    generate->add_option("--prompt", text, "Requirement text")->required();
    generate->add_option("--context", context_path, "Domain context JSON file")->required();
    generate->add_option("--atoms", atoms_text, "Comma-separated target atoms")->required();
    generate->add_option("--timeout-ms", timeout_ms, "Response timeout")->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kOk : kUsage;
    }

    try {
        if (budget == 0)
            budget = default_budget();

        if (verify->parsed()) {
            std::string src = source_text(verify, text, file);
            Verdict v = classify(src);
            json out = {{"input", src}, {"verdict", json_io::to_json(v)}};
            if (v.kind != VerdictKind::ParseFailure) {
                auto f = itl::parse(src).value();
                out["itl"] = itl::serialize(f);
                out["depth"] = depth(f);
                out["stratum"] = stratum_name(stratum_for_depth(depth(f)));
                if (verify->count("--ltl"))
                    out["ltl"] = to_infix(f);
            }
            print(out);
        } else if (rep->parsed()) {
            std::string src = source_text(rep, text, file);
            json out = json_io::to_json(repair::repair(src, budget));
            out["input"] = src;
            out["budget"] = budget;
            print(out);
        } else if (explain->parsed()) {
            std::string src = source_text(explain, text, file);
            auto parsed = itl::parse(src);
            if (!parsed)
                throw InvalidInput("input does not parse: " + parsed.error().message());
            print({{"itl", itl::serialize(parsed.value())},
                   {"explanation", pipeline::explain(parsed.value(), load_context(context_path))}});
        } else if (gen->parsed()) {
            auto c = parse_counts(counts_text);
            pipeline::StratumCounts counts = {c[0], c[1], c[2], c[3]};
            auto ctx = context_path.empty() ? pipeline::default_context() : load_context(context_path);
            pipeline::write_jsonl(std::cout, pipeline::generate_corpus(seed, counts, ctx));
        } else if (eval->parsed()) {
            auto refs = pipeline::ingest(std::filesystem::path(refs_path)).records;
            auto cin = open_input(cands_path);
            pipeline::EvalOptions opts;
            opts.budget_m = budget;
            opts.post_repair = !eval->count("--pre-repair");
            print(json_io::to_json(pipeline::evaluate(refs, pipeline::read_candidates(cin), opts)));
        } else if (train->parsed()) {
            rcfg.budget_m = budget;
            if (train->count("--unnormalized"))
                tcfg.advantage_norm = policy::AdvantageNorm::Unnormalized;
            auto tasks = refs_path.empty() ? default_tasks()
                                           : tasks_from_records(pipeline::ingest(std::filesystem::path(refs_path)).records);
            json steps = json::array();
            auto res = policy::train(policy::GrammarPolicy(1.0, max_depth), tasks, tcfg, rcfg, eval_samples,
                                     [&](const policy::StepReport& r) {
                                         steps.push_back({{"step", r.step},
                                                          {"mean_reward", r.mean_reward},
                                                          {"pass_rate", r.pass_rate},
                                                          {"max_update", r.max_update}});
                                     });
            if (!weights_out.empty()) {
                std::ofstream w(weights_out);
                if (!w)
                    throw InvalidInput("cannot write " + weights_out);
                w << json_io::policy_weights(res.policy).dump(2) << '\n';
            }
            print({{"tasks", tasks.size()},
                   {"initial_pass_rate", res.initial_pass_rate},
                   {"final_pass_rate", res.final_pass_rate},
                   {"steps", std::move(steps)}});
        } else if (filter->parsed()) {
            auto in = open_input(in_path);
            auto results = pipeline::run_filter(pipeline::read_candidates(in), budget);
            json items = json::array();
            json counts = json::object();
            for (const auto& r : results) {
                items.push_back(json_io::to_json(r));
                counts[std::string(verdict_name(r.verdict.kind))] =
                    counts.value(std::string(verdict_name(r.verdict.kind)), 0) + 1;
            }
            print({{"results", std::move(items)}, {"counts", std::move(counts)}});
        } else if (generate->parsed()) {
            policy::TrainingTask task;
            task.prompt = text;
            task.context = load_context(context_path);
            task.domain = task.context.domain_label;
            std::stringstream ss(atoms_text);
            for (std::string a; std::getline(ss, a, ',');)
                task.target_atoms.push_back(a);
            task.validate();
            rcfg.budget_m = budget;
            json out;
            try {
                std::string cand = policy::external_generate(task, {gen_cmd, timeout_ms});
                out = {{"candidate", cand}, {"reward", json_io::to_json(policy::compute_reward(cand, rcfg))}};
            } catch (const GeneratorError& e) {
                out = {{"candidate", nullptr},
                       {"error", e.what()},
                       {"reward", {{"reward", policy::generator_failure_reward(rcfg)}}}};
                print(out);
                return kGenerator;
            }
            print(out);
        }
        return kOk;
    } catch (const GroundingError& e) {
        std::cerr << "ltlkit: " << e.what() << '\n';
        return kGrounding;
    } catch (const IngestError& e) {
        std::cerr << "ltlkit: " << e.what() << '\n';
        return kIngest;
    } catch (const GeneratorError& e) {
        std::cerr << "ltlkit: " << e.what() << '\n';
        return kGenerator;
    } catch (const SearchLimitExceeded& e) {
        std::cerr << "ltlkit: " << e.what() << '\n';
        return kSearchLimit;
    } catch (const InvalidInput& e) {
        std::cerr << "ltlkit: " << e.what() << '\n';
        return kInvalidInput;
    } catch (const json::exception& e) {
        std::cerr << "ltlkit: invalid JSON: " << e.what() << '\n';
        return kInvalidInput;
    } catch (const std::exception& e) {
        std::cerr << "ltlkit: " << e.what() << '\n';
        return kInternal;
    }
}
