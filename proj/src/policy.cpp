#include "ltlkit/policy.hpp"

#include "ltlkit/error.hpp"
#include "rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <cmath>
#include <csignal>
#include <cstring>

#include <poll.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

namespace ltlkit {

void DomainContext::validate() const
{
    if (definitions.empty())
        throw InvalidInput("domain context has no definitions");
    for (const auto& [atom, text] : definitions) {
        if (!is_valid_atom_name(atom))
            throw InvalidInput("invalid atom name in context: '" + atom + "'");
        if (text.empty())
            throw InvalidInput("empty description for atom '" + atom + "'");
    }
}

} // namespace ltlkit

namespace ltlkit::policy {

void RewardConfig::validate() const
{
    for (double v : {alpha, beta, gamma})
        if (!std::isfinite(v) || v < 0)
            throw InvalidInput("reward weights must be finite and nonnegative");
    if (budget_m < 1)
        throw InvalidInput("repair budget must be at least 1");
}

RewardResult compute_reward(std::string_view candidate, const RewardConfig& cfg)
{
    cfg.validate();
    RewardResult r;
    r.verdict = classify(candidate);
    if (!cfg.use_repair) {
        r.parsed = r.verdict.kind != VerdictKind::ParseFailure;
        r.verified = r.verdict.verified();
    } else {
        auto outcome = repair::repair(candidate, r.verdict, cfg.budget_m);
        if (outcome.status == repair::RepairStatus::Failed) {
            r.parsed = r.verdict.kind != VerdictKind::ParseFailure;
            r.verified = false;
        } else {
            r.parsed = true;
            r.verified = outcome.status == repair::RepairStatus::RepairedVerified;
        }
        r.repair_cost = outcome.repair_cost;
        r.outcome = std::move(outcome);
    }
    r.reward = cfg.alpha * (r.parsed ? 1.0 : 0.0) + cfg.beta * (r.verified ? 1.0 : 0.0)
        - cfg.gamma * static_cast<double>(r.repair_cost);
    return r;
}

double generator_failure_reward(const RewardConfig& cfg)
{
    return -cfg.gamma * static_cast<double>(cfg.budget_m);
}

void TrainingTask::validate() const
{
    if (target_atoms.empty())
        throw InvalidInput("training task has no target atoms");
    for (const auto& a : target_atoms) {
        if (!is_valid_atom_name(a))
            throw InvalidInput("invalid target atom '" + a + "'");
        if (!context.definitions.empty() && !context.has(a))
            throw InvalidInput("target atom '" + a + "' is not described in the context");
    }
}

// --- grammar policy -------------------------------------------------------

GrammarPolicy::GrammarPolicy(double temperature, int max_depth)
    : temperature_(temperature), max_depth_(max_depth),
      w_(static_cast<std::size_t>(kFeatureCount * kProductionCount), 0.0)
{
    if (!(temperature > 0) || !std::isfinite(temperature))
        throw InvalidInput("temperature must be positive");
    if (max_depth < 1)
        throw InvalidInput("max_depth must be at least 1");
}

namespace {

std::size_t slot(int feature, Op production)
{
    if (feature < 0 || feature >= kFeatureCount || production == Op::Hole)
        throw InvalidInput("policy weight index out of range");
    return static_cast<std::size_t>(feature * kProductionCount + static_cast<int>(production));
}

} // namespace

double GrammarPolicy::weight(int feature, Op production) const
{
    return w_[slot(feature, production)];
}

void GrammarPolicy::set_weight(int feature, Op production, double w)
{
    w_[slot(feature, production)] = w;
}

int GrammarPolicy::feature(std::optional<Op> parent, std::size_t atom_count) noexcept
{
    int p = parent ? static_cast<int>(*parent) : static_cast<int>(Op::Hole);
    int bucket = static_cast<int>(std::clamp<std::size_t>(atom_count, 1, kAtomBuckets)) - 1;
    return p * kAtomBuckets + bucket;
}

std::vector<Op> GrammarPolicy::allowed(int remaining)
{
    if (remaining <= 1)
        return {Op::True, Op::False, Op::Atom};
    std::vector<Op> all;
    for (int i = 0; i < kProductionCount; ++i)
        all.push_back(static_cast<Op>(i));
    return all;
}

std::vector<double> GrammarPolicy::distribution(int feature, int remaining) const
{
    auto ops = allowed(remaining);
    std::vector<double> p(ops.size());
    double hi = -INFINITY;
    for (std::size_t i = 0; i < ops.size(); ++i) {
        p[i] = weight(feature, ops[i]) / temperature_;
        hi = std::max(hi, p[i]);
    }
    double total = 0;
    for (auto& x : p) {
        x = std::exp(x - hi);
        total += x;
    }
    for (auto& x : p)
        x /= total;
    return p;
}

namespace {

Formula derive(const GrammarPolicy& policy, const TrainingTask& task, std::optional<Op> parent, int remaining,
               detail::Rng& rng, std::vector<Derivation::Step>& steps)
{
    const int feat = GrammarPolicy::feature(parent, task.target_atoms.size());
    auto ops = GrammarPolicy::allowed(remaining);
    auto probs = policy.distribution(feat, remaining);
    Op op = ops[detail::weighted_index(rng, probs)];
    steps.push_back({feat, op, remaining});
    switch (op) {
    case Op::True: return ltl::tt();
    case Op::False: return ltl::ff();
    case Op::Atom: return ltl::atom(task.target_atoms[detail::uniform_index(rng, task.target_atoms.size())]);
    default: break;
    }
    Formula lhs = derive(policy, task, op, remaining - 1, rng, steps);
    if (is_unary(op))
        return ltl::unary(op, lhs);
    Formula rhs = derive(policy, task, op, remaining - 1, rng, steps);
    return ltl::binary(op, lhs, rhs);
}

} // namespace

Derivation sample_derivation(const GrammarPolicy& policy, const TrainingTask& task, std::uint64_t seed)
{
    if (task.target_atoms.empty())
        throw InvalidInput("training task has no target atoms");
    detail::Rng rng(detail::splitmix64(seed));
    Derivation d;
    d.formula = derive(policy, task, std::nullopt, policy.max_depth(), rng, d.steps);
    d.text = itl::serialize(d.formula);
    return d;
}

std::string sample_candidate(const GrammarPolicy& policy, const TrainingTask& task, std::uint64_t seed)
{
    return sample_derivation(policy, task, seed).text;
}

std::vector<double> log_prob_gradient(const GrammarPolicy& policy, const Derivation& d)
{
    std::vector<double> g(policy.weights().size(), 0.0);
    const double inv_t = 1.0 / policy.temperature();
    for (const auto& s : d.steps) {
        auto ops = GrammarPolicy::allowed(s.remaining);
        auto probs = policy.distribution(s.feature, s.remaining);
        g[slot(s.feature, s.production)] += inv_t;
        for (std::size_t i = 0; i < ops.size(); ++i)
            g[slot(s.feature, ops[i])] -= probs[i] * inv_t;
    }
    return g;
}

// --- GRPO -----------------------------------------------------------------

void TrainConfig::validate() const
{
    if (group_size < 2)
        throw InvalidInput("group_size must be at least 2");
    if (!(learning_rate >= 0) || !std::isfinite(learning_rate))
        throw InvalidInput("learning_rate must be finite and nonnegative");
    if (steps < 0)
        throw InvalidInput("steps must be nonnegative");
    if (!(epsilon > 0))
        throw InvalidInput("epsilon must be positive");
}

const RewardResult& RewardCache::get(const std::string& candidate)
{
    auto it = memo_.find(candidate);
    if (it == memo_.end())
        it = memo_.emplace(candidate, compute_reward(candidate, cfg_)).first;
    return it->second;
}

std::pair<GrammarPolicy, StepReport> grpo_step(const GrammarPolicy& policy, const std::vector<TrainingTask>& tasks,
                                               const TrainConfig& cfg, RewardCache& rewards, int step)
{
    cfg.validate();
    if (tasks.empty())
        throw InvalidInput("grpo_step needs at least one task");

    StepReport report;
    report.step = step;
    std::vector<double> update(policy.weights().size(), 0.0);
    const auto G = static_cast<std::size_t>(cfg.group_size);
    std::size_t verified = 0;
    double reward_total = 0;

    const std::uint64_t step_seed = detail::mix_seed(cfg.seed, static_cast<std::uint64_t>(step));
    for (std::size_t t = 0; t < tasks.size(); ++t) {
        std::vector<Derivation> group;
        std::vector<double> r(G);
        for (std::size_t i = 0; i < G; ++i) {
            group.push_back(sample_derivation(policy, tasks[t], detail::mix_seed(step_seed, t * G + i)));
            const auto& res = rewards.get(group.back().text);
            r[i] = res.reward;
            reward_total += res.reward;
            verified += res.verdict.verified() ? 1 : 0;
        }

        double mean = 0;
        for (double x : r)
            mean += x;
        mean /= static_cast<double>(G);
        const bool flat = std::all_of(r.begin(), r.end(), [&](double x) { return x == r[0]; });

        std::vector<double> adv(G, 0.0);
        double sum = 0;
        if (!flat) {
            for (std::size_t i = 0; i < G; ++i)
                adv[i] = r[i] - mean;
            for (double a : adv)
                sum += a;
            if (cfg.advantage_norm == AdvantageNorm::StdNormalized) {
                double var = 0;
                for (double a : adv)
                    var += a * a;
                double sd = std::sqrt(var / static_cast<double>(G));
                for (auto& a : adv)
                    a /= sd + cfg.epsilon;
            }
        }
        report.advantage_sums.push_back(sum);

        for (std::size_t i = 0; i < G; ++i) {
            if (adv[i] == 0.0)
                continue;
            auto g = log_prob_gradient(policy, group[i]);
            for (std::size_t k = 0; k < g.size(); ++k)
                update[k] += adv[i] * g[k];
        }
    }

    GrammarPolicy next = policy;
    const double scale = cfg.learning_rate / static_cast<double>(tasks.size());
    for (std::size_t k = 0; k < update.size(); ++k) {
        double delta = scale * update[k];
        next.weights()[k] += delta;
        report.max_update = std::max(report.max_update, std::abs(delta));
    }
    const double n = static_cast<double>(tasks.size() * G);
    report.mean_reward = reward_total / n;
    report.pass_rate = static_cast<double>(verified) / n;
    return {std::move(next), std::move(report)};
}

std::pair<GrammarPolicy, StepReport> grpo_step(const GrammarPolicy& policy, const std::vector<TrainingTask>& tasks,
                                               const TrainConfig& cfg, const RewardConfig& rcfg, int step)
{
    RewardCache cache(rcfg);
    return grpo_step(policy, tasks, cfg, cache, step);
}

double measure_pass_rate(const GrammarPolicy& policy, const std::vector<TrainingTask>& tasks, int samples_per_task,
                         std::uint64_t seed, RewardCache* cache)
{
    if (tasks.empty() || samples_per_task < 1)
        throw InvalidInput("pass rate needs tasks and samples");
    std::size_t verified = 0;
    std::unordered_map<std::string, bool> local;
    for (std::size_t t = 0; t < tasks.size(); ++t) {
        for (int i = 0; i < samples_per_task; ++i) {
            auto text = sample_candidate(policy, tasks[t],
                                         detail::mix_seed(seed, t * 1000003ULL + static_cast<std::uint64_t>(i)));
            bool ok;
            if (cache) {
                ok = cache->get(text).verdict.verified();
            } else {
                auto it = local.find(text);
                if (it == local.end())
                    it = local.emplace(text, classify(text).verified()).first;
                ok = it->second;
            }
            verified += ok ? 1 : 0;
        }
    }
    return static_cast<double>(verified) / static_cast<double>(tasks.size() * static_cast<std::size_t>(samples_per_task));
}

TrainResult train(const GrammarPolicy& init, const std::vector<TrainingTask>& tasks, const TrainConfig& cfg,
                  const RewardConfig& rcfg, int eval_samples, const std::function<void(const StepReport&)>& on_step)
{
    cfg.validate();
    rcfg.validate();
    for (const auto& t : tasks)
        t.validate();
    RewardCache cache(rcfg);
    const std::uint64_t eval_seed = detail::mix_seed(cfg.seed, 0x5eedULL);
    TrainResult out{init, {}, 0.0, 0.0};
    out.initial_pass_rate = measure_pass_rate(init, tasks, eval_samples, eval_seed, &cache);
    for (int s = 0; s < cfg.steps; ++s) {
        auto [next, report] = grpo_step(out.policy, tasks, cfg, cache, s);
        out.policy = std::move(next);
        if (on_step)
            on_step(report);
        out.reports.push_back(std::move(report));
    }
    out.final_pass_rate = measure_pass_rate(out.policy, tasks, eval_samples, eval_seed, &cache);
    return out;
}

// --- external generator ---------------------------------------------------

struct GeneratorProcess::Impl {
    GeneratorEndpoint endpoint;
    pid_t pid = -1;
    int fd = -1;
    std::string buffer;

    ~Impl()
    {
        if (fd >= 0)
            ::close(fd);
        if (pid > 0) {
            int status = 0;
            for (int i = 0; i < 20; ++i) {
                if (::waitpid(pid, &status, WNOHANG) == pid)
                    return;
                ::usleep(5000);
            }
            // the whole group, so grandchildren do not keep our streams open
            ::kill(-pid, SIGKILL);
            ::waitpid(pid, &status, 0);
        }
    }

    void write_all(const std::string& data)
    {
        std::size_t off = 0;
        while (off < data.size()) {
            ssize_t n = ::send(fd, data.data() + off, data.size() - off, MSG_NOSIGNAL);
            if (n < 0) {
                if (errno == EINTR)
                    continue;
                throw GeneratorError(std::string("generator write failed: ") + std::strerror(errno));
            }
            off += static_cast<std::size_t>(n);
        }
    }

    std::string read_line()
    {
        using clock = std::chrono::steady_clock;
        const auto deadline = clock::now() + std::chrono::milliseconds(endpoint.timeout_ms);
        for (;;) {
            if (auto nl = buffer.find('\n'); nl != std::string::npos) {
                std::string line = buffer.substr(0, nl);
                buffer.erase(0, nl + 1);
                return line;
            }
            auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - clock::now()).count();
            if (left <= 0)
                throw GeneratorError("generator timed out");
            pollfd p{fd, POLLIN, 0};
            int rc = ::poll(&p, 1, static_cast<int>(left));
            if (rc < 0) {
                if (errno == EINTR)
                    continue;
                throw GeneratorError(std::string("generator poll failed: ") + std::strerror(errno));
            }
            if (rc == 0)
                throw GeneratorError("generator timed out");
            char chunk[4096];
            ssize_t n = ::recv(fd, chunk, sizeof chunk, 0);
            if (n < 0) {
                if (errno == EINTR)
                    continue;
                throw GeneratorError(std::string("generator read failed: ") + std::strerror(errno));
            }
            if (n == 0)
                throw GeneratorError("generator closed its output");
            buffer.append(chunk, static_cast<std::size_t>(n));
        }
    }
};

GeneratorProcess::GeneratorProcess(GeneratorEndpoint endpoint) : impl_(std::make_unique<Impl>())
{
    if (endpoint.argv.empty())
        throw InvalidInput("generator command is empty");
    if (endpoint.timeout_ms < 1)
        throw InvalidInput("generator timeout must be positive");
    impl_->endpoint = std::move(endpoint);

    int sv[2];
    if (::socketpair(AF_UNIX, SOCK_STREAM | SOCK_CLOEXEC, 0, sv) != 0)
        throw GeneratorError(std::string("socketpair failed: ") + std::strerror(errno));

    std::vector<char*> args;
    for (auto& a : impl_->endpoint.argv)
        args.push_back(a.data());
    args.push_back(nullptr);

    pid_t pid = ::fork();
    if (pid < 0) {
        ::close(sv[0]);
        ::close(sv[1]);
        throw GeneratorError(std::string("fork failed: ") + std::strerror(errno));
    }
    if (pid == 0) {
        ::setpgid(0, 0);
        ::dup2(sv[1], STDIN_FILENO);
        ::dup2(sv[1], STDOUT_FILENO);
        ::execvp(args[0], args.data());
        ::_exit(127);
    }
    ::close(sv[1]);
    ::setpgid(pid, pid);
    impl_->pid = pid;
    impl_->fd = sv[0];
}

GeneratorProcess::~GeneratorProcess() = default;

std::string GeneratorProcess::generate(const TrainingTask& task)
{
    nlohmann::json req;
    req["prompt"] = task.prompt;
    req["domain"] = task.domain;
    req["context"] = nlohmann::json::object();
    for (const auto& [atom, text] : task.context.definitions)
        req["context"][atom] = text;
    req["atoms"] = task.target_atoms;
    impl_->write_all(req.dump() + "\n");

    std::string line = impl_->read_line();
    nlohmann::json resp;
    try {
        resp = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
        throw GeneratorError(std::string("generator sent invalid JSON: ") + e.what());
    }
    if (!resp.is_object() || !resp.contains("candidate") || !resp["candidate"].is_string())
        throw GeneratorError("generator response has no string 'candidate' field");
    return resp["candidate"].get<std::string>();
}

std::string external_generate(const TrainingTask& task, const GeneratorEndpoint& endpoint)
{
    GeneratorProcess proc(endpoint);
    return proc.generate(task);
}

} // namespace ltlkit::policy
