#pragma once

// Verifier-in-the-loop training of a grammar policy.
//
// The policy is a log-linear model over ITL productions: at each derivation
// step it picks an operator (or leaf kind) with probability
// softmax(w[feature] / temperature) restricted to the productions allowed at
// the remaining depth. The feature is the parent operator combined with a
// bucket of the task's atom count. Atoms are drawn uniformly from the task.
//
// grpo_step samples a group of candidates per task, scores them with
// compute_reward, centres rewards within the group and moves the weights
// along advantage-weighted score-function gradients.

#include "ltlkit/context.hpp"
#include "ltlkit/repair.hpp"
#include "ltlkit/verify.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace ltlkit::policy {

struct RewardConfig {
    double alpha = 1.0;
    double beta = 1.0;
    double gamma = 0.1;
    int budget_m = repair::kDefaultBudget;
    /// Score the repaired candidate (default) or the raw candidate only.
    bool use_repair = true;

    void validate() const;
};

struct RewardResult {
    double reward = 0.0;
    bool parsed = false;   ///< parse indicator used in the reward
    bool verified = false; ///< sat and non-trivial indicator used in the reward
    int repair_cost = 0;
    Verdict verdict;       ///< classification of the raw candidate
    std::optional<repair::RepairOutcome> outcome;
};

/// alpha*[parses] + beta*[sat and non-trivial] - gamma*repair_cost, measured
/// after repair. When repair fails the indicators come from the raw
/// candidate and the cost is budget_m.
RewardResult compute_reward(std::string_view candidate, const RewardConfig& cfg = {});

/// Reward assigned when the external generator fails: -gamma * budget_m.
double generator_failure_reward(const RewardConfig& cfg);

struct TrainingTask {
    std::string prompt;
    std::string domain;
    DomainContext context;
    std::vector<std::string> target_atoms;

    /// target_atoms nonempty, valid, and described in context.
    void validate() const;
};

/// Productions: one per formula operator (leaves True, False, Atom included).
inline constexpr int kProductionCount = kFormulaOpCount;
/// Parent slots: every operator kind plus a root slot.
inline constexpr int kParentSlots = kOpCount;
inline constexpr int kAtomBuckets = 3;
inline constexpr int kFeatureCount = kParentSlots * kAtomBuckets;

class GrammarPolicy {
public:
    explicit GrammarPolicy(double temperature = 1.0, int max_depth = 4);

    double temperature() const noexcept { return temperature_; }
    int max_depth() const noexcept { return max_depth_; }

    double weight(int feature, Op production) const;
    void set_weight(int feature, Op production, double w);
    const std::vector<double>& weights() const noexcept { return w_; }
    std::vector<double>& weights() noexcept { return w_; }

    /// Feature index for a parent operator (nullopt = root) and atom count.
    static int feature(std::optional<Op> parent, std::size_t atom_count) noexcept;

    /// Productions allowed with `remaining` levels left (leaves only at 1).
    static std::vector<Op> allowed(int remaining);

    /// Probabilities over allowed(remaining), in that order.
    std::vector<double> distribution(int feature, int remaining) const;

private:
    double temperature_;
    int max_depth_;
    std::vector<double> w_;
};

/// One sampled derivation.
struct Derivation {
    Formula formula;
    std::string text;
    /// (feature, production, remaining depth) per step, in sampling order.
    struct Step {
        int feature;
        Op production;
        int remaining;
    };
    std::vector<Step> steps;
};

Derivation sample_derivation(const GrammarPolicy& policy, const TrainingTask& task, std::uint64_t seed);

/// serialize() of a sampled derivation.
std::string sample_candidate(const GrammarPolicy& policy, const TrainingTask& task, std::uint64_t seed);

/// d log p(derivation) / d w, as a dense vector shaped like policy.weights().
std::vector<double> log_prob_gradient(const GrammarPolicy& policy, const Derivation& d);

enum class AdvantageNorm { StdNormalized, Unnormalized };

struct TrainConfig {
    int group_size = 8;
    double learning_rate = 0.05;
    int steps = 500;
    std::uint64_t seed = 0;
    AdvantageNorm advantage_norm = AdvantageNorm::StdNormalized;
    double epsilon = 1e-8;

    void validate() const;
};

struct StepReport {
    int step = 0;
    double mean_reward = 0.0;
    /// Fraction of sampled candidates whose raw text classifies as Verified.
    double pass_rate = 0.0;
    /// Sum of unnormalized (mean-centred) advantages, one per task group.
    std::vector<double> advantage_sums;
    /// Largest absolute weight change in this step.
    double max_update = 0.0;
};

/// Memo of rewards by candidate text; compute_reward is pure, so caching is exact.
class RewardCache {
public:
    explicit RewardCache(RewardConfig cfg) : cfg_(cfg) {}
    const RewardResult& get(const std::string& candidate);
    const RewardConfig& config() const noexcept { return cfg_; }
    std::size_t size() const noexcept { return memo_.size(); }

private:
    RewardConfig cfg_;
    std::unordered_map<std::string, RewardResult> memo_;
};

/// One group-relative update. `step` selects the sampling seeds.
std::pair<GrammarPolicy, StepReport> grpo_step(const GrammarPolicy& policy, const std::vector<TrainingTask>& tasks,
                                               const TrainConfig& cfg, RewardCache& rewards, int step = 0);

std::pair<GrammarPolicy, StepReport> grpo_step(const GrammarPolicy& policy, const std::vector<TrainingTask>& tasks,
                                               const TrainConfig& cfg, const RewardConfig& rcfg, int step = 0);

/// Fraction of `samples_per_task` fresh samples per task that classify as Verified.
double measure_pass_rate(const GrammarPolicy& policy, const std::vector<TrainingTask>& tasks, int samples_per_task,
                         std::uint64_t seed, RewardCache* cache = nullptr);

struct TrainResult {
    GrammarPolicy policy;
    std::vector<StepReport> reports;
    double initial_pass_rate = 0.0;
    double final_pass_rate = 0.0;
};

/// Runs cfg.steps GRPO steps from `init`. Pass rates are measured on
/// `eval_samples` held-out samples per task before and after training.
TrainResult train(const GrammarPolicy& init, const std::vector<TrainingTask>& tasks, const TrainConfig& cfg,
                  const RewardConfig& rcfg, int eval_samples = 256,
                  const std::function<void(const StepReport&)>& on_step = {});

/// Command line of a generator process speaking the line-JSON protocol.
struct GeneratorEndpoint {
    std::vector<std::string> argv;
    int timeout_ms = 5000;
};

/// A running generator child process. Requests and responses are single
/// JSON lines on its stdin/stdout.
class GeneratorProcess {
public:
    explicit GeneratorProcess(GeneratorEndpoint endpoint);
    ~GeneratorProcess();
    GeneratorProcess(const GeneratorProcess&) = delete;
    GeneratorProcess& operator=(const GeneratorProcess&) = delete;

    /// Throws GeneratorError on timeout, exit, or a malformed response.
    std::string generate(const TrainingTask& task);

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// Spawns the generator, sends one request, and returns its candidate.
std::string external_generate(const TrainingTask& task, const GeneratorEndpoint& endpoint);

} // namespace ltlkit::policy
