#include "doctest.h"

#include "ltlkit/error.hpp"
#include "ltlkit/itl.hpp"
#include "ltlkit/policy.hpp"

#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

using namespace ltlkit;
using namespace ltlkit::policy;

namespace {

DomainContext automotive()
{
    return DomainContext{"automotive",
                         {{"p", "lane departure detected"},
                          {"q", "obstacle detection active"},
                          {"r", "the brake is engaged"},
                          {"s", "the sensor is calibrated"}}};
}

TrainingTask task(std::vector<std::string> atoms)
{
    return TrainingTask{"keep the lane", "automotive", automotive(), std::move(atoms)};
}

std::vector<TrainingTask> fixture_tasks()
{
    return {task({"p"}), task({"p", "q"}), task({"p", "q", "r"}), task({"q", "s"})};
}

// log p(derivation) recomputed from the per-step distributions.
double log_prob(const GrammarPolicy& policy, const Derivation& d)
{
    double lp = 0;
    for (const auto& st : d.steps) {
        auto allowed = GrammarPolicy::allowed(st.remaining);
        auto dist = policy.distribution(st.feature, st.remaining);
        auto it = std::find(allowed.begin(), allowed.end(), st.production);
        REQUIRE(it != allowed.end());
        lp += std::log(dist[static_cast<std::size_t>(it - allowed.begin())]);
    }
    return lp;
}

std::filesystem::path write_script(const std::string& name, const std::string& body)
{
    auto path = std::filesystem::temp_directory_path() / name;
    std::ofstream(path) << "#!/bin/sh\n" << body;
    std::filesystem::permissions(path, std::filesystem::perms::owner_all);
    return path;
}

} // namespace

TEST_CASE("reward on the worked examples")
{
    CHECK(compute_reward("eventually, p").reward == 2.0);
    CHECK(compute_reward("eventual, p").reward == doctest::Approx(1.9).epsilon(1e-12));
    auto garbage = compute_reward(")))) ((((");
    CHECK_FALSE(garbage.parsed);
    CHECK(garbage.repair_cost == 5);
    CHECK(garbage.reward == doctest::Approx(-0.5).epsilon(1e-12));
    // parses, but no edit makes it non-trivial: 1 + 0 - 0.1 * 5
    auto valid = compute_reward("true");
    CHECK(valid.parsed);
    CHECK_FALSE(valid.verified);
    CHECK(valid.reward == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("reward configuration")
{
    RewardConfig cfg;
    cfg.alpha = 2.0;
    cfg.beta = 3.0;
    cfg.gamma = 0.5;
    CHECK(compute_reward("eventual, p", cfg).reward == doctest::Approx(4.5));
    CHECK(generator_failure_reward(cfg) == doctest::Approx(-2.5));

    RewardConfig raw;
    raw.use_repair = false;
    auto r = compute_reward("eventual, p", raw);
    CHECK_FALSE(r.parsed);
    CHECK(r.reward <= 0.0);

    RewardConfig bad;
    bad.gamma = -1;
    CHECK_THROWS_AS(bad.validate(), InvalidInput);
    bad = RewardConfig{};
    bad.alpha = std::nan("");
    CHECK_THROWS_AS(bad.validate(), InvalidInput);
}

TEST_CASE("reward stays within its bounds and penalizes repair")
{
    RewardConfig cfg;
    const double lo = -cfg.gamma * cfg.budget_m;
    const double hi = cfg.alpha + cfg.beta;
    GrammarPolicy policy(1.0, 4);
    auto t = task({"p", "q"});
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        auto text = sample_candidate(policy, t, seed);
        auto r = compute_reward(text, cfg);
        CHECK(r.reward >= lo);
        CHECK(r.reward <= hi);
    }
    // same outcome, more edits
    auto one = compute_reward("eventual, p", cfg);
    auto two = compute_reward("eventual, alway, p", cfg);
    REQUIRE(one.verified == two.verified);
    REQUIRE(two.repair_cost > one.repair_cost);
    CHECK(two.reward < one.reward);
}

TEST_CASE("depth-one samples are leaves")
{
    GrammarPolicy policy(1.0, 1);
    auto t = task({"p"});
    std::set<std::string> seen;
    for (std::uint64_t seed = 0; seed < 100; ++seed)
        seen.insert(sample_candidate(policy, t, seed));
    for (const auto& s : seen)
        CHECK((s == "true" || s == "false" || s == "p"));
    CHECK(seen.size() == 3);
}

TEST_CASE("sampling is deterministic and grammatical")
{
    GrammarPolicy policy(1.0, 4);
    auto t = task({"p", "q", "r"});
    CHECK(sample_candidate(policy, t, 42) == sample_candidate(policy, t, 42));
    std::set<std::string> distinct;
    for (std::uint64_t seed = 0; seed < 1000; ++seed) {
        auto d = sample_derivation(policy, t, seed);
        auto parsed = itl::parse(d.text);
        REQUIRE(parsed.ok());
        CHECK(parsed.value() == d.formula);
        CHECK(depth(d.formula) <= 4);
        for (const auto& a : atoms_of(d.formula))
            CHECK((a == "p" || a == "q" || a == "r"));
        distinct.insert(d.text);
    }
    CHECK(distinct.size() > 100);
    CHECK_THROWS_AS(sample_candidate(policy, task({}), 0), InvalidInput);
}

TEST_CASE("distributions sum to one")
{
    GrammarPolicy policy(0.7, 4);
    policy.set_weight(GrammarPolicy::feature(std::nullopt, 2), Op::Until, 1.5);
    for (int remaining = 1; remaining <= 4; ++remaining) {
        for (int f = 0; f < kFeatureCount; ++f) {
            auto dist = policy.distribution(f, remaining);
            REQUIRE(dist.size() == GrammarPolicy::allowed(remaining).size());
            double sum = 0;
            for (double x : dist) {
                CHECK(x > 0.0);
                sum += x;
            }
            CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
        }
    }
}

TEST_CASE("log-probability gradient matches finite differences")
{
    GrammarPolicy policy(0.8, 4);
    for (std::size_t k = 0; k < policy.weights().size(); ++k)
        policy.weights()[k] = 0.01 * static_cast<double>(k % 13) - 0.05;
    auto t = task({"p", "q"});
    const double h = 1e-6;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        auto d = sample_derivation(policy, t, seed);
        auto g = log_prob_gradient(policy, d);
        REQUIRE(g.size() == policy.weights().size());
        for (std::size_t k = 0; k < g.size(); k += 7) {
            GrammarPolicy up = policy, down = policy;
            up.weights()[k] += h;
            down.weights()[k] -= h;
            double fd = (log_prob(up, d) - log_prob(down, d)) / (2 * h);
            CHECK(g[k] == doctest::Approx(fd).epsilon(1e-5));
        }
    }
}

TEST_CASE("grpo step invariants")
{
    auto tasks = fixture_tasks();
    GrammarPolicy init(1.0, 4);
    TrainConfig cfg;

    SUBCASE("advantages are centred per group")
    {
        cfg.advantage_norm = AdvantageNorm::Unnormalized;
        RewardCache cache{RewardConfig{}};
        GrammarPolicy policy = init;
        for (int step = 0; step < 10; ++step) {
            auto [next, report] = grpo_step(policy, tasks, cfg, cache, step);
            REQUIRE(report.advantage_sums.size() == tasks.size());
            for (double s : report.advantage_sums)
                CHECK(std::abs(s) < 1e-9);
            policy = next;
        }
    }
    SUBCASE("zero learning rate keeps the weights")
    {
        cfg.learning_rate = 0.0;
        auto [next, report] = grpo_step(init, tasks, cfg, RewardConfig{});
        CHECK(next.weights() == init.weights());
        CHECK(report.max_update == 0.0);
    }
    SUBCASE("a flat group gives no update")
    {
        // every depth-1 sample over one atom with this reward scores the same
        RewardConfig flat;
        flat.alpha = 1.0;
        flat.beta = 0.0;
        flat.gamma = 0.0;
        GrammarPolicy leaves(1.0, 1);
        auto [next, report] = grpo_step(leaves, {task({"p"})}, cfg, flat);
        CHECK(next.weights() == leaves.weights());
        CHECK(report.advantage_sums == std::vector<double>{0.0});
    }
    SUBCASE("group size below two is rejected")
    {
        cfg.group_size = 1;
        CHECK_THROWS_AS(grpo_step(init, tasks, cfg, RewardConfig{}), InvalidInput);
    }
}

TEST_CASE("training raises the pass rate")
{
    TrainConfig cfg;
    cfg.seed = 1;
    std::vector<double> rewards;
    auto res = train(GrammarPolicy(1.0, 4), fixture_tasks(), cfg, RewardConfig{}, 256,
                     [&](const StepReport& r) { rewards.push_back(r.mean_reward); });
    REQUIRE(rewards.size() == 500);
    CHECK(res.final_pass_rate - res.initial_pass_rate >= 0.20);

    auto window_mean = [&](std::size_t end) {
        double s = 0;
        for (std::size_t i = end - 50; i < end; ++i)
            s += rewards[i];
        return s / 50;
    };
    CHECK(window_mean(500) > window_mean(50));
}

TEST_CASE("external generator protocol")
{
    auto t = task({"p"});
    SUBCASE("echo")
    {
        auto log = std::filesystem::temp_directory_path() / "ltlkit_gen_request.json";
        auto script = write_script("ltlkit_gen_echo.sh", "read line\nprintf '%s\\n' \"$line\" > " + log.string() +
                                                             "\nprintf '{\"candidate\": \"eventually, p\"}\\n'\n");
        CHECK(external_generate(t, {{script.string()}, 5000}) == "eventually, p");
        std::ifstream in(log);
        auto req = nlohmann::json::parse(in);
        CHECK(req.at("prompt") == "keep the lane");
        CHECK(req.at("domain") == "automotive");
        CHECK(req.at("context").at("p") == "lane departure detected");
        CHECK(req.at("atoms") == nlohmann::json::array({"p"}));
    }
    SUBCASE("several requests to one process")
    {
        auto script = write_script("ltlkit_gen_loop.sh",
                                   "while read line; do printf '{\"candidate\": \"always, p\"}\\n'; done\n");
        GeneratorProcess gen({{script.string()}, 5000});
        CHECK(gen.generate(t) == "always, p");
        CHECK(gen.generate(t) == "always, p");
    }
    SUBCASE("invalid JSON")
    {
        auto script = write_script("ltlkit_gen_bad.sh", "read line\necho 'candidate: p'\n");
        CHECK_THROWS_AS(external_generate(t, {{script.string()}, 5000}), GeneratorError);
    }
    SUBCASE("missing field")
    {
        auto script = write_script("ltlkit_gen_field.sh", "read line\necho '{\"text\": \"p\"}'\n");
        CHECK_THROWS_AS(external_generate(t, {{script.string()}, 5000}), GeneratorError);
    }
    SUBCASE("timeout")
    {
        auto script = write_script("ltlkit_gen_slow.sh", "read line\nsleep 5\n");
        CHECK_THROWS_AS(external_generate(t, {{script.string()}, 200}), GeneratorError);
    }
    SUBCASE("exits without answering")
    {
        auto script = write_script("ltlkit_gen_exit.sh", "exit 0\n");
        CHECK_THROWS_AS(external_generate(t, {{script.string()}, 5000}), GeneratorError);
    }
}
