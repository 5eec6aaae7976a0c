#include "doctest.h"

#include "ltlkit/automata.hpp"
#include "ltlkit/error.hpp"
#include "ltlkit/formula.hpp"
#include "support/gba_check.hpp"
#include "support/lasso_oracle.hpp"

using namespace ltlkit;
using namespace ltlkit::ltl;

namespace {

const Formula p = atom("p");
const Formula q = atom("q");
const Formula r = atom("r");
const Formula s = atom("s");

LassoWitness lasso(std::vector<Event> prefix, std::vector<Event> loop)
{
    return LassoWitness{std::move(prefix), std::move(loop)};
}

} // namespace

TEST_CASE("false has an empty language")
{
    auto a = ltl_to_gba(ff());
    a.validate();
    CHECK(is_empty(a).empty);
    CHECK_FALSE(is_empty(a).witness.has_value());
    CHECK(is_empty(ltl_to_gba(to_nnf(conj(p, neg(p))))).empty);
}

TEST_CASE("G p is a single accepting p-loop")
{
    auto a = ltl_to_gba(to_nnf(always(p)));
    a.validate();
    CHECK(a.num_states == 1);
    CHECK(a.num_acceptance_sets == 0);
    REQUIRE(a.edges.size() == 1);
    CHECK(a.edges[0].src == 0);
    CHECK(a.edges[0].dst == 0);
    CHECK(a.edges[0].label.required == 1);
    CHECK(a.edges[0].label.forbidden == 0);

    auto res = is_empty(a);
    REQUIRE_FALSE(res.empty);
    CHECK(evaluate_on_lasso(always(p), *res.witness));
    CHECK(accepts_lasso(a, *res.witness));
}

TEST_CASE("p U q")
{
    auto f = until(p, q);
    auto a = ltl_to_gba(to_nnf(f));
    CHECK(a.num_acceptance_sets == 1);
    CHECK(accepts_lasso(a, lasso({{"q"}}, {{}})));
    CHECK(accepts_lasso(a, lasso({{"p"}, {"q"}}, {{}})));
    CHECK_FALSE(accepts_lasso(a, lasso({{}}, {{"q"}})));
    CHECK_FALSE(accepts_lasso(a, lasso({}, {{"p"}})));
}

TEST_CASE("G F p witness loops through p")
{
    auto f = always(eventually(p));
    auto res = is_empty(ltl_to_gba(to_nnf(f)));
    REQUIRE_FALSE(res.empty);
    bool has_p = false;
    for (const auto& e : res.witness->loop)
        has_p = has_p || e.count("p");
    CHECK(has_p);
    CHECK(evaluate_on_lasso(f, *res.witness));
}

TEST_CASE("degeneralize")
{
    SUBCASE("one set is kept")
    {
        auto a = ltl_to_gba(to_nnf(until(p, q)));
        auto d = degeneralize(a);
        CHECK(d.num_acceptance_sets == 1);
        CHECK(d.num_states == a.num_states);
        CHECK(d.edges.size() == a.edges.size());
    }
    SUBCASE("zero sets become all-accepting")
    {
        auto a = ltl_to_gba(to_nnf(always(p)));
        auto d = degeneralize(a);
        CHECK(d.num_acceptance_sets == 1);
        for (const auto& e : d.edges)
            CHECK(e.acc[0]);
    }
    SUBCASE("two untils")
    {
        auto f = conj(until(p, q), until(r, s));
        auto a = ltl_to_gba(to_nnf(f));
        CHECK(a.num_acceptance_sets == 2);
        auto d = degeneralize(a);
        d.validate();
        CHECK(d.num_acceptance_sets == 1);
        CHECK(d.num_states <= a.num_states * (a.num_acceptance_sets + 1));

        testing::LassoOracle oracle({"p", "q", "r", "s"}, 2, 2);
        for (std::uint64_t seed = 0; seed < 3; ++seed) {
            auto g = random_formula(seed, 4, {"p", "q", "r", "s"});
            auto both = to_nnf(conj(f, g));
            auto ga = ltl_to_gba(both);
            auto gd = degeneralize(ga);
            auto w = oracle.find_model(both);
            if (w)
                CHECK(accepts_lasso(gd, *w) == accepts_lasso(ga, *w));
            CHECK(testing::gba_nonempty(ga) == testing::gba_nonempty(gd));
        }
    }
}

TEST_CASE("emptiness agrees with the reference check")
{
    const std::vector<std::string> pool = {"p", "q", "r"};
    for (std::uint64_t seed = 0; seed < 400; ++seed) {
        auto f = to_nnf(random_formula(seed, 1 + static_cast<int>(seed % 6), pool));
        auto a = ltl_to_gba(f);
        a.validate();
        auto d = degeneralize(a);
        d.validate();
        CHECK(d.num_states <= a.num_states * (a.num_acceptance_sets + 1));
        bool ref = testing::gba_nonempty(a);
        CHECK(ref == testing::gba_nonempty(d));
        auto res = is_empty(a);
        REQUIRE(res.empty == !ref);
        if (!res.empty) {
            CHECK(evaluate_on_lasso(f, *res.witness));
            CHECK(accepts_lasso(a, *res.witness));
        }
    }
}

TEST_CASE("on-the-fly emptiness agrees with the full construction")
{
    const std::vector<std::string> pool = {"p", "q", "r"};
    int nonempty = 0;
    for (std::uint64_t seed = 0; seed < 400; ++seed) {
        auto f = to_nnf(random_formula(seed + 7000, 1 + static_cast<int>(seed % 7), pool));
        // conjoining with a negated copy makes many of them empty
        if (seed % 3 == 0)
            f = to_nnf(conj(f, neg(random_formula(seed + 9000, 1 + static_cast<int>(seed % 4), pool))));
        auto a = ltl_to_gba(f);
        bool ref = testing::gba_nonempty(a);
        auto res = ltl_emptiness(f);
        REQUIRE(res.empty == !ref);
        if (!res.empty) {
            ++nonempty;
            REQUIRE(res.witness);
            CHECK_FALSE(res.witness->loop.empty());
            CHECK(evaluate_on_lasso(f, *res.witness));
            CHECK(accepts_lasso(a, *res.witness));
        }
    }
    CHECK(nonempty > 50);
    CHECK(nonempty < 400);
}

TEST_CASE("on-the-fly emptiness honours the state limit")
{
    auto f = to_nnf(parse_infix("G (F p & F q & F r) & G (p -> X (q U r))"));
    CHECK_THROWS_AS(ltl_emptiness(f, {}, 1), SearchLimitExceeded);
    CHECK_FALSE(ltl_emptiness(f, {}, 100000).empty);
}

TEST_CASE("automaton accepts exactly the satisfying small lassos")
{
    // Every lasso the oracle finds for f is accepted, and none it finds for !f is.
    testing::LassoOracle oracle({"p", "q"}, 2, 2);
    for (std::uint64_t seed = 0; seed < 150; ++seed) {
        auto f = random_formula(seed, 1 + static_cast<int>(seed % 5), {"p", "q"});
        auto a = ltl_to_gba(to_nnf(f), {"p", "q"});
        if (auto w = oracle.find_model(f))
            CHECK(accepts_lasso(a, *w));
        if (auto w = oracle.find_model(neg(f)))
            CHECK_FALSE(accepts_lasso(a, *w));
    }
}

TEST_CASE("evaluate_on_lasso")
{
    CHECK(evaluate_on_lasso(always(p), lasso({}, {{"p"}})));
    CHECK_FALSE(evaluate_on_lasso(eventually(p), lasso({{}}, {{}})));
    CHECK(evaluate_on_lasso(until(p, q), lasso({{"p"}}, {{"q"}})));
    CHECK(evaluate_on_lasso(weak_until(p, q), lasso({}, {{"p"}})));
    CHECK_FALSE(evaluate_on_lasso(until(p, q), lasso({}, {{"p"}})));
    CHECK(evaluate_on_lasso(release(p, q), lasso({}, {{"q"}})));
    CHECK(evaluate_on_lasso(always(eventually(p)), lasso({}, {{}, {"p"}})));
    CHECK_FALSE(evaluate_on_lasso(eventually(always(p)), lasso({}, {{}, {"p"}})));
    CHECK(evaluate_on_lasso(next(p), lasso({{}}, {{"p"}})));
    CHECK_THROWS_AS(evaluate_on_lasso(p, lasso({{"p"}}, {})), InvalidInput);
}

TEST_CASE("evaluate_on_lasso matches the oracle's evaluator")
{
    // The oracle only returns lassos on which its own evaluator says f holds.
    testing::LassoOracle oracle({"p", "q", "r"}, 2, 3);
    for (std::uint64_t seed = 0; seed < 300; ++seed) {
        auto f = random_formula(seed + 1000, 1 + static_cast<int>(seed % 7), {"p", "q", "r"});
        if (auto w = oracle.find_model(f))
            CHECK(evaluate_on_lasso(f, *w));
        if (auto w = oracle.find_model(neg(f)))
            CHECK_FALSE(evaluate_on_lasso(f, *w));
    }
}

TEST_CASE("dump format")
{
    auto a = ltl_to_gba(to_nnf(until(p, q)));
    auto text = a.dump();
    CHECK(text.rfind("atoms: p q\n", 0) == 0);
    CHECK(text.find("acceptance-sets: 1") != std::string::npos);
    CHECK(text.find(" -> ") != std::string::npos);
}

TEST_CASE("validate rejects broken automata")
{
    GenBuchiAutomaton a;
    a.num_states = 1;
    a.initial = {0};
    a.edges.push_back(GbaEdge{0, {}, 3, {}});
    CHECK_THROWS_AS(a.validate(), InvalidInput);
    a.edges[0].dst = 0;
    a.validate();
    a.num_acceptance_sets = 1;
    CHECK_THROWS_AS(a.validate(), InvalidInput);
}
