#include "doctest.h"

#include "ltlkit/error.hpp"
#include "ltlkit/formula.hpp"
#include "ltlkit/verify.hpp"
#include "support/lasso_oracle.hpp"

#include <functional>

using namespace ltlkit;
using namespace ltlkit::ltl;

namespace {

const Formula p = atom("p");
const Formula q = atom("q");
const Formula r = atom("r");

bool only_ops(const Formula& f, std::initializer_list<Op> allowed)
{
    bool ok = false;
    for (Op o : allowed)
        ok = ok || f.op() == o;
    for (const auto& c : f.children())
        ok = ok && only_ops(c, allowed);
    return ok;
}

} // namespace

TEST_CASE("atom names")
{
    CHECK(is_valid_atom_name("p"));
    CHECK(is_valid_atom_name("_x1"));
    CHECK(is_valid_atom_name("brake_engaged"));
    CHECK_FALSE(is_valid_atom_name(""));
    CHECK_FALSE(is_valid_atom_name("1p"));
    CHECK_FALSE(is_valid_atom_name("P"));
    CHECK_FALSE(is_valid_atom_name("a-b"));
    for (auto w : {"true", "false", "not", "and", "or", "if", "then", "only", "until", "releases", "weakly",
                   "always", "eventually", "in", "the", "next", "state"}) {
        CHECK(is_reserved_word(w));
        CHECK_FALSE(is_valid_atom_name(w));
    }
    CHECK_THROWS_AS(AtomName("until"), InvalidInput);
    CHECK_THROWS_AS(atom("Bad"), InvalidInput);
}

TEST_CASE("structural equality and hashing")
{
    auto a = always(implies(p, eventually(q)));
    auto b = always(implies(atom("p"), eventually(atom("q"))));
    CHECK(a == b);
    CHECK(a.hash() == b.hash());
    CHECK(a != always(implies(q, eventually(p))));
    CHECK(until(p, q) != weak_until(p, q));
    CHECK(Formula() == tt());
}

TEST_CASE("expand_derived keeps only core operators")
{
    const std::initializer_list<Op> core = {Op::True, Op::Atom, Op::Not, Op::And, Op::Next,
                                            Op::Globally, Op::Eventually, Op::Until};
    CHECK(expand_derived(p) == p);
    CHECK(expand_derived(release(p, q)) == neg(until(neg(p), neg(q))));
    CHECK(expand_derived(ff()) == neg(tt()));

    auto w = expand_derived(weak_until(p, q));
    CHECK(only_ops(w, core));
    CHECK(are_equivalent(w, weak_until(p, q)));

    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        auto f = random_formula(seed, 1 + static_cast<int>(seed % 6), {"p", "q", "r"});
        auto e = expand_derived(f);
        CHECK(only_ops(e, core));
        CHECK(are_equivalent(f, e));
    }
}

TEST_CASE("to_nnf examples")
{
    CHECK(to_nnf(neg(until(p, q))) == release(neg(p), neg(q)));
    CHECK(to_nnf(neg(neg(p))) == p);
    CHECK(to_nnf(neg(always(p))) == until(tt(), neg(p)));
    CHECK(to_nnf(always(p)) == release(ff(), p));
    CHECK(is_nnf(to_nnf(neg(iff(p, weak_until(q, r))))));
    CHECK_FALSE(is_nnf(always(p)));
    CHECK_FALSE(is_nnf(neg(neg(p))));
}

TEST_CASE("to_nnf preserves meaning and is idempotent")
{
    testing::LassoOracle oracle({"p", "q", "r"}, 3, 3);
    for (std::uint64_t seed = 0; seed < 300; ++seed) {
        auto f = random_formula(seed * 31 + 5, 1 + static_cast<int>(seed % 6), {"p", "q", "r"});
        auto n = to_nnf(f);
        CHECK(is_nnf(n));
        CHECK(to_nnf(n) == n);
        CHECK_FALSE(oracle.find_separating(f, n).has_value());
    }
}

TEST_CASE("stats and strata")
{
    auto s = stats(p);
    CHECK(s.ast_depth == 1);
    CHECK(s.node_count == 1);
    CHECK(s.stratum == Stratum::Simple);

    auto g = stats(always(implies(p, eventually(q))));
    CHECK(g.ast_depth == 4);
    CHECK(g.node_count == 5);
    CHECK(g.atoms == std::set<std::string>{"p", "q"});
    CHECK(g.stratum == Stratum::Simple);

    CHECK(stratum_for_depth(4) == Stratum::Simple);
    CHECK(stratum_for_depth(5) == Stratum::Medium);
    CHECK(stratum_for_depth(8) == Stratum::Medium);
    CHECK(stratum_for_depth(9) == Stratum::High);
    CHECK(stratum_for_depth(12) == Stratum::High);
    CHECK(stratum_for_depth(13) == Stratum::VeryHigh);
    CHECK(stratum_for_depth(22) == Stratum::VeryHigh);
    CHECK(stratum_name(Stratum::VeryHigh) == "very_high");

    auto deep = random_formula(3, 13, {"p"});
    CHECK(stats(deep).stratum == Stratum::VeryHigh);
}

TEST_CASE("depth grows under embedding")
{
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        auto f = random_formula(seed, 2 + static_cast<int>(seed % 8), {"p", "q"});
        for (const auto& c : f.children())
            CHECK(depth(f) > depth(c));
    }
}

TEST_CASE("random_formula")
{
    auto one = random_formula(7, 1, {"p"});
    CHECK(is_leaf(one.op()));
    CHECK((one == p || one == tt() || one == ff()));

    CHECK(random_formula(7, 5, {"p", "q", "r"}) == random_formula(7, 5, {"p", "q", "r"}));
    CHECK(random_formula(7, 5, {"p", "q", "r"}) != random_formula(8, 5, {"p", "q", "r"}));

    for (int d : {1, 3, 6, 12}) {
        for (std::uint64_t seed = 0; seed < 1000; ++seed) {
            auto f = random_formula(seed, d, {"p", "q", "r"});
            auto s = stats(f);
            REQUIRE(s.ast_depth == d);
            for (const auto& a : s.atoms)
                CHECK((a == "p" || a == "q" || a == "r"));
        }
    }

    CHECK_THROWS_AS(random_formula(1, 3, std::vector<std::string>{}), InvalidInput);
    CHECK_THROWS_AS(random_formula(1, 0, {"p"}), InvalidInput);
}

TEST_CASE("random_formula covers every operator")
{
    std::set<Op> seen;
    std::function<void(const Formula&)> walk = [&](const Formula& f) {
        seen.insert(f.op());
        for (const auto& c : f.children())
            walk(c);
    };
    for (std::uint64_t seed = 0; seed < 300; ++seed)
        walk(random_formula(seed, 6, {"p", "q"}));
    CHECK(seen.size() == static_cast<std::size_t>(kFormulaOpCount));
}

TEST_CASE("infix syntax")
{
    CHECK(to_infix(always(implies(p, eventually(q)))) == "G (p -> F q)");
    CHECK(to_infix(neg(until(p, tt()))) == "!(p U 1)");
    CHECK(parse_infix("G(p -> F q)") == always(implies(p, eventually(q))));
    CHECK(parse_infix("p & q | r") == disj(conj(p, q), r));
    CHECK(parse_infix("p -> q -> r") == implies(p, implies(q, r)));
    CHECK(parse_infix("!p U q") == until(neg(p), q));
    CHECK(parse_infix("p U q U r") == until(p, until(q, r)));
    CHECK(parse_infix("p <-> q && true") == iff(p, conj(q, tt())));
    CHECK(parse_infix("X X 0") == next(next(ff())));
    CHECK(parse_infix("p W q R r") == weak_until(p, release(q, r)));
    CHECK_THROWS_AS(parse_infix("p &"), InvalidInput);
    CHECK_THROWS_AS(parse_infix("(p"), InvalidInput);
    CHECK_THROWS_AS(parse_infix("p q"), InvalidInput);

    for (std::uint64_t seed = 0; seed < 2000; ++seed) {
        auto f = random_formula(seed, 1 + static_cast<int>(seed % 12), {"p", "q", "r", "s"});
        REQUIRE(parse_infix(to_infix(f)) == f);
    }
}
