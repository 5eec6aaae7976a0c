#include "doctest.h"

#include "ltlkit/error.hpp"
#include "ltlkit/repair.hpp"

using namespace ltlkit;
using namespace ltlkit::repair;

namespace {

void check_accounting(const RepairOutcome& o, int budget)
{
    if (o.status == RepairStatus::Failed) {
        CHECK(o.repair_cost == budget);
    } else {
        CHECK(o.repair_cost == static_cast<int>(o.edits.size()));
        CHECK(o.repair_cost <= budget);
        REQUIRE(o.result.has_value());
        CHECK(o.result->ok());
    }
}

} // namespace

TEST_CASE("edit distance")
{
    CHECK(edit_distance("", "") == 0);
    CHECK(edit_distance("eventual,", "eventually,") == 2);
    CHECK(edit_distance("unti", "until") == 1);
    CHECK(edit_distance("kitten", "sitting") == 3);
    CHECK(edit_distance("abc", "") == 3);
}

TEST_CASE("source identifiers")
{
    CHECK(source_identifiers("always, (p and q_2) or p") == std::vector<std::string>{"p", "q_2"});
    CHECK(source_identifiers("eventual, (brake and") == std::vector<std::string>{"eventual", "brake"});
    CHECK(source_identifiers("$$ ## 9x") .empty());
}

TEST_CASE("heuristic layer: keyword normalization")
{
    auto v = classify("eventual, p");
    REQUIRE(v.kind == VerdictKind::ParseFailure);
    auto o = heuristic_repair("eventual, p", v, 5);
    CHECK(o.status == RepairStatus::RepairedVerified);
    CHECK(o.repair_cost == 1);
    REQUIRE(o.edits.size() == 1);
    CHECK(o.edits[0].kind == EditKind::NormalizeKeyword);
    CHECK(o.edits[0].detail == "eventually,");
    CHECK(o.edits[0].position == 0);
    CHECK(o.edits[0].span_end == 9);
    CHECK(o.result->source == "eventually, p");
    CHECK(o.layer == RepairLayer::Heuristic);
}

TEST_CASE("heuristic layer: closing paren")
{
    auto o = heuristic_repair("always, (p and q", classify("always, (p and q"), 5);
    CHECK(o.status == RepairStatus::RepairedVerified);
    REQUIRE(o.edits.size() == 1);
    CHECK(o.edits[0].kind == EditKind::InsertParen);
    CHECK(o.edits[0].detail == "close");
    CHECK(o.edits[0].position == 16);
    CHECK(o.result->source == "always, (p and q)");
}

TEST_CASE("heuristic layer: operator insertion")
{
    auto o = heuristic_repair("(p q)", classify("(p q)"), 5);
    CHECK(o.status == RepairStatus::RepairedVerified);
    REQUIRE(o.edits.size() == 1);
    CHECK(o.edits[0].kind == EditKind::InsertOperator);
    CHECK(o.edits[0].detail == "and");
    CHECK(o.result->source == "(p and q)");
}

TEST_CASE("heuristic layer: two errors, rounds")
{
    auto src = "(p unti q";
    auto o = heuristic_repair(src, classify(src), 5);
    REQUIRE(o.parsed());
    CHECK(o.repair_cost == 2);
    CHECK(o.attempts <= 5);
    CHECK(o.result->parse_result.value() == ltl::until(ltl::atom("p"), ltl::atom("q")));
}

TEST_CASE("heuristic layer respects the attempt budget")
{
    auto src = "(p q r s t";
    auto o = heuristic_repair(src, classify(src), 1);
    CHECK(o.attempts <= 1);
    check_accounting(o, 1);
}

TEST_CASE("heuristic layer does nothing for verification failures")
{
    auto o = heuristic_repair("(p or not p)", classify("(p or not p)"), 5);
    CHECK(o.status == RepairStatus::Failed);
    CHECK(o.attempts == 0);
    CHECK(o.repair_cost == 5);
}

TEST_CASE("structural layer: fill a missing operand")
{
    auto doc = itl::ItlDocument::from_source("(p until ) q");
    REQUIRE_FALSE(doc.ok());
    REQUIRE(doc.parse_result.error().partial_ast.has_value());
    auto o = structural_repair(doc, 5, 16);
    CHECK(o.status == RepairStatus::RepairedVerified);
    REQUIRE(o.edits.size() == 1);
    CHECK(o.edits[0].kind == EditKind::InsertSubtree);
    CHECK(o.edits[0].path == "1");
    CHECK(o.edits[0].detail == "q");
    CHECK(o.result->source == "(p until q)");
}

TEST_CASE("structural layer: trivially valid input")
{
    auto doc = itl::ItlDocument::from_source("(p or not p)");
    auto o = structural_repair(doc, 2, 16);
    CHECK(o.status == RepairStatus::RepairedVerified);
    REQUIRE(o.edits.size() == 1);
    CHECK(o.edits[0].kind == EditKind::DeleteSubtree);
    CHECK(o.edits[0].path == "1");
    CHECK(o.result->source == "p");
    CHECK(o.attempts >= 2); // the And relabel is tried first and rejected
}

TEST_CASE("structural layer gives up without a partial tree")
{
    auto doc = itl::ItlDocument::from_source("$$ ## !!");
    auto o = structural_repair(doc, 5, 16);
    CHECK(o.status == RepairStatus::Failed);
    CHECK(o.repair_cost == 5);
}

TEST_CASE("cascade")
{
    auto pass = repair::repair("eventually, p", 5);
    CHECK(pass.status == RepairStatus::RepairedVerified);
    CHECK(pass.repair_cost == 0);
    CHECK(pass.edits.empty());
    CHECK(pass.layer == RepairLayer::None);

    auto t = repair::repair("true", 5);
    CHECK(t.status == RepairStatus::Failed);
    CHECK(t.repair_cost == 5);

    auto garbage = repair::repair("$$ ## !!", 5);
    CHECK(garbage.status == RepairStatus::Failed);
    CHECK(garbage.repair_cost == 5);

    auto two = repair::repair("eventual, (p and", 5);
    CHECK(two.status == RepairStatus::RepairedVerified);
    CHECK(two.repair_cost >= 2);
    check_accounting(two, 5);
    REQUIRE_FALSE(two.edits.empty());
    CHECK(two.edits.front().kind == EditKind::NormalizeKeyword);
    CHECK(two.edits.back().kind == EditKind::InsertSubtree);
    CHECK(two.layer == RepairLayer::Structural);

    auto triv = repair::repair("(p or not p)", 5);
    CHECK(triv.status == RepairStatus::RepairedVerified);
    CHECK(triv.repair_cost == 1);
}

TEST_CASE("repair is idempotent on verified results")
{
    for (auto src : {"eventual, p", "always, (p and q", "(p q)", "(p or not p)", "eventual, (p and", "(p until ) q"}) {
        auto o = repair::repair(src, 5);
        check_accounting(o, 5);
        if (o.status == RepairStatus::RepairedVerified) {
            auto again = repair::repair(o.result->source, 5);
            CHECK(again.repair_cost == 0);
            CHECK(again.status == RepairStatus::RepairedVerified);
        }
    }
}

TEST_CASE("minimality within the heuristic layer")
{
    // A single-edit fix is found; no two-edit sequence is committed first.
    for (auto src : {"eventual, p", "always, (p and q", "(p q)", "(p unti q)", "alway, p", "(p releses q)"}) {
        auto o = repair::repair(src, 5);
        CHECK(o.repair_cost == 1);
    }
}

TEST_CASE("budget must be positive")
{
    CHECK_THROWS_AS(repair::repair("p", 0), InvalidInput);
    CHECK_THROWS_AS(structural_repair(itl::ItlDocument::from_source("p"), 1, 0), InvalidInput);
}
