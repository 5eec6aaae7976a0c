import pytest

import ltlkit


def test_parse_and_print():
    f = ltlkit.parse("always, (p and eventually, q)")
    assert str(f) == "always, (p and eventually, q)"
    assert f.infix() == "G (p & F q)"
    assert f.depth == 4
    assert f.atoms == {"p", "q"}
    assert ltlkit.parse(str(f)) == f
    assert hash(ltlkit.parse(str(f))) == hash(f)
    with pytest.raises(ltlkit.InvalidInput):
        ltlkit.parse("p and")


def test_round_trip_random():
    for seed in range(200):
        f = ltlkit.random_formula(seed, 1 + seed % 8)
        assert ltlkit.parse(str(f)) == f
        assert ltlkit.parse_infix(f.infix()) == f


def test_classify():
    assert ltlkit.classify("eventually, p")["kind"] == "Verified"
    assert ltlkit.classify("p and not p")["kind"] == "Unsatisfiable"
    assert ltlkit.classify("p or not p")["kind"] == "TrivialValid"
    bad = ltlkit.classify("p and")
    assert bad["kind"] == "ParseFailure"
    assert bad["parse_error"]["position"] == 5


def test_equivalence_and_witnesses():
    p, q = ltlkit.parse("p"), ltlkit.parse("q")
    assert ltlkit.are_equivalent(ltlkit.parse("eventually, p"), ltlkit.parse_infix("1 U p"))
    res = ltlkit.check_equivalence(ltlkit.parse("(p until q)"), ltlkit.parse("(p weakly until q)"))
    assert not res["equivalent"]
    assert res["separating"]["loop"]
    sat = ltlkit.is_satisfiable(ltlkit.parse("always, eventually, p"))
    assert sat["satisfiable"]
    assert any("p" in e for e in sat["witness"]["loop"])
    assert not ltlkit.is_satisfiable(ltlkit.parse_infix("(p U q) & G !q"))["satisfiable"]
    assert ltlkit.automaton(ltlkit.parse("(p until q)")).startswith("atoms: p q")
    del p, q


def test_repair_and_reward():
    out = ltlkit.repair("eventual, p")
    assert out["status"] == "RepairedVerified"
    assert out["result"] == "eventually, p"
    assert out["repair_cost"] == 1
    assert ltlkit.compute_reward("eventually, p")["reward"] == 2.0
    assert ltlkit.compute_reward("eventual, p")["reward"] == pytest.approx(1.9)
    assert ltlkit.compute_reward(")))) ((((")["reward"] == pytest.approx(-0.5)


def test_explain():
    ctx = {"q": "obstacle detection active", "s": "the sensor is calibrated"}
    f = ltlkit.parse("always, (if q, then eventually, s)")
    assert ltlkit.explain(f, ctx) == "Always, if obstacle detection active, then eventually, the sensor is calibrated."
    with pytest.raises(ltlkit.GroundingError):
        ltlkit.explain(ltlkit.parse("always, p"), ctx)


def test_pipeline_closure():
    refs = ltlkit.generate_corpus(7)
    assert len(refs) == 100
    assert ltlkit.generate_corpus(7) == refs
    assert ltlkit.validate_record(refs[0]) == ltlkit.parse(refs[0]["itl"])
    rep = ltlkit.evaluate(refs, [(r["id"], r["itl"]) for r in refs])
    for key in ("sem_eq", "syn_corr", "sat", "non_triv", "pass_rate"):
        assert rep["overall"][key] == 1.0

    weakened = [(r["id"], r["itl"].replace(" until ", " weakly until ")) for r in refs]
    rep = ltlkit.evaluate(refs, weakened)
    overall = rep["overall"]
    assert overall["sem_eq"] < 1.0
    assert abs(overall["pass_rate"] - overall["syn_corr"] * overall["sat"] * overall["non_triv"]) < 1e-9
    assert set(rep["mismatch_counts"]) == {"OperatorMismatch"}
    with pytest.raises(ltlkit.InvalidInput):
        ltlkit.evaluate(refs, [("nope", "p")])


def test_mismatch_and_filter():
    m = ltlkit.classify_mismatch
    P = ltlkit.parse_infix
    assert m(P("(p U q) -> r"), P("p U (q -> r)")) == "ScopeError"
    assert m(P("p W q"), P("p U q")) == "OperatorMismatch"
    assert m(P("p U s"), P("p U q")) == "AtomError"
    kinds = [r["verdict"]["kind"] for r in ltlkit.run_filter([("a", "p and"), ("b", "eventually, p")])]
    assert kinds == ["ParseFailure", "Verified"]


def test_short_training_run():
    ctx = ltlkit.default_context()
    tasks = [{"context": ctx, "atoms": ["p"]}, {"context": ctx, "atoms": ["p", "q"]}]
    res = ltlkit.train(tasks, steps=20, eval_samples=32, seed=3)
    assert len(res["mean_rewards"]) == 20
    assert 0.0 <= res["initial_pass_rate"] <= 1.0
    assert set(res["weights"]) >= {"root", "Until"}
