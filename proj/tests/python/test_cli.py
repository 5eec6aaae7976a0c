import json
import os
import subprocess

import pytest

CLI = os.environ.get("LTLKIT_CLI")
pytestmark = pytest.mark.skipif(not CLI, reason="LTLKIT_CLI not set")


def run(*args, env=None):
    return subprocess.run([CLI, *args], capture_output=True, text=True, env=env, timeout=120)


def test_verify():
    out = run("verify", "eventually, p", "--ltl")
    assert out.returncode == 0
    doc = json.loads(out.stdout)
    assert doc["verdict"]["kind"] == "Verified"
    assert doc["ltl"] == "F p"


def test_repair_budget_from_environment():
    env = dict(os.environ, LTLKIT_REPAIR_BUDGET="2")
    doc = json.loads(run("repair", "))))", env=env).stdout)
    assert doc["budget"] == 2
    bad = run("repair", "p", env=dict(os.environ, LTLKIT_REPAIR_BUDGET="zero"))
    assert bad.returncode == 3


def test_explain_exit_codes(tmp_path):
    ctx = tmp_path / "ctx.json"
    ctx.write_text(json.dumps({"p": "lane departure detected"}))
    ok = run("explain", "p", "--context", str(ctx))
    assert json.loads(ok.stdout)["explanation"] == "Lane departure detected."
    assert run("explain", "q", "--context", str(ctx)).returncode == 4
    assert run("explain", "p").returncode == 2


def test_corpus_eval_filter(tmp_path):
    refs = tmp_path / "refs.jsonl"
    gen = run("gen-corpus", "--seed", "3", "--counts", "3,2,1,0")
    assert gen.returncode == 0
    refs.write_text(gen.stdout)
    records = [json.loads(line) for line in gen.stdout.splitlines()]
    assert len(records) == 6
    assert list(records[0]) == ["id", "requirement", "domain", "context", "itl", "ltl", "depth"]

    cands = tmp_path / "cands.jsonl"
    cands.write_text("".join(json.dumps({"id": r["id"], "candidate": r["itl"]}) + "\n" for r in records))
    rep = json.loads(run("eval", "--refs", str(refs), "--cands", str(cands)).stdout)
    assert rep["overall"]["sem_eq"] == 1.0

    filt = json.loads(run("filter", "--in", str(cands)).stdout)
    assert filt["counts"] == {"Verified": 6}

    broken = tmp_path / "broken.jsonl"
    broken.write_text('{"id": "x"}\n')
    assert run("eval", "--refs", str(broken), "--cands", str(cands)).returncode == 5


def test_train_short():
    out = run("train", "--steps", "5", "--group", "4", "--eval-samples", "16")
    assert out.returncode == 0
    doc = json.loads(out.stdout)
    assert len(doc["steps"]) == 5
