import json
import os
import random
from pathlib import Path

import pytest

import psim

SRC = Path(os.environ.get("PSIM_SOURCE_DIR", Path(__file__).resolve().parents[2]))


def three_agents(days=2, **extra):
    cfg = json.loads((SRC / "configs" / "three_agents.json").read_text())
    cfg["days"] = days
    cfg.update(extra)
    return cfg


def test_kernel_run_and_views():
    k = psim.Kernel(three_agents(1), str(SRC / "configs"))
    assert not k.finished
    k.step()
    assert k.snapshot()["clock"]["tick"] == 1
    k.run()
    assert k.finished
    lines = k.log_lines()
    assert json.loads(lines[0])["type"] == "run"
    assert sum(json.loads(l)["type"] == "growth" for l in lines) == 3
    assert k.agent("sophia")["id"] == "sophia"
    with pytest.raises(psim.LookupError):
        k.agent("nobody")


def test_chat_and_environment():
    k = psim.Kernel(three_agents(2), str(SRC / "configs"))
    reply = k.chat("sophia", "How is the novel going?")
    assert reply["agent"] == "sophia" and reply["reply"]
    with pytest.raises(psim.BusyError):
        k.chat("sophia", "Again?")
    with pytest.raises(psim.InputError):
        k.chat("isabella", "  ")
    csv = (SRC / "data" / "campus.csv").read_text()
    report = k.stage_environment(csv + "Theatre,Stage,40,40,10,Relaxation;Social,A stage,10:00,23:00\n")
    assert report["ok"] and report["effective_day"] == 1


def test_run_is_deterministic(tmp_path):
    logs = []
    for name in ("a", "b"):
        path = tmp_path / f"{name}.jsonl"
        k = psim.Kernel(three_agents(2, log=str(path)), str(SRC / "configs"))
        k.run()
        del k
        logs.append(path.read_bytes())
    assert logs[0] == logs[1]
    assert psim.audit(str(tmp_path / "a.jsonl")) == []
    m = psim.metrics(str(tmp_path / "a.jsonl"))
    assert set(m["agents"]) == {"benjamin", "isabella", "sophia"}


def test_ablation_freezes_personality(tmp_path):
    path = tmp_path / "ablated.jsonl"
    k = psim.Kernel(three_agents(3, log=str(path), ablate="growth,insight,feelings"), str(SRC / "configs"))
    k.run()
    del k
    m = psim.metrics(str(path))
    assert all(a["delta_overall"] == 0.0 for a in m["agents"].values())
    assert psim.audit(str(path), growth_enabled=False) == []


def test_formulas():
    assert psim.activity_level([[0, 1, 2], [1, 0, 3], [2, 3, 0]]) == 2.0
    assert psim.euclid_distance([0, 3], [4, 0]) == 5.0
    assert psim.delta_overall([[20, 25]] * 5) == 5.0
    scores = psim.score_bfi([3] * 44)
    assert (scores["extraversion"], scores["agreeableness"], scores["conscientiousness"],
            scores["neuroticism"], scores["openness"]) == (24, 27, 27, 24, 30)
    ab = psim.parse_ablations("growth,feelings")
    assert ab["disable_growth"] and not ab["disable_insight"]


def test_statistics():
    w = psim.wilcoxon_signed_rank([1, 2, -3, 4, 5])
    assert w["statistic"] == 3 and w["p"] == pytest.approx(0.3125)
    kw = psim.kruskal_wallis([[1, 2, 3], [4, 5, 6]])
    assert kw["statistic"] == pytest.approx(3.857, abs=1e-3)
    assert kw["p"] == pytest.approx(0.0495, abs=1e-3)
    assert psim.cohens_d([1, 2, 3], [2, 3, 4]) == pytest.approx(-1.0)
    for pair in psim.dunn_posthoc_holm([[1, 2, 3, 4], [5, 6, 7, 8], [9, 10, 11, 12]]):
        assert pair["p_adjusted"] >= pair["p"]
    with pytest.raises(psim.DegenerateDataError):
        psim.wilcoxon_signed_rank([0, 0])


def test_trueskill_against_package():
    trueskill = pytest.importorskip("trueskill")
    env = trueskill.TrueSkill(draw_probability=0.0, backend="mpmath")
    rng = random.Random(7)
    for _ in range(20):
        groups = [f"g{i}" for i in range(rng.randint(2, 5))]
        orders = []
        for _ in range(rng.randint(1, 8)):
            order = groups[:]
            rng.shuffle(order)
            orders.append(order)
        ratings = {g: env.create_rating() for g in groups}
        for order in orders:
            rated = env.rate([(ratings[g],) for g in order], ranks=list(range(len(order))))
            for g, (r,) in zip(order, rated):
                ratings[g] = r
        ours = psim.trueskill_rank(orders)
        for g in groups:
            mu, sigma = ours[g]
            assert mu == pytest.approx(ratings[g].mu, rel=1e-9)
            assert sigma == pytest.approx(ratings[g].sigma, rel=1e-9)
