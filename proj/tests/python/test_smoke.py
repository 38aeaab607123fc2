import math
import os
import pathlib

import pytest

import viralscope as vs

FIXTURE = pathlib.Path(os.environ.get("VIRALSCOPE_FIXTURE_DIR", pathlib.Path(__file__).parents[1] / "data" / "fixture"))


def test_three_user_example():
    res = vs.solve_virality([1.0, 1.0], [1.0])
    assert res["boundary"] == "interior"
    assert res["r_hat"] == pytest.approx(2 / 3, abs=1e-12)


def test_boundaries():
    assert vs.solve_virality([0.5], [])["boundary"] == "upper_boundary"
    res = vs.solve_virality([], [0.5, 0.2])
    assert res["boundary"] == "zero_successes"
    assert math.isnan(res["r_hat"])
    with pytest.raises(ArithmeticError):
        vs.solve_virality([0.0], [0.5])


def test_log_likelihood_peaks_at_estimate():
    s, f = [0.3, 0.9], [0.5, 0.6, 0.2]
    r = vs.solve_virality(s, f)["r_hat"]
    assert vs.log_likelihood(r, s, f) > vs.log_likelihood(r * 0.9, s, f)
    assert vs.log_likelihood(r, s, f) > vs.log_likelihood(r * 1.1, s, f)


def test_bisect_two_triangles():
    nodes = list("abcdef")
    edges = [("a", "b"), ("b", "c"), ("a", "c"), ("d", "e"), ("e", "f"), ("d", "f"), ("c", "d")]
    res = vs.bisect(nodes, edges, 0.1, 0)
    assert res["cut"] == 1
    g = res["groups"]
    assert g["a"] == g["b"] == g["c"] != g["d"] == g["e"] == g["f"]


def test_krippendorff():
    a = {"1": [0], "2": [1], "3": [0], "4": [1]}
    b = {"1": [1], "2": [0], "3": [1], "4": [0]}
    assert vs.krippendorff_alpha([a, a], ["x"]) == 1.0
    assert vs.krippendorff_alpha([a, b], ["x"]) == pytest.approx(-0.75)


def test_tokenize():
    assert vs.tokenize("Kids protesters https://t.co/x #Climate") == ["kids", "protesters", "#climate"]
    assert vs.tokenize("kids protesters", stem=True) == ["kid", "protester"]


def test_group_lasso_zero_at_lambda_max_and_cv():
    import random

    rng = random.Random(3)
    n = 60
    X = [[rng.gauss(0, 1) for _ in range(3)] for _ in range(n)]
    y = [1.0 + 2.0 * row[0] + rng.gauss(0, 0.3) for row in X]
    big = vs.group_lasso(X, y, [[0], [1, 2]], lam=1e6)
    assert list(big["beta"]) == [0.0, 0.0, 0.0]
    fit = vs.group_lasso(X, y, [[0], [1, 2]], seed=1)
    assert 0 in fit["active_groups"]
    assert fit["beta"][0] == pytest.approx(2.0, abs=0.3)
    assert fit["kkt"] <= 1e-6


def test_run_stage_on_fixture(tmp_path):
    assert vs.run_stage("ingest", str(FIXTURE / "config.json"), out=str(tmp_path)) == 0
    assert (tmp_path / "topical.jsonl").exists()
    assert (tmp_path / "manifest.json").exists()
    # Later stage without its inputs is an input error.
    assert vs.run_stage("virality", str(FIXTURE / "config.json"), out=str(tmp_path / "empty")) == 1
    with pytest.raises(ValueError):
        vs.run_stage("ingest", str(tmp_path / "missing.json"))


def test_version():
    assert vs.__version__ == "0.1.0"
