"""Report plumbing and the randomized generators behind the check suites."""

import itertools
import json
import random

from ca_signals import (LAMBDA, Follower, ImpulseCA, dense_run, run,
                        same_run, verify_basic, verify_log2, verify_xy)
from ca_signals.lattice import Neighborhood, offsets
from ca_signals.verification import (Check, VerifyReport, random_follower,
                                     random_impulse_ca)


def test_check_json_shape():
    c = Check("thing", False, "broke", ((1, 2), "x"))
    obj = c.to_json_obj()
    assert obj == {"name": "thing", "ok": False, "detail": "broke",
                   "mismatches": [[1, 2], "x"]}
    json.dumps(obj)


def test_report_lines_and_json():
    rep = VerifyReport("demo", (
        Check("alpha", True, "fine"),
        Check("beta", False),
    ), params={"n": 3})
    assert not rep.ok
    lines = list(rep.lines())
    assert lines == ["[PASS] demo/alpha: fine", "[FAIL] demo/beta"]
    obj = rep.to_json_obj()
    assert obj["target"] == "demo" and obj["ok"] is False
    assert obj["params"] == {"n": 3}
    assert [c["name"] for c in obj["checks"]] == ["alpha", "beta"]
    json.dumps(obj)


def test_random_impulse_ca_is_total_and_quiescent():
    rng = random.Random(20240818)
    for _ in range(30):
        ca = random_impulse_ca(rng)
        assert isinstance(ca, ImpulseCA)
        assert ca.states[0] == LAMBDA
        assert ca.seed != LAMBDA
        for args in itertools.product(ca.states, repeat=4):
            out = ca.table.apply(args)
            assert out in ca.states
        assert ca.table.apply((LAMBDA,) * 4) == LAMBDA


def test_random_impulse_ca_respects_requested_size():
    rng = random.Random(5)
    ca = random_impulse_ca(rng, n_states=3)
    assert ca.states == (LAMBDA, "A", "B")


def test_random_followers_are_total():
    rng = random.Random(99)
    allowed = set(offsets(Neighborhood("trellis", 2)))
    for _ in range(30):
        fol = random_follower(rng)
        assert isinstance(fol, Follower)
        assert fol.initial == fol.states[0]
        for q in fol.states:
            q2, mv = fol.delta[(q, LAMBDA)]
            assert q2 in fol.states
            assert mv in allowed


def test_verify_log2_small_window():
    rep = verify_log2(16)
    assert rep.ok, list(rep.lines())
    assert rep.target == "log2"
    assert {c.name for c in rep.checks} >= {"anchor-walk", "binary-readout"}
    assert all(line.startswith("[PASS]") for line in rep.lines())


def test_verify_xy_small_window():
    rep = verify_xy(2, 3, 60)
    assert rep.ok, list(rep.lines())
    names = {c.name for c in rep.checks}
    assert {"anchor-walk", "no-defaulted-reads", "digit-readout",
            "plane-discipline", "product-marks", "merged-variant"} <= names


def test_verify_xy_skips_merged_variant_when_x_is_1():
    rep = verify_xy(1, 2, 40)
    assert rep.ok, list(rep.lines())
    merged = next(c for c in rep.checks if c.name == "merged-variant")
    assert merged.ok and "skipped" in merged.detail


def test_verify_basic_few_followers():
    rep = verify_basic(count=8, window=64, move_horizon=200)
    assert rep.ok, list(rep.lines())


def test_random_tables_still_agree_across_engines():
    rng = random.Random(424242)
    for _ in range(5):
        ca = random_impulse_ca(rng)
        assert same_run(run(ca, 8), dense_run(ca, 8))
