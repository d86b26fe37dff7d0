"""Both engines, the packed storage, diagonal words, and the sheared rows."""

import json
import random

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ca_signals import (BeyondHorizon, CoordinateOverflow, OverflowHorizon,
                        builtin_log2, builtin_quiescent, builtin_xy,
                        dense_run, diagonal, diagram_from_json_obj,
                        max_horizon, merged_xy, run, run_probes, same_run,
                        w_row, w_site, w_value)
from ca_signals.engine import (DiagonalProbe, WRowProbe, diagonal_start,
                               pack_cells, unpack_cells)
from ca_signals.verification import random_impulse_ca

L = "λ"


def test_seed_slice_and_frozen_early_cells(log2_diag):
    assert list(log2_diag.cells(0)) == [((0, 0), "1")]
    assert dict(log2_diag.cells(1)) == {(1, -1): "1", (1, 1): "0"}
    assert dict(log2_diag.cells(3)) == {
        (1, -1): "0", (1, 1): "1",
        (3, -3): "1", (3, -1): "0", (3, 1): "1", (3, 3): "0",
    }


def test_state_at_defaults_quiescent(log2_diag):
    assert log2_diag.state_at((0, 0), 0) == "1"
    assert log2_diag.state_at((100, 100), 2) == L
    with pytest.raises(BeyondHorizon):
        log2_diag.state_at((0, 0), log2_diag.horizon + 1)
    with pytest.raises(ValueError):
        log2_diag.state_at((0, 0, 0), 0)


def test_run_is_deterministic():
    ca = builtin_xy(2, 3)
    assert same_run(run(ca, 40), run(ca, 40))


@pytest.mark.parametrize("builder,steps", [
    (builtin_log2, 16),
    (lambda: builtin_xy(2, 3), 12),
    (lambda: builtin_xy(1, 2), 12),
    (lambda: merged_xy(2, 3), 12),
    (builtin_quiescent, 8),
])
def test_sparse_equals_dense(builder, steps):
    ca = builder()
    assert same_run(run(ca, steps), dense_run(ca, steps))


def test_sparse_equals_dense_on_random_tables():
    rng = random.Random(20240817)
    for _ in range(12):
        ca = random_impulse_ca(rng)
        assert same_run(run(ca, 10), dense_run(ca, 10)), ca.name


def test_live_region_and_parity(log2_diag):
    # every live cell satisfies -t <= b <= a <= t with both parities even
    for t in range(log2_diag.horizon + 1):
        for (a, b), _s in log2_diag.cells(t):
            assert -t <= b <= a <= t, (t, a, b)
            assert (a + t) % 2 == 0 and (b + t) % 2 == 0, (t, a, b)


def test_pack_unpack_round_trip():
    coords = np.array([[0, 0], [5, -3], [-1000, 999], [2**30 - 1, -(2**30)]],
                      dtype=np.int64)
    packed = pack_cells(coords, 2)
    assert np.array_equal(unpack_cells(packed, 2), coords)
    # packed ordering is lexicographic cell ordering
    srt = np.sort(packed)
    cells = [tuple(r) for r in unpack_cells(srt, 2)]
    assert cells == sorted(cells)


@given(st.integers(1, 4), st.data())
def test_pack_unpack_random(dim, data):
    lim = 2 ** (62 // dim - 1) - 1
    n = data.draw(st.integers(1, 20))
    rows = [tuple(data.draw(st.integers(-lim, lim)) for _ in range(dim))
            for _ in range(n)]
    coords = np.array(rows, dtype=np.int64)
    packed = pack_cells(coords, dim)
    assert [tuple(r) for r in unpack_cells(packed, dim)] == rows
    order = np.argsort(packed, kind="stable")
    assert [rows[i] for i in order] == sorted(rows)


def test_horizon_guard():
    ca = builtin_log2()
    with pytest.raises(CoordinateOverflow):
        run(ca, max_horizon(2) + 1)
    # 31 bits per signed coordinate, minus stepping headroom
    assert 2**30 - 8 <= max_horizon(2) < 2**30
    assert max_horizon(1) > max_horizon(2) > max_horizon(3) > max_horizon(4)


def test_budget_overflow_keeps_partial():
    ca = builtin_log2()
    with pytest.raises(OverflowHorizon) as ei:
        run(ca, 100, budget=50)
    exc = ei.value
    assert exc.budget == 50
    assert exc.partial.truncated
    assert exc.partial.horizon == exc.last_slice
    # the partial prefix agrees with an unconstrained run
    full = run(ca, exc.last_slice)
    assert all(
        np.array_equal(exc.partial.slices[t][0], full.slices[t][0])
        for t in range(exc.last_slice + 1))


def test_run_probes_matches_retained(log2_diag):
    probe = DiagonalProbe((0, 0), 32)
    wrow = WRowProbe(5, 0, 4)
    run_probes(builtin_log2(), 40, [probe, wrow])
    assert probe.word(L) == diagonal(log2_diag, (0, 0), 32).letters
    assert wrow.word() == w_row(log2_diag, 5, 0, 4)


def test_json_round_trip(xy23_diag):
    ca = builtin_xy(2, 3)
    small = run(ca, 12)
    back = diagram_from_json_obj(ca, json.loads(small.dumps()))
    assert same_run(small, back)
    obj = {"truncated": True, "slices": small.to_json_obj()}
    assert diagram_from_json_obj(ca, obj).truncated


def test_json_rejects_foreign_cells():
    ca = builtin_log2()
    with pytest.raises(ValueError):
        diagram_from_json_obj(ca, [{"t": 1, "cells": []}])
    from ca_signals import UnknownState
    with pytest.raises(UnknownState):
        diagram_from_json_obj(
            ca, [{"t": 0, "cells": [{"u": [0, 0], "s": "π_1"}]}])


# --- diagonal words ---------------------------------------------------------


def test_diagonal_start():
    assert diagonal_start((0, 0)) == 0
    assert diagonal_start((0, 2)) == 1
    assert diagonal_start((2, 2)) == 1
    assert diagonal_start((5, 0)) == 3


def test_diagonal_words(log2_diag):
    w = diagonal(log2_diag, (0, 0), 12)
    assert w.start_time == 0
    assert "".join(w.letters) == "101010101010"
    w = diagonal(log2_diag, (2, 2), 12)
    assert w.start_time == 1
    assert "".join(w.letters) == "λ11001100110"
    w = diagonal(log2_diag, (-1, 0), 5)
    assert w.letters == (L,) * 5 and w.start_time == 0
    assert len(w) == 5


def test_diagonal_beyond_horizon(log2_diag):
    with pytest.raises(BeyondHorizon):
        diagonal(log2_diag, (0, 0), log2_diag.horizon + 2)
    with pytest.raises(ValueError):
        diagonal(log2_diag, (0, 0, 0), 4)


# --- sheared rows -----------------------------------------------------------


def test_w_site_geometry():
    assert w_site(0, 0, 0) == ((0, 0), 0)
    assert w_site(5, 0, 0) == ((5, 5), 5)
    assert w_site(5, 1, 0) == ((6, 4), 6)
    # stepping i moves one diagonal step back in the cell, one forward in t
    (c0, t0) = w_site(3, 2, 0)
    (c1, t1) = w_site(3, 2, 1)
    assert t1 == t0 + 1 and c1 == (c0[0] - 1, c0[1] - 1)


def trailing_ones(n: int) -> int:
    k = 0
    while (n >> k) & 1:
        k += 1
    return k


@pytest.mark.parametrize("k", range(8))
def test_w_rows_spell_the_counter(log2_diag, k):
    n = k + 1
    digits = bin(n)[2:][::-1]
    width = len(digits) + 2
    row0 = w_row(log2_diag, k, 0, width)
    assert "".join(row0) == digits + L * 2
    ones = trailing_ones(n)
    carry = "1" * ones + "0" * (len(digits) - ones)
    for l in (1, 2):
        assert "".join(w_row(log2_diag, k, l, width)) == carry + L * 2


def test_w_value_matches_state_at(log2_diag):
    for (k, l, i) in ((5, 0, 1), (9, 3, 2), (0, 0, 0)):
        cell, t = w_site(k, l, i)
        assert w_value(log2_diag, k, l, i) == log2_diag.state_at(cell, t)
