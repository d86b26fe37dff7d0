"""Simulation engines for impulse automata.

Two independent engines on purpose:

* ``run`` / ``run_probes``: sparse, vectorized.  Live cells of one time slice
  are kept as a sorted int64 array of packed coordinates plus a uint8 state
  code array; stepping is searchsorted gathers plus one table lookup.
* ``dense_run``: a plain dict-of-cells reference engine that re-applies the
  rule list with first-match semantics, cell by cell.  It shares no stepping
  or pruning logic with the sparse path so the two can cross-check each other.

Coordinates are packed most-significant-axis-first with a per-axis bias, so
numeric order of packed values equals lexicographic order of cells.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from itertools import product

import numpy as np

from .automaton import ImpulseCA
from .errors import (BeyondHorizon, CoordinateOverflow, OverflowHorizon,
                     UnknownState)
from .lattice import all_ones, in_light_cone, parity_valid

FLAT_ENUM_LIMIT = 10**6
DEFAULT_SITE_BUDGET = 1 << 28

_BITS = {1: 62, 2: 31, 3: 20, 4: 15}


def _bits(dim: int) -> int:
    return _BITS[dim]


def pack_cells(coords: np.ndarray, dim: int) -> np.ndarray:
    """Pack an (n, dim) int array of cells into sorted-compatible int64."""
    b = _bits(dim)
    half = np.int64(1) << (b - 1)
    out = np.zeros(len(coords), dtype=np.int64)
    for a in range(dim):
        out = (out << b) | (coords[:, a].astype(np.int64) + half)
    return out


def unpack_cells(packed: np.ndarray, dim: int) -> np.ndarray:
    b = _bits(dim)
    half = np.int64(1) << (b - 1)
    mask = (np.int64(1) << b) - 1
    out = np.empty((len(packed), dim), dtype=np.int64)
    for a in range(dim):
        shift = b * (dim - 1 - a)
        out[:, a] = ((packed >> shift) & mask) - half
    return out


def _offset_shift(x: tuple[int, ...], dim: int) -> np.int64:
    """Packed-value delta of moving a cell by offset x (no field borrow)."""
    b = _bits(dim)
    val = 0
    for a in range(dim):
        val += x[a] << (b * (dim - 1 - a))
    return np.int64(val)


def max_horizon(dim: int) -> int:
    return (1 << (_bits(dim) - 1)) - 5


# ---------------------------------------------------------------------------
# rule-table evaluation over flat codes


def flat_weights(n: int, v: int) -> np.ndarray:
    """Big-endian positional weights: code = sum codes[pos] * n**(v-1-pos)."""
    return np.array([n ** (v - 1 - pos) for pos in range(v)], dtype=np.int64)


def compile_flat(ca: ImpulseCA) -> np.ndarray | None:
    """Full lookup table over all code tuples, or None if too large.

    Enumerating every tuple doubles as a totality check for tables that
    promised totality via ``assume_total``.
    """
    build = getattr(ca.table, "build_flat", None)
    if build is not None:
        return build(ca)
    n, v = len(ca.states), ca.table.arity
    if n ** v > FLAT_ENUM_LIMIT:
        return None
    flat = np.empty(n ** v, dtype=np.uint8)
    for code, tup in enumerate(product(ca.states, repeat=v)):
        flat[code] = ca.state_code(ca.table.apply(tup))
    return flat


class _Evaluator:
    """Maps flat neighbor codes to new state codes."""

    def __init__(self, ca: ImpulseCA):
        self.ca = ca
        self.n = len(ca.states)
        self.v = ca.table.arity
        self.flat = compile_flat(ca)
        self.memo: dict[int, int] = {}

    def lookup(self, codes: np.ndarray) -> np.ndarray:
        if self.flat is not None:
            return self.flat[codes]
        # alphabet too large to tabulate: apply per distinct code, memoized
        uniq, inv = np.unique(codes, return_inverse=True)
        res = np.empty(len(uniq), dtype=np.uint8)
        for j, c in enumerate(uniq.tolist()):
            r = self.memo.get(c)
            if r is None:
                tup = []
                rem = c
                for pos in range(self.v):
                    w = self.n ** (self.v - 1 - pos)
                    tup.append(self.ca.states[rem // w])
                    rem %= w
                r = self.ca.state_code(self.ca.table.apply(tuple(tup)))
                self.memo[c] = r
            res[j] = r
        return res[inv]


# ---------------------------------------------------------------------------
# space-time diagrams

Slice = tuple[np.ndarray, np.ndarray]  # (sorted packed int64, uint8 codes)


def _empty_slice() -> Slice:
    return (np.empty(0, dtype=np.int64), np.empty(0, dtype=np.uint8))


@dataclass
class SpaceTimeDiagram:
    """Fully retained run: one (packed cells, state codes) pair per slice."""

    ca: ImpulseCA
    slices: list[Slice]
    truncated: bool = False

    @property
    def horizon(self) -> int:
        return len(self.slices) - 1

    def n_sites(self, t: int) -> int:
        return len(self.slices[t][0])

    @property
    def total_sites(self) -> int:
        return sum(len(p) for p, _ in self.slices)

    def _check_t(self, t: int):
        if not 0 <= t <= self.horizon:
            raise BeyondHorizon(f"t={t} outside simulated range 0..{self.horizon}")

    def state_at(self, cell: tuple[int, ...], t: int) -> str:
        """State symbol at a cell; quiescent for any cell not stored."""
        self._check_t(t)
        if len(cell) != self.ca.dim:
            raise ValueError(f"cell has {len(cell)} coordinates, CA has {self.ca.dim}")
        packed, codes = self.slices[t]
        key = pack_cells(np.array([cell], dtype=np.int64), self.ca.dim)[0]
        i = np.searchsorted(packed, key)
        if i < len(packed) and packed[i] == key:
            return self.ca.states[codes[i]]
        return self.ca.quiescent

    def cells(self, t: int):
        """Yield (cell, symbol) for non-quiescent cells in lexicographic order."""
        self._check_t(t)
        packed, codes = self.slices[t]
        coords = unpack_cells(packed, self.ca.dim)
        for row, c in zip(coords, codes):
            yield tuple(int(a) for a in row), self.ca.states[c]

    def to_json_obj(self) -> list:
        out = []
        for t in range(self.horizon + 1):
            out.append({
                "t": t,
                "cells": [{"u": list(u), "s": s} for u, s in self.cells(t)],
            })
        return out

    def dumps(self) -> str:
        return json.dumps(self.to_json_obj(), ensure_ascii=False,
                          separators=(",", ":"))


def _seed_slice(ca: ImpulseCA) -> Slice:
    if ca.seed == ca.quiescent:
        return _empty_slice()
    origin = np.zeros((1, ca.dim), dtype=np.int64)
    return (pack_cells(origin, ca.dim),
            np.array([ca.state_code(ca.seed)], dtype=np.uint8))


def _step(ca: ImpulseCA, sl: Slice, ev: _Evaluator,
          shifts: list[np.int64], weights: np.ndarray) -> Slice:
    packed, codes = sl
    if len(packed) == 0:
        return _empty_slice()
    # a cell can wake only if some declared neighbor is live now
    cand = np.unique(np.concatenate([packed - sh for sh in shifts]))
    flat_code = np.zeros(len(cand), dtype=np.int64)
    for pos, sh in enumerate(shifts):
        probe = cand + sh
        idx = np.searchsorted(packed, probe)
        idx_c = np.minimum(idx, len(packed) - 1)
        hit = packed[idx_c] == probe
        ncode = np.where(hit, codes[idx_c], 0).astype(np.int64)
        flat_code += ncode * weights[pos]
    new_codes = ev.lookup(flat_code)
    keep = new_codes != 0
    return (cand[keep], new_codes[keep].astype(np.uint8))


def _prepare(ca: ImpulseCA, steps: int):
    if len(ca.states) > 255:
        raise ValueError("at most 255 states supported by the packed engine")
    if steps > max_horizon(ca.dim):
        raise CoordinateOverflow(
            f"horizon {steps} exceeds packed range for dimension {ca.dim} "
            f"(max {max_horizon(ca.dim)})")
    ev = _Evaluator(ca)
    shifts = [_offset_shift(x, ca.dim) for x in ca.arg_order]
    weights = flat_weights(len(ca.states), ca.table.arity)
    return ev, shifts, weights


def _check_slice(ca: ImpulseCA, sl: Slice, t: int):
    coords = unpack_cells(sl[0], ca.dim)
    for row in coords:
        cell = tuple(int(a) for a in row)
        assert in_light_cone(cell, t), f"{cell} outside light cone at t={t}"
        assert parity_valid(cell, t, ca.neighborhood), \
            f"{cell} parity-invalid at t={t}"


def run(ca: ImpulseCA, steps: int, *, budget: int = DEFAULT_SITE_BUDGET,
        check: bool = False) -> SpaceTimeDiagram:
    """Simulate t = 0..steps inclusive, retaining every slice.

    Raises OverflowHorizon when the retained-site budget runs out; the
    exception carries the finished part as its ``partial`` attribute.
    """
    ev, shifts, weights = _prepare(ca, steps)
    slices = [_seed_slice(ca)]
    total = len(slices[0][0])
    for t in range(steps):
        nxt = _step(ca, slices[-1], ev, shifts, weights)
        total += len(nxt[0])
        if total > budget:
            exc = OverflowHorizon(t, budget)
            exc.partial = SpaceTimeDiagram(ca, slices, truncated=True)
            raise exc
        slices.append(nxt)
        if check:
            _check_slice(ca, nxt, t + 1)
    return SpaceTimeDiagram(ca, slices)


class SliceView:
    """Read-only view of one time slice handed to streaming probes."""

    __slots__ = ("ca", "t", "_packed", "_codes")

    def __init__(self, ca: ImpulseCA, t: int, sl: Slice):
        self.ca = ca
        self.t = t
        self._packed, self._codes = sl

    def state_at(self, cell: tuple[int, ...]) -> str:
        key = pack_cells(np.array([cell], dtype=np.int64), self.ca.dim)[0]
        i = np.searchsorted(self._packed, key)
        if i < len(self._packed) and self._packed[i] == key:
            return self.ca.states[self._codes[i]]
        return self.ca.quiescent

    @property
    def n_sites(self) -> int:
        return len(self._packed)

    def cells(self):
        coords = unpack_cells(self._packed, self.ca.dim)
        for row, c in zip(coords, self._codes):
            yield tuple(int(a) for a in row), self.ca.states[c]


def run_probes(ca: ImpulseCA, steps: int, probes, *,
               budget: int = DEFAULT_SITE_BUDGET) -> None:
    """Simulate while retaining only the live slice; feed each slice to probes.

    Each probe must implement ``observe(view: SliceView)``.  The budget here
    bounds a single slice, not the whole run.
    """
    ev, shifts, weights = _prepare(ca, steps)
    sl = _seed_slice(ca)
    for t in range(steps + 1):
        view = SliceView(ca, t, sl)
        for p in probes:
            p.observe(view)
        if t == steps:
            break
        sl = _step(ca, sl, ev, shifts, weights)
        if len(sl[0]) > budget:
            raise OverflowHorizon(t, budget)


# ---------------------------------------------------------------------------
# dense reference engine


def dense_run(ca: ImpulseCA, steps: int, *,
              budget: int = DEFAULT_SITE_BUDGET) -> SpaceTimeDiagram:
    """Reference simulation over the full dense cone.

    Recomputes every cell of the region [-t, t]^dim from the rule list via
    first-match apply.  Intentionally shares no stepping, candidate, or
    pruning logic with the sparse engine; only the storage container is
    common so results compare directly.
    """
    if steps > max_horizon(ca.dim):
        raise CoordinateOverflow(
            f"horizon {steps} exceeds packed range for dimension {ca.dim}")
    lam = ca.quiescent
    dim = ca.dim
    order = ca.arg_order
    table = ca.table
    dicts: list[dict[tuple[int, ...], str]] = []
    dicts.append({} if ca.seed == lam else {(0,) * dim: ca.seed})
    total = len(dicts[0])
    for t in range(1, steps + 1):
        prev = dicts[-1]
        cur: dict[tuple[int, ...], str] = {}
        for cell in product(range(-t, t + 1), repeat=dim):
            neigh = tuple(
                prev.get(tuple(c + x for c, x in zip(cell, off)), lam)
                for off in order)
            s = table.apply(neigh)
            if s != lam:
                cur[cell] = s
        total += len(cur)
        if total > budget:
            exc = OverflowHorizon(t - 1, budget)
            exc.partial = None
            raise exc
        dicts.append(cur)
    slices = []
    for d in dicts:
        cells = sorted(d.items())
        if not cells:
            slices.append(_empty_slice())
            continue
        coords = np.array([c for c, _ in cells], dtype=np.int64)
        codes = np.array([ca.state_code(s) for _, s in cells], dtype=np.uint8)
        slices.append((pack_cells(coords, dim), codes))
    return SpaceTimeDiagram(ca, slices)


def diagram_from_json_obj(ca: ImpulseCA, obj) -> SpaceTimeDiagram:
    """Rebuild a diagram from its JSON dump.

    Accepts either the plain slice array or the truncated-run wrapper
    ``{"truncated": true, "slices": [...]}``.
    """
    truncated = False
    if isinstance(obj, dict):
        truncated = bool(obj.get("truncated", False))
        obj = obj["slices"]
    rows = sorted(obj, key=lambda r: r["t"])
    if [r["t"] for r in rows] != list(range(len(rows))):
        raise ValueError("slice times must be 0..T without gaps")
    known = set(ca.states)
    slices = []
    for r in rows:
        cells = r["cells"]
        if not cells:
            slices.append(_empty_slice())
            continue
        for c in cells:
            if c["s"] not in known:
                raise UnknownState(f"symbol {c['s']!r} not in the CA alphabet")
            if len(c["u"]) != ca.dim:
                raise ValueError(f"cell {c['u']} has wrong dimension")
        coords = np.array([c["u"] for c in cells], dtype=np.int64)
        codes = np.array([ca.state_code(c["s"]) for c in cells],
                         dtype=np.uint8)
        packed = pack_cells(coords, ca.dim)
        order = np.argsort(packed)
        if len(np.unique(packed)) != len(packed):
            raise ValueError(f"duplicate cells in slice t={r['t']}")
        slices.append((packed[order], codes[order]))
    return SpaceTimeDiagram(ca, slices, truncated=truncated)


def same_run(a: SpaceTimeDiagram, b: SpaceTimeDiagram) -> bool:
    """True when two diagrams hold identical cells at every slice."""
    if a.horizon != b.horizon:
        return False
    for t in range(a.horizon + 1):
        pa, ca_ = a.slices[t]
        pb, cb = b.slices[t]
        if len(pa) != len(pb) or not (np.array_equal(pa, pb)
                                      and np.array_equal(ca_, cb)):
            return False
    return True


# ---------------------------------------------------------------------------
# diagonal words and the sheared-coordinate transform


@dataclass(frozen=True)
class DiagonalWord:
    """Trace of one lattice point's diagonal through the space-time diagram."""

    index: tuple[int, ...]
    start_time: int
    letters: tuple[str, ...]

    def __len__(self) -> int:
        return len(self.letters)


def diagonal_start(i: tuple[int, ...]) -> int:
    """First time at which the diagonal through -i enters the light cone."""
    m = max(i)
    return max(0, (m + 1) // 2)


def diagonal(diag: SpaceTimeDiagram, i: tuple[int, ...],
             length: int) -> DiagonalWord:
    """Letters j = 0..length-1 of the diagonal word for lattice point i.

    Letter j is the state of cell (start+j)*(1,...,1) - i at time start+j.
    Points with a negative coordinate never meet the light cone, so their
    word is all-quiescent of the requested length.
    """
    if len(i) != diag.ca.dim:
        raise ValueError(f"point has {len(i)} coordinates, CA has {diag.ca.dim}")
    lam = diag.ca.quiescent
    if any(a < 0 for a in i):
        return DiagonalWord(tuple(i), 0, (lam,) * length)
    start = diagonal_start(i)
    if start + length - 1 > diag.horizon:
        raise BeyondHorizon(
            f"diagonal {i} needs time {start + length - 1}, "
            f"diagram ends at {diag.horizon}")
    ones = all_ones(diag.ca.dim)
    out = []
    for j in range(length):
        t = start + j
        cell = tuple(t * o - a for o, a in zip(ones, i))
        out.append(diag.state_at(cell, t))
    return DiagonalWord(tuple(i), start, tuple(out))


class DiagonalProbe:
    """Streaming collector for one diagonal word."""

    def __init__(self, i: tuple[int, ...], length: int):
        self.i = tuple(i)
        self.length = length
        self.start = diagonal_start(self.i)
        self.letters: list[str] = []
        self._skip = any(a < 0 for a in self.i)

    def observe(self, view: SliceView):
        if self._skip or len(self.letters) >= self.length:
            return
        t = view.t
        if t < self.start:
            return
        cell = tuple(t - a for a in self.i)
        self.letters.append(view.state_at(cell))

    def word(self, quiescent: str) -> tuple[str, ...]:
        if self._skip:
            return (quiescent,) * self.length
        if len(self.letters) < self.length:
            raise BeyondHorizon(
                f"diagonal {self.i} collected {len(self.letters)} of "
                f"{self.length} letters")
        return tuple(self.letters)


def w_site(k: int, l: int, i: int) -> tuple[tuple[int, int], int]:
    """Cell and time of entry (k, l, i) of the sheared two-index family."""
    return (k - i + l, k - i - l), k + i + l


def w_value(diag: SpaceTimeDiagram, k: int, l: int, i: int) -> str:
    if diag.ca.dim != 2:
        raise ValueError("sheared coordinates are defined for dimension 2")
    cell, t = w_site(k, l, i)
    return diag.state_at(cell, t)


def w_row(diag: SpaceTimeDiagram, k: int, l: int, length: int) -> tuple[str, ...]:
    return tuple(w_value(diag, k, l, i) for i in range(length))


class WRowProbe:
    """Streaming collector for w_row(k, l, 0..length-1)."""

    def __init__(self, k: int, l: int, length: int):
        self.k = k
        self.l = l
        self.length = length
        self.letters: list[str] = []

    def observe(self, view: SliceView):
        i = view.t - self.k - self.l
        if 0 <= i < self.length:
            cell, _ = w_site(self.k, self.l, i)
            self.letters.append(view.state_at(cell))

    def word(self) -> tuple[str, ...]:
        if len(self.letters) < self.length:
            raise BeyondHorizon(
                f"row ({self.k},{self.l}) collected {len(self.letters)} of "
                f"{self.length} letters")
        return tuple(self.letters)
