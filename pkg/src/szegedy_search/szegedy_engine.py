"""
Szegedy's quantum walk on the edges of the bipartite double cover.

Both reflections act vertex by vertex: the amplitudes on the edges leaving an
unmarked vertex are inverted about their mean, and the edges of a marked
vertex change sign while its self-loop is left alone. States stay real for
every configuration built here (real initial state, real reflections), so
amplitudes are stored as float64.

On the cycle every vertex has two edges, so an inversion about the mean
either leaves a pair alone (same sign) or flips it (opposite signs). The
sign tracker below evolves those signs with integer arithmetic only.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from .errors import InconsistentBasisError, UnsupportedStructureError
from .graph_core import (
    EdgeBasis,
    MarkedSet,
    StochasticMatrix,
    absorbing_matrix,
    cycle_graph,
    edge_basis,
    transition_matrix,
)

__all__ = [
    "EdgeState",
    "SignState",
    "Distribution",
    "SignTable",
    "uniform_initial_state",
    "initial_state",
    "reflect_a",
    "reflect_b",
    "walk_step",
    "measure_x",
    "sign_reflect",
    "sign_step",
    "initial_sign_state",
    "evolve",
    "iterate_walk",
    "detect_period",
    "sign_table",
    "stage_name",
    "signs_of",
    "reflect_projector",
]

MINUS = "-"
PLUS = "+"


def stage_name(t: int, post_ra: bool = False) -> str:
    """Column label of the state ``(W')^t`` or ``R_a'(W')^t``."""
    return f"R_a'(W')^{t}" if post_ra else f"(W')^{t}"


@dataclass(frozen=True)
class EdgeState:
    """Real amplitudes over an edge basis, optionally tagged with its stage."""

    basis: EdgeBasis
    amplitudes: np.ndarray
    stage: str = ""

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=float)
        if amps.shape != (len(self.basis),):
            raise ValueError(f"expected {len(self.basis)} amplitudes, got shape {amps.shape}")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    def norm(self) -> float:
        return float(np.sqrt(np.dot(self.amplitudes, self.amplitudes)))

    def amplitude(self, x: int, y: int) -> float:
        return float(self.amplitudes[self.basis.index_of((x, y))])

    def to_dict(self) -> dict:
        return {"stage": self.stage, "amplitudes": [float(a) for a in self.amplitudes]}


@dataclass(frozen=True)
class Distribution:
    probs: np.ndarray

    def __post_init__(self):
        probs = np.array(self.probs, dtype=float)
        if np.any(probs < 0) or abs(probs.sum() - 1.0) > 1e-10:
            raise ValueError("not a probability distribution")
        probs.setflags(write=False)
        object.__setattr__(self, "probs", probs)

    def __len__(self) -> int:
        return len(self.probs)


@dataclass(frozen=True)
class SignState:
    """
    Exact sign pattern of a cycle walk state.

    ``signs[e]`` is the sign of the ``e``-th non-loop pair of ``basis``; every
    such amplitude has magnitude ``1/sqrt(2n)`` and every self-loop is zero.
    """

    basis: EdgeBasis
    signs: np.ndarray

    def __post_init__(self):
        s = np.array(self.signs, dtype=np.int8)
        if s.shape != (len(self.basis.edge_positions),):
            raise ValueError("one sign per original directed edge required")
        if not np.all((s == 1) | (s == -1)):
            raise ValueError("signs must be exactly +1 or -1")
        s.setflags(write=False)
        object.__setattr__(self, "signs", s)

    def to_edge_state(self, stage: str = "") -> EdgeState:
        amps = np.zeros(len(self.basis))
        amps[self.basis.edge_positions] = self.signs / np.sqrt(len(self.signs))
        return EdgeState(self.basis, amps, stage)


# ----------------------------------------------------------------------------
# reflections
# ----------------------------------------------------------------------------

class _Reflector:
    """Index arrays for the two per-vertex reflections of one absorbing matrix."""

    def __init__(self, pprime: StochasticMatrix):
        self.pprime = pprime
        self.basis = edge_basis(pprime)
        n = pprime.n
        self.n = n
        marked = np.zeros(n, dtype=bool)
        marked[pprime.absorbing_states()] = True
        self.marked = marked
        for i, row in enumerate(pprime.rows):
            if marked[i]:
                continue
            probs = {p for _, p in row}
            if len(probs) != 1:
                raise UnsupportedStructureError(f"row {i} is not uniform over its support (weighted walks unsupported)")
        b = self.basis
        self.sides = []
        for key in (b.x, b.y):
            group_marked = marked[key]
            free = np.flatnonzero(~group_marked)
            counts = np.bincount(key[free], minlength=n).astype(float)
            counts[counts == 0] = 1.0
            flip = np.flatnonzero(group_marked & ~b.is_loop)
            self.sides.append((key, free, key[free], counts, flip))

    def apply(self, amps: np.ndarray, side: int) -> np.ndarray:
        key, free, free_key, counts, flip = self.sides[side]
        out = amps.copy()
        # bincount accumulates in index order: fixed summation order per group
        mean = np.bincount(free_key, weights=amps[free], minlength=self.n) / counts
        out[free] = 2.0 * mean[free_key] - amps[free]
        out[flip] = -amps[flip]
        return out


def _reflector(pprime: StochasticMatrix) -> _Reflector:
    r = pprime._cache.get("reflector")
    if r is None:
        r = _Reflector(pprime)
        pprime._cache["reflector"] = r
    return r


def _check_basis(pprime: StochasticMatrix, s: EdgeState) -> _Reflector:
    r = _reflector(pprime)
    if s.basis.pairs != r.basis.pairs:
        raise InconsistentBasisError("state basis does not match the matrix's edge basis")
    return r


def reflect_a(pprime: StochasticMatrix, s: EdgeState) -> EdgeState:
    """Reflection through the X side: per-vertex inversion about the mean, sign flip at marked vertices."""
    r = _check_basis(pprime, s)
    return EdgeState(s.basis, r.apply(s.amplitudes, 0))


def reflect_b(pprime: StochasticMatrix, s: EdgeState) -> EdgeState:
    """Same as :func:`reflect_a` with edges grouped by their Y endpoint."""
    r = _check_basis(pprime, s)
    return EdgeState(s.basis, r.apply(s.amplitudes, 1))


def walk_step(pprime: StochasticMatrix, s: EdgeState) -> EdgeState:
    r = _check_basis(pprime, s)
    return EdgeState(s.basis, r.apply(r.apply(s.amplitudes, 0), 1))


def reflect_projector(pprime: StochasticMatrix, s: EdgeState, side: int) -> EdgeState:
    """Reflection ``2 sum_v |phi_v><phi_v| - I`` built from ``sqrt(P'[v, w])`` weights.

    Independent of the per-vertex special-casing in :func:`reflect_a`; kept as
    a cross-check that the two agree, marked vertices included.
    """
    b = s.basis
    own, other = (b.x, b.y) if side == 0 else (b.y, b.x)
    w = np.array([np.sqrt(float(pprime.entry(int(v), int(u)))) for v, u in zip(own, other)])
    proj = np.bincount(own, weights=w * s.amplitudes, minlength=pprime.n)
    return EdgeState(b, 2.0 * w * proj[own] - s.amplitudes)


def measure_x(s: EdgeState) -> Distribution:
    """Probability of each vertex when measuring the X side."""
    return Distribution(np.bincount(s.basis.x, weights=s.amplitudes ** 2, minlength=s.basis.n))


# ----------------------------------------------------------------------------
# trajectories
# ----------------------------------------------------------------------------

def uniform_initial_state(p: StochasticMatrix, basis: EdgeBasis) -> EdgeState:
    """Amplitude ``sqrt(P[x, y] / N)`` on each edge of ``p``; zero on self-loops."""
    if basis.n != p.n:
        raise InconsistentBasisError("basis and matrix sizes differ")
    amps = np.zeros(len(basis))
    for x, row in enumerate(p.rows):
        for y, prob in row:
            if (x, y) not in basis:
                raise InconsistentBasisError(f"edge ({x}, {y}) of P missing from the basis")
            amps[basis.index_of((x, y))] = np.sqrt(float(prob) / p.n)
    return EdgeState(basis, amps, stage_name(0))


def initial_state(pprime: StochasticMatrix) -> EdgeState:
    """Initial state for the walk of ``pprime``, built from the unmarked matrix."""
    p = pprime.base if pprime.base is not None else pprime
    return uniform_initial_state(p, _reflector(pprime).basis)


def iterate_walk(pprime: StochasticMatrix, steps: int, record_half_steps: bool = False) -> Iterator[EdgeState]:
    """Yield the states of the search walk, the initial state first."""
    if steps < 0:
        raise ValueError(f"steps must be >= 0 (got {steps})")
    r = _reflector(pprime)
    psi = initial_state(pprime)
    yield psi
    amps = psi.amplitudes
    for t in range(steps):
        half = r.apply(amps, 0)
        if record_half_steps:
            yield EdgeState(r.basis, half, stage_name(t, post_ra=True))
        amps = r.apply(half, 1)
        yield EdgeState(r.basis, amps, stage_name(t + 1))


def evolve(pprime: StochasticMatrix, steps: int, record_half_steps: bool = False) -> list[EdgeState]:
    """Trajectory ``[psi_0, (R_a' psi_0), W' psi_0, ...]`` of ``steps`` walk steps."""
    return list(iterate_walk(pprime, steps, record_half_steps))


def detect_period(pprime: StochasticMatrix, max_steps: int, tol: float = 1e-10) -> int | None:
    """Smallest ``t <= max_steps`` with ``max |psi_t - psi_0| < tol``, or None."""
    if max_steps < 1:
        raise ValueError(f"max_steps must be >= 1 (got {max_steps})")
    r = _reflector(pprime)
    psi0 = initial_state(pprime).amplitudes
    amps = psi0
    for t in range(1, max_steps + 1):
        amps = r.apply(r.apply(amps, 0), 1)
        if np.max(np.abs(amps - psi0)) < tol:
            return t
    return None


# ----------------------------------------------------------------------------
# exact sign tracking on the cycle
# ----------------------------------------------------------------------------

def _sign_partners(basis: EdgeBasis) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """For each original edge, its position's X and Y endpoints and the other edge sharing each."""
    cached = basis._cache.get("sign_partners")
    if cached is not None:
        return cached
    pos = basis.edge_positions
    xs, ys = basis.x[pos], basis.y[pos]
    n = basis.n
    by_x: dict[int, list[int]] = {}
    by_y: dict[int, list[int]] = {}
    for e, (x, y) in enumerate(zip(xs, ys)):
        by_x.setdefault(int(x), []).append(e)
        by_y.setdefault(int(y), []).append(e)
    if len(by_x) != n or any(len(v) != 2 for v in by_x.values()) or any(len(v) != 2 for v in by_y.values()):
        raise UnsupportedStructureError("sign tracking needs every vertex to have degree 2")
    px = np.empty(len(pos), dtype=np.int64)
    py = np.empty(len(pos), dtype=np.int64)
    for group, partner in ((by_x, px), (by_y, py)):
        for a, b in group.values():
            partner[a], partner[b] = b, a
    cached = (xs, ys, px, py)
    basis._cache["sign_partners"] = cached
    return cached


def sign_reflect(marked: MarkedSet, s: SignState, side: int) -> SignState:
    """One reflection on signs: marked groups flip, unmarked pairs flip iff they disagree."""
    xs, ys, px, py = _sign_partners(s.basis)
    key, partner = (xs, px) if side == 0 else (ys, py)
    mask = marked.mask()
    flip = mask[key] | (s.signs != s.signs[partner])
    return SignState(s.basis, np.where(flip, -s.signs, s.signs))


def sign_step(marked: MarkedSet, s: SignState) -> SignState:
    """Full walk step ``R_b' R_a'`` on an exact sign state."""
    return sign_reflect(marked, sign_reflect(marked, s, 0), 1)


def initial_sign_state(n: int, marked: MarkedSet) -> SignState:
    pprime = absorbing_matrix(transition_matrix(cycle_graph(n)), marked)
    basis = edge_basis(pprime)
    return SignState(basis, np.ones(len(basis.edge_positions), dtype=np.int8))


@dataclass(frozen=True)
class SignTable:
    """
    Signs of every directed edge of a cycle walk at a sequence of stages.

    Rows run around the cycle: ``|x, x-1>`` then ``|x, x+1>`` for each ``x``.
    Labels are 1-based.
    """

    n: int
    marked: tuple[int, ...]
    edges: tuple[tuple[int, int], ...]
    stages: tuple[str, ...]
    signs: np.ndarray = field(repr=False)

    @property
    def edge_labels(self) -> list[str]:
        return [f"|{x + 1},{y + 1}>" for x, y in self.edges]

    def column(self, stage: str) -> str:
        j = self.stages.index(stage)
        return "".join(PLUS if v > 0 else MINUS for v in self.signs[:, j])

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["edge", *self.stages])
        for label, row in zip(self.edge_labels, self.signs):
            writer.writerow([label, *(PLUS if v > 0 else MINUS for v in row)])
        return buf.getvalue()

    def to_text(self) -> str:
        labels = self.edge_labels
        head = ["Edge", *self.stages]
        widths = [max(len(head[0]), *(len(lab) for lab in labels))] + [len(h) for h in self.stages]
        rule = "-" * (sum(widths) + 2 * (len(widths) - 1))
        out = [rule, "  ".join(h.center(w) for h, w in zip(head, widths)), rule]
        for label, row in zip(labels, self.signs):
            cells = [label.ljust(widths[0])]
            cells += [(PLUS if v > 0 else MINUS).center(w) for v, w in zip(row, widths[1:])]
            out.append("  ".join(cells).rstrip())
        out.append(rule)
        return "\n".join(out) + "\n"

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "marked": [m + 1 for m in self.marked],
            "stages": list(self.stages),
            "rows": {lab: self.column_values(i) for i, lab in enumerate(self.edge_labels)},
        }

    def column_values(self, row: int) -> str:
        return "".join(PLUS if v > 0 else MINUS for v in self.signs[row])


def sign_table(n: int, marked: MarkedSet, steps: int, first: int = 0) -> SignTable:
    """Sign table for stages ``(W')^t`` and ``R_a'(W')^t``, ``first <= t <= steps``."""
    if not 0 <= first <= steps:
        raise ValueError(f"need 0 <= first <= steps (got first={first}, steps={steps})")
    s = initial_sign_state(n, marked)
    basis = s.basis
    order = [basis.index_of((x, (x + d) % n)) for x in range(n) for d in (-1, 1)]
    rows = [int(np.searchsorted(basis.edge_positions, i)) for i in order]
    stages, cols = [], []
    for t in range(steps + 1):
        half = sign_reflect(marked, s, 0)
        if t >= first:
            stages += [stage_name(t), stage_name(t, post_ra=True)]
            cols += [s.signs[rows], half.signs[rows]]
        s = sign_reflect(marked, half, 1)
    return SignTable(
        n=n,
        marked=marked.marked,
        edges=tuple(basis.pairs[i] for i in order),
        stages=tuple(stages),
        signs=np.stack(cols, axis=1).astype(np.int8),
    )


def signs_of(state: EdgeState) -> np.ndarray:
    """Signs of the non-loop amplitudes of a dense state (zero maps to +1)."""
    vals = state.amplitudes[state.basis.edge_positions]
    return np.where(vals < 0, -1, 1).astype(np.int8)
