"""
Experiments on exceptional configurations.

Checks that a search walk never leaves the uniform distribution, prices the
resulting guess-and-check search against the classical hitting time, and
studies the torus with a marked diagonal through its quotient cycle.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import asdict, dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from . import rng as _rng
from .classical_walk import clustered_hitting_time_exact
from .errors import DomainError, NoMarkedError
from .graph_core import (
    MarkedSet,
    StochasticMatrix,
    absorbing_matrix,
    cycle_graph,
    diagonal_marked_set,
    grid_to_cycle_reduction,
    torus_coords,
    torus_grid_graph,
    torus_index,
    transition_matrix,
)
from .szegedy_engine import _reflector, initial_state, iterate_walk, measure_x

__all__ = [
    "ExceptionalReport",
    "SeparationReport",
    "SamplingReport",
    "GridReductionReport",
    "verify_exceptional",
    "sampling_search_cost",
    "success_probability",
    "separation_report",
    "separation_sweep",
    "verify_grid_reduction",
    "random_marked_sets",
    "contiguous_marked_set",
    "cycle_search_matrix",
    "reports_to_csv",
]


@dataclass(frozen=True)
class ExceptionalReport:
    """Worst deviations from a uniform, sign-flip-only evolution."""

    n: int
    marked: list[int]
    steps: int
    max_magnitude_deviation: float
    max_selfloop: float
    max_distribution_deviation: float
    verdict: bool
    tol: float = 1e-10
    loop_tol: float = 1e-12

    def to_dict(self) -> dict:
        d = asdict(self)
        d["marked"] = [m + 1 for m in self.marked]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> ExceptionalReport:
        d = dict(d)
        d["marked"] = [m - 1 for m in d["marked"]]
        return cls(**d)


@dataclass(frozen=True)
class SeparationReport:
    """Guess-and-check cost against the classical hitting time of a marked arc.

    ``quantum_total_with_mixing`` and ``classical_total_with_mixing`` are
    leading-order model values with unit constants; ``classical_ht`` is exact.
    """

    n: int
    k: int
    quantum_samples: float
    classical_ht: Fraction
    ratio: float
    quantum_total_with_mixing: float
    classical_total_with_mixing: float

    MODEL_FIELDS = ("quantum_total_with_mixing", "classical_total_with_mixing")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["classical_ht"] = f"{self.classical_ht.numerator}/{self.classical_ht.denominator}"
        d["classical_ht_float"] = float(self.classical_ht)
        d["model_fields"] = list(self.MODEL_FIELDS)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> SeparationReport:
        d = {k: v for k, v in d.items() if k not in ("classical_ht_float", "model_fields")}
        d["classical_ht"] = Fraction(d["classical_ht"])
        return cls(**d)


@dataclass(frozen=True)
class SamplingReport:
    n: int
    k: int
    mean: float
    stderr: float
    trials: int
    seed: int

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> SamplingReport:
        return cls(**d)


@dataclass(frozen=True)
class GridReductionReport:
    side: int
    steps: int
    max_symmetry_deviation: float
    max_distribution_deviation: float
    max_class_deviation: float
    expected_guesses: float
    verdict: bool
    tol: float = 1e-10

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> GridReductionReport:
        return cls(**d)


def reports_to_csv(rows: Iterable[dict]) -> str:
    """One CSV line per report dict, columns from the first row."""
    rows = list(rows)
    if not rows:
        return ""
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
    writer.writeheader()
    for r in rows:
        writer.writerow({k: (";".join(map(str, v)) if isinstance(v, list) else v) for k, v in r.items()})
    return buf.getvalue()


# ----------------------------------------------------------------------------
# configurations
# ----------------------------------------------------------------------------

def cycle_search_matrix(n: int, marked: MarkedSet) -> StochasticMatrix:
    return absorbing_matrix(transition_matrix(cycle_graph(n)), marked)


def contiguous_marked_set(n: int, k: int, start: int = 0) -> MarkedSet:
    """Arc of ``k`` consecutive vertices beginning at ``start``."""
    if not 0 <= k <= n:
        raise DomainError(f"need 0 <= k <= n (got n={n}, k={k})")
    return MarkedSet(tuple((start + i) % n for i in range(k)), n)


def random_marked_sets(n: int, count: int, seed: int) -> list[MarkedSet]:
    """``count`` marked sets with each vertex marked independently with probability 1/2."""
    rng = _rng.block_stream(seed, n)
    out = []
    for _ in range(count):
        mask = rng.random(n) < 0.5
        out.append(MarkedSet(tuple(int(v) for v in np.flatnonzero(mask)), n))
    return out


# ----------------------------------------------------------------------------
# exceptional configurations
# ----------------------------------------------------------------------------

def verify_exceptional(
    pprime: StochasticMatrix,
    marked: MarkedSet | None,
    steps: int,
    tol: float = 1e-10,
    loop_tol: float = 1e-12,
) -> ExceptionalReport:
    """
    Evolve the search walk and track how far it strays from pure sign flips.

    Every original edge should keep the magnitude it has in the initial state
    (``1/sqrt(2n)`` on the cycle), every self-loop should stay at zero and the
    X-side distribution should stay uniform. All half-steps are inspected.

    Parameters
    ----------
    pprime : StochasticMatrix
        Absorbing matrix of the search.
    marked : MarkedSet or None
        Must agree with the absorbing rows of ``pprime``; None reads them off.
    steps : int
        Number of walk steps, at least 1.
    """
    if steps < 1:
        raise ValueError(f"steps must be >= 1 (got {steps})")
    absorbing = tuple(pprime.absorbing_states())
    if marked is None:
        marked = MarkedSet(absorbing, pprime.n)
    elif marked.marked != absorbing:
        raise ValueError("marked set does not match the absorbing rows of the matrix")

    basis = _reflector(pprime).basis
    psi0 = initial_state(pprime).amplitudes
    edges = basis.edge_positions
    loops = np.flatnonzero(basis.is_loop)
    target = np.abs(psi0[edges])
    uniform = 1.0 / pprime.n

    mag = loop = dist = 0.0
    for state in iterate_walk(pprime, steps, record_half_steps=True):
        a = state.amplitudes
        mag = max(mag, float(np.max(np.abs(np.abs(a[edges]) - target))))
        if loops.size:
            loop = max(loop, float(np.max(np.abs(a[loops]))))
        probs = np.bincount(basis.x, weights=a * a, minlength=pprime.n)
        dist = max(dist, float(np.max(np.abs(probs - uniform))))

    verdict = mag < tol and loop < loop_tol and dist < tol
    return ExceptionalReport(
        n=pprime.n,
        marked=list(marked.marked),
        steps=steps,
        max_magnitude_deviation=mag,
        max_selfloop=loop,
        max_distribution_deviation=dist,
        verdict=verdict,
        tol=tol,
        loop_tol=loop_tol,
    )


def success_probability(pprime: StochasticMatrix, steps: int = 1) -> float:
    """Probability that an X-side measurement after ``steps`` steps lands on a marked vertex."""
    marked = pprime.absorbing_states()
    *_, last = iterate_walk(pprime, steps)
    return float(measure_x(last).probs[marked].sum())


def sampling_search_cost(n: int, k: int, trials: int, seed: int, workers: int = 1) -> SamplingReport:
    """Number of uniform guesses until a marked vertex is hit, by simulation.

    Each guess succeeds with probability ``k/n``; only that ratio matters.
    """
    if k == 0:
        raise NoMarkedError("sampling search needs at least one marked vertex")
    if not 1 <= k <= n:
        raise DomainError(f"need 1 <= k <= n (got n={n}, k={k})")
    if trials < 1:
        raise ValueError(f"trials must be >= 1 (got {trials})")
    p = k / n
    parts = _rng.run_blocks(seed, trials, lambda r, first, count: r.geometric(p, size=count), workers=workers)
    mean, stderr = _rng.mean_and_stderr(np.concatenate(parts))
    return SamplingReport(n, k, mean, stderr, trials, seed)


# ----------------------------------------------------------------------------
# separation
# ----------------------------------------------------------------------------

def separation_report(n: int, k: int) -> SeparationReport:
    """Guessing cost ``n/k`` against the exact hitting time of a ``k``-arc on an ``n``-cycle."""
    if not 1 <= k < n:
        raise DomainError(f"need 1 <= k < n (got n={n}, k={k})")
    quantum = n / k
    ht = clustered_hitting_time_exact(n, k)
    return SeparationReport(
        n=n,
        k=k,
        quantum_samples=quantum,
        classical_ht=ht,
        ratio=float(ht) / quantum,
        quantum_total_with_mixing=n * math.log(n) * quantum,
        classical_total_with_mixing=float(n * n + ht),
    )


def separation_sweep(pairs: Sequence[tuple[int, int]]) -> list[SeparationReport]:
    return [separation_report(n, k) for n, k in pairs]


# ----------------------------------------------------------------------------
# torus with a marked diagonal
# ----------------------------------------------------------------------------

def _diagonal_shift(basis, side: int) -> np.ndarray:
    """Basis index of each pair after translating both endpoints by ``(1, 1)``."""

    def shift(v: int) -> int:
        i, j = torus_coords(v, side)
        return torus_index(i + 1, j + 1, side)

    return np.array([basis.index_of((shift(x), shift(y))) for x, y in basis.pairs], dtype=np.int64)


def verify_grid_reduction(side: int, steps: int, tol: float = 1e-10) -> GridReductionReport:
    """
    Evolve the torus search with a marked diagonal and check its reduction to a cycle.

    The diagonal translation ``(i, j) -> (i+1, j+1)`` maps the marked set to
    itself and generates the classes ``(i - j) mod side``, so amplitudes on
    translated edges must agree at every step. The X-side distribution must
    stay uniform, and so must its aggregate over the classes.
    """
    g = torus_grid_graph(side)
    marked = diagonal_marked_set(side)
    pprime = absorbing_matrix(transition_matrix(g), marked)
    reduction = grid_to_cycle_reduction(side)
    basis = _reflector(pprime).basis
    perm = _diagonal_shift(basis, side)
    n = g.n

    sym = dist = cls = 0.0
    for state in iterate_walk(pprime, steps, record_half_steps=True):
        a = state.amplitudes
        sym = max(sym, float(np.max(np.abs(a - a[perm]))))
        probs = np.bincount(basis.x, weights=a * a, minlength=n)
        dist = max(dist, float(np.max(np.abs(probs - 1.0 / n))))
        cls = max(cls, float(np.max(np.abs(reduction.aggregate(probs) - 1.0 / side))))

    return GridReductionReport(
        side=side,
        steps=steps,
        max_symmetry_deviation=sym,
        max_distribution_deviation=dist,
        max_class_deviation=cls,
        expected_guesses=n / marked.k,
        verdict=sym < tol and dist < tol and cls < tol,
        tol=tol,
    )
