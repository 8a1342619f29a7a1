"""
Hitting and mixing times of classical random walks.

Closed forms for the cycle, an exact rational linear solve used as the
independent oracle for every hitting-time claim, a vectorised Monte Carlo
estimator and a Cesàro-averaged mixing time.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from fractions import Fraction
from typing import Iterator, Sequence

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import rng as _rng
from .errors import CapExceededError, DomainError, NoAbsorptionError
from .graph_core import Graph, MarkedSet, StochasticMatrix, absorbing_matrix, transition_matrix
from .rational import solve_sparse

__all__ = [
    "HittingReport",
    "MixingReport",
    "h_step_expectation",
    "hitting_from_distance",
    "hitting_time_exact_cycle",
    "clustered_hitting_time_exact",
    "hitting_time_linear_solve",
    "absorption_times",
    "simulate_hitting_time",
    "simulate_absorption_steps",
    "cesaro_mixing_time",
    "cesaro_averages",
    "total_variation",
    "oresme_partial_sum",
]

# systems up to this size are solved over the rationals
EXACT_SOLVE_LIMIT = 256


def _fraction_str(x: Fraction | float) -> str:
    if isinstance(x, Fraction):
        return f"{x.numerator}/{x.denominator}"
    return repr(float(x))


def _parse_number(s: str | float | int) -> Fraction | float:
    if isinstance(s, str):
        return Fraction(s)
    return s


@dataclass(frozen=True)
class HittingReport:
    """Exact hitting time next to its Monte Carlo estimate."""

    exact_value: Fraction | float
    mc_estimate: float
    mc_stderr: float
    trials: int
    seed: int

    def __post_init__(self):
        if self.mc_stderr < 0 or self.trials < 1 or self.exact_value < 0:
            raise ValueError("invalid hitting report")

    @property
    def z_score(self) -> float:
        diff = self.mc_estimate - float(self.exact_value)
        if self.mc_stderr == 0:
            return 0.0 if diff == 0 else float("inf")
        return diff / self.mc_stderr

    def to_dict(self) -> dict:
        d = asdict(self)
        d["exact_value"] = _fraction_str(self.exact_value)
        d["exact_value_float"] = float(self.exact_value)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> HittingReport:
        d = dict(d)
        d.pop("exact_value_float", None)
        d["exact_value"] = _parse_number(d["exact_value"])
        return cls(**d)


@dataclass(frozen=True)
class MixingReport:
    epsilon: float
    time_steps: int
    final_tv_distance: float

    def __post_init__(self):
        if self.time_steps < 0 or self.final_tv_distance > self.epsilon:
            raise ValueError("invalid mixing report")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> MixingReport:
        return cls(**d)


# ----------------------------------------------------------------------------
# closed forms on the cycle
# ----------------------------------------------------------------------------

def _check_cycle_length(L: int) -> None:
    if L < 3:
        raise DomainError(f"cycle length must be >= 3 (got {L})")


def h_step_expectation(L: int, i: int) -> int:
    """Expected steps to get one step closer to the marked vertex from distance ``i``."""
    _check_cycle_length(L)
    if not 1 <= i <= L // 2:
        raise DomainError(f"distance {i} outside [1, {L // 2}] for L={L}")
    return L - 2 * i + 1


def hitting_from_distance(L: int, i: int) -> int:
    """Expected absorption time starting at distance ``i`` from the single marked vertex."""
    _check_cycle_length(L)
    if not 0 <= i <= L // 2:
        raise DomainError(f"distance {i} outside [0, {L // 2}] for L={L}")
    return i * (L - i)


def hitting_time_exact_cycle(L: int) -> Fraction:
    """Hitting time ``(L**2 - 1) / 6`` of an ``L``-cycle with one marked vertex.

    ``L = 1`` and ``L = 2`` return the formula value (0 and 1/2); the latter has
    no simple-graph realisation but keeps the clustered formula total.
    """
    if L < 1:
        raise DomainError(f"cycle length must be >= 1 (got {L})")
    return Fraction(L * L - 1, 6)


def clustered_hitting_time_exact(N: int, k: int) -> Fraction:
    """Hitting time of an ``N``-cycle whose ``k`` marked vertices form one arc.

    The ``N - k`` unmarked vertices form a path absorbed at both ends, the same
    as an ``L = N - k + 1`` cycle with one marked vertex; averaging
    ``i (L - i)`` over them and counting the marked starts as 0 gives
    ``(N-k)(N-k+1)(N-k+2) / (6N)``.
    """
    if N < 1 or not 1 <= k < N:
        raise DomainError(f"need 1 <= k < N (got N={N}, k={k})")
    m = N - k
    return Fraction(m * (m + 1) * (m + 2), 6 * N)


def oresme_partial_sum(terms: int) -> float:
    """Partial sum of ``i / 2**i`` for ``i = 1..terms``."""
    if terms < 1:
        raise DomainError(f"terms must be >= 1 (got {terms})")
    return float(sum(Fraction(i, 2 ** i) for i in range(1, terms + 1)))


# ----------------------------------------------------------------------------
# linear-solve oracle
# ----------------------------------------------------------------------------

def _can_reach(pprime: StochasticMatrix, targets: set[int]) -> np.ndarray:
    """States from which some target is reachable under ``pprime``."""
    preds: list[list[int]] = [[] for _ in range(pprime.n)]
    for i, row in enumerate(pprime.rows):
        for c, _ in row:
            if c != i:
                preds[c].append(i)
    seen = np.zeros(pprime.n, dtype=bool)
    stack = list(targets)
    for t in stack:
        seen[t] = True
    while stack:
        v = stack.pop()
        for u in preds[v]:
            if not seen[u]:
                seen[u] = True
                stack.append(u)
    return seen


def absorption_times(
    pprime: StochasticMatrix, m: MarkedSet, exact: bool | None = None
) -> list[Fraction] | np.ndarray:
    """Expected steps to absorption from every state.

    Solves ``t_v = 0`` on the marked set and ``t_v = 1 + sum_w P[v, w] t_w``
    elsewhere. Exact rationals for ``n <= 256`` unless ``exact`` says otherwise.
    """
    if m.k == 0:
        raise NoAbsorptionError("marked set is empty")
    if m.n != pprime.n:
        raise ValueError("marked set and matrix sizes differ")
    marked = set(m.marked)
    for v in marked:
        if pprime.rows[v] != ((v, Fraction(1)),):
            raise ValueError(f"row {v} is not absorbing")
    reach = _can_reach(pprime, marked)
    if not reach.all():
        bad = int(np.flatnonzero(~reach)[0])
        raise NoAbsorptionError(f"vertex {bad} cannot reach the marked set")

    free = [v for v in range(pprime.n) if v not in marked]
    col = {v: j for j, v in enumerate(free)}
    if exact is None:
        exact = pprime.n <= EXACT_SOLVE_LIMIT

    if exact:
        rows = []
        for v in free:
            r = {col[v]: Fraction(1)}
            for w, p in pprime.rows[v]:
                if w in col:
                    r[col[w]] = r.get(col[w], Fraction(0)) - p
            rows.append(r)
        try:
            sol = solve_sparse(rows, [Fraction(1)] * len(free))
        except ZeroDivisionError as exc:
            raise NoAbsorptionError(str(exc)) from exc
        out = [Fraction(0)] * pprime.n
        for v, t in zip(free, sol):
            out[v] = t
        return out

    idx = np.array(free, dtype=np.int64)
    a = sp.identity(len(free), format="csr") - pprime.csr[idx][:, idx]
    sol = spla.spsolve(a.tocsc(), np.ones(len(free)))
    if not np.all(np.isfinite(sol)):
        raise NoAbsorptionError("absorption system is singular")
    out = np.zeros(pprime.n)
    out[idx] = sol
    return out


def hitting_time_linear_solve(
    pprime: StochasticMatrix,
    m: MarkedSet,
    start: Sequence[Fraction | float] | None = None,
    exact: bool | None = None,
) -> Fraction | float:
    """Hitting time from a start distribution (uniform when ``start`` is None)."""
    times = absorption_times(pprime, m, exact=exact)
    n = pprime.n
    if start is None:
        start = [Fraction(1, n)] * n
    if len(start) != n:
        raise ValueError("start distribution has the wrong length")
    if isinstance(times, list):
        if all(isinstance(s, (Fraction, int)) for s in start):
            return sum((Fraction(s) * t for s, t in zip(start, times)), Fraction(0))
        return float(sum(float(s) * float(t) for s, t in zip(start, times)))
    return float(np.dot(np.asarray(start, dtype=float), times))


# ----------------------------------------------------------------------------
# Monte Carlo
# ----------------------------------------------------------------------------

def _walk_block(
    g: Graph, marked_mask: np.ndarray, cap: int, rng: np.random.Generator, first: int, count: int
) -> np.ndarray:
    nbrs = g.padded_neighbors
    deg = g.degrees
    pos = rng.integers(0, g.n, size=count)
    steps = np.zeros(count, dtype=np.int64)
    active = np.flatnonzero(~marked_mask[pos])
    t = 0
    while active.size:
        t += 1
        if t > cap:
            trial = first + int(active[0])
            raise CapExceededError(f"trial {trial} exceeded the step cap of {cap}", trial=trial)
        here = pos[active]
        there = nbrs[here, rng.integers(0, deg[here])]
        pos[active] = there
        hit = marked_mask[there]
        steps[active[hit]] = t
        active = active[~hit]
    return steps


def simulate_absorption_steps(
    g: Graph, m: MarkedSet, trials: int, seed: int, workers: int = 1, cap: int | None = None
) -> np.ndarray:
    """Steps to first reach ``m`` for each trial, from uniform random starts.

    Raises
    ------
    CapExceededError
        If a trial runs past ``cap`` steps (default ``100 * n**2``).
    """
    if m.k == 0:
        raise NoAbsorptionError("marked set is empty")
    if trials < 1:
        raise ValueError(f"trials must be >= 1 (got {trials})")
    if cap is None:
        cap = 100 * g.n * g.n
    mask = m.mask()
    parts = _rng.run_blocks(
        seed, trials, lambda r, first, count: _walk_block(g, mask, cap, r, first, count), workers=workers
    )
    return np.concatenate(parts)


def simulate_hitting_time(
    g: Graph, m: MarkedSet, trials: int, seed: int, workers: int = 1, cap: int | None = None
) -> HittingReport:
    """Monte Carlo hitting time, reported next to the exact linear-solve value."""
    # exact first: it detects unreachable marks before any walker is launched
    exact = hitting_time_linear_solve(absorbing_matrix(transition_matrix(g), m), m)
    steps = simulate_absorption_steps(g, m, trials, seed, workers=workers, cap=cap)
    mean, stderr = _rng.mean_and_stderr(steps)
    return HittingReport(exact, mean, stderr, trials, seed)


# ----------------------------------------------------------------------------
# mixing
# ----------------------------------------------------------------------------

def total_variation(p: np.ndarray, q: np.ndarray) -> float:
    return 0.5 * float(np.abs(np.asarray(p) - np.asarray(q)).sum())


def _check_irreducible(p: StochasticMatrix) -> None:
    if p.absorbing_states():
        raise ValueError("Cesàro mixing needs a chain without absorbing states")
    forward = np.zeros(p.n, dtype=bool)
    forward[0] = True
    stack = [0]
    while stack:
        v = stack.pop()
        for c, _ in p.rows[v]:
            if not forward[c]:
                forward[c] = True
                stack.append(c)
    if not forward.all() or not _can_reach(p, {0}).all():
        raise ValueError("chain is not irreducible")


def cesaro_averages(p: StochasticMatrix, start_vertex: int, chunk: int = 1024) -> Iterator[np.ndarray]:
    """Yield blocks of Cesàro averages ``(1/(t+1)) sum_{s<=t} dist_s``.

    Each yielded array has shape ``(rows, n)``; consecutive blocks continue
    the time index.
    """
    n = p.n
    if not 0 <= start_vertex < n:
        raise ValueError(f"start vertex {start_vertex} out of range")
    pt = p.csr.T.tocsr()
    dist = np.zeros(n)
    dist[start_vertex] = 1.0
    acc = np.zeros(n)
    t = 0
    buf = np.empty((chunk, n))
    while True:
        for j in range(chunk):
            buf[j] = dist
            dist = pt @ dist
        sums = np.cumsum(buf, axis=0)
        sums += acc
        acc = sums[-1].copy()
        yield sums / np.arange(t + 1, t + chunk + 1)[:, None]
        t += chunk


def cesaro_mixing_time(
    p: StochasticMatrix, start_vertex: int, epsilon: float, cap: int | None = None
) -> MixingReport:
    """First ``t`` at which the Cesàro average from a point mass is ``epsilon``-close to uniform.

    Time averaging makes the answer meaningful for periodic chains such as
    even cycles, where the distribution itself never converges.
    """
    if not 0 < epsilon < 1:
        raise ValueError(f"epsilon must lie in (0, 1) (got {epsilon})")
    _check_irreducible(p)
    if cap is None:
        cap = 10 ** 6 * p.n
    u = 1.0 / p.n
    t0 = 0
    for avgs in cesaro_averages(p, start_vertex):
        tv = 0.5 * np.abs(avgs - u).sum(axis=1)
        hit = np.flatnonzero(tv <= epsilon)
        if hit.size:
            t = t0 + int(hit[0])
            if t > cap:
                break
            return MixingReport(epsilon, t, float(tv[hit[0]]))
        t0 += avgs.shape[0]
        if t0 > cap:
            break
    raise CapExceededError(f"Cesàro average not within {epsilon} of uniform after {cap} steps")
