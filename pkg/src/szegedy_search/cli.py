"""
Command-line front end.

Every subcommand reads an optional JSON config, applies command-line
overrides, validates the result into a :class:`RunConfig` and writes one
artifact (JSON, CSV or text) to ``--out`` or stdout. Marked vertices and
start vertices are 1-based in configs and on the command line.

Exit codes: 0 on success, 2 on usage or config errors, 1 on runtime errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any, Callable

from . import classical_walk as cw
from . import exceptional_search as xs
from . import szegedy_engine as se
from .errors import (
    CapExceededError,
    DomainError,
    InconsistentBasisError,
    InvalidSizeError,
    NoAbsorptionError,
    NoMarkedError,
    UnsupportedStructureError,
)
from .graph_core import (
    Graph,
    MarkedSet,
    absorbing_matrix,
    cycle_graph,
    diagonal_marked_set,
    graph_from_edges,
    torus_grid_graph,
    transition_matrix,
)

COMMANDS = ("table1", "walk", "hitting", "mixing", "separation", "grid-reduce", "sample")
FORMATS = ("json", "csv", "text")


class ConfigError(ValueError):
    """Invalid run configuration; ``field`` names the offending entry."""

    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


@dataclass
class GraphSpec:
    kind: str = "cycle"
    n: int | None = None
    side: int | None = None
    edges: list[list[int]] | None = None

    def build(self) -> Graph:
        if self.kind == "cycle":
            if self.n is None:
                raise ConfigError("graph.n", "cycle needs n")
            return cycle_graph(self.n)
        if self.kind == "torus":
            if self.side is None:
                raise ConfigError("graph.side", "torus needs side")
            return torus_grid_graph(self.side)
        if self.n is None or self.edges is None:
            raise ConfigError("graph", "general graph needs n and edges")
        return graph_from_edges(self.n, [(u - 1, v - 1) for u, v in self.edges])

    @property
    def size(self) -> int:
        if self.kind == "torus":
            return self.side * self.side
        return self.n


@dataclass
class RunConfig:
    command: str
    graph: GraphSpec = field(default_factory=GraphSpec)
    marked: list[int] | str | None = None
    steps: int | None = None
    trials: int | None = None
    seed: int = 0
    epsilon: float | None = None
    tolerance: float | None = None
    out: str | None = None
    format: str | None = None
    k: int | None = None
    start: int = 1
    first_stage: int | None = None
    sweep: list[list[int]] | None = None

    @classmethod
    def from_dict(cls, command: str, data: dict[str, Any]) -> RunConfig:
        if command not in COMMANDS:
            raise ConfigError("command", f"unknown command {command!r}")
        known = {f.name for f in fields(cls)} - {"command"}
        for key in data:
            if key not in known:
                raise ConfigError(key, "unknown field")
        data = dict(data)
        graph = data.pop("graph", None) or {}
        if not isinstance(graph, dict):
            raise ConfigError("graph", "must be an object")
        gknown = {f.name for f in fields(GraphSpec)}
        for key in graph:
            if key not in gknown:
                raise ConfigError(f"graph.{key}", "unknown field")
        cfg = cls(command=command, graph=GraphSpec(**graph), **data)
        cfg._apply_defaults()
        cfg._validate()
        return cfg

    def _apply_defaults(self) -> None:
        g = self.graph
        defaults: dict[str, dict[str, Any]] = {
            "table1": dict(n=6, marked=[1, 2, 4], steps=5, first_stage=2, format="text"),
            "walk": dict(n=6, marked=[1, 2, 4], steps=6, tolerance=1e-10, format="json"),
            "hitting": dict(n=6, marked=[1], trials=100_000, format="json"),
            "mixing": dict(n=11, epsilon=0.01, format="json"),
            "separation": dict(format="csv"),
            "grid-reduce": dict(side=5, steps=50, tolerance=1e-10, format="json"),
            "sample": dict(n=9, k=3, trials=100_000, format="json"),
        }[self.command]
        if self.command == "grid-reduce":
            g.kind = "torus"
            if g.side is None:
                g.side = defaults["side"]
        elif g.kind == "cycle" and g.n is None and "n" in defaults:
            g.n = defaults["n"]
        if g.kind == "torus" and self.marked is None and self.command == "walk":
            self.marked = "diagonal"
        if self.command == "sample" and self.k is None and not self.marked:
            self.k = defaults["k"]
        for name in ("marked", "steps", "trials", "epsilon", "tolerance", "format", "first_stage"):
            if getattr(self, name) is None and name in defaults:
                setattr(self, name, defaults[name])

    def _validate(self) -> None:
        g = self.graph
        if g.kind not in ("cycle", "torus", "general"):
            raise ConfigError("graph.kind", f"expected cycle, torus or general, got {g.kind!r}")
        for name in ("n", "side"):
            v = getattr(g, name)
            if v is not None and (not isinstance(v, int) or v < 3):
                raise ConfigError(f"graph.{name}", "must be an integer >= 3")
        if self.format not in FORMATS:
            raise ConfigError("format", f"expected one of {', '.join(FORMATS)}")
        if isinstance(self.marked, str):
            if self.marked != "diagonal" or g.kind != "torus":
                raise ConfigError("marked", "the only named set is 'diagonal', on a torus")
        elif self.marked is not None:
            size = g.size if g.size is not None else 0
            for lab in self.marked:
                if not isinstance(lab, int) or not 1 <= lab <= size:
                    raise ConfigError("marked", f"label {lab!r} outside [1, {size}]")
        for name, lo in (("steps", 0), ("trials", 1), ("seed", 0), ("k", 1), ("start", 1), ("first_stage", 0)):
            v = getattr(self, name)
            if v is not None and (not isinstance(v, int) or isinstance(v, bool) or v < lo):
                raise ConfigError(name, f"must be an integer >= {lo}")
        if self.epsilon is not None and not 0 < self.epsilon < 1:
            raise ConfigError("epsilon", "must lie in (0, 1)")
        if self.tolerance is not None and not self.tolerance > 0:
            raise ConfigError("tolerance", "must be positive")
        if self.command == "table1":
            if g.kind != "cycle":
                raise ConfigError("graph.kind", "table1 needs a cycle")
            if self.first_stage > self.steps:
                raise ConfigError("first_stage", "must not exceed steps")
        if self.command in ("walk", "grid-reduce") and self.steps < 1:
            raise ConfigError("steps", "must be >= 1")
        if self.command == "hitting" and not self.marked:
            raise ConfigError("marked", "hitting needs at least one marked vertex")
        if self.command == "separation" and self.sweep is not None:
            for pair in self.sweep:
                if len(pair) != 2 or not 1 <= pair[1] < pair[0]:
                    raise ConfigError("sweep", f"entry {pair!r} is not [n, k] with 1 <= k < n")

    def marked_set(self, n: int) -> MarkedSet:
        if self.marked == "diagonal":
            return diagonal_marked_set(self.graph.side)
        return MarkedSet.from_one_based(self.marked or [], n)

    def to_dict(self) -> dict[str, Any]:
        d = asdict(self)
        d["graph"] = {k: v for k, v in d["graph"].items() if v is not None}
        return {k: v for k, v in d.items() if v is not None}


# ----------------------------------------------------------------------------
# commands
# ----------------------------------------------------------------------------

def _dumps(obj: Any) -> str:
    return json.dumps(obj, indent=2, ensure_ascii=False) + "\n"


def cmd_table1(cfg: RunConfig) -> str:
    n = cfg.graph.n
    table = se.sign_table(n, cfg.marked_set(n), cfg.steps, first=cfg.first_stage)
    if cfg.format == "csv":
        return table.to_csv()
    if cfg.format == "text":
        return table.to_text()
    return _dumps(table.to_dict())


def cmd_walk(cfg: RunConfig) -> str:
    g = cfg.graph.build()
    marked = cfg.marked_set(g.n)
    pprime = absorbing_matrix(transition_matrix(g), marked)
    trajectory = se.evolve(pprime, cfg.steps)
    report = xs.verify_exceptional(pprime, marked, cfg.steps, tol=cfg.tolerance)
    drift = max(abs(a - b) for a, b in zip(trajectory[-1].amplitudes, trajectory[0].amplitudes))
    if cfg.format == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["stage", *(f"|{x + 1},{y + 1}>" for x, y in trajectory[0].basis.pairs)])
        for s in trajectory:
            writer.writerow([s.stage, *(repr(float(a)) for a in s.amplitudes)])
        return buf.getvalue()
    if cfg.format == "text":
        r = report
        return (
            f"n={r.n} marked={[m + 1 for m in r.marked]} steps={r.steps}\n"
            f"max magnitude deviation   {r.max_magnitude_deviation:.3e}\n"
            f"max self-loop amplitude   {r.max_selfloop:.3e}\n"
            f"max distribution deviation {r.max_distribution_deviation:.3e}\n"
            f"final state vs initial    {drift:.3e}\n"
            f"exceptional: {'yes' if r.verdict else 'no'}\n"
        )
    return _dumps(
        {
            "config": cfg.to_dict(),
            "report": report.to_dict(),
            "final_minus_initial_max": float(drift),
            "trajectory": [s.to_dict() for s in trajectory],
        }
    )


def cmd_hitting(cfg: RunConfig) -> str:
    g = cfg.graph.build()
    report = cw.simulate_hitting_time(g, cfg.marked_set(g.n), cfg.trials, cfg.seed)
    d = report.to_dict()
    if cfg.format == "csv":
        return xs.reports_to_csv([d])
    if cfg.format == "text":
        return (
            f"exact {d['exact_value']} ({d['exact_value_float']:.6f})\n"
            f"monte carlo {report.mc_estimate:.6f} +- {report.mc_stderr:.6f} "
            f"({report.trials} trials, seed {report.seed})\n"
        )
    return _dumps(d)


def cmd_mixing(cfg: RunConfig) -> str:
    g = cfg.graph.build()
    if not 1 <= cfg.start <= g.n:
        raise ConfigError("start", f"outside [1, {g.n}]")
    report = cw.cesaro_mixing_time(transition_matrix(g), cfg.start - 1, cfg.epsilon)
    d = report.to_dict()
    if cfg.format == "csv":
        return xs.reports_to_csv([d])
    if cfg.format == "text":
        return f"Cesàro mixing time {report.time_steps} (epsilon {report.epsilon}, tv {report.final_tv_distance:.3e})\n"
    return _dumps(d)


def _separation_pairs(cfg: RunConfig) -> list[tuple[int, int]]:
    if cfg.sweep is not None:
        return [(int(n), int(k)) for n, k in cfg.sweep]
    n = cfg.graph.n if cfg.graph.n is not None else 16
    if cfg.k is not None:
        k = cfg.k
    elif isinstance(cfg.marked, list) and cfg.marked:
        k = len(cfg.marked)
    else:
        k = math.isqrt(n)
    if not 1 <= k < n:
        raise ConfigError("k", f"need 1 <= k < n (got n={n}, k={k})")
    return [(n, k)]


def cmd_separation(cfg: RunConfig) -> str:
    rows = [r.to_dict() for r in xs.separation_sweep(_separation_pairs(cfg))]
    if cfg.format == "csv":
        return xs.reports_to_csv(rows)
    if cfg.format == "text":
        return "".join(
            f"n={r['n']} k={r['k']} samples={r['quantum_samples']:g} HT={r['classical_ht']} ratio={r['ratio']:.6g}\n"
            for r in rows
        )
    return _dumps(rows)


def cmd_grid_reduce(cfg: RunConfig) -> str:
    report = xs.verify_grid_reduction(cfg.graph.side, cfg.steps, tol=cfg.tolerance)
    d = report.to_dict()
    if cfg.format == "csv":
        return xs.reports_to_csv([d])
    if cfg.format == "text":
        return (
            f"side={report.side} steps={report.steps}\n"
            f"symmetry deviation {report.max_symmetry_deviation:.3e}\n"
            f"distribution deviation {report.max_distribution_deviation:.3e}\n"
            f"expected guesses {report.expected_guesses:g}\n"
            f"reduces to cycle: {'yes' if report.verdict else 'no'}\n"
        )
    return _dumps(d)


def cmd_sample(cfg: RunConfig) -> str:
    n = cfg.graph.size
    if cfg.k is not None:
        k = cfg.k
    elif cfg.marked:
        k = len(cfg.marked_set(n))
    else:
        raise ConfigError("k", "sample needs k or a marked list")
    if k > n:
        raise ConfigError("k", f"exceeds n={n}")
    report = xs.sampling_search_cost(n, k, cfg.trials, cfg.seed)
    d = report.to_dict()
    if cfg.format == "csv":
        return xs.reports_to_csv([d])
    if cfg.format == "text":
        return f"mean guesses {report.mean:.6f} +- {report.stderr:.6f} (n={n}, k={k})\n"
    return _dumps(d)


HANDLERS: dict[str, Callable[[RunConfig], str]] = {
    "table1": cmd_table1,
    "walk": cmd_walk,
    "hitting": cmd_hitting,
    "mixing": cmd_mixing,
    "separation": cmd_separation,
    "grid-reduce": cmd_grid_reduce,
    "sample": cmd_sample,
}


# ----------------------------------------------------------------------------
# argument parsing
# ----------------------------------------------------------------------------

def _int_list(text: str) -> list[int]:
    text = text.strip()
    if not text:
        return []
    return [int(v) for v in text.split(",")]


def _pairs(text: str) -> list[list[int]]:
    out = []
    for item in text.split(","):
        n, k = item.split(":")
        out.append([int(n), int(k)])
    return out


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="JSON run configuration")
    common.add_argument("--seed", type=int)
    common.add_argument("--format", choices=FORMATS)
    common.add_argument("--out", help="output path (default: stdout)")
    common.add_argument("--kind", choices=("cycle", "torus", "general"))
    common.add_argument("--n", type=int, help="cycle length")
    common.add_argument("--side", type=int, help="torus side length")
    common.add_argument("--marked", help="comma-separated 1-based vertices, or 'diagonal'")
    common.add_argument("--steps", type=int)
    common.add_argument("--trials", type=int)
    common.add_argument("--epsilon", type=float)
    common.add_argument("--tol", dest="tolerance", type=float)
    common.add_argument("--k", type=int)
    common.add_argument("--start", type=int, help="1-based start vertex (mixing)")
    common.add_argument("--first-stage", dest="first_stage", type=int)
    common.add_argument("--sweep", type=_pairs, help="n:k pairs, e.g. 16:4,64:8")

    parser = argparse.ArgumentParser(
        prog="szegedy-search",
        description="Szegedy quantum walk search on cycles and tori, with classical hitting/mixing times.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "table1": "sign table of the N=6 search walk",
        "walk": "evolve a search walk and check it is exceptional",
        "hitting": "classical hitting time, exact and Monte Carlo",
        "mixing": "Cesàro mixing time of the simple random walk",
        "separation": "guessing cost vs. classical hitting time for a marked arc",
        "grid-reduce": "torus with a marked diagonal and its reduction to a cycle",
        "sample": "simulated cost of uniform guessing",
    }
    for name in COMMANDS:
        sub.add_parser(name, parents=[common], help=helps[name])
    return parser


def _merge(args: argparse.Namespace) -> dict[str, Any]:
    data: dict[str, Any] = {}
    if args.config is not None:
        try:
            data = json.loads(args.config.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError("config", str(exc)) from exc
        if not isinstance(data, dict):
            raise ConfigError("config", "top level must be an object")
    graph = dict(data.get("graph") or {})
    for name in ("kind", "n", "side"):
        v = getattr(args, name)
        if v is not None:
            graph[name] = v
    if args.side is not None and args.kind is None:
        graph["kind"] = "torus"
    if graph:
        data["graph"] = graph
    if args.marked is not None:
        data["marked"] = "diagonal" if args.marked.strip() == "diagonal" else _int_list(args.marked)
    for name in ("seed", "format", "out", "steps", "trials", "epsilon", "tolerance", "k", "start", "first_stage", "sweep"):
        v = getattr(args, name)
        if v is not None:
            data[name] = v
    return data


RUNTIME_ERRORS = (
    CapExceededError,
    DomainError,
    InconsistentBasisError,
    InvalidSizeError,
    NoAbsorptionError,
    NoMarkedError,
    UnsupportedStructureError,
    ValueError,
)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0
    try:
        cfg = RunConfig.from_dict(args.command, _merge(args))
        text = HANDLERS[args.command](cfg)
    except (ConfigError, TypeError) as exc:
        print(f"szegedy-search {args.command}: usage error: {exc}", file=sys.stderr)
        return 2
    except RUNTIME_ERRORS as exc:
        print(f"szegedy-search {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    if cfg.out:
        Path(cfg.out).write_bytes(text.encode("utf-8"))
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
