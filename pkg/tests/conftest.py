import re
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

_CRITERION = re.compile(r"test_acceptance\.py::test_criterion_(\d+)_(\w+?)(\[.*\])?$")


def pytest_terminal_summary(terminalreporter):
    """Print one PASS/FAIL line per acceptance criterion."""
    results: dict[int, dict] = {}
    for outcome in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(outcome, []):
            match = _CRITERION.search(getattr(rep, "nodeid", ""))
            if match is None or rep.when not in ("call", "setup"):
                continue
            if rep.when == "setup" and outcome == "passed":
                continue
            num, name = int(match.group(1)), match.group(2)
            entry = results.setdefault(num, {"name": name, "ok": True, "time": 0.0})
            entry["ok"] &= outcome == "passed"
            entry["time"] += rep.duration
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(results):
        r = results[num]
        status = "PASS" if r["ok"] else "FAIL"
        terminalreporter.write_line(f"criterion {num:2d}  {status}  {r['name'].replace('_', ' ')}  ({r['time']:.2f} s)")
