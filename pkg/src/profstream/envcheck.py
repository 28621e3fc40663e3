"""Kernel/CPU configuration checks run before profiling starts.

Bad knob values silently break captured stacks, so the default policy
refuses to profile on any failing check. Checks read knobs through a
KnobReader so tests can inject fixture values.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Callable

PASS = "pass"
FAIL = "fail"
UNKNOWN = "unknown"

ABORT = "abort"
WARN = "warn"

MAX_STACK_KNOB = "/proc/sys/kernel/perf_event_max_stack"
NUMA_BALANCING_KNOB = "/proc/sys/kernel/numa_balancing"

DEFAULT_REQUIRED_DEPTH = 1024


@dataclass(frozen=True, slots=True)
class CheckResult:
    check_id: str
    status: str  # PASS | FAIL | UNKNOWN
    observed: str  # empty iff status == UNKNOWN
    expected: str
    remedy: str

    def as_obj(self) -> dict:
        return {"check_id": self.check_id, "status": self.status,
                "observed": self.observed, "expected": self.expected,
                "remedy": self.remedy}


class KnobReader:
    """Reads kernel knobs off the proc filesystem; returns None when unreadable."""

    def read(self, path: str) -> str | None:
        try:
            return Path(path).read_text()
        except OSError:
            return None


class FixtureReader(KnobReader):
    def __init__(self, values: dict[str, str]):
        self.values = values

    def read(self, path: str) -> str | None:
        return self.values.get(path)


def _read_int(reader: KnobReader, path: str) -> int | None:
    raw = reader.read(path)
    if raw is None:
        return None
    try:
        return int(raw.strip())
    except ValueError:
        return None


def check_max_stack(reader: KnobReader,
                    required_depth: int = DEFAULT_REQUIRED_DEPTH) -> CheckResult:
    """Captured stacks deeper than kernel.perf_event_max_stack get silently
    truncated, so the knob must cover the required depth."""
    expected = f">= {required_depth}"
    value = _read_int(reader, MAX_STACK_KNOB)
    if value is None:
        return CheckResult("perf_event_max_stack", UNKNOWN, "", expected,
                           f"could not read {MAX_STACK_KNOB}")
    status = PASS if value >= required_depth else FAIL
    return CheckResult(
        "perf_event_max_stack", status, str(value), expected,
        f"raise the sysctl: sysctl kernel.perf_event_max_stack={required_depth}")


def check_numa_balancing(reader: KnobReader) -> CheckResult:
    """Active NUMA memory balancing migrates pages mid-profile and breaks
    captured stacks; it must be off."""
    value = _read_int(reader, NUMA_BALANCING_KNOB)
    if value is None:
        return CheckResult("numa_balancing", UNKNOWN, "", "0",
                           f"could not read {NUMA_BALANCING_KNOB}")
    status = PASS if value == 0 else FAIL
    return CheckResult("numa_balancing", status, str(value), "0",
                       "disable it: sysctl kernel.numa_balancing=0")


Check = Callable[[KnobReader], CheckResult]


def default_registry(required_depth: int = DEFAULT_REQUIRED_DEPTH) -> list[Check]:
    return [
        lambda reader: check_max_stack(reader, required_depth),
        check_numa_balancing,
    ]


class AbortProfiling(Exception):
    def __init__(self, failures: list[CheckResult]):
        names = ", ".join(r.check_id for r in failures)
        super().__init__(f"environment checks failed: {names}")
        self.failures = failures


def run_all(reader: KnobReader, policy: str = ABORT,
            checks: list[Check] | None = None) -> list[CheckResult]:
    """Run every registered check. Abort policy raises on any failure;
    unknown (unreadable) knobs never abort."""
    results = [check(reader) for check in (checks if checks is not None
                                           else default_registry())]
    if policy == ABORT:
        failures = [r for r in results if r.status == FAIL]
        if failures:
            raise AbortProfiling(failures)
    return results


def report_text(results: list[CheckResult]) -> str:
    lines = []
    for r in results:
        line = f"[{r.status.upper():7}] {r.check_id}: expected {r.expected}"
        if r.status == PASS:
            line += f", observed {r.observed}"
        elif r.status == FAIL:
            line += f", observed {r.observed} ({r.remedy})"
        else:
            line += f" ({r.remedy})"
        lines.append(line)
    return "\n".join(lines)
