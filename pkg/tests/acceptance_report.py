"""Collects one verdict line per acceptance criterion for the terminal summary."""

LINES: dict[int, str] = {}


def record(number: int, passed: bool, detail: str) -> bool:
    LINES[number] = f"[{'PASS' if passed else 'FAIL'}] criterion {number}: {detail}"
    print(LINES[number])
    return passed
