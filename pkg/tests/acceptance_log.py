"""Collects one summary line per acceptance criterion for the terminal report."""

LINES: dict[int, str] = {}


def record(number: int, title: str, passed: bool, detail: str = "") -> None:
    tag = "PASS" if passed else "FAIL"
    line = f"[{tag}] criterion {number:2d}: {title}" + (f" ({detail})" if detail else "")
    LINES[number] = line
    print(line)
