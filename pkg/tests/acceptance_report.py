"""Collector for the one-line-per-check acceptance summary."""

LINES = []


def report(num, title, ok, detail):
    line = f"[{num}] {title}: {'PASS' if ok else 'FAIL'} ({detail})"
    print(line)
    LINES.append(line)
