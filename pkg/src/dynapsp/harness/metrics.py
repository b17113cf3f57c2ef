"""Append-only JSON-lines metrics."""
from __future__ import annotations

import json
import sys


class Metrics:
    """Writes one JSON object per line and flushes after each, so a crashed
    run leaves a parseable prefix."""

    def __init__(self, out=None, header: dict | None = None):
        if out is None or out == "-":
            self._fh = sys.stdout
            self._own = False
        else:
            self._fh = open(out, "a")
            self._own = True
        self.header = header or {}
        self.lines = 0
        if header is not None:
            self.emit("header", **header)

    def emit(self, event: str, **fields) -> None:
        rec = {"event": event, **fields}
        self._fh.write(json.dumps(rec, sort_keys=True, default=_default) + "\n")
        self._fh.flush()
        self.lines += 1

    def close(self) -> None:
        if self._own:
            self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def _default(obj):
    if hasattr(obj, "item"):
        return obj.item()
    if isinstance(obj, (set, frozenset)):
        return sorted(obj)
    return str(obj)


def read_metrics(path) -> list[dict]:
    """Parse a metrics file; a torn final line from a crash is dropped."""
    with open(path) as fh:
        lines = [line.strip() for line in fh if line.strip()]
    out = []
    for i, line in enumerate(lines):
        try:
            out.append(json.loads(line))
        except json.JSONDecodeError:
            if i == len(lines) - 1:
                break
            raise
    return out
