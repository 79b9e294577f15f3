"""Parameter ranges in ``start:step:stop`` notation and grid tuning."""
from __future__ import annotations

import csv
import logging
import math
import re
from dataclasses import dataclass, field
from decimal import Decimal, InvalidOperation
from pathlib import Path
from typing import Callable, Mapping, Sequence

from .errors import ConfigError

log = logging.getLogger(__name__)

LOWER_IS_BETTER = frozenset({"meanfs", "mean_fs", "classfs", "class_fs", "clusterfs", "cluster_fs"})

_REF = re.compile(r"^([A-Za-z_]\w*)\s*(?:([+-])\s*(\d+(?:\.\d+)?))?$")


class RangeSyntaxError(ConfigError):
    def __init__(self, text: str, pos: int, why: str):
        super().__init__(f"bad range {text!r} at position {pos}: {why}")
        self.text, self.pos = text, pos


def _number(text: str, token: str, pos: int, env: Mapping[str, float] | None) -> Decimal:
    token = token.strip()
    try:
        return Decimal(token)
    except InvalidOperation:
        pass
    m = _REF.match(token)
    if not m:
        raise RangeSyntaxError(text, pos, f"not a number: {token!r}")
    name, sign, amount = m.groups()
    if env is None or name not in env:
        raise RangeSyntaxError(text, pos, f"unknown parameter {name!r}")
    base = Decimal(str(env[name]))
    if sign:
        base = base + Decimal(amount) if sign == "+" else base - Decimal(amount)
    return base


def _as_value(d: Decimal, integral: bool):
    return int(d) if integral else float(d)


def parse_range(text: str, env: Mapping[str, float] | None = None) -> list:
    """Values described by a range string.

    Pieces joined by ``&`` are unioned. A piece is a single value,
    ``start:stop`` (step 1) or ``start:step:stop``, stop inclusive. A ``%``
    on any bound makes the whole piece a percentage. Bounds may refer to
    other parameters in ``env``, e.g. ``5:5:k-5``.
    """
    if not text or not text.strip():
        raise RangeSyntaxError(text, 0, "empty range")
    values: list = []
    offset = 0
    for piece in text.split("&"):
        parts = piece.split(":")
        if len(parts) > 3:
            raise RangeSyntaxError(text, offset, "too many ':'")
        percent = "%" in piece
        positions, nums = [], []
        pos = offset
        for p in parts:
            positions.append(pos)
            if not p.strip():
                raise RangeSyntaxError(text, pos, "missing bound")
            nums.append(_number(text, p.replace("%", ""), pos, env))
            pos += len(p) + 1
        integral = not percent and all(n == n.to_integral_value() and "." not in p for n, p in zip(nums, parts))
        if len(nums) == 1:
            start, step, stop = nums[0], Decimal(1), nums[0]
        elif len(nums) == 2:
            start, step, stop = nums[0], Decimal(1), nums[1]
        else:
            start, step, stop = nums
        if step <= 0:
            raise RangeSyntaxError(text, positions[1], "step must be positive")
        scale = Decimal(100) if percent else Decimal(1)
        v = start
        while v <= stop:
            values.append(_as_value(v / scale, integral))
            v += step
        offset += len(piece) + 1
    seen = set()
    return [x for x in values if not (x in seen or seen.add(x))]


def expand_grid(ranges: Mapping[str, str | Sequence]) -> list[dict]:
    """Cross product of parameter ranges; later ranges may refer to earlier parameters."""
    grid: list[dict] = [{}]
    for name, spec in ranges.items():
        nxt = []
        for partial in grid:
            vals = parse_range(spec, partial) if isinstance(spec, str) else list(spec)
            nxt.extend({**partial, name: v} for v in vals)
        grid = nxt
    return grid


@dataclass
class TuneResult:
    best: dict | None
    best_score: float | None
    table: list[tuple[dict, float | None]] = field(default_factory=list)
    criterion: str = "silhouette"

    @property
    def missing(self) -> int:
        return sum(1 for _, s in self.table if s is None)


def tune_parameter(run: Callable[[dict], float], ranges: Mapping[str, str | Sequence], criterion: str = "silhouette") -> TuneResult:
    """Evaluate ``run`` on every combination and pick the best.

    Higher is better except for the FS family, where lower is better. Ties
    go to the lexicographically smallest parameter tuple. A run that raises
    or returns a non-finite value is recorded as missing.
    """
    grid = expand_grid(ranges)
    if not grid or not ranges:
        raise ValueError("nothing to tune")
    lower = criterion.lower() in LOWER_IS_BETTER
    table: list[tuple[dict, float | None]] = []
    for params in grid:
        try:
            score = float(run(params))
            if not math.isfinite(score):
                raise ValueError(f"non-finite score {score}")
        except Exception as exc:  # a failed run is data, not a crash
            log.warning("run %s failed: %s", params, exc)
            score = None
        table.append((params, score))
    names = list(ranges)
    scored = [(p, s) for p, s in table if s is not None]
    if not scored:
        return TuneResult(None, None, table, criterion)
    key = lambda ps: ((ps[1] if lower else -ps[1]), tuple(ps[0][n] for n in names))  # noqa: E731
    best, score = min(scored, key=key)
    return TuneResult(best, score, table, criterion)


def write_report(result: TuneResult, path: str | Path) -> None:
    """CSV with one row per run: parameters, criterion, value (empty if missing)."""
    names = list(result.table[0][0]) if result.table else []
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(names + ["criterion", "value"])
        for params, score in result.table:
            w.writerow([params[n] for n in names] + [result.criterion, "" if score is None else repr(score)])
