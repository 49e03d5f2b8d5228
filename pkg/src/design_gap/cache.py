"""Persistent gap table: one CSV row per (t, k_terms)."""

from __future__ import annotations

import csv
import fcntl
import io
import os
import tempfile
from contextlib import contextmanager
from dataclasses import dataclass, fields
from datetime import datetime, timezone
from pathlib import Path

from . import __version__

HEADER = ("t", "k_terms", "gap", "residual", "solver", "seed", "tool_version", "created_at")
CACHE_ENV = "DESIGN_GAP_CACHE"


def default_cache_path() -> Path:
    env = os.environ.get(CACHE_ENV)
    if env:
        return Path(env)
    return Path.home() / ".cache" / "design-gap" / "gaps.csv"


def utc_now() -> str:
    return datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def format_real(x: float) -> str:
    return format(float(x), ".17g")


@dataclass(frozen=True)
class GapCacheRecord:
    t: int
    k_terms: int
    gap: float
    residual: float
    solver: str
    seed: int
    tool_version: str = __version__
    created_at: str = ""

    def __post_init__(self):
        if not (-1e-9 <= self.gap <= self.k_terms + 1e-9):
            raise ValueError(f"gap {self.gap} outside [0, {self.k_terms}]")

    @classmethod
    def from_result(cls, result, created_at: str | None = None) -> GapCacheRecord:
        return cls(
            t=result.t,
            k_terms=result.n_terms,
            gap=result.gap,
            residual=result.residual,
            solver=result.solver,
            seed=result.seed,
            tool_version=__version__,
            created_at=created_at or utc_now(),
        )

    def row(self) -> list[str]:
        return [
            str(self.t),
            str(self.k_terms),
            format_real(self.gap),
            format_real(self.residual),
            self.solver,
            str(self.seed),
            self.tool_version,
            self.created_at,
        ]

    @classmethod
    def from_row(cls, row: dict) -> GapCacheRecord:
        return cls(
            t=int(row["t"]),
            k_terms=int(row["k_terms"]),
            gap=float(row["gap"]),
            residual=float(row["residual"]),
            solver=row["solver"],
            seed=int(row["seed"]),
            tool_version=row["tool_version"],
            created_at=row["created_at"],
        )


def _parse(text: str) -> dict[tuple[int, int], GapCacheRecord]:
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames is None:
        return {}
    if tuple(reader.fieldnames) != HEADER:
        raise ValueError(f"unexpected cache header {reader.fieldnames}")
    out = {}
    for row in reader:
        rec = GapCacheRecord.from_row(row)
        out[(rec.t, rec.k_terms)] = rec
    return out


def _render(records) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(HEADER)
    for rec in sorted(records, key=lambda r: (r.t, r.k_terms)):
        writer.writerow(rec.row())
    return buf.getvalue()


class GapCache:
    """CSV-backed gap table. Writes hold an exclusive lock on ``<path>.lock``."""

    def __init__(self, path: str | os.PathLike | None = None):
        self.path = Path(path) if path is not None else default_cache_path()

    @contextmanager
    def _locked(self):
        self.path.parent.mkdir(parents=True, exist_ok=True)
        lock_path = self.path.with_name(self.path.name + ".lock")
        with open(lock_path, "w") as lock:
            fcntl.flock(lock, fcntl.LOCK_EX)
            try:
                yield
            finally:
                fcntl.flock(lock, fcntl.LOCK_UN)

    def load(self) -> dict[tuple[int, int], GapCacheRecord]:
        if not self.path.exists():
            return {}
        return _parse(self.path.read_text(encoding="utf-8"))

    def get(self, t: int, k_terms: int) -> GapCacheRecord | None:
        return self.load().get((t, k_terms))

    def lookup(self, t: int):
        records = self.load()

        def gap(k: int) -> float | None:
            rec = records.get((t, k))
            return None if rec is None else rec.gap

        return gap

    def put(self, *records: GapCacheRecord) -> None:
        """Insert or replace records keyed by (t, k_terms)."""
        with self._locked():
            current = self.load()
            for rec in records:
                current[(rec.t, rec.k_terms)] = rec
            text = _render(current.values())
            fd, tmp = tempfile.mkstemp(dir=self.path.parent, prefix=self.path.name, suffix=".tmp")
            try:
                with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
                    fh.write(text)
                os.replace(tmp, self.path)
            except BaseException:
                if os.path.exists(tmp):
                    os.unlink(tmp)
                raise


def record_fields() -> tuple[str, ...]:
    return tuple(f.name for f in fields(GapCacheRecord))
