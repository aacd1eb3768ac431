"""Work accounting.

One unit of work is one stored-table entry read or written, or one
primitive step such as following a node pointer.  Engines open a record
per operation and charge into it; oracle code never charges.
"""

from __future__ import annotations

import statistics
from dataclasses import dataclass, field, asdict


@dataclass
class OpRecord:
    op: str
    touched: int = 0
    steps: int = 0
    rounds: int = 0
    threads_live: int = 0
    violations: int = 0

    @property
    def work(self) -> int:
        return self.touched + self.steps

    def as_dict(self) -> dict:
        d = asdict(self)
        d["work"] = self.work
        return d


@dataclass
class WorkLedger:
    records: list = field(default_factory=list)
    init_work: int = 0
    _cur: OpRecord | None = None

    def begin(self, op: str) -> OpRecord:
        self._cur = OpRecord(op)
        return self._cur

    def end(self, threads_live: int = 0, violations: int = 0) -> OpRecord:
        rec = self._cur
        if rec is None:
            raise RuntimeError("no open ledger record")
        rec.threads_live = threads_live
        rec.violations = violations
        self.records.append(rec)
        self._cur = None
        return rec

    @property
    def open(self) -> bool:
        return self._cur is not None

    def touch(self, k: int = 1):
        if self._cur is not None:
            self._cur.touched += k
        else:
            self.init_work += k

    def step(self, k: int = 1):
        if self._cur is not None:
            self._cur.steps += k
        else:
            self.init_work += k

    def round(self, k: int = 1):
        if self._cur is not None:
            self._cur.rounds += k

    def __len__(self):
        return len(self.records)

    def by_op(self) -> dict[str, list[OpRecord]]:
        out: dict[str, list[OpRecord]] = {}
        for r in self.records:
            out.setdefault(r.op, []).append(r)
        return out

    def summary(self) -> dict[str, dict]:
        out = {}
        for op, recs in sorted(self.by_op().items()):
            w = [r.work for r in recs]
            out[op] = {"count": len(w), "mean": statistics.fmean(w),
                       "median": statistics.median(w), "max": max(w)}
        return out
