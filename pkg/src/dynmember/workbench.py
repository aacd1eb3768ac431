"""Scripts, oracle diffs, random workloads and exponent fits."""

from __future__ import annotations

import json
import random
import statistics
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .automata import dta_run_oracle, oracle_A, oracle_B, vpa_accepts
from .dcfl import DCFLEngine, dcfl_init, dcfl_sweep
from .ledger import OpRecord, WorkLedger
from .tree import UnrankedTree
from .tree_engine import EngineConfig, TreeEngine, engine_init
from .vpl import Change, VPLEngine, VPLMinus, vpl_init, vpl_sweep
from .zones import Theta

__all__ = ["WorkLedger", "FitResult", "fit_exponent", "run_script", "oracle_check",
           "ScriptError", "ExpectationError", "ScriptResult", "bench", "random_instance"]


class ScriptError(ValueError):
    pass


class ExpectationError(AssertionError):
    def __init__(self, lineno, line, expected, got):
        self.lineno, self.line, self.expected, self.got = lineno, line, expected, got
        super().__init__(f"line {lineno}: {line!r}: expected {expected}, got {got}")


@dataclass
class FitResult:
    slope: float
    intercept: float
    residual: float

    def as_dict(self):
        return {"slope": self.slope, "intercept": self.intercept, "residual": self.residual}


def fit_exponent(points) -> FitResult:
    """Least squares of log(work) against log(n)."""
    pts = list(points)
    if len(pts) < 3:
        raise ValueError(f"need at least 3 sizes, got {len(pts)}")
    ns = [p[0] for p in pts]
    if any(b <= a for a, b in zip(ns, ns[1:])):
        raise ValueError("sizes must be strictly increasing")
    if any(n <= 0 or w <= 0 for n, w in pts):
        raise ValueError("sizes and work must be positive")
    x = np.log(np.asarray(ns, dtype=float))
    y = np.log(np.asarray([p[1] for p in pts], dtype=float))
    A = np.vstack([x, np.ones_like(x)]).T
    (slope, icpt), res, *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = float(np.sqrt(np.sum((A @ np.array([slope, icpt]) - y) ** 2)))
    return FitResult(float(slope), float(icpt), resid)


# -- scripts ------------------------------------------------------------------


@dataclass
class ScriptResult:
    records: list = field(default_factory=list)
    transcript: list = field(default_factory=list)
    engine: object = None

    def report(self) -> dict:
        return {"ops": [_rec_dict(r) for r in self.records], "transcript": self.transcript}


def _rec_dict(r: OpRecord) -> dict:
    return {"op": r.op, "work": r.work, "rounds": r.rounds,
            "threads-live": r.threads_live, "violations": r.violations}


def _lines(script: str):
    for lineno, raw in enumerate(script.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield lineno, line


def _expect(parts, lineno, line):
    """Strip a trailing `expect true|false`; returns (parts, expected)."""
    if "expect" not in parts:
        return parts, None
    i = parts.index("expect")
    if i != len(parts) - 2 or parts[-1] not in ("true", "false"):
        raise ScriptError(f"line {lineno}: malformed expect in {line!r}")
    return parts[:i], parts[-1] == "true"


def _int(tok, lineno):
    try:
        return int(tok)
    except ValueError:
        raise ScriptError(f"line {lineno}: expected an integer, got {tok!r}") from None


def run_script(engine, script: str) -> ScriptResult:
    """Run a change script against an engine; the first failing expect
    raises ExpectationError."""
    if isinstance(engine, TreeEngine):
        return _run_tree(engine, script)
    if isinstance(engine, (DCFLEngine, VPLEngine)):
        return _run_string(engine, script)
    raise ScriptError(f"no script runner for {type(engine).__name__}")


def _run_tree(e: TreeEngine, script: str) -> ScriptResult:
    res = ScriptResult(engine=e)
    names: dict[str, int] = {}

    def ref(tok, lineno):
        if tok.startswith("$"):
            if tok not in names:
                raise ScriptError(f"line {lineno}: unbound name {tok}")
            return names[tok]
        v = _int(tok, lineno)
        if not 0 <= v < e.t.size:
            raise ScriptError(f"line {lineno}: no node {v}")
        return v

    for lineno, line in _lines(script):
        parts, want = _expect(line.split(), lineno, line)
        cmd = parts[0]
        if cmd == "relabel" and len(parts) == 3:
            e.relabel(ref(parts[1], lineno), parts[2])
            res.transcript.append({"line": lineno, "op": "relabel"})
        elif cmd == "addchild" and len(parts) in (3, 5):
            v = e.add_child(ref(parts[1], lineno), parts[2])
            if len(parts) == 5:
                if parts[3] != "->" or not parts[4].startswith("$"):
                    raise ScriptError(f"line {lineno}: expected '-> $name'")
                names[parts[4]] = v
            res.transcript.append({"line": lineno, "op": "addchild", "node": v})
        elif cmd == "query" and len(parts) == 2:
            got = e.query(ref(parts[1], lineno))
            res.transcript.append({"line": lineno, "op": "query", "result": got})
            if want is not None and got != want:
                raise ExpectationError(lineno, line, want, got)
        else:
            raise ScriptError(f"line {lineno}: cannot parse {line!r}")
        res.records.append(e.led.records[-1])
    return res


def _run_string(e, script: str) -> ScriptResult:
    res = ScriptResult(engine=e)
    tree: Optional[VPLMinus] = None
    for lineno, line in _lines(script):
        parts, want = _expect(line.split(), lineno, line)
        cmd = parts[0]
        if cmd == "to-tree" and len(parts) == 1:
            if not isinstance(e, VPLEngine):
                raise ScriptError(f"line {lineno}: to-tree needs a VPL engine")
            h = max(4, e.theta.h)
            tree = VPLMinus(e.word, e.vpa, EngineConfig(Theta(h)))
            res.engine = tree
            res.transcript.append({"line": lineno, "op": "to-tree"})
            continue
        if tree is not None:
            _tree_step(tree, cmd, parts, want, lineno, line, res)
            continue
        if cmd == "relabel" and len(parts) == 3:
            e.relabel(_int(parts[1], lineno), parts[2])
            res.transcript.append({"line": lineno, "op": "relabel"})
        elif cmd in ("insert-before", "insert-after") and len(parts) == 3:
            e.insert(_int(parts[1], lineno), parts[2], cmd.split("-")[1])
            res.transcript.append({"line": lineno, "op": "insert"})
        elif cmd == "query" and len(parts) == 3:
            got = e.query(_int(parts[1], lineno), _int(parts[2], lineno))
            res.transcript.append({"line": lineno, "op": "query", "result": got})
            if want is not None and got != want:
                raise ExpectationError(lineno, line, want, got)
        else:
            raise ScriptError(f"line {lineno}: cannot parse {line!r}")
        res.records.append(e.led.records[-1])
    return res


def _tree_step(d: VPLMinus, cmd, parts, want, lineno, line, res):
    """String commands on the nesting tree of a well-formed word."""
    led = d.engine.led
    if cmd == "relabel" and len(parts) == 3:
        recs = d.apply(Change("replace", _int(parts[1], lineno), parts[2]))
    elif cmd in ("insert-before", "insert-after") and len(parts) == 3:
        i = _int(parts[1], lineno) + (cmd == "insert-after")
        recs = d.apply(Change("insert", i, parts[2]))
    elif cmd == "expand" and len(parts) == 4:
        recs = d.apply(Change("expand", _int(parts[1], lineno), parts[2], parts[3]))
    elif cmd == "query" and len(parts) in (1, 3):
        if len(parts) == 1:
            got = d.query()
        else:
            i, j = _int(parts[1], lineno), _int(parts[2], lineno)
            if (i, j) == (1, len(d.w)):
                got = d.query()
            elif 1 <= i <= len(d.w) and d.span(i) == (i, j):
                got = d.query_pair(i)
            else:
                raise ScriptError(f"line {lineno}: [{i}, {j}] is not a factor of the tree")
        res.transcript.append({"line": lineno, "op": "query", "result": got})
        res.records.append(led.records[-1])
        if want is not None and got != want:
            raise ExpectationError(lineno, line, want, got)
        return
    else:
        raise ScriptError(f"line {lineno}: cannot parse {line!r} on the tree")
    res.transcript.append({"line": lineno, "op": cmd})
    res.records.extend(recs)


# -- oracle diffs -----------------------------------------------------------------


def _tree_check(e: TreeEngine) -> list[str]:
    t, dta, A = e.t, e.dta, e.A
    rho = dta_run_oracle(dta, t)
    out = []
    for R in e.primary_records():
        if not (R.alive and R.filled):
            continue
        for (x, y), f in R.hp.items():
            for p in range(A.na):
                got = A.a_names[p if f is None else f[p]]
                want = oracle_A(dta, t, rho, A.a_names[p], x, y)
                if got != want:
                    out.append(f"zone R{R.rid} pair A({x},{y}) state {A.a_names[p]}: "
                               f"stored {got}, oracle {want}")
        for (u, v), f in R.vp.items():
            for q in range(A.nb):
                got = A.b_names[q if f is None else f[q]]
                want = oracle_B(dta, t, rho, A.b_names[q], u, v)
                if got != want:
                    out.append(f"zone R{R.rid} pair B({u},{v}) state {A.b_names[q]}: "
                               f"stored {got}, oracle {want}")
    # queries here are diagnostics: leave the ledger as it was
    kept, init = len(e.led.records), e.led.init_work
    for v in t.nodes():
        if e.query(v) != (rho[v] in dta.final):
            out.append(f"query({v}) differs from the oracle")
    del e.led.records[kept:]
    e.led.init_work = init
    return out


def oracle_check(engine, exhaustive_limit: int = 24, samples: int = 10_000, seed=0) -> list[str]:
    """Every stored entry against its oracle; sampled above the limit for
    string engines.  Empty iff sound."""
    if isinstance(engine, TreeEngine):
        return _tree_check(engine)
    rng = random.Random(seed)
    if isinstance(engine, DCFLEngine):
        small = len(engine.w) <= exhaustive_limit
        r = dcfl_sweep(engine) if small else dcfl_sweep(engine, rng, samples)
        return list(r.mismatches)
    if isinstance(engine, VPLEngine):
        small = len(engine.w) <= exhaustive_limit
        r = vpl_sweep(engine) if small else vpl_sweep(engine, rng, samples)
        return list(r.mismatches)
    if isinstance(engine, VPLMinus):
        out = []
        if engine.query() != vpa_accepts(engine.vpa, engine.w):
            out.append("whole-word membership differs from the oracle")
        return out + _tree_check(engine.engine)
    raise TypeError(f"no oracle for {type(engine).__name__}")


# -- random workloads ---------------------------------------------------------------


def random_tree(rng, size, alphabet) -> UnrankedTree:
    t = UnrankedTree(rng.choice(alphabet))
    for _ in range(size - 1):
        t.attach_last_child(rng.randrange(t.size), rng.choice(alphabet))
    return t


def _alphabet(machine):
    return sorted(machine.alphabet)


def random_instance(mode, machine, n, theta: Theta, rng):
    """Engine on a uniform random structure of size n/3."""
    size = max(1, n // 3)
    sig = _alphabet(machine)
    if mode == "tree":
        return engine_init(random_tree(rng, size, sig), machine, EngineConfig(theta))
    w = [rng.choice(sig) for _ in range(size)]
    if mode == "dcfl":
        return dcfl_init(w, machine, theta)
    if mode == "vpl":
        return vpl_init(w, machine, theta)
    raise ValueError(f"unknown mode {mode!r}")


DEFAULT_MIX = {"tree": {"relabel": 0.5, "addchild": 0.5},
               "dcfl": {"relabel": 0.5, "insert": 0.5},
               "vpl": {"relabel": 0.5, "insert": 0.5}}


def random_change(mode, e, sig, rng, mix):
    kinds, weights = zip(*mix.items())
    kind = rng.choices(kinds, weights)[0]
    if mode == "tree":
        v = rng.randrange(e.t.size)
        if kind == "relabel":
            e.relabel(v, rng.choice(sig))
        else:
            e.add_child(v, rng.choice(sig))
        return e.led.records[-1]
    L = len(e.w)
    if kind == "relabel" and L:
        e.relabel(rng.randint(1, L), rng.choice(sig))
    else:
        e.insert(rng.randint(1, max(L, 1)), rng.choice(sig), rng.choice(("before", "after")))
    return e.led.records[-1]


def bench(mode, machine, sizes, ops, theta: Theta, seed=0, mix=None, fit=False):
    """JSON-ready records, one per (n, op kind), plus fits per op kind."""
    mix = mix or DEFAULT_MIX[mode]
    rng = random.Random(seed)
    sig = _alphabet(machine)
    rows, per_kind = [], {}
    for n in sizes:
        e = random_instance(mode, machine, n, theta, rng)
        works: dict[str, list[int]] = {}
        for _ in range(ops):
            r = random_change(mode, e, sig, rng, mix)
            works.setdefault(r.op, []).append(r.work)
        for kind in sorted(works):
            ws = works[kind]
            rec = {"mode": mode, "n": n, "op": kind, "count": len(ws),
                   "mean": statistics.fmean(ws), "median": statistics.median(ws),
                   "max": max(ws), "seed": seed, "theta": str(theta)}
            rows.append(rec)
            per_kind.setdefault(kind, []).append((n, rec["mean"]))
        allw = [w for ws in works.values() for w in ws]
        per_kind.setdefault("all", []).append((n, statistics.fmean(allw)))
    fits = {}
    if fit:
        for kind, pts in per_kind.items():
            if len(pts) == len(sizes):
                fits[kind] = fit_exponent(pts)
    return rows, fits


def dumps(rows) -> str:
    return "".join(json.dumps(r, sort_keys=True) + "\n" for r in rows)
