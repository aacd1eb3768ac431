"""Command-line front end: `dynmember run` and `dynmember bench`.

Exit codes: 0 ok, 1 failed expectation, 2 bad input, 3 internal breach.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from typing import Optional

from .automata import DTA, RDPDA, VPA, AutomatonError, load_automaton, vpa_as_rdpda
from .dcfl import dcfl_init
from .fixtures import dyck_final_state, dyck_vpa, parity_a
from .tree import TreeError, UnrankedTree
from .tree_engine import EngineConfig, InvariantError, engine_init
from .vpl import vpl_init
from .workbench import (ExpectationError, ScriptError, bench, dumps, oracle_check,
                        run_script)
from .zones import Theta

MODES = ("tree", "dcfl", "vpl")
KIND = {"tree": DTA, "dcfl": RDPDA, "vpl": VPA}
DEFAULTS = {"tree": parity_a, "dcfl": dyck_final_state, "vpl": dyck_vpa}


@dataclass
class CliConfig:
    mode: str
    automaton: Optional[str]
    script: Optional[str]
    theta: Theta
    seed: int = 0
    report: Optional[str] = None
    oracle_check: bool = False
    sizes: tuple = ()
    ops: int = 100
    fit: bool = False


def _machine(cfg: CliConfig):
    if cfg.automaton is None:
        return DEFAULTS[cfg.mode]()
    m = load_automaton(cfg.automaton)
    if cfg.mode == "dcfl" and isinstance(m, VPA):
        return vpa_as_rdpda(m)
    if not isinstance(m, KIND[cfg.mode]):
        raise AutomatonError(f"{cfg.automaton} holds a {type(m).__name__}, "
                             f"mode {cfg.mode} needs a {KIND[cfg.mode].__name__}")
    return m


def split_init(mode, script: str):
    """Peel the initial-structure directive off a script: `root <label>`
    for trees, `word <sym> ...` for strings (default: first symbol of the
    alphabet as root, or the empty word)."""
    lines = script.splitlines()
    for idx, raw in enumerate(lines):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        want = "root" if mode == "tree" else "word"
        if parts[0] == want:
            rest = "\n".join([""] * (idx + 1) + lines[idx + 1:])
            return parts[1:], rest
        break
    return None, script


def build_engine(mode, machine, init, theta: Theta):
    if mode == "tree":
        if init is not None and len(init) != 1:
            raise ScriptError("`root` takes exactly one label")
        label = init[0] if init else sorted(machine.alphabet)[0]
        return engine_init(UnrankedTree(label), machine, EngineConfig(theta))
    w = init or []
    if mode == "dcfl":
        return dcfl_init(w, machine, theta)
    return vpl_init(w, machine, theta)


def cmd_run(cfg: CliConfig) -> int:
    machine = _machine(cfg)
    with open(cfg.script, encoding="utf-8") as fh:
        script = fh.read()
    init, rest = split_init(cfg.mode, script)
    e = build_engine(cfg.mode, machine, init, cfg.theta)
    report = {"mode": cfg.mode, "theta": str(cfg.theta), "seed": cfg.seed,
              "automaton": cfg.automaton, "init_work": e.led.init_work}
    status = 0
    try:
        res = run_script(e, rest)
    except ExpectationError as exc:
        print(f"expectation failed: {exc}", file=sys.stderr)
        print(f"  expected: {str(exc.expected).lower()}\n  got:      {str(exc.got).lower()}",
              file=sys.stderr)
        report["failure"] = {"line": exc.lineno, "expected": exc.expected, "got": exc.got}
        res, status = None, 1
    if res is not None:
        report.update(res.report())
        if cfg.oracle_check:
            diff = oracle_check(res.engine, seed=cfg.seed)
            report["oracle_check"] = diff
            if diff:
                for d in diff[:20]:
                    print(f"oracle: {d}", file=sys.stderr)
                status = 3
    text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    if cfg.report:
        with open(cfg.report, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return status


def cmd_bench(cfg: CliConfig) -> int:
    sizes = list(cfg.sizes)
    if not sizes or any(b <= a for a, b in zip(sizes, sizes[1:])):
        raise ScriptError("sizes must be a non-empty ascending list")
    if cfg.ops < 1:
        raise ScriptError("ops per size must be at least 1")
    if cfg.fit and len(sizes) < 3:
        raise ScriptError("a fit needs at least 3 sizes")
    if cfg.mode == "tree":
        cfg.theta.require_tree()
    rows, fits = bench(cfg.mode, _machine(cfg), sizes, cfg.ops, cfg.theta, cfg.seed,
                       fit=cfg.fit)
    rows = rows + [{"fit": kind, "mode": cfg.mode, **f.as_dict()}
                   for kind, f in sorted(fits.items())]
    text = dumps(rows)
    if cfg.report:
        with open(cfg.report, "w", encoding="utf-8") as fh:
            fh.write(text)
    sys.stdout.write(text)
    return 0


def _sizes(text):
    try:
        return tuple(int(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad size list {text!r}") from None


def parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="dynmember",
                                 description="Dynamic membership engines for trees, DCFLs and VPLs")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in ("run", "bench"):
        p = sub.add_parser(name)
        p.add_argument("--mode", choices=MODES, required=True)
        p.add_argument("--automaton", help="automaton JSON file (default: a built-in fixture)")
        p.add_argument("--theta", default="1/4", help="theta as 1/h")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--report", help="write the report here")
        if name == "run":
            p.add_argument("--script", required=True)
            p.add_argument("--oracle-check", action="store_true",
                           help="diff every stored entry against the oracles afterwards")
        else:
            p.add_argument("--sizes", type=_sizes, required=True)
            p.add_argument("--ops", type=int, default=100)
            p.add_argument("--fit", action="store_true")
    return ap


def main(argv=None) -> int:
    args = parser().parse_args(argv)
    try:
        cfg = CliConfig(args.mode, args.automaton, getattr(args, "script", None),
                        Theta.parse(args.theta), args.seed, args.report,
                        getattr(args, "oracle_check", False), getattr(args, "sizes", ()),
                        getattr(args, "ops", 100), getattr(args, "fit", False))
        if cfg.mode == "tree":
            cfg.theta.require_tree()
        return cmd_run(cfg) if args.command == "run" else cmd_bench(cfg)
    except InvariantError as exc:
        print(f"internal invariant breach: {exc}", file=sys.stderr)
        return 3
    except (OSError, ValueError, TreeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
