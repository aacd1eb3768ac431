"""Automaton descriptors and full-recomputation evaluators.

Three machine kinds are supported: deterministic bottom-up tree automata
with a horizontal DFA (DTA), realtime deterministic pushdown automata
(RDPDA) and visibly pushdown automata (VPA).  Stacks are always written
top-first, as tuples of stack symbols.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

from .tree import UnrankedTree, TreeError


class AutomatonError(ValueError):
    def __init__(self, errors):
        if isinstance(errors, str):
            errors = [errors]
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


class AlphabetError(AutomatonError):
    pass


# -- DTA ----------------------------------------------------------------------

@dataclass(frozen=True)
class DTA:
    b_states: tuple
    a_states: tuple
    alphabet: tuple
    delta: Mapping          # (a_state, symbol) -> b_state
    horizontal: Mapping     # (a_state, b_state) -> a_state
    start: str
    final: frozenset

    def step(self, p, q):
        return self.horizontal[(p, q)]

    def leaf_state(self, sym):
        return self.delta[(self.start, sym)]


def make_dta(b_states, a_states, delta, horizontal, start, final, alphabet=None) -> DTA:
    delta = {tuple(k): v for k, v in dict(delta).items()}
    horizontal = {tuple(k): v for k, v in dict(horizontal).items()}
    if alphabet is None:
        alphabet = sorted({s for (_, s) in delta})
    return DTA(tuple(b_states), tuple(a_states), tuple(alphabet), delta,
               horizontal, start, frozenset(final))


def dta_run_oracle(dta: DTA, t: UnrankedTree) -> dict[int, str]:
    rho: dict[int, str] = {}
    for v in t.postorder():
        sym = t.label[v]
        if sym not in dta.alphabet:
            raise AlphabetError(f"label {sym!r} of node {v} not in the alphabet")
        p = dta.start
        for c in t.children(v):
            p = dta.horizontal[(p, rho[c])]
        rho[v] = dta.delta[(p, sym)]
    return rho


def dta_accepts_subtree(dta: DTA, t: UnrankedTree, v: int, rho=None) -> bool:
    if rho is None:
        rho = dta_run_oracle(dta, t)
    return rho[v] in dta.final


def oracle_A(dta: DTA, t: UnrankedTree, rho, p, u: int, v: int):
    """State of the horizontal DFA after reading rho(u)..rho(v) from p."""
    for x in t.siblings_between(u, v):
        p = dta.horizontal[(p, rho[x])]
    return p


def oracle_B(dta: DTA, t: UnrankedTree, rho, q, u: int, v: int):
    """State at ancestor v when the state at u is replaced by q."""
    x = u
    while x != v:
        par = t.parent[x]
        if par is None:
            raise TreeError(f"{v} is not an ancestor of {u}")
        p = dta.start
        for c in t.children(par):
            p = dta.horizontal[(p, q if c == x else rho[c])]
        q = dta.delta[(p, t.label[par])]
        x = par
    return q


# -- RDPDA --------------------------------------------------------------------

@dataclass(frozen=True)
class RDPDA:
    states: tuple
    alphabet: tuple
    stack_alphabet: tuple
    start: str
    start_stack: str
    delta: Mapping          # (state, symbol, top) -> (state, push tuple top-first)
    final: frozenset


@dataclass(frozen=True)
class RunSummary:
    end_state: Optional[str]
    end_stack: tuple
    empty_pos: int
    defined_len: int

    @property
    def top(self):
        return self.end_stack[0] if self.end_stack else None


def _as_stack(s) -> tuple:
    if isinstance(s, str):
        return tuple(s)
    return tuple(s)


def make_rdpda(states, alphabet, stack_alphabet, start, start_stack, delta, final) -> RDPDA:
    d = {}
    for k, (q, push) in dict(delta).items():
        d[tuple(k)] = (q, _as_stack(push))
    return RDPDA(tuple(states), tuple(alphabet), tuple(stack_alphabet), start,
                 start_stack, d, frozenset(final))


def rdpda_run_oracle(pda: RDPDA, p, u: Sequence, s0) -> RunSummary:
    stack = list(_as_stack(s0))
    state = p
    for i, a in enumerate(u, 1):
        if not stack:
            break
        tr = pda.delta.get((state, a, stack[0]))
        if tr is None:
            return RunSummary(None, tuple(stack), 0, i - 1)
        state, push = tr
        stack[0:1] = list(push)
        if not stack:
            return RunSummary(state, (), i, i)
    return RunSummary(state, tuple(stack), 0, len(u))


def rdpda_accepts(pda: RDPDA, w: Sequence) -> bool:
    r = rdpda_run_oracle(pda, pda.start, w, (pda.start_stack,))
    return (r.defined_len == len(w) and r.end_state is not None
            and r.end_state in pda.final and (r.empty_pos in (0, len(w))))


# -- VPA ----------------------------------------------------------------------

BOTTOM = "#"


@dataclass(frozen=True)
class VPA:
    states: tuple
    calls: frozenset
    returns: frozenset
    internals: frozenset
    stack_alphabet: tuple
    start: str
    delta_c: Mapping        # (state, call) -> (state, stack symbol)
    delta_r: Mapping        # (state, return, stack symbol) -> state
    delta_int: Mapping      # (state, internal) -> state
    final: frozenset

    def kind(self, a) -> str:
        if a in self.calls:
            return "call"
        if a in self.returns:
            return "return"
        if a in self.internals:
            return "internal"
        raise AlphabetError(f"symbol {a!r} not in the pushdown alphabet")

    @property
    def alphabet(self):
        return tuple(sorted(self.calls)) + tuple(sorted(self.returns)) + tuple(sorted(self.internals))

    def step(self, q, stack: tuple, a):
        """One move; returns (state, stack)."""
        k = self.kind(a)
        if k == "call":
            q2, g = self.delta_c[(q, a)]
            return q2, (g,) + stack
        if k == "return":
            top = stack[0]
            q2 = self.delta_r[(q, a, top)]
            return q2, (stack if top == BOTTOM else stack[1:])
        return self.delta_int[(q, a)], stack


def make_vpa(states, calls, returns, internals, stack_alphabet, start,
             delta_c, delta_r, delta_int, final) -> VPA:
    return VPA(tuple(states), frozenset(calls), frozenset(returns),
               frozenset(internals), tuple(stack_alphabet), start,
               {tuple(k): tuple(v) for k, v in dict(delta_c).items()},
               {tuple(k): v for k, v in dict(delta_r).items()},
               {tuple(k): v for k, v in dict(delta_int).items()},
               frozenset(final))


def vpa_run_oracle(vpa: VPA, w: Sequence, q=None, stack=(BOTTOM,)):
    q = vpa.start if q is None else q
    stack = tuple(stack)
    for a in w:
        q, stack = vpa.step(q, stack, a)
    return q, stack


def vpa_accepts(vpa: VPA, w: Sequence) -> bool:
    return vpa_run_oracle(vpa, w)[0] in vpa.final


def vpa_as_rdpda(vpa: VPA) -> RDPDA:
    """The same machine seen as a realtime DPDA (a return on # keeps #)."""
    delta = {}
    for q in vpa.states:
        for g in vpa.stack_alphabet:
            for a in vpa.calls:
                q2, push = vpa.delta_c[(q, a)]
                delta[(q, a, g)] = (q2, (push, g))
            for a in vpa.returns:
                q2 = vpa.delta_r[(q, a, g)]
                delta[(q, a, g)] = (q2, (g,) if g == BOTTOM else ())
            for a in vpa.internals:
                delta[(q, a, g)] = (vpa.delta_int[(q, a)], (g,))
    return RDPDA(vpa.states, vpa.alphabet, vpa.stack_alphabet, vpa.start,
                 BOTTOM, delta, vpa.final)


# -- validation ---------------------------------------------------------------

def validate_automaton(desc) -> list[str]:
    """Empty list when the descriptor satisfies all of its invariants."""
    errs: list[str] = []
    if isinstance(desc, DTA):
        qb, qa = set(desc.b_states), set(desc.a_states)
        if desc.start not in qa:
            errs.append(f"start state {desc.start!r} not an A-state")
        if not desc.final <= qb:
            errs.append(f"final states {sorted(desc.final - qb)} not B-states")
        for p in desc.a_states:
            for s in desc.alphabet:
                q = desc.delta.get((p, s))
                if q is None:
                    errs.append(f"totality: delta missing ({p}, {s})")
                elif q not in qb:
                    errs.append(f"delta({p}, {s}) = {q!r} not a B-state")
            for q in desc.b_states:
                r = desc.horizontal.get((p, q))
                if r is None:
                    errs.append(f"totality: horizontal delta missing ({p}, {q})")
                elif r not in qa:
                    errs.append(f"horizontal delta({p}, {q}) = {r!r} not an A-state")
    elif isinstance(desc, RDPDA):
        if desc.start not in desc.states:
            errs.append("start state unknown")
        if desc.start_stack not in desc.stack_alphabet:
            errs.append("start stack symbol unknown")
        if not desc.final <= set(desc.states):
            errs.append("final states unknown")
        for (p, a, g), (q, push) in desc.delta.items():
            if a == "" or a is None:
                errs.append(f"realtime: lambda transition from {p}")
            if p not in desc.states or q not in desc.states:
                errs.append(f"unknown state in transition ({p}, {a}, {g})")
            if a not in desc.alphabet:
                errs.append(f"unknown input symbol {a!r}")
            if g not in desc.stack_alphabet or any(x not in desc.stack_alphabet for x in push):
                errs.append(f"unknown stack symbol in transition ({p}, {a}, {g})")
            if len(push) > 2:
                errs.append(f"normalization: transition ({p}, {a}, {g}) pushes "
                            f"{len(push)} symbols; |gamma| <= 2 is required")
    elif isinstance(desc, VPA):
        if desc.calls & desc.returns or desc.calls & desc.internals or desc.returns & desc.internals:
            errs.append("alphabet overlap between calls, returns and internals")
        if BOTTOM not in desc.stack_alphabet:
            errs.append("stack alphabet lacks the bottom symbol #")
        if desc.start not in desc.states:
            errs.append("start state unknown")
        if not desc.final <= set(desc.states):
            errs.append("final states unknown")
        for q in desc.states:
            for a in desc.calls:
                tr = desc.delta_c.get((q, a))
                if tr is None:
                    errs.append(f"totality: call transition missing ({q}, {a})")
                elif tr[1] == BOTTOM:
                    errs.append(f"call transition ({q}, {a}) pushes #")
            for a in desc.returns:
                for g in desc.stack_alphabet:
                    if (q, a, g) not in desc.delta_r:
                        errs.append(f"totality: return transition missing ({q}, {a}, {g})")
            for a in desc.internals:
                if (q, a) not in desc.delta_int:
                    errs.append(f"totality: internal transition missing ({q}, {a})")
    else:
        errs.append(f"unknown descriptor type {type(desc).__name__}")
    return errs


def ensure_valid(desc):
    errs = validate_automaton(desc)
    if errs:
        raise AutomatonError(errs)
    return desc


# -- JSON files ---------------------------------------------------------------

def _pairs(nested: Mapping) -> dict:
    return {(a, b): v for a, row in nested.items() for b, v in row.items()}


def automaton_from_json(doc: Mapping):
    kind = doc.get("kind")
    if kind is None:
        if "b_states" in doc:
            kind = "dta"
        elif "calls" in doc:
            kind = "vpa"
        else:
            kind = "rdpda"
    try:
        if kind == "dta":
            return make_dta(doc["b_states"], doc["a_states"], _pairs(doc["delta"]),
                            _pairs(doc["horizontal_delta"]), doc["start"], doc["final"],
                            doc.get("alphabet"))
        if kind == "rdpda":
            delta = {}
            for p, row in doc["delta"].items():
                for a, row2 in row.items():
                    for g, (q, push) in row2.items():
                        delta[(p, a, g)] = (q, push)
            return make_rdpda(doc["states"], doc["alphabet"], doc["stack_alphabet"],
                              doc["start"], doc["start_stack"], delta, doc["final"])
        if kind == "vpa":
            dr = {}
            for p, row in doc["delta_r"].items():
                for a, row2 in row.items():
                    for g, q in row2.items():
                        dr[(p, a, g)] = q
            return make_vpa(doc["states"], doc["calls"], doc["returns"], doc["internals"],
                            doc["stack_alphabet"], doc["start"], _pairs(doc["delta_c"]),
                            dr, _pairs(doc["delta_int"]), doc["final"])
    except (KeyError, TypeError, ValueError) as exc:
        raise AutomatonError(f"malformed {kind} document: {exc!r}") from exc
    raise AutomatonError(f"unknown automaton kind {kind!r}")


def _nest(flat: Mapping) -> dict:
    out: dict = {}
    for (a, b), v in flat.items():
        out.setdefault(a, {})[b] = v
    return out


def automaton_to_json(desc) -> dict:
    if isinstance(desc, DTA):
        return {"kind": "dta", "b_states": list(desc.b_states), "a_states": list(desc.a_states),
                "alphabet": list(desc.alphabet), "delta": _nest(desc.delta),
                "horizontal_delta": _nest(desc.horizontal), "start": desc.start,
                "final": sorted(desc.final)}
    if isinstance(desc, RDPDA):
        d: dict = {}
        for (p, a, g), (q, push) in desc.delta.items():
            d.setdefault(p, {}).setdefault(a, {})[g] = [q, list(push)]
        return {"kind": "rdpda", "states": list(desc.states), "alphabet": list(desc.alphabet),
                "stack_alphabet": list(desc.stack_alphabet), "start": desc.start,
                "start_stack": desc.start_stack, "delta": d, "final": sorted(desc.final)}
    if isinstance(desc, VPA):
        dr: dict = {}
        for (p, a, g), q in desc.delta_r.items():
            dr.setdefault(p, {}).setdefault(a, {})[g] = q
        return {"kind": "vpa", "states": list(desc.states), "calls": sorted(desc.calls),
                "returns": sorted(desc.returns), "internals": sorted(desc.internals),
                "stack_alphabet": list(desc.stack_alphabet), "start": desc.start,
                "delta_c": {p: {a: list(v) for a, v in row.items()} for p, row in _nest(desc.delta_c).items()},
                "delta_r": dr, "delta_int": _nest(desc.delta_int), "final": sorted(desc.final)}
    raise AutomatonError(f"cannot serialize {type(desc).__name__}")


def load_automaton(path) -> object:
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise AutomatonError(f"{path}: not JSON ({exc})") from exc
    return ensure_valid(automaton_from_json(doc))
