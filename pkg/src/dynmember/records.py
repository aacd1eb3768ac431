"""Zone records of the dynamic tree engine and the routines that fill them.

A record stores, for its special pairs of nodes, the horizontal state
functions (x, y) -> A(., x, y) and the vertical ones (u, v) -> B(., u, v)
with v an ancestor of u.  Functions are tuples indexed by integer states.
Pairs are computed bottom-up from the units of the record: single nodes
for base records, child records otherwise.
"""

from __future__ import annotations

from typing import Optional

import numpy as np

from .automata import DTA
from .tree import UnrankedTree


class IntDTA:
    """A DTA with states renumbered 0..k-1."""

    def __init__(self, dta: DTA):
        self.dta = dta
        self.b_names = list(dta.b_states)
        self.a_names = list(dta.a_states)
        self.bi = {q: i for i, q in enumerate(self.b_names)}
        self.ai = {p: i for i, p in enumerate(self.a_names)}
        self.nb = len(self.b_names)
        self.na = len(self.a_names)
        self.start = self.ai[dta.start]
        self.final = {self.bi[q] for q in dta.final}
        # delta[sym][p] -> q ; hor[p][q] -> p'
        self.delta = {s: tuple(self.bi[dta.delta[(p, s)]] for p in self.a_names)
                      for s in dta.alphabet}
        self.hor = [tuple(self.ai[dta.horizontal[(p, q)]] for q in self.b_names)
                    for p in self.a_names]
        self.id_a = tuple(range(self.na))
        self.id_b = tuple(range(self.nb))


def compose(f, g):
    """First f, then g.  None stands for the identity."""
    if f is None:
        return g
    if g is None:
        return f
    return tuple(g[x] for x in f)


def ap(f, x):
    return x if f is None else f[x]


class Record:
    __slots__ = ("rid", "level", "left", "right", "lower", "upper", "parent",
                 "units", "nodes", "loc", "size", "alive", "primary", "filled",
                 "thread", "hp", "vp", "ntops", "zleft", "zdesc", "ztop",
                 "tf", "uidx", "lower_unit", "base")

    def __init__(self, rid, level, left, right, lower, upper, parent=None):
        self.rid = rid
        self.level = level
        self.left = left
        self.right = right
        self.lower = lower
        self.upper = upper
        self.parent: Optional[Record] = parent
        self.units: list[Record] = []
        self.nodes: list[int] = []
        self.loc: dict[int, int] = {}
        self.size = 0
        self.alive = True
        self.primary = False
        self.filled = False
        self.thread = None
        self.hp: dict = {}
        self.vp: dict = {}
        self.ntops = 0
        self.zleft = 0
        self.zdesc = 0
        self.ztop = None
        self.tf = None
        self.uidx: dict[int, int] = {}
        self.lower_unit = -1
        self.base = False

    def __repr__(self):
        low = "" if self.lower is None else f"[{self.lower}]"
        return f"R{self.rid}<L{self.level} {self.left}..{self.right}{low} |{self.size}|>"


# -- automata tables -----------------------------------------------------------

def fill_pairs(rec: Record, t: UnrankedTree, A: IntDTA, base: bool, led=None):
    """Recompute rec.hp and rec.vp from its units.  Returns the work spent."""
    label, parent, nlsib = t.label, t.parent, t.nlsib
    lsib, rsib = t.lsib, t.rsib
    hor = A.hor
    zl = rec.lower
    work = 0
    # units: left, right, lower, upper, hl, hr, V, H
    if base:
        nodes = rec.nodes
        n_u = len(nodes)
        U_left = nodes
        U_right = nodes
        U_lower = nodes
        U_upper = nodes
        U_hl = U_hr = U_V = [None] * n_u
        U_H = [None] * n_u
        by_lower = rec.loc
    else:
        units = rec.units
        n_u = len(units)
        U_left = [X.left for X in units]
        U_right = [X.right for X in units]
        U_lower = [X.lower for X in units]
        U_upper = [X.upper for X in units]
        U_hl, U_hr, U_V, U_H = [], [], [], []
        for X in units:
            if X.lower is None:
                U_hl.append(None)
                U_hr.append(None)
                U_V.append(None)
                U_H.append(X.hp[(X.left, X.right)])
            else:
                up = X.upper
                U_hl.append(None if up == X.left else X.hp[(X.left, lsib[up])])
                U_hr.append(None if up == X.right else X.hp[(rsib[up], X.right)])
                U_V.append(None if up == X.lower else X.vp[(X.lower, up)])
                U_H.append(None)
            work += 3
        by_lower = {X.lower: i for i, X in enumerate(units) if X.lower is not None}
    # runs of units keyed by the common parent of their tops
    runs: dict = {}
    if base:
        for i, x in enumerate(nodes):
            p = parent[x]
            runs.setdefault(p if p in by_lower else ("top",), []).append(i)
    else:
        for i in range(n_u):
            p = parent[U_left[i]]
            runs.setdefault(p if p in by_lower else ("top",), []).append(i)
    for key, r in runs.items():
        r.sort(key=lambda i: nlsib[U_left[i]])
    # bottom-up order
    order = []
    stack = list(runs.get(("top",), ()))
    while stack:
        i = stack.pop()
        order.append(i)
        lo = U_lower[i]
        if lo is not None and lo != zl:
            stack.extend(runs.get(lo, ()))
    rho = [None] * n_u
    F = [None] * n_u
    na = A.na
    start = A.start
    for i in reversed(order):
        lo = U_lower[i]
        if lo is None:
            F[i] = U_H[i]
            continue
        if lo == zl:
            continue
        p = start
        ok = True
        for c in runs.get(lo, ()):
            f = F[c]
            if f is None:
                ok = False
                break
            p = f[p]
        work += 1 + len(runs.get(lo, ()))
        if not ok:
            continue
        q = A.delta[label[lo]][p]
        rho[i] = q
        qv = ap(U_V[i], q)
        hl, hr = U_hl[i], U_hr[i]
        F[i] = tuple(ap(hr, hor[ap(hl, a)][qv]) for a in range(na))
        work += na
    hp = {}
    vp = {}
    # horizontal pairs
    pre_state = {}
    suf_fun = {}
    hole = {}
    for key, r in runs.items():
        k = len(r)
        hidx = None
        for pos, i in enumerate(r):
            if F[i] is None:
                hidx = pos
                break
        hole[key] = hidx
        for a in range(k):
            acc = None
            ia = r[a]
            for b in range(a, k):
                ib = r[b]
                f = F[ib]
                if f is None:
                    w = U_upper[ib]
                    if w != U_left[ia]:
                        hp[(U_left[ia], lsib[w])] = compose(acc, U_hl[ib]) or A.id_a
                        work += na
                    break
                acc = compose(acc, f)
                hp[(U_left[ia], U_right[ib])] = acc
                work += na
        if hidx is not None:
            ic = r[hidx]
            w = U_upper[ic]
            if w != U_right[ic]:
                acc = U_hr[ic]
                hp[(rsib[w], U_right[ic])] = acc or A.id_a
                work += na
                for b in range(hidx + 1, k):
                    acc = compose(acc, F[r[b]])
                    hp[(rsib[w], U_right[r[b]])] = acc
                    work += na
        # prefix states and suffix functions for the vertical pass
        ps = [start]
        for i in r:
            f = F[i]
            ps.append(None if f is None or ps[-1] is None else f[ps[-1]])
        sf = [None] * (k + 1)
        acc = None
        for pos in range(k - 1, -1, -1):
            f = F[r[pos]]
            if f is None:
                acc = "undef"
            elif acc != "undef":
                acc = compose(f, acc)
            sf[pos] = acc
        pos_of = {i: pos for pos, i in enumerate(r)}
        for i in r:
            pre_state[i] = (key, pos_of[i], ps, sf)
    # vertical pairs
    nb = A.nb
    for i0 in range(n_u):
        u = U_lower[i0]
        if u is None:
            continue
        g = U_V[i0]
        cur = i0
        if U_upper[cur] != u:
            vp[(u, U_upper[cur])] = g
            work += nb
        while True:
            P = parent[U_upper[cur]]
            if P is None or P not in by_lower:
                break
            key, pos, ps, sf = pre_state[cur]
            hidx = hole[key]
            if hidx is not None and hidx != pos:
                break
            pre = ps[pos]
            suf = sf[pos + 1]
            hl, hr = U_hl[cur], U_hr[cur]
            base_p = ap(hl, pre)
            dl = A.delta[label[P]]
            step = tuple(dl[ap(suf, ap(hr, hor[base_p][y]))] for y in range(nb))
            g = compose(g, step)
            vp[(u, P)] = g
            work += nb
            cur = by_lower[P]
            if U_V[cur] is not None:
                g = compose(g, U_V[cur])
            if U_upper[cur] != P:
                vp[(u, U_upper[cur])] = g
                work += nb
    rec.hp = hp
    rec.vp = vp
    if led is not None:
        led.touch(work)
    return work
