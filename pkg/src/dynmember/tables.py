"""Stored tree-function tables.

Base records keep node-pair tables (ancestor, ancestor child, lca,
sibling order, descendant counts inside the record).  Higher records keep
the same kind of tables over their units.  AddChild updates both in place.
"""

from __future__ import annotations

import numpy as np

from .tree import UnrankedTree

NONE = -1


class BaseTables:
    """Node-pair tables of a base record.  Local index i refers to
    rec.nodes[i]; node ids are stored, with NONE for missing values."""

    def __init__(self, rec, t: UnrankedTree):
        self.rec = rec
        nodes = rec.nodes
        n = len(nodes)
        cap = max(8, 2 * n)
        self.cap = cap
        self.n = n
        self.anc = np.zeros((cap, cap), dtype=bool)
        self.ach = np.full((cap, cap), NONE, dtype=np.int64)
        self.lca = np.full((cap, cap), NONE, dtype=np.int64)
        self.prec = np.zeros((cap, cap), dtype=bool)
        self.desc = np.zeros((cap, cap), dtype=np.int64)
        self.par = np.full(cap, NONE, dtype=np.int64)
        self.topanc = np.full(cap, NONE, dtype=np.int64)
        loc = rec.loc
        lower = rec.lower
        # rec.nodes is in preorder, so subtrees are index ranges
        sz = [1] * n
        for i in range(n - 1, -1, -1):
            x = nodes[i]
            if x != lower:
                for c in t.children(x):
                    sz[i] += sz[loc[c]]
        self.work = n * n
        for i, x in enumerate(nodes):
            p = t.parent[x]
            self.par[i] = NONE if p is None else p
            hi = i + sz[i]
            if p is not None and p in loc:
                ip = loc[p]
                self.lca[i, :n] = self.lca[ip, :n]
                self.topanc[i] = self.topanc[ip]
            else:
                self.lca[i, :n] = NONE if p is None else p
                self.topanc[i] = x
            self.lca[i, i:hi] = x
            self.anc[i, i + 1:hi] = True
            if x != lower:
                for c in t.children(x):
                    ic = loc[c]
                    self.ach[i, ic:ic + sz[ic]] = c
        # sibling runs (children of one node, or the tops)
        runs = {}
        for i, x in enumerate(nodes):
            runs.setdefault(self.par[i] if self.par[i] in loc else "top", []).append(i)
        for r in runs.values():
            for a, ia in enumerate(r):
                for ib in r[a:]:
                    if ib != ia:
                        self.prec[ia, ib] = True
                    self.desc[ia, ib] = ib + sz[ib] - ia

    def _grow(self):
        old = self.cap
        cap = 2 * old
        for name, fill in (("anc", False), ("ach", NONE), ("lca", NONE),
                           ("prec", False), ("desc", 0)):
            a = getattr(self, name)
            b = np.full((cap, cap), fill, dtype=a.dtype)
            b[:old, :old] = a
            setattr(self, name, b)
        for name in ("par", "topanc"):
            a = getattr(self, name)
            b = np.full(cap, NONE, dtype=a.dtype)
            b[:old] = a
            setattr(self, name, b)
        self.cap = cap

    def add(self, v: int, u: int, c) -> int:
        """Node v was appended as last child of u; its old last child was c.
        rec.loc/nodes already contain v.  Returns the work spent."""
        if self.n >= self.cap:
            self._grow()
        loc = self.rec.loc
        n = self.n
        iv = n
        self.n = n + 1
        self.par[iv] = u
        inside = u in loc
        col = slice(0, n)
        if inside:
            iu = loc[u]
            a_u = self.anc[:n, iu].copy()
            self.anc[:n, iv] = a_u
            self.anc[iu, iv] = True
            self.ach[:n, iv] = np.where(a_u, self.ach[:n, iu], NONE)
            self.ach[iu, iv] = v
            sub_u = self.anc[iu, :n].copy()
            sub_u[iu] = True
            lc = np.where(sub_u, u, self.lca[:n, iu])
            self.topanc[iv] = self.topanc[iu]
        else:
            lc = np.full(n, u, dtype=np.int64)
            self.topanc[iv] = v
        self.lca[:n, iv] = lc
        self.lca[iv, :n] = lc
        self.lca[iv, iv] = v
        sib = self.par[:n] == u
        self.prec[:n, iv] = sib
        # new sibling run entries, then +1 for runs holding an ancestor of v
        if c is not None and c in loc:
            ic = loc[c]
            self.desc[:n, iv] = np.where(sib, self.desc[:n, ic] + 1, 0)
        self.desc[iv, iv] = 1
        work = 6 * n
        if inside:
            ancs = np.flatnonzero(self.anc[:n, iv])
            for ia in ancs:
                rows = self.prec[:n, ia].copy()
                rows[ia] = True
                cols = self.prec[ia, :n].copy()
                cols[ia] = True
                r = np.flatnonzero(rows)
                k = np.flatnonzero(cols)
                self.desc[np.ix_(r, k)] += 1
                work += len(r) * len(k)
        del col
        return work

    # lookups by node id
    def is_anc(self, x, y) -> bool:
        loc = self.rec.loc
        return bool(self.anc[loc[x], loc[y]])


class UnitTables:
    """Unit-pair tables of a non-base record."""

    def __init__(self, rec, t: UnrankedTree):
        self.rec = rec
        units = rec.units
        k = len(units)
        self.k = k
        rec.uidx = {X.rid: i for i, X in enumerate(units)}
        by_lower = {X.lower: i for i, X in enumerate(units) if X.lower is not None}
        self.by_lower = by_lower
        pu = [by_lower.get(t.parent[X.left], NONE) if t.parent[X.left] is not None else NONE
              for X in units]
        self.pu = pu
        kids = [[] for _ in range(k)]
        tops = []
        for i, p in enumerate(pu):
            (tops if p == NONE else kids[p]).append(i)
        for r in kids:
            r.sort(key=lambda i: t.nlsib[units[i].left])
        tops.sort(key=lambda i: t.nlsib[units[i].left])
        self.kids = kids
        self.tops = tops
        zanc = np.zeros((k, k), dtype=bool)
        zach = np.full((k, k), NONE, dtype=np.int64)
        zlca = np.full((k, k), NONE, dtype=np.int64)
        zprec = np.zeros((k, k), dtype=bool)
        zsize = np.zeros((k, k), dtype=np.int64)
        chain = []
        for i in range(k):
            c = [i]
            while pu[c[-1]] != NONE:
                c.append(pu[c[-1]])
            chain.append(c)
            for j in range(1, len(c)):
                zanc[c[j], i] = True
                zach[c[j], i] = c[j - 1]
        for i in range(k):
            si = set(chain[i])
            for j in range(k):
                for a in chain[j]:
                    if a in si:
                        zlca[i, j] = a
                        break
        # descendants inside the record, bottom-up over the unit tree
        order = []
        stack = list(tops)
        while stack:
            i = stack.pop()
            order.append(i)
            stack.extend(kids[i])
        zdesc = [0] * k
        for i in reversed(order):
            zdesc[i] = sum(units[c].size + zdesc[c] for c in kids[i])
        for r in [tops] + kids:
            for a, ia in enumerate(r):
                acc = 0
                for ib in r[a:]:
                    acc += units[ib].size + zdesc[ib]
                    zsize[ia, ib] = acc
                    if ib != ia:
                        zprec[ia, ib] = True
        self.zanc, self.zach, self.zlca, self.zprec, self.zsize = zanc, zach, zlca, zprec, zsize
        rec.lower_unit = by_lower[rec.lower] if rec.lower is not None else NONE
        l0 = t.nlsib[rec.left]
        for i in order:
            X = units[i]
            X.zdesc = zdesc[i]
            X.ntops = t.nlsib[X.right] - t.nlsib[X.left] + 1
            if pu[i] == NONE:
                X.zleft = t.nlsib[X.left] - l0
                X.ztop = X.upper
            else:
                X.zleft = t.nlsib[X.left]
                X.ztop = units[pu[i]].ztop
        self.work = k * k + sum(len(c) for c in chain)

    def add(self, iu: int) -> int:
        """A node joined unit iu (or its subtree inside the unit)."""
        units = self.rec.units
        work = 1
        ancs = np.flatnonzero(self.zanc[:, iu])
        for a in ancs:
            units[a].zdesc += 1
        for a in list(ancs) + [iu]:
            rows = self.zprec[:, a].copy()
            rows[a] = True
            cols = self.zprec[a, :].copy()
            cols[a] = True
            r = np.flatnonzero(rows)
            c = np.flatnonzero(cols)
            self.zsize[np.ix_(r, c)] += 1
            work += len(r) * len(c)
        return work
