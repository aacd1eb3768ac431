"""Tree functions answered from the stored tables of the primary hierarchy.

Every function descends at most once per level, so the cost is bounded by
a polynomial in h that does not depend on the tree size.
"""

from __future__ import annotations

import numpy as np

from .tables import NONE
from .tree import TreeError


class TreeFunctions:
    # provided by the engine
    t = None
    led = None
    cand: list

    def primary_base(self, v):
        lst = self.cand[v]
        for R in lst:
            if R.primary:
                return R
        raise AssertionError(f"node {v} has no primary base record")

    def chain(self, v) -> list:
        """Primary records containing v, from the base level to the root."""
        R = self.primary_base(v)
        out = [R]
        while R.parent is not None:
            R = R.parent
            out.append(R)
        self.led.step(len(out))
        return out

    def rec_at(self, v, level):
        R = self.primary_base(v)
        while R.level < level:
            R = R.parent
        return R

    def lcr(self, x, y):
        """Lowest common primary record of x and y, plus the two distinct
        units holding them (None at the base level)."""
        cx, cy = self.chain(x), self.chain(y)
        for i in range(len(cx)):
            if cx[i] is cy[i]:
                if i == 0:
                    return cx[0], None, None
                return cx[i], cx[i - 1], cy[i - 1]
        raise AssertionError("chains do not meet")

    # -- basic relations ------------------------------------------------------

    def f_anc(self, x, y) -> bool:
        """x is a strict ancestor of y."""
        if x == y:
            return False
        Z, X, Y = self.lcr(x, y)
        self.led.touch()
        if X is None:
            return bool(Z.tf.anc[Z.loc[x], Z.loc[y]])
        if not Z.tf.zanc[Z.uidx[X.rid], Z.uidx[Y.rid]]:
            return False
        return x == X.lower or self.f_anc(x, X.lower)

    def f_anc_or_self(self, x, y) -> bool:
        return x == y or self.f_anc(x, y)

    def f_prec(self, x, y) -> bool:
        t = self.t
        self.led.step()
        return t.parent[x] == t.parent[y] and t.nlsib[x] < t.nlsib[y]

    def f_preceq(self, x, y) -> bool:
        return x == y or self.f_prec(x, y)

    def top_anc(self, y, level):
        """Top node of the level-`level` record of y that is above y."""
        ch = self.chain(y)
        b = ch[0].level
        R0 = ch[0]
        a = int(R0.tf.topanc[R0.loc[y]])
        self.led.touch()
        for L in range(b + 1, level + 1):
            R = ch[L - b]
            p = self.t.parent[a]
            if p is None:
                continue
            cp = self.chain(p)
            if cp[L - b] is not R:
                continue
            W = cp[L - b - 1]
            a = W.ztop
            self.led.touch()
        return a

    def f_anc_child(self, x, y):
        """Child of x on the path to its strict descendant y."""
        Z, X, Y = self.lcr(x, y)
        self.led.touch()
        if X is None:
            c = int(Z.tf.ach[Z.loc[x], Z.loc[y]])
            if c == NONE:
                raise TreeError(f"{x} is not a strict ancestor of {y}")
            return c
        if x != X.lower:
            return self.f_anc_child(x, X.lower)
        iX, iY = Z.uidx[X.rid], Z.uidx[Y.rid]
        C = int(Z.tf.zach[iX, iY])
        if C == NONE:
            raise TreeError(f"{x} is not a strict ancestor of {y}")
        if C == iY:
            return self.top_anc(y, Y.level)
        return Z.units[C].upper

    def f_anc_index(self, x, y) -> int:
        return self.t.nlsib[self.f_anc_child(x, y)] + 1

    def f_lca(self, x, y):
        if x == y:
            return x
        Z, X, Y = self.lcr(x, y)
        self.led.touch()
        if X is None:
            return int(Z.tf.lca[Z.loc[x], Z.loc[y]])
        tf = Z.tf
        iX, iY = Z.uidx[X.rid], Z.uidx[Y.rid]
        if tf.zanc[iX, iY]:
            return self.f_lca(x, X.lower)
        if tf.zanc[iY, iX]:
            return self.f_lca(Y.lower, y)
        C = int(tf.zlca[iX, iY])
        if C != NONE:
            return Z.units[C].lower
        return self.t.parent[Z.left]

    # -- counting -------------------------------------------------------------

    def below_t(self, R) -> int:
        """Nodes strictly below lower(R) that are not in R."""
        total = 0
        while True:
            P = R.parent
            total += R.zdesc
            self.led.touch()
            if P is None or P.lower is None:
                return total
            i = P.uidx[R.rid]
            lu = P.lower_unit
            if not (i == lu or P.tf.zanc[i, lu]):
                return total
            R = P

    def _run_hits_lower_base(self, Z, u, v) -> bool:
        w = Z.lower
        if w is None:
            return False
        p = self.t.parent[u]
        tf = Z.tf
        if p is not None and p in Z.loc:
            if not tf.anc[Z.loc[p], Z.loc[w]]:
                return False
            s = int(tf.ach[Z.loc[p], Z.loc[w]])
        else:
            s = int(tf.topanc[Z.loc[w]])
        nl = self.t.nlsib
        return nl[u] <= nl[s] <= nl[v]

    def f_num_desc(self, u, v) -> int:
        """Nodes in the subtrees of the sibling run u..v."""
        if not self.f_preceq(u, v):
            raise TreeError(f"{u} and {v} are not ordered siblings")
        Z, X, Y = self.lcr(u, v)
        self.led.touch()
        if X is None:
            tf = Z.tf
            c = int(tf.desc[Z.loc[u], Z.loc[v]])
            if self._run_hits_lower_base(Z, u, v):
                c += self.below_t(Z)
            return c
        tf = Z.tf
        iX, iY = Z.uidx[X.rid], Z.uidx[Y.rid]
        res = self.f_num_desc(u, X.right) + self.f_num_desc(Y.left, v)
        run = tf.kids[tf.pu[iX]] if tf.pu[iX] != NONE else tf.tops
        a = run.index(iX) + 1
        b = run.index(iY) - 1
        if a <= b:
            ia, ib = run[a], run[b]
            res += int(tf.zsize[ia, ib])
            lu = Z.lower_unit
            if lu != NONE:
                p = tf.pu[ia]
                s = None
                if p == NONE:
                    s = lu
                    while tf.pu[s] != NONE:
                        s = tf.pu[s]
                elif tf.zanc[p, lu]:
                    s = int(tf.zach[p, lu])
                if s is not None and a <= run.index(s) <= b:
                    res += self.below_t(Z)
        return res

    def zone_size(self, left, right, lower) -> int:
        s = self.f_num_desc(left, right)
        if lower is not None:
            s -= self.f_num_desc(lower, lower) - 1
        return s

    def f_child(self, v, k):
        """k-th child of v (1-based)."""
        t = self.t
        if not 1 <= k <= t.nchildren[v]:
            raise TreeError(f"node {v} has no child {k}")
        R = self.primary_base(v)
        if v != R.lower:
            # scan the base record
            tf = R.tf
            idx = np.flatnonzero(tf.par[:tf.n] == v)
            self.led.touch(tf.n)
            for i in idx:
                x = R.nodes[i]
                if t.nlsib[x] == k - 1:
                    return x
            raise AssertionError("child not found in base record")
        while R.parent is not None and R.parent.lower == v:
            R = R.parent
        P = R.parent
        tf = P.tf
        cands = tf.kids[P.uidx[R.rid]]
        # descend by sibling counts
        for i in cands:
            D = P.units[i]
            self.led.touch()
            if t.nlsib[D.left] <= k - 1 <= t.nlsib[D.right]:
                break
        else:
            raise AssertionError("child not found")
        while not D.base:
            dt = D.tf
            for i in dt.tops:
                E = D.units[i]
                self.led.touch()
                if t.nlsib[E.left] <= k - 1 <= t.nlsib[E.right]:
                    D = E
                    break
        for x in t.siblings_between(D.left, D.right):
            self.led.step()
            if t.nlsib[x] == k - 1:
                return x
        raise AssertionError("child not found")
