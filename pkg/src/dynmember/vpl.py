"""Dynamic membership for visibly pushdown languages.

How the stack height evolves depends only on the call/return/internal
pattern.  The engine therefore keeps type-only tables

  W        the unclamped walk: W(0) = 0, +1 per call, -1 per return;
  s        the stack height of the whole-word run (returns at the bottom
           keep it at 1);
  LB[j][d] the largest y <= j with W(y) = W(j) - d  (d >= 0);
  RD[i][d-1] the smallest z > i with W(z) = W(i) - d (d >= 1);

and state tables

  ST[(i, j, p, tau)]  (state, top) of the run from p with stack tau on
                      w[i..j]; a run from a non-bottom symbol stops when
                      it empties and then has top None;
  VPS[(p, j, tau, q, m, k)]  for special k: the state reached from q on
                      w[m..z] while popping the k-symbol stack that the
                      run from (p, tau) builds on w[x..j], where x - 1 =
                      LB[j][k-1] and z = RD[m-1][k-1].

Every other value (emptying positions, push positions, pop offsets) is
derived from the type tables.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass
from typing import Optional, Sequence

from .automata import BOTTOM, VPA, AlphabetError, ensure_valid
from .dcfl import SpecialK
from .ledger import WorkLedger
from .tree import UnrankedTree
from .zones import Theta

NEUTRAL = "<nop>"


class VPLError(ValueError):
    pass


class UnsupportedChange(VPLError):
    pass


def step_of(kind: str) -> int:
    return 1 if kind == "call" else -1 if kind == "return" else 0


class TypeTables:
    """Walk, height profile and jump tables of a type sequence."""

    def __init__(self, steps: Sequence[int]):
        self.steps = list(steps)
        self.rebuild()

    def rebuild(self):
        L = len(self.steps)
        W = [0] * (L + 1)
        for i, d in enumerate(self.steps, 1):
            W[i] = W[i - 1] + d
        self.W = W
        self.s = self.heights(self.steps)
        # LB rows: walk left remembering the last visit of every level
        self.LB = []
        last = {}
        for j in range(L + 1):
            last[W[j]] = j
            row = []
            d = 0
            while W[j] - d in last:
                row.append(last[W[j] - d])
                d += 1
            self.LB.append(row)
        self.RD = []
        first = {}
        for i in range(L, -1, -1):
            row = []
            d = 1
            while W[i] - d in first:
                row.append(first[W[i] - d])
                d += 1
            self.RD.append(row)
            first[W[i]] = i
        self.RD.reverse()
        return (L + 1) ** 2

    @staticmethod
    def heights(steps) -> list[int]:
        s = [1]
        for d in steps:
            h = s[-1]
            s.append(h + 1 if d > 0 else h - 1 if d < 0 and h > 1 else h)
        return s

    # lookups; None when undefined
    def lb(self, j, d):
        row = self.LB[j]
        return row[d] if 0 <= d < len(row) else None

    def rd(self, i, d):
        row = self.RD[i]
        return row[d - 1] if 1 <= d <= len(row) else None

    def drop(self, i, j) -> int:
        """How far the walk falls below W(i) on (i, j]."""
        return bisect.bisect_right(self.RD[i], j)

    def rise_from(self, i, j) -> int:
        """Largest d with LB[j][d] >= i, i.e. W(j) - min W[i..j]."""
        row = self.LB[j]
        lo, hi = 0, len(row)
        while lo + 1 < hi:
            mid = (lo + hi) // 2
            if row[mid] >= i:
                lo = mid
            else:
                hi = mid
        return lo

    def relabel(self, l, c) -> int:
        """Position l changed its step by c; update every row in place.
        Returns the work spent."""
        if c == 0:
            return 0
        old_W, old_LB, old_RD = self.W, self.LB, self.RD
        L = len(self.steps)
        self.steps[l - 1] += c
        W = old_W[:l] + [x + c for x in old_W[l:]]
        work = L + 1
        LB = old_LB[:l]
        for j in range(l, L + 1):
            row = []
            d = 0
            while True:
                y = old_LB[j][d] if d < len(old_LB[j]) else None
                if y is None or y < l:
                    T = W[j] - d
                    d2 = W[l - 1] - T
                    r = old_LB[l - 1]
                    y = r[d2] if 0 <= d2 < len(r) else None
                    if y is None:
                        break
                row.append(y)
                d += 1
            LB.append(row)
            work += len(row)
        RD = []
        for i in range(0, l):
            row = []
            d = 1
            while True:
                z = old_RD[i][d - 1] if d <= len(old_RD[i]) else None
                if z is None or z >= l:
                    T = W[i] - d
                    if W[l] == T:
                        z = l
                    elif W[l] > T:
                        r = old_RD[l]
                        d2 = W[l] - T
                        z = r[d2 - 1] if d2 <= len(r) else None
                    else:
                        z = None
                    if z is None:
                        break
                row.append(z)
                d += 1
            RD.append(row)
            work += len(row)
        RD.extend(old_RD[l:])
        self.W, self.LB, self.RD = W, LB, RD
        # heights: one pass from l
        s = self.s
        for i in range(l, L + 1):
            h = s[i - 1]
            d = self.steps[i - 1]
            s[i] = h + 1 if d > 0 else h - 1 if d < 0 and h > 1 else h
        return work + L + 1 - l

    def check(self) -> list[str]:
        """Defining equations of s and the jump tables."""
        bad = []
        if self.s != self.heights(self.steps):
            bad.append("height profile differs from a fresh computation")
        W = self.W
        for j, row in enumerate(self.LB):
            for d, y in enumerate(row):
                if W[y] != W[j] - d or any(W[t] == W[j] - d for t in range(y + 1, j + 1)):
                    bad.append(f"LB[{j}][{d}] = {y}")
        for i, row in enumerate(self.RD):
            for d, z in enumerate(row, 1):
                if W[z] != W[i] - d or any(W[t] == W[i] - d for t in range(i + 1, z)):
                    bad.append(f"RD[{i}][{d}] = {z}")
        return bad


class VPLEngine:
    def __init__(self, w: Sequence[str], vpa: VPA, theta: Theta):
        ensure_valid(vpa)
        for (q, a), (q2, g) in vpa.delta_c.items():
            if g == BOTTOM:
                raise VPLError(f"call {a!r} from {q!r} pushes the bottom symbol")
        for a in w:
            vpa.kind(a)
        self.vpa = vpa
        self.theta = theta
        self.w: list[str] = list(w)
        self.n = max(4 * len(self.w), 2 ** theta.h)
        self.led = WorkLedger()
        self.Q = list(vpa.states)
        self.G = list(vpa.stack_alphabet)
        self.G1 = [g for g in self.G if g != BOTTOM]
        self._build()

    # -- machine ------------------------------------------------------------

    def kind(self, a):
        return "internal" if a == NEUTRAL else self.vpa.kind(a)

    def move(self, p, a, top):
        """One move from state p with top symbol `top`: (state, pushed,
        popped)."""
        k = self.kind(a)
        if k == "call":
            q, g = self.vpa.delta_c[(p, a)]
            return q, g, False
        if k == "return":
            return self.vpa.delta_r[(p, a, top)], None, top != BOTTOM
        return (p if a == NEUTRAL else self.vpa.delta_int[(p, a)]), None, False

    # -- bulk construction --------------------------------------------------

    def _build(self):
        self.sk = SpecialK(self.theta, self.n)
        w, L = self.w, len(self.w)
        self.T = TypeTables([step_of(self.kind(a)) for a in w])
        self.led.step((L + 1) ** 2)
        self.ST: dict = {}
        for i in range(1, L + 1):
            rows = {j: {} for j in range(i, L + 1)}
            for p in self.Q:
                for tau in self.G:
                    st, stack = p, [tau]
                    for j in range(i, L + 1):
                        if stack:
                            st, g, popped = self.move(st, w[j - 1], stack[-1])
                            if g is not None:
                                stack.append(g)
                            elif popped:
                                stack.pop()
                        rows[j][(p, tau)] = (st, stack[-1] if stack else None)
            for j, row in rows.items():
                self.ST[(i, j)] = row
            self.led.step(len(rows) * len(self.Q) * len(self.G))
        self.VPS: dict = {}
        for j in range(0, L + 1):
            for m in range(j + 1, L + 1):
                self._fill_pair(j, m)

    def _fill_pair(self, j, m):
        """All VPS entries of the position pair (j, m), one k at a time."""
        T, st = self.T, self.st
        top = len(T.LB[j])
        prev = None
        for k in range(1, top + 1):
            x = T.LB[j][k - 1] + 1
            z2 = T.rd(m - 1, k)
            cur = {}
            if k == 1:
                for q in self.Q:
                    for tau in self.G1:
                        v = None if z2 is None else st(m, z2, q, tau)[0]
                        for p in self.Q:
                            cur[(p, tau, q)] = v
            else:
                x1 = T.LB[j][k - 2]
                z = T.rd(m - 1, k - 1)
                for (p, tau) in ((p, t) for p in self.Q for t in self.G1):
                    p1, t1 = st(x, x1, p, tau)
                    for q in self.Q:
                        r = prev[(p1, t1, q)]
                        cur[(p, tau, q)] = (None if r is None or z2 is None
                                            else st(z + 1, z2, r, tau)[0])
            self.led.step(len(cur))
            if self.sk.is_special(k):
                self.VPS[(j, m, k)] = cur
            prev = cur

    # -- lookups ------------------------------------------------------------

    def st(self, i, j, p, tau):
        """(state, top) after the relative run on w[i..j]."""
        if j < i:
            return p, tau
        self.led.touch()
        return self.ST[(i, j)][(p, tau)]

    def vps(self, p, j, tau, q, m, k):
        self.led.touch()
        row = self.VPS.get((j, m, k))
        return None if row is None else row.get((p, tau, q))

    def vps_any(self, p, j, tau, q, m, K):
        """Pop K symbols, composed from stored special depths, largest
        chunk first."""
        T = self.T
        L = len(self.w)
        while K > 0:
            if m > L or tau == BOTTOM or T.lb(j, K - 1) is None:
                return None
            K1 = self.sk.largest_le(K)
            x = T.LB[j][K - 1] + 1
            x1 = T.LB[j][K1 - 1] + 1
            p1, t1 = self.st(x, x1 - 1, p, tau)
            r = self.vps(p1, j, t1, q, m, K1)
            z1 = T.rd(m - 1, K1)
            if r is None or z1 is None:
                return None
            if K1 == K:
                return r
            j, q, m, K = T.LB[j][K1], r, z1 + 1, K - K1
        return q

    def pop_from(self, i, p, tau, y, K, q, m):
        """Pop the top K symbols of the stack that the run from (p, tau)
        at i holds at position y."""
        if K == 0:
            return q
        x1 = self.T.LB[y][K - 1]
        px, tx = self.st(i, x1, p, tau)
        return self.vps_any(px, y, tx, q, m, K)

    def height(self, i, j, tau):
        """Stack height of the run from tau on w[i..j], 0 once emptied."""
        T = self.T
        if tau == BOTTOM:
            return 1 + T.rise_from(i - 1, j)
        if T.drop(i - 1, j):
            return 0
        return 1 + T.W[j] - T.W[i - 1]

    def _check_range(self, i, j):
        L = len(self.w)
        if not (1 <= i <= L + 1 and i - 1 <= j <= L):
            raise VPLError(f"range [{i}, {j}] invalid for length {L}")

    def query(self, i, j) -> bool:
        """Is w[i..j] accepted?  j = i - 1 asks about the empty word."""
        self._check_range(i, j)
        self.led.begin("query")
        st = self.st(i, j, self.vpa.start, BOTTOM)[0]
        self.led.end()
        return st in self.vpa.final

    # -- changes --------------------------------------------------------------

    def _span_entry(self, i, j, p, tau, l, a):
        """New ST(i, j, p, tau) for i <= l <= j from untouched pieces."""
        T, st = self.T, self.st
        bottom = tau == BOTTOM
        p1, t1 = st(i, l - 1, p, tau)
        if t1 is None:
            return p1, None
        h = 1 + (T.rise_from(i - 1, l - 1) if bottom else T.W[l - 1] - T.W[i - 1])
        q3, g, popped = self.move(p1, a, t1)
        e, He = l, h
        if g is not None:
            z0 = T.rd(l, 1)
            if z0 is None or z0 > j:
                return st(l + 1, j, q3, g)
            q3, e = st(l + 1, z0, q3, g)[0], z0
        elif popped:
            He = h - 1
            if He == 0:
                return q3, None
        y = T.LB[l - 1][h - He]
        P = T.drop(e, j)
        limit = He - 1 if bottom else He
        if P >= limit:
            r = self.pop_from(i, p, tau, y, limit, q3, e + 1)
            if not bottom:
                return r, None
            z = T.rd(e, limit) if limit else e
            return st(z + 1, j, r, BOTTOM)
        r = self.pop_from(i, p, tau, y, P, q3, e + 1)
        zP = T.rd(e, P) if P else e
        top = st(i, T.LB[l - 1][h - He + P], p, tau)[1]
        return st(zP + 1, j, r, top)

    def _vps_left(self, j, m, k, l, p, tau, q):
        """Stack ends before l, its popping run crosses l."""
        T = self.T
        x = T.LB[j][k - 1] + 1
        k1 = T.drop(m - 1, l - 1)
        r1 = self.pop_from(x, p, tau, j, k1, q, m)
        z1 = T.rd(m - 1, k1) if k1 else m - 1
        g = self.st(x, T.LB[j][k1], p, tau)[1]
        z2 = T.rd(z1, 1)
        if r1 is None or z2 is None:
            return None
        s2 = self.st(z1 + 1, z2, r1, g)[0]
        rest = k - k1 - 1
        return s2 if rest == 0 else self.vps_any(p, T.LB[j][k1 + 1], tau, s2, z2 + 1, rest)

    def _vps_right(self, j, m, k, dstar, p, tau, q):
        """The stack was built across l: pop the part above l first."""
        T = self.T
        x = T.LB[j][k - 1] + 1
        c1 = dstar + 1
        ps, ts = self.st(x, T.LB[j][dstar], p, tau)
        r1 = self.vps_any(ps, j, ts, q, m, c1)
        z1 = T.rd(m - 1, c1)
        if r1 is None or z1 is None:
            return None
        return self.vps_any(p, T.LB[j][c1], tau, r1, z1 + 1, k - c1)

    def _relabel(self, l, a):
        old = self.w[l - 1]
        L = len(self.w)
        self.led.step(self.T.relabel(l, step_of(self.kind(a)) - step_of(self.kind(old))))
        self.led.round()
        T = self.T
        # spanning ST entries; everything they read is untouched
        new = {}
        for i in range(1, l + 1):
            for j in range(l, L + 1):
                new[(i, j)] = {(p, t): self._span_entry(i, j, p, t, l, a)
                               for p in self.Q for t in self.G}
        self.ST.update(new)
        self.w[l - 1] = a
        self.led.round()
        # VPS entries whose stack or popping run covers l
        out, drop = {}, []
        PTQ = [(p, t, q) for p in self.Q for t in self.G1 for q in self.Q]
        specials = self.sk.values
        for j in range(0, l):
            top = len(T.LB[j])
            for m in range(j + 1, l + 1):
                for k in specials:
                    if k > top:
                        break
                    z = T.rd(m - 1, k)
                    if z is not None and z < l:
                        continue
                    out[(j, m, k)] = {(p, t, q): self._vps_left(j, m, k, l, p, t, q)
                                      for p, t, q in PTQ}
        for j in range(l, L + 1):
            top = len(T.LB[j])
            dstar = T.rise_from(l, j)
            for m in range(j + 1, L + 1):
                for k in specials:
                    if k > top:
                        drop.extend((j, m, k2) for k2 in specials
                                    if k2 >= k and (j, m, k2) in self.VPS)
                        break
                    if k <= dstar + 1:
                        continue
                    out[(j, m, k)] = {(p, t, q): self._vps_right(j, m, k, dstar, p, t, q)
                                      for p, t, q in PTQ}
        for key in drop:
            del self.VPS[key]
        self.VPS.update(out)
        self.led.touch(len(drop) + sum(map(len, new.values())) + sum(map(len, out.values())))
        self.led.round()

    def _shift(self, pos):
        """Make room for a neutral internal symbol at pos."""
        L = len(self.w)
        oi = lambda i: i if i <= pos else i - 1
        oj = lambda j: j if j < pos else j - 1
        ident = {(p, t): (p, t) for p in self.Q for t in self.G}
        ST = {}
        for i in range(1, L + 2):
            for j in range(i, L + 2):
                a, b = oi(i), oj(j)
                ST[(i, j)] = ident if b < a else self.ST[(a, b)]
        nones = {(p, t, q): None for p in self.Q for t in self.G1 for q in self.Q}
        VPS = {}
        # old position -> new positions: the prefix ending at pos - 1 may
        # now also end at the placeholder, the suffix at pos may start there
        nj = lambda j: (j,) if j < pos - 1 else (j, j + 1) if j == pos - 1 else (j + 1,)
        nm = lambda m: (m,) if m < pos else (m, m + 1) if m == pos else (m + 1,)
        for (j, m, k), row in self.VPS.items():
            for j2 in nj(j):
                for m2 in nm(m):
                    if j2 < m2:
                        VPS[(j2, m2, k)] = row
        # a suffix made of the placeholder alone never empties a stack
        self.w.insert(pos - 1, NEUTRAL)
        self.T = TypeTables([step_of(self.kind(a)) for a in self.w])
        for j in range(0, pos):
            for k in self.sk.values:
                if k > len(self.T.LB[j]):
                    break
                VPS.setdefault((j, pos, k), nones)
        self.ST, self.VPS = ST, VPS
        self.led.step(len(ST) + len(VPS) + (L + 2) ** 2)

    def relabel(self, l, sym):
        if not 1 <= l <= len(self.w):
            raise VPLError(f"position {l} out of range 1..{len(self.w)}")
        self.vpa.kind(sym)
        self.led.begin("relabel")
        self._relabel(l, sym)
        return self.led.end()

    def insert(self, l, sym, side="before"):
        """Insert sym before or after position l (l = 1 into an empty
        string)."""
        self.vpa.kind(sym)
        if side not in ("before", "after"):
            raise VPLError(f"side must be 'before' or 'after', not {side!r}")
        L = len(self.w)
        if L == 0:
            if l != 1:
                raise VPLError("only position 1 is valid in an empty string")
            pos = 1
        else:
            if not 1 <= l <= L:
                raise VPLError(f"position {l} out of range 1..{L}")
            pos = l if side == "before" else l + 1
        self.led.begin("insert")
        self._shift(pos)
        self._relabel(pos, sym)
        if 2 * len(self.w) >= self.n:
            self.n *= 2
            self._build()
        return self.led.end()

    @property
    def word(self) -> list[str]:
        return list(self.w)


def vpl_init(w, vpa: VPA, theta) -> VPLEngine:
    if not isinstance(theta, Theta):
        theta = Theta.parse(theta)
    return VPLEngine(w, vpa, theta)


def vpl_relabel(e: VPLEngine, l, sym):
    return e.relabel(l, sym)


def vpl_insert(e: VPLEngine, l, sym, side="before"):
    return e.insert(l, sym, side)


def vpl_query(e: VPLEngine, i, j) -> bool:
    return e.query(i, j)


def v_pop_state_any_k(e: VPLEngine, p, j, tau, q, m, k):
    """State after popping the k-symbol stack ending at j from q at m;
    None where a jump is undefined."""
    if not 0 <= k <= e.n:
        raise VPLError(f"k={k} outside 0..{e.n}")
    if k == 0:
        return q
    return e.vps_any(p, j, tau, q, m, k)


def pop2_from_vps(e: VPLEngine, key, q, m, k):
    """State half of pop-pos for the run key = (i, j, p, tau)."""
    i, j, p, tau = key
    if k == 0:
        return q
    H = e.height(i, j, tau)
    if not 1 <= k <= H or (tau == BOTTOM and k == H):
        return None
    j0 = e.T.lb(j, k - 1)
    p0, t0 = e.st(i, j0, p, tau)
    return e.vps_any(p0, j, t0, q, m, k)


def vps_from_pop2(e: VPLEngine, pop2, p, j, tau, q, m, k):
    """v-pop-state from a pop-pos state function pop2((i, j, p, tau), q, m, k)."""
    if k == 0:
        return q
    y = e.T.lb(j, k - 1)
    if y is None:
        return None
    return pop2((y + 1, j, p, tau), q, m, k)


# -- oracles ------------------------------------------------------------------


def relative_run(vpa: VPA, p, stack, u):
    """Run that stops as soon as a non-bottom stack empties.
    Returns (state, stack, emptied_at) with emptied_at an offset or 0."""
    stack = tuple(stack)
    for t, a in enumerate(u, 1):
        if a == NEUTRAL:
            continue
        p, stack = vpa.step(p, stack, a)
        if not stack:
            return p, stack, t
    return p, stack, 0


def oracle_st(e: VPLEngine, i, j, p, tau):
    q, stack, _ = relative_run(e.vpa, p, (tau,), e.w[i - 1:j])
    return q, (stack[0] if stack else None)


def oracle_vps(e: VPLEngine, p, j, tau, q, m, k):
    """Scan back from j for the start whose run leaves k symbols, then pop
    them by direct simulation."""
    if k == 0:
        return q
    if tau == BOTTOM:
        return None
    for y in range(j, -1, -1):
        _, S, emptied = relative_run(e.vpa, p, (tau,), e.w[y:j])
        if not emptied and len(S) == k:
            break
    else:
        return None
    r, _, emptied = relative_run(e.vpa, q, S, e.w[m - 1:])
    return r if emptied else None


@dataclass
class SweepResult:
    checked: int
    mismatches: list

    @property
    def ok(self) -> bool:
        return not self.mismatches


def vpl_sweep(e: VPLEngine, rng=None, samples=None, any_k=False) -> SweepResult:
    """Compare ST and VPS entries (and the type tables) with oracles.

    samples=None is exhaustive over stored entries; otherwise `samples`
    random entries are drawn.  any_k draws arbitrary depths through the
    composed lookup instead of stored special ones."""
    res = SweepResult(0, [])
    bad = res.mismatches
    fresh = TypeTables(e.T.steps)
    if (fresh.W, fresh.s, fresh.LB, fresh.RD) != (e.T.W, e.T.s, e.T.LB, e.T.RD):
        bad.append("type tables differ from a fresh computation")
    if len(e.w) <= 32:
        bad.extend(e.T.check())
    L = len(e.w)
    st_keys = [(i, j) for i in range(1, L + 1) for j in range(i, L + 1)]

    def check_st(i, j, p, t):
        want = oracle_st(e, i, j, p, t)
        got = e.ST[(i, j)][(p, t)]
        res.checked += 1
        if got != want:
            bad.append(f"ST({i},{j},{p},{t}): {got} != {want}")

    def check_vps(p, j, t, q, m, k):
        want = oracle_vps(e, p, j, t, q, m, k)
        got = e.vps_any(p, j, t, q, m, k) if any_k else e.VPS[(j, m, k)][(p, t, q)]
        res.checked += 1
        if got != want:
            bad.append(f"VPS({p},{j},{t},{q},{m},{k}): {got} != {want}")

    if samples is None:
        for i, j in st_keys:
            for p in e.Q:
                for t in e.G:
                    check_st(i, j, p, t)
        for j in range(L + 1):
            ks = range(1, len(e.T.LB[j]) + 1) if any_k else \
                [k for k in e.sk.values if k <= len(e.T.LB[j])]
            for m in range(j + 1, L + 1):
                for k in ks:
                    for p in e.Q:
                        for t in e.G1:
                            for q in e.Q:
                                check_vps(p, j, t, q, m, k)
        return res
    draws = 0
    while L and res.checked < samples and draws < 20 * samples:
        draws += 1
        i, j = rng.choice(st_keys)
        check_st(i, j, rng.choice(e.Q), rng.choice(e.G))
        if j < L:
            top = len(e.T.LB[j])
            k = rng.randint(1, top) if any_k else rng.choice(
                [k for k in e.sk.values if k <= top])
            check_vps(rng.choice(e.Q), j, rng.choice(e.G1), rng.choice(e.Q),
                      rng.randint(j + 1, L), k)
    return res


# -- well-formed words as trees ---------------------------------------------------


class CorrespondenceError(VPLError):
    pass


ROOT = "ROOT"


def pair_label(a, b) -> str:
    return f"{a}|{b}"


def wellformed_to_tree(w, vpa: VPA, root_label=ROOT):
    """Nesting tree of a well-formed word under a virtual root.

    A matched call/return pair becomes an inner node labelled "a|b" whose
    children are the factors between them; an internal symbol becomes a
    leaf.  Returns (tree, nodes) with nodes[i - 1] the node of position i
    (both ends of a pair share their node)."""
    t = UnrankedTree(root_label)
    nodes, open_ = [], []          # open_: (node, position) of pending calls
    cur = t.root
    for i, a in enumerate(w, 1):
        k = vpa.kind(a)
        if k == "call":
            v = t.attach_last_child(cur, a)
            open_.append((v, i))
            nodes.append(v)
            cur = v
        elif k == "return":
            if not open_:
                raise CorrespondenceError(f"return {a!r} at {i} has no matching call")
            v, j = open_.pop()
            t.label[v] = pair_label(w[j - 1], a)
            nodes.append(v)
            cur = t.parent[v]
        else:
            nodes.append(t.attach_last_child(cur, a))
    if open_:
        raise CorrespondenceError(f"call at {open_[-1][1]} is never matched")
    return t, nodes


@dataclass(frozen=True)
class Change:
    """One VPL- change on a well-formed word.

    replace: position pos gets sym of the same type;
    insert:  internal sym goes in front of pos, which holds a return or is
             one past the end;
    expand:  the internal at pos becomes the pair sym (a call) + ret."""
    op: str
    pos: int
    sym: str
    ret: Optional[str] = None


def translate_vplminus_change(change: Change, w, nodes, vpa: VPA, root=0):
    """Tree-engine operations for a VPL- change: a list of ("relabel", node,
    label) or ("addchild", parent, label)."""
    L = len(w)
    if change.op == "replace":
        if not 1 <= change.pos <= L:
            raise UnsupportedChange(f"position {change.pos} out of range")
        a, k = w[change.pos - 1], vpa.kind(w[change.pos - 1])
        if vpa.kind(change.sym) != k:
            raise UnsupportedChange(f"{a!r} -> {change.sym!r} changes the symbol type")
        v = nodes[change.pos - 1]
        if k == "internal":
            return [("relabel", v, change.sym)]
        # both ends of the pair share the node; find the partner's symbol
        other = [i for i in range(L) if nodes[i] == v and i != change.pos - 1][0]
        if k == "call":
            return [("relabel", v, pair_label(change.sym, w[other]))]
        return [("relabel", v, pair_label(w[other], change.sym))]
    if change.op == "insert":
        if vpa.kind(change.sym) != "internal":
            raise UnsupportedChange("only internal symbols can be inserted")
        if change.pos == L + 1:
            return [("addchild", root, change.sym)]
        if not 1 <= change.pos <= L or vpa.kind(w[change.pos - 1]) != "return":
            raise UnsupportedChange("insertions go in front of a return symbol or at the end")
        return [("addchild", nodes[change.pos - 1], change.sym)]
    if change.op == "expand":
        if not 1 <= change.pos <= L or vpa.kind(w[change.pos - 1]) != "internal":
            raise UnsupportedChange("only an internal symbol can be expanded")
        if vpa.kind(change.sym) != "call" or vpa.kind(change.ret) != "return":
            raise UnsupportedChange("expansion needs a call and a return symbol")
        # a leaf with no children is already the image of an empty pair
        return [("relabel", nodes[change.pos - 1], pair_label(change.sym, change.ret))]
    raise UnsupportedChange(f"unknown change {change.op!r}")


class VPLMinus:
    """Membership of a well-formed word under VPL- changes, answered by the
    tree engine on the nesting tree."""

    def __init__(self, w, vpa: VPA, cfg=None):
        from .fixtures import vpa_summary_dta
        from .tree_engine import engine_init

        self.vpa = vpa
        self.w = list(w)
        t, self.nodes = wellformed_to_tree(self.w, vpa)
        dta, _ = vpa_summary_dta(vpa)
        self.engine = engine_init(t, dta, cfg)

    def apply(self, change: Change):
        ops = translate_vplminus_change(change, self.w, self.nodes, self.vpa,
                                        self.engine.t.root)
        recs = []
        for op, v, lab in ops:
            if op == "relabel":
                self.engine.relabel(v, lab)
            else:
                u = self.engine.add_child(v, lab)
            recs.append(self.engine.led.records[-1])
        # position bookkeeping, outside the ledger
        i = change.pos - 1
        if change.op == "replace":
            self.w[i] = change.sym
        elif change.op == "insert":
            self.w.insert(i, change.sym)
            self.nodes.insert(i, u)
        else:
            self.w[i:i + 1] = [change.sym, change.ret]
            self.nodes.insert(i, self.nodes[i])
        return recs

    def query(self) -> bool:
        return self.engine.query(self.engine.t.root)

    def query_pair(self, pos) -> bool:
        """Is the factor spanned by the pair (or internal) at pos accepted?"""
        return self.engine.query(self.nodes[pos - 1])

    def span(self, pos):
        """First and last position of the pair (or internal) at pos."""
        v = self.nodes[pos - 1]
        idx = [i for i, u in enumerate(self.nodes, 1) if u == v]
        return idx[0], idx[-1]

    def factor(self, pos):
        i, j = self.span(pos)
        return self.w[i - 1:j]
