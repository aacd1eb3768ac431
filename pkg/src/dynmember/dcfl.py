"""Dynamic membership for realtime deterministic context-free languages.

For every simple configuration C = (p, w[i..j], tau) the engine stores

  hatdelta(C)        end state, stack height, top symbol, empty position
                     and defined length of the run;
  push-pos(C, k)     length of the longest prefix of w[i..j] after which
                     the stack has height k;
  pop-pos(C, q, m, k)  (o, r): the run from q on the suffix w[m..] with the
                     top k symbols of the final stack of C empties them
                     after o symbols and enters r; (0, None) if it never
                     does.

push-pos and pop-pos are stored only for special k = a * N^b with
N = floor(n^theta), 1 <= a <= N, b < 1/theta.  Other k are composed from
special ones.  After a change every entry whose substring or suffix
contains the changed position is recomputed from stored entries of
substrings that do not contain it.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

from .automata import RDPDA, AutomatonError, ensure_valid, rdpda_run_oracle
from .tree_engine import InvariantError
from .ledger import WorkLedger
from .zones import Theta, root_floor

NEUTRAL = "<nop>"


class DCFLError(ValueError):
    pass


@dataclass(frozen=True)
class HatDelta:
    end_state: Optional[str]
    height: int
    top: Optional[str]
    empty_pos: int
    defined_len: int


class SpecialK:
    """Stack depths a * N^b kept in the tables."""

    def __init__(self, theta: Theta, n: int):
        self.theta = theta
        self.g = theta.h
        self.N = max(2, root_floor(n, 1, theta.h))
        vals = set()
        for b in range(self.g):
            for a in range(1, self.N + 1):
                v = a * self.N ** b
                if v <= n:
                    vals.add(v)
        self.values = sorted(vals)
        self._set = vals

    def is_special(self, k) -> bool:
        return k in self._set

    def digits(self, k) -> list[int]:
        """Base-N digits of k, least significant first."""
        out = []
        while k:
            out.append(k % self.N)
            k //= self.N
        return out or [0]

    def largest_le(self, v) -> int:
        best = 1
        for x in self.values:
            if x <= v:
                best = x
            else:
                break
        return best

    def upto(self, H) -> list[int]:
        return [x for x in self.values if x <= H]


def _check_pda(pda: RDPDA):
    ensure_valid(pda)
    for key, (q, push) in pda.delta.items():
        if len(push) > 2:
            raise AutomatonError([f"transition {key} pushes {len(push)} > 2 symbols"])


def keeps_top(pda: RDPDA) -> bool:
    return all(len(push) < 2 or push[1] == g for (p, a, g), (q, push) in pda.delta.items())


def normalize_pushes(pda: RDPDA) -> RDPDA:
    """Equivalent machine whose two-symbol pushes keep the current top.

    A push (a, b) over top g with b != g leaves g in place and records b
    in the new symbol (a, b); popping it moves b into the state, where it
    overrides the exposed top.  States are (q, override) and stack
    symbols are (symbol, override of the symbol below)."""
    G1 = [None] + list(pda.stack_alphabet)
    Q = [(q, o) for q in pda.states for o in G1]
    G = [(g, o) for g in pda.stack_alphabet for o in G1]
    delta = {}
    for (p, ov) in Q:
        for (g, bo) in G:
            top = ov if ov is not None else g
            for a in pda.alphabet:
                tr = pda.delta.get((p, a, top))
                if tr is None:
                    continue
                q, push = tr
                if not push:
                    delta[((p, ov), a, (g, bo))] = ((q, bo), ())
                elif len(push) == 1:
                    delta[((p, ov), a, (g, bo))] = ((q, None), ((push[0], bo),))
                else:
                    x, y = push
                    delta[((p, ov), a, (g, bo))] = (
                        (q, None), ((x, None if y == g else y), (g, bo)))
    final = [s for s in Q if s[0] in pda.final]
    return RDPDA(tuple(Q), pda.alphabet, tuple(G), (pda.start, None),
                 (pda.start_stack, None), delta, frozenset(final))


class DCFLEngine:
    def __init__(self, w: Sequence[str], pda: RDPDA, theta: Theta):
        _check_pda(pda)
        for a in w:
            if a not in pda.alphabet:
                raise DCFLError(f"symbol {a!r} not in the alphabet")
        self.source = pda
        self.normalized = not keeps_top(pda)
        self.pda = normalize_pushes(pda) if self.normalized else pda
        self.theta = theta
        self.w: list[str] = list(w)
        self.n = max(4 * len(self.w), 2 ** theta.h)
        self.led = WorkLedger()
        self.Q = list(self.pda.states)
        self.G = list(self.pda.stack_alphabet)
        self._build()

    # -- machine --------------------------------------------------------------

    def delta(self, p, a, g):
        if a == NEUTRAL:
            return p, (g,)
        return self.pda.delta.get((p, a, g))

    # -- bulk construction ------------------------------------------------------

    def _build(self):
        self.sk = SpecialK(self.theta, self.n)
        self.HD: dict = {}
        self.PP: dict = {}
        self.PO: dict = {}
        w, L = self.w, len(self.w)
        special = self.sk.upto
        # forward simulation from every start
        for i in range(1, L + 1):
            for p in self.Q:
                for tau in self.G:
                    st, stack = p, [tau]
                    last = {1: 0}
                    alive = True
                    for j in range(i, L + 1):
                        key = (i, j, p, tau)
                        if not alive:
                            self.HD[key] = prev
                            continue
                        tr = self.delta(st, w[j - 1], stack[-1])
                        if tr is None:
                            prev = HatDelta(None, len(stack), stack[-1], 0, j - i)
                            alive = False
                            self.HD[key] = prev
                            continue
                        st, push = tr
                        stack.pop()
                        stack.extend(reversed(push))
                        if not stack:
                            prev = HatDelta(st, 0, None, j - i + 1, j - i + 1)
                            alive = False
                            self.HD[key] = prev
                            continue
                        H = len(stack)
                        last[H] = j - i + 1
                        self.HD[key] = HatDelta(st, H, stack[-1], 0, j - i + 1)
                        self.PP[key] = {k: last[k] for k in special(H)}
                    self.led.step(L - i + 1)
        # pop-pos, growing k one symbol at a time
        for (i, j, p, tau), hd in list(self.HD.items()):
            if (i, j, p, tau) not in self.PP:
                continue
            stack = self._final_stack(i, j, p, tau)
            ks = set(special(hd.height))
            for m in range(j + 1, L + 1):
                for q in self.Q:
                    row = {}
                    o, st = 0, q
                    for k in range(1, hd.height + 1):
                        if st is not None:
                            e, r = self._E(st, m + o, stack[k - 1])
                            if e == 0:
                                st = None
                            else:
                                o += e
                                st = r
                        if k in ks:
                            row[k] = (o, st) if st is not None else (0, None)
                    self.PO[(i, j, p, tau, m, q)] = row
                    self.led.step(hd.height)

    def _final_stack(self, i, j, p, tau) -> list:
        """Top-first stack after the run (construction only)."""
        st, stack = p, [tau]
        for x in range(i, j + 1):
            st, push = self.delta(st, self.w[x - 1], stack[-1])
            stack.pop()
            stack.extend(reversed(push))
        return list(reversed(stack))

    # -- table access -------------------------------------------------------------

    def hd(self, i, j, p, tau) -> HatDelta:
        if j < i:
            return HatDelta(p, 1, tau, 0, 0)
        self.led.touch()
        return self.HD[(i, j, p, tau)]

    def _E(self, q, m, g):
        """(offset, state) where the run from q on w[m..] with stack g
        empties it; (0, None) otherwise."""
        if m > len(self.w):
            return 0, None
        r = self.hd(m, len(self.w), q, g)
        if r.empty_pos:
            return r.empty_pos, r.end_state
        return 0, None

    @staticmethod
    def _complete(hd: HatDelta, length) -> bool:
        return hd.empty_pos == 0 and hd.defined_len == length and hd.height > 0

    def hatdelta(self, i, j, p, tau) -> HatDelta:
        self._check_range(i, j)
        return self.hd(i, j, p, tau)

    def _check_range(self, i, j):
        if not (1 <= i and j <= len(self.w) and i <= j + 1):
            raise DCFLError(f"bad range [{i}, {j}] for a string of length {len(self.w)}")

    # -- composed lookups -----------------------------------------------------------

    def _pp(self, i, j, p, tau, k):
        """push-pos for a special k (empty configurations included)."""
        if j < i:
            if k != 1:
                raise KeyError(k)
            return 0
        self.led.touch()
        return self.PP[(i, j, p, tau)][k]

    def push_pos_any_k(self, i, j, p, tau, k) -> int:
        """Longest prefix of w[i..j] (from p, tau) ending at height k.

        Climbs by the largest special depth below the target; after each
        climb the remaining string starts one level above the reached
        height, so the target shrinks to k - K + 1."""
        x, ci, cp, ct = 0, i, p, tau
        v = k
        while not self.sk.is_special(v):
            K = self.sk.largest_le(v)
            y = self._pp(ci, j, cp, ct, K)
            r = self.hd(ci, ci + y - 1, cp, ct)
            x += y
            ci, cp, ct = ci + y, r.end_state, r.top
            v = v - K + 1
        return x + self._pp(ci, j, cp, ct, v)

    def _prefix_cfg(self, i, j, p, tau, H, height):
        """Configuration over the prefix of w[i..j] whose stack is the
        bottom `height` symbols of the final stack (height H)."""
        if height == H:
            return j
        return i + self.push_pos_any_k(i, j, p, tau, height) - 1

    def _pop_layer(self, i, j, p, tau, q, m, K):
        """Stored pop-pos for special K; handles empty strings and empty
        suffixes."""
        if m > len(self.w):
            return 0, None
        if j < i:
            return self._E(q, m, tau)
        self.led.touch()
        return self.PO[(i, j, p, tau, m, q)][K]

    def pop_pos_any_k(self, i, j, p, tau, q, m, k):
        """pop-pos for arbitrary k: pops the final stack in special chunks,
        each from the prefix configuration holding the remaining stack."""
        H = self.hd(i, j, p, tau).height
        total, st, kk, hcur = 0, q, k, H
        while kk > 0:
            jj = self._prefix_cfg(i, j, p, tau, H, hcur)
            K = self.sk.largest_le(kk)
            o, r = self._pop_layer(i, jj, p, tau, st, m + total, K)
            if o == 0:
                return 0, None
            total += o
            st = r
            kk -= K
            hcur -= K
        return total, st

    def _max_pops(self, i, j, p, tau, H, q, m, limit, kmax):
        """Largest k <= kmax such that the run from q on w[m..] pops the top k
        symbols of the final stack of (p, w[i..j], tau) within `limit`
        symbols.  Greedy over chunk sizes N^b, largest first."""
        kd, o, st = 0, 0, q
        for b in reversed(range(self.sk.g)):
            chunk = self.sk.N ** b
            while kd + chunk <= kmax:
                jj = self._prefix_cfg(i, j, p, tau, H, H - kd)
                oo, rr = self._pop_layer(i, jj, p, tau, st, m + o, chunk)
                if oo == 0 or o + oo > limit:
                    break
                kd += chunk
                o += oo
                st = rr
        return kd, o, st

    def _top_at(self, i, j, p, tau, H, height):
        """Stack symbol at `height` in the final stack of (p, w[i..j], tau)."""
        jj = self._prefix_cfg(i, j, p, tau, H, height)
        return self.hd(i, jj, p, tau).top

    # -- update -------------------------------------------------------------------

    def _shape(self, i, j, p, tau, l, sym):
        """Run of (p, w[i..j], tau) after w[l] := sym, from old entries only.

        Returns ("same",) when the run stops before l, ("dead", hd),
        ("empty", hd) or ("open", hd, low, mid, seg).  For an open run the
        final stack is: heights 1..low from the run on w[i..l-1], an
        optional single symbol mid = (height, push_pos, symbol), and the
        run seg = (s, state, top, base) on w[s..j] sitting at height base.
        """
        u1 = self.hd(i, l - 1, p, tau)
        if u1.end_state is None or u1.empty_pos or u1.defined_len < l - i:
            return ("same",)
        h, p1, t1 = u1.height, u1.end_state, u1.top
        tr = self.delta(p1, sym, t1)
        if tr is None:
            return ("dead", HatDelta(None, h, t1, 0, l - i))
        p2, push = tr
        mid = None
        if len(push) == 1:
            m1, q = self._E(p2, l + 1, push[0])
            if m1 == 0 or l + m1 > j:
                return self._open(i, j, h - 1, None, (l + 1, p2, push[0], h))
            e, q3 = l + m1, q
        elif len(push) == 2:
            a, b = push
            m1, q = self._E(p2, l + 1, a)
            if m1 == 0 or l + m1 > j:
                return self._open(i, j, h - 1, (h, l - i, b), (l + 1, p2, a, h + 1))
            m2, q3 = self._E(q, l + m1 + 1, b)
            if m2 == 0 or l + m1 + m2 > j:
                return self._open(i, j, h - 1, None, (l + m1 + 1, q, b, h))
            e = l + m1 + m2
        else:
            e, q3 = l, p2
        # back at height h-1 after position e, on the bottom of the old stack
        if h == 1:
            return ("empty", HatDelta(q3, 0, None, e - i + 1, e - i + 1))
        z = self._prefix_cfg(i, l - 1, p, tau, h, h - 1)
        k, o, r = self._max_pops(i, z, p, tau, h - 1, q3, e + 1, j - e, h - 1)
        if k == h - 1:
            return ("empty", HatDelta(r, 0, None, e + o - i + 1, e + o - i + 1))
        B = h - 1 - k
        t3 = self._top_at(i, l - 1, p, tau, h, B)
        return self._open(i, j, B - 1, None, (e + o + 1, r, t3, B))

    def _open(self, i, j, low, mid, seg):
        s, ps, ts, base = seg
        r = self.hd(s, j, ps, ts)
        H = base - 1 + r.height
        if r.empty_pos:
            raise InvariantError(f"segment run from {s} empties inside [{i}, {j}]")
        if r.end_state is None:
            return ("dead", HatDelta(None, H, r.top, 0, s - i + r.defined_len))
        return ("open", HatDelta(r.end_state, H, r.top, 0, j - i + 1), low, mid, seg)

    def _shape_pp(self, i, j, p, tau, l, shape, k):
        _, hd, low, mid, (s, ps, ts, base) = shape
        if k <= low:
            return self.push_pos_any_k(i, l - 1, p, tau, k)
        if mid is not None and k == mid[0]:
            return mid[1]
        return (s - i) + self.push_pos_any_k(s, j, ps, ts, k - base + 1)

    def _shape_pop(self, i, j, p, tau, l, shape, q, m, k):
        _, hd, low, mid, (s, ps, ts, base) = shape
        total, st, kk = 0, q, k
        segH = hd.height - base + 1
        a = min(kk, segH)
        o, st = self.pop_pos_any_k(s, j, ps, ts, st, m, a)
        if o == 0:
            return 0, None
        total, kk = o, kk - a
        if kk and mid is not None:
            o, st = self._E(st, m + total, mid[2])
            if o == 0:
                return 0, None
            total += o
            kk -= 1
        if kk:
            u1h = self.hd(i, l - 1, p, tau).height
            jj = self._prefix_cfg(i, l - 1, p, tau, u1h, low)
            o, st = self.pop_pos_any_k(i, jj, p, tau, st, m + total, kk)
            if o == 0:
                return 0, None
            total += o
        return total, st

    def _relabel(self, l, sym):
        """w[l] := sym.  New entries are computed from the old tables and
        committed together at the end."""
        L = len(self.w)
        special = self.sk.upto
        newHD, newPP, newPO = {}, {}, {}
        shapes = {}
        for i in range(1, l + 1):
            for j in range(l, L + 1):
                for p in self.Q:
                    for tau in self.G:
                        key = (i, j, p, tau)
                        sh = self._shape(i, j, p, tau, l, sym)
                        shapes[key] = sh
                        if sh[0] == "same":
                            continue
                        hd = sh[1]
                        newHD[key] = hd
                        if sh[0] != "open":
                            newPP[key] = None
                            for m in range(j + 1, L + 1):
                                for q in self.Q:
                                    newPO[key + (m, q)] = None
                            continue
                        ks = special(hd.height)
                        newPP[key] = {k: self._shape_pp(i, j, p, tau, l, sh, k) for k in ks}
                        for m in range(j + 1, L + 1):
                            for q in self.Q:
                                newPO[key + (m, q)] = {
                                    k: self._shape_pop(i, j, p, tau, l, sh, q, m, k) for k in ks}
        # suffix contains l, configuration does not
        for m in range(2, l + 1):
            for i in range(1, m):
                for j in range(i, m):
                    for p in self.Q:
                        for tau in self.G:
                            key = (i, j, p, tau)
                            if key not in self.PP:
                                continue
                            H = self.HD[key].height
                            for q in self.Q:
                                row = self.PO[key + (m, q)]
                                new = {}
                                for k, (o, r) in row.items():
                                    self.led.touch()
                                    if o and m + o - 1 < l:
                                        new[k] = (o, r)
                                    else:
                                        new[k] = self._pop_across(i, j, p, tau, H, q, m, k, l, shapes)
                                newPO[key + (m, q)] = new
        self.w[l - 1] = sym
        self._commit(newHD, newPP, newPO)

    def _pop_across(self, i, j, p, tau, H, q, m, k, l, shapes):
        kp, o1, r1 = self._max_pops(i, j, p, tau, H, q, m, l - m, k - 1)
        t1 = self._top_at(i, j, p, tau, H, H - kp)
        sh = shapes[(m + o1, len(self.w), r1, t1)]
        if sh[0] == "same":
            hd = self.HD[(m + o1, len(self.w), r1, t1)]
        else:
            hd = sh[1]
        if not hd.empty_pos:
            return 0, None
        e, q1 = hd.empty_pos, hd.end_state
        rest = k - kp - 1
        if not rest:
            return o1 + e, q1
        jj = self._prefix_cfg(i, j, p, tau, H, H - kp - 1)
        o2, r2 = self.pop_pos_any_k(i, jj, p, tau, q1, m + o1 + e, rest)
        if o2 == 0:
            return 0, None
        return o1 + e + o2, r2

    def _commit(self, newHD, newPP, newPO):
        for key, v in newHD.items():
            self.HD[key] = v
        for tab, new in ((self.PP, newPP), (self.PO, newPO)):
            for key, v in new.items():
                if v is None:
                    tab.pop(key, None)
                else:
                    tab[key] = v
        self.led.step(len(newHD) + len(newPP) + len(newPO))

    # -- insertion ----------------------------------------------------------------

    @staticmethod
    def _shift_hd(hd: HatDelta, r) -> HatDelta:
        """Entry of a string with a neutral symbol inserted at relative
        position r, from the entry of the string without it."""
        if hd.empty_pos:
            if hd.empty_pos >= r:
                return HatDelta(hd.end_state, hd.height, hd.top, hd.empty_pos + 1, hd.defined_len + 1)
            return hd
        if hd.defined_len >= r - 1:
            return HatDelta(hd.end_state, hd.height, hd.top, 0, hd.defined_len + 1)
        return hd

    def _shift(self, pos):
        """Insert the neutral symbol at position pos, re-indexing all tables."""
        L = len(self.w)
        HD, PP, PO = self.HD, self.PP, self.PO
        nHD, nPP, nPO = {}, {}, {}

        def old_range(i, j):
            # new [i, j] -> (old i, old j, relative placeholder position or None)
            if j < pos:
                return i, j, None
            if i > pos:
                return i - 1, j - 1, None
            return i, j - 1, pos - i + 1

        for i in range(1, L + 2):
            for j in range(i, L + 2):
                oi, oj, r = old_range(i, j)
                for p in self.Q:
                    for tau in self.G:
                        ok = (oi, oj, p, tau)
                        hd = HD[ok] if oj >= oi else HatDelta(p, 1, tau, 0, 0)
                        if r is not None:
                            hd = self._shift_hd(hd, r)
                        nk = (i, j, p, tau)
                        nHD[nk] = hd
                        if oj >= oi:
                            row = PP.get(ok)
                            if row is None:
                                continue
                            if r is not None:
                                row = {k: x + 1 if x >= r - 1 else x for k, x in row.items()}
                        else:
                            row = {1: 1}
                        nPP[nk] = row
        L1 = L + 1
        for (i, j, p, tau) in nPP:
            oi, oj, r = old_range(i, j)
            for m in range(j + 1, L1 + 1):
                om = m if m <= pos else m - 1
                rv = pos - m + 1 if m <= pos else None
                for q in self.Q:
                    if om > L:
                        row = {k: (0, None) for k in nPP[(i, j, p, tau)]}
                    elif oj >= oi:
                        row = PO[(oi, oj, p, tau, om, q)]
                    else:
                        row = {1: self._E(q, om, tau)}
                    if rv is not None:
                        row = {k: (o + 1, s) if o and o >= rv else (o, s) for k, (o, s) in row.items()}
                    nPO[(i, j, p, tau, m, q)] = row
        self.HD, self.PP, self.PO = nHD, nPP, nPO
        self.w.insert(pos - 1, NEUTRAL)
        self.led.step(len(nHD) + len(nPP) + len(nPO))

    # -- public operations --------------------------------------------------------------

    def relabel(self, l, sym):
        if not 1 <= l <= len(self.w):
            raise DCFLError(f"position {l} out of range 1..{len(self.w)}")
        if sym not in self.pda.alphabet:
            raise DCFLError(f"symbol {sym!r} not in the alphabet")
        self.led.begin("relabel")
        self._relabel(l, sym)
        return self.led.end()

    def insert(self, l, sym, side="before"):
        """Insert sym before or after position l (l = 1 into an empty
        string)."""
        if sym not in self.pda.alphabet:
            raise DCFLError(f"symbol {sym!r} not in the alphabet")
        if side not in ("before", "after"):
            raise DCFLError(f"side must be 'before' or 'after', not {side!r}")
        L = len(self.w)
        if L == 0:
            if l != 1:
                raise DCFLError("only position 1 is valid in an empty string")
            pos = 1
        else:
            if not 1 <= l <= L:
                raise DCFLError(f"position {l} out of range 1..{L}")
            pos = l if side == "before" else l + 1
        self.led.begin("insert")
        self._shift(pos)
        self._relabel(pos, sym)
        if 2 * len(self.w) >= self.n:
            self.n *= 2
            self._build()
        return self.led.end()

    def query(self, i, j) -> bool:
        """Is w[i..j] in the language?  j = i - 1 asks about the empty word."""
        self._check_range(i, j)
        self.led.begin("query")
        pda = self.pda
        if j < i:
            ok = pda.start in pda.final
        else:
            hd = self.hd(i, j, pda.start, pda.start_stack)
            ok = (hd.defined_len == j - i + 1 and hd.empty_pos in (0, j - i + 1)
                  and hd.end_state in pda.final)
        self.led.end()
        return ok

    @property
    def word(self) -> list[str]:
        return list(self.w)


def dcfl_init(w, pda: RDPDA, theta) -> DCFLEngine:
    if not isinstance(theta, Theta):
        theta = Theta.parse(theta)
    return DCFLEngine(w, pda, theta)


def dcfl_relabel(e: DCFLEngine, l, sym):
    return e.relabel(l, sym)


def dcfl_insert(e: DCFLEngine, l, sym, side="before"):
    return e.insert(l, sym, side)


def dcfl_query(e: DCFLEngine, i, j) -> bool:
    return e.query(i, j)


def _key(e: DCFLEngine, p, tau):
    if e.normalized:
        return (p, None), (tau, None)
    return p, tau


def _state(e: DCFLEngine, r):
    return r[0] if e.normalized and r is not None else r


def hatdelta(e: DCFLEngine, i, j, p, tau) -> HatDelta:
    """hatdelta in the names of the source machine."""
    p1, t1 = _key(e, p, tau)
    hd = e.hatdelta(i, j, p1, t1)
    if not e.normalized:
        return hd
    top = None
    if hd.top is not None:
        top = hd.end_state[1] if hd.end_state and hd.end_state[1] else hd.top[0]
    return HatDelta(_state(e, hd.end_state), hd.height, top, hd.empty_pos, hd.defined_len)


def push_pos_any_k(e: DCFLEngine, i, j, p, tau, k) -> int:
    p, tau = _key(e, p, tau)
    hd = e.hatdelta(i, j, p, tau)
    if not e._complete(hd, j - i + 1) and j >= i:
        raise DCFLError("push-pos is undefined: the run ends early")
    if not 1 <= k <= hd.height:
        raise DCFLError(f"k={k} outside 1..{hd.height}")
    return e.push_pos_any_k(i, j, p, tau, k)


def pop_pos_any_k(e: DCFLEngine, i, j, p, tau, q, m, k):
    p, tau = _key(e, p, tau)
    q = (q, None) if e.normalized else q
    hd = e.hatdelta(i, j, p, tau)
    if not e._complete(hd, j - i + 1) and j >= i:
        raise DCFLError("pop-pos is undefined: the run ends early")
    if not 1 <= k <= hd.height:
        raise DCFLError(f"k={k} outside 1..{hd.height}")
    if not j < m <= len(e.w) + 1:
        raise DCFLError(f"suffix start {m} must lie after {j}")
    o, r = e.pop_pos_any_k(i, j, p, tau, q, m, k)
    return o, _state(e, r)


# -- oracle comparison ------------------------------------------------------------


def _oracle_entry(e: DCFLEngine, i, j, p, tau):
    pda, w = e.pda, e.w
    rs = rdpda_run_oracle(pda, p, w[i - 1:j], (tau,))
    stack = rs.end_stack
    return HatDelta(rs.end_state, len(stack), stack[0] if stack else None,
                    rs.empty_pos, rs.defined_len)


def _oracle_push_pos(e: DCFLEngine, i, j, p, tau, k):
    best = None
    for x in range(0, j - i + 2):
        rs = rdpda_run_oracle(e.pda, p, e.w[i - 1:i - 1 + x], (tau,))
        if len(rs.end_stack) == k:
            best = x
    return best


def _oracle_pop_pos(e: DCFLEngine, i, j, p, tau, q, m, k):
    stack = rdpda_run_oracle(e.pda, p, e.w[i - 1:j], (tau,)).end_stack
    rs = rdpda_run_oracle(e.pda, q, e.w[m - 1:], stack[:k])
    if rs.empty_pos:
        return rs.empty_pos, rs.end_state
    return 0, None


@dataclass
class SweepResult:
    checked: int
    mismatches: list

    @property
    def ok(self) -> bool:
        return not self.mismatches


def dcfl_sweep(e: DCFLEngine, rng=None, samples=None, any_k=False) -> SweepResult:
    """Compare stored entries with oracle runs.

    samples=None checks every entry; otherwise random draws are made until
    `samples` entries were checked, each draw checking one hatdelta and,
    when the run completes, one push-pos and one pop-pos entry.  With
    any_k the composed lookups are checked for every k, not just the
    stored ones."""
    L = len(e.w)
    keys = [(i, j, p, t) for i in range(1, L + 1) for j in range(i, L + 1)
            for p in e.Q for t in e.G]
    res = SweepResult(0, [])
    bad = res.mismatches
    if samples is not None:
        draws = 0
        while keys and res.checked < samples and draws < 20 * samples:
            draws += 1
            key = rng.choice(keys)
            i, j, p, t = key
            want = _oracle_entry(e, i, j, p, t)
            res.checked += 1
            if e.HD.get(key) != want:
                bad.append(f"hatdelta{key}: {e.HD.get(key)} != {want}")
                continue
            if not e._complete(want, j - i + 1):
                if key in e.PP:
                    bad.append(f"pushpos{key}: row for an incomplete run")
                continue
            H = want.height
            k = rng.randint(1, H) if any_k else rng.choice(e.sk.upto(H))
            got = e.push_pos_any_k(i, j, p, t, k) if any_k else e.PP[key].get(k)
            want_pp = _oracle_push_pos(e, i, j, p, t, k)
            res.checked += 1
            if got != want_pp:
                bad.append(f"pushpos{key}[{k}]: {got} != {want_pp}")
            if j < L:
                m, q = rng.randint(j + 1, L), rng.choice(e.Q)
                got = (e.pop_pos_any_k(i, j, p, t, q, m, k) if any_k
                       else e.PO.get(key + (m, q), {}).get(k))
                want_po = _oracle_pop_pos(e, i, j, p, t, q, m, k)
                res.checked += 1
                if got != want_po:
                    bad.append(f"poppos{key + (m, q)}[{k}]: {got} != {want_po}")
        return res
    for key in keys:
        i, j, p, t = key
        want = _oracle_entry(e, i, j, p, t)
        got = e.HD.get(key)
        res.checked += 1
        if got != want:
            bad.append(f"hatdelta{key}: {got} != {want}")
            continue
        complete = e._complete(want, j - i + 1)
        if complete != (key in e.PP):
            bad.append(f"pushpos{key}: row present={key in e.PP}, run complete={complete}")
            continue
        if not complete:
            continue
        H = want.height
        ks = range(1, H + 1) if any_k else e.sk.upto(H)
        for k in ks:
            w_pp = _oracle_push_pos(e, i, j, p, t, k)
            g_pp = e.push_pos_any_k(i, j, p, t, k) if any_k else e.PP[key].get(k)
            res.checked += 1
            if g_pp != w_pp:
                bad.append(f"pushpos{key}[{k}]: {g_pp} != {w_pp}")
        for m in range(j + 1, L + 1):
            for q in e.Q:
                for k in ks:
                    want_pp = _oracle_pop_pos(e, i, j, p, t, q, m, k)
                    if any_k:
                        got_pp = e.pop_pos_any_k(i, j, p, t, q, m, k)
                    else:
                        got_pp = e.PO.get(key + (m, q), {}).get(k)
                    res.checked += 1
                    if got_pp != want_pp:
                        bad.append(f"poppos{key + (m, q)}[{k}]: {got_pp} != {want_pp}")
    return res
