"""Dynamic membership for a DTA under relabelings and leaf insertions.

The engine keeps a partition hierarchy of the tree as a tree of records.
Each record stores state functions for its special node pairs and the
tree-function tables used to combine them.  A query reads O(h) stored
values.  Changes recompute the records containing the changed node;
records that outgrow their budget are replaced by re-computation threads
that build a fresh sub-hierarchy a few rounds at a time.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Optional

from .automata import DTA, AlphabetError
from .ledger import WorkLedger
from .records import IntDTA, Record, fill_pairs
from .tables import BaseTables, UnitTables
from .tree import TreeError, UnrankedTree
from .treefuncs import TreeFunctions
from .zones import Theta, Zone, level_budget, split_into


class InvariantError(RuntimeError):
    """An internal consistency check failed."""


@dataclass
class EngineConfig:
    theta: Theta
    rounds_per_change: int = 4
    n: Optional[int] = None
    pruned: bool = True
    new_zone_div: int = 3

    @property
    def h(self) -> int:
        return self.theta.h


class Thread:
    """Rebuilds the sub-hierarchy below one record."""

    def __init__(self, target: Record, n_new: int, double: bool):
        self.target = target
        self.n_new = n_new
        self.double = double
        self.phase = "split"
        self.queue: deque = deque()
        self.created: list[Record] = []
        self.new_units: list[Record] = []
        self.fill_pos = 0
        self.by_right: dict = {}
        self.alive = True
        self.rounds = 0

    def watch(self, obj):
        self.by_right.setdefault(obj.right if isinstance(obj, Record) else obj[1], []).append(obj)


class TreeEngine(TreeFunctions):
    def __init__(self, t: UnrankedTree, dta: DTA, cfg: EngineConfig):
        for x in t.nodes():
            if t.label[x] not in dta.alphabet:
                raise AlphabetError(f"label {t.label[x]!r} of node {x} not in the alphabet")
        self.t = t
        self.dta = dta
        self.A = IntDTA(dta)
        self.cfg = cfg
        self.theta = cfg.theta.require_tree()
        self.h = cfg.theta.h
        self.base_level = 3 if cfg.pruned else 1
        self.n = cfg.n if cfg.n is not None else max(4 * t.size, 2 ** self.h)
        self.led = WorkLedger()
        self.cand: list[list[Record]] = [[] for _ in t.nodes()]
        self.threads: list[Thread] = []
        self.violations = 0
        self._rid = 0
        self.root = self._build_initial()

    # -- budgets -------------------------------------------------------------

    def hard(self, level, n=None) -> int:
        return level_budget(self.n if n is None else n, level, self.theta)

    def new_cap(self, level, n=None) -> int:
        return max(1, self.hard(level, n) // self.cfg.new_zone_div)

    # -- construction --------------------------------------------------------

    def _new_record(self, level, left, right, lower, parent) -> Record:
        t = self.t
        if left == right:
            upper = left
        elif lower is None:
            upper = None
        else:
            upper = lower
            while t.parent[upper] != t.parent[left]:
                upper = t.parent[upper]
        self._rid += 1
        return Record(self._rid, level, left, right, lower, upper, parent)

    def _zone_nodes(self, left, right, lower) -> list[int]:
        t = self.t
        out = []
        for top in t.siblings_between(left, right):
            stack = [top]
            while stack:
                x = stack.pop()
                out.append(x)
                if x != lower:
                    stack.extend(reversed(list(t.children(x))))
        self.led.step(len(out))
        return out

    def _make_base(self, R: Record):
        R.base = True
        R.nodes = self._zone_nodes(R.left, R.right, R.lower)
        R.loc = {x: i for i, x in enumerate(R.nodes)}
        R.size = len(R.nodes)
        for x in R.nodes:
            self.cand[x].append(R)

    def _fill(self, R: Record):
        if R.base:
            R.nodes = self._zone_nodes(R.left, R.right, R.lower)
            R.loc = {x: i for i, x in enumerate(R.nodes)}
            R.size = len(R.nodes)
            R.tf = BaseTables(R, self.t)
        else:
            R.size = sum(X.size for X in R.units)
            R.tf = UnitTables(R, self.t)
        self.led.touch(R.tf.work)
        fill_pairs(R, self.t, self.A, R.base, self.led)
        R.filled = True

    def _build_initial(self) -> Record:
        """Offline construction from node-set partitions."""
        t = self.t
        root = self._new_record(self.h, t.root, t.root, None, None)
        order = []
        todo = [(root, Zone(t.root, t.root))]
        while todo:
            R, z = todo.pop()
            order.append(R)
            if R.level == self.base_level:
                self._make_base(R)
                continue
            for part in split_into(t, z, self.new_cap(R.level - 1)):
                X = self._new_record(R.level - 1, part.left, part.right, part.lower, R)
                R.units.append(X)
                todo.append((X, part))
        for R in reversed(order):
            R.primary = True
            self._fill(R)
        return root

    # -- evaluation on integer states -----------------------------------------

    def _rho(self, v) -> int:
        t, A = self.t, self.A
        R = self.primary_base(v)
        cur = v
        chain = []
        while R.lower is not None and self.f_anc_or_self(cur, R.lower):
            if cur != R.lower:
                chain.append((R, cur))
            cur = R.lower
            R = R.parent
        if t.fchild[cur] is None:
            a = A.start
        else:
            a = R.hp[(t.fchild[cur], t.lchild[cur])][A.start]
        q = A.delta[t.label[cur]][a]
        self.led.touch(1 + len(chain))
        for S, node in reversed(chain):
            q = S.vp[(S.lower, node)][q]
        return q

    def _seq(self, p, x, y) -> int:
        """A(p, x, y) for siblings x <= y."""
        t = self.t
        Z, X, Y = self.lcr(x, y)
        w = Z.lower
        if w is not None:
            par = t.parent[x]
            wp = None
            if par is None:
                wp = x
            elif t.parent[w] == par:
                if self.f_preceq(x, w) and self.f_preceq(w, y):
                    wp = w
            elif self.f_anc(par, w):
                c = self.f_anc_child(par, w)
                if self.f_preceq(x, c) and self.f_preceq(c, y):
                    wp = c
            if wp is not None:
                if wp != x:
                    p = self._seq(p, x, t.lsib[wp])
                p = self.A.hor[p][self._rho(wp)]
                if wp != y:
                    p = self._seq(p, t.rsib[wp], y)
                return p
        f = Z.hp.get((x, y))
        self.led.touch()
        if f is not None:
            return f[p]
        if X is None:
            raise InvariantError(f"missing horizontal pair {(x, y)} in {Z}")
        p = self._seq(p, x, X.right)
        a, b = t.rsib[X.right], t.lsib[Y.left]
        if a != Y.left:
            p = Z.hp[(a, b)][p]
        return self._seq(p, Y.left, y)

    def _around(self, m, c, qc) -> int:
        """State at m when its child c has state qc."""
        t, A = self.t, self.A
        p = A.start
        if c != t.fchild[m]:
            p = self._seq(p, t.fchild[m], t.lsib[c])
        p = A.hor[p][qc]
        if c != t.lchild[m]:
            p = self._seq(p, t.rsib[c], t.lchild[m])
        return A.delta[t.label[m]][p]

    def _B(self, q, u, v) -> int:
        """State at ancestor v when the state at u is q."""
        if u == v:
            return q
        t = self.t
        Z, X, Y = self.lcr(u, v)
        w = Z.lower
        if w is not None:
            m = self.f_lca(w, u)
            if m != u and self.f_anc_or_self(v, m):
                c = self.f_anc_child(m, u)
                qm = self._around(m, c, self._B(q, u, c))
                return self._B(qm, m, v)
        f = Z.vp.get((u, v))
        self.led.touch()
        if f is not None:
            return f[q]
        if X is None:
            raise InvariantError(f"missing vertical pair {(u, v)} in {Z}")
        a = self.top_anc(u, X.level)
        q = self._B(q, u, a)
        P = t.parent[a]
        qP = self._around(P, a, q)
        if P == v:
            return qP
        b = Y.lower
        if P != b:
            qP = Z.vp[(P, b)][qP]
            self.led.touch()
        return self._B(qP, b, v)

    # -- public evaluation API ------------------------------------------------

    def eval_rho(self, v) -> str:
        self.t.check(v)
        return self.A.b_names[self._rho(v)]

    def eval_A(self, p, u, u2) -> str:
        if not self.f_preceq(u, u2):
            raise TreeError(f"{u} is not a left sibling of {u2}")
        return self.A.a_names[self._seq(self.A.ai[p], u, u2)]

    def eval_B(self, q, u, u2) -> str:
        if not self.f_anc_or_self(u2, u):
            raise TreeError(f"{u2} is not an ancestor of {u}")
        return self.A.b_names[self._B(self.A.bi[q], u, u2)]

    def eval_child(self, v, k):
        return self.f_child(v, k)

    def eval_num_desc(self, u, v) -> int:
        return self.f_num_desc(u, v)

    # -- what-if evaluation for a relabeling of v to sym ----------------------

    def _state_new(self, v, sym, x) -> int:
        A, t = self.A, self.t
        if self.f_anc_or_self(x, v):
            p = A.start
            if t.fchild[v] is not None:
                p = self._seq(p, t.fchild[v], t.lchild[v])
            q = A.delta[sym][p]
            return self._B(q, v, x)
        return self._rho(x)

    def _seq_new(self, v, sym, p, x, y) -> int:
        t, A = self.t, self.A
        u = t.parent[x]
        if u is None:
            hit = self.f_anc_or_self(x, v)
            w = x
        else:
            hit = self.f_anc(u, v)
            if hit:
                w = self.f_anc_child(u, v)
                hit = self.f_preceq(x, w) and self.f_preceq(w, y)
        if not hit:
            return self._seq(p, x, y)
        p1 = p if w == x else self._seq(p, x, t.lsib[w])
        p2 = A.hor[p1][self._state_new(v, sym, w)]
        return p2 if w == y else self._seq(p2, t.rsib[w], y)

    def _path_new(self, v, sym, q, x, y) -> int:
        """New B(q, y, x) for x an ancestor of y."""
        t, A = self.t, self.A
        if self.f_anc_or_self(y, v) or not self.f_anc_or_self(x, v):
            return self._B(q, y, x)
        u = self.f_lca(v, y)
        z = self.f_anc_child(u, y)
        if u == v:
            p = A.start
            if z != t.fchild[u]:
                p = self._seq(p, t.fchild[u], t.lsib[z])
            p = A.hor[p][self._B(q, y, z)]
            if z != t.lchild[u]:
                p = self._seq(p, t.rsib[z], t.lchild[u])
            q2 = A.delta[sym][p]
        else:
            z2 = self.f_anc_child(u, v)
            first, second = (z, z2) if self.f_prec(z, z2) else (z2, z)
            sv = {z: self._B(q, y, z), z2: self._state_new(v, sym, z2)}
            p = A.start
            if first != t.fchild[u]:
                p = self._seq(p, t.fchild[u], t.lsib[first])
            p = A.hor[p][sv[first]]
            if t.rsib[first] != second:
                p = self._seq(p, t.rsib[first], t.lsib[second])
            p = A.hor[p][sv[second]]
            if second != t.lchild[u]:
                p = self._seq(p, t.rsib[second], t.lchild[u])
            q2 = A.delta[t.label[u]][p]
        return self._B(q2, u, x)

    def evaluate_state(self, v, sym, x) -> str:
        self._check_sym(sym)
        return self.A.b_names[self._state_new(v, sym, x)]

    def evaluate_sequence(self, v, sym, p, x, y) -> str:
        self._check_sym(sym)
        return self.A.a_names[self._seq_new(v, sym, self.A.ai[p], x, y)]

    def evaluate_path(self, v, sym, q, x, y) -> str:
        self._check_sym(sym)
        return self.A.b_names[self._path_new(v, sym, self.A.bi[q], x, y)]

    def _check_sym(self, sym):
        if sym not in self.A.delta:
            raise AlphabetError(f"symbol {sym!r} not in the alphabet")

    # -- partition step on zone boundaries -------------------------------------

    def partition_step_fast(self, left, right, lower, m) -> list[list]:
        """Same split as zones.partition_step, computed from boundary nodes
        and table-backed counts.  Returns [left, right, lower] triples."""
        t = self.t
        if m < 1:
            raise ValueError("m must be positive")
        w = lower
        wsub = 0 if w is None else self.f_num_desc(w, w) - 1

        def cnt(x):
            c = self.f_num_desc(x, x)
            if w is not None and self.f_anc_or_self(x, w):
                c -= wsub
            return c

        def holds_w(run):
            return w is not None and any(self.f_anc_or_self(x, w) for x in run)

        thr = -(-m // 2)
        run = t.siblings_between(left, right)
        self.led.step(len(run))
        pr = None
        while True:
            counts = [cnt(x) for x in run]
            big = next((i for i, c in enumerate(counts) if c > thr), None)
            if big is None:
                break
            pr = run[big]
            run = list(t.children(pr))
            self.led.step(len(run))
        acc, j = 0, None
        for i, c in enumerate(counts):
            acc += c
            if acc >= thr:
                j = i
                break
        if j is None or acc > m:
            raise InvariantError("partition step found no part of the right size")
        out = []
        for part in (run[:j + 1], run[j + 1:]):
            if part:
                out.append([part[0], part[-1], w if holds_w(part) else None])
        if pr is None:
            return out
        if w is None or self.f_anc(pr, w):
            out.append([left, right, pr])
            return out
        top_parent = t.parent[left]

        def top_of(x):
            if top_parent is None:
                return left
            return x if t.parent[x] == top_parent else self.f_anc_child(top_parent, x)

        tw, tp = top_of(w), top_of(pr)
        if tw != tp:
            out.append([tp, tp, pr])
            if tp != left:
                out.append([left, t.lsib[tp], w if t.nlsib[tw] < t.nlsib[tp] else None])
            if tp != right:
                out.append([t.rsib[tp], right, w if t.nlsib[tw] > t.nlsib[tp] else None])
            return out
        z = self.f_lca(pr, w)
        a1, a2 = self.f_anc_child(z, pr), self.f_anc_child(z, w)
        if t.nlsib[a1] < t.nlsib[a2]:
            first, lo1, lo2 = a1, pr, w
        else:
            first, lo1, lo2 = a2, w, pr
        out.append([t.fchild[z], first, lo1])
        out.append([t.rsib[first], t.lchild[z], lo2])
        out.append([left, right, z])
        return out

    # -- changes ---------------------------------------------------------------

    def _containing(self, v) -> list[Record]:
        lst = self.cand[v]
        lst[:] = [R for R in lst if R.alive]
        seen = {}
        for B in lst:
            R = B
            while R is not None and R.rid not in seen:
                seen[R.rid] = R
                R = R.parent
        self.led.step(len(seen))
        return sorted(seen.values(), key=lambda R: (R.level, R.rid))

    def _recompute(self, v):
        for R in self._containing(v):
            if R.filled and R.alive:
                fill_pairs(R, self.t, self.A, R.base, self.led)

    def relabel(self, u, sym):
        self.t.check(u)
        self._check_sym(sym)
        self.led.begin("relabel")
        v0 = self.violations
        self.t.label[u] = sym
        self._recompute(u)
        self._advance(u)
        self.led.end(self._live(), self.violations - v0)

    def add_child(self, u, sym) -> int:
        t = self.t
        t.check(u)
        self._check_sym(sym)
        self.led.begin("addchild")
        v0 = self.violations
        c = t.lchild[u]
        v = t.attach_last_child(u, sym)
        self.cand.append([])
        anchor = c if c is not None else u
        bases = [R for R in self.cand[anchor] if R.alive]
        seen = set()
        for B in bases:
            B.nodes.append(v)
            B.loc[v] = len(B.nodes) - 1
            self.cand[v].append(B)
            if B.tf is not None:
                self.led.touch(B.tf.add(v, u, c))
            R = B
            while R is not None and R.rid not in seen:
                seen.add(R.rid)
                R.size += 1
                if c is not None and R.right == c:
                    R.right = v
                    R.ntops += 1
                P = R.parent
                if P is not None and isinstance(P.tf, UnitTables):
                    i = P.uidx.get(R.rid)
                    if i is not None and P.units[i] is R:
                        self.led.touch(P.tf.add(i))
                R = P
        if c is not None:
            for th in self.threads:
                objs = th.by_right.pop(c, None)
                if objs:
                    for o in objs:
                        if isinstance(o, Record):
                            if o.right == c:
                                o.right = v
                        elif o[1] == c:
                            o[1] = v
                    th.by_right.setdefault(v, []).extend(objs)
        self._recompute(v)
        self._check_limits(v)
        self._advance(v)
        self.led.end(self._live(), self.violations - v0)
        return v

    def query(self, v) -> bool:
        self.t.check(v)
        self.led.begin("query")
        ok = self._rho(v) in self.A.final
        self.led.end(self._live(), 0)
        return ok

    # -- threads ----------------------------------------------------------------

    def _live(self) -> int:
        return sum(1 for th in self.threads if th.alive)

    def _start_thread(self, P: Record, n_new=None, double=False) -> Thread:
        if P.thread is not None and P.thread.alive:
            P.thread.alive = False
        th = Thread(P, self.n if n_new is None else n_new, double)
        d = [P.left, P.right, P.lower]
        th.watch(d)
        th.queue.append((P, d, P.level - 1))
        P.thread = th
        self.threads.append(th)
        return th

    def _check_limits(self, v):
        t = self.t
        for R in self.chain(v):
            if R.level >= self.h:
                break
            hard = self.hard(R.level)
            P = R.parent
            if R.size > hard:
                self.violations += 1
                th = P.thread if P.thread is not None and P.thread.alive else self._start_thread(P)
                self._finish(th)
                return self._check_limits(v)
            if 2 * R.size >= hard and (P.thread is None or not P.thread.alive):
                self._start_thread(P)
        root = self.root
        if 2 * t.size >= self.n and not (root.thread is not None and root.thread.alive
                                         and root.thread.double):
            self._start_thread(root, 2 * self.n, True)
        if t.size > self.n:
            self.violations += 1
            self._finish(root.thread)

    def _finish(self, th: Thread):
        while th.alive:
            self._round(th)

    def _advance(self, v):
        chain = self.chain(v)
        ids = {R.rid for R in chain}
        todo = sorted((th for th in self.threads if th.alive and th.target.rid in ids),
                      key=lambda th: (th.target.level, th.target.rid))
        for th in todo:
            for _ in range(self.cfg.rounds_per_change):
                if not th.alive:
                    break
                self._round(th)
        self.threads = [th for th in self.threads if th.alive]

    def recomputation_tick(self):
        """One round for every live thread."""
        self.led.begin("tick")
        for th in sorted(self.threads, key=lambda th: (th.target.level, th.target.rid)):
            if th.alive:
                self._round(th)
        self.threads = [th for th in self.threads if th.alive]
        self.led.end(self._live(), 0)

    def _round(self, th: Thread):
        th.rounds += 1
        self.led.round()
        if th.phase == "split":
            if not th.queue:
                th.phase = "fill"
                return
            owner, d, L = th.queue.popleft()
            size = self.zone_size(*d)
            cap = self.new_cap(L, th.n_new)
            if size <= cap:
                R = self._new_record(L, d[0], d[1], d[2], owner)
                th.created.append(R)
                th.watch(R)
                (th.new_units if owner is th.target else owner.units).append(R)
                if L == self.base_level:
                    self._make_base(R)
                else:
                    nd = [R.left, R.right, R.lower]
                    th.watch(nd)
                    th.queue.append((R, nd, L - 1))
            else:
                parts = self.partition_step_fast(d[0], d[1], d[2], cap)
                for nd in reversed(parts):
                    th.watch(nd)
                    th.queue.appendleft((owner, nd, L))
        elif th.phase == "fill":
            if th.fill_pos < len(th.created):
                R = th.created[len(th.created) - 1 - th.fill_pos]
                th.fill_pos += 1
                self._fill(R)
            if th.fill_pos >= len(th.created):
                th.phase = "swap"
        else:
            self._swap(th)

    def _swap(self, th: Thread):
        P = th.target
        stack = list(P.units)
        while stack:
            X = stack.pop()
            X.alive = False
            X.primary = False
            if X.thread is not None:
                X.thread.alive = False
            stack.extend(X.units)
            self.led.step()
        P.units = th.new_units
        for R in th.created:
            R.primary = True
        self._fill(P)
        th.alive = False
        P.thread = None
        if th.double:
            self.n = th.n_new
        for R in th.created:
            if R.level < self.h and 2 * R.size >= self.hard(R.level):
                Q = R.parent
                if Q.alive and (Q.thread is None or not Q.thread.alive):
                    self._start_thread(Q)

    # -- invariants ---------------------------------------------------------------

    def primary_records(self) -> list[Record]:
        out, stack = [], [self.root]
        while stack:
            R = stack.pop()
            out.append(R)
            stack.extend(R.units)
        return out

    def partition_problems(self) -> list[str]:
        """Budget checks on the primary hierarchy from stored sizes."""
        probs = []
        parts_cap = 10 * self.n ** self.theta.value
        for R in self.primary_records():
            if R.level < self.h and R.size > self.hard(R.level):
                probs.append(f"{R}: size above n^(l*theta) = {self.hard(R.level)}")
            if len(R.units) > parts_cap:
                probs.append(f"{R}: {len(R.units)} parts")
            if not R.base and R.size != sum(X.size for X in R.units):
                probs.append(f"{R}: size differs from the sum of its parts")
        if self.t.size > self.n:
            probs.append(f"tree size {self.t.size} above n = {self.n}")
        return probs


def engine_init(t: UnrankedTree, dta: DTA, cfg: EngineConfig | None = None) -> TreeEngine:
    if cfg is None:
        cfg = EngineConfig(Theta(4))
    return TreeEngine(t, dta, cfg)
