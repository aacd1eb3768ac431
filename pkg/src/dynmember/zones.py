"""Zones of an unranked tree and their partition hierarchies.

A zone is given by its top sibling run left..right and an optional lower
node whose children lie outside the zone.  Everything here works on node
sets of a fixed tree snapshot; the dynamic engine keeps its own records.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional

from .tree import UnrankedTree


class ZoneError(ValueError):
    pass


@dataclass(frozen=True)
class Theta:
    h: int

    def __post_init__(self):
        if not isinstance(self.h, int) or self.h < 2:
            raise ZoneError(f"theta must be 1/h with integer h >= 2, got h={self.h!r}")

    def require_tree(self):
        """Zone hierarchies need h >= 4 so a 3-pruned hierarchy has an
        internal level."""
        if self.h < 4:
            raise ZoneError(f"tree hierarchies need theta = 1/h with h >= 4, got 1/{self.h}")
        return self

    @property
    def value(self) -> float:
        return 1.0 / self.h

    @classmethod
    def parse(cls, text: str) -> "Theta":
        s = str(text).strip()
        if s.startswith("1/"):
            s = s[2:]
        try:
            return cls(int(s))
        except ValueError as exc:
            raise ZoneError(f"cannot parse theta {text!r}; expected 1/h") from exc

    def __str__(self):
        return f"1/{self.h}"


def root_floor(n: int, num: int, den: int) -> int:
    """Largest integer x with x**den <= n**num, i.e. floor(n^(num/den))."""
    if num <= 0:
        return 1
    target = n ** num
    x = int(round(target ** (1.0 / den)))
    while x > 0 and x ** den > target:
        x -= 1
    while (x + 1) ** den <= target:
        x += 1
    return x


def level_budget(n: int, level: int, theta: Theta) -> int:
    """floor(n^(level*theta))."""
    return root_floor(n, level, theta.h)


@dataclass(frozen=True)
class Zone:
    left: int
    right: int
    lower: Optional[int] = None

    @property
    def is_tree(self) -> bool:
        return self.left == self.right

    @property
    def complete(self) -> bool:
        return self.lower is None

    @property
    def kind(self) -> str:
        return ("complete" if self.complete else "incomplete") + \
               ("-tree" if self.is_tree else "-non-tree")

    def upper(self, t: UnrankedTree) -> Optional[int]:
        """Tree zones: the root.  Incomplete non-tree zones: the top node
        above the lower node.  Complete non-tree zones have none."""
        if self.is_tree:
            return self.left
        if self.lower is None:
            return None
        x = self.lower
        while t.parent[x] is not None and t.parent[x] != t.parent[self.left]:
            x = t.parent[x]
        return x

    def __str__(self):
        if self.is_tree:
            s = f"t_{self.left}"
        else:
            s = f"t_[{self.left},{self.right}]"
        if self.lower is not None:
            s += f"[{self.lower}]"
        return s


def zone_nodes(t: UnrankedTree, z: Zone) -> list[int]:
    out = []
    for top in t.siblings_between(z.left, z.right):
        stack = [top]
        while stack:
            x = stack.pop()
            out.append(x)
            if x != z.lower:
                kids = list(t.children(x))
                stack.extend(reversed(kids))
    if z.lower is not None and z.lower not in out:
        raise ZoneError(f"lower node {z.lower} is not inside {z}")
    return out


def zone_size(t: UnrankedTree, z: Zone) -> int:
    return len(zone_nodes(t, z))


def zone_from_nodes(t: UnrankedTree, nodes: Iterable[int]) -> Zone:
    """Recover boundary nodes from a node set, checking the zone definition."""
    s = set(nodes)
    if not s:
        raise ZoneError("empty node set")
    tops = [x for x in s if t.parent[x] is None or t.parent[x] not in s]
    par = {t.parent[x] for x in tops}
    if len(par) != 1:
        raise ZoneError("top nodes are not siblings")
    tops.sort(key=lambda x: t.nlsib[x])
    for a, b in zip(tops, tops[1:]):
        if t.rsib[a] != b:
            raise ZoneError("top nodes are not a contiguous sibling run")
    lower = None
    for x in s:
        if t.nchildren[x] == 0:
            continue
        inside = sum(1 for c in t.children(x) if c in s)
        if inside == t.nchildren[x]:
            continue
        if inside:
            raise ZoneError(f"node {x} has only some of its children inside")
        if lower is not None:
            raise ZoneError("two vertical connection nodes")
        lower = x
    return Zone(tops[0], tops[-1], lower)


def is_zone(t: UnrankedTree, nodes: Iterable[int]) -> bool:
    try:
        zone_from_nodes(t, nodes)
        return True
    except ZoneError:
        return False


# -- the partition step --------------------------------------------------------

def _counts_in(t: UnrankedTree, s: set, tops: list[int], lower) -> dict[int, int]:
    """Number of descendants inside s for every node of s (including itself)."""
    order = []
    stack = list(tops)
    while stack:
        x = stack.pop()
        order.append(x)
        if x != lower:
            stack.extend(t.children(x))
    cnt = {}
    for x in reversed(order):
        c = 1
        if x != lower:
            for k in t.children(x):
                c += cnt[k]
        cnt[x] = c
    return cnt


def partition_step(t: UnrankedTree, S: Zone, m: int) -> list[Zone]:
    """Split a zone with more than m nodes into at most five zones, one of
    which has between ceil(m/2) and m nodes.  Ties go to the leftmost
    large node and the shortest qualifying prefix."""
    nodes = zone_nodes(t, S)
    if m < 1:
        raise ZoneError("m must be positive")
    if len(nodes) <= m:
        raise ZoneError(f"zone has {len(nodes)} <= m={m} nodes")
    s = set(nodes)
    tops = t.siblings_between(S.left, S.right)
    cnt = _counts_in(t, s, tops, S.lower)
    thr = -(-m // 2)
    run = tops
    parent_of_run = None
    while True:
        big = [x for x in run if cnt[x] > thr]
        if not big:
            break
        w = big[0]
        parent_of_run = w
        run = list(t.children(w))
    acc = 0
    j = None
    for i, x in enumerate(run):
        acc += cnt[x]
        if acc >= thr:
            j = i
            break
    assert j is not None and acc <= m, (acc, m)

    def below(xs):
        out = []
        for x in xs:
            stack = [x]
            while stack:
                y = stack.pop()
                out.append(y)
                if y != S.lower:
                    stack.extend(t.children(y))
        return out

    s1 = below(run[:j + 1])
    s2 = below(run[j + 1:])
    dk = set(s1) | set(s2)
    rest = s - dk
    parts = [s1, s2]
    zones = [zone_from_nodes(t, p) for p in parts if p]
    if rest:
        zones += _split_remainder(t, rest, S, parent_of_run)
    return zones


def _split_remainder(t: UnrankedTree, rest: set, S: Zone, w) -> list[Zone]:
    """Split S minus a removed sibling forest (whose parent is w) into at
    most three zones."""
    if is_zone(t, rest):
        return [zone_from_nodes(t, rest)]
    vs = S.lower
    tops = [x for x in t.siblings_between(S.left, S.right) if x in rest]

    def comp_top(x):
        while t.parent[x] is not None and t.parent[x] in rest:
            x = t.parent[x]
        return x

    groups: list[list[int]]
    if vs is None or w is None or comp_top(vs) != comp_top(w):
        anchor = comp_top(w) if w is not None else tops[0]
        k = tops.index(anchor)
        left, mid, right = tops[:k], [anchor], tops[k + 1:]
        groups = [_forest(t, rest, mid), _forest(t, rest, left), _forest(t, rest, right)]
    else:
        pw = set()
        x = w
        while x is not None:
            pw.add(x)
            x = t.parent[x]
        z = vs
        while z not in pw:
            z = t.parent[z]
        kids = list(t.children(z))
        hit = 0
        for i, c in enumerate(kids):
            if _is_anc_or_self(t, c, vs) or _is_anc_or_self(t, c, w):
                hit = i
                break
        zj = _forest(t, rest, kids[:hit + 1])
        zg = _forest(t, rest, kids[hit + 1:])
        under = set(zj) | set(zg)
        groups = [zj, zg, [x for x in rest if x not in under]]
    return [zone_from_nodes(t, g) for g in groups if g]


def _is_anc_or_self(t, a, b) -> bool:
    while b is not None:
        if a == b:
            return True
        b = t.parent[b]
    return False


def _forest(t, rest: set, roots: list[int]) -> list[int]:
    out = []
    stack = [r for r in roots if r in rest]
    while stack:
        y = stack.pop()
        out.append(y)
        stack.extend(c for c in t.children(y) if c in rest)
    return out


# -- hierarchies ----------------------------------------------------------------

@dataclass
class HZone:
    zone: Zone
    level: int
    size: int
    children: list = field(default_factory=list)


@dataclass
class PartitionHierarchy:
    root: HZone
    theta: Theta
    n: int
    pruned3: bool

    @property
    def base_level(self) -> int:
        return 3 if self.pruned3 else 1

    def levels(self) -> dict[int, list[HZone]]:
        out: dict[int, list[HZone]] = {}
        todo = [self.root]
        while todo:
            z = todo.pop()
            out.setdefault(z.level, []).append(z)
            todo.extend(z.children)
        return out


def split_into(t: UnrankedTree, S: Zone, m: int) -> list[Zone]:
    """Repeated partition steps until every part has at most m nodes."""
    done, todo = [], [S]
    while todo:
        z = todo.pop(0)
        if zone_size(t, z) <= m:
            done.append(z)
        else:
            todo.extend(partition_step(t, z, m))
    order = {}
    for v in t.preorder():
        order[v] = len(order)
    done.sort(key=lambda z: order[z.left])
    return done


def build_hierarchy(t: UnrankedTree, theta: Theta, pruned3: bool = True,
                    n: Optional[int] = None) -> PartitionHierarchy:
    theta.require_tree()
    if n is None:
        n = max(4 * t.size, 2 ** theta.h)
    base = 3 if pruned3 else 1
    whole = Zone(t.root, t.root)
    root = HZone(whole, theta.h, t.size)
    todo = [root]
    while todo:
        hz = todo.pop()
        if hz.level <= base:
            continue
        m = max(1, level_budget(n, hz.level - 1, theta))
        for z in split_into(t, hz.zone, m):
            child = HZone(z, hz.level - 1, zone_size(t, z))
            hz.children.append(child)
            todo.append(child)
    return PartitionHierarchy(root, theta, n, pruned3)


def check_hierarchy(t: UnrankedTree, H: PartitionHierarchy) -> list[str]:
    problems = []
    th = H.theta
    cap = 10 * root_floor(H.n, 1, th.h) + 10
    todo = [H.root]
    while todo:
        hz = todo.pop()
        nodes = zone_nodes(t, hz.zone)
        if len(nodes) != hz.size:
            problems.append(f"{hz.zone}: stored size {hz.size} != {len(nodes)}")
        if hz.level < th.h and len(nodes) > level_budget(H.n, hz.level, th):
            problems.append(f"{hz.zone}: level {hz.level} zone has {len(nodes)} nodes")
        if hz.children:
            if len(hz.children) > 10 * H.n ** th.value:
                problems.append(f"{hz.zone}: {len(hz.children)} parts")
            seen = []
            for c in hz.children:
                seen.extend(zone_nodes(t, c.zone))
            if sorted(seen) != sorted(nodes):
                problems.append(f"{hz.zone}: parts do not partition the zone")
            todo.extend(hz.children)
        elif hz.level > H.base_level:
            problems.append(f"{hz.zone}: level {hz.level} zone is not refined")
    del cap
    return problems


def dump_hierarchy(H: PartitionHierarchy, t: Optional[UnrankedTree] = None) -> str:
    lines = []

    def walk(hz, depth):
        lines.append(f"{'  ' * depth}L{hz.level} {hz.zone.kind} {hz.zone} size={hz.size}")
        for c in hz.children:
            walk(c, depth + 1)

    walk(H.root, 0)
    return "\n".join(lines) + "\n"
