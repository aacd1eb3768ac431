"""Mutable unranked labelled trees.

Nodes are dense integer ids that are never reused.  Per-node links are kept
in parallel lists so that engines can index them cheaply.  The functions at
the bottom of the module walk the tree directly; they are slow on purpose
and serve as the reference implementation for every table-backed variant.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Optional


class TreeError(ValueError):
    pass


@dataclass
class NodeRecord:
    label: str
    parent: Optional[int]
    left_sibling: Optional[int]
    right_sibling: Optional[int]
    first_child: Optional[int]
    last_child: Optional[int]
    num_children: int
    num_lsiblings: int


class UnrankedTree:
    def __init__(self, root_label: str):
        self.label: list[str] = [root_label]
        self.parent: list[Optional[int]] = [None]
        self.lsib: list[Optional[int]] = [None]
        self.rsib: list[Optional[int]] = [None]
        self.fchild: list[Optional[int]] = [None]
        self.lchild: list[Optional[int]] = [None]
        self.nchildren: list[int] = [0]
        self.nlsib: list[int] = [0]
        self.root = 0

    @property
    def size(self) -> int:
        return len(self.label)

    def __len__(self):
        return len(self.label)

    def __contains__(self, v) -> bool:
        return isinstance(v, int) and 0 <= v < len(self.label)

    def check(self, v: int) -> int:
        if v not in self:
            raise TreeError(f"invalid node {v!r}")
        return v

    def record(self, v: int) -> NodeRecord:
        self.check(v)
        return NodeRecord(self.label[v], self.parent[v], self.lsib[v],
                          self.rsib[v], self.fchild[v], self.lchild[v],
                          self.nchildren[v], self.nlsib[v])

    def attach_last_child(self, u: int, sym: str) -> int:
        self.check(u)
        v = len(self.label)
        last = self.lchild[u]
        self.label.append(sym)
        self.parent.append(u)
        self.lsib.append(last)
        self.rsib.append(None)
        self.fchild.append(None)
        self.lchild.append(None)
        self.nchildren.append(0)
        self.nlsib.append(0 if last is None else self.nlsib[last] + 1)
        if last is None:
            self.fchild[u] = v
        else:
            self.rsib[last] = v
        self.lchild[u] = v
        self.nchildren[u] += 1
        return v

    def children(self, v: int) -> Iterator[int]:
        c = self.fchild[v]
        while c is not None:
            yield c
            c = self.rsib[c]

    def nodes(self) -> range:
        return range(len(self.label))

    def preorder(self, v: Optional[int] = None) -> Iterator[int]:
        stack = [self.root if v is None else v]
        while stack:
            x = stack.pop()
            yield x
            kids = list(self.children(x))
            stack.extend(reversed(kids))

    def postorder(self, v: Optional[int] = None) -> list[int]:
        out = list(self.preorder(v))
        out.reverse()
        return out

    def siblings_between(self, u: int, v: int) -> list[int]:
        """Sibling run u..v inclusive; u must be a left sibling or equal to v."""
        run = []
        x = u
        while x is not None:
            run.append(x)
            if x == v:
                return run
            x = self.rsib[x]
        raise TreeError(f"{v} is not a right sibling of {u}")

    def copy(self) -> "UnrankedTree":
        t = UnrankedTree.__new__(UnrankedTree)
        for name in ("label", "parent", "lsib", "rsib", "fchild", "lchild",
                     "nchildren", "nlsib"):
            setattr(t, name, list(getattr(self, name)))
        t.root = self.root
        return t

    def subtree_size(self, v: int) -> int:
        return sum(1 for _ in self.preorder(v))

    def depth(self, v: int) -> int:
        d = 0
        while self.parent[v] is not None:
            v = self.parent[v]
            d += 1
        return d

    # -- consistency ---------------------------------------------------------

    def recount(self) -> list[str]:
        """Recompute every stored counter from the parent links and report
        disagreements.  An empty list means the record store is sound."""
        problems = []
        roots = [v for v in self.nodes() if self.parent[v] is None]
        if roots != [self.root]:
            problems.append(f"roots {roots}")
        for v in self.nodes():
            kids = []
            c = self.fchild[v]
            prev = None
            while c is not None:
                if self.parent[c] != v:
                    problems.append(f"child {c} of {v} has parent {self.parent[c]}")
                if self.lsib[c] != prev:
                    problems.append(f"left sibling of {c}")
                if self.nlsib[c] != len(kids):
                    problems.append(f"num-lsiblings of {c}")
                kids.append(c)
                prev = c
                c = self.rsib[c]
                if len(kids) > len(self.label):
                    problems.append(f"sibling cycle under {v}")
                    break
            if self.lchild[v] != prev:
                problems.append(f"last child of {v}")
            if self.nchildren[v] != len(kids):
                problems.append(f"num-children of {v}")
        if sum(1 for _ in self.preorder()) != self.size:
            problems.append("unreachable nodes")
        return problems


def create_tree(root_label: str) -> UnrankedTree:
    return UnrankedTree(root_label)


def attach_last_child(t: UnrankedTree, u: int, sym: str) -> int:
    return t.attach_last_child(u, sym)


# -- serialization -----------------------------------------------------------

def parse_tree(text: str) -> tuple[UnrankedTree, dict[str, int]]:
    """Read `<id> <parent-id|-> <label>` lines.  Children appear in sibling
    order; a parent line must come before its children."""
    t = None
    ids: dict[str, int] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 3:
            raise TreeError(f"line {lineno}: expected '<id> <parent|-> <label>'")
        name, par, lab = parts
        if name in ids:
            raise TreeError(f"line {lineno}: duplicate id {name}")
        if par == "-":
            if t is not None:
                raise TreeError(f"line {lineno}: second root")
            t = UnrankedTree(lab)
            ids[name] = t.root
        else:
            if t is None or par not in ids:
                raise TreeError(f"line {lineno}: unknown parent {par}")
            ids[name] = t.attach_last_child(ids[par], lab)
    if t is None:
        raise TreeError("empty tree file")
    return t, ids


def dump_tree(t: UnrankedTree) -> str:
    lines = []
    for v in t.preorder():
        p = t.parent[v]
        lines.append(f"{v} {'-' if p is None else p} {t.label[v]}")
    return "\n".join(lines) + "\n"


def tree_from_nested(nested) -> UnrankedTree:
    """Build from ("label", [children]) or a bare label for a leaf."""
    def split(s):
        return (s, []) if isinstance(s, str) else (s[0], list(s[1]))

    lab, kids = split(nested)
    t = UnrankedTree(lab)
    todo = [(t.root, kids)]
    while todo:
        u, ks = todo.pop(0)
        for k in ks:
            kl, kk = split(k)
            v = t.attach_last_child(u, kl)
            todo.append((v, kk))
    return t


# -- naive tree functions ------------------------------------------------------

def anc(t: UnrankedTree, x: int, y: int) -> bool:
    """x is a strict ancestor of y."""
    y = t.parent[y]
    while y is not None:
        if y == x:
            return True
        y = t.parent[y]
    return False


def anc_or_self(t: UnrankedTree, x: int, y: int) -> bool:
    return x == y or anc(t, x, y)


def anc_child(t: UnrankedTree, x: int, y: int) -> int:
    if not anc(t, x, y):
        raise TreeError(f"{x} is not a strict ancestor of {y}")
    while t.parent[y] != x:
        y = t.parent[y]
    return y


def anc_index(t: UnrankedTree, x: int, y: int) -> int:
    return t.nlsib[anc_child(t, x, y)] + 1


def path_to_root(t: UnrankedTree, v: int) -> list[int]:
    out = [v]
    while t.parent[v] is not None:
        v = t.parent[v]
        out.append(v)
    return out


def lca(t: UnrankedTree, x: int, y: int) -> int:
    seen = set(path_to_root(t, x))
    while y not in seen:
        y = t.parent[y]
    return y


def child(t: UnrankedTree, v: int, k: int) -> int:
    if not 1 <= k <= t.nchildren[v]:
        raise TreeError(f"node {v} has no child {k}")
    for i, c in enumerate(t.children(v), 1):
        if i == k:
            return c
    raise AssertionError("unreachable")


def prec(t: UnrankedTree, x: int, y: int) -> bool:
    """x is a strict left sibling of y."""
    z = t.rsib[x]
    while z is not None:
        if z == y:
            return True
        z = t.rsib[z]
    return False


def preceq(t: UnrankedTree, x: int, y: int) -> bool:
    return x == y or prec(t, x, y)


def num_desc(t: UnrankedTree, u: int, v: int) -> int:
    """Number of nodes in the subtrees of the sibling run u..v."""
    if not preceq(t, u, v):
        raise TreeError(f"{u} and {v} are not ordered siblings")
    return sum(t.subtree_size(x) for x in t.siblings_between(u, v))


def iter_subtree(t: UnrankedTree, v: int) -> Iterable[int]:
    return t.preorder(v)
