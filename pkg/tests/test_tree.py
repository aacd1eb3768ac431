import pytest
from hypothesis import given, settings, strategies as st

from dynmember import tree as T
from dynmember.tree import TreeError, UnrankedTree, create_tree, attach_last_child

from conftest import random_tree


def path(n):
    t = create_tree("a")
    for i in range(n - 1):
        t.attach_last_child(i, "a")
    return t


def test_create_tree():
    t = create_tree("a")
    assert t.size == 1 and t.label[t.root] == "a"
    assert create_tree("b").parent[0] is None
    assert t.nchildren[t.root] == 0


def test_attach_links_siblings():
    t = create_tree("r")
    x = attach_last_child(t, t.root, "x")
    y = attach_last_child(t, t.root, "y")
    assert t.rsib[x] == y and t.lsib[y] == x and t.nlsib[y] == 1
    z = t.attach_last_child(y, "z")
    assert t.fchild[y] == t.lchild[y] == z and t.nchildren[y] == 1
    w = t.attach_last_child(t.root, "w")
    assert t.nchildren[t.root] == 3 and t.nlsib[w] == 2


def test_attach_to_missing_node():
    with pytest.raises(TreeError):
        create_tree("a").attach_last_child(5, "b")


def test_path_functions():
    t = path(5)
    v = [None, 0, 1, 2, 3, 4]           # v[1..5]
    assert T.lca(t, v[3], v[5]) == v[3]
    assert T.anc_child(t, v[1], v[4]) == v[2]
    assert T.num_desc(t, v[1], v[1]) == 5


def test_star_functions():
    t = create_tree("r")
    x, y, z = (t.attach_last_child(0, s) for s in "xyz")
    d = t.attach_last_child(y, "d")
    assert T.prec(t, x, z) and not T.prec(t, z, x)
    assert T.anc_index(t, t.root, d) == 2
    assert T.child(t, t.root, 1) == x
    for v in t.nodes():
        assert T.anc_or_self(t, v, v) and not T.anc(t, v, v)


def shape(t, v=None):
    v = t.root if v is None else v
    return (t.label[v], tuple(shape(t, c) for c in t.children(v)))


def test_parse_dump_round_trip(rng):
    t = random_tree(rng, 40, "ab")
    u, _ = T.parse_tree(T.dump_tree(t))
    assert shape(u) == shape(t)


def test_parse_errors():
    with pytest.raises(TreeError):
        T.parse_tree("1 - a\n2 9 b\n")
    with pytest.raises(TreeError):
        T.parse_tree("")


def test_nested_builder():
    t = T.tree_from_nested(("b", ["a", ("a", ["b"])]))
    assert t.size == 4 and t.label == ["b", "a", "a", "b"] and t.parent[3] == 2


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(min_value=0, max_value=10 ** 6), min_size=0, max_size=40))
def test_recount_after_growth(choices):
    t = create_tree("a")
    for c in choices:
        t.attach_last_child(c % t.size, "b")
    assert t.recount() == []
    assert sum(t.nchildren) == t.size - 1
    assert sorted(t.preorder()) == list(t.nodes())
