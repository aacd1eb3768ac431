import random

import pytest
from hypothesis import given, settings, strategies as st

from dynmember.tree import UnrankedTree
from dynmember.zones import (Theta, Zone, ZoneError, build_hierarchy, check_hierarchy,
                             is_zone, level_budget, partition_step, root_floor, zone_nodes,
                             zone_size)

from conftest import random_tree


def path(n):
    t = UnrankedTree("a")
    for i in range(n - 1):
        t.attach_last_child(i, "a")
    return t


def star(k):
    t = UnrankedTree("r")
    for _ in range(k):
        t.attach_last_child(0, "a")
    return t


def check_step(t, S, m, parts):
    assert 1 <= len(parts) <= 5
    sizes = [zone_size(t, z) for z in parts]
    assert any(-(-m // 2) <= s <= m for s in sizes)
    got = sorted(v for z in parts for v in zone_nodes(t, z))
    assert got == sorted(zone_nodes(t, S))
    for z in parts:
        assert is_zone(t, zone_nodes(t, z))


def test_zone_sizes():
    t = path(10)
    assert zone_size(t, Zone(0, 0)) == 10
    # lower is the last node kept above the cut: v1..v8 of the path
    assert zone_size(t, Zone(0, 0, 7)) == 8
    assert zone_size(t, Zone(0, 0, 8)) == 9
    s = star(2)
    assert zone_size(s, Zone(1, 2)) == 2


def test_path_step():
    t = path(10)
    parts = partition_step(t, Zone(0, 0), 4)
    assert sorted(sorted(zone_nodes(t, z)) for z in parts) == [list(range(8)), [8, 9]]
    check_step(t, Zone(0, 0), 4, parts)


def test_star_step():
    t = star(9)
    parts = partition_step(t, Zone(0, 0), 4)
    check_step(t, Zone(0, 0), 4, parts)
    prefix = [z for z in parts if not z.is_tree and t.lsib[z.left] is None]
    assert len(prefix) == 1 and 2 <= zone_size(t, prefix[0]) <= 4
    assert len(parts) <= 3


def test_small_zone_rejected():
    with pytest.raises(ZoneError):
        partition_step(path(3), Zone(0, 0), 4)


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 10 ** 6), st.integers(2, 70))
def test_partition_step_invariants(seed, size):
    rng = random.Random(seed)
    t = random_tree(rng, size, "ab")
    m = rng.randint(1, size - 1)
    check_step(t, Zone(0, 0), m, partition_step(t, Zone(0, 0), m))
    # and on an inner part
    for z in partition_step(t, Zone(0, 0), m):
        s = zone_size(t, z)
        if s > 1:
            m2 = rng.randint(1, s - 1)
            check_step(t, z, m2, partition_step(t, z, m2))


def test_theta():
    assert Theta.parse("1/4").h == 4 and str(Theta(3)) == "1/3"
    with pytest.raises(ZoneError):
        Theta(1)
    with pytest.raises(ZoneError):
        Theta(3).require_tree()
    with pytest.raises(ZoneError):
        Theta.parse("0.25")
    assert root_floor(10 ** 4, 1, 4) == 10
    assert level_budget(256, 2, Theta(4)) == 16


def test_single_node_hierarchy():
    t = UnrankedTree("a")
    H = build_hierarchy(t, Theta(4))
    assert check_hierarchy(t, H) == []


def test_path_hierarchy():
    t = path(10)
    H = build_hierarchy(t, Theta(4), pruned3=False, n=10)
    assert check_hierarchy(t, H) == []
    for lvl, zs in H.levels().items():
        for z in zs:
            assert z.size <= max(1, 10 ** (lvl / 4)) or lvl == 4
        for z in zs:
            assert len(z.children) <= 10 * 10 ** 0.25


@pytest.mark.parametrize("pruned", [True, False])
def test_random_hierarchy(pruned):
    t = random_tree(random.Random(9), 500, "ab")
    H = build_hierarchy(t, Theta(4), pruned3=pruned)
    assert check_hierarchy(t, H) == []
