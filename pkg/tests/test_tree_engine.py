import copy
import random

import numpy as np
import pytest

from dynmember import tree as T
from dynmember.automata import dta_run_oracle, oracle_A, oracle_B
from dynmember.fixtures import parity_a, random_dta
from dynmember.tree import UnrankedTree, tree_from_nested
from dynmember.tree_engine import EngineConfig, engine_init
from dynmember.workbench import oracle_check
from dynmember.zones import Theta, Zone, ZoneError, partition_step, zone_size

from conftest import random_tree

CFG = EngineConfig(Theta(4))


def accepted(dta, t, v):
    return dta_run_oracle(dta, t)[v] in dta.final


def test_single_node():
    A = parity_a()
    for s in "ab":
        e = engine_init(UnrankedTree(s), A, CFG)
        assert e.query(0) == (A.delta[(A.start, s)] in A.final)


def test_needs_tree_theta():
    with pytest.raises(ZoneError):
        engine_init(UnrankedTree("a"), parity_a(), EngineConfig(Theta(3)))


@pytest.mark.parametrize("size", [10, 300])
def test_fresh_tables_match_oracle(size):
    t = random_tree(random.Random(size), size, "ab")
    assert oracle_check(engine_init(t, parity_a(), CFG)) == []


def test_relabel_same_symbol_keeps_tables():
    t = random_tree(random.Random(1), 60, "ab")
    e = engine_init(t, parity_a(), CFG)
    before = [(R.rid, dict(R.hp), dict(R.vp)) for R in e.primary_records()]
    e.relabel(0, t.label[0])
    assert before == [(R.rid, dict(R.hp), dict(R.vp)) for R in e.primary_records()]


def test_parity_flip():
    t = tree_from_nested(("b", ["a", "a"]))
    e = engine_init(t, parity_a(), CFG)
    assert e.query(0)
    e.relabel(1, "b")
    assert not e.query(0)


def test_add_child_to_single_node():
    A = parity_a()
    t = UnrankedTree("b")
    e = engine_init(t, A, CFG)
    v = e.add_child(0, "a")
    assert e.query(0) == accepted(A, t, 0) and e.query(v) == accepted(A, t, v)


def test_grow_path():
    A = parity_a()
    t = UnrankedTree("a")
    e = engine_init(t, A, CFG)
    v = 0
    for i in range(199):
        v = e.add_child(v, "ab"[i % 2])
        assert e.query(0) == accepted(A, t, 0)
        assert e.partition_problems() == []
    assert e.violations == 0


def test_threads_and_mid_rebuild_queries():
    """Concentrated growth starts rebuild threads; queries stay exact."""
    A = parity_a()
    rng = random.Random(4)
    t = random_tree(rng, 200, "ab")
    e = engine_init(t, A, CFG)
    seen = 0
    spot = rng.randrange(t.size)
    for _ in range(400):
        spot = e.add_child(spot if rng.random() < 0.7 else rng.randrange(t.size), "a")
        seen = max(seen, sum(th.alive for th in e.threads))
        v = rng.randrange(t.size)
        assert e.query(v) == accepted(A, t, v)
    assert seen > 0
    assert e.violations == 0 and e.partition_problems() == []


def test_mixed_workload_against_oracles():
    rng = random.Random(7)
    for trial in range(6):
        A = random_dta(rng)
        sig = A.alphabet
        t = random_tree(rng, rng.randint(1, 120), sig)
        e = engine_init(t, A, EngineConfig(Theta(4), pruned=trial % 3 != 0))
        for _ in range(120):
            r = rng.random()
            if r < 0.4:
                e.add_child(rng.randrange(t.size), rng.choice(sig))
            elif r < 0.7:
                e.relabel(rng.randrange(t.size), rng.choice(sig))
            rho = dta_run_oracle(A, t)
            v = rng.randrange(t.size)
            assert e.query(v) == (rho[v] in A.final)
            if t.parent[v] is not None:
                kids = list(t.children(t.parent[v]))
                y = kids[rng.randrange(kids.index(v), len(kids))]
                p = rng.choice(A.a_states)
                assert e.eval_A(p, v, y) == oracle_A(A, t, rho, p, v, y)
            a = rng.choice(T.path_to_root(t, v))
            q = rng.choice(A.b_states)
            assert e.eval_B(q, v, a) == oracle_B(A, t, rho, q, v, a)
        assert oracle_check(e) == []
        if trial % 3:
            assert e.partition_problems() == [] and e.violations == 0


def test_eval_B_long_path():
    A = parity_a()
    t = UnrankedTree("a")
    for i in range(199):
        t.attach_last_child(i, "ab"[i % 3 == 0])
    e = engine_init(t, A, CFG)
    rho = dta_run_oracle(A, t)
    for u in range(0, 200, 7):
        for q in A.b_states:
            assert e.eval_B(q, u, 0) == oracle_B(A, t, rho, q, u, 0)


def test_eval_A_all_sibling_pairs():
    rng = random.Random(11)
    A = random_dta(rng)
    for _ in range(3):
        t = random_tree(rng, 60, A.alphabet)
        e = engine_init(t, A, CFG)
        rho = dta_run_oracle(A, t)
        for u in t.nodes():
            if t.parent[u] is None:
                continue
            kids = list(t.children(t.parent[u]))
            for y in kids[kids.index(u):]:
                for p in A.a_states:
                    assert e.eval_A(p, u, y) == oracle_A(A, t, rho, p, u, y)


def test_child_and_num_desc():
    t = random_tree(random.Random(5), 300, "ab")
    e = engine_init(t, parity_a(), CFG)
    assert e.eval_child(0, 1) == t.fchild[0]
    leaf = next(v for v in t.nodes() if t.fchild[v] is None)
    assert e.eval_num_desc(leaf, leaf) == 1
    for v in t.nodes():
        if t.fchild[v] is None:
            continue
        kids = list(t.children(v))
        for i, x in enumerate(kids):
            for y in kids[i:i + 4]:
                assert e.eval_num_desc(x, y) == T.num_desc(t, x, y)


def test_change_algorithms():
    rng = random.Random(2)
    for trial in range(20):
        A = random_dta(rng) if trial % 2 else parity_a()
        sig = A.alphabet
        t = random_tree(rng, rng.randint(1, 40), sig)
        e = engine_init(t, A, EngineConfig(Theta(4), pruned=trial % 3 != 0))
        for _ in range(60):
            v, s = rng.randrange(t.size), rng.choice(sig)
            t2 = t.copy()
            t2.label[v] = s
            rho2 = dta_run_oracle(A, t2)
            x = rng.randrange(t.size)
            assert e.evaluate_state(v, s, x) == rho2[x]
            y = x
            if t.parent[x] is not None:
                kids = list(t.children(t.parent[x]))
                y = kids[rng.randrange(kids.index(x), len(kids))]
            p = rng.choice(A.a_states)
            assert e.evaluate_sequence(v, s, p, x, y) == oracle_A(A, t2, rho2, p, x, y)
            a = rng.choice(T.path_to_root(t, x))
            q = rng.choice(A.b_states)
            assert e.evaluate_path(v, s, q, a, x) == oracle_B(A, t2, rho2, q, x, a)


def test_change_algorithms_irrelevant_change():
    A = parity_a()
    t = tree_from_nested(("b", ["a", ("b", ["a"]), "a"]))
    e = engine_init(t, A, CFG)
    rho = dta_run_oracle(A, t)
    # node 4 (under node 2) is not below node 1
    assert e.evaluate_state(4, "b", 1) == rho[1]
    assert e.evaluate_sequence(4, "b", "p0", 1, 1) == oracle_A(A, t, rho, "p0", 1, 1)


def test_fast_partition_step_matches():
    rng = random.Random(1)
    for _ in range(40):
        t = random_tree(rng, rng.randint(3, 80), "ab")
        e = engine_init(t, parity_a(), CFG)
        for R in e.primary_records():
            z = Zone(R.left, R.right, R.lower)
            s = zone_size(t, z)
            assert e.zone_size(R.left, R.right, R.lower) == s
            if s < 2:
                continue
            m = rng.randint(1, s - 1)
            a = sorted((p.left, p.right, p.lower) for p in partition_step(t, z, m))
            b = sorted(tuple(x) for x in e.partition_step_fast(R.left, R.right, R.lower, m))
            assert a == b


def test_ledger_records_per_operation():
    t = random_tree(random.Random(3), 50, "ab")
    e = engine_init(t, parity_a(), CFG)
    e.relabel(3, "a")
    e.add_child(3, "b")
    e.query(0)
    assert [r.op for r in e.led.records] == ["relabel", "addchild", "query"]
    assert all(r.work > 0 for r in e.led.records)
