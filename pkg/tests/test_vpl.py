import random

import pytest
from hypothesis import given, settings, strategies as st

from dynmember import dcfl
from dynmember.automata import BOTTOM, AutomatonError, vpa_accepts, vpa_as_rdpda
from dynmember.fixtures import dyck_vpa, random_vpa
from dynmember.tree_engine import EngineConfig
from dynmember.vpl import (Change, CorrespondenceError, TypeTables, UnsupportedChange,
                           VPLError, VPLMinus, oracle_vps, pop2_from_vps, step_of,
                           translate_vplminus_change, v_pop_state_any_k, vps_from_pop2,
                           vpl_init, vpl_insert, vpl_query, vpl_relabel, vpl_sweep,
                           wellformed_to_tree)
from dynmember.zones import Theta

from conftest import random_wellformed


def steps(w, vpa=None):
    vpa = vpa or dyck_vpa()
    return [step_of(vpa.kind(a)) for a in w]


def same_tables(e, f):
    return (e.T.W, e.T.s, e.T.LB, e.T.RD, e.ST, e.VPS) == \
           (f.T.W, f.T.s, f.T.LB, f.T.RD, f.ST, f.VPS)


def rebuilt(e):
    f = vpl_init(e.w, e.vpa, e.theta)
    f.n = e.n
    f._build()
    return f


def test_height_profile():
    assert TypeTables(steps("(a)")).s == [1, 2, 2, 1]
    assert TypeTables(steps("(())")).rd(1, 1) == 4
    # a return on an empty stack stays at height 1
    assert TypeTables(steps("))(")).s == [1, 1, 1, 2]


def test_type_relabel_updates_profile():
    T = TypeTables(steps("(())"))
    T.relabel(2, -2)
    assert T.s == [1, 2, 1, 1, 1]
    assert not T.check()
    U = TypeTables(T.steps)
    assert (T.W, T.LB, T.RD) == (U.W, U.LB, U.RD)


def test_same_type_relabel_keeps_types():
    v = dyck_vpa(("a", "c"))
    e = vpl_init("(a(c))", v, "1/2")
    before = (list(e.T.s), [list(r) for r in e.T.LB], [list(r) for r in e.T.RD])
    vpl_relabel(e, 2, "c")
    assert before == (e.T.s, e.T.LB, e.T.RD)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.sampled_from([-1, 0, 1]), max_size=24), st.data())
def test_type_tables_relabel(seq, data):
    T = TypeTables(seq)
    if seq:
        l = data.draw(st.integers(1, len(seq)))
        new = data.draw(st.sampled_from([-1, 0, 1]))
        T.relabel(l, new - T.steps[l - 1])
    U = TypeTables(T.steps)
    assert (T.W, T.s, T.LB, T.RD) == (U.W, U.s, U.LB, U.RD)
    assert not T.check()


def test_tables_depend_only_on_types():
    v = dyck_vpa(("a", "c"))
    a, b = vpl_init("(a)c(", v, "1/2"), vpl_init("(c)a(", v, "1/2")
    assert (a.T.LB, a.T.RD, a.T.s) == (b.T.LB, b.T.RD, b.T.s)


def test_queries_on_dyck():
    e = vpl_init("(()())(", dyck_vpa(), "1/2")
    assert vpl_query(e, 1, 6)
    assert not vpl_query(e, 1, 7)
    assert vpl_query(e, 3, 2)
    vpl_relabel(e, 7, ")")
    assert not vpl_query(e, 1, 7)
    vpl_insert(e, 1, "(")
    assert vpl_query(e, 1, 8)


def test_errors():
    e = vpl_init("(a)", dyck_vpa(), "1/2")
    with pytest.raises(VPLError):
        e.relabel(0, "(")
    with pytest.raises(AutomatonError):
        e.relabel(1, "z")
    with pytest.raises(VPLError):
        e.query(2, 9)
    with pytest.raises(VPLError):
        v_pop_state_any_k(e, "q", 1, BOTTOM, "q", 2, e.n + 1)


def test_pop_state_zero():
    e = vpl_init("(()", dyck_vpa(), "1/2")
    for q in e.Q:
        assert v_pop_state_any_k(e, "q", 2, BOTTOM, q, 3, 0) == q


@pytest.mark.parametrize("seed", range(16))
def test_changes_match_fresh_build(seed):
    rng = random.Random(seed)
    v = random_vpa(rng) if seed % 2 else dyck_vpa()
    e = vpl_init("".join(rng.choice("(()a") for _ in range(rng.randint(0, 14))), v,
                 ["1/2", "1/3"][seed % 3 == 0])
    for _ in range(12):
        sym = rng.choice("()a")
        if e.w and rng.random() < 0.6:
            e.relabel(rng.randint(1, len(e.w)), sym)
        else:
            e.insert(rng.randint(1, max(1, len(e.w))), sym, rng.choice(["before", "after"]))
        assert same_tables(e, rebuilt(e))


@pytest.mark.parametrize("seed", range(8))
def test_sweep_after_changes(seed):
    rng = random.Random(50 + seed)
    v = random_vpa(rng) if seed % 2 else dyck_vpa()
    e = vpl_init("".join(rng.choice("(()a") for _ in range(rng.randint(1, 10))), v, "1/2")
    for step in range(3):
        e.relabel(rng.randint(1, len(e.w)), rng.choice("()a"))
        r = vpl_sweep(e, any_k=step == 2)
        assert r.ok, r.diffs[:3]


def test_queries_match_acceptance(rng):
    for _ in range(10):
        v = random_vpa(rng)
        w = "".join(rng.choice("(()a") for _ in range(rng.randint(0, 16)))
        e = vpl_init(w, v, "1/2")
        for _ in range(60):
            i = rng.randint(1, len(w) + 1)
            j = rng.randint(i - 1, len(w))
            assert vpl_query(e, i, j) == vpa_accepts(v, w[i - 1:j])


def test_any_k_against_oracle(rng):
    v = dyck_vpa()
    e = vpl_init("((((a((()))(((", v, "1/2")
    L = len(e.w)
    for _ in range(400):
        j = rng.randint(0, L - 1)
        m = rng.randint(j + 1, L)
        k = rng.randint(1, 6)
        p, q = rng.choice(e.Q), rng.choice(e.Q)
        assert v_pop_state_any_k(e, p, j, "X", q, m, k) == oracle_vps(e, p, j, "X", q, m, k)


@pytest.mark.parametrize("seed", range(6))
def test_conversions(seed):
    rng = random.Random(seed)
    v = dyck_vpa() if seed % 2 == 0 else random_vpa(rng)
    w = "".join(rng.choice("(()a") for _ in range(rng.randint(1, 8)))
    e = vpl_init(w, v, "1/2")
    d = dcfl.dcfl_init(w, vpa_as_rdpda(v), "1/2")
    L = len(w)
    checked = 0
    for i in range(1, L + 1):
        for j in range(i, L + 1):
            for p in e.Q:
                for t in e.G:
                    for k in range(1, e.height(i, j, t) + 1):
                        for m in range(j + 1, L + 1):
                            for q in e.Q:
                                got = pop2_from_vps(e, (i, j, p, t), q, m, k)
                                try:
                                    want = dcfl.pop_pos_any_k(d, i, j, p, t, q, m, k)[1]
                                except dcfl.DCFLError:
                                    continue
                                assert got == want
                                checked += 1
    # and back again
    pop2 = lambda key, q, m, k: pop2_from_vps(e, key, q, m, k)
    for j in range(0, L):
        for m in range(j + 1, L + 1):
            for k in range(0, 4):
                for p in e.Q:
                    for q in e.Q:
                        assert (vps_from_pop2(e, pop2, p, j, "X", q, m, k)
                                == v_pop_state_any_k(e, p, j, "X", q, m, k))


def test_wellformed_to_tree():
    v = dyck_vpa(("a", "c"))
    t, nodes = wellformed_to_tree("()", v)
    assert t.size == 2 and t.label[1] == "(|)" and nodes == [1, 1]
    t, nodes = wellformed_to_tree("c", v)
    assert t.size == 2 and t.label[1] == "c" and list(t.children(1)) == []
    t, nodes = wellformed_to_tree("(a)(c)", v)
    assert list(t.children(t.root)) == [1, 3]
    assert [t.label[x] for x in (1, 2, 3, 4)] == ["(|)", "a", "(|)", "c"]
    assert t.parent[2] == 1 and t.parent[4] == 3
    for bad in ("(", ")", "(a))"):
        with pytest.raises(CorrespondenceError):
            wellformed_to_tree(bad, v)


def test_unsupported_changes():
    v = dyck_vpa(("a", "c"))
    w = list("(a)")
    _, nodes = wellformed_to_tree(w, v)
    for ch in (Change("replace", 1, "a"), Change("insert", 2, "c"),
               Change("insert", 1, "("), Change("expand", 1, "(", ")"),
               Change("expand", 2, "a", ")"), Change("delete", 1, "a")):
        with pytest.raises(UnsupportedChange):
            translate_vplminus_change(ch, w, nodes, v)
    assert translate_vplminus_change(Change("expand", 2, "(", ")"), w, nodes, v) == \
        [("relabel", 2, "(|)")]


@pytest.mark.parametrize("seed", range(10))
def test_vplminus_against_oracle(seed):
    rng = random.Random(seed)
    v = random_vpa(rng, internals="ac")
    D = VPLMinus(random_wellformed(rng, rng.randint(1, 16)), v, EngineConfig(Theta(4)))
    for _ in range(12):
        L = len(D.w)
        ints = [i for i in range(1, L + 1) if v.kind(D.w[i - 1]) == "internal"]
        rets = [i for i in range(1, L + 1) if v.kind(D.w[i - 1]) == "return"] + [L + 1]
        r = rng.random()
        if r < 0.4:
            i = rng.randint(1, L)
            sym = {"call": "(", "return": ")"}.get(v.kind(D.w[i - 1]), rng.choice("ac"))
            D.apply(Change("replace", i, sym))
        elif r < 0.75 or not ints:
            D.apply(Change("insert", rng.choice(rets), rng.choice("ac")))
        else:
            D.apply(Change("expand", rng.choice(ints), "(", ")"))
        assert D.query() == vpa_accepts(v, D.w)
        i = rng.randint(1, len(D.w))
        assert D.query_pair(i) == vpa_accepts(v, D.factor(i))
