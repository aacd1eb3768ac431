"""End-to-end acceptance runs.  Each test prints one PASS/FAIL line."""

import functools
import itertools
import random
import statistics
import time

import pytest

from dynmember import tree as T
from dynmember.automata import (BOTTOM, dta_accepts_subtree, dta_run_oracle, oracle_A,
                                oracle_B, vpa_accepts)
from dynmember.dcfl import dcfl_init, dcfl_sweep
from dynmember.fixtures import dyck_final_state, dyck_vpa, parity_a, random_dta, random_vpa
from dynmember.tree import UnrankedTree
from dynmember.tree_engine import EngineConfig, engine_init
from dynmember.vpl import (Change, VPLMinus, oracle_vps, pop2_from_vps, relative_run,
                           v_pop_state_any_k, vps_from_pop2, vpl_init, vpl_sweep)
from dynmember.workbench import (DEFAULT_MIX, bench, fit_exponent, random_change,
                                 random_instance, random_tree)
from dynmember.zones import Theta, Zone, zone_nodes

from conftest import random_wellformed

TREE_SIZES = (2 ** 10, 2 ** 12, 2 ** 14)


@pytest.fixture
def say(pytestconfig):
    rep = pytestconfig.pluginmanager.getplugin("terminalreporter")

    def line(n, ok, detail):
        text = f"criterion {n}: {'PASS' if ok else 'FAIL'} ({detail})"
        if rep is not None:
            rep.write_line("")
            rep.write_line(text)
        else:
            print(text)
    return line


# -- trees ----------------------------------------------------------------------


def _growth_target(e, rng):
    # growth concentrates near recent nodes so zones cross their warning limits
    y = rng.random()
    if y < 0.4:
        return e.t.size - 1
    if y < 0.7:
        return rng.randrange(max(0, e.t.size - 20), e.t.size)
    return rng.randrange(e.t.size)


@functools.lru_cache(maxsize=None)
def tree_workloads(count=20, ops=1000, start=1300):
    """Mixed scripts on random DTAs.  Returns one stats dict per automaton."""
    rng = random.Random(2024)
    out = []
    for _ in range(count):
        dta = random_dta(rng)
        sig = sorted(dta.alphabet)
        t0 = time.perf_counter()
        # a small initial n makes the size-doubling rebuild happen mid-run
        e = engine_init(random_tree(rng, start, sig), dta, EngineConfig(Theta(4), n=3000))
        splits, bad_splits = [], []
        fast = e.partition_step_fast

        def checked(left, right, lower, m, fast=fast, e=e):
            parts = fast(left, right, lower, m)
            sizes = [len(zone_nodes(e.t, Zone(*p))) for p in parts]
            splits.append(sizes)
            if len(parts) > 5 or not any(-(-m // 2) <= s <= m for s in sizes):
                bad_splits.append((m, sizes))
            return parts

        e.partition_step_fast = checked
        queries = mismatches = 0
        problems = []
        for _ in range(ops):
            x = rng.random()
            if x < 0.75:
                e.add_child(_growth_target(e, rng), rng.choice(sig))
            elif x < 0.87:
                e.relabel(rng.randrange(e.t.size), rng.choice(sig))
            else:
                v = rng.randrange(e.t.size)
                queries += 1
                mismatches += e.query(v) != dta_accepts_subtree(dta, e.t, v)
            problems.extend(e.partition_problems())
        out.append({"size": e.t.size, "queries": queries, "mismatches": mismatches,
                    "seconds": time.perf_counter() - t0, "problems": problems,
                    "violations": e.violations, "splits": len(splits),
                    "bad_splits": bad_splits})
    return out


def test_criterion_1_tree_oracle(say):
    runs = tree_workloads()
    ok = (all(r["mismatches"] == 0 and r["seconds"] < 120 and r["size"] >= 2000 for r in runs))
    say(1, ok, f"{len(runs)} DTAs, {sum(r['queries'] for r in runs)} queries, "
               f"{sum(r['mismatches'] for r in runs)} mismatches, "
               f"min size {min(r['size'] for r in runs)}, "
               f"slowest {max(r['seconds'] for r in runs):.1f}s")
    assert ok


def _ordered_trees(k):
    """Parent arrays, in preorder, of every ordered tree with k nodes."""
    if k == 1:
        yield [None]
        return

    def forests(m, base):
        if m == 0:
            yield []
            return
        for first in range(1, m + 1):
            for sub in _ordered_trees(first):
                head = [None if p is None else p + base for p in sub]
                for rest in forests(m - first, base + first):
                    yield head + rest

    for f in forests(k - 1, 1):
        yield [None] + [0 if p is None else p for p in f]


def test_criterion_2_change_algorithms_exhaustive(say):
    A = parity_a()
    total = agree = trees = 0
    for k in range(1, 8):
        for par in _ordered_trees(k):
            for labels in itertools.product("ab", repeat=k):
                t = UnrankedTree(labels[0])
                for i in range(1, k):
                    t.attach_last_child(par[i], labels[i])
                trees += 1
                e = engine_init(t, A, EngineConfig(Theta(4)))
                sibs = [(x, y) for x in range(k) for y in range(x, k)
                        if x == y or (t.parent[x] is not None and t.parent[x] == t.parent[y])]
                paths = [(a, x) for x in range(k) for a in T.path_to_root(t, x)]
                for v in range(k):
                    for s in "ab":
                        t2 = t.copy()
                        t2.label[v] = s
                        rho2 = dta_run_oracle(A, t2)
                        for x in range(k):
                            total += 1
                            agree += e.evaluate_state(v, s, x) == rho2[x]
                        for x, y in sibs:
                            for p in A.a_states:
                                total += 1
                                agree += (e.evaluate_sequence(v, s, p, x, y)
                                          == oracle_A(A, t2, rho2, p, x, y))
                        for a, x in paths:
                            for q in A.b_states:
                                total += 1
                                agree += (e.evaluate_path(v, s, q, a, x)
                                          == oracle_B(A, t2, rho2, q, x, a))
    say(2, agree == total, f"{trees} trees, {agree}/{total} inputs agree")
    assert agree == total


def test_criterion_3_partition_invariants(say):
    runs = tree_workloads()
    problems = sum(len(r["problems"]) for r in runs)
    bad = sum(len(r["bad_splits"]) for r in runs)
    viol = sum(r["violations"] for r in runs)
    splits = sum(r["splits"] for r in runs)
    ok = problems == 0 and bad == 0 and viol == 0 and splits > 0
    say(3, ok, f"{problems} budget problems, {splits} splits checked, {bad} bad, "
               f"{viol} violations")
    assert ok


def test_criterion_4_relabel_exponent(say):
    rng = random.Random(4)
    dta = parity_a()
    pts, qcharge = [], []
    for n in TREE_SIZES:
        e = engine_init(random_tree(rng, n // 3, ["a", "b"]), dta,
                        EngineConfig(Theta(4), n=n, pruned=False))
        ws = []
        for _ in range(200):
            e.relabel(rng.randrange(e.t.size), rng.choice("ab"))
            ws.append(e.led.records[-1].work)
        pts.append((n, statistics.fmean(ws)))
        q = []
        for v in range(e.t.size):
            e.query(v)
            q.append(e.led.records[-1].work)
        qcharge.append(statistics.fmean(q))
    f = fit_exponent(pts)
    ratio = max(qcharge) / min(qcharge)
    ok = f.slope <= 2 * 0.25 + 0.15 and ratio <= 1.5
    say(4, ok, f"slope {f.slope:.3f} <= 0.65, query charge "
               f"{', '.join(f'{c:.2f}' for c in qcharge)} ratio {ratio:.2f} <= 1.5")
    assert ok


def test_criterion_5_structural_exponent(say):
    rows, fits = bench("tree", parity_a(), list(TREE_SIZES), 200, Theta(4), seed=5,
                       mix={"addchild": 0.8, "relabel": 0.2}, fit=True)
    f = fits["all"]
    ok = f.slope <= 7 * 0.25 + 0.2
    say(5, ok, f"slope {f.slope:.3f} <= 1.95 (addchild alone {fits['addchild'].slope:.3f})")
    assert ok


# -- strings --------------------------------------------------------------------


def test_criterion_6_dcfl(say):
    rng = random.Random(6)
    D = dyck_final_state()
    e = dcfl_init([rng.choice("()") for _ in range(20)], D, "1/2")
    failures, exhaustive, sampled, least = [], 0, 0, None
    for step in range(200):
        L = len(e.w)
        if L < 64 and rng.random() < 0.5:
            e.insert(rng.randint(1, L), rng.choice("()"), rng.choice(["before", "after"]))
        else:
            e.relabel(rng.randint(1, L), rng.choice("()"))
        if len(e.w) <= 24:
            r = dcfl_sweep(e)
            exhaustive += 1
        else:
            r = dcfl_sweep(e, rng, 10_000)
            sampled += 1
            least = r.checked if least is None else min(least, r.checked)
            if r.checked < 10_000:
                failures.append(f"step {step}: only {r.checked} entries")
        if not r.ok:
            failures.append(f"step {step}: {r.mismatches[:2]}")
    _, fits = bench("dcfl", D, [24, 48, 96], 30, Theta(2), seed=6, fit=True)
    f = fits["all"]
    ok = not failures and f.slope <= 3 + 3 * 0.5 + 0.25
    say(6, ok, f"{exhaustive} exhaustive and {sampled} sampled sweeps "
               f"(>= {least} entries), {len(failures)} failures, slope {f.slope:.3f} <= 4.75")
    assert ok, failures[:3]


def test_criterion_7_vpl(say):
    rng = random.Random(7)
    V = dyck_vpa()
    sig = sorted(V.alphabet)
    pts, failures, sweeps = [], [], 0
    for n in (64, 128, 256):
        e = random_instance("vpl", V, n, Theta(3), rng)
        ws = []
        for step in range(24):
            ws.append(random_change("vpl", e, sig, rng, DEFAULT_MIX["vpl"]).work)
            r = vpl_sweep(e) if len(e.w) <= 32 else vpl_sweep(e, rng, 5000)
            sweeps += 1
            if not r.ok:
                failures.append(f"n={n} step {step}: {r.mismatches[:2]}")
        pts.append((n, statistics.fmean(ws)))
    f = fit_exponent(pts)
    ok = not failures and f.slope <= 2 + 3 / 3 + 0.25
    say(7, ok, f"{sweeps} sweeps with type-table checks, {len(failures)} failures, "
               f"slope {f.slope:.3f} <= 3.25")
    assert ok, failures[:3]


def _vplminus_change(D, v, rng, internals="ac"):
    L = len(D.w)
    ints = [i for i in range(1, L + 1) if v.kind(D.w[i - 1]) == "internal"]
    rets = [i for i in range(1, L + 1) if v.kind(D.w[i - 1]) == "return"] + [L + 1]
    r = rng.random()
    if r < 0.5:
        i = rng.randint(1, L)
        sym = {"call": "(", "return": ")"}.get(v.kind(D.w[i - 1]), rng.choice(internals))
        return Change("replace", i, sym)
    if r < 0.8 or not ints:
        return Change("insert", rng.choice(rets), rng.choice(internals))
    return Change("expand", rng.choice(ints), "(", ")")


def test_criterion_8_vplminus(say):
    rng = random.Random(8)
    queries = mismatches = 0
    for _ in range(500):
        v = random_vpa(rng, internals="ac")
        D = VPLMinus(random_wellformed(rng, rng.randint(1, 16)), v, EngineConfig(Theta(4)))
        for _ in range(8):
            D.apply(_vplminus_change(D, v, rng))
            i = rng.randint(1, len(D.w))
            queries += 2
            mismatches += D.query() != vpa_accepts(v, D.w)
            mismatches += D.query_pair(i) != vpa_accepts(v, D.factor(i))
    # ledger slope, in the configuration used for the relabel exponent
    dv = dyck_vpa(("a", "c"))
    pts = []
    for n in TREE_SIZES:
        D = VPLMinus(random_wellformed(rng, n // 3), dv,
                     EngineConfig(Theta(4), n=n, pruned=False))
        ws = [sum(r.work for r in D.apply(_vplminus_change(D, dv, rng))) for _ in range(200)]
        pts.append((n, statistics.fmean(ws)))
    f = fit_exponent(pts)
    ok = mismatches == 0 and f.slope <= 0.65
    say(8, ok, f"500 sequences, {queries} queries, {mismatches} mismatches, "
               f"tree-engine slope {f.slope:.3f} <= 0.65")
    assert ok


def _pop2_oracle(e, i, j, p, tau, q, m, k):
    if k == 0:
        return q
    _, S, emptied = relative_run(e.vpa, p, (tau,), e.w[i - 1:j])
    if emptied or k > len(S) or (tau == BOTTOM and k == len(S)):
        return None
    r, _, emptied = relative_run(e.vpa, q, S[:k], e.w[m - 1:])
    return r if emptied else None


def _conversion_words():
    words = ["".join(w) for L in range(1, 6) for w in itertools.product("()a", repeat=L)]
    rng = random.Random(9)
    words += [w for w in ("((a)(()a))((a)", "(((((((a)))))))((()))a()", "()" * 12)]
    words += ["".join(random_wellformed(rng, 24, "a")) for _ in range(3)]
    words += ["".join(rng.choice("(()a") for _ in range(24)) for _ in range(3)]
    return words


def test_criterion_9_conversions(say):
    total = agree = 0
    for fixture in (dyck_vpa(), dyck_vpa(("a", "c"))):
        for w in _conversion_words():
            e = vpl_init(w, fixture, "1/2")
            L = len(w)
            pop2 = lambda key, q, m, k: pop2_from_vps(e, key, q, m, k)
            oracle_pop2 = lambda key, q, m, k: _pop2_oracle(e, *key, q, m, k)
            for i in range(1, L + 1):
                for j in range(i, L):
                    for p in e.Q:
                        for tau in e.G:
                            H = e.height(i, j, tau)
                            for k in range(0, H + 1):
                                for m in range(j + 1, L + 1):
                                    for q in e.Q:
                                        total += 1
                                        agree += (pop2((i, j, p, tau), q, m, k)
                                                  == oracle_pop2((i, j, p, tau), q, m, k))
            for j in range(0, L):
                for m in range(j + 1, L + 1):
                    for k in range(0, len(e.T.LB[j]) + 1):
                        for p in e.Q:
                            for tau in e.G1:
                                for q in e.Q:
                                    want = oracle_vps(e, p, j, tau, q, m, k)
                                    got = v_pop_state_any_k(e, p, j, tau, q, m, k)
                                    back = vps_from_pop2(e, pop2, p, j, tau, q, m, k)
                                    via = vps_from_pop2(e, oracle_pop2, p, j, tau, q, m, k)
                                    total += 1
                                    agree += got == want == back == via
    say(9, agree == total, f"{agree}/{total} conversions agree")
    assert agree == total
