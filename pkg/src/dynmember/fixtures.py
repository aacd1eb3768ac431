"""Small named machines used by tests, the CLI and the benchmarks."""

from __future__ import annotations

import itertools
import random

from .automata import (BOTTOM, DTA, RDPDA, VPA, ensure_valid, make_dta, make_rdpda,
                       make_vpa)


def parity_a() -> DTA:
    """Accepts iff the node has the right parity of a-labelled descendants.

    delta_A(p_i, q_j) = p_(i+j mod 2), delta(p_i, a) = q_(i+1 mod 2),
    delta(p_i, b) = q_i, final {q0}.
    """
    qb = ("q0", "q1")
    qa = ("p0", "p1")
    horiz = {(f"p{i}", f"q{j}"): f"p{(i + j) % 2}" for i in range(2) for j in range(2)}
    delta = {}
    for i in range(2):
        delta[(f"p{i}", "a")] = f"q{(i + 1) % 2}"
        delta[(f"p{i}", "b")] = f"q{i}"
    return ensure_valid(make_dta(qb, qa, delta, horiz, "p0", {"q0"}, ("a", "b")))


def random_dta(rng: random.Random, max_a=3, max_b=3, max_sigma=3) -> DTA:
    na = rng.randint(1, max_a)
    nb = rng.randint(1, max_b)
    ns = rng.randint(1, max_sigma)
    qa = tuple(f"p{i}" for i in range(na))
    qb = tuple(f"q{i}" for i in range(nb))
    sigma = tuple("abc"[:ns])
    delta = {(p, s): rng.choice(qb) for p in qa for s in sigma}
    horiz = {(p, q): rng.choice(qa) for p in qa for q in qb}
    final = {q for q in qb if rng.random() < 0.5} or {qb[0]}
    return ensure_valid(make_dta(qb, qa, delta, horiz, "p0", final, sigma))


def dyck_d1():
    """Single state q; '(' pushes X, ')' pops X."""
    delta = {}
    for g in ("X", BOTTOM):
        delta[("q", "(", g)] = ("q", ("X", g))
    delta[("q", ")", "X")] = ("q", ())
    return ensure_valid(make_rdpda(("q",), ("(", ")"), ("X", BOTTOM), "q", BOTTOM,
                                   delta, {"q"}))


def dyck_final_state():
    """Balanced parentheses by final state.

    q0 means the stack is exactly #.  The bottom-most open parenthesis is
    recorded as Y so that closing it returns to q0.
    """
    delta = {
        ("q0", "(", BOTTOM): ("q1", ("Y", BOTTOM)),
        ("q1", "(", "Y"): ("q1", ("X", "Y")),
        ("q1", "(", "X"): ("q1", ("X", "X")),
        ("q1", ")", "X"): ("q1", ()),
        ("q1", ")", "Y"): ("q0", ()),
    }
    return ensure_valid(make_rdpda(("q0", "q1"), ("(", ")"), ("X", "Y", BOTTOM),
                                   "q0", BOTTOM, delta, {"q0"}))


def dyck_vpa(internals=("a",)) -> VPA:
    """Well-matched words over ( ) with internal letters.

    q0: nothing pending, q1: inside a pair, err: an unmatched return was
    read.  The outermost call pushes B so that its return restores q0.
    """
    states = ("q0", "q1", "err")
    gamma = ("X", "B", BOTTOM)
    dc, dr, di = {}, {}, {}
    for q in states:
        dc[(q, "(")] = ("err", "X") if q == "err" else ("q1", "B" if q == "q0" else "X")
        for g in gamma:
            if q == "err":
                r = "err"
            elif g == BOTTOM:
                r = "err"
            elif g == "B":
                r = "q0"
            else:
                r = "q1"
            dr[(q, ")", g)] = r
        for a in internals:
            di[(q, a)] = q
    return ensure_valid(make_vpa(states, {"("}, {")"}, set(internals), gamma, "q0",
                                 dc, dr, di, {"q0"}))


def vpa_summary_dta(vpa: VPA) -> tuple[DTA, str]:
    """Tree automaton over the nesting tree of well-matched words.

    Inner nodes carry labels "a|b" for a matched call/return pair, leaves
    carry internal symbols, and the virtual root carries ROOT.  A B-state
    is the state transformer of the corresponding factor; the horizontal
    DFA composes transformers.  Returns the automaton and the root label.
    """
    states = list(vpa.states)
    idx = {q: i for i, q in enumerate(states)}
    funcs = list(itertools.product(range(len(states)), repeat=len(states)))
    name = {f: "f" + "".join(map(str, f)) for f in funcs}
    ident = tuple(range(len(states)))

    def compose(f, g):      # first f then g
        return tuple(g[f[i]] for i in range(len(states)))

    horiz = {(name[f], name[g]): name[compose(f, g)] for f in funcs for g in funcs}
    root = "ROOT"
    labels = [root] + sorted(vpa.internals)
    pair_labels = [f"{a}|{b}" for a in sorted(vpa.calls) for b in sorted(vpa.returns)]
    labels += pair_labels
    delta = {}
    for f in funcs:
        delta[(name[f], root)] = name[f]
        for c in vpa.internals:
            delta[(name[f], c)] = name[compose(f, tuple(idx[vpa.delta_int[(q, c)]] for q in states))]
        for lab in pair_labels:
            a, b = lab.split("|")
            out = []
            for q in states:
                q1, g = vpa.delta_c[(q, a)]
                q2 = states[f[idx[q1]]]
                out.append(idx[vpa.delta_r[(q2, b, g)]])
            delta[(name[f], lab)] = name[tuple(out)]
    final = {name[f] for f in funcs if states[f[idx[vpa.start]]] in vpa.final}
    dta = make_dta([name[f] for f in funcs], [name[f] for f in funcs], delta, horiz,
                   name[ident], final, labels)
    return ensure_valid(dta), root


def random_rdpda(rng: random.Random, max_q=3, max_g=3, alphabet="ab", p_undef=0.1) -> RDPDA:
    """Random realtime PDA; each move pops, rewrites or pushes one symbol."""
    Q = [f"q{i}" for i in range(rng.randint(1, max_q))]
    G = ["#"] + [f"g{i}" for i in range(rng.randint(1, max_g - 1))]
    delta = {}
    for p in Q:
        for a in alphabet:
            for g in G:
                if rng.random() < p_undef:
                    continue
                kind = rng.randrange(3)
                push = tuple(rng.choice(G) for _ in range(kind))
                delta[(p, a, g)] = (rng.choice(Q), push)
    final = [q for q in Q if rng.random() < 0.5] or [Q[0]]
    return make_rdpda(Q, tuple(alphabet), G, Q[0], "#", delta, final)


def random_vpa(rng: random.Random, max_q=3, max_g=3, calls="(", returns=")",
               internals="a") -> VPA:
    """Random total VPA; calls never push the bottom symbol."""
    Q = [f"q{i}" for i in range(rng.randint(1, max_q))]
    G = [f"g{i}" for i in range(rng.randint(1, max_g - 1))] + [BOTTOM]
    dc = {(q, a): (rng.choice(Q), rng.choice(G[:-1])) for q in Q for a in calls}
    dr = {(q, a, g): rng.choice(Q) for q in Q for a in returns for g in G}
    di = {(q, a): rng.choice(Q) for q in Q for a in internals}
    final = [q for q in Q if rng.random() < 0.5] or [Q[0]]
    return ensure_valid(make_vpa(Q, set(calls), set(returns), set(internals), G, Q[0],
                                 dc, dr, di, final))
