from pathlib import Path

from asyncver import (Configuration, Multiset, build_program,
                      enumerate_reachable, parse_program, step)
from _gen import gen_program, rng_for
from _oracles import cancel_step_oracle, step_oracle

CORPUS = Path(__file__).resolve().parent.parent / "corpus"


def load(name):
    return parse_program((CORPUS / name).read_text())


def ids(p, *names):
    return tuple(p.symbols.id_of(n) for n in names)


def test_fig3_step_posting_branch():
    p = load("fig3.ap")
    b0, h1, h2 = ids(p, "b0", "h1", "h2")
    succ = step(p, Configuration(b0, Multiset.single(h1)), 2)
    assert (h1, Configuration(b0, Multiset({h1: 1, h2: 1}))) in succ


def test_fig3_step_quiet_branch():
    p = load("fig3.ap")
    b1, h1 = ids(p, "b1", "h1")
    succ = step(p, Configuration(b1, Multiset.single(h1)), 2)
    assert succ == {(h1, Configuration(b1, Multiset()))}


def test_step_nothing_pending():
    p = load("fig3.ap")
    b0 = p.symbols.id_of("b0")
    assert step(p, Configuration(b0, Multiset()), 4) == set()


def test_enumerate_trivial_program_exhausts():
    p = build_program(states=["d"], init="d", handlers=["h"],
                      productions={"Xh": [[]]}, flow=[], buffer={"h": 1})
    configs, exhausted = enumerate_reachable(p, 10, 4)
    assert exhausted
    h = p.symbols.id_of("h")
    d = p.symbols.id_of("d")
    assert configs == {Configuration(d, Multiset.single(h)),
                       Configuration(d, Multiset())}


def test_enumerate_fig3_hits_state_bound():
    p = load("fig3.ap")
    _, exhausted = enumerate_reachable(p, 50, 4)
    assert not exhausted


def test_enumerate_wrpc_exhausts():
    p = load("wrpc_n1_w1.ap")
    configs, exhausted = enumerate_reachable(p, 1000, 4)
    assert exhausted
    s11 = p.symbols.id_of("s11")
    assert Configuration(s11, Multiset()) in configs


def test_truncation_flagged_not_silent():
    # body posts unboundedly many h in one dispatch: any budget truncates
    p = build_program(states=["d"], init="d", handlers=["h"],
                      productions={"Xh": [["h", "Xh"], []]},
                      flow=[("d", "h", "d")], buffer={"h": 1})
    _, exhausted = enumerate_reachable(p, 10_000, 3)
    assert not exhausted


def test_step_monotone_on_enumerated_instances():
    rng = rng_for(303)
    checked = 0
    for _ in range(25):
        p = gen_program(rng)
        configs, _ = enumerate_reachable(p, 40, 4)
        configs = sorted(configs, key=lambda c: (c.state, c.buffer.items()))[:12]
        for c1 in configs:
            succ1 = step(p, c1, 4)
            for c3 in configs:
                if c3.state != c1.state or not c1.buffer.leq(c3.buffer):
                    continue
                succ3 = step(p, c3, 4)
                for sigma, c2 in succ1:
                    assert any(s == sigma and c2.state == c4.state
                               and c2.buffer.leq(c4.buffer)
                               for s, c4 in succ3), "monotonicity violated"
                    checked += 1
    assert checked > 50


def test_step_matches_direct_semantics():
    rng = rng_for(304)
    compared = 0
    for _ in range(40):
        p = gen_program(rng, max_prods=8)
        configs, _ = enumerate_reachable(p, 12, 3)
        for c in sorted(configs, key=lambda c: (c.state, c.buffer.items()))[:6]:
            got = step(p, c, 3)
            want = step_oracle(p, c, 3, word_cap=9)
            missing = want - got
            assert not missing, f"oracle successors missing: {missing}"
            # soundness: every enumerated successor has a witnessing word
            assert got <= step_oracle(p, c, 3, word_cap=12)
            compared += 1
    assert compared > 100


def test_cancel_step_matches_direct_semantics():
    rng = rng_for(305)
    compared = 0
    for _ in range(25):
        p = gen_program(rng, max_prods=6, cancels=True)
        configs, _ = enumerate_reachable(p, 10, 3)
        for c in sorted(configs, key=lambda c: (c.state, c.buffer.items()))[:5]:
            got = step(p, c, 3)
            want = cancel_step_oracle(p, c, 3, word_cap=9)
            assert want <= got, f"missing: {want - got}"
            assert got <= cancel_step_oracle(p, c, 3, word_cap=12)
            compared += 1
    assert compared > 60


def test_cancel_flush_semantics():
    p = load("cancel_flush.ap")
    d0, d1, f, g = ids(p, "d0", "d1", "f", "g")
    succ = step(p, p.initial_configuration(), 4)
    by_f = {s for s in succ if s[0] == f}
    assert by_f == {(f, Configuration(d1, Multiset.single(g)))}
