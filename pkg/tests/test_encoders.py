import pytest

from asyncver import (Budgets, Multiset, check_boundedness,
                      check_fair_termination, check_safety, encode_pn,
                      encode_pn_fairterm, enumerate_reachable, parse_net,
                      parse_program, format_program)
from _gen import gen_boolean_net, rng_for
from _oracles import net_reachable

BUD = Budgets(max_states=4_000, max_depth=150, post_budget=8)


def net_of(text):
    return parse_net(text)


def test_handler_per_place_plus_driver():
    n = net_of("net { places: p q; init: p:1; trans t { in: p; out: q; } }")
    enc = encode_pn(n)
    assert len(enc.program.handlers) == 3     # p, q, and the driver
    assert set(enc.handler_map) == {"p", "q"}


def test_initial_buffer_mirrors_marking():
    n = net_of("net { places: p q; init: p:1; trans t { in: p; out: q; } }")
    enc = encode_pn(n)
    p = enc.program
    buf = {p.symbols.name_of(h): c for h, c in p.init_buffer.items()}
    assert buf == {"p": 1, "runPN": 1}


def test_non_boolean_net_rejected():
    n = net_of("net { places: p; init: p:2; trans t { in: p; out: p:2; } }")
    with pytest.raises(ValueError, match="Boolean"):
        encode_pn(n)


def test_empty_precondition_rejected():
    n = net_of("net { places: p; init: p:1; trans t { out: p; } }")
    with pytest.raises(ValueError, match="precondition"):
        encode_pn(n)


def test_encoded_program_round_trips_through_text():
    n = net_of("net { places: p q; init: p:1; trans t { in: p; out: q; } }")
    enc = encode_pn(n)
    reparsed = parse_program(format_program(enc.program))
    assert len(reparsed.handlers) == len(enc.program.handlers)


def test_cosimulation_invariant():
    """Configurations at rest project onto exactly the net's reachable
    markings (within an exhaustive exploration)."""
    rng = rng_for(808)
    nets_checked = 0
    for _ in range(12):
        n = gen_boolean_net(rng, max_places=3, max_trans=3)
        markings, exhausted = net_reachable(n, 300)
        if not exhausted:
            continue
        enc = encode_pn(n)
        p = enc.program
        configs, prog_exhausted = enumerate_reachable(p, 4000, 8)
        assert prog_exhausted
        resting_states = {name for key, name in enc.state_map.items()
                          if key[1] == ()}
        projected = set()
        for c in configs:
            if p.symbols.name_of(c.state) in resting_states:
                projected.add(enc.buffer_projection(c))
        by_name = {Multiset({n.place_names[pl]: c for pl, c in m.items()})
                   for m in markings}
        assert projected == by_name
        nets_checked += 1
    assert nets_checked > 5


def test_roundtrip_boundedness_small():
    rng = rng_for(809)
    agreed = 0
    for _ in range(10):
        n = gen_boolean_net(rng, max_places=3, max_trans=3)
        from asyncver import karp_miller
        want = karp_miller(n).bounded()
        enc = encode_pn(n)
        got = check_boundedness(enc.program, BUD).label == "BOUNDED"
        assert got == want
        agreed += 1
    assert agreed == 10


def test_roundtrip_coverability_small():
    rng = rng_for(810)
    compared = 0
    for _ in range(10):
        n = gen_boolean_net(rng, max_places=3, max_trans=3)
        from asyncver import karp_miller
        g = karp_miller(n)
        enc = encode_pn(n)
        for ti, t in enumerate(n.transitions):
            # transition firable somewhere iff its completion state shows up
            firable = g.covers(t.inputs)
            pre = tuple(sorted(t.inputs.keys()))
            done_state = enc.state_map[(t.name, ())]
            v = check_safety(enc.program,
                             enc.program.symbols.id_of(done_state), BUD)
            assert (v.label == "UNSAFE") == firable, (t.name, firable)
            compared += 1
    assert compared > 10


def test_fairterm_encoding_empties_p1():
    # p1's token can be consumed: the program has a fair infinite run
    n = net_of("net { places: p1 p2; init: p1:1; trans t { in: p1; out: p2; } }")
    enc = encode_pn_fairterm(n, "p1")
    v = check_fair_termination(enc.program, BUD)
    assert v.label == "FAIR-NONTERMINATING"


def test_fairterm_encoding_invariant_p1():
    # p1 is initially marked and never consumed: no fair infinite run
    n = net_of("net { places: p1 p2; init: p1:1 p2:1; trans t { in: p2; out: p2; } }")
    enc = encode_pn_fairterm(n, "p1")
    v = check_fair_termination(enc.program, BUD)
    assert v.label == "FAIR-TERMINATING"


def test_fairterm_guard_place_added():
    n = net_of("net { places: p1; init: p1:1; trans t { in: p1; } }")
    enc = encode_pn_fairterm(n, "p1")
    assert "guard" in enc.handler_map
    guard_handler = enc.program.symbols.id_of(enc.handler_map["guard"])
    assert enc.program.init_buffer[guard_handler] == 1
    # ... and the guard keeps the post-guess phase alive: emptying p1 gives
    # a fair run even though the net marking is then empty
    v = check_fair_termination(enc.program, BUD)
    assert v.label == "FAIR-NONTERMINATING"


def test_fairterm_matches_explicit_emptiability():
    rng = rng_for(811)
    compared = 0
    for _ in range(8):
        n = gen_boolean_net(rng, max_places=3, max_trans=2)
        markings, exhausted = net_reachable(n, 200)
        if not exhausted:
            continue
        p1 = 0
        want = any(m[p1] == 0 for m in markings)
        enc = encode_pn_fairterm(n, p1)
        v = check_fair_termination(enc.program, BUD)
        assert (v.label == "FAIR-NONTERMINATING") == want
        compared += 1
    assert compared > 3
