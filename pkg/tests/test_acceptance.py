"""Acceptance suite: one test per criterion, each printing a PASS line with
its measurements (run with -v -s to watch)."""

import time
from pathlib import Path

from asyncver import (Budgets, Cfg, Context, Multiset, bounded_index_parikh,
                      build_program, check_boundedness,
                      check_fair_starvation, check_fair_termination,
                      check_safety, check_termination, encode_pn,
                      encode_pn_fairterm, enumerate_reachable, karp_miller,
                      parse_program, replay_witness, stitch, to_boolean,
                      widget)
from asyncver.analysis import starvation_lasso_check
from asyncver.cli import main as cli_main
from _gen import gen_boolean_net, gen_net, gen_program, rng_for
from _oracles import cyk_parikh, net_reachable

CORPUS = Path(__file__).resolve().parent.parent / "corpus"
BUD = Budgets(max_states=20_000, max_depth=400, post_budget=12)

_collected_witnesses = []


def load(name):
    return parse_program((CORPUS / name).read_text())


def _timed(fn, *args, **kw):
    t0 = time.monotonic()
    out = fn(*args, **kw)
    return out, time.monotonic() - t0


def _verdict(program, check, *args):
    v, dt = _timed(check, program, *args)
    assert dt < 5.0, f"{check.__name__} took {dt:.1f}s"
    if v.witness is not None:
        _collected_witnesses.append((program, v))
    return v


def test_acceptance_1_paper_example_verdicts():
    fig3 = load("fig3.ap")
    assert _verdict(fig3, check_boundedness, BUD).label == "UNBOUNDED"
    assert _verdict(fig3, check_termination, BUD).label == "NONTERMINATING"
    assert _verdict(fig3, check_fair_termination, BUD).label == "FAIR-TERMINATING"
    for h in ("h1", "h2"):
        v = _verdict(fig3, check_fair_starvation, fig3.symbols.id_of(h), BUD)
        assert v.label == "NO-STARVATION", h

    for name in ("wrpc_n1_w1.ap", "wrpc_n2_w1.ap"):
        wrpc = load(name)
        assert _verdict(wrpc, check_boundedness, BUD).label == "BOUNDED", name
        assert _verdict(wrpc, check_termination, BUD).label == "NONTERMINATING", name
        assert _verdict(wrpc, check_fair_termination, BUD).label == "FAIR-TERMINATING", name

    server = load("server.ap")
    assert _verdict(server, check_safety, server.symbols.id_of("E"),
                    BUD).label == "UNSAFE"
    assert _verdict(server, check_safety, server.symbols.id_of("SFail"),
                    BUD).label == "SAFE"

    selfpost = load("selfpost2.ap")
    assert _verdict(selfpost, check_fair_termination,
                    BUD).label == "FAIR-NONTERMINATING"
    h = selfpost.symbols.id_of("h")
    v = _verdict(selfpost, check_fair_starvation, h, BUD)
    assert v.label == "STARVES"
    assert starvation_lasso_check(selfpost, v.witness, h)
    print("ACCEPTANCE 1: PASS - paper-example verdicts, each under 5s")


def _widget_end_markings(w, post_cap, floor=None, forced=None):
    """End-place Parikh deposits with at most post_cap posts.

    ``floor`` optionally maps each variable place to the least number of
    posts any completion from it must still emit; markings that cannot
    finish within the cap are dead for the compared set and are pruned.
    ``forced`` optionally maps variable places to always-enabled transitions
    whose firing is canonical (a sole epsilon/terminal production, or the
    drain of a variable deriving only the empty word): firing them eagerly
    commutes with every other move, so exploring only normalized markings
    reaches the same end set.
    """
    from collections import deque
    net = w.net
    nplaces = net.place_count
    floor = floor or {}
    post_places = set(w.post_place.values())
    # sparse per-transition data: enabledness checks, delta entries, and the
    # increments to the post count and to the pending-yield lower bound
    checks = []
    sparse = []
    dposts = []
    dpending = []
    for t in net.transitions:
        checks.append(tuple(t.inputs.items()))
        delta: dict = {}
        for p, c in t.inputs.items():
            delta[p] = delta.get(p, 0) - c
        for p, c in t.outputs.items():
            delta[p] = delta.get(p, 0) + c
        entries = tuple((p, d) for p, d in sorted(delta.items()) if d)
        sparse.append(entries)
        dposts.append(sum(d for p, d in entries if p in post_places))
        dpending.append(sum(d * floor.get(p, 0) for p, d in entries))
    forced_items = tuple((forced or {}).items())

    def normalize(vals, posts, pending):
        changed = True
        while changed:
            changed = False
            for p, ti in forced_items:
                if vals[p] > 0:
                    for q, d in sparse[ti]:
                        vals[q] += d
                    posts += dposts[ti]
                    pending += dpending[ti]
                    changed = True
        return vals, posts, pending

    init_vals = [0] * nplaces
    for p, c in net.initial.items():
        init_vals[p] = c
    iposts = sum(c for p, c in net.initial.items() if p in post_places)
    ipending = sum(c * floor.get(p, 0) for p, c in net.initial.items())
    init_vals, iposts, ipending = normalize(init_vals, iposts, ipending)
    init = tuple(init_vals)
    seen = {init: (iposts, ipending)}
    queue = deque([init])
    out = set()
    inv = {p: a for a, p in w.post_place.items()}
    end = w.info.end
    while queue:
        vals = queue.popleft()
        posts, pending = seen[vals]
        if vals[end] == 1:
            out.add(Multiset({inv[p]: c for p, c in enumerate(vals)
                              if c and p in inv}))
            continue
        for ti, need in enumerate(checks):
            ok = True
            for p, c in need:
                if vals[p] < c:
                    ok = False
                    break
            if not ok:
                continue
            nxt = list(vals)
            for q, d in sparse[ti]:
                nxt[q] += d
            nxt, nposts, npending = normalize(nxt, posts + dposts[ti],
                                              pending + dpending[ti])
            if nposts + npending > post_cap:
                continue
            key = tuple(nxt)
            if key not in seen:
                seen[key] = (nposts, npending)
                queue.append(key)
    return out


def _widget_reductions(w, pruned, pg_or_start):
    """(floor, forced) maps for the exact exploration reductions."""
    from asyncver.grammar import min_word_length
    lengths = min_word_length(pruned)
    floor = {place: lengths[v] for v, place in w.info.var_place.items()}

    emits = set()
    changed = True
    while changed:
        changed = False
        for lhs, rhs in pruned.productions:
            if lhs in emits:
                continue
            if ((len(rhs) == 1 and rhs[0] in pruned.terminals)
                    or any(s in emits for s in rhs)):
                emits.add(lhs)
                changed = True

    by_var_transitions = {}
    for ti in w.info.productions:
        t = w.net.transitions[ti]
        (src,) = [p for p in t.inputs.keys() if p != w.info.budget]
        by_var_transitions.setdefault(src, []).append(ti)

    forced = {}
    for v, place in w.info.var_place.items():
        rules = pruned.rhs_of(v)
        pure_eps = lengths[v] == 0 and v not in emits
        sole_cheap = (len(rules) == 1 and len(rules[0]) <= 1)
        if pure_eps or sole_cheap:
            # pick the epsilon/terminal transition (always enabled)
            for ti in by_var_transitions.get(place, ()):
                t = w.net.transitions[ti]
                if w.info.budget not in t.inputs.keys():
                    forced[place] = ti
                    break
    return floor, forced


def test_acceptance_2_widget_adequacy():
    rng = rng_for(9002)
    t0 = time.monotonic()
    programs = 0
    contexts = 0
    mismatches = 0
    while programs < 200:
        p = gen_program(rng, max_states=3, max_handlers=3, max_prods=10)
        programs += 1
        pg = p.products()
        for d1 in p.states:
            for h in p.handlers:
                for d2 in p.states:
                    ctx = Context(d1, h, d2)
                    pruned = pg.pruned(ctx)
                    if pruned is None:
                        continue
                    w = widget(pg, ctx, name_of=p.symbols.name_of)
                    floor, forced = _widget_reductions(w, pruned, pg)
                    got = {m for m in _widget_end_markings(w, post_cap=4,
                                                           floor=floor,
                                                           forced=forced)
                           if m.size <= 4}
                    want = {m for m in cyk_parikh(pruned, pg.start_triple(ctx), 4)}
                    if got != want:
                        mismatches += 1
                    contexts += 1
    elapsed = time.monotonic() - t0
    assert mismatches == 0
    assert elapsed < 60.0, f"adequacy sweep took {elapsed:.1f}s"
    print(f"ACCEPTANCE 2: PASS - widget adequacy on {programs} programs / "
          f"{contexts} contexts, 0 mismatches, {elapsed:.1f}s")


def test_acceptance_3_bounded_index_law():
    rng = rng_for(9003)
    checked = 0
    mismatches = 0
    for _ in range(200):
        p = gen_program(rng, max_states=3, max_handlers=3, max_prods=10)
        g = p.grammar
        k = len(g.variables)
        for h in p.handlers:
            start = p.start_var[h]
            capped = bounded_index_parikh(g, start, k + 1, 6)
            full = cyk_parikh(g, start, 6)
            if capped != full:
                mismatches += 1
            checked += 1
    assert mismatches == 0
    print(f"ACCEPTANCE 3: PASS - bounded-index law on {checked} start "
          f"variables, 0 mismatches")


def _doubling_program(n):
    prods = {"Xgen": [[f"A{n}"]], "Xa": [[]]}
    for i in range(1, n + 1):
        prods[f"A{i}"] = [[f"A{i-1}", f"A{i-1}"]]
    prods["A0"] = [["a"]]
    return build_program(
        states=["d"], init="d", handlers=["gen", "a"],
        productions=prods, flow=[("d", "a", "d"), ("d", "gen", "d")],
        buffer={"gen": 1})


def test_acceptance_4_exponential_grammar_scaling():
    sizes = []
    for n in range(1, 7):
        p = _doubling_program(n)
        d, gen_h, a = (p.symbols.id_of(x) for x in ("d", "gen", "a"))
        w = widget(p.products(), Context(d, gen_h, d), name_of=p.symbols.name_of)
        got = _widget_end_markings(w, post_cap=2 ** n)
        assert got == {Multiset({a: 2 ** n})}, f"n={n}"
        sizes.append(w.net.size())
    deltas = {sizes[i + 1] - sizes[i] for i in range(len(sizes) - 1)}
    assert len(deltas) == 1, f"widget size not linear in n: {sizes}"
    print(f"ACCEPTANCE 4: PASS - doubling widgets exact for n=1..6, sizes "
          f"{sizes} grow linearly while outputs double")


def test_acceptance_5_round_trip_pn_program():
    rng = rng_for(9005)
    t0 = time.monotonic()
    nets = 0
    while nets < 100:
        n = gen_boolean_net(rng, max_places=5, max_trans=3)
        reach, exhausted = net_reachable(n, 10_000)
        if not exhausted and karp_miller(n).bounded():
            continue   # keep the state space honest: bounded => exhaustible
        nets += 1
        want_bounded = karp_miller(n).bounded()
        enc = encode_pn(n)
        got = check_boundedness(enc.program, BUD)
        assert (got.label == "BOUNDED") == want_bounded, f"net {nets}"

        ti = rng.randrange(len(n.transitions))
        t = n.transitions[ti]
        firable = karp_miller(n).covers(t.inputs)
        done_state = enc.state_map[(t.name, ())]
        v = check_safety(enc.program, enc.program.symbols.id_of(done_state), BUD)
        assert (v.label == "UNSAFE") == firable, f"net {nets} transition {t.name}"
        if v.witness is not None:
            _collected_witnesses.append((enc.program, v))

    fair_checked = 0
    while fair_checked < 25:
        n = gen_boolean_net(rng, max_places=4, max_trans=2)
        markings, exhausted = net_reachable(n, 400)
        if not exhausted:
            continue
        p1 = rng.randrange(n.place_count)
        want = any(m[p1] == 0 for m in markings)
        enc = encode_pn_fairterm(n, p1)
        v = check_fair_termination(enc.program, BUD)
        assert (v.label == "FAIR-NONTERMINATING") == want, f"net {fair_checked}"
        if v.witness is not None:
            _collected_witnesses.append((enc.program, v))
        fair_checked += 1
    elapsed = time.monotonic() - t0
    print(f"ACCEPTANCE 5: PASS - 100 net/program round trips plus "
          f"{fair_checked} fair-termination encodings agree, {elapsed:.1f}s")


def test_acceptance_6_boolean_normalization():
    rng = rng_for(9006)
    nets = 0
    sanity = 0
    while nets < 100:
        n = gen_net(rng, max_places=5, max_trans=3, max_count=7, max_init=7)
        nets += 1
        nb, _ = to_boolean(n, "bound")
        assert nb.is_boolean()
        assert karp_miller(n).bounded() == karp_miller(nb).bounded(), f"net {nets}"

        target = Multiset({p: rng.randint(0, 7)
                           for p in range(n.place_count) if rng.random() < 0.5})
        nc, tc = to_boolean(n, "cover", target)
        assert nc.is_boolean()
        direct = karp_miller(n).covers(target)
        via_boolean = karp_miller(nc).covers(tc)
        assert direct == via_boolean, f"net {nets}"
        from _oracles import net_coverable
        oracle = net_coverable(n, target, 3000)
        if oracle is not None:
            assert direct == oracle
            sanity += 1
    assert sanity > 30
    print(f"ACCEPTANCE 6: PASS - boolean normalization preserves boundedness "
          f"and coverability on {nets} nets ({sanity} oracle-checked)")


def test_acceptance_7_cancel_safety():
    rng = rng_for(9007)
    programs = 0
    while programs < 50:
        p = gen_program(rng, max_states=3, max_handlers=3, max_prods=8,
                        cancels=True)
        configs, exhausted = enumerate_reachable(p, 150, 4)
        if not exhausted:
            continue
        programs += 1
        reachable_states = {c.state for c in configs}
        for d in p.states:
            v = check_safety(p, d, BUD)
            assert (v.label == "UNSAFE") == (d in reachable_states), \
                f"program {programs} state {d}"
            if v.witness is not None:
                _collected_witnesses.append((p, v))

    # refusal paths: undecidable queries on cancel programs exit 3
    for cmd in ("check-bound", "check-term"):
        code = cli_main([cmd, str(CORPUS / "cancel_flush.ap")])
        assert code == 3, cmd
    print(f"ACCEPTANCE 7: PASS - cancel safety agrees with the simulator on "
          f"{programs} programs; undecidable queries refused with exit 3")


def test_acceptance_8_witness_self_audit():
    # the corpus verdicts contribute their witnesses too
    fig3 = load("fig3.ap")
    selfpost = load("selfpost2.ap")
    server = load("server.ap")
    for program, check, args in (
            (fig3, check_boundedness, ()),
            (fig3, check_termination, ()),
            (load("wrpc_n1_w1.ap"), check_termination, ()),
            (server, check_safety, (server.symbols.id_of("E"),)),
            (selfpost, check_fair_termination, ()),
            (selfpost, check_fair_starvation, (selfpost.symbols.id_of("h"),))):
        v = check(program, *args, BUD) if args else check(program, BUD)
        if v.witness is not None:
            _collected_witnesses.append((program, v))
    assert _collected_witnesses, "no witnesses were produced by the suite"
    bad = 0
    for program, v in _collected_witnesses:
        if not replay_witness(program, v.witness):
            bad += 1
    assert bad == 0
    print(f"ACCEPTANCE 8: PASS - {len(_collected_witnesses)} emitted "
          f"witnesses, 100% replay in the simulator")
