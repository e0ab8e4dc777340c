import pytest

from asyncver import Cfg, RegularGrammar, normalize_cfg
from asyncver.grammar import (can_emit_terminal, language_empty,
                              min_letter_count, prune_cfg)
from _gen import rng_for
from _oracles import cyk_words


def _words(cfg, start, max_len):
    return cyk_words(cfg, start, max_len)


def test_normalize_two_terminals():
    g = Cfg(["X"], {"a", "b"}, [("X", ("a", "b"))])
    norm = normalize_cfg(g)
    assert norm.is_normal()
    assert _words(norm, "X", 6) == {("a", "b")}
    # fresh unit variables for both terminals
    lifted = [lhs for lhs, rhs in norm.productions if rhs in (("a",), ("b",))]
    assert len(set(lifted)) == 2


def test_normalize_single_terminal_unchanged():
    g = Cfg(["X"], {"a"}, [("X", ("a",))])
    norm = normalize_cfg(g)
    assert norm.productions == (("X", ("a",)),)


def test_normalize_binarizes_long_rhs():
    g = Cfg(["X", "Y", "Z", "W"], {"a"},
            [("X", ("Y", "Z", "W")), ("Y", ("a",)), ("Z", ("a",)), ("W", ())])
    norm = normalize_cfg(g)
    assert norm.is_normal()
    assert _words(norm, "X", 6) == {("a", "a")}
    fresh = set(norm.variables) - set(g.variables)
    assert len(fresh) == 1


def test_normalize_unit_production():
    g = Cfg(["X", "Y"], {"a"}, [("X", ("Y",)), ("Y", ("a",))])
    norm = normalize_cfg(g)
    assert norm.is_normal()
    assert _words(norm, "X", 4) == {("a",)}


def test_normalize_preserves_language_random():
    rng = rng_for(202)
    for trial in range(60):
        n_vars = rng.randint(1, 4)
        variables = [f"V{i}" for i in range(n_vars)]
        terminals = ["a", "b"]
        prods = []
        for i in range(rng.randint(1, 8)):
            lhs = rng.choice(variables)
            rhs = tuple(rng.choice(variables + terminals)
                        for _ in range(rng.choice([0, 1, 2, 3])))
            prods.append((lhs, rhs))
        g = Cfg(variables, terminals, prods)
        norm = normalize_cfg(g)
        assert norm.is_normal()
        for v in variables:
            want = _generic_words(g, v, 6)
            got = {w for w in cyk_words(norm, v, 6)}
            assert got == want, f"trial {trial} variable {v}"


def _generic_words(cfg, start, max_len):
    """Bottom-up word sets for arbitrary (pre-normal) rhs."""
    words = {v: set() for v in cfg.variables}
    changed = True
    while changed:
        changed = False
        for lhs, rhs in cfg.productions:
            parts = [words[s] if s in words else {(s,)} for s in rhs]
            combos = {()}
            for ps in parts:
                combos = {u + v for u in combos for v in ps
                          if len(u) + len(v) <= max_len}
            added = combos - words[lhs]
            if added:
                words[lhs] |= added
                changed = True
    return words[start]


def test_prune_keeps_language():
    g = Cfg(["S", "Dead", "Loop"], {"a"},
            [("S", ("a",)), ("Dead", ("a",)), ("Loop", ("Loop", "Loop"))])
    pruned = prune_cfg(g, "S")
    assert set(pruned.variables) == {"S"}
    assert cyk_words(pruned, "S", 3) == {("a",)}


def test_language_empty_detects_unproductive():
    g = Cfg(["S"], {"a"}, [("S", ("S", "S"))])
    assert language_empty(g, "S")
    assert not language_empty(Cfg(["S"], {"a"}, [("S", ())]), "S")


def test_can_emit_terminal():
    only_eps = Cfg(["S", "E"], {"a"}, [("S", ("E", "E")), ("E", ())])
    assert not can_emit_terminal(only_eps, "S")
    some = Cfg(["S"], {"a"}, [("S", ()), ("S", ("a",))])
    assert can_emit_terminal(some, "S")


def test_min_letter_count():
    g = Cfg(["S", "A", "B"], {"a", "b"},
            [("S", ("A", "B")), ("A", ("a",)), ("B", ("b",)), ("B", ("A", "A"))])
    best = min_letter_count(g, "a")
    assert best["A"] == 1
    assert best["B"] == 0   # via B -> b
    assert best["S"] == 1
    best_b = min_letter_count(g, "b")
    assert best_b["S"] == 0  # S -> A (A A) avoids b


def test_regular_grammar_walk():
    r = RegularGrammar(["d0", "d1"], {"a", "b"},
                       [("d0", "a", "d1"), ("d1", "b", "d1"), ("d0", "a", "d0")])
    assert r.walk("d0", ("a", "b")) == frozenset({"d1"})
    assert r.walk("d0", ("b",)) == frozenset()
    assert r.walk("d0", ()) == frozenset({"d0"})


def test_regular_grammar_validation():
    with pytest.raises(ValueError):
        RegularGrammar([], {"a"}, [])
    with pytest.raises(ValueError):
        RegularGrammar(["d"], {"a"}, [("d", "z", "d")])
