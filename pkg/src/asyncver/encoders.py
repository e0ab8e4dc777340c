"""Reverse reductions: simulate a Boolean Petri net by an asynchronous
program.  Used as generators for round-trip differential tests of the
forward compilation."""

from __future__ import annotations

import re
from dataclasses import dataclass

from .grammar import Cfg, RegularGrammar, normalize_cfg
from .multiset import Multiset
from .petri import PetriNet
from .program import (HANDLER, INTERNAL, STATE, VARIABLE, AsyncProgram,
                      SymbolTable)


@dataclass(frozen=True)
class EncodedProgram:
    """Program simulating a net, with the bookkeeping to read results back:
    which global state encodes which (transition, pending-precondition)
    pair and which handler stands for which place."""
    program: AsyncProgram
    state_map: dict      # (transition name | None, suffix of place names) -> state name
    handler_map: dict    # place name -> handler name

    def buffer_projection(self, config) -> Multiset:
        """Marking encoded by a configuration (place-handler counts only)."""
        inv = {self.program.symbols.id_of(h): p for p, h in self.handler_map.items()}
        return Multiset({inv[h]: c for h, c in config.buffer.items() if h in inv})


def _sanitize(name: str, taken: set) -> str:
    base = re.sub(r"[^A-Za-z0-9_]", "_", name)
    if not base or base[0].isdigit():
        base = "p_" + base
    out = base
    n = 0
    while out in taken:
        n += 1
        out = f"{base}_{n}"
    taken.add(out)
    return out


def _check_encodable(net: PetriNet):
    if net.has_resets:
        raise ValueError("encoding requires a plain net")
    if not net.is_boolean():
        raise ValueError("encoding requires a Boolean net (normalize first)")
    for t in net.transitions:
        if t.inputs.size == 0:
            raise ValueError(f"transition {t.name} has an empty precondition")


def _suffixes(net: PetriNet):
    """(transition index, ordered precondition, suffix list) per transition;
    places consumed in index order."""
    out = []
    for ti, t in enumerate(net.transitions):
        pre = sorted(t.inputs.keys())
        suffixes = [tuple(pre[i:]) for i in range(len(pre) + 1)]
        out.append((ti, tuple(pre), suffixes))
    return out


def encode_pn(n: PetriNet) -> EncodedProgram:
    """One handler per place plus a driver handler.

    The driver repeatedly guesses a transition; the global state records
    the guess and the places still to be consumed.  A place handler whose
    place heads the pending precondition consumes itself (does not repost)
    and, on the last one, posts the postset.  Whenever the pending
    precondition is empty the place-handler counts are exactly a reachable
    marking of the net.
    """
    _check_encodable(n)
    taken: set = set()
    handler_of_place = {p: _sanitize(n.place_names[p], taken) for p in range(n.place_count)}
    driver = _sanitize("runPN", taken)

    table = SymbolTable()
    state_names: dict = {}

    def state_name(key) -> str:
        tname, suffix = key
        if key not in state_names:
            raw = "st_idle" if tname is None else \
                "st_" + tname + "_" + ("_".join(n.place_names[p] for p in suffix) or "done")
            state_names[key] = _sanitize(raw, taken)
        return state_names[key]

    idle = (None, ())
    state_keys = [idle]
    for ti, pre, suffixes in _suffixes(n):
        for s in suffixes:
            if s:
                state_keys.append((n.transitions[ti].name, s))
            else:
                state_keys.append((n.transitions[ti].name, ()))
    # (t, ()) states share nothing with idle; dedupe preserving order
    seen = set()
    state_keys = [k for k in state_keys if not (k in seen or seen.add(k))]
    state_ids = {k: table.add(state_name(k), STATE) for k in state_keys}

    handler_ids = {p: table.add(handler_of_place[p], HANDLER)
                   for p in range(n.place_count)}
    driver_id = table.add(driver, HANDLER)

    internal_ids: dict = {}

    def internal(name: str) -> int:
        if name not in internal_ids:
            internal_ids[name] = table.add(_sanitize(name, taken), INTERNAL)
        return internal_ids[name]

    rules = []
    prods: dict = {}

    def var(name: str) -> int:
        return table.add(name, VARIABLE)

    # the driver: guess a transition when no precondition is pending
    x_driver = var("Xdriver")
    resting = [k for k in state_keys if k[1] == ()]
    for ti, pre, _ in _suffixes(n):
        tname = n.transitions[ti].name
        letter = internal(f"pick_{tname}")
        for k in resting:
            rules.append((state_ids[k], letter, state_ids[(tname, pre)]))
        prods.setdefault(x_driver, []).append((letter, driver_id))
    wait_driver = internal("busy")
    for k in state_keys:
        if k[1] != ():
            rules.append((state_ids[k], wait_driver, state_ids[k]))
    prods.setdefault(x_driver, []).append((wait_driver, driver_id))

    # place handlers
    x_place = {}
    for p in range(n.place_count):
        x_place[p] = var("X" + handler_of_place[p])
    for p in range(n.place_count):
        wait = internal(f"wait_{n.place_names[p]}")
        for k in state_keys:
            if not (k[1] and k[1][0] == p):
                rules.append((state_ids[k], wait, state_ids[k]))
        prods.setdefault(x_place[p], []).append((wait, handler_ids[p]))
    for ti, pre, suffixes in _suffixes(n):
        t = n.transitions[ti]
        for j, suffix in enumerate(suffixes[:-1]):
            p = suffix[0]
            letter = internal(f"eat_{t.name}_{n.place_names[p]}")
            rules.append((state_ids[(t.name, suffix)], letter,
                          state_ids[(t.name, suffix[1:])]))
            body = [letter]
            if len(suffix) == 1:  # last precondition: emit the postset
                body += [handler_ids[q] for q in sorted(t.outputs.keys())]
            prods.setdefault(x_place[p], []).append(tuple(body))

    # posting never changes the global state
    all_handler_ids = list(handler_ids.values()) + [driver_id]
    for h in all_handler_ids:
        for k in state_keys:
            rules.append((state_ids[k], h, state_ids[k]))

    terminal_ids = set(all_handler_ids) | set(internal_ids.values())
    raw = Cfg(list(prods.keys()), terminal_ids,
              [(lhs, tuple(rhs) if isinstance(rhs, tuple) else rhs)
               for lhs, alts in prods.items() for rhs in alts])
    grammar = normalize_cfg(raw, fresh=lambda hint: table.fresh("_" + hint, VARIABLE))
    transfer = RegularGrammar(tuple(state_ids.values()), terminal_ids, rules)

    start_var = {handler_ids[p]: x_place[p] for p in range(n.place_count)}
    start_var[driver_id] = x_driver
    buffer = {handler_ids[p]: c for p, c in n.initial.items()}
    buffer[driver_id] = 1

    program = AsyncProgram(
        symbols=table,
        states=tuple(state_ids.values()),
        handlers=tuple(list(handler_ids.values()) + [driver_id]),
        internals=tuple(internal_ids.values()),
        cancels={},
        grammar=grammar,
        transfer=transfer,
        start_var=start_var,
        init_state=state_ids[idle],
        init_buffer=Multiset(buffer),
    )
    state_map = {(k[0], tuple(n.place_names[p] for p in k[1])): state_name(k)
                 for k in state_keys}
    handler_map = {n.place_names[p]: handler_of_place[p] for p in range(n.place_count)}
    return EncodedProgram(program, state_map, handler_map)


def encode_pn_fairterm(n: PetriNet, p1) -> EncodedProgram:
    """Program with a fair infinite run iff the net can empty place p1.

    A one-shot guesser freezes the driver; from then on the simulation can
    only idle fairly if the guess happened at a clean point with no pending
    instance of p1's handler.  A disconnected, initially marked guard place
    keeps the idling phase non-empty.
    """
    _check_encodable(n)
    if isinstance(p1, str):
        p1 = n.place(p1)
    if not (0 <= p1 < n.place_count):
        raise ValueError("p1 is not a place of the net")

    guard_name = "guard"
    while guard_name in n.place_names:
        guard_name += "'"
    place_names = list(n.place_names) + [guard_name]
    guard = len(place_names) - 1

    taken: set = set()
    handler_of_place = {p: _sanitize(place_names[p], taken)
                        for p in range(len(place_names))}
    driver = _sanitize("runPN", taken)
    main = _sanitize("main", taken)
    guess = _sanitize("guess", taken)

    table = SymbolTable()
    st_keys = [(None, ())]
    for ti, pre, suffixes in _suffixes(n):
        for s in suffixes:
            st_keys.append((n.transitions[ti].name, s))
    seen = set()
    st_keys = [k for k in st_keys if not (k in seen or seen.add(k))]

    state_ids: dict = {}
    for k in st_keys:
        for pn in (False, True):
            for tm in (False, True):
                tname, suffix = k
                raw = ("st_idle" if tname is None else
                       "st_" + tname + "_" + ("_".join(place_names[p] for p in suffix) or "done"))
                raw += ("_null" if pn else "_live") + ("_halt" if tm else "_go")
                state_ids[(k, pn, tm)] = table.add(_sanitize(raw, taken), STATE)

    handler_ids = {p: table.add(handler_of_place[p], HANDLER)
                   for p in range(len(place_names))}
    driver_id = table.add(driver, HANDLER)
    main_id = table.add(main, HANDLER)
    guess_id = table.add(guess, HANDLER)

    internal_ids: dict = {}

    def internal(name: str) -> int:
        if name not in internal_ids:
            internal_ids[name] = table.add(_sanitize(name, taken), INTERNAL)
        return internal_ids[name]

    rules = []
    prods: dict = {}

    def var(name: str) -> int:
        return table.add(name, VARIABLE)

    resting = [k for k in st_keys if k[1] == ()]

    # driver: pick transitions only while the guesser has not fired
    x_driver = var("Xdriver")
    for ti, pre, _ in _suffixes(n):
        tname = n.transitions[ti].name
        letter = internal(f"pick_{tname}")
        for k in resting:
            for tm in (False, True):
                rules.append((state_ids[(k, False, tm)], letter,
                              state_ids[((tname, pre), False, tm)]))
        prods.setdefault(x_driver, []).append((letter, driver_id))
    busy = internal("busy")
    for k in st_keys:
        if k[1] != ():
            for tm in (False, True):
                rules.append((state_ids[(k, False, tm)], busy,
                              state_ids[(k, False, tm)]))
    prods.setdefault(x_driver, []).append((busy, driver_id))
    frozen = internal("frozen")
    for k in st_keys:
        for tm in (False, True):
            rules.append((state_ids[(k, True, tm)], frozen,
                          state_ids[(k, True, tm)]))
    prods.setdefault(x_driver, []).append((frozen,))

    # guesser: one shot, freezes the driver; a dirty state also halts
    x_guess = var("Xguess")
    shoot = internal("declare_null")
    for k in st_keys:
        for pn in (False, True):
            for tm in (False, True):
                tm2 = tm or (k[1] != ())
                rules.append((state_ids[(k, pn, tm)], shoot,
                              state_ids[(k, True, tm2)]))
    prods.setdefault(x_guess, []).append((shoot,))

    # main: post the driver and the guesser
    x_main = var("Xmain")
    prods.setdefault(x_main, []).append((driver_id, guess_id))

    # place handlers
    x_place = {p: var("X" + handler_of_place[p]) for p in range(len(place_names))}
    for p in range(len(place_names)):
        wait = internal(f"wait_{place_names[p]}")
        for k in st_keys:
            if k[1] and k[1][0] == p:
                continue
            for pn in (False, True):
                if p == p1 and pn:
                    continue          # p1 under a null guess halts instead
                rules.append((state_ids[(k, pn, False)], wait,
                              state_ids[(k, pn, False)]))
        prods.setdefault(x_place[p], []).append((wait, handler_ids[p]))
    kill = internal("p1_pending_after_guess")
    for k in st_keys:
        for tm in (False, True):
            rules.append((state_ids[(k, True, tm)], kill,
                          state_ids[(k, True, True)]))
    prods.setdefault(x_place[p1], []).append((kill,))
    for ti, pre, suffixes in _suffixes(n):
        t = n.transitions[ti]
        for suffix in suffixes[:-1]:
            p = suffix[0]
            letter = internal(f"eat_{t.name}_{place_names[p]}")
            pn_options = (False,) if p == p1 else (False, True)
            for pn in pn_options:
                for tm in (False, True):
                    rules.append((state_ids[((t.name, suffix), pn, tm)], letter,
                                  state_ids[((t.name, suffix[1:]), pn, tm)]))
            body = [letter]
            if len(suffix) == 1:
                body += [handler_ids[q] for q in sorted(t.outputs.keys())]
            prods.setdefault(x_place[p], []).append(tuple(body))

    all_handler_ids = (list(handler_ids.values())
                       + [driver_id, main_id, guess_id])
    for h in all_handler_ids:
        for key in state_ids.values():
            rules.append((key, h, key))

    terminal_ids = set(all_handler_ids) | set(internal_ids.values())
    raw = Cfg(list(prods.keys()), terminal_ids,
              [(lhs, tuple(rhs)) for lhs, alts in prods.items() for rhs in alts])
    grammar = normalize_cfg(raw, fresh=lambda hint: table.fresh("_" + hint, VARIABLE))
    transfer = RegularGrammar(tuple(state_ids.values()), terminal_ids, rules)

    start_var = {handler_ids[p]: x_place[p] for p in range(len(place_names))}
    start_var[driver_id] = x_driver
    start_var[main_id] = x_main
    start_var[guess_id] = x_guess
    buffer = {handler_ids[p]: c for p, c in n.initial.items()}
    buffer[handler_ids[guard]] = 1
    buffer[main_id] = 1

    program = AsyncProgram(
        symbols=table,
        states=tuple(state_ids.values()),
        handlers=tuple(all_handler_ids),
        internals=tuple(internal_ids.values()),
        cancels={},
        grammar=grammar,
        transfer=transfer,
        start_var=start_var,
        init_state=state_ids[((None, ()), False, False)],
        init_buffer=Multiset(buffer),
    )
    state_map = {(k[0], tuple(place_names[p] for p in k[1]), pn, tm):
                 table.name_of(sid)
                 for (k, pn, tm), sid in state_ids.items()}
    handler_map = {place_names[p]: handler_of_place[p]
                   for p in range(len(place_names))}
    return EncodedProgram(program, state_map, handler_map)
