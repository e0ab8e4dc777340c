"""Seeded random generators for programs and nets.  ASYNCVER_SEED shifts
the base seed for exploratory runs; it never affects any verdict logic."""

import os
import random

from asyncver import Multiset, PetriNet, Transition, build_program

BASE_SEED = int(os.environ.get("ASYNCVER_SEED", "0"))


def rng_for(test_seed: int) -> random.Random:
    return random.Random(BASE_SEED * 1_000_003 + test_seed)


def gen_program(rng, max_states=3, max_handlers=3, max_prods=10,
                max_internals=2, cancels=False, post_rule_prob=0.85):
    """Random small program.  Bodies are random pre-normal productions; the
    transfer relation gets self-loop rules for posts with high probability
    plus a few random internal-letter rules."""
    n_states = rng.randint(1, max_states)
    n_handlers = rng.randint(1, max_handlers)
    n_internals = rng.randint(0, max_internals)
    states = [f"d{i}" for i in range(n_states)]
    handlers = [f"h{i}" for i in range(n_handlers)]
    internals = [f"s{i}" for i in range(n_internals)]
    extra_vars = [f"V{i}" for i in range(rng.randint(0, 2))]

    letters = handlers + internals
    if cancels:
        letters = letters + ["~" + h for h in handlers]
    variables = ["X" + h for h in handlers] + extra_vars
    productions = {v: [] for v in variables}
    n_prods = rng.randint(n_handlers, max_prods)
    for i in range(n_prods):
        lhs = variables[i % len(variables)] if i < len(variables) else rng.choice(variables)
        length = rng.choice([0, 1, 1, 2, 2, 3])
        rhs = []
        for _ in range(length):
            if extra_vars and rng.random() < 0.3:
                rhs.append(rng.choice(variables))
            else:
                rhs.append(rng.choice(letters))
        productions[lhs].append(rhs)
    for v in variables:
        if not productions[v]:
            productions[v].append([])

    flow = []
    seen = set()

    def add_rule(d, a, d2):
        if (d, a, d2) not in seen:
            seen.add((d, a, d2))
            flow.append((d, a, d2))

    for d in states:
        for h in handlers:
            if rng.random() < post_rule_prob:
                add_rule(d, h, d)
        if cancels:
            for h in handlers:
                if rng.random() < post_rule_prob:
                    add_rule(d, "~" + h, d)
    for a in internals:
        for _ in range(rng.randint(0, n_states + 1)):
            add_rule(rng.choice(states), a, rng.choice(states))
    # a couple of state-changing post rules keep things interesting
    for _ in range(rng.randint(0, 2)):
        a = rng.choice(letters)
        add_rule(rng.choice(states), a, rng.choice(states))

    buffer = {}
    for h in handlers:
        c = rng.choice([0, 0, 1, 1, 2])
        if c:
            buffer[h] = c
    if not buffer:
        buffer[handlers[0]] = 1

    return build_program(states=states, init=states[0], handlers=handlers,
                         internal=internals, cancels=cancels,
                         productions=productions, flow=flow, buffer=buffer)


def gen_net(rng, max_places=5, max_trans=5, max_count=3, max_init=3,
            boolean=False, nonempty_inputs=False, resets=False):
    n_places = rng.randint(1, max_places)
    n_trans = rng.randint(1, max_trans)
    names = [f"p{i}" for i in range(n_places)]
    cap = 1 if boolean else max_count
    transitions = []
    for ti in range(n_trans):
        ins = {}
        outs = {}
        for p in range(n_places):
            if rng.random() < 0.4:
                ins[p] = rng.randint(1, cap)
            if rng.random() < 0.4:
                outs[p] = rng.randint(1, cap)
        if nonempty_inputs and not ins:
            ins[rng.randrange(n_places)] = rng.randint(1, cap)
        zt = frozenset()
        if resets and rng.random() < 0.4:
            zt = frozenset({rng.randrange(n_places)})
        transitions.append(Transition(f"t{ti}", Multiset(ins), Multiset(outs), zt))
    init = {}
    for p in range(n_places):
        if rng.random() < 0.6:
            init[p] = rng.randint(1, 1 if boolean else max_init)
    return PetriNet(names, transitions, Multiset(init))


def gen_boolean_net(rng, **kw):
    kw.setdefault("boolean", True)
    kw.setdefault("nonempty_inputs", True)
    return gen_net(rng, **kw)
