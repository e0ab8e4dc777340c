"""Compilation of asynchronous programs to Petri nets: per-context widgets
with a derivation budget, the stitched program net, the starvation variant,
and the reset-net variant for cancellation."""

from __future__ import annotations

from dataclasses import dataclass, field

from .grammar import Cfg, normalize_cfg
from .multiset import Multiset
from .petri import PetriNet, Transition, net_to_dot
from .products import Context, ProductGrammar
from .program import HANDLER, INTERNAL, STATE, VARIABLE, AsyncProgram, SymbolTable


class _NetBuilder:
    def __init__(self):
        self.names: list[str] = []
        self.index: dict[str, int] = {}
        self.transitions: list[Transition] = []

    def place(self, name: str) -> int:
        if name in self.index:
            raise ValueError(f"duplicate place {name!r}")
        self.index[name] = len(self.names)
        self.names.append(name)
        return self.index[name]

    def add(self, name, ins: dict, outs: dict, resets=(), label=None) -> int:
        t = Transition(name, Multiset(ins), Multiset(outs), frozenset(resets), label)
        self.transitions.append(t)
        return len(self.transitions) - 1

    def build(self, initial: dict) -> PetriNet:
        return PetriNet(self.names, self.transitions, Multiset(initial))


def index_net(g: Cfg, start, k: int) -> PetriNet:
    """Net whose enabled firing sequences are exactly the derivations of the
    grammar using at most k variables in any sentential form.

    Places are variables, terminals and a budget place; a pair production
    spends one budget token, a terminal production refunds one.  A marking
    m plus k budget tokens is reachable iff m is the Parikh image of a word
    derivable within index k.
    """
    if k <= 0:
        raise ValueError("index budget must be positive")
    if not g.is_normal():
        raise ValueError("index net requires a normalized grammar")
    if start not in set(g.variables):
        raise ValueError(f"unknown start variable {start!r}")
    b = _NetBuilder()
    var_place = {v: b.place(f"var:{v}") for v in g.variables}
    term_place = {t: b.place(f"sym:{t}") for t in sorted(g.terminals, key=repr)}
    budget = b.place("budget")
    for i, (lhs, rhs) in enumerate(g.productions):
        name = f"p{i}:{lhs}"
        if len(rhs) == 2:
            outs: dict = {}
            for s in rhs:
                outs[var_place[s]] = outs.get(var_place[s], 0) + 1
            b.add(name, {var_place[lhs]: 1, budget: 1}, outs)
        elif len(rhs) == 1:
            b.add(name, {var_place[lhs]: 1}, {term_place[rhs[0]]: 1, budget: 1})
        else:
            b.add(name, {var_place[lhs]: 1}, {budget: 1})
    initial = {var_place[start]: 1}
    if k > 1:
        initial[budget] = k - 1
    return b.build(initial)


@dataclass
class WidgetInfo:
    context: Context
    begin: int
    end: int
    budget: int
    k: int
    var_place: dict
    entries: tuple              # ((transition index, cancelled frozenset), ...)
    productions: tuple          # transition indices
    done: int                   # transition index


@dataclass
class Widget:
    """Standalone per-context net fragment, runnable from a single token on
    its begin place; terminal places double as the post-buffer places."""
    net: PetriNet
    info: WidgetInfo
    post_place: dict


def _emit_widget(b: _NetBuilder, tag: str, post_place: dict, variables, productions,
                 entry_specs, k: int, context: Context) -> WidgetInfo:
    """Shared widget emitter.

    ``entry_specs`` is a list of (suffix, start_symbol, reset_place_indices)
    tuples: one entry transition per spec, each launching the derivation
    from its start symbol with k budget tokens (resets fire at entry).
    ``productions`` is the (lhs, rhs) list over ``variables``; terminal
    letters map through ``post_place``.
    """
    begin = b.place(f"begin@{tag}")
    end = b.place(f"end@{tag}")
    budget = b.place(f"budget@{tag}")
    var_place = {}
    for j, v in enumerate(variables):
        var_place[v] = b.place(f"x{j}@{tag}")
    entries = []
    for suffix, start_symbol, resets in entry_specs:
        ti = b.add(f"init{suffix}@{tag}",
                   {begin: 1},
                   {var_place[start_symbol]: 1, budget: k},
                   resets=resets, label="widget")
        cancelled = frozenset(resets)
        entries.append((ti, cancelled))
    prod_ts = []
    for i, (lhs, rhs) in enumerate(productions):
        name = f"p{i}@{tag}"
        if len(rhs) == 2:
            outs: dict = {}
            for s in rhs:
                outs[var_place[s]] = outs.get(var_place[s], 0) + 1
            prod_ts.append(b.add(name, {var_place[lhs]: 1, budget: 1}, outs,
                                 label="widget"))
        elif len(rhs) == 1:
            prod_ts.append(b.add(name, {var_place[lhs]: 1},
                                 {post_place[rhs[0]]: 1, budget: 1}, label="widget"))
        else:
            prod_ts.append(b.add(name, {var_place[lhs]: 1}, {budget: 1},
                                 label="widget"))
    done = b.add(f"done@{tag}", {budget: k + 1}, {end: 1}, label="widget")
    return WidgetInfo(context, begin, end, budget, k, var_place,
                      tuple(entries), tuple(prod_ts), done)


def widget(pg: ProductGrammar, c: Context, name_of=str) -> Widget | None:
    """Standalone widget for one context; None when its language is empty.

    Started from one token on begin, the runs that reach one token on end
    deposit exactly the Parikh images of the context's language on the
    terminal places.
    """
    pruned = pg.pruned(c)
    if pruned is None:
        return None
    b = _NetBuilder()
    post_place = {a: b.place(f"post:{name_of(a)}")
                  for a in sorted(pg.visible)}
    tag = f"{name_of(c.d_in)}.{name_of(c.handler)}.{name_of(c.d_out)}"
    k = len(pruned.variables)
    info = _emit_widget(b, tag, post_place, pruned.variables, pruned.productions,
                        [("", pg.start_triple(c), frozenset())], k, c)
    net = b.build({info.begin: 1})
    return Widget(net, info, post_place)


@dataclass
class CompiledNet:
    """Program net: one place per global state and per handler, one widget
    per context with non-empty language, enter/exit transitions around each
    widget.  Exit transitions carry the dispatch label for their handler."""

    program: AsyncProgram
    net: PetriNet
    state_place: dict
    handler_place: dict
    widgets: dict                  # Context -> WidgetInfo
    enter_of: dict                 # transition index -> Context
    exit_of: dict                  # transition index -> Context
    fairness: tuple | None = None  # (p_f, p_infinity, switch transition index)
    starved_handler: object = None
    wrapped: bool = False

    def marking_of(self, config) -> Multiset:
        d = {self.state_place[config.state]: 1}
        for h, c in config.buffer.items():
            d[self.handler_place[h]] = c
        return Multiset(d)

    def config_of(self, marking: Multiset):
        """Configuration for a clean marking (one state token, no widget or
        mode tokens); None when the marking is mid-dispatch."""
        from .program import Configuration
        state_places = {p: s for s, p in self.state_place.items()}
        handler_places = {p: h for h, p in self.handler_place.items()}
        skip = set()
        if self.fairness:
            skip = {self.fairness[0], self.fairness[1]}
        state = None
        buffer = {}
        for p, c in marking.items():
            if p in skip:
                continue
            if p in state_places:
                if c != 1 or state is not None:
                    return None
                state = state_places[p]
            elif p in handler_places:
                buffer[handler_places[p]] = c
            else:
                return None
        if state is None:
            return None
        return Configuration(state, Multiset(buffer))

    def coverability_prune(self):
        """Predicate rejecting demands no reachable marking can cover.

        Reachable markings carry exactly one token across state places,
        widget begin/end places and a running-widget indicator, and a
        running widget holds exactly k+1 tokens on its variable and budget
        places; demands exceeding that are dead ends for backward search.
        """
        state_places = frozenset(self.state_place.values())
        begin_end = set()
        interior_of = {}
        cap = {}
        for ctx, info in self.widgets.items():
            begin_end.update((info.begin, info.end))
            for place in list(info.var_place.values()) + [info.budget]:
                interior_of[place] = ctx
            cap[ctx] = info.k + 1
        mode_places = set(self.fairness[:2]) if self.fairness else set()

        def admissible(demand) -> bool:
            control = 0
            interior: dict = {}
            for p, c in demand.items():
                if p in state_places or p in begin_end:
                    control += c
                elif p in interior_of:
                    ctx = interior_of[p]
                    interior[ctx] = interior.get(ctx, 0) + c
                elif p in mode_places and c > 1:
                    return False
            for ctx, total in interior.items():
                if total > cap[ctx]:
                    return False
            return control + len(interior) <= 1

        return admissible

    def widget_clusters(self) -> dict:
        out = {}
        for ctx, info in self.widgets.items():
            name = self.program.symbols.name_of
            tag = f"{name(ctx.d_in)}.{name(ctx.handler)}.{name(ctx.d_out)}"
            places = [info.begin, info.end, info.budget] + sorted(info.var_place.values())
            trans = [t for t, _ in info.entries] + list(info.productions) + [info.done]
            out[tag] = (places, trans)
        return out

    def to_dot(self) -> str:
        return net_to_dot(self.net, self.widget_clusters())


def _context_order(program: AsyncProgram):
    return [Context(d1, a, d2)
            for d1 in program.states
            for a in program.handlers
            for d2 in program.states]


def _stitch_core(program: AsyncProgram, *, starvation_of=None) -> CompiledNet:
    sym = program.symbols.name_of
    b = _NetBuilder()
    state_place = {d: b.place(sym(d)) for d in program.states}
    handler_place = {h: b.place(sym(h)) for h in program.handlers}
    fairness = None
    if starvation_of is not None:
        p_f = b.place("mode:finite")
        p_inf = b.place("mode:forever")
        t_switch = b.add("guess-forever", {p_f: 1}, {p_inf: 1}, label="structural")
        fairness = (p_f, p_inf, t_switch)

    if program.has_cancel:
        cpg = program.cancel_products()
        pg = cpg.state_product
    else:
        cpg = None
        pg = program.products()

    widgets = {}
    enter_of = {}
    exit_of = {}
    for ctx in _context_order(program):
        if pg.language_empty(ctx):
            continue
        tag = f"{sym(ctx.d_in)}.{sym(ctx.handler)}.{sym(ctx.d_out)}"
        if cpg is not None:
            product = cpg.product_for(ctx)
            realized = product.realized_sets()
            variables = []
            seen = set()
            productions = []
            prod_seen = set()
            entry_specs = []
            for s in sorted(realized, key=lambda fs: tuple(sorted(fs))):
                cfg = product.pruned_for(s)
                for v in cfg.variables:
                    if v not in seen:
                        seen.add(v)
                        variables.append(v)
                for prod in cfg.productions:
                    if prod not in prod_seen:
                        prod_seen.add(prod)
                        productions.append(prod)
                suffix = "#" + ("-".join(sym(h) for h in sorted(s)) or "none")
                resets = frozenset(handler_place[h] for h in s)
                entry_specs.append((suffix, product.start_symbol(s), resets))
            k = len(variables)
            info = _emit_widget(b, tag, handler_place, variables, productions,
                                entry_specs, k, ctx)
        else:
            pruned = pg.pruned(ctx)
            k = len(pruned.variables)
            info = _emit_widget(b, tag, handler_place, pruned.variables,
                                pruned.productions,
                                [("", pg.start_triple(ctx), frozenset())], k, ctx)
        widgets[ctx] = info

        d1p = state_place[ctx.d_in]
        d2p = state_place[ctx.d_out]
        hp = handler_place[ctx.handler]
        if starvation_of is not None and ctx.handler == starvation_of:
            p_f, p_inf, _ = fairness
            t1 = b.add(f"enter-finite@{tag}", {d1p: 1, hp: 1, p_f: 1},
                       {info.begin: 1, p_f: 1}, label="structural")
            t2 = b.add(f"enter-forever@{tag}", {d1p: 1, hp: 2, p_inf: 1},
                       {info.begin: 1, hp: 1, p_inf: 1}, label="structural")
            enter_of[t1] = ctx
            enter_of[t2] = ctx
        else:
            t = b.add(f"enter@{tag}", {d1p: 1, hp: 1}, {info.begin: 1})
            enter_of[t] = ctx
        t_exit = b.add(f"exit@{tag}", {info.end: 1}, {d2p: 1},
                       label=("dispatch", sym(ctx.handler)))
        exit_of[t_exit] = ctx

    initial = {state_place[program.init_state]: 1}
    for h, c in program.init_buffer.items():
        initial[handler_place[h]] = c
    if fairness is not None:
        initial[fairness[0]] = 1
    net = b.build(initial)
    return CompiledNet(program, net, state_place, handler_place, widgets,
                       enter_of, exit_of, fairness=fairness,
                       starved_handler=starvation_of)


def stitch(p: AsyncProgram) -> CompiledNet:
    """Plain program net: program boundedness and configuration reachability
    coincide with the net's, state coverability decides global-state
    reachability."""
    if p.has_cancel:
        raise ValueError("cancel-enabled programs compile via stitch_cancel")
    return _stitch_core(p)


def stitch_cancel(p: AsyncProgram) -> CompiledNet:
    """Reset-net variant: each widget entry commits to the set of handlers
    the body run cancels and resets their buffer places on entry."""
    if not p.has_cancel:
        raise ValueError("program has no cancel alphabet")
    return _stitch_core(p)


def _needs_root_wrap(program: AsyncProgram) -> bool:
    if program.init_buffer.size != 1:
        return True
    h = program.init_buffer.keys()[0]
    return any(h in rhs for _, rhs in program.grammar.productions)


def wrap_singleton_root(program: AsyncProgram) -> AsyncProgram:
    """Equivalent program whose initial buffer is one instance of a fresh
    root handler that is never reposted; the root posts the original buffer
    and hops to the original initial state."""
    table = SymbolTable()
    for sid in range(len(program.symbols)):
        table.add(program.symbols.name_of(sid), program.symbols.kind_of(sid))
    d_boot = table.fresh("boot", STATE)
    root = table.fresh("root", HANDLER)
    hop = table.fresh("boot_hop", INTERNAL)
    x_root = table.fresh("Xroot", VARIABLE)

    word = []
    for h, c in program.init_buffer.items():
        word.extend([h] * c)
    word.append(hop)
    raw_prods = list(program.grammar.productions) + [(x_root, tuple(word))]
    terminals = (set(program.grammar.terminals) | {hop})
    raw = Cfg(list(program.grammar.variables) + [x_root], terminals, raw_prods)
    grammar = normalize_cfg(raw, fresh=lambda hint: table.fresh("_" + hint, VARIABLE))

    rules = list(program.transfer.rules)
    for h in program.init_buffer.keys():
        rules.append((d_boot, h, d_boot))
    rules.append((d_boot, hop, program.init_state))
    transfer_states = tuple(program.states) + (d_boot,)
    from .grammar import RegularGrammar
    transfer = RegularGrammar(transfer_states, terminals, rules)

    return AsyncProgram(
        symbols=table,
        states=transfer_states,
        handlers=tuple(program.handlers) + (root,),
        internals=tuple(program.internals) + (hop,),
        cancels={},
        grammar=grammar,
        transfer=transfer,
        start_var={**program.start_var, root: x_root},
        init_state=d_boot,
        init_buffer=Multiset.single(root),
    )


def stitch_starvation(p: AsyncProgram, a) -> CompiledNet:
    """Starvation net for handler ``a``: a one-way mode switch splits runs
    into a finite prefix and a forever phase in which every dispatch of
    ``a`` needs two pending instances and returns one, so one instance can
    never be the one dispatched."""
    if p.has_cancel:
        raise ValueError("starvation analysis does not support cancel programs")
    if a not in p.handlers:
        raise ValueError("unknown handler")
    wrapped = False
    if _needs_root_wrap(p):
        p = wrap_singleton_root(p)
        wrapped = True
    compiled = _stitch_core(p, starvation_of=a)
    compiled.wrapped = wrapped
    return compiled
