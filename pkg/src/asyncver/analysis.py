"""Decision procedures: safety, boundedness, termination, configuration
reachability, fair termination and fair starvation, with replayable
witnesses wherever a verdict admits one."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

from .compile import CompiledNet, stitch, stitch_cancel
from .multiset import Multiset
from .petri import PetriNet, Transition, backward_cover, karp_miller
from .products import Context, successor_buffer_cancel
from .program import AsyncProgram, Configuration, Simulator


class UndecidableQuery(ValueError):
    """Raised when a query is refused because it has no decision procedure
    for the given program class."""


class ReplayError(ValueError):
    pass


DEFAULT_MAX_STATES = 100_000
DEFAULT_MAX_DEPTH = 10_000
DEFAULT_POST_BUDGET = 16


@dataclass(frozen=True)
class Budgets:
    max_states: int = DEFAULT_MAX_STATES
    max_depth: int = DEFAULT_MAX_DEPTH
    post_budget: int = DEFAULT_POST_BUDGET


@dataclass(frozen=True)
class DispatchStep:
    """One dispatch: which handler ran, the state its body ended in, the
    multiset of surviving posts, and the set of handlers it cancelled."""
    handler: int
    to_state: int
    posted: Multiset
    cancelled: frozenset = frozenset()


@dataclass(frozen=True)
class DispatchWitness:
    steps: tuple

    def fmt(self, program: AsyncProgram) -> str:
        return _fmt_steps(program, self.steps)


@dataclass(frozen=True)
class LassoWitness:
    """Stem then infinitely repeatable period; the period's end configuration
    dominates its start, so it pumps."""
    stem: tuple
    period: tuple

    def fmt(self, program: AsyncProgram) -> str:
        return (f"stem: {_fmt_steps(program, self.stem)}\n"
                f"period: {_fmt_steps(program, self.period)}")


def _fmt_steps(program: AsyncProgram, steps) -> str:
    name = program.symbols.name_of
    if not steps:
        return "(empty)"
    parts = []
    for s in steps:
        bit = f"{name(s.handler)} -> {name(s.to_state)} post {s.posted.fmt(name)}"
        if s.cancelled:
            bit += " cancel {" + ",".join(name(h) for h in sorted(s.cancelled)) + "}"
        parts.append(bit)
    return "; ".join(parts)


@dataclass(frozen=True)
class Verdict:
    query: str
    answer: str                  # YES | NO | UNKNOWN
    label: str
    witness: object = None
    certificate: str | None = None
    budgets_hit: tuple = ()

    def holds(self) -> bool | None:
        """Whether the checked property holds (None when unknown)."""
        good = {"SAFE", "BOUNDED", "TERMINATING", "FAIR-TERMINATING",
                "NO-STARVATION", "UNREACHED"}
        bad = {"UNSAFE", "UNBOUNDED", "NONTERMINATING", "FAIR-NONTERMINATING",
               "STARVES", "REACHED"}
        if self.label in good:
            return True
        if self.label in bad:
            return False
        return None


# -- witness replay ------------------------------------------------------------


def replay_dispatches(program: AsyncProgram, steps, start: Configuration | None = None):
    """Replay dispatch steps through the program semantics, checking each
    posted multiset is derivable for its context.  Returns the visited
    configurations (including start)."""
    config = start if start is not None else program.initial_configuration()
    trace = [config]
    for step_ in steps:
        h = step_.handler
        if config.buffer[h] < 1:
            raise ReplayError("dispatched handler is not pending")
        rest = config.buffer - Multiset.single(h)
        ctx = Context(config.state, h, step_.to_state)
        bound = step_.posted.size
        if program.has_cancel:
            pairs, _ = program.cancel_products().context_pairs(ctx, bound)
            if (step_.cancelled, step_.posted) not in pairs:
                raise ReplayError("posted multiset (with cancel set) is not "
                                  "derivable for this context")
            buf = successor_buffer_cancel(rest, step_.posted, step_.cancelled)
        else:
            if step_.cancelled:
                raise ReplayError("cancel set on a cancel-free program")
            images, _ = program.products().context_parikh_flagged(ctx, bound)
            if step_.posted not in images:
                raise ReplayError("posted multiset is not derivable for this context")
            buf = rest + step_.posted
        config = Configuration(step_.to_state, buf)
        trace.append(config)
    return trace


def replay_witness(program: AsyncProgram, witness) -> bool:
    """True iff the witness replays cleanly; lassos additionally need their
    period to pump (same state, dominating buffer)."""
    try:
        if isinstance(witness, DispatchWitness):
            replay_dispatches(program, witness.steps)
            return True
        if isinstance(witness, LassoWitness):
            trace = replay_dispatches(program, witness.stem)
            head = trace[-1]
            trace2 = replay_dispatches(program, witness.period, start=head)
            tail = trace2[-1]
            return (len(witness.period) >= 1 and tail.state == head.state
                    and head.buffer.leq(tail.buffer))
    except ReplayError:
        return False
    return False


def fair_lasso_check(program: AsyncProgram, lasso: LassoWitness) -> bool:
    """Whether pumping the period forever yields a fair infinite run: the
    period must pump, and every handler is either dispatched in the period
    or has no pending instances throughout it (zero at the loop head,
    nothing posted)."""
    trace = replay_dispatches(program, lasso.stem)
    head = trace[-1]
    period_trace = replay_dispatches(program, lasso.period, start=head)
    tail = period_trace[-1]
    if not lasso.period or tail.state != head.state or not head.buffer.leq(tail.buffer):
        return False
    dispatched = {s.handler for s in lasso.period}
    posted: dict = {}
    for s in lasso.period:
        for h, c in s.posted.items():
            posted[h] = posted.get(h, 0) + c
    for a in program.handlers:
        if a in dispatched:
            continue
        if head.buffer[a] != 0 or posted.get(a, 0) != 0:
            return False
    return True


def starvation_lasso_check(program: AsyncProgram, lasso: LassoWitness, a) -> bool:
    """Fair lasso along which some pending instance of ``a`` is never the
    dispatched one: a stays pending throughout the period and every
    a-dispatch happens with at least two instances pending."""
    if not fair_lasso_check(program, lasso):
        return False
    trace = replay_dispatches(program, lasso.stem)
    head = trace[-1]
    period_trace = replay_dispatches(program, lasso.period, start=head)
    configs = period_trace[:-1]
    for config, step_ in zip(configs, lasso.period):
        if config.buffer[a] < 1:
            return False
        if step_.handler == a and config.buffer[a] < 2:
            return False
    if period_trace[-1].buffer[a] < 1:
        return False
    return any(s.handler == a for s in lasso.period)


# -- configuration graph --------------------------------------------------------


@dataclass
class ConfigGraph:
    configs: list
    index: dict
    edges: list        # per node: list of (handler, dst-node, posted, cancelled)
    exhausted: bool


def build_config_graph(program: AsyncProgram, budgets: Budgets) -> ConfigGraph:
    sim = Simulator(program, budgets.post_budget)
    init = program.initial_configuration()
    configs = [init]
    index = {init: 0}
    edges: list[list] = []
    exhausted = True
    queue = deque([0])
    while queue:
        n = queue.popleft()
        while len(edges) <= n:
            edges.append([])
        succ, truncated = sim.successors(configs[n])
        if truncated:
            exhausted = False
        out = []
        for h, nxt in succ:
            j = index.get(nxt)
            if j is None:
                if len(configs) >= budgets.max_states:
                    exhausted = False
                    continue
                j = len(configs)
                index[nxt] = j
                configs.append(nxt)
                queue.append(j)
            posted, cancelled = _edge_effect(program, configs[n], h, nxt)
            out.append((h, j, posted, cancelled))
        edges[n] = out
    while len(edges) < len(configs):
        edges.append([])
    return ConfigGraph(configs, index, edges, exhausted)


def _edge_effect(program, src: Configuration, handler, dst: Configuration):
    """Posted multiset (and cancel set) explaining the edge src -> dst."""
    rest = src.buffer - Multiset.single(handler)
    if not program.has_cancel:
        return dst.buffer - rest, frozenset()
    ctx = Context(src.state, handler, dst.state)
    bound = max(dst.buffer.size, rest.size)
    pairs, _ = program.cancel_products().context_pairs(ctx, bound)
    for cancelled, posted in sorted(pairs, key=lambda p: (len(p[0]), sorted(p[0]),
                                                          p[1].items())):
        if successor_buffer_cancel(rest, posted, cancelled) == dst.buffer:
            return posted, cancelled
    raise ReplayError("no effect explains the configuration edge")


def _tarjan_sccs(n_nodes: int, succ) -> list[list[int]]:
    index = [0]
    indices = [-1] * n_nodes
    low = [0] * n_nodes
    on_stack = [False] * n_nodes
    stack: list[int] = []
    sccs: list[list[int]] = []
    for root in range(n_nodes):
        if indices[root] != -1:
            continue
        work = [(root, 0)]
        while work:
            v, pi = work[-1]
            if pi == 0:
                indices[v] = low[v] = index[0]
                index[0] += 1
                stack.append(v)
                on_stack[v] = True
            advanced = False
            children = succ(v)
            while pi < len(children):
                w = children[pi]
                pi += 1
                if indices[w] == -1:
                    work[-1] = (v, pi)
                    work.append((w, 0))
                    advanced = True
                    break
                if on_stack[w]:
                    low[v] = min(low[v], indices[w])
            if advanced:
                continue
            work.pop()
            if low[v] == indices[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp.append(w)
                    if w == v:
                        break
                sccs.append(comp)
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[v])
    return sccs


def _bfs_path(edges, src: int, goals: set, allowed: set | None = None):
    """Shortest edge path from src to any goal node; returns list of
    (edge, dst-node) or None."""
    if src in goals:
        return []
    parent: dict[int, tuple] = {src: None}
    queue = deque([src])
    while queue:
        n = queue.popleft()
        for e in edges[n]:
            j = e[1]
            if allowed is not None and j not in allowed:
                continue
            if j in parent:
                continue
            parent[j] = (n, e)
            if j in goals:
                out = []
                cur = j
                while parent[cur] is not None:
                    p, edge = parent[cur]
                    out.append(edge)
                    cur = p
                return list(reversed(out))
            queue.append(j)
    return None


def _steps_from_edges(graph: ConfigGraph, edge_path) -> tuple:
    steps = []
    for h, j, posted, cancelled in edge_path:
        steps.append(DispatchStep(h, graph.configs[j].state, posted, cancelled))
    return tuple(steps)


# -- growth / lasso search ------------------------------------------------------


def _search_lasso(program: AsyncProgram, budgets: Budgets, accept, *,
                  strict=False, max_nodes=20_000, max_depth=32):
    """Path-tree search for a pumpable segment: a node whose configuration
    dominates an ancestor with the same global state and whose segment
    satisfies ``accept(head_config, segment_steps)``.  Paths are explored
    without merging so covering segments are not lost to sharing."""
    sim = Simulator(program, budgets.post_budget)
    init = program.initial_configuration()
    nodes = [(init, -1, None, 0)]     # config, parent, step, depth
    queue = deque([0])
    while queue:
        n = queue.popleft()
        config, _, _, depth = nodes[n]
        if depth >= max_depth or len(nodes) >= max_nodes:
            continue
        succ, _ = sim.successors(config)
        for h, nxt in succ:
            step_ = DispatchStep(h, nxt.state, *_plain_effect(program, config, h, nxt))
            node = len(nodes)
            nodes.append((nxt, n, step_, depth + 1))
            queue.append(node)
            # walk ancestors looking for a covering pair
            a = n
            rev_steps = [step_]
            while a != -1:
                anc_config, parent, anc_step, _ = nodes[a]
                if anc_config.state == nxt.state and anc_config.buffer.leq(nxt.buffer):
                    if not strict or anc_config.buffer != nxt.buffer:
                        segment = tuple(reversed(rev_steps))
                        if accept(anc_config, segment):
                            stem = []
                            b = a
                            while b != -1:
                                _, pb, sb, _ = nodes[b]
                                if sb is not None:
                                    stem.append(sb)
                                b = pb
                            return LassoWitness(tuple(reversed(stem)), segment)
                if anc_step is not None:
                    rev_steps.append(anc_step)
                a = parent
    return None


def _plain_effect(program, src: Configuration, handler, dst: Configuration):
    rest = src.buffer - Multiset.single(handler)
    if not program.has_cancel:
        return dst.buffer - rest, frozenset()
    posted, cancelled = _edge_effect(program, src, handler, dst)
    return posted, cancelled


def with_dispatch_counter(compiled: CompiledNet):
    """Copy of the compiled net with a monitor place fed by every
    dispatch-labeled transition and never consumed: the place is unbounded
    iff some run dispatches forever."""
    net = compiled.net
    names = list(net.place_names)
    p_w = len(names)
    names.append("dispatches")
    transitions = []
    for t in net.transitions:
        if isinstance(t.label, tuple) and t.label[0] == "dispatch":
            transitions.append(Transition(t.name, t.inputs,
                                          t.outputs + Multiset.single(p_w),
                                          t.resets, t.label))
        else:
            transitions.append(t)
    return PetriNet(names, transitions, net.initial), p_w


# -- checks ----------------------------------------------------------------------


def check_safety(p: AsyncProgram, d_f, budgets: Budgets = Budgets()) -> Verdict:
    """Global-state reachability via backward coverability on the compiled
    net (reset variant for cancel programs)."""
    if d_f not in p.states:
        raise ValueError("unknown target state")
    compiled = stitch_cancel(p) if p.has_cancel else stitch(p)
    target = Multiset.single(compiled.state_place[d_f])
    prune = compiled.coverability_prune()
    # the coverability set bounds everything a reachable marking can cover,
    # so backward demands outside it are dead ends.  For reset nets the
    # tree is built on the reset-free relaxation: dropping resets only adds
    # tokens, hence its cover set still over-approximates reachability.
    relaxed = compiled.net
    if p.has_cancel:
        relaxed = PetriNet(
            relaxed.place_names,
            [Transition(t.name, t.inputs, t.outputs, frozenset(), t.label)
             for t in relaxed.transitions],
            relaxed.initial)
    try:
        graph = karp_miller(relaxed)
        structural = prune

        def prune(e, _graph=graph, _structural=structural):
            return _structural(e) and _graph.covers(e)
    except RuntimeError:
        pass
    res = backward_cover(compiled.net, target, prune=prune)
    name = p.symbols.name_of
    if res.coverable:
        steps = _dispatches_from_firing(compiled, res.firing_sequence, res.markings)
        return Verdict("safety", "YES", "UNSAFE", witness=DispatchWitness(steps),
                       certificate=f"state {name(d_f)} reachable")
    basis_txt = "; ".join(m.fmt(lambda i: compiled.net.place_names[i])
                          for m in list(res.basis)[:8])
    more = "" if len(res.basis) <= 8 else f" (+{len(res.basis) - 8} more)"
    return Verdict("safety", "NO", "SAFE",
                   certificate=f"backward fixpoint basis of {len(res.basis)} "
                               f"elements excludes the initial marking: "
                               f"{basis_txt}{more}")


def _dispatches_from_firing(compiled: CompiledNet, seq, markings) -> tuple:
    """Project a net firing sequence onto dispatch steps."""
    entry_cancel = {}
    for info in compiled.widgets.values():
        for ti, cancelled in info.entries:
            entry_cancel[ti] = cancelled
    steps = []
    pre_config = None
    cancelled = frozenset()
    for i, ti in enumerate(seq):
        if ti in compiled.enter_of:
            pre_config = compiled.config_of(markings[i])
            cancelled = frozenset()
            if pre_config is None:
                raise ReplayError("enter fired from an unclean marking")
        elif ti in entry_cancel:
            raw = entry_cancel[ti]
            cancelled = frozenset(
                h for h, place in compiled.handler_place.items() if place in raw)
        elif ti in compiled.exit_of:
            ctx = compiled.exit_of[ti]
            post_config = compiled.config_of(markings[i + 1])
            if post_config is None or pre_config is None:
                raise ReplayError("exit fired from an unclean marking")
            base = pre_config.buffer - Multiset.single(ctx.handler)
            posted = post_config.buffer - base.without(cancelled)
            steps.append(DispatchStep(ctx.handler, post_config.state, posted,
                                      cancelled))
    return tuple(steps)


def check_boundedness(p: AsyncProgram, budgets: Budgets = Budgets()) -> Verdict:
    """Task-buffer boundedness via the coverability tree of the compiled
    net.  Refused for cancel programs: boundedness is undecidable there."""
    if p.has_cancel:
        raise UndecidableQuery(
            "boundedness is undecidable for cancel-enabled programs; "
            "the query is refused")
    compiled = stitch(p)
    graph = karp_miller(compiled.net)
    if graph.bounded():
        return Verdict("boundedness", "YES", "BOUNDED",
                       certificate=f"coverability graph of {len(graph.markings)} "
                                   f"nodes has no unbounded place")
    place = graph.omega_places()[0]
    pump = graph.pumping_path(place)
    cert = (f"place {compiled.net.place_names[place]} pumps: "
            f"stem={pump[0]} period={pump[1]}") if pump else "unbounded place found"
    witness = _search_lasso(p, budgets, lambda head, seg: True, strict=True)
    return Verdict("boundedness", "NO", "UNBOUNDED", witness=witness,
                   certificate=cert)


def check_termination(p: AsyncProgram, budgets: Budgets = Budgets()) -> Verdict:
    """Existence of an infinite run, decided by boundedness of a dispatch
    counter on the compiled net."""
    if p.has_cancel:
        raise UndecidableQuery(
            "termination is undecidable for cancel-enabled programs; "
            "the query is refused")
    compiled = stitch(p)
    net, p_w = with_dispatch_counter(compiled)
    graph = karp_miller(net)
    if p_w not in graph.omega_places():
        return Verdict("termination", "YES", "TERMINATING",
                       certificate="dispatch counter bounded in the "
                                   "coverability graph")
    pump = graph.pumping_path(p_w)
    cert = (f"dispatch counter pumps: stem={pump[0]} period={pump[1]}"
            if pump else "dispatch counter unbounded")
    witness = _search_lasso(p, budgets, lambda head, seg: True)
    return Verdict("termination", "NO", "NONTERMINATING", witness=witness,
                   certificate=cert)


def check_config_reachability(p: AsyncProgram, c: Configuration,
                              budgets: Budgets = Budgets()) -> Verdict:
    """Exact configuration reachability when bounded search exhausts;
    otherwise a semi-decision with an explicit UNKNOWN."""
    sim = Simulator(p, budgets.post_budget)
    init = p.initial_configuration()
    if init == c:
        return Verdict("config-reachability", "YES", "REACHED",
                       witness=DispatchWitness(()))
    parent: dict = {init: None}
    queue = deque([init])
    exhausted = True
    while queue:
        cur = queue.popleft()
        succ, truncated = sim.successors(cur)
        if truncated:
            exhausted = False
        for h, nxt in succ:
            if nxt in parent:
                continue
            if len(parent) >= budgets.max_states:
                exhausted = False
                continue
            parent[nxt] = (cur, h)
            if nxt == c:
                steps = []
                node = nxt
                while parent[node] is not None:
                    prev, handler = parent[node]
                    posted, cancelled = _plain_effect(p, prev, handler, node)
                    steps.append(DispatchStep(handler, node.state, posted, cancelled))
                    node = prev
                return Verdict("config-reachability", "YES", "REACHED",
                               witness=DispatchWitness(tuple(reversed(steps))))
            queue.append(nxt)
    if exhausted:
        return Verdict("config-reachability", "NO", "UNREACHED",
                       certificate=f"exhaustive search of {len(parent)} "
                                   f"configurations")
    return Verdict("config-reachability", "UNKNOWN", "UNKNOWN",
                   budgets_hit=("max_states", "post_budget"))


def _fair_scc_condition(program, graph: ConfigGraph, comp, edge_filter=None):
    """Check the fair-cycle condition on one SCC; returns the (edge targets,
    zero-state targets) cover map or None."""
    comp_set = set(comp)
    internal_edges = []
    for n in comp:
        for e in graph.edges[n]:
            if e[1] in comp_set and (edge_filter is None or edge_filter(n, e)):
                internal_edges.append((n, e))
    if not internal_edges:
        return None
    cover = {}
    for a in program.handlers:
        edge = next(((n, e) for n, e in internal_edges if e[0] == a), None)
        if edge is not None:
            cover[a] = ("edge", edge)
            continue
        zero = next((n for n in comp if graph.configs[n].buffer[a] == 0), None)
        if zero is not None:
            cover[a] = ("node", zero)
            continue
        return None
    return cover


def _lasso_from_scc(program, graph: ConfigGraph, comp, cover, edge_filter=None):
    comp_set = set(comp)

    def allowed_edges(n):
        return [e for e in graph.edges[n]
                if e[1] in comp_set and (edge_filter is None or edge_filter(n, e))]

    anchor = min(comp)
    period_edges = []
    cur = anchor
    targets = [cover[a] for a in sorted(cover)]
    sub_edges = [allowed_edges(n) if n in comp_set else [] for n in range(len(graph.edges))]
    for kind, tgt in targets:
        if kind == "edge":
            src, e = tgt
            path = _bfs_path(sub_edges, cur, {src}, allowed=comp_set)
            period_edges.extend(path)
            period_edges.append(e)
            cur = e[1]
        else:
            path = _bfs_path(sub_edges, cur, {tgt}, allowed=comp_set)
            period_edges.extend(path)
            cur = tgt
    back = _bfs_path(sub_edges, cur, {anchor}, allowed=comp_set)
    period_edges.extend(back)
    cur = anchor
    if not period_edges:
        n, e = next((n, e) for n in comp for e in allowed_edges(n))
        path = _bfs_path(sub_edges, anchor, {n}, allowed=comp_set)
        period_edges.extend(path)
        period_edges.append(e)
        period_edges.extend(_bfs_path(sub_edges, e[1], {anchor}, allowed=comp_set))
    stem_edges = _bfs_path(graph.edges, 0, {anchor})
    return LassoWitness(_steps_from_edges(graph, stem_edges),
                        _steps_from_edges(graph, period_edges))


def _no_fair_run_proof(program: AsyncProgram) -> str | None:
    """Sound, incomplete proof that no fair infinite run exists: runs never
    enter the draining region (post-free states closed under dispatch), and
    outside it some handler is posted by every dispatch yet never
    dispatchable, starving fairness."""
    pg = program.products()
    name = program.symbols.name_of
    nonempty: dict = {}
    for d1 in program.states:
        for a in program.handlers:
            for d2 in program.states:
                ctx = Context(d1, a, d2)
                cfg = pg.pruned(ctx)
                if cfg is not None:
                    nonempty[ctx] = cfg

    def posts_nothing(cfg):
        return not any(len(rhs) == 1 and rhs[0] in cfg.terminals
                       for _, rhs in cfg.productions)

    drain = {d for d in program.states
             if all(posts_nothing(cfg) for ctx, cfg in nonempty.items()
                    if ctx.d_in == d)}
    changed = True
    while changed:
        changed = False
        for ctx in nonempty:
            if ctx.d_in in drain and ctx.d_out not in drain:
                drain.discard(ctx.d_in)
                changed = True
    region = [d for d in program.states if d not in drain]
    region_ctxs = [ctx for ctx in nonempty
                   if ctx.d_in not in drain and ctx.d_out not in drain]
    if not region_ctxs:
        return ("every run drains: all dispatches outside the post-free "
                "region are impossible")
    dispatchable = {ctx.handler for ctx in region_ctxs}
    from .grammar import min_letter_count
    for b in program.handlers:
        if b in dispatchable:
            continue
        if all(min_letter_count(cfg, b)[ctx_start] >= 1
               for ctx, cfg in ((c, nonempty[c]) for c in region_ctxs)
               for ctx_start in [pg.start_triple(ctx)]):
            return (f"outside the draining region {{{', '.join(name(d) for d in region)}}} "
                    f"every dispatch posts {name(b)} but {name(b)} is never "
                    f"dispatchable there, so no infinite run is fair")
    return None


def check_fair_termination(p: AsyncProgram, budgets: Budgets = Budgets()) -> Verdict:
    """Existence of a fair infinite run.

    Bounded programs are decided exactly on the finite configuration graph;
    otherwise a fair-lasso search may prove non-termination and a draining-
    region argument may prove termination, else UNKNOWN.
    """
    if p.has_cancel:
        raise UndecidableQuery(
            "fair termination is undecidable for cancel-enabled programs; "
            "the query is refused")
    bound = check_boundedness(p, budgets)
    if bound.label == "BOUNDED":
        graph = build_config_graph(p, budgets)
        if graph.exhausted:
            for comp in _tarjan_sccs(len(graph.configs),
                                     lambda n: [e[1] for e in graph.edges[n]]):
                cover = _fair_scc_condition(p, graph, comp)
                if cover is not None:
                    lasso = _lasso_from_scc(p, graph, comp, cover)
                    return Verdict("fair-termination", "YES", "FAIR-NONTERMINATING",
                                   witness=lasso,
                                   certificate="fair cycle in the exact "
                                               "configuration graph")
            return Verdict("fair-termination", "NO", "FAIR-TERMINATING",
                           certificate=f"exact configuration graph "
                                       f"({len(graph.configs)} configurations) "
                                       f"has no fair cycle")
    lasso = _search_lasso(p, budgets,
                          lambda head, seg: _segment_is_fair(p, head, seg))
    if lasso is not None:
        return Verdict("fair-termination", "YES", "FAIR-NONTERMINATING",
                       witness=lasso, certificate="pumpable fair lasso")
    proof = _no_fair_run_proof(p)
    if proof is not None:
        return Verdict("fair-termination", "NO", "FAIR-TERMINATING",
                       certificate=proof)
    return Verdict("fair-termination", "UNKNOWN", "UNKNOWN",
                   budgets_hit=("max_states", "max_depth"))


def _segment_is_fair(program, head: Configuration, segment) -> bool:
    dispatched = {s.handler for s in segment}
    posted: dict = {}
    for s in segment:
        for h, c in s.posted.items():
            posted[h] = posted.get(h, 0) + c
    for a in program.handlers:
        if a in dispatched:
            continue
        if head.buffer[a] != 0 or posted.get(a, 0) != 0:
            return False
    return True


def check_fair_starvation(p: AsyncProgram, a, budgets: Budgets = Budgets()) -> Verdict:
    """Existence of a fair infinite run starving one pending instance of
    ``a``: decided exactly on bounded programs via a constrained fair-cycle
    search, semi-decided by lassos otherwise."""
    if p.has_cancel:
        raise UndecidableQuery(
            "fair starvation is undecidable for cancel-enabled programs; "
            "the query is refused")
    if a not in p.handlers:
        raise ValueError("unknown handler")
    bound = check_boundedness(p, budgets)
    if bound.label == "BOUNDED":
        graph = build_config_graph(p, budgets)
        if graph.exhausted:
            kept = {n for n, cfg in enumerate(graph.configs) if cfg.buffer[a] >= 1}

            def edge_ok(n, e):
                if n not in kept or e[1] not in kept:
                    return False
                if e[0] == a and graph.configs[n].buffer[a] < 2:
                    return False
                return True

            def succ(n):
                if n not in kept:
                    return []
                return [e[1] for e in graph.edges[n] if edge_ok(n, e)]

            for comp in _tarjan_sccs(len(graph.configs), succ):
                if not set(comp) <= kept:
                    continue
                cover = _fair_scc_condition(p, graph, comp, edge_filter=edge_ok)
                if cover is not None:
                    lasso = _lasso_from_scc(p, graph, comp, cover, edge_filter=edge_ok)
                    return Verdict("fair-starvation", "YES", "STARVES",
                                   witness=lasso,
                                   certificate="starving fair cycle in the "
                                               "exact configuration graph")
            return Verdict("fair-starvation", "NO", "NO-STARVATION",
                           certificate=f"exact configuration graph "
                                       f"({len(graph.configs)} configurations) "
                                       f"has no starving fair cycle")
    lasso = _search_lasso(
        p, budgets,
        lambda head, seg: (_segment_is_fair(p, head, seg)
                           and _segment_starves(p, head, seg, a)))
    if lasso is not None:
        return Verdict("fair-starvation", "YES", "STARVES", witness=lasso,
                       certificate="pumpable starving fair lasso")
    ft = check_fair_termination(p, budgets)
    if ft.label == "FAIR-TERMINATING":
        return Verdict("fair-starvation", "NO", "NO-STARVATION",
                       certificate="no fair infinite run exists: " +
                                   (ft.certificate or ""))
    return Verdict("fair-starvation", "UNKNOWN", "UNKNOWN",
                   budgets_hit=("max_states", "max_depth"))


def _segment_starves(program, head: Configuration, segment, a) -> bool:
    config = head
    for step_ in segment:
        if config.buffer[a] < 1:
            return False
        if step_.handler == a and config.buffer[a] < 2:
            return False
        rest = config.buffer - Multiset.single(step_.handler)
        if step_.cancelled:
            buf = successor_buffer_cancel(rest, step_.posted, step_.cancelled)
        else:
            buf = rest + step_.posted
        config = Configuration(step_.to_state, buf)
    if config.buffer[a] < 1:
        return False
    return any(s.handler == a for s in segment)
