"""Petri nets with optional reset arcs: firing, the Karp-Miller coverability
graph, backward coverability for well-structured nets, and the Boolean
normalization used by the reverse encodings."""

from __future__ import annotations

import math
import re
from collections import deque
from dataclasses import dataclass, field

from .multiset import Multiset

OMEGA = math.inf


class NotEnabled(ValueError):
    pass


class ResetArcsPresent(ValueError):
    pass


@dataclass(frozen=True)
class Transition:
    name: str
    inputs: Multiset                    # over place indices
    outputs: Multiset
    resets: frozenset = frozenset()
    label: object = None                # None | ("dispatch", h) | "widget" | "structural"


class PetriNet:
    """Immutable net over integer place indices with printable place names."""

    def __init__(self, place_names, transitions, initial: Multiset):
        self.place_names = tuple(place_names)
        if len(set(self.place_names)) != len(self.place_names):
            raise ValueError("place names must be unique")
        self._index = {n: i for i, n in enumerate(self.place_names)}
        n = len(self.place_names)
        for t in transitions:
            for m in (t.inputs, t.outputs):
                for p in m.keys():
                    if not (0 <= p < n):
                        raise ValueError(f"transition {t.name}: place index {p} out of range")
            for p in t.resets:
                if not (0 <= p < n):
                    raise ValueError(f"transition {t.name}: reset place {p} out of range")
        names = [t.name for t in transitions]
        if len(set(names)) != len(names):
            raise ValueError("transition names must be unique")
        self.transitions = tuple(transitions)
        self._tindex = {t.name: i for i, t in enumerate(self.transitions)}
        for p in initial.keys():
            if not (0 <= p < n):
                raise ValueError("initial marking uses an unknown place")
        self.initial = initial

    @property
    def place_count(self) -> int:
        return len(self.place_names)

    def place(self, name: str) -> int:
        return self._index[name]

    def transition(self, name: str) -> int:
        return self._tindex[name]

    @property
    def has_resets(self) -> bool:
        return any(t.resets for t in self.transitions)

    def is_boolean(self) -> bool:
        if any(c > 1 for _, c in self.initial.items()):
            return False
        for t in self.transitions:
            if any(c > 1 for _, c in t.inputs.items()):
                return False
            if any(c > 1 for _, c in t.outputs.items()):
                return False
        return True

    def enabled(self, marking: Multiset, t: int) -> bool:
        return self.transitions[t].inputs.leq(marking)

    def dispatch_transitions(self, handler=None) -> tuple[int, ...]:
        out = []
        for i, t in enumerate(self.transitions):
            if isinstance(t.label, tuple) and t.label[0] == "dispatch":
                if handler is None or t.label[1] == handler:
                    out.append(i)
        return tuple(out)

    def size(self) -> int:
        """Places plus total multiset entries across transitions (the
        measure used for the polynomial-size checks)."""
        total = len(self.place_names)
        for t in self.transitions:
            total += len(t.inputs.items()) + len(t.outputs.items()) + len(t.resets)
        return total

    def __repr__(self):
        return f"PetriNet(places={len(self.place_names)}, transitions={len(self.transitions)})"


def fire(net: PetriNet, marking: Multiset, t) -> Multiset:
    """Fire one transition: subtract inputs, zero reset places, add outputs."""
    if isinstance(t, str):
        t = net.transition(t)
    tr = net.transitions[t]
    if not tr.inputs.leq(marking):
        raise NotEnabled(f"{tr.name} not enabled")
    mid = marking - tr.inputs
    if tr.resets:
        mid = mid.without(tr.resets)
    return mid + tr.outputs


def fire_sequence(net: PetriNet, marking: Multiset, seq) -> Multiset:
    for t in seq:
        marking = fire(net, marking, t)
    return marking


# -- Karp-Miller ------------------------------------------------------------


class OmegaMarking:
    """Dense marking with coordinates in N plus an unbounded top element."""

    __slots__ = ("values",)

    def __init__(self, values):
        self.values = tuple(values)

    @staticmethod
    def from_multiset(m: Multiset, nplaces: int) -> "OmegaMarking":
        vals = [0] * nplaces
        for p, c in m.items():
            vals[p] = c
        return OmegaMarking(vals)

    def covers(self, m: Multiset) -> bool:
        return all(self.values[p] >= c for p, c in m.items())

    def le(self, other: "OmegaMarking") -> bool:
        return all(a <= b for a, b in zip(self.values, other.values))

    def has_omega(self) -> bool:
        return OMEGA in self.values

    def omega_places(self) -> tuple[int, ...]:
        return tuple(i for i, v in enumerate(self.values) if v is OMEGA or v == OMEGA)

    def __eq__(self, other):
        return isinstance(other, OmegaMarking) and self.values == other.values

    def __hash__(self):
        return hash(self.values)

    def fmt(self, names) -> str:
        parts = [f"{names[i]}:{'w' if v == OMEGA else v}"
                 for i, v in enumerate(self.values) if v]
        return "{" + ", ".join(parts) + "}"


@dataclass
class CoverabilityGraph:
    net: PetriNet
    markings: list                 # OmegaMarking per merged node
    edges: list                    # (src node, transition index, dst node)
    tree_parent: list              # per tree node
    tree_via: list                 # transition index per tree node
    tree_marking: list             # OmegaMarking per tree node
    tree_pump_src: list            # accelerating ancestor per tree node (or None)
    node_of_tree: list             # tree node -> merged node

    def bounded(self) -> bool:
        return not any(m.has_omega() for m in self.markings)

    def covers(self, m: Multiset) -> bool:
        return any(node.covers(m) for node in self.markings)

    def omega_places(self) -> tuple[int, ...]:
        out = set()
        for m in self.markings:
            out.update(m.omega_places())
        return tuple(sorted(out))

    def pumping_path(self, place: int):
        """Transition names (stem, period) witnessing unbounded growth of a
        place: replaying stem then repeating period pumps it."""
        for node in range(len(self.tree_marking)):
            src = self.tree_pump_src[node]
            if src is None:
                continue
            if self.tree_marking[node].values[place] != OMEGA:
                continue
            if self.tree_marking[src].values[place] == OMEGA:
                continue

            def path_to(n):
                rev = []
                while n != 0:
                    rev.append(self.tree_via[n])
                    n = self.tree_parent[n]
                return list(reversed(rev))

            full = path_to(node)
            stem = path_to(src)
            period = full[len(stem):]
            names = [self.net.transitions[t].name for t in stem]
            pnames = [self.net.transitions[t].name for t in period]
            return names, pnames
        return None

    def to_dot(self) -> str:
        lines = ["digraph coverability {", "  rankdir=LR;"]
        for i, m in enumerate(self.markings):
            label = m.fmt(self.net.place_names).replace('"', "'")
            lines.append(f'  n{i} [shape=box, label="{label}"];')
        for src, t, dst in self.edges:
            lines.append(f'  n{src} -> n{dst} [label="{self.net.transitions[t].name}"];')
        lines.append("}")
        return "\n".join(lines) + "\n"


def karp_miller(net: PetriNet, max_nodes: int = 500_000) -> CoverabilityGraph:
    """Classical coverability tree with ancestor acceleration, merged into a
    graph by equal generalized marking.

    A marking is coverable iff some node dominates it; the net is bounded
    iff no node carries the unbounded top value.  Reset arcs are rejected:
    the construction is unsound for their boundedness.
    """
    if net.has_resets:
        raise ResetArcsPresent("coverability tree requires a plain net")
    nplaces = net.place_count
    trans = [(t.inputs.items(), t.outputs.items()) for t in net.transitions]

    root = OmegaMarking.from_multiset(net.initial, nplaces)
    tree_marking = [root]
    tree_parent = [-1]
    tree_via = [-1]
    tree_pump_src: list = [None]
    work = [0]                  # depth-first: accelerations collapse the
    kept: list[tuple] = []      # space before breadth enumerates it

    while work:
        n = work.pop()
        m = tree_marking[n]
        # dominance cut: a node below an already-kept node is a leaf.  Kept
        # nodes are never discarded, and effects are additive, so the
        # dominating subtree re-derives every covering and every pump the
        # cut subtree could have produced.
        vals = m.values
        if any(all(a <= b for a, b in zip(vals, kv)) for kv in kept):
            continue
        kept.append(vals)
        for ti, (ins, outs) in enumerate(trans):
            if any(vals[p] < c for p, c in ins):
                continue
            new = list(vals)
            for p, c in ins:
                if new[p] != OMEGA:
                    new[p] -= c
            for p, c in outs:
                if new[p] != OMEGA:
                    new[p] += c
            # accelerate against ancestors (and the source node itself)
            pump_src = None
            changed = True
            while changed:
                changed = False
                a = n
                while a != -1:
                    anc = tree_marking[a].values
                    if anc != tuple(new) and all(x <= y for x, y in zip(anc, new)):
                        grew = [i for i in range(nplaces)
                                if anc[i] < new[i] and new[i] != OMEGA]
                        if grew:
                            for i in grew:
                                new[i] = OMEGA
                            changed = True
                            if pump_src is None:
                                pump_src = a
                    a = tree_parent[a]
            node = len(tree_marking)
            if node > max_nodes:
                raise RuntimeError("coverability tree exceeded the node budget")
            tree_marking.append(OmegaMarking(new))
            tree_parent.append(n)
            tree_via.append(ti)
            tree_pump_src.append(pump_src)
            work.append(node)

    # merge tree nodes by marking for the graph view
    markings: list[OmegaMarking] = []
    index: dict[OmegaMarking, int] = {}
    node_of_tree = []
    for m in tree_marking:
        i = index.get(m)
        if i is None:
            i = len(markings)
            index[m] = i
            markings.append(m)
        node_of_tree.append(i)
    edges = []
    edge_seen = set()
    for n in range(1, len(tree_marking)):
        e = (node_of_tree[tree_parent[n]], tree_via[n], node_of_tree[n])
        if e not in edge_seen:
            edge_seen.add(e)
            edges.append(e)
    return CoverabilityGraph(net, markings, edges, tree_parent, tree_via,
                             tree_marking, tree_pump_src, node_of_tree)


# -- Upward-closed sets and backward coverability ---------------------------


class UpwardBasis:
    """Finite antichain of multisets denoting the union of their upward
    closures."""

    __slots__ = ("elements",)

    def __init__(self, elements=()):
        self.elements = self._minimize(elements)

    @staticmethod
    def _minimize(elements):
        kept: list[Multiset] = []
        for m in sorted(set(elements), key=lambda x: (x.size, x.items())):
            if not any(e.leq(m) for e in kept):
                kept.append(m)
        return tuple(sorted(kept, key=lambda x: x.items()))

    def contains(self, m: Multiset) -> bool:
        return any(e.leq(m) for e in self.elements)

    def union(self, other: "UpwardBasis") -> "UpwardBasis":
        return UpwardBasis(self.elements + other.elements)

    def __iter__(self):
        return iter(self.elements)

    def __len__(self):
        return len(self.elements)

    def __eq__(self, other):
        return isinstance(other, UpwardBasis) and self.elements == other.elements

    def __repr__(self):
        return f"UpwardBasis({list(self.elements)!r})"


@dataclass
class CoverResult:
    coverable: bool
    basis: UpwardBasis                       # fixpoint basis (the NO certificate)
    firing_sequence: tuple | None = None     # transition indices (the YES witness)
    markings: tuple | None = None            # markings along the witness


def _pre_image(t: Transition, b: Multiset) -> Multiset | None:
    """Least marking whose t-firing covers b, or None if t cannot help.

    Reset places are emptied then refilled by the outputs, so the target's
    demand there must already be met by the outputs alone.
    """
    if t.resets:
        for p in t.resets:
            if b[p] > t.outputs[p]:
                return None
        outside = b.without(t.resets)
        need = outside.monus(t.outputs.without(t.resets))
    else:
        need = b.monus(t.outputs)
    return need + t.inputs


def backward_cover(net: PetriNet, target, prune=None) -> CoverResult:
    """Backward coverability for plain and reset nets.

    Saturates the upward-closed target under predecessor bases; the initial
    marking is covered by the fixpoint iff the target is coverable.  On YES
    a concrete firing sequence is replayed from the stored generation
    chain; on NO the fixpoint basis is the certificate.

    ``prune`` may reject basis elements that no marking of a known forward
    invariant covers; real runs stay inside the invariant, so pruning keeps
    the NO answer complete while cutting the basis drastically.
    """
    if isinstance(target, Multiset):
        target = UpwardBasis([target])
    gen: dict[Multiset, tuple] = {}    # element -> (transition index, parent) or ()
    for b in target:
        gen[b] = ()
    frontier = list(target.elements)
    basis = UpwardBasis(target.elements)

    def reconstruct(elem: Multiset) -> tuple:
        seq = []
        cur = elem
        while gen[cur]:
            ti, parent = gen[cur]
            seq.append(ti)
            cur = parent
        return tuple(seq)

    def found(elem: Multiset) -> CoverResult:
        m = net.initial
        markings = [m]
        seq = []
        for ti in reconstruct(elem):
            if target.contains(m):
                break
            m = fire(net, m, ti)
            markings.append(m)
            seq.append(ti)
        if not target.contains(markings[-1]):
            raise RuntimeError("backward chain replay failed to cover the target")
        return CoverResult(True, basis, tuple(seq), tuple(markings))

    for b in basis:
        if b.leq(net.initial):
            return found(b)
    while True:
        new_frontier = []
        for b in frontier:
            for ti, t in enumerate(net.transitions):
                pre = _pre_image(t, b)
                if pre is None or basis.contains(pre):
                    continue
                if prune is not None and not prune(pre):
                    continue
                if pre not in gen:
                    gen[pre] = (ti, b)
                if pre.leq(net.initial):
                    return found(pre)
                new_frontier.append(pre)
        if not new_frontier:
            return CoverResult(False, basis, None, None)
        merged = UpwardBasis(basis.elements + tuple(new_frontier))
        frontier = [e for e in merged.elements if e not in set(basis.elements)]
        basis = merged
        if not frontier:
            return CoverResult(False, basis, None, None)


# -- Boolean normalization ---------------------------------------------------


def to_boolean(net: PetriNet, mode: str, target: Multiset | None = None):
    """Normalize counts to 0/1 preserving the chosen question.

    mode="bound": boundedness is preserved.  mode="cover"/"reach": returns
    (net', target') with the target coverable/reachable iff the original
    one is.  Initial markings become a single token behind an init
    transition; multi-token arcs run through binary count-down widgets
    serialized by a global mutex so each simulated firing is atomic.
    """
    if net.has_resets:
        raise ResetArcsPresent("boolean normalization handles plain nets only")
    if mode not in ("bound", "cover", "reach"):
        raise ValueError(f"unknown mode {mode!r}")
    if mode in ("cover", "reach") and target is None:
        raise ValueError(f"mode {mode!r} requires a target marking")

    names = list(net.place_names)
    place_of = {n: i for i, n in enumerate(names)}

    def add_place(name):
        while name in place_of:
            name += "'"
        place_of[name] = len(names)
        names.append(name)
        return place_of[name]

    p_init = add_place("boot")
    raw_transitions = [(t.name, t.inputs, t.outputs, t.label) for t in net.transitions]
    new_target = None
    p_run_needed = False

    if mode == "bound":
        raw_transitions.insert(0, ("boot!", Multiset.single(p_init), net.initial, None))
        initial = Multiset.single(p_init)
    elif mode == "cover":
        p_goal = add_place("goal")
        raw_transitions.insert(0, ("boot!", Multiset.single(p_init), net.initial, None))
        raw_transitions.append(("goal!", target, Multiset.single(p_goal), None))
        initial = Multiset.single(p_init)
        new_target = Multiset.single(p_goal)
    else:  # reach: thread a run token through original transitions, then drain
        p_tok = add_place("runtok")
        threaded = []
        for name, ins, outs, label in raw_transitions:
            threaded.append((name, ins + Multiset.single(p_tok),
                             outs + Multiset.single(p_tok), label))
        raw_transitions = threaded
        raw_transitions.insert(0, ("boot!", Multiset.single(p_init), net.initial, None))
        raw_transitions.append(("drain!", target + Multiset.single(p_tok),
                                Multiset(), None))
        initial = Multiset({p_init: 1, p_tok: 1})
        new_target = Multiset()

    needs_widget = [any(c > 1 for _, c in ins.items()) or any(c > 1 for _, c in outs.items())
                    for _, ins, outs, _ in raw_transitions]
    out_transitions: list[Transition] = []

    if not any(needs_widget):
        for name, ins, outs, label in raw_transitions:
            out_transitions.append(Transition(name, ins, outs, frozenset(), label))
        return PetriNet(names, out_transitions, initial), new_target

    p_run = add_place("mutex")
    initial = initial + Multiset.single(p_run)

    for (name, ins, outs, label), widgetize in zip(raw_transitions, needs_widget):
        is_final_drain = mode == "reach" and name == "drain!"
        if not widgetize:
            if is_final_drain:
                ins = ins + Multiset.single(p_run)
            out_transitions.append(Transition(name, ins, outs, frozenset(), label))
            continue

        small_in = Multiset({p: c for p, c in ins.items() if c == 1})
        small_out = Multiset({p: c for p, c in outs.items() if c == 1})
        big_in = [(p, c) for p, c in ins.items() if c > 1]
        big_out = [(p, c) for p, c in outs.items() if c > 1]

        stage = add_place(f"{name}#go")
        out_transitions.append(Transition(
            f"{name}#take", small_in + Multiset.single(p_run),
            Multiset.single(stage), frozenset(), label))

        def countdown(tag, place, count, stage_in, emit):
            """Binary count-down widget transferring `count` tokens one at a
            time to/from `place`; returns the control place it hands off to.

            From the setup marking exactly one widget transition is enabled
            at any point, so the chain is forced through count transfers."""
            bits = count.bit_length()
            bit0 = [add_place(f"{tag}.b{j}_0") for j in range(bits)]
            bit1 = [add_place(f"{tag}.b{j}_1") for j in range(bits)]
            setup = Multiset({(bit1[j] if (count >> j) & 1 else bit0[j]): 1
                              for j in range(bits)})
            active = add_place(f"{tag}#run")
            stage_out = add_place(f"{tag}#done")
            out_transitions.append(Transition(
                f"{tag}#set", Multiset.single(stage_in),
                setup + Multiset.single(active), frozenset(), None))
            for j in range(bits):
                ins_w = Multiset({bit1[j]: 1, **{bit0[i]: 1 for i in range(j)}})
                outs_w = Multiset({bit0[j]: 1, **{bit1[i]: 1 for i in range(j)}})
                if emit:
                    outs_w = outs_w + Multiset.single(place)
                else:
                    ins_w = ins_w + Multiset.single(place)
                out_transitions.append(Transition(
                    f"{tag}#dec{j}", ins_w, outs_w, frozenset(), None))
            out_transitions.append(Transition(
                f"{tag}#fin", Multiset({p: 1 for p in bit0}) + Multiset.single(active),
                Multiset.single(stage_out), frozenset(), None))
            return stage_out

        for p, c in big_in:
            stage = countdown(f"{name}@{names[p]}-", p, c, stage, emit=False)
        for p, c in big_out:
            stage = countdown(f"{name}@{names[p]}+", p, c, stage, emit=True)

        release_out = small_out if is_final_drain else small_out + Multiset.single(p_run)
        out_transitions.append(Transition(
            f"{name}#put", Multiset.single(stage), release_out, frozenset(), None))

    result = PetriNet(names, out_transitions, initial)
    return result, new_target


# -- text format and DOT -----------------------------------------------------


_NET_TOKEN = re.compile(r"""
    (?P<ws>\s+|\#[^\n]*)
  | (?P<name>[^\s{}:;]+)
  | (?P<punct>[{}:;])
""", re.VERBOSE)


def _net_tokens(text):
    tokens = []
    pos, line, col = 0, 1, 1
    while pos < len(text):
        m = _NET_TOKEN.match(text, pos)
        if m is None:
            raise ValueError(f"net format: bad character at line {line}")
        if m.lastgroup != "ws":
            tokens.append((m.lastgroup, m.group(), line))
        nl = m.group().count("\n")
        line += nl
        pos = m.end()
    tokens.append(("eof", "", line))
    return tokens


def parse_net(text: str) -> PetriNet:
    """Parse the textual net format::

        net {
          places: p q r;
          init: p:1 q:2;
          trans t1 { in: p:1; out: q:2; reset: r; label: dispatch(h); }
        }
    """
    toks = _net_tokens(text)
    pos = [0]

    def peek():
        return toks[pos[0]]

    def nxt():
        t = toks[pos[0]]
        if t[0] != "eof":
            pos[0] += 1
        return t

    def expect(value):
        t = nxt()
        if t[1] != value:
            raise ValueError(f"net format: expected {value!r}, found {t[1]!r} (line {t[2]})")
        return t

    def counted_list(place_of):
        out = {}
        while peek()[0] == "name":
            name = nxt()[1]
            if name not in place_of:
                raise ValueError(f"net format: unknown place {name!r}")
            count = 1
            if peek()[1] == ":":
                nxt()
                count = int(nxt()[1], 0)
            out[place_of[name]] = out.get(place_of[name], 0) + count
        expect(";")
        return Multiset(out)

    expect("net")
    expect("{")
    places: list[str] = []
    init = Multiset()
    transitions = []
    while peek()[1] != "}":
        section = nxt()
        if section[1] == "places":
            expect(":")
            while peek()[0] == "name":
                places.append(nxt()[1])
            expect(";")
        elif section[1] == "init":
            expect(":")
            init = counted_list({n: i for i, n in enumerate(places)})
        elif section[1] == "trans":
            tname = nxt()[1]
            expect("{")
            place_of = {n: i for i, n in enumerate(places)}
            ins = Multiset()
            outs = Multiset()
            resets = set()
            label = None
            while peek()[1] != "}":
                field_tok = nxt()
                expect(":")
                if field_tok[1] == "in":
                    ins = counted_list(place_of)
                elif field_tok[1] == "out":
                    outs = counted_list(place_of)
                elif field_tok[1] == "reset":
                    while peek()[0] == "name":
                        name = nxt()[1]
                        if name not in place_of:
                            raise ValueError(f"net format: unknown place {name!r}")
                        resets.add(place_of[name])
                    expect(";")
                elif field_tok[1] == "label":
                    raw = nxt()[1]
                    m = re.fullmatch(r"dispatch\((.*)\)", raw)
                    label = ("dispatch", m.group(1)) if m else raw
                    expect(";")
                else:
                    raise ValueError(f"net format: unknown field {field_tok[1]!r}")
            expect("}")
            transitions.append(Transition(tname, ins, outs, frozenset(resets), label))
        else:
            raise ValueError(f"net format: unknown section {section[1]!r}")
    expect("}")
    return PetriNet(places, transitions, init)


def format_net(net: PetriNet) -> str:
    lines = ["net {"]
    lines.append("  places: " + " ".join(net.place_names) + ";")
    if net.initial:
        init = " ".join(f"{net.place_names[p]}:{c}" for p, c in net.initial.items())
        lines.append(f"  init: {init};")
    for t in net.transitions:
        parts = []
        if t.inputs:
            parts.append("in: " + " ".join(f"{net.place_names[p]}:{c}"
                                           for p, c in t.inputs.items()) + ";")
        if t.outputs:
            parts.append("out: " + " ".join(f"{net.place_names[p]}:{c}"
                                            for p, c in t.outputs.items()) + ";")
        if t.resets:
            parts.append("reset: " + " ".join(net.place_names[p]
                                              for p in sorted(t.resets)) + ";")
        if t.label is not None:
            if isinstance(t.label, tuple) and t.label[0] == "dispatch":
                parts.append(f"label: dispatch({t.label[1]});")
            else:
                parts.append(f"label: {t.label};")
        lines.append(f"  trans {t.name} {{ " + " ".join(parts) + " }")
    lines.append("}")
    return "\n".join(lines) + "\n"


def net_to_dot(net: PetriNet, clusters: dict | None = None) -> str:
    """DOT rendering; ``clusters`` optionally groups places/transitions into
    named subgraphs (used to outline widget boundaries)."""
    def pid(i):
        return f"p{i}"

    def tid(i):
        return f"t{i}"

    lines = ["digraph net {", "  rankdir=LR;"]
    clustered_places = set()
    clustered_trans = set()
    if clusters:
        for ci, (cname, (places, trans)) in enumerate(sorted(clusters.items())):
            lines.append(f"  subgraph cluster{ci} {{")
            lines.append(f'    label="{cname}";')
            for p in places:
                clustered_places.add(p)
                tokens = net.initial[p]
                extra = f"\\n{tokens}" if tokens else ""
                lines.append(f'    {pid(p)} [shape=circle, label="{net.place_names[p]}{extra}"];')
            for t in trans:
                clustered_trans.add(t)
                lines.append(f'    {tid(t)} [shape=box, label="{net.transitions[t].name}"];')
            lines.append("  }")
    for p in range(net.place_count):
        if p in clustered_places:
            continue
        tokens = net.initial[p]
        extra = f"\\n{tokens}" if tokens else ""
        lines.append(f'  {pid(p)} [shape=circle, label="{net.place_names[p]}{extra}"];')
    for i, t in enumerate(net.transitions):
        if i not in clustered_trans:
            lines.append(f'  {tid(i)} [shape=box, label="{t.name}"];')
        for p, c in t.inputs.items():
            attr = f' [label="{c}"]' if c > 1 else ""
            lines.append(f"  {pid(p)} -> {tid(i)}{attr};")
        for p, c in t.outputs.items():
            attr = f' [label="{c}"]' if c > 1 else ""
            lines.append(f"  {tid(i)} -> {pid(p)}{attr};")
        for p in sorted(t.resets):
            lines.append(f'  {pid(p)} -> {tid(i)} [style=dashed, arrowhead=odot];')
    lines.append("}")
    return "\n".join(lines) + "\n"
