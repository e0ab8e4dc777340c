"""Control-flow-graph front end: procedures with statement, synchronous and
asynchronous call edges, compiled down to the grammar-based program model."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

from .grammar import Cfg, RegularGrammar, normalize_cfg
from .multiset import Multiset
from .program import (HANDLER, INTERNAL, STATE, VARIABLE, AsyncProgram,
                      SymbolTable)

STMT = "stmt"
SYNC = "sync"
ASYNC = "async"


@dataclass(frozen=True)
class Procedure:
    name: str
    nodes: tuple[str, ...]
    entry: str
    exit: str
    edges: tuple[tuple, ...]    # (src, (kind, payload), dst)


@dataclass(frozen=True)
class FlowGraph:
    """One control flow graph per procedure plus an abstract transfer
    function over the finite dataflow domain.

    Edge labels: ("stmt", s) consumes statement s through the transfer
    function, ("sync", p) inlines procedure p, ("async", p) posts p.
    """

    procedures: dict[str, Procedure]
    transfer: dict[tuple[str, str], str]   # (value, statement-or-procedure) -> value
    values: tuple[str, ...]
    initial_value: str
    main: str

    def __post_init__(self):
        if self.main not in self.procedures:
            raise ValueError(f"main procedure {self.main!r} is not defined")
        if self.initial_value not in self.values:
            raise ValueError("initial dataflow value is not declared")
        for proc in self.procedures.values():
            self._check_wellformed(proc)

    def _check_wellformed(self, proc: Procedure):
        succ: dict[str, list] = {n: [] for n in proc.nodes}
        pred: dict[str, list] = {n: [] for n in proc.nodes}
        for src, label, dst in proc.edges:
            if src not in succ or dst not in succ:
                raise ValueError(f"{proc.name}: edge uses undeclared node")
            kind, payload = label
            if kind in (SYNC, ASYNC) and payload not in self.procedures:
                raise ValueError(f"{proc.name}: call to undefined procedure {payload!r}")
            succ[src].append(dst)
            pred[dst].append(src)

        def closure(start, table):
            seen = {start}
            queue = deque([start])
            while queue:
                n = queue.popleft()
                for m in table[n]:
                    if m not in seen:
                        seen.add(m)
                        queue.append(m)
            return seen

        from_entry = closure(proc.entry, succ)
        to_exit = closure(proc.exit, pred)
        for n in proc.nodes:
            if n not in from_entry or n not in to_exit:
                raise ValueError(
                    f"{proc.name}: node {n!r} not on an entry-to-exit path")


class TransferIncomplete(ValueError):
    pass


def compile_flowgraph(fg: FlowGraph) -> AsyncProgram:
    """Translate flow graphs to the grammar model.

    Nodes become variables, an async edge to p emits the letter p, a
    statement edge emits the statement letter, a sync call inlines the
    callee's entry variable, and every exit derives the empty word.  The
    transfer function becomes the right-linear rule set; it must be defined
    on every (value, letter) pair the graphs can mention.
    """
    table = SymbolTable()
    state_ids = {v: table.add(v, STATE) for v in fg.values}
    proc_names = sorted(fg.procedures)
    handler_ids = {p: table.add(p, HANDLER) for p in proc_names}

    stmt_names = sorted({label[1]
                         for proc in fg.procedures.values()
                         for _, label, _ in proc.edges
                         if label[0] == STMT})
    stmt_ids = {s: table.add(s, INTERNAL) for s in stmt_names}

    # transfer letters: statements plus every procedure posted asynchronously
    posted = sorted({label[1]
                     for proc in fg.procedures.values()
                     for _, label, _ in proc.edges
                     if label[0] == ASYNC})
    missing = [(d, letter) for letter in stmt_names + posted for d in fg.values
               if (d, letter) not in fg.transfer]
    if missing:
        d, letter = missing[0]
        raise TransferIncomplete(
            f"transfer function undefined on reachable pair ({d!r}, {letter!r})")

    node_ids: dict[tuple[str, str], int] = {}
    for p in proc_names:
        proc = fg.procedures[p]
        for n in proc.nodes:
            node_ids[(p, n)] = table.add(f"{p}::{n}", VARIABLE)

    prods = []
    for p in proc_names:
        proc = fg.procedures[p]
        for src, (kind, payload), dst in proc.edges:
            lhs = node_ids[(p, src)]
            cont = node_ids[(p, dst)]
            if kind == ASYNC:
                prods.append((lhs, (handler_ids[payload], cont)))
            elif kind == STMT:
                prods.append((lhs, (stmt_ids[payload], cont)))
            elif kind == SYNC:
                callee = fg.procedures[payload]
                prods.append((lhs, (node_ids[(payload, callee.entry)], cont)))
            else:
                raise ValueError(f"unknown edge kind {kind!r}")
        prods.append((node_ids[(p, proc.exit)], ()))

    terminal_ids = set(handler_ids.values()) | set(stmt_ids.values())
    raw = Cfg(list(node_ids.values()), terminal_ids, prods)
    grammar = normalize_cfg(raw, fresh=lambda hint: table.fresh("_" + hint, VARIABLE))

    rules = []
    for (d, letter), d2 in sorted(fg.transfer.items()):
        letter_id = stmt_ids.get(letter, handler_ids.get(letter))
        if letter_id is None:
            raise ValueError(f"transfer mentions unknown letter {letter!r}")
        rules.append((state_ids[d], letter_id, state_ids[d2]))
    transfer = RegularGrammar(tuple(state_ids.values()), terminal_ids, rules)

    start_var = {handler_ids[p]: node_ids[(p, fg.procedures[p].entry)]
                 for p in proc_names}
    return AsyncProgram(
        symbols=table,
        states=tuple(state_ids.values()),
        handlers=tuple(handler_ids[p] for p in proc_names),
        internals=tuple(stmt_ids[s] for s in stmt_names),
        cancels={},
        grammar=grammar,
        transfer=transfer,
        start_var=start_var,
        init_state=state_ids[fg.initial_value],
        init_buffer=Multiset.single(handler_ids[fg.main]),
    )
