"""Asynchronous program model: interned symbols, configurations, and the
explicit-state simulator used as ground truth by every analysis test."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import NamedTuple

from .grammar import Cfg, RegularGrammar, normalize_cfg
from .multiset import Multiset

STATE = "state"
HANDLER = "handler"
CANCEL = "cancel"
INTERNAL = "internal"
VARIABLE = "variable"


class SymbolTable:
    """Dense integer ids for every declared name, tagged with a kind."""

    def __init__(self):
        self._names: list[str] = []
        self._kinds: list[str] = []
        self._ids: dict[str, int] = {}

    def add(self, name: str, kind: str) -> int:
        if name in self._ids:
            raise ValueError(f"duplicate declaration of {name!r}")
        sid = len(self._names)
        self._names.append(name)
        self._kinds.append(kind)
        self._ids[name] = sid
        return sid

    def fresh(self, hint: str, kind: str) -> int:
        name = hint
        n = 0
        while name in self._ids:
            n += 1
            name = f"{hint}_{n}"
        return self.add(name, kind)

    def id_of(self, name: str) -> int:
        return self._ids[name]

    def __contains__(self, name: str) -> bool:
        return name in self._ids

    def name_of(self, sid: int) -> str:
        return self._names[sid]

    def kind_of(self, sid: int) -> str:
        return self._kinds[sid]

    def ids_of(self, kind: str) -> tuple[int, ...]:
        return tuple(i for i, k in enumerate(self._kinds) if k == kind)

    def __len__(self) -> int:
        return len(self._names)


class Configuration(NamedTuple):
    state: int
    buffer: Multiset

    def fmt(self, program: "AsyncProgram") -> str:
        name = program.symbols.name_of
        return f"({name(self.state)}, {self.buffer.fmt(name)})"


@dataclass(frozen=True)
class AsyncProgram:
    """Finite-data asynchronous program.

    Handler bodies are the grammar's languages from each handler's start
    variable; the transfer relation constrains which letters a body may
    consume at each global state.  All symbols are interned ids from
    ``symbols``; the cancel alphabet is present only when cancellation is
    enabled.
    """

    symbols: SymbolTable
    states: tuple[int, ...]
    handlers: tuple[int, ...]
    internals: tuple[int, ...]
    cancels: dict[int, int]          # handler id -> cancel-letter id ({} if disabled)
    grammar: Cfg                     # normalized; terminals = handlers+cancels+internals
    transfer: RegularGrammar
    start_var: dict[int, int]        # handler id -> grammar variable id
    init_state: int
    init_buffer: Multiset
    _products: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if self.init_state not in self.states:
            raise ValueError("initial state is not a declared state")
        handler_set = set(self.handlers)
        for sym in self.init_buffer.keys():
            if sym not in handler_set:
                raise ValueError("initial buffer may only contain handlers")
        for h in self.handlers:
            if h not in self.start_var:
                raise ValueError(f"missing start variable for handler "
                                 f"{self.symbols.name_of(h)!r}")
        if not self.grammar.is_normal():
            raise ValueError("program grammar must be normalized")

    @property
    def has_cancel(self) -> bool:
        return bool(self.cancels)

    @property
    def cancel_letters(self) -> tuple[int, ...]:
        return tuple(sorted(self.cancels.values()))

    def handler_of_cancel(self, letter: int) -> int:
        for h, c in self.cancels.items():
            if c == letter:
                return h
        raise KeyError(letter)

    def initial_configuration(self) -> Configuration:
        return Configuration(self.init_state, self.init_buffer)

    def products(self):
        """Cached grammar product machinery (built on first use)."""
        if "pg" not in self._products:
            from .products import build_product
            visible = frozenset(self.handlers) | frozenset(self.cancels.values())
            self._products["pg"] = build_product(
                self.grammar, self.transfer, visible, start_vars=dict(self.start_var))
        return self._products["pg"]

    def cancel_products(self):
        if "cpg" not in self._products:
            from .products import CancelProducts
            self._products["cpg"] = CancelProducts(self)
        return self._products["cpg"]

    def name(self, sid: int) -> str:
        return self.symbols.name_of(sid)


def build_program(*, states, init, handlers, productions, flow,
                  internal=(), buffer=None, cancels=False, starts=None) -> AsyncProgram:
    """Assemble a program from string names.

    ``productions`` maps variable names to lists of rhs (each a list of
    symbol names, cancel letters written ``~h``); ``flow`` is a list of
    ``(state, letter, state)`` triples; ``starts`` optionally overrides the
    default ``X<handler>`` start-variable convention.
    """
    table = SymbolTable()
    state_ids = [table.add(s, STATE) for s in states]
    handler_ids = [table.add(h, HANDLER) for h in handlers]
    cancel_map: dict[int, int] = {}
    if cancels:
        for h in handlers:
            cancel_map[table.id_of(h)] = table.add("~" + h, CANCEL)
    internal_ids = [table.add(s, INTERNAL) for s in internal]

    starts = dict(starts or {})
    var_names = list(productions.keys())
    for h in handlers:
        default = "X" + h
        chosen = starts.get(h, default)
        if chosen not in productions:
            raise ValueError(f"missing start variable {chosen!r} for handler {h!r}")
        starts[h] = chosen
    var_ids = {v: table.add(v, VARIABLE) for v in var_names}

    def resolve(sym: str) -> int:
        if sym in var_ids:
            return var_ids[sym]
        if sym in table:
            return table.id_of(sym)
        raise ValueError(f"undeclared symbol {sym!r}")

    terminal_ids = set(handler_ids) | set(cancel_map.values()) | set(internal_ids)
    prods = []
    for lhs, alternatives in productions.items():
        for rhs in alternatives:
            prods.append((var_ids[lhs], tuple(resolve(s) for s in rhs)))
    raw = Cfg(list(var_ids.values()), terminal_ids, prods)
    grammar = normalize_cfg(raw, fresh=lambda hint: table.fresh("_" + hint, VARIABLE))

    rules = [(table.id_of(d), resolve(a), table.id_of(d2)) for d, a, d2 in flow]
    transfer = RegularGrammar(state_ids, terminal_ids, rules)

    buf = Multiset({table.id_of(h): n for h, n in (buffer or {}).items()})
    return AsyncProgram(
        symbols=table,
        states=tuple(state_ids),
        handlers=tuple(handler_ids),
        internals=tuple(internal_ids),
        cancels=cancel_map,
        grammar=grammar,
        transfer=transfer,
        start_var={table.id_of(h): var_ids[v] for h, v in starts.items()},
        init_state=table.id_of(init),
        init_buffer=buf,
    )


class Simulator:
    """Exhaustive-within-budget successor enumeration.

    ``post_budget`` bounds the size of the multiset a single dispatch may
    add to the buffer; whenever a context's enumeration was cut off by that
    bound the simulator flags truncation so callers never mistake a
    truncated exploration for an exhaustive one.
    """

    def __init__(self, program: AsyncProgram, post_budget: int = 16):
        if post_budget < 0:
            raise ValueError("post budget must be >= 0")
        self.program = program
        self.post_budget = post_budget
        self._cache: dict[tuple[int, int], tuple[tuple, bool]] = {}

    def _context_effects(self, d: int, sigma: int):
        """All (d2, cancelled_set, posted) effects of dispatching sigma at d,
        plus a truncation flag."""
        key = (d, sigma)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        from .products import Context
        program = self.program
        effects = []
        truncated = False
        if program.has_cancel:
            cpg = program.cancel_products()
            for d2 in program.states:
                pairs, trunc = cpg.context_pairs(Context(d, sigma, d2), self.post_budget)
                truncated |= trunc
                for cancelled, posted in pairs:
                    effects.append((d2, cancelled, posted))
        else:
            pg = program.products()
            for d2 in program.states:
                images, trunc = pg.context_parikh_flagged(
                    Context(d, sigma, d2), self.post_budget)
                truncated |= trunc
                for posted in images:
                    effects.append((d2, frozenset(), posted))
        result = (tuple(effects), truncated)
        self._cache[key] = result
        return result

    def successors(self, config: Configuration):
        """Deterministic list of (handler, successor) plus truncation flag."""
        from .products import successor_buffer_cancel
        out = []
        truncated = False
        seen = set()
        base_buffer = config.buffer
        for sigma in sorted(base_buffer.keys()):
            rest = base_buffer - Multiset.single(sigma)
            effects, trunc = self._context_effects(config.state, sigma)
            truncated |= trunc
            for d2, cancelled, posted in effects:
                if cancelled:
                    buf = successor_buffer_cancel(rest, posted, cancelled)
                else:
                    buf = rest + posted
                succ = (sigma, Configuration(d2, buf))
                if succ not in seen:
                    seen.add(succ)
                    out.append(succ)
        return out, truncated


def step(program: AsyncProgram, config: Configuration, post_budget: int):
    """All one-dispatch successors whose newly posted multiset has size at
    most ``post_budget``."""
    succ, _ = Simulator(program, post_budget).successors(config)
    return set(succ)


def enumerate_reachable(program: AsyncProgram, max_states: int, post_budget: int):
    """Breadth-first closure of ``step`` from the initial configuration.

    Returns (configurations, exhausted).  ``exhausted`` is True only if the
    closure completed within ``max_states`` and no successor enumeration
    was truncated by ``post_budget``, i.e. the returned set is exactly the
    reachable set.
    """
    if max_states <= 0 or post_budget < 0:
        raise ValueError("bounds must be positive")
    sim = Simulator(program, post_budget)
    init = program.initial_configuration()
    seen = {init}
    queue = deque([init])
    exhausted = True
    while queue:
        config = queue.popleft()
        succ, truncated = sim.successors(config)
        if truncated:
            exhausted = False
        for _, nxt in succ:
            if nxt not in seen:
                if len(seen) >= max_states:
                    return seen, False
                seen.add(nxt)
                queue.append(nxt)
    return seen, exhausted
