"""Context-free and regular grammars, normalization, and the grammar
analyses (productivity, reachability, letter-count bounds) the rest of the
tool leans on."""

from __future__ import annotations

from collections import deque


class Cfg:
    """Context-free grammar with explicit variable and terminal sets.

    Productions are (lhs, rhs) pairs with rhs a tuple of symbols.  After
    :func:`normalize_cfg` every rhs is two variables, a single terminal, or
    empty.  Variables keep their construction order so everything derived
    from a grammar is deterministic.
    """

    __slots__ = ("variables", "terminals", "productions", "_by_lhs")

    def __init__(self, variables, terminals, productions):
        seen = set()
        ordered = []
        for v in variables:
            if v not in seen:
                seen.add(v)
                ordered.append(v)
        self.variables = tuple(ordered)
        self.terminals = frozenset(terminals)
        overlap = seen & self.terminals
        if overlap:
            raise ValueError(f"symbols both variable and terminal: {sorted(map(repr, overlap))}")
        prods = []
        prod_seen = set()
        for lhs, rhs in productions:
            rhs = tuple(rhs)
            if lhs not in seen:
                raise ValueError(f"production lhs {lhs!r} is not a declared variable")
            for s in rhs:
                if s not in seen and s not in self.terminals:
                    raise ValueError(f"production symbol {s!r} is neither variable nor terminal")
            key = (lhs, rhs)
            if key not in prod_seen:
                prod_seen.add(key)
                prods.append(key)
        self.productions = tuple(prods)
        by_lhs: dict = {v: [] for v in self.variables}
        for lhs, rhs in self.productions:
            by_lhs[lhs].append(rhs)
        self._by_lhs = {v: tuple(rs) for v, rs in by_lhs.items()}

    def rhs_of(self, var) -> tuple:
        return self._by_lhs.get(var, ())

    def is_normal(self) -> bool:
        for _, rhs in self.productions:
            if len(rhs) == 0:
                continue
            if len(rhs) == 1 and rhs[0] in self.terminals:
                continue
            if len(rhs) == 2 and rhs[0] not in self.terminals and rhs[1] not in self.terminals:
                continue
            return False
        return True

    def __eq__(self, other):
        if not isinstance(other, Cfg):
            return NotImplemented
        return (self.variables == other.variables
                and self.terminals == other.terminals
                and self.productions == other.productions)

    def __repr__(self):
        return f"Cfg(vars={len(self.variables)}, prods={len(self.productions)})"


def _string_fresh(cfg: Cfg):
    """Fresh-name factory for grammars whose symbols are strings."""
    taken = {str(s) for s in cfg.variables} | {str(s) for s in cfg.terminals}
    counter = [0]

    def fresh(hint: str):
        while True:
            counter[0] += 1
            name = f"_{hint}{counter[0]}"
            if name not in taken:
                taken.add(name)
                return name

    return fresh


def normalize_cfg(g: Cfg, fresh=None) -> Cfg:
    """Rewrite productions so every rhs is two variables, one terminal, or
    empty, preserving the language of every original variable.

    Terminals inside long rhs are lifted through fresh unit variables, long
    rhs are binarized left to right, and a unit rhs X -> Y becomes
    X -> Y E with a shared nullable helper E.
    """
    if fresh is None:
        fresh = _string_fresh(g)
    new_vars = list(g.variables)
    out = []
    lift_cache: dict = {}
    eps_var = [None]

    def lift(term):
        v = lift_cache.get(term)
        if v is None:
            v = fresh("t")
            lift_cache[term] = v
            new_vars.append(v)
            out.append((v, (term,)))
        return v

    def nullable_helper():
        if eps_var[0] is None:
            v = fresh("e")
            eps_var[0] = v
            new_vars.append(v)
            out.append((v, ()))
        return eps_var[0]

    for lhs, rhs in g.productions:
        if len(rhs) == 0:
            out.append((lhs, ()))
        elif len(rhs) == 1:
            s = rhs[0]
            if s in g.terminals:
                out.append((lhs, rhs))
            else:
                out.append((lhs, (s, nullable_helper())))
        else:
            syms = [lift(s) if s in g.terminals else s for s in rhs]
            cur = lhs
            for i in range(len(syms) - 2):
                nxt = fresh("s")
                new_vars.append(nxt)
                out.append((cur, (syms[i], nxt)))
                cur = nxt
            out.append((cur, (syms[-2], syms[-1])))
    return Cfg(new_vars, g.terminals, out)


def productive_variables(g: Cfg) -> frozenset:
    """Variables that derive at least one terminal word."""
    prod = set()
    changed = True
    while changed:
        changed = False
        for lhs, rhs in g.productions:
            if lhs in prod:
                continue
            if all(s in g.terminals or s in prod for s in rhs):
                prod.add(lhs)
                changed = True
    return frozenset(prod)


def reachable_variables(g: Cfg, start) -> frozenset:
    reach = {start}
    work = deque([start])
    while work:
        v = work.popleft()
        for rhs in g.rhs_of(v):
            for s in rhs:
                if s not in g.terminals and s not in reach:
                    reach.add(s)
                    work.append(s)
    return frozenset(reach)


def prune_cfg(g: Cfg, start) -> Cfg:
    """Keep only productions over productive variables reachable from start.

    The language of start is unchanged.  If start derives nothing the
    result has no productions.
    """
    prod = productive_variables(g)
    if start not in prod:
        return Cfg((start,), g.terminals, ())
    restricted = [(lhs, rhs) for lhs, rhs in g.productions
                  if lhs in prod and all(s in g.terminals or s in prod for s in rhs)]
    keep_cfg = Cfg([v for v in g.variables if v in prod], g.terminals, restricted)
    reach = reachable_variables(keep_cfg, start)
    final = [(lhs, rhs) for lhs, rhs in restricted if lhs in reach]
    return Cfg([v for v in keep_cfg.variables if v in reach], g.terminals, final)


def language_empty(g: Cfg, start) -> bool:
    return start not in productive_variables(g)


def can_emit_terminal(g: Cfg, start) -> bool:
    """Whether the language of start (assumed pruned) contains a non-empty
    word.  Exact on pruned grammars: any reachable terminal production can
    be completed to a full word."""
    pruned = prune_cfg(g, start)
    return any(len(rhs) == 1 and rhs[0] in g.terminals for _, rhs in pruned.productions)


def min_word_length(g: Cfg) -> dict:
    """Shortest derivable word length per variable; None when empty."""
    best: dict = {v: None for v in g.variables}
    changed = True
    while changed:
        changed = False
        for lhs, rhs in g.productions:
            total = 0
            for s in rhs:
                if s in g.terminals:
                    total += 1
                else:
                    c = best[s]
                    if c is None:
                        total = None
                        break
                    total += c
            if total is not None and (best[lhs] is None or total < best[lhs]):
                best[lhs] = total
                changed = True
    return best


def min_letter_count(g: Cfg, letter) -> dict:
    """Minimum number of occurrences of ``letter`` over the words each
    variable derives; None for variables deriving nothing."""
    INF = None
    best: dict = {v: INF for v in g.variables}

    def rhs_cost(rhs):
        total = 0
        for s in rhs:
            if s in g.terminals:
                total += 1 if s == letter else 0
            else:
                c = best[s]
                if c is None:
                    return None
                total += c
        return total

    changed = True
    while changed:
        changed = False
        for lhs, rhs in g.productions:
            c = rhs_cost(rhs)
            if c is not None and (best[lhs] is None or c < best[lhs]):
                best[lhs] = c
                changed = True
    return best


def format_productions(g: Cfg, name=str) -> str:
    """Dump productions in the textual syntax accepted by the program
    format: one ``lhs -> rhs ;`` line per production, ``eps`` for empty."""
    lines = []
    for lhs, rhs in g.productions:
        body = " ".join(name(s) for s in rhs) if rhs else "eps"
        lines.append(f"{name(lhs)} -> {body};")
    return "\n".join(lines)


class RegularGrammar:
    """Right-linear rules (d, letter, d') over a finite state set.

    Used as the transfer relation of a program: a rule says the letter can
    be consumed at d moving the global state to d'.
    """

    __slots__ = ("states", "alphabet", "rules", "_by_state_letter")

    def __init__(self, states, alphabet, rules):
        self.states = tuple(dict.fromkeys(states))
        if not self.states:
            raise ValueError("state set must be non-empty")
        self.alphabet = frozenset(alphabet)
        state_set = set(self.states)
        seen = set()
        kept = []
        for d, a, d2 in rules:
            if d not in state_set or d2 not in state_set:
                raise ValueError(f"rule ({d!r},{a!r},{d2!r}) uses an undeclared state")
            if a not in self.alphabet:
                raise ValueError(f"rule letter {a!r} is not in the declared alphabet")
            if (d, a, d2) not in seen:
                seen.add((d, a, d2))
                kept.append((d, a, d2))
        self.rules = tuple(kept)
        table: dict = {}
        for d, a, d2 in self.rules:
            table.setdefault((d, a), []).append(d2)
        self._by_state_letter = {k: tuple(v) for k, v in table.items()}

    def step(self, d, letter) -> tuple:
        return self._by_state_letter.get((d, letter), ())

    def walk(self, d, word) -> frozenset:
        """End states of runs consuming the whole word from d."""
        cur = {d}
        for a in word:
            nxt = set()
            for s in cur:
                nxt.update(self.step(s, a))
            if not nxt:
                return frozenset()
            cur = nxt
        return frozenset(cur)

    def __eq__(self, other):
        if not isinstance(other, RegularGrammar):
            return NotImplemented
        return (self.states == other.states and self.alphabet == other.alphabet
                and set(self.rules) == set(other.rules))

    def __repr__(self):
        return f"RegularGrammar(states={len(self.states)}, rules={len(self.rules)})"
