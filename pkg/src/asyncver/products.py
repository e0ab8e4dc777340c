"""Grammar products: synchronizing handler bodies with the state transfer
relation, the cancel-tracking product, and bounded-index Parikh image
enumeration."""

from __future__ import annotations

from collections import deque
from typing import NamedTuple

from .grammar import Cfg, RegularGrammar, prune_cfg
from .multiset import Multiset


class Context(NamedTuple):
    """A handler run: dispatched in state d_in, body ends in state d_out."""
    d_in: object
    handler: object
    d_out: object


class ProductGrammar:
    """Synchronized product of a normalized CFG with a transfer relation.

    Variables are triples (d, X, d'): derivations of the triple generate
    exactly the visible projections of body words w with X =>* w and a
    transfer run d =>* w . d'.  The full production set is exponentially
    wasteful to materialize for large state sets, so productive triples and
    per-start pruned grammars are computed on demand and cached.
    """

    def __init__(self, cfg: Cfg, transfer: RegularGrammar, visible, start_vars=None):
        if not cfg.is_normal():
            raise ValueError("product requires a normalized grammar")
        self.cfg = cfg
        self.transfer = transfer
        self.visible = frozenset(visible)
        self.start_vars = dict(start_vars or {})
        self._productive: frozenset | None = None
        self._pruned: dict = {}

    # -- production rules of the product ------------------------------------

    def _terminal_rules(self):
        """Yield (triple, rhs) for the epsilon and single-letter rules."""
        for lhs, rhs in self.cfg.productions:
            if len(rhs) == 0:
                for d in self.transfer.states:
                    yield (d, lhs, d), ()
            elif len(rhs) == 1 and rhs[0] in self.cfg.terminals:
                a = rhs[0]
                for d in self.transfer.states:
                    for d2 in self.transfer.step(d, a):
                        yield (d, lhs, d2), ((a,) if a in self.visible else ())

    def _pair_productions(self):
        return [(lhs, rhs) for lhs, rhs in self.cfg.productions
                if len(rhs) == 2]

    def productive_triples(self) -> frozenset:
        """Least set of triples deriving some terminal word, computed by a
        semi-naive worklist over the product rules."""
        if self._productive is not None:
            return self._productive
        by_from: dict = {}   # (var, d)  -> set of d2 with (d,var,d2) productive
        by_to: dict = {}     # (var, d2) -> set of d
        found = set()
        work = deque()

        def add(triple):
            if triple in found:
                return
            found.add(triple)
            d, v, d2 = triple
            by_from.setdefault((v, d), set()).add(d2)
            by_to.setdefault((v, d2), set()).add(d)
            work.append(triple)

        for triple, _ in self._terminal_rules():
            add(triple)

        pairs = self._pair_productions()
        left_of: dict = {}   # child var -> [(lhs, other-child)] where child is first
        right_of: dict = {}
        for lhs, (a, b) in pairs:
            left_of.setdefault(a, []).append((lhs, b))
            right_of.setdefault(b, []).append((lhs, a))

        while work:
            d0, v, d1 = work.popleft()
            for lhs, b in left_of.get(v, ()):
                for d2 in sorted(by_from.get((b, d1), ())):
                    add((d0, lhs, d2))
            for lhs, a in right_of.get(v, ()):
                for dz in sorted(by_to.get((a, d0), ())):
                    add((dz, lhs, d1))
        self._productive = frozenset(found)
        return self._productive

    def rules_for(self, triple):
        """Production rhs list for a productive triple, children restricted
        to productive triples."""
        productive = self.productive_triples()
        d0, v, d2 = triple
        out = []
        for rhs in self.cfg.rhs_of(v):
            if len(rhs) == 0:
                if d0 == d2:
                    out.append(())
            elif len(rhs) == 1:
                a = rhs[0]
                if d2 in self.transfer.step(d0, a):
                    out.append((a,) if a in self.visible else ())
            else:
                a, b = rhs
                for d1 in self.transfer.states:
                    if (d0, a, d1) in productive and (d1, b, d2) in productive:
                        out.append(((d0, a, d1), (d1, b, d2)))
        return out

    def base_cfg(self) -> Cfg:
        """The full product grammar per its defining least-set rules,
        including useless triples.  Only sensible for small inputs."""
        states = self.transfer.states
        variables = [(d, v, d2) for d in states for v in self.cfg.variables
                     for d2 in states]
        prods = []
        for triple, rhs in self._terminal_rules():
            prods.append((triple, rhs))
        for lhs, (a, b) in self._pair_productions():
            for d0 in states:
                for d1 in states:
                    for d2 in states:
                        prods.append(((d0, lhs, d2),
                                      ((d0, a, d1), (d1, b, d2))))
        terminals = self.visible
        return Cfg(variables, terminals, prods)

    # -- per-context views ---------------------------------------------------

    def start_triple(self, context: Context):
        var = self.start_vars[context.handler]
        return (context.d_in, var, context.d_out)

    def language_empty(self, context: Context) -> bool:
        return self.start_triple(context) not in self.productive_triples()

    def pruned(self, context: Context) -> Cfg | None:
        """Productive-and-reachable grammar for the context's language, or
        None when that language is empty."""
        start = self.start_triple(context)
        if start in self._pruned:
            return self._pruned[start]
        if start not in self.productive_triples():
            self._pruned[start] = None
            return None
        variables = []
        seen = {start}
        queue = deque([start])
        prods = []
        while queue:
            t = queue.popleft()
            variables.append(t)
            for rhs in self.rules_for(t):
                prods.append((t, rhs))
                if len(rhs) == 2:  # pair production: both children are triples
                    for child in rhs:
                        if child not in seen:
                            seen.add(child)
                            queue.append(child)
        cfg = Cfg(variables, self.visible, prods)
        self._pruned[start] = cfg
        return cfg

    def context_parikh_flagged(self, context: Context, size_bound: int):
        cfg = self.pruned(context)
        if cfg is None:
            return set(), False
        k = len(cfg.variables) + 1
        return _bounded_index_parikh(cfg, self.start_triple(context), k, size_bound)


def build_product(g: Cfg, r: RegularGrammar, visible, start_vars=None) -> ProductGrammar:
    """Product grammar synchronizing derivations of g with runs of r;
    letters outside ``visible`` are projected away."""
    return ProductGrammar(g, r, visible, start_vars)


def context_language_parikh(pg: ProductGrammar, c: Context, size_bound: int):
    """Parikh images of the context's language, complete for every image of
    size at most ``size_bound``."""
    images, _ = pg.context_parikh_flagged(c, size_bound)
    return images


def _index_of_pair(i1: int, i2: int) -> int:
    """Minimal derivation index of a two-child tree whose subtrees need
    indices i1 and i2: deriving one subtree first keeps the other's root
    pending, so the best schedule costs max of the larger index and the
    smaller plus one."""
    return i1 + 1 if i1 == i2 else max(i1, i2)


def _bounded_index_parikh(g: Cfg, start, k: int, size_bound: int):
    """Parikh images of words of length <= size_bound derivable with at most
    k variables in every sentential form.

    Computed bottom-up: for each variable, map every derivable image to the
    minimal index of a derivation producing it (the minimal index of a
    derivation tree is the Horton-Strahler number of that tree, combined
    per production by scheduling one subtree before the other).  Returns
    (images, truncated): truncated is set when a combination overflowed the
    size bound, so images beyond the bound exist."""
    if k < 1:
        raise ValueError("index bound must be >= 1")
    if size_bound < 0:
        raise ValueError("size bound must be >= 0")
    var_set = set(g.variables)
    if start not in var_set:
        raise ValueError(f"unknown start variable {start!r}")
    cap = k + 1                      # indices above k are all equally useless
    best: dict = {v: {} for v in g.variables}
    truncated = False

    by_child: dict = {}
    for lhs, rhs in g.productions:
        if len(rhs) == 2:
            by_child.setdefault(rhs[0], []).append((lhs, rhs))
            if rhs[1] != rhs[0]:
                by_child.setdefault(rhs[1], []).append((lhs, rhs))

    work = deque()
    seen_work = set()

    def improve(v, image: Multiset, index: int):
        nonlocal truncated
        index = min(index, cap)
        cur = best[v].get(image)
        if cur is not None and cur <= index:
            return
        best[v][image] = index
        key = (v, image)
        if key not in seen_work:
            seen_work.add(key)
            work.append(key)

    for lhs, rhs in g.productions:
        if len(rhs) == 0:
            improve(lhs, Multiset(), 1)
        elif len(rhs) == 1:
            if size_bound >= 1:
                improve(lhs, Multiset.single(rhs[0]), 1)
            else:
                truncated = True

    while work:
        v, image = work.popleft()
        seen_work.discard((v, image))
        idx = best[v][image]
        for lhs, (a, b) in by_child.get(v, ()):
            # combine with every image of the sibling, on either side
            if a == v:
                for img2, idx2 in list(best[b].items()):
                    combined = image + img2
                    if combined.size > size_bound:
                        truncated = True
                        continue
                    improve(lhs, combined, _index_of_pair(idx, idx2))
            if b == v:
                for img2, idx2 in list(best[a].items()):
                    combined = img2 + image
                    if combined.size > size_bound:
                        truncated = True
                        continue
                    improve(lhs, combined, _index_of_pair(idx2, idx))
    images = {image for image, idx in best[start].items() if idx <= k}
    return images, truncated


def bounded_index_parikh(g: Cfg, start, k: int, size_bound: int):
    """Public wrapper returning just the image set."""
    images, _ = _bounded_index_parikh(g, start, k, size_bound)
    return images


def reverse_cfg(g: Cfg) -> Cfg:
    """Same variables and terminals, pair productions flipped: derives
    exactly the reversed words."""
    prods = []
    for lhs, rhs in g.productions:
        if len(rhs) == 2:
            prods.append((lhs, (rhs[1], rhs[0])))
        else:
            prods.append((lhs, rhs))
    return Cfg(g.variables, g.terminals, prods)


class CancelProductGrammar:
    """Product of a reversed context grammar with the cancel-set tracking
    automaton.

    Variables are (S1, v, S2) with S1 included in S2; derivations from
    (empty, start, S) generate exactly the posts that survive a body run
    whose cancelled-handler set is S: for each handler either no cancel
    occurred (handler not in S, all posts kept) or only the posts issued
    after its last cancel remain.
    """

    def __init__(self, context_cfg: Cfg, start, cancel_to_handler: dict):
        self.start = start
        self.cancel_to_handler = dict(cancel_to_handler)
        handler_terms = frozenset(t for t in context_cfg.terminals
                                  if t not in self.cancel_to_handler)
        self.post_alphabet = handler_terms
        rev = reverse_cfg(context_cfg)
        self.rev = rev
        # only cancels that actually occur can enter the tracked set
        support = sorted({self.cancel_to_handler[rhs[0]]
                          for _, rhs in rev.productions
                          if len(rhs) == 1 and rhs[0] in self.cancel_to_handler})
        self.support = tuple(support)
        self._subsets = _subsets_of(support)
        self._productive = None
        self._pruned = {}

    def _rules_for(self, zvar):
        """Production rhs list for a product variable (S1, v, S2)."""
        s1, v, s2 = zvar
        s1set, s2set = set(s1), set(s2)
        out = []
        for rhs in self.rev.rhs_of(v):
            if len(rhs) == 0:
                if s1 == s2:
                    out.append(())
            elif len(rhs) == 1:
                letter = rhs[0]
                cancelled = self.cancel_to_handler.get(letter)
                if cancelled is None:
                    # plain post: tracked set unchanged; suppressed if already cancelled
                    if s1 == s2:
                        out.append(() if letter in s1set else (letter,))
                else:
                    if s2set == s1set | {cancelled}:
                        out.append(())
            else:
                a, b = rhs
                for mid in self._subsets:
                    midset = set(mid)
                    if s1set <= midset <= s2set:
                        out.append(((s1, a, mid), (mid, b, s2)))
        return out

    def productive(self) -> frozenset:
        if self._productive is not None:
            return self._productive
        found = set()
        changed = True
        zvars = [(s1, v, s2)
                 for v in self.rev.variables
                 for s1 in self._subsets
                 for s2 in self._subsets
                 if set(s1) <= set(s2)]
        # fixpoint; the subset lattice here is restricted to cancels that occur
        while changed:
            changed = False
            for z in zvars:
                if z in found:
                    continue
                for rhs in self._rules_for(z):
                    if len(rhs) == 2:
                        if rhs[0] in found and rhs[1] in found:
                            found.add(z)
                            changed = True
                            break
                    else:
                        found.add(z)
                        changed = True
                        break
        self._productive = frozenset(found)
        return self._productive

    def realized_sets(self):
        """Cancel sets S for which the context has at least one behavior."""
        productive = self.productive()
        out = []
        for s in self._subsets:
            if ((), self.start, s) in productive:
                out.append(frozenset(s))
        return out

    def pruned_for(self, cancel_set) -> Cfg | None:
        key = tuple(sorted(cancel_set))
        if key in self._pruned:
            return self._pruned[key]
        start = ((), self.start, key)
        if start not in self.productive():
            self._pruned[key] = None
            return None
        productive = self.productive()
        variables = []
        seen = {start}
        queue = deque([start])
        prods = []
        while queue:
            z = queue.popleft()
            variables.append(z)
            for rhs in self._rules_for(z):
                if len(rhs) == 2:
                    if rhs[0] not in productive or rhs[1] not in productive:
                        continue
                    prods.append((z, rhs))
                    for child in rhs:
                        if child not in seen:
                            seen.add(child)
                            queue.append(child)
                else:
                    prods.append((z, rhs))
        cfg = Cfg(variables, self.post_alphabet, prods)
        self._pruned[key] = cfg
        return cfg

    def start_symbol(self, cancel_set):
        return ((), self.start, tuple(sorted(cancel_set)))

    def pairs_flagged(self, size_bound: int):
        """All (cancel set, surviving-post Parikh image) pairs with image
        size <= size_bound, plus a truncation flag."""
        out = set()
        truncated = False
        for s in self.realized_sets():
            cfg = self.pruned_for(s)
            k = len(cfg.variables) + 1
            images, trunc = _bounded_index_parikh(cfg, self.start_symbol(s), k, size_bound)
            truncated |= trunc
            for m in images:
                out.add((s, m))
        return out, truncated

    def variable_count(self) -> int:
        """Pruned product variables across all realized cancel sets (the
        widget budget is derived from this)."""
        vs = set()
        for s in self.realized_sets():
            vs.update(self.pruned_for(s).variables)
        return len(vs)


def _subsets_of(items):
    items = tuple(items)
    out = []
    for mask in range(1 << len(items)):
        out.append(tuple(items[i] for i in range(len(items)) if mask & (1 << i)))
    return tuple(sorted(out, key=lambda t: (len(t), t)))


def build_cancel_product(g: Cfg, r: RegularGrammar, c: Context, *,
                         cancel_to_handler: dict, start_vars: dict,
                         visible=None) -> CancelProductGrammar | None:
    """Cancel-tracking product for one context of a cancel-enabled program.

    ``visible`` must keep both posts and cancel letters observable (internal
    actions are projected away); it defaults to all terminals.  Returns None
    when the context's language is empty.
    """
    if visible is None:
        visible = frozenset(g.terminals)
    pg = ProductGrammar(g, r, visible=frozenset(visible), start_vars=start_vars)
    return cancel_product_from_state_product(pg, c, cancel_to_handler)


def cancel_product_from_state_product(pg: ProductGrammar, c: Context,
                                      cancel_to_handler: dict) -> CancelProductGrammar | None:
    cfg = pg.pruned(c)
    if cfg is None:
        return None
    return CancelProductGrammar(cfg, pg.start_triple(c), cancel_to_handler)


class CancelProducts:
    """Per-program cache of cancel products keyed by context."""

    def __init__(self, program):
        from .program import AsyncProgram  # noqa: F401  (typing only)
        self.program = program
        visible = (frozenset(program.handlers)
                   | frozenset(program.cancels.values()))
        self.state_product = ProductGrammar(
            program.grammar, program.transfer, visible,
            start_vars=dict(program.start_var))
        self.cancel_to_handler = {c: h for h, c in program.cancels.items()}
        self._by_context: dict = {}

    def product_for(self, context: Context) -> CancelProductGrammar | None:
        if context not in self._by_context:
            self._by_context[context] = cancel_product_from_state_product(
                self.state_product, context, self.cancel_to_handler)
        return self._by_context[context]

    def context_pairs(self, context: Context, size_bound: int):
        cp = self.product_for(context)
        if cp is None:
            return set(), False
        return cp.pairs_flagged(size_bound)


def successor_buffer_cancel(m: Multiset, w_parikh: Multiset, cancelled) -> Multiset:
    """Buffer after a dispatch that cancelled the given handlers and posted
    ``w_parikh``: cancelled handlers keep only the new posts, everything
    else accumulates."""
    cancelled = set(cancelled)
    d = {}
    for sym, count in m.items():
        if sym not in cancelled:
            d[sym] = count
    for sym, count in w_parikh.items():
        d[sym] = d.get(sym, 0) + count
    return Multiset(d)
