"""Text format for asynchronous programs (.ap files)."""

from __future__ import annotations

import re

from .grammar import Cfg, RegularGrammar, normalize_cfg
from .multiset import Multiset
from .program import (CANCEL, HANDLER, INTERNAL, STATE, VARIABLE,
                      AsyncProgram, SymbolTable)


class ParseError(ValueError):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"line {line}, column {col}: {message}")
        self.line = line
        self.col = col


_TOKEN = re.compile(r"""
    (?P<ws>\s+|\#[^\n]*)
  | (?P<cancel>~[A-Za-z_][A-Za-z0-9_']*)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_']*)
  | (?P<number>0[bx][0-9a-fA-F]+|\d+)
  | (?P<arrow>->)
  | (?P<punct>[{}:;=\-])
""", re.VERBOSE)


def _tokenize(text: str):
    tokens = []
    line, col = 1, 1
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        value = m.group()
        if kind != "ws":
            tokens.append((kind, value, line, col))
        newlines = value.count("\n")
        if newlines:
            line += newlines
            col = len(value) - value.rfind("\n")
        else:
            col += len(value)
        pos = m.end()
    tokens.append(("eof", "", line, col))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos]

    def next(self):
        tok = self.tokens[self.pos]
        if tok[0] != "eof":
            self.pos += 1
        return tok

    def error(self, message, tok=None):
        tok = tok or self.peek()
        raise ParseError(message, tok[2], tok[3])

    def expect(self, kind, value=None):
        tok = self.next()
        if tok[0] != kind or (value is not None and tok[1] != value):
            want = value if value is not None else kind
            self.error(f"expected {want!r}, found {tok[1]!r}", tok)
        return tok

    def expect_ident(self, what="name"):
        tok = self.next()
        if tok[0] != "ident":
            self.error(f"expected {what}, found {tok[1]!r}", tok)
        return tok


def parse_program(text: str) -> AsyncProgram:
    """Parse program text into a structurally checked AsyncProgram.

    Grammar entries may be in any pre-normal shape; normalization is
    applied automatically.  Handler start variables follow the ``X<h>``
    convention unless overridden with ``start h = V;``.
    """
    p = _Parser(text)
    p.expect("ident", "program")
    p.expect("punct", "{")

    decls = {"states": None, "init": None, "handlers": None,
             "internal": None, "cancels": None, "buffer": None}
    starts: dict[str, str] = {}
    grammar_items: list[tuple] = []
    flow_items: list[tuple] = []
    seen_grammar = seen_flow = False

    while True:
        tok = p.peek()
        if tok[0] == "punct" and tok[1] == "}":
            p.next()
            break
        if tok[0] == "eof":
            p.error("unexpected end of input, missing '}'")
        key_tok = p.expect_ident("section name")
        key = key_tok[1]
        if key in ("states", "handlers", "internal"):
            if decls[key] is not None:
                p.error(f"duplicate section {key!r}", key_tok)
            p.expect("punct", ":")
            names = []
            while p.peek()[0] == "ident":
                names.append(p.next()[1])
            p.expect("punct", ";")
            decls[key] = names
        elif key == "init":
            if decls["init"] is not None:
                p.error("duplicate section 'init'", key_tok)
            p.expect("punct", ":")
            decls["init"] = p.expect_ident("state name")[1]
            p.expect("punct", ";")
        elif key == "cancels":
            if decls["cancels"] is not None:
                p.error("duplicate section 'cancels'", key_tok)
            p.expect("punct", ":")
            mode = p.expect_ident("'on' or 'off'")
            if mode[1] not in ("on", "off"):
                p.error("cancels must be 'on' or 'off'", mode)
            p.expect("punct", ";")
            decls["cancels"] = mode[1] == "on"
        elif key == "buffer":
            if decls["buffer"] is not None:
                p.error("duplicate section 'buffer'", key_tok)
            p.expect("punct", ":")
            entries = []
            while p.peek()[0] == "ident":
                name_tok = p.next()
                count = 1
                if p.peek()[0] == "punct" and p.peek()[1] == ":":
                    p.next()
                    num = p.expect("number")
                    count = int(num[1], 0)
                entries.append((name_tok, count))
            p.expect("punct", ";")
            decls["buffer"] = entries
        elif key == "start":
            handler_tok = p.expect_ident("handler name")
            p.expect("punct", "=")
            var_tok = p.expect_ident("variable name")
            p.expect("punct", ";")
            if handler_tok[1] in starts:
                p.error(f"duplicate start override for {handler_tok[1]!r}", handler_tok)
            starts[handler_tok[1]] = var_tok[1]
        elif key == "grammar":
            if seen_grammar:
                p.error("duplicate grammar block", key_tok)
            seen_grammar = True
            p.expect("punct", "{")
            while not (p.peek()[0] == "punct" and p.peek()[1] == "}"):
                lhs = p.expect_ident("variable name")
                p.expect("arrow")
                rhs: list[tuple] = []
                while True:
                    t = p.peek()
                    if t[0] in ("ident", "cancel"):
                        rhs.append(p.next())
                    elif t[0] == "punct" and t[1] == ";":
                        p.next()
                        break
                    else:
                        p.error(f"expected grammar symbol or ';', found {t[1]!r}")
                grammar_items.append((lhs, rhs))
            p.expect("punct", "}")
        elif key == "flow":
            if seen_flow:
                p.error("duplicate flow block", key_tok)
            seen_flow = True
            p.expect("punct", "{")
            while not (p.peek()[0] == "punct" and p.peek()[1] == "}"):
                src = p.expect_ident("state name")
                p.expect("punct", "-")
                label = p.next()
                if label[0] not in ("ident", "cancel"):
                    p.error(f"expected a letter label, found {label[1]!r}", label)
                p.expect("arrow")
                dst = p.expect_ident("state name")
                p.expect("punct", ";")
                flow_items.append((src, label, dst))
            p.expect("punct", "}")
        else:
            p.error(f"unknown section {key!r}", key_tok)
    p.expect("eof")

    if decls["states"] is None:
        raise ParseError("missing 'states' section", 1, 1)
    if decls["handlers"] is None:
        raise ParseError("missing 'handlers' section", 1, 1)
    if decls["init"] is None:
        raise ParseError("missing 'init' section", 1, 1)

    table = SymbolTable()

    def declare(name_tok_or_str, kind):
        name = name_tok_or_str if isinstance(name_tok_or_str, str) else name_tok_or_str[1]
        try:
            return table.add(name, kind)
        except ValueError:
            if isinstance(name_tok_or_str, str):
                raise ParseError(f"duplicate declaration of {name!r}", 1, 1) from None
            raise ParseError(f"duplicate declaration of {name!r}",
                             name_tok_or_str[2], name_tok_or_str[3]) from None

    state_ids = [declare(s, STATE) for s in decls["states"]]
    handler_ids = [declare(h, HANDLER) for h in decls["handlers"]]
    cancel_enabled = bool(decls["cancels"])
    cancel_map: dict[int, int] = {}
    if cancel_enabled:
        for h in decls["handlers"]:
            cancel_map[table.id_of(h)] = table.add("~" + h, CANCEL)
    internal_ids = [declare(s, INTERNAL) for s in (decls["internal"] or [])]

    # variables: every lhs of a production
    var_ids: dict[str, int] = {}
    for lhs_tok, _ in grammar_items:
        name = lhs_tok[1]
        if name not in var_ids:
            if name in table:
                raise ParseError(f"variable {name!r} collides with a declared name",
                                 lhs_tok[2], lhs_tok[3])
            var_ids[name] = table.add(name, VARIABLE)

    def resolve(tok, *, letter_only=False):
        kind, name, ln, col = tok
        if kind == "cancel":
            if not cancel_enabled:
                raise ParseError("cancel symbols need 'cancels: on'", ln, col)
            base = name[1:]
            if base not in table or table.kind_of(table.id_of(base)) != HANDLER:
                raise ParseError(f"undeclared symbol {name!r}", ln, col)
            return cancel_map[table.id_of(base)]
        if not letter_only and name in var_ids:
            return var_ids[name]
        if name == "eps":
            raise ParseError("'eps' must stand alone as the whole rhs", ln, col)
        if name in table:
            sid = table.id_of(name)
            k = table.kind_of(sid)
            if k in (HANDLER, INTERNAL):
                return sid
            raise ParseError(f"{name!r} is a {k}, not usable here", ln, col)
        raise ParseError(f"undeclared symbol {name!r}", ln, col)

    terminal_ids = set(handler_ids) | set(cancel_map.values()) | set(internal_ids)
    prods = []
    for lhs_tok, rhs_toks in grammar_items:
        if len(rhs_toks) == 1 and rhs_toks[0][0] == "ident" and rhs_toks[0][1] == "eps":
            rhs = ()
        else:
            rhs = tuple(resolve(t) for t in rhs_toks)
        prods.append((var_ids[lhs_tok[1]], rhs))

    # start variables, with the X<h> convention
    start_var: dict[int, int] = {}
    for h in decls["handlers"]:
        hid = table.id_of(h)
        name = starts.get(h, "X" + h)
        if name not in var_ids:
            raise ParseError(f"missing start variable {name!r} for handler {h!r}", 1, 1)
        start_var[hid] = var_ids[name]
    for h, v in starts.items():
        if h not in decls["handlers"]:
            raise ParseError(f"start override names undeclared handler {h!r}", 1, 1)

    raw = Cfg(list(var_ids.values()), terminal_ids, prods)
    grammar = normalize_cfg(raw, fresh=lambda hint: table.fresh("_" + hint, VARIABLE))

    rules = []
    for src_tok, label_tok, dst_tok in flow_items:
        for t, what in ((src_tok, "state"), (dst_tok, "state")):
            if t[1] not in table or table.kind_of(table.id_of(t[1])) != STATE:
                raise ParseError(f"undeclared symbol {t[1]!r}", t[2], t[3])
        rules.append((table.id_of(src_tok[1]),
                      resolve(label_tok, letter_only=True),
                      table.id_of(dst_tok[1])))
    transfer = RegularGrammar(state_ids, terminal_ids, rules)

    if decls["init"] not in table or table.kind_of(table.id_of(decls["init"])) != STATE:
        raise ParseError(f"undeclared symbol {decls['init']!r}", 1, 1)

    buffer_counts: dict[int, int] = {}
    for name_tok, count in (decls["buffer"] or []):
        name = name_tok[1]
        if name not in table or table.kind_of(table.id_of(name)) != HANDLER:
            raise ParseError(f"undeclared symbol {name!r}", name_tok[2], name_tok[3])
        hid = table.id_of(name)
        if hid in buffer_counts:
            raise ParseError(f"duplicate buffer entry for {name!r}",
                             name_tok[2], name_tok[3])
        buffer_counts[hid] = count

    return AsyncProgram(
        symbols=table,
        states=tuple(state_ids),
        handlers=tuple(handler_ids),
        internals=tuple(internal_ids),
        cancels=cancel_map,
        grammar=grammar,
        transfer=transfer,
        start_var=start_var,
        init_state=table.id_of(decls["init"]),
        init_buffer=Multiset(buffer_counts),
    )


def format_program(program: AsyncProgram) -> str:
    """Emit program text that parses back to an equivalent program."""
    name = program.symbols.name_of
    lines = ["program {"]
    lines.append("  states: " + " ".join(name(d) for d in program.states) + ";")
    lines.append(f"  init: {name(program.init_state)};")
    lines.append("  handlers: " + " ".join(name(h) for h in program.handlers) + ";")
    if program.internals:
        lines.append("  internal: " + " ".join(name(s) for s in program.internals) + ";")
    lines.append(f"  cancels: {'on' if program.has_cancel else 'off'};")
    if program.init_buffer:
        entries = " ".join(f"{name(h)}:{c}" for h, c in program.init_buffer.items())
        lines.append(f"  buffer: {entries};")
    for h in program.handlers:
        v = program.start_var[h]
        if name(v) != "X" + name(h):
            lines.append(f"  start {name(h)} = {name(v)};")
    lines.append("  grammar {")
    for lhs, rhs in program.grammar.productions:
        body = " ".join(name(s) for s in rhs) if rhs else "eps"
        lines.append(f"    {name(lhs)} -> {body};")
    lines.append("  }")
    lines.append("  flow {")
    for d, a, d2 in program.transfer.rules:
        lines.append(f"    {name(d)} -{name(a)}-> {name(d2)};")
    lines.append("  }")
    lines.append("}")
    return "\n".join(lines) + "\n"
