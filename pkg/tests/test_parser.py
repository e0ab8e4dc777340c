from pathlib import Path

import pytest

from asyncver import Multiset, ParseError, format_program, parse_program

CORPUS = Path(__file__).resolve().parent.parent / "corpus"


def load(name):
    return parse_program((CORPUS / name).read_text())


def test_fig3_shape():
    p = load("fig3.ap")
    assert len(p.handlers) == 2
    assert len(p.states) == 2
    assert p.symbols.name_of(p.init_state) == "b0"
    assert p.init_buffer == Multiset.single(p.symbols.id_of("h1"))
    assert not p.has_cancel
    assert p.grammar.is_normal()


def test_empty_handler_body_accepted():
    p = parse_program("""
    program {
      states: d; init: d;
      handlers: h;
      grammar { Xh -> eps; }
      flow { d -h-> d; }
    }
    """)
    start = p.start_var[p.symbols.id_of("h")]
    assert p.grammar.rhs_of(start) == ((),)


def test_undeclared_handler_rejected():
    with pytest.raises(ParseError, match="undeclared symbol"):
        parse_program("""
        program {
          states: d; init: d;
          handlers: h;
          grammar { Xh -> h9; }
        }
        """)


def test_missing_start_variable_rejected():
    with pytest.raises(ParseError, match="missing start variable"):
        parse_program("""
        program {
          states: d; init: d;
          handlers: h g;
          grammar { Xh -> eps; }
        }
        """)


def test_duplicate_declaration_rejected():
    with pytest.raises(ParseError, match="duplicate"):
        parse_program("""
        program {
          states: d d; init: d;
          handlers: h;
          grammar { Xh -> eps; }
        }
        """)


def test_duplicate_buffer_entry_rejected():
    with pytest.raises(ParseError, match="duplicate buffer"):
        parse_program("""
        program {
          states: d; init: d;
          handlers: h;
          buffer: h:1 h:2;
          grammar { Xh -> eps; }
        }
        """)


def test_syntax_error_carries_position():
    try:
        parse_program("program {\n  states d;\n}")
    except ParseError as exc:
        assert exc.line == 2
    else:
        raise AssertionError("expected a parse error")


def test_cancel_symbols_need_cancels_on():
    with pytest.raises(ParseError, match="cancels"):
        parse_program("""
        program {
          states: d; init: d;
          handlers: h;
          grammar { Xh -> ~h; }
        }
        """)


def test_cancel_program_parses():
    p = load("cancel_flush.ap")
    assert p.has_cancel
    f = p.symbols.id_of("f")
    assert p.cancels[p.symbols.id_of("g")] == p.symbols.id_of("~g")
    assert p.init_buffer[f] == 1


def test_start_override():
    p = parse_program("""
    program {
      states: d; init: d;
      handlers: h;
      start h = Body;
      grammar { Body -> eps; }
      flow { d -h-> d; }
    }
    """)
    assert p.symbols.name_of(p.start_var[p.symbols.id_of("h")]) == "Body"


def test_binary_buffer_counts():
    p = parse_program("""
    program {
      states: d; init: d;
      handlers: h;
      buffer: h:0b101;
      grammar { Xh -> eps; }
    }
    """)
    assert p.init_buffer[p.symbols.id_of("h")] == 5


@pytest.mark.parametrize("name", ["fig3.ap", "wrpc_n1_w1.ap", "wrpc_n2_w1.ap",
                                  "server.ap", "selfpost2.ap", "cancel_flush.ap"])
def test_format_round_trip(name):
    p = load(name)
    text = format_program(p)
    q = parse_program(text)
    nm_p, nm_q = p.symbols.name_of, q.symbols.name_of
    assert [nm_p(s) for s in p.states] == [nm_q(s) for s in q.states]
    assert [nm_p(h) for h in p.handlers] == [nm_q(h) for h in q.handlers]
    assert {(nm_p(a), c) for a, c in p.init_buffer.items()} == \
           {(nm_q(a), c) for a, c in q.init_buffer.items()}
    def prods(prog, nm):
        return {(nm(lhs), tuple(nm(s) for s in rhs))
                for lhs, rhs in prog.grammar.productions}
    assert prods(p, nm_p) == prods(q, nm_q)
    def rules(prog, nm):
        return {(nm(d), nm(a), nm(d2)) for d, a, d2 in prog.transfer.rules}
    assert rules(p, nm_p) == rules(q, nm_q)
