"""Verification of finite-data asynchronous programs via Petri nets.

The model lives in :mod:`asyncver.program` (with text format in
:mod:`asyncver.parser` and a flow-graph front end in
:mod:`asyncver.flowgraph`), grammar machinery in :mod:`asyncver.products`,
nets and their algorithms in :mod:`asyncver.petri`, the compilation in
:mod:`asyncver.compile`, decision procedures in :mod:`asyncver.analysis`,
and the reverse net-to-program encodings in :mod:`asyncver.encoders`.
"""

from .analysis import (Budgets, DispatchStep, DispatchWitness, LassoWitness,
                       UndecidableQuery, Verdict, check_boundedness,
                       check_config_reachability, check_fair_starvation,
                       check_fair_termination, check_safety, check_termination,
                       fair_lasso_check, replay_witness)
from .compile import (CompiledNet, Widget, index_net, stitch, stitch_cancel,
                      stitch_starvation, widget, wrap_singleton_root)
from .encoders import EncodedProgram, encode_pn, encode_pn_fairterm
from .flowgraph import FlowGraph, Procedure, compile_flowgraph
from .grammar import Cfg, RegularGrammar, normalize_cfg
from .multiset import Multiset, parikh
from .parser import ParseError, format_program, parse_program
from .petri import (CoverabilityGraph, NotEnabled, OmegaMarking, PetriNet,
                    Transition, UpwardBasis, backward_cover, fire, format_net,
                    karp_miller, net_to_dot, parse_net, to_boolean)
from .products import (CancelProductGrammar, Context, ProductGrammar,
                       bounded_index_parikh, build_cancel_product,
                       build_product, context_language_parikh,
                       successor_buffer_cancel)
from .program import (AsyncProgram, Configuration, Simulator, build_program,
                      enumerate_reachable, step)

__all__ = [name for name in dir() if not name.startswith("_")]
