"""Compositional verification with learned assumptions.

Finite machines, L* learning, two-premise assume-guarantee reasoning,
predicate abstraction with counterexample-guided refinement for
infinite-state components, and behavioral interface generation.
"""

from .csm import (TAU, Csm, Dfa, ModelError, Transition, Verdict,
                  bounded_language, check_reachability, complement_property,
                  compose, compose_all, determinize, dfa_equal, minimize,
                  project_csm, project_trace, simulate_trace, trace_csm)
from .agfinite import (AgTask, AgVerdict, assumption_alphabet,
                       build_weakest_assumption, verify_compositional,
                       weakest_environment)
from .aginfinite import InfVerdict, Session, verify_infinite
from .interface_gen import IfaceResult, InterfaceSession, gen_interface
from .lstar import Learner, learn
from .symbolic import (Assign, Havoc, PredicateSet, SymbolicComponent,
                       SymEdge, abstract_may, abstract_must, refine,
                       simulate_symbolic, wp, wp_trace)
from .modelfile import parse_model, print_model

__version__ = "0.1.0"
