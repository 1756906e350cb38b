import random

import pytest

from agverify import formula as F
from agverify.agfinite import weakest_environment
from agverify.csm import (Csm, ModelError, ResourceLimit, dfa_equal,
                          project_trace)
from agverify.interface_gen import (InterfaceSession, gen_interface,
                                    observationally_deterministic)
from agverify.symbolic import PredicateSet, concrete_bounded_language
from agverify.aginfinite import ResourceExhausted
from gen import load_model, random_csm
from ifacecheck import check_safe_permissive

# the interface corpus: components with error states whose weakest safe
# interface is regular (the Accumulator's is a counting language, so it
# falls outside what a DFA interface can express)
IFACE_CASES = [
    ("interfaces.agv", "SessionSender", ("in", "ack"), "initial"),
    ("interfaces.agv", "FaultySender", ("in", "ack"), "initial"),
    ("interfaces.agv", "Resolver", ("a", "b"), None),
    ("symcorpus.agv", "ForkJoin", ("a", "b"), None),
]


def component(model_name, block):
    b = load_model(model_name)[block]
    return b.to_component() if hasattr(b, "to_component") else b.to_csm()


def interface_for(model_name, block, sigma, preds_name, **kw):
    model = load_model(model_name)
    b = model[block]
    c = b.to_component() if hasattr(b, "to_component") else b.to_csm()
    preds = model[preds_name].to_predicates() if preds_name else None
    return c, gen_interface(c, sigma, preds=preds, **kw)


def test_session_sender_interface_orders_in_ack():
    c, res = interface_for(*IFACE_CASES[0])
    # legal use alternates in/ack; a second in mid-session is refused
    assert res.interface.accepts(("in", "ack", "in"))
    assert not res.interface.accepts(("in", "in"))
    assert not res.interface.accepts(("in", "ack", "in", "in"))
    # words the component cannot follow at all are harmless and stay open
    assert res.interface.accepts(("ack",))
    assert res.interface.accepts(("ack", "in", "in"))
    assert res.interface.restricted_csm().n_states == 3


def test_faulty_sender_accepts_everything_after_refinement():
    c, res = interface_for(*IFACE_CASES[1])
    assert res.stats["refinements"] >= 1
    # the invalid send is unreachable, so no environment word errs
    for w in [(), ("in",), ("in", "ack"), ("in", "ack", "in")]:
        assert res.interface.accepts(w)
    assert res.interface.restricted_csm().n_states == 1


def test_resolver_needs_determinization_but_stays_safe():
    c, res = interface_for(*IFACE_CASES[2])
    assert res.stats["determinization_invoked"]
    # 'a b' can reach both a safe state and the error: it must be blocked,
    # and must not be misreported as missing permissive behavior
    assert not res.interface.accepts(("a", "b"))
    assert res.interface.accepts(("a",))


def test_interfaces_safe_and_permissive_against_oracle():
    for model_name, block, sigma, preds_name in IFACE_CASES:
        c, res = interface_for(model_name, block, sigma, preds_name)
        check_safe_permissive(c, res.interface, sigma, depth=6)




def test_finite_interface_equals_weakest_environment():
    rng = random.Random(53)
    for i in range(20):
        m = random_csm(rng, max_states=4, alphabet=("a", "b", "c"))
        errs = {rng.randrange(m.n_states)}
        m = Csm(m.n_states, m.alphabet, m.transitions, m.initial, errs)
        sigma = frozenset(rng.sample(sorted(m.alphabet),
                                     rng.randint(1, len(m.alphabet))))
        try:
            res = gen_interface(m, sigma)
        except (ResourceExhausted, ResourceLimit):
            continue
        aw = weakest_environment(m, sigma)
        eq, word = dfa_equal(res.interface, aw)
        assert eq, (i, word)


def test_obs_det_components_skip_determinization():
    # FaultySender's refined must abstraction stays deterministic
    c, res = interface_for(*IFACE_CASES[1])
    assert not res.stats["determinization_invoked"]
    # an observationally deterministic finite component with an error state
    m = Csm(3, {"a", "b"}, [(0, "a", 1), (1, "b", 2), (1, "a", 1)],
            error_states={2})
    res = gen_interface(m, ("a", "b"))
    assert not res.stats["determinization_invoked"]
    assert res.interface.accepts(("a", "a"))
    assert not res.interface.accepts(("a", "b"))
    # while the Fig. 6 style internal choice does require it
    c, res = interface_for(*IFACE_CASES[2])
    assert res.stats["determinization_invoked"]


def test_observationally_deterministic():
    det = Csm(2, {"a"}, [(0, "a", 1)])
    assert observationally_deterministic(det)
    nondet = Csm(3, {"a"}, [(0, "a", 1), (0, "a", 2)])
    assert not observationally_deterministic(nondet)
    # nondeterminism hidden behind tau
    hidden = Csm(4, {"a"}, [(0, "tau", 1), (0, "a", 2), (1, "a", 3)])
    assert not observationally_deterministic(hidden)


def test_sigma_must_be_in_alphabet():
    m = Csm(1, {"a"}, [])
    with pytest.raises(ModelError):
        InterfaceSession(m, {"z"})


def test_subset_state_cap():
    model = load_model("interfaces.agv")
    c = model["Resolver"].to_csm()
    with pytest.raises(ResourceLimit):
        gen_interface(c, ("a", "b"), max_subset_states=1)
