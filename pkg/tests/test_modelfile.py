from pathlib import Path

import pytest

from agverify.csm import Csm, ModelError
from agverify.modelfile import (CsmBlock, ParseError, csm_block_of,
                                parse_model, print_model)
from gen import MODEL_DIR, load_model

BUNDLED = sorted(p.name for p in Path(MODEL_DIR).glob("*.agv"))


def test_bundled_models_present():
    assert {"finprotocol.agv", "finprotocol_bad.agv", "infprotocol.agv",
            "symcorpus.agv", "interfaces.agv"} <= set(BUNDLED)


@pytest.mark.parametrize("name", BUNDLED)
def test_print_parse_round_trip(name):
    model = load_model(name)
    text = print_model(model)
    again = parse_model(text)
    assert again == model
    # printing is a fixpoint once the comments are gone
    assert print_model(again) == text


@pytest.mark.parametrize("name", BUNDLED)
def test_blocks_materialize(name):
    model = load_model(name)
    for b in model.blocks:
        if hasattr(b, "to_component"):
            b.to_component()
        elif hasattr(b, "to_predicates"):
            assert len(b.to_predicates()) >= 1
        else:
            m = b.to_csm()
            assert m.n_states == len(b.states)


def test_lookup():
    model = load_model("finprotocol.agv")
    assert "Sender" in model
    assert "Nope" not in model
    with pytest.raises(KeyError):
        model["Nope"]
    assert set(model.names()) >= {"Sender", "Receiver", "Order"}


def test_parse_error_reports_position():
    text = "csm M {\n  alphabet { a }\n  init s0\n}"
    with pytest.raises(ParseError) as exc:
        parse_model(text)
    e = exc.value
    assert e.line is not None and e.col is not None
    assert "line %d, column %d:" % (e.line, e.col) in str(e)


def test_unknown_block_kind():
    with pytest.raises(ParseError, match="unknown block kind"):
        parse_model("machine M { }")


def test_duplicate_block_name():
    text = "csm M { alphabet { a } init s; s -a-> s; }" * 2
    with pytest.raises(ParseError, match="duplicate block name"):
        parse_model(text)


def test_block_needs_alphabet_and_init():
    with pytest.raises(ParseError, match="alphabet"):
        parse_model("csm M { init s; }")


def test_nondeterministic_property_rejected():
    text = """
    property P {
      alphabet { a }
      init p0;
      p0 -a-> p0;
      p0 -a-> p1;
    }
    """
    with pytest.raises(ModelError, match="deterministic"):
        parse_model(text)["P"].to_csm()


def test_tau_allowed_in_csm_but_not_property():
    text = """
    csm M {
      alphabet { a }
      init s0;
      s0 -tau-> s1;
      s1 -a-> s0;
    }
    """
    m = parse_model(text)["M"].to_csm()
    assert not m.is_deterministic()
    prop = text.replace("csm M", "property P")
    with pytest.raises(ModelError):
        parse_model(prop)["P"].to_csm()


def test_symbolic_guard_and_updates_survive_round_trip():
    model = load_model("infprotocol.agv")
    sender = model["Sender"]
    text = print_model(model)
    sender2 = parse_model(text)["Sender"]
    assert sender2 == sender
    c = sender2.to_component()
    assert "x" in c.init and c.modes["x"] == "nat"


def test_csm_block_of_reparses_to_same_language():
    m = Csm(3, ("a", "b"), [(0, "a", 1), (1, "b", 2), (2, "a", 0)],
            0, {2}, ("start", "mid", "bad"))
    block = csm_block_of(m, "Learned")
    assert isinstance(block, CsmBlock)
    again = parse_model(_wrap(block))["Learned"].to_csm()
    assert again.n_states == m.n_states
    assert again.error_states == {2}
    assert [t.label for t in again.transitions] == \
        [t.label for t in m.transitions]


def test_csm_block_of_sanitizes_state_names():
    # determinized machines carry set-like names; they must print legally
    m = Csm(2, ("a",), [(0, "a", 1)], 0, set(), ("{q0,q1}", "{q1}"))
    block = csm_block_of(m, "Det")
    reparsed = parse_model(_wrap(block))["Det"].to_csm()
    assert reparsed.n_states == 2


def test_property_block_kind_round_trip():
    model = load_model("finprotocol.agv")
    order = model["Order"]
    assert order.kind == "property"
    assert "property Order" in print_model(model)
    m = order.to_csm()
    assert m.is_deterministic()


def _wrap(block):
    from agverify.modelfile import ModelFile
    return print_model(ModelFile((block,)))


def test_preds_block_parses_formulas():
    preds = load_model("infprotocol.agv")["initial"].to_predicates()
    texts = {str(f) for f in preds}
    assert any("x" in t for t in texts)
    assert len(preds) == 2


def test_bad_guard_formula_reports_parse_error():
    text = """
    symbolic S {
      alphabet { a }
      var x: nat = 0;
      init l0;
      l0 -a-> l0 [x ** 2];
    }
    """
    with pytest.raises(ParseError):
        parse_model(text)
