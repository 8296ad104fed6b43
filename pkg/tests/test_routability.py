import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cellgen.errors import ModelFormatError
from cellgen.netlist import Device, Pin, make_netlist
from cellgen.placement import initial_rep
from cellgen.routability import (FEATURE_DIM, LABELS, extract_features,
                                 predict, random_routability_weights,
                                 zero_routability_weights)
from cellgen.tech import default_tech
from tests.oracles import conv1d_loops
from tests.test_placement import netlist_and_rep, rep_for


def test_single_slot_cell_single_vector(tech):
    nl = make_netlist("pair", [Device("P", "PMOS", 1, "A", "S", "D"),
                               Device("N", "NMOS", 1, "A", "S", "D")], [])
    feats = extract_features(initial_rep(nl, n_slots=1), nl, tech)
    assert feats.shape == (1, FEATURE_DIM)


def test_terminal_degrees_counted(tech):
    # PMOS touching three single-attachment nets reports (1, 1, 1)
    nl = make_netlist("deg", [Device("P", "PMOS", 1, "A", "B", "C"),
                              Device("N", "NMOS", 1, "D", "E", "F")], [])
    rep = rep_for(nl, [0, None], [None, 0], pins=[None, None])
    feats = extract_features(rep, nl, tech)
    assert feats[0, 0:3].tolist() == [1.0, 1.0, 1.0]
    assert feats[0, 3:6].tolist() == [0.0, 0.0, 0.0]  # no NMOS in slot 0
    assert feats[0, 10] == 1.0  # gap flag: NMOS side empty


def test_pins_nearby_window(tech):
    nl = make_netlist("pn", [Device("P", "PMOS", 1, "A", "S", "D"),
                             Device("N", "NMOS", 1, "A", "S", "D")],
                      [Pin("A", "A"), Pin("S", "S")])
    rep = rep_for(nl, [0, None], [0, None], pins=[0, 1])
    feats = extract_features(rep, nl, tech)
    # both pins clamp to column 0: within +-1 of both slots' columns
    assert feats[0, 6] == 2.0


def test_features_length_equals_slots(tech):
    @given(netlist_and_rep())
    @settings(max_examples=30, deadline=None)
    def inner(case):
        nl, rep = case
        assert extract_features(rep, nl, tech).shape == (rep.n_slots, FEATURE_DIM)
    inner()


def test_zero_weights_uniform_prediction(inv, tech):
    feats = extract_features(initial_rep(inv), inv, tech)
    label, probs = predict(feats, zero_routability_weights())
    assert label == "routable"  # tie resolves to the first label
    assert probs == pytest.approx(np.full(3, 1 / 3))


def test_bias_steers_class(inv, tech):
    tensors = zero_routability_weights()
    tensors["dense.bias"] = np.array([0.0, 5.0, 0.0])
    feats = extract_features(initial_rep(inv), inv, tech)
    label, probs = predict(feats, tensors)
    assert label == "routable_with_drcs"
    assert probs[1] > 0.9


def test_probabilities_sum_to_one(inv, tech):
    rng = np.random.default_rng(3)
    tensors = random_routability_weights(rng)
    feats = extract_features(initial_rep(inv), inv, tech)
    _label, probs = predict(feats, tensors)
    assert probs.sum() == pytest.approx(1.0, abs=1e-6)


def test_predict_deterministic(inv, tech):
    rng = np.random.default_rng(5)
    tensors = random_routability_weights(rng)
    feats = extract_features(initial_rep(inv), inv, tech)
    assert predict(feats, tensors)[1] == pytest.approx(predict(feats, tensors)[1])


def test_conv_matches_direct_loops():
    rng = np.random.default_rng(9)
    tensors = random_routability_weights(rng)
    x = rng.normal(size=(FEATURE_DIM, 7))
    from cellgen.routability import _conv1d_same
    mine = _conv1d_same(x, tensors["conv1.weight"], tensors["conv1.bias"])
    ref = conv1d_loops(x, tensors["conv1.weight"], tensors["conv1.bias"])
    assert mine == pytest.approx(ref, abs=1e-9)


def test_feature_shape_validated(tech):
    with pytest.raises(ModelFormatError):
        predict(np.zeros((3, 5)), zero_routability_weights())


def test_features_finite_nonnegative(tech):
    @given(netlist_and_rep())
    @settings(max_examples=30, deadline=None)
    def inner(case):
        nl, rep = case
        feats = extract_features(rep, nl, tech)
        assert np.isfinite(feats).all() and (feats >= 0).all()
    inner()
