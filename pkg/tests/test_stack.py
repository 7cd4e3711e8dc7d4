import numpy as np
import pytest
from hypothesis import given, strategies as st

from spdclayers.errors import InvalidArgument
from spdclayers.materials import constant_index_material, default_material_db
from spdclayers.stack import Layer, Stack, build_ab_stack, scale_stack


def test_paper_layer_counts():
    db = default_material_db()
    s = build_ab_stack(db["GaN"], db["AlN"], 11, 90.14e-9, 74.92e-9)
    names = [ly.material.name for ly in s.layers]
    assert names.count("GaN") == 6 and names.count("AlN") == 5
    assert names[0] == names[-1] == "GaN"

    s = build_ab_stack(db["GaN"], db["AlN"], 101, 106.42e-9, 65.71e-9)
    names = [ly.material.name for ly in s.layers]
    assert names.count("GaN") == 51 and names.count("AlN") == 50


def test_single_layer_stack():
    m = constant_index_material("x", 1.5)
    s = build_ab_stack(m, m, 1, 1e-7, 2e-7)
    assert s.n_layers == 1 and s.layers[0].length == 1e-7


def test_invalid_arguments():
    m = constant_index_material("x", 1.5)
    with pytest.raises(InvalidArgument):
        build_ab_stack(m, m, 10, 1e-7, 1e-7)
    with pytest.raises(InvalidArgument):
        build_ab_stack(m, m, 11, -1e-7, 1e-7)
    with pytest.raises(InvalidArgument):
        Layer(m, 0.0)
    with pytest.raises(InvalidArgument):
        scale_stack(build_ab_stack(m, m, 3, 1e-7, 1e-7), 0.0)


def test_boundaries_derive_from_lengths():
    m = constant_index_material("x", 1.5)
    s = Stack((Layer(m, 1e-7), Layer(m, 3e-7), Layer(m, 2e-7)))
    z = s.boundaries
    assert z[0] == 0.0
    assert np.allclose(np.diff(z), s.lengths)
    assert s.total_length == pytest.approx(6e-7)


def test_scale_identity_and_doubling():
    m = constant_index_material("x", 1.5)
    s = build_ab_stack(m, m, 3, 100e-9, 50e-9)
    assert scale_stack(s, 1.0).lengths == pytest.approx(s.lengths)
    assert scale_stack(s, 2.0).layers[0].length == pytest.approx(200e-9)


@given(st.floats(min_value=1e-3, max_value=1e3))
def test_scale_round_trip(s_factor):
    m = constant_index_material("x", 1.5)
    s = build_ab_stack(m, m, 5, 80e-9, 120e-9)
    back = scale_stack(scale_stack(s, s_factor), 1.0 / s_factor)
    assert np.allclose(back.lengths, s.lengths, rtol=1e-12)


def test_fingerprint_changes_with_geometry():
    db = default_material_db()
    a = build_ab_stack(db["GaN"], db["AlN"], 11, 90.14e-9, 74.92e-9)
    b = build_ab_stack(db["GaN"], db["AlN"], 11, 90.15e-9, 74.92e-9)
    assert a.fingerprint() != b.fingerprint()
    assert a.fingerprint() == build_ab_stack(db["GaN"], db["AlN"], 11,
                                             90.14e-9, 74.92e-9).fingerprint()
