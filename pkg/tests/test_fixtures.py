"""Bundled layout integrity: nominal anchors and regeneration determinism."""

import json

import numpy as np

from agv_path_kit.layouts import bundled_layout_text
from agv_path_kit.layouts._generate import build_documents

from conftest import (NOMINAL_EXP_LEFT, NOMINAL_EXP_RIGHT, NOMINAL_INITIAL_LEFT,
                      NOMINAL_INITIAL_RIGHT, NOMINAL_SMOOTHED_RIGHT)


def control_points(doc_text, index):
    data = json.loads(doc_text)
    return np.array(data["segments"][index]["control_points_m"])


def test_initial_layout_is_verbatim_nominal():
    text = bundled_layout_text("two_wheel_g1")
    assert np.array_equal(control_points(text, 0), NOMINAL_INITIAL_LEFT)
    assert np.array_equal(control_points(text, 1), NOMINAL_INITIAL_RIGHT)


def test_smoothed_layout_stays_within_print_precision():
    text = bundled_layout_text("two_wheel_smoothed")
    assert np.array_equal(control_points(text, 0), NOMINAL_INITIAL_LEFT)
    right = control_points(text, 1)
    # junction point and the far tail are nominal verbatim
    assert np.array_equal(right[0], NOMINAL_SMOOTHED_RIGHT[0])
    assert np.array_equal(right[4:], NOMINAL_SMOOTHED_RIGHT[4:])
    # the three rebuilt points differ only by the nominal rounding
    assert np.abs(right[1:4] - NOMINAL_SMOOTHED_RIGHT[1:4]).max() < 2.5e-3


def test_exponential_layout_anchoring():
    text = bundled_layout_text("six_wheel_exponential")
    left = control_points(text, 0)
    right = control_points(text, 1)
    assert np.array_equal(left[:4], NOMINAL_EXP_LEFT[:4])
    assert np.array_equal(left[6], NOMINAL_EXP_LEFT[6])
    assert np.abs(left[4:6] - NOMINAL_EXP_LEFT[4:6]).max() < 5e-3
    assert np.array_equal(right[0], NOMINAL_EXP_RIGHT[0])
    assert np.array_equal(right[4:], NOMINAL_EXP_RIGHT[4:])
    assert np.abs(right[1:3] - NOMINAL_EXP_RIGHT[1:3]).max() < 5e-3
    # the fourth point is rebuilt from the third-derivative matching relation
    # rather than kept nominal; see the generator docstring.
    assert np.abs(right[3] - NOMINAL_EXP_RIGHT[3]).max() < 0.6


def test_generator_reproduces_shipped_files():
    for name, doc in build_documents().items():
        shipped = json.loads(bundled_layout_text(name))
        assert shipped == doc
