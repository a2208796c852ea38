import logging
import math

import numpy as np
import pytest
from conftest import random_channel, random_kraus_map
from hypothesis import given, settings
from hypothesis import strategies as st

from hqmm.services.discrimination import (
    ChannelPair,
    ChannelPairError,
    choi_difference_trace_norm,
    diamond_bounds,
    success_probability_bracket,
)
from hqmm.services.quantum_core import kraus_map
from hqmm.services.qubit_model import paper_kraus_pair

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)


def paper_pair(theta: float) -> ChannelPair:
    k_f, k_g = paper_kraus_pair(theta)
    return ChannelPair(kraus_map([k_f]), kraus_map([k_g]))


def test_quarter_turn_brackets():
    pair = paper_pair(math.pi / 2)
    bracket = diamond_bounds(pair)
    assert bracket.choi_trace_norm == pytest.approx(math.sqrt(3), abs=1e-10)
    assert bracket.lower == pytest.approx(math.sqrt(3) / 2, abs=1e-10)
    assert bracket.upper == pytest.approx(math.sqrt(3), abs=1e-10)
    assert bracket.d_in == 2
    success = success_probability_bracket(pair)
    assert success.lower == pytest.approx(0.5 + math.sqrt(3) / 8, abs=1e-10)
    assert success.upper == pytest.approx(0.5 + math.sqrt(3) / 4, abs=1e-10)
    assert success.advisory


def test_advisory_is_logged(caplog):
    with caplog.at_level(logging.WARNING, logger="hqmm"):
        success_probability_bracket(paper_pair(1.0))
    assert "not trace-preserving" in caplog.text


def test_identity_against_bit_flip():
    pair = ChannelPair(kraus_map([np.eye(2)]), kraus_map([SIGMA_X]))
    bracket = diamond_bounds(pair)
    # orthogonal Choi vectors of squared norm 2
    assert bracket.choi_trace_norm == pytest.approx(4.0, abs=1e-12)
    assert bracket.lower == pytest.approx(2.0, abs=1e-12)
    success = success_probability_bracket(pair)
    # 1/2 + 2/4 saturates the clamp up to rounding in the trace norm
    assert success.lower == pytest.approx(1.0, abs=1e-12)
    assert success.upper == pytest.approx(1.0, abs=1e-12)
    assert not success.advisory


def test_identical_channels(rng):
    m = random_channel(rng, 2, 3, 2)
    bracket = diamond_bounds(ChannelPair(m, m))
    assert bracket.upper == pytest.approx(0.0, abs=1e-12)
    success = success_probability_bracket(ChannelPair(m, m))
    assert (success.lower, success.upper) == (0.5, 0.5)
    assert not success.advisory


def test_shape_mismatch():
    with pytest.raises(ChannelPairError, match="maps differ in shape"):
        ChannelPair(kraus_map([np.eye(2)]), kraus_map([np.ones((3, 2))]))


def test_symmetry(rng):
    a, b = random_kraus_map(rng, 2, 2, 2), random_kraus_map(rng, 2, 2, 3)
    assert choi_difference_trace_norm(ChannelPair(a, b)) == pytest.approx(
        choi_difference_trace_norm(ChannelPair(b, a)), abs=1e-10
    )


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), d_in=st.integers(1, 3), d_out=st.integers(1, 3))
def test_choi_distance_triangle_inequality(seed, d_in, d_out):
    rng = np.random.default_rng(seed)
    a, b, c = (random_channel(rng, d_in, d_out, 3) for _ in range(3))
    ab = choi_difference_trace_norm(ChannelPair(a, b))
    bc = choi_difference_trace_norm(ChannelPair(b, c))
    ac = choi_difference_trace_norm(ChannelPair(a, c))
    assert ac <= ab + bc + 1e-10


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_brackets_are_ordered(seed):
    rng = np.random.default_rng(seed)
    pair = ChannelPair(random_channel(rng, 2, 2, 2), random_channel(rng, 2, 2, 1))
    bracket = diamond_bounds(pair)
    success = success_probability_bracket(pair)
    assert 0.0 <= bracket.lower <= bracket.upper <= 2.0 * pair.d_in + 1e-10
    assert 0.5 <= success.lower <= success.upper <= 1.0


def test_trace_norm_vanishes_at_identity_rotation():
    assert choi_difference_trace_norm(paper_pair(0.0)) == pytest.approx(0.0, abs=1e-12)
