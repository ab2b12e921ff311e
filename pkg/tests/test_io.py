import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from choi_twirl import builtin_design, choi_from_kraus, random_channel
from choi_twirl.io import (
    MalformedInput,
    decode_choi,
    decode_design,
    decode_matrix,
    dumps,
    encode_channel,
    encode_choi,
    encode_design,
    encode_matrix,
)

finite = st.floats(allow_nan=False, allow_infinity=False, width=64)


@settings(max_examples=50, deadline=None)
@given(arrays(np.float64, (2, 3, 3), elements=finite))
def test_matrix_round_trip_is_exact(parts):
    m = parts[0] + 1j * parts[1]
    back = decode_matrix(json.loads(json.dumps(encode_matrix(m))))
    assert np.array_equal(back.view(float), m.view(float))


def test_choi_and_channel_round_trip():
    ch = random_channel(2, 1, 2, rng=0)
    j = choi_from_kraus(ch)
    assert np.array_equal(decode_choi(json.loads(dumps(encode_choi(j)))).matrix, j.matrix)
    from_kraus = decode_choi(json.loads(dumps(encode_channel(ch))))
    assert np.array_equal(from_kraus.matrix, j.matrix)
    wrapped = decode_choi({"choi": encode_choi(j), "config": {}})
    assert np.array_equal(wrapped.matrix, j.matrix)


def test_design_round_trip():
    d = builtin_design("clifford_1q_t2")
    back = decode_design(json.loads(dumps(encode_design(d))))
    assert np.array_equal(back.elements, d.elements) and np.array_equal(back.weights, d.weights)
    sl = builtin_design("sl2c_product")
    back = decode_design(json.loads(dumps(encode_design(sl))))
    assert back.group == "SL" and np.array_equal(back.measure.nodes, sl.measure.nodes)


@pytest.mark.parametrize(
    "payload",
    [
        [],
        {"d": 2, "t_in": 1},
        {"d": 2, "t_in": 1, "t_out": 1},
        {"d": 2, "t_in": 1, "t_out": 1, "matrix": [[1, 0], [0, 1]]},
        {"d": 2, "t_in": 1, "t_out": 1, "kraus": "I"},
        {"d": "two", "t_in": 1, "t_out": 1, "matrix": []},
    ],
)
def test_malformed_payloads(payload):
    with pytest.raises(MalformedInput):
        decode_choi(payload)


def test_dumps_is_sorted_and_rejects_nan():
    assert dumps({"b": 1, "a": 2}) == '{"a": 2, "b": 1}\n'
    with pytest.raises(ValueError):
        dumps({"x": float("nan")})
