import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from spintomo.formats import (
    FormatError,
    axes_from_json,
    axes_to_json,
    decode_float,
    density_from_json,
    density_to_json,
    dumps,
    encode_float,
    record_from_json,
    record_to_json,
    write_csv,
)
from spintomo.measurement import AxisSet
from spintomo.reconstruct import MeasurementRecord, random_density_matrix

alphas = st.floats(0, 2 * math.pi, exclude_max=True, allow_nan=False)
betas = st.floats(0, math.pi, allow_nan=False)


@st.composite
def axis_sets(draw):
    d = draw(st.integers(2, 8))
    pairs = draw(st.lists(st.tuples(alphas, betas), min_size=1, max_size=12))
    return AxisSet(d, pairs)


@st.composite
def records(draw):
    axes = draw(axis_sets())
    shots = draw(st.integers(1, 10 ** 6))
    rows = []
    for _ in axes:
        cuts = sorted(draw(st.lists(st.integers(0, shots), min_size=axes.dim.d - 1, max_size=axes.dim.d - 1)))
        edges = [0] + cuts + [shots]
        rows.append(np.diff(edges))
    return MeasurementRecord(axes, shots, np.array(rows))


def _through_text(obj):
    return json.loads(dumps(obj))


@settings(max_examples=200, deadline=None)
@given(axis_sets())
def test_axes_round_trip(axes):
    back = axes_from_json(_through_text(axes_to_json(axes)))
    assert back == axes


@settings(max_examples=100, deadline=None)
@given(records())
def test_record_round_trip(record):
    back = record_from_json(_through_text(record_to_json(record)))
    assert back.axis_set == record.axis_set
    assert back.shots == record.shots
    np.testing.assert_array_equal(back.counts, record.counts)


@settings(max_examples=50, deadline=None)
@given(st.integers(2, 8), st.integers(0, 2 ** 32 - 1))
def test_density_round_trip(d, seed):
    rho = random_density_matrix(d, seed)
    back = density_from_json(_through_text(density_to_json(rho)))
    np.testing.assert_array_equal(back.matrix, rho.matrix)


@given(st.floats(allow_nan=False))
def test_float_encoding_round_trip(x):
    assert decode_float(_through_text({"x": encode_float(x)})["x"]) == x


def test_inf_is_string():
    assert encode_float(math.inf) == "inf"
    assert '"inf"' in dumps({"S_V": encode_float(math.inf)})
    with pytest.raises(FormatError):
        decode_float("infinity")


def test_malformed_inputs():
    with pytest.raises(FormatError):
        axes_from_json({"dim": 3})
    with pytest.raises(FormatError):
        axes_from_json({"dim": 3, "axes": []})
    with pytest.raises(FormatError):
        axes_from_json({"dim": 3, "axes": [[1.0]]})
    with pytest.raises(FormatError):
        record_from_json({"dim": 2, "shots": 5, "axes": [[0, 0]], "counts": [[3, 3]]})
    with pytest.raises(FormatError):
        density_from_json({"dim": 3, "re": [[1]], "im": [[0]]})


def test_reconstruction_file_selects_entry():
    rho = random_density_matrix(3, 1)
    other = random_density_matrix(3, 2)
    obj = {"dim": 3, "raw": density_to_json(other), "mle": density_to_json(rho)}
    np.testing.assert_array_equal(density_from_json(obj).matrix, rho.matrix)
    np.testing.assert_array_equal(density_from_json(obj, "raw").matrix, other.matrix)


def test_csv_writes_full_precision(tmp_path):
    path = tmp_path / "x.csv"
    write_csv(path, ["p", "v"], [(0, 0.1 + 0.2), (1, math.inf)])
    lines = path.read_text().splitlines()
    assert lines == ["p,v", "0,0.30000000000000004", "1,inf"]
