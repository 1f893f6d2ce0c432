import struct

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nlsist.core import ComplexField1D, InputError, RealGrid, SpectralData
from nlsist.io import (
    MAGIC,
    ParseError,
    decode_field,
    encode_field,
    load_field,
    load_spectral,
    save_field,
    save_spectral,
)

FIELD = ComplexField1D.from_function(RealGrid(-3.0, 2.5, 57), lambda x: np.exp(-x * x + 1j * np.pi * x) / 3)

finite = st.floats(allow_nan=False, allow_infinity=False, width=64)


def test_binary_round_trip_is_bit_identical(tmp_path):
    save_field(tmp_path / "u.bin", FIELD)
    back = load_field(tmp_path / "u.bin")
    assert back.grid == FIELD.grid
    assert back.values.tobytes() == FIELD.values.tobytes()


def test_binary_layout():
    blob = encode_field(FIELD)
    magic, x_min, x_max, n = struct.unpack_from("<8sddQ", blob)
    assert (magic, x_min, x_max, n) == (MAGIC, -3.0, 2.5, 57)
    assert len(blob) == 32 + 16 * 57
    assert np.frombuffer(blob, "<f8", count=2, offset=32).tolist() == [FIELD.values[0].real, FIELD.values[0].imag]


@settings(max_examples=30, deadline=None)
@given(re=st.lists(finite, min_size=2, max_size=20), data=st.data())
def test_csv_and_binary_agree_to_full_precision(tmp_path_factory, re, data):
    im = data.draw(st.lists(finite, min_size=len(re), max_size=len(re)))
    f = ComplexField1D(RealGrid(-1.0, 1.0, len(re)), np.array(re) + 1j * np.array(im))
    d = tmp_path_factory.mktemp("io")
    save_field(d / "u.csv", f)
    save_field(d / "u.bin", f)
    a, b = load_field(d / "u.csv"), load_field(d / "u.bin")
    assert a.values.tobytes() == b.values.tobytes()
    assert a.grid.n_points == b.grid.n_points


def test_length_mismatch_reports_offset():
    blob = encode_field(FIELD)[:-16]
    with pytest.raises(ParseError) as info:
        decode_field(blob)
    assert info.value.offset == len(blob)
    assert "57 points" in str(info.value)


@pytest.mark.parametrize(
    "blob, offset",
    [
        (b"NLSIST", 6),
        (b"BADMAGIC" + bytes(24), 0),
        (struct.pack("<8sddQ", MAGIC, 1.0, 0.0, 2) + bytes(32), 8),
    ],
)
def test_malformed_binary(blob, offset):
    with pytest.raises(ParseError) as info:
        decode_field(blob)
    assert info.value.offset == offset


def test_non_finite_sample_offset():
    vals = FIELD.values.copy()
    blob = bytearray(encode_field(ComplexField1D(FIELD.grid, vals)))
    struct.pack_into("<d", blob, 32 + 16 * 5 + 8, float("nan"))
    with pytest.raises(ParseError) as info:
        decode_field(bytes(blob))
    assert info.value.offset == 32 + 16 * 5


@pytest.mark.parametrize(
    "text",
    ["x,y,z\n0,1,2\n1,1,2\n", "x,re,im\n0,1\n1,1,2\n", "x,re,im\n0,a,2\n1,1,2\n", "x,re,im\n0,1,2\n", "x,re,im\n0,1,2\n1,1,2\n3,1,2\n"],
)
def test_malformed_csv(tmp_path, text):
    (tmp_path / "u.csv").write_text(text)
    with pytest.raises(ParseError):
        load_field(tmp_path / "u.csv")


def test_explicit_format(tmp_path):
    save_field(tmp_path / "u.dat", FIELD, fmt="csv")
    assert (tmp_path / "u.dat").read_text().startswith("x,re,im")
    assert load_field(tmp_path / "u.dat", fmt="csv").values.tobytes() == FIELD.values.tobytes()
    with pytest.raises(InputError):
        save_field(tmp_path / "u.dat", FIELD, fmt="hdf5")


def test_spectral_json_round_trip(tmp_path):
    g = RealGrid.centered(2.0, 0.5)
    data = SpectralData(g, np.linspace(0, 1, 9) * (1 + 0.5j), ((-0.1 + 0.4j, 2.0 - 1.0j),))
    save_spectral(tmp_path / "s.json", data)
    back = load_spectral(tmp_path / "s.json")
    assert back.z_grid == g
    assert back.r_values.tobytes() == data.r_values.tobytes()
    assert back.discrete == data.discrete
    (tmp_path / "bad.json").write_text('{"r_re": []}')
    with pytest.raises(InputError):
        load_spectral(tmp_path / "bad.json")
