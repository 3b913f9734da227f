from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from greenmeta.dor_req import (DorRequest, code_to_percent_v3, decode_hex,
                               decode_message, encode_hex, encode_message,
                               legacy_percent, percent_to_code_v3,
                               v3_percentages)
from greenmeta.errors import (FieldOutOfRange, MalformedHex, OddPercentage,
                              OutOfRange, Truncated)

WIDTHS = (6, 1, 1, 1, 1, 14, 14, 10)


def bitstring_oracle(values):
    """Pack by writing every field as a binary string and cutting octets."""
    bits = "".join(format(int(v), f"0{w}b") for v, w in zip(values, WIDTHS))
    assert len(bits) == 48
    return bytes(int(bits[i:i + 8], 2) for i in range(0, 48, 8))


requests = st.builds(
    DorRequest,
    ops_reduction=st.integers(0, 63),
    disable_loop_filters=st.booleans(),
    disable_bi_prediction=st.booleans(),
    disable_intra_in_B=st.booleans(),
    disable_fracpel_filtering=st.booleans(),
    pic_width_in_luma_samples=st.integers(0, 16383),
    pic_height_in_luma_samples=st.integers(0, 16383),
    frames_per_second=st.integers(0, 1023),
)

GOLDEN = DorRequest(31, True, False, False, True, 1280, 720, 30)
GOLDEN_BYTES = bytes.fromhex("7E45000B401E")


def test_golden_vector_against_oracle(backend):
    oracle = bitstring_oracle(GOLDEN.fields())
    assert oracle == GOLDEN_BYTES
    assert encode_message(GOLDEN) == oracle
    assert decode_message(GOLDEN_BYTES) == GOLDEN


def test_all_zero_message():
    zero = DorRequest(ops_reduction=0)
    assert encode_message(zero) == bytes(6)
    back = decode_message(bytes(6))
    assert back == zero
    assert back.ops_percent == -62


def test_default_request_is_neutral():
    req = DorRequest()
    assert req.ops_percent == 0
    assert req.to_hex() == "7C0000000000"


@pytest.mark.parametrize("field,value", [
    ("pic_width_in_luma_samples", 16384),
    ("pic_height_in_luma_samples", -1),
    ("frames_per_second", 1024),
    ("ops_reduction", 64),
])
def test_field_out_of_range(field, value):
    req = DorRequest(**{field: value})
    with pytest.raises(FieldOutOfRange) as info:
        encode_message(req)
    assert info.value.value == value


def test_truncated():
    with pytest.raises(Truncated):
        decode_message(bytes(5))
    with pytest.raises(Truncated):
        decode_hex("7E45")


def test_trailing_bytes_ignored():
    assert decode_message(GOLDEN_BYTES + b"\xff") == GOLDEN


def test_hex_io():
    assert encode_hex(GOLDEN) == "7E45000B401E"
    assert decode_hex("7e45000b401e") == GOLDEN
    with pytest.raises(MalformedHex):
        decode_hex("7E45000B401EZZ")
    with pytest.raises(MalformedHex):
        decode_hex("7E45000B401G")


@given(requests)
def test_roundtrip(req):
    assert decode_message(encode_message(req)) == req


@given(st.binary(min_size=6, max_size=6))
def test_bijective_on_48_bits(data):
    assert encode_message(decode_message(data)) == data


@given(requests)
def test_encode_matches_oracle(req):
    assert encode_message(req) == bitstring_oracle(req.fields())


def test_json_roundtrip():
    obj = GOLDEN.to_json()
    assert obj["pic_width_in_luma_samples"] == 1280
    assert obj["disable_loop_filters"] == 1
    assert obj["dec_ops_reduction_percent"] == 0
    assert DorRequest.from_json(obj) == GOLDEN


def test_legacy_percent():
    assert legacy_percent(0) == 0
    assert legacy_percent(64) == Fraction(50)
    assert legacy_percent(-128) == Fraction(-100)
    assert legacy_percent(127) == Fraction(12700, 128)
    with pytest.raises(OutOfRange):
        legacy_percent(128)


@given(st.integers(-127, 127))
def test_legacy_odd_symmetry(x):
    assert legacy_percent(-x) == -legacy_percent(x)


def test_v3_mapping():
    assert code_to_percent_v3(0) == -62
    assert code_to_percent_v3(31) == 0
    assert code_to_percent_v3(63) == 64
    table = v3_percentages()
    assert table == sorted(set(table))
    assert set(table) == {p for p in range(-62, 65) if p % 2 == 0}
    assert len(table) == 64


@pytest.mark.parametrize("pct,code", [(-62, 0), (0, 31), (64, 63), (-36, 13)])
def test_percent_to_code(pct, code):
    assert percent_to_code_v3(pct) == code
    assert code_to_percent_v3(code) == pct


def test_percent_to_code_errors():
    with pytest.raises(OddPercentage):
        percent_to_code_v3(13)
    with pytest.raises(OutOfRange):
        percent_to_code_v3(66)
    with pytest.raises(OutOfRange):
        percent_to_code_v3(-64)
    with pytest.raises(OutOfRange):
        code_to_percent_v3(64)
