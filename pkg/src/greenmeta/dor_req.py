"""Decoder-operations-reduction request (DOR-req) message codec.

The extended request is a fixed 48-bit message. Fields are written in the
order below, each big-endian inside its own width, packed MSB-first with no
padding::

    dec_ops_reduction_req        6   codeword, percentage = 2*code - 62
    disable_loop_filters         1
    disable_bi_prediction        1
    disable_intra_in_B           1
    disable_fracpel_filtering    1
    pic_width_in_luma_samples   14   0 = no change
    pic_height_in_luma_samples  14   0 = no change
    frames_per_second           10   0 = no change

The legacy single-field request is an 8-bit two's-complement value whose
percentage is ``100 * x / 128``.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from fractions import Fraction

from . import kernels
from .errors import (FieldOutOfRange, MalformedHex, OddPercentage, OutOfRange,
                     Truncated)

MESSAGE_BYTES = 6
MESSAGE_BITS = 48

V3_MIN_PERCENT = -62
V3_MAX_PERCENT = 64
V3_CODEWORDS = 64
NEUTRAL_CODE = 31  # codeword for a 0 % change

FIELDS = (
    ("dec_ops_reduction_req", 6),
    ("disable_loop_filters", 1),
    ("disable_bi_prediction", 1),
    ("disable_intra_in_B", 1),
    ("disable_fracpel_filtering", 1),
    ("pic_width_in_luma_samples", 14),
    ("pic_height_in_luma_samples", 14),
    ("frames_per_second", 10),
)
_WIDTHS = tuple(w for _, w in FIELDS)
_ATTRS = ("ops_reduction", "disable_loop_filters", "disable_bi_prediction",
          "disable_intra_in_B", "disable_fracpel_filtering",
          "pic_width_in_luma_samples", "pic_height_in_luma_samples",
          "frames_per_second")


def legacy_percent(x: int) -> Fraction:
    """Percentage change carried by a legacy signed 8-bit request.

    >>> legacy_percent(64)
    Fraction(50, 1)
    """
    if not -128 <= x <= 127:
        raise OutOfRange(f"legacy request {x} is not a signed 8-bit value")
    return Fraction(100 * x, 128)


def code_to_percent_v3(code: int) -> int:
    if not 0 <= code < V3_CODEWORDS:
        raise OutOfRange(f"ops codeword {code} outside [0, 63]")
    return 2 * code - 62


def percent_to_code_v3(percent: int) -> int:
    if percent != int(percent):
        raise OddPercentage(f"{percent}% is not an integer percentage")
    percent = int(percent)
    if not V3_MIN_PERCENT <= percent <= V3_MAX_PERCENT:
        raise OutOfRange(f"{percent}% outside [{V3_MIN_PERCENT}, "
                         f"{V3_MAX_PERCENT}]")
    if percent % 2:
        raise OddPercentage(f"{percent}% is odd; only even steps are coded")
    return (percent + 62) // 2


def v3_percentages() -> list[int]:
    """All percentages representable by the 6-bit codeword, ascending."""
    return [code_to_percent_v3(c) for c in range(V3_CODEWORDS)]


@dataclass(frozen=True)
class DorRequest:
    """One extended DOR-req message.

    ``ops_reduction`` holds the raw 6-bit codeword; use :attr:`ops_percent`
    for the percentage. The defaults form the neutral request (0 % change,
    all tools allowed, no resolution or frame-rate change).
    """

    ops_reduction: int = NEUTRAL_CODE
    disable_loop_filters: bool = False
    disable_bi_prediction: bool = False
    disable_intra_in_B: bool = False
    disable_fracpel_filtering: bool = False
    pic_width_in_luma_samples: int = 0
    pic_height_in_luma_samples: int = 0
    frames_per_second: int = 0

    @property
    def ops_percent(self) -> int:
        return code_to_percent_v3(self.ops_reduction)

    @classmethod
    def from_percent(cls, ops_percent: int = 0, **fields) -> "DorRequest":
        return cls(ops_reduction=percent_to_code_v3(ops_percent), **fields)

    def validate(self) -> "DorRequest":
        for (name, width), attr in zip(FIELDS, _ATTRS):
            value = getattr(self, attr)
            hi = (1 << width) - 1
            if isinstance(value, bool):
                continue
            if not isinstance(value, int) or not 0 <= value <= hi:
                raise FieldOutOfRange(name, value, 0, hi)
        return self

    def fields(self) -> tuple[int, ...]:
        return tuple(int(getattr(self, a)) for a in _ATTRS)

    def to_bytes(self) -> bytes:
        return encode_message(self)

    def to_hex(self) -> str:
        return encode_message(self).hex().upper()

    def to_json(self) -> dict:
        """Field values keyed by syntax-element name, plus the decoded
        percentage under ``dec_ops_reduction_percent``."""
        out = {}
        for (name, width), attr in zip(FIELDS, _ATTRS):
            value = getattr(self, attr)
            out[name] = int(value) if width > 1 else int(bool(value))
        out["dec_ops_reduction_percent"] = self.ops_percent
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "DorRequest":
        kwargs = {}
        for (name, width), attr in zip(FIELDS, _ATTRS):
            if name in obj:
                value = obj[name]
                kwargs[attr] = bool(value) if width == 1 else int(value)
        if "dec_ops_reduction_req" not in obj and \
                "dec_ops_reduction_percent" in obj:
            kwargs["ops_reduction"] = percent_to_code_v3(
                obj["dec_ops_reduction_percent"])
        return cls(**kwargs).validate()

    def replace(self, **changes) -> "DorRequest":
        return dataclasses.replace(self, **changes)


def encode_message(req: DorRequest) -> bytes:
    req.validate()
    word = kernels.pack_bits(req.fields(), _WIDTHS)
    return int(word).to_bytes(MESSAGE_BYTES, "big")


def decode_message(data: bytes) -> DorRequest:
    """Parse the first six bytes of ``data``; trailing bytes are ignored."""
    data = bytes(data)
    if len(data) < MESSAGE_BYTES:
        raise Truncated(f"need {MESSAGE_BYTES} bytes, got {len(data)}")
    word = int.from_bytes(data[:MESSAGE_BYTES], "big")
    (ops, lf, bi, intra, fp, width, height,
     fps) = kernels.unpack_bits(word, _WIDTHS)
    return DorRequest(int(ops), bool(lf), bool(bi), bool(intra), bool(fp),
                      int(width), int(height), int(fps))


def encode_hex(req: DorRequest) -> str:
    return encode_message(req).hex().upper()


def decode_hex(text: str) -> DorRequest:
    text = text.strip()
    if len(text) < 2 * MESSAGE_BYTES:
        raise Truncated(f"expected {2 * MESSAGE_BYTES} hex characters, "
                        f"got {len(text)}")
    if len(text) != 2 * MESSAGE_BYTES:
        raise MalformedHex(f"expected {2 * MESSAGE_BYTES} hex characters, "
                           f"got {len(text)}")
    try:
        data = bytes.fromhex(text)
    except ValueError as exc:
        raise MalformedHex(f"not a hex string: {text!r}") from exc
    return decode_message(data)
