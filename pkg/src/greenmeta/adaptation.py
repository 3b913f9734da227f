"""Receiver-side request logic.

Two concerns live here: the algebra of successive operations-reduction
requests (each request scales the remaining fraction of decoder operations
by ``1 + c/100``), and the planner that turns a power-saving target into a
concrete :class:`~greenmeta.dor_req.DorRequest` using a calibrated
:class:`DeviceProfile`.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional

from .dor_req import DorRequest, v3_percentages
from .errors import EmptyProfile, OutOfRange, ProfileFormatError, Unreachable

OPS_REDUCTION = "ops_reduction"
DISABLE_LOOP_FILTERS = "disable_loop_filters"
DISABLE_BI_PREDICTION = "disable_bi_prediction"
DISABLE_INTRA_IN_B = "disable_intra_in_B"
DISABLE_FRACPEL = "disable_fracpel"
SET_RESOLUTION = "set_resolution"
SET_FPS = "set_fps"

ACTION_KINDS = (OPS_REDUCTION, DISABLE_LOOP_FILTERS, DISABLE_BI_PREDICTION,
                DISABLE_INTRA_IN_B, DISABLE_FRACPEL, SET_RESOLUTION, SET_FPS)
LOOP_FILTERS = ("dbf", "sao", "alf")

# ranges for the percentage c of a single request
V3_RANGE = (-62, 64)
LEGACY_RANGE = (-100, 100)


@dataclass(frozen=True)
class AdaptationAction:
    """One receiver request, corresponding to a single syntax element.

    ``loop_filter`` optionally names which loop filter a measurement refers
    to; the wire message has one bit for all loop filters and the encoder
    decides which ones to switch off.
    """

    kind: str
    percent: Optional[int] = None
    loop_filter: Optional[str] = None
    width: Optional[int] = None
    height: Optional[int] = None
    fps: Optional[int] = None

    def __post_init__(self):
        if self.kind not in ACTION_KINDS:
            raise ProfileFormatError(f"unknown action kind {self.kind!r}")
        if self.kind == OPS_REDUCTION:
            if self.percent is None:
                raise ProfileFormatError("ops_reduction needs a percent")
            DorRequest.from_percent(self.percent)
        if self.kind == DISABLE_LOOP_FILTERS and self.loop_filter is not None \
                and self.loop_filter not in LOOP_FILTERS:
            raise ProfileFormatError(f"unknown loop filter {self.loop_filter!r}")
        if self.kind == SET_RESOLUTION:
            if not self.width or not self.height:
                raise ProfileFormatError("set_resolution needs width and height")
        if self.kind == SET_FPS and not self.fps:
            raise ProfileFormatError("set_fps needs a positive fps")
        self.to_request()

    @classmethod
    def ops_reduction(cls, percent: int) -> "AdaptationAction":
        return cls(OPS_REDUCTION, percent=percent)

    @classmethod
    def set_resolution(cls, width: int, height: int) -> "AdaptationAction":
        return cls(SET_RESOLUTION, width=width, height=height)

    @classmethod
    def set_fps(cls, fps: int) -> "AdaptationAction":
        return cls(SET_FPS, fps=fps)

    def to_request(self) -> DorRequest:
        """Render as a message; fields this action does not touch keep
        their neutral values."""
        if self.kind == OPS_REDUCTION:
            return DorRequest.from_percent(self.percent)
        if self.kind == DISABLE_LOOP_FILTERS:
            return DorRequest(disable_loop_filters=True)
        if self.kind == DISABLE_BI_PREDICTION:
            return DorRequest(disable_bi_prediction=True)
        if self.kind == DISABLE_INTRA_IN_B:
            return DorRequest(disable_intra_in_B=True)
        if self.kind == DISABLE_FRACPEL:
            return DorRequest(disable_fracpel_filtering=True)
        if self.kind == SET_RESOLUTION:
            return DorRequest(pic_width_in_luma_samples=self.width,
                              pic_height_in_luma_samples=self.height).validate()
        return DorRequest(frames_per_second=self.fps).validate()

    def to_json(self) -> dict:
        out = {"kind": self.kind}
        for name in ("percent", "loop_filter", "width", "height", "fps"):
            value = getattr(self, name)
            if value is not None:
                out[name] = value
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "AdaptationAction":
        try:
            return cls(**obj)
        except TypeError as exc:
            raise ProfileFormatError(f"bad action {obj!r}: {exc}") from None

    def describe(self) -> str:
        if self.kind == OPS_REDUCTION:
            return f"ops_reduction {self.percent:+d}%"
        if self.kind == DISABLE_LOOP_FILTERS and self.loop_filter:
            return f"disable_loop_filters ({self.loop_filter})"
        if self.kind == SET_RESOLUTION:
            return f"set_resolution {self.width}x{self.height}"
        if self.kind == SET_FPS:
            return f"set_fps {self.fps}"
        return self.kind


_RESOLUTIONS = {"2160p": (3840, 2160), "1080p": (1920, 1080),
                "720p": (1280, 720), "540p": (960, 540), "360p": (640, 360)}
_FPS_DIVISORS = {"half": 2, "third": 3, "quarter": 4}


def parse_action_label(label: str, *, source_fps: int = 60,
                       derdo_percent: int = -36) -> AdaptationAction:
    """Map a measurement-table row label to an action.

    Understands the row names used in published savings tables ("no DBF",
    "Res: 540p", "half fps", "derdo", ...) as well as the canonical forms
    ``kind`` / ``kind:arg`` (e.g. ``set_resolution:640x360``,
    ``set_fps:30``, ``ops_reduction:-36``, ``disable_loop_filters:sao``).
    """
    text = label.strip()
    low = text.lower()
    if ":" in text and text.split(":", 1)[0].strip() in ACTION_KINDS:
        kind, arg = (s.strip() for s in text.split(":", 1))
        if kind == OPS_REDUCTION:
            return AdaptationAction.ops_reduction(int(arg))
        if kind == DISABLE_LOOP_FILTERS:
            return AdaptationAction(kind, loop_filter=arg.lower() or None)
        if kind == SET_RESOLUTION:
            w, h = arg.lower().split("x")
            return AdaptationAction.set_resolution(int(w), int(h))
        if kind == SET_FPS:
            return AdaptationAction.set_fps(int(arg))
        return AdaptationAction(kind)
    if low in ACTION_KINDS or text in ACTION_KINDS:
        return AdaptationAction(text if text in ACTION_KINDS else low)
    if low == "derdo":
        return AdaptationAction.ops_reduction(derdo_percent)
    if low in ("no dbf", "dbf"):
        return AdaptationAction(DISABLE_LOOP_FILTERS, loop_filter="dbf")
    if low in ("no sao", "sao"):
        return AdaptationAction(DISABLE_LOOP_FILTERS, loop_filter="sao")
    if low in ("no alf", "alf"):
        return AdaptationAction(DISABLE_LOOP_FILTERS, loop_filter="alf")
    if low in ("no bi", "bi-pred.", "bi-pred", "no bi-pred"):
        return AdaptationAction(DISABLE_BI_PREDICTION)
    if low in ("no intra in b", "no b-intra"):
        return AdaptationAction(DISABLE_INTRA_IN_B)
    if low in ("no fracpel", "fracpel"):
        return AdaptationAction(DISABLE_FRACPEL)
    if low.startswith("res"):
        key = low.split(":", 1)[-1].strip()
        if key in _RESOLUTIONS:
            return AdaptationAction.set_resolution(*_RESOLUTIONS[key])
    if low.endswith("fps"):
        head = low[:-3].strip()
        if head in _FPS_DIVISORS:
            return AdaptationAction.set_fps(source_fps // _FPS_DIVISORS[head])
        if head.isdigit():
            return AdaptationAction.set_fps(int(head))
    raise ProfileFormatError(f"cannot interpret action label {label!r}")


@dataclass(frozen=True)
class SavingsEntry:
    action: AdaptationAction
    savings_pct: float
    bdr_pct: Optional[float] = None  # None: BD-rate not available
    label: str = ""

    def __post_init__(self):
        if not -100.0 < self.savings_pct < 100.0:
            raise ProfileFormatError(
                f"savings {self.savings_pct}% outside (-100, 100)")

    def to_json(self) -> dict:
        out = {"action": self.action.to_json(),
               "savings_pct": self.savings_pct, "bdr_pct": self.bdr_pct}
        if self.label:
            out["label"] = self.label
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "SavingsEntry":
        try:
            bdr = obj.get("bdr_pct")
            return cls(AdaptationAction.from_json(obj["action"]),
                       float(obj["savings_pct"]),
                       None if bdr is None else float(bdr),
                       obj.get("label", ""))
        except KeyError as exc:
            raise ProfileFormatError(f"savings entry lacks {exc}") from None


@dataclass(frozen=True)
class DeviceProfile:
    decoder_backend: str
    content_class: str
    entries: tuple[SavingsEntry, ...] = field(default=())
    decoder: str = ""

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(self.entries))
        if self.decoder_backend not in ("software", "hardware"):
            raise ProfileFormatError(
                f"decoder_backend must be software or hardware, "
                f"not {self.decoder_backend!r}")
        seen = set()
        for e in self.entries:
            if e.action in seen:
                raise ProfileFormatError(
                    f"duplicate entry for {e.action.describe()}")
            seen.add(e.action)

    def lookup(self, action: AdaptationAction) -> Optional[SavingsEntry]:
        for e in self.entries:
            if e.action == action:
                return e
        return None

    def to_json(self) -> dict:
        out = {"decoder_backend": self.decoder_backend,
               "content_class": self.content_class,
               "entries": [e.to_json() for e in self.entries]}
        if self.decoder:
            out["decoder"] = self.decoder
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "DeviceProfile":
        try:
            return cls(obj["decoder_backend"], obj["content_class"],
                       tuple(SavingsEntry.from_json(e)
                             for e in obj.get("entries", ())),
                       obj.get("decoder", ""))
        except KeyError as exc:
            raise ProfileFormatError(f"profile lacks {exc}") from None


@dataclass(frozen=True)
class PowerTarget:
    required_savings: float
    max_bdr: Optional[float] = None  # None: no bound on BD-rate

    def __post_init__(self):
        if not 0.0 < self.required_savings < 100.0:
            raise OutOfRange(
                f"required savings {self.required_savings}% outside (0, 100)")


@dataclass(frozen=True)
class Plan:
    request: DorRequest
    entry: SavingsEntry
    shortfall: bool

    def to_json(self) -> dict:
        return {"action": self.entry.action.to_json(),
                "label": self.entry.label or self.entry.action.describe(),
                "savings_pct": self.entry.savings_pct,
                "bdr_pct": self.entry.bdr_pct,
                "shortfall": self.shortfall,
                "request_hex": self.request.to_hex(),
                "request": self.request.to_json()}


def _exact(value) -> Fraction:
    if isinstance(value, float):
        if not math.isfinite(value):
            raise OutOfRange(f"{value} is not finite")
        return Fraction(repr(value))
    return Fraction(value)


def _check_percent(c, mode: str) -> Fraction:
    if mode == "v3":
        lo, hi = V3_RANGE
    elif mode == "legacy":
        lo, hi = LEGACY_RANGE
    else:
        raise ValueError(f"mode must be 'v3' or 'legacy', not {mode!r}")
    c = _exact(c)
    if not lo <= c <= hi:
        raise OutOfRange(f"{float(c)}% outside the {mode} range [{lo}, {hi}]")
    return c


def cumulative_ops_factor(requests: Iterable, mode: str = "v3") -> float:
    """Remaining fraction of decoder operations after successive requests.

    Each percentage ``c`` scales the remaining operations by ``1 + c/100``;
    the product is taken in exact rational arithmetic.

    >>> cumulative_ops_factor([-50, 100], mode="legacy")
    1.0
    """
    factor = Fraction(1)
    for c in requests:
        factor *= 1 + _check_percent(c, mode) / 100
    return float(factor)


def single_request_invertible(c) -> bool:
    """True when one v3 codeword undoes a request for ``c`` percent exactly."""
    c = _check_percent(c, "v3")
    return any((100 + c) * (100 + inv) == 10000 for inv in v3_percentages())


def _restoration_order(seq: list[int], f: Fraction, hi: Fraction) -> list[int]:
    """Largest step first unless that overshoots on the way; then the
    reductions go first, which keeps every prefix below the final value."""
    seq = sorted(seq, reverse=True)
    p = f
    for c in seq:
        p *= Fraction(100 + c, 100)
        if p > hi:
            return [c for c in seq if c < 0] + [c for c in seq if c > 0]
    return seq


def restoration_plan(current_factor: float, tolerance: float,
                     max_length: int = 4) -> list[int]:
    """Shortest run of v3 requests that brings ``current_factor`` to within
    ``tolerance`` of 1.

    The cumulative factor never exceeds ``1 + tolerance`` after any request.
    Among the shortest solutions the one with the largest steps (compared
    largest first) is returned, ordered largest step first where that does
    not overshoot. Raises :class:`Unreachable`, carrying the closest
    non-overshooting sequence, if nothing of length ``<= max_length`` lands
    in the window.
    """
    f = _exact(current_factor)
    tol = _exact(tolerance)
    if not 0 < f <= 1:
        raise OutOfRange(f"current factor {current_factor} outside (0, 1]")
    if tol <= 0:
        raise OutOfRange("tolerance must be positive")
    lo, hi = 1 - tol, 1 + tol
    if f >= lo:
        return []

    steps = [c for c in reversed(v3_percentages()) if c != 0]  # 64 .. -62
    best_residual, best_seq = abs(1 - f), []

    for length in range(1, max_length + 1):
        scale = Fraction(100) ** length
        # every multiset is visited once as a non-increasing prefix plus a
        # final step no larger than the prefix minimum
        for prefix in itertools.combinations_with_replacement(steps,
                                                              length - 1):
            n = 1
            for c in prefix:
                n *= 100 + c
            base = f * n / scale
            cap = prefix[-1] if prefix else steps[0]
            # final step c must satisfy lo <= base*(100+c) <= hi
            c_hi = min(cap, math.floor(hi / base) - 100)
            c_hi -= c_hi % 2
            if c_hi == 0:
                # the prefix alone was tried at the previous length
                c_hi = -2
            if c_hi < steps[-1]:
                continue
            value = base * (100 + c_hi)
            if value >= lo:
                seq = list(prefix) + [c_hi]
                return _restoration_order(seq, f, hi)
            if 1 - value < best_residual:
                best_residual, best_seq = 1 - value, list(prefix) + [c_hi]
    raise Unreachable(
        f"no sequence of at most {max_length} requests restores "
        f"{float(f)} to within {float(tol)}; best residual "
        f"{float(best_residual):.6g} with {best_seq}",
        best_sequence=_restoration_order(best_seq, f, hi),
        best_residual=float(best_residual))


def _bdr_rank(entry: SavingsEntry) -> float:
    return math.inf if entry.bdr_pct is None else entry.bdr_pct


def plan_request(profile: DeviceProfile, target: PowerTarget) -> Plan:
    """Pick one action from ``profile`` for ``target``.

    Among entries meeting the savings target and the BD-rate bound, the one
    with the smallest BD-rate wins (unknown BD-rate ranks last, higher
    savings breaks ties). When no entry qualifies the largest saving is
    returned with ``shortfall`` set.
    """
    if not profile.entries:
        raise EmptyProfile("device profile has no entries")
    max_bdr = math.inf if target.max_bdr is None else target.max_bdr
    eligible = [e for e in profile.entries
                if e.savings_pct >= target.required_savings
                and (_bdr_rank(e) <= max_bdr
                     or (target.max_bdr is None and e.bdr_pct is None))]
    if eligible:
        chosen = min(eligible, key=lambda e: (_bdr_rank(e), -e.savings_pct))
        shortfall = False
    else:
        chosen = max(profile.entries, key=lambda e: e.savings_pct)
        shortfall = True
    return Plan(chosen.action.to_request(), chosen, shortfall)

