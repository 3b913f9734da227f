"""Energy-savings and Bjøntegaard-delta-rate analysis.

BD-rate here interpolates log10(rate) over quality with an Akima spline on
each curve and averages the difference over the shared quality interval.
Curves whose quality ranges do not overlap have no BD-rate; that case is
reported as ``None`` and never turned into a number.
"""

from __future__ import annotations

import csv
import math
from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from . import kernels
from .adaptation import DeviceProfile, SavingsEntry, parse_action_label
from .errors import (MalformedCurve, MisalignedMeasurements,
                     NonPositiveReference, OutOfDomain, TooFewKnots)

BD_SAMPLES = 2001
REFERENCE_ACTION = "reference"
CSV_COLUMNS = ("action", "sequence", "quality_metric", "rate", "quality",
               "energy_ref", "energy_test")


@dataclass(frozen=True)
class EnergyMeasurement:
    label: str
    energy: float


@dataclass(frozen=True)
class RdPoint:
    rate: float
    quality: float


class RdCurve:
    """Rate/quality points sorted by ascending quality."""

    def __init__(self, points: Iterable):
        pts = [p if isinstance(p, RdPoint) else RdPoint(*p) for p in points]
        if len(pts) < 2:
            raise MalformedCurve("an RD curve needs at least two points")
        for p in pts:
            if not (p.rate > 0 and math.isfinite(p.rate)
                    and math.isfinite(p.quality)):
                raise MalformedCurve(f"bad RD point {p}")
        pts.sort(key=lambda p: p.quality)
        for a, b in zip(pts, pts[1:]):
            if not b.quality > a.quality:
                raise MalformedCurve(
                    f"duplicate quality {a.quality} in RD curve")
        self.points = tuple(pts)

    @classmethod
    def from_arrays(cls, rates, qualities) -> "RdCurve":
        if len(rates) != len(qualities):
            raise MalformedCurve("rate and quality lists differ in length")
        return cls(zip(rates, qualities))

    @property
    def rates(self) -> np.ndarray:
        return np.array([p.rate for p in self.points])

    @property
    def qualities(self) -> np.ndarray:
        return np.array([p.quality for p in self.points])

    def __len__(self):
        return len(self.points)

    def __repr__(self):
        return f"RdCurve({[(p.rate, p.quality) for p in self.points]})"


def relative_savings(reference: EnergyMeasurement,
                     test: EnergyMeasurement) -> float:
    """Percent of the reference energy saved by ``test`` (negative if it
    uses more)."""
    ref = reference.energy if isinstance(reference, EnergyMeasurement) \
        else float(reference)
    tst = test.energy if isinstance(test, EnergyMeasurement) else float(test)
    if not ref > 0:
        raise NonPositiveReference(f"reference energy {ref} must be positive")
    return 100.0 * (1.0 - tst / ref)


class Akima:
    """Akima spline through knots with strictly increasing x.

    Node derivatives use the original Akima weights; at both ends two ghost
    slopes are extrapolated linearly from the first/last segment slopes.
    """

    def __init__(self, x: Sequence[float], y: Sequence[float]):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if x.ndim != 1 or x.shape != y.shape:
            raise TooFewKnots("x and y must be 1-D and equally long")
        if len(x) < 2:
            raise TooFewKnots(f"need at least 2 knots, got {len(x)}")
        if np.any(np.diff(x) <= 0):
            raise OutOfDomain("knot x values must be strictly increasing")
        self.x = x
        self.y = y
        self.slopes = np.asarray(kernels.akima_node_slopes(x, y))

    def __call__(self, xq):
        scalar = np.ndim(xq) == 0
        q = np.atleast_1d(np.asarray(xq, dtype=float))
        if np.any(q < self.x[0]) or np.any(q > self.x[-1]) or \
                np.any(np.isnan(q)):
            raise OutOfDomain(
                f"query outside [{self.x[0]}, {self.x[-1]}]")
        out = np.asarray(kernels.hermite_eval(self.x, self.y, self.slopes, q))
        return float(out[0]) if scalar else out


def akima_interpolate(knots: Sequence[tuple[float, float]],
                      x_query: float) -> float:
    knots = list(knots)
    if len(knots) < 2:
        raise TooFewKnots(f"need at least 2 knots, got {len(knots)}")
    xs, ys = zip(*knots)
    return Akima(xs, ys)(float(x_query))


def bd_rate(reference: RdCurve, test: RdCurve,
            samples: int = BD_SAMPLES) -> Optional[float]:
    """Average rate difference of ``test`` against ``reference`` at equal
    quality, in percent; ``None`` when the quality ranges do not overlap."""
    for curve in (reference, test):
        if not isinstance(curve, RdCurve):
            raise MalformedCurve(f"expected RdCurve, got {type(curve).__name__}")
    rq, tq = reference.qualities, test.qualities
    lo = max(rq[0], tq[0])
    hi = min(rq[-1], tq[-1])
    if not hi > lo:
        return None
    grid = np.linspace(lo, hi, samples)
    grid[0], grid[-1] = lo, hi
    ref_log = Akima(rq, np.log10(reference.rates))(grid)
    test_log = Akima(tq, np.log10(test.rates))(grid)
    dx = (hi - lo) / (samples - 1)
    mean_diff = kernels.trapezoid(test_log - ref_log, dx) / (hi - lo)
    return 100.0 * (10.0 ** mean_diff - 1.0)


@dataclass(frozen=True)
class MeasurementRow:
    action: str
    sequence: str
    quality_metric: str
    rate: float
    quality: float
    energy_ref: float
    energy_test: float


def read_measurements(path_or_lines) -> list[MeasurementRow]:
    """Parse measurement CSV with header
    ``action,sequence,quality_metric,rate,quality,energy_ref,energy_test``."""
    if isinstance(path_or_lines, (str, bytes)) or hasattr(path_or_lines,
                                                           "__fspath__"):
        with open(path_or_lines, newline="") as fh:
            return read_measurements(fh.read().splitlines())
    reader = csv.DictReader(path_or_lines)
    missing = set(CSV_COLUMNS) - set(reader.fieldnames or ())
    if missing:
        raise MisalignedMeasurements(
            f"CSV lacks columns: {', '.join(sorted(missing))}")
    rows = []
    for lineno, rec in enumerate(reader, start=2):
        try:
            rows.append(MeasurementRow(
                rec["action"].strip(), rec["sequence"].strip(),
                rec["quality_metric"].strip(), float(rec["rate"]),
                float(rec["quality"]), float(rec["energy_ref"] or "nan"),
                float(rec["energy_test"] or "nan")))
        except (TypeError, ValueError) as exc:
            raise MisalignedMeasurements(f"line {lineno}: {exc}") from None
    return rows


def build_profile(rows: Sequence[MeasurementRow], decoder_backend: str,
                  content_class: str, *, quality_metric: str = "PSNR",
                  source_fps: int = 60, decoder: str = "") -> DeviceProfile:
    """Aggregate per-rate-point measurements into a device profile.

    Rows whose action is ``reference`` give the anchor RD curve of their
    sequence (their energy columns are ignored). For every other action the
    savings are the mean of :func:`relative_savings` over all its rate
    points, and the BD-rate is the mean of the per-sequence BD-rates, or
    ``None`` as soon as one sequence has none.
    """
    rows = [r for r in rows if r.quality_metric == quality_metric]
    if not rows:
        raise MisalignedMeasurements(
            f"no {quality_metric} measurements to build a profile from")
    anchors: dict[str, list] = defaultdict(list)
    tests: dict[str, dict[str, list]] = defaultdict(lambda: defaultdict(list))
    for r in rows:
        if r.action == REFERENCE_ACTION:
            anchors[r.sequence].append((r.rate, r.quality))
        else:
            tests[r.action][r.sequence].append(r)
    if not tests:
        raise MisalignedMeasurements("no action rows besides the reference")

    entries = []
    derdo_pct = None
    for action, by_seq in tests.items():
        savings = []
        bdrs: list[Optional[float]] = []
        for seq, seq_rows in by_seq.items():
            if seq not in anchors:
                raise MisalignedMeasurements(
                    f"action {action!r}: sequence {seq!r} has no reference "
                    f"rate points")
            if len(anchors[seq]) != len(seq_rows):
                raise MisalignedMeasurements(
                    f"action {action!r}, sequence {seq!r}: "
                    f"{len(seq_rows)} test points vs "
                    f"{len(anchors[seq])} reference points")
            for r in seq_rows:
                savings.append(relative_savings(r.energy_ref, r.energy_test))
            try:
                ref_curve = RdCurve(anchors[seq])
                test_curve = RdCurve((r.rate, r.quality) for r in seq_rows)
            except MalformedCurve as exc:
                raise MisalignedMeasurements(
                    f"action {action!r}, sequence {seq!r}: {exc}") from None
            bdrs.append(bd_rate(ref_curve, test_curve))
        mean_savings = float(np.mean(savings))
        bdr = None if any(b is None for b in bdrs) else float(np.mean(bdrs))
        if action.strip().lower() == "derdo":
            derdo_pct = max(-62, -2 * round(mean_savings / 2))
        act = parse_action_label(action, source_fps=source_fps,
                                 derdo_percent=derdo_pct or 0)
        entries.append(SavingsEntry(act, mean_savings, bdr, action))
    return DeviceProfile(decoder_backend, content_class, tuple(entries),
                         decoder)
