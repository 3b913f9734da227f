"""Linear decoding-energy model and energy-aware encoder decisions.

A decision's expected decoding energy is ``sum(n_i * e_i)`` over the coding
tools it uses, and the encoder picks the candidate minimising
``D + lambda_rate * R + lambda_energy * E``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Hashable, Sequence

from . import kernels
from .errors import (DimensionMismatch, EmptyCandidateSet, GreenMetaError,
                     MissingTool)

FRACPEL = "fracpel"
FRACPEL_PENALTY = 2.0 ** 16


@dataclass(frozen=True)
class EnergyModel:
    tool_names: tuple[str, ...]
    coefficients: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "tool_names", tuple(self.tool_names))
        object.__setattr__(self, "coefficients",
                           tuple(float(e) for e in self.coefficients))
        if not self.coefficients:
            raise DimensionMismatch("an energy model needs at least one tool")
        if len(self.tool_names) != len(self.coefficients):
            raise DimensionMismatch(
                f"{len(self.tool_names)} tool names for "
                f"{len(self.coefficients)} coefficients")
        if len(set(self.tool_names)) != len(self.tool_names):
            raise GreenMetaError("duplicate tool names in energy model")
        if any(e < 0 for e in self.coefficients):
            raise GreenMetaError("energy coefficients must be non-negative")

    def __len__(self):
        return len(self.coefficients)

    def index(self, tool: str) -> int:
        try:
            return self.tool_names.index(tool)
        except ValueError:
            raise MissingTool(f"tool {tool!r} not in model "
                              f"{list(self.tool_names)}") from None

    def to_json(self) -> dict:
        return {"tools": list(self.tool_names),
                "coefficients": list(self.coefficients)}

    @classmethod
    def from_json(cls, obj: dict) -> "EnergyModel":
        return cls(tuple(obj["tools"]), tuple(obj["coefficients"]))


@dataclass(frozen=True)
class LagrangeWeights:
    lambda_rate: float = 0.0
    lambda_energy: float = 0.0

    def __post_init__(self):
        if self.lambda_rate < 0 or self.lambda_energy < 0:
            raise GreenMetaError("Lagrange multipliers must be non-negative")


@dataclass(frozen=True)
class CodingCandidate:
    id: Hashable
    distortion: float
    rate: float
    counts: tuple[int, ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "counts", tuple(self.counts))
        if self.distortion < 0 or self.rate < 0:
            raise GreenMetaError(
                f"candidate {self.id!r}: distortion and rate must be >= 0")
        if any(n < 0 for n in self.counts):
            raise GreenMetaError(
                f"candidate {self.id!r}: tool counts must be >= 0")

    def to_json(self) -> dict:
        return {"id": self.id, "distortion": self.distortion,
                "rate": self.rate, "counts": list(self.counts)}

    @classmethod
    def from_json(cls, obj: dict) -> "CodingCandidate":
        return cls(obj["id"], float(obj["distortion"]), float(obj["rate"]),
                   tuple(obj["counts"]))


def _check_dims(model: EnergyModel, counts: Sequence) -> None:
    if len(counts) != len(model.coefficients):
        raise DimensionMismatch(
            f"{len(counts)} counts for a {len(model.coefficients)}-tool model")


def estimate_energy(model: EnergyModel, counts: Sequence[int]) -> float:
    _check_dims(model, counts)
    return float(sum(n * e for n, e in zip(counts, model.coefficients)))


def cost(candidate: CodingCandidate, weights: LagrangeWeights,
         model: EnergyModel) -> float:
    energy = estimate_energy(model, candidate.counts)
    return (candidate.distortion + weights.lambda_rate * candidate.rate
            + weights.lambda_energy * energy)


def derdo_select(candidates: Sequence[CodingCandidate],
                 weights: LagrangeWeights,
                 model: EnergyModel) -> CodingCandidate:
    """Return the candidate with the lowest Lagrangian cost.

    Ties are broken by lower distortion, then lower rate, then position in
    ``candidates``.
    """
    if not candidates:
        raise EmptyCandidateSet("derdo_select needs at least one candidate")
    ntools = len(model.coefficients)
    table = []
    for c in candidates:
        if len(c.counts) != ntools:
            _check_dims(model, c.counts)
        table.append((c.distortion, c.rate) + c.counts)
    best = kernels.lagrangian_argmin(table, model.coefficients,
                                     weights.lambda_rate,
                                     weights.lambda_energy)
    return candidates[best]


def fracpel_avoiding_model(base: EnergyModel) -> EnergyModel:
    """Zero every coefficient except fractional-pel filtering, which gets
    a 2**16 penalty so that the selection steers away from it."""
    idx = base.index(FRACPEL)
    coeffs = [0.0] * len(base.coefficients)
    coeffs[idx] = FRACPEL_PENALTY
    return EnergyModel(base.tool_names, tuple(coeffs))
