"""Shipped device profiles and profile file I/O.

Built-in profiles are keyed ``table<N>/<backend>/<name>``; see
:func:`builtin_names`. Fps actions of the Table II profiles assume a 60 fps
source, so "half fps" is stored as ``set_fps 30``.
"""

from __future__ import annotations

import json
from functools import lru_cache
from importlib import resources
from pathlib import Path

from .adaptation import DeviceProfile
from .errors import ProfileFormatError


@lru_cache(maxsize=None)
def _builtin_table() -> dict:
    text = resources.files("greenmeta").joinpath(
        "data/profiles.json").read_text(encoding="utf-8")
    return json.loads(text)["profiles"]


def builtin_names() -> list[str]:
    return sorted(_builtin_table())


def builtin_profile(name: str) -> DeviceProfile:
    try:
        return DeviceProfile.from_json(_builtin_table()[name])
    except KeyError:
        raise ProfileFormatError(
            f"no built-in profile {name!r}; choose from "
            f"{', '.join(builtin_names())}") from None


def load_profile(source) -> DeviceProfile:
    """Accept a profile dict, a built-in name, or a path to a JSON file."""
    if isinstance(source, DeviceProfile):
        return source
    if isinstance(source, dict):
        return DeviceProfile.from_json(source)
    source = str(source)
    if source in _builtin_table():
        return builtin_profile(source)
    path = Path(source)
    if not path.exists():
        raise ProfileFormatError(
            f"{source!r} is neither a file nor a built-in profile")
    try:
        return DeviceProfile.from_json(json.loads(path.read_text()))
    except json.JSONDecodeError as exc:
        raise ProfileFormatError(f"{path}: {exc}") from None


def save_profile(profile: DeviceProfile, path) -> None:
    Path(path).write_text(json.dumps(profile.to_json(), indent=2) + "\n")
