"""Set descriptors and JSON schema validation for report files."""

from __future__ import annotations

import json
from importlib import resources
from pathlib import Path
from typing import Union

import jsonschema

from .sets import (
    IntervalSet,
    SetFamily,
    comb_family,
    empty_family,
    family_E1,
    family_E2,
    from_intervals,
    full_line_family,
)


class DescriptorError(ValueError):
    pass


FAMILIES = {
    "E1": lambda p: family_E1(),
    "E2": lambda p: family_E2(),
    "comb": lambda p: comb_family(float(p["eps_target"]), float(p["W"])),
    "empty": lambda p: empty_family(),
    "full": lambda p: full_line_family(),
}


def load_descriptor(spec: Union[str, dict, Path]) -> dict:
    """Accept a dict, an inline JSON string or a path to a JSON file."""
    if isinstance(spec, dict):
        desc = spec
    else:
        text = str(spec)
        try:
            if text.lstrip().startswith("{"):
                desc = json.loads(text)
            else:
                desc = json.loads(Path(text).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise DescriptorError(f"cannot read set descriptor: {exc}") from exc
    try:
        jsonschema.validate(desc, load_schema("set_descriptor"))
    except jsonschema.ValidationError as exc:
        raise DescriptorError(f"invalid set descriptor: {exc.message}") from exc
    return desc


def parse_family(spec) -> tuple[SetFamily, float | None]:
    """Return the family and its requested window (``None`` if unspecified)."""
    desc = load_descriptor(spec)
    if desc["type"] == "intervals":
        items = desc["items"]
        if any(lo > hi for lo, hi in items):
            raise DescriptorError("interval with lo > hi")
        return from_intervals(IntervalSet(items)), desc.get("window")
    name = desc["name"]
    try:
        fam = FAMILIES[name](desc.get("params", {}))
    except KeyError as exc:
        raise DescriptorError(f"missing parameter {exc} for family {name}") from exc
    except ValueError as exc:
        raise DescriptorError(str(exc)) from exc
    return fam, desc.get("window")


def parse_set(spec, default_window: float | None = None) -> IntervalSet:
    """Materialise a descriptor as an :class:`IntervalSet`."""
    fam, W = parse_family(spec)
    W = W if W is not None else default_window
    if W is None:
        if fam.extent is None:
            raise DescriptorError(f"family {fam.label} needs a window")
        W = fam.extent
    return fam.window(float(W))


def load_schema(name: str) -> dict:
    path = resources.files("concop").joinpath("schemas", f"{name}.json")
    return json.loads(path.read_text())


def validate(payload: dict, name: str) -> None:
    jsonschema.validate(payload, load_schema(name))
