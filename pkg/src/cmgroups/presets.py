"""The shipped catalog of one CM curve per class-number-one field."""

from __future__ import annotations

import json
from functools import lru_cache
from importlib import resources

from .curves import CurveSpec

DEFAULT_PRESET = "cm-4"


@lru_cache(maxsize=None)
def load_catalog() -> dict:
    text = resources.files("cmgroups").joinpath("data/presets.json").read_text()
    return json.loads(text)


def presets() -> dict[str, CurveSpec]:
    return {
        c["label"]: CurveSpec(c["a4"], c["a6"], c["conductor"], c["d_K"], c["label"])
        for c in load_catalog()["curves"]
    }


def get_preset(label: str) -> CurveSpec:
    table = presets()
    if label not in table:
        raise KeyError(f"unknown preset {label!r}; choose from {', '.join(table)}")
    return table[label]
