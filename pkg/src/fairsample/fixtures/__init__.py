"""Committed showcase instances (search-derived figure analogs)."""

from importlib import resources

from ..ising import ProblemInstance

NAMES = ("fig1a", "fig1c", "fig1d", "fig2")


def load(name: str) -> ProblemInstance:
    if name not in NAMES:
        raise KeyError(f"unknown fixture {name!r}; have {NAMES}")
    ref = resources.files(__package__) / f"{name}.json"
    import json
    return ProblemInstance.from_json(json.loads(ref.read_text()))
