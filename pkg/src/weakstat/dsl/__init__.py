"""Text format for declaring custom scenarios (``.ws`` files)."""

from __future__ import annotations

from importlib import resources
from pathlib import Path

from ..scenarios import Scenario
from .elaborate import elaborate
from .parser import parse, tokenize
from .printer import to_source
from .syntax import Diagnostic, DslError, ScenarioDoc, Span

__all__ = [
    "Diagnostic",
    "DslError",
    "ScenarioDoc",
    "Span",
    "elaborate",
    "load",
    "load_file",
    "parse",
    "reference_source",
    "to_source",
    "tokenize",
]


def load(text: str, name: str = "dsl") -> Scenario:
    return elaborate(parse(text), name)


def load_file(path: str | Path) -> Scenario:
    path = Path(path)
    return load(path.read_text(encoding="utf-8"), path.stem)


def reference_source(name: str) -> str:
    """Source of a shipped reference file: ``bell``, ``double_slit`` or ``entangled``."""
    return resources.files("weakstat").joinpath("data").joinpath(f"{name}.ws").read_text(encoding="utf-8")
