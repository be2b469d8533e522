"""Theory files with their bounds, and bound specifications."""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

from .smtlib import parse_theory
from .syntax import BoundingError, Profile, Signature, Theory

_HEADER = re.compile(r"^\s*;\s*bound:\s*(.+?)\s*$", re.M)


def parse_profile(specs: Iterable[str], sig: Signature) -> Profile:
    """Turn ``["3"]`` or ``["A=2", "B=1"]`` into a profile.

    A bare number applies to every sort not given explicitly.
    """
    uniform = None
    bounds: dict = {}
    for spec in specs:
        for item in spec.replace(",", " ").split():
            name, eq, num = item.rpartition("=")
            try:
                n = int(num)
            except ValueError:
                raise BoundingError("bad bound %r" % item) from None
            if not eq:
                uniform = n
            elif name not in sig.sorts:
                raise BoundingError("bound for unknown sort %s" % name)
            else:
                bounds[name] = n
    if uniform is not None:
        for s in sig.sorts:
            bounds.setdefault(s, uniform)
    return Profile(bounds)


def header_bounds(text: str) -> list:
    """Bound specs from ``; bound: ...`` comment lines."""
    return _HEADER.findall(text)


@dataclass(frozen=True)
class CorpusEntry:
    name: str
    path: Path
    theory: Theory
    profile: Profile


def load(path) -> CorpusEntry:
    path = Path(path)
    text = path.read_text()
    t = parse_theory(text)
    specs = header_bounds(text)
    if not specs:
        raise BoundingError("%s has no '; bound:' line" % path)
    return CorpusEntry(path.stem, path, t, parse_profile(specs, t.signature))


def load_dir(directory) -> list:
    return [load(p) for p in sorted(Path(directory).glob("*.smt2"))]
