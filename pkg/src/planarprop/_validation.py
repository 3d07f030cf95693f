"""Input validation helpers shared by the estimators and builders."""

from __future__ import annotations

import numbers

import numpy as np


class UsageError(ValueError):
    """Raised when a caller violates an operation's preconditions."""


class ConstructionError(ValueError):
    """Raised when an instance cannot be built from the given parameters."""


class ContractViolation(RuntimeError):
    """Raised when a pluggable routine breaks the contract it was given under."""


def check_rng(seed) -> np.random.Generator:
    """Turn None, an int, a SeedSequence or a Generator into a Generator."""
    if isinstance(seed, np.random.Generator):
        return seed
    if seed is None or isinstance(seed, (numbers.Integral, np.random.SeedSequence)):
        return np.random.default_rng(seed)
    raise UsageError(f"cannot seed a generator from {seed!r}")


def check_fraction(value, name: str, *, closed_right: bool = False) -> float:
    value = float(value)
    ok = 0.0 < value <= 1.0 if closed_right else 0.0 < value < 1.0
    if not ok:
        bound = "(0, 1]" if closed_right else "(0, 1)"
        raise UsageError(f"{name} must lie in {bound}, got {value}")
    return value


def check_positive_int(value, name: str, *, minimum: int = 1) -> int:
    if not isinstance(value, numbers.Integral) or isinstance(value, bool):
        raise UsageError(f"{name} must be an integer, got {value!r}")
    if value < minimum:
        raise UsageError(f"{name} must be >= {minimum}, got {value}")
    return int(value)


def check_graph(g, *, max_degree: int | None = None):
    """Check that ``g`` is a Graph and optionally that it respects a degree bound."""
    from .graph import Graph

    if not isinstance(g, Graph):
        raise UsageError(f"expected a Graph, got {type(g).__name__}")
    if max_degree is not None and g.n and int(g.degrees.max(initial=0)) > max_degree:
        raise UsageError(
            f"graph has a vertex of degree {int(g.degrees.max())} > bound {max_degree}"
        )
    return g


def check_vertex(g, v) -> int:
    if not isinstance(v, numbers.Integral) or not 0 <= v < g.n:
        raise UsageError(f"vertex {v!r} out of range for n={g.n}")
    return int(v)
