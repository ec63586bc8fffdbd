"""Closed-form convergence-rate bounds for controlled hopwise averaging.

A bound ``gamma > 1`` guarantees ``V(k) <= (1 - 1/gamma) V(k-1)`` for every
greedy (max potential drop) iteration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from .graph import GraphInvariants
from .hopwise import Weights


@dataclass(frozen=True)
class GammaBound:
    value: float
    source: str  # general | closed-form | refined
    family: Optional[str] = None

    @property
    def contraction_factor(self) -> float:
        return 1.0 - 1.0 / self.value


@dataclass(frozen=True)
class Unavailable:
    """A bound slot that does not apply, with the reason."""

    reason: str


def general_range(n: int) -> tuple[float, float]:
    return n / 2 + 1, n ** 3 - 2 * n ** 2 + n / 2 + 1


def gamma_general(inv: GraphInvariants, w: Weights) -> GammaBound:
    """Bound valid on every connected graph, from n, diameter, alpha and beta."""
    n, d = inv.n, inv.diameter
    value = n / 2 + w.alpha + (n * n - w.beta) * (3 * (n - 1) - d) * (d + 1) / (2 * n)
    return GammaBound(value, "general", inv.family_tag)


def _closed_form(family: str, n: int, k: Optional[int], d: Optional[int]):
    if family == "path":
        if n < 5:
            return Unavailable(f"path formula needs n >= 5, got n={n}")
        return n ** 3 - 4 * n ** 2 + 4.5 * n + 1.25
    if family == "cycle":
        if n < 3:
            return Unavailable(f"cycle needs n >= 3, got n={n}")
        if n % 2:
            return (5 * n ** 3 - 15 * n ** 2 - n + 31) / 8
        return (5 * n ** 3 - 11 * n ** 2) / 8 - 2.5 * n + 6.5
    if family in ("k-regular", "strongly-regular"):
        if k is None or k < 2:
            return Unavailable(f"regular formula needs K >= 2, got K={k}")
        if d is None:
            return Unavailable("regular formula needs the diameter D")
        return n / 2 + k + (n - k - 1) * (3 * (n - 1) - d) * (d + 1) / 2
    if family == "complete":
        return 1.5 * n - 1
    return Unavailable(f"no closed form for family {family!r}")


def _refined(family: str, n: int, k: Optional[int], d: Optional[int], mu: Optional[int]):
    if family == "path":
        if n < 4:
            return Unavailable(f"path formula needs n >= 4, got n={n}")
        return n ** 3 / 6 - 13 * n / 6 + 3
    if family == "cycle":
        if n % 2:
            if n < 3:
                return Unavailable(f"odd-cycle formula needs n >= 3, got n={n}")
            return n ** 3 / 24 + 7 * n / 12 - 2 + 11 / (8 * n)
        if n < 4:
            return Unavailable(f"even-cycle formula needs n >= 4, got n={n}")
        return n ** 3 / 24 + 5 * n / 6 - 3 + 4 / n
    if family == "strongly-regular":
        if k is None or k < 2 or mu is None or mu < 1:
            return Unavailable(f"strongly regular formula needs K >= 2 and mu >= 1, got K={k}, mu={mu}")
        return n / 2 + k + k * (mu + 2) * (n - k - 1) / mu
    if family == "k-regular":
        if k is None or k < 2:
            return Unavailable(f"regular formula needs K >= 2, got K={k}")
        if d is None:
            return Unavailable("regular formula needs the diameter D")
        return n / 2 + k + k * d * (d + 1) * (n - k - 1) / 2
    if family == "complete":
        return Unavailable("no graph-specific refinement for complete graphs")
    return Unavailable(f"no closed form for family {family!r}")


def gamma_closed(family: str, n: int, k: Optional[int] = None, diameter: Optional[int] = None,
                 mu: Optional[int] = None):
    """(family closed form, graph-specific refinement); each slot is a GammaBound or Unavailable."""
    slots = []
    for source, val in (("closed-form", _closed_form(family, n, k, diameter)),
                        ("refined", _refined(family, n, k, diameter, mu))):
        slots.append(val if isinstance(val, Unavailable) else GammaBound(float(val), source, family))
    return tuple(slots)


def gamma_two_iteration(gamma: float) -> float:
    """Per-two-iteration bound, so that ``1 - 1/result == (1 - 1/gamma) ** 2``."""
    if not gamma > 1:
        raise ValueError(f"gamma must exceed 1, got {gamma}")
    return gamma * gamma / (2 * gamma - 1)


def gamma_pa_complete(n: int) -> float:
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    return float(n - 1)


def error_envelope(v0: float, inv: GraphInvariants, gamma: float, k: int) -> tuple[float, float]:
    """Upper bounds on ||x(k) - x* 1|| (links) and ||x_hat(k) - x* 1|| (estimates)."""
    if v0 < 0 or not gamma > 1 or k < 0:
        raise ValueError("need v0 >= 0, gamma > 1, k >= 0")
    decay = (1.0 - 1.0 / gamma) ** (k / 2)
    link = math.sqrt(v0 * inv.max_degree / 2) * decay
    est = math.sqrt(2 * v0 * inv.max_degree / (inv.min_degree + inv.max_degree)) * decay
    return link, est
