"""Seeded defects for falsifier self-tests.

Each name below corrupts one specific check or selection rule in the
solvers.  The falsifier must find a counterexample under every one of
them; if it cannot, the certification suite is vacuous.  Nothing here is
active unless explicitly enabled.
"""

from __future__ import annotations

from contextlib import contextmanager

PICARD_ARGMAX = "picard_argmax"
PICARD_RATE_DOUBLED = "picard_rate_doubled"
CERT_I_SWAPPED_DISTANCE = "cert_i_swapped_distance"
GEORGIEV_LAMBDA_EXTREME = "georgiev_lambda_extreme"
STRONGMIN_ANY_TIE = "strongmin_any_tie"

KNOWN_MUTATIONS = frozenset({
    PICARD_ARGMAX,
    PICARD_RATE_DOUBLED,
    CERT_I_SWAPPED_DISTANCE,
    GEORGIEV_LAMBDA_EXTREME,
    STRONGMIN_ANY_TIE,
})

_active: str | None = None


def activate(name: str | None) -> None:
    global _active
    if name is not None and name not in KNOWN_MUTATIONS:
        raise ValueError(f"unknown mutation {name!r}; known: {sorted(KNOWN_MUTATIONS)}")
    _active = name


def active() -> str | None:
    return _active


def is_active(name: str) -> bool:
    return _active == name


@contextmanager
def enabled(name: str | None):
    """Temporarily enable one mutation (None restores clean behavior)."""
    previous = _active
    activate(name)
    try:
        yield
    finally:
        activate(previous)
