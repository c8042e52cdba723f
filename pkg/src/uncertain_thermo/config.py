"""Interior-point tolerance profiles.

The certification thresholds (gap, residual) are fixed; the profile only
sets how tightly the interior-point method is asked to converge.  The
environment variable ``UTHERMO_TOL_PROFILE`` picks the default profile.
"""

from __future__ import annotations

import contextlib
import contextvars
import os
from typing import Iterator

from .errors import BadParameter

ENV_PROFILE = "UTHERMO_TOL_PROFILE"
PROFILES: dict[str, float] = {"default": 1e-10, "strict": 1e-11, "fast": 1e-9}

_OVERRIDE: contextvars.ContextVar[float | None] = contextvars.ContextVar("ipm_tolerance", default=None)


def profile_tolerance(name: str) -> float:
    try:
        return PROFILES[name]
    except KeyError:
        raise BadParameter(f"unknown tolerance profile {name!r}; choose from {sorted(PROFILES)}") from None


def ipm_tolerance() -> float:
    """Active interior-point tolerance: explicit override, then environment profile, then default."""
    override = _OVERRIDE.get()
    if override is not None:
        return override
    return profile_tolerance(os.environ.get(ENV_PROFILE, "default"))


@contextlib.contextmanager
def use_tolerance(tol: float | str) -> Iterator[float]:
    """Temporarily set the interior-point tolerance (a value or a profile name)."""
    value = profile_tolerance(tol) if isinstance(tol, str) else float(tol)
    if not 0 < value <= 1e-7:
        raise BadParameter(f"interior-point tolerance must lie in (0, 1e-7], got {value}")
    token = _OVERRIDE.set(value)
    try:
        yield value
    finally:
        _OVERRIDE.reset(token)
