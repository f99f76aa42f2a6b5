"""Shared numeric policy: default tolerance and complex JSON encoding."""

from __future__ import annotations

import os

import numpy as np

DEFAULT_TOL = 1e-9

_override: float | None = None


def default_tol() -> float:
    """Tolerance in force: explicit override, then ``QLW_TOL``, then 1e-9."""
    if _override is not None:
        return _override
    env = os.environ.get("QLW_TOL")
    if env:
        try:
            value = float(env)
        except ValueError:
            raise ValueError(f"QLW_TOL is not a number: {env!r}") from None
        if not value > 0:
            raise ValueError(f"QLW_TOL must be positive, got {env!r}")
        return value
    return DEFAULT_TOL


def set_default_tol(tol: float | None) -> None:
    global _override
    if tol is not None and not tol > 0:
        raise ValueError(f"tolerance must be positive, got {tol}")
    _override = tol


def resolve_tol(tol: float | None) -> float:
    return default_tol() if tol is None else float(tol)


def encode_complex(array) -> list:
    """Nested lists with every complex entry as ``[re, im]``."""
    arr = np.asarray(array, dtype=complex)
    if arr.ndim == 0:
        return [float(arr.real), float(arr.imag)]
    return [encode_complex(row) for row in arr]


def decode_complex(data, ndim: int) -> np.ndarray:
    """Inverse of :func:`encode_complex` for an array of ``ndim`` dimensions."""
    arr = np.asarray(data, dtype=float)
    if arr.ndim != ndim + 1 or arr.shape[-1] != 2:
        # an empty basis has no [re, im] pairs to infer the shape from
        if arr.size == 0 and ndim == 2:
            return np.zeros((arr.shape[0] if arr.ndim else 0, 0), dtype=complex)
        raise ValueError(f"expected {ndim}-d array of [re, im] pairs, got shape {arr.shape}")
    return arr[..., 0] + 1j * arr[..., 1]
