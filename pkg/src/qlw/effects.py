"""Unsharp properties: effects, POVMs, the sequential product and
joint measurability (coexistence) of unbiased qubit effects.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from ._numeric import decode_complex, encode_complex, resolve_tol

__all__ = [
    "Effect", "Povm", "QubitEffect", "Coexistence", "EffectError", "PAULI",
    "make_effect", "validate_povm", "sequential_product", "effect_sqrt", "unsharp_qubit",
    "coexistent", "certificate", "certificate_feasible", "coexistence_value",
    "effect_to_json", "effect_from_json", "povm_to_json", "povm_from_json",
]

PAULI = np.array([
    [[0, 1], [1, 0]],
    [[0, -1j], [1j, 0]],
    [[1, 0], [0, -1]],
], dtype=complex)


class EffectError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Effect:
    """Hermitian operator with spectrum in [0, 1]. Build with :func:`make_effect`."""

    matrix: np.ndarray

    @property
    def d(self) -> int:
        return self.matrix.shape[0]

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.matrix)

    def __repr__(self) -> str:
        return f"Effect(d={self.d}, spectrum={np.round(self.eigenvalues(), 6).tolist()})"


def make_effect(matrix, tol: float | None = None) -> Effect:
    tol = resolve_tol(tol)
    m = np.array(matrix, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
        raise EffectError(f"effect must be a nonempty square matrix, got shape {m.shape}")
    if np.max(np.abs(m - m.conj().T)) > tol:
        raise EffectError("effect matrix is not Hermitian")
    m = (m + m.conj().T) / 2
    ev = np.linalg.eigvalsh(m)
    if ev[0] < -tol:
        raise EffectError(f"effect has eigenvalue {ev[0]:.6g} < 0")
    if ev[-1] > 1 + tol:
        raise EffectError(f"effect has eigenvalue {ev[-1]:.6g} > 1")
    m.setflags(write=False)
    return Effect(m)


@dataclass(frozen=True)
class Povm:
    outcomes: tuple[tuple[str, Effect], ...]

    @property
    def d(self) -> int:
        return self.outcomes[0][1].d

    def __getitem__(self, label: str) -> Effect:
        for name, effect in self.outcomes:
            if name == label:
                return effect
        raise KeyError(label)

    def probabilities(self, state) -> dict[str, float]:
        psi = np.asarray(state, dtype=complex)
        return {label: float(np.real(psi.conj() @ e.matrix @ psi)) for label, e in self.outcomes}


def validate_povm(effects: Sequence[Effect] | Mapping[str, Effect],
                  labels: Sequence[str] | None = None, tol: float | None = None) -> Povm:
    """Check that the effects sum to the identity and package them as a Povm."""
    tol = resolve_tol(tol)
    if isinstance(effects, Mapping):
        labels, effects = list(effects.keys()), list(effects.values())
    effects = [e if isinstance(e, Effect) else make_effect(e, tol) for e in effects]
    if not effects:
        raise EffectError("a POVM needs at least one outcome")
    labels = [str(i) for i in range(len(effects))] if labels is None else [str(x) for x in labels]
    if len(labels) != len(effects) or len(set(labels)) != len(labels):
        raise EffectError("POVM outcome labels must be distinct, one per effect")
    d = effects[0].d
    if any(e.d != d for e in effects):
        raise EffectError("POVM effects have different dimensions")
    total = sum(e.matrix for e in effects)
    dev = float(np.max(np.abs(total - np.eye(d))))
    if dev > tol:
        raise EffectError(f"effects sum to identity only within {dev:.3g} (tolerance {tol:g})")
    return Povm(tuple(zip(labels, effects)))


def effect_sqrt(e: Effect) -> np.ndarray:
    """Positive square root, with eigenvalues clamped to [0, 1] first.

    Eigenvalues at roundoff level are set to zero, since the square root
    would otherwise blow ``1e-17`` noise up to ``3e-9``.
    """
    w, v = np.linalg.eigh(e.matrix)
    w = np.clip(w, 0.0, 1.0)
    w[w <= 16 * np.finfo(float).eps * e.d] = 0.0
    w = np.sqrt(w)
    return (v * w) @ v.conj().T


def sequential_product(e: Effect, f: Effect) -> Effect:
    """``sqrt(E) F sqrt(E)``: test ``e`` first, then ``f``."""
    if e.d != f.d:
        raise EffectError(f"dimension mismatch: {e.d} vs {f.d}")
    r = effect_sqrt(e)
    m = r @ f.matrix @ r
    return make_effect((m + m.conj().T) / 2)


# --------------------------------------------------------------------------
# Qubit effects


@dataclass(frozen=True)
class QubitEffect:
    """``E = (bias * I + bloch . sigma) / 2``."""

    bias: float
    bloch: tuple[float, float, float]

    @property
    def effect(self) -> Effect:
        a = np.asarray(self.bloch, dtype=float)
        m = 0.5 * (self.bias * np.eye(2) + np.einsum("k,kij->ij", a, PAULI))
        return make_effect(m)

    @property
    def unsharpness(self) -> float:
        """1 - |a|: zero for sharp unbiased effects, one for the trivial effect I/2."""
        return 1.0 - float(np.linalg.norm(self.bloch))


def unsharp_qubit(a: Sequence[float], gamma: float = 1.0, tol: float | None = None) -> QubitEffect:
    tol = resolve_tol(tol)
    vec = np.asarray(a, dtype=float).ravel()
    if vec.shape != (3,) or not np.all(np.isfinite(vec)):
        raise EffectError(f"Bloch vector must be 3 finite reals, got {a!r}")
    if not 0 <= gamma <= 2:
        raise EffectError(f"bias must lie in [0, 2], got {gamma}")
    norm = float(np.linalg.norm(vec))
    bound = min(gamma, 2 - gamma)
    if norm > bound + tol:
        raise EffectError(f"|a| = {norm:.6g} exceeds min(bias, 2 - bias) = {bound:.6g}")
    return QubitEffect(float(gamma), tuple(float(x) for x in vec))


@dataclass(frozen=True)
class Coexistence:
    coexistent: bool
    value: float  # |a + b| + |a - b|
    c: float | None = None
    certificate: dict | None = None  # (mu, nu) -> Effect, mu, nu in {+1, -1}

    def to_dict(self) -> dict:
        out = {"coexistent": self.coexistent, "value": self.value, "bound": 2.0, "c": self.c,
               "certificate": None}
        if self.certificate is not None:
            out["certificate"] = povm_to_json(certificate_povm(self.certificate))
        return out


def coexistence_value(a, b) -> float:
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    return float(np.linalg.norm(a + b) + np.linalg.norm(a - b))


def certificate(a, b, c: float) -> dict[tuple[int, int], np.ndarray]:
    """Candidate joint POVM ``G[mu, nu] = ((1 + mu nu c) I + (mu a + nu b) . sigma) / 4``.

    Its margins are the effects ``(I +/- a.sigma)/2`` and ``(I +/- b.sigma)/2``
    for every ``c``; only positivity depends on ``c``.
    """
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    out = {}
    for mu in (1, -1):
        for nu in (1, -1):
            v = mu * a + nu * b
            out[(mu, nu)] = 0.25 * ((1 + mu * nu * c) * np.eye(2) + np.einsum("k,kij->ij", v, PAULI))
    return out


def certificate_feasible(a, b, c: float, tol: float | None = None) -> bool:
    """All four certificate operators are positive semidefinite (eigenvalue test)."""
    tol = resolve_tol(tol)
    return all(np.linalg.eigvalsh(g)[0] >= -tol for g in certificate(a, b, c).values())


def certificate_povm(cert: Mapping[tuple[int, int], Effect]) -> Povm:
    sign = {1: "+", -1: "-"}
    return Povm(tuple((f"{sign[mu]}{sign[nu]}", e) for (mu, nu), e in cert.items()))


def coexistent(e1: QubitEffect, e2: QubitEffect, tol: float | None = None) -> Coexistence:
    """Joint measurability of the unbiased qubit observables ``{E, I - E}``.

    Decided by ``|a + b| + |a - b| <= 2``; a positive verdict carries a
    joint POVM whose margins reproduce both inputs.
    """
    tol = resolve_tol(tol)
    for e in (e1, e2):
        if abs(e.bias - 1.0) > tol:
            raise EffectError(f"coexistence is implemented for unbiased effects only (bias {e.bias})")
    a, b = np.asarray(e1.bloch), np.asarray(e2.bloch)
    sp, sm = float(np.linalg.norm(a + b)), float(np.linalg.norm(a - b))
    value = sp + sm
    if value > 2 + tol:
        return Coexistence(False, value)
    # midpoint of the feasible interval |a+b| - 1 <= c <= 1 - |a-b|
    c = (sp - sm) / 2
    cert = {}
    for key, g in certificate(a, b, c).items():
        w, v = np.linalg.eigh(g)
        g = (v * np.clip(w, 0.0, None)) @ v.conj().T  # absorb the tolerance slack
        cert[key] = make_effect(g, tol)
    return Coexistence(True, value, c, cert)


# --------------------------------------------------------------------------
# JSON


def effect_to_json(e: Effect, label: str | None = None) -> dict:
    out = {"d": e.d, "matrix": encode_complex(e.matrix)}
    if label is not None:
        out["label"] = label
    return out


def effect_from_json(data: dict, tol: float | None = None) -> Effect:
    m = decode_complex(data["matrix"], 2)
    if "d" in data and m.shape != (int(data["d"]),) * 2:
        raise EffectError(f"matrix shape {m.shape} does not match d = {data['d']}")
    return make_effect(m, tol)


def povm_to_json(p: Povm) -> dict:
    return {"d": p.d, "outcomes": [effect_to_json(e, label) for label, e in p.outcomes]}


def povm_from_json(data: dict, tol: float | None = None) -> Povm:
    outcomes = data["outcomes"]
    effects = [effect_from_json(o, tol) for o in outcomes]
    return validate_povm(effects, [o.get("label", str(i)) for i, o in enumerate(outcomes)], tol)
