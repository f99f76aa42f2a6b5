"""Subspaces of C^d as a numerical model of the projection lattice.

A subspace is stored as a column-orthonormal basis; equality, order and
commutation are decided on projectors, which makes every comparison
independent of the chosen basis.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from ._numeric import decode_complex, encode_complex, resolve_tol
from .omlattice import OrthoLattice, build_lattice

__all__ = [
    "Subspace", "DimensionError", "ClosureOverflowError", "MAX_DIM", "RANK_RTOL", "RANK_ATOL",
    "span", "zero", "full", "ray", "meet", "join", "ortho", "leq", "equal", "commutes",
    "commutator_norm", "random_subspace", "random_state", "as_lattice", "lattice_closure",
    "subspace_to_json", "subspace_from_json", "NAMED_RAYS", "named_ray",
]

MAX_DIM = 16
RANK_RTOL = 1e-8
RANK_ATOL = 1e-12


class DimensionError(ValueError):
    pass


class ClosureOverflowError(RuntimeError):
    def __init__(self, size: int, limit: int):
        self.size = size
        self.limit = limit
        super().__init__(f"lattice closure exceeded {limit} elements (reached {size})")


@dataclass(frozen=True, eq=False)
class Subspace:
    """Closed subspace of C^d given by a ``d x k`` orthonormal basis."""

    basis: np.ndarray

    def __post_init__(self):
        b = np.array(self.basis, dtype=complex)
        if b.ndim != 2:
            raise DimensionError(f"basis must be a d x k matrix, got shape {b.shape}")
        if b.shape[0] == 0:
            raise DimensionError("ambient dimension must be positive")
        b.setflags(write=False)
        object.__setattr__(self, "basis", b)

    @property
    def d(self) -> int:
        return self.basis.shape[0]

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    @cached_property
    def projector(self) -> np.ndarray:
        p = self.basis @ self.basis.conj().T
        p.setflags(write=False)
        return p

    def contains(self, vector, tol: float | None = None) -> bool:
        v = np.asarray(vector, dtype=complex)
        return bool(np.max(np.abs(self.projector @ v - v), initial=0.0) <= resolve_tol(tol))

    def check(self, tol: float | None = None) -> None:
        """Raise if the stored basis is not orthonormal within tolerance."""
        tol = resolve_tol(tol)
        gram = self.basis.conj().T @ self.basis
        if np.max(np.abs(gram - np.eye(self.dim)), initial=0.0) > tol:
            raise ValueError("basis is not orthonormal")

    def __repr__(self) -> str:
        return f"Subspace(d={self.d}, dim={self.dim})"


def _orthonormal_range(m: np.ndarray) -> np.ndarray:
    """Orthonormal basis of the column space of ``m`` by thresholded SVD."""
    d = m.shape[0]
    if m.shape[1] == 0:
        return np.zeros((d, 0), dtype=complex)
    u, s, _ = np.linalg.svd(m, full_matrices=False)
    return u[:, :_numerical_rank(s)]


def _numerical_rank(singular_values: np.ndarray) -> int:
    if len(singular_values) == 0:
        return 0
    cutoff = max(RANK_RTOL * singular_values[0], RANK_ATOL)
    return int(np.sum(singular_values > cutoff))


def _check_dim(d: int, max_dim: int | None) -> None:
    limit = MAX_DIM if max_dim is None else max_dim
    if d < 1:
        raise DimensionError("ambient dimension must be positive")
    if d > limit:
        raise DimensionError(f"ambient dimension {d} exceeds the cap {limit}")


def span(vectors: Sequence, d: int | None = None, *, max_dim: int | None = None) -> Subspace:
    """Subspace spanned by ``vectors``; pass ``d`` when the list may be empty."""
    vecs = [np.asarray(v, dtype=complex).ravel() for v in vectors]
    dims = {len(v) for v in vecs}
    if d is not None:
        dims.add(d)
    if not dims:
        raise DimensionError("span of no vectors needs an explicit ambient dimension")
    if len(dims) > 1:
        raise DimensionError(f"vectors have mismatched dimensions {sorted(dims)}")
    d = dims.pop()
    _check_dim(d, max_dim)
    m = np.column_stack(vecs) if vecs else np.zeros((d, 0), dtype=complex)
    return Subspace(_orthonormal_range(m))


def zero(d: int) -> Subspace:
    _check_dim(d, None)
    return Subspace(np.zeros((d, 0), dtype=complex))


def full(d: int) -> Subspace:
    _check_dim(d, None)
    return Subspace(np.eye(d, dtype=complex))


def ray(vector) -> Subspace:
    """One-dimensional subspace through a nonzero vector."""
    s = span([vector])
    if s.dim != 1:
        raise ValueError("a ray needs a nonzero vector")
    return s


_R = 1 / np.sqrt(2)
NAMED_RAYS = {
    "z+": (1, 0), "z-": (0, 1),
    "x+": (_R, _R), "x-": (_R, -_R),
    "y+": (_R, 1j * _R), "y-": (_R, -1j * _R),
}


def named_ray(name: str) -> np.ndarray:
    """Unit vector for the qubit shorthands ``z+ z- x+ x- y+ y-``."""
    key = name.strip().replace("−", "-")
    if key not in NAMED_RAYS:
        raise KeyError(f"unknown state name {name!r}; expected one of {', '.join(NAMED_RAYS)}")
    return np.array(NAMED_RAYS[key], dtype=complex)


def _same_d(a: Subspace, b: Subspace) -> None:
    if a.d != b.d:
        raise DimensionError(f"ambient dimensions differ: {a.d} vs {b.d}")


def ortho(a: Subspace) -> Subspace:
    """Orthogonal complement, i.e. the kernel of ``basis^H``."""
    if a.dim == 0:
        return Subspace(np.eye(a.d, dtype=complex))
    u, s, _ = np.linalg.svd(a.basis, full_matrices=True)
    return Subspace(u[:, _numerical_rank(s):])


def join(a: Subspace, b: Subspace) -> Subspace:
    _same_d(a, b)
    return Subspace(_orthonormal_range(np.hstack([a.basis, b.basis])))


def meet(a: Subspace, b: Subspace) -> Subspace:
    # De Morgan: a & b = (a' | b')'
    _same_d(a, b)
    return ortho(join(ortho(a), ortho(b)))


def equal(a: Subspace, b: Subspace, tol: float | None = None) -> bool:
    _same_d(a, b)
    return bool(np.max(np.abs(a.projector - b.projector)) <= resolve_tol(tol))


def leq(a: Subspace, b: Subspace, tol: float | None = None) -> bool:
    """Inclusion ``a <= b``: projecting ``a`` onto ``b`` leaves it unchanged."""
    _same_d(a, b)
    return bool(np.max(np.abs(b.projector @ a.projector - a.projector)) <= resolve_tol(tol))


def commutator_norm(a: Subspace, b: Subspace) -> float:
    """Largest entry magnitude of ``P_a P_b - P_b P_a``."""
    _same_d(a, b)
    pa, pb = a.projector, b.projector
    return float(np.max(np.abs(pa @ pb - pb @ pa)))


def commutes(a: Subspace, b: Subspace, tol: float | None = None) -> bool:
    return commutator_norm(a, b) <= resolve_tol(tol)


def random_subspace(d: int, k: int, seed, *, max_dim: int | None = None) -> Subspace:
    """Orthonormalised complex Gaussian ``d x k`` frame; deterministic per seed."""
    _check_dim(d, max_dim)
    if not 0 <= k <= d:
        raise DimensionError(f"subspace dimension {k} not in [0, {d}]")
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((d, k)) + 1j * rng.standard_normal((d, k))
    q, _ = np.linalg.qr(g)
    return Subspace(q[:, :k])


def random_state(d: int, seed) -> np.ndarray:
    """Uniformly random unit vector in C^d."""
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    return v / np.linalg.norm(v)


# --------------------------------------------------------------------------
# Lattice view


def lattice_closure(generators: Iterable[Subspace], max_elements: int = 64,
                    tol: float | None = None) -> list[Subspace]:
    """Close ``{0, 1} + generators`` under meet, join and ortho.

    Subspaces equal within ``tol`` are identified; the first representative
    found is kept. Order: zero, full, generators, then discovery order.
    """
    gens = list(generators)
    if not gens:
        raise DimensionError("lattice closure needs at least one generator or use as_lattice(d=...)")
    d = gens[0].d
    for g in gens:
        if g.d != d:
            raise DimensionError(f"ambient dimensions differ: {d} vs {g.d}")
    members: list[Subspace] = []

    def add(s: Subspace) -> bool:
        for m in members:
            if m.dim == s.dim and equal(m, s, tol):
                return False
        if len(members) >= max_elements:
            raise ClosureOverflowError(len(members) + 1, max_elements)
        members.append(s)
        return True

    for s in [zero(d), full(d), *gens]:
        add(s)
    done = 0
    while done < len(members):
        # members[:done] are pairwise closed; combine each new one with everything so far
        x = members[done]
        add(ortho(x))
        for y in members[:done + 1]:
            add(meet(x, y))
            add(join(x, y))
        done += 1
    return members


def as_lattice(generators: Sequence[Subspace], max_elements: int = 64, *,
               names: Sequence[str] | None = None, d: int | None = None,
               tol: float | None = None, name: str = "hilbert") -> OrthoLattice:
    """Finite sub-ortholattice of subspaces generated by ``generators``.

    Labels: ``0`` and ``1`` for the bounds, ``names`` (default ``g0, g1, ...``)
    for generators, ``e<i>`` for everything else. ``lattice.carrier`` holds
    the subspace for each element.
    """
    generators = list(generators)
    if not generators:
        if d is None:
            raise DimensionError("as_lattice with no generators needs the ambient dimension d")
        members = [zero(d), full(d)]
    else:
        members = lattice_closure(generators, max_elements, tol)
    names = list(names) if names is not None else [f"g{i}" for i in range(len(generators))]
    if len(names) != len(generators):
        raise ValueError("one name per generator is required")

    labels = ["0", "1"]
    for i, s in enumerate(members[2:], start=2):
        label = f"e{i}"
        for g, gname in zip(generators, names):
            if equal(g, s, tol) and gname not in labels:
                label = gname
                break
        labels.append(label)

    n = len(members)
    pairs = [(labels[i], labels[j]) for i in range(n) for j in range(n)
             if i != j and members[i].dim < members[j].dim and leq(members[i], members[j], tol)]
    ortho_map = {}
    for i, s in enumerate(members):
        o = ortho(s)
        matches = [j for j, m in enumerate(members) if m.dim == o.dim and equal(m, o, tol)]
        ortho_map[labels[i]] = labels[matches[0]]
    return build_lattice(labels, pairs, ortho_map, name=name, carrier=tuple(members))


# --------------------------------------------------------------------------
# Matrix file format


def subspace_to_json(s: Subspace) -> dict:
    return {"d": s.d, "basis": encode_complex(s.basis) if s.dim else [[] for _ in range(s.d)]}


def subspace_from_json(data: dict, *, orthonormalize: bool = True) -> Subspace:
    """Read ``{"d": int, "basis": [[[re, im], ...], ...]}`` (rows of a d x k matrix)."""
    try:
        d = int(data["d"])
        rows = data["basis"]
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed subspace JSON: {exc}") from None
    _check_dim(d, None)
    if len(rows) != d:
        raise DimensionError(f"basis has {len(rows)} rows, expected d = {d}")
    if all(len(r) == 0 for r in rows):
        return zero(d)
    m = decode_complex(rows, 2)
    if orthonormalize:
        return Subspace(_orthonormal_range(m))
    s = Subspace(m)
    s.check()
    return s


def dumps_subspace(s: Subspace) -> str:
    return json.dumps(subspace_to_json(s))
