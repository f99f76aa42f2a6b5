"""Finite ortholattices: construction, lattice operations and law checks.

Elements are addressed by label at the public surface; internally every
table (order, meet, join, ortho) is indexed by element position so that
checks can run vectorised over numpy arrays.
"""

from __future__ import annotations

import itertools
import json
import string
from dataclasses import dataclass, field
from typing import Any, Iterable, Sequence

import numpy as np

__all__ = [
    "OrthoLattice", "LawVerdict", "LatticeError", "NotAPosetError", "MissingBoundsError",
    "MissingMeetError", "MissingJoinError", "OrthoError", "OrthoNotInvolutiveError",
    "OrthoNotAntitoneError", "OrthoNotComplementError", "IncompatibleGeneratorsError",
    "NotOrthomodularError", "LAWS", "build_lattice", "standard", "boolean", "mo", "o6",
    "lattice_ops", "check_law", "commensurable", "boolean_closure", "sasaki_projection",
    "sasaki_hook", "find_isomorphism", "load_lattice", "lattice_to_json",
]

LAWS = ("orthomodular", "distributive", "modular", "atomic", "covering")


class LatticeError(ValueError):
    """Base class for invalid lattice specifications."""


class NotAPosetError(LatticeError):
    pass


class MissingBoundsError(LatticeError):
    pass


class MissingMeetError(LatticeError):
    pass


class MissingJoinError(LatticeError):
    pass


class OrthoError(LatticeError):
    pass


class OrthoNotInvolutiveError(OrthoError):
    pass


class OrthoNotAntitoneError(OrthoError):
    pass


class OrthoNotComplementError(OrthoError):
    pass


class IncompatibleGeneratorsError(ValueError):
    def __init__(self, a: str, b: str):
        self.pair = (a, b)
        super().__init__(f"generators {a!r} and {b!r} are not commensurable")


class NotOrthomodularError(ValueError):
    pass


@dataclass(frozen=True)
class LawVerdict:
    law: str
    holds: bool
    witness: tuple[str, ...] | None = None

    def __post_init__(self):
        if self.holds == (self.witness is not None):
            raise ValueError("a witness is present exactly when the law fails")

    def to_dict(self) -> dict:
        return {"law": self.law, "holds": self.holds,
                "witness": list(self.witness) if self.witness is not None else None}


@dataclass(eq=False)
class OrthoLattice:
    """A validated finite ortholattice. Build with :func:`build_lattice`."""

    name: str
    elements: tuple[str, ...]
    leq: np.ndarray  # leq[i, j] is True iff element i <= element j
    ortho: np.ndarray
    meet: np.ndarray
    join: np.ndarray
    bottom: int
    top: int
    carrier: Any = None  # optional concrete realisation, e.g. one Subspace per element
    _index: dict = field(init=False, repr=False)
    _verdicts: dict = field(init=False, repr=False, default_factory=dict)

    def __post_init__(self):
        self._index = {label: i for i, label in enumerate(self.elements)}
        for arr in (self.leq, self.ortho, self.meet, self.join):
            arr.setflags(write=False)

    def __len__(self) -> int:
        return len(self.elements)

    def __repr__(self) -> str:
        return f"OrthoLattice({self.name!r}, {len(self)} elements)"

    def index(self, label: str) -> int:
        try:
            return self._index[label]
        except KeyError:
            raise KeyError(f"{label!r} is not an element of {self.name}") from None

    def label(self, i: int) -> str:
        return self.elements[i]

    def le(self, a: str, b: str) -> bool:
        return bool(self.leq[self.index(a), self.index(b)])

    def meet_of(self, a: str, b: str) -> str:
        return self.elements[self.meet[self.index(a), self.index(b)]]

    def join_of(self, a: str, b: str) -> str:
        return self.elements[self.join[self.index(a), self.index(b)]]

    def ortho_of(self, a: str) -> str:
        return self.elements[self.ortho[self.index(a)]]

    @property
    def atoms(self) -> list[int]:
        """Indices of the elements covering the bottom."""
        return [i for i in range(len(self)) if self._covers(i, self.bottom)]

    def _covers(self, upper: int, lower: int) -> bool:
        if upper == lower or not self.leq[lower, upper]:
            return False
        between = self.leq[lower] & self.leq[:, upper]
        return int(between.sum()) == 2

    def verdict(self, law: str) -> LawVerdict:
        if law not in self._verdicts:
            self._verdicts[law] = _CHECKERS[law](self)
        return self._verdicts[law]

    @property
    def is_orthomodular(self) -> bool:
        return self.verdict("orthomodular").holds


# --------------------------------------------------------------------------
# Construction


def build_lattice(elements: Sequence[str], leq_pairs: Iterable[tuple[str, str]],
                  ortho: dict[str, str], name: str = "lattice", carrier: Any = None) -> OrthoLattice:
    """Validate an order + orthocomplement specification and tabulate it.

    ``leq_pairs`` only needs to generate the order; its reflexive-transitive
    closure is taken.
    """
    elements = tuple(elements)
    n = len(elements)
    if n == 0:
        raise MissingBoundsError("lattice has no elements")
    index = {}
    for i, label in enumerate(elements):
        if not isinstance(label, str):
            raise LatticeError(f"element labels must be strings, got {label!r}")
        if label in index:
            raise LatticeError(f"duplicate element label {label!r}")
        index[label] = i

    def idx(label):
        if label not in index:
            raise LatticeError(f"unknown element {label!r}")
        return index[label]

    leq = np.eye(n, dtype=bool)
    for a, b in leq_pairs:
        leq[idx(a), idx(b)] = True
    for k in range(n):  # Warshall
        leq |= leq[:, k:k + 1] & leq[k:k + 1, :]

    cyc = leq & leq.T & ~np.eye(n, dtype=bool)
    if cyc.any():
        i, j = map(int, np.argwhere(cyc)[0])
        raise NotAPosetError(f"order has a cycle: {elements[i]} <= {elements[j]} <= {elements[i]}")

    bottoms = np.flatnonzero(leq.all(axis=1))
    tops = np.flatnonzero(leq.all(axis=0))
    if len(bottoms) != 1 or len(tops) != 1:
        raise MissingBoundsError("lattice needs a unique bottom and a unique top element")
    bottom, top = int(bottoms[0]), int(tops[0])

    meet = _bound_table(leq, elements, lower=True)
    join = _bound_table(leq, elements, lower=False)

    missing = [label for label in elements if label not in ortho]
    if missing:
        raise OrthoError(f"ortho is not defined on {missing[0]!r}")
    extra = [label for label in ortho if label not in index]
    if extra:
        raise OrthoError(f"ortho mentions unknown element {extra[0]!r}")
    perp = np.array([idx(ortho[label]) for label in elements], dtype=np.intp)

    bad = np.flatnonzero(perp[perp] != np.arange(n))
    if len(bad):
        a = elements[bad[0]]
        raise OrthoNotInvolutiveError(f"ortho not involutive: ortho(ortho({a})) = {elements[perp[perp[bad[0]]]]}")
    anti = leq & ~leq[np.ix_(perp, perp)].T
    if anti.any():
        i, j = map(int, np.argwhere(anti)[0])
        raise OrthoNotAntitoneError(
            f"ortho not antitone: {elements[i]} <= {elements[j]} but not {elements[perp[j]]} <= {elements[perp[i]]}")
    for i in range(n):
        m, j = meet[i, perp[i]], join[i, perp[i]]
        if m != bottom:
            raise OrthoNotComplementError(
                f"ortho not a complement: {elements[i]} & {elements[perp[i]]} = {elements[m]} != {elements[bottom]}")
        if j != top:
            raise OrthoNotComplementError(
                f"ortho not a complement: {elements[i]} | {elements[perp[i]]} = {elements[j]} != {elements[top]}")
    return OrthoLattice(name, elements, leq, perp, meet, join, bottom, top, carrier)


def _bound_table(leq: np.ndarray, elements, lower: bool) -> np.ndarray:
    n = len(elements)
    rel = leq if lower else leq.T  # rel[x, y]: x lies on the "bound" side of y
    table = np.empty((n, n), dtype=np.intp)
    for a in range(n):
        for b in range(a, n):
            cands = np.flatnonzero(rel[:, a] & rel[:, b])
            # the greatest lower bound dominates every lower bound
            best = cands[rel[np.ix_(cands, cands)].all(axis=0)] if len(cands) else cands
            if len(best) != 1:
                kind, err = ("meet", MissingMeetError) if lower else ("join", MissingJoinError)
                raise err(f"no {kind} for {elements[a]} and {elements[b]}")
            table[a, b] = table[b, a] = best[0]
    return table


def boolean(n: int) -> OrthoLattice:
    """Powerset of ``n`` atoms labelled by letter strings, e.g. ``"ac"``; bounds are ``"0"``/``"1"``."""
    if not 1 <= n <= 8:
        raise ValueError(f"boolean(n) needs 1 <= n <= 8, got {n}")
    letters = string.ascii_lowercase[:n]
    full = (1 << n) - 1

    def lab(mask):
        if mask == 0:
            return "0"
        if mask == full:
            return "1"
        return "".join(letters[i] for i in range(n) if mask >> i & 1)

    masks = sorted(range(full + 1), key=lambda m: (bin(m).count("1"), [-(m >> i & 1) for i in range(n)]))
    elements = [lab(m) for m in masks]
    pairs = [(lab(m), lab(m | 1 << i)) for m in masks for i in range(n) if not m >> i & 1]
    ortho = {lab(m): lab(full ^ m) for m in masks}
    return build_lattice(elements, pairs, ortho, name=f"boolean({n})")


def mo(n: int) -> OrthoLattice:
    """MO(n): ``n`` orthocomplementary atom pairs ``x``/``x'`` between 0 and 1.

    Elements are ordered ``0, a, b, ..., b', a', 1``.
    """
    if not 1 <= n <= 26:
        raise ValueError(f"MO(n) needs 1 <= n <= 26, got {n}")
    atoms = list(string.ascii_lowercase[:n])
    primes = [x + "'" for x in reversed(atoms)]
    elements = ["0", *atoms, *primes, "1"]
    pairs = [("0", x) for x in elements[1:-1]] + [(x, "1") for x in elements[1:-1]]
    ortho = {"0": "1", "1": "0"}
    for x in atoms:
        ortho[x], ortho[x + "'"] = x + "'", x
    return build_lattice(elements, pairs, ortho, name=f"MO({n})")


def o6() -> OrthoLattice:
    """The benzene ring: 0 < a < b < 1 and 0 < b' < a' < 1."""
    elements = ["0", "a", "b", "b'", "a'", "1"]
    pairs = [("0", "a"), ("a", "b"), ("b", "1"), ("0", "b'"), ("b'", "a'"), ("a'", "1")]
    ortho = {"0": "1", "1": "0", "a": "a'", "a'": "a", "b": "b'", "b'": "b"}
    return build_lattice(elements, pairs, ortho, name="O6")


def standard(name: str, n: int | None = None) -> OrthoLattice:
    """``standard("boolean", 3)``, ``standard("MO", 2)``, ``standard("O6")``.

    Also accepts the compact forms ``"boolean(3)"`` and ``"MO(2)"``.
    """
    key = name.strip()
    if n is None and key.endswith(")") and "(" in key:
        key, arg = key[:-1].split("(", 1)
        try:
            n = int(arg)
        except ValueError:
            raise ValueError(f"bad lattice size in {name!r}") from None
    low = key.lower()
    if low == "o6":
        return o6()
    if n is None:
        raise ValueError(f"{key} needs a size n")
    if low == "boolean":
        return boolean(n)
    if low == "mo":
        return mo(n)
    raise ValueError(f"unknown standard lattice {name!r}")


# --------------------------------------------------------------------------
# Operations


def lattice_ops(L: OrthoLattice, a: str, b: str) -> dict[str, str]:
    return {"meet": L.meet_of(a, b), "join": L.join_of(a, b),
            "ortho_a": L.ortho_of(a), "ortho_b": L.ortho_of(b)}


def _witness(L: OrthoLattice, bad: np.ndarray) -> tuple[str, ...]:
    # np.argwhere walks in C order, i.e. lexicographic index order
    return tuple(L.elements[i] for i in np.argwhere(bad)[0])


def _check_orthomodular(L: OrthoLattice) -> LawVerdict:
    # b = a | (b & a') whenever a <= b
    rhs = L.join[np.arange(len(L))[:, None], L.meet[L.ortho[:, None], np.arange(len(L))[None, :]]]
    bad = L.leq & (rhs != np.arange(len(L))[None, :])
    if bad.any():
        return LawVerdict("orthomodular", False, _witness(L, bad))
    return LawVerdict("orthomodular", True)


def _check_distributive(L: OrthoLattice) -> LawVerdict:
    a, b, c = np.ix_(*(np.arange(len(L)),) * 3)
    lhs = L.meet[a, L.join[b, c]]
    rhs = L.join[L.meet[a, b], L.meet[a, c]]
    bad = lhs != rhs
    if bad.any():
        return LawVerdict("distributive", False, _witness(L, bad))
    return LawVerdict("distributive", True)


def _check_modular(L: OrthoLattice) -> LawVerdict:
    # a <= c  implies  a | (b & c) = (a | b) & c
    a, b, c = np.ix_(*(np.arange(len(L)),) * 3)
    lhs = L.join[a, L.meet[b, c]]
    rhs = L.meet[L.join[a, b], c]
    bad = L.leq[a, c] & (lhs != rhs)
    if bad.any():
        return LawVerdict("modular", False, _witness(L, bad))
    return LawVerdict("modular", True)


def _check_atomic(L: OrthoLattice) -> LawVerdict:
    atoms = L.atoms
    for x in range(len(L)):
        if x != L.bottom and not L.leq[atoms, x].any():
            return LawVerdict("atomic", False, (L.elements[x],))
    return LawVerdict("atomic", True)


def _check_covering(L: OrthoLattice) -> LawVerdict:
    # for an atom p with p & b = 0 nothing lies strictly between b and p | b
    n = len(L)
    for p in L.atoms:
        for b in range(n):
            if L.meet[p, b] != L.bottom:
                continue
            upper = L.join[p, b]
            strict = L.leq[b] & L.leq[:, upper]
            strict[[b, upper]] = False
            if strict.any():
                return LawVerdict("covering", False,
                                  (L.elements[p], L.elements[b], L.elements[int(np.flatnonzero(strict)[0])]))
    return LawVerdict("covering", True)


_CHECKERS = {
    "orthomodular": _check_orthomodular,
    "distributive": _check_distributive,
    "modular": _check_modular,
    "atomic": _check_atomic,
    "covering": _check_covering,
}


def check_law(L: OrthoLattice, law: str) -> LawVerdict:
    """Exhaustively test ``law``; on failure the witness is the first
    violating tuple in element-index order.

    Witness shapes: orthomodular ``(a, b)`` with a <= b; distributive
    ``(a, b, c)``; modular ``(a, b, c)`` with a <= c; atomic ``(x,)`` a
    nonzero element above no atom; covering ``(p, b, c)`` with
    b < c < p | b.
    """
    if law not in _CHECKERS:
        raise ValueError(f"unknown law {law!r}; expected one of {', '.join(LAWS)}")
    return L.verdict(law)


def commensurable(L: OrthoLattice, a: str, b: str) -> bool:
    i, j = L.index(a), L.index(b)
    return _commensurable_idx(L, i, j)


def _commensurable_idx(L: OrthoLattice, i: int, j: int) -> bool:
    return L.join[L.meet[i, j], L.meet[i, L.ortho[j]]] == i


def boolean_closure(L: OrthoLattice, gens: Iterable[str]) -> OrthoLattice:
    """Smallest sub-ortholattice containing ``gens`` (which must be pairwise commensurable)."""
    gens = list(dict.fromkeys(gens))
    idx = [L.index(g) for g in gens]
    for (ga, i), (gb, j) in itertools.combinations(zip(gens, idx), 2):
        if not (_commensurable_idx(L, i, j) and _commensurable_idx(L, j, i)):
            raise IncompatibleGeneratorsError(ga, gb)

    members = {L.bottom, L.top, *idx}
    frontier = set(members)
    while frontier:
        new = set()
        for x in frontier:
            new.add(int(L.ortho[x]))
            for y in members:
                new.add(int(L.meet[x, y]))
                new.add(int(L.join[x, y]))
        frontier = new - members
        members |= frontier

    keep = sorted(members)
    labels = [L.elements[i] for i in keep]
    sub = L.leq[np.ix_(keep, keep)]
    pairs = [(labels[a], labels[b]) for a, b in np.argwhere(sub)]
    ortho = {L.elements[i]: L.elements[L.ortho[i]] for i in keep}
    name = f"{L.name}<{','.join(gens)}>"
    carrier = [L.carrier[i] for i in keep] if L.carrier is not None else None
    out = build_lattice(labels, pairs, ortho, name=name, carrier=carrier)
    verdict = check_law(out, "distributive")
    if not verdict.holds:  # pragma: no cover - guarded by the commensurability check
        raise AssertionError(f"closure of commensurable generators is not Boolean: {verdict}")
    return out


def _require_orthomodular(L: OrthoLattice) -> None:
    verdict = L.verdict("orthomodular")
    if not verdict.holds:
        raise NotOrthomodularError(
            f"{L.name} is not orthomodular (witness {', '.join(verdict.witness)})")


def sasaki_projection(L: OrthoLattice, a: str, b: str) -> str:
    """``a & (a' | b)``, the projection of ``b`` onto ``a``."""
    _require_orthomodular(L)
    i, j = L.index(a), L.index(b)
    return L.elements[L.meet[i, L.join[L.ortho[i], j]]]


def sasaki_hook(L: OrthoLattice, a: str, b: str) -> str:
    """``a' | (a & b)``; equals the top exactly when ``a <= b``."""
    _require_orthomodular(L)
    i, j = L.index(a), L.index(b)
    return L.elements[hook_table(L)[i, j]]


def hook_table(L: OrthoLattice) -> np.ndarray:
    n = np.arange(len(L))
    return L.join[L.ortho[:, None], L.meet[n[:, None], n[None, :]]]


# --------------------------------------------------------------------------
# Isomorphism


def find_isomorphism(L1: OrthoLattice, L2: OrthoLattice, *, ortho: bool = True) -> dict[str, str] | None:
    """A label map preserving order (and ortho, if requested), or None."""
    n = len(L1)
    if n != len(L2):
        return None
    down1, down2 = L1.leq.sum(axis=0), L2.leq.sum(axis=0)
    up1, up2 = L1.leq.sum(axis=1), L2.leq.sum(axis=1)
    if sorted(zip(down1, up1)) != sorted(zip(down2, up2)):
        return None
    image = [-1] * n
    used = [False] * n

    def consistent(i, j):
        if (down1[i], up1[i]) != (down2[j], up2[j]):
            return False
        for k in range(i):
            if L1.leq[i, k] != L2.leq[j, image[k]] or L1.leq[k, i] != L2.leq[image[k], j]:
                return False
            if ortho and (L1.ortho[i] == k) != (L2.ortho[j] == image[k]):
                return False
        if ortho and (L1.ortho[i] == i) != (L2.ortho[j] == j):
            return False
        return True

    def search(i):
        if i == n:
            return True
        for j in range(n):
            if not used[j] and consistent(i, j):
                image[i], used[j] = j, True
                if search(i + 1):
                    return True
                used[j] = False
        return False

    if not search(0):
        return None
    return {L1.elements[i]: L2.elements[image[i]] for i in range(n)}


# --------------------------------------------------------------------------
# File format


def lattice_from_dict(data: dict) -> OrthoLattice:
    try:
        elements = data["elements"]
        leq = data.get("leq", [])
        ortho = data["ortho"]
    except (KeyError, TypeError) as exc:
        raise LatticeError(f"lattice file lacks required field {exc}") from None
    if not isinstance(elements, list) or not isinstance(ortho, dict) or not isinstance(leq, list):
        raise LatticeError("lattice file fields have the wrong types")
    pairs = []
    for pair in leq:
        if not isinstance(pair, list) or len(pair) != 2:
            raise LatticeError(f"leq entries must be [lower, upper] pairs, got {pair!r}")
        pairs.append(tuple(pair))
    return build_lattice(elements, pairs, ortho, name=str(data.get("name", "lattice")))


def load_lattice(path) -> OrthoLattice:
    with open(path, encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise LatticeError(f"not valid JSON: {exc}") from None
    return lattice_from_dict(data)


def lattice_to_json(L: OrthoLattice) -> dict:
    """Serialise with covering pairs only (the Hasse diagram)."""
    n = len(L)
    pairs = [[L.elements[i], L.elements[j]] for i in range(n) for j in range(n) if L._covers(j, i)]
    return {"name": L.name, "elements": list(L.elements), "leq": pairs,
            "ortho": {L.elements[i]: L.elements[L.ortho[i]] for i in range(n)}}
