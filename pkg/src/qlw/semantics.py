"""Algebraic semantics: valuations in ortholattice models, formal truth,
countermodel search and law classification.

Connectives are read in the model as meet, join, orthocomplement and the
Sasaki hook ``a' | (a & b)``. Validity verdicts are always relative to a
finite model family and say which one.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from . import hilbert
from .formula import (And, Bottom, Elementary, Formula, Implies, Not, Or, Seq, Top,
                      elementaries, is_sequential, parse, render)
from .omlattice import (NotOrthomodularError, OrthoLattice, check_law, hook_table, standard)

__all__ = [
    "Valuation", "Countermodel", "ValidityReport", "ModelFamily", "LawClass",
    "SequentialFormulaError", "UnassignedError", "BudgetExhausted", "DEFAULT_BUDGET",
    "evaluate", "evaluate_subspaces", "holds", "is_formally_true", "find_countermodel",
    "classify_law", "model_family", "resolve_model", "hilbert_model", "RELATIONS", "FAMILIES",
]

DEFAULT_BUDGET = 5_000_000
RELATIONS = ("proof_equiv", "value_equiv", "implies")
FAMILIES = ("default", "boolean", "oml", "atomic")


class SequentialFormulaError(ValueError):
    """Raised when a lattice evaluation meets a sequential conjunction."""


class UnassignedError(KeyError):
    pass


class BudgetExhausted(RuntimeError):
    pass


@dataclass(frozen=True)
class Valuation:
    model: OrthoLattice
    assignment: Mapping[str, str]

    def __post_init__(self):
        for name, label in self.assignment.items():
            self.model.index(label)


@dataclass(frozen=True)
class Countermodel:
    model: str
    assignment: dict[str, str]
    value: str

    def to_dict(self) -> dict:
        return {"model": self.model, "assignment": dict(self.assignment), "value": self.value}


@dataclass(frozen=True)
class ValidityReport:
    formula: str
    family: str
    status: str  # "valid" | "invalid" | "inconclusive"
    countermodel: Countermodel | None = None
    models_scanned: int = 0
    valuations_scanned: int = 0

    def __post_init__(self):
        if (self.countermodel is not None) != (self.status == "invalid"):
            raise ValueError("countermodel must be present exactly for invalid reports")

    @property
    def valid(self) -> bool | None:
        return {"valid": True, "invalid": False}.get(self.status)

    def to_dict(self) -> dict:
        return {
            "formula": self.formula,
            "family": self.family,
            "status": self.status,
            "valid": self.valid,
            "countermodel": self.countermodel.to_dict() if self.countermodel else None,
            "models_scanned": self.models_scanned,
            "valuations_scanned": self.valuations_scanned,
        }


# --------------------------------------------------------------------------
# Evaluation


def _as_formula(f: Formula | str) -> Formula:
    return parse(f) if isinstance(f, str) else f


def _require_oml(L: OrthoLattice) -> None:
    if not L.is_orthomodular:
        w = L.verdict("orthomodular").witness
        raise NotOrthomodularError(f"model {L.name} is not orthomodular (witness {', '.join(w)})")


def _eval_array(f: Formula, L: OrthoLattice, env: Mapping[str, np.ndarray], hook: np.ndarray):
    """Element indices of ``f`` for a batch of assignments (numpy broadcasting)."""
    if isinstance(f, Elementary):
        try:
            return env[f.name]
        except KeyError:
            raise UnassignedError(f"no value assigned to {f.name!r}") from None
    if isinstance(f, Top):
        return L.top
    if isinstance(f, Bottom):
        return L.bottom
    if isinstance(f, Not):
        return L.ortho[_eval_array(f.child, L, env, hook)]
    if isinstance(f, Seq):
        raise SequentialFormulaError(
            f"sequential conjunction in {render(f)!r} has no lattice value; use the measurement module")
    left = _eval_array(f.left, L, env, hook)
    right = _eval_array(f.right, L, env, hook)
    if isinstance(f, And):
        return L.meet[left, right]
    if isinstance(f, Or):
        return L.join[left, right]
    if isinstance(f, Implies):
        return hook[left, right]
    raise TypeError(f"not a formula: {f!r}")


def evaluate(f: Formula | str, v: Valuation) -> str:
    """Lattice element denoted by ``f`` under ``v``."""
    f = _as_formula(f)
    _require_oml(v.model)
    L = v.model
    env = {name: L.index(label) for name, label in v.assignment.items()}
    return L.elements[int(_eval_array(f, L, env, hook_table(L)))]


def evaluate_subspaces(f: Formula | str, assignment: Mapping[str, hilbert.Subspace],
                       d: int | None = None) -> hilbert.Subspace:
    """Evaluate ``f`` directly on subspaces (no finite lattice needed)."""
    f = _as_formula(f)
    if d is None:
        if not assignment:
            raise ValueError("ambient dimension needed for a formula without elementaries")
        d = next(iter(assignment.values())).d

    def ev(node):
        if isinstance(node, Elementary):
            try:
                return assignment[node.name]
            except KeyError:
                raise UnassignedError(f"no value assigned to {node.name!r}") from None
        if isinstance(node, Top):
            return hilbert.full(d)
        if isinstance(node, Bottom):
            return hilbert.zero(d)
        if isinstance(node, Not):
            return hilbert.ortho(ev(node.child))
        if isinstance(node, Seq):
            raise SequentialFormulaError("sequential conjunction has no subspace value")
        a, b = ev(node.left), ev(node.right)
        if isinstance(node, And):
            return hilbert.meet(a, b)
        if isinstance(node, Or):
            return hilbert.join(a, b)
        return hilbert.join(hilbert.ortho(a), hilbert.meet(a, b))

    return ev(f)


def holds(relation: str, fA: Formula | str, fB: Formula | str, v: Valuation) -> bool:
    """Binary relations between propositions under a valuation.

    ``implies`` is the lattice order. ``proof_equiv`` and ``value_equiv``
    both reduce to equality of values in an algebraic model.
    """
    if relation not in RELATIONS:
        raise ValueError(f"unknown relation {relation!r}; expected one of {', '.join(RELATIONS)}")
    a, b = evaluate(fA, v), evaluate(fB, v)
    if relation == "implies":
        return v.model.le(a, b)
    return a == b


# --------------------------------------------------------------------------
# Model families


@dataclass(frozen=True)
class ModelFamily:
    name: str
    models: tuple[OrthoLattice, ...] = field(repr=False)

    def __post_init__(self):
        if not self.models:
            raise ValueError(f"model family {self.name!r} is empty")
        for L in self.models:
            _require_oml(L)

    def describe(self) -> str:
        return f"{self.name}: {', '.join(L.name for L in self.models)}"


_HILBERT_NAME = re.compile(r"hilbert\(d=(\d+),rays=(\d+),seed=(-?\d+)\)")

# (d, number of random rays): C^2 rays generate MO(k); two generic rays in
# C^3 generate a 12-element lattice. Three generic rays in C^3 do not close.
_HILBERT_SPECS = ((2, 2), (2, 3), (3, 2))


def hilbert_model(d: int, rays: int, seed: int = 0) -> OrthoLattice:
    gens = [hilbert.random_subspace(d, 1, [seed, d, i]) for i in range(rays)]
    names = [f"r{i}" for i in range(rays)]
    return hilbert.as_lattice(gens, names=names, name=f"hilbert(d={d},rays={rays},seed={seed})")


def resolve_model(name: str) -> OrthoLattice:
    """Rebuild a family member from its name, e.g. ``MO(2)`` or ``hilbert(d=2,rays=3,seed=0)``."""
    m = _HILBERT_NAME.fullmatch(name.replace(" ", ""))
    if m:
        d, rays, seed = map(int, m.groups())
        return hilbert_model(d, rays, seed)
    return standard(name)


def model_family(name: str = "default", seed: int = 0) -> ModelFamily:
    """Named model families.

    ``boolean``: boolean(1..3). ``oml``: boolean(1..3) and MO(1..4).
    ``default``: the ``oml`` lattices plus subspace lattices generated by
    seeded random rays in C^2 and C^3. ``atomic``: members of ``default``
    that are atomic and satisfy the covering law.
    """
    if name not in FAMILIES:
        raise ValueError(f"unknown model family {name!r}; expected one of {', '.join(FAMILIES)}")
    models = [standard("boolean", n) for n in (1, 2, 3)]
    if name != "boolean":
        models += [standard("MO", n) for n in (1, 2, 3, 4)]
    if name in ("default", "atomic"):
        models += [hilbert_model(d, k, seed) for d, k in _HILBERT_SPECS]
    if name == "atomic":
        models = [L for L in models if check_law(L, "atomic").holds and check_law(L, "covering").holds]
    label = name if seed == 0 or name in ("boolean", "oml") else f"{name}(seed={seed})"
    return ModelFamily(label, tuple(models))


# --------------------------------------------------------------------------
# Validity


def _first_failure(f: Formula, L: OrthoLattice, names: Sequence[str], limit: int):
    """Scan the first ``limit`` assignments in lexicographic order.

    Returns (index of the first assignment whose value is not top, or None;
    number of assignments scanned; value array).
    """
    n, k = len(L), len(names)
    total = n ** k
    count = min(total, limit)
    hook = hook_table(L)
    chunk = 1 << 20
    for start in range(0, count, chunk):
        idx = np.arange(start, min(count, start + chunk))
        digits = np.unravel_index(idx, (n,) * k) if k else ()
        env = dict(zip(names, digits))
        values = np.broadcast_to(_eval_array(f, L, env, hook), idx.shape)
        bad = np.flatnonzero(values != L.top)
        if len(bad):
            i = int(bad[0])
            return start + i, start + i + 1, int(values[i])
    return None, count, None


def find_countermodel(f: Formula | str, family: ModelFamily | str = "default",
                      budget: int = DEFAULT_BUDGET) -> ValidityReport:
    """First countermodel in scan order (family order, then lexicographic
    assignments over sorted identifiers). Running out of ``budget``
    valuations yields an ``inconclusive`` report, never a validity claim.
    """
    f = _as_formula(f)
    if isinstance(family, str):
        family = model_family(family)
    if is_sequential(f):
        raise SequentialFormulaError("formal truth is defined for logical (non-sequential) formulas only")
    names = sorted(elementaries(f))
    scanned = models = 0
    for L in family.models:
        remaining = budget - scanned
        if remaining <= 0:
            return ValidityReport(render(f), family.name, "inconclusive", None, models, scanned)
        models += 1
        hit, used, value = _first_failure(f, L, names, remaining)
        scanned += used
        if hit is not None:
            digits = np.unravel_index(hit, (len(L),) * len(names)) if names else ()
            assignment = {name: L.elements[int(i)] for name, i in zip(names, digits)}
            cm = Countermodel(L.name, assignment, L.elements[value])
            return ValidityReport(render(f), family.name, "invalid", cm, models, scanned)
        if used < len(L) ** len(names):
            return ValidityReport(render(f), family.name, "inconclusive", None, models, scanned)
    return ValidityReport(render(f), family.name, "valid", None, models, scanned)


def is_formally_true(f: Formula | str, family: ModelFamily | str = "default",
                     cap: int = DEFAULT_BUDGET) -> ValidityReport:
    """``1 <= f`` under every assignment in every model of ``family``."""
    return find_countermodel(f, family, cap)


class LawClass(str, enum.Enum):
    QUANTUM_VALID = "quantum_valid"
    CLASSICAL_ONLY = "classical_only"
    INVALID_EVERYWHERE = "invalid_everywhere"

    def __str__(self) -> str:
        return self.value


def classify_law(f: Formula | str, *, family: ModelFamily | str = "default",
                 budget: int = DEFAULT_BUDGET) -> LawClass:
    f = _as_formula(f)
    quantum = find_countermodel(f, family, budget)
    if quantum.status == "inconclusive":
        raise BudgetExhausted(f"budget of {budget} valuations exhausted on {quantum.family}")
    if quantum.status == "valid":
        return LawClass.QUANTUM_VALID
    classical = find_countermodel(f, "boolean", budget)
    if classical.status == "inconclusive":
        raise BudgetExhausted(f"budget of {budget} valuations exhausted on boolean models")
    if classical.status == "valid":
        return LawClass.CLASSICAL_ONLY
    return LawClass.INVALID_EVERYWHERE
