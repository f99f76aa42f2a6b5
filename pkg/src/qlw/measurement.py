"""Projective tests on pure states with the Lüders update rule.

A test of a proposition is a yes/no measurement of its subspace. Passing
projects the state onto the subspace, failing onto its complement, so an
immediate repetition of a passed test passes with certainty.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from . import hilbert
from ._numeric import decode_complex, encode_complex, resolve_tol
from .effects import make_effect, sequential_product
from .formula import Elementary, Formula, Seq, parse, render
from .hilbert import Subspace

__all__ = [
    "PureState", "Outcome", "TestStep", "MeasurementRecord", "CommensurabilityVerdict",
    "ImpossibleBranchError", "ReplayError", "make_state", "luders_update", "run_sequence",
    "seq_truth_probability", "seq_truth_probability_via_effects", "flip_probability",
    "commensurability_witness", "flatten_seq", "sequence_probability",
    "record_to_json", "record_from_json", "canonical_phase",
]


class ImpossibleBranchError(ValueError):
    def __init__(self, message: str, step: int | None = None, probability: float | None = None):
        self.step = step
        self.probability = probability
        super().__init__(message)


class ReplayError(ValueError):
    pass


class Outcome(str, enum.Enum):
    PASS = "pass"
    FAIL = "fail"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True, eq=False)
class PureState:
    vector: np.ndarray

    @property
    def d(self) -> int:
        return self.vector.shape[0]

    def __repr__(self) -> str:
        return f"PureState({np.round(self.vector, 6).tolist()})"


def make_state(vector, *, normalize: bool = False, tol: float | None = None) -> PureState:
    v = np.array(vector, dtype=complex).ravel()
    if v.size == 0:
        raise ValueError("state vector is empty")
    norm = float(np.linalg.norm(v))
    if normalize:
        if norm <= resolve_tol(tol):
            raise ValueError("cannot normalise the zero vector")
        v = v / norm
    elif abs(norm - 1) > resolve_tol(tol):
        raise ValueError(f"state vector has norm {norm:.12g}, expected 1")
    v.setflags(write=False)
    return PureState(v)


def canonical_phase(v: np.ndarray, tol: float | None = None) -> np.ndarray:
    """Multiply by a global phase so the first non-negligible entry is real positive."""
    v = np.asarray(v, dtype=complex)
    big = np.flatnonzero(np.abs(v) > max(resolve_tol(tol), 1e-12))
    if len(big) == 0:
        return v
    first = v[big[0]]
    return v * (abs(first) / first)


@dataclass(frozen=True)
class TestStep:
    label: str
    subspace: Subspace
    outcome: Outcome
    probability: float


@dataclass(frozen=True)
class MeasurementRecord:
    initial: PureState
    steps: tuple[TestStep, ...]
    final: PureState

    @property
    def probabilities(self) -> list[float]:
        return [s.probability for s in self.steps]

    def validate(self, tol: float | None = None) -> None:
        """Replay from the initial state; raise ReplayError on any mismatch."""
        tol = resolve_tol(tol)
        state = self.initial
        for i, step in enumerate(self.steps):
            try:
                state, p = luders_update(state, step.subspace, step.outcome, tol=tol)
            except ImpossibleBranchError as exc:
                raise ReplayError(f"step {i} ({step.label}) is impossible on replay") from exc
            if abs(p - step.probability) > tol:
                raise ReplayError(f"step {i} ({step.label}): recorded probability "
                                  f"{step.probability} but replay gives {p}")
        if np.max(np.abs(state.vector - self.final.vector), initial=0.0) > tol:
            raise ReplayError("final state differs from replay")


def _pass_probability(state: PureState, P: Subspace) -> float:
    amp = P.basis.conj().T @ state.vector
    return float(np.clip(np.vdot(amp, amp).real, 0.0, 1.0))


def luders_update(s: PureState, P: Subspace, outcome: Outcome | str,
                  tol: float | None = None) -> tuple[PureState, float]:
    """Condition ``s`` on the test of ``P`` giving ``outcome``.

    Returns the normalised post-test state and the outcome probability.
    """
    tol = resolve_tol(tol)
    outcome = Outcome(outcome)
    if s.d != P.d:
        raise hilbert.DimensionError(f"state has dimension {s.d}, subspace lives in C^{P.d}")
    p_pass = _pass_probability(s, P)
    projected = P.projector @ s.vector
    if outcome is Outcome.PASS:
        prob, vec = p_pass, projected
    else:
        prob, vec = 1.0 - p_pass, s.vector - projected
    if prob <= tol:
        raise ImpossibleBranchError(f"outcome {outcome} has probability {prob:.3g}", probability=prob)
    vec = vec / np.linalg.norm(vec)
    vec.setflags(write=False)
    return PureState(vec), prob


def run_sequence(s: PureState, tests: Sequence[tuple[str, Subspace]], policy: str = "all_pass",
                 seed=None, tol: float | None = None) -> MeasurementRecord:
    """Perform the tests in order.

    ``all_pass`` follows the pass branch everywhere (each probability is
    conditional on the previous passes); ``sample`` draws outcomes with a
    seeded generator, which requires ``seed``.
    """
    tol = resolve_tol(tol)
    if policy not in ("all_pass", "sample"):
        raise ValueError(f"unknown policy {policy!r}; expected all_pass or sample")
    if policy == "sample" and seed is None:
        raise ValueError("the sample policy needs a seed")
    rng = np.random.default_rng(seed) if policy == "sample" else None
    state = s
    steps = []
    for i, (label, P) in enumerate(tests):
        if policy == "all_pass":
            outcome = Outcome.PASS
        else:
            outcome = Outcome.PASS if rng.random() < _pass_probability(state, P) else Outcome.FAIL
        try:
            state, prob = luders_update(state, P, outcome, tol=tol)
        except ImpossibleBranchError as exc:
            raise ImpossibleBranchError(f"step {i} ({label}): {exc}", step=i,
                                        probability=exc.probability) from None
        steps.append(TestStep(label, P, outcome, prob))
    return MeasurementRecord(s, tuple(steps), state)


def seq_truth_probability(s: PureState, A: Subspace, B: Subspace) -> float:
    """Probability that ``A &> B`` is verified: ``<s| P_A P_B P_A |s>``."""
    if not (s.d == A.d == B.d):
        raise hilbert.DimensionError("state and subspaces must share the ambient dimension")
    v = B.projector @ (A.projector @ s.vector)
    return float(np.vdot(v, v).real)


def seq_truth_probability_via_effects(s: PureState, A: Subspace, B: Subspace) -> float:
    """Same quantity through the sequential product of the two projectors."""
    op = sequential_product(make_effect(A.projector), make_effect(B.projector)).matrix
    return float(np.real(np.vdot(s.vector, op @ s.vector)))


def flatten_seq(f: Formula | str) -> list[str]:
    """Elementary names of a left-to-right chain ``A &> B &> ...``.

    Sequential conjunctions of compound propositions are refused.
    """
    f = parse(f) if isinstance(f, str) else f
    out: list[str] = []

    def walk(node):
        if isinstance(node, Seq):
            walk(node.left)
            walk(node.right)
        elif isinstance(node, Elementary):
            out.append(node.name)
        else:
            raise ValueError(f"only elementary propositions can be sequenced, got {render(node)!r}")

    walk(f)
    return out


def sequence_probability(s: PureState, f: Formula | str, assignment: Mapping[str, Subspace]) -> float:
    """Probability that every test in the chain ``f`` passes, in order."""
    v = s.vector
    for name in flatten_seq(f):
        if name not in assignment:
            raise KeyError(f"no subspace assigned to {name!r}")
        v = assignment[name].projector @ v
    return float(np.vdot(v, v).real)


# --------------------------------------------------------------------------
# Commensurability as joint decidability


@dataclass(frozen=True)
class CommensurabilityVerdict:
    commuting: bool
    preserved: bool  # A-result survived an interposed B-test on every trial
    max_flip: float
    witness: np.ndarray | None = None
    flip_probability: float | None = None
    trials: int = 0

    def to_dict(self) -> dict:
        return {"commuting": self.commuting, "preserved": self.preserved, "max_flip": self.max_flip,
                "witness": encode_complex(self.witness) if self.witness is not None else None,
                "flip_probability": self.flip_probability, "trials": self.trials}


def flip_probability(s: PureState, A: Subspace, B: Subspace) -> float | None:
    """Chance that ``A`` passed, then ``B`` tested (outcome ignored), then ``A`` fails.

    None when ``A`` cannot pass on ``s``.
    """
    pa = A.projector
    pb = B.projector
    psi = pa @ s.vector
    norm2 = float(np.vdot(psi, psi).real)
    if norm2 <= 1e-15:
        return None
    psi = psi / np.sqrt(norm2)
    q = np.eye(A.d) - pa
    flip = 0.0
    for branch in (pb @ psi, psi - pb @ psi):
        w = q @ branch
        flip += float(np.vdot(w, w).real)
    return flip


def commensurability_witness(A: Subspace, B: Subspace, trials: int = 100, seed=0,
                             tol: float | None = None) -> CommensurabilityVerdict:
    """Probe whether the result of an ``A``-test stays available across a ``B``-test."""
    tol = resolve_tol(tol)
    if A.d != B.d:
        raise hilbert.DimensionError(f"ambient dimensions differ: {A.d} vs {B.d}")
    commuting = hilbert.commutes(A, B, tol)
    candidates = [A.basis[:, i] for i in range(A.dim)]
    if not commuting and A.dim:
        # largest eigenvector of P_A P_B (1 - P_A) P_B P_A maximises the flip within A
        pa, pb = A.projector, B.projector
        m = pa @ pb @ (np.eye(A.d) - pa) @ pb @ pa
        w, v = np.linalg.eigh((m + m.conj().T) / 2)
        candidates.append(v[:, -1])
    candidates += [hilbert.random_state(A.d, [seed, i]) for i in range(trials)]

    max_flip, witness, witness_flip = 0.0, None, None
    for vec in candidates:
        flip = flip_probability(PureState(np.asarray(vec, dtype=complex)), A, B)
        if flip is None:
            continue
        max_flip = max(max_flip, flip)
        if witness is None and flip > tol:
            witness, witness_flip = canonical_phase(vec), flip
    return CommensurabilityVerdict(commuting, witness is None, max_flip, witness, witness_flip,
                                   len(candidates))


# --------------------------------------------------------------------------
# JSON


def record_to_json(r: MeasurementRecord) -> dict:
    return {
        "d": r.initial.d,
        "initial": encode_complex(r.initial.vector),
        "steps": [{"label": s.label, "outcome": s.outcome.value, "probability": s.probability,
                   "subspace": hilbert.subspace_to_json(s.subspace)} for s in r.steps],
        "final": encode_complex(r.final.vector),
    }


def record_from_json(data: dict, *, validate: bool = True, tol: float | None = None) -> MeasurementRecord:
    initial = make_state(decode_complex(data["initial"], 1), tol=tol)
    steps = tuple(TestStep(st["label"], hilbert.subspace_from_json(st["subspace"]), Outcome(st["outcome"]),
                           float(st["probability"])) for st in data["steps"])
    final = make_state(decode_complex(data["final"], 1), tol=tol)
    record = MeasurementRecord(initial, steps, final)
    if validate:
        record.validate(tol)
    return record
