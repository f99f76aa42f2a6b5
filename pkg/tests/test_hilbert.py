import itertools
import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from qlw import hilbert as hb
from qlw.omlattice import LAWS, boolean, check_law, commensurable, find_isomorphism, mo

TOL = 1e-9
S = 1 / np.sqrt(2)
ZP, ZM, XP = hb.ray([1, 0]), hb.ray([0, 1]), hb.ray([S, S])


def test_span_examples():
    assert hb.span([[1, 0]]).dim == 1
    assert hb.span([[1, 0], [2, 0]]).dim == 1
    assert hb.span([], d=2).dim == 0
    with pytest.raises(hb.DimensionError):
        hb.span([])
    with pytest.raises(hb.DimensionError):
        hb.span([[1, 0], [1, 0, 0]])
    with pytest.raises(hb.DimensionError):
        hb.span([np.ones(17)])
    assert hb.span([np.ones(17)], max_dim=32).d == 17


def test_span_rank_threshold():
    # relative threshold 1e-8 of the largest singular value
    assert hb.span([[1, 0], [1, 1e-10]]).dim == 1
    assert hb.span([[1, 0], [1, 1e-6]]).dim == 2
    # absolute floor when everything is tiny
    assert hb.span([[1e-13, 0]]).dim == 0


def test_subspace_ops_qubit():
    assert hb.meet(ZP, XP).dim == 0
    assert hb.join(ZP, XP).dim == 2
    assert hb.join(ZP, ZM).dim == 2
    assert hb.equal(hb.ortho(hb.span([[1, 0]])), hb.span([[0, 1]]))
    with pytest.raises(hb.DimensionError):
        hb.join(ZP, hb.full(3))


def test_commutes_qubit():
    assert hb.commutes(ZP, ZM)
    assert not hb.commutes(ZP, XP)
    # [[1,0],[0,0]] @ [[.5,.5],[.5,.5]] - reverse = [[0,.5],[-.5,0]]
    assert hb.commutator_norm(ZP, XP) == pytest.approx(0.5, abs=1e-15)
    assert hb.commutes(XP, hb.full(2))


def test_random_subspace():
    a, b = hb.random_subspace(2, 1, 7), hb.random_subspace(2, 1, 7)
    assert np.array_equal(a.basis, b.basis)
    assert hb.random_subspace(3, 0, 1).dim == 0
    f = hb.random_subspace(4, 4, 2)
    assert np.max(np.abs(f.projector - np.eye(4))) <= TOL
    with pytest.raises(hb.DimensionError):
        hb.random_subspace(2, 3, 0)


def test_projector_invariants():
    for seed in range(20):
        s = hb.random_subspace(5, seed % 6, seed)
        p = s.projector
        s.check()
        assert np.max(np.abs(p - p.conj().T)) <= TOL
        assert np.max(np.abs(p @ p - p)) <= TOL


def test_as_lattice_examples():
    assert len(hb.as_lattice([ZP])) == 4
    assert find_isomorphism(hb.as_lattice([ZP]), boolean(2))
    L = hb.as_lattice([ZP, XP], names=["z+", "x+"])
    assert len(L) == 6 and find_isomorphism(L, mo(2))
    assert len(hb.as_lattice([], d=2)) == 2
    with pytest.raises(hb.ClosureOverflowError) as info:
        hb.as_lattice([hb.random_subspace(3, 1, [0, i]) for i in range(3)], max_elements=40)
    assert info.value.limit == 40


def test_three_rays_in_c2_give_mo3():
    L = hb.as_lattice([hb.random_subspace(2, 1, [3, i]) for i in range(3)])
    assert find_isomorphism(L, mo(3))


def test_as_lattice_order_is_inclusion():
    L = hb.as_lattice([hb.random_subspace(3, 1, 11), hb.random_subspace(3, 1, 12)])
    for i, j in itertools.product(range(len(L)), repeat=2):
        assert L.leq[i, j] == hb.leq(L.carrier[i], L.carrier[j])
        assert hb.equal(L.carrier[L.meet[i, j]], hb.meet(L.carrier[i], L.carrier[j]))
        assert hb.equal(L.carrier[L.join[i, j]], hb.join(L.carrier[i], L.carrier[j]))
    assert check_law(L, "orthomodular").holds
    assert not check_law(L, "distributive").holds


@pytest.mark.parametrize("d", [2, 3, 4, 5])
def test_orthomodularity_sampled(d):
    rng = np.random.default_rng(d)
    for t in range(100):
        a = hb.random_subspace(d, int(rng.integers(0, d + 1)), [d, t, 0])
        c = hb.random_subspace(d, int(rng.integers(0, d + 1)), [d, t, 1])
        b = hb.join(a, c)
        assert hb.leq(a, b)
        assert hb.equal(b, hb.join(a, hb.meet(b, hb.ortho(a))))


def test_distributivity_fails_in_c2():
    zm = hb.ortho(ZP)
    lhs = hb.meet(XP, hb.join(ZP, zm))
    rhs = hb.join(hb.meet(XP, ZP), hb.meet(XP, zm))
    assert lhs.dim == 1 and rhs.dim == 0


def test_covering_law_sampled():
    for t in range(100):
        d = 2 + t % 4
        b = hb.random_subspace(d, t % d, [t, 0])
        p = hb.random_subspace(d, 1, [t, 1])
        assert hb.meet(p, b).dim == 0
        assert hb.join(p, b).dim == b.dim + 1


@given(st.integers(2, 5), st.integers(0, 2**32 - 1), st.data())
def test_de_morgan_and_double_ortho(d, seed, data):
    ka = data.draw(st.integers(0, d))
    kb = data.draw(st.integers(0, d))
    a, b = hb.random_subspace(d, ka, [seed, 0]), hb.random_subspace(d, kb, [seed, 1])
    assert hb.equal(hb.ortho(hb.ortho(a)), a)
    assert hb.equal(hb.ortho(hb.join(a, b)), hb.meet(hb.ortho(a), hb.ortho(b)))
    assert hb.equal(hb.ortho(hb.meet(a, b)), hb.join(hb.ortho(a), hb.ortho(b)))


def test_commensurable_iff_commutes_on_lattices():
    zp3 = hb.span([[1, 0, 0]])
    plane = hb.span([[1, 0, 0], [0, 1, 0]])
    instances = [
        [ZP, XP], [ZP, ZM], [ZP],
        [zp3, plane], [zp3, hb.ray([S, S, 0])], [plane, hb.ray([S, 0, S])],
        [hb.random_subspace(3, 1, 1), hb.random_subspace(3, 1, 2)],
    ]
    for gens in instances:
        L = hb.as_lattice(gens)
        for i, j in itertools.product(range(len(L)), repeat=2):
            a, b = L.elements[i], L.elements[j]
            assert commensurable(L, a, b) == hb.commutes(L.carrier[i], L.carrier[j])


def test_json_round_trip():
    for s in (hb.random_subspace(3, 2, 4), hb.zero(2), hb.full(2)):
        data = json.loads(json.dumps(hb.subspace_to_json(s)))
        assert data["d"] == s.d
        back = hb.subspace_from_json(data)
        assert hb.equal(back, s)
    raw = {"d": 2, "basis": [[[1, 0]], [[0, 0]]]}
    assert hb.equal(hb.subspace_from_json(raw, orthonormalize=False), ZP)
    with pytest.raises(ValueError):
        hb.subspace_from_json({"d": 2, "basis": [[[2, 0]], [[0, 0]]]}, orthonormalize=False)
    with pytest.raises(hb.DimensionError):
        hb.subspace_from_json({"d": 3, "basis": [[[1, 0]], [[0, 0]]]})


def test_named_rays():
    assert np.allclose(hb.named_ray("y-"), [S, -1j * S])
    assert np.allclose(hb.named_ray("z−"), [0, 1])
    with pytest.raises(KeyError):
        hb.named_ray("w+")
