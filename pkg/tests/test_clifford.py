"""Clifford algebras, pinor modules, spin action."""

import numpy as np
import pytest
from gmpy2 import mpq

from spencerdef.clifford import (Signature, build_clifford, build_pinor,
                                 chirality_projectors, minimal_pinor_dim,
                                 omega_of, so_basis, so_coordinates, spin_action)


def test_blade_generator_squares():
    # forced by the relation with eta_11 = +1 resp. -1
    alg = build_clifford(Signature(1, 0, 1))
    assert alg.blade_mul(1, 1) == (1, 0)
    alg = build_clifford(Signature(0, 1, 1))
    assert alg.blade_mul(1, 1) == (-1, 0)


def test_blade_e12_squared():
    # expand via anticommutation: (e1 e2)(e1 e2) = -e1^2 e2^2 = +1 in (1,1)
    alg = build_clifford(Signature(1, 1, 1))
    assert alg.blade_mul(0b11, 0b11) == (1, 0)


def test_blade_associativity_small():
    for sig in [Signature(2, 1, 1), Signature(1, 2, -1)]:
        alg = build_clifford(sig)
        n = 1 << sig.n
        for a in range(n):
            for b in range(n):
                ca, ma = alg.blade_mul(a, b)
                for c in range(n):
                    c1, m1 = alg.blade_mul(ma, c)
                    cb, mb = alg.blade_mul(b, c)
                    c2, m2 = alg.blade_mul(a, mb)
                    assert (ca * c1, m1) == (cb * c2, m2)


def test_blade_table_materializes():
    alg = build_clifford(Signature(1, 1, 1))
    table = alg.blade_table()
    assert len(table) == 16


@pytest.mark.parametrize("p,q,sign,dim", [
    (1, 10, -1, 32),   # 32 supercharges
    (0, 7, 1, 8),      # classification table, mod-8 periodicity
    (1, 3, -1, 4),
    (1, 2, -1, 2),
    (1, 1, 1, 2),
    (1, 9, -1, 32),
])
def test_pinor_dims(p, q, sign, dim):
    sig = Signature(p, q, sign)
    pin = build_pinor(sig)
    assert pin.dim_s == dim == minimal_pinor_dim(sig)
    pin.check_relations()


def test_pinor_relations_all_small_signatures():
    for n in range(1, 7):
        for p in range(n + 1):
            for sign in (1, -1):
                pin = build_pinor(Signature(p, n - p, sign))
                pin.check_relations()


def test_volume_normalization():
    # two-module case: the returned module has volume acting as +1
    for args in [(1, 10, -1), (1, 2, -1), (0, 7, 1), (2, 9, 1)]:
        sig = Signature(*args)
        assert sig.has_volume_split
        pin = build_pinor(sig)
        assert pin.volume_sign == 1
        vol = pin.volume()
        eye = np.eye(pin.dim_s, dtype=np.int64)
        assert (vol @ vol == eye).all()
        assert (vol == eye).all()


def test_chirality_split_1_1():
    pin = build_pinor(Signature(1, 1, 1))
    assert pin.dim_s == 2 and pin.chirality is not None
    pp, pm = chirality_projectors(pin)
    mat = np.array([[int(2 * v) for v in row] for row in pp])
    assert mat.trace() == 2  # two half-dim = 1 projectors scaled by 2


@pytest.mark.parametrize("p,q,sign", [(0, 4, 1), (4, 0, 1), (1, 5, -1)])
def test_chirality_projector_identities(p, q, sign):
    sig = Signature(p, q, sign)
    pin = build_pinor(sig)
    assert pin.chirality is not None
    pp, pm = chirality_projectors(pin)
    N = pin.dim_s

    def matmul(A, B):
        return [[sum(A[i][k] * B[k][j] for k in range(N)) for j in range(N)]
                for i in range(N)]

    assert matmul(pp, pp) == pp
    assert matmul(pm, pm) == pm
    for i in range(N):
        for j in range(N):
            assert pp[i][j] + pm[i][j] == (1 if i == j else 0)
    # projectors commute with the spin action
    act = spin_action(sig, pin)
    vol = pin.chirality[0]
    for D in act.doubled:
        assert (D @ vol == vol @ D).all()


def test_omega_zero_and_examples():
    sig = Signature(2, 0, 1)
    assert omega_of(sig, [[0, 0], [0, 0]]) == {}
    # rotation generator: A e1 = e2, A e2 = -e1
    out = omega_of(sig, [[0, -1], [1, 0]])
    assert out == {(0, 1): mpq(-1)}
    with pytest.raises(ValueError):
        omega_of(sig, [[1, 0], [0, 0]])  # not eta-skew


@pytest.mark.parametrize("p,q,sign", [(1, 1, 1), (2, 0, 1), (1, 3, -1)])
def test_omega_contraction_identity(p, q, sign):
    # iota_{v flat} omega_A = -A v for every basis vector and so-basis A
    sig = Signature(p, q, sign)
    n, eta = sig.n, sig.eta
    for A in so_basis(sig):
        om = omega_of(sig, A.tolist())
        for k in range(n):
            contr = [mpq(0)] * n
            for (i, j), c in om.items():
                if i == k:
                    contr[j] += eta[k] * c
                elif j == k:
                    contr[i] -= eta[k] * c
            for l in range(n):
                assert contr[l] == -A[l, k]


def test_spin_action_zero():
    sig = Signature(1, 3, -1)
    act = spin_action(sig, build_pinor(sig))
    nso = len(so_basis(sig))
    assert not act.rho_int2([0] * nso).any()


def test_spin_action_rotation_square():
    # (2,0) rotation generator: rho(A)^2 = -1/4
    sig = Signature(2, 0, 1)
    pin = build_pinor(sig)
    act = spin_action(sig, pin)
    A = [[0, -1], [1, 0]]
    coords = so_coordinates(sig, A)
    D = act.rho_int2([int(c) for c in coords])  # 2 rho(A)
    sq = D @ D  # 4 rho(A)^2
    assert (sq == -np.eye(pin.dim_s, dtype=np.int64)).all()


@pytest.mark.parametrize("p,q,sign", [(1, 3, -1), (0, 7, 1), (1, 2, -1), (2, 2, 1)])
def test_spin_action_is_morphism(p, q, sign):
    sig = Signature(p, q, sign)
    pin = build_pinor(sig)
    act = spin_action(sig, pin)
    Ls = so_basis(sig)
    for a in range(len(Ls)):
        for b in range(len(Ls)):
            AB = Ls[a] @ Ls[b] - Ls[b] @ Ls[a]
            coords = so_coordinates(sig, AB.tolist())
            lhs = act.doubled[a] @ act.doubled[b] - act.doubled[b] @ act.doubled[a]
            rhs = np.zeros_like(lhs)
            for cidx, c in enumerate(coords):
                if c:
                    rhs = rhs + 2 * int(c) * act.doubled[cidx]
            assert (lhs == rhs).all()


@pytest.mark.parametrize("p,q,sign", [(1, 3, -1), (0, 7, 1), (1, 1, 1)])
def test_spin_action_clifford_compatibility(p, q, sign):
    # rho(A)(Gamma_i s) - Gamma(A e_i) s - Gamma_i rho(A) s = 0
    sig = Signature(p, q, sign)
    pin = build_pinor(sig)
    act = spin_action(sig, pin)
    for a, L in enumerate(so_basis(sig)):
        for i in range(sig.n):
            lhs = act.doubled[a] @ pin.gammas[i]
            rhs = 2 * pin.gamma_of(L[:, i]) + pin.gammas[i] @ act.doubled[a]
            assert (lhs == rhs).all()


def test_pinor_determinism():
    a = build_pinor(Signature(1, 4, -1))
    b = build_pinor(Signature(1, 4, -1))
    for ga, gb in zip(a.gammas, b.gammas):
        assert (ga == gb).all()


def test_extended_module():
    pin = build_pinor(Signature(1, 2, -1), extend=3)
    assert pin.dim_s == 6 and pin.n_copies == 3
    pin.check_relations()
