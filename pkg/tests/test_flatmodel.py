"""Squaring maps, flat models, the Jacobi oracle, algebra certificates."""

import numpy as np
import pytest
from gmpy2 import mpq

from spencerdef import bilinears
from spencerdef import flatmodel as fm
from spencerdef.clifford import Signature, build_pinor, so_basis, so_coordinates, spin_action
from spencerdef.exactla import QMatrix, inertia_symmetric
from conftest import cached_model


def test_squaring_map_zero_spinor(model_1_3):
    k = model_1_3.kappa
    zero = [mpq(0)] * k.dim_s
    t = [mpq(1)] + [mpq(0)] * (k.dim_s - 1)
    assert k.kappa(zero, t) == [mpq(0)] * 4


def test_majorana_squaring_map_equivariance(model_1_3):
    # the build itself verifies; re-run the equivariance oracle explicitly
    model = model_1_3
    sig, act, k = model.signature, model.action, model.kappa
    Ls = so_basis(sig)
    for a, D in enumerate(act.doubled):
        for i, K in enumerate(k.kmats):
            lhs = D.T @ K + K @ D
            rhs = sum((2 * int(Ls[a][i, j]) * k.kmats[j] for j in range(sig.n)
                       if Ls[a][i, j]), np.zeros_like(K))
            assert (lhs == rhs).all()


def test_skew_squaring_map_0_7(model_0_7_skew):
    k = model_0_7_skew.kappa
    assert k.parity == "skew"
    for K in k.kmats:
        assert (K.T == -K).all()


def test_wrong_parity_rejected():
    sig = Signature(1, 3, -1)
    pin = build_pinor(sig)
    act = spin_action(sig, pin)
    B = bilinears.shipped_bilinear(sig, pin, act, "symmetric")
    with pytest.raises(fm.WrongParity):
        fm.build_squaring_map(sig, pin, act, B, "skew")


def test_not_equivariant_rejected():
    sig = Signature(1, 3, -1)
    pin = build_pinor(sig)
    act = spin_action(sig, pin)
    junk = np.eye(pin.dim_s, dtype=np.int64)  # symmetric but not invariant here
    with pytest.raises((fm.NotEquivariant, fm.WrongParity)):
        fm.build_squaring_map(sig, pin, act, junk, "symmetric")


def test_check_causal_passes(model_1_3):
    rep = fm.check_causal(model_1_3.kappa, 1000)
    assert rep["passed"] and rep["spacelike_counterexamples"] == 0


def test_check_causal_detects_flip(model_1_3):
    # swap time and a space component: squares become spacelike
    k = model_1_3.kappa
    km = list(k.kmats)
    km[0], km[1] = km[1], km[0]
    bad = fm.SquaringMap(signature=k.signature, parity=k.parity,
                         kmats=tuple(km), provenance="flipped")
    rep = fm.check_causal(bad, 1000)
    assert not rep["passed"] and "witness_spinor" in rep


def test_check_causal_zero_spinor_row(model_1_2):
    rep = fm.check_causal(model_1_2.kappa, 10)
    assert rep["passed"]


def test_flat_models_small_jacobi():
    for (p, q, par) in [(1, 2, "symmetric"), (1, 3, "symmetric"),
                        (0, 3, "symmetric"), (0, 7, "skew"),
                        (1, 2, "skew"), (2, 0, "skew")]:
        model = cached_model(p, q, par)
        assert fm.super_jacobi_check(model.algebra) == []
        assert model.parity == par


def test_degenerate_kappa_flagged(model_1_2):
    model = model_1_2
    zero = fm.SquaringMap(signature=model.signature, parity="symmetric",
                          kmats=tuple(0 * K for K in model.kappa.kmats),
                          provenance="zero-test")
    m0 = fm.build_flat_model(model.signature, model.pinor, model.action, zero)
    assert m0.degenerate_kappa
    assert fm.super_jacobi_check(m0.algebra) == []


def test_jacobi_oracle_so3():
    # structure constants re-derived from skew matrices
    sig = Signature(3, 0, 1)
    Ls = so_basis(sig)
    alg = fm.SuperAlgebraTensor((0, 0, 3), "skew")
    for a in range(3):
        for b in range(a + 1, 3):
            C = Ls[a] @ Ls[b] - Ls[b] @ Ls[a]
            coords = so_coordinates(sig, C.tolist())
            alg.set_bracket(a, b, {i: c for i, c in enumerate(coords) if c})
    assert fm.super_jacobi_check(alg) == []
    # corrupt one structure constant; note that a bare sign flip of an
    # so(3) constant still satisfies Jacobi (it is a basis sign change),
    # so the corruption adds a spurious component instead
    bad = fm.SuperAlgebraTensor((0, 0, 3), "skew")
    for (x, y), vec in alg.table.items():
        if x < y:
            bad.set_bracket(x, y, vec)
    first = min(k for k in bad.table if k[0] < k[1])
    corrupted = dict(bad.table[first])
    corrupted[first[0]] = corrupted.get(first[0], mpq(0)) + 1
    bad.set_bracket(first[0], first[1], corrupted)
    assert fm.super_jacobi_check(bad) != []


def test_abelian_jacobi():
    alg = fm.SuperAlgebraTensor((3, 0, 0), "skew")
    assert fm.super_jacobi_check(alg) == []


def test_homogeneity_random_subspaces(model_1_3, rng):
    # kappa restricted to any S' with dim > half of S stays surjective
    from spencerdef import deform as df
    for _ in range(50):
        sub = df.random_highly_susy_subalgebra(model_1_3, rng, dim_s=3)
        assert df.homogeneity_check(sub)


def test_so3_certificates():
    sig = Signature(3, 0, 1)
    Ls = so_basis(sig)
    alg = fm.SuperAlgebraTensor((0, 0, 3), "skew")
    for a in range(3):
        for b in range(a + 1, 3):
            coords = so_coordinates(sig, (Ls[a] @ Ls[b] - Ls[b] @ Ls[a]).tolist())
            alg.set_bracket(a, b, {i: c for i, c in enumerate(coords) if c})
    K = fm.killing_form(alg)
    assert inertia_symmetric(K) == (0, 3, 0)
    assert fm.center_dim(alg) == 0
    assert fm.derived_dim(alg) == 3


def test_extension_parity_flip(model_1_2):
    ext = fm.extended_squaring_map(model_1_2.kappa, 2, "skew")
    assert ext.parity == "skew"
    for K in ext.kmats:
        assert (K.T == -K).all()
