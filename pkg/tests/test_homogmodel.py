"""Nomizu maps, Wang curvature, Killing spinor and flatness checks."""

import pytest
from gmpy2 import mpq

from spencerdef import deform as df
from spencerdef import flatmodel as fm
from spencerdef import homogmodel as hm
from spencerdef import spencer as sp
from spencerdef.examples import geometric_killing_cocycle
from spencerdef.spencer import CoordBasis
from conftest import cached_model


def _eye(k):
    return [[1 if i == j else 0 for j in range(k)] for i in range(k)]


@pytest.fixture(scope="module")
def so9(model_0_7_skew):
    coc = geometric_killing_cocycle(model_0_7_skew)
    env = df.envelope(CoordBasis.standard(8), model_0_7_skew, coc)
    sub = df.build_graded_subalgebra(model_0_7_skew, _eye(7), _eye(8),
                                     [list(v) for v in env.basis_vectors()])
    return df.integrate(df.admissibility_check(sub, coc))


@pytest.fixture(scope="module")
def zero_def(model_1_3):
    sub = df.maximal_subalgebra(model_1_3)
    return df.integrate(df.admissibility_check(sub, df.zero_cocycle(model_1_3)))


@pytest.fixture(scope="module")
def ads_def(model_1_3):
    sub = df.maximal_subalgebra(model_1_3)
    basis = sp.normalized_cocycle_basis(model_1_3)
    inv = sp.invariant_cocycles(model_1_3, sub.h_basis.vectors, basis)
    coc = sp.combine_cocycles(basis, inv.basis_vectors()[0])
    return df.integrate(df.admissibility_check(sub, coc))


def test_abelian_pair_has_zero_connection(model_1_3):
    # g = V with h = 0 and S' = 0: all brackets vanish, so L = 0
    sub = df.build_graded_subalgebra(model_1_3, _eye(4), [], [])
    defm = df.integrate(df.admissibility_check(sub, df.zero_cocycle(model_1_3)))
    pair = hm.metric_lie_pair(defm)
    nomizu = hm.nomizu_levi_civita(pair)
    for col in nomizu.columns:
        assert not any(any(row) for row in col)
    F = hm.wang_curvature(nomizu)
    assert all(not any(any(r) for r in M) for M in F.values())


def test_nomizu_equals_lambda(zero_def, ads_def, so9):
    for defm in (zero_def, ads_def, so9):
        pair = hm.metric_lie_pair(defm)
        nomizu = hm.nomizu_levi_civita(pair)
        assert hm.nomizu_matches_lambda(defm, nomizu)


def test_sphere_constant_curvature(so9):
    # round-sphere connection: F(v, w) proportional to v wedge w on the
    # V-part; compare against the explicit constant-curvature tensor
    pair = hm.metric_lie_pair(so9)
    nomizu = hm.nomizu_levi_civita(pair)
    F = hm.wang_curvature(nomizu)
    sig = so9.sub.model.signature
    from spencerdef.clifford import so_basis
    Ls = so_basis(sig)
    n = sig.n
    idx = {}
    c = 0
    for i in range(n):
        for j in range(i + 1, n):
            idx[(i, j)] = c
            c += 1
    scale = None
    for i in range(n):
        for j in range(i + 1, n):
            M = F[(i, j)]
            L = Ls[idx[(i, j)]]
            # find the proportionality constant from the first nonzero slot
            for a in range(n):
                for b in range(n):
                    if L[a, b]:
                        cur = M[a][b] / int(L[a, b])
                        if scale is None:
                            scale = cur
                        assert cur == scale
            for a in range(n):
                for b in range(n):
                    assert M[a][b] == scale * int(L[a, b])
    assert scale is not None and scale != 0


def test_wang_curvature_skewness(ads_def):
    pair = hm.metric_lie_pair(ads_def)
    nomizu = hm.nomizu_levi_civita(pair)
    F = hm.wang_curvature(nomizu)
    assert hm.curvature_is_skew(nomizu, F)


def test_killing_spinor_identity(zero_def, ads_def, so9):
    for defm in (zero_def, ads_def, so9):
        pair = hm.metric_lie_pair(defm)
        nomizu = hm.nomizu_levi_civita(pair)
        rep = hm.killing_spinor_check(defm, nomizu)
        assert rep["passed"], rep


def test_spinor_connection_flatness(zero_def, ads_def, so9):
    for defm in (zero_def, ads_def, so9):
        pair = hm.metric_lie_pair(defm)
        nomizu = hm.nomizu_levi_civita(pair)
        rep = hm.spinor_connection_flatness(defm, nomizu)
        assert rep["passed"], rep


def test_zero_deformation_spinor_curvature_vanishes(zero_def):
    pair = hm.metric_lie_pair(zero_def)
    nomizu = hm.nomizu_levi_civita(pair)
    psi = hm.spinor_connection_nomizu(zero_def, nomizu)
    F = hm.wang_curvature(psi)
    assert all(not any(any(r) for r in M) for M in F.values())


def test_reconstruction_report(ads_def):
    rep = hm.reconstruction_report(ads_def)
    assert rep["passed"]
    assert rep["nomizu_equals_lambda"]
