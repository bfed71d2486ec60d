"""Subalgebras, admissibility, integration, obstruction reporting."""

import numpy as np
import pytest
from gmpy2 import mpq

from spencerdef import deform as df
from spencerdef import flatmodel as fm
from spencerdef import spencer as sp
from spencerdef.examples import geometric_killing_cocycle
from spencerdef.exactla import RationalTensor, Subspace, inertia_symmetric
from spencerdef.spencer import CoordBasis, NormalizedCocycle
from conftest import cached_model


def _eye(k):
    return [[1 if i == j else 0 for j in range(k)] for i in range(k)]


def test_maximal_subalgebra_accepted(model_1_3):
    sub = df.maximal_subalgebra(model_1_3)
    assert sub.dims == (4, 4, 6)


def test_chirality_half_accepted():
    model = cached_model(1, 9)
    pin = model.pinor
    assert pin.chirality is not None
    vol = pin.chirality[0]
    N = pin.dim_s
    vecs = []
    for j in range(N):
        v = [(mpq(int(vol[i, j])) + (1 if i == j else 0)) / 2 for i in range(N)]
        if any(v):
            vecs.append(v)
    half = Subspace.from_vectors(N, vecs)
    assert half.dim == N // 2
    nso = 45
    sub = df.build_graded_subalgebra(model, _eye(10),
                                     [list(v) for v in half.basis_vectors()],
                                     _eye(nso))
    assert sub.dims == (10, 16, 45)


def test_random_subspace_with_full_h_rejected(model_1_3, rng):
    vecs = rng.integers(-3, 4, size=(3, 4)).tolist()
    with pytest.raises(df.NotClosed):
        df.build_graded_subalgebra(model_1_3, _eye(4), vecs, _eye(6))


def test_homogeneity(model_1_3, rng):
    sub = df.maximal_subalgebra(model_1_3)
    assert df.homogeneity_check(sub)
    empty = df.GradedSubalgebra(model=model_1_3,
                                v_basis=CoordBasis.standard(4),
                                s_basis=CoordBasis(4, []),
                                h_basis=CoordBasis.standard(6))
    assert not df.homogeneity_check(empty)


def test_dirac_kernel_dims(model_1_3):
    sub = df.maximal_subalgebra(model_1_3)
    dk = df.dirac_kernel(sub)
    assert dk.dim == 10 - 4  # rank-nullity from verified surjectivity


def test_section_properties(model_1_3, rng):
    sub = df.maximal_subalgebra(model_1_3)
    sec = df.squaring_section(sub)
    # kappa o Sigma = Id on all basis vectors
    for v in range(4):
        img = [mpq(0)] * 4
        for pidx, c in enumerate(sec.columns[v]):
            if c:
                a, b = sec.pairs[pidx]
                kv = model_1_3_kappa(model_1_3, a, b)
                for i in range(4):
                    img[i] += c * kv[i]
        assert img == [mpq(1) if i == v else mpq(0) for i in range(4)]
    # two sections differ by a map into the Dirac kernel
    dk = df.dirac_kernel(sub)
    coeffs = [[int(rng.integers(-2, 3)) for _ in range(dk.dim)] for _ in range(4)]
    sec2 = sec.perturbed(dk, coeffs)
    for v in range(4):
        diff = {i: sec2.columns[v][i] - sec.columns[v][i]
                for i in range(len(sec.columns[v]))
                if sec2.columns[v][i] != sec.columns[v][i]}
        dense = [diff.get(i, mpq(0)) for i in range(len(sec.pairs))]
        assert dk.basis.contains(dense)


def model_1_3_kappa(model, a, b):
    return [mpq(c) for c in model.kappa.kappa_basis(a, b)]


def test_envelope_trivial_for_kernel_cocycles(model_1_3, rng):
    basis = sp.normalized_cocycle_basis(model_1_3)
    while True:
        vecs = rng.integers(-3, 4, size=(3, 4)).tolist()
        try:
            cb = CoordBasis(4, [[mpq(x) for x in v] for v in vecs])
            break
        except ValueError:
            continue
    _, ker = sp.restriction_and_kernel(model_1_3, cb, basis)
    if ker.dim == 0:
        pytest.skip("restriction kernel is zero for this draw")
    coc = sp.combine_cocycles(basis, ker.basis_vectors()[0])
    env = df.envelope(cb, model_1_3, coc)
    assert env.dim == 0
    assert df.lie_pair_check(cb, model_1_3, coc)


def test_envelope_so9_case(model_0_7_skew):
    coc = geometric_killing_cocycle(model_0_7_skew)
    cb = CoordBasis.standard(8)
    env = df.envelope(cb, model_0_7_skew, coc)
    assert env.dim == 21
    assert df.lie_pair_check(cb, model_0_7_skew, coc)
    hmax = df.h_max(cb, model_0_7_skew, coc)
    assert hmax.dim == 21
    # envelope contained in h_max
    assert hmax.contains_subspace(env)
    # envelope closed under commutator (Lie pair consequence)
    from spencerdef.clifford import so_basis, so_coordinates
    from spencerdef.deform import _so_matrix
    sig = model_0_7_skew.signature
    mats = [_so_matrix(sig, v) for v in env.basis_vectors()]
    n = sig.n
    for A in mats:
        for B in mats:
            C = [[sum(A[i][t] * B[t][j] - B[i][t] * A[t][j] for t in range(n))
                  for j in range(n)] for i in range(n)]
            assert env.contains(so_coordinates(sig, C))


def test_lambda_from_alpha_roundtrip(model_1_2, rng):
    n, nso = 3, 3
    assert df.lambda_from_alpha(model_1_2, RationalTensor((n, n, n))).is_zero()
    alpha = RationalTensor((n, n, n))
    for v in range(n):
        for w in range(v + 1, n):
            for i in range(n):
                c = int(rng.integers(-4, 5))
                alpha[v, w, i] = c
                alpha[w, v, i] = -c
    lam = df.lambda_from_alpha(model_1_2, alpha)
    from spencerdef.clifford import so_basis
    Ls = so_basis(model_1_2.signature)
    for v in range(n):
        for w in range(n):
            for i in range(n):
                acc = mpq(0)
                for a in range(nso):
                    acc += lam[v, a] * int(Ls[a][i, w]) - lam[w, a] * int(Ls[a][i, v])
                assert acc == alpha[v, w, i]


def _ads_deformation(model):
    sub = df.maximal_subalgebra(model)
    basis = sp.normalized_cocycle_basis(model)
    inv = sp.invariant_cocycles(model, sub.h_basis.vectors, basis)
    coc = sp.combine_cocycles(basis, inv.basis_vectors()[0])
    adm = df.admissibility_check(sub, coc)
    assert isinstance(adm, df.AdmissibleData)
    out = df.integrate(adm)
    assert isinstance(out, df.FilteredDeformation)
    return out


def test_zero_cocycle_integrates_to_graded(model_1_3):
    sub = df.maximal_subalgebra(model_1_3)
    adm = df.admissibility_check(sub, df.zero_cocycle(model_1_3))
    out = df.integrate(adm)
    assert isinstance(out, df.FilteredDeformation)
    graded = df.subalgebra_graded_tensor(sub)
    assert out.algebra.table == graded.table
    assert fm.super_jacobi_check(out.algebra) == []


def test_non_invariant_cocycle_rejected(model_1_3):
    sub = df.maximal_subalgebra(model_1_3)
    basis = sp.normalized_cocycle_basis(model_1_3)
    inv = sp.invariant_cocycles(model_1_3, sub.h_basis.vectors, basis)
    invariant = {tuple(v) for v in inv.basis_vectors()}
    for coc in basis:
        coeff = tuple(mpq(1) if k == basis.index(coc) else mpq(0)
                      for k in range(len(basis)))
        if coeff in invariant:
            continue
        got = df.admissibility_check(sub, coc)
        if isinstance(got, df.Obstruction):
            assert got.kind == "CocycleNotInvariant"
            return
    pytest.skip("all basis cocycles invariant (unexpected)")


def test_maximal_invariant_cocycle_integrates(model_1_3):
    out = _ads_deformation(model_1_3)
    assert out.theta.nnz() > 0
    report = df.deformation_invariance_checks(out)
    assert report["passed"] and report["second_route_agrees"]


def test_so9_realization(model_0_7_skew):
    coc = geometric_killing_cocycle(model_0_7_skew)
    env = df.envelope(CoordBasis.standard(8), model_0_7_skew, coc)
    sub = df.build_graded_subalgebra(model_0_7_skew, _eye(7), _eye(8),
                                     [list(v) for v in env.basis_vectors()])
    adm = df.admissibility_check(sub, coc)
    out = df.integrate(adm)
    assert isinstance(out, df.FilteredDeformation)
    assert out.algebra.dim == 36
    assert inertia_symmetric(fm.killing_form(out.algebra)) == (0, 36, 0)
    assert fm.center_dim(out.algebra) == 0
    assert fm.derived_dim(out.algebra) == 36


def test_section_independence(model_1_3, rng):
    # re-integration with a perturbed section yields an identical theta
    out = _ads_deformation(model_1_3)
    sub = out.sub
    dk = df.dirac_kernel(sub)
    coeffs = [[int(rng.integers(-2, 3)) for _ in range(dk.dim)] for _ in range(4)]
    sec2 = out.adm.section.perturbed(dk, coeffs)
    adm2 = df.admissibility_check(sub, out.adm.cocycle, section=sec2)
    assert isinstance(adm2, df.AdmissibleData)
    out2 = df.integrate(adm2)
    assert isinstance(out2, df.FilteredDeformation)
    assert out2.theta == out.theta


def test_kernel_shift_invariance(model_1_3, rng):
    # beta -> beta + (h-invariant element of the restriction kernel) does
    # not change the deformed bracket tensor
    basis = sp.normalized_cocycle_basis(model_1_3)
    while True:
        vecs = rng.integers(-3, 4, size=(3, 4)).tolist()
        try:
            cb = CoordBasis(4, [[mpq(x) for x in v] for v in vecs])
            break
        except ValueError:
            continue
    _, ker = sp.restriction_and_kernel(model_1_3, cb, basis)
    if ker.dim == 0:
        pytest.skip("restriction kernel is zero for this draw")
    kcoc = sp.combine_cocycles(basis, ker.basis_vectors()[0])
    env = df.envelope(cb, model_1_3, kcoc)
    assert env.dim == 0
    sub = df.build_graded_subalgebra(model_1_3, _eye(4),
                                     [list(v) for v in cb.vectors], [])
    zero = df.zero_cocycle(model_1_3)
    d0 = df.integrate(df.admissibility_check(sub, zero))
    d1 = df.integrate(df.admissibility_check(sub, kcoc))
    assert isinstance(d0, df.FilteredDeformation)
    assert isinstance(d1, df.FilteredDeformation)
    assert d0.algebra.table == d1.algebra.table


def test_checkers_on_extracted_components(model_1_3):
    out = _ads_deformation(model_1_3)
    comps = df.extract_components(out)
    assert df.check_full_cocycle(comps)["passed"]
    assert df.check_theta_system(comps)["passed"]
    # zero deformation trivially passes both
    sub = df.maximal_subalgebra(model_1_3)
    zero = df.integrate(df.admissibility_check(sub, df.zero_cocycle(model_1_3)))
    czero = df.extract_components(zero)
    assert df.check_full_cocycle(czero)["passed"]
    assert df.check_theta_system(czero)["passed"]


def test_checkers_detect_perturbations(model_1_3):
    out = _ads_deformation(model_1_3)
    comps = df.extract_components(out)
    # perturb delta: the delta cocycle condition must fail
    comps.delta[0][0] = [c + 1 for c in comps.delta[0][0]]
    rep = df.check_full_cocycle(comps)
    assert not rep["passed"] and rep["delta-cocycle-cond"] > 0
    # restore, then flip one theta entry: jacobi-222a must fail
    comps2 = df.extract_components(out)
    for v in range(4):
        done = False
        for w in range(4):
            if any(comps2.theta[v][w]):
                comps2.theta[v][w] = [-c for c in comps2.theta[v][w]]
                done = True
                break
        if done:
            break
    rep2 = df.check_theta_system(comps2)
    assert not rep2["passed"] and rep2["jacobi-222a"] > 0


def test_obstruction_on_inconsistent_data(model_1_3):
    # tampered gamma (double the true one) is no longer a cocycle; the
    # integration gate must report an obstruction rather than integrate
    basis = sp.normalized_cocycle_basis(model_1_3)
    sub = df.maximal_subalgebra(model_1_3)
    inv = sp.invariant_cocycles(model_1_3, sub.h_basis.vectors, basis)
    coc = sp.combine_cocycles(basis, inv.basis_vectors()[0])
    bad = NormalizedCocycle(model=model_1_3, beta=coc.beta, gamma=coc.gamma.scale(2))
    assert not bad.verify()
    adm = df.admissibility_check(sub, bad)
    if isinstance(adm, df.Obstruction):
        return  # rejected already: fine
    try:
        out = df.integrate(adm)
    except AssertionError:
        return  # garbage data may only surface at the final oracle
    assert isinstance(out, df.Obstruction)


def test_lam_override(model_1_3):
    # an override differing from gamma o Sigma by a map into h is accepted
    sub = df.maximal_subalgebra(model_1_3)
    coc = df.zero_cocycle(model_1_3)
    sec = df.squaring_section(sub)
    nso = 6
    lam = [[mpq(0)] * nso for _ in range(4)]
    lam[0][0] = mpq(1)  # arbitrary map V -> h = so(V)
    adm = df.admissibility_check(sub, coc, section=sec, lam_override=lam)
    assert isinstance(adm, df.AdmissibleData)
    out = df.integrate(adm)
    assert isinstance(out, df.FilteredDeformation)
    assert fm.super_jacobi_check(out.algebra) == []


@pytest.fixture(scope="module")
def model_1_2():
    return cached_model(1, 2)
