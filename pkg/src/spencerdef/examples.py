"""Shipped example inputs: the three standard deformation jobs.

  * minimal (1,3) with the Lorentz-invariant cocycle (anti-de Sitter type
    maximal deformation),
  * (0,7) with skew pairing and the geometric Killing spinor cocycle
    beta(v, s) = (1/2) v . s  (the round-sphere realization of so(9)),
  * minimal (1,10) with the cocycle of a decomposable 4-form, integrated
    over the envelope of its Lie pair (the flux deformation; generating
    this one recomputes the cocycle and takes a minute or two).

Each job file carries the flat-model header, the graded subalgebra and the
normalised cocycle, ready for `spencerdef deform integrate <file>`.
"""

from __future__ import annotations

import os

from gmpy2 import mpq

from . import deform as df
from . import flatmodel as fm
from . import serialize as ser
from . import spencer as sp
from .exactla import RationalTensor
from .spencer import CoordBasis, NormalizedCocycle


def geometric_killing_cocycle(model: fm.FlatModel, coef=mpq(1, 2)) -> NormalizedCocycle:
    """beta(v, s) = coef * Gamma(v) s with the induced gamma; re-verified."""
    n, N = model.signature.n, model.kappa.dim_s
    beta = RationalTensor((n, N, N))
    for v in range(n):
        G = model.pinor.gammas[v]
        for c in range(N):
            for r in range(N):
                if G[r, c]:
                    beta[v, c, r] = mpq(coef) * int(G[r, c])
    coc = NormalizedCocycle(model=model, beta=beta,
                            gamma=sp._gamma_from_beta(model, beta))
    if not coc.verify():
        raise ValueError("geometric Killing spinor ansatz is not a cocycle here")
    return coc


def _eye(k: int) -> list[list[int]]:
    return [[1 if i == j else 0 for j in range(k)] for i in range(k)]


def _job(model: fm.FlatModel, sub: df.GradedSubalgebra,
         coc: NormalizedCocycle, note: str) -> dict:
    return {
        "schema": ser.SCHEMA_VERSION,
        "kind": "deform_job",
        "note": note,
        "signature": ser.signature_to_json(model.signature),
        "parity": model.kappa.parity,
        "extend": model.pinor.n_copies,
        "subalgebra": ser.subalgebra_to_json(sub),
        "cocycle": ser.cocycle_to_json(coc),
    }


def ads4_job() -> dict:
    model = fm.standard_model(1, 3)
    sub = df.maximal_subalgebra(model)
    basis = sp.normalized_cocycle_basis(model)
    inv = sp.invariant_cocycles(model, sub.h_basis.vectors, basis)
    coc = sp.combine_cocycles(basis, inv.basis_vectors()[0])
    return _job(model, sub, coc,
                "minimal (1,3), Lorentz-invariant cocycle, maximal subalgebra")


def sphere7_job() -> dict:
    model = fm.standard_model(0, 7, parity="skew")
    coc = geometric_killing_cocycle(model)
    env = df.envelope(CoordBasis.standard(8), model, coc)
    sub = df.build_graded_subalgebra(model, _eye(7), _eye(8),
                                     [list(v) for v in env.basis_vectors()])
    return _job(model, sub, coc,
                "(0,7) skew pairing, geometric Killing spinors, envelope h = so(7)")


def flux11_job() -> dict:
    model = fm.standard_model(1, 10)
    coc = sp.four_form_cocycle(model, (7, 8, 9, 10))
    env = df.envelope(CoordBasis.standard(32), model, coc)
    sub = df.build_graded_subalgebra(model, _eye(11), _eye(32),
                                     [list(v) for v in env.basis_vectors()])
    return _job(model, sub, coc,
                "minimal (1,10), decomposable 4-form cocycle, envelope subalgebra")


def write_examples(outdir: str, include_eleven_d: bool = True) -> list[str]:
    os.makedirs(outdir, exist_ok=True)
    jobs = [("deform_1_3_ads.json", ads4_job),
            ("deform_0_7_sphere.json", sphere7_job)]
    if include_eleven_d:
        jobs.append(("deform_1_10_flux.json", flux11_job))
    paths = []
    for name, maker in jobs:
        path = os.path.join(outdir, name)
        ser.dump(maker(), path)
        paths.append(path)
    return paths
