"""Library of spin-invariant bilinear forms on pinor modules.

Squaring maps are built from an invariant bilinear B on S; rather than
hardcoding tables, the library solves the invariance equations

    rho(A)^T B + B rho(A) = 0        for every so(V) basis element A

together with the symmetry-type constraint on all B Gamma_i, picks a
deterministic primitive integer representative, and verifies everything at
build time.  For Lorentzian symmetric candidates the orientation is fixed
so sampled squares are future-pointing (positive time component).

Entries are cached per (signature, parity); everything is reproducible.
"""

from __future__ import annotations

from math import gcd

import numpy as np

from . import exactla as xla
from .clifford import PinorModule, Signature, SpinAction
from .exactla import QMatrix, mpq

SYM = "symmetric"
SKEW = "skew"


def invariant_bilinear_space(pinor: PinorModule, action: SpinAction) -> xla.Subspace:
    """All B with B(rho(A)s, t) + B(s, rho(A)t) = 0, as vectorized matrices."""
    N = pinor.dim_s
    rows: list[dict[int, mpq]] = []
    for D in action.doubled:  # 2*rho(A); scaling does not change the kernel
        Dt = D.T
        for r in range(N):
            for s in range(N):
                row: dict[int, mpq] = {}
                for k in range(N):
                    if Dt[r, k]:
                        row[k * N + s] = row.get(k * N + s, mpq(0)) + int(Dt[r, k])
                    if D[k, s]:
                        row[r * N + k] = row.get(r * N + k, mpq(0)) + int(D[k, s])
                row = {c: v for c, v in row.items() if v}
                if row:
                    rows.append(row)
    M = QMatrix(len(rows), N * N, rows)
    return xla.kernel_basis(M)


def _with_symmetry_rows(pinor: PinorModule, parity: str) -> QMatrix:
    """Constraint rows making every B Gamma_i symmetric (resp. skew)."""
    N = pinor.dim_s
    sign = 1 if parity == SYM else -1
    rows = []
    for G in pinor.gammas:
        for r in range(N):
            for s in range(r, N):
                row: dict[int, mpq] = {}
                for k in range(N):
                    if G[k, s]:
                        row[r * N + k] = row.get(r * N + k, mpq(0)) + int(G[k, s])
                    if G[k, r]:
                        c = s * N + k
                        row[c] = row.get(c, mpq(0)) - sign * int(G[k, r])
                row = {c: v for c, v in row.items() if v}
                if row:
                    rows.append(row)
    return QMatrix(len(rows), N * N, rows)


def _primitive_int_matrix(vec: list[mpq], N: int) -> np.ndarray:
    den = 1
    for v in vec:
        d = int(v.denominator)
        den = den * d // gcd(den, d)
    ints = [int(v.numerator) * (den // int(v.denominator)) for v in vec]
    g = 0
    for x in ints:
        g = gcd(g, abs(x))
    if g > 1:
        ints = [x // g for x in ints]
    return np.array(ints, dtype=np.int64).reshape(N, N)


def candidate_bilinears(pinor: PinorModule, action: SpinAction, parity: str) -> list[np.ndarray]:
    """Primitive integer invariant B's of the requested symmetry type."""
    if parity not in (SYM, SKEW):
        raise ValueError("parity must be 'symmetric' or 'skew'")
    N = pinor.dim_s
    inv = invariant_bilinear_space(pinor, action)
    if inv.dim == 0:
        return []
    sym_rows = _with_symmetry_rows(pinor, parity)
    # coordinates in the invariant basis satisfying the symmetry rows
    basis_vecs = inv.basis_vectors()
    proj_rows: list[dict[int, mpq]] = []
    for row in sym_rows.rows:
        out: dict[int, mpq] = {}
        for k, bv in enumerate(basis_vecs):
            acc = mpq(0)
            for c, coef in row.items():
                if bv[c]:
                    acc += coef * bv[c]
            if acc:
                out[k] = acc
        if out:
            proj_rows.append(out)
    coords = xla.kernel_basis(QMatrix(len(proj_rows), inv.dim, proj_rows))
    out = []
    for cv in coords.basis_vectors():
        vec = [mpq(0)] * (N * N)
        for k, c in enumerate(cv):
            if c:
                bv = basis_vecs[k]
                for idx in range(N * N):
                    if bv[idx]:
                        vec[idx] += c * bv[idx]
        out.append(_primitive_int_matrix(vec, N))
    return out


def _kappa_mats(sig: Signature, pinor: PinorModule, B: np.ndarray) -> list[np.ndarray]:
    """KMAT_i with kappa(s, t)_i = s^T KMAT_i t  (so eta(kappa, e_i) = B(s, Gamma_i t))."""
    return [int(sig.eta[i]) * (B @ pinor.gammas[i]) for i in range(sig.n)]


def _causal_sample_ok(sig: Signature, kmats: list[np.ndarray], trials: int, seed: int,
                      require_positive: bool = True) -> bool:
    if sig.p != 1:
        return False
    rng = np.random.default_rng(seed)
    N = kmats[0].shape[0]
    S = rng.integers(-9, 10, size=(trials, N))
    comps = np.stack([np.einsum("ti,ij,tj->t", S, K, S) for K in kmats], axis=1)
    norms = (comps * comps * np.array(sig.eta)[None, :]).sum(axis=1)
    if (norms < 0).any():
        return False
    t = comps[:, 0]
    nz = t[t != 0]
    if require_positive:
        return nz.size == 0 or (nz > 0).all()
    return nz.size == 0 or (nz > 0).all() or (nz < 0).all()


def shipped_bilinear(sig: Signature, pinor: PinorModule, action: SpinAction,
                     parity: str) -> np.ndarray | None:
    """Deterministic library entry for (signature, parity), or None.

    Lorentzian symmetric entries are additionally screened for causality
    on a short deterministic sample and oriented future-pointing; the full
    statistical check lives in flatmodel.check_causal.
    """
    cands = candidate_bilinears(pinor, action, parity)
    if not cands:
        return None
    if parity == SYM and sig.p == 1:
        for B in cands:
            kmats = _kappa_mats(sig, pinor, B)
            for oriented in (B, -B):
                km = kmats if oriented is B else [-K for K in kmats]
                if _causal_sample_ok(sig, km, 256, seed=7):
                    return oriented
        return None
    return cands[0]
