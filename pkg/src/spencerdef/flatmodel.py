"""Flat model Lie (super)algebras V + S + so(V) and the Jacobi oracle.

A flat model is determined by a signature, a spinor module and a squaring
map kappa sending two spinors to a vector.  Symmetric kappa yields a Lie
superalgebra (odd spinors), skew kappa an ordinary Lie algebra.  The only
nontrivial Jacobi component is controlled by so(V)-equivariance of kappa,
which is verified when the squaring map is built; an independent oracle
evaluates the full graded Jacobiator on all basis triples anyway.

Brackets (A, B in so(V); v, w in V; eps, zeta in S):

    [A, B] = AB - BA     [A, v] = Av     [A, eps] = rho(A) eps
    [v, w] = 0           [v, eps] = 0    [eps, zeta] = kappa(eps, zeta)
"""

from __future__ import annotations

from dataclasses import dataclass
from math import gcd

import numpy as np
from gmpy2 import mpq

from . import bilinears
from .clifford import (PinorModule, Signature, SpinAction, build_pinor, so_basis,
                       so_coordinates, spin_action)
from .exactla import QMatrix, RationalTensor, Subspace, rank

SYM = "symmetric"
SKEW = "skew"


class NotEquivariant(Exception):
    """The candidate bilinear does not induce an so(V)-equivariant kappa."""


class WrongParity(Exception):
    """The candidate bilinear does not have the declared symmetry type."""


@dataclass(frozen=True)
class SquaringMap:
    """kappa: S x S -> V with declared symmetry, verified at build time.

    kmats[i] is the integer matrix with kappa(s, t)_i = s^T kmats[i] t.
    """

    signature: Signature
    parity: str
    kmats: tuple[np.ndarray, ...]
    provenance: str = ""

    @property
    def dim_s(self) -> int:
        return self.kmats[0].shape[0]

    def kappa(self, s, t) -> list[mpq]:
        """kappa on rational coordinate vectors."""
        out = []
        for K in self.kmats:
            acc = mpq(0)
            for a, sa in enumerate(s):
                if sa:
                    row = K[a]
                    for b, tb in enumerate(t):
                        if tb and row[b]:
                            acc += sa * tb * int(row[b])
            out.append(acc)
        return out

    def kappa_basis(self, a: int, b: int) -> list[int]:
        """kappa(s_a, s_b) on basis spinors (integer entries)."""
        return [int(K[a, b]) for K in self.kmats]

    def is_degenerate(self) -> bool:
        rows = []
        n = len(self.kmats)
        N = self.dim_s
        for a in range(N):
            for b in range(a, N):
                rows.append({i: mpq(int(self.kmats[i][a, b])) for i in range(n)
                             if self.kmats[i][a, b]})
        return rank(QMatrix(len(rows), n, rows)) < n


def build_squaring_map(sig: Signature, pinor: PinorModule, action: SpinAction,
                       B, parity: str, provenance: str = "user") -> SquaringMap:
    """kappa from a bilinear B via eta(kappa(s,t), e_i) = B(s, Gamma_i t).

    Raises WrongParity or NotEquivariant when the candidate fails the
    build-time verification; nothing is trusted from tables.
    """
    if parity not in (SYM, SKEW):
        raise ValueError("parity must be 'symmetric' or 'skew'")
    B = np.asarray(B, dtype=np.int64)
    N = pinor.dim_s
    if B.shape != (N, N):
        raise ValueError("bilinear shape mismatch")
    if np.abs(B).max(initial=0) > 1 << 20:
        raise ValueError("bilinear entries too large for the integer fast path")
    kmats = [int(sig.eta[i]) * (B @ pinor.gammas[i]) for i in range(sig.n)]

    want = 1 if parity == SYM else -1
    for i, K in enumerate(kmats):
        if not (K.T == want * K).all():
            raise WrongParity(f"kappa component {i} is not {parity}")

    # equivariance: kappa(rho(A)s, t) + kappa(s, rho(A)t) = A kappa(s, t)
    Ls = so_basis(sig)
    for a, D in enumerate(action.doubled):   # D = 2 rho(A)
        A = Ls[a]
        for i, K in enumerate(kmats):
            lhs = D.T @ K + K @ D
            rhs = np.zeros_like(K)
            for j in range(sig.n):
                if A[i, j]:
                    rhs = rhs + 2 * int(A[i, j]) * kmats[j]
            if not (lhs == rhs).all():
                raise NotEquivariant(f"equivariance fails for so-basis {a}, component {i}")
    return SquaringMap(signature=sig, parity=parity, kmats=tuple(kmats),
                       provenance=provenance)


def shipped_squaring_map(sig: Signature, pinor: PinorModule, action: SpinAction,
                         parity: str) -> SquaringMap | None:
    """Library squaring map for (signature, parity), verified, or None."""
    B = bilinears.shipped_bilinear(sig, pinor, action, parity)
    if B is None:
        return None
    return build_squaring_map(sig, pinor, action, B, parity,
                              provenance=f"library:{sig}:{parity}")


def extended_squaring_map(base: SquaringMap, n_copies: int, parity: str) -> SquaringMap:
    """Squaring map on S x R^N: base kappa tensored with a bilinear on R^N.

    Symmetric x symmetric or skew x skew gives a symmetric result; mixing
    flips the parity, which is how skew models are manufactured in
    signatures whose irreducible module only carries a symmetric pairing.
    """
    if n_copies < 2:
        raise ValueError("extension needs at least two copies")
    if parity == base.parity:
        aux = np.eye(n_copies, dtype=np.int64)                     # symmetric
    else:
        if n_copies % 2:
            raise ValueError("skew auxiliary pairing needs even multiplicity")
        aux = np.zeros((n_copies, n_copies), dtype=np.int64)       # skew
        for k in range(0, n_copies, 2):
            aux[k, k + 1] = 1
            aux[k + 1, k] = -1
    kmats = tuple(np.kron(K, aux) for K in base.kmats)
    return SquaringMap(signature=base.signature, parity=parity, kmats=kmats,
                       provenance=f"{base.provenance}(x{n_copies},{parity})")


def check_causal(kappa: SquaringMap, trials: int, seed: int = 20260810) -> dict:
    """Sampling causality check for Lorentzian symmetric squaring maps.

    Asserts eta(kappa_s, kappa_s) >= 0 and a consistent sign of the time
    component over `trials` pseudorandom rational spinors plus all basis
    spinors.  Report-only: sampling cannot certify positivity.
    """
    sig = kappa.signature
    if sig.p != 1:
        raise ValueError("causality check requires Lorentzian signature (1, q)")
    if kappa.parity != SYM:
        raise ValueError("causality concerns symmetric squaring maps")
    rng = np.random.default_rng(seed)
    N = kappa.dim_s
    S = np.vstack([np.eye(N, dtype=np.int64),
                   rng.integers(-9, 10, size=(trials, N))])
    comps = np.stack([np.einsum("ti,ij,tj->t", S, K, S) for K in kappa.kmats], axis=1)
    eta = np.array(sig.eta, dtype=np.int64)
    norms = (comps * comps * eta[None, :]).sum(axis=1)
    bad = np.nonzero(norms < 0)[0]
    tsigns = np.sign(comps[:, 0])
    nz = tsigns[tsigns != 0]
    consistent = bool(nz.size == 0 or (nz == nz[0]).all())
    report = {
        "trials": int(S.shape[0]),
        "spacelike_counterexamples": int(bad.size),
        "time_sign_consistent": consistent,
        "passed": bool(bad.size == 0 and consistent),
    }
    if bad.size:
        report["witness_spinor"] = [int(x) for x in S[bad[0]]]
    elif not consistent:
        i = int(np.nonzero(tsigns != nz[0])[0][0])
        report["witness_spinor"] = [int(x) for x in S[i]]
    return report


# -- graded bracket tensors ---------------------------------------------------


class SuperAlgebraTensor:
    """Bracket tensor on a graded basis (V block, S block, H block).

    parity == "symmetric" marks a Lie superalgebra (S odd); "skew" an
    ordinary Lie algebra.  Brackets are stored sparsely per basis pair and
    mirror-completed so [y, x] = -(-1)^{|x||y|} [x, y] always holds by
    construction; the Jacobi oracle is a genuine check.
    """

    def __init__(self, dims: tuple[int, int, int], parity: str):
        if parity not in (SYM, SKEW):
            raise ValueError("parity must be 'symmetric' or 'skew'")
        self.dims = dims
        self.parity = parity
        self.dim = sum(dims)
        self.table: dict[tuple[int, int], dict[int, mpq]] = {}

    # block offsets
    @property
    def off_v(self) -> int:
        return 0

    @property
    def off_s(self) -> int:
        return self.dims[0]

    @property
    def off_h(self) -> int:
        return self.dims[0] + self.dims[1]

    def parity_of(self, x: int) -> int:
        if self.parity == SKEW:
            return 0
        return 1 if self.off_s <= x < self.off_h else 0

    def set_bracket(self, x: int, y: int, vec: dict[int, mpq]) -> None:
        vec = {k: mpq(v) for k, v in vec.items() if v}
        sign = -1 if (self.parity == SKEW or not (self.parity_of(x) and self.parity_of(y))) else 1
        if vec:
            self.table[(x, y)] = vec
            if x != y:
                self.table[(y, x)] = {k: sign * v for k, v in vec.items()}
        else:
            self.table.pop((x, y), None)
            if x != y:
                self.table.pop((y, x), None)

    def bracket(self, x: int, y: int) -> dict[int, mpq]:
        return self.table.get((x, y), {})

    def bracket_vectors(self, u: dict[int, mpq], w: dict[int, mpq]) -> dict[int, mpq]:
        out: dict[int, mpq] = {}
        for x, cx in u.items():
            for y, cy in w.items():
                c = cx * cy
                for z, v in self.bracket(x, y).items():
                    t = out.get(z, mpq(0)) + c * v
                    if t:
                        out[z] = t
                    elif z in out:
                        del out[z]
        return out

    def scaled_integer_table(self) -> tuple[np.ndarray, int]:
        """Dense T[x][:, y] = scale * [x, y] as int64, plus the scale."""
        den = 1
        for vec in self.table.values():
            for v in vec.values():
                d = int(v.denominator)
                den = den * d // gcd(den, d)
        d = self.dim
        T = np.zeros((d, d, d), dtype=np.int64)
        maxnum = 0
        for (x, y), vec in self.table.items():
            for z, v in vec.items():
                val = int(v.numerator) * (den // int(v.denominator))
                maxnum = max(maxnum, abs(val))
                T[x, z, y] = val
        if maxnum and maxnum * maxnum * d >= 1 << 62:
            raise OverflowError("bracket entries too large for the int64 oracle")
        return T, den


def super_jacobi_check(alg: SuperAlgebraTensor, max_violations: int = 16) -> list[dict]:
    """Graded Jacobiator on all basis triples; empty list iff it holds.

    Uses the superderivation form [x,[y,z]] = [[x,y],z] + (-1)^{|x||y|}
    [y,[x,z]], evaluated densely over scaled integers, which is equivalent
    to the graded Jacobi identity and exact in int64.
    """
    d = alg.dim
    if d == 0:
        return []
    T, _ = alg.scaled_integer_table()   # T[x, z, y] = scale * [e_x, e_y]_z
    odd = np.zeros(d, dtype=bool)
    if alg.parity == SYM:
        odd[alg.off_s:alg.off_h] = True
    violations: list[dict] = []
    # PB3[y, z, c] = scale * [e_y, e_z]_c
    PB3 = np.ascontiguousarray(np.transpose(T, (0, 2, 1)))
    for x in range(d):
        Tx = T[x]  # (component, argument)
        # term1[y, z, c] = [x, [y,z]]_c = sum_k Tx[c, k] PB3[y, z, k]
        term1 = PB3 @ Tx.T
        # term2[y, z, c] = [[x,y], z]_c = sum_r Tx[r, y] PB3[r, z, c]
        term2 = np.einsum("ry,rzc->yzc", Tx, PB3, optimize=True)
        # term3[y, z, c] = [y, [x,z]]_c = sum_r Tx[r, z] PB3[y, r, c]
        term3 = np.einsum("rz,yrc->yzc", Tx, PB3, optimize=True)
        sign = np.where(odd[x] & odd, -1, 1)[:, None, None]
        J = term1 - term2 - sign * term3
        if J.any():
            ys, zs, cs = np.nonzero(J)
            for y, z, c in zip(ys, zs, cs):
                violations.append({"triple": (int(x), int(y), int(z)),
                                   "component": int(c)})
                if len(violations) >= max_violations:
                    return violations
    return violations


@dataclass(frozen=True)
class FlatModel:
    """Flat model (super)algebra with verified structure tensors."""

    signature: Signature
    pinor: PinorModule
    action: SpinAction
    kappa: SquaringMap
    algebra: SuperAlgebraTensor
    degenerate_kappa: bool = False

    @property
    def parity(self) -> str:
        return self.kappa.parity

    @property
    def dims(self) -> tuple[int, int, int]:
        return self.algebra.dims


def graded_bracket_tensor(sig: Signature, action: SpinAction,
                          kappa: SquaringMap) -> SuperAlgebraTensor:
    n = sig.n
    N = kappa.dim_s
    Ls = so_basis(sig)
    nh = len(Ls)
    alg = SuperAlgebraTensor((n, N, nh), kappa.parity)
    ov, os_, oh = alg.off_v, alg.off_s, alg.off_h
    half = mpq(1, 2)
    for a in range(nh):
        for b in range(a + 1, nh):
            C = Ls[a] @ Ls[b] - Ls[b] @ Ls[a]
            coords = so_coordinates(sig, C.tolist())
            alg.set_bracket(oh + a, oh + b,
                            {oh + c: v for c, v in enumerate(coords) if v})
        A = Ls[a]
        for i in range(n):
            alg.set_bracket(oh + a, ov + i,
                            {ov + r: mpq(int(A[r, i])) for r in range(n) if A[r, i]})
        D = action.doubled[a]
        for s in range(N):
            alg.set_bracket(oh + a, os_ + s,
                            {os_ + r: half * int(D[r, s]) for r in range(N) if D[r, s]})
    for s in range(N):
        t0 = s if kappa.parity == SYM else s + 1
        for t in range(t0, N):
            vec = kappa.kappa_basis(s, t)
            alg.set_bracket(os_ + s, os_ + t,
                            {ov + i: mpq(c) for i, c in enumerate(vec) if c})
    return alg


def build_flat_model(sig: Signature, pinor: PinorModule, action: SpinAction,
                     kappa: SquaringMap) -> FlatModel:
    """Assemble the flat model; the Jacobi oracle must come back clean."""
    alg = graded_bracket_tensor(sig, action, kappa)
    degenerate = kappa.is_degenerate()
    violations = super_jacobi_check(alg)
    if violations:
        raise AssertionError(f"flat model fails Jacobi: {violations[:3]}")
    return FlatModel(signature=sig, pinor=pinor, action=action, kappa=kappa,
                     algebra=alg, degenerate_kappa=degenerate)


def standard_model(p: int, q: int, *, parity: str = SYM, clifford_sign: int | None = None,
                   extend: int = 1) -> FlatModel:
    """One-call construction from the shipped bilinear library.

    The Clifford sign defaults to -1 in Lorentzian signature (1, q) --
    the convention under which the familiar Majorana modules and causal
    squaring maps exist -- and +1 otherwise.
    """
    if clifford_sign is None:
        clifford_sign = -1 if (p == 1 and q >= 1) else 1
    sig = Signature(p, q, clifford_sign)
    pinor = build_pinor(sig)
    action = spin_action(sig, pinor)
    base = shipped_squaring_map(sig, pinor, action, parity)
    swap_parity = False
    if base is None:
        other = SKEW if parity == SYM else SYM
        base = shipped_squaring_map(sig, pinor, action, other)
        swap_parity = base is not None
    if base is None:
        raise ValueError(f"no verified bilinear available for {sig} ({parity})")
    if extend > 1 or swap_parity:
        n_copies = extend if extend > 1 else 2
        pinor = build_pinor(sig, extend=n_copies)
        action = spin_action(sig, pinor)
        kappa = extended_squaring_map(base, n_copies, parity)
    else:
        kappa = base
    return build_flat_model(sig, pinor, action, kappa)


# -- abstract Lie algebra certificates (used by the sphere case study) --------


def adjoint_matrices(alg: SuperAlgebraTensor) -> list[QMatrix]:
    d = alg.dim
    out = []
    for x in range(d):
        rows: list[dict[int, mpq]] = [dict() for _ in range(d)]
        for y in range(d):
            for z, v in alg.bracket(x, y).items():
                rows[z][y] = v
        out.append(QMatrix(d, d, rows))
    return out


def killing_form(alg: SuperAlgebraTensor) -> QMatrix:
    """K(x, y) = tr(ad_x ad_y) on an ordinary Lie algebra tensor."""
    if alg.parity != SKEW:
        raise ValueError("Killing form certificate implemented for Lie algebras")
    ads = adjoint_matrices(alg)
    d = alg.dim
    rows: list[dict[int, mpq]] = [dict() for _ in range(d)]
    for x in range(d):
        for y in range(x, d):
            tr = mpq(0)
            for k in range(d):
                col = ads[y].rows[k]  # row k of ad_y: entries (ad_y)[k, j]
                rowx = ads[x].rows
                for j, v in col.items():
                    w = rowx[j].get(k)
                    if w:
                        tr += w * v
            if tr:
                rows[x][y] = tr
                if y != x:
                    rows[y][x] = tr
    return QMatrix(d, d, rows)


def center_dim(alg: SuperAlgebraTensor) -> int:
    ads = adjoint_matrices(alg)
    stacked = ads[0]
    for m in ads[1:]:
        stacked = stacked.stack(m)
    from .exactla import kernel_basis
    return kernel_basis(stacked).dim


def derived_dim(alg: SuperAlgebraTensor) -> int:
    vecs = []
    d = alg.dim
    for x in range(d):
        for y in range(x + 1, d):
            vec = alg.bracket(x, y)
            if vec:
                dense = [mpq(0)] * d
                for z, v in vec.items():
                    dense[z] = v
                vecs.append(dense)
    return Subspace.from_vectors(d, vecs).dim
