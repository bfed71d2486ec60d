"""Algebraic realizability checks on the homogeneous model.

Everything happens at the basepoint: the even part g = V + h of a filtered
deformation together with the inner product on g/h = V forms a metric Lie
pair, the Levi-Civita connection is encoded by its Nomizu map L, and
curvature comes from Wang's formula

    F(X, Y) = [Psi(X), Psi(Y)]_k - Psi([X, Y]_g).

For a deformation built from admissible data the expected identities are

  * L(A + v) = A + lambda(v), entrywise,
  * the algebraic Killing spinor equation
        rho(L(X)) s - [X, s]' = -beta(v, s)   (v the V-part of X),
  * flatness of the spinor connection on S': its Nomizu map is
        Psi_D(A + v) = rho(A + lambda(v)) + beta(v, -),
    (the connection one-form convention absorbs the sign: D-parallel
    spinors satisfy nabla s = beta(., s)), and F_D(X, Y) s = 0 for s in S'.

No manifolds are constructed; these identities are exactly the basepoint
content of the reconstruction of a homogeneous spin geometry from the
deformation data.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from gmpy2 import mpq

from .clifford import Signature, so_basis, so_coordinates
from .deform import FilteredDeformation, _matvec, _rho_matrix, _so_matrix
from .exactla import QMatrix
from .flatmodel import SKEW, SYM, SuperAlgebraTensor


class WellDefinednessFailure(Exception):
    """The would-be Nomizu map does not factor through g/h."""


@dataclass
class MetricLiePair:
    """(g, h, eta) with g presented on a V + h basis.

    bracket(i, j) returns the g-bracket as {index: value} over the same
    basis, with indices < dim_v naming V and the rest naming h.
    """

    signature: Signature
    dim_v: int
    dim_h: int
    table: dict[tuple[int, int], dict[int, mpq]]
    h_matrices: list[list[list[mpq]]]   # ambient so(V) matrices of the h basis

    @property
    def dim(self) -> int:
        return self.dim_v + self.dim_h

    def bracket(self, i: int, j: int) -> dict[int, mpq]:
        return self.table.get((i, j), {})

    def v_part(self, vec: dict[int, mpq]) -> list[mpq]:
        out = [mpq(0)] * self.dim_v
        for k, v in vec.items():
            if k < self.dim_v:
                out[k] = v
        return out

    def check_eta_invariance(self) -> bool:
        eta = self.signature.eta
        n = self.dim_v
        for A in self.h_matrices:
            for i in range(n):
                for j in range(n):
                    if eta[i] * A[i][j] + eta[j] * A[j][i] != 0:
                        return False
        return True


def metric_lie_pair(defm: FilteredDeformation) -> MetricLiePair:
    """Even part of a filtered deformation as a metric Lie pair."""
    alg = defm.algebra
    sig = defm.sub.model.signature
    n, m, nh = alg.dims
    ov, os_, oh = alg.off_v, alg.off_s, alg.off_h

    def remap(idx: int) -> int | None:
        if ov <= idx < os_:
            return idx - ov
        if idx >= oh:
            return n + (idx - oh)
        return None

    table: dict[tuple[int, int], dict[int, mpq]] = {}
    src = [ov + i for i in range(n)] + [oh + k for k in range(nh)]
    for a, ia in enumerate(src):
        for b, ib in enumerate(src):
            vec = alg.bracket(ia, ib)
            if vec:
                out = {}
                for z, v in vec.items():
                    rz = remap(z)
                    assert rz is not None, "even part not closed"
                    out[rz] = v
                table[(a, b)] = out
    h_mats = [defm.sub.h_matrix(k) for k in range(nh)]
    pair = MetricLiePair(signature=sig, dim_v=n, dim_h=nh, table=table,
                         h_matrices=h_mats)
    assert pair.check_eta_invariance(), "eta is not h-invariant"
    return pair


@dataclass
class NomizuMap:
    """Psi: g -> k in a fixed basis; columns[x] is the matrix Psi(e_x)."""

    pair: MetricLiePair
    columns: list[list[list[mpq]]]

    def of_vec(self, coords) -> list[list[mpq]]:
        k = len(self.columns[0])
        kc = len(self.columns[0][0])
        M = [[mpq(0)] * kc for _ in range(k)]
        for x, c in enumerate(coords):
            if c:
                col = self.columns[x]
                for i in range(k):
                    for j in range(kc):
                        if col[i][j]:
                            M[i][j] += mpq(c) * col[i][j]
        return M


def nomizu_levi_civita(pair: MetricLiePair) -> NomizuMap:
    """Nomizu map of the Levi-Civita connection of a metric Lie pair.

    Computes the degenerate pairing <X, Y> = eta(Xbar, Ybar), the
    correction U from 2 eta(U(X,Y), v) = <X,[Z,Y]> + <[Z,X],Y>, and
    Ltilde(X)Y = (1/2) [X, Y]bar + U(X, Y); Ltilde must kill h (else
    WellDefinednessFailure), and the factored L is eta-skew and
    torsion-free, both verified here.
    """
    sig = pair.signature
    eta = sig.eta
    n = pair.dim_v
    d = pair.dim

    def pairing(xv: list[mpq], yv: list[mpq]) -> mpq:
        return sum((eta[i] * xv[i] * yv[i] for i in range(n)), mpq(0))

    vbar = [pair.v_part({x: mpq(1)}) for x in range(d)]

    def u_of(x: int, y: int) -> list[mpq]:
        out = [mpq(0)] * n
        for k in range(n):
            zk = k  # lift of e_k is the k-th basis vector of g
            t1 = pairing(vbar[x], pair.v_part(pair.bracket(zk, y)))
            t2 = pairing(pair.v_part(pair.bracket(zk, x)), vbar[y])
            out[k] = (t1 + t2) / (2 * eta[k])
        return out

    ltilde = [[None] * d for _ in range(d)]
    for x in range(d):
        for y in range(d):
            br = pair.v_part(pair.bracket(x, y))
            u = u_of(x, y)
            ltilde[x][y] = [br[i] / 2 + u[i] for i in range(n)]
    # factorisation through g/h
    for x in range(d):
        for y in range(n, d):
            if any(ltilde[x][y]):
                raise WellDefinednessFailure(f"Ltilde({x}) does not kill h element {y}")
    columns = []
    for x in range(d):
        L = [[ltilde[x][v][i] for v in range(n)] for i in range(n)]
        columns.append(L)
    nomizu = NomizuMap(pair=pair, columns=columns)
    # metric compatibility: image in so(V)
    for x in range(d):
        L = columns[x]
        for i in range(n):
            for j in range(n):
                if eta[i] * L[i][j] + eta[j] * L[j][i] != 0:
                    raise AssertionError("Levi-Civita Nomizu map is not eta-skew")
    # torsion-freeness on V-lifts
    for x in range(d):
        for y in range(d):
            br = pair.v_part(pair.bracket(x, y))
            lhs = [ltilde[x][y][i] - ltilde[y][x][i] - br[i] for i in range(n)]
            if any(lhs):
                raise AssertionError("torsion-freeness fails")
    return nomizu


def nomizu_matches_lambda(defm: FilteredDeformation, nomizu: NomizuMap) -> bool:
    """L(A + v) = A + lambda(v), entrywise on basis elements."""
    sig = defm.sub.model.signature
    n = sig.n
    pair = nomizu.pair
    for v in range(n):
        lam_mat = _so_matrix(sig, defm.adm.lam[v])
        L = nomizu.columns[v]
        for i in range(n):
            for j in range(n):
                if L[i][j] != lam_mat[i][j]:
                    return False
    for k in range(pair.dim_h):
        A = pair.h_matrices[k]
        L = nomizu.columns[n + k]
        for i in range(n):
            for j in range(n):
                if L[i][j] != A[i][j]:
                    return False
    return True


def wang_curvature(nomizu: NomizuMap) -> dict[tuple[int, int], list[list[mpq]]]:
    """F(X, Y) = [Psi X, Psi Y] - Psi([X, Y]_g) on basis pairs (X < Y)."""
    pair = nomizu.pair
    d = pair.dim
    out = {}
    k = len(nomizu.columns[0])
    for x in range(d):
        Px = nomizu.columns[x]
        for y in range(x + 1, d):
            Py = nomizu.columns[y]
            C = [[sum(Px[i][t] * Py[t][j] - Py[i][t] * Px[t][j] for t in range(k))
                  for j in range(k)] for i in range(k)]
            br = pair.bracket(x, y)
            if br:
                coords = [br.get(t, mpq(0)) for t in range(d)]
                M = nomizu.of_vec(coords)
                C = [[C[i][j] - M[i][j] for j in range(k)] for i in range(k)]
            out[(x, y)] = C
    return out


def curvature_is_skew(nomizu: NomizuMap, F) -> bool:
    """F(X, Y) = -F(Y, X) holds by the formula; verified by recomputation."""
    pair = nomizu.pair
    d = pair.dim
    k = len(nomizu.columns[0])
    for x in range(d):
        Px = nomizu.columns[x]
        C = [[sum(Px[i][t] * Px[t][j] - Px[i][t] * Px[t][j] for t in range(k))
              for j in range(k)] for i in range(k)]
        br = pair.bracket(x, x)
        if br and any(br.values()):
            coords = [br.get(t, mpq(0)) for t in range(d)]
            M = nomizu.of_vec(coords)
            C = [[C[i][j] - M[i][j] for j in range(k)] for i in range(k)]
        if any(any(row) for row in C):
            return False
    return True


def killing_spinor_check(defm: FilteredDeformation, nomizu: NomizuMap) -> dict:
    """rho(L(X)) s - [X, s]' = -beta(vbar, s) for X in g0, s in S' basis."""
    model = defm.sub.model
    sig = model.signature
    n = sig.n
    alg = defm.algebra
    m = alg.dims[1]
    ov, os_, oh = alg.off_v, alg.off_s, alg.off_h
    pair = nomizu.pair
    sbas = defm.sub.s_basis
    failures = []
    for x in range(pair.dim):
        L = nomizu.columns[x]
        coords = so_coordinates(sig, L)
        R = _rho_matrix(model, coords)
        alg_idx = ov + x if x < n else oh + (x - n)
        vbar = [mpq(1) if (x < n and i == x) else mpq(0) for i in range(n)]
        for j in range(m):
            sj = sbas.vectors[j]
            lhs1 = _matvec(R, sj)
            br = alg.bracket(alg_idx, os_ + j)
            amb = [mpq(0)] * model.kappa.dim_s
            for z, v in br.items():
                assert os_ <= z < oh, "g0 bracket with S' left S'"
                sv = sbas.vectors[z - os_]
                for t in range(len(amb)):
                    if sv[t]:
                        amb[t] += v * sv[t]
            rhs = defm.adm.ctx.beta_ambient(vbar, sj)
            for t in range(model.kappa.dim_s):
                if lhs1[t] - amb[t] != -rhs[t]:
                    failures.append((x, j, t))
                    break
    return {"passed": not failures, "failures": failures[:8]}


def spinor_connection_nomizu(defm: FilteredDeformation,
                             nomizu: NomizuMap) -> NomizuMap:
    """Psi_D(X) = rho(L(X)) + beta(vbar, -) acting on the full spinor module."""
    model = defm.sub.model
    sig = model.signature
    n = sig.n
    N = model.kappa.dim_s
    pair = nomizu.pair
    columns = []
    for x in range(pair.dim):
        coords = so_coordinates(sig, nomizu.columns[x])
        M = _rho_matrix(model, coords)
        if x < n:
            vbar = [mpq(1) if i == x else mpq(0) for i in range(n)]
            for c in range(N):
                e = [mpq(1) if t == c else mpq(0) for t in range(N)]
                col = defm.adm.ctx.beta_ambient(vbar, e)
                for r in range(N):
                    if col[r]:
                        M[r][c] += col[r]
        columns.append(M)
    return NomizuMap(pair=pair, columns=columns)


def spinor_connection_flatness(defm: FilteredDeformation,
                               nomizu: NomizuMap) -> dict:
    """F_D(X, Y) s = 0 for all basis X, Y in g0 and s in S'."""
    psi_d = spinor_connection_nomizu(defm, nomizu)
    F = wang_curvature(psi_d)
    sbas = defm.sub.s_basis
    failures = []
    for (x, y), M in F.items():
        for j in range(sbas.dim):
            img = _matvec(M, sbas.vectors[j])
            if any(img):
                failures.append((x, y, j))
                break
    return {"passed": not failures, "failures": failures[:8]}


def reconstruction_report(defm: FilteredDeformation) -> dict:
    """Full basepoint realizability report for a deformation."""
    pair = metric_lie_pair(defm)
    nomizu = nomizu_levi_civita(pair)
    l_match = nomizu_matches_lambda(defm, nomizu)
    ks = killing_spinor_check(defm, nomizu)
    flat = spinor_connection_flatness(defm, nomizu)
    F = wang_curvature(nomizu)
    return {
        "nomizu_equals_lambda": l_match,
        "killing_spinor": ks,
        "spinor_connection_flat_on_Sprime": flat,
        "curvature_pairs": len(F),
        "passed": bool(l_match and ks["passed"] and flat["passed"]),
    }
