"""Clifford algebras, real irreducible pinor modules and the spin action.

Conventions
-----------
The inner product is eta = diag(+1 x p, -1 x q), plus directions first; in
Lorentzian signature (1, q) the timelike vector has eta(v, v) = +1.  The
Clifford relation carries a sign choice: generators satisfy

    e_i . e_i = clifford_sign * eta_ii * 1.

Gamma matrices are produced by a recursive tensor-doubling scheme over
explicit base cases (quaternion and octonion left multiplications), which
always yields signed permutation matrices of the minimal (irreducible)
dimension.  Irreducibility is certified against the mod-8 classification
table, and all Clifford relations are verified at build time.

When the number of generators squaring to +1 minus those squaring to -1 is
1 mod 4 there are two irreducible modules, distinguished by the scalar
action of the canonical volume element; the module returned acts as +1.
(Under clifford_sign = -1 this is the familiar "p - q = 3 mod 4" case.)
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from gmpy2 import mpq


@dataclass(frozen=True)
class Signature:
    """Pseudo-Euclidean signature with the Clifford sign convention."""

    p: int
    q: int
    clifford_sign: int = 1

    def __post_init__(self):
        if self.p < 0 or self.q < 0 or self.p + self.q < 1:
            raise ValueError("need p, q >= 0 and p + q >= 1")
        if self.clifford_sign not in (1, -1):
            raise ValueError("clifford_sign must be +1 or -1")

    @property
    def n(self) -> int:
        return self.p + self.q

    @property
    def eta(self) -> tuple[int, ...]:
        return (1,) * self.p + (-1,) * self.q

    @property
    def generator_squares(self) -> tuple[int, ...]:
        """Sign of e_i . e_i for each direction."""
        return tuple(self.clifford_sign * e for e in self.eta)

    @property
    def sigma(self) -> int:
        """(#generators squaring +1) - (#squaring -1) mod 8."""
        k = self.p if self.clifford_sign == 1 else self.q
        m = self.n - k
        return (k - m) % 8

    @property
    def has_volume_split(self) -> bool:
        """True when there are two irreducible modules told apart by the
        volume element (sigma = 1 mod 4, necessarily n odd)."""
        return self.sigma % 4 == 1

    def __str__(self):
        conv = "+" if self.clifford_sign == 1 else "-"
        return f"({self.p},{self.q};{conv})"


# -- abstract Clifford algebra on blades -------------------------------------


class CliffordAlgebra:
    """Cl(V, eta) on the blade basis, blades encoded as bitmasks.

    blade_mul implements the defining relation e_i e_i = sign * eta_ii and
    anticommutativity; products are exact integers (+/-1 coefficients).
    """

    def __init__(self, signature: Signature):
        self.signature = signature
        self._squares = signature.generator_squares
        self._cache: dict[tuple[int, int], tuple[int, int]] = {}

    def blade_mul(self, a: int, b: int) -> tuple[int, int]:
        """Product of blades: returns (coefficient, blade mask)."""
        key = (a, b)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        sign = 1
        acc = a
        rest = b
        while rest:
            j = (rest & -rest).bit_length() - 1
            rest &= rest - 1
            above = acc >> (j + 1)
            if above:
                sign *= -1 if (bin(above).count("1") & 1) else 1
            if acc & (1 << j):
                sign *= self._squares[j]
                acc &= ~(1 << j)
            else:
                acc |= 1 << j
        out = (sign, acc)
        if len(self._cache) < 1 << 22:
            self._cache[key] = out
        return out

    def blade_table(self) -> dict[tuple[int, int], tuple[int, int]]:
        """Full 2^n x 2^n multiplication table (small n only)."""
        n = self.signature.n
        if n > 8:
            raise ValueError("full table materialization is limited to n <= 8")
        return {(a, b): self.blade_mul(a, b)
                for a in range(1 << n) for b in range(1 << n)}

    def check_relations(self) -> None:
        sq = self._squares
        for i in range(self.signature.n):
            c, m = self.blade_mul(1 << i, 1 << i)
            assert m == 0 and c == sq[i], "generator square violated"
            for j in range(i + 1, self.signature.n):
                cij, mij = self.blade_mul(1 << i, 1 << j)
                cji, mji = self.blade_mul(1 << j, 1 << i)
                assert mij == mji == (1 << i) | (1 << j) and cij == -cji


def build_clifford(sig: Signature) -> CliffordAlgebra:
    algebra = CliffordAlgebra(sig)
    algebra.check_relations()
    return algebra


# -- explicit real gamma matrices ---------------------------------------------

# octonion Fano triples (e_i e_j = e_k for cyclic (i j k))
_FANO = ((1, 2, 3), (1, 4, 5), (2, 4, 6), (3, 4, 7), (2, 5, 7), (6, 1, 7), (3, 6, 5))


def _octonion_left_mults() -> list[np.ndarray]:
    """Seven anticommuting complex structures on R^8 (octonion L_e_i)."""
    mul = {}
    for i in range(8):
        mul[(0, i)] = (1, i)
        mul[(i, 0)] = (1, i)
    for i in range(1, 8):
        mul[(i, i)] = (-1, 0)
    for (a, b, c) in _FANO:
        for (x, y, z) in ((a, b, c), (b, c, a), (c, a, b)):
            mul[(x, y)] = (1, z)
            mul[(y, x)] = (-1, z)
    mats = []
    for i in range(1, 8):
        L = np.zeros((8, 8), dtype=np.int64)
        for j in range(8):
            s, k = mul[(i, j)]
            L[k, j] = s
        mats.append(L)
    return mats


def _sigma1() -> np.ndarray:
    return np.array([[0, 1], [1, 0]], dtype=np.int64)


def _sigma3() -> np.ndarray:
    return np.array([[1, 0], [0, -1]], dtype=np.int64)


def _jmat() -> np.ndarray:
    return np.array([[0, -1], [1, 0]], dtype=np.int64)


def _kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.kron(a, b)


def _base_minus(d: int) -> list[np.ndarray]:
    """Minimal sets of d pairwise-anticommuting matrices squaring to -1."""
    if d == 0:
        return []
    if d == 1:
        return [_jmat()]
    octo = _octonion_left_mults()
    if d in (2, 3):
        # quaternion left multiplications (top-left 4x4 block of octonions
        # would not close; build L_i, L_j, L_k = L_i L_j directly)
        i4 = np.zeros((4, 4), dtype=np.int64)
        j4 = np.zeros((4, 4), dtype=np.int64)
        qmul = {(1, 1): (-1, 0), (1, 2): (1, 3), (1, 3): (-1, 2),
                (2, 1): (-1, 3), (2, 2): (-1, 0), (2, 3): (1, 1),
                (3, 1): (1, 2), (3, 2): (-1, 1), (3, 3): (-1, 0)}
        for unit, M in ((1, i4), (2, j4)):
            for col in range(4):
                if col == 0:
                    M[unit, 0] = 1
                elif col == unit:
                    M[0, col] = -1
                else:
                    s, k = qmul[(unit, col)]
                    M[k, col] = s
        k4 = i4 @ j4
        return [i4, j4, k4][:d]
    if 4 <= d <= 7:
        return [m.copy() for m in octo[:d]]
    if d == 8:
        inner = _base_minus(7)
        return [_kron(g, _sigma1()) for g in inner] + [_kron(np.eye(8, dtype=np.int64), _jmat())]
    raise ValueError(f"no explicit base for {d} minus-squares")


@lru_cache(maxsize=None)
def _anticommuting_set(k: int, m: int) -> tuple[tuple[np.ndarray, ...], tuple[np.ndarray, ...]]:
    """Minimal-dimension matrices: k squaring +1 and m squaring -1.

    Recursion moves (each provably preserves minimal module dimension):
      strip:   (k, m) -> (k-1, m-1) x2    new pair (1 x sigma1, 1 x J),
               old gammas tensor sigma3
      swap:    (m+2, k) from (k, m) x2    two new plus squares, old ones
               flipped by tensoring with J
      descend: (0, m) for m >= 8 via tensoring with the (0,8) set and its
               volume element
    """
    if k < 0 or m < 0:
        raise ValueError("negative counts")
    if k == 0 and m <= 8:
        base = _base_minus(m)
        return tuple(), tuple(base)
    if (k, m) == (1, 0):
        return (np.array([[1]], dtype=np.int64),), tuple()
    if k >= 1 and m >= 1:
        plus, minus = _anticommuting_set(k - 1, m - 1)
        dim = plus[0].shape[0] if plus else (minus[0].shape[0] if minus else 1)
        eye = np.eye(dim, dtype=np.int64)
        new_plus = [_kron(g, _sigma3()) for g in plus] + [_kron(eye, _sigma1())]
        new_minus = [_kron(g, _sigma3()) for g in minus] + [_kron(eye, _jmat())]
        return tuple(new_plus), tuple(new_minus)
    if m == 0:  # k >= 2
        plus, minus = _anticommuting_set(0, k - 2)
        dim = minus[0].shape[0] if minus else 1
        eye = np.eye(dim, dtype=np.int64)
        new_plus = [_kron(eye, _sigma1()), _kron(eye, _sigma3())]
        new_minus = [_kron(g, _jmat()) for g in minus]
        return tuple(new_plus + new_minus), tuple()
    # k == 0, m >= 9: tensor with the (0, 8) set and its volume
    _, eight = _anticommuting_set(0, 8)
    vol8 = eight[0]
    for g in eight[1:]:
        vol8 = vol8 @ g
    _, minus = _anticommuting_set(0, m - 8)
    dim = minus[0].shape[0] if minus else 1
    out_minus = [_kron(g, vol8) for g in minus] + \
                [_kron(np.eye(dim, dtype=np.int64), g) for g in eight]
    return tuple(), tuple(out_minus)


def minimal_pinor_dim(sig: Signature) -> int:
    """Dimension of the irreducible real pinor module (mod-8 table)."""
    n = sig.n
    table = {0: 0, 1: -1, 2: 0, 3: 1, 4: 2, 5: 1, 6: 2, 7: 1}
    return 1 << ((n + table[sig.sigma]) // 2)


@dataclass(frozen=True)
class PinorModule:
    """Irreducible real Clifford module: signed-permutation gammas.

    gammas[i] squares to clifford_sign * eta_ii; entries are -1/0/+1 ints.
    For extended modules (N > 1 copies) the gammas act block-diagonally.
    chirality holds (P_plus, P_minus) volume projectors (entries in mpq)
    when the volume element squares to +1 in even dimension.
    """

    signature: Signature
    dim_s: int
    gammas: tuple[np.ndarray, ...]
    volume_sign: int | None = None
    chirality: tuple[np.ndarray, np.ndarray] | None = None
    n_copies: int = 1

    def gamma_of(self, v) -> np.ndarray:
        """Clifford action of a vector with integer coordinates."""
        G = np.zeros((self.dim_s, self.dim_s), dtype=np.int64)
        for i, c in enumerate(v):
            if c:
                G = G + int(c) * self.gammas[i]
        return G

    def check_relations(self) -> None:
        sq = self.signature.generator_squares
        eye = np.eye(self.dim_s, dtype=np.int64)
        for i, gi in enumerate(self.gammas):
            for j, gj in enumerate(self.gammas):
                anti = gi @ gj + gj @ gi
                want = 2 * sq[i] * eye if i == j else 0 * eye
                assert (anti == want).all(), f"Clifford relation failed at ({i},{j})"

    def volume(self) -> np.ndarray:
        vol = self.gammas[0]
        for g in self.gammas[1:]:
            vol = vol @ g
        return vol


def build_pinor(sig: Signature, extend: int = 1) -> PinorModule:
    """Build the irreducible real pinor module (optionally N-extended).

    The minimal module is certified against the classification table; in
    the two-module case the representative with volume acting as +1 is
    returned.  Chirality projectors are attached in even dimension when
    the volume element squares to +1.
    """
    if extend < 1:
        raise ValueError("extension multiplicity must be >= 1")
    if sig.clifford_sign == 1:
        k, m = sig.p, sig.q
    else:
        k, m = sig.q, sig.p
    plus, minus = _anticommuting_set(k, m)
    if sig.clifford_sign == 1:
        gammas = list(plus) + list(minus)
    else:
        gammas = list(minus) + list(plus)
    dim = gammas[0].shape[0]
    assert dim == minimal_pinor_dim(sig), \
        f"construction produced dim {dim}, classification says {minimal_pinor_dim(sig)}"

    volume_sign = None
    chirality = None
    n = sig.n
    vol = gammas[0]
    for g in gammas[1:]:
        vol = vol @ g
    eye = np.eye(dim, dtype=np.int64)
    if sig.has_volume_split:
        # volume is central and squares to +1: fix the +1 module
        assert (vol @ vol == eye).all()
        if (vol == -eye).all():
            gammas[-1] = -gammas[-1]
            vol = -vol
        assert (vol == eye).all(), "volume element is not scalar on the module"
        volume_sign = 1
    elif n % 2 == 0 and (vol @ vol == eye).all():
        chirality = (vol.copy(), (-vol).copy())  # P_pm = (1 pm vol)/2, stored via vol

    if extend > 1:
        eyen = np.eye(extend, dtype=np.int64)
        gammas = [np.kron(g, eyen) for g in gammas]
        dim = dim * extend
        if chirality is not None:
            chirality = (np.kron(chirality[0], eyen), np.kron(chirality[1], eyen))

    module = PinorModule(signature=sig, dim_s=dim, gammas=tuple(gammas),
                         volume_sign=volume_sign, chirality=chirality,
                         n_copies=extend)
    module.check_relations()
    return module


def chirality_projectors(pinor: PinorModule) -> tuple[list[list[mpq]], list[list[mpq]]] | None:
    """P_pm = (1 pm volume)/2 as rational matrices, when defined."""
    if pinor.chirality is None:
        return None
    vol = pinor.chirality[0]
    d = pinor.dim_s
    half = mpq(1, 2)
    p_plus = [[half * (int(i == j) + int(vol[i, j])) for j in range(d)] for i in range(d)]
    p_minus = [[half * (int(i == j) - int(vol[i, j])) for j in range(d)] for i in range(d)]
    return p_plus, p_minus


# -- so(V) and the spin action -------------------------------------------------


def so_basis(sig: Signature) -> list[np.ndarray]:
    """Basis L_ij (i < j) of eta-skew endomorphisms: L_ij e_j = eta_jj e_i."""
    n, eta = sig.n, sig.eta
    out = []
    for i in range(n):
        for j in range(i + 1, n):
            A = np.zeros((n, n), dtype=np.int64)
            A[i, j] = eta[j]
            A[j, i] = -eta[i]
            out.append(A)
    return out


def so_basis_index(sig: Signature) -> dict[tuple[int, int], int]:
    n = sig.n
    idx = {}
    c = 0
    for i in range(n):
        for j in range(i + 1, n):
            idx[(i, j)] = c
            c += 1
    return idx


def is_eta_skew(sig: Signature, A) -> bool:
    eta = sig.eta
    n = sig.n
    return all(eta[i] * A[i][j] + eta[j] * A[j][i] == 0
               for i in range(n) for j in range(n))


def so_coordinates(sig: Signature, A) -> list[mpq]:
    """Coordinates of an eta-skew matrix in the L_ij basis.

    A = sum c_ij L_ij with c_ij = eta_jj * A[i][j] for i < j.
    """
    if not is_eta_skew(sig, A):
        raise ValueError("matrix is not eta-skew")
    eta = sig.eta
    n = sig.n
    return [mpq(A[i][j]) * eta[j] for i in range(n) for j in range(i + 1, n)]


def omega_of(sig: Signature, A) -> dict[tuple[int, int], mpq]:
    """2-vector omega_A with iota_(v flat) omega_A = -A v.

    Returned as {(k, l): coefficient} over k < l; for the basis element
    L_ij this is exactly e_i ^ e_j.
    """
    if not is_eta_skew(sig, A):
        raise ValueError("omega_of requires an eta-skew matrix")
    eta = sig.eta
    n = sig.n
    out = {}
    for k in range(n):
        for l in range(k + 1, n):
            c = -mpq(A[l][k]) * eta[k]
            if c:
                out[(k, l)] = c
    return out


@dataclass(frozen=True)
class SpinAction:
    """Spin representation so(V) -> End(S).

    doubled[a] is the integer matrix 2 * rho(L_a) for the a-th basis
    element L_ij; rho(A) = clifford_sign/2 * (omega_A as Clifford element).
    """

    signature: Signature
    dim_s: int
    doubled: tuple[np.ndarray, ...]

    def rho_int2(self, coords) -> np.ndarray:
        """2 * rho(A) for A given by integer so-coordinates."""
        M = np.zeros((self.dim_s, self.dim_s), dtype=np.int64)
        for a, c in enumerate(coords):
            if c:
                M = M + int(c) * self.doubled[a]
        return M

    def rho_q(self, coords) -> list[list[mpq]]:
        """rho(A) as rational matrix for rational so-coordinates."""
        d = self.dim_s
        M = [[mpq(0)] * d for _ in range(d)]
        for a, c in enumerate(coords):
            if c:
                c = mpq(c) / 2
                D = self.doubled[a]
                for i in range(d):
                    row = D[i]
                    for j in range(d):
                        if row[j]:
                            M[i][j] += c * int(row[j])
        return M


def spin_action(sig: Signature, pinor: PinorModule) -> SpinAction:
    """rho(L_ij) = clifford_sign/2 * Gamma_i Gamma_j on S.

    The embedding omega sends L_ij to e_i ^ e_j, and the induced module
    action is sign/2 times the Clifford product.  Morphism and Clifford
    compatibility are verified by the test suite on every built signature.
    """
    sgn = sig.clifford_sign
    doubled = []
    for i in range(sig.n):
        for j in range(i + 1, sig.n):
            doubled.append(sgn * (pinor.gammas[i] @ pinor.gammas[j]))
    return SpinAction(signature=sig, dim_s=pinor.dim_s, doubled=tuple(doubled))
