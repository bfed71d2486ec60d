"""Exact rational linear algebra over arbitrary-precision rationals.

Everything downstream (Clifford modules, Spencer complexes, deformations)
runs on the primitives in this module: sparse rational matrices, rank with
multi-prime modular acceleration, deterministic reduced-echelon kernels,
linear solves and simultaneous annihilators.

Determinism contract: identical inputs produce bit-identical outputs.
Pivoting is lexicographic (first column, first usable row), and the
"random" primes used by the modular rank path are drawn from a PRNG seeded
by a content hash of the matrix, so repeated calls agree exactly.
"""

from __future__ import annotations

import hashlib
from typing import Iterable, Iterator, Sequence

from gmpy2 import mpq, mpz

from . import modp

Q = mpq  # arbitrary-precision rational; gmpy2 keeps lowest terms, q > 0

QZERO = mpq(0)
QONE = mpq(1)


class NoSolution(Exception):
    """Raised by solve() when the right-hand side is not in the image."""


def qstr(x) -> str:
    """Canonical "p/q" string form (plain integer string when q == 1)."""
    x = mpq(x)
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


def parse_q(s) -> mpq:
    if isinstance(s, str):
        return mpq(s)
    if isinstance(s, int):
        return mpq(s)
    if isinstance(s, mpq):
        return s
    raise TypeError(f"cannot parse rational from {type(s).__name__}")


class QMatrix:
    """Sparse matrix of rationals, stored row-wise as {col: value} dicts.

    Treated as immutable after construction; helpers return new objects.
    """

    __slots__ = ("nrows", "ncols", "rows")

    def __init__(self, nrows: int, ncols: int, rows: list[dict[int, mpq]] | None = None):
        self.nrows = int(nrows)
        self.ncols = int(ncols)
        self.rows = rows if rows is not None else [dict() for _ in range(nrows)]
        if len(self.rows) != self.nrows:
            raise ValueError("row count mismatch")

    # -- construction -----------------------------------------------------

    @classmethod
    def from_dense(cls, data: Sequence[Sequence]) -> "QMatrix":
        nrows = len(data)
        ncols = len(data[0]) if nrows else 0
        rows: list[dict[int, mpq]] = []
        for r in data:
            if len(r) != ncols:
                raise ValueError("ragged rows")
            rows.append({j: mpq(v) for j, v in enumerate(r) if v != 0})
        return cls(nrows, ncols, rows)

    @classmethod
    def from_entries(cls, nrows: int, ncols: int,
                     entries: Iterable[tuple[int, int, object]]) -> "QMatrix":
        rows: list[dict[int, mpq]] = [dict() for _ in range(nrows)]
        for i, j, v in entries:
            if not (0 <= i < nrows and 0 <= j < ncols):
                raise ValueError(f"entry ({i},{j}) outside {nrows}x{ncols}")
            q = mpq(v)
            if q:
                cur = rows[i].get(j)
                q = q if cur is None else cur + q
                if q:
                    rows[i][j] = q
                elif cur is not None:
                    del rows[i][j]
        return cls(nrows, ncols, rows)

    @classmethod
    def identity(cls, n: int) -> "QMatrix":
        return cls(n, n, [{i: QONE} for i in range(n)])

    @classmethod
    def zeros(cls, nrows: int, ncols: int) -> "QMatrix":
        return cls(nrows, ncols)

    # -- access ------------------------------------------------------------

    def __getitem__(self, ij: tuple[int, int]) -> mpq:
        i, j = ij
        return self.rows[i].get(j, QZERO)

    def iter_entries(self) -> Iterator[tuple[int, int, mpq]]:
        for i, row in enumerate(self.rows):
            for j in sorted(row):
                yield i, j, row[j]

    def nnz(self) -> int:
        return sum(len(r) for r in self.rows)

    def to_dense(self) -> list[list[mpq]]:
        out = [[QZERO] * self.ncols for _ in range(self.nrows)]
        for i, row in enumerate(self.rows):
            for j, v in row.items():
                out[i][j] = v
        return out

    def transpose(self) -> "QMatrix":
        rows: list[dict[int, mpq]] = [dict() for _ in range(self.ncols)]
        for i, row in enumerate(self.rows):
            for j, v in row.items():
                rows[j][i] = v
        return QMatrix(self.ncols, self.nrows, rows)

    def matvec(self, x: Sequence) -> list[mpq]:
        out = []
        for row in self.rows:
            s = QZERO
            for j, v in row.items():
                xj = x[j]
                if xj:
                    s += v * xj
            out.append(s)
        return out

    def matmul(self, other: "QMatrix") -> "QMatrix":
        if self.ncols != other.nrows:
            raise ValueError("shape mismatch")
        rows: list[dict[int, mpq]] = []
        for row in self.rows:
            acc: dict[int, mpq] = {}
            for k, v in row.items():
                for j, w in other.rows[k].items():
                    t = acc.get(j, QZERO) + v * w
                    if t:
                        acc[j] = t
                    elif j in acc:
                        del acc[j]
            rows.append(acc)
        return QMatrix(self.nrows, other.ncols, rows)

    def stack(self, other: "QMatrix") -> "QMatrix":
        if self.ncols != other.ncols:
            raise ValueError("column mismatch")
        rows = [dict(r) for r in self.rows] + [dict(r) for r in other.rows]
        return QMatrix(self.nrows + other.nrows, self.ncols, rows)

    def __eq__(self, other) -> bool:
        if not isinstance(other, QMatrix):
            return NotImplemented
        if (self.nrows, self.ncols) != (other.nrows, other.ncols):
            return False
        return all(a == b for a, b in zip(self.rows, other.rows))

    def __repr__(self) -> str:
        return f"QMatrix({self.nrows}x{self.ncols}, nnz={self.nnz()})"

    # -- integer scaling for the modular engine ----------------------------

    def integer_rows(self) -> list[tuple[list[int], list[int]]]:
        """Per-row denominator-cleared integer copies (cols, vals)."""
        out = []
        for row in self.rows:
            if not row:
                out.append(([], []))
                continue
            den = 1
            for v in row.values():
                d = int(v.denominator)
                if d != 1:
                    den = den * d // _gcd(den, d)
            cols = sorted(row)
            vals = [int(row[j].numerator) * (den // int(row[j].denominator)) for j in cols]
            out.append((cols, vals))
        return out

    def content_hash(self) -> bytes:
        h = hashlib.blake2b(digest_size=16)
        h.update(f"{self.nrows},{self.ncols};".encode())
        for i, row in enumerate(self.rows):
            for j in sorted(row):
                h.update(f"{i},{j},{qstr(row[j])};".encode())
        return h.digest()


def _gcd(a: int, b: int) -> int:
    while b:
        a, b = b, a % b
    return a


# -- echelon forms ----------------------------------------------------------


def rref(M: QMatrix) -> tuple[list[int], list[dict[int, mpq]]]:
    """Reduced row echelon form with lexicographic pivoting.

    Returns (pivot_columns, reduced_rows); reduced_rows holds the nonzero
    rows only, one per pivot column, fully back-substituted.  This is the
    canonical representative used for every deterministic basis downstream.
    """
    pivots: list[int] = []
    prows: list[dict[int, mpq]] = []  # prows[k] has leading column pivots[k]
    pivot_of: dict[int, int] = {}
    for row in M.rows:
        cur = dict(row)
        # clear every pivot column present; registered rows are mutually
        # reduced, so elimination never re-introduces a pivot column
        for c in sorted(set(cur) & pivot_of.keys()):
            f = cur.get(c)
            if not f:
                continue
            for j, v in prows[pivot_of[c]].items():
                t = cur.get(j, QZERO) - f * v
                if t:
                    cur[j] = t
                elif j in cur:
                    del cur[j]
        if not cur:
            continue
        lead = min(cur)
        inv = 1 / cur[lead]
        cur = {j: v * inv for j, v in cur.items()}
        # back-substitute the new pivot into existing rows
        for k, prow in enumerate(prows):
            f = prow.get(lead)
            if f:
                for j, v in cur.items():
                    t = prow.get(j, QZERO) - f * v
                    if t:
                        prow[j] = t
                    elif j in prow:
                        del prow[j]
        pivots.append(lead)
        prows.append(cur)
        pivot_of[lead] = len(pivots) - 1
    # sort rows by pivot column for the canonical form
    order = sorted(range(len(pivots)), key=lambda k: pivots[k])
    pivots = [pivots[k] for k in order]
    prows = [prows[k] for k in order]
    return pivots, prows


def rank(M: QMatrix, *, modular: bool | None = None, num_primes: int = 2) -> int:
    """Rank over the rationals.

    With modular acceleration (default for anything non-tiny) the rank is
    computed modulo `num_primes` >= 2 distinct pseudorandom primes > 2**30,
    seeded from the matrix content.  Agreement is accepted; disagreement
    falls back to a certified exact elimination.
    """
    if M.nrows == 0 or M.ncols == 0:
        return 0
    if modular is None:
        modular = M.nrows * M.ncols > 4096
    if not modular:
        pivots, _ = rref(M)
        return len(pivots)
    seed = M.content_hash()
    primes = modp.pick_primes(seed, max(2, num_primes))
    int_rows = M.integer_rows()
    ranks = [modp.sparse_rank(int_rows, M.ncols, p) for p in primes]
    if len(set(ranks)) == 1:
        return ranks[0]
    pivots, _ = rref(M)  # certified exact fallback
    return len(pivots)


class Subspace:
    """Subspace of Q^n carried by a reduced-echelon basis (rows).

    Echelon pivots are strictly increasing, so equal subspaces have
    bit-identical representatives.
    """

    __slots__ = ("ambient_dim", "basis", "pivots")

    def __init__(self, ambient_dim: int, basis: list[dict[int, mpq]], pivots: list[int]):
        self.ambient_dim = int(ambient_dim)
        self.basis = basis
        self.pivots = pivots

    @classmethod
    def from_vectors(cls, ambient_dim: int, vectors: Iterable[Sequence]) -> "Subspace":
        rows = []
        for v in vectors:
            rows.append({j: mpq(x) for j, x in enumerate(v) if x != 0})
        M = QMatrix(len(rows), ambient_dim, rows)
        pivots, prows = rref(M)
        return cls(ambient_dim, prows, pivots)

    @classmethod
    def full(cls, ambient_dim: int) -> "Subspace":
        return cls(ambient_dim,
                   [{i: QONE} for i in range(ambient_dim)],
                   list(range(ambient_dim)))

    @classmethod
    def zero(cls, ambient_dim: int) -> "Subspace":
        return cls(ambient_dim, [], [])

    @property
    def dim(self) -> int:
        return len(self.basis)

    def basis_vectors(self) -> list[list[mpq]]:
        out = []
        for row in self.basis:
            v = [QZERO] * self.ambient_dim
            for j, x in row.items():
                v[j] = x
            out.append(v)
        return out

    def reduce(self, vector: Sequence) -> dict[int, mpq]:
        """Residue of `vector` after projecting out the subspace."""
        cur = {j: mpq(x) for j, x in enumerate(vector) if x != 0}
        for piv, row in zip(self.pivots, self.basis):
            f = cur.get(piv)
            if f:
                for j, v in row.items():
                    t = cur.get(j, QZERO) - f * v
                    if t:
                        cur[j] = t
                    elif j in cur:
                        del cur[j]
        return cur

    def contains(self, vector: Sequence) -> bool:
        return not self.reduce(vector)

    def contains_subspace(self, other: "Subspace") -> bool:
        return all(not self.reduce(v) for v in other.basis_vectors())

    def intersect(self, other: "Subspace") -> "Subspace":
        """Intersection via the kernel of the stacked coordinate map."""
        if self.ambient_dim != other.ambient_dim:
            raise ValueError("ambient dimension mismatch")
        a, b = self.dim, other.dim
        if a == 0 or b == 0:
            return Subspace.zero(self.ambient_dim)
        # columns: coefficients on self.basis then other.basis
        rows: list[dict[int, mpq]] = [dict() for _ in range(self.ambient_dim)]
        for k, row in enumerate(self.basis):
            for j, v in row.items():
                rows[j][k] = v
        for k, row in enumerate(other.basis):
            for j, v in row.items():
                rows[j][a + k] = rows[j].get(a + k, QZERO) - v
        ker = kernel_basis(QMatrix(self.ambient_dim, a + b, rows))
        vecs = []
        for coeff in ker.basis_vectors():
            v = [QZERO] * self.ambient_dim
            for k, row in enumerate(self.basis):
                c = coeff[k]
                if c:
                    for j, x in row.items():
                        v[j] += c * x
            vecs.append(v)
        return Subspace.from_vectors(self.ambient_dim, vecs)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Subspace):
            return NotImplemented
        return (self.ambient_dim == other.ambient_dim
                and self.pivots == other.pivots
                and self.basis == other.basis)

    def __repr__(self) -> str:
        return f"Subspace(dim={self.dim}, ambient={self.ambient_dim})"


def kernel_basis(M: QMatrix) -> Subspace:
    """Reduced-echelon basis of {x : Mx = 0}; dim = ncols - rank(M).

    The representative is the standard free-variable basis read off the
    RREF of M: vector k has a unit entry at the k-th free column, zeros at
    the other free columns, and its remaining support on pivot columns of
    M.  Pivots of the basis are the free columns, strictly increasing, so
    the output is canonical.
    """
    pivots, prows = rref(M)
    pivot_set = set(pivots)
    free = [j for j in range(M.ncols) if j not in pivot_set]
    basis: list[dict[int, mpq]] = []
    for f in free:
        vec: dict[int, mpq] = {f: QONE}
        for piv, row in zip(pivots, prows):
            c = row.get(f)
            if c:
                vec[piv] = -c
        basis.append(vec)
    return Subspace(M.ncols, basis, free)


def kernel_dim_modular(M: QMatrix, *, num_primes: int = 2) -> int:
    """ncols - rank(M), with the modular-rank contract."""
    return M.ncols - rank(M, modular=True, num_primes=num_primes)


def solve(M: QMatrix, b: Sequence) -> list[mpq]:
    """One particular solution of Mx = b in echelon-deterministic form.

    Free variables are set to zero.  Raises NoSolution if b is not in the
    image of M.
    """
    if len(b) != M.nrows:
        raise ValueError("rhs length mismatch")
    aug_rows = []
    for i, row in enumerate(M.rows):
        r = dict(row)
        bv = mpq(b[i])
        if bv:
            r[M.ncols] = bv
        aug_rows.append(r)
    aug = QMatrix(M.nrows, M.ncols + 1, aug_rows)
    pivots, prows = rref(aug)
    x = [QZERO] * M.ncols
    for piv, row in zip(pivots, prows):
        if piv == M.ncols:
            raise NoSolution("rhs not in column span")
        x[piv] = row.get(M.ncols, QZERO)
    return x


def common_annihilated(ops: Sequence[QMatrix], dim: int | None = None) -> Subspace:
    """Intersection of the kernels of square operators (module invariants)."""
    ops = list(ops)
    if not ops:
        if dim is None:
            raise ValueError("dim required for an empty operator list")
        return Subspace.full(dim)
    n = ops[0].ncols
    for op in ops:
        if op.nrows != op.ncols or op.ncols != n:
            raise ValueError("operators must be square and equal-sized")
    if dim is not None and dim != n:
        raise ValueError("dim inconsistent with operators")
    stacked = ops[0]
    for op in ops[1:]:
        stacked = stacked.stack(op)
    return kernel_basis(stacked)


def inertia_symmetric(M: QMatrix) -> tuple[int, int, int]:
    """Inertia (n_plus, n_minus, n_zero) of a symmetric rational matrix.

    Exact symmetric elimination (congruence); used for Killing-form
    signatures.  Off-diagonal pivots are handled by the standard row/column
    addition trick, which preserves inertia.
    """
    n = M.nrows
    if M.ncols != n:
        raise ValueError("matrix must be square")
    A = [[M[i, j] for j in range(n)] for i in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            if A[i][j] != A[j][i]:
                raise ValueError("matrix not symmetric")
    pos = neg = zero = 0
    idx = list(range(n))

    def sym_eliminate(rows: list[int]) -> tuple[int, int, int]:
        if not rows:
            return (0, 0, 0)
        # find a nonzero diagonal pivot
        pivot = None
        for r in rows:
            if A[r][r]:
                pivot = r
                break
        if pivot is None:
            # look for an off-diagonal nonzero; if none, the block is zero
            hit = None
            for ii, r in enumerate(rows):
                for s in rows[ii + 1:]:
                    if A[r][s]:
                        hit = (r, s)
                        break
                if hit:
                    break
            if hit is None:
                return (0, 0, len(rows))
            r, s = hit
            # congruence by (row/col r) += (row/col s): diagonal r becomes
            # A[r][r] + 2 A[r][s] + A[s][s] = 2 A[r][s] != 0
            for t in range(n):
                A[r][t] = A[r][t] + A[s][t]
            for t in range(n):
                A[t][r] = A[t][r] + A[t][s]
            pivot = r
        d = A[pivot][pivot]
        rest = [r for r in rows if r != pivot]
        for r in rest:
            f = A[r][pivot] / d
            if f:
                for s in rest:
                    A[r][s] = A[r][s] - f * A[pivot][s]
        p, m, z = sym_eliminate(rest)
        if d > 0:
            return (p + 1, m, z)
        return (p, m + 1, z)

    import sys
    old = sys.getrecursionlimit()
    sys.setrecursionlimit(max(old, n + 100))
    try:
        pos, neg, zero = sym_eliminate(idx)
    finally:
        sys.setrecursionlimit(old)
    return pos, neg, zero


# -- sparse rational tensors -------------------------------------------------


class RationalTensor:
    """Sparse multi-index array of rationals.

    The carrier for all structure maps (squaring maps, cocycle components,
    bracket tensors).  No explicit zeros are stored; indices are validated
    against the shape.
    """

    __slots__ = ("shape", "entries")

    def __init__(self, shape: Sequence[int],
                 entries: dict[tuple[int, ...], mpq] | None = None):
        self.shape = tuple(int(s) for s in shape)
        self.entries: dict[tuple[int, ...], mpq] = {}
        if entries:
            for idx, v in entries.items():
                self[idx] = v

    def _check(self, idx: tuple[int, ...]) -> tuple[int, ...]:
        idx = tuple(int(i) for i in idx)
        if len(idx) != len(self.shape):
            raise IndexError(f"index arity {len(idx)} != rank {len(self.shape)}")
        for i, s in zip(idx, self.shape):
            if not 0 <= i < s:
                raise IndexError(f"index {idx} outside shape {self.shape}")
        return idx

    def __getitem__(self, idx) -> mpq:
        if not isinstance(idx, tuple):
            idx = (idx,)
        return self.entries.get(self._check(idx), QZERO)

    def __setitem__(self, idx, value) -> None:
        if not isinstance(idx, tuple):
            idx = (idx,)
        idx = self._check(idx)
        q = mpq(value)
        if q:
            self.entries[idx] = q
        else:
            self.entries.pop(idx, None)

    def add_at(self, idx: tuple[int, ...], value) -> None:
        idx = self._check(idx)
        q = self.entries.get(idx, QZERO) + mpq(value)
        if q:
            self.entries[idx] = q
        else:
            self.entries.pop(idx, None)

    def is_zero(self) -> bool:
        return not self.entries

    def nnz(self) -> int:
        return len(self.entries)

    def copy(self) -> "RationalTensor":
        t = RationalTensor(self.shape)
        t.entries = dict(self.entries)
        return t

    def __add__(self, other: "RationalTensor") -> "RationalTensor":
        if self.shape != other.shape:
            raise ValueError("shape mismatch")
        t = self.copy()
        for idx, v in other.entries.items():
            t.add_at(idx, v)
        return t

    def __sub__(self, other: "RationalTensor") -> "RationalTensor":
        return self + other.scale(-1)

    def scale(self, c) -> "RationalTensor":
        c = mpq(c)
        t = RationalTensor(self.shape)
        if c:
            t.entries = {idx: c * v for idx, v in self.entries.items()}
        return t

    def __eq__(self, other) -> bool:
        if not isinstance(other, RationalTensor):
            return NotImplemented
        return self.shape == other.shape and self.entries == other.entries

    def __repr__(self) -> str:
        return f"RationalTensor(shape={self.shape}, nnz={self.nnz()})"
