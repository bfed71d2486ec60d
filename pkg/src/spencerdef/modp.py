"""Modular (mod-p) elimination engine behind the exact layer.

Rank of the big sparse systems (Spencer differentials in eleven dimensions)
is out of reach for naive rational elimination, so ranks are computed
modulo deterministic pseudorandom 31-bit primes and cross-checked.  The
eliminator runs in two phases:

  phase A: left-looking sparse elimination with numpy row merges; rows that
           fill past a threshold are parked in a pool,
  phase B: pooled rows are re-reduced, remapped to the free columns and
           echelonized densely, reducing row blocks against accumulated
           pivots with a BLAS matmul (16-bit limb split keeps products
           exact in float64).

All primes stay below 2**31 so intermediate int64 products cannot overflow.
"""

from __future__ import annotations

import os
import random

import numpy as np
import sympy

_PRIME_LO = (1 << 30) + 1
_PRIME_HI = (1 << 31) - (1 << 22)

# rows denser than max(_POOL_MIN, ncols // _POOL_DIV) wait for phase B
_POOL_MIN = 192
_POOL_DIV = 8

_BLOCK_ROWS = 256
_SKETCH_ROUNDS = 2
_SKETCH_WIDTH = 48


def pick_primes(seed: bytes, count: int) -> list[int]:
    """Deterministic distinct primes in (2**30, 2**31), seeded by content."""
    rng = random.Random(int.from_bytes(seed, "big"))
    primes: list[int] = []
    while len(primes) < count:
        p = int(sympy.nextprime(rng.randrange(_PRIME_LO, _PRIME_HI)))
        if p < (1 << 31) and p not in primes:
            primes.append(p)
    return primes


def matmul_mod(A: np.ndarray, B: np.ndarray, p: int) -> np.ndarray:
    """(A @ B) mod p for int64 matrices with entries in [0, p), p < 2**31.

    Splits A into 16-bit limbs so every partial product fits float64
    exactly: hi <= 2**15, lo <= 2**16, B < 2**31, inner dim < 2**21.
    """
    k = A.shape[1]
    if k == 0:
        return np.zeros((A.shape[0], B.shape[1]), dtype=np.int64)
    if k >= (1 << 21):
        half = k // 2
        return (matmul_mod(A[:, :half], B[:half], p)
                + matmul_mod(A[:, half:], B[half:], p)) % p
    a_hi = (A >> 16).astype(np.float64)
    a_lo = (A & 0xFFFF).astype(np.float64)
    b_hi = (B >> 16).astype(np.float64)
    b_lo = (B & 0xFFFF).astype(np.float64)
    t_hh = np.asarray(a_hi @ b_hi, dtype=np.float64) % p
    t_mid = (a_hi @ b_lo + a_lo @ b_hi) % p
    t_ll = np.asarray(a_lo @ b_lo, dtype=np.float64) % p
    r16 = (1 << 16) % p
    r32 = (r16 * r16) % p
    c = (t_hh.astype(np.int64) * r32) % p
    c = (c + t_mid.astype(np.int64) * r16) % p
    c = (c + t_ll.astype(np.int64)) % p
    return c


def _merge(cols_a, vals_a, cols_b, vals_b, factor: int, p: int):
    """(row_a + factor * row_b) mod p on sorted sparse rows."""
    fb = (vals_b * factor) % p
    allc = np.concatenate([cols_a, cols_b])
    allv = np.concatenate([vals_a, fb])
    uniq, inv = np.unique(allc, return_inverse=True)
    # at most two contributions per column and values < 2**31, so the
    # float64 bincount accumulates exactly
    summed = np.bincount(inv, weights=allv.astype(np.float64),
                         minlength=len(uniq)).astype(np.int64) % p
    keep = summed != 0
    return uniq[keep], summed[keep]


class _DensePool:
    """Phase-B accumulator: dense pivot rows over the free columns."""

    def __init__(self, width: int, p: int):
        self.p = p
        self.width = width
        self.pivot_rows = np.zeros((0, width), dtype=np.int64)
        self.pivot_cols: list[int] = []          # aligned with pivot_rows
        self.pivot_of: dict[int, int] = {}       # column -> pivot row index

    def _reduce_block(self, block: np.ndarray) -> np.ndarray:
        if self.pivot_cols and block.size:
            coeffs = block[:, self.pivot_cols]
            if np.any(coeffs):
                block = (block - matmul_mod(coeffs, self.pivot_rows, self.p)) % self.p
        return block

    def absorb(self, block: np.ndarray) -> int:
        """Echelonize a dense row block against and into the pivot set."""
        p = self.p
        block = self._reduce_block(np.asarray(block, dtype=np.int64) % p)
        rows: list[np.ndarray] = list(self.pivot_rows)
        added = 0
        for i in range(block.shape[0]):
            row = block[i]
            while True:
                nz = np.nonzero(row)[0]
                if not nz.size:
                    break
                lead = int(nz[0])
                j = self.pivot_of.get(lead)
                if j is None:
                    inv = pow(int(row[lead]), -1, p)
                    row = (row * inv) % p
                    self.pivot_of[lead] = len(rows)
                    self.pivot_cols.append(lead)
                    rows.append(row)
                    added += 1
                    break
                row = (row - int(row[lead]) * rows[j]) % p
        if added:
            self.pivot_rows = np.array(rows, dtype=np.int64)
        return added


def sparse_rank(int_rows: list[tuple[list[int], list[int]]], ncols: int, p: int,
                *, seed: int = 0) -> int:
    """Rank mod p of integer rows given as (sorted cols, values) pairs.

    Phase A keeps rows as small dicts (pivot rows stay near-original
    sparsity on the structured systems this serves); rows that fill past
    the pool cap are deferred to the dense phase B.
    """
    rows: list[dict[int, int]] = []
    for cols, vals in int_rows:
        row = {}
        for c, v in zip(cols, vals):
            v = int(v) % p
            if v:
                row[int(c)] = v
        if row:
            rows.append(row)
    if not rows:
        return 0

    pool_cap = max(_POOL_MIN, ncols // _POOL_DIV)
    pivot_map: dict[int, dict[int, int]] = {}
    pool: list[dict[int, int]] = []

    def clear_pivots(row: dict[int, int]) -> dict[int, int]:
        while row:
            hits = [c for c in row if c in pivot_map]
            if not hits:
                break
            c = min(hits)  # ascending clearing guarantees termination
            f = row.pop(c)
            for cc, vv in pivot_map[c].items():
                if cc == c:
                    continue
                nv = (row.get(cc, 0) - f * vv) % p
                if nv:
                    row[cc] = nv
                else:
                    row.pop(cc, None)
        return row

    # phase A: ascending-fill left-looking elimination
    for row in sorted(rows, key=len):
        row = clear_pivots(row)
        if not row:
            continue
        if len(row) > pool_cap:
            pool.append(row)
            continue
        lead = min(row)
        inv = pow(row[lead], -1, p)
        pivot_map[lead] = {c: (v * inv) % p for c, v in row.items()}

    rank_a = len(pivot_map)
    if not pool:
        return rank_a

    # phase B: re-clear pooled rows, then dense echelon over free columns
    is_pivot = np.zeros(ncols, dtype=bool)
    is_pivot[list(pivot_map)] = True
    free_cols = np.nonzero(~is_pivot)[0]
    dense = _DensePool(len(free_cols), p)
    remap = np.full(ncols, -1, dtype=np.int64)
    remap[free_cols] = np.arange(len(free_cols))

    cleared: list[tuple[np.ndarray, np.ndarray]] = []
    for row in pool:
        row = clear_pivots(row)
        if row:
            cols = np.array(sorted(row), dtype=np.int64)
            cleared.append((cols, np.array([row[int(c)] for c in cols], dtype=np.int64)))
    del pool

    rng = np.random.default_rng(seed ^ p)
    idx = 0
    stale_blocks = 0
    n_cleared = len(cleared)
    while idx < n_cleared:
        chunk = cleared[idx:idx + _BLOCK_ROWS]
        idx += _BLOCK_ROWS
        block = np.zeros((len(chunk), dense.width), dtype=np.int64)
        for i, (cols, vals) in enumerate(chunk):
            block[i, remap[cols]] = vals
        added = dense.absorb(block)
        stale_blocks = stale_blocks + 1 if added == 0 else 0
        if stale_blocks >= 3 and n_cleared - idx > 4 * _BLOCK_ROWS:
            # the tail is very likely redundant: certify with random sketches
            tail = cleared[idx:]
            ok = True
            for _ in range(_SKETCH_ROUNDS):
                sk = np.zeros((_SKETCH_WIDTH, dense.width), dtype=np.int64)
                coef = rng.integers(1, p, size=(len(tail), _SKETCH_WIDTH), dtype=np.int64)
                for i, (cols, vals) in enumerate(tail):
                    t = remap[cols]
                    sk[:, t] = (sk[:, t] + coef[i][:, None] * vals[None, :]) % p
                if dense.absorb(sk) != 0:
                    ok = False
                    break
            if ok:
                break
            stale_blocks = 0
    return rank_a + len(dense.pivot_rows)


def dense_rank(A: np.ndarray, p: int) -> int:
    """Rank mod p of a dense int64 matrix (entries reduced mod p)."""
    m, n = A.shape
    if m == 0 or n == 0:
        return 0
    pool = _DensePool(n, p)
    for i0 in range(0, m, _BLOCK_ROWS):
        pool.absorb(A[i0:i0 + _BLOCK_ROWS])
    return len(pool.pivot_rows)


def num_threads() -> int:
    """Worker count for internal parallelism (SPENCERDEF_THREADS env var)."""
    try:
        configured = int(os.environ.get("SPENCERDEF_THREADS", "0"))
    except ValueError:
        configured = 0
    return configured if configured > 0 else (os.cpu_count() or 1)
