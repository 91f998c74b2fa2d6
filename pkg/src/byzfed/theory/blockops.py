# byzfed/theory/blockops.py
"""
Block Kronecker products and block vectorization.

Matrices here are partitioned into an n x n grid of D x D blocks. bvec
stacks vec(block) column-major over the grid, so block (i, l) (block row i,
block column l) starts at (l * n + i) * D^2 and its entries follow vec
order, col * D + row. With this layout

    bvec(A S B^T) = (B ⊗_b A) bvec(S)

where (A ⊗_b B) has block (i*n + l, j*n + m) equal to A_ij ⊗ B_lm.
"""

import math

import numpy as np
from scipy import sparse


def _grid(side: int, block_size: int) -> int:
    if block_size < 1 or side % block_size != 0:
        raise ValueError(f"side {side} is not a multiple of the block size {block_size}")
    return side // block_size


def block_kron(a, b, block_size: int):
    """
    The block Kronecker product of two equally partitioned square matrices.
    Dense inputs give a dense result; if either input is sparse the result
    is a CSR matrix.
    """
    if a.shape != b.shape or a.shape[0] != a.shape[1]:
        raise ValueError(f"block_kron needs equal square matrices, got {a.shape} and {b.shape}")
    n = _grid(a.shape[0], block_size)
    d = block_size
    side = n * n * d * d

    if not (sparse.issparse(a) or sparse.issparse(b)):
        a4 = np.asarray(a).reshape(n, d, n, d)
        b4 = np.asarray(b).reshape(n, d, n, d)
        return np.einsum("iajc,lbme->ilabjmce", a4, b4).reshape(side, side)

    a_coo = sparse.coo_matrix(a)
    b_coo = sparse.coo_matrix(b)
    ai, ar = np.divmod(a_coo.row, d)
    aj, ac = np.divmod(a_coo.col, d)
    bl, br = np.divmod(b_coo.row, d)
    bm, bc = np.divmod(b_coo.col, d)
    rows = ((ai[:, None] * n + bl[None, :]) * d + ar[:, None]) * d + br[None, :]
    cols = ((aj[:, None] * n + bm[None, :]) * d + ac[:, None]) * d + bc[None, :]
    data = a_coo.data[:, None] * b_coo.data[None, :]
    return sparse.coo_matrix(
        (data.ravel(), (rows.ravel(), cols.ravel())), shape=(side, side)
    ).tocsr()


def bvec(matrix: np.ndarray, block_size: int) -> np.ndarray:
    matrix = np.asarray(matrix)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise ValueError(f"bvec needs a square matrix, got shape {matrix.shape}")
    n = _grid(matrix.shape[0], block_size)
    d = block_size
    return matrix.reshape(n, d, n, d).transpose(2, 0, 3, 1).reshape(-1)


def unbvec(vector: np.ndarray, block_size: int) -> np.ndarray:
    vector = np.asarray(vector)
    d = block_size
    n = math.isqrt(vector.shape[0] // (d * d)) if d > 0 else 0
    if d < 1 or n * n * d * d != vector.shape[0]:
        raise ValueError(
            f"vector of length {vector.shape[0]} is not the bvec of a grid of {block_size}x{block_size} blocks"
        )
    return vector.reshape(n, n, d, d).transpose(1, 3, 0, 2).reshape(n * d, n * d)


def block_diagonal_bvec(diagonals: np.ndarray) -> np.ndarray:
    """
    bvec of bdiag{diag(d_0), ..., diag(d_{n-1})}, given the (n, D) array of
    block diagonals.
    """
    diagonals = np.asarray(diagonals, dtype=np.float64)
    n, d = diagonals.shape
    out = np.zeros(n * n * d * d)
    blocks = np.arange(n)
    entries = np.arange(d)
    index = ((blocks * n + blocks)[:, None] * d + entries[None, :]) * d + entries[None, :]
    out[index.ravel()] = diagonals.ravel()
    return out


__all__ = [
    "block_diagonal_bvec",
    "block_kron",
    "bvec",
    "unbvec",
]
