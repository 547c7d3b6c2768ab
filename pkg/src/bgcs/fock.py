"""Truncated representation spaces for u(N,1) and sparse generator matrices.

The algebra is realized on N+1 oscillator modes with the last occupation
slaved to the first N: a basis ket is labelled by a multi-index
(n_1, ..., n_N) and carries n_{N+1} = K - 1 + sum(n).  The generators act
as

    E_{ab}      |n> = sqrt(n_b (n_a + 1)) |n + e_a - e_b>      a, b <= N, a != b
    E_{aa}      |n> = n_a |n>
    E_{a,N+1}   |n> = sqrt((n_a + 1)(K + sum n)) |n + e_a>     raising
    E_{N+1,a}   |n> = sqrt(n_a (K - 1 + sum n)) |n - e_a>      lowering
    E_{N+1,N+1} |n> = (K + sum n) |n>

with K any positive real; occupation factorials never appear explicitly,
so no entry requires integer K.  For 0 < K < 1 the lowering coefficient at
total degree zero multiplies sqrt(n_a) = 0 and is simply skipped, so all
matrices stay real.

Truncation keeps multi-indices with total degree <= cutoff.  Raising
generators silently annihilate components that would leave the truncated
space; consistency checks therefore restrict to interior states (degree at
most cutoff - 2 for products of two generators).

Matrices are scipy CSR with one entry per (row, col); a plain-text triplet
dump ("row col re im" per line) is provided for interchange.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations_with_replacement

import numpy as np
import scipy.sparse as sp

SparseOperator = sp.csr_matrix


def _compositions(total, length):
    """All length-tuples of nonnegative ints summing to total, lexicographic."""
    if length == 1:
        yield (total,)
        return
    for cuts in combinations_with_replacement(range(total + 1), length - 1):
        bounds = (0,) + cuts + (total,)
        yield tuple(bounds[i + 1] - bounds[i] for i in range(length))


@dataclass
class TruncatedRepSpace:
    """Degree-truncated carrier space for one (N, K) representation."""

    n: int
    k: float
    cutoff: int
    basis: tuple = field(repr=False, default=())
    index: dict = field(repr=False, default_factory=dict)

    @property
    def dim(self):
        return len(self.basis)

    def degree(self, i):
        return sum(self.basis[i])


def rep_space(n, k, cutoff):
    """Build the truncated space: all multi-indices with total degree <= cutoff,
    ordered by total degree and lexicographically within each degree."""
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise ValueError(f"need integer n >= 1, got {n!r}")
    if not isinstance(cutoff, (int, np.integer)) or cutoff < 0:
        raise ValueError(f"need integer cutoff >= 0, got {cutoff!r}")
    k = float(k)
    if not (k > 0.0 and math.isfinite(k)):
        raise ValueError(f"need representation label k > 0, got {k}")
    basis = []
    for d in range(cutoff + 1):
        basis.extend(sorted(_compositions(d, n)))
    basis = tuple(basis)
    assert len(basis) == math.comb(cutoff + n, n)
    index = {state: i for i, state in enumerate(basis)}
    return TruncatedRepSpace(int(n), k, int(cutoff), basis, index)


def generator_matrix(space, alpha, beta):
    """Matrix of E_{alpha beta} on the truncated space (1-based indices,
    alpha and beta in 1..N+1)."""
    n, k = space.n, space.k
    if not (1 <= alpha <= n + 1 and 1 <= beta <= n + 1):
        raise ValueError(f"generator indices must lie in 1..{n + 1}, got ({alpha}, {beta})")
    rows, cols, vals = [], [], []
    raising = n + 1  # index value meaning the (N+1)-st mode
    for col, state in enumerate(space.basis):
        total = sum(state)
        if alpha == raising and beta == raising:
            rows.append(col)
            cols.append(col)
            vals.append(k + total)
        elif alpha == raising:  # lowering operator E_{N+1, beta}
            nb = state[beta - 1]
            if nb >= 1:
                target = list(state)
                target[beta - 1] -= 1
                rows.append(space.index[tuple(target)])
                cols.append(col)
                vals.append(math.sqrt(nb * (k - 1.0 + total)))
        elif beta == raising:  # raising operator E_{alpha, N+1}
            if total <= space.cutoff - 1:
                target = list(state)
                target[alpha - 1] += 1
                rows.append(space.index[tuple(target)])
                cols.append(col)
                vals.append(math.sqrt((state[alpha - 1] + 1) * (k + total)))
        elif alpha == beta:
            if state[alpha - 1]:
                rows.append(col)
                cols.append(col)
                vals.append(float(state[alpha - 1]))
        else:
            nb = state[beta - 1]
            if nb >= 1:
                target = list(state)
                target[beta - 1] -= 1
                target[alpha - 1] += 1
                rows.append(space.index[tuple(target)])
                cols.append(col)
                vals.append(math.sqrt(nb * (state[alpha - 1] + 1)))
    mat = sp.csr_matrix(
        (np.array(vals, dtype=float), (rows, cols)), shape=(space.dim, space.dim)
    )
    mat.sum_duplicates()
    return mat


def _metric(a, b, n):
    """eta_{ab} = diag(1, ..., 1, -1) on indices 1..N+1."""
    if a != b:
        return 0.0
    return -1.0 if a == n + 1 else 1.0


def commutator_residual(space, first, second):
    """Max-abs deviation of [E_first, E_second] from the structure relation

        [E_{ab}, E_{cd}] = eta_{bc} E_{ad} - eta_{da} E_{cb},

    measured only on interior matrix elements (row and column degree at
    most cutoff - 2), since a product of two generators can reach two
    degrees beyond its argument and truncation corrupts the boundary.
    """
    a, b = first
    c, d = second
    am = generator_matrix(space, a, b)
    bm = generator_matrix(space, c, d)
    resid = (am @ bm - bm @ am).toarray()
    resid -= _metric(b, c, space.n) * generator_matrix(space, a, d).toarray()
    resid += _metric(d, a, space.n) * generator_matrix(space, c, b).toarray()
    interior = np.array([space.degree(i) <= space.cutoff - 2 for i in range(space.dim)])
    if not interior.any():
        raise ValueError(f"cutoff {space.cutoff} leaves no interior states")
    block = resid[np.ix_(interior, interior)]
    return float(np.max(np.abs(block))) if block.size else 0.0


def subsidiary_residual(space):
    """Max-abs deviation of -sum_a E_{aa} + E_{N+1,N+1} from K times the
    identity; exact by construction, kept as a structural check."""
    total = -sum(
        generator_matrix(space, a, a) for a in range(1, space.n + 1)
    ) + generator_matrix(space, space.n + 1, space.n + 1)
    resid = total - space.k * sp.identity(space.dim, format="csr")
    return float(np.max(np.abs(resid.toarray())))


def dump_triplets(op, stream):
    """Write a sparse matrix as 'row col re im' lines (row-major order)."""
    coo = sp.coo_matrix(op)
    order = np.lexsort((coo.col, coo.row))
    for i in order:
        v = complex(coo.data[i])
        stream.write(f"{coo.row[i]} {coo.col[i]} {v.real!r} {v.imag!r}\n")


def load_triplets(stream, shape):
    """Inverse of dump_triplets."""
    rows, cols, vals = [], [], []
    for line in stream:
        line = line.strip()
        if not line:
            continue
        r, c, re, im = line.split()
        rows.append(int(r))
        cols.append(int(c))
        vals.append(float(re) + 1j * float(im))
    data = np.array(vals)
    if np.all(data.imag == 0.0):
        data = data.real
    return sp.csr_matrix((data, (rows, cols)), shape=shape)
