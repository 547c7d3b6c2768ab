"""Coherent states of the lowering generators and their overlap series.

The state attached to a label z in C^N is

    |z> = sum_n C_n z_1^{n_1} ... z_N^{n_N} |n>,
    C_n = sqrt( Gamma(K) / (n_1! ... n_N! Gamma(K + |n|)) ),

normalized so the degree-zero amplitude is 1 (the states themselves are
not unit vectors).  Each component of the label is an eigenvalue:
E_{N+1,a} |z> = z_a |z>.  The coefficients also satisfy the one-step
relation

    C_{n + e_a} sqrt(n_a + 1) sqrt(K + |n|) = C_n,

which is exercised against the closed form in the tests.

Overlaps reduce to the entire series

    F_N(K; w) = sum_n Gamma(K) / (prod n_a! Gamma(K + |n|)) prod w_a^{n_a},
    <z|z'>    = F_N(K; (conj(z_a) z'_a)).

Summing one total-degree shell at a time, the multinomial theorem
collapses each shell exactly:

    sum_{|n|=d} prod w^n / prod n! = (w_1 + ... + w_N)^d / d!,

so F_N(K; w) is the one-variable confluent limit series evaluated at
s = sum(w), and each shell is a single term Gamma(K) s^d / (d! Gamma(K+d)).
For N = 1 this gives F_1(K; x) = Gamma(K) x^((1-K)/2) I_{K-1}(2 sqrt x).
"""

from __future__ import annotations

import math

import numpy as np

from . import fock
from .specfun import ConvergenceError, log_gamma

SHELL_TOL = 1e-14
MAX_SHELLS = 500


def coefficient(n, k):
    """Closed-form amplitude C_n for multi-index n and representation label k."""
    k = float(k)
    if k <= 0.0:
        raise ValueError(f"need k > 0, got {k}")
    n = tuple(int(v) for v in n)
    if any(v < 0 for v in n):
        raise ValueError(f"multi-index must be nonnegative, got {n}")
    total = sum(n)
    log_c2 = log_gamma(k) - log_gamma(k + total) - sum(log_gamma(v + 1.0) for v in n)
    return math.exp(0.5 * log_c2)


def coefficients_by_recursion(space):
    """All amplitudes on a truncated space built by repeated application of
    the one-step relation, starting from C_0 = 1.  Dual route to
    ``coefficient`` for testing; production code uses the closed form."""
    k = space.k
    coeffs = np.zeros(space.dim)
    coeffs[0] = 1.0
    for i, state in enumerate(space.basis):
        total = sum(state)
        if total == space.cutoff:
            continue
        for a in range(space.n):
            child = list(state)
            child[a] += 1
            j = space.index[tuple(child)]
            coeffs[j] = coeffs[i] / (math.sqrt(state[a] + 1.0) * math.sqrt(k + total))
    return coeffs


def state_vector(z, space):
    """Component vector of |z> on the truncated basis, degree-zero amplitude 1."""
    z = np.asarray(z, dtype=complex)
    if z.shape != (space.n,):
        raise ValueError(f"label must have {space.n} components, got shape {z.shape}")
    if not np.all(np.isfinite(z)):
        raise ValueError("label components must be finite")
    vec = np.empty(space.dim, dtype=complex)
    for i, state in enumerate(space.basis):
        mono = 1.0 + 0.0j
        for za, na in zip(z, state):
            mono *= za**na
        vec[i] = coefficient(state, space.k) * mono
    return vec


def eigen_residual(z, space, alpha):
    """Relative residual of the eigenvalue relation E_{N+1,alpha}|z> = z_alpha|z>
    on the truncated space.

    Restricted to components of degree <= cutoff - 1: the lowering
    generator pulls degree cutoff+1 amplitudes (absent after truncation)
    into the degree-cutoff components, so only the interior can cancel.
    Returns ||(E - z_alpha) v||_interior / ||v||_interior.
    """
    if not (1 <= alpha <= space.n):
        raise ValueError(f"alpha must lie in 1..{space.n}, got {alpha}")
    z = np.asarray(z, dtype=complex)
    v = state_vector(z, space)
    lowering = fock.generator_matrix(space, space.n + 1, alpha)
    resid = lowering @ v - z[alpha - 1] * v
    interior = np.array([space.degree(i) <= space.cutoff - 1 for i in range(space.dim)])
    denom = float(np.linalg.norm(v[interior]))
    return float(np.linalg.norm(resid[interior])) / denom


def f_series(k, w, tol=SHELL_TOL, max_shells=MAX_SHELLS):
    """Value of F_N(K; w) summed by total-degree shells.

    Stops when two consecutive shell contributions fall below `tol`
    relative to the partial sum (two, because a complex argument can make
    a single shell pass near zero).  Raises ConvergenceError at
    `max_shells`.
    """
    k = float(k)
    if k <= 0.0:
        raise ValueError(f"need k > 0, got {k}")
    w = np.asarray(w, dtype=complex).ravel()
    if w.size < 1:
        raise ValueError("need at least one argument component")
    if not np.all(np.isfinite(w)):
        raise ValueError("argument components must be finite")
    s = complex(np.sum(w))
    shell = 1.0 + 0.0j  # degree-0 shell: Gamma(K) s^0 / (0! Gamma(K))
    total = shell
    small = 0
    for d in range(1, max_shells + 1):
        shell *= s / (d * (k + d - 1.0))
        total += shell
        if not (math.isfinite(total.real) and math.isfinite(total.imag)):
            raise OverflowError(f"f_series(k={k}) exceeds double range at shell {d}")
        if abs(shell) <= tol * max(abs(total), 1e-300):
            small += 1
            if small >= 2:
                if np.all(w.imag == 0.0):
                    return total.real
                return total
        else:
            small = 0
    raise ConvergenceError(f"f_series did not converge within {max_shells} shells")


def _f_series_vec(k, s, tol=SHELL_TOL, max_shells=MAX_SHELLS):
    """Vectorized F over an array of (already summed) arguments s.

    Same shell recurrence as f_series, advanced until every lane has had
    two consecutive sub-tolerance shells.  Hot path for the Monte Carlo
    and quadrature trace evaluations.
    """
    s = np.asarray(s, dtype=complex if np.iscomplexobj(s) else float)
    shell = np.ones_like(s)
    total = shell.copy()
    small = np.zeros(s.shape, dtype=int)
    for d in range(1, max_shells + 1):
        shell = shell * s / (d * (k + d - 1.0))
        total = total + shell
        below = np.abs(shell) <= tol * np.maximum(np.abs(total), 1e-300)
        small = np.where(below, small + 1, 0)
        if np.all(small >= 2):
            if not np.all(np.isfinite(total)):
                raise OverflowError("vectorized F series exceeded double range")
            return total
    raise ConvergenceError(f"vectorized F series did not converge within {max_shells} shells")


def inner_product(z, zp, k, tol=SHELL_TOL):
    """Overlap <z|z'> = F_N(K; (conj(z_a) z'_a))."""
    z = np.asarray(z, dtype=complex).ravel()
    zp = np.asarray(zp, dtype=complex).ravel()
    if z.shape != zp.shape:
        raise ValueError(f"label shapes differ: {z.shape} vs {zp.shape}")
    if np.array_equal(z, zp):
        # conj(z) * z through the vectorized complex multiply can keep a
        # stray FMA-contracted imaginary residue; the self-overlap is real
        return f_series(k, z.real**2 + z.imag**2, tol=tol)
    return f_series(k, np.conj(z) * zp, tol=tol)
