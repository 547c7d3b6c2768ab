"""Quadrature building blocks: Gauss-Legendre tables, tanh-sinh rules, and
a double-exponential transform for half-line integrals.

All routines expect vectorized integrands (numpy array in, array out) and
refine a trapezoid grid by halving until two consecutive passes agree to
the requested tolerance, reusing previously computed nodes.

The half-line transform is x = exp(t - e^{-t}).  Toward t -> -infinity the
node x approaches zero doubly exponentially, so an integrand behaving like
x^(c-1) near the origin contributes exp(-c e^{-t}); toward t -> +infinity
x grows like e^t, so exponential or stretched-exponential decay of the
integrand again gives a doubly exponential tail.  The trapezoid rule is
then accurate to machine precision on a modest uniform t grid.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from numpy.polynomial.legendre import leggauss

from .specfun import ConvergenceError

_REFINE_LEVELS = 8
_LOG_FLOOR = -690.0  # keep exp() comfortably inside double range


@lru_cache(maxsize=8)
def gauss_legendre_01(n=64):
    """Gauss-Legendre nodes and weights mapped from (-1, 1) to (0, 1)."""
    x, w = leggauss(n)
    return 0.5 * (x + 1.0), 0.5 * w


def _refine_trapezoid(g, lo, hi, tol, n0=128):
    """Trapezoid value of a vectorized g on [lo, hi], refined by halving.

    Endpoint values are assumed negligible (the callers build windows on
    which the integrand has already dropped by ~e^-45 from its peak).
    """
    h = (hi - lo) / n0
    t = lo + h * np.arange(n0 + 1)
    vals = g(t)
    total = h * (np.sum(vals) - 0.5 * (vals[0] + vals[-1]))
    evals = t.size
    converged = 0
    for _ in range(_REFINE_LEVELS):
        mid = np.arange(lo + 0.5 * h, hi, h)
        new_total = 0.5 * total + 0.5 * h * np.sum(g(mid))
        evals += mid.size
        h *= 0.5
        change = abs(new_total - total)
        total = new_total
        if change <= tol * max(abs(total), 1e-300):
            converged += 1
        else:
            converged = 0
        if converged >= 2:
            return total, change, evals
    raise ConvergenceError(
        f"trapezoid refinement stalled on [{lo}, {hi}] (last change {change:.3e})"
    )


def tanh_sinh(f, a, b, tol=1e-12, singular_strength=1.0):
    """Integrate f over the finite interval (a, b) by tanh-sinh quadrature.

    Endpoint singularities integrable as (x-a)^(s-1) with s >=
    `singular_strength` are handled; f is never evaluated at a or b.
    """
    if not b > a:
        raise ValueError(f"need b > a, got a={a}, b={b}")
    s = max(min(singular_strength, 1.0), 0.05)
    # sigma(t) = 1/(1 + exp(-pi sinh t)) maps R -> (0,1); the endpoint gap
    # is ~exp(-pi sinh t), so the window must reach pi sinh(T) ~ 55/s.
    T = math.asinh(55.0 / (math.pi * s))
    width = b - a

    def g(t):
        u = math.pi * np.sinh(t)
        sig = 1.0 / (1.0 + np.exp(-u))
        one_minus_sig = 1.0 / (1.0 + np.exp(u))
        x = a + width * sig
        # d sigma/dt = pi cosh(t) sigma (1 - sigma)
        jac = width * math.pi * np.cosh(t) * sig * one_minus_sig
        return f(x) * jac

    value, err, _ = _refine_trapezoid(g, -T, T, tol, n0=64)
    return value, err


def power_integral_01(p, q, tol=1e-12, n_gl=64):
    """Numerical value of int_0^1 x^p (1-x)^q dx for p, q > -1.

    Nonnegative integer exponents make the integrand a polynomial, which
    the 64-node Gauss-Legendre rule integrates exactly.  Fractional
    exponents have algebraic endpoint behavior where Gauss-Legendre only
    converges polynomially, so those fall through to tanh-sinh on a grid
    that never touches the endpoints.
    """
    if p <= -1.0 or q <= -1.0:
        raise ValueError(f"exponents must exceed -1, got p={p}, q={q}")
    integer_p = float(p).is_integer() and p >= 0
    integer_q = float(q).is_integer() and q >= 0
    if integer_p and integer_q and p + q < 2 * n_gl:
        x, w = gauss_legendre_01(n_gl)
        return float(np.sum(w * x**p * (1.0 - x) ** q))

    T = math.asinh(55.0 / (math.pi * min(p + 1.0, q + 1.0, 1.0)))

    def g(t):
        u = math.pi * np.sinh(t)
        sig = 1.0 / (1.0 + np.exp(-u))
        omsig = 1.0 / (1.0 + np.exp(u))
        log_vals = p * np.log(sig) + q * np.log(omsig)
        jac = math.pi * np.cosh(t) * sig * omsig
        out = np.zeros_like(t)
        ok = log_vals > _LOG_FLOOR
        out[ok] = np.exp(log_vals[ok]) * jac[ok]
        return out

    value, _, _ = _refine_trapezoid(g, -T, T, tol, n0=64)
    return float(value)


def _solve_tail(decay_kind, b, growth, target):
    """Smallest x beyond which b*decay(x) - growth*log(x) exceeds target."""
    if decay_kind == "sqrt":
        u = target / b  # iterate sqrt(x) = (target + growth*log x)/b
        for _ in range(60):
            u = max((target + 2.0 * growth * math.log(max(u, 1.0))) / b, 1.0)
        return u * u
    if decay_kind == "lin":
        x = target / b
        for _ in range(60):
            x = max((target + growth * math.log(max(x, 1.0))) / b, 1.0)
        return x
    raise ValueError(f"unknown decay kind {decay_kind!r}")


def de_halfline(f, c_eff, decay, tol=1e-12, growth=0.0):
    """Integrate f over (0, oo) with the substitution x = exp(t - e^{-t}).

    Parameters
    ----------
    f : callable
        Vectorized integrand; never called where x would underflow.
    c_eff : float
        f behaves like x^(c_eff - 1) toward 0 (c_eff > 0); sizes the left
        end of the t window.
    decay : tuple
        ("sqrt", b) for tails like exp(-b sqrt(x)), ("lin", b) for
        exp(-b x); sizes the right end of the window.
    growth : float
        Power-law factor x^growth multiplying the decaying tail, if any.

    Returns (value, error_estimate).
    """
    if c_eff <= 0.05:
        raise ValueError(f"c_eff must exceed 0.05, got {c_eff}")
    kind, b = decay
    if b <= 0.0:
        raise ValueError(f"decay rate must be positive, got {b}")
    t_lo = min(-math.log(60.0 / c_eff), -1.5)
    x_big = _solve_tail(kind, b, growth, 60.0)
    t_hi = math.log(x_big) + 1.0

    def g(t):
        log_x = t - np.exp(-t)
        x = np.exp(np.maximum(log_x, _LOG_FLOOR))
        out = np.zeros_like(t)
        ok = log_x > _LOG_FLOOR
        if np.any(ok):
            out[ok] = f(x[ok]) * x[ok] * (1.0 + np.exp(-t[ok]))
        return out

    value, err, _ = _refine_trapezoid(g, t_lo, t_hi, tol, n0=128)
    return value, err
