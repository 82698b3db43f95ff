"""Scalar kernels of the two linear criteria.

Units: hbar = 2m = 1, dispersion xi(p) = p^2 - mu.  All kernels are even in
p and q separately, and every function here accepts scalars or numpy arrays
(broadcasting) and returns a matching scalar/array.

The three operator kernels, written with a = (p+q)^2 - mu and
b = (p-q)^2 - mu:

  k_t(p)    = chi(p^2 - mu)                        chi(x) = x / tanh(x/(2T))
  n_t(p,q)  = 2 / (chi(a) + chi(b))
  b_t(p,q)  = [tanh(a/(2T)) + tanh(b/(2T))] / (a + b)
  m_bound   = 2 / (|a| + |b|)                      temperature independent

with the pointwise ordering 0 < b_t <= n_t <= min(1/(2T), m_bound) and the
zero-momentum reduction n_t(p,0) = b_t(p,0) = 1/k_t(p).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError

# Relative scale |x/(2T)| below which chi switches to its Taylor branch.
SERIES_CROSSOVER = 1e-6

# Cap applied when inverting b_t in near-underflow corners (diagonal entries
# of criterion-form matrices): large enough to decouple the mode, small
# enough that LAPACK never overflows while squaring.
INV_KERNEL_CAP = 1e30


@dataclass(frozen=True)
class PhysParams:
    """Physical state for kernel evaluation: chemical potential, temperature,
    dimension.  temp must be strictly positive; dim in {1, 2, 3}."""

    mu: float
    temp: float
    dim: int = 1

    def __post_init__(self):
        if not np.isfinite(self.mu):
            raise DomainError(f"mu must be finite, got {self.mu}")
        if not (np.isfinite(self.temp) and self.temp > 0.0):
            raise DomainError(f"temp must be finite and > 0, got {self.temp}")
        if self.dim not in (1, 2, 3):
            raise DomainError(f"dim must be 1, 2 or 3, got {self.dim}")


def _as_float_array(x, name):
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} must be finite")
    return arr


def _ret(out, *inputs):
    # Return a python float when every input was scalar.
    if all(np.ndim(v) == 0 for v in inputs):
        return float(out)
    return out


def chi_ratio(x, temp):
    """x / tanh(x/(2*temp)), with the even removable singularity at x=0.

    For |x/(2T)| < SERIES_CROSSOVER uses the Taylor branch
    2T*(1 + (x/(2T))^2/3); the two branches agree to ~1e-13 relative at the
    crossover.  chi >= 2T with equality only at x=0, and chi is even in x
    and increasing in T.
    """
    xa = _as_float_array(x, "x")
    if not (np.isfinite(temp) and temp > 0.0):
        raise DomainError(f"temp must be finite and > 0, got {temp}")
    u = xa / (2.0 * temp)
    small = np.abs(u) < SERIES_CROSSOVER
    with np.errstate(divide="ignore", invalid="ignore"):
        direct = xa / np.tanh(np.where(small, 1.0, u))
    series = 2.0 * temp * (1.0 + u * u / 3.0)
    return _ret(np.where(small, series, direct), x)


def k_t(p, params: PhysParams):
    """Diagonal (zero total momentum) kernel chi(p^2 - mu).

    Minimum over p is 2T, attained on the Fermi sphere p^2 = mu.
    """
    pa = _as_float_array(p, "p")
    return _ret(chi_ratio(pa * pa - params.mu, params.temp), p)


def inv_n_t(p, q, params: PhysParams):
    """(chi(a) + chi(b)) / 2: the exact reciprocal of n_t, overflow free."""
    pa = _as_float_array(p, "p")
    qa = _as_float_array(q, "q")
    a = (pa + qa) ** 2 - params.mu
    b = (pa - qa) ** 2 - params.mu
    out = 0.5 * (chi_ratio(a, params.temp) + chi_ratio(b, params.temp))
    return _ret(out, p, q)


def n_t(p, q, params: PhysParams):
    """Finite-momentum kernel 2/(chi(a) + chi(b)).

    Strictly positive, bounded by min(1/(2T), m_bound(p,q)), strictly
    decreasing in T pointwise, even in p and q and symmetric in (p, q).
    """
    out = 1.0 / inv_n_t(p, q, params)
    return _ret(out, p, q)


def b_t(p, q, params: PhysParams):
    """Half-sum-of-tanh kernel [tanh(a/2T) + tanh(b/2T)] / (a + b).

    The singularity of the denominator at p^2 + q^2 = mu is removable; the
    implementation uses the equivalent form

        b_t = sinh(x) / (x * T * (cosh x + cosh y)),
        x = (p^2 + q^2 - mu)/T,  y = 2 p q / T,

    evaluated with all exponentials rescaled by exp(-max(|x|,|y|)) so nothing
    overflows, and a Taylor branch for sinh(x)/x when |x| is tiny.  Always
    in (0, n_t].
    """
    pa = _as_float_array(p, "p")
    qa = _as_float_array(q, "q")
    temp = params.temp
    c = pa * pa + qa * qa - params.mu
    x = c / temp
    y = 2.0 * pa * qa / temp
    m = np.maximum(np.abs(x), np.abs(y))
    ex = np.exp(x - m)
    emx = np.exp(-x - m)
    den = ex + emx + np.exp(y - m) + np.exp(-y - m)
    num = ex - emx  # 2*sinh(x)*exp(-m)
    small = np.abs(x) < SERIES_CROSSOVER
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(
            small,
            2.0 * np.exp(-m) * (1.0 + x * x / 6.0),
            num / np.where(small, 1.0, x),
        )
    out = ratio / (temp * den)
    return _ret(out, p, q)


def inv_b_t(p, q, params: PhysParams):
    """1 / b_t with a finite cap where b_t underflows.

    b_t only underflows in far corners (|2pq| >> T with p^2+q^2 ~ mu is
    impossible for real p, q; the cap triggers only for extreme arguments),
    and capped modes sit so high that bottom-of-spectrum results are
    unaffected.
    """
    v = b_t(p, q, params)
    va = np.asarray(v, dtype=float)
    cap = INV_KERNEL_CAP * max(1.0, 2.0 * params.temp)
    with np.errstate(divide="ignore", over="ignore"):
        out = np.where(va > 1.0 / cap, 1.0 / np.where(va > 0, va, 1.0), cap)
    return _ret(out, p, q)


def m_bound(p, q, mu):
    """Temperature-free majorant 2/(|a| + |b|).

    Dominates n_t for every T and satisfies m_bound <= 1/|p^2 + q^2 - mu|.
    On the pole set {(p-q)^2 = (p+q)^2 = mu} (i.e. pq = 0, p^2 + q^2 = mu)
    the value is +inf; that sentinel is returned, never raised.
    """
    pa = _as_float_array(p, "p")
    qa = _as_float_array(q, "q")
    if not np.isfinite(mu):
        raise DomainError(f"mu must be finite, got {mu}")
    a = np.abs((pa + qa) ** 2 - mu)
    b = np.abs((pa - qa) ** 2 - mu)
    s = a + b
    with np.errstate(divide="ignore"):
        out = np.where(s > 0.0, 2.0 / np.where(s > 0.0, s, 1.0), np.inf)
    return _ret(out, p, q)


def f_strong(x):
    """x / tanh(x/2): the T=1 diagonal profile, f(0) = 2.

    Satisfies f(x) >= max(2, |x|); note f(x) < 2*x for all x > 2*artanh(1/2),
    so no bound of the form f >= 2*max(1, x) holds.
    """
    xa = _as_float_array(x, "x")
    return _ret(chi_ratio(xa, 1.0), x)


def f_strong_prime(x):
    """Derivative of f_strong: 1/tanh(x/2) - (x/2)/sinh(x/2)^2.

    Odd, strictly increasing, |f'| < 1, f'(x) -> sign(x) at infinity.
    Uses the odd Taylor branch x/3 - x^3/90 + x^5/2520 near zero (the direct
    form loses ~1/x^2 digits to cancellation there) and drops the
    exponentially small sinh^-2 term once it would underflow.
    """
    xa = _as_float_array(x, "x")
    t = 0.5 * xa
    small = np.abs(xa) < 0.05
    # beyond |t| ~ 350 sinh(t)^2 overflows and coth(|t|) == 1 to the last ulp
    huge = np.abs(t) > 350.0
    safe_t = np.where(small | huge, 1.0, t)
    with np.errstate(divide="ignore", invalid="ignore"):
        mid = 1.0 / np.tanh(safe_t) - safe_t / np.sinh(safe_t) ** 2
    x2 = xa * xa
    series = xa * (1.0 / 3.0 - x2 / 90.0 + x2 * x2 / 2520.0)
    out = np.where(small, series, np.where(huge, np.sign(xa), mid))
    return _ret(out, x)
