"""Critical-temperature solvers, coupling sweeps, and slope fits.

Three temperatures are solved for, all as roots of ``criterion(T) = 1/lam``
where the criterion is the top symmetric-sector Birman-Schwinger eigenvalue
and is monotone decreasing in ``T``:

* ``Tc0``  - zero-total-momentum kernel (``K``), the translation-invariant
  critical temperature;
* ``Tl``   - kernel ``B`` maximized over total momentum (below ``Tl`` the
  superconductivity criterion is met at some momentum);
* ``Tu``   - kernel ``N`` maximized over total momentum (above ``Tu`` the
  normal state is certified).

The root solve runs in ``x = ln T`` where the criterion is close to linear:
a bracket is established first (expanding by decades within
``[1e-9 mu, 1e3 mu]``), then Brent's method shrinks it; the bracket
property holds at every iteration and the final interval is below the
relative tolerance.  Criterion values do not depend on the coupling, so a
sweep over couplings shares one evaluation cache across all of its solves.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.optimize

from .bs_spectra import (
    DEFAULT_BASE_NODES,
    DEFAULT_GOLDEN_ITERATIONS,
    DEFAULT_OCTAVE_NODES,
    DEFAULT_SCAN_POINTS,
    BSOperatorSpec,
    MomentumGrid,
    bottom_eigenvalue,
    build_bs_matrix,
    default_p_max,
    sup_over_q,
    top_eigenvalue,
)
from .errors import AccuracyError, DomainError, FitError, NoBracketError, PreconditionError
from .interactions import InteractionModel, sphere_operator_spectrum, v_hat
from .kernels import PhysParams, inv_b_t, inv_n_t, k_t
from .quadrature import fermi_breakpoints, panel_integrate

__all__ = [
    "SolveSpec",
    "TcResult",
    "SweepRecord",
    "SlopeFit",
    "SweepResult",
    "ChainReport",
    "solve_Tc0",
    "solve_Tl",
    "solve_Tu",
    "delta_rank_one_tc0",
    "weak_coupling_sweep",
    "chain_bottom_eigs",
]

_SQRT_2PI = math.sqrt(2.0 * math.pi)
TARGETS = ("Tc0", "Tl", "Tu")
_KERNEL_FOR = {"Tl": "B", "Tu": "N"}
BRACKET_FLOOR_FACTOR = 1e-9
BRACKET_CAP_FACTOR = 1e3


# ---------------------------------------------------------------------------
# specs and results
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SolveSpec:
    """One root-solve request: coupling, interaction, physics, tolerances."""

    lam: float
    interaction: InteractionModel
    mu: float
    target: str = None
    dim: int = 1
    rel_tol: float = 1e-6
    bracket: tuple = None
    base_nodes: int = DEFAULT_BASE_NODES
    octave_nodes: int = DEFAULT_OCTAVE_NODES
    scan_points: int = DEFAULT_SCAN_POINTS
    golden_iterations: int = DEFAULT_GOLDEN_ITERATIONS
    q_max: float = None
    p_max: float = None

    def __post_init__(self):
        lam = float(self.lam)
        if not np.isfinite(lam) or lam <= 0.0:
            raise DomainError("coupling lam must be finite and > 0")
        object.__setattr__(self, "lam", lam)
        mu = float(self.mu)
        if not np.isfinite(mu) or mu <= 0.0:
            raise PreconditionError("solvers require mu > 0 (a Fermi surface)")
        object.__setattr__(self, "mu", mu)
        if self.target is not None and self.target not in TARGETS:
            raise PreconditionError(f"target must be one of {TARGETS}, got {self.target!r}")
        d = int(self.dim)
        if d not in (1, 2, 3):
            raise PreconditionError("dim must be 1, 2 or 3")
        object.__setattr__(self, "dim", d)
        rel = float(self.rel_tol)
        if not (0.0 < rel < 0.1):
            raise PreconditionError("rel_tol must lie in (0, 0.1)")
        object.__setattr__(self, "rel_tol", rel)
        if self.bracket is not None:
            lo, hi = (float(self.bracket[0]), float(self.bracket[1]))
            if not (np.isfinite(lo) and np.isfinite(hi) and 0.0 < lo < hi):
                raise PreconditionError("bracket must satisfy 0 < T_lo < T_hi")
            object.__setattr__(self, "bracket", (lo, hi))


@dataclass(frozen=True)
class TcResult:
    temp: float
    target: str
    iterations: int
    q_star_at_solution: float
    residual: float
    slope_ln: float
    warnings: tuple = ()


@dataclass(frozen=True)
class SweepRecord:
    lam: float
    temp: float
    ln_ratio: float
    q_star: float


@dataclass(frozen=True)
class SlopeFit:
    slope: float
    intercept: float
    stderr: float
    r_squared: float
    predicted: float
    heuristic: bool
    n_used: int
    target: str


@dataclass(frozen=True)
class SweepResult:
    records: tuple
    fit: SlopeFit
    skipped: tuple = ()


# ---------------------------------------------------------------------------
# criterion evaluation
# ---------------------------------------------------------------------------


def _criterion(target, temp, spec: SolveSpec):
    """(top eigenvalue, maximizing q, boundary flag) at temperature ``temp``."""
    params = PhysParams(mu=spec.mu, temp=temp)
    if target == "Tc0":
        grid = MomentumGrid.build(
            spec.mu, 0.0, temp,
            p_max=spec.p_max, base_nodes=spec.base_nodes, octave_nodes=spec.octave_nodes,
        )
        op = BSOperatorSpec(
            kernel="K", q=0.0, sector="symmetric", params=params,
            interaction=spec.interaction, grid=grid, dim=spec.dim,
        )
        return top_eigenvalue(build_bs_matrix(op)), 0.0, False
    res = sup_over_q(
        _KERNEL_FOR[target], params, spec.interaction,
        sector="symmetric", q_max=spec.q_max,
        scan_points=spec.scan_points, golden_iterations=spec.golden_iterations,
        base_nodes=spec.base_nodes, octave_nodes=spec.octave_nodes, p_max=spec.p_max,
    )
    return res.value, res.q_star, res.boundary_hit


def _log_root(crit, target_val, x_lo, x_hi, lo_floor, hi_cap, rel_tol):
    """Bracketed root of ``crit(x) = target_val`` for a decreasing ``crit``.

    Expands the bracket by factors of 10 within ``[lo_floor, hi_cap]`` until
    ``crit(x_lo) >= target_val >= crit(x_hi)``, then runs Brent's method in
    ``x``.  Returns the root; all evaluations go through ``crit`` so callers
    can cache and audit them.
    """
    step = math.log(10.0)
    while crit(x_lo) < target_val:
        if x_lo <= lo_floor + 1e-12:
            raise NoBracketError(
                f"criterion {crit(x_lo):.6g} at the bracket floor T = {math.exp(x_lo):.3e} "
                f"is still below the coupling threshold {target_val:.6g}"
            )
        x_lo = max(lo_floor, x_lo - step)
    while crit(x_hi) > target_val:
        if x_hi >= hi_cap - 1e-12:
            raise NoBracketError(
                f"criterion {crit(x_hi):.6g} at the bracket cap T = {math.exp(x_hi):.3e} "
                f"is still above the coupling threshold {target_val:.6g}"
            )
        x_hi = min(hi_cap, x_hi + step)
    if x_lo >= x_hi:
        raise NoBracketError("degenerate bracket after expansion")
    return scipy.optimize.brentq(
        lambda x: crit(x) - target_val, x_lo, x_hi,
        xtol=0.5 * rel_tol, maxiter=200, disp=True,
    )


def _solve(spec: SolveSpec, target, cache=None):
    if spec.target is not None and spec.target != target:
        raise PreconditionError(f"spec.target={spec.target!r} does not match solver {target!r}")
    if target in ("Tl", "Tu") and spec.dim != 1:
        raise PreconditionError("Tl/Tu solves support dim=1 only (q-dependent kernels)")
    if cache is None:
        cache = {}
    misses = [0]
    seen = {}

    def crit(x):
        if x not in cache:
            cache[x] = _criterion(target, math.exp(x), spec)
            misses[0] += 1
        seen[x] = cache[x]
        return cache[x][0]

    mu = spec.mu
    t_lo, t_hi = spec.bracket if spec.bracket is not None else (1e-4 * mu, 0.3 * mu)
    lo_floor = math.log(BRACKET_FLOOR_FACTOR * mu)
    hi_cap = math.log(BRACKET_CAP_FACTOR * mu)
    x_lo = min(max(math.log(t_lo), lo_floor), hi_cap)
    x_hi = min(max(math.log(t_hi), lo_floor), hi_cap)

    root = _log_root(crit, 1.0 / spec.lam, x_lo, x_hi, lo_floor, hi_cap, spec.rel_tol)

    xs = sorted(seen)
    vals = [seen[x][0] for x in xs]
    tol_mono = 1e-9 * max(1.0, max(abs(v) for v in vals))
    for a, b in zip(vals[:-1], vals[1:]):
        if b - a > tol_mono:
            raise AccuracyError(
                "criterion failed the monotone-decrease audit across sampled temperatures",
                estimate=b - a, error_bound=tol_mono,
            )

    x_near = min(xs, key=lambda x: abs(x - root))
    value_near, q_near, _ = seen[x_near]
    slope = 0.0
    below = [x for x in xs if x <= root]
    above = [x for x in xs if x > root]
    if below and above:
        x0, x1 = below[-1], above[0]
        if x1 > x0:
            slope = (seen[x1][0] - seen[x0][0]) / (x1 - x0)
    warnings = ()
    if any(seen[x][2] for x in xs):
        warnings = ("q-scan maximizer touched the q_max boundary during the solve",)
    return TcResult(
        temp=math.exp(root),
        target=target,
        iterations=misses[0],
        q_star_at_solution=float(q_near),
        residual=abs(value_near - 1.0 / spec.lam),
        slope_ln=float(slope),
        warnings=warnings,
    )


def solve_Tc0(spec: SolveSpec, cache=None) -> TcResult:
    """Temperature at which the q = 0 criterion crosses 1/lam."""
    return _solve(spec, "Tc0", cache=cache)


def solve_Tl(spec: SolveSpec, cache=None) -> TcResult:
    """Lower critical temperature: kernel B maximized over total momentum."""
    return _solve(spec, "Tl", cache=cache)


def solve_Tu(spec: SolveSpec, cache=None) -> TcResult:
    """Upper critical temperature: kernel N maximized over total momentum."""
    return _solve(spec, "Tu", cache=cache)


# ---------------------------------------------------------------------------
# delta-interaction rank-one shortcut
# ---------------------------------------------------------------------------


def delta_rank_one_tc0(lam, strength=1.0, mu=1.0, rel_tol=1e-8, p_max=None):
    """Closed rank-one criterion for the 1d contact interaction.

    The contact interaction makes the Birman-Schwinger operator rank one, so
    the matrix criterion collapses to ``(lam * strength / (2 pi)) *
    integral of 1/K_T over [-p_max, p_max] = 1``.  The integral uses the
    same momentum window as the matrix discretization so the two solvers
    target the same (cutoff) operator; the root is found exactly like the
    matrix solve, in ``x = ln T``.
    """
    lam = float(lam)
    strength = float(strength)
    mu = float(mu)
    if not np.isfinite(lam) or lam <= 0.0:
        raise DomainError("coupling lam must be finite and > 0")
    if strength <= 0.0:
        raise PreconditionError("the rank-one criterion needs an attractive contact strength")
    if mu <= 0.0:
        raise PreconditionError("rank-one shortcut requires mu > 0")
    if p_max is None:
        p_max = default_p_max(mu)

    def crit(x):
        params = PhysParams(mu=mu, temp=math.exp(x))
        bps = fermi_breakpoints(mu, 0.0, 0.0, p_max, params.temp)
        half = panel_integrate(lambda p: 1.0 / k_t(p, params), bps).value
        return strength * half / math.pi

    lo_floor = math.log(BRACKET_FLOOR_FACTOR * mu)
    hi_cap = math.log(BRACKET_CAP_FACTOR * mu)
    root = _log_root(
        crit, 1.0 / lam,
        math.log(1e-4 * mu), math.log(0.3 * mu), lo_floor, hi_cap, rel_tol,
    )
    return math.exp(root)


# ---------------------------------------------------------------------------
# coupling sweeps and slope fits
# ---------------------------------------------------------------------------


def _fit_slope(records, target, interaction, mu, dim):
    n = len(records)
    n_fit = min(n, max(4, (n + 1) // 2))
    tail = sorted(records, key=lambda r: r.lam, reverse=True)[n - n_fit:]
    x = np.array([1.0 / r.lam for r in tail])
    y = np.array([r.ln_ratio for r in tail])
    if np.ptp(x) <= 0.0:
        raise FitError("degenerate coupling values: cannot fit a slope")
    xm = x - x.mean()
    slope = float(np.dot(xm, y) / np.dot(xm, xm))
    intercept = float(y.mean() - slope * x.mean())
    resid = y - (slope * x + intercept)
    dof = max(1, x.size - 2)
    stderr = float(math.sqrt(np.dot(resid, resid) / dof / np.dot(xm, xm)))
    ss_tot = float(np.dot(y - y.mean(), y - y.mean()))
    r_squared = 1.0 - float(np.dot(resid, resid)) / ss_tot if ss_tot > 0.0 else 1.0

    spectrum = sphere_operator_spectrum(interaction, mu, dim=dim)
    scale = mu ** (1.0 - dim / 2.0)
    if target == "Tu" and dim == 1:
        denom = max(spectrum.e_s, 0.5 * spectrum.e0_s)
    else:
        denom = spectrum.e_s
    predicted = scale / denom if denom > 0.0 else math.nan
    return SlopeFit(
        slope=slope, intercept=intercept, stderr=stderr, r_squared=r_squared,
        predicted=predicted, heuristic=dim != 1, n_used=x.size, target=target,
    )


def weak_coupling_sweep(
    lambdas,
    target,
    interaction: InteractionModel,
    mu=1.0,
    dim=1,
    rel_tol=1e-6,
    **solver_kw,
) -> SweepResult:
    """Solve the target temperature along a decreasing coupling list and fit.

    The fit is ``ln(mu/T) = slope * (1/lam) + intercept`` over the smallest
    half of the couplings (at least four).  Couplings whose root falls out
    of the bracket window are skipped and reported, not fatal.
    """
    if target not in TARGETS:
        raise PreconditionError(f"target must be one of {TARGETS}")
    lams = [float(v) for v in lambdas]
    if len(lams) < 2:
        raise PreconditionError("need at least two couplings to sweep")
    if any(b >= a for a, b in zip(lams[:-1], lams[1:])):
        raise PreconditionError("couplings must be strictly decreasing")
    if any(not np.isfinite(v) or v <= 0.0 for v in lams):
        raise DomainError("couplings must be finite and > 0")

    cache = {}
    records = []
    skipped = []
    prev_temp = None
    for lam in lams:
        bracket = None
        if prev_temp is not None:
            bracket = (max(prev_temp / 100.0, BRACKET_FLOOR_FACTOR * mu), prev_temp)
        spec = SolveSpec(
            lam=lam, interaction=interaction, mu=mu, dim=dim,
            rel_tol=rel_tol, bracket=bracket, **solver_kw,
        )
        try:
            res = _solve(spec, target, cache=cache)
        except NoBracketError as exc:
            skipped.append((lam, str(exc)))
            continue
        records.append(SweepRecord(
            lam=lam, temp=res.temp,
            ln_ratio=math.log(mu / res.temp), q_star=res.q_star_at_solution,
        ))
        prev_temp = res.temp
    if len(records) < 4:
        raise FitError(f"slope fit needs at least 4 solvable couplings, got {len(records)}")
    fit = _fit_slope(records, target, interaction, mu, dim)
    return SweepResult(records=tuple(records), fit=fit, skipped=tuple(skipped))


# ---------------------------------------------------------------------------
# discrete operator chain at the critical temperature
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ChainReport:
    """Bottom eigenvalues of the four criterion-form operators on one grid.

    ``b_k_sym >= b_l_sym >= b_d_sym >= b_k_any`` is the discrete version of
    the operator chain; at the critical temperature of a nonnegative-
    Fourier interaction all four sit at zero within discretization error.
    """

    lam: float
    temp: float
    b_k_sym: float
    b_l_sym: float
    b_d_sym: float
    b_k_any: float
    q_list: tuple

    @property
    def chain(self):
        return (self.b_k_sym, self.b_l_sym, self.b_d_sym, self.b_k_any)

    def ordered(self, slack):
        c = self.chain
        return all(c[i] >= c[i + 1] - slack for i in range(3))

    def max_abs(self):
        return max(abs(v) for v in self.chain)


def chain_bottom_eigs(
    lam,
    interaction: InteractionModel,
    mu,
    temp,
    q_list=None,
    base_nodes=DEFAULT_BASE_NODES,
    octave_nodes=DEFAULT_OCTAVE_NODES,
    p_max=None,
) -> ChainReport:
    """Bottom eigenvalues of K - lam V (both sectors) and of the momentum
    families behind the lower/upper criteria, minimized over ``q_list``.

    Everything is discretized on the single q = 0 grid so the inequalities
    between the operators hold at the matrix level: the q = 0 members reuse
    the K diagonal verbatim, and for q > 0 the two diagonals are ordered
    pointwise, which orders the bottom eigenvalues.
    """
    lam = float(lam)
    mu = float(mu)
    temp = float(temp)
    if lam <= 0.0 or not np.isfinite(lam):
        raise DomainError("lam must be finite and > 0")
    if mu <= 0.0:
        raise PreconditionError("chain check requires mu > 0")
    params = PhysParams(mu=mu, temp=temp)
    sm = math.sqrt(mu)
    if q_list is None:
        q_list = (0.0, 0.3 * sm, 0.6 * sm, sm, 1.5 * sm)
    q_list = tuple(float(q) for q in q_list)
    if 0.0 not in q_list:
        q_list = (0.0,) + q_list
    if any(q < 0.0 for q in q_list):
        raise DomainError("q values must be >= 0")

    grid = MomentumGrid.build(mu, 0.0, temp, p_max=p_max,
                              base_nodes=base_nodes, octave_nodes=octave_nodes)
    p, w = grid.nodes, grid.weights
    dk = np.abs(p[:, None] - p[None, :])
    sk = p[:, None] + p[None, :]
    vd = v_hat(interaction, dk, dim=1)
    vs = v_hat(interaction, sk, dim=1)
    rootw = np.sqrt(np.outer(w, w))
    w_sym = rootw * (vd + vs) / _SQRT_2PI
    w_anti = rootw * (vd - vs) / _SQRT_2PI

    diag_k = np.asarray(k_t(p, params), dtype=float)

    def bottom(diag, wmat):
        return bottom_eigenvalue(np.diag(diag) - lam * wmat)

    b_k_sym = bottom(diag_k, w_sym)
    b_k_any = min(b_k_sym, bottom(diag_k, w_anti))

    b_l = math.inf
    b_d = math.inf
    for q in q_list:
        if q == 0.0:
            diag_l = diag_k
            diag_d = diag_k
            b_l = min(b_l, b_k_sym)
            b_d = min(b_d, b_k_sym)
            continue
        diag_l = np.asarray(inv_b_t(p, q, params), dtype=float)
        diag_d = np.asarray(inv_n_t(p, q, params), dtype=float)
        b_l = min(b_l, bottom(diag_l, w_sym))
        b_d = min(b_d, bottom(diag_d, w_sym))

    return ChainReport(
        lam=lam, temp=temp,
        b_k_sym=b_k_sym, b_l_sym=b_l, b_d_sym=b_d, b_k_any=b_k_any,
        q_list=q_list,
    )
