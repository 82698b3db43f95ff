"""Panel Gauss-Legendre quadrature for kernel integrals.

The product integrator is an adaptive panel scheme: each panel is estimated
with an n-node Gauss-Legendre rule and an embedded n//2-node rule; the
difference drives bisection.  Panels always start at the kernel breakpoints
(the singular momenta of the temperature-free majorant), so the adaptive
refinement only has to chase the width-T structure, not locate it.

Also here: the closed-form antiderivative oracles used by the tests and the
bound verifier, the full-line integral with a certified tail remainder, the
weighted majorant integrals, and the planar/spatial region integrals in
(p1, |p_perp|) coordinates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import AccuracyError, DomainError, PreconditionError
from .kernels import PhysParams, b_t, m_bound, n_t


@lru_cache(maxsize=64)
def _gl_rule(n):
    x, w = np.polynomial.legendre.leggauss(int(n))
    return x, w


@dataclass(frozen=True)
class PanelScheme:
    """Adaptive panel parameters.

    nodes_per_panel: size of the high rule (embedded rule is half).
    max_depth: bisection depth limit per starting panel.
    tol_abs / tol_rel: target absolute / relative error of the integral.
    """

    nodes_per_panel: int = 24
    max_depth: int = 48
    tol_abs: float = 1e-10
    tol_rel: float = 1e-10
    max_panels: int = 32768

    def __post_init__(self):
        if self.nodes_per_panel < 4:
            raise PreconditionError("nodes_per_panel must be >= 4")
        if self.max_depth < 1:
            raise PreconditionError("max_depth must be >= 1")
        if self.max_panels < 16:
            raise PreconditionError("max_panels must be >= 16")


# 2D region integrals default to a looser target than scalar integrals.
DEFAULT_SCHEME = PanelScheme()
REGION_SCHEME = PanelScheme(tol_abs=1e-8, tol_rel=1e-8)


@dataclass
class IntegralResult:
    """Value with an error estimate.

    truncated: for full-line integrals, the finite part over [-P, P].
    tail_bound: certified bound on everything outside the finite part
    (half of it is folded into value, half into error).
    """

    value: float
    error: float
    neval: int = 0
    truncated: float = None
    tail_bound: float = 0.0


def panel_integrate(f, breakpoints, scheme: PanelScheme = None) -> IntegralResult:
    """Adaptive Gauss-Legendre integration of a vectorized callable.

    f must accept a 1D numpy array and return values of the same shape.
    Raises AccuracyError when the leftover error of depth-exhausted panels
    exceeds ten times the tolerance budget.
    """
    scheme = scheme or DEFAULT_SCHEME
    pts = np.asarray(sorted(float(b) for b in breakpoints), dtype=float)
    if pts.size < 2:
        raise PreconditionError("need at least two breakpoints")
    if not np.all(np.isfinite(pts)):
        raise DomainError("breakpoints must be finite")
    pts = pts[np.concatenate(([True], np.diff(pts) > 0))]
    total_len = pts[-1] - pts[0]
    if total_len <= 0:
        return IntegralResult(0.0, 0.0, 0)

    n = scheme.nodes_per_panel
    nh = max(2, n // 2)
    xs, ws = _gl_rule(n)
    xh, wh = _gl_rule(nh)

    pending = [(pts[i], pts[i + 1], 0) for i in range(pts.size - 1)]
    value = 0.0
    err_ok = 0.0
    err_flagged = 0.0
    neval = 0

    while pending:
        lo = np.array([p[0] for p in pending])
        hi = np.array([p[1] for p in pending])
        depth = [p[2] for p in pending]
        half = 0.5 * (hi - lo)
        mid = 0.5 * (hi + lo)
        nodes = mid[:, None] + half[:, None] * xs[None, :]
        nodes_h = mid[:, None] + half[:, None] * xh[None, :]
        allv = f(np.concatenate([nodes.ravel(), nodes_h.ravel()]))
        allv = np.asarray(allv, dtype=float)
        neval += allv.size
        v_hi = allv[: nodes.size].reshape(nodes.shape)
        v_lo = allv[nodes.size:].reshape(nodes_h.shape)
        i_hi = (v_hi @ ws) * half
        i_lo = (v_lo @ wh) * half
        errs = np.abs(i_hi - i_lo)

        nxt = []
        # running scale for the relative part of the panel budget
        scale = max(abs(value) + float(np.abs(i_hi).sum()), 1e-300)
        crowded = len(pending) > scheme.max_panels
        for k in range(len(pending)):
            h = hi[k] - lo[k]
            # length-apportioned global budget plus a panel-local relative
            # term; the latter keeps spike panels splittable in finite time
            # (roundoff noise sits a factor eps/tol_rel below it).
            budget = (
                scheme.tol_abs * h / total_len
                + scheme.tol_rel * max(scale * h / total_len, abs(i_hi[k]))
            )
            if errs[k] <= budget:
                value += i_hi[k]
                err_ok += errs[k]
            elif depth[k] >= scheme.max_depth or crowded:
                value += i_hi[k]
                err_flagged += errs[k]
            else:
                m = mid[k]
                nxt.append((lo[k], m, depth[k] + 1))
                nxt.append((m, hi[k], depth[k] + 1))
        pending = nxt

    total_err = err_ok + err_flagged
    if not (np.isfinite(value) and np.isfinite(total_err)):
        raise AccuracyError(
            "panel integration produced a non-finite result (singular integrand?)",
            estimate=float(value),
            error_bound=float(total_err),
        )
    budget = max(scheme.tol_abs, scheme.tol_rel * abs(value))
    if err_flagged > 10.0 * budget:
        raise AccuracyError(
            f"panel integration stalled: leftover error {err_flagged:.3e} "
            f"exceeds 10x budget {budget:.3e}",
            estimate=value,
            error_bound=total_err,
        )
    return IntegralResult(float(value), float(total_err), neval)


def fermi_breakpoints(mu, q, lo, hi, temp=None):
    """Panel breakpoints on [lo, hi]: the singular momenta of the majorant
    {|sqrt(mu)-|q||, sqrt(mu)+|q|} plus {0, sqrt(mu), sqrt(3 mu)}.

    With temp given, a geometric ladder c +/- 8^k * temp/sqrt(mu) is added
    around each singular momentum c.  The thermal kernels have width-T
    structure there (b_t falls off exponentially away from it), which
    plain Gauss nodes straddle without noticing: a panel edge must land
    inside the structure for the embedded error estimate to see it.
    """
    if mu <= 0:
        return [float(lo), float(hi)]
    smu = math.sqrt(mu)
    qq = abs(float(q))
    cand = [0.0, abs(smu - qq), smu, smu + qq, math.sqrt(3.0 * mu)]
    pts = [float(lo), float(hi)]
    for c in cand:
        if lo < c < hi:
            pts.append(c)
    if temp is not None and temp > 0:
        span = 0.2 * (hi - lo)
        for c in cand:
            if not (lo - span <= c <= hi + span):
                continue
            step = temp / smu
            while step < span:
                for p in (c - step, c + step):
                    if lo < p < hi:
                        pts.append(p)
                step *= 8.0
    pts = sorted(set(pts))
    out = [pts[0]]
    scale = max(abs(hi - lo), 1.0)
    for p in pts[1:]:
        if p - out[-1] > 1e-13 * scale:
            out.append(p)
    return out


def integrate_m_t(q, params: PhysParams, scheme: PanelScheme = None) -> IntegralResult:
    """integral of b_t(p, q) over p in [0, sqrt(3 mu)]."""
    if params.mu <= 0:
        raise PreconditionError("integrate_m_t needs mu > 0")
    hi = math.sqrt(3.0 * params.mu)
    bps = fermi_breakpoints(params.mu, q, 0.0, hi, temp=params.temp)
    return panel_integrate(lambda p: b_t(p, q, params), bps, scheme)


def integrate_n_t(q, params: PhysParams, scheme: PanelScheme = None) -> IntegralResult:
    """integral of n_t(p, q) over p in [0, sqrt(3 mu)]."""
    if params.mu <= 0:
        raise PreconditionError("integrate_n_t needs mu > 0")
    hi = math.sqrt(3.0 * params.mu)
    bps = fermi_breakpoints(params.mu, q, 0.0, hi, temp=params.temp)
    return panel_integrate(lambda p: n_t(p, q, params), bps, scheme)


def tail_envelope_constant(mu, eps=None):
    """C with n_t(p,q) <= C/(1 + p^2 + q^2) wherever p^2 + q^2 >= mu + eps.

    From n_t <= 1/|p^2+q^2-mu| and monotonicity of (1+s)/(s-mu) in s.
    """
    if mu <= 0:
        # with mu <= 0 the kernel is already ~ 1/(p^2+q^2-mu) everywhere
        return 1.0 + max(0.0, -mu)
    eps = 0.5 * mu if eps is None else float(eps)
    return (1.0 + mu + eps) / eps


def integrate_n_t_fullline(
    q, params: PhysParams, scheme: PanelScheme = None, p_tail=None
) -> IntegralResult:
    """integral of n_t(p, q) over the whole line, tail certified.

    [-P, P] is integrated with panels (P = p_tail, default 8*sqrt(mu+1));
    beyond P the analytic envelope C/(1+p^2+q^2) bounds the remainder, and
    the midpoint of [0, bound] is added with matching error so the result
    is a certified interval around the true value.
    """
    mu = params.mu
    if p_tail is None:
        p_tail = 8.0 * math.sqrt(abs(mu) + 1.0)
    p_tail = float(p_tail)
    qq = abs(float(q))
    eps = 0.5 * mu if mu > 0 else 1.0
    if p_tail**2 + qq**2 < (mu + eps if mu > 0 else 0.0):
        raise PreconditionError("p_tail too small for the tail envelope")
    bps = fermi_breakpoints(mu, q, 0.0, p_tail, temp=params.temp)
    finite = panel_integrate(lambda p: n_t(p, qq, params), bps, scheme)
    c_env = tail_envelope_constant(mu)
    s1 = math.sqrt(1.0 + qq * qq)
    tail = 2.0 * c_env * (math.pi / 2.0 - math.atan(p_tail / s1)) / s1
    return IntegralResult(
        value=2.0 * finite.value + 0.5 * tail,
        error=2.0 * finite.error + 0.5 * tail,
        neval=finite.neval,
        truncated=2.0 * finite.value,
        tail_bound=tail,
    )


def weighted_m_integral(q, mu, weight, scheme: PanelScheme = None) -> IntegralResult:
    """integral of m_bound(p,q) * w(|p|) over [-sqrt(3 mu), sqrt(3 mu)].

    weight 'abs_p_minus_sqrtmu' (w = ||p| - sqrt(mu)|) is valid for
    |q| <= sqrt(mu)/2; weight 'abs_p' (w = |p|) for |q - sqrt(mu)| <=
    sqrt(mu)/2.  Both integrands are even in p, so twice the half-line
    integral is returned.
    """
    if mu <= 0:
        raise PreconditionError("weighted_m_integral needs mu > 0")
    smu = math.sqrt(mu)
    qq = abs(float(q))
    if weight == "abs_p_minus_sqrtmu":
        if qq > 0.5 * smu + 1e-15:
            raise PreconditionError("weight abs_p_minus_sqrtmu needs |q| <= sqrt(mu)/2")
        wfun = lambda p: np.abs(np.abs(p) - smu)
    elif weight == "abs_p":
        if abs(qq - smu) > 0.5 * smu + 1e-15:
            raise PreconditionError("weight abs_p needs |q - sqrt(mu)| <= sqrt(mu)/2")
        wfun = np.abs
    else:
        raise PreconditionError(f"unknown weight {weight!r}")
    hi = math.sqrt(3.0 * mu)
    bps = fermi_breakpoints(mu, qq, 0.0, hi)
    res = panel_integrate(lambda p: m_bound(p, qq, mu) * wfun(p), bps, scheme)
    return IntegralResult(2.0 * res.value, 2.0 * res.error, res.neval)


# ===================== closed-form oracles =====================

def _require(cond, msg):
    if not cond:
        raise PreconditionError(msg)


def _oracle_m_edge_integral(mu, q):
    """integral of m_bound from 0 to |q - sqrt(mu)| in closed form.

    Three branches: artanh form for sqrt(mu)/2 <= q < sqrt(mu), zero at
    q = sqrt(mu), arctan form for sqrt(mu) < q <= 3 sqrt(mu)/2.
    """
    _require(mu > 0, "mu must be > 0")
    smu = math.sqrt(mu)
    _require(0.5 * smu <= q <= 1.5 * smu, "branch validity: sqrt(mu)/2 <= q <= 3 sqrt(mu)/2")
    if q == smu:
        return 0.0
    if q < smu:
        s = math.sqrt(mu - q * q)
        return math.atanh(math.sqrt((smu - q) / (smu + q))) / s
    w = math.sqrt(q * q - mu)
    return math.atan(math.sqrt((q - smu) / (q + smu))) / w


def _oracle_disc_log_integral(mu, q, temp):
    """integral of 1/(mu - p^2 - q^2) from 0 to sqrt(mu) - q - T/sqrt(mu)."""
    _require(mu > 0 and temp > 0, "mu and temp must be > 0")
    smu = math.sqrt(mu)
    _require(0.0 <= q < smu, "branch validity: 0 <= q < sqrt(mu)")
    upper = smu - q - temp / smu
    _require(upper > 0, "upper limit must be positive: T too large for this q")
    s = math.sqrt(mu - q * q)
    return math.log1p(2.0 * upper / (s - smu + q + temp / smu)) / (2.0 * s)


def _oracle_fermi_weight_log(mu, q):
    """integral of (sqrt(mu)-p)/(mu - p^2 - q^2) from 0 to sqrt(mu) - q."""
    _require(mu > 0, "mu must be > 0")
    smu = math.sqrt(mu)
    _require(0.0 < q <= 0.5 * smu, "branch validity: 0 < q <= sqrt(mu)/2")
    s = math.sqrt(mu - q * q)
    return (
        0.5 * smu * math.log(smu + s) / s
        + (0.5 - 0.5 * smu / s) * math.log(q)
        - 0.5 * math.log(0.5 * (smu + q))
    )


def _oracle_abs_p_inner(mu, q):
    """integral of p * m_bound(p,q) from 0 to |sqrt(mu) - q|."""
    _require(mu > 0, "mu must be > 0")
    smu = math.sqrt(mu)
    _require(abs(q - smu) <= 0.5 * smu and q > 0, "branch validity: |q - sqrt(mu)| <= sqrt(mu)/2")
    return 0.5 * abs(math.log((smu + q) / (2.0 * q)))


def _oracle_abs_p_outer(mu, q):
    """integral of p/(p^2 + q^2 - mu) from sqrt(mu) + q to sqrt(3 mu)."""
    _require(mu > 0, "mu must be > 0")
    smu = math.sqrt(mu)
    _require(0 < q <= (math.sqrt(3.0) - 1.0) * smu, "branch validity: sqrt(mu)+q <= sqrt(3 mu)")
    return 0.5 * math.log((2.0 * mu + q * q) / (2.0 * q * (smu + q)))


def _oracle_outer_band_integral(mu, q, lo, hi):
    """integral of 1/(p^2 + q^2 - mu) from lo to hi, sign-definite band."""
    _require(mu > 0 and hi > lo >= 0, "need mu > 0 and hi > lo >= 0")
    d = q * q - mu
    if d > 0:
        w = math.sqrt(d)
        return (math.atan(hi / w) - math.atan(lo / w)) / w
    if d == 0:
        _require(lo > 0, "branch validity: lo > 0 at q = sqrt(mu)")
        return 1.0 / lo - 1.0 / hi
    s = math.sqrt(-d)
    _require(lo > s, "branch validity: band must avoid the zero at sqrt(mu - q^2)")
    val = math.log((hi - s) / (hi + s)) - math.log((lo - s) / (lo + s))
    return val / (2.0 * s)


_ORACLES = {
    "m_edge_integral": _oracle_m_edge_integral,
    "disc_log_integral": _oracle_disc_log_integral,
    "fermi_weight_log": _oracle_fermi_weight_log,
    "abs_p_inner": _oracle_abs_p_inner,
    "abs_p_outer": _oracle_abs_p_outer,
    "outer_band_integral": _oracle_outer_band_integral,
}


def closed_form_oracles(name, **kwargs):
    """Evaluate a named closed-form antiderivative.

    Names: m_edge_integral(mu, q), disc_log_integral(mu, q, temp),
    fermi_weight_log(mu, q), abs_p_inner(mu, q), abs_p_outer(mu, q),
    outer_band_integral(mu, q, lo, hi).  Arguments outside a branch's
    validity range raise PreconditionError.
    """
    if name not in _ORACLES:
        raise DomainError(f"unknown oracle {name!r}; known: {sorted(_ORACLES)}")
    return float(_ORACLES[name](**kwargs))


# ===================== region integrals (d = 2, 3) =====================

@dataclass(frozen=True)
class RegionSpec:
    """Region integral request.

    region 'A1': {p^2 > 3 mu} truncated at |p| <= p_max (the integrand
    decays only like |p|^-2, so the untruncated integral diverges in
    d >= 2); 'A2': {p^2 < 3 mu, the two shifted dispersions have opposite
    signs}; 'A3': {p^2 < 3 mu, equal signs}.  q is the magnitude of the
    total momentum (aligned with the first axis); q_min guards the
    q -> 0 divergence of A2/A3.
    """

    dim: int
    region: str
    q: float
    p_max: float = None
    q_min: float = None

    def __post_init__(self):
        if self.dim not in (2, 3):
            raise PreconditionError("region integrals are defined for dim in {2, 3}")
        if self.region not in ("A1", "A2", "A3"):
            raise PreconditionError(f"unknown region {self.region!r}")
        if not np.isfinite(self.q) or self.q < 0:
            raise DomainError("q must be finite and >= 0")


def _angular_weight(dim, rho):
    return 2.0 * np.ones_like(rho) if dim == 2 else 2.0 * math.pi * rho


def _m_vec(p1, rho, s, mu):
    # grouped so the small quantities survive: (p1 -+ s)^2 + rho^2 - mu =
    # (p1^2 + rho^2) + (s^2 - mu) -+ 2 p1 s, each term computed exactly-ish
    r2c = p1 * p1 + rho * rho + (s * s - mu)
    cross = 2.0 * p1 * s
    return 2.0 / (np.abs(r2c - cross) + np.abs(r2c + cross))


def _ladder(edge, toward, n=10):
    """Geometric points edge + (toward - edge) * 8^-k, k = 1..n, for
    resolving a sharp feature at `edge` without deep bisection."""
    return [edge + (toward - edge) * 8.0 ** (-k) for k in range(1, n + 1)]


@lru_cache(maxsize=8)
def _graded_template(levels=17, n_hi=16):
    """Unit-interval composite rule graded geometrically toward u = 0.

    Panels [0, 8^-levels], ..., [1/8, 1], each carrying an n_hi-node rule
    and an embedded n_hi//2 rule for the error estimate.  On each octave
    panel the near-edge integrands here (simple pole at small negative u)
    are analytic with a comfortable Bernstein ellipse, so n_hi = 16 gives
    ~1e-11 relative accuracy per panel.
    """
    edges = np.array([0.0] + [8.0 ** (-k) for k in range(levels, 0, -1)] + [1.0])
    mid = 0.5 * (edges[1:] + edges[:-1])
    half = 0.5 * np.diff(edges)
    out = []
    for n in (n_hi, max(2, n_hi // 2)):
        x, w = _gl_rule(n)
        out.append((mid[:, None] + half[:, None] * x).ravel())
        out.append((half[:, None] * w).ravel())
    return tuple(out)


def _graded_rows(f2, p1, lo, hi, edge_at_lo, chunk=8192):
    """Row-wise integral of f2(p1_i, rho) over rho in [lo_i, hi_i], graded
    toward the lo or hi edge per row.  Vectorized across rows (in chunks
    to bound memory); returns (values, error estimates)."""
    u_hi, w_hi, u_lo, w_lo = _graded_template()
    width = np.maximum(hi - lo, 0.0)
    start = np.where(edge_at_lo, lo, hi)
    sgn = np.where(edge_at_lo, 1.0, -1.0)
    vals = np.zeros_like(width)
    errs = np.zeros_like(width)
    (live_idx,) = np.nonzero(width > 0)
    for blk in range(0, live_idx.size, chunk):
        idx = live_idx[blk: blk + chunk]
        p1l = p1[idx, None]
        off = (sgn[idx] * width[idx])[:, None]
        i_hi = f2(p1l, start[idx, None] + off * u_hi[None, :]) @ w_hi
        i_lo = f2(p1l, start[idx, None] + off * u_lo[None, :]) @ w_lo
        vals[idx] = width[idx] * i_hi
        errs[idx] = width[idx] * np.abs(i_hi - i_lo)
    return vals, errs


def region_integral_m(spec: RegionSpec, mu, scheme: PanelScheme = None) -> IntegralResult:
    """integral of m_bound over one of the regions A1/A2/A3, reduced to
    (p1, |p_perp|) coordinates with the angular factor 2 (d=2) or
    2 pi |p_perp| (d=3).  Outer integral over p1 >= 0 is doubled by
    symmetry; inner integrals are closed-form (A2) or adaptive panels."""
    if mu <= 0:
        raise PreconditionError("region integrals need mu > 0")
    scheme = scheme or REGION_SCHEME
    s = float(spec.q)
    smu = math.sqrt(mu)
    q_min = spec.q_min if spec.q_min is not None else 1e-3 * smu
    if spec.region in ("A2", "A3") and s < q_min:
        raise PreconditionError(
            f"region {spec.region} integral diverges as q -> 0; q = {s} < q_min = {q_min}"
        )
    dim = spec.dim
    r3 = math.sqrt(3.0 * mu)

    if spec.region == "A2":
        p_lo = max(0.0, s - smu)
        p_hi = min(s + smu, r3)
        if p_hi <= p_lo:
            return IntegralResult(0.0, 0.0, 0)
        p_clip = (2.0 * mu + s * s) / (2.0 * s)

        def outer(p1):
            p1 = np.asarray(p1, dtype=float)
            rp2 = mu - (p1 - s) ** 2
            rm2 = mu - (p1 + s) ** 2
            cap2 = 3.0 * mu - p1 * p1
            top2 = np.minimum(rp2, cap2)
            bot2 = np.maximum(rm2, 0.0)
            # in the unclipped branch the band width rp2 - rm2 = 4 p1 s exactly
            plain = (rp2 <= cap2) & (rm2 >= 0.0)
            width2 = np.maximum(np.where(plain, 4.0 * p1 * s, top2 - bot2), 0.0)
            good = (top2 > bot2) & (p1 > 0)
            if dim == 3:
                inner = math.pi * width2
            else:
                rp = np.sqrt(np.maximum(top2, 0.0))
                rm = np.sqrt(bot2)
                den = np.where(rp + rm > 0, rp + rm, 1.0)
                inner = 2.0 * width2 / den
            # Gauss-Legendre nodes are interior, so p1 = 0 is never evaluated
            g = inner / (2.0 * np.where(p1 > 0, p1, 1.0) * s)
            return np.where(good, g, 0.0)

        bps = [p_lo, p_hi]
        for c in (smu - s, p_clip, smu, s):
            if p_lo < c < p_hi:
                bps.append(c)
        res = panel_integrate(outer, sorted(bps), scheme)
        return IntegralResult(2.0 * res.value, 2.0 * res.error, res.neval)

    f2 = lambda p1, rho: _m_vec(p1, rho, s, mu) * _angular_weight(dim, rho)
    inner_rel = [0.0]
    # the graded inner rule is true to ~1e-7 relative near the pole layer;
    # a tighter outer tolerance would chase that noise without converging
    outer_scheme = PanelScheme(
        nodes_per_panel=scheme.nodes_per_panel,
        max_depth=min(scheme.max_depth, 30),
        tol_abs=max(scheme.tol_abs, 1e-7),
        tol_rel=max(scheme.tol_rel, 1e-7),
        max_panels=min(scheme.max_panels, 4096),
    )

    def _track(vals, errs):
        live = np.abs(vals) > 0
        if np.any(live):
            inner_rel[0] = max(
                inner_rel[0], float(np.max(errs[live] / np.abs(vals[live])))
            )

    if spec.region == "A3":
        c0 = s * s - mu

        def outer(p1_arr):
            p1 = np.asarray(p1_arr, dtype=float).ravel()
            top2 = np.maximum(3.0 * mu - p1 * p1, 0.0)
            top = np.sqrt(top2)
            rp2 = 2.0 * p1 * s - p1 * p1 - c0
            rm2 = -2.0 * p1 * s - p1 * p1 - c0
            rp = np.sqrt(np.clip(rp2, 0.0, top2))
            rm = np.sqrt(np.clip(rm2, 0.0, top2))
            # below the band: [0, rm], kernel sharpest at the rm edge
            lo1 = np.zeros_like(p1)
            hi1 = np.where(rp2 > 0, rm, 0.0)
            v1, e1 = _graded_rows(f2, p1, lo1, hi1, np.zeros_like(p1, dtype=bool))
            # above the band (or the whole disc if no band): sharp at rp
            lo2 = np.where(rp2 > 0, rp, 0.0)
            v2, e2 = _graded_rows(f2, p1, lo2, top, np.ones_like(p1, dtype=bool))
            _track(v1 + v2, e1 + e2)
            return (v1 + v2).reshape(np.shape(p1_arr))

        # near p1 = 0 the outer integrand grows at worst like p1^(-1/2)
        # (at s = sqrt(mu)); clip at eps and certify the strip by the
        # envelope for c * p1^(-alpha), alpha <= 1/2
        eps_out = 1e-12 * smu
        g_eps = float(outer(np.array([eps_out]))[0])
        strip = 2.2 * eps_out * abs(g_eps)
        strip_val, strip_err = 0.5 * strip, 0.6 * strip
        bps = [eps_out, r3]
        cand = [abs(s - smu), smu, s + smu, s, smu - s]
        if c0 > 0:
            cand += [s - math.sqrt(c0), s + math.sqrt(c0)]
        for c in cand:
            if eps_out < c < r3:
                bps.append(c)
        bps += [x for x in _ladder(eps_out, r3) if eps_out < x < r3]
        res = panel_integrate(outer, sorted(set(bps)), outer_scheme)
        err = res.error + strip_err + 2.0 * inner_rel[0] * abs(res.value)
        return IntegralResult(2.0 * (res.value + strip_val), 2.0 * err, res.neval)

    # A1, truncated at |p| <= p_max
    p_max = spec.p_max if spec.p_max is not None else 3.0 * r3
    if p_max <= r3:
        raise PreconditionError("A1 needs p_max > sqrt(3 mu)")

    def outer(p1_arr):
        p1 = np.asarray(p1_arr, dtype=float).ravel()
        rlo = np.sqrt(np.maximum(3.0 * mu - p1 * p1, 0.0))
        rhi = np.sqrt(np.maximum(p_max * p_max - p1 * p1, 0.0))
        rhi = np.maximum(rhi, rlo)
        # optional interior kink where (p1 - s)^2 + rho^2 = mu
        k2 = mu - (p1 - s) ** 2
        k = np.sqrt(np.maximum(k2, 0.0))
        split = (k2 > 0) & (k > rlo) & (k < rhi)
        kk = np.where(split, k, rlo)
        va, ea = _graded_rows(f2, p1, rlo, kk, np.zeros_like(p1, dtype=bool))
        vb, eb = _graded_rows(f2, p1, kk, rhi, np.ones_like(p1, dtype=bool))
        _track(va + vb, ea + eb)
        return (va + vb).reshape(np.shape(p1_arr))

    bps = [0.0, p_max]
    for c in (r3, s - smu, s + smu, s):
        if 0.0 < c < p_max:
            bps.append(c)
    res = panel_integrate(outer, sorted(set(bps)), outer_scheme)
    err = res.error + 2.0 * inner_rel[0] * abs(res.value)
    return IntegralResult(2.0 * res.value, 2.0 * err, res.neval)
