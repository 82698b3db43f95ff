"""Discretized Birman-Schwinger operators at fixed total momentum.

The operators of interest act on relative wavefunctions and have the form
``A(p)^{1/2} V A(p)^{1/2}`` where ``A`` is one of the temperature kernels
(``1/K_T`` at zero total momentum, ``B_T`` or ``N_T`` at total momentum
``2q``) acting by multiplication in momentum space, and ``V`` acts by
convolution with ``(2pi)^{-1/2} Vhat``.  Since the interaction is even, the
operator commutes with momentum reflection and splits into a symmetric
(even) and antisymmetric (odd) sector; folding to the momentum half-line
turns the convolution into ``(2pi)^{-1/2}[Vhat(p-p') +/- Vhat(p+p')]``.

Everything here is a plain Nystroem discretization on a graded half-line
grid: panels between the kinematic breakpoints ``{0, |sqrt(mu)-q|,
sqrt(mu), sqrt(mu)+q}`` with geometric octave fans shrinking to the thermal
width ``T/(2 sqrt(mu))`` around each point where a kernel denominator can
vanish.  The criterion quantities are the largest eigenvalue at fixed ``q``
and its supremum over ``q``, located by a deterministic scan plus
golden-section refinement.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.linalg

from .errors import DomainError, EigenSolveError, PreconditionError
from .interactions import InteractionModel, v_hat
from .kernels import PhysParams, b_t, k_t, n_t

__all__ = [
    "MomentumGrid",
    "BSOperatorSpec",
    "SpectrumResult",
    "SupQResult",
    "build_bs_matrix",
    "top_eigenvalue",
    "bottom_eigenvalue",
    "compute_spectrum",
    "sup_over_q",
    "default_p_max",
]

_SQRT_2PI = math.sqrt(2.0 * math.pi)
_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0

KERNELS = ("K", "B", "N")
SECTORS = ("symmetric", "antisymmetric")

DEFAULT_BASE_NODES = 24
DEFAULT_OCTAVE_NODES = 10
DEFAULT_MAX_LEVELS = 12
DEFAULT_SCAN_POINTS = 64
DEFAULT_GOLDEN_ITERATIONS = 48


def default_p_max(mu):
    """Momentum cutoff used when none is requested: 8*sqrt(mu+1), mu clipped at 0."""
    return 8.0 * math.sqrt(max(float(mu), 0.0) + 1.0)


@lru_cache(maxsize=128)
def _gl_rule(n):
    x, w = np.polynomial.legendre.leggauss(int(n))
    return x, w


def _segment_nodes(lo, hi, n):
    x, w = _gl_rule(n)
    half = 0.5 * (hi - lo)
    return (lo + half) + half * x, half * w


# ---------------------------------------------------------------------------
# grid
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class MomentumGrid:
    """Graded Gauss-Legendre grid on the momentum half-line [0, p_max].

    ``nodes`` are sorted, strictly inside (0, p_max); ``weights`` are the
    matching quadrature weights, so ``weights.sum() == p_max`` up to
    rounding.  ``breakpoints`` are the panel edges actually used and
    ``singular_points`` the subset that received an octave fan.
    """

    nodes: np.ndarray
    weights: np.ndarray
    p_max: float
    breakpoints: tuple
    singular_points: tuple
    grade_scale: float
    base_nodes: int
    octave_nodes: int
    max_levels: int

    @classmethod
    def build(
        cls,
        mu,
        q,
        temp,
        p_max=None,
        base_nodes=DEFAULT_BASE_NODES,
        octave_nodes=DEFAULT_OCTAVE_NODES,
        max_levels=DEFAULT_MAX_LEVELS,
    ):
        mu = float(mu)
        q = float(q)
        temp = float(temp)
        if not (np.isfinite(mu) and np.isfinite(q) and np.isfinite(temp)):
            raise DomainError("mu, q, temp must be finite")
        if q < 0.0:
            raise DomainError("total-momentum parameter q must be >= 0")
        if temp <= 0.0:
            raise DomainError("temp must be > 0")
        if p_max is None:
            p_max = default_p_max(mu)
        p_max = float(p_max)
        if not (np.isfinite(p_max) and p_max > 0.0):
            raise DomainError("p_max must be finite and > 0")
        if int(base_nodes) < 2 or int(octave_nodes) < 2:
            raise PreconditionError("node counts must be >= 2")

        tol_dup = 1e-12 * p_max
        if mu > 0.0:
            sm = math.sqrt(mu)
            cands = sorted({abs(sm - q), sm, sm + q})
            singular = [c for c in cands if c < p_max - tol_dup]
            grade = temp / (2.0 * sm)
        else:
            # no Fermi surface: kernels are smooth, keep a mild breakpoint at q
            singular = []
            grade = 0.25 * p_max
        grade = min(max(grade, 1e-13 * p_max), 0.25 * p_max)

        pts = [0.0, p_max] + list(singular)
        if mu <= 0.0 and 0.0 < q < p_max:
            pts.append(q)
        pts = sorted(pts)
        bps = [pts[0]]
        for x in pts[1:]:
            if x - bps[-1] > tol_dup:
                bps.append(x)
        sing_marks = [
            any(abs(b - s) <= tol_dup for s in singular) for b in bps
        ]

        segs = []
        for (a, b, s_lo, s_hi) in zip(bps[:-1], bps[1:], sing_marks[:-1], sing_marks[1:]):
            cls._panel_segments(a, b, s_lo, s_hi, grade,
                                int(base_nodes), int(octave_nodes), int(max_levels), segs)

        nodes = []
        weights = []
        for lo, hi, n in segs:
            x, w = _segment_nodes(lo, hi, n)
            nodes.append(x)
            weights.append(w)
        nodes = np.concatenate(nodes)
        weights = np.concatenate(weights)
        order = np.argsort(nodes, kind="stable")
        return cls(
            nodes=nodes[order],
            weights=weights[order],
            p_max=p_max,
            breakpoints=tuple(bps),
            singular_points=tuple(b for b, m in zip(bps, sing_marks) if m),
            grade_scale=grade,
            base_nodes=int(base_nodes),
            octave_nodes=int(octave_nodes),
            max_levels=int(max_levels),
        )

    @staticmethod
    def _panel_segments(a, b, s_lo, s_hi, grade, base_n, oct_n, max_levels, out):
        span = b - a
        if span <= 0.0:
            return

        def fan(lo, hi, toward_lo):
            length = hi - lo
            if length <= 4.0 * grade:
                out.append((lo, hi, oct_n))
                return
            n_lev = min(max_levels, max(1, math.ceil(math.log(length / grade) / math.log(8.0))))
            ds = [length * 8.0 ** (-j) for j in range(n_lev, 0, -1)]
            if toward_lo:
                edges = [lo + d for d in ds]
                out.append((lo, edges[0], oct_n))
                for u, v in zip(edges[:-1], edges[1:]):
                    out.append((u, v, oct_n))
                out.append((edges[-1], hi, base_n))
            else:
                edges = [hi - d for d in reversed(ds)]
                out.append((lo, edges[0], base_n))
                for u, v in zip(edges[:-1], edges[1:]):
                    out.append((u, v, oct_n))
                out.append((edges[-1], hi, oct_n))

        if s_lo and s_hi:
            mid = 0.5 * (a + b)
            fan(a, mid, True)
            fan(mid, b, False)
        elif s_lo:
            fan(a, b, True)
        elif s_hi:
            fan(a, b, False)
        else:
            out.append((a, b, base_n))

    def refined(self, factor=2):
        """Same panel structure with every per-segment node count scaled up."""
        factor = int(factor)
        if factor < 2:
            raise PreconditionError("refinement factor must be an integer >= 2")
        segs = []
        sing_marks = [b in self.singular_points for b in self.breakpoints]
        for (a, b, s_lo, s_hi) in zip(
            self.breakpoints[:-1], self.breakpoints[1:], sing_marks[:-1], sing_marks[1:]
        ):
            self._panel_segments(
                a, b, s_lo, s_hi, self.grade_scale,
                self.base_nodes * factor, self.octave_nodes * factor,
                self.max_levels, segs,
            )
        nodes, weights = [], []
        for lo, hi, n in segs:
            x, w = _segment_nodes(lo, hi, n)
            nodes.append(x)
            weights.append(w)
        nodes = np.concatenate(nodes)
        weights = np.concatenate(weights)
        order = np.argsort(nodes, kind="stable")
        return dataclasses.replace(
            self,
            nodes=nodes[order],
            weights=weights[order],
            base_nodes=self.base_nodes * factor,
            octave_nodes=self.octave_nodes * factor,
        )

    @property
    def size(self):
        return int(self.nodes.size)


# ---------------------------------------------------------------------------
# operator spec and matrix assembly
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class BSOperatorSpec:
    """What to discretize: kernel, total momentum, sector, physics, grid.

    ``kernel`` is one of ``"K"`` (zero-momentum criterion kernel, requires
    q == 0), ``"B"`` (superconductivity lower-bound kernel) or ``"N"``
    (normal-state upper-bound kernel).  ``dim`` > 1 is supported only for
    the radial mode-0 reduction of the q == 0 operator.
    """

    kernel: str
    q: float
    sector: str
    params: PhysParams
    interaction: InteractionModel
    grid: MomentumGrid = None
    dim: int = 1

    def __post_init__(self):
        if self.kernel not in KERNELS:
            raise PreconditionError(f"kernel must be one of {KERNELS}, got {self.kernel!r}")
        if self.sector not in SECTORS:
            raise PreconditionError(f"sector must be one of {SECTORS}, got {self.sector!r}")
        qv = float(self.q)
        if not np.isfinite(qv) or qv < 0.0:
            raise DomainError("q must be finite and >= 0")
        object.__setattr__(self, "q", qv)
        if self.kernel == "K" and qv != 0.0:
            raise PreconditionError("kernel K is the q = 0 restriction; got q != 0")
        d = int(self.dim)
        if d not in (1, 2, 3):
            raise PreconditionError("dim must be 1, 2 or 3")
        object.__setattr__(self, "dim", d)
        if d > 1:
            if self.kernel != "K" or self.sector != "symmetric":
                raise PreconditionError(
                    "dim > 1 supports only the symmetric-sector q = 0 kernel (radial mode 0)"
                )
            if self.interaction.kind == "delta":
                raise PreconditionError("delta interaction is one-dimensional only")

    def with_grid(self, grid):
        return dataclasses.replace(self, grid=grid)

    def default_grid(self, base_nodes=DEFAULT_BASE_NODES, octave_nodes=DEFAULT_OCTAVE_NODES,
                     p_max=None):
        return MomentumGrid.build(
            self.params.mu, self.q, self.params.temp,
            p_max=p_max, base_nodes=base_nodes, octave_nodes=octave_nodes,
        )


def _kernel_diag(kernel, p, q, params):
    if q == 0.0:
        # N_T(p,0)^{-1} = B_T(p,0)^{-1} = K_T(p): route every kernel through
        # the same expression so the q = 0 matrices agree bit for bit.
        return 1.0 / k_t(p, params)
    if kernel == "B":
        return b_t(p, q, params)
    if kernel == "N":
        return n_t(p, q, params)
    raise PreconditionError("kernel K is only defined at q = 0")


def _angular_mode0(model, p, dim, n_phi=64):
    """(2pi)^{-d/2} * angular average of Vhat over the relative angle, d in {2,3}."""
    t, tw = _gl_rule(n_phi)
    if dim == 2:
        # phi in [0, pi], weight 2 (the two half-circles)
        phi = 0.5 * math.pi * (t + 1.0)
        ww = 2.0 * (0.5 * math.pi) * tw
        cosines = np.cos(phi)
    else:
        # t = cos(theta) in [-1, 1], solid-angle weight 2*pi
        cosines = t
        ww = 2.0 * math.pi * tw
    n = p.size
    out = np.empty((n, n))
    block = max(1, int(2.0e6 // max(1, n * cosines.size)))
    p2 = p * p
    for i0 in range(0, n, block):
        i1 = min(n, i0 + block)
        pi = p[i0:i1]
        arg = np.sqrt(
            np.maximum(
                p2[i0:i1, None, None] + p2[None, :, None]
                - 2.0 * pi[:, None, None] * p[None, :, None] * cosines[None, None, :],
                0.0,
            )
        )
        vals = v_hat(model, arg, dim=dim)
        out[i0:i1] = vals @ ww
    return out / (2.0 * math.pi) ** (dim / 2.0)


def build_bs_matrix(spec: BSOperatorSpec):
    """Dense symmetric matrix for the requested Birman-Schwinger operator.

    Entries are ``sqrt(w_i) A(p_i)^{1/2} Vtilde(p_i, p_j) A(p_j)^{1/2}
    sqrt(w_j)`` with ``Vtilde(p, p') = (2pi)^{-1/2} [Vhat(p - p') +/-
    Vhat(p + p')]`` (+ in the symmetric sector).  For ``dim`` > 1 the
    convolution is replaced by the radial mode-0 angular average and the
    measure picks up ``p^{d-1}``.
    """
    grid = spec.grid if spec.grid is not None else spec.default_grid()
    p = grid.nodes
    w = grid.weights
    diag = np.asarray(_kernel_diag(spec.kernel, p, spec.q, spec.params), dtype=float)
    if not np.all(np.isfinite(diag)) or np.any(diag < 0.0):
        raise EigenSolveError("kernel produced a non-finite or negative value on the grid")
    if spec.dim == 1:
        dk = np.abs(p[:, None] - p[None, :])
        sk = p[:, None] + p[None, :]
        sign = 1.0 if spec.sector == "symmetric" else -1.0
        core = (v_hat(spec.interaction, dk, dim=1) + sign * v_hat(spec.interaction, sk, dim=1))
        core /= _SQRT_2PI
        amp = np.sqrt(diag * w)
    else:
        core = _angular_mode0(spec.interaction, p, spec.dim)
        amp = np.sqrt(diag * w * p ** (spec.dim - 1))
    h = amp[:, None] * core * amp[None, :]
    return 0.5 * (h + h.T)


# ---------------------------------------------------------------------------
# eigenvalues
# ---------------------------------------------------------------------------


def _checked_square(matrix):
    a = np.asarray(matrix, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
        raise PreconditionError("expected a nonempty square matrix")
    if not np.all(np.isfinite(a)):
        raise PreconditionError("matrix has non-finite entries")
    scale = np.max(np.abs(a)) if a.size else 0.0
    if not np.allclose(a, a.T, rtol=0.0, atol=1e-12 * max(1.0, scale)):
        raise PreconditionError("matrix is not symmetric")
    return a


def _edge_eigenvalue(matrix, index):
    a = _checked_square(matrix)
    n = a.shape[0]
    which = n - 1 if index == -1 else 0
    try:
        vals = scipy.linalg.eigh(
            a,
            eigvals_only=True,
            subset_by_index=(which, which),
            driver="evr",
            check_finite=False,
        )
        out = float(vals[0])
    except (scipy.linalg.LinAlgError, ValueError):
        try:
            out = float(scipy.linalg.eigvalsh(a, check_finite=False)[which])
        except scipy.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
            raise EigenSolveError(f"eigensolver did not converge: {exc}") from exc
    if not np.isfinite(out):  # pragma: no cover - defensive
        raise EigenSolveError("eigensolver returned a non-finite value")
    return out


def top_eigenvalue(matrix):
    """Largest eigenvalue of a finite real symmetric matrix."""
    return _edge_eigenvalue(matrix, -1)


def bottom_eigenvalue(matrix):
    """Smallest eigenvalue of a finite real symmetric matrix."""
    return _edge_eigenvalue(matrix, 0)


# ---------------------------------------------------------------------------
# spectrum with refinement record
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SpectrumResult:
    top: float
    q: float
    grid_size: int
    refinement_delta: float
    sector: str
    kernel: str


def compute_spectrum(spec: BSOperatorSpec, refine=True, refine_factor=2) -> SpectrumResult:
    """Top eigenvalue of the discretized operator, with a grid-doubling check.

    The reported ``top`` comes from the refined grid; ``refinement_delta``
    is the absolute change under the refinement and is the quantity the
    stability gates look at.
    """
    grid = spec.grid if spec.grid is not None else spec.default_grid()
    top0 = top_eigenvalue(build_bs_matrix(spec.with_grid(grid)))
    if not refine:
        return SpectrumResult(
            top=top0, q=spec.q, grid_size=grid.size,
            refinement_delta=math.nan, sector=spec.sector, kernel=spec.kernel,
        )
    fine = grid.refined(refine_factor)
    top1 = top_eigenvalue(build_bs_matrix(spec.with_grid(fine)))
    return SpectrumResult(
        top=top1, q=spec.q, grid_size=fine.size,
        refinement_delta=abs(top1 - top0), sector=spec.sector, kernel=spec.kernel,
    )


# ---------------------------------------------------------------------------
# sup over q
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SupQResult:
    q_star: float
    value: float
    boundary_hit: bool
    evaluations: int


def _scan_grid(sqrt_mu, q_max, n_points):
    """Deterministic q-scan: linear coverage plus log clusters at 0 and sqrt(mu)."""
    if sqrt_mu <= 0.0:
        return np.unique(np.linspace(0.0, q_max, max(2, n_points)))
    n_side = max(2, int(round(0.2 * n_points)))
    n_lin = max(2, n_points - 3 * n_side)
    decades = 10.0 ** np.linspace(-6.0, -0.5, n_side)
    pieces = [
        np.linspace(0.0, q_max, n_lin),
        sqrt_mu * decades,
        sqrt_mu * (1.0 - decades),
        sqrt_mu * (1.0 + decades),
        np.array([sqrt_mu, q_max]),
    ]
    qs = np.concatenate(pieces)
    qs = qs[(qs >= 0.0) & (qs <= q_max)]
    return np.unique(qs)


def sup_over_q(
    kernel,
    params: PhysParams,
    interaction: InteractionModel,
    sector="symmetric",
    q_max=None,
    tol=1e-10,
    scan_points=DEFAULT_SCAN_POINTS,
    golden_iterations=DEFAULT_GOLDEN_ITERATIONS,
    base_nodes=DEFAULT_BASE_NODES,
    octave_nodes=DEFAULT_OCTAVE_NODES,
    p_max=None,
) -> SupQResult:
    """Maximize the top Birman-Schwinger eigenvalue over total momentum.

    A fixed scan grid on [0, q_max] (log-refined near the two candidate
    maximizers q = 0 and q = sqrt(mu)) picks the best coarse point; a
    golden-section pass with a fixed iteration budget refines the bracket
    around it.  Everything is deterministic; ties resolve toward smaller q.
    """
    if kernel not in ("B", "N"):
        raise PreconditionError("sup_over_q applies to the B and N kernels only")
    if sector not in SECTORS:
        raise PreconditionError(f"sector must be one of {SECTORS}")
    mu = params.mu
    sm = math.sqrt(mu) if mu > 0.0 else 0.0
    if q_max is None:
        if sm <= 0.0:
            raise PreconditionError("q_max must be given explicitly when mu <= 0")
        q_max = 4.0 * sm
    q_max = float(q_max)
    if not np.isfinite(q_max) or q_max <= sm:
        raise PreconditionError("q_max must be finite and exceed sqrt(mu)")

    cache = {}

    def f(qv):
        qv = float(qv)
        if qv not in cache:
            grid = MomentumGrid.build(
                mu, qv, params.temp,
                p_max=p_max, base_nodes=base_nodes, octave_nodes=octave_nodes,
            )
            spec = BSOperatorSpec(
                kernel=kernel, q=qv, sector=sector, params=params,
                interaction=interaction, grid=grid,
            )
            cache[qv] = top_eigenvalue(build_bs_matrix(spec))
        return cache[qv]

    qs = _scan_grid(sm, q_max, int(scan_points))
    vals = np.array([f(qv) for qv in qs])
    i_best = int(np.argmax(vals))  # argmax takes the first (smallest q) on ties
    boundary = i_best == qs.size - 1

    lo = qs[max(i_best - 1, 0)]
    hi = qs[min(i_best + 1, qs.size - 1)]
    if hi > lo:
        a, b = float(lo), float(hi)
        c = b - _INVPHI * (b - a)
        d = a + _INVPHI * (b - a)
        fc, fd = f(c), f(d)
        width_floor = max(float(tol), 0.0) * max(1.0, sm)
        for _ in range(int(golden_iterations)):
            if (b - a) <= width_floor:
                break
            if fc >= fd:  # ">=" keeps the smaller-q side on ties
                b, d, fd = d, c, fc
                c = b - _INVPHI * (b - a)
                fc = f(c)
            else:
                a, c, fc = c, d, fd
                d = a + _INVPHI * (b - a)
                fd = f(d)

    best_q = None
    best_v = -math.inf
    for qv in sorted(cache):
        v = cache[qv]
        if v > best_v:
            best_q, best_v = qv, v
    if best_q >= q_max * (1.0 - 1e-9):
        boundary = True
    return SupQResult(
        q_star=float(best_q),
        value=float(best_v),
        boundary_hit=bool(boundary),
        evaluations=len(cache),
    )
