"""Tests for the discretized Birman-Schwinger layer.

The independent oracles here are: the half-line kernel integrals from the
quadrature module (rank-one delta check), a full-spectrum dense eigensolver
on random matrices, a position-space discretization of the *nonsymmetric*
operator V^{1/2} A |V|^{1/2} (checks the symmetrized momentum build), direct
adaptive quadrature for the radial mode-0 angular averages, and a dense
512-point q-scan (checks the scan + golden-section maximizer).
"""

import math

import numpy as np
import pytest
import scipy.integrate
import scipy.linalg

from bcs_tc_lab.bs_spectra import (
    BSOperatorSpec,
    MomentumGrid,
    SupQResult,
    _angular_mode0,
    bottom_eigenvalue,
    build_bs_matrix,
    compute_spectrum,
    default_p_max,
    sup_over_q,
    top_eigenvalue,
)
from bcs_tc_lab.errors import DomainError, PreconditionError
from bcs_tc_lab.interactions import InteractionModel, demo_split_interaction, v_hat
from bcs_tc_lab.kernels import PhysParams, n_t
from bcs_tc_lab.quadrature import fermi_breakpoints, integrate_n_t_fullline, panel_integrate

GAUSS = InteractionModel.gaussian(1.0, 1.0)
SPLIT = demo_split_interaction()


def spec_for(kernel, q, params, interaction, sector="symmetric", grid=None, **grid_kw):
    if grid is None:
        grid = MomentumGrid.build(params.mu, q, params.temp, **grid_kw)
    return BSOperatorSpec(
        kernel=kernel, q=q, sector=sector, params=params,
        interaction=interaction, grid=grid,
    )


# ---------------------------------------------------------------------------
# grid
# ---------------------------------------------------------------------------


@pytest.mark.parametrize(
    "mu,q,temp",
    [(1.0, 0.0, 1e-4), (1.0, 0.3, 1e-6), (1.0, 1.0, 1e-5), (2.0, 2.5, 1e-3), (-0.5, 0.7, 0.5)],
)
def test_grid_weight_sum_and_ordering(mu, q, temp):
    g = MomentumGrid.build(mu, q, temp)
    assert abs(g.weights.sum() - g.p_max) <= 1e-12 * g.p_max
    assert np.all(np.diff(g.nodes) > 0)
    assert g.nodes[0] > 0.0 and g.nodes[-1] < g.p_max
    assert np.all(g.weights > 0.0)
    assert g.breakpoints[0] == 0.0 and g.breakpoints[-1] == g.p_max


def test_grid_breakpoints_are_kinematic_points():
    g = MomentumGrid.build(1.0, 0.3, 1e-4)
    for expected in (0.0, 0.7, 1.0, 1.3):
        assert any(abs(b - expected) < 1e-12 for b in g.breakpoints)
    # q = sqrt(mu): the lower resonance collapses onto p = 0
    g2 = MomentumGrid.build(1.0, 1.0, 1e-4)
    assert 0.0 in g2.singular_points


def test_grid_clusters_near_singular_momenta():
    g = MomentumGrid.build(1.0, 0.3, 1e-5)
    for center in (0.7, 1.0, 1.3):
        n_close = np.sum(np.abs(g.nodes - center) < 1e-3)
        assert n_close >= 10, (center, n_close)
    # far from any kinematic point the mesh stays coarse
    assert np.sum(np.abs(g.nodes - 5.0) < 1e-3) == 0


def test_grid_refined_doubles_node_count_exactly():
    g = MomentumGrid.build(1.0, 0.4, 1e-3)
    g2 = g.refined(2)
    assert g2.size == 2 * g.size
    assert abs(g2.weights.sum() - g2.p_max) <= 1e-12 * g2.p_max
    assert g2.breakpoints == g.breakpoints
    with pytest.raises(PreconditionError):
        g.refined(1)


def test_grid_is_deterministic():
    a = MomentumGrid.build(1.0, 0.9, 1e-5)
    b = MomentumGrid.build(1.0, 0.9, 1e-5)
    assert a.nodes.tobytes() == b.nodes.tobytes()
    assert a.weights.tobytes() == b.weights.tobytes()


def test_grid_validation():
    with pytest.raises(DomainError):
        MomentumGrid.build(1.0, -0.1, 1e-3)
    with pytest.raises(DomainError):
        MomentumGrid.build(1.0, 0.0, 0.0)
    with pytest.raises(DomainError):
        MomentumGrid.build(math.nan, 0.0, 1e-3)
    with pytest.raises(DomainError):
        MomentumGrid.build(1.0, 0.0, 1e-3, p_max=-2.0)
    with pytest.raises(PreconditionError):
        MomentumGrid.build(1.0, 0.0, 1e-3, base_nodes=1)
    assert default_p_max(1.0) == pytest.approx(8.0 * math.sqrt(2.0), rel=1e-15)


# ---------------------------------------------------------------------------
# operator spec
# ---------------------------------------------------------------------------


def test_spec_validation():
    pp = PhysParams(mu=1.0, temp=0.1)
    with pytest.raises(PreconditionError):
        BSOperatorSpec(kernel="Z", q=0.0, sector="symmetric", params=pp, interaction=GAUSS)
    with pytest.raises(PreconditionError):
        BSOperatorSpec(kernel="N", q=0.0, sector="odd", params=pp, interaction=GAUSS)
    with pytest.raises(PreconditionError):
        BSOperatorSpec(kernel="K", q=0.5, sector="symmetric", params=pp, interaction=GAUSS)
    with pytest.raises(DomainError):
        BSOperatorSpec(kernel="N", q=-0.5, sector="symmetric", params=pp, interaction=GAUSS)
    with pytest.raises(PreconditionError):
        BSOperatorSpec(kernel="B", q=0.5, sector="symmetric", params=pp,
                       interaction=GAUSS, dim=2)
    with pytest.raises(PreconditionError):
        BSOperatorSpec(kernel="K", q=0.0, sector="antisymmetric", params=pp,
                       interaction=GAUSS, dim=2)
    with pytest.raises(PreconditionError):
        BSOperatorSpec(kernel="K", q=0.0, sector="symmetric", params=pp,
                       interaction=InteractionModel.delta(1.0), dim=3)


# ---------------------------------------------------------------------------
# matrix assembly
# ---------------------------------------------------------------------------


def test_q0_matrices_bitwise_identical_across_kernels():
    pp = PhysParams(mu=1.0, temp=0.05)
    grid = MomentumGrid.build(1.0, 0.0, 0.05)
    mats = {
        kern: build_bs_matrix(spec_for(kern, 0.0, pp, GAUSS, grid=grid))
        for kern in ("K", "B", "N")
    }
    assert np.array_equal(mats["K"], mats["B"])
    assert np.array_equal(mats["K"], mats["N"])
    tops = {k: top_eigenvalue(m) for k, m in mats.items()}
    assert abs(tops["K"] - tops["B"]) <= 1e-12 * max(1.0, abs(tops["K"]))
    assert abs(tops["K"] - tops["N"]) <= 1e-12 * max(1.0, abs(tops["K"]))


@pytest.mark.parametrize("q", [0.0, 0.4, 1.2])
def test_delta_interaction_is_rank_one(q):
    pp = PhysParams(mu=1.0, temp=0.05)
    strength = 1.3
    grid = MomentumGrid.build(1.0, q, 0.05)
    spec = spec_for("N", q, pp, InteractionModel.delta(strength), grid=grid)
    h = build_bs_matrix(spec)
    evals = np.linalg.eigvalsh(h)
    top = evals[-1]
    # rank one: every other eigenvalue is numerically zero
    assert np.max(np.abs(evals[:-1])) <= 1e-10 * top
    ref = strength * integrate_n_t_fullline(q, pp, p_tail=grid.p_max).truncated / (2.0 * math.pi)
    assert abs(top - ref) <= 1e-6 * ref
    # the antisymmetric sector sees nothing from a contact interaction
    h_a = build_bs_matrix(spec_for("N", q, pp, InteractionModel.delta(strength),
                                   sector="antisymmetric", grid=grid))
    assert np.all(h_a == 0.0)


def test_zero_interaction_gives_zero_matrix():
    cancel = InteractionModel.gaussian_difference(1.0, 1.0, 1.0, 1.0)
    pp = PhysParams(mu=1.0, temp=0.1)
    h = build_bs_matrix(spec_for("N", 0.5, pp, cancel))
    assert np.all(h == 0.0)
    assert top_eigenvalue(h) == 0.0


@pytest.mark.parametrize("q,temp", [(0.0, 0.05), (0.8, 0.1)])
def test_sector_ordering_for_nonnegative_vhat(q, temp):
    pp = PhysParams(mu=1.0, temp=temp)
    grid = MomentumGrid.build(1.0, q, temp)
    top_s = top_eigenvalue(build_bs_matrix(spec_for("N", q, pp, GAUSS, grid=grid)))
    top_a = top_eigenvalue(build_bs_matrix(
        spec_for("N", q, pp, GAUSS, sector="antisymmetric", grid=grid)))
    assert top_s >= top_a - 1e-12 * max(1.0, abs(top_s))


def test_kernel_ordering_n_above_b_for_nonnegative_v():
    # V >= 0 pointwise, so the pointwise bound B_T <= N_T lifts to the tops
    pp = PhysParams(mu=1.0, temp=0.2)
    q = 0.6
    grid = MomentumGrid.build(1.0, q, 0.2)
    top_b = top_eigenvalue(build_bs_matrix(spec_for("B", q, pp, GAUSS, grid=grid)))
    top_n = top_eigenvalue(build_bs_matrix(spec_for("N", q, pp, GAUSS, grid=grid)))
    assert top_n > top_b > 0.0


# ---------------------------------------------------------------------------
# eigenvalues
# ---------------------------------------------------------------------------


def test_top_eigenvalue_tiny_matrices():
    assert top_eigenvalue(np.array([[2.5]])) == 2.5
    assert top_eigenvalue(np.diag([1.0, 2.0, 3.0])) == pytest.approx(3.0, abs=1e-14)
    assert bottom_eigenvalue(np.diag([1.0, 2.0, 3.0])) == pytest.approx(1.0, abs=1e-14)


def test_top_eigenvalue_against_full_spectrum_oracle():
    rng = np.random.default_rng(20260815)
    a = rng.standard_normal((50, 50))
    sym = 0.5 * (a + a.T)
    oracle = np.linalg.eigvalsh(sym)
    scale = max(1.0, abs(oracle[-1]))
    assert abs(top_eigenvalue(sym) - oracle[-1]) <= 1e-10 * scale
    assert abs(bottom_eigenvalue(sym) - oracle[0]) <= 1e-10 * scale


def test_top_eigenvalue_validation():
    with pytest.raises(PreconditionError):
        top_eigenvalue(np.array([[0.0, 1.0], [0.0, 0.0]]))
    with pytest.raises(PreconditionError):
        top_eigenvalue(np.array([[math.inf, 0.0], [0.0, 1.0]]))
    with pytest.raises(PreconditionError):
        top_eigenvalue(np.zeros((2, 3)))
    with pytest.raises(PreconditionError):
        top_eigenvalue(np.zeros((0, 0)))


def test_compute_spectrum_records_small_refinement_delta():
    pp = PhysParams(mu=1.0, temp=1e-3)
    spec = spec_for("N", 0.9, pp, SPLIT)
    res = compute_spectrum(spec)
    assert res.kernel == "N" and res.sector == "symmetric" and res.q == 0.9
    assert res.grid_size == 2 * spec.grid.size
    assert res.refinement_delta <= 1e-6 * max(1.0, abs(res.top))
    coarse = compute_spectrum(spec, refine=False)
    assert math.isnan(coarse.refinement_delta)
    assert abs(coarse.top - res.top) <= 1e-6 * max(1.0, abs(res.top))


# ---------------------------------------------------------------------------
# symmetrization oracle: position-space nonsymmetric discretization
# ---------------------------------------------------------------------------


def test_symmetrized_momentum_build_matches_position_space_oracle():
    """A^{1/2} V A^{1/2} (momentum, folded) vs V^{1/2} A |V|^{1/2} (position).

    Both discretize the same momentum-truncated operator for a
    sign-changing interaction; their top eigenvalues must agree although
    one matrix is symmetric and the other is not.
    """
    model = InteractionModel.gaussian_difference(1.0, 0.9, 0.6, 1.3)
    mu, temp, q, p_cut = 0.7, 0.4, 0.5, 1.6
    pp = PhysParams(mu=mu, temp=temp)

    grid = MomentumGrid.build(mu, q, temp, p_max=p_cut, base_nodes=40, octave_nodes=12)
    tops = {}
    for sector in ("symmetric", "antisymmetric"):
        h = build_bs_matrix(spec_for("N", q, pp, model, sector=sector, grid=grid))
        tops[sector] = top_eigenvalue(h)
    top_momentum = max(tops.values())

    # position grid: 40 Gauss-Legendre nodes covering the numerical support of V
    x_half = 8.0
    t, w = np.polynomial.legendre.leggauss(40)
    x = x_half * t
    xw = x_half * w
    vvals = model.value(x)

    bps = fermi_breakpoints(mu, q, 0.0, p_cut, temp)

    def kernel_slice(z):
        def f(p):
            return n_t(p, q, pp) * np.cos(p * z)
        return panel_integrate(f, bps).value / math.pi

    zmat = x[:, None] - x[None, :]
    uniq, inv = np.unique(np.round(np.abs(zmat), 14), return_inverse=True)
    avals = np.array([kernel_slice(z) for z in uniq])
    amat = avals[inv].reshape(zmat.shape)

    g = (np.sign(vvals) * np.sqrt(np.abs(vvals)))[:, None] * amat \
        * (np.sqrt(np.abs(vvals)) * xw)[None, :]
    evals = scipy.linalg.eig(g, right=False)
    i_top = int(np.argmax(evals.real))
    assert abs(evals[i_top].imag) <= 1e-9 * max(1.0, abs(evals[i_top].real))
    top_position = float(evals[i_top].real)

    assert abs(top_position - top_momentum) <= 1e-8 * max(1.0, abs(top_momentum))


# ---------------------------------------------------------------------------
# radial mode-0 reduction (dim 2 and 3)
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("dim", [2, 3])
def test_angular_mode0_matches_direct_quadrature(dim):
    p = np.array([0.2, 0.7, 1.0, 1.6, 2.4, 3.5])
    core = _angular_mode0(GAUSS, p, dim)

    def direct(pi, pj):
        if dim == 2:
            val, _ = scipy.integrate.quad(
                lambda phi: v_hat(GAUSS, math.sqrt(max(
                    pi * pi + pj * pj - 2.0 * pi * pj * math.cos(phi), 0.0)), dim=2),
                0.0, math.pi, epsabs=1e-13, epsrel=1e-13,
            )
            return 2.0 * val / (2.0 * math.pi)
        val, _ = scipy.integrate.quad(
            lambda t: v_hat(GAUSS, math.sqrt(max(
                pi * pi + pj * pj - 2.0 * pi * pj * t, 0.0)), dim=3),
            -1.0, 1.0, epsabs=1e-13, epsrel=1e-13,
        )
        return 2.0 * math.pi * val / (2.0 * math.pi) ** 1.5

    for i in range(p.size):
        for j in range(i, p.size):
            ref = direct(p[i], p[j])
            assert abs(core[i, j] - ref) <= 1e-9 * max(1.0, abs(ref))
            assert core[i, j] == pytest.approx(core[j, i], rel=1e-13)


def test_radial_mode0_matrix_finite_and_positive_top():
    pp = PhysParams(mu=1.0, temp=0.1)
    grid = MomentumGrid.build(1.0, 0.0, 0.1, base_nodes=16, octave_nodes=6)
    for dim in (2, 3):
        spec = BSOperatorSpec(kernel="K", q=0.0, sector="symmetric", params=pp,
                              interaction=GAUSS, grid=grid, dim=dim)
        h = build_bs_matrix(spec)
        assert np.all(np.isfinite(h))
        assert top_eigenvalue(h) > 0.0


# ---------------------------------------------------------------------------
# sup over q
# ---------------------------------------------------------------------------

FAST_SUP = dict(base_nodes=14, octave_nodes=6)


def test_sup_over_q_nonnegative_vhat_maximizes_at_zero():
    pp = PhysParams(mu=1.0, temp=1e-4)
    res = sup_over_q("N", pp, GAUSS, **FAST_SUP)
    # the maximizer sits at q = 0 up to per-q discretization noise
    assert 0.0 <= res.q_star <= 1e-6
    assert not res.boundary_hit
    grid = MomentumGrid.build(1.0, 0.0, 1e-4, **FAST_SUP)
    top0 = top_eigenvalue(build_bs_matrix(spec_for("N", 0.0, pp, GAUSS, grid=grid)))
    assert res.value == pytest.approx(top0, rel=1e-7)
    assert res.value >= top0 - 1e-12


def test_sup_over_q_split_interaction_peaks_near_sqrt_mu():
    pp = PhysParams(mu=1.0, temp=1e-6)
    res = sup_over_q("N", pp, SPLIT, **FAST_SUP)
    assert abs(res.q_star - 1.0) < 0.05
    assert not res.boundary_hit

    # dense 512-point oracle scan with the same grid parameters; the peak at
    # sqrt(mu) is only ~T/sqrt(mu) wide, so the oracle clusters there too
    offsets = 10.0 ** np.linspace(-8.0, -0.3, 80)
    qs = np.unique(np.concatenate([
        np.linspace(0.0, 4.0, 271),
        1.0 - offsets, 1.0 + offsets, [1.0],
    ]))
    assert qs.size <= 512
    vals = []
    for qv in qs:
        grid = MomentumGrid.build(1.0, qv, 1e-6, **FAST_SUP)
        vals.append(top_eigenvalue(build_bs_matrix(
            spec_for("N", qv, pp, SPLIT, grid=grid))))
    vals = np.asarray(vals)
    i = int(np.argmax(vals))
    assert abs(qs[i] - 1.0) < 0.02
    # the refined maximizer cannot fall below the best dense sample
    assert res.value >= vals[i] - 1e-6 * max(1.0, vals[i])
    assert abs(res.q_star - qs[i]) < 0.01


def test_sup_over_q_b_kernel_stays_finite_at_high_temperature():
    pp = PhysParams(mu=1.0, temp=1.5)
    res = sup_over_q("B", pp, GAUSS, **FAST_SUP)
    assert np.isfinite(res.value)
    # B_T <= 1/(2T): the top is bounded by the zero-coupling scale
    assert 0.0 < res.value < 2.0
    assert not res.boundary_hit


def test_sup_over_q_is_deterministic():
    pp = PhysParams(mu=1.0, temp=1e-3)
    r1 = sup_over_q("N", pp, SPLIT, **FAST_SUP)
    r2 = sup_over_q("N", pp, SPLIT, **FAST_SUP)
    assert (r1.q_star, r1.value, r1.boundary_hit, r1.evaluations) == (
        r2.q_star, r2.value, r2.boundary_hit, r2.evaluations)
    assert isinstance(r1, SupQResult)


def test_sup_over_q_validation():
    pp = PhysParams(mu=1.0, temp=0.1)
    with pytest.raises(PreconditionError):
        sup_over_q("K", pp, GAUSS)
    with pytest.raises(PreconditionError):
        sup_over_q("N", pp, GAUSS, q_max=0.5)
    with pytest.raises(PreconditionError):
        sup_over_q("N", PhysParams(mu=-1.0, temp=0.1), GAUSS)
    with pytest.raises(PreconditionError):
        sup_over_q("N", pp, GAUSS, sector="odd")
