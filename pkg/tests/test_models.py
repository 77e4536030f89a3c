"""Canonical/deformed pairs, ladders, both oscillator models, algebra, gauge."""
import dataclasses

import numpy as np
import pytest

from qhm.gridops import (
    Grid,
    NumericGuardError,
    Operator,
    action_residual,
    adjoint,
    anticommutator,
    commutator,
    masked_norm,
    stencil_probes,
)
from qhm.models import (
    PhysParams,
    QDeformParams,
    build_canonical_pair,
    build_deformed_pair,
    build_ladder,
    build_swanson_bf,
    build_swanson_jr,
    canonical_commutator_residual,
    default_number_operator,
    deformed_algebra_residual,
    gauge_conjugation_residual,
    gauge_transform,
)
from qhm.verify import spectrum

GRID = Grid(257, 8.0, 0.25)


# ---------------------------------------------------------------- params


def test_phys_params_defaults():
    pp = PhysParams()
    assert (pp.hbar, pp.mass, pp.omega) == (1.0, 1.0, 1.0)
    assert (pp.mu, pp.lam, pp.delta_t, pp.tau, pp.gamma_t) == (0, 0, 0, 0, 0)


@pytest.mark.parametrize("bad", [{"hbar": 0.0}, {"mass": -1.0}, {"omega": 0.0},
                                 {"tau": -0.01}])
def test_phys_params_validation(bad):
    with pytest.raises(ValueError):
        PhysParams(**bad)


def test_qdeform_params_constraint_enforced():
    QDeformParams(q=1.0, alpha=1.0, beta=0.0, gamma=0.5, delta=1.0)  # 4αγ = 2 = q²+1
    with pytest.raises(ValueError, match="constraint"):
        QDeformParams(q=1.0, alpha=1.0, beta=0.0, gamma=0.6, delta=1.0)


def test_qdeform_params_denominator_nonzero():
    with pytest.raises(ValueError, match="nonzero"):
        QDeformParams(q=1.0, alpha=1.0, beta=-2.0, gamma=0.5, delta=1.0)


def test_qdeform_params_positive_q():
    with pytest.raises(ValueError, match="q"):
        QDeformParams(q=-1.0, alpha=1.0, beta=0.0, gamma=0.5, delta=1.0)


# ---------------------------------------------------------------- canonical pair


def test_canonical_commutator_machine_exact_in_action():
    pp = PhysParams()
    x0, p0 = build_canonical_pair(GRID, pp)
    assert canonical_commutator_residual(x0, p0, pp) < 1e-14


def test_canonical_commutator_scales_with_hbar():
    pp = PhysParams(hbar=2.0)
    x0, p0 = build_canonical_pair(GRID, pp)
    # [x0, p0] = 2i on interior action; against the doubled target the
    # residual stays machine-small, against the undoubled one it is ~1/2
    assert canonical_commutator_residual(x0, p0, pp) < 1e-14
    wrong = 1j * np.eye(GRID.n_points)
    r = action_residual(commutator(x0, p0), wrong, stencil_probes(GRID), GRID)
    assert r > 0.4


def test_momentum_is_hermitian_and_position_interior_hermitian():
    x0, p0 = build_canonical_pair(GRID, PhysParams())
    assert np.abs(p0.entries - adjoint(p0).entries).max() == 0.0
    sl = GRID.interior()
    block = x0.entries[sl, sl]
    assert np.abs(block - block.conj().T).max() < 1e-15


# ---------------------------------------------------------------- deformed pair


def test_deformed_pair_reduces_to_canonical():
    pp = PhysParams(tau=0.0, gamma_t=0.0)
    x0, _ = build_canonical_pair(GRID, pp)
    x, _ = build_deformed_pair(GRID, pp)
    assert np.abs(x.entries - x0.entries).max() == 0.0


def test_deformed_row_prefactor():
    pp = PhysParams(tau=0.1)
    x0, _ = build_canonical_pair(GRID, pp)
    x, _ = build_deformed_pair(GRID, pp)
    j = int(np.argmin(np.abs(GRID.points - 2.0)))
    assert GRID.points[j] == pytest.approx(2.0)
    assert np.allclose(x.entries[j], 1.4 * x0.entries[j], rtol=1e-14)


@pytest.mark.parametrize("tau", [0.0, 0.01, 0.1])
@pytest.mark.parametrize("gamma_t", [0.0, 0.3])
def test_deformed_commutator_machine_exact_in_action(tau, gamma_t):
    # [X, P] = i*hbar*(1 + tau*P^2); the gamma_t term never contributes.
    pp = PhysParams(tau=tau, gamma_t=gamma_t)
    x, p = build_deformed_pair(GRID, pp)
    target = 1j * pp.hbar * np.diag(1.0 + tau * GRID.points**2)
    r = action_residual(commutator(x, p), target, stencil_probes(GRID), GRID)
    assert r < 1e-14


def test_adjoint_defect_identity():
    # X† − X acts like 2*i*hbar*tau*P on the constant probe (exactly,
    # because the defect profile is quadratic).
    pp = PhysParams(tau=0.1)
    x, _ = build_deformed_pair(GRID, pp)
    defect = adjoint(x).entries - x.entries
    target = 2j * pp.hbar * pp.tau * np.diag(GRID.points)
    ones = np.ones((GRID.n_points, 1)) / np.sqrt(GRID.n_points)
    assert action_residual(defect, target, ones, GRID) < 1e-13


# ---------------------------------------------------------------- ladder


def test_ladder_adjoint_defect_vanishes_undeformed():
    pp = PhysParams()
    x, p = build_deformed_pair(GRID, pp)
    lad = build_ladder(x, p, pp)
    assert lad.adjoint_defect < 1e-12


def test_ladder_adjoint_defect_matches_position_defect():
    # adjoint(a) − a_dag = i*omega*(X† − X)/sqrt(2*m*hbar*omega) exactly.
    pp = PhysParams(tau=0.1)
    x, p = build_deformed_pair(GRID, pp)
    lad = build_ladder(x, p, pp)
    lhs = masked_norm(Operator(adjoint(lad.a).entries - lad.a_dag.entries, GRID))
    scale = pp.omega / np.sqrt(2.0 * pp.mass * pp.hbar * pp.omega)
    rhs = scale * masked_norm(Operator(adjoint(x).entries - x.entries, GRID))
    assert lhs == pytest.approx(rhs, rel=1e-12)
    assert lad.adjoint_defect == pytest.approx(1.782824e-2, rel=1e-4)


def test_ladder_commutator_is_identity_undeformed():
    pp = PhysParams()
    x, p = build_deformed_pair(GRID, pp)
    lad = build_ladder(x, p, pp)
    eye = np.eye(GRID.n_points)
    r = action_residual(commutator(lad.a, lad.a_dag), eye, stencil_probes(GRID), GRID)
    assert r < 1e-13


# ---------------------------------------------------------------- models


def test_anticommutator_model_antihermitian_part():
    # H − H† = 2*i*mu*{x0, p0} at tau=0: masked norms agree to near machine.
    pp = PhysParams(mu=0.1)
    x, p = build_deformed_pair(GRID, pp)
    h = build_swanson_bf(x, p, pp)
    lhs = masked_norm(Operator(h.entries - adjoint(h).entries, GRID))
    rhs = 2.0 * abs(pp.mu) * masked_norm(anticommutator(x, p))
    assert lhs == pytest.approx(rhs, rel=1e-12)


def test_anticommutator_model_linear_in_mu():
    x, p = build_deformed_pair(GRID, PhysParams())
    h1 = build_swanson_bf(x, p, PhysParams(mu=0.07))
    h2 = build_swanson_bf(x, p, PhysParams(mu=0.03))
    h0 = build_swanson_bf(x, p, PhysParams(mu=0.0))
    h12 = build_swanson_bf(x, p, PhysParams(mu=0.1))
    diff = h1.entries + h2.entries - h0.entries - h12.entries
    assert np.abs(diff).max() < 1e-13 * np.abs(h12.entries).max()


def test_anticommutator_model_hermitian_oscillator_levels():
    # mu=0, tau=0: first five levels within 1e-2 of n+1/2 at 513/10.
    g = Grid(513, 10.0, 0.25)
    pp = PhysParams(mu=0.0)
    x, p = build_deformed_pair(g, pp)
    h = build_swanson_bf(x, p, pp)
    s = spectrum(h, 6)
    errs = [abs(z.real - (i + 0.5)) for i, z in enumerate(s.values)]
    assert max(errs[:5]) < 1e-2
    assert errs[5] < 2e-2  # sixth level sits just past 1e-2 at this spacing


@pytest.mark.xfail(
    strict=True,
    reason="second-order spacing error: the sixth oscillator level at "
    "n_points=513, p_max=10 misses n+1/2 by 1.17e-2, just over the 1e-2 "
    "bound that the first five levels satisfy",
)
def test_anticommutator_model_six_levels_at_default_spectra_grid():
    g = Grid(513, 10.0, 0.25)
    pp = PhysParams(mu=0.0)
    x, p = build_deformed_pair(g, pp)
    h = build_swanson_bf(x, p, pp)
    s = spectrum(h, 6)
    errs = [abs(z.real - (i + 0.5)) for i, z in enumerate(s.values)]
    assert max(errs) < 1e-2


def test_ladder_model_hermitian_when_couplings_match():
    pp = PhysParams(lam=0.04, delta_t=0.04)
    x, p = build_deformed_pair(GRID, pp)
    lad = build_ladder(x, p, pp)
    with pytest.warns(UserWarning, match="Hermitian"):
        h = build_swanson_jr(lad.a, lad.a_dag, pp)
    rel = masked_norm(Operator(h.entries - adjoint(h).entries, GRID), relative_to=[h])
    assert rel < 1e-10


def test_ladder_model_ground_state_shift():
    # The grid realizes the n + 1/2 ladder for the bare model (lam=delta_t=0),
    # not n + 1: levels land on 0.5, 1.5, 2.5, 3.5 within 1e-2.
    pp = PhysParams()
    x, p = build_deformed_pair(GRID, pp)
    lad = build_ladder(x, p, pp)
    with pytest.warns(UserWarning):
        h = build_swanson_jr(lad.a, lad.a_dag, pp)
    s = spectrum(h, 4)
    for i, z in enumerate(s.values):
        assert abs(z.real - (i + 0.5)) < 1e-2
        assert abs(z.real - (i + 1.0)) > 0.4


def test_ladder_model_real_spectrum_off_diagonal_couplings():
    pp = PhysParams(lam=-0.05, delta_t=0.05)
    x, p = build_deformed_pair(GRID, pp)
    lad = build_ladder(x, p, pp)
    h = build_swanson_jr(lad.a, lad.a_dag, pp)
    s = spectrum(h, 6)
    assert s.reality_measure < 1e-6


# ---------------------------------------------------------------- q-algebra


def _number_op(grid, pp):
    x, p = build_deformed_pair(grid, pp)
    lad = build_ladder(x, p, pp)
    return default_number_operator(lad.a, lad.a_dag)


def test_algebra_q1_reduces_to_canonical():
    pp = PhysParams()
    qp = QDeformParams(q=1.0, alpha=1.0, beta=0.0, gamma=0.5, delta=1.0)
    x, p = build_deformed_pair(GRID, pp)
    r = deformed_algebra_residual(x, p, _number_op(GRID, pp), qp, pp)
    assert r < 1e-12


def test_algebra_q1_deformed_pair_residual_golden():
    pp = PhysParams(tau=0.1)
    qp = QDeformParams(q=1.0, alpha=1.0, beta=0.0, gamma=0.5, delta=1.0)
    x, p = build_deformed_pair(GRID, pp)
    r = deformed_algebra_residual(x, p, _number_op(GRID, pp), qp, pp)
    assert r == pytest.approx(0.4726624, rel=1e-5)


def test_algebra_q_above_one_golden():
    # small window keeps q^N inside the overflow guard
    g = Grid(65, 4.0, 0.25)
    pp = PhysParams()
    q = 1.1
    qp = QDeformParams(q=q, alpha=1.0, beta=0.0, gamma=(q**2 + 1) / 4, delta=1.0)
    r = deformed_algebra_residual(*build_deformed_pair(g, pp), _number_op(g, pp), qp, pp)
    assert r == pytest.approx(0.240183, rel=1e-5)


def test_algebra_q_above_one_overflow_guard_on_wide_window():
    pp = PhysParams()
    q = 1.1
    qp = QDeformParams(q=q, alpha=1.0, beta=0.0, gamma=(q**2 + 1) / 4, delta=1.0)
    x, p = build_deformed_pair(GRID, pp)
    with pytest.raises(NumericGuardError):
        deformed_algebra_residual(x, p, _number_op(GRID, pp), qp, pp)


def test_algebra_rescale_invariance_at_q1():
    # (alpha, gamma, delta) -> (3*alpha, gamma/3, delta/3) preserves both the
    # constraint and alpha*delta + beta*gamma, so the residual is unchanged.
    pp = PhysParams()
    x, p = build_deformed_pair(GRID, pp)
    n_op = _number_op(GRID, pp)
    qp1 = QDeformParams(q=1.0, alpha=1.0, beta=0.0, gamma=0.5, delta=1.0)
    qp3 = QDeformParams(q=1.0, alpha=3.0, beta=0.0, gamma=0.5 / 3.0, delta=1.0 / 3.0)
    r1 = deformed_algebra_residual(x, p, n_op, qp1, pp)
    r3 = deformed_algebra_residual(x, p, n_op, qp3, pp)
    assert r1 == pytest.approx(r3, abs=1e-14)


# ---------------------------------------------------------------- gauge


def test_gauge_identity_when_term_absent():
    s, s_inv = gauge_transform(PhysParams(tau=0.1, gamma_t=0.0), GRID)
    assert np.abs(s.entries - np.eye(GRID.n_points)).max() == 0.0
    assert np.abs(s_inv.entries - np.eye(GRID.n_points)).max() == 0.0


def test_gauge_diagonal_formula_and_inverse():
    pp = PhysParams(tau=0.1, gamma_t=0.3)
    s, s_inv = gauge_transform(pp, GRID)
    expect = (1.0 + 0.1 * GRID.points**2) ** (-0.3 / 0.2)
    assert np.allclose(np.diag(s.entries).real, expect, rtol=1e-12)
    prod = s.entries @ s_inv.entries
    assert np.allclose(prod, np.eye(GRID.n_points), atol=1e-12)


def test_gauge_scalar_limit_matches_exponential():
    # (1+tau)^(-1/(2 tau)) at p=1 approaches e^(-1/2) as tau -> 0
    g = Grid(5, 1.0, 0.0)
    s_small, _ = gauge_transform(PhysParams(tau=1e-6, gamma_t=1.0), g)
    assert s_small.entries[-1, -1].real == pytest.approx(np.exp(-0.5), abs=1e-5)
    s_zero, _ = gauge_transform(PhysParams(tau=0.0, gamma_t=1.0), g)
    assert s_zero.entries[-1, -1].real == pytest.approx(np.exp(-0.5), rel=1e-14)


def test_gauge_overflow_guard():
    with pytest.raises(NumericGuardError):
        gauge_transform(PhysParams(tau=0.0, gamma_t=3.0), Grid(257, 8.0, 0.25))


def test_gauge_conjugation_removes_linear_term():
    pp = PhysParams(mu=0.1, tau=0.1, gamma_t=0.3)
    r = gauge_conjugation_residual(pp, Grid(513, 10.0, 0.25))
    assert r < 1e-3
    assert r == pytest.approx(2.123e-4, rel=1e-2)


@pytest.mark.xfail(
    strict=True,
    reason="the gauge profile is non-polynomial, so conjugation carries a "
    "second-order spacing floor (~2e-4 at n_points=513, p_max=10); the "
    "1e-8 contract is unreachable on dense difference grids",
)
def test_gauge_conjugation_letter_contract():
    pp = PhysParams(mu=0.1, tau=0.1, gamma_t=0.3)
    assert gauge_conjugation_residual(pp, Grid(513, 10.0, 0.25)) < 1e-8


def test_gauge_similarity_preserves_low_spectrum():
    pp = PhysParams(mu=0.1, tau=0.05, gamma_t=0.2)
    g = Grid(513, 10.0, 0.25)
    x, p = build_deformed_pair(g, pp)
    h = build_swanson_bf(x, p, pp)
    s, s_inv = gauge_transform(pp, g)
    h_sim = Operator(s_inv.entries @ h.entries @ s.entries, g)
    e1 = spectrum(h, 6).values
    e2 = spectrum(h_sim, 6).values
    assert max(abs(a.real - b.real) for a, b in zip(e1, e2)) < 1e-6


@pytest.mark.parametrize("tau,gamma_t", [(0.1, 0.1), (0.1, 0.3)])
def test_gauge_similarity_stronger_coupling_characterization(tau, gamma_t):
    # non-normality grows with the gauge weight; eigenvalue agreement
    # degrades to the 1e-5 scale but stays far below the level spacing
    pp = PhysParams(mu=0.1, tau=tau, gamma_t=gamma_t)
    g = Grid(513, 10.0, 0.25)
    x, p = build_deformed_pair(g, pp)
    h = build_swanson_bf(x, p, pp)
    s, s_inv = gauge_transform(pp, g)
    h_sim = Operator(s_inv.entries @ h.entries @ s.entries, g)
    e1 = spectrum(h, 6).values
    e2 = spectrum(h_sim, 6).values
    assert max(abs(a.real - b.real) for a, b in zip(e1, e2)) < 1e-4
