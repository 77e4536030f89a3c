"""Model builders: deformed canonical pairs, ladders, oscillator Hamiltonians.

The deformed position operator is ``X = (1 + tau*p^2) x0 + i*hbar*gamma_t*p``
with ``x0 = i*hbar*D`` acting in momentum space, so that the commutator
``[X, P] = i*hbar*(1 + tau*P^2)`` holds exactly in action on stencil probes.
Two quadratic non-Hermitian oscillators are built on top of the pair: one
parameterized by a single anticommutator coupling ``mu``, one by ladder
couplings ``(lambda, delta_t)``.  A diagonal gauge map removes the
``gamma_t`` term up to second-order grid error.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .gridops import (
    Grid,
    NumericGuardError,
    Operator,
    action_residual,
    adjoint,
    anticommutator,
    commutator,
    derivative_matrix,
    hermitian_matrix_function,
    masked_norm,
    stencil_probes,
)

__all__ = [
    "PhysParams",
    "QDeformParams",
    "LadderOps",
    "build_canonical_pair",
    "build_deformed_pair",
    "build_ladder",
    "build_swanson_bf",
    "build_swanson_jr",
    "default_number_operator",
    "canonical_commutator_residual",
    "deformed_algebra_residual",
    "gauge_transform",
    "gauge_conjugation_residual",
]


@dataclass(frozen=True)
class PhysParams:
    """Physical constants and couplings in natural units.

    ``mu`` is the anticommutator coupling; ``lam``/``delta_t`` the ladder
    couplings; ``tau`` the commutator-deformation strength; ``gamma_t``
    the removable linear term's coefficient.
    """

    hbar: float = 1.0
    mass: float = 1.0
    omega: float = 1.0
    mu: float = 0.0
    lam: float = 0.0
    delta_t: float = 0.0
    tau: float = 0.0
    gamma_t: float = 0.0

    def __post_init__(self) -> None:
        for name in ("hbar", "mass", "omega"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.tau < 0:
            raise ValueError("tau must be nonnegative")


def _identity_map(t: np.ndarray) -> np.ndarray:
    return t


@dataclass(frozen=True)
class QDeformParams:
    """Parameters of the q-deformed commutation relation.

    The coefficients must satisfy ``4*alpha*gamma = q^2 + 1`` (within 1e-12)
    and ``alpha*delta + beta*gamma != 0`` (it appears in a denominator).
    ``f`` maps number-operator eigenvalues to the exponent of ``q``.
    """

    q: float
    alpha: float
    beta: float
    gamma: float
    delta: float
    f: Callable[[np.ndarray], np.ndarray] = field(default=_identity_map)

    def __post_init__(self) -> None:
        if not self.q > 0:
            raise ValueError("q must be positive")
        if abs(4.0 * self.alpha * self.gamma - (self.q**2 + 1.0)) > 1e-12:
            raise ValueError(
                "constraint violated: 4*alpha*gamma must equal q^2 + 1 within 1e-12"
            )
        if self.alpha * self.delta + self.beta * self.gamma == 0.0:
            raise ValueError("alpha*delta + beta*gamma must be nonzero")


@dataclass(frozen=True)
class LadderOps:
    """Lowering/raising pair built by formula, with the adjoint defect.

    ``a_dag`` is defined by its formula, not as the matrix adjoint of ``a``;
    for a non-Hermitian X the two differ, and ``adjoint_defect`` reports the
    masked relative discrepancy instead of hiding it.
    """

    a: Operator
    a_dag: Operator
    adjoint_defect: float


def build_canonical_pair(grid: Grid, pp: PhysParams) -> tuple[Operator, Operator]:
    """Undeformed pair: momentum is diagonal, position is i*hbar*D."""
    p0 = Operator(np.diag(grid.points).astype(complex), grid)
    x0 = Operator(1j * pp.hbar * derivative_matrix(grid).entries, grid)
    return x0, p0


def build_deformed_pair(grid: Grid, pp: PhysParams) -> tuple[Operator, Operator]:
    """Deformed pair: X = (1 + tau*p^2) x0 + i*hbar*gamma_t*p, P = diag(p)."""
    x0, p0 = build_canonical_pair(grid, pp)
    g = 1.0 + pp.tau * grid.points**2
    x = np.diag(g) @ x0.entries + 1j * pp.hbar * pp.gamma_t * np.diag(grid.points)
    return Operator(x, grid), p0


def build_ladder(x: Operator, p: Operator, pp: PhysParams) -> LadderOps:
    """Ladder pair a = (P - i*omega*X)/sqrt(2*m*hbar*omega), a_dag likewise."""
    scale = 1.0 / np.sqrt(2.0 * pp.mass * pp.hbar * pp.omega)
    a = Operator(scale * (p.entries - 1j * pp.omega * x.entries), x.grid)
    a_dag = Operator(scale * (p.entries + 1j * pp.omega * x.entries), x.grid)
    diff = Operator(adjoint(a).entries - a_dag.entries, x.grid)
    denom = masked_norm(a_dag)
    defect = masked_norm(diff) / denom if denom > 0 else 0.0
    return LadderOps(a, a_dag, defect)


def build_swanson_bf(x: Operator, p: Operator, pp: PhysParams) -> Operator:
    """H = P^2/(2m) + (m*omega^2/2) X^2 + i*mu*{X, P}."""
    h = (
        p.entries @ p.entries / (2.0 * pp.mass)
        + 0.5 * pp.mass * pp.omega**2 * (x.entries @ x.entries)
        + 1j * pp.mu * anticommutator(x, p).entries
    )
    return Operator(h, x.grid)


def build_swanson_jr(a: Operator, a_dag: Operator, pp: PhysParams) -> Operator:
    """H = omega*a_dag*a + lam*a^2 + delta_t*a_dag^2 + omega/2.

    Hermitian whenever ``lam == delta_t`` (a warning notes the degenerate
    choice); non-Hermitian otherwise.
    """
    if pp.lam == pp.delta_t:
        warnings.warn(
            "lam == delta_t: the ladder Hamiltonian is Hermitian",
            stacklevel=2,
        )
    n = a.dim
    h = (
        pp.omega * (a_dag.entries @ a.entries)
        + pp.lam * (a.entries @ a.entries)
        + pp.delta_t * (a_dag.entries @ a_dag.entries)
        + 0.5 * pp.omega * np.eye(n)
    )
    return Operator(h, a.grid)


def default_number_operator(a: Operator, a_dag: Operator) -> Operator:
    """Hermitian part of a_dag*a — the default N for the algebra check."""
    nd = a_dag.entries @ a.entries
    return Operator(0.5 * (nd + nd.conj().T), a.grid)


def canonical_commutator_residual(x0: Operator, p0: Operator, pp: PhysParams) -> float:
    """Action residual of [x0, p0] = i*hbar on stencil probes."""
    grid = x0.grid
    target = 1j * pp.hbar * np.eye(grid.n_points)
    return action_residual(commutator(x0, p0), target, stencil_probes(grid), grid)


def deformed_algebra_residual(
    x: Operator,
    p: Operator,
    n_op: Operator,
    qp: QDeformParams,
    pp: PhysParams,
) -> float:
    """Residual of the q-deformed commutation relation in action.

    Measures ``[X, P]`` against
    ``i*hbar*q^{f(N)}*(alpha*delta + beta*gamma) +
    i*hbar*(q^2-1)/(alpha*delta + beta*gamma) *
    (delta*gamma*X^2 + alpha*beta*P^2 + i*alpha*delta*XP - i*beta*gamma*PX)``
    on stencil probes.
    """
    combo = qp.alpha * qp.delta + qp.beta * qp.gamma
    grid = x.grid
    qf = hermitian_matrix_function(n_op, lambda t: qp.q ** np.asarray(qp.f(t)))
    rhs = 1j * pp.hbar * combo * qf.entries
    if qp.q != 1.0:
        xe, pe = x.entries, p.entries
        rhs = rhs + (1j * pp.hbar * (qp.q**2 - 1.0) / combo) * (
            qp.delta * qp.gamma * (xe @ xe)
            + qp.alpha * qp.beta * (pe @ pe)
            + 1j * qp.alpha * qp.delta * (xe @ pe)
            - 1j * qp.beta * qp.gamma * (pe @ xe)
        )
    return action_residual(commutator(x, p), rhs, stencil_probes(grid), grid)


def gauge_transform(pp: PhysParams, grid: Grid) -> tuple[Operator, Operator]:
    """Diagonal gauge pair (S, S^-1) that removes the gamma_t term.

    ``S = diag((1 + tau*p^2)^(-gamma_t/(2*tau)))`` for tau > 0 and its
    ``exp(-gamma_t*p^2/2)`` limit at tau = 0.  Conjugating as
    ``S^-1 X(gamma_t) S`` recovers X(0) up to second-order grid error
    (see ``gauge_conjugation_residual``).
    """
    p = grid.points
    if pp.tau > 0:
        log_s = (-pp.gamma_t / (2.0 * pp.tau)) * np.log1p(pp.tau * p**2)
    else:
        log_s = -0.5 * pp.gamma_t * p**2
    span = log_s.max() - log_s.min()
    if span > np.log(1e14):
        raise NumericGuardError(
            "gauge factor dynamic range exceeds the supported overflow bound"
        )
    s = np.exp(log_s)
    return (
        Operator(np.diag(s).astype(complex), grid),
        Operator(np.diag(1.0 / s).astype(complex), grid),
    )


def gauge_conjugation_residual(pp: PhysParams, grid: Grid) -> float:
    """Measured contract of the gauge map on stencil probes.

    Compares ``S^-1 X(gamma_t) S`` against X built with gamma_t = 0.  The
    value is floored at second order in the spacing because the gauge profile
    is not polynomial; it is reported, never assumed.
    """
    import dataclasses

    x_g, _ = build_deformed_pair(grid, pp)
    x_0, _ = build_deformed_pair(grid, dataclasses.replace(pp, gamma_t=0.0))
    s, s_inv = gauge_transform(pp, grid)
    conj = s_inv.entries @ x_g.entries @ s.entries
    return action_residual(conj, x_0.entries, stencil_probes(grid), grid)
