"""Transition probability between pure states, by closed form and by an
independent constrained-optimization route.

The operational quantity is the acceptance probability of the extremal
effect that accepts the target state with certainty. Any effect E with
E|phi> = |phi> and 0 <= E <= I decomposes as |phi><phi| (+) F on the
orthogonal complement; the minimal one (F = 0) is the rank-1 projector and
gives |<phi|psi>|^2. The optimizer extremizes over F numerically and serves
as a cross-check that never consults the closed form.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from .linalg import DensityMatrix, Effect, StateVector, hermitize

TauMethod = Literal["closed_form", "optimized"]


@dataclass(frozen=True)
class TransitionResult:
    """Transition probability with provenance of the computation route.

    ``residual`` is the largest constraint violation of the effect the value
    was read from (0 for the closed form); ``iterations`` is 0 for the
    closed form.
    """

    value: float
    method: TauMethod
    iterations: int = 0
    residual: float = 0.0

    def __post_init__(self):
        if not -1e-9 <= self.value <= 1.0 + 1e-9:
            raise ValueError(f"transition probability {self.value} outside [0, 1]")
        object.__setattr__(self, "value", float(min(1.0, max(0.0, self.value))))


@dataclass(frozen=True)
class OptimizerConfig:
    """Projected-gradient settings for the optimization route.

    ``tolerance`` is the guaranteed agreement with the closed form; the
    iteration stops once the projected step moves less than a thousandth of
    it, leaving a wide margin.
    """

    max_iters: int = 5000
    tolerance: float = 1e-6
    max_dim: int = 16
    initial_step: float = 1.0
    step_shrink: float = 0.5
    armijo: float = 1e-4


class ConvergenceError(RuntimeError):
    """Optimizer ran out of iterations; carries the best value found."""

    def __init__(self, message: str, best_value: float, residual: float, iterations: int):
        super().__init__(message)
        self.best_value = best_value
        self.residual = residual
        self.iterations = iterations


def _check_dims(psi: StateVector, phi: StateVector) -> None:
    if psi.dim != phi.dim:
        raise ValueError(f"dimension mismatch: {psi.dim} vs {phi.dim}")


def tau_closed(psi: StateVector, phi: StateVector) -> TransitionResult:
    """Closed form: squared modulus of the inner product."""
    _check_dims(psi, phi)
    overlap = np.vdot(phi.amplitudes, psi.amplitudes)
    return TransitionResult(value=float(abs(overlap) ** 2), method="closed_form")


def tau_extremal_effect(phi: StateVector) -> Effect:
    """The minimal effect accepting phi with certainty: |phi><phi|."""
    return Effect(phi.projector())


def tau_mixed(rho: DensityMatrix, phi: StateVector) -> float:
    """Affine extension to mixed inputs: trace(rho |phi><phi|)."""
    if rho.dim != phi.dim:
        raise ValueError(f"dimension mismatch: {rho.dim} vs {phi.dim}")
    val = float(np.real(phi.amplitudes.conj() @ rho.matrix @ phi.amplitudes))
    return min(1.0, max(0.0, val))


def _complement_basis(phi: StateVector) -> np.ndarray:
    """Orthonormal basis of the orthogonal complement of phi, as columns."""
    d = phi.dim
    stacked = np.column_stack([phi.amplitudes, np.eye(d, dtype=complex)])
    q, _ = np.linalg.qr(stacked)
    return q[:, 1:d]


def _clip_spectrum(matrix: np.ndarray) -> np.ndarray:
    """Project a Hermitian matrix onto the box 0 <= F <= I by eigenvalue clipping."""
    eigvals, eigvecs = np.linalg.eigh(hermitize(matrix))
    eigvals = np.clip(eigvals, 0.0, 1.0)
    return (eigvecs * eigvals) @ eigvecs.conj().T


def tau_optimized(
    psi: StateVector,
    phi: StateVector,
    config: OptimizerConfig | None = None,
    mode: Literal["inf", "sup"] = "inf",
) -> TransitionResult:
    """Transition probability via constrained numerical extremization.

    Parametrizes the feasible effects as |phi><phi| (+) F with Hermitian
    0 <= F <= I on the orthogonal complement of phi, and runs projected
    gradient descent with backtracking on <psi|E|psi>. The default ``inf``
    mode extremizes toward the minimal effect, whose value is the
    transition probability; ``sup`` is surfaced for completeness and is
    identically 1 because the unit effect is always feasible.

    Raises ConvergenceError (carrying the best value and residual) if the
    step criterion is not met within ``config.max_iters``.
    """
    _check_dims(psi, phi)
    cfg = config or OptimizerConfig()
    if psi.dim > cfg.max_dim:
        raise ValueError(f"dimension {psi.dim} exceeds optimizer maximum {cfg.max_dim}")

    basis = _complement_basis(phi)  # d x (d-1)
    accepted = abs(np.vdot(phi.amplitudes, psi.amplitudes)) ** 2
    psi_c = basis.conj().T @ psi.amplitudes  # complement component, unnormalized
    weight = float(np.real(np.vdot(psi_c, psi_c)))

    m = basis.shape[1]
    if m == 0 or weight < 1e-30:
        # nothing to optimize over: E = |phi><phi| (+) F never sees psi
        value = accepted if mode == "inf" else accepted + weight
        return _assemble_result(phi, basis, np.zeros((m, m), dtype=complex), psi, value, 0)

    sign = 1.0 if mode == "inf" else -1.0
    grad = sign * np.outer(psi_c, psi_c.conj())

    f = 0.5 * np.eye(m, dtype=complex)
    obj = sign * float(np.real(np.vdot(psi_c, f @ psi_c)))
    step = cfg.initial_step / weight

    step_tol = cfg.tolerance * 1e-3
    iterations = 0
    converged = False
    for iterations in range(1, cfg.max_iters + 1):
        trial = _clip_spectrum(f - step * grad)
        obj_trial = sign * float(np.real(np.vdot(psi_c, trial @ psi_c)))
        move = float(np.linalg.norm(trial - f))
        # sufficient-decrease safeguard; the objective is linear in F so
        # this nearly never fires
        while obj_trial > obj - cfg.armijo * move**2 / step and step > 1e-14:
            step *= cfg.step_shrink
            trial = _clip_spectrum(f - step * grad)
            obj_trial = sign * float(np.real(np.vdot(psi_c, trial @ psi_c)))
            move = float(np.linalg.norm(trial - f))
        f, obj = trial, obj_trial
        if move <= step_tol:
            converged = True
            break

    value = accepted + float(np.real(np.vdot(psi_c, f @ psi_c)))
    if not converged:
        result = _assemble_result(phi, basis, f, psi, value, iterations)
        raise ConvergenceError(
            f"no convergence after {iterations} iterations (best value {result.value})",
            best_value=result.value,
            residual=result.residual,
            iterations=iterations,
        )
    return _assemble_result(phi, basis, f, psi, value, iterations)


def _assemble_result(
    phi: StateVector,
    basis: np.ndarray,
    f: np.ndarray,
    psi: StateVector,
    value: float,
    iterations: int,
) -> TransitionResult:
    effect = phi.projector() + basis @ f @ basis.conj().T
    eigs = np.linalg.eigvalsh(hermitize(effect))
    fix_violation = float(np.max(np.abs(effect @ phi.amplitudes - phi.amplitudes)))
    residual = max(fix_violation, max(0.0, -float(eigs[0])), max(0.0, float(eigs[-1]) - 1.0))
    return TransitionResult(value=value, method="optimized", iterations=iterations, residual=residual)


def qubit_orthogonal(phi: StateVector) -> StateVector:
    """The unique (up to phase) qubit state orthogonal to phi."""
    if phi.dim != 2:
        raise ValueError("orthogonal complement state is defined here for qubits only")
    a, b = phi.amplitudes
    return StateVector(np.array([-np.conj(b), np.conj(a)]))


def complementarity_check(psi: StateVector, phi: StateVector) -> float:
    """Deviation |tau(psi, phi) + tau(psi, phi_perp) - 1| for a qubit pair.

    A sharp two-outcome test on {phi, phi_perp} resolves the identity, so
    the two transition probabilities are complementary.
    """
    _check_dims(psi, phi)
    if phi.dim != 2:
        raise ValueError("complementarity check is defined for qubits")
    t1 = tau_closed(psi, phi).value
    t2 = tau_closed(psi, qubit_orthogonal(phi)).value
    return abs(t1 + t2 - 1.0)
