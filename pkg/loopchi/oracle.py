#
# Copyright (C) 2022 Intel Corporation
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#    http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
#
"""
Density-matrix oracle for the susceptibility.

Everything here is built from the rotating-frame Hamiltonian and the anticommutator decay

    d(rho)/dt = -i [H, rho] - 1/2 {Gamma, rho},    Gamma = diag(gamma1, gamma2, 0, 0)

and never from the closed form in loopchi.susceptibility, which it exists to check. The frame is the one in which
all loop couplings are static (possible because nu1 = nu2 + nu3); every level except |c> is shifted by delta.
"""

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Iterator, List, Optional, Tuple

import numpy as np

from loopchi.exceptions import (
    DegenerateDenominator,
    IntegrationSettingsError,
    InvalidParameters,
    NotConverged,
    ProbeTooStrong,
    SingularSystem,
)
from loopchi.log import get_logger_adapter
from loopchi.susceptibility import ComplexSusceptibility, DriveParams, PhaseConvention, Source, compute_chi
from loopchi.utils import ordered_map

logger = get_logger_adapter(__name__)

A1, A2, B, C = range(4)
LEVELS = ("a1", "a2", "b", "c")
# the coherences driven at first order in the probe
COHERENCE_LEVELS = (A1, A2, B)

DEFAULT_PROBE_RABI = 1e-6
PROBE_LIMIT_RATIO = 1e-3
# relative agreement required between two probe amplitudes
PROBE_AGREEMENT = 1e-9
# relative agreement required from the adjudication winner
ORACLE_AGREEMENT = 1e-10
# below this relative difference the two conventions are numerically the same point
INDISTINGUISHABLE_RTOL = 1e-9
MIN_ADJUDICATION_POINTS = 50
# fraction of the trajectory averaged for the time-domain estimate
SETTLE_WINDOW = 0.1
SETTLE_SPREAD = 0.01
# RK4 steps propagated per matrix product while streaming a trajectory
WALK_BLOCK = 1024


@dataclass(frozen=True)
class FieldPhases:
    """
    Phases of the three loop fields, on omega1 (|a1>-|b>), omega2 (|a2>-|b>) and omega3 (|a1>-|a2>).
    Observables depend only on the collective phase phi2 + phi3 - phi1.
    """

    phi1: float = 0.0
    phi2: float = 0.0
    phi3: float = 0.0

    @property
    def collective(self) -> float:
        return self.phi2 + self.phi3 - self.phi1

    @classmethod
    def for_collective(cls, phi: float) -> "FieldPhases":
        return cls(0.0, 0.0, phi)


@dataclass(frozen=True, eq=False)
class CoherenceSystem:
    """
    matrix @ (rho_a1c, rho_a2c, rho_bc) = rhs in the steady state, to first order in the probe.
    """

    matrix: np.ndarray
    rhs: np.ndarray
    probe_rabi: float

    def __post_init__(self) -> None:
        assert self.matrix.shape == (3, 3) and self.rhs.shape == (3,)
        assert np.all(np.isfinite(self.matrix)) and np.all(np.isfinite(self.rhs))


def _probe_limit(params: DriveParams) -> float:
    return PROBE_LIMIT_RATIO * max(
        params.omega1, params.omega2, params.omega3, params.gamma1, params.gamma2, abs(params.delta), 1.0
    )


def _check_probe(params: DriveParams, probe_rabi: float) -> None:
    limit = _probe_limit(params)
    if not 0 < probe_rabi <= limit:
        raise ProbeTooStrong(probe_rabi, limit)


def rotating_frame_hamiltonian(
    params: DriveParams, probe_rabi: float, phases: Optional[FieldPhases] = None
) -> np.ndarray:
    if phases is None:
        phases = FieldPhases.for_collective(params.phi)

    hamiltonian = np.zeros((4, 4), dtype=complex)
    for level in (A1, A2, B):
        hamiltonian[level, level] = params.delta
    couplings = (
        (A1, B, params.omega1 * np.exp(1j * phases.phi1)),
        (A2, B, params.omega2 * np.exp(1j * phases.phi2)),
        (A1, A2, params.omega3 * np.exp(1j * phases.phi3)),
        (A1, C, complex(probe_rabi)),
    )
    for upper, lower, rabi in couplings:
        hamiltonian[upper, lower] = -0.5 * rabi
        hamiltonian[lower, upper] = -0.5 * np.conj(rabi)
    return hamiltonian


def decay_operator(params: DriveParams) -> np.ndarray:
    return np.diag([params.gamma1, params.gamma2, 0.0, 0.0]).astype(complex)


def _effective_hamiltonian(params: DriveParams, probe_rabi: float, phases: Optional[FieldPhases]) -> np.ndarray:
    return rotating_frame_hamiltonian(params, probe_rabi, phases) - 0.5j * decay_operator(params)


def liouvillian(params: DriveParams, probe_rabi: float, phases: Optional[FieldPhases] = None) -> np.ndarray:
    """
    16x16 generator acting on the row-major flattening of rho:
    d(rho)/dt = -i (H_eff rho - rho H_eff^dagger) with H_eff = H - i Gamma / 2.
    """
    h_eff = _effective_hamiltonian(params, probe_rabi, phases)
    identity = np.eye(4)
    return -1j * (np.kron(h_eff, identity) - np.kron(identity, h_eff.conj()))


def build_first_order_system(
    params: DriveParams, probe_rabi: float = DEFAULT_PROBE_RABI, phases: Optional[FieldPhases] = None
) -> CoherenceSystem:
    """
    Steady state of d(rho_jc)/dt for j in (a1, a2, b), keeping terms linear in the probe with rho_cc = 1 and every
    other zeroth-order element 0 (the atom starts in |c>). Scaled by 2 so the matrix carries 2*delta - i*gamma on
    the diagonal and the rhs is (probe, 0, 0).
    """
    _check_probe(params, probe_rabi)
    hamiltonian = rotating_frame_hamiltonian(params, probe_rabi, phases)
    h_eff = hamiltonian - 0.5j * decay_operator(params)
    sub = np.ix_(COHERENCE_LEVELS, COHERENCE_LEVELS)
    matrix = 2.0 * (h_eff[sub] - np.conj(h_eff[C, C]) * np.eye(3))
    rhs = -2.0 * hamiltonian[list(COHERENCE_LEVELS), C]
    return CoherenceSystem(matrix, rhs, probe_rabi)


def _solve(system: CoherenceSystem) -> np.ndarray:
    condition = np.linalg.cond(system.matrix)
    if not np.isfinite(condition) or condition * np.finfo(float).eps >= 1.0:
        raise SingularSystem(f"coherence matrix is singular (condition number {condition!r})")
    try:
        # LAPACK gesv: LU with partial pivoting
        return np.linalg.solve(system.matrix, system.rhs)
    except np.linalg.LinAlgError as e:
        raise SingularSystem(str(e)) from e


def solve_chi_oracle(
    params: DriveParams, probe_rabi: float = DEFAULT_PROBE_RABI, phases: Optional[FieldPhases] = None
) -> ComplexSusceptibility:
    estimates = []
    for probe in (probe_rabi, probe_rabi / 10):
        coherences = _solve(build_first_order_system(params, probe, phases))
        estimates.append(params.prefactor * complex(coherences[0]) / probe)
    chi, check = estimates
    if abs(chi - check) > PROBE_AGREEMENT * max(abs(chi), 1e-30):
        raise SingularSystem(f"steady state depends on the probe amplitude ({chi!r} vs {check!r})")
    return ComplexSusceptibility.from_complex(chi, Source.ORACLE)


class AdjudicationStatus(str, Enum):
    DECIDED = "decided"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class ConventionComparison:
    params: DriveParams
    oracle: Optional[complex]
    analytic: Dict[PhaseConvention, complex] = field(default_factory=dict)
    relative_error: Dict[PhaseConvention, float] = field(default_factory=dict)
    distinguishing: bool = False
    excluded_reason: Optional[str] = None


def compare_conventions_at(params: DriveParams, probe_rabi: float = DEFAULT_PROBE_RABI) -> ConventionComparison:
    try:
        oracle = solve_chi_oracle(params, probe_rabi).value
        analytic = {convention: compute_chi(params, convention).value for convention in PhaseConvention}
    except (SingularSystem, DegenerateDenominator) as e:
        return ConventionComparison(params, None, excluded_reason=f"{type(e).__name__}: {e}")

    scale = max(abs(oracle), 1e-30)
    relative_error = {convention: abs(value - oracle) / scale for convention, value in analytic.items()}
    spread = abs(analytic[PhaseConvention.EQ6_LITERAL] - analytic[PhaseConvention.EQ9_CONSISTENT])
    distinguishing = spread > INDISTINGUISHABLE_RTOL * scale
    return ConventionComparison(params, oracle, analytic, relative_error, distinguishing)


@dataclass(frozen=True)
class AdjudicationReport:
    status: AdjudicationStatus
    winning_convention: Optional[PhaseConvention]
    max_relative_error: Dict[PhaseConvention, float]
    grid_size: int
    distinguishing_points: int
    excluded_points: int
    seed: int
    # worst point per convention, kept for the error tables of an inconclusive run
    worst_points: Dict[PhaseConvention, Dict[str, float]]

    def to_dict(self) -> Dict[str, object]:
        return {
            "status": self.status.value,
            "winning_convention": self.winning_convention.value if self.winning_convention is not None else None,
            "max_relative_error": {c.value: e for c, e in self.max_relative_error.items()},
            "grid_size": self.grid_size,
            "distinguishing_points": self.distinguishing_points,
            "excluded_points": self.excluded_points,
            "seed": self.seed,
            "worst_points": {c.value: p for c, p in self.worst_points.items()},
        }


def sample_adjudication_grid(seed: int, n_points: int) -> List[DriveParams]:
    """
    Log-uniform rates in [0.1, 100], phi uniform in [0, 2 pi), delta uniform in [-10, 10].
    """
    rng = np.random.default_rng(seed)
    rates = 10.0 ** rng.uniform(-1.0, 2.0, size=(n_points, 5))
    phis = rng.uniform(0.0, 2 * math.pi, size=n_points)
    deltas = rng.uniform(-10.0, 10.0, size=n_points)
    return [
        DriveParams(
            omega1=float(r[0]),
            omega2=float(r[1]),
            omega3=float(r[2]),
            gamma1=float(r[3]),
            gamma2=float(r[4]),
            phi=float(phi),
            delta=float(delta),
        )
        for r, phi, delta in zip(rates, phis, deltas)
    ]


def adjudicate_convention(
    seed: int = 42, n_points: int = 100, workers: int = 1, probe_rabi: float = DEFAULT_PROBE_RABI
) -> AdjudicationReport:
    if n_points < MIN_ADJUDICATION_POINTS:
        raise InvalidParameters(f"n_points >= {MIN_ADJUDICATION_POINTS}", f"got {n_points}")

    comparisons = ordered_map(
        lambda params: compare_conventions_at(params, probe_rabi), sample_adjudication_grid(seed, n_points), workers
    )

    evaluated = [c for c in comparisons if c.excluded_reason is None]
    for comparison in comparisons:
        if comparison.excluded_reason is not None:
            logger.warning("Adjudication point excluded", reason=comparison.excluded_reason)

    max_relative_error: Dict[PhaseConvention, float] = {}
    worst_points: Dict[PhaseConvention, Dict[str, float]] = {}
    for convention in PhaseConvention:
        worst = max(evaluated, key=lambda c: c.relative_error[convention], default=None)
        max_relative_error[convention] = worst.relative_error[convention] if worst is not None else math.inf
        worst_points[convention] = worst.params.to_dict() if worst is not None else {}

    distinguishing = [c for c in evaluated if c.distinguishing]
    winner: Optional[PhaseConvention] = None
    for candidate, other in _convention_pairs():
        if distinguishing and all(c.relative_error[candidate] < c.relative_error[other] for c in distinguishing):
            winner = candidate
            break

    status = AdjudicationStatus.DECIDED
    if winner is None or max_relative_error[winner] > ORACLE_AGREEMENT:
        status = AdjudicationStatus.INCONCLUSIVE
        winner = None

    report = AdjudicationReport(
        status=status,
        winning_convention=winner,
        max_relative_error=max_relative_error,
        grid_size=n_points,
        distinguishing_points=len(distinguishing),
        excluded_points=len(comparisons) - len(evaluated),
        seed=seed,
        worst_points=worst_points,
    )
    logger.debug("Adjudication finished", **report.to_dict())
    return report


def _convention_pairs() -> List[Tuple[PhaseConvention, PhaseConvention]]:
    return [
        (PhaseConvention.EQ6_LITERAL, PhaseConvention.EQ9_CONSISTENT),
        (PhaseConvention.EQ9_CONSISTENT, PhaseConvention.EQ6_LITERAL),
    ]


@dataclass(frozen=True, eq=False)
class DensityMatrixTrajectory:
    times: np.ndarray
    # shape (len(times), 4, 4)
    states: np.ndarray

    def coherence(self, upper: int, lower: int) -> np.ndarray:
        return self.states[:, upper, lower]


@dataclass(frozen=True)
class WindowStatistics:
    mean: complex
    # root-mean-square deviation from the mean
    spread: float
    samples: int


class _RunningMoments:
    def __init__(self) -> None:
        self.count = 0
        self.mean = 0j
        self._sum_sq = 0.0

    def merge(self, values: np.ndarray) -> None:
        count = len(values)
        block_mean = complex(values.mean())
        block_sum_sq = float(np.sum(np.abs(values - block_mean) ** 2))
        total = self.count + count
        shift = block_mean - self.mean
        self.mean += shift * count / total
        self._sum_sq += block_sum_sq + abs(shift) ** 2 * self.count * count / total
        self.count = total

    @property
    def spread(self) -> float:
        return math.sqrt(self._sum_sq / self.count) if self.count else 0.0


def _rk4_step(params: DriveParams, probe_rabi: float, dt: float, phases: Optional[FieldPhases]) -> np.ndarray:
    generator = liouvillian(params, probe_rabi, phases) * dt
    step = np.eye(16, dtype=complex)
    term = np.eye(16, dtype=complex)
    for order in range(1, 5):
        term = term @ generator / order
        step = step + term
    return step


def _ground_state() -> np.ndarray:
    state = np.zeros(16, dtype=complex)
    state[C * 4 + C] = 1.0
    return state


def _walk(step: np.ndarray, state: np.ndarray, n_steps: int, block_size: int = WALK_BLOCK) -> Iterator[np.ndarray]:
    """
    Yields the states after each of the next 'n_steps' steps, 'block_size' of them at a time, as (size, 16) arrays.
    """
    if n_steps <= 0:
        return
    powers = np.empty((min(block_size, n_steps), 16, 16), dtype=complex)
    powers[0] = step
    for index in range(1, len(powers)):
        powers[index] = step @ powers[index - 1]
    remaining = n_steps
    while remaining > 0:
        size = min(len(powers), remaining)
        states = powers[:size] @ state
        state = states[-1]
        remaining -= size
        yield states


def _check_step(dt: float, t_max: float) -> int:
    if dt <= 0 or t_max <= 0:
        raise IntegrationSettingsError(f"dt and t_max must be positive (dt={dt!r}, t_max={t_max!r})")
    return int(math.ceil(t_max / dt))


def integrate_density_matrix(
    params: DriveParams,
    probe_rabi: float,
    t_max: float,
    dt: float,
    phases: Optional[FieldPhases] = None,
) -> DensityMatrixTrajectory:
    """
    Classical fixed-step RK4 from rho = |c><c|. The generator is constant, so one RK4 step is the fixed matrix
    polynomial I + hL + (hL)^2/2 + (hL)^3/6 + (hL)^4/24 applied to the flattened state.

    Keeps every state; long runs should go through window_statistics instead.
    """
    n_steps = _check_step(dt, t_max)
    initial = _ground_state()
    states = np.concatenate([initial[np.newaxis], *_walk(_rk4_step(params, probe_rabi, dt, phases), initial, n_steps)])
    return DensityMatrixTrajectory(np.arange(n_steps + 1) * dt, states.reshape(n_steps + 1, 4, 4))


def window_statistics(
    params: DriveParams,
    probe_rabi: float,
    t_max: float,
    dt: float,
    phases: Optional[FieldPhases] = None,
    window: float = SETTLE_WINDOW,
    upper: int = A1,
    lower: int = C,
) -> WindowStatistics:
    """
    Mean and spread of one coherence over the final 'window' fraction of the same RK4 trajectory that
    integrate_density_matrix returns. The run up to the window is taken with repeated squaring of the step
    matrix and the window itself is streamed, so memory does not grow with t_max / dt.
    """
    n_steps = _check_step(dt, t_max)
    samples = max(1, int((n_steps + 1) * window))
    first = n_steps + 1 - samples
    step = _rk4_step(params, probe_rabi, dt, phases)
    state = np.linalg.matrix_power(step, first) @ _ground_state()

    index = upper * 4 + lower
    moments = _RunningMoments()
    moments.merge(state[index : index + 1])
    for states in _walk(step, state, samples - 1):
        moments.merge(states[:, index])
    return WindowStatistics(mean=moments.mean, spread=moments.spread, samples=moments.count)


def _rates(params: DriveParams) -> List[float]:
    return [
        r
        for r in (params.omega1, params.omega2, params.omega3, params.gamma1, params.gamma2, abs(params.delta))
        if r > 0
    ]


def default_integration_settings(params: DriveParams) -> Tuple[float, float]:
    """
    (t_max, dt) meeting the time_domain_check preconditions with margin.
    """
    rates = _rates(params) or [1.0]
    return 100.0 / min(rates), 1e-2 / max(rates)


def time_domain_check(
    params: DriveParams,
    probe_rabi: float = 1e-4,
    t_max: Optional[float] = None,
    dt: Optional[float] = None,
    phases: Optional[FieldPhases] = None,
) -> ComplexSusceptibility:
    """
    Diagnostic: integrates the full density matrix and averages rho_a1c over the last tenth of the run.
    """
    _check_probe(params, probe_rabi)
    default_t_max, default_dt = default_integration_settings(params)
    t_max = default_t_max if t_max is None else t_max
    dt = default_dt if dt is None else dt

    rates = _rates(params) or [1.0]
    if dt > 1e-2 / max(rates):
        raise IntegrationSettingsError(f"dt={dt!r} exceeds 1e-2 / max rate ({1e-2 / max(rates)!r})")
    if t_max < 50.0 / min(rates):
        raise IntegrationSettingsError(f"t_max={t_max!r} is below 50 / min rate ({50.0 / min(rates)!r})")

    stats = window_statistics(params, probe_rabi, t_max, dt, phases)
    logger.debug("Time-domain window", samples=stats.samples, spread=stats.spread, t_max=t_max, dt=dt)
    if stats.spread > SETTLE_SPREAD * abs(stats.mean):
        raise NotConverged(stats.spread / max(abs(stats.mean), 1e-300), t_max)
    return ComplexSusceptibility.from_complex(params.prefactor * stats.mean / probe_rabi, Source.ORACLE)
