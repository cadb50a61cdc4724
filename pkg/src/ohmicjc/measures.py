"""Trace-distance flow, non-Markovianity, speed-limit ratio, critical coupling.

For the optimal initial-state pair (excited vs ground) the trace distance is
|p(t)|^2, so every measure here reduces to signed integrals of d|p|^2/dt.
Those integrals are evaluated by exact telescoping: each grid interval's
contribution is pop[k+1] - pop[k], split at interpolated sign changes of the
flow derivative.  That keeps the two non-Markovianity routes and the two
speed-limit routes identical to roundoff instead of quadrature error.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, NoTransitionError, RatioUndefinedError
from .spectral import ReservoirSpec, SystemSpec, TimeGrid
from .dynamics import AmplitudeTrajectory, amplitude, rate_series

# measure values below this are treated as Markovian in transition scans
TRANSITION_EPS = 1e-4
PRESCAN_STEP = 0.02


@dataclass(frozen=True)
class MeasureReport:
    """Non-Markovianity and speed-limit summary for one trajectory.

    n_markov / n_markov_alt are the positive-flow and total-variation routes
    to the same number; qsl_ratio / qsl_ratio_alt likewise.  residual_n and
    residual_qsl are their disagreements.  Values are reported raw: in
    regimes where |p|^2 exceeds 1 the ratio can leave (0, 1], see
    validate_physical.
    """

    n_markov: float
    n_markov_alt: float
    qsl_ratio: float
    qsl_ratio_alt: float
    pop_tau: float
    residual_n: float
    residual_qsl: float
    tau: float

    def validate_physical(self, tol: float = 1e-10):
        if self.n_markov < -tol:
            raise DomainError(f"negative non-Markovianity {self.n_markov:.3e}")
        if not (-tol < self.qsl_ratio <= 1.0 + tol):
            raise DomainError(f"speed-limit ratio {self.qsl_ratio:.6f} outside (0, 1]")
        if self.residual_n > 1e-8 or self.residual_qsl > 1e-10:
            raise DomainError("route residuals exceed contract")


@dataclass(frozen=True)
class CriticalScan:
    """Result of a critical-coupling search.

    transitions lists every indicator sign change found by the coarse
    pre-scan as (coupling_below, coupling_above, direction) with direction
    +1 for Markovian -> non-Markovian.  critical_coupling refines the
    largest upward transition.
    """

    s: float
    eta: float
    omega_c: float
    critical_coupling: float
    bracket: float
    n_at_probe: float
    transitions: tuple
    prescan_step: float = PRESCAN_STEP


def trace_distance_optimal(traj: AmplitudeTrajectory) -> np.ndarray:
    """Trace distance of the optimal pair: D(t) = |p(t)|^2."""
    return traj.pop.copy()


def trace_distance_general(rho_a: np.ndarray, rho_b: np.ndarray) -> float:
    """(1/2) * trace norm of rho_a - rho_b for validated 2x2 density matrices."""
    for name, rho in (("first", rho_a), ("second", rho_b)):
        rho = np.asarray(rho)
        if rho.shape != (2, 2):
            raise DomainError(f"{name} state must be 2x2")
        if np.max(np.abs(rho - rho.conj().T)) > 1e-10:
            raise DomainError(f"{name} state is not Hermitian")
        if abs(np.trace(rho) - 1.0) > 1e-10:
            raise DomainError(f"{name} state trace is {np.trace(rho)}, not 1")
    return 0.5 * float(np.sum(np.linalg.svd(np.asarray(rho_a) - np.asarray(rho_b),
                                            compute_uv=False)))


def sigma_series(traj: AmplitudeTrajectory) -> np.ndarray:
    """Flow derivative sigma(t) = d|p|^2/dt = 2 Re[conj(p) dp/dt], analytic."""
    return 2.0 * np.real(np.conj(traj.p) * traj.derivative())


def gamma_sigma_consistency(traj: AmplitudeTrajectory) -> float:
    """Max residual of the identity decoherence_rate = -sigma/|p|^2.

    Only unmasked samples participate (the identity is 0/0 at amplitude
    zeros).  Contract: < 1e-8 for any valid trajectory.
    """
    rates = rate_series(traj)
    sig = sigma_series(traj)
    good = ~rates.mask
    return float(np.max(np.abs(rates.gamma[good] + sig[good] / traj.pop[good])))


def _flow_buckets(t: np.ndarray, pop: np.ndarray, sig: np.ndarray):
    """Split the exact per-interval increments of |p|^2 by flow sign.

    Returns (gain, loss): gain is the summed increment over sub-intervals
    where sigma > 0, loss the (negative) sum where sigma < 0; together they
    telescope to pop[-1] - pop[0] exactly.  Intervals where sigma changes
    sign are split at the linearly interpolated crossing, assigning the
    first piece by a half-interval trapezoid and the remainder to the other
    bucket, which removes the O(dt) boundary bias.
    """
    d = np.diff(pop)
    s0, s1 = sig[:-1], sig[1:]
    dt = np.diff(t)
    flip = (s0 * s1) < 0.0
    keep = ~flip
    side = np.sign(s0 + s1)
    gain = float(d[keep & (side > 0)].sum())
    loss = float(d[keep & (side < 0)].sum())
    for k in np.nonzero(flip)[0]:
        t_cross = dt[k] * s0[k] / (s0[k] - s1[k])
        first = 0.5 * s0[k] * t_cross
        second = d[k] - first
        if s0[k] > 0.0:
            gain += first
        else:
            loss += first
        if s1[k] > 0.0:
            gain += second
        else:
            loss += second
    return gain, loss


def non_markovianity(traj: AmplitudeTrajectory):
    """Accumulated backflow, two routes.

    Route one integrates the positive part of the flow derivative; route two
    is half the total variation plus the net change,
    (1/2) * [int |d pop| + pop(tau) - pop(0)].  Returns
    (n_positive_flow, n_total_variation, residual).
    """
    sig = sigma_series(traj)
    gain, loss = _flow_buckets(traj.grid.samples, traj.pop, sig)
    n_a = gain
    variation = gain - loss
    n_b = 0.5 * (variation + float(traj.pop[-1]) - float(traj.pop[0]))
    return n_a, n_b, abs(n_a - n_b)


def qslt_ratio(traj: AmplitudeTrajectory):
    """Speed-limit time over actual time, two routes.

    Route one: (pop(0) - pop(tau)) / int |d pop|.  Route two rewrites the
    denominator through the backflow measure:
    (pop(0) - pop(tau)) / (pop(0) - pop(tau) + 2 N).  Returns
    (ratio, ratio_alt, residual).  Raises RatioUndefinedError when no
    evolution happened: a stationary amplitude leaves only roundoff wobble
    in |p|^2 (~1e-15), so total variation below 1e-12 counts as 0/0 rather
    than producing a noise quotient.
    """
    sig = sigma_series(traj)
    gain, loss = _flow_buckets(traj.grid.samples, traj.pop, sig)
    decay = float(traj.pop[0]) - float(traj.pop[-1])
    variation = gain - loss
    if variation <= 1e-12:
        raise RatioUndefinedError(
            "amplitude never moved over the horizon; ratio is 0/0")
    n_b = 0.5 * (variation + float(traj.pop[-1]) - float(traj.pop[0]))
    ratio_a = decay / variation
    ratio_b = decay / (decay + 2.0 * n_b)
    return ratio_a, ratio_b, abs(ratio_a - ratio_b)


def qslt_identity_residual(traj: AmplitudeTrajectory) -> float:
    """Disagreement between the direct and backflow-based ratio routes."""
    return qslt_ratio(traj)[2]


def measure_report(traj: AmplitudeTrajectory) -> MeasureReport:
    """All flow measures for one trajectory."""
    n_a, n_b, res_n = non_markovianity(traj)
    r_a, r_b, res_r = qslt_ratio(traj)
    return MeasureReport(n_markov=n_a, n_markov_alt=n_b,
                         qsl_ratio=r_a, qsl_ratio_alt=r_b,
                         pop_tau=float(traj.pop[-1]),
                         residual_n=res_n, residual_qsl=res_r,
                         tau=traj.grid.t_max)


def evaluate_point(s: float, eta: float, omega_c: float, coupling: float,
                   grid: TimeGrid, omega0: float = 1.0) -> MeasureReport:
    """Convenience: trajectory plus measures for one parameter point."""
    traj = amplitude(SystemSpec(omega0=omega0, coupling=coupling),
                     ReservoirSpec(s=s, eta=eta, omega_c=omega_c), grid)
    return measure_report(traj)


def critical_coupling(r: ReservoirSpec, omega0: float, grid: TimeGrid,
                      omega_range=(0.0, 4.0), eps_n: float = TRANSITION_EPS,
                      bracket: float = 1e-3,
                      prescan_step: float = PRESCAN_STEP) -> CriticalScan:
    """Find the coupling where backflow first persists, by bisection.

    A coarse pre-scan over omega_range records every crossing of the
    indicator N(coupling) > eps_n; the largest upward crossing is refined by
    bisection to the requested bracket width (re-entrant regimes have an
    extra non-Markovian island at small coupling, and the high-coupling
    transition is the one reported as critical).  Raises NoTransitionError,
    with the scan attached, when the indicator never switches on.
    """
    lo, hi = float(omega_range[0]), float(omega_range[1])
    if not (hi > lo >= 0.0):
        raise DomainError(f"bad coupling range {omega_range}")

    # probe the backflow measure alone: the full report computes the
    # speed-limit ratio too, which is undefined (0/0) at a stationary
    # scan point such as coupling 0 with a decoupled reservoir
    def n_of(coupling):
        traj = amplitude(SystemSpec(omega0=omega0, coupling=coupling), r, grid)
        return non_markovianity(traj)[0]

    n_pts = max(2, int(round((hi - lo) / prescan_step)) + 1)
    couplings = np.linspace(lo, hi, n_pts)
    values = np.array([n_of(float(c)) for c in couplings])
    hot = values > eps_n
    transitions = []
    for k in range(n_pts - 1):
        if hot[k] != hot[k + 1]:
            transitions.append((float(couplings[k]), float(couplings[k + 1]),
                                +1 if hot[k + 1] else -1))
    upward = [tr for tr in transitions if tr[2] == +1]
    if not upward:
        raise NoTransitionError(
            f"no Markovian -> non-Markovian transition in [{lo}, {hi}] "
            f"(indicator eps={eps_n})",
            scan=list(zip(couplings.tolist(), values.tolist())))
    a, b = upward[-1][0], upward[-1][1]
    while b - a > bracket:
        mid = 0.5 * (a + b)
        if n_of(mid) > eps_n:
            b = mid
        else:
            a = mid
    omega_crit = 0.5 * (a + b)
    return CriticalScan(s=r.s, eta=r.eta, omega_c=r.omega_c,
                        critical_coupling=omega_crit, bracket=b - a,
                        n_at_probe=n_of(omega_crit + bracket),
                        transitions=tuple(transitions),
                        prescan_step=prescan_step)
