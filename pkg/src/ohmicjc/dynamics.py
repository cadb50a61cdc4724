"""Excited-state amplitude, reduced atom state, and time-local rates.

The single-excitation solution is

    p(t) = (1/2) * sum_j exp(-i omega_j t) * exp(-beta_j(t)/4),   j = 1, 2

with beta_j the cumulative decay exponent of the dressed transition at
omega_j.  Everything downstream (density matrix, decoherence rate, frequency
shift, trace-distance flow) derives from p and its analytic derivative.  An
independent 3-level master-equation integration in the dressed basis serves
as a cross-check oracle.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .errors import DomainError, QuadratureError
from .spectral import ReservoirSpec, SystemSpec, TimeGrid, beta_series, decay_rate_series

# below this amplitude magnitude the log-derivative rates are masked
AMPLITUDE_FLOOR = 1e-8


@dataclass(frozen=True)
class InitialAtomState:
    """Initial reduced atom state: excited population and coherence.

    rho10 is the |e><g| matrix element.  Positivity requires
    |rho10|^2 <= rho11 * (1 - rho11).
    """

    rho11: float
    rho10: complex = 0.0 + 0.0j

    def __post_init__(self):
        if not (0.0 <= self.rho11 <= 1.0):
            raise DomainError(f"excited population must lie in [0, 1], got {self.rho11}")
        bound = self.rho11 * (1.0 - self.rho11)
        if abs(self.rho10) ** 2 > bound + 1e-12:
            raise DomainError(
                f"coherence too large for a positive state: |rho10|^2={abs(self.rho10)**2:.3e} "
                f"> rho11*(1-rho11)={bound:.3e}")

    @classmethod
    def excited(cls) -> "InitialAtomState":
        return cls(1.0)

    @classmethod
    def ground(cls) -> "InitialAtomState":
        return cls(0.0)


@dataclass(frozen=True)
class AmplitudeTrajectory:
    """Sampled amplitude p(t) with its ingredients.

    pop holds |p|^2.  gamma1/gamma2 cache the rate samples so downstream
    consumers (analytic derivative, rates) do not re-evaluate the spectral
    side.  The physical range pop <= 1 is NOT asserted on construction: the
    closed-form rates genuinely push |p|^2 above 1 in some strong-coupling /
    low-cutoff regimes, and those regimes are part of the supported parameter
    space.  Call validate_physical() where the bound is expected to hold.
    """

    system: SystemSpec
    reservoir: ReservoirSpec
    grid: TimeGrid
    p: np.ndarray
    beta1: np.ndarray
    beta2: np.ndarray
    pop: np.ndarray
    gamma1: np.ndarray = field(repr=False, default=None)
    gamma2: np.ndarray = field(repr=False, default=None)

    def validate_physical(self, tol: float = 1e-12) -> float:
        """Assert 0 <= |p|^2 <= 1 on the grid; returns the worst excess."""
        excess = float(np.max(self.pop - 1.0))
        if excess > tol or np.any(self.pop < -tol):
            raise DomainError(
                f"|p|^2 leaves [0, 1] by {excess:.3e}; parameters are outside "
                "the physical-regime envelope of the closed-form rates")
        return excess

    def derivative(self) -> np.ndarray:
        """Analytic dp/dt on the grid (no finite differencing).

        dp/dt = (1/2) sum_j (-i omega_j - gamma_j/4) exp(-i omega_j t - beta_j/4),
        using d(beta_j)/dt = gamma_j exactly.
        """
        t = self.grid.samples
        w1, w2 = self.system.omega1, self.system.omega2
        e1 = np.exp(-1j * w1 * t - self.beta1 / 4.0)
        e2 = np.exp(-1j * w2 * t - self.beta2 / 4.0)
        return 0.5 * ((-1j * w1 - self.gamma1 / 4.0) * e1
                      + (-1j * w2 - self.gamma2 / 4.0) * e2)


@dataclass(frozen=True)
class RateSeries:
    """Time-local master-equation rates sampled on the grid.

    lamb is the frequency-shift series S(t) = -2 Im(dp/dt / p); gamma is the
    decoherence rate -2 Re(dp/dt / p).  Samples where |p| <= AMPLITUDE_FLOOR
    are masked (NaN values, mask True): the rate genuinely diverges at
    amplitude zeros, tan-like, and downstream flow quantities use
    |p|^2 * gamma which stays finite.
    """

    grid: TimeGrid
    lamb: np.ndarray
    gamma: np.ndarray
    mask: np.ndarray


@dataclass(frozen=True)
class AtomStateSeries:
    """Series of 2x2 reduced density matrices in the {|e>, |g>} basis."""

    grid: TimeGrid
    rho: np.ndarray  # shape (n, 2, 2) complex

    def min_eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.rho)[:, 0]

    def trace_deviation(self) -> float:
        return float(np.max(np.abs(np.trace(self.rho, axis1=1, axis2=2) - 1.0)))


def amplitude(sys: SystemSpec, r: ReservoirSpec, grid: TimeGrid,
              beta_check_tol: float = 1e-8) -> AmplitudeTrajectory:
    """Evolve the excited-state amplitude over the grid."""
    t = grid.samples
    w1, w2 = sys.omega1, sys.omega2
    b1 = beta_series(w1, grid, r, check_tol=beta_check_tol)
    if sys.coupling == 0.0:
        b2 = b1  # degenerate dressed frequencies share one exponent
        g1 = decay_rate_series(w1, t, r)
        g2 = g1
    else:
        b2 = beta_series(w2, grid, r, check_tol=beta_check_tol)
        g1 = decay_rate_series(w1, t, r)
        g2 = decay_rate_series(w2, t, r)
    p = 0.5 * (np.exp(-1j * w1 * t - b1 / 4.0) + np.exp(-1j * w2 * t - b2 / 4.0))
    pop = np.abs(p) ** 2
    return AmplitudeTrajectory(system=sys, reservoir=r, grid=grid, p=p,
                               beta1=b1, beta2=b2, pop=pop, gamma1=g1, gamma2=g2)


def atom_state(traj: AmplitudeTrajectory, init: InitialAtomState) -> AtomStateSeries:
    """Reduced atom state: rho11(t) = |p|^2 rho11(0), rho10(t) = p rho10(0)."""
    n = traj.grid.n_steps
    rho = np.zeros((n, 2, 2), dtype=complex)
    ee = traj.pop * init.rho11
    eg = traj.p * init.rho10
    rho[:, 0, 0] = ee
    rho[:, 0, 1] = eg
    rho[:, 1, 0] = np.conj(eg)
    rho[:, 1, 1] = 1.0 - ee
    return AtomStateSeries(grid=traj.grid, rho=rho)


def rate_series(traj: AmplitudeTrajectory) -> RateSeries:
    """Frequency shift and decoherence rate from the analytic log-derivative."""
    pdot = traj.derivative()
    mask = np.abs(traj.p) <= AMPLITUDE_FLOOR
    ratio = np.empty_like(traj.p)
    good = ~mask
    ratio[good] = pdot[good] / traj.p[good]
    # complex assignment: a bare real nan would leave the imaginary part 0
    # and the frequency shift unmasked
    ratio[mask] = complex(np.nan, np.nan)
    lamb = -2.0 * np.imag(ratio)
    gamma = -2.0 * np.real(ratio)
    return RateSeries(grid=traj.grid, lamb=lamb, gamma=gamma, mask=mask)


def _dressed_superoperators(sys: SystemSpec):
    """Constant pieces of the 3-level dressed-basis master equation.

    Basis order: (ground |phi0>, lower dressed |phi1,->, upper dressed
    |phi1,+>).  The Hamiltonian is diagonal with the dressed energies; each
    dressed level decays to the ground state through its own jump operator,
    with the time-dependent rate applied as a scalar prefactor.
    """
    e0, em, ep = sys.dressed_energies
    h = np.diag([e0, em, ep]).astype(complex)
    eye = np.eye(3, dtype=complex)
    a1 = np.zeros((3, 3), dtype=complex)
    a1[0, 1] = 1.0  # |phi0><phi1,-|
    a2 = np.zeros((3, 3), dtype=complex)
    a2[0, 2] = 1.0  # |phi0><phi1,+|

    def dissipator(a):
        ada = a.conj().T @ a
        return (np.kron(a, a.conj())
                - 0.5 * (np.kron(ada, eye) + np.kron(eye, ada.conj())))

    l0 = -1j * (np.kron(h, eye) - np.kron(eye, h.conj()))
    return l0, dissipator(a1), dissipator(a2)


def _initial_dressed_matrix(init: InitialAtomState) -> np.ndarray:
    # cavity starts in vacuum, so the one-excitation component is |0,e>
    # = (|phi1,+> - |phi1,->)/sqrt(2) and the ground component is |phi0>
    v_e = np.array([0.0, -1.0, 1.0], dtype=complex) / np.sqrt(2.0)
    v_g = np.array([1.0, 0.0, 0.0], dtype=complex)
    rho = (init.rho11 * np.outer(v_e, v_e.conj())
           + init.rho10 * np.outer(v_e, v_g.conj())
           + np.conj(init.rho10) * np.outer(v_g, v_e.conj())
           + (1.0 - init.rho11) * np.outer(v_g, v_g.conj()))
    return rho


def dressed_ode_oracle(sys: SystemSpec, r: ReservoirSpec, grid: TimeGrid,
                       init: InitialAtomState, rtol: float = 1e-9,
                       atol: float = 1e-9) -> np.ndarray:
    """Excited population from an independent dressed-basis integration.

    Integrates the 3-level time-dependent master equation with an adaptive
    explicit Runge-Kutta pair and returns <e| rho_atom(t) |e> sampled on the
    grid.  Used to validate |p(t)|^2 * rho11(0); shares only the decay-rate
    evaluations with the analytic path.
    """
    l0, l1, l2 = _dressed_superoperators(sys)
    w1, w2 = sys.omega1, sys.omega2
    y0 = _initial_dressed_matrix(init).reshape(-1)

    if r.has_closed_form:
        from .spectral import decay_rate_closed

        def rate1(t):
            return decay_rate_closed(w1, t, r)

        def rate2(t):
            return decay_rate_closed(w2, t, r)
    else:
        # quadrature rates are too expensive per solver step; tabulate densely
        # and interpolate (O(dt^2) error, well under the oracle tolerance)
        dense = grid.refined(4)
        tab1 = decay_rate_series(w1, dense.samples, r)
        tab2 = decay_rate_series(w2, dense.samples, r)

        def rate1(t):
            return np.interp(t, dense.samples, tab1)

        def rate2(t):
            return np.interp(t, dense.samples, tab2)

    def rhs(t, y):
        return (l0 + 0.5 * rate1(t) * l1 + 0.5 * rate2(t) * l2) @ y

    sol = solve_ivp(rhs, (0.0, grid.t_max), y0, t_eval=grid.samples,
                    method="RK45", rtol=rtol, atol=atol)
    if not sol.success:
        raise QuadratureError(f"oracle integration failed: {sol.message}")
    rho = sol.y.reshape(3, 3, -1)
    # <0,e| rho |0,e> with |0,e> = (|phi1,+> - |phi1,->)/sqrt(2)
    return 0.5 * (rho[1, 1].real + rho[2, 2].real) - rho[1, 2].real
