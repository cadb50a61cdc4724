"""Reservoir spectral density and time-dependent decay rates.

The reservoir is an Ohmic-class bath, J(omega) = eta * omega**s * omega_c**(1-s)
* exp(-omega/omega_c), with the decay rate of each dressed transition given by

    gamma(omega_j, t) = 2 * int_0^inf J(omega) * sin((omega_j - omega) t)
                                              / (omega_j - omega) domega.

Two evaluation paths are provided: closed-form expressions for s in {1/2, 1, 3}
and a panel Gauss quadrature of the integral for any s > 0.  The two paths agree
exactly on the omega_j = 0 line; away from it the closed forms are boundary-term
approximations and deviate at order one.  See the README for the full account;
the quadrature path is the defining one.
"""

from dataclasses import dataclass, field
import math

import numpy as np
from scipy.integrate import cumulative_simpson
from scipy.special import roots_legendre, roots_jacobi

from .errors import DomainError, UnsupportedExponentError, QuadratureError

# exponents with a closed-form rate expression
CLOSED_FORM_EXPONENTS = (0.5, 1.0, 3.0)

_GAUSS_NODES = 16


@dataclass(frozen=True)
class ReservoirSpec:
    """Ohmic-class reservoir parameters.

    s: Ohmicity exponent (> 0); sub-Ohmic below 1, Ohmic at 1, super-Ohmic above.
    eta: dimensionless reservoir coupling (>= 0).
    omega_c: cutoff frequency in units of the atomic frequency (> 0).
    """

    s: float
    eta: float
    omega_c: float

    def __post_init__(self):
        if not (self.s > 0):
            raise DomainError(f"Ohmicity exponent must be positive, got {self.s}")
        if self.eta < 0:
            raise DomainError(f"reservoir coupling must be nonnegative, got {self.eta}")
        if not (self.omega_c > 0):
            raise DomainError(f"cutoff frequency must be positive, got {self.omega_c}")

    @property
    def ohmicity_class(self) -> str:
        if self.s < 1.0:
            return "sub-ohmic"
        if self.s == 1.0:
            return "ohmic"
        return "super-ohmic"

    @property
    def correlation_time(self) -> float:
        """Reservoir memory timescale, 1/omega_c."""
        return 1.0 / self.omega_c

    @property
    def relaxation_time(self) -> float:
        """Reservoir relaxation timescale, 1/eta (inf when decoupled)."""
        return math.inf if self.eta == 0 else 1.0 / self.eta

    @property
    def has_closed_form(self) -> bool:
        return self.s in CLOSED_FORM_EXPONENTS


@dataclass(frozen=True)
class SystemSpec:
    """Atom and cavity-coupling parameters.

    omega0 is the atomic transition frequency and the frequency unit (> 0);
    coupling is the atom-cavity coupling (>= 0).  The dressed transition
    frequencies are omega1 = omega0 - coupling and omega2 = omega0 + coupling;
    omega1 goes negative for strong coupling and is deliberately not clamped.
    """

    omega0: float = 1.0
    coupling: float = 0.0

    def __post_init__(self):
        if not (self.omega0 > 0):
            raise DomainError(f"atomic frequency must be positive, got {self.omega0}")
        if self.coupling < 0:
            raise DomainError(f"atom-cavity coupling must be nonnegative, got {self.coupling}")

    @property
    def omega1(self) -> float:
        return self.omega0 - self.coupling

    @property
    def omega2(self) -> float:
        return self.omega0 + self.coupling

    @property
    def dressed_energies(self):
        """(E_ground, E_minus, E_plus) of the zero/one-excitation eigenstates."""
        return (-0.5 * self.omega0,
                0.5 * self.omega0 - self.coupling,
                0.5 * self.omega0 + self.coupling)


@dataclass(frozen=True)
class TimeGrid:
    """Uniform time grid from 0 to t_max with n_steps samples."""

    t_max: float
    n_steps: int
    samples: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not (self.t_max > 0):
            raise DomainError(f"horizon must be positive, got {self.t_max}")
        if self.n_steps < 2:
            raise DomainError(f"need at least 2 samples, got {self.n_steps}")
        object.__setattr__(self, "samples",
                           np.linspace(0.0, self.t_max, self.n_steps))

    @property
    def dt(self) -> float:
        return self.t_max / (self.n_steps - 1)

    def refined(self, factor: int) -> "TimeGrid":
        """Same span with factor-times finer spacing (shares endpoint samples)."""
        return TimeGrid(self.t_max, factor * (self.n_steps - 1) + 1)


def spectral_density(omega, r: ReservoirSpec):
    """J(omega) = eta * omega**s * omega_c**(1-s) * exp(-omega/omega_c).

    Accepts scalars or arrays; frequencies must be nonnegative (fractional
    powers of negative reals are undefined).
    """
    w = np.asarray(omega, dtype=float)
    if np.any(w < 0):
        raise DomainError("spectral density is defined for omega >= 0 only")
    out = r.eta * np.power(w, r.s) * r.omega_c ** (1.0 - r.s) * np.exp(-w / r.omega_c)
    return out if out.ndim else float(out)


def decay_rate_closed(omega_j, t, r: ReservoirSpec):
    """Closed-form gamma(omega_j, t) for s in {1/2, 1, 3}.

    Vectorized over t.  alpha0 = arctan(omega_c t) in [0, pi/2).  The s=3
    third-term coefficient is 4*eta*omega_c; the alternative 4*eta fails the
    defining-integral oracle at omega_j=0 (and has wrong units).
    """
    if r.s not in CLOSED_FORM_EXPONENTS:
        raise UnsupportedExponentError(
            f"no closed form for s={r.s}; use decay_rate_quadrature")
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0):
        raise DomainError("time must be nonnegative")
    wc, eta, wj = r.omega_c, r.eta, float(omega_j)
    a0 = np.arctan(wc * t_arr)
    r2 = 1.0 + (wc * t_arr) ** 2
    if r.s == 0.5:
        out = -2.0 * eta * wc * np.sqrt(np.pi) * r2 ** -0.25 * np.sin(wj * t_arr - 0.5 * a0)
    elif r.s == 1.0:
        out = -2.0 * eta * wc * r2 ** -0.5 * np.sin(wj * t_arr - a0)
    else:
        out = (-2.0 * eta * wj ** 2 / wc * r2 ** -0.5 * np.sin(wj * t_arr - a0)
               - 2.0 * eta * wj * r2 ** -1.0 * np.sin(wj * t_arr - 2.0 * a0)
               - 4.0 * eta * wc * r2 ** -1.5 * np.sin(wj * t_arr - 3.0 * a0))
    return out if out.ndim else float(out)


def _integration_cutoff(r: ReservoirSpec) -> float:
    # neglected tail of omega**s * exp(-omega/omega_c) beyond this is < 1e-18
    return r.omega_c * max(50.0, 10.0 * r.s)


def _panel_nodes(r: ReservoirSpec, w_max: float, n_panels: int):
    """Gauss nodes/weights over [0, w_max] split into n_panels panels.

    The first panel absorbs the omega**s endpoint factor with Gauss-Jacobi
    nodes when s is fractional, so sub-Ohmic integrands converge at full
    Gauss order.  Returns (nodes, weights) with the spectral density's
    omega**s factor already folded into the weights of the first panel.
    """
    edges = np.linspace(0.0, w_max, n_panels + 1)
    xg, wg = roots_legendre(_GAUSS_NODES)
    mids = 0.5 * (edges[1:] + edges[:-1])
    halfs = 0.5 * (edges[1:] - edges[:-1])
    nodes = mids[:, None] + halfs[:, None] * xg[None, :]
    weights = halfs[:, None] * np.broadcast_to(wg, nodes.shape)
    weights = weights.copy()
    pow_factor = np.power(nodes, r.s)
    if r.s != round(r.s):
        # replace first panel: int_0^w1 w^s g(w) dw via Jacobi weight (1+x)^s
        xj, wj_ = roots_jacobi(_GAUSS_NODES, 0.0, r.s)
        w1 = edges[1]
        nodes[0] = w1 * (xj + 1.0) / 2.0
        weights[0] = (w1 / 2.0) ** (r.s + 1.0) * wj_
        pow_factor = np.power(nodes, r.s)
        pow_factor[0] = 1.0  # folded into the Jacobi weights
    return nodes.ravel(), (weights * pow_factor).ravel()


def _rate_kernel(omega_j, t, nodes):
    # sin((wj-w)t)/(wj-w) == t*sinc((wj-w)t/pi); np.sinc guards the removable
    # singularity exactly (value t, matching 2*J(wj)*t after the J factor)
    return t * np.sinc((omega_j - nodes) * t / np.pi)


def decay_rate_quadrature(omega_j, t, r: ReservoirSpec,
                          rel_tol: float = 1e-10, abs_tol: float = 1e-12,
                          max_doublings: int = 12):
    """gamma(omega_j, t) by direct quadrature of the defining integral.

    Valid for any s > 0.  Panels of width <= pi/(2t) bound the phase change of
    the oscillatory kernel; the panel count doubles until two successive
    estimates agree to tolerance.  Raises QuadratureError (carrying the
    achieved error estimate) if the tolerance is never met.
    """
    t = float(t)
    if t < 0:
        raise DomainError("time must be nonnegative")
    if t == 0.0 or r.eta == 0.0:
        return 0.0
    w_max = _integration_cutoff(r)
    # prefactor of J with the omega**s power folded into the node weights
    j_pref = r.eta * r.omega_c ** (1.0 - r.s)
    n = max(32, math.ceil(2.0 * w_max * t / np.pi))
    prev = None
    for _ in range(max_doublings + 1):
        nodes, weights = _panel_nodes(r, w_max, n)
        jw = j_pref * np.exp(-nodes / r.omega_c) * weights
        cur = 2.0 * float(np.sum(jw * _rate_kernel(omega_j, t, nodes)))
        if prev is not None:
            err = abs(cur - prev)
            if err <= max(abs_tol, rel_tol * abs(cur)):
                return cur
        prev = cur
        n *= 2
    raise QuadratureError(
        f"decay-rate quadrature did not reach rel_tol={rel_tol} "
        f"(achieved ~{err:.3e} at {n // 2} panels)", achieved=err)


def decay_rate_quadrature_grid(omega_j, times, r: ReservoirSpec,
                               rel_tol: float = 1e-8, abs_tol: float = 1e-10):
    """Vectorized quadrature rate over an array of times.

    Uses one panelization sized for the largest time (plus a single doubling
    pass as a convergence check), evaluating the kernel for all times by
    blocked matrix products.  This is the rate path trajectories take when
    s has no closed form.
    """
    t_arr = np.asarray(times, dtype=float)
    if np.any(t_arr < 0):
        raise DomainError("times must be nonnegative")
    if r.eta == 0.0:
        return np.zeros_like(t_arr)
    w_max = _integration_cutoff(r)
    t_big = float(t_arr.max())
    if t_big == 0.0:
        return np.zeros_like(t_arr)
    j_pref = r.eta * r.omega_c ** (1.0 - r.s)
    n = max(32, math.ceil(2.0 * w_max * t_big / np.pi))

    def evaluate(n_panels):
        nodes, weights = _panel_nodes(r, w_max, n_panels)
        jw = j_pref * np.exp(-nodes / r.omega_c) * weights
        out = np.empty_like(t_arr)
        block = max(1, int(2e6 / max(nodes.size, 1)))
        flat_t = t_arr.ravel()
        flat_o = out.ravel()
        for k in range(0, flat_t.size, block):
            tb = flat_t[k:k + block, None]
            flat_o[k:k + block] = 2.0 * (
                (tb * np.sinc((omega_j - nodes[None, :]) * tb / np.pi)) @ jw)
        return out

    coarse = evaluate(n)
    fine = evaluate(2 * n)
    err = float(np.max(np.abs(fine - coarse)))
    scale = float(np.max(np.abs(fine))) or 1.0
    if err > max(abs_tol, rel_tol * scale):
        raise QuadratureError(
            f"grid decay-rate quadrature not converged (delta {err:.3e})",
            achieved=err)
    return fine


def decay_rate_series(omega_j, times, r: ReservoirSpec):
    """Rate samples over an array of times, closed form when available."""
    if r.has_closed_form:
        return decay_rate_closed(omega_j, times, r)
    return decay_rate_quadrature_grid(omega_j, times, r)


def beta_series(omega_j, grid: TimeGrid, r: ReservoirSpec,
                check_tol: float = 1e-8, _rate_fn=None):
    """Cumulative decay exponent beta_j(t_k) = int_0^{t_k} gamma(omega_j, t') dt'.

    Composite Simpson on an internally refined grid, verified against a
    further 2x refinement; disagreement beyond check_tol raises
    QuadratureError.  The refinement factor is chosen from the sample spacing
    so integration accuracy does not depend on how coarsely the caller wants
    the output sampled (a 5-point output grid still integrates at dt <= 5e-4).
    Closed-form rates are used for s in {1/2, 1, 3}, grid quadrature otherwise.
    """
    rate = _rate_fn or (lambda tt: decay_rate_series(omega_j, tt, r))
    base = 2 * max(1, math.ceil(grid.dt / 1e-3 - 1e-12))

    def cumulative(factor):
        fine = grid.refined(factor)
        g = rate(fine.samples)
        b = cumulative_simpson(g, x=fine.samples, initial=0.0)
        return b[::factor]

    b2 = cumulative(base)
    b4 = cumulative(2 * base)
    err = float(np.max(np.abs(b4 - b2)))
    if err > check_tol:
        raise QuadratureError(
            f"beta integration not converged under refinement (delta {err:.3e})",
            achieved=err)
    return b4
