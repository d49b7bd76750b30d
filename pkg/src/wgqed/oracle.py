"""Independent reference solutions for single-photon scattering on a two-level emitter.

Three routes to the same physics, none of which touch the evolution driver:

``analytic_psi_e`` / ``analytic_xi_out``
    Closed form for a Gaussian input. With ``a = 2 ln2 / tau_g**2`` and
    ``b = gamma / 2`` the emitter amplitude is
    ``sqrt(gamma) * C * exp(-b t) * I(t)`` where ``C`` is the pulse normalization and
    ``I(t) = int_0^t exp(b s - a (s - t0)**2) ds``, an erf difference after
    completing the square.

``eom_integrate``
    RK4 on ``psi' = -(gamma/2) psi + sqrt(gamma) xi(t)`` with the discrete
    input-output rule ``xi_out[n+1] = xi[n+1] - sqrt(gamma) psi[n]``.

``collision_step``
    The first-order collision unitary for one bin, for order-of-accuracy checks
    against a single RK4 step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np
from scipy.interpolate import CubicSpline

from .basis import FockBasis, WaveguideBasis, as_composite
from .operators import create, destroy, identity, tensor
from .states import StateVector

__all__ = [
    "GaussianPulseParams",
    "gaussian_pulse",
    "analytic_psi_e",
    "analytic_xi_out",
    "eom_integrate",
    "collision_step",
]

_LN2 = math.log(2.0)


@dataclass(frozen=True)
class GaussianPulseParams:
    tau_g: float = 1.0
    t0: float = 5.0
    gamma: float = 1.0

    def __post_init__(self):
        if not self.tau_g > 0:
            raise ValueError("tau_g must be positive")
        if not self.gamma > 0:
            raise ValueError("gamma must be positive")


def gaussian_pulse(t, tau_g: float = 1.0, t0: float = 5.0):
    """Unit-norm Gaussian ``sqrt(2/tau_g) (ln2/pi)^(1/4) exp(-2 ln2 (t-t0)^2 / tau_g^2)``."""
    t = np.asarray(t, dtype=float)
    c = math.sqrt(2.0 / tau_g) * (_LN2 / math.pi) ** 0.25
    return c * np.exp(-2.0 * _LN2 * (t - t0) ** 2 / tau_g**2)


def _erf(x):
    return np.vectorize(math.erf, otypes=[float])(x)


def _integral(t, p: GaussianPulseParams):
    a = 2.0 * _LN2 / p.tau_g**2
    b = p.gamma / 2.0
    x = 2.0 * a * (t - p.t0) - b
    y = 2.0 * a * p.t0 + b
    pre = math.sqrt(math.pi) * math.exp(b * b / (4.0 * a) + b * p.t0) / (2.0 * math.sqrt(a))
    return pre * (_erf(x / (2.0 * math.sqrt(a))) + _erf(y / (2.0 * math.sqrt(a))))


def analytic_psi_e(t, params: GaussianPulseParams = GaussianPulseParams()):
    """Emitter amplitude at time ``t`` for a Gaussian pulse arriving on a ground-state emitter at ``t = 0``."""
    t = np.asarray(t, dtype=float)
    p = params
    c = math.sqrt(2.0 * p.gamma / p.tau_g) * (_LN2 / math.pi) ** 0.25
    out = c * np.exp(-p.gamma * t / 2.0) * _integral(t, p)
    return out.astype(complex) if out.ndim else complex(out)


def analytic_xi_out(t, params: GaussianPulseParams = GaussianPulseParams()):
    t = np.asarray(t, dtype=float)
    xi = gaussian_pulse(t, params.tau_g, params.t0)
    return xi - math.sqrt(params.gamma) * analytic_psi_e(t, params)


def eom_integrate(xi_in: Union[Callable, np.ndarray], gamma: float, dt: float,
                  n_samples: int = None, psi0: complex = 0.0, t_start: float = 0.0):
    """RK4 solution of the emitter equation of motion on a uniform grid.

    ``xi_in`` is a callable of time or an array sampled at ``t_start + k dt``;
    arrays are interpolated with a cubic spline for the RK4 midpoints.
    Returns ``(psi_e, xi_out)`` sampled on the same grid.
    """
    if callable(xi_in):
        if n_samples is None:
            raise ValueError("n_samples is required for a callable input")
        f = lambda t: complex(xi_in(t))  # noqa: E731
        xi = np.array([f(t_start + k * dt) for k in range(n_samples)], dtype=complex)
    else:
        xi = np.asarray(xi_in, dtype=complex)
        if xi.ndim != 1 or xi.size < 2:
            raise ValueError("sampled input needs at least two points")
        spline = CubicSpline(t_start + dt * np.arange(xi.size), xi)
        f = lambda t: complex(spline(t))  # noqa: E731
    n = xi.size
    g = float(gamma)
    sg = math.sqrt(g)
    rhs = lambda t, p: -0.5 * g * p + sg * f(t)  # noqa: E731
    psi = np.empty(n, dtype=complex)
    psi[0] = psi0
    for k in range(n - 1):
        t = t_start + k * dt
        p = psi[k]
        k1 = rhs(t, p)
        k2 = rhs(t + dt / 2, p + dt / 2 * k1)
        k3 = rhs(t + dt / 2, p + dt / 2 * k2)
        k4 = rhs(t + dt, p + dt * k3)
        psi[k + 1] = p + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
    xi_out = np.empty(n, dtype=complex)
    xi_out[0] = xi[0] - sg * psi0
    xi_out[1:] = xi[1:] - sg * psi[:-1]
    return psi, xi_out


def collision_step(psi: StateVector, k: int, gamma: float, dt: float) -> StateVector:
    """Apply ``1 + sqrt(gamma dt)(s+ w_k - s w_k^+) - (gamma/2) dt s+ s w_k w_k^+``.

    ``psi`` must live on (two-level emitter) x (waveguide).
    """
    cb = as_composite(psi.basis)
    if len(cb.factors) != 2 or not isinstance(cb.factors[0], FockBasis) \
            or not isinstance(cb.factors[1], WaveguideBasis):
        raise ValueError("collision_step expects an emitter (x) waveguide state")
    be, bw = cb.factors
    s, sd = destroy(be), create(be)
    w, wd = destroy(bw), create(bw)
    U = (tensor(identity(be), identity(bw))
         + math.sqrt(gamma * dt) * (tensor(sd, w) - tensor(s, wd))
         - 0.5 * gamma * dt * tensor(sd * s, w * wd))
    U.set_active_bin(k)
    return U(psi)
