r"""Multipolar dispersion model of a magneto-dielectric medium.

A medium is a sum over excited states :math:`e`, each a damped resonance

.. math::

   D_e(\omega) = \omega_{eg}^2 - \omega^2 - 2i\omega\gamma_e

weighted by five non-negative transition strengths.  With the quadrupole and
octopole couplings moved from the permittivity into the permeability the
response functions read

.. math::

   \varepsilon(\omega) = 1 + \sum_e \frac{\Delta^{e}_{\rm e-dip}}{D_e(\omega)}

   \frac{1}{\mu(\omega)} = 1 + \sum_e \left[\frac{\Delta^{e}_{\rm dia}}{\omega_{eg}^2}
       - \frac{\Delta^{e}_{\rm m-dip} + (\Delta^{e}_{\rm quad}
       - \Delta^{e}_{\rm dip-oct})\omega^2}{D_e(\omega)}\right]

and the magnetic susceptibility is :math:`\chi = 1 - 1/\mu`.  Natural units
(:math:`\varepsilon_0 = \mu_0 = c = 1`) are used throughout and the time
dependence is :math:`e^{-i\omega t}`, so causal poles lie in the lower half
plane.

All evaluators accept scalars or arrays of real frequencies and accumulate
the transition sum in model order, so a value does not depend on how many
other frequencies are evaluated alongside it.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np
from scipy import integrate

from .errors import DegenerateModelError, GridError, ModelValidationError, SumRuleError

__all__ = [
    "MultipoleTransition",
    "MediumModel",
    "FrequencyGrid",
    "ComplexSpectrum",
    "DEFAULT_ETA",
    "validate_model",
    "permittivity_k",
    "permittivity",
    "inverse_permeability",
    "inverse_permeability_magnetic",
    "permeability",
    "susceptibility",
    "eps_mu",
    "static_chi",
    "static_chi_multipole_form",
    "transverse_current_coefficient",
    "bound_current_parts",
    "transverse_current",
    "reassign_dispersion",
    "hydrogen_diamagnetic_moment",
    "hydrogen_1s_mean_rho2",
    "evaluate_spectrum",
    "default_grid",
]

DEFAULT_ETA = 0.5
#: Below this magnitude of ``1/mu`` the permeability is reported as degenerate.
DEGENERATE_INV_MU = 1e-12

STRENGTHS = ("delta_edip", "delta_mdip", "delta_dia", "delta_quad", "delta_oct")
QUANTITIES = ("chi", "epsilon", "mu", "inv_mu", "eps_mu")


@dataclass(frozen=True)
class MultipoleTransition:
    """One excited state: resonance, half-linewidth and transition strengths.

    ``delta_edip``, ``delta_mdip`` and ``delta_dia`` carry units of
    frequency squared; ``delta_quad`` and ``delta_oct`` are dimensionless
    because they multiply :math:`\\omega^2` (or :math:`k^2`).
    """

    omega_eg: float
    gamma_e: float
    delta_edip: float = 0.0
    delta_mdip: float = 0.0
    delta_dia: float = 0.0
    delta_quad: float = 0.0
    delta_oct: float = 0.0

    @property
    def pole_frequency(self) -> float:
        """Real part of the resonance poles, ``sqrt(omega_eg**2 - gamma_e**2)``."""
        return float(np.sqrt(self.omega_eg**2 - self.gamma_e**2))

    def denominator(self, omega):
        return self.omega_eg**2 - omega**2 - 2j * omega * self.gamma_e


@dataclass(frozen=True)
class MediumModel:
    """An ordered collection of transitions plus the multipole hierarchy ratio.

    The constructor does not validate; pass the instance through
    :func:`validate_model` (the model-file loader does this).  Keeping the two
    apart lets tests build deliberately unphysical counterexamples.
    """

    transitions: tuple[MultipoleTransition, ...] = ()
    hierarchy_ratio: float = DEFAULT_ETA

    def __post_init__(self):
        object.__setattr__(self, "transitions", tuple(self.transitions))

    def __len__(self):
        return len(self.transitions)

    @property
    def is_vacuum(self) -> bool:
        return len(self.transitions) == 0

    @property
    def resonances(self) -> tuple[tuple[float, float], ...]:
        """``(omega_eg, gamma_e)`` for every transition."""
        return tuple((t.omega_eg, t.gamma_e) for t in self.transitions)

    def with_transitions(self, transitions: Sequence[MultipoleTransition]) -> "MediumModel":
        return replace(self, transitions=tuple(transitions))


def validate_model(model: MediumModel) -> MediumModel:
    """Return ``model`` unchanged if every invariant holds.

    Raises
    ------
    ModelValidationError
        For the first violated invariant, tagged with the transition index.
    """
    eta = model.hierarchy_ratio
    if not (np.isfinite(eta) and 0.0 < eta < 1.0):
        raise ModelValidationError(f"hierarchy ratio must lie in (0, 1), got {eta!r}")
    for i, t in enumerate(model.transitions):
        values = (t.omega_eg, t.gamma_e) + tuple(getattr(t, name) for name in STRENGTHS)
        if not all(np.isfinite(v) for v in values):
            raise ModelValidationError("all parameters must be finite", i)
        if not t.omega_eg > 0:
            raise ModelValidationError("omega_eg must be positive", i)
        if not t.gamma_e > 0:
            raise ModelValidationError("gamma_e must be positive", i)
        if not t.gamma_e < t.omega_eg:
            raise ModelValidationError(
                "gamma_e must be smaller than omega_eg (underdamped resonance)", i)
        for name in STRENGTHS:
            if getattr(t, name) < 0:
                raise ModelValidationError(f"{name} must be non-negative", i)
        if t.delta_oct > 0:
            if not t.delta_edip > 0:
                raise ModelValidationError(
                    "an octopole coupling requires a nonzero electric-dipole strength", i)
            if t.delta_oct * t.omega_eg**2 > eta * t.delta_edip:
                raise ModelValidationError(
                    f"multipole hierarchy violated: delta_oct*omega_eg**2 = "
                    f"{t.delta_oct * t.omega_eg**2:.6g} exceeds "
                    f"eta*delta_edip = {eta * t.delta_edip:.6g}", i)
    return model


def _as_freq(omega):
    return np.asarray(omega, dtype=float)


def _finish(value):
    return value[()] if isinstance(value, np.ndarray) and value.ndim == 0 else value


def permittivity_k(model: MediumModel, omega, k):
    """Spatially dispersive permittivity :math:`\\varepsilon(\\omega, k)`.

    The quadrupole coupling enters as :math:`+k^2\\Delta_{\\rm quad}` and the
    dipole-octopole cross term as :math:`-k^2\\Delta_{\\rm dip-oct}`.
    """
    omega = _as_freq(omega)
    k2 = _as_freq(k) ** 2
    total = np.ones(np.broadcast(omega, k2).shape, dtype=complex)
    for t in model.transitions:
        total = total + (t.delta_edip + k2 * (t.delta_quad - t.delta_oct)) / t.denominator(omega)
    return _finish(total)


def permittivity(model: MediumModel, omega):
    """Permittivity after the quadrupole/octopole terms are moved into ``1/mu``."""
    omega = _as_freq(omega)
    total = np.ones(omega.shape, dtype=complex)
    for t in model.transitions:
        total = total + t.delta_edip / t.denominator(omega)
    return _finish(total)


def inverse_permeability_magnetic(model: MediumModel, omega):
    """``1/mu`` carrying only the diamagnetic and magnetic-dipole terms.

    This is the partner of :func:`permittivity_k`; together they describe the
    medium before the spatial dispersion is reassigned.
    """
    omega = _as_freq(omega)
    total = np.ones(omega.shape, dtype=complex)
    for t in model.transitions:
        total = total + (t.delta_dia / t.omega_eg**2 - t.delta_mdip / t.denominator(omega))
    return _finish(total)


def _magnetic_sum(model: MediumModel, omega):
    # sum_e [delta_dia/omega_eg**2 - N_e/D_e], i.e. 1/mu - 1 without the offset
    omega = _as_freq(omega)
    w2 = omega**2
    total = np.zeros(omega.shape, dtype=complex)
    for t in model.transitions:
        numerator = t.delta_mdip + (t.delta_quad - t.delta_oct) * w2
        total = total + (t.delta_dia / t.omega_eg**2 - numerator / t.denominator(omega))
    return total


def inverse_permeability(model: MediumModel, omega):
    """Inverse permeability including the reassigned multipole terms."""
    return _finish(1.0 + _magnetic_sum(model, omega))


def permeability(model: MediumModel, omega):
    """Relative permeability, the reciprocal of :func:`inverse_permeability`.

    Raises
    ------
    DegenerateModelError
        If ``|1/mu|`` drops below ``1e-12`` at any requested frequency.
    """
    inv = np.asarray(inverse_permeability(model, omega))
    if np.any(np.abs(inv) < DEGENERATE_INV_MU):
        raise DegenerateModelError("inverse permeability vanishes; permeability is undefined")
    return _finish(1.0 / inv)


def susceptibility(model: MediumModel, omega):
    """Magnetic susceptibility :math:`\\chi = 1 - 1/\\mu` (with ``M = chi B``)."""
    # Summed directly: forming 1 - (1 + x) would discard the low bits of x.
    return _finish(-_magnetic_sum(model, omega))


def eps_mu(model: MediumModel, omega):
    """Product :math:`\\varepsilon(\\omega)\\mu(\\omega)`."""
    return _finish(np.asarray(permittivity(model, omega)) * np.asarray(permeability(model, omega)))


def static_chi(model: MediumModel) -> float:
    """Static susceptibility from the diamagnetic and magnetic-dipole strengths."""
    # -sum_e (delta_dia - delta_mdip)/omega_eg**2, evaluated through the same
    # code path as susceptibility(model, 0) so that the two agree bitwise.
    return float(-_magnetic_sum(model, 0.0).real)


def static_chi_multipole_form(model: MediumModel, *, tolerance: float | None = None) -> float:
    """Static susceptibility written through the quadrupole and octopole strengths.

    Equal to :func:`static_chi` only once the high-frequency sum rule holds,
    so an incomplete model is rejected.  Without a dipole-octopole coupling
    every term is non-negative and the medium cannot be diamagnetic.

    Raises
    ------
    SumRuleError
        If the sum-rule residual exceeds ``tolerance`` (default: the
        :func:`multipole_response.passivity.sum_rule` criterion).
    """
    from .passivity import sum_rule

    report = sum_rule(model)
    ok = report.complete if tolerance is None else abs(report.residual) < tolerance
    if not ok:
        raise SumRuleError(
            f"sum-rule residual {report.residual:.3e} too large; the multipole form of "
            "chi(0) does not apply")
    total = 0.0
    for t in model.transitions:
        total = total - (t.delta_oct - t.delta_quad - t.delta_mdip / t.omega_eg**2)
    return total


def transverse_current_coefficient(epsilon, inv_mu, omega, k):
    """Coefficient of the vector potential in the transverse bound current.

    In natural units :math:`j^\\perp = [(\\varepsilon - 1)\\omega^2
    - (1/\\mu - 1)k^2] A`.  Only this combination is observable, which is what
    allows a :math:`k^2 f(\\omega)` term of the permittivity to be traded for a
    :math:`-\\omega^2 f(\\omega)` term of the inverse permeability.
    """
    return (np.asarray(epsilon) - 1.0) * np.asarray(omega) ** 2 \
        - (np.asarray(inv_mu) - 1.0) * np.asarray(k) ** 2


def bound_current_parts(model: MediumModel, omega, k, parameterization: str = "reassigned"):
    """Electric and magnetic parts ``((eps - 1) omega**2, (1/mu - 1) k**2)``.

    The departures from vacuum are summed transition by transition instead
    of being recovered as ``eps - 1``: at high frequency ``eps - 1`` is far
    below the spacing of doubles near 1 and the subtraction would keep only a
    few digits.

    Parameters
    ----------
    parameterization : {"reassigned", "dispersive"}
        ``"dispersive"`` is the pair :func:`permittivity_k` /
        :func:`inverse_permeability_magnetic`; ``"reassigned"`` the pair
        :func:`permittivity` / :func:`inverse_permeability`.
    """
    if parameterization not in ("reassigned", "dispersive"):
        raise ValueError(f"unknown parameterization {parameterization!r}")
    omega = _as_freq(omega)
    k2 = _as_freq(k) ** 2
    w2 = omega**2
    shape = np.broadcast(omega, k2).shape
    electric = np.zeros(shape, dtype=complex)
    magnetic = np.zeros(shape, dtype=complex)
    for t in model.transitions:
        d = t.denominator(omega)
        c = t.delta_quad - t.delta_oct
        if parameterization == "dispersive":
            electric = electric + (t.delta_edip + k2 * c) / d
            magnetic = magnetic + (t.delta_dia / t.omega_eg**2 - t.delta_mdip / d)
        else:
            electric = electric + t.delta_edip / d
            magnetic = magnetic + (t.delta_dia / t.omega_eg**2 - (t.delta_mdip + c * w2) / d)
    return _finish(electric * w2), _finish(magnetic * k2)


def transverse_current(model: MediumModel, omega, k, parameterization: str = "reassigned"):
    """:func:`transverse_current_coefficient` of ``model`` without the vacuum offset."""
    electric, magnetic = bound_current_parts(model, omega, k, parameterization)
    return electric - magnetic


def reassign_dispersion(model: MediumModel) -> tuple[Callable, Callable]:
    """Remove the wavenumber dependence of the permittivity.

    Returns
    -------
    epsilon, inv_mu : callable
        Functions of ``omega`` alone.  ``epsilon`` keeps only the
        electric-dipole strengths; ``inv_mu`` gains
        ``-(delta_quad - delta_oct) * omega**2 / D_e`` per transition, so the
        transverse current coefficient is unchanged for every ``(omega, k)``.
    """

    def epsilon(omega):
        return permittivity(model, omega)

    def inv_mu(omega):
        return inverse_permeability(model, omega)

    return epsilon, inv_mu


def hydrogen_diamagnetic_moment(B, mean_rho2, *, prefactor):
    """Induced orbital moment ``-prefactor * <x^2 + y^2> * B``.

    ``prefactor`` is :math:`e^2/2m` in whatever unit system the caller uses;
    ``mean_rho2`` is the ground-state expectation of :math:`x^2 + y^2` for a
    field along ``z``.
    """
    if not np.all(np.asarray(mean_rho2) > 0):
        raise ValueError("mean_rho2 must be positive")
    return -prefactor * mean_rho2 * np.asarray(B, dtype=float)


def hydrogen_1s_mean_rho2(bohr_radius: float = 1.0) -> float:
    """``<x^2 + y^2>`` of the hydrogen 1s state by radial and polar quadrature.

    The density is :math:`e^{-2r/a}/(\\pi a^3)`; the azimuthal integral is
    done analytically.
    """
    a = float(bohr_radius)

    def radial(r):
        return r**4 * np.exp(-2.0 * r / a) / (np.pi * a**3)

    def polar(theta):
        return np.sin(theta) ** 3

    r_part, _ = integrate.quad(radial, 0.0, np.inf, epsabs=0.0, epsrel=1e-13)
    theta_part, _ = integrate.quad(polar, 0.0, np.pi, epsabs=0.0, epsrel=1e-13)
    return 2.0 * np.pi * r_part * theta_part


@dataclass(frozen=True)
class FrequencyGrid:
    """Strictly increasing positive angular frequencies.

    ``spacing`` records whether the samples are uniform in ``omega``
    (``"linear"``) or in ``log(omega)`` (``"log"``); the Kramers-Kronig
    quadrature relies on that uniformity.
    """

    samples: np.ndarray
    spacing: str = "log"
    tail_exponent: float = 2.0

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=float)
        if samples.ndim != 1 or samples.size < 8:
            raise GridError("a frequency grid needs at least 8 samples")
        if not np.all(np.isfinite(samples)) or samples[0] <= 0:
            raise GridError("grid frequencies must be finite and positive")
        if not np.all(np.diff(samples) > 0):
            raise GridError("grid frequencies must be strictly increasing")
        if self.spacing not in ("linear", "log"):
            raise GridError(f"unknown grid spacing {self.spacing!r}")
        coord = samples if self.spacing == "linear" else np.log(samples)
        steps = np.diff(coord)
        if np.ptp(steps) > 1e-6 * steps.mean():
            raise GridError(f"samples are not uniformly spaced on a {self.spacing} scale")
        if self.tail_exponent < 1:
            raise GridError("tail_exponent must be at least 1")
        samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)

    @classmethod
    def log(cls, wmin, wmax, n, **kwargs):
        return cls(np.geomspace(wmin, wmax, int(n)), "log", **kwargs)

    @classmethod
    def linear(cls, wmin, wmax, n, **kwargs):
        return cls(np.linspace(wmin, wmax, int(n)), "linear", **kwargs)

    def refined(self, factor: int = 2) -> "FrequencyGrid":
        """Same span with ``factor`` times as many intervals."""
        n = (len(self) - 1) * factor + 1
        make = FrequencyGrid.log if self.spacing == "log" else FrequencyGrid.linear
        return make(self.samples[0], self.samples[-1], n, tail_exponent=self.tail_exponent)

    def __len__(self):
        return self.samples.size

    @property
    def step(self) -> float:
        """Uniform step in the native coordinate (``omega`` or ``log omega``)."""
        coord = self.samples if self.spacing == "linear" else np.log(self.samples)
        return float((coord[-1] - coord[0]) / (coord.size - 1))


@dataclass(frozen=True)
class ComplexSpectrum:
    """Complex response samples on a :class:`FrequencyGrid`.

    ``resonances`` optionally carries ``(omega_eg, gamma_e)`` pairs so that
    transforms can refuse grids too coarse to resolve the lines.
    """

    grid: FrequencyGrid
    values: np.ndarray
    quantity_label: str = "chi"
    resonances: tuple[tuple[float, float], ...] = field(default=())

    def __post_init__(self):
        values = np.asarray(self.values, dtype=complex)
        if values.shape != self.grid.samples.shape:
            raise GridError("spectrum values must match the grid length")
        if self.quantity_label not in QUANTITIES:
            raise ValueError(f"unknown quantity label {self.quantity_label!r}")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "resonances", tuple(self.resonances))

    @property
    def omega(self) -> np.ndarray:
        return self.grid.samples

    @property
    def real(self) -> np.ndarray:
        return self.values.real

    @property
    def imag(self) -> np.ndarray:
        return self.values.imag


_EVALUATORS = {
    "chi": susceptibility,
    "epsilon": permittivity,
    "mu": permeability,
    "inv_mu": inverse_permeability,
    "eps_mu": eps_mu,
}


def evaluate_spectrum(model: MediumModel, grid: FrequencyGrid, quantity: str = "chi") -> ComplexSpectrum:
    """Sample one response function of ``model`` on ``grid``."""
    values = np.asarray(_EVALUATORS[quantity](model, grid.samples))
    return ComplexSpectrum(grid, values, quantity, model.resonances)


def default_grid(model: MediumModel, points: int = 4096, decades: float = 3.0) -> FrequencyGrid:
    """Logarithmic grid from ``min omega_eg / 10**decades`` to ``max omega_eg * 10**decades``.

    The vacuum has no natural scale and gets ``[10**-decades, 10**decades]``.
    """
    if model.is_vacuum:
        lo = hi = 1.0
    else:
        lo = min(t.omega_eg for t in model.transitions)
        hi = max(t.omega_eg for t in model.transitions)
    return FrequencyGrid.log(lo * 10.0**-decades, hi * 10.0**decades, points)
