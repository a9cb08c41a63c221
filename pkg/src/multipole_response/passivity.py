r"""Spectral passivity, the high-frequency sum rule and the resonant bound.

For a single transition the loss of the wave is controlled by

.. math::

   {\rm Im}\,\frac{\varepsilon}{\mu^*} = {\rm Im}\,\frac{1}{D}\left[
       \Big(1 + \frac{\Delta_{\rm dia}}{\omega_{eg}^2}\Big)\Delta_{\rm e-dip}
       + \Delta_{\rm m-dip} + (\Delta_{\rm quad} - \Delta_{\rm dip-oct})\,\omega^2\right],

which stays positive while the octopole term :math:`\Delta_{\rm dip-oct}\omega^2`
is small next to the dipole strength.  That is the premise of the
multipole expansion, whose small parameter grows with frequency.  The
hierarchy ratio :math:`\eta` of a model therefore also fixes the highest
frequency at which the model is meaningful,
:math:`\omega_{\rm valid} = \min_e \sqrt{\eta\,\Delta^e_{\rm e-dip}/\Delta^e_{\rm dip-oct}}`.
The default passivity scan stops there; beyond it ``Im[eps mu]`` turns
negative for every diamagnetic model.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np
from scipy import optimize

from .errors import GridError, InfeasibleStrategyError, RegimeError
from .model import (
    FrequencyGrid,
    MediumModel,
    MultipoleTransition,
    inverse_permeability,
    permittivity,
    susceptibility,
    validate_model,
)

__all__ = [
    "SumRuleReport",
    "BandReport",
    "ResonantBound",
    "sum_rule",
    "complete_model",
    "multipole_cutoff",
    "passivity_scan_grid",
    "scan_bands",
    "resonant_bound",
    "random_model",
]

SUM_RULE_RTOL = 1e-10
#: ``Im[eps mu]`` above ``-POSITIVITY_RTOL * scale`` counts as a numerical zero.
POSITIVITY_RTOL = 1e-14
NARROW_RESONANCE = 50.0


@dataclass(frozen=True)
class SumRuleReport:
    """Residual of ``sum_e (delta_dia/omega_eg**2 + delta_quad - delta_oct)``."""

    residual: float
    per_transition_terms: tuple[float, ...]
    complete: bool


def sum_rule(model: MediumModel) -> SumRuleReport:
    terms = tuple(t.delta_dia / t.omega_eg**2 + t.delta_quad - t.delta_oct
                  for t in model.transitions)
    residual = float(sum(terms))
    scale = max(1.0, sum(abs(v) for v in terms))
    return SumRuleReport(residual, terms, abs(residual) < SUM_RULE_RTOL * scale)


def complete_model(model: MediumModel, strategy: str = "adjust-octopole") -> MediumModel:
    """Enforce the sum rule transition by transition.

    ``"adjust-octopole"`` sets ``delta_oct = delta_quad + delta_dia/omega_eg**2``;
    ``"adjust-diamagnetic"`` sets ``delta_dia = omega_eg**2 (delta_oct - delta_quad)``.
    A model that already satisfies the sum rule is returned as is.

    Raises
    ------
    InfeasibleStrategyError
        If the adjusted strength would be negative.
    ModelValidationError
        If the adjusted model breaks the multipole hierarchy.
    """
    if sum_rule(model).complete:
        return model
    new = []
    for i, t in enumerate(model.transitions):
        w2 = t.omega_eg**2
        if strategy == "adjust-octopole":
            new.append(replace(t, delta_oct=t.delta_quad + t.delta_dia / w2))
        elif strategy == "adjust-diamagnetic":
            if t.delta_oct < t.delta_quad:
                raise InfeasibleStrategyError(
                    f"transition {i}: delta_oct < delta_quad would need a negative delta_dia")
            new.append(replace(t, delta_dia=w2 * (t.delta_oct - t.delta_quad)))
        else:
            raise ValueError(f"unknown completion strategy {strategy!r}")
    return validate_model(model.with_transitions(new))


def multipole_cutoff(model: MediumModel) -> float:
    """Highest frequency at which every octopole term obeys the hierarchy ratio."""
    limits = [np.sqrt(model.hierarchy_ratio * t.delta_edip / t.delta_oct)
              for t in model.transitions if t.delta_oct > 0]
    return float(min(limits)) if limits else np.inf


def passivity_scan_grid(model: MediumModel, points: int = 4096, decades: float = 3.0,
                        window_points: int = 161, wmin=None, wmax=None) -> np.ndarray:
    """Log grid plus dense ``+-10 gamma_e`` windows around every resonance.

    The log part spans ``min omega_eg / 10**decades`` to the smaller of
    ``max omega_eg * 10**decades`` and :func:`multipole_cutoff`, unless
    ``wmin``/``wmax`` are given.  ``window_points`` over 20 linewidths gives
    8 points per ``gamma_e``.
    """
    if model.is_vacuum:
        lo, hi = 10.0**-decades, 10.0**decades
    else:
        lo = min(t.omega_eg for t in model.transitions) * 10.0**-decades
        hi = min(max(t.omega_eg for t in model.transitions) * 10.0**decades,
                 multipole_cutoff(model))
    lo = lo if wmin is None else float(wmin)
    hi = hi if wmax is None else float(wmax)
    if not 0 < lo < hi:
        raise GridError("scan range must satisfy 0 < wmin < wmax")
    parts = [np.geomspace(lo, hi, points)]
    for t in model.transitions:
        window = np.linspace(t.omega_eg - 10 * t.gamma_e, t.omega_eg + 10 * t.gamma_e, window_points)
        parts.append(window[(window >= lo) & (window <= hi)])
    return np.unique(np.concatenate(parts))


class Band(NamedTuple):
    lo: float
    hi: float


@dataclass(frozen=True)
class BandReport:
    """Where ``Im chi < 0`` and how small ``Im[eps mu]`` gets on the scan.

    ``lossless`` marks the vacuum-like case where ``Im[eps mu]`` vanishes
    identically; passivity then holds vacuously.
    """

    negative_imchi_bands: tuple[Band, ...]
    min_im_epsmu: tuple[float, float]
    passivity_ok: bool
    lossless: bool
    omega_valid: float
    scan_range: tuple[float, float]


def _im_chi(model, w):
    return np.asarray(susceptibility(model, w)).imag


def _im_epsmu(model, w):
    return (np.asarray(permittivity(model, w)) / np.asarray(inverse_permeability(model, w))).imag


def _check_linewidths(model: MediumModel, w: np.ndarray):
    for i, t in enumerate(model.transitions):
        lo, hi = t.omega_eg - t.gamma_e, t.omega_eg + t.gamma_e
        if lo < w[0] or hi > w[-1]:
            continue
        count = np.count_nonzero((w >= lo) & (w <= hi))
        if count < 16:
            raise GridError(
                f"grid under-resolves transition {i}: {count} points within one "
                "linewidth of the resonance (need 8 per gamma_e)")


def scan_bands(model: MediumModel, grid=None) -> BandReport:
    """Locate negative ``Im chi`` bands and the minimum of ``Im[eps mu]``.

    Band edges are refined by bracketing root search to a relative width of
    1e-6; the minimum by golden-section search between grid neighbours.
    ``grid`` may be a :class:`FrequencyGrid` or an increasing array and
    defaults to :func:`passivity_scan_grid`.
    """
    if grid is None:
        w = passivity_scan_grid(model)
    else:
        w = np.asarray(grid.samples if isinstance(grid, FrequencyGrid) else grid, dtype=float)
    if w.ndim != 1 or w.size < 8 or w[0] <= 0 or np.any(np.diff(w) <= 0):
        raise GridError("scan grid must be at least 8 increasing positive frequencies")
    _check_linewidths(model, w)

    im_chi = _im_chi(model, w)
    negative = im_chi < 0
    bands = []
    i = 0
    while i < w.size:
        if not negative[i]:
            i += 1
            continue
        j = i
        while j + 1 < w.size and negative[j + 1]:
            j += 1
        lo = w[0] if i == 0 else _edge(model, w[i - 1], w[i])
        hi = w[-1] if j == w.size - 1 else _edge(model, w[j], w[j + 1])
        bands.append(Band(lo, hi))
        i = j + 1

    f = _im_epsmu(model, w)
    scale = float(np.max(np.abs(f)))
    k = int(np.argmin(f))
    w_star, f_star = float(w[k]), float(f[k])
    if 0 < k < w.size - 1 and scale > 0:
        res = optimize.minimize_scalar(lambda x: float(_im_epsmu(model, x)),
                                       bracket=(w[k - 1], w[k], w[k + 1]), method="golden")
        if res.fun < f_star and w[k - 1] < res.x < w[k + 1]:
            w_star, f_star = float(res.x), float(res.fun)
    lossless = scale == 0.0
    ok = lossless or f_star > -POSITIVITY_RTOL * scale
    return BandReport(tuple(bands), (w_star, f_star), bool(ok), lossless,
                      multipole_cutoff(model), (float(w[0]), float(w[-1])))


def _edge(model, a, b):
    return optimize.brentq(lambda x: float(_im_chi(model, x)), a, b, xtol=1e-300, rtol=1e-7)


class ResonantBound(NamedTuple):
    lhs: float
    rhs: float
    satisfied: bool


def resonant_bound(model: MediumModel, transition_index: int) -> ResonantBound:
    """Compare ``Im[eps/mu*]`` at a narrow resonance with its dipole-octopole bound.

    ``lhs`` is evaluated from the full spectra at ``omega = omega_eg``;
    ``rhs = (delta_edip - delta_oct omega_eg**2) / (2 omega_eg gamma_e)``.
    ``satisfied`` requires ``lhs > rhs > 0``.

    Raises
    ------
    RegimeError
        If ``gamma_e > omega_eg / 50``.
    """
    t = model.transitions[transition_index]
    if t.gamma_e > t.omega_eg / NARROW_RESONANCE:
        raise RegimeError(
            f"transition {transition_index} is not narrow: gamma_e/omega_eg = "
            f"{t.gamma_e / t.omega_eg:.3g} > 1/{NARROW_RESONANCE:g}")
    w = t.omega_eg
    eps = permittivity(model, w)
    inv_mu = inverse_permeability(model, w)
    lhs = float((eps * np.conj(inv_mu)).imag)
    rhs = (t.delta_edip - t.delta_oct * w**2) / (2.0 * w * t.gamma_e)
    return ResonantBound(lhs, float(rhs), bool(lhs > rhs > 0))


def random_model(rng: np.random.Generator, n_transitions: int = 3, eta: float = 0.5,
                 omega_range=(1.0, 100.0), gamma_ratio=(1e-3, 1e-1)) -> MediumModel:
    """Draw a hierarchy-obeying, sum-rule-complete model.

    Resonances are log-uniform over ``omega_range`` and ``gamma_e/omega_eg``
    uniform over ``gamma_ratio``.  Strengths are log-uniform:
    ``delta_edip/omega_eg**2`` in ``[1e-3, 1e-1]``, ``delta_mdip/omega_eg**2``
    in ``[1e-6, 1e-3]``, ``delta_oct`` within two decades below
    ``(1 - 1e-3) eta delta_edip/omega_eg**2``, and ``delta_quad`` within two
    decades below ``delta_oct``.  ``delta_dia`` then follows from the sum rule.
    """
    transitions = []
    for _ in range(n_transitions):
        w = 10 ** rng.uniform(*np.log10(omega_range))
        w2 = w * w
        edip = w2 * 10 ** rng.uniform(-3, -1)
        oct_ = (1 - 1e-3) * eta * edip / w2 * 10 ** rng.uniform(-2, 0)
        transitions.append(MultipoleTransition(
            omega_eg=w,
            gamma_e=w * rng.uniform(*gamma_ratio),
            delta_edip=edip,
            delta_mdip=w2 * 10 ** rng.uniform(-6, -3),
            delta_quad=oct_ * 10 ** rng.uniform(-2, 0),
            delta_oct=oct_,
        ))
    model = validate_model(MediumModel(tuple(transitions), eta))
    return complete_model(model, "adjust-diamagnetic")
