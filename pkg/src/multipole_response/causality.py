r"""Pole structure and time-domain response kernel of the susceptibility.

Every transition contributes a factor :math:`1/D_e(\omega)` whose zeros are

.. math::

   \omega_\pm = -i\gamma_e \pm \Omega_e, \qquad \Omega_e = \sqrt{\omega_{eg}^2 - \gamma_e^2},

both strictly in the lower half plane.  With the sum rule satisfied
:math:`\chi(\omega) \to 0` at infinity, the inversion contour closes, and

.. math::

   g(t) = \frac{1}{2\pi}\int \chi(\omega) e^{-i\omega t}\,d\omega
        = \theta(t)\sum_e e^{-\gamma_e t}\,[a_e\cos\Omega_e t + b_e\sin\Omega_e t].

The quadrupole and octopole numerators make :math:`\chi \sim 1/\omega`, so
:math:`g` jumps at :math:`t = 0`; sampled kernels store the midpoint value
there.  The discrete-transform route removes the leading high-frequency
moments with reference functions :math:`(\omega + i\beta)^{-j}` whose
transforms are known in closed form, transforms only the smooth remainder,
and never uses the pole locations.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import comb, factorial

import numpy as np
from scipy.signal import fftconvolve

from .errors import GridError, SumRuleError
from .model import MediumModel, susceptibility

__all__ = [
    "PolePair",
    "CausalKernel",
    "find_poles",
    "kernel_from_poles",
    "kernel_from_fft",
    "convolve_response",
    "high_frequency_moments",
]

#: Number of high-frequency moments removed before the discrete transform.
N_MOMENTS = 4


@dataclass(frozen=True)
class PolePair:
    """The two poles of one transition and the residues of ``chi`` there.

    ``locations[0]`` has positive real part.  The pair is symmetric under
    ``omega -> -conj(omega)`` and the residues obey ``r[1] = -conj(r[0])``.
    """

    locations: tuple[complex, complex]
    residues: tuple[complex, complex]
    source_transition: int


def find_poles(model: MediumModel) -> list[PolePair]:
    """Poles of ``chi`` with residues taken from the ``1/mu`` numerator."""
    pairs = []
    for index, t in enumerate(model.transitions):
        big_omega = t.pole_frequency
        plus = complex(big_omega, -t.gamma_e)
        minus = complex(-big_omega, -t.gamma_e)

        def numerator(w, t=t):
            return t.delta_mdip + (t.delta_quad - t.delta_oct) * w**2

        # D(w) = -(w - plus)(w - minus), so D'(plus) = -2 Omega and D'(minus) = 2 Omega.
        res_plus = -numerator(plus) / (2.0 * big_omega)
        res_minus = numerator(minus) / (2.0 * big_omega)
        pairs.append(PolePair((plus, minus), (res_plus, res_minus), index))
    return pairs


@dataclass(frozen=True)
class CausalKernel:
    """Time-domain susceptibility kernel.

    ``representation`` is ``"sampled"`` (``times``/``values`` on a uniform grid
    of spacing ``time_step``) or ``"pole-residue"`` (one damped sinusoid per
    transition: ``decay``, ``frequency``, ``cos_amp``, ``sin_amp``).
    """

    representation: str
    times: np.ndarray | None = None
    values: np.ndarray | None = None
    time_step: float | None = None
    decay: np.ndarray | None = None
    frequency: np.ndarray | None = None
    cos_amp: np.ndarray | None = None
    sin_amp: np.ndarray | None = None

    @property
    def duration(self) -> float | None:
        if self.times is None:
            return None
        return float(self.times[-1] - self.times[0])

    def __call__(self, t):
        """Evaluate a pole-residue kernel; zero for ``t < 0``, midpoint at ``t = 0``."""
        if self.representation != "pole-residue":
            raise TypeError("only pole-residue kernels can be evaluated at arbitrary times")
        t = np.asarray(t, dtype=float)
        out = np.zeros(t.shape)
        tt = np.where(t > 0, t, 0.0)
        for g, w, a, b in zip(self.decay, self.frequency, self.cos_amp, self.sin_amp):
            out += np.exp(-g * tt) * (a * np.cos(w * tt) + b * np.sin(w * tt))
        out = np.where(t > 0, out, np.where(t == 0, 0.5 * out, 0.0))
        return out[()] if out.ndim == 0 else out

    def sample(self, time_step: float, duration: float) -> "CausalKernel":
        """Sample a pole-residue kernel on ``[-duration/2, duration/2]``."""
        times = _symmetric_times(time_step, duration)
        return CausalKernel("sampled", times=times, values=self(times), time_step=time_step)

    def dc_content(self) -> float:
        """:math:`\\int_0^\\infty g(t)\\,dt`, which equals ``chi(0)``."""
        if self.representation == "pole-residue":
            return float(np.sum((self.cos_amp * self.decay + self.sin_amp * self.frequency)
                                / (self.decay**2 + self.frequency**2)))
        return float(np.sum(self.values) * self.time_step)


def _symmetric_times(time_step, duration):
    half = int(round(duration / (2.0 * time_step)))
    return np.arange(-half, half + 1) * time_step


def _check_sum_rule(model: MediumModel):
    from .passivity import sum_rule

    report = sum_rule(model)
    if not report.complete:
        raise SumRuleError(
            f"sum-rule residual {report.residual:.3e}: chi does not vanish at high "
            "frequency, so the response has an instantaneous part")


def kernel_from_poles(model: MediumModel) -> CausalKernel:
    """Exact kernel from the residues of :func:`find_poles`.

    Raises
    ------
    SumRuleError
        If the sum rule fails; the non-vanishing ``chi(inf)`` would add a
        delta-function response that this representation cannot hold.
    """
    _check_sum_rule(model)
    pairs = find_poles(model)
    decay = np.array([-p.locations[0].imag for p in pairs])
    freq = np.array([p.locations[0].real for p in pairs])
    res = np.array([p.residues[0] for p in pairs], dtype=complex)
    # g(t) = -i sum r exp(-i p t) = 2 exp(-gamma t) Im[r+ exp(-i Omega t)]
    return CausalKernel("pole-residue", decay=decay, frequency=freq,
                        cos_amp=2.0 * res.imag, sin_amp=-2.0 * res.real)


def high_frequency_moments(model: MediumModel, order: int = N_MOMENTS) -> np.ndarray:
    """Coefficients ``c_k`` of ``chi(omega) ~ sum_k c_k omega**-k`` for ``k <= order``.

    Obtained by expanding each ``N_e/D_e`` as a power series in ``1/omega``;
    ``c_0`` is the (sum-rule) constant ``chi(inf)``.
    """
    c = np.zeros(order + 1, dtype=complex)
    for t in model.transitions:
        w2 = t.omega_eg**2
        c[0] -= t.delta_dia / w2
        # N/D = -(C + m x^2) / (1 + 2i gamma x - w2 x^2), x = 1/omega
        big_c = t.delta_quad - t.delta_oct
        s = np.zeros(order + 1, dtype=complex)
        for k in range(order + 1):
            val = -big_c if k == 0 else 0.0
            if k == 2:
                val -= t.delta_mdip
            if k >= 1:
                val -= 2j * t.gamma_e * s[k - 1]
            if k >= 2:
                val += w2 * s[k - 2]
            s[k] = val
        c += s
    return c


def _reference_coefficients(moments: np.ndarray, beta: float) -> np.ndarray:
    """``a_j`` with ``sum_j a_j (omega + i beta)**-j`` matching ``moments[1:]``."""
    order = moments.size - 1
    a = np.zeros(order + 1, dtype=complex)
    for k in range(1, order + 1):
        acc = moments[k]
        for j in range(1, k):
            n = k - j
            acc -= a[j] * (-1) ** n * comb(j + n - 1, n) * (1j * beta) ** n
        a[k] = acc
    return a


def _reference_kernel(a: np.ndarray, beta: float, times: np.ndarray) -> np.ndarray:
    out = np.zeros(times.shape, dtype=complex)
    pos = times > 0
    tp = times[pos]
    for j in range(1, a.size):
        # inverse transform of (omega + i beta)**-j: -i (-i t)^(j-1) e^(-beta t) / (j-1)!
        out[pos] += a[j] * (-1j) * (-1j * tp) ** (j - 1) * np.exp(-beta * tp) / factorial(j - 1)
    out[times == 0] = a[1] * (-1j) / 2.0
    return out.real


def kernel_from_fft(model: MediumModel, time_step: float, duration: float) -> CausalKernel:
    """Kernel on ``[-duration/2, duration/2]`` by a discrete Fourier transform.

    The frequency window is ``|omega| <= pi / time_step``.  Its sample
    spacing is chosen so that the periodic images of the kernel have decayed
    by ``exp(-30)`` before they reach the output window.

    Raises
    ------
    GridError
        If ``time_step > 1 / (20 max omega_eg)`` or ``duration < 10 / min gamma_e``.
    """
    times = _symmetric_times(time_step, duration)
    if model.is_vacuum:
        return CausalKernel("sampled", times=times, values=np.zeros(times.size),
                            time_step=time_step)
    w_max = max(t.omega_eg for t in model.transitions)
    g_min = min(t.gamma_e for t in model.transitions)
    if time_step > 1.0 / (20.0 * w_max) * (1 + 1e-12):
        raise GridError(f"time_step must not exceed 1/(20 max omega_eg) = {1 / (20 * w_max):.6g}")
    if duration < 10.0 / g_min * (1 - 1e-12):
        raise GridError(f"duration must be at least 10/min(gamma_e) = {10 / g_min:.6g}")

    period = duration / 2.0 + 30.0 / g_min
    n = 1 << int(np.ceil(np.log2(max(period, duration) / time_step)))
    omega = 2.0 * np.pi * np.fft.fftfreq(n, d=time_step)

    beta = w_max
    moments = high_frequency_moments(model)
    a = _reference_coefficients(moments, beta)
    chi = np.asarray(susceptibility(model, omega))
    remainder = chi - moments[0]
    for j in range(1, a.size):
        remainder = remainder - a[j] * (omega + 1j * beta) ** (-j)
    series = np.fft.fft(remainder) / (n * time_step)
    k = np.rint(times / time_step).astype(int) % n
    values = series[k].real + _reference_kernel(a, beta, times)
    # A constant chi(inf) is an instantaneous response: a discrete delta.
    values[times == 0] += moments[0].real / time_step
    return CausalKernel("sampled", times=times, values=values, time_step=time_step)


def convolve_response(kernel: CausalKernel, applied_field, time_step: float) -> np.ndarray:
    """Magnetisation ``M[i] = sum_j g(tau_j) B[i - j] * time_step``.

    ``applied_field`` is sampled on a uniform grid of spacing ``time_step``;
    the result lives on the same grid.  A pole-residue kernel is sampled
    first, over the field's length.

    Raises
    ------
    GridError
        If a sampled kernel has a different time step.
    """
    field = np.asarray(applied_field, dtype=float)
    if kernel.representation == "pole-residue":
        kernel = kernel.sample(time_step, 2.0 * field.size * time_step)
    elif abs(kernel.time_step - time_step) > 1e-12 * time_step:
        raise GridError("kernel and field time steps differ")
    g = kernel.values
    zero = int(np.argmin(np.abs(kernel.times)))
    full = fftconvolve(field, g) * time_step
    return full[zero:zero + field.size]
