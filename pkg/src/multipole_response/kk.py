r"""Kramers-Kronig transforms on the positive frequency half-line.

For a causal response with :math:`e^{-i\omega t}` time dependence

.. math::

   {\rm Re}\,\chi(\omega) = \frac{2}{\pi}\,\mathcal{P}\!\int_0^\infty
       \frac{\omega'\,{\rm Im}\,\chi(\omega')}{\omega'^2 - \omega^2}\,d\omega'

   {\rm Im}\,\chi(\omega) = -\frac{2\omega}{\pi}\,\mathcal{P}\!\int_0^\infty
       \frac{{\rm Re}\,\chi(\omega')}{\omega'^2 - \omega^2}\,d\omega'

Each transform is assembled as a dense matrix acting on the samples:

* on the grid ``[a, b]`` the integrand is integrated with the trapezoidal
  rule in the grid's native coordinate (``omega`` or ``log omega``);
* the principal value is handled either by subtracting the integrand's value
  at the singular point, using the closed form of
  :math:`\mathcal{P}\int_a^b d\omega'/(\omega'^2-\omega^2)`, or by an
  exclusion rule that drops the singular node and keeps only nodes an odd
  number of steps away (Maclaurin's rule, spectrally accurate for smooth data);
* below ``a`` and above ``b`` the data are replaced by short power series
  fitted by least squares to the first and last decade of samples, and those
  pieces are integrated analytically.  The real-part tail includes a
  constant, so a constant real part transforms to zero.

Because every step is linear in the samples the transforms are exactly
linear and map zero to zero.  The engine is validated for spectra that decay
at least as :math:`1/\omega` in the imaginary part and :math:`1/\omega^2` in
the real part, are odd/even in :math:`\omega` respectively, and whose lines
are resolved by the grid.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import hyp2f1

from .errors import GridError
from .model import ComplexSpectrum, FrequencyGrid

__all__ = [
    "KKScheme",
    "KKResult",
    "kk_real_from_imag",
    "kk_imag_from_real",
    "kk_static",
    "kk_round_trip",
    "transform_matrix",
]

_CHUNK = 512
SINGULARITY_METHODS = ("subtraction", "exclusion-window")


@dataclass(frozen=True)
class KKScheme:
    """Numerical options for the transforms.

    Parameters
    ----------
    singularity_method : {"subtraction", "exclusion-window"}
    tail_exponent : float, optional
        Beyond the grid the imaginary part is modelled as
        ``A1/omega + A2/omega**(tail_exponent + 1)`` and the real part as
        ``B0 + B1/omega**2 + B2/omega**(tail_exponent + 2)``.  ``None`` takes the
        grid's own ``tail_exponent``.
    interior_margin : float
        Fraction of grid points at each end excluded from accuracy claims.
    """

    singularity_method: str = "subtraction"
    tail_exponent: float | None = None
    interior_margin: float = 0.1

    def __post_init__(self):
        if self.singularity_method not in SINGULARITY_METHODS:
            raise ValueError(f"unknown singularity method {self.singularity_method!r}")
        if not 0.0 <= self.interior_margin < 0.4:
            raise ValueError("interior_margin must lie in [0, 0.4)")
        if self.tail_exponent is not None and self.tail_exponent < 1:
            raise ValueError("tail_exponent must be at least 1")

    def exponent(self, grid: FrequencyGrid) -> float:
        return grid.tail_exponent if self.tail_exponent is None else float(self.tail_exponent)


@dataclass(frozen=True)
class KKResult:
    """Outcome of :func:`kk_round_trip`.

    ``reconstructed`` holds the transformed real and imaginary parts on the
    interior points and the input values elsewhere.  The residuals are the
    maximum deviation on the interior, divided by the largest interior
    magnitude of the corresponding reference part.
    """

    reconstructed: ComplexSpectrum
    residual_norm: float
    real_residual: float
    imag_residual: float
    interior: slice


def interior_slice(grid: FrequencyGrid, margin: float) -> slice:
    last = len(grid) - 1
    lo = int(np.ceil(margin * last))
    hi = int(np.floor((1.0 - margin) * last))
    return slice(lo, hi + 1)


def _end_indices(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # Samples used for the head and tail fits: one decade, at least 4 points,
    # never more than a quarter of the grid.
    n = x.size
    cap = max(4, n // 4)
    n_head = int(np.clip(np.searchsorted(x, 10.0 * x[0], side="right"), 4, cap))
    n_tail = int(np.clip(n - np.searchsorted(x, x[-1] / 10.0, side="left"), 4, cap))
    return np.arange(n_head), np.arange(n - n_tail, n)


def _series_sum(c, z):
    """``sum_k z**k / (c + 2k)`` for ``0 <= z < 1``."""
    return hyp2f1(1.0, c / 2.0, c / 2.0 + 1.0, z) / c


def _fit_projector(x_fit: np.ndarray, powers) -> np.ndarray:
    """Rows mapping samples at ``x_fit`` to least-squares coefficients of ``x**p``."""
    design = np.stack([x_fit**p for p in powers], axis=1)
    return np.linalg.pinv(design)


def _derivative_rows(rows: np.ndarray, n: int, h: float) -> list[tuple[np.ndarray, np.ndarray]]:
    """Finite-difference stencils for ``d/ds`` at the requested rows."""
    out = []
    for i in rows:
        if 2 <= i <= n - 3:
            idx = np.array([i - 2, i - 1, i + 1, i + 2])
            coef = np.array([1.0, -8.0, 8.0, -1.0]) / (12.0 * h)
        elif 1 <= i <= n - 2:
            idx = np.array([i - 1, i + 1])
            coef = np.array([-1.0, 1.0]) / (2.0 * h)
        elif i == 0:
            idx = np.array([0, 1, 2])
            coef = np.array([-3.0, 4.0, -1.0]) / (2.0 * h)
        else:
            idx = np.array([n - 3, n - 2, n - 1])
            coef = np.array([1.0, -4.0, 3.0]) / (2.0 * h)
        out.append((idx, coef))
    return out


def _build_rows(grid: FrequencyGrid, scheme: KKScheme, kind: str, rows: np.ndarray) -> np.ndarray:
    """Matrix rows of the transform evaluated at grid indices ``rows``.

    ``kind`` is ``"re"`` (real part from imaginary samples) or ``"im"``.
    """
    x = grid.samples
    n = x.size
    h = grid.step
    jac = np.ones(n) if grid.spacing == "linear" else x.copy()
    weights = np.full(n, h)
    weights[0] = weights[-1] = h / 2.0
    wj = weights * jac
    a, b = x[0], x[-1]
    xi = x[rows]
    # Overall factor: 2/pi for the real part, -(2/pi) omega for the imaginary part.
    pref = np.full(rows.size, 2.0 / np.pi) if kind == "re" else -2.0 / np.pi * xi

    with np.errstate(divide="ignore"):
        inv_den = 1.0 / (x[None, :] ** 2 - xi[:, None] ** 2)
    inv_den[np.arange(rows.size), rows] = 0.0

    if scheme.singularity_method == "subtraction":
        main = wj[None, :] * inv_den
        with np.errstate(divide="ignore", invalid="ignore"):
            pv_ab = np.log(np.abs((b - xi) * (xi + a) / ((b + xi) * (xi - a)))) / (2.0 * xi)
        pv_ab = np.where((xi > a) & (xi < b), pv_ab, 0.0)
        main[np.arange(rows.size), rows] = pv_ab - main.sum(axis=1)
        for r, (idx, coef) in enumerate(_derivative_rows(rows, n, h)):
            i = rows[r]
            main[r, idx] += weights[i] * coef / (2.0 * xi[r])
    else:
        parity = (np.arange(n)[None, :] - rows[:, None]) % 2 == 1
        main = np.where(parity, 2.0 * h * jac[None, :] * inv_den, 0.0)

    if kind == "re":
        # The integrand numerator is omega' * Im chi.
        main = main * x[None, :]
    main *= pref[:, None]

    p = scheme.exponent(grid)
    head_idx, tail_idx = _end_indices(x)
    z_head = np.clip((a / xi) ** 2, 0.0, 1.0 - 1e-15)
    z_tail = np.clip((xi / b) ** 2, 0.0, 1.0 - 1e-15)
    if kind == "re":
        head_powers, tail_powers = (1.0, 3.0), (1.0, p + 1.0)
    else:
        # The constant keeps chi(inf) (nonzero for incomplete models) out of the fit.
        head_powers, tail_powers = (0.0, 2.0), (0.0, 2.0, p + 2.0)

    # Head: data ~ sum_n alpha_n (omega/a)**n on [0, a].
    head_proj = _fit_projector(x[head_idx] / a, head_powers)
    head_cols = np.zeros((rows.size, len(head_powers)))
    for k, m in enumerate(head_powers):
        m_int = m + 1.0 if kind == "re" else m
        # integral_0^a x**m_int / (x**2 - w**2) dx, scaled by a**-m for the (x/a)**m basis
        val = -(a ** (m_int + 1.0 - m)) / xi**2 * _series_sum(m_int + 1.0, z_head)
        head_cols[:, k] = val
    inside = xi > a
    head_cols[~inside] = 0.0

    # Tail: data ~ sum_p A_p (b/omega)**p on [b, inf).
    tail_proj = _fit_projector(b / x[tail_idx], tail_powers)
    tail_cols = np.zeros((rows.size, len(tail_powers)))
    for k, q in enumerate(tail_powers):
        q_int = q - 1.0 if kind == "re" else q
        # integral_b^inf x**-q_int / (x**2 - w**2) dx, times b**q for the (b/x)**q basis
        tail_cols[:, k] = b ** (q - q_int - 1.0) * _series_sum(q_int + 1.0, z_tail)
    tail_cols[xi >= b] = 0.0

    main[:, head_idx] += pref[:, None] * (head_cols @ head_proj)
    main[:, tail_idx] += pref[:, None] * (tail_cols @ tail_proj)
    return main


@lru_cache(maxsize=4)
def _cached_matrix(key, samples_bytes, spacing, tail_exponent, scheme, kind):
    grid = FrequencyGrid(np.frombuffer(samples_bytes), spacing, tail_exponent)
    n = len(grid)
    out = np.empty((n, n))
    for start in range(0, n, _CHUNK):
        rows = np.arange(start, min(n, start + _CHUNK))
        out[start:rows[-1] + 1] = _build_rows(grid, scheme, kind, rows)
    out.setflags(write=False)
    return out


def transform_matrix(grid: FrequencyGrid, scheme: KKScheme, kind: str) -> np.ndarray:
    """Dense ``(N, N)`` matrix of one transform on ``grid`` (cached)."""
    if kind not in ("re", "im"):
        raise ValueError("kind must be 're' or 'im'")
    data = grid.samples.tobytes()
    return _cached_matrix(hash(data), data, grid.spacing, grid.tail_exponent, scheme, kind)


def _check_resolution(spectrum: ComplexSpectrum):
    x = spectrum.grid.samples
    for omega0, gamma in spectrum.resonances:
        if not x[0] <= omega0 <= x[-1]:
            continue
        lo, hi = np.searchsorted(x, [omega0 - 4 * gamma, omega0 + 4 * gamma])
        if hi - lo < 4:
            raise GridError(
                f"grid too coarse: {hi - lo} points within 4 linewidths of the "
                f"resonance at {omega0:.6g} (need 4)")


def _interior_bounds(grid: FrequencyGrid, scheme: KKScheme) -> tuple[float, float]:
    sl = interior_slice(grid, scheme.interior_margin)
    x = grid.samples
    return x[sl.start], x[sl.stop - 1]


def _evaluate(spectrum: ComplexSpectrum, scheme: KKScheme, omega_eval, kind: str):
    grid = spectrum.grid
    x = grid.samples
    data = spectrum.imag if kind == "re" else spectrum.real
    omega_eval = np.asarray(omega_eval, dtype=float)
    flat = np.atleast_1d(omega_eval)
    lo, hi = _interior_bounds(grid, scheme)
    if np.any((flat < lo * (1 - 1e-12)) | (flat > hi * (1 + 1e-12))):
        raise GridError(f"evaluation frequency outside the interior region [{lo:.6g}, {hi:.6g}]")
    _check_resolution(spectrum)

    coord = x if grid.spacing == "linear" else np.log(x)
    target = flat if grid.spacing == "linear" else np.log(flat)
    h = grid.step
    out = np.empty(flat.size)
    for k, s in enumerate(target):
        pos = (s - coord[0]) / h
        nearest = int(round(pos))
        if abs(pos - nearest) < 1e-9:
            row = _build_rows(grid, scheme, kind, np.array([nearest]))[0]
            out[k] = row @ data
            continue
        # Cubic Lagrange interpolation of grid-point transforms.
        base = int(np.clip(np.floor(pos) - 1, 0, x.size - 4))
        nodes = np.arange(base, base + 4)
        rows = _build_rows(grid, scheme, kind, nodes)
        values = rows @ data
        lagrange = np.array([
            np.prod([(pos - nodes[m]) / (nodes[j] - nodes[m]) for m in range(4) if m != j])
            for j in range(4)
        ])
        out[k] = lagrange @ values
    return out[0] if omega_eval.ndim == 0 else out.reshape(omega_eval.shape)


def kk_real_from_imag(im_samples: ComplexSpectrum, scheme: KKScheme = KKScheme(), omega_eval=None):
    """Real part at ``omega_eval`` reconstructed from the imaginary samples.

    ``omega_eval`` may be a scalar or an array inside the interior region.
    Only ``im_samples.imag`` is read.

    Raises
    ------
    GridError
        If ``omega_eval`` leaves the interior or a listed resonance has fewer
        than 4 grid points within four linewidths.
    """
    return _evaluate(im_samples, scheme, omega_eval, "re")


def kk_imag_from_real(re_samples: ComplexSpectrum, scheme: KKScheme = KKScheme(), omega_eval=None):
    """Imaginary part at ``omega_eval`` reconstructed from the real samples.

    A constant real part contributes nothing because
    :math:`\\mathcal{P}\\int_0^\\infty d\\omega'/(\\omega'^2-\\omega^2) = 0`.
    """
    return _evaluate(re_samples, scheme, omega_eval, "im")


def kk_static(im_samples: ComplexSpectrum, scheme: KKScheme = KKScheme()) -> float:
    """Zero-frequency real part, :math:`(2/\\pi)\\int_0^\\infty {\\rm Im}\\,\\chi(\\omega')/\\omega'\\,d\\omega'`.

    No principal value is needed because the imaginary part vanishes
    linearly at zero frequency.  The head below the grid is integrated from an
    ``omega, omega**3`` fit and the tail from the same series used by
    :func:`kk_real_from_imag`.

    Raises
    ------
    GridError
        If resonance metadata is present and the grid starts above
        ``min(omega_eg) / 100``, or a line is unresolved.
    """
    grid = im_samples.grid
    x = grid.samples
    if im_samples.resonances:
        lowest = min(w for w, _ in im_samples.resonances)
        if x[0] > lowest / 100.0:
            raise GridError(
                f"grid starts at {x[0]:.6g}, above min(omega_eg)/100 = {lowest / 100:.6g}")
    _check_resolution(im_samples)
    im = im_samples.imag
    h = grid.step
    jac = np.ones_like(x) if grid.spacing == "linear" else x
    weights = np.full(x.size, h)
    weights[0] = weights[-1] = h / 2.0
    body = np.sum(weights * jac * im / x)

    a, b = x[0], x[-1]
    p = scheme.exponent(grid)
    head_idx, tail_idx = _end_indices(x)
    alpha = _fit_projector(x[head_idx] / a, (1.0, 3.0)) @ im[head_idx]
    head = alpha[0] + alpha[1] / 3.0
    tail_powers = (1.0, p + 1.0)
    coef = _fit_projector(b / x[tail_idx], tail_powers) @ im[tail_idx]
    tail = sum(c / q for c, q in zip(coef, tail_powers))
    return float(2.0 / np.pi * (body + head + tail))


def kk_round_trip(spectrum: ComplexSpectrum, scheme: KKScheme = KKScheme()) -> KKResult:
    """Reconstruct both parts of ``spectrum`` and compare with the input.

    The reference for each residual is the input part itself; a part that is
    identically zero on the interior contributes the absolute deviation.
    """
    grid = spectrum.grid
    _check_resolution(spectrum)
    sl = interior_slice(grid, scheme.interior_margin)
    re_ref, im_ref = spectrum.real, spectrum.imag
    re_new = transform_matrix(grid, scheme, "re")[sl] @ im_ref
    im_new = transform_matrix(grid, scheme, "im")[sl] @ re_ref

    def residual(new, ref):
        scale = np.max(np.abs(ref[sl]))
        dev = np.max(np.abs(new - ref[sl]))
        return float(dev / scale) if scale > 0 else float(dev)

    res_re = residual(re_new, re_ref)
    res_im = residual(im_new, im_ref)
    values = spectrum.values.copy()
    values[sl] = re_new + 1j * im_new
    rebuilt = ComplexSpectrum(grid, values, spectrum.quantity_label, spectrum.resonances)
    return KKResult(rebuilt, max(res_re, res_im), res_re, res_im, sl)
