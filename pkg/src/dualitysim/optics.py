"""Screen-impact laws for a two-slit bench.

The fringe scale ``a = wavelength * distance / separation`` sets the period of
the interference law; the screen window is ``[-halfwidth, +halfwidth]``. Two
normalized pattern laws live on that window: an interference ("wave") law
proportional to ``cos^2(pi x / a + phase)`` and a structureless ("particle")
law, uniform by default or an optional two-slit diffraction-envelope sum.
Windows spanning an integer number of fringe periods get closed-form
normalization and CDFs; anything else is normalized by adaptive quadrature.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .numerics import adaptive_simpson, invert_monotone


class ValidationError(ValueError):
    """A configuration or argument violates a documented precondition."""


class DomainError(ValueError):
    """A screen coordinate falls outside the configured window."""


PARAXIAL_WARN_RATIO = 0.1
INTEGER_FRINGE_TOL = 1e-9
SAMPLER_CDF_TOL = 1e-12
BINS_PER_FRINGE = 50
MAX_HISTOGRAM_BINS = 500
_QUANTILE_TABLE_NODES = 4097
_ENVELOPE_GRID_NODES = 32769


@dataclass(frozen=True)
class OpticsConfig:
    """Bench geometry and pattern options. Lengths in meters.

    ``intensity_scale`` only scales displayed intensities; the probability
    densities themselves always integrate to one over the window.
    ``slit_width_m`` is used by the optional diffraction envelope and defaults
    to a quarter of the slit separation.
    """

    wavelength_m: float = 700e-9
    slit_separation_m: float = 1e-3
    slit_screen_distance_m: float = 1.0
    screen_halfwidth_m: float = 0.35e-3
    intensity_scale: float = 1.0
    envelope_enabled: bool = False
    slit_width_m: float | None = None

    def __post_init__(self) -> None:
        for name in (
            "wavelength_m",
            "slit_separation_m",
            "slit_screen_distance_m",
            "screen_halfwidth_m",
            "intensity_scale",
        ):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
                raise ValidationError(f"{name} must be a positive finite number, got {value!r}")
        if self.slit_width_m is not None:
            if not (
                isinstance(self.slit_width_m, (int, float))
                and math.isfinite(self.slit_width_m)
                and 0 < self.slit_width_m < self.slit_separation_m
            ):
                raise ValidationError(
                    "slit_width_m must be positive and smaller than slit_separation_m, "
                    f"got {self.slit_width_m!r}"
                )
        if self.screen_halfwidth_m / self.slit_screen_distance_m > PARAXIAL_WARN_RATIO:
            warnings.warn(
                "screen_halfwidth_m exceeds "
                f"{PARAXIAL_WARN_RATIO} * slit_screen_distance_m; the small-angle "
                "approximation behind the fringe scale is no longer reliable",
                UserWarning,
                stacklevel=2,
            )

    @property
    def fringe_scale_m(self) -> float:
        """Fringe period on the screen."""
        return self.wavelength_m * self.slit_screen_distance_m / self.slit_separation_m

    @property
    def window(self) -> tuple[float, float]:
        return (-self.screen_halfwidth_m, self.screen_halfwidth_m)

    @property
    def window_width_m(self) -> float:
        return 2.0 * self.screen_halfwidth_m

    @property
    def fringe_count(self) -> float:
        """Window width in fringe periods; integer values unlock closed forms."""
        return self.window_width_m / self.fringe_scale_m

    @property
    def effective_slit_width_m(self) -> float:
        return self.slit_width_m if self.slit_width_m is not None else 0.25 * self.slit_separation_m

    def is_integer_fringe_window(self, tol: float = INTEGER_FRINGE_TOL) -> bool:
        m = self.fringe_count
        return abs(m - round(m)) <= tol * max(1.0, m) and round(m) >= 1

    def require_integer_fringe_window(self) -> None:
        if not self.is_integer_fringe_window():
            raise ValidationError(
                "window must span an integer number (m >= 1) of fringe periods; "
                f"got {self.fringe_count!r} periods"
            )


class PatternKind(Enum):
    WAVE = "wave"
    PARTICLE = "particle"


@dataclass(frozen=True)
class IntervalSet:
    """Disjoint, sorted, half-open [lo, hi) intervals on the screen."""

    intervals: tuple[tuple[float, float], ...] = ()

    @classmethod
    def from_pairs(
        cls,
        pairs: Iterable[Sequence[float]],
        window: tuple[float, float] | None = None,
    ) -> "IntervalSet":
        items: list[tuple[float, float]] = []
        for pair in pairs:
            lo, hi = float(pair[0]), float(pair[1])
            if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
                raise ValidationError(f"interval must have finite lo < hi, got ({lo!r}, {hi!r})")
            items.append((lo, hi))
        items.sort()
        for (alo, ahi), (blo, _) in zip(items, items[1:]):
            if blo < ahi:
                raise ValidationError(f"intervals overlap near x={blo!r}; they must be disjoint")
        if window is not None:
            wlo, whi = window
            for lo, hi in items:
                if lo < wlo or hi > whi:
                    raise ValidationError(
                        f"interval ({lo!r}, {hi!r}) leaves the screen window [{wlo!r}, {whi!r}]"
                    )
        return cls(tuple(items))

    @classmethod
    def empty(cls) -> "IntervalSet":
        return cls(())

    @classmethod
    def full_window(cls, cfg: OpticsConfig) -> "IntervalSet":
        return cls((cfg.window,))

    @property
    def measure(self) -> float:
        return float(sum(hi - lo for lo, hi in self.intervals))

    def complement(self, window: tuple[float, float]) -> "IntervalSet":
        wlo, whi = window
        out: list[tuple[float, float]] = []
        cursor = wlo
        for lo, hi in self.intervals:
            if lo > cursor:
                out.append((cursor, lo))
            cursor = max(cursor, hi)
        if cursor < whi:
            out.append((cursor, whi))
        return IntervalSet(tuple(out))

    def contains(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        mask = np.zeros(x.shape, dtype=bool)
        for lo, hi in self.intervals:
            mask |= (x >= lo) & (x < hi)
        return mask

    def __len__(self) -> int:
        return len(self.intervals)

    def __bool__(self) -> bool:
        return bool(self.intervals)

    def __iter__(self):
        return iter(self.intervals)


@dataclass(frozen=True)
class PatternDistribution:
    """One normalized screen-impact law: interference or structureless."""

    kind: PatternKind
    config: OpticsConfig
    phase_offset_rad: float = 0.0

    # -- raw evaluations (no domain checks), used by the samplers -----------

    @cached_property
    def _wave_norm(self) -> float:
        """Normalization constant c with integral c * cos^2(pi x/a + phase) = 1."""
        cfg = self.config
        if cfg.is_integer_fringe_window():
            return 2.0 / cfg.window_width_m
        a = cfg.fringe_scale_m
        phase = self.phase_offset_rad
        lo, hi = cfg.window
        # integrate in fringe units so the tolerance is relative to an O(m) integrand
        integral = a * adaptive_simpson(
            lambda t: math.cos(math.pi * t + phase) ** 2, lo / a, hi / a, tol=1e-12
        )
        return 1.0 / integral

    @cached_property
    def _envelope_table(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Dense (x, density, cdf) grid defining the enveloped particle law."""
        cfg = self.config
        lo, hi = cfg.window
        xs = np.linspace(lo, hi, _ENVELOPE_GRID_NODES)
        b = cfg.effective_slit_width_m
        scale = cfg.wavelength_m * cfg.slit_screen_distance_m
        half = 0.5 * cfg.slit_separation_m
        raw = np.sinc(b * (xs - half) / scale) ** 2 + np.sinc(b * (xs + half) / scale) ** 2
        from scipy.integrate import cumulative_trapezoid

        cum = cumulative_trapezoid(raw, xs, initial=0.0)
        total = cum[-1]
        dens = raw / total
        cdf = cum / total
        cdf[0], cdf[-1] = 0.0, 1.0
        return xs, dens, cdf

    def _density_raw(self, x: np.ndarray) -> np.ndarray:
        cfg = self.config
        if self.kind is PatternKind.WAVE:
            a = cfg.fringe_scale_m
            return self._wave_norm * np.cos(np.pi * x / a + self.phase_offset_rad) ** 2
        if cfg.envelope_enabled:
            xs, dens, _ = self._envelope_table
            return np.interp(x, xs, dens)
        return np.full_like(np.asarray(x, dtype=float), 1.0 / cfg.window_width_m)

    def _cdf_raw(self, x: np.ndarray) -> np.ndarray:
        cfg = self.config
        lo, _ = cfg.window
        if self.kind is PatternKind.WAVE:
            a = cfg.fringe_scale_m
            two_phase = 2.0 * self.phase_offset_rad
            sin_lo = math.sin(2.0 * math.pi * lo / a + two_phase)
            raw = self._wave_norm * (
                0.5 * (x - lo) + (a / (4.0 * math.pi)) * (np.sin(2.0 * np.pi * x / a + two_phase) - sin_lo)
            )
            return np.clip(raw, 0.0, 1.0)
        if cfg.envelope_enabled:
            xs, _, cdf = self._envelope_table
            return np.interp(x, xs, cdf)
        return np.clip((x - lo) / cfg.window_width_m, 0.0, 1.0)

    # -- public surface ------------------------------------------------------

    def _check_domain(self, x: np.ndarray) -> None:
        lo, hi = self.config.window
        if x.size and (np.any(x < lo) | np.any(x > hi)):
            bad = x[(x < lo) | (x > hi)]
            raise DomainError(f"x={bad.flat[0]!r} lies outside the screen window [{lo!r}, {hi!r}]")

    def density(self, x) -> np.ndarray | float:
        arr = np.asarray(x, dtype=float)
        self._check_domain(arr)
        out = self._density_raw(arr)
        return float(out) if np.ndim(x) == 0 else out

    def cdf(self, x) -> np.ndarray | float:
        arr = np.asarray(x, dtype=float)
        self._check_domain(arr)
        out = self._cdf_raw(arr)
        return float(out) if np.ndim(x) == 0 else out

    @cached_property
    def _quantile_table(self) -> tuple[np.ndarray, np.ndarray]:
        lo, hi = self.config.window
        xs = np.linspace(lo, hi, _QUANTILE_TABLE_NODES)
        cs = self._cdf_raw(xs)
        cs[0], cs[-1] = 0.0, 1.0
        return xs, cs

    def ppf(self, u) -> np.ndarray | float:
        """Quantile function; |cdf(ppf(u)) - u| <= 1e-12 lane-wise."""
        arr = np.asarray(u, dtype=float)
        if arr.size and (np.any(arr < 0.0) | np.any(arr > 1.0)):
            raise ValidationError("quantile levels must lie in [0, 1]")
        cfg = self.config
        lo, hi = cfg.window
        if self.kind is PatternKind.PARTICLE:
            if not cfg.envelope_enabled:
                out = lo + arr * cfg.window_width_m
                return float(out) if np.ndim(u) == 0 else out
            xs, _, cdf = self._envelope_table
            out = np.interp(arr, cdf, xs)
            return float(out) if np.ndim(u) == 0 else out
        xs, cs = self._quantile_table
        flat = np.atleast_1d(arr).ravel()
        cell = np.clip(np.searchsorted(cs, flat, side="right") - 1, 0, len(xs) - 2)
        out = invert_monotone(
            self._cdf_raw,
            flat,
            lo=xs[cell],
            hi=xs[cell + 1],
            tol=SAMPLER_CDF_TOL,
            fprime=self._density_raw,
            x0=np.interp(flat, cs, xs),
        )
        out = np.asarray(out).reshape(np.atleast_1d(arr).shape)
        return float(out[0]) if np.ndim(u) == 0 else out.reshape(arr.shape)

    def sample(self, rng: np.random.Generator, size=None) -> np.ndarray | float:
        return self.ppf(rng.random(size))


# -- module-level operation surface ------------------------------------------


def wave_density(x, cfg: OpticsConfig, phase_offset_rad: float = 0.0):
    """Normalized interference density c * cos^2(pi x / a + phase) on the window."""
    return PatternDistribution(PatternKind.WAVE, cfg, phase_offset_rad).density(x)


def particle_density(x, cfg: OpticsConfig):
    """Normalized structureless density: uniform, or the enveloped two-slit sum."""
    return PatternDistribution(PatternKind.PARTICLE, cfg).density(x)


def pattern_cdf(dist: PatternDistribution, x):
    return dist.cdf(x)


def sample_impact(dist: PatternDistribution, rng: np.random.Generator, size=None):
    """Inverse-CDF sampling; deterministic given the generator stream."""
    return dist.sample(rng, size)


def fringe_aligned_edges(
    cfg: OpticsConfig,
    bins_per_period: int = BINS_PER_FRINGE,
    max_bins: int = MAX_HISTOGRAM_BINS,
) -> np.ndarray:
    """Equal-width bin edges over the window, bins_per_period per fringe, capped."""
    n = int(round(bins_per_period * cfg.fringe_count))
    n = max(20, min(n, max_bins))
    lo, hi = cfg.window
    return np.linspace(lo, hi, n + 1)


def fringe_visibility(counts, edges, cfg: OpticsConfig) -> float:
    """(I_max - I_min) / (I_max + I_min) of the period-folded bin intensities.

    When the binning tiles an integer number of fringe periods the bins are
    folded onto a single period before taking extremes, which suppresses
    counting noise; otherwise a moving-average smoothing is applied.
    """
    intensities = np.asarray(counts, dtype=float)
    edges = np.asarray(edges, dtype=float)
    if intensities.ndim != 1 or len(edges) != len(intensities) + 1:
        raise ValidationError("histogram requires counts of length len(edges) - 1")
    if len(intensities) < 20:
        raise ValidationError("visibility requires at least 20 bins")
    total = intensities.sum()
    if not total > 0:
        raise ValidationError("visibility requires a histogram with positive total count")
    if np.any(intensities < 0):
        raise ValidationError("bin intensities must be nonnegative")

    nbins = len(intensities)
    m = cfg.fringe_count
    periods = int(round(m))
    if abs(m - periods) <= INTEGER_FRINGE_TOL * max(1.0, m) and periods >= 1 and nbins % periods == 0:
        profile = intensities.reshape(periods, nbins // periods).sum(axis=0)
    else:
        k = max(1, nbins // 20)
        kernel = np.ones(k) / k
        profile = np.convolve(intensities, kernel, mode="valid")
    top = float(profile.max())
    bottom = float(profile.min())
    return (top - bottom) / (top + bottom)
