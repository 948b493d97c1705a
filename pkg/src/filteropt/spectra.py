"""Synthetic filter library, absorption spectrum, and filter-level metrics.

The library is a deterministic stand-in for a measured collection of
transmission filters: each profile is a clipped superposition of Lorentzian
resonances on a smooth sinusoidal background, and the absorption spectrum is
a fixed comb of Gaussian lines with depths decaying across the band.

Two scalar metrics compare filters:

* ``d1`` -- absolute difference of absorption-weighted mean transmission,
* ``d2`` -- absolute difference of the spectral second moment (sum of
  squared frequency times one-sided DFT magnitude).

Both reduce to ``|feature(x) - feature(y)|`` for a per-filter scalar
feature, which downstream code exploits heavily.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DegenerateFilterError, InvalidConfigurationError

__all__ = [
    "WavelengthGrid",
    "TransmissionProfile",
    "AbsorptionSpectrum",
    "FilterLibrary",
    "generate_library",
    "d1",
    "d2",
    "second_moment",
    "baseline_selection",
    "save_library",
    "load_library",
]

CLIP_LO = 0.01
CLIP_HI = 0.99

# Salts for independent sub-streams of the library seed.
_SALT_ABSORPTION = 101
_SALT_FILTER = 202


@dataclass(frozen=True, eq=False)
class WavelengthGrid:
    """Shared evenly spaced wavelength axis (abstract units)."""

    q_count: int
    lo: float
    hi: float
    samples: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.q_count < 2:
            raise InvalidConfigurationError(f"grid needs at least 2 samples, got {self.q_count}")
        if not self.lo < self.hi:
            raise InvalidConfigurationError(f"grid bounds must satisfy lo < hi, got {self.lo} >= {self.hi}")
        if len(self.samples) != self.q_count or np.any(np.diff(self.samples) <= 0):
            raise InvalidConfigurationError("grid samples must be strictly increasing with length q_count")

    @classmethod
    def linear(cls, q_count: int, lo: float = 0.0, hi: float = 1.0) -> "WavelengthGrid":
        return cls(q_count, lo, hi, np.linspace(lo, hi, q_count))


@dataclass(frozen=True, eq=False)
class TransmissionProfile:
    """Per-wavelength transmission of one filter, values in [0, 1]."""

    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim != 1 or len(vals) < 2:
            raise InvalidConfigurationError("transmission profile must be a 1-D sequence of length >= 2")
        if np.any(vals < 0.0) or np.any(vals > 1.0):
            raise InvalidConfigurationError("transmission values must lie in [0, 1]")
        object.__setattr__(self, "values", vals)


@dataclass(frozen=True, eq=False)
class AbsorptionSpectrum:
    """Nonnegative absorption of the trace gas on the shared grid."""

    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if np.any(vals < 0.0):
            raise InvalidConfigurationError("absorption values must be nonnegative")
        if not np.any(vals > 0.0):
            raise InvalidConfigurationError("absorption spectrum must have at least one positive value")
        object.__setattr__(self, "values", vals)


@dataclass(eq=False)
class FilterLibrary:
    """The available filters plus the absorption spectrum they are judged on."""

    grid: WavelengthGrid
    filters: tuple[TransmissionProfile, ...]
    absorption: AbsorptionSpectrum
    seed: int

    def __post_init__(self):
        if len(self.filters) < 2:
            raise InvalidConfigurationError("library needs at least 2 filters")
        for prof in self.filters:
            if len(prof.values) != self.grid.q_count:
                raise InvalidConfigurationError("all profiles must live on the library grid")
        if len(self.absorption.values) != self.grid.q_count:
            raise InvalidConfigurationError("absorption spectrum must live on the library grid")
        self.transmissions = np.stack([p.values for p in self.filters])

    @property
    def size(self) -> int:
        return len(self.filters)

    def d1_features(self) -> np.ndarray:
        """Absorption-weighted mean transmission per filter, shape (L,)."""
        a = self.absorption.values
        totals = self.transmissions.sum(axis=1)
        return (self.transmissions @ a) / totals

    def d2_features(self) -> np.ndarray:
        """Spectral second moment per filter, shape (L,)."""
        return np.array([second_moment(p) for p in self.filters])


def second_moment(x: TransmissionProfile) -> float:
    """Sum of squared frequency-bin index times one-sided DFT magnitude.

    Frequencies are integer bins 0..floor(Q/2) (cycles per grid span); the
    zero bin carries zero weight so constant offsets do not contribute.
    """
    mags = np.abs(np.fft.rfft(x.values))
    zeta = np.arange(len(mags), dtype=float)
    return float(np.sum(zeta * zeta * mags))


def d1(x: TransmissionProfile, y: TransmissionProfile, a: AbsorptionSpectrum) -> float:
    """Absolute difference of absorption-weighted transmission ratios."""
    if len(x.values) != len(a.values) or len(y.values) != len(a.values):
        raise InvalidConfigurationError("profiles and absorption must share one grid")
    tx = float(x.values.sum())
    ty = float(y.values.sum())
    if tx <= 0.0 or ty <= 0.0:
        raise DegenerateFilterError("profile with zero total transmission")
    return abs(float(x.values @ a.values) / tx - float(y.values @ a.values) / ty)


def d2(x: TransmissionProfile, y: TransmissionProfile) -> float:
    """Absolute difference of spectral second moments."""
    if len(x.values) != len(y.values):
        raise InvalidConfigurationError("profiles must share one grid")
    return abs(second_moment(x) - second_moment(y))


def _absorption_comb(rng: np.random.Generator, q_count: int, n_lines: int = 12) -> np.ndarray:
    """Comb of Gaussian absorption lines with depth decreasing across the band."""
    q = np.arange(q_count, dtype=float)
    centers = (np.arange(n_lines) + 0.5) / n_lines * q_count
    centers = centers + rng.uniform(-0.25, 0.25, size=n_lines) * q_count / n_lines
    widths = rng.uniform(1.5, 4.0, size=n_lines) * q_count / 256.0
    depths = np.linspace(1.0, 0.25, n_lines)
    spectrum = np.zeros(q_count)
    for c, w, depth in zip(centers, widths, depths):
        spectrum += depth * np.exp(-0.5 * ((q - c) / w) ** 2)
    return spectrum


def _one_filter(rng: np.random.Generator, q_count: int) -> np.ndarray:
    """Clipped superposition of 3..12 Lorentzians on a sinusoidal background."""
    q = np.arange(q_count, dtype=float)
    base = rng.uniform(0.25, 0.75)
    amp_bg = rng.uniform(0.0, 0.3)
    cycles = rng.uniform(0.5, 3.0)
    phase = rng.uniform(0.0, 2.0 * np.pi)
    values = base + amp_bg * np.sin(2.0 * np.pi * cycles * q / q_count + phase)

    n_res = int(rng.integers(3, 13))
    centers = rng.uniform(0.0, q_count, size=n_res)
    widths = rng.uniform(0.5, 5.0, size=n_res)
    amps = rng.uniform(-0.6, 0.6, size=n_res)
    for c, w, amp in zip(centers, widths, amps):
        values += amp * w * w / ((q - c) ** 2 + w * w)
    return np.clip(values, CLIP_LO, CLIP_HI)


def generate_library(seed: int, L: int, Q: int) -> FilterLibrary:
    """Deterministic synthetic library of L filters on a Q-point grid.

    Filters whose d1 or d2 feature exactly collides with an earlier filter
    are regenerated from a perturbed sub-seed, so every pair of distinct
    filters has strictly positive d1 and d2 distance.
    """
    from .seeding import rng_from

    if L < 2:
        raise InvalidConfigurationError(f"library size must be >= 2, got {L}")
    if Q < 16:
        raise InvalidConfigurationError(f"grid must have >= 16 samples, got {Q}")

    grid = WavelengthGrid.linear(Q)
    absorption = AbsorptionSpectrum(_absorption_comb(rng_from(seed, _SALT_ABSORPTION), Q))
    a = absorption.values

    profiles: list[np.ndarray] = []
    feats_d1: list[float] = []
    feats_d2: list[float] = []
    for i in range(L):
        for attempt in range(64):
            values = _one_filter(rng_from(seed, _SALT_FILTER, i, attempt), Q)
            f1 = float(values @ a / values.sum())
            f2 = second_moment(TransmissionProfile(values))
            if f1 not in feats_d1 and f2 not in feats_d2:
                break
        else:  # pragma: no cover - continuous draws collide with probability ~0
            raise InvalidConfigurationError(f"could not generate a distinct filter for slot {i}")
        profiles.append(values)
        feats_d1.append(f1)
        feats_d2.append(f2)

    return FilterLibrary(
        grid=grid,
        filters=tuple(TransmissionProfile(v) for v in profiles),
        absorption=absorption,
        seed=seed,
    )


def baseline_selection(lib: FilterLibrary, count: int) -> list[int]:
    """Indices of the `count` filters with the largest second moment.

    Ties break toward the lower index so the ranking is reproducible.
    """
    if count > lib.size:
        raise InvalidConfigurationError(f"cannot select {count} filters from a library of {lib.size}")
    if count < 1:
        raise InvalidConfigurationError("selection count must be positive")
    moments = lib.d2_features()
    order = sorted(range(lib.size), key=lambda i: (-moments[i], i))
    return order[:count]


def save_library(lib: FilterLibrary, path: str | Path) -> None:
    """Pin a library to a single JSON document."""
    doc = {
        "seed": lib.seed,
        "Q": lib.grid.q_count,
        "lo": lib.grid.lo,
        "hi": lib.grid.hi,
        "filters": [p.values.tolist() for p in lib.filters],
        "absorption": lib.absorption.values.tolist(),
    }
    Path(path).write_text(json.dumps(doc))


def load_library(path: str | Path) -> FilterLibrary:
    doc = json.loads(Path(path).read_text())
    grid = WavelengthGrid(doc["Q"], doc["lo"], doc["hi"], np.linspace(doc["lo"], doc["hi"], doc["Q"]))
    return FilterLibrary(
        grid=grid,
        filters=tuple(TransmissionProfile(np.asarray(v)) for v in doc["filters"]),
        absorption=AbsorptionSpectrum(np.asarray(doc["absorption"])),
        seed=doc["seed"],
    )
