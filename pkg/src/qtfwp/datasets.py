"""Benchmark series generators, CSV ingestion and sliding-window datasets."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Literal

import numpy as np

NARMA_WASHOUT = 10


class SeriesError(ValueError):
    """Invalid generator settings or a series that cannot be windowed."""


class UnsupportedRegimeError(SeriesError):
    pass


class NormalizationError(SeriesError):
    pass


class CsvParseError(ValueError):
    def __init__(self, message: str, row: int | None = None):
        super().__init__(message if row is None else f"row {row}: {message}")
        self.row = row


class MonotonicityError(CsvParseError):
    pass


@dataclass
class RawSeries:
    t: np.ndarray
    x: np.ndarray
    name: str = "series"
    source: Literal["generated", "csv"] = "generated"
    extras: dict = field(default_factory=dict)

    def __post_init__(self):
        self.t = np.asarray(self.t, dtype=np.float64)
        self.x = np.asarray(self.x, dtype=np.float64)
        if self.t.shape != self.x.shape or self.t.ndim != 1:
            raise SeriesError(f"t and x must be equal-length 1-D arrays, "
                              f"got {self.t.shape} and {self.x.shape}")
        if np.any(np.diff(self.t) <= 0):
            raise SeriesError("timestamps must be strictly increasing")

    def __len__(self) -> int:
        return self.x.size

    def tail(self, start: int) -> "RawSeries":
        return RawSeries(self.t[start:], self.x[start:], self.name, self.source,
                         {k: v[start:] for k, v in self.extras.items()})


@dataclass
class WindowedDataset:
    """Normalized (window, next value) pairs with a chronological split.

    Normalization uses the minimum and maximum of the values that appear in
    training windows or training targets, so test values may fall outside
    [0, 1].
    """

    windows: np.ndarray
    targets: np.ndarray
    norm_min: float
    norm_max: float
    split_index: int

    @property
    def train(self) -> tuple[np.ndarray, np.ndarray]:
        return self.windows[:self.split_index], self.targets[:self.split_index]

    @property
    def test(self) -> tuple[np.ndarray, np.ndarray]:
        return self.windows[self.split_index:], self.targets[self.split_index:]

    def denormalize(self, values) -> np.ndarray:
        return np.asarray(values) * (self.norm_max - self.norm_min) + self.norm_min


def gen_damped_shm(omega: float = 2 * math.pi * 0.1, zeta: float = 0.1, dt: float = 0.1,
                   n_points: int = 500, x0: float = 1.0) -> RawSeries:
    """Underdamped oscillator x(t) = x0 exp(-zeta omega t) cos(omega_d t)."""
    if not 0 <= zeta < 1:
        raise UnsupportedRegimeError(f"only the underdamped regime 0 <= zeta < 1 is supported, "
                                     f"got zeta={zeta}")
    if omega <= 0 or dt <= 0 or n_points < 2:
        raise SeriesError("omega and dt must be positive and n_points >= 2")
    t = np.arange(n_points) * dt
    omega_d = omega * math.sqrt(1 - zeta**2)
    x = x0 * np.exp(-zeta * omega * t) * np.cos(omega_d * t)
    return RawSeries(t, x, "shm")


def gen_narma5(n_points: int = 1000, seed: int = 0, u=None) -> RawSeries:
    """NARMA5 with y(0..4) = 0 and u ~ U[0, 0.5] unless ``u`` is given.

    The input sequence is kept in ``extras["u"]``.
    """
    if n_points <= 10:
        raise SeriesError("NARMA5 needs more than 10 points")
    if u is None:
        u = np.random.default_rng(seed).uniform(0.0, 0.5, n_points)
    u = np.asarray(u, dtype=np.float64)
    if u.shape != (n_points,):
        raise SeriesError(f"u must have {n_points} entries, got {u.shape}")
    y = np.zeros(n_points)
    for n in range(4, n_points - 1):
        y[n + 1] = (0.3 * y[n] + 0.05 * y[n] * y[n - 4:n + 1].sum()
                    + 1.5 * u[n - 4] * u[n] + 0.1)
    return RawSeries(np.arange(n_points, dtype=np.float64), y, "narma5", extras={"u": u})


@dataclass
class GwConfig:
    f0: float = 0.005
    t_merge: float = 400.0
    amp0: float = 1.0
    f_plus: float = 0.8
    f_cross: float = 0.6
    noise_sigma: float = 0.01
    ringdown_tau: float = 30.0
    dt: float = 1.0
    n_points: int = 500
    seed: int = 0


def gw_frequency(t, f0: float, t_merge: float) -> np.ndarray:
    """Newtonian chirp frequency f0 (1 - t/t_merge)^(-3/8) on the inspiral."""
    return f0 * (1 - np.asarray(t, dtype=np.float64) / t_merge) ** (-3 / 8)


def gen_gw_strain(config: GwConfig | None = None, **overrides) -> RawSeries:
    """Detector strain for a chirping inspiral followed by a damped ringdown.

    The inspiral frequency saturates at its value one sample before merger,
    which keeps the amplitude finite and continuous into the ringdown. The
    ringdown oscillates at that peak frequency and decays over
    ``ringdown_tau``.
    """
    cfg = config or GwConfig()
    if overrides:
        cfg = GwConfig(**{**cfg.__dict__, **overrides})
    if cfg.f0 <= 0 or cfg.dt <= 0 or cfg.n_points < 2:
        raise SeriesError("f0 and dt must be positive and n_points >= 2")
    t = np.arange(cfg.n_points) * cfg.dt
    if not cfg.dt <= cfg.t_merge <= t[-1]:
        raise SeriesError(f"t_merge={cfg.t_merge} lies outside the sampled span "
                          f"[{cfg.dt}, {t[-1]}]")

    tm = cfg.t_merge
    f_peak = float(gw_frequency(tm - cfg.dt, cfg.f0, tm))
    inspiral = t < tm
    tau = np.clip(1 - t / tm, 0.0, None)
    freq = np.minimum(cfg.f0 * np.where(inspiral, tau, 1.0) ** (-3 / 8), f_peak)
    # closed-form integral of 2 pi f(t) for the unsaturated chirp
    phase_merge = 2 * math.pi * cfg.f0 * tm * 8 / 5
    phase = np.where(inspiral, phase_merge * (1 - tau ** (5 / 8)),
                     phase_merge + 2 * math.pi * f_peak * (t - tm))
    amp_peak = cfg.amp0 * (f_peak / cfg.f0) ** (2 / 3)
    amp = np.where(inspiral, cfg.amp0 * (freq / cfg.f0) ** (2 / 3),
                   amp_peak * np.exp(-(t - tm) / cfg.ringdown_tau))

    h_plus = amp * np.cos(phase)
    h_cross = amp * np.sin(phase)
    h = cfg.f_plus * h_plus + cfg.f_cross * h_cross
    if cfg.noise_sigma > 0:
        h = h + np.random.default_rng(cfg.seed).normal(0.0, cfg.noise_sigma, cfg.n_points)
    return RawSeries(t, h, "gw", extras={"h_plus": h_plus, "h_cross": h_cross, "freq": freq})


def save_csv(series: RawSeries, path) -> None:
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="") as fh:
        fh.write("t,value\n")
        for t, x in zip(series.t, series.x):
            fh.write(f"{t:.17g},{x:.17g}\n")


def load_csv(path) -> RawSeries:
    """Read a two-column ``t,value`` CSV. Row numbers in errors count the header as row 1."""
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"no such series file: {path}")
    ts, xs = [], []
    with path.open("r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise CsvParseError("empty file", 1)
        if [h.strip() for h in header] != ["t", "value"]:
            raise CsvParseError(f"expected header 't,value', got {','.join(header)!r}", 1)
        for row_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 2:
                raise CsvParseError(f"expected 2 columns, got {len(row)}", row_no)
            try:
                t, x = float(row[0]), float(row[1])
            except ValueError:
                raise CsvParseError(f"non-numeric value in {row!r}", row_no) from None
            if not (math.isfinite(t) and math.isfinite(x)):
                raise CsvParseError(f"non-finite value in {row!r}", row_no)
            if ts and t <= ts[-1]:
                raise MonotonicityError(f"timestamp {t} does not increase past {ts[-1]}", row_no)
            ts.append(t)
            xs.append(x)
    if not ts:
        raise CsvParseError("no data rows", 2)
    return RawSeries(np.array(ts), np.array(xs), path.stem, "csv")


def make_windows(series: RawSeries, w: int = 4, split_fraction: float = 0.67,
                 norm: tuple[float, float] | None = None) -> WindowedDataset:
    """Every (w consecutive values, following value) pair, split chronologically.

    ``norm`` overrides the (min, max) statistics, e.g. to apply a trained
    model's scaling to a held-out series.
    """
    x = np.asarray(series.x, dtype=np.float64)
    if w < 1:
        raise SeriesError("window length must be >= 1")
    if x.size <= w + 1:
        raise SeriesError(f"series of length {x.size} is too short for windows of {w}")
    if not 0 < split_fraction < 1:
        raise SeriesError("split_fraction must lie strictly between 0 and 1")

    count = x.size - w
    split = int(math.floor(split_fraction * count))
    if norm is None:
        # train windows cover x[0 : split - 1 + w] and their targets end at x[split - 1 + w]
        train_values = x[:split + w]
        lo, hi = float(train_values.min()), float(train_values.max())
    else:
        lo, hi = map(float, norm)
    if not hi > lo:
        raise NormalizationError(f"cannot min-max normalize a constant segment (value {lo})")
    if not math.isfinite(hi - lo):
        raise NormalizationError(f"normalization range [{lo}, {hi}] overflows float64")

    scaled = (x - lo) / (hi - lo)
    idx = np.arange(count)[:, None] + np.arange(w)[None, :]
    return WindowedDataset(scaled[idx], scaled[w:], lo, hi, split)


def default_series(name: str, seed: int = 0) -> RawSeries:
    """The benchmark series used by the training defaults."""
    if name == "shm":
        return gen_damped_shm()
    if name == "narma5":
        return gen_narma5(seed=seed).tail(NARMA_WASHOUT)
    if name == "gw":
        return gen_gw_strain(seed=seed)
    raise SeriesError(f"unknown dataset {name!r}; choose shm, narma5 or gw")
