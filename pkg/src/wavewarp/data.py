"""Sequence containers, synthetic generators, CSV ingestion and the
alignment-error metric.

All sequence data is held as a ``TimeSeries``: a read-only real matrix whose
rows are samples in temporal order.  Alignments between two sequences are
``AlignmentPath`` objects: monotone 1-based index pairs subject to the usual
warping step constraints.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import ndimage

GENERATOR_KINDS = (
    "swiss-roll",
    "broken-swiss-roll",
    "twin-peaks",
    "rotated-digit",
    "dollar-sign",
)


class RaggedRowError(ValueError):
    """A CSV row has a different cell count than the first data row."""


class NonNumericCellError(ValueError):
    """A CSV cell could not be parsed as a number."""


@dataclass(frozen=True)
class TimeSeries:
    """Time-ordered samples: row i is the sample observed at step i.

    The row order is the temporal order; there is deliberately no operation
    that reorders rows.
    """

    samples: np.ndarray
    name: str = ""

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=float)
        if samples.ndim == 1:
            samples = samples[:, None]
        if samples.ndim != 2:
            raise ValueError("samples must be a 2-d array (rows = time steps)")
        n, d = samples.shape
        if n < 2:
            raise ValueError(f"a time series needs at least 2 samples, got {n}")
        if d < 1:
            raise ValueError("a time series needs at least 1 feature")
        if not np.all(np.isfinite(samples)):
            raise ValueError("samples contain non-finite values")
        samples = samples.copy()
        samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)

    @property
    def n(self) -> int:
        return self.samples.shape[0]

    @property
    def d(self) -> int:
        return self.samples.shape[1]


@dataclass(frozen=True, eq=False)
class AlignmentPath:
    """Monotone 1-based index pairs matching samples of two sequences.

    The first pair is (1, 1), the last pair is (n, m), and successive pairs
    differ by (1, 0), (0, 1) or (1, 1).
    """

    pairs: np.ndarray

    def __post_init__(self):
        pairs = np.asarray(self.pairs, dtype=np.int64)
        if pairs.ndim != 2 or pairs.shape[1] != 2 or len(pairs) == 0:
            raise ValueError("pairs must be a non-empty (s, 2) index array")
        if pairs[0, 0] != 1 or pairs[0, 1] != 1:
            raise ValueError("an alignment path must start at (1, 1)")
        steps = np.diff(pairs, axis=0)
        if len(steps) and not (
            np.isin(steps, (0, 1)).all() and (steps.sum(axis=1) >= 1).all()
        ):
            raise ValueError("each path step must be (1,0), (0,1) or (1,1)")
        pairs = pairs.copy()
        pairs.setflags(write=False)
        object.__setattr__(self, "pairs", pairs)

    @property
    def n(self) -> int:
        return int(self.pairs[-1, 0])

    @property
    def m(self) -> int:
        return int(self.pairs[-1, 1])

    def __len__(self) -> int:
        return len(self.pairs)

    def __eq__(self, other) -> bool:
        if not isinstance(other, AlignmentPath):
            return NotImplemented
        return np.array_equal(self.pairs, other.pairs)

    def __hash__(self):
        return hash(self.pairs.tobytes())


def load_timeseries_csv(path, has_header: bool = False) -> TimeSeries:
    """Read a comma-separated numeric file, one sample per line.

    Parameters
    ----------
    path : file path
    has_header : if true, the first line is skipped.

    Raises
    ------
    FileNotFoundError        when the file does not exist.
    RaggedRowError           when a row has a different width than the first,
                             naming the offending line.
    NonNumericCellError      when a cell fails to parse, naming line and column.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"no such file: {path}")
    rows = []
    width = None
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            if has_header and lineno == 1:
                continue
            cells = line.split(",")
            if width is None:
                width = len(cells)
            elif len(cells) != width:
                raise RaggedRowError(
                    f"line {lineno}: expected {width} cells, got {len(cells)}"
                )
            values = []
            for col, cell in enumerate(cells, start=1):
                try:
                    values.append(float(cell))
                except ValueError:
                    raise NonNumericCellError(
                        f"line {lineno}, column {col}: {cell.strip()!r} is not a number"
                    ) from None
            rows.append(values)
    if not rows:
        raise ValueError(f"{path}: no data rows")
    return TimeSeries(np.asarray(rows, dtype=float), name=path.stem)


def save_timeseries_csv(ts_or_array, path) -> None:
    """Write samples as plain CSV, one row per time step."""
    arr = ts_or_array.samples if isinstance(ts_or_array, TimeSeries) else np.asarray(ts_or_array, float)
    if arr.ndim == 1:
        arr = arr[:, None]
    np.savetxt(path, arr, fmt="%.17g", delimiter=",")


# ---------------------------------------------------------------------------
# synthetic generators
# ---------------------------------------------------------------------------

# 16x16 glyph of the digit "3"; kept as an in-repository fixture so rotated
# sequences are reproducible bit for bit.
_DIGIT_ROWS = (
    "................",
    "....########....",
    "...##########...",
    "..###......###..",
    "..##........##..",
    ".............##.",
    "............##..",
    "......######....",
    "......######....",
    "............##..",
    ".............##.",
    "..##........##..",
    "..###......###..",
    "...##########...",
    "....########....",
    "................",
)

DIGIT_GLYPH = np.array(
    [[1.0 if ch == "#" else 0.0 for ch in row] for row in _DIGIT_ROWS]
)

_ROLL_T0 = 1.5 * np.pi
_ROLL_T1 = 3.5 * np.pi
# latent gap of the broken roll, as fractions of the arc length
_ROLL_GAP = (0.22, 0.27)
# fixed angular phase offset of the broken roll; an ambient isometry that
# leaves the neighborhood graph intact but defeats raw coordinate matching
_ROLL_TWIST = 0.35 * np.pi


def _roll_points(t, twist=0.0):
    angle = t + twist
    return np.stack([t * np.cos(angle), 0.5 * np.sin(2.0 * t), t * np.sin(angle)], axis=1)


def _arc_to_param(arc):
    # arc length of the spiral r = t grows like (t^2 - t0^2) / 2
    return np.sqrt(_ROLL_T0**2 + 2.0 * arc)


def _swiss_roll(n, rng):
    total = (_ROLL_T1**2 - _ROLL_T0**2) / 2.0
    t = _arc_to_param(np.linspace(0.0, total, n))
    return _roll_points(t), t


def _broken_swiss_roll(n, rng):
    total = (_ROLL_T1**2 - _ROLL_T0**2) / 2.0
    a, b = _ROLL_GAP
    n1 = max(2, int(round(n * a / (1.0 - (b - a)))))
    n2 = n - n1
    arc = np.concatenate(
        [np.linspace(0.0, a * total, n1), np.linspace(b * total, total, n2)]
    )
    t = _arc_to_param(arc)
    return _roll_points(t, twist=_ROLL_TWIST), t


def _twin_peaks(n, rng):
    t = np.linspace(0.0, 1.0, n)
    x = 2.0 * t - 1.0
    y = np.sin(np.pi * t)
    z = np.exp(-((x + 0.5) ** 2) / 0.05) + np.exp(-((x - 0.5) ** 2) / 0.05)
    return np.stack([x, y, z], axis=1), t


def _dollar_sign(n, rng):
    """Two pen strokes crossing at the origin: an S curve in the xy-plane and
    a bar stroke lifted slightly out of that plane, so the strokes span
    distinct linear subspaces while still intersecting in space."""
    n_s = int(round(0.6 * n))
    n_b = n - n_s
    y_s = np.linspace(-1.1, 1.1, n_s)
    x_s = -0.55 * np.sin(np.pi * y_s / 1.1)
    stroke_s = np.stack([x_s, y_s, np.zeros(n_s)], axis=1)
    y_b = np.linspace(-1.5, 1.5, n_b)
    stroke_b = np.stack([np.zeros(n_b), y_b, 0.25 * y_b], axis=1)
    pts = np.concatenate([stroke_s, stroke_b])
    label = np.concatenate([np.zeros(n_s), np.ones(n_b)])
    param = np.concatenate([y_s, y_b])
    return pts, np.stack([label, param], axis=1)


def _rotated_digit(n, rng):
    angles = 360.0 * np.arange(n) / n
    frames = [
        ndimage.rotate(DIGIT_GLYPH, angle, reshape=False, order=1, mode="constant", cval=0.0)
        for angle in angles
    ]
    return np.stack(frames).reshape(n, -1), angles


_GENERATORS = {
    "swiss-roll": _swiss_roll,
    "broken-swiss-roll": _broken_swiss_roll,
    "twin-peaks": _twin_peaks,
    "rotated-digit": _rotated_digit,
    "dollar-sign": _dollar_sign,
}


def synthetic_with_latent(kind: str, n: int, noise: float = 0.0, seed: int = 0):
    """Generate a synthetic sequence plus its latent parameter.

    Returns (TimeSeries, latent) where latent is an (n,) array of the
    1-d latent coordinate, except for ``dollar-sign`` which returns an
    (n, 2) array of (stroke label, within-stroke parameter).
    """
    if kind not in _GENERATORS:
        known = ", ".join(GENERATOR_KINDS)
        raise ValueError(f"unknown generator kind {kind!r} (known: {known})")
    n = int(n)
    if n < 8:
        raise ValueError(f"need n >= 8, got {n}")
    if noise < 0:
        raise ValueError("noise must be non-negative")
    rng = np.random.default_rng(seed)
    points, latent = _GENERATORS[kind](n, rng)
    if noise > 0:
        points = points + noise * rng.standard_normal(points.shape)
    return TimeSeries(points, name=kind), latent


def gen_synthetic(kind: str, n: int, noise: float = 0.0, seed: int = 0) -> TimeSeries:
    """Generate a synthetic sequence; deterministic for a fixed seed."""
    ts, _ = synthetic_with_latent(kind, n, noise, seed)
    return ts


# ---------------------------------------------------------------------------
# alignment-error metric
# ---------------------------------------------------------------------------

def _column_profile(path: AlignmentPath, n: int, m: int):
    """Per-column extremes of matched row indices: lo[i], hi[i] for column i."""
    i = path.pairs[:, 0]
    j = path.pairs[:, 1]
    hi = np.zeros(n + 1, dtype=float)
    lo = np.full(n + 1, np.inf)
    np.maximum.at(hi, i, j)
    np.minimum.at(lo, i, j)
    return lo[1:], hi[1:]


def alignment_error(p: AlignmentPath, p_star: AlignmentPath) -> float:
    """Area between the warping curves of two paths, in the unit square.

    Both paths are drawn as piecewise-linear curves through the normalized
    points (i/n, j/m); the metric is the unsigned area enclosed between the
    two curves.  It is symmetric, lies in [0, 1], and is zero exactly when
    the paths coincide.
    """
    if (p.n, p.m) != (p_star.n, p_star.m):
        raise ValueError(
            f"paths cover different index ranges: ({p.n},{p.m}) vs ({p_star.n},{p_star.m})"
        )
    n, m = p.n, p.m
    if n == 1:
        return 0.0
    lo_p, hi_p = _column_profile(p, n, m)
    lo_q, hi_q = _column_profile(p_star, n, m)
    # between columns i and i+1 each curve is one straight segment from the
    # column's exit height to the next column's entry height
    da = (hi_p[:-1] - hi_q[:-1]) / m
    db = (lo_p[1:] - lo_q[1:]) / m
    width = 1.0 / n
    same = da * db >= 0
    area = width * np.abs(da[same] + db[same]).sum() / 2.0
    cross = ~same
    if cross.any():
        a = np.abs(da[cross])
        b = np.abs(db[cross])
        area += width * ((a * a + b * b) / (2.0 * (a + b))).sum()
    return float(area)
