"""Synthetic sources meeting the conditional-label floor, plus CSV I/O.

Features are uniform on the unit ball, so ``E[x x^T] = I / (d + 2)``.
Classification labels are the sign of a teacher direction flipped
independently with probability ``q``, which keeps both conditional label
probabilities at or above ``q`` everywhere.
"""
from __future__ import annotations

import csv
import io
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

log = logging.getLogger(__name__)

NORM_TOL = 1e-12


class DataError(ValueError):
    pass


@dataclass
class Dataset:
    X: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        self.X = np.ascontiguousarray(self.X, dtype=float)
        self.y = np.ascontiguousarray(self.y, dtype=float)
        if self.X.ndim != 2 or self.y.shape != (self.X.shape[0],):
            raise DataError(f"inconsistent shapes X{self.X.shape} y{self.y.shape}")

    def __len__(self):
        return self.X.shape[0]

    @property
    def dim(self) -> int:
        return self.X.shape[1]

    @property
    def is_classification(self) -> bool:
        return bool(np.all(np.abs(self.y) == 1.0))

    def validate(self) -> None:
        norms = np.linalg.norm(self.X, axis=1)
        if np.any(norms > 1.0 + NORM_TOL):
            raise DataError(f"feature norm {norms.max()!r} exceeds 1")
        if np.any(np.abs(self.y) > 1.0):
            raise DataError("labels must lie in [-1, 1]")


@dataclass(frozen=True)
class LemmaOneSource:
    """Uniform-ball features with teacher-sign labels flipped at rate ``flip_q``.

    ``margin_noise`` adds Gaussian noise of that scale to ``teacher . x``
    before taking the sign. With ``regression=True`` labels are instead
    ``clip(teacher . x + U(-margin_noise, margin_noise), -1, 1)``.
    """

    dim: int
    teacher_w: np.ndarray = field(repr=False)
    flip_q: float
    seed: int = 0
    margin_noise: float = 0.0
    regression: bool = False

    def __post_init__(self):
        t = np.array(self.teacher_w, dtype=float)
        if t.shape != (self.dim,):
            raise ValueError(f"teacher_w must have length {self.dim}")
        t.setflags(write=False)
        object.__setattr__(self, "teacher_w", t)
        if not self.regression and not 0.0 < self.flip_q <= 0.5:
            raise ValueError("flip_q must lie in (0, 1/2]")

    @classmethod
    def default(cls, dim: int = 5, flip_q: float = 0.2, radius_R: float = 1.0, seed: int = 0, **kw):
        """Teacher ``R * e_1``."""
        teacher = np.zeros(dim)
        teacher[0] = radius_R
        return cls(dim, teacher, flip_q, seed, **kw)

    def sample(self, n: int, rng: np.random.Generator | None = None) -> Dataset:
        return sample(self, n, rng)


def uniform_ball(rng: np.random.Generator, n: int, d: int) -> np.ndarray:
    g = rng.standard_normal((n, d))
    norms = np.linalg.norm(g, axis=1, keepdims=True)
    norms[norms == 0.0] = 1.0
    r = rng.random(n) ** (1.0 / d)
    x = g / norms * r[:, None]
    # rounding can leave ||x|| a hair above 1
    over = np.linalg.norm(x, axis=1)
    big = over > 1.0
    x[big] /= over[big, None]
    return x


def sample(source: LemmaOneSource, n: int, rng: np.random.Generator | None = None) -> Dataset:
    """Draw ``n`` i.i.d. examples. Without ``rng`` the stream is seeded by ``source.seed``."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    if rng is None:
        rng = np.random.default_rng(source.seed)
    X = uniform_ball(rng, n, source.dim)
    score = X @ source.teacher_w
    if source.regression:
        noise = rng.uniform(-source.margin_noise, source.margin_noise, n) if source.margin_noise else 0.0
        y = np.clip(score + noise, -1.0, 1.0)
        return Dataset(X, y)
    if source.margin_noise:
        score = score + source.margin_noise * rng.standard_normal(n)
    y = np.where(score >= 0.0, 1.0, -1.0)
    flip = rng.random(n) < source.flip_q
    y[flip] = -y[flip]
    return Dataset(X, y)


def _looks_numeric(row) -> bool:
    try:
        [float(v) for v in row]
    except ValueError:
        return False
    return True


def load_csv(path, strict: bool = False) -> Dataset:
    """Read rows ``y,x1,...,xd`` (optional header).

    Rows with ``||x|| > 1`` are rescaled onto the unit sphere with a warning,
    or rejected when ``strict``.
    """
    text = Path(path).read_text(encoding="utf-8")
    rows = [r for r in csv.reader(io.StringIO(text)) if r and any(c.strip() for c in r)]
    if rows and not _looks_numeric(rows[0]):
        rows = rows[1:]
    ys, xs = [], []
    dim = None
    for lineno, row in enumerate(rows, start=1):
        try:
            vals = [float(v) for v in row]
        except ValueError as exc:
            raise DataError(f"row {lineno}: cannot parse {row!r}") from exc
        if len(vals) < 2:
            raise DataError(f"row {lineno}: need a label and at least one feature")
        if dim is None:
            dim = len(vals) - 1
        elif len(vals) - 1 != dim:
            raise DataError(f"row {lineno}: expected {dim} features, got {len(vals) - 1}")
        y, x = vals[0], np.array(vals[1:])
        if not all(math.isfinite(v) for v in vals):
            raise DataError(f"row {lineno}: non-finite value")
        if abs(y) > 1.0:
            raise DataError(f"row {lineno}: label {y!r} outside [-1, 1]")
        nx = float(np.linalg.norm(x))
        if nx > 1.0 + NORM_TOL:
            if strict:
                raise DataError(f"row {lineno}: feature norm {nx!r} exceeds 1")
            log.warning("row %d: feature norm %r > 1, rescaled to the unit sphere", lineno, nx)
            x = x / nx
        ys.append(y)
        xs.append(x)
    if dim is None:
        raise DataError(f"{path}: no data rows")
    return Dataset(np.vstack(xs), np.array(ys))


def save_csv(dataset: Dataset, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        for y, x in zip(dataset.y, dataset.X):
            w.writerow([repr(float(y))] + [repr(float(v)) for v in x])
