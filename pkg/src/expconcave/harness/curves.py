"""Excess-risk and regret curves over a grid of sample sizes."""
from __future__ import annotations

import csv
import enum
import io
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from ..data import LemmaOneSource, sample
from ..erm import ErmConfig, erm_solve
from ..losses import LossSpec, loss_value
from ..ons import OnsConfig, default_step_c, run_ogd, run_ons
from .estimators import estimate_theta, evaluation_sample, reference_minimizer
from .seeding import rng_for

log = logging.getLogger(__name__)

MIN_REPEATS = 8
MIN_SLOPE_ROWS = 4


class Learner(enum.Enum):
    ONS = "ons"
    ERM = "erm"
    OGD = "ogd"

    @classmethod
    def parse(cls, value) -> "Learner":
        if isinstance(value, cls):
            return value
        return cls(str(value).lower())


class SlopeFitError(ValueError):
    pass


@dataclass(frozen=True)
class RiskRow:
    n: int
    excess_risk_mean: float
    excess_risk_stderr: float
    repeats: int


@dataclass
class RiskReport:
    rows: list[RiskRow]
    fitted_slope: float | None
    learner_tag: Learner
    # run diagnostics, not serialized
    meta: dict = field(default_factory=dict, compare=False, repr=False)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["learner", "n", "repeat_count", "excess_risk_mean", "excess_risk_stderr"])
        for r in self.rows:
            w.writerow([self.learner_tag.value, r.n, r.repeats, repr(r.excess_risk_mean),
                        repr(r.excess_risk_stderr)])
        w.writerow(["slope", "NA" if self.fitted_slope is None else repr(self.fitted_slope)])
        return buf.getvalue()

    def write_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(self.to_csv())

    @classmethod
    def from_csv(cls, text: str) -> "RiskReport":
        rows, slope, tag = [], None, None
        reader = csv.reader(io.StringIO(text))
        header = next(reader)
        if header[:2] != ["learner", "n"]:
            raise ValueError(f"unexpected header {header!r}")
        for rec in reader:
            if not rec:
                continue
            if rec[0] == "slope":
                slope = None if rec[1] == "NA" else float(rec[1])
                continue
            tag = Learner.parse(rec[0])
            rows.append(RiskRow(int(rec[1]), float(rec[3]), float(rec[4]), int(rec[2])))
        if tag is None:
            raise ValueError("report has no rows")
        return cls(rows, slope, tag)

    @classmethod
    def read_csv(cls, path) -> "RiskReport":
        with open(path, encoding="utf-8") as fh:
            return cls.from_csv(fh.read())


def fit_slope(ns, means, stderrs) -> float:
    """Least-squares slope of ``log(mean)`` on ``log(n)`` over rows with ``mean > 2 stderr``."""
    ns = np.asarray(ns, dtype=float)
    means = np.asarray(means, dtype=float)
    stderrs = np.asarray(stderrs, dtype=float)
    keep = means > 2.0 * stderrs
    if int(np.sum(keep)) < MIN_SLOPE_ROWS:
        raise SlopeFitError(f"only {int(np.sum(keep))} rows distinguishable from zero; need {MIN_SLOPE_ROWS}")
    slope, _ = np.polyfit(np.log(ns[keep]), np.log(means[keep]), 1)
    return float(slope)


@dataclass
class CurveSetup:
    """Objects shared across the cells of a curve (and across learners)."""

    source: LemmaOneSource
    loss: LossSpec
    seed: int
    reference_w: np.ndarray
    eval_X: np.ndarray
    eval_y: np.ndarray
    reference_losses: np.ndarray
    theta: float | None = None

    @classmethod
    def build(cls, source, loss, seed, n_ref, n_eval=200_000, reference_w=None, theta=None):
        if reference_w is None:
            reference_w = reference_minimizer(source, loss, n_ref, seed)
        ev = evaluation_sample(source, n_eval, seed)
        ref_losses = loss_value(loss, ev.y * (ev.X @ reference_w))
        return cls(source, loss, seed, np.asarray(reference_w, float), ev.X, ev.y, ref_losses, theta)

    def ensure_theta(self) -> float:
        if self.theta is None:
            self.theta = estimate_theta(self.source, self.loss, seed=self.seed)
        return self.theta

    def excess(self, w) -> float:
        """Excess risk on the shared evaluation draws (common random numbers)."""
        vals = loss_value(self.loss, self.eval_y * (self.eval_X @ w))
        return float(np.mean(vals - self.reference_losses))


def train(learner: Learner, X, y, setup: CurveSetup, *, eta1=None, smoothing_a=None,
          step_c=None, literal_gradient=False) -> np.ndarray:
    loss = setup.loss
    if learner is Learner.ERM:
        from ..data import Dataset

        return erm_solve(Dataset(X, y), loss, ErmConfig(loss.radius_R))
    if learner is Learner.OGD:
        return run_ogd(X, y, loss, step_c if step_c is not None else default_step_c(loss),
                       literal_gradient).average
    cfg = OnsConfig.defaults(loss, X.shape[1], setup.ensure_theta(), eta1=eta1,
                             smoothing_a=smoothing_a, literal_gradient=literal_gradient)
    return run_ons(X, y, loss, cfg).average


def risk_curve(learner, source: LemmaOneSource, loss: LossSpec, n_grid, repeats: int = 16,
               seed: int = 0, *, n_eval: int = 200_000, setup: CurveSetup | None = None,
               ref_factor: int = 10, eta1=None, smoothing_a=None, step_c=None,
               literal_gradient: bool = False) -> RiskReport:
    """Excess risk of ``learner`` at each ``n`` in ``n_grid``, averaged over ``repeats``.

    The training sample for cell ``(n, r)`` is drawn from a stream keyed by
    ``(seed, n, r)``, so different learners see identical data. Pass a
    shared ``setup`` to reuse the reference minimizer and evaluation draws.
    """
    learner = Learner.parse(learner)
    n_grid = [int(n) for n in n_grid]
    if any(b <= a for a, b in zip(n_grid, n_grid[1:])) or not n_grid or n_grid[0] < 1:
        raise ValueError("n_grid must be strictly increasing positive sizes")
    if repeats < MIN_REPEATS:
        raise ValueError(f"repeats must be at least {MIN_REPEATS}")
    if setup is None:
        setup = CurveSetup.build(source, loss, seed, ref_factor * n_grid[-1], n_eval)
    rows = []
    for n in n_grid:
        vals = []
        for r in range(repeats):
            data = sample(source, n, rng_for(seed, n, r))
            w = train(learner, data.X, data.y, setup, eta1=eta1, smoothing_a=smoothing_a,
                      step_c=step_c, literal_gradient=literal_gradient)
            vals.append(setup.excess(w))
        vals = np.asarray(vals)
        rows.append(RiskRow(n, float(vals.mean()), float(vals.std(ddof=1) / math.sqrt(repeats)), repeats))
        log.info("%s n=%d excess=%.3e +- %.1e", learner.value, n, rows[-1].excess_risk_mean,
                 rows[-1].excess_risk_stderr)
    try:
        slope = fit_slope([r.n for r in rows], [r.excess_risk_mean for r in rows],
                          [r.excess_risk_stderr for r in rows])
    except SlopeFitError as exc:
        log.warning("slope not fitted: %s", exc)
        slope = None
    meta = {"reference_w": setup.reference_w, "theta": setup.theta}
    return RiskReport(rows, slope, learner, meta)


@dataclass(frozen=True)
class RegretRow:
    n: int
    regret_mean: float
    regret_stderr: float
    ratio: float  # regret_mean / (d ln n)


def regret_curve(source: LemmaOneSource, loss: LossSpec, checkpoints, repeats: int = 8,
                 seed: int = 0, *, setup: CurveSetup | None = None, ref_factor: int = 10,
                 n_eval: int = 200_000) -> list[RegretRow]:
    """Prefix regret of the online Newton learner against the reference minimizer.

    One run of length ``max(checkpoints)`` per repeat; regret is read off at
    each checkpoint.
    """
    checkpoints = sorted(int(c) for c in checkpoints)
    n_max = checkpoints[-1]
    if setup is None:
        setup = CurveSetup.build(source, loss, seed, ref_factor * n_max, n_eval)
    cfg = OnsConfig.defaults(loss, source.dim, setup.ensure_theta())
    prefix = np.empty((repeats, len(checkpoints)))
    for r in range(repeats):
        data = sample(source, n_max, rng_for(seed, n_max, r))
        run = run_ons(data.X, data.y, loss, cfg)
        cum = run.prefix_regret(setup.reference_w, data.X, data.y, loss)
        prefix[r] = cum[np.asarray(checkpoints) - 1]
    out = []
    for j, n in enumerate(checkpoints):
        m = float(prefix[:, j].mean())
        se = float(prefix[:, j].std(ddof=1) / math.sqrt(repeats)) if repeats > 1 else 0.0
        out.append(RegretRow(n, m, se, m / (source.dim * math.log(n))))
    return out
