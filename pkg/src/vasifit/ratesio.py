"""Real-data workflow: CSV ingestion, noise recovery and one-step forecasts."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from datetime import date

import numpy as np

from . import matcore
from .errors import (
    ConfigurationError,
    DimensionError,
    InsufficientDataError,
    OrderingError,
    SchemaError,
    SingularityError,
    VasifitError,
)
from .estimate import EstimationConfig, FitResult, fit
from .noise import IncrementArray, NoiseSpec
from .simulate import PathGrid

# Estimates reported for 1-month Euribor and the Federal Funds Effective Rate,
# 1999-01-04 to 2025-05-06 (6765 daily rows), fBm noise with H = 0.7.  Only a
# reference point: reproducing it needs the same data and configuration.
EURIBOR_DFF_REFERENCE = {
    "hurst": 0.7,
    "n_observations": 6765,
    "theta_hat": [[0.007998, -0.005324], [-0.005324, 0.019277]],
    "sigma_hat": [0.02053, 0.083129],
    "b_hat": [1.554624, 2.068773],
}


@dataclass(frozen=True)
class RateSeries:
    labels: tuple
    dates: tuple
    values: np.ndarray = field(repr=False)
    h: float = 1.0
    dropped: int = 0

    @property
    def d(self):
        return self.values.shape[0]

    @property
    def n(self):
        return self.values.shape[1] - 1

    def to_path(self) -> PathGrid:
        return PathGrid(0.0, self.h, self.values)

    def head(self, n_points):
        """The first ``n_points`` observations."""
        return RateSeries(self.labels, self.dates[:n_points], self.values[:, :n_points], self.h, self.dropped)


def load_csv(source, date_column="date", value_columns=None, h=1.0, min_rows=10) -> RateSeries:
    """Read a multivariate rate series.

    ``source`` is a path or an open text stream.  Rows with an empty or
    non-numeric value in any selected column are dropped; the count is kept
    in ``RateSeries.dropped``.  ``value_columns`` defaults to every column
    other than the date column.
    """
    if isinstance(source, (str, bytes)) or hasattr(source, "__fspath__"):
        with open(source, newline="", encoding="utf-8") as fh:
            return load_csv(fh, date_column, value_columns, h, min_rows)
    reader = csv.reader(source)
    try:
        header = [name.strip() for name in next(reader)]
    except StopIteration:
        raise SchemaError("empty CSV input") from None
    if date_column not in header:
        raise SchemaError(f"date column {date_column!r} not found in header {header}")
    if value_columns is None:
        value_columns = [name for name in header if name != date_column]
    value_columns = list(value_columns)
    missing = [name for name in value_columns if name not in header]
    if missing or not value_columns:
        raise SchemaError(f"value columns {missing or value_columns} not found in header {header}")
    if not h > 0:
        raise SchemaError(f"h must be > 0, got {h}")
    di = header.index(date_column)
    vi = [header.index(name) for name in value_columns]

    dates, rows, dropped = [], [], 0
    for lineno, raw in enumerate(reader, start=2):
        if not any(cell.strip() for cell in raw):
            continue
        cells = [cell.strip() for cell in raw] + [""] * (len(header) - len(raw))
        try:
            values = [float(cells[i]) for i in vi]
        except ValueError:
            dropped += 1
            continue
        if not all(math.isfinite(v) for v in values) or not cells[di]:
            dropped += 1
            continue
        try:
            day = date.fromisoformat(cells[di])
        except ValueError as exc:
            raise SchemaError(f"line {lineno}: bad date {cells[di]!r}") from exc
        dates.append(day)
        rows.append(values)
    for k in range(1, len(dates)):
        if not dates[k] > dates[k - 1]:
            raise OrderingError(f"dates are not strictly increasing at {dates[k]} (after {dates[k - 1]})")
    if len(rows) < max(min_rows, 2):
        raise InsufficientDataError(f"only {len(rows)} usable rows, need at least {max(min_rows, 2)}")
    return RateSeries(tuple(value_columns), tuple(dates), np.array(rows).T.copy(), float(h), dropped)


def holdout_start(n_points, holdout_fraction):
    """Index of the first held-out observation."""
    if not 0.0 < holdout_fraction < 1.0:
        raise ConfigurationError(f"data.holdout_fraction must be in (0, 1), got {holdout_fraction}")
    n_hold = int(round(holdout_fraction * n_points))
    n_hold = min(max(n_hold, 1), n_points - 1)
    return n_points - n_hold


@dataclass
class PredictionReport:
    labels: tuple
    dates: tuple
    actual: np.ndarray
    predicted: np.ndarray
    holdout_fraction: float
    start: int
    h: float

    @property
    def rmse(self):
        return np.sqrt(np.mean((self.predicted - self.actual) ** 2, axis=1))

    @property
    def mae(self):
        return np.mean(np.abs(self.predicted - self.actual), axis=1)

    def metrics(self):
        return {
            "labels": list(self.labels),
            "rmse": dict(zip(self.labels, self.rmse.tolist())),
            "mae": dict(zip(self.labels, self.mae.tolist())),
            "holdout_fraction": self.holdout_fraction,
            "n_holdout": int(self.actual.shape[1]),
            "holdout_start": self.start,
            "h": self.h,
        }

    def to_csv(self, path):
        d = self.actual.shape[0]
        header = ["date"] + [c for i in range(d) for c in (f"actual_{i + 1}", f"pred_{i + 1}")]
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            for k, day in enumerate(self.dates):
                cells = []
                for i in range(d):
                    cells += [f"{self.actual[i, k]:.17g}", f"{self.predicted[i, k]:.17g}"]
                writer.writerow([str(day)] + cells)


def one_step_predictions(theta, b, values, h):
    """``b + e^{-theta h} (r_k - b)`` for every column ``r_k`` of ``values``."""
    propagator = matcore.mat_exp(-h * np.asarray(theta, dtype=float))
    b = np.asarray(b, dtype=float)
    return b[:, None] + propagator @ (values - b[:, None])


def predict_one_step(fit_result: FitResult, series: RateSeries, holdout_fraction=0.2) -> PredictionReport:
    """One-step-ahead forecasts over the last ``holdout_fraction`` of the series.

    The forecast for observation ``k`` uses observation ``k - 1`` only.
    """
    if fit_result.d != series.d:
        raise DimensionError(f"fit has d={fit_result.d}, series has d={series.d}")
    start = holdout_start(series.n + 1, holdout_fraction)
    predicted = one_step_predictions(fit_result.theta_hat, fit_result.b_hat,
                                     series.values[:, start - 1:-1], series.h)
    return PredictionReport(
        labels=series.labels,
        dates=series.dates[start:],
        actual=series.values[:, start:].copy(),
        predicted=predicted,
        holdout_fraction=holdout_fraction,
        start=start,
        h=series.h,
    )


def extract_increments(fit_result: FitResult, series) -> IncrementArray:
    """Recover noise increments by inverting the Euler step with fitted parameters.

    ``series`` may be a :class:`RateSeries` or a :class:`PathGrid`.
    """
    values, h = series.values, series.h
    if fit_result.d != values.shape[0]:
        raise DimensionError(f"fit has d={fit_result.d}, series has d={values.shape[0]}")
    sigma = np.asarray(fit_result.sigma_hat, dtype=float)
    if not matcore.is_spd(sigma, tol=matcore.CLIP_EPS):
        raise SingularityError("fitted sigma is singular; increments cannot be recovered")
    theta, b = fit_result.theta_hat, fit_result.b_hat
    r = values[:, :-1]
    drift = (theta @ (b[:, None] - r)) * h
    return IncrementArray(h=h, values=np.linalg.solve(sigma, np.diff(values, axis=1) - drift))


def hurst_sweep(series, hursts, cfg: EstimationConfig = EstimationConfig()):
    """Fit the series once per Hurst index; failed fits map to the error message."""
    path = series.to_path() if isinstance(series, RateSeries) else series
    out = {}
    for H in hursts:
        spec = NoiseSpec(kind="fbm", d=path.d, hurst=float(H))
        try:
            result = fit(path, spec, cfg)
        except VasifitError as exc:
            out[float(H)] = {"error": f"{type(exc).__name__}: {exc}"}
        else:
            out[float(H)] = {
                "theta_hat": result.theta_hat.tolist(),
                "sigma_hat": result.sigma_hat.tolist(),
                "b_hat": result.b_hat.tolist(),
            }
    return out


def prediction_metrics_json(report: PredictionReport, extra=None, path=None):
    data = report.metrics()
    if extra:
        data.update(extra)
    text = json.dumps(data, indent=2, sort_keys=True) + "\n"
    if path is not None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    return text
