"""Monte Carlo replication harness.

Each replication draws its own noise from the substream
``(master_seed, replication, component)``, simulates a path with the
Euler scheme, and fits it.  Results depend only on the master seed and the
replication index, never on the number of workers.
"""

from __future__ import annotations

import csv
import json
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import ConfigurationError, HarnessError, VasifitError
from .estimate import EstimationConfig, fit
from .noise import NoiseSpec, sample_increments
from .simulate import ModelParams, simulate_path

QUANTILES = (0.01, 0.05, 0.5, 0.95, 0.99)
HIST_BINS = 40
HIST_RANGE = (0.005, 0.995)


@dataclass(frozen=True)
class McConfig:
    params: ModelParams
    spec: NoiseSpec
    replications: int = 100
    n: int = 10_000
    h: float = 0.4
    cfg: EstimationConfig = field(default_factory=EstimationConfig)
    master_seed: int = 0
    workers: int = 1
    r0: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.replications < 1:
            raise ConfigurationError(f"mc.replications must be >= 1, got {self.replications}")
        if self.workers < 1:
            raise ConfigurationError(f"mc.workers must be >= 1, got {self.workers}")
        if self.spec.d != self.params.d:
            raise ConfigurationError(f"noise.d={self.spec.d} does not match model dimension {self.params.d}")
        if not self.n * self.h >= 2 * self.cfg.t_upper:
            raise ConfigurationError(
                f"path duration n*h={self.n * self.h} must be at least 2*t_upper={2 * self.cfg.t_upper}"
            )

    def metadata(self):
        """Everything that determines the results (``workers`` does not)."""
        return {
            "model": self.params.to_dict(),
            "noise": self.spec.to_dict(),
            "replications": self.replications,
            "n": self.n,
            "h": self.h,
            "estimation": self.cfg.to_dict(),
            "master_seed": self.master_seed,
            "r0": (self.params.b if self.r0 is None else np.asarray(self.r0, float)).tolist(),
        }


def run_replication(mc: McConfig, index: int) -> dict:
    """Simulate and fit one replication; failures are captured, not raised."""
    inc = sample_increments(mc.spec, mc.n, mc.h, mc.master_seed, replication=index)
    path = simulate_path(mc.params, inc, mc.r0)
    try:
        result = fit(path, mc.spec, mc.cfg)
    except VasifitError as exc:
        return {"replication": index, "status": "failed",
                "reason": f"{type(exc).__name__}: {exc}", "category": type(exc).__name__}
    return {
        "replication": index,
        "status": "ok",
        "theta_hat": result.theta_hat,
        "b_hat": result.b_hat,
        "sigma_hat": result.sigma_hat,
        "solver_branch": result.diagnostics["solver_branch"],
    }


def _run_chunk(args):
    mc, indices = args
    return [run_replication(mc, j) for j in indices]


def _component_errors(estimates, truth: ModelParams):
    """Ordered mapping component name -> array of errors over replications."""
    d = truth.d
    theta = np.array([e["theta_hat"] for e in estimates]) - truth.theta
    sigma = np.array([e["sigma_hat"] for e in estimates]) - truth.sigma
    b = np.array([e["b_hat"] for e in estimates]) - truth.b
    out = {}
    for i in range(d):
        for j in range(d):
            out[f"theta_{i + 1}{j + 1}"] = theta[:, i, j]
    for i in range(d):
        for j in range(d):
            out[f"sigma_{i + 1}{j + 1}"] = sigma[:, i, j]
    for i in range(d):
        out[f"b_{i + 1}"] = b[:, i]
    out["theta_fro"] = np.linalg.norm(theta, axis=(1, 2))
    return out


def _histogram(x):
    lo, hi = np.quantile(x, HIST_RANGE, method="midpoint")
    if not hi > lo:
        lo, hi = lo - 0.5, hi + 0.5
    counts, edges = np.histogram(x, bins=HIST_BINS, range=(lo, hi))
    return edges, counts


def summarize(estimates, truth: ModelParams) -> dict:
    """Error statistics and histogram data for a set of successful fits.

    ``estimates`` is a sequence of mappings with ``theta_hat``, ``b_hat`` and
    ``sigma_hat``.  For every component of ``theta_hat - theta``,
    ``sigma_hat - sigma`` and ``b_hat - b`` (and the Frobenius norm of the
    theta error) this reports mean, sample standard deviation (0 for a single
    replication), midpoint quantiles and a 40-bin histogram over the
    0.5%-99.5% quantile range.
    """
    estimates = list(estimates)
    if not estimates:
        raise HarnessError("cannot summarize an empty set of estimates")
    stats, hists = {}, {}
    for name, x in _component_errors(estimates, truth).items():
        q = np.quantile(x, QUANTILES, method="midpoint")
        stats[name] = {
            "n": int(x.size),
            "mean": float(np.mean(x)),
            "std": float(np.std(x, ddof=1)) if x.size > 1 else 0.0,
            **{f"q{int(round(p * 100)):02d}": float(v) for p, v in zip(QUANTILES, q)},
        }
        edges, counts = _histogram(x)
        hists[name] = {"edges": edges.tolist(), "counts": counts.tolist()}
    return {"stats": stats, "histograms": hists}


@dataclass
class McReport:
    metadata: dict
    table: list
    summaries: dict
    failures: dict

    @property
    def successes(self):
        return [row for row in self.table if row["status"] == "ok"]

    def errors(self, component):
        return _component_errors(self.successes, _truth(self.metadata))[component]

    def to_dict(self):
        return {
            "metadata": self.metadata,
            "n_success": len(self.successes),
            "n_failed": len(self.table) - len(self.successes),
            "failures": self.failures,
            "stats": self.summaries["stats"],
        }

    def to_json(self, path=None):
        text = json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"
        if path is not None:
            with open(path, "w", encoding="utf-8") as fh:
                fh.write(text)
        return text

    def write_table_csv(self, path):
        d = len(self.metadata["model"]["b"])
        idx2 = [f"{i + 1}{j + 1}" for i in range(d) for j in range(d)]
        header = (["replication", "status"] + [f"theta_{k}" for k in idx2]
                  + [f"b_{i + 1}" for i in range(d)] + [f"sigma_{k}" for k in idx2] + ["reason"])
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            for row in self.table:
                if row["status"] == "ok":
                    nums = np.concatenate([np.ravel(row["theta_hat"]), row["b_hat"], np.ravel(row["sigma_hat"])])
                    writer.writerow([row["replication"], "ok"] + [f"{v:.17g}" for v in nums] + [""])
                else:
                    writer.writerow([row["replication"], "failed"] + [""] * (len(header) - 3) + [row["reason"]])

    def write_histograms_csv(self, path):
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["component", "bin_left", "bin_right", "count"])
            for name, hist in self.summaries["histograms"].items():
                edges = hist["edges"]
                for k, count in enumerate(hist["counts"]):
                    writer.writerow([name, f"{edges[k]:.17g}", f"{edges[k + 1]:.17g}", count])


def _truth(metadata):
    m = metadata["model"]
    return ModelParams(theta=m["theta"], b=m["b"], sigma=m["sigma"])


def run_mc(mc: McConfig) -> McReport:
    """Run every replication and assemble the report in replication order."""
    indices = list(range(mc.replications))
    if mc.workers == 1:
        rows = _run_chunk((mc, indices))
    else:
        chunks = [indices[k::mc.workers] for k in range(mc.workers)]
        with ProcessPoolExecutor(max_workers=mc.workers) as pool:
            rows = [row for part in pool.map(_run_chunk, [(mc, c) for c in chunks if c]) for row in part]
        rows.sort(key=lambda row: row["replication"])
    failed = [row for row in rows if row["status"] != "ok"]
    failures = {
        "count": len(failed),
        "by_category": dict(sorted(Counter(row["category"] for row in failed).items())),
        "replications": [row["replication"] for row in failed],
    }
    if len(failed) == len(rows):
        reasons = Counter(row["reason"] for row in failed).most_common(5)
        raise HarnessError(f"all {len(rows)} replications failed: {reasons}")
    ok = [row for row in rows if row["status"] == "ok"]
    return McReport(metadata=mc.metadata(), table=rows, summaries=summarize(ok, mc.params), failures=failures)
