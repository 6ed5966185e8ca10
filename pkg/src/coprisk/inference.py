"""Nonparametric bootstrap for standard errors and percentile intervals.

Replicate r draws its resample from an RNG substream keyed by (seed, r), so
results are bit-identical for a given seed regardless of execution order or
the degree of parallelism.  Replicates on which the fit procedure raises an
EstimationError are skipped and counted.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .data import Dataset
from .errors import EstimationError


def substream_rng(seed: int, index: int) -> np.random.Generator:
    """Independent RNG stream determined only by (seed, index)."""
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(index,)))


@dataclass(frozen=True)
class BootstrapResult:
    """Point estimate plus bootstrap replicates, SEs and percentile CI."""

    param_names: tuple[str, ...]
    estimate: np.ndarray
    replicates: np.ndarray
    se: np.ndarray
    ci_lower: np.ndarray
    ci_upper: np.ndarray
    level: float
    n_requested: int
    n_failed: int

    @property
    def n_effective(self) -> int:
        return self.replicates.shape[0]


def _as_vector(values, param_names: tuple[str, ...]) -> np.ndarray:
    if isinstance(values, dict):
        return np.array([float(values[name]) for name in param_names])
    out = np.atleast_1d(np.asarray(values, dtype=float))
    if out.shape != (len(param_names),):
        raise ValueError("fit procedure returned an unexpected number of parameters")
    return out


def _infer_names(values) -> tuple[str, ...]:
    if isinstance(values, dict):
        return tuple(values.keys())
    return tuple(f"p{i}" for i in range(np.atleast_1d(np.asarray(values)).shape[0]))


def _one_replicate(args):
    fit, ds, seed, r, names = args
    rng = substream_rng(seed, r)
    idx = rng.integers(0, ds.n, size=ds.n)
    try:
        return r, _as_vector(fit(ds.subset(idx)), names)
    except EstimationError:
        return r, None


def bootstrap(
    fit: Callable[[Dataset], Sequence[float] | dict],
    ds: Dataset,
    b: int,
    level: float = 0.95,
    seed: int = 0,
    param_names: Sequence[str] | None = None,
    jobs: int = 1,
) -> BootstrapResult:
    """Resample rows with replacement B times and refit.

    fit maps a Dataset to a parameter vector or {name: value} dict.  More than
    B/2 failed replicates aborts with an error.
    """
    b = int(b)
    if b < 2:
        raise ValueError("bootstrap needs at least 2 replicates")
    if not 0.0 < level < 1.0:
        raise ValueError("confidence level must lie in (0, 1)")
    point_raw = fit(ds)
    names = tuple(param_names) if param_names is not None else _infer_names(point_raw)
    point = _as_vector(point_raw, names)

    tasks = [(fit, ds, seed, r, names) for r in range(b)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            raw = list(pool.map(_one_replicate, tasks, chunksize=8))
    else:
        raw = [_one_replicate(t) for t in tasks]
    raw.sort(key=lambda item: item[0])
    rows = [vec for _, vec in raw if vec is not None]
    n_failed = b - len(rows)
    if n_failed > b / 2:
        raise EstimationError(
            f"{n_failed} of {b} bootstrap replicates failed; the fit is too "
            "unstable under resampling"
        )
    replicates = np.vstack(rows)
    alpha = 1.0 - level
    ci = np.quantile(replicates, [alpha / 2.0, 1.0 - alpha / 2.0], axis=0)
    se = replicates.std(axis=0, ddof=1)
    return BootstrapResult(
        param_names=names,
        estimate=point,
        replicates=replicates,
        se=se,
        ci_lower=ci[0],
        ci_upper=ci[1],
        level=level,
        n_requested=b,
        n_failed=n_failed,
    )
