"""Copula-graphic recovery of a latent marginal survival curve.

Given the stratum's empirical overall survival ``pi_hat`` and cause-1
cumulative incidence ``f_t_hat``, the curve at dependence ``theta`` is

    S(x) = phi_theta[ -sum_{event times u <= x} phi_inv_deriv(pi_hat(u-)) * dF(u) ]

where ``pi_hat(u-)`` is the left limit (the at-risk fraction just before u)
and ``dF(u)`` the incidence jump.  Evaluating the integrand at the left limit
keeps the first event well defined and treats same-time events as occurring
before same-time censorings.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .copula import generator, generator_inverse_deriv, _validate_theta
from .data import Dataset
from .errors import EstimationError
from .first_stage import StepFunction


@dataclass(frozen=True)
class CgeCurve:
    """Survival step function recovered at a given dependence parameter."""

    step: StepFunction
    theta: float

    def __call__(self, t):
        return self.step(t)

    @property
    def event_times(self) -> np.ndarray:
        return self.step.jump_times


@dataclass(frozen=True)
class TrimBounds:
    """Duration window on which every stratum curve is informative.

    x_star: beyond it at least one curve has plateaued (improper tail).
    x_double_star: below it at least one curve is still exactly 1.
    kept: indices of rows with x_double_star <= x_i <= x_star.
    """

    x_star: float
    x_double_star: float
    kept: np.ndarray


def copula_graphic(pi_hat: StepFunction, f_t_hat: StepFunction, theta: float) -> CgeCurve:
    """Plug-in survival curve for cause 1 at dependence parameter theta.

    pi_hat and f_t_hat must come from the same stratum.  For theta < 0 the
    curve clamps at zero once the accumulated sum leaves the generator's
    support.
    """
    theta = _validate_theta(theta)
    times = f_t_hat.jump_times
    if times.size == 0:
        return CgeCurve(
            step=StepFunction(np.empty(0), np.empty(0), initial_value=1.0),
            theta=theta,
        )
    jumps = np.diff(np.concatenate(([f_t_hat.initial_value], f_t_hat.values)))
    pi_left = pi_hat.left_limit(times)
    bad = pi_left <= 0.0
    if np.any(bad):
        t_bad = times[np.argmax(bad)]
        raise EstimationError(
            f"overall survival vanishes at event time {t_bad}; the curve "
            "integrand diverges there"
        )
    increments = -generator_inverse_deriv(pi_left, theta) * jumps
    running = np.cumsum(increments)
    surv = generator(running, theta)
    return CgeCurve(step=StepFunction(times, surv, initial_value=1.0), theta=theta)


def evaluate(curve: CgeCurve, t):
    """Right-continuous lookup of the curve at time(s) t."""
    return curve(t)


def trim_support(curves: Iterable[CgeCurve], ds: Dataset) -> TrimBounds:
    """Support window for estimators that compare curves across strata.

    x_star is the smallest last-event time across strata (each curve plateaus
    after its own last cause-1 event), x_double_star the largest first-event
    time (each curve equals 1 before its own first event).
    """
    curves = list(curves)
    if not curves:
        raise EstimationError("trim_support needs at least one curve")
    firsts = []
    lasts = []
    for curve in curves:
        times = curve.event_times
        if times.size == 0:
            raise EstimationError(
                "a stratum has no cause-1 events; its curve never leaves 1"
            )
        firsts.append(times[0])
        lasts.append(times[-1])
    x_star = float(min(lasts))
    x_double_star = float(max(firsts))
    kept = np.flatnonzero((ds.x >= x_double_star) & (ds.x <= x_star))
    if kept.size == 0:
        raise EstimationError(
            f"no observations inside the trimmed window [{x_double_star}, {x_star}]; "
            "strata event supports do not overlap"
        )
    return TrimBounds(x_star=x_star, x_double_star=x_double_star, kept=kept)
