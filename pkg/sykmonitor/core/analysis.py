"""
analysis.py - Ensemble statistics and rate extraction

- ensemble_average: pointwise mean over runs, error bars from batch means
- gamma_egr: entanglement growth rate between the quarter and three-quarter
  saturation crossings of an unmonitored entropy curve
- tanh_fit: purification rate lambda from purity(t) ~ tanh(lambda t + alpha)
- steady_state_value: tail-window average up to t_inf
- linear_trend: straight-line fit with R^2
"""

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.stats import linregress

from .errors import AlignmentError, ExtractionError, OutOfRangeError, PreconditionError

logger = logging.getLogger(__name__)

TAIL_FRACTION = 0.1
PLATEAU_SLOPE_RATIO = 0.01
FLAT_SS_TOT = 1e-12
FIT_GRID_POINTS = 201
ENTANGLEMENT_T_INF = 200.0
PURIFICATION_T_INF = 1000.0


@dataclass(frozen=True, eq=False)
class EnsembleSeries:
    """
    Ensemble-averaged time series

    Attributes:
        t (np.ndarray): Time grid
        mean (np.ndarray): Mean over all runs
        std_batch (np.ndarray): Standard deviation of the batch means
        n_runs (int): Number of runs averaged
        n_batches (int): Number of equal batches
    """

    t: np.ndarray
    mean: np.ndarray
    std_batch: np.ndarray
    n_runs: int
    n_batches: int

    @property
    def stderr(self):
        """Standard error of the mean estimated from the batches"""
        return self.std_batch / np.sqrt(self.n_batches)

    def to_dict(self):
        return {
            "t": self.t.tolist(),
            "mean": self.mean.tolist(),
            "std_batch": self.std_batch.tolist(),
            "n_runs": self.n_runs,
            "n_batches": self.n_batches,
        }

    @classmethod
    def from_dict(cls, data):
        return cls(
            np.asarray(data["t"], dtype=float),
            np.asarray(data["mean"], dtype=float),
            np.asarray(data["std_batch"], dtype=float),
            int(data["n_runs"]),
            int(data["n_batches"]),
        )


@dataclass(frozen=True)
class FitResult:
    """
    Result of the tanh purification fit

    Attributes:
        lambda_ (float): Purification rate (serialized as "lambda")
        alpha (float): Offset, tanh(alpha) = 1/d
        r_squared (float): Coefficient of determination (nan when undefined)
        r_squared_defined (bool): False for a flat input series
    """

    lambda_: float
    alpha: float
    r_squared: float
    r_squared_defined: bool = True

    def to_dict(self):
        return {
            "lambda": self.lambda_,
            "alpha": self.alpha,
            "r_squared": self.r_squared if self.r_squared_defined else None,
        }


@dataclass(frozen=True)
class EgrResult:
    gamma_egr: float
    s_inf: float
    t_quarter: float
    t_three_quarter: float


@dataclass(frozen=True)
class TrendResult:
    slope: float
    intercept: float
    r_squared: float


def ensemble_average_series(t, values, n_batches):
    """
    Average a stack of runs sampled on one grid

    Args:
        t (array): Time grid, length T
        values (array): Shape (n_runs, T)
        n_batches (int): Must divide n_runs; batch b holds runs
            b*m .. (b+1)*m - 1 with m = n_runs / n_batches

    Returns:
        EnsembleSeries: Pointwise mean and batch standard deviation
    """
    t = np.asarray(t, dtype=float)
    values = np.asarray(values, dtype=float)
    if values.ndim != 2 or values.shape[1] != len(t):
        raise AlignmentError(f"values of shape {values.shape} do not match a grid of {len(t)}")
    n_runs = values.shape[0]
    if n_batches < 1 or n_runs == 0 or n_runs % n_batches:
        raise PreconditionError(f"{n_runs} runs cannot be split into {n_batches} batches")

    batch_means = values.reshape(n_batches, n_runs // n_batches, len(t)).mean(axis=1)
    if n_batches > 1:
        std_batch = batch_means.std(axis=0, ddof=1)
    else:
        std_batch = np.zeros(len(t))
    return EnsembleSeries(t, values.mean(axis=0), std_batch, n_runs, n_batches)


def ensemble_average(records, n_batches, observable="s_half"):
    """
    Ensemble average of one observable over trajectory records

    Args:
        records (list): TrajectoryRecords, in run-index order
        n_batches (int): Number of batches for the error bars
        observable (str): Series key, "s_half" or "purity"

    Returns:
        EnsembleSeries: Mean and batch error bars
    """
    if not records:
        raise PreconditionError("no records to average")
    reference = records[0].t
    rows = []
    for run, record in enumerate(records):
        if record.t.shape != reference.shape or not np.allclose(record.t, reference, atol=1e-12):
            raise AlignmentError(f"run {run} is recorded on a different time grid")
        if observable not in record.series:
            raise PreconditionError(f"run {run} has no {observable!r} series")
        rows.append(record.series[observable])
    return ensemble_average_series(reference, np.vstack(rows), n_batches)


def _tail(n_samples, fraction=TAIL_FRACTION):
    return max(2, int(math.ceil(fraction * n_samples)))


def _first_crossing(t, s, level):
    above = np.flatnonzero(s >= level)
    if len(above) == 0:
        raise ExtractionError("series never reaches threshold", {"level": level})
    i = above[0]
    if i == 0:
        raise ExtractionError("series starts above threshold", {"level": level, "s0": s[0]})
    return t[i - 1] + (level - s[i - 1]) * (t[i] - t[i - 1]) / (s[i] - s[i - 1])


def extract_egr(t, s):
    """
    Entanglement growth rate with its intermediate quantities

    Args:
        t (array): Time grid
        s (array): Unmonitored ensemble-mean entropy density

    Returns:
        EgrResult: Gamma_egr, plateau value and the two crossing times
    """
    t = np.asarray(t, dtype=float)
    s = np.asarray(s, dtype=float)
    if len(t) != len(s) or len(t) < 10:
        raise ExtractionError("need at least 10 aligned samples", {"samples": len(t)})

    peak_slope = float(np.max(np.gradient(s, t)))
    if peak_slope <= 0:
        raise ExtractionError("series never rises", {"peak_slope": peak_slope})
    # the last 10% must be flat before it counts as the plateau
    tail = slice(len(t) - _tail(len(t)), None)
    tail_slope = float(linregress(t[tail], s[tail]).slope)
    if abs(tail_slope) >= PLATEAU_SLOPE_RATIO * peak_slope:
        raise ExtractionError(
            "no plateau in the final window",
            {"tail_slope": tail_slope, "peak_slope": peak_slope},
        )

    s_inf = float(np.mean(s[tail]))
    t_quarter = float(_first_crossing(t, s, s_inf / 4))
    t_three_quarter = float(_first_crossing(t, s, 3 * s_inf / 4))
    if t_three_quarter <= t_quarter:
        raise ExtractionError(
            "crossings out of order",
            {"t_quarter": t_quarter, "t_three_quarter": t_three_quarter},
        )
    rate = (s_inf / 2) / (t_three_quarter - t_quarter)
    return EgrResult(rate, s_inf, t_quarter, t_three_quarter)


def gamma_egr(t, s):
    """Gamma_egr = (s(t_3/4) - s(t_1/4)) / (t_3/4 - t_1/4) of an unmonitored curve"""
    return extract_egr(t, s).gamma_egr


def tanh_fit(t, purity, dim, gamma_m=None, lambda_max=None):
    """
    Fit purity(t) = tanh(lambda t + alpha) with tanh(alpha) = 1/dim

    Only lambda is free. A coarse scan over [0, lambda_max] brackets the
    minimum of the squared residuals, then a bounded golden-section/Brent
    search refines it to a relative tolerance of 1e-6.

    Args:
        t (array): Times
        purity (array): Ensemble-mean purity, within [1/dim, 1]
        dim (int): Hilbert-space dimension 2**(N/2)
        gamma_m (float): Measurement rate; lambda_max defaults to 10*gamma_m
        lambda_max (float): Upper end of the search interval

    Returns:
        FitResult: lambda, alpha and R^2
    """
    t = np.asarray(t, dtype=float)
    y = np.asarray(purity, dtype=float)
    if t.shape != y.shape or len(t) < 2:
        raise AlignmentError("times and purities must be equal-length arrays")
    if np.any(y < 1.0 / dim - 1e-9) or np.any(y > 1 + 1e-9):
        raise PreconditionError(f"purity values must lie in [1/{dim}, 1]")
    if lambda_max is None:
        if gamma_m is None or gamma_m <= 0:
            raise PreconditionError("tanh_fit needs gamma_m > 0 or an explicit lambda_max")
        lambda_max = 10.0 * gamma_m

    alpha = float(np.arctanh(1.0 / dim))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    if ss_tot < FLAT_SS_TOT:
        logger.warning("flat purity series: R^2 undefined, returning lambda = 0")
        return FitResult(0.0, alpha, float("nan"), r_squared_defined=False)

    def ss_res(rate):
        residual = y - np.tanh(rate * t + alpha)
        return float(residual @ residual)

    # coarse scan, then refine between the neighbours of the best grid point
    grid = np.linspace(0.0, lambda_max, FIT_GRID_POINTS)
    best = int(np.argmin([ss_res(rate) for rate in grid]))
    low, high = grid[max(best - 1, 0)], grid[min(best + 1, len(grid) - 1)]
    tolerance = 1e-6 * max(grid[best], grid[1])
    result = minimize_scalar(ss_res, bounds=(low, high), method="bounded",
                             options={"xatol": tolerance})
    rate = float(result.x)
    return FitResult(rate, alpha, 1.0 - ss_res(rate) / ss_tot)


def steady_state_value(t, series, t_inf):
    """
    Mean of the final 10% of samples taken at or before t_inf

    Args:
        t (array): Time grid
        series (array): Values on the grid
        t_inf (float): Steady-state time, within the grid

    Returns:
        float: Steady-state estimate
    """
    t = np.asarray(t, dtype=float)
    series = np.asarray(series, dtype=float)
    if len(t) == 0 or t_inf > t[-1] + 1e-9 or t_inf < t[0]:
        raise OutOfRangeError(f"t_inf={t_inf} outside the sampled range")
    window = series[t <= t_inf + 1e-9]
    count = max(1, int(math.ceil(TAIL_FRACTION * len(window))))
    return float(np.mean(window[-count:]))


def linear_trend(x, y):
    """
    Least-squares straight line through (x, y)

    Returns:
        TrendResult: slope, intercept and R^2
    """
    fit = linregress(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    return TrendResult(float(fit.slope), float(fit.intercept), float(fit.rvalue ** 2))
