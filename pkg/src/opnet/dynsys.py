"""Lorenz system integration and peak (local maximum) series.

    dx/dt = sigma (y - x)
    dy/dt = x (rho - z) - y
    dz/dt = x y - beta z
"""

import logging
import math
from collections.abc import Sequence
from typing import Optional

import numpy as np
from joblib import Parallel, delayed
from scipy.integrate import solve_ivp
from scipy.signal import find_peaks

from opnet.errors import IntegrationError, OpnetError, PeakCountError
from opnet.models import LorenzParams, TimeSeries
from opnet.seeding import derive_rng

logger = logging.getLogger(__name__)

State = tuple[float, float, float]

# Lorenz x-peaks arrive roughly every 30 steps at dt = 0.025
_STEPS_PER_PEAK_ESTIMATE = 40
_MIN_CHUNK_STEPS = 1024


def lorenz_rhs(state: State, params: LorenzParams) -> State:
    x, y, z = state
    return (
        params.sigma * (y - x),
        x * (params.rho - z) - y,
        x * y - params.beta * z,
    )


def rk4_step(state: State, params: LorenzParams) -> State:
    """One classical fourth-order Runge-Kutta step of size ``params.dt``."""
    h = params.dt
    x, y, z = state
    k1 = lorenz_rhs(state, params)
    k2 = lorenz_rhs((x + 0.5 * h * k1[0], y + 0.5 * h * k1[1], z + 0.5 * h * k1[2]), params)
    k3 = lorenz_rhs((x + 0.5 * h * k2[0], y + 0.5 * h * k2[1], z + 0.5 * h * k2[2]), params)
    k4 = lorenz_rhs((x + h * k3[0], y + h * k3[1], z + h * k3[2]), params)
    return (
        x + h * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0]) / 6,
        y + h * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1]) / 6,
        z + h * (k1[2] + 2 * k2[2] + 2 * k3[2] + k4[2]) / 6,
    )


def _rk4_states(params: LorenzParams, state: State, n_steps: int, offset: int) -> np.ndarray:
    states = np.empty((n_steps, 3))
    for i in range(n_steps):
        state = rk4_step(state, params)
        if not all(math.isfinite(v) for v in state):
            raise IntegrationError("non-finite Lorenz state", step=offset + i + 1)
        states[i] = state
    return states


def _rk45_states(params: LorenzParams, state: State, n_steps: int, offset: int) -> np.ndarray:
    t_eval = params.dt * np.arange(1, n_steps + 1)
    solution = solve_ivp(
        lambda _t, s: lorenz_rhs(tuple(s), params),
        (0.0, float(t_eval[-1])),
        np.asarray(state, dtype=np.float64),
        method="RK45",
        t_eval=t_eval,
        rtol=1e-9,
        atol=1e-9,
    )
    states = solution.y.T
    if not solution.success or states.shape[0] != n_steps:
        raise IntegrationError(f"RK45 failed: {solution.message}", step=offset + states.shape[0])
    finite = np.isfinite(states).all(axis=1)
    if not finite.all():
        raise IntegrationError("non-finite Lorenz state", step=offset + int(np.argmin(finite)) + 1)
    return states


def _advance(params: LorenzParams, state: State, n_steps: int, offset: int = 0) -> np.ndarray:
    """States after each of the next ``n_steps`` steps."""
    if n_steps <= 0:
        return np.empty((0, 3))
    if params.integrator == "rk45":
        return _rk45_states(params, state, n_steps, offset)
    return _rk4_states(params, state, n_steps, offset)


def _initial_state(x0: Sequence[float]) -> State:
    values = tuple(float(v) for v in x0)
    if len(values) != 3:
        raise OpnetError(f"initial condition needs 3 components, got {len(values)}")
    if not all(math.isfinite(v) for v in values):
        raise OpnetError("initial condition must be finite")
    return values  # type: ignore[return-value]


def integrate_lorenz(params: LorenzParams, x0: Sequence[float], n_steps: int) -> np.ndarray:
    """Post-transient trajectory, one row per dt.

    The first ``params.n_transient`` steps are discarded; row 0 is the state
    right after them (``x0`` itself when there is no transient).

    Raises:
        IntegrationError: the state became non-finite (carries the step index)
    """
    if n_steps < 1:
        raise OpnetError("n_steps must be at least 1")
    state = _initial_state(x0)
    if params.n_transient:
        state = tuple(_advance(params, state, params.n_transient)[-1])
    rest = _advance(params, state, n_steps - 1, offset=params.n_transient)
    return np.vstack([np.asarray(state, dtype=np.float64), rest])


def extract_peaks(signal: Sequence[float], n_peaks: int) -> np.ndarray:
    """First ``n_peaks`` strict interior local maxima of ``signal``, in order.

    A plateau rising and then falling counts as one peak. A single peak is
    a valid result, so this returns the bare values; ``lorenz_peak_series``
    wraps them into a TimeSeries.

    Raises:
        PeakCountError: fewer than ``n_peaks`` maxima (carries the count found)
    """
    values = np.asarray(signal, dtype=np.float64)
    indices, _ = find_peaks(values)
    if indices.size < n_peaks:
        raise PeakCountError(found=int(indices.size), requested=n_peaks)
    return values[indices[:n_peaks]]


def lorenz_peak_series(
    params: LorenzParams,
    x0: Sequence[float],
    n_peaks: int,
    series_id: str = "lorenz",
    group_label: Optional[str] = None,
    max_steps: Optional[int] = None,
) -> TimeSeries:
    """Peaks of the x-component, integrating in chunks until ``n_peaks`` are found.

    Raises:
        PeakCountError: quota not met within ``max_steps`` post-transient steps
    """
    if n_peaks < 2:
        raise OpnetError("a peak series needs at least 2 peaks")
    chunk = max(_MIN_CHUNK_STEPS, _STEPS_PER_PEAK_ESTIMATE * n_peaks)
    max_steps = max_steps or 10 * chunk

    trajectory = integrate_lorenz(params, x0, chunk)
    pieces = [trajectory[:, 0]]
    state = tuple(trajectory[-1])
    done = chunk
    while True:
        signal = np.concatenate(pieces)
        found = find_peaks(signal)[0].size
        if found >= n_peaks:
            peaks = extract_peaks(signal, n_peaks)
            return TimeSeries.from_array(peaks, id=series_id, group_label=group_label)
        if done >= max_steps:
            raise PeakCountError(found=found, requested=n_peaks)
        logger.debug("%s: %d of %d peaks after %d steps", series_id, found, n_peaks, done)
        more = _advance(params, state, chunk, offset=params.n_transient + done)
        pieces.append(more[:, 0])
        state = tuple(more[-1])
        done += chunk


def lorenz_initial_condition(seed: int, index: int) -> State:
    """Initial condition of run ``index``, uniform in the unit cube."""
    return tuple(derive_rng(seed, "lorenz-ic", index).uniform(0.0, 1.0, 3).tolist())  # type: ignore[return-value]


def make_lorenz_peak_ensemble(
    params: LorenzParams,
    n_series: int,
    n_peaks: int,
    n_jobs: int = 1,
    group_label: str = "lorenz",
) -> list[TimeSeries]:
    """``n_series`` peak series from independent seeded initial conditions.

    Series ``i`` is ``lorenz-{i:02d}``; the same seed gives the same ensemble.
    """
    if n_series < 1:
        raise OpnetError("n_series must be at least 1")
    logger.info("Integrating %d Lorenz runs for %d peaks each", n_series, n_peaks)
    return Parallel(n_jobs=n_jobs)(
        delayed(lorenz_peak_series)(
            params,
            lorenz_initial_condition(params.seed, i),
            n_peaks,
            series_id=f"lorenz-{i:02d}",
            group_label=group_label,
        )
        for i in range(n_series)
    )
