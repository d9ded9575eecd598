"""Small numerical kernels: fixed-step RK4, dense linear solve, seeded
simplex sampling, and convergence detectors.

Everything here is deterministic: the random generator is PCG64 (numpy's
default_rng), fixed so that a given seed reproduces the same samples on
every platform, and the integrator takes fixed steps so trajectories are
bit-identical across runs.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.linalg

from .errors import NonFiniteStateError, SingularSystemError

# States may drift outside the feasible set by at most this much per step
# before integration aborts; drift below it is clamped and counted.
DELTA_TOL = 1e-9

PIVOT_TOL = 1e-12


@dataclass(frozen=True)
class SolverConfig:
    """Integration and detection settings for a simulation run."""

    dt: float = 0.01
    t_end: float = 100.0
    sample_every: int = 1
    seed: int = 0
    tol_stationary: float = 1e-10
    tol_consensus: float = 1e-8

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if self.t_end < self.dt:
            raise ValueError(f"t_end ({self.t_end}) must be at least dt ({self.dt})")
        if self.sample_every < 1:
            raise ValueError(f"sample_every must be >= 1, got {self.sample_every}")
        if self.tol_stationary <= 0 or self.tol_consensus <= 0:
            raise ValueError("tolerances must be positive")

    @property
    def n_steps(self) -> int:
        return int(round(self.t_end / self.dt))


def rng_for(seed: int) -> np.random.Generator:
    """Seeded PCG64 generator; the single source of randomness in the toolkit."""
    return np.random.Generator(np.random.PCG64(seed))


def rk4_step(f: Callable[[np.ndarray], np.ndarray], state: np.ndarray, dt: float) -> np.ndarray:
    """One classical fourth-order Runge-Kutta step of the autonomous system
    state' = f(state).

    Raises NonFiniteStateError with the offending stage if any stage
    evaluates to NaN or infinity.
    """
    k1 = f(state)
    k2 = f(state + 0.5 * dt * k1)
    k3 = f(state + 0.5 * dt * k2)
    k4 = f(state + dt * k3)
    out = state + (dt / 6.0) * (k1 + 2.0 * (k2 + k3) + k4)
    if not np.isfinite(out).all():
        for name, stage in (("k1", k1), ("k2", k2), ("k3", k3), ("k4", k4)):
            if not np.isfinite(stage).all():
                bad = int(np.flatnonzero(~np.isfinite(stage))[0])
                raise NonFiniteStateError(
                    f"RK4 stage {name} is non-finite at component {bad}"
                )
        raise NonFiniteStateError("RK4 update is non-finite")
    return out


def solve_dense(M: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Solve M x = b by LU factorization with partial pivoting.

    Raises SingularSystemError if any pivot falls below PIVOT_TOL, or if the
    solution residual exceeds 1e-9 * ||b||_inf (ill-conditioned system).
    """
    M = np.asarray(M, dtype=float)
    b = np.asarray(b, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"matrix must be square, got shape {M.shape}")
    if b.shape != (M.shape[0],):
        raise ValueError(f"rhs length {b.shape} does not match matrix {M.shape}")
    lu, piv = scipy.linalg.lu_factor(M)
    pivots = np.abs(np.diag(lu))
    if pivots.min() < PIVOT_TOL:
        k = int(pivots.argmin())
        raise SingularSystemError(
            f"singular system: pivot {k} has magnitude {pivots.min():.3e} < {PIVOT_TOL}"
        )
    x = scipy.linalg.lu_solve((lu, piv), b)
    residual = np.abs(M @ x - b).max()
    bound = 1e-9 * max(np.abs(b).max(), np.finfo(float).tiny)
    if residual >= bound and np.abs(b).max() > 0:
        raise SingularSystemError(
            f"solve residual {residual:.3e} exceeds {bound:.3e}; system is ill-conditioned"
        )
    return x


def sample_simplex_pairs(
    n: int,
    seed: int,
    style: str = "uniform",
    x_range: tuple[float, float] = (0.0, 0.3),
    y_range: tuple[float, float] = (0.2, 0.5),
) -> tuple[np.ndarray, np.ndarray]:
    """Draw n seeded (x_i, y_i) pairs inside the unit simplex.

    style "uniform" samples uniformly on the triangle {x, y >= 0, x + y <= 1}
    via the reflection trick. style "biased" draws x ~ U[x_range] and
    y ~ U[y_range] independently, rejecting pairs with x + y > 1; the default
    ranges are the canonical asymmetric initial condition used by the shipped
    scenarios.
    """
    rng = rng_for(seed)
    if style == "uniform":
        u = rng.uniform(0.0, 1.0, n)
        v = rng.uniform(0.0, 1.0, n)
        over = u + v > 1.0
        u[over] = 1.0 - u[over]
        v[over] = 1.0 - v[over]
        return u, v
    if style == "biased":
        for lo, hi in (x_range, y_range):
            if not (0.0 <= lo <= hi <= 1.0):
                raise ValueError(f"range [{lo}, {hi}] not within [0, 1]")
        if x_range[0] + y_range[0] > 1.0:
            raise ValueError(
                f"infeasible ranges: x >= {x_range[0]} and y >= {y_range[0]} "
                "leave no point in the simplex"
            )
        x = rng.uniform(x_range[0], x_range[1], n)
        y = rng.uniform(y_range[0], y_range[1], n)
        bad = np.flatnonzero(x + y > 1.0)
        attempts = 0
        while bad.size and attempts < 1000:
            x[bad] = rng.uniform(x_range[0], x_range[1], bad.size)
            y[bad] = rng.uniform(y_range[0], y_range[1], bad.size)
            bad = np.flatnonzero(x + y > 1.0)
            attempts += 1
        if bad.size:
            raise ValueError("rejection sampling failed to place all pairs in the simplex")
        return x, y
    raise ValueError(f"unknown sampling style {style!r}")


def integrate_pairs(
    field,
    x0: np.ndarray,
    y0: np.ndarray,
    dt: float,
    n_steps: int,
    *,
    sample_every: int = 1,
    delta_tol: float | None = DELTA_TOL,
    stop_tol: float | None = None,
    check_every: int = 25,
):
    """Fixed-step RK4 driver for paired commitment fractions.

    field(x, y) -> (dx, dy) must accept arrays of the shape of (x0, y0);
    the same loop serves per-node states (shape (n,)) and per-cluster states
    (shape (n, kmax)). When delta_tol is set, every step is checked against
    the feasibility constraints x >= 0, y >= 0, x + y <= 1: drift within
    delta_tol is clamped and counted, anything larger raises
    SimplexViolationError with the step index (the usual cause is a dt too
    large for the dynamics). When stop_tol is set, integration ends early
    once the derivative's max magnitude falls below it (checked every
    check_every steps, using the stage the step computes anyway).

    Returns (times, x_samples, y_samples, clamp_events, stopped_at_time).
    """
    from .errors import SimplexViolationError

    x = np.array(x0, dtype=float)
    y = np.array(y0, dtype=float)
    half = 0.5 * dt
    sixth = dt / 6.0
    times = [0.0]
    xs = [x.copy()]
    ys = [y.copy()]
    clamp_events = 0
    stopped_at = None
    last_sampled = 0
    for step in range(1, n_steps + 1):
        k1x, k1y = field(x, y)
        if stop_tol is not None and (step - 1) % check_every == 0:
            if max(np.abs(k1x).max(), np.abs(k1y).max()) < stop_tol:
                stopped_at = (step - 1) * dt
                break
        k2x, k2y = field(x + half * k1x, y + half * k1y)
        k3x, k3y = field(x + half * k2x, y + half * k2y)
        k4x, k4y = field(x + dt * k3x, y + dt * k3y)
        x = x + sixth * (k1x + 2.0 * (k2x + k3x) + k4x)
        y = y + sixth * (k1y + 2.0 * (k2y + k3y) + k4y)
        if delta_tol is not None:
            xmin = x.min()
            ymin = y.min()
            smax = (x + y).max()
            if not (np.isfinite(xmin) and np.isfinite(ymin) and np.isfinite(smax)):
                raise SimplexViolationError(
                    f"state became non-finite at step {step}", step
                )
            if xmin < -delta_tol or ymin < -delta_tol or smax > 1.0 + delta_tol:
                raise SimplexViolationError(
                    f"state left the simplex at step {step} "
                    f"(min x = {xmin:.3e}, min y = {ymin:.3e}, max x+y = {smax:.3e}); "
                    "reduce dt",
                    step,
                )
            if xmin < 0.0:
                clamp_events += int(np.count_nonzero(x < 0.0))
                x = np.maximum(x, 0.0)
            if ymin < 0.0:
                clamp_events += int(np.count_nonzero(y < 0.0))
                y = np.maximum(y, 0.0)
            if smax > 1.0:
                over = (x + y) > 1.0
                clamp_events += int(np.count_nonzero(over))
                scale = np.where(over, (x + y), 1.0)
                x = x / scale
                y = y / scale
        if step % sample_every == 0:
            times.append(step * dt)
            xs.append(x.copy())
            ys.append(y.copy())
            last_sampled = step
    if stopped_at is not None:
        final_step = int(round(stopped_at / dt))
        final_t = stopped_at
    else:
        final_step = n_steps
        final_t = n_steps * dt
    if last_sampled != final_step:
        times.append(final_t)
        xs.append(x.copy())
        ys.append(y.copy())
    return np.asarray(times), np.stack(xs), np.stack(ys), clamp_events, stopped_at


def is_stationary(derivative: np.ndarray, tol: float) -> bool:
    """True when the largest derivative component is below tol in magnitude."""
    return float(np.abs(derivative).max()) < tol


def spread(values: np.ndarray) -> float:
    """Max-minus-min of a vector; the consensus gap across nodes."""
    return float(np.max(values) - np.min(values))


def format_float(v: float) -> str:
    """Locale-independent 15-significant-digit rendering used in all CSVs."""
    return format(float(v), ".15g")
