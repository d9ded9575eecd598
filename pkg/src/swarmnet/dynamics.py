"""Networked two-option commitment dynamics without internal structure.

Each population i carries fractions x_i (committed to option 1), y_i
(option 2) and z_i = 1 - x_i - y_i (uncommitted). Individuals commit
spontaneously at rate gamma, imitate committed neighbors at rate r,
abandon at rate alpha, and are lured back to the uncommitted pool by
cross-inhibition from opposing committed neighbors at rate sigma:

    x_i' = (gamma + r * sum_{j in N_i} x_j) * z_i
           - x_i * (alpha + sigma * sum_{j in N_i} y_j)

and symmetrically for y_i. On a d-regular graph the steady states of
interest are consensus equilibria (xi, mu, zeta), identical across nodes,
which come in two closed-form branches: a symmetric branch with xi = mu
and a branch with the uncommitted fraction locked at zeta = alpha/(r d).
Gershgorin row dominance of the Jacobian gives a sufficient certificate of
local exponential stability as upper bounds on the cross-inhibition rate.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import numkit
from .errors import CertificateInapplicableError
from .graphs import RegularGraph
from .numkit import DELTA_TOL


@dataclass(frozen=True)
class ModelParams:
    """The four positive rates of the commitment dynamics (1/time)."""

    gamma: float  # spontaneous commitment
    r: float      # imitation of committed neighbors
    alpha: float  # spontaneous abandonment
    sigma: float  # cross-inhibition

    def __post_init__(self):
        for name in ("gamma", "r", "alpha", "sigma"):
            v = getattr(self, name)
            if not (v > 0) or not math.isfinite(v):
                raise ValueError(f"{name} must be strictly positive, got {v}")


@dataclass(frozen=True)
class PopulationState:
    """Per-node committed fractions, confined to the simplex
    {x >= 0, y >= 0, x + y <= 1}. The uncommitted fraction is derived,
    never stored."""

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        y = np.asarray(self.y, dtype=float)
        if x.ndim != 1 or x.shape != y.shape:
            raise ValueError(f"x and y must be equal-length vectors, got {x.shape}, {y.shape}")
        if x.min() < -DELTA_TOL or y.min() < -DELTA_TOL or (x + y).max() > 1.0 + DELTA_TOL:
            raise ValueError("state lies outside the feasible simplex")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        x.setflags(write=False)
        y.setflags(write=False)

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def z(self) -> np.ndarray:
        return 1.0 - self.x - self.y


@dataclass(frozen=True)
class ConsensusEquilibrium:
    """A node-independent steady state (xi, mu, zeta), xi + mu + zeta = 1.

    case_tag records which closed-form branch produced it: "symmetric"
    (xi = mu) or "zeta-locked" (zeta = alpha / (r d)).
    """

    xi: float
    mu: float
    zeta: float
    case_tag: str

    def __post_init__(self):
        if abs(self.xi + self.mu + self.zeta - 1.0) > 1e-9:
            raise ValueError(
                f"fractions must sum to 1, got {self.xi + self.mu + self.zeta}"
            )

    def as_state(self, n: int) -> PopulationState:
        return PopulationState(np.full(n, self.xi), np.full(n, self.mu))


@dataclass(frozen=True)
class StabilityCertificate:
    """Outcome of a Gershgorin sufficiency check.

    lhs is the quantity being bounded, rhs_bounds the bound(s) it is
    compared against, and margin the worst-case slack; holds iff
    margin > 0. condition names the comparison direction:
    "alpha_dominance" requires lhs to exceed every bound,
    "sigma_upper_bound" requires lhs to stay below every bound.
    """

    holds: bool
    lhs: float
    rhs_bounds: tuple[float, ...]
    margin: float
    condition: str


@dataclass(frozen=True)
class Trajectory:
    """Sampled states of an integration run."""

    times: np.ndarray
    x: np.ndarray  # (samples, n)
    y: np.ndarray  # (samples, n)
    clamp_events: int = 0
    stationary_time: float | None = None

    @property
    def final(self) -> PopulationState:
        return PopulationState(self.x[-1], self.y[-1])

    def to_csv(self, path: str) -> None:
        """Wide CSV: header t,x_1,...,x_n,y_1,...,y_n; 15 significant digits."""
        n = self.x.shape[1]
        header = "t," + ",".join(f"x_{i + 1}" for i in range(n)) + "," + ",".join(
            f"y_{i + 1}" for i in range(n)
        )
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(header + "\n")
            for k in range(self.times.shape[0]):
                row = [numkit.format_float(self.times[k])]
                row += [numkit.format_float(v) for v in self.x[k]]
                row += [numkit.format_float(v) for v in self.y[k]]
                fh.write(",".join(row) + "\n")


def _field_arrays(A: np.ndarray, p: ModelParams):
    g, r, al, s = p.gamma, p.r, p.alpha, p.sigma

    def field(x: np.ndarray, y: np.ndarray):
        sx = A @ x
        sy = A @ y
        z = 1.0 - x - y
        dx = (g + r * sx) * z - x * (al + s * sy)
        dy = (g + r * sy) * z - y * (al + s * sx)
        return dx, dy

    return field


def vector_field(
    state: PopulationState, params: ModelParams, graph: RegularGraph
) -> tuple[np.ndarray, np.ndarray]:
    """Time derivatives (dx, dy) of the commitment dynamics at one state."""
    if state.n != graph.n:
        raise ValueError(f"state has {state.n} nodes but graph has {graph.n}")
    return _field_arrays(graph.adjacency, params)(state.x, state.y)


def integrate(
    state0: PopulationState,
    params: ModelParams,
    graph: RegularGraph,
    dt: float,
    t_end: float,
    *,
    sample_every: int = 1,
    stop_tol: float | None = None,
    delta_tol: float = DELTA_TOL,
) -> Trajectory:
    """Fixed-step RK4 trajectory from state0 over [0, t_end].

    Every step is checked against the feasible simplex: drift within
    delta_tol is clamped (and counted in the result), larger violations
    raise SimplexViolationError with the offending step. If stop_tol is
    given, the run ends early once max_i |(x_i', y_i')| falls below it.
    """
    if state0.n != graph.n:
        raise ValueError(f"state has {state0.n} nodes but graph has {graph.n}")
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    if t_end < dt:
        raise ValueError(f"t_end ({t_end}) must be at least dt ({dt})")
    n_steps = int(round(t_end / dt))
    times, xs, ys, clamps, stopped = numkit.integrate_pairs(
        _field_arrays(graph.adjacency, params),
        state0.x,
        state0.y,
        dt,
        n_steps,
        sample_every=sample_every,
        delta_tol=delta_tol,
        stop_tol=stop_tol,
    )
    return Trajectory(times, xs, ys, clamps, stopped)


def equilibrium_case1(params: ModelParams, d: int) -> ConsensusEquilibrium:
    """Symmetric consensus equilibrium xi = mu.

    The root of (2rd + sigma d) xi^2 + (2 gamma - rd + alpha) xi - gamma
    with the positive sign; the other root is negative and never feasible.
    """
    if d < 1:
        raise ValueError(f"degree must be >= 1, got {d}")
    g, r, al, s = params.gamma, params.r, params.alpha, params.sigma
    lin = 2.0 * g - r * d + al
    quad = 2.0 * r * d + s * d
    root = math.sqrt(lin * lin + 4.0 * g * quad)
    # pick the cancellation-free branch of the quadratic formula: the two
    # are algebraically equal but only one is stable for each sign of lin
    if lin >= 0.0:
        xi = 2.0 * g / (lin + root)
    else:
        xi = (-lin + root) / (2.0 * quad)
    return ConsensusEquilibrium(xi=xi, mu=xi, zeta=1.0 - 2.0 * xi, case_tag="symmetric")


def equilibrium_case2(params: ModelParams, d: int) -> list[ConsensusEquilibrium]:
    """Consensus equilibria with the uncommitted fraction locked at
    zeta = alpha / (r d).

    Returns the real roots whose (xi, mu, zeta) all lie in [0, 1]: zero,
    one, or two equilibria. An empty list means the branch is infeasible
    for these parameters, not an error.
    """
    if d < 1:
        raise ValueError(f"degree must be >= 1, got {d}")
    g, r, al, s = params.gamma, params.r, params.alpha, params.sigma
    zeta = al / (r * d)
    if zeta > 1.0:
        return []
    b = al / r - d
    disc = b * b - 4.0 * g * al / (r * s)
    if disc < 0.0:
        return []
    root = math.sqrt(disc)
    out = []
    for sign in (+1.0, -1.0):
        xi = (-b + sign * root) / (2.0 * d)
        mu = 1.0 - xi - zeta
        if -1e-15 <= xi <= 1.0 and -1e-15 <= mu <= 1.0:
            out.append(
                ConsensusEquilibrium(
                    xi=max(xi, 0.0), mu=max(mu, 0.0), zeta=zeta, case_tag="zeta-locked"
                )
            )
    return out


def all_equilibria(params: ModelParams, d: int) -> list[ConsensusEquilibrium]:
    """Symmetric equilibrium followed by any feasible zeta-locked roots."""
    return [equilibrium_case1(params, d)] + equilibrium_case2(params, d)


def jacobian(
    eq: ConsensusEquilibrium, params: ModelParams, graph: RegularGraph
) -> np.ndarray:
    """Linearization of the dynamics at a consensus equilibrium.

    2n x 2n block matrix in (x, y) ordering:

        [ r zeta A - (g + r d xi + a + s d mu) I    -s xi A - (g + r d xi) I ]
        [ -s mu A - (g + r d mu) I    r zeta A - (g + r d mu + a + s d xi) I ]
    """
    g, r, al, s = params.gamma, params.r, params.alpha, params.sigma
    xi, mu, zeta = eq.xi, eq.mu, eq.zeta
    A = graph.adjacency
    d = graph.d
    eye = np.eye(graph.n)
    return np.block(
        [
            [
                r * zeta * A - (g + r * d * xi + al + s * d * mu) * eye,
                -s * xi * A - (g + r * d * xi) * eye,
            ],
            [
                -s * mu * A - (g + r * d * mu) * eye,
                r * zeta * A - (g + r * d * mu + al + s * d * xi) * eye,
            ],
        ]
    )


def certify_stability(
    eq: ConsensusEquilibrium, params: ModelParams, d: int
) -> StabilityCertificate:
    """Gershgorin sufficiency check for local exponential stability of a
    consensus equilibrium: every row of the Jacobian must be strictly
    diagonally dominant, which pins the spectrum in the open left half
    plane. Spelling out the dominance of the two row blocks (using the
    worst-case off-diagonal weight sigma * d for the cross-coupling),
    both reduce to upper bounds on the cross-inhibition rate:

        sigma < (alpha - r d zeta) / (d (1 - mu))   and
        sigma < (alpha - r d zeta) / (d (1 - xi)),

    so certification also needs alpha > r d zeta. Sufficient, never
    necessary: the locked branch sits exactly at alpha = r d zeta and is
    never certified even when stable; probe such equilibria with
    decay_oracle. Raises CertificateInapplicableError when mu = 1 or
    xi = 1 (zero denominator).
    """
    if d < 1:
        raise ValueError(f"degree must be >= 1, got {d}")
    xi, mu = eq.xi, eq.mu
    zeta = 1.0 - xi - mu
    if mu >= 1.0 or xi >= 1.0:
        raise CertificateInapplicableError(
            f"certificate undefined at xi={xi}, mu={mu}: a committed fraction is 1"
        )
    num = params.alpha - params.r * d * zeta
    rhs1 = num / (d * (1.0 - mu))
    rhs2 = num / (d * (1.0 - xi))
    margin = min(rhs1 - params.sigma, rhs2 - params.sigma)
    return StabilityCertificate(
        holds=margin > 0.0,
        lhs=params.sigma,
        rhs_bounds=(rhs1, rhs2),
        margin=margin,
        condition="sigma_upper_bound",
    )


def certificate_report(eq: ConsensusEquilibrium, cert: StabilityCertificate) -> dict:
    """JSON-ready certificate record for a consensus equilibrium."""
    return {
        "xi": eq.xi,
        "mu": eq.mu,
        "zeta": eq.zeta,
        "case_tag": eq.case_tag,
        "sigma": cert.lhs,
        "rhs_1": cert.rhs_bounds[0],
        "rhs_2": cert.rhs_bounds[1],
        "holds": cert.holds,
        "margin": cert.margin,
    }


def decay_oracle(
    eq: ConsensusEquilibrium,
    params: ModelParams,
    graph: RegularGraph,
    perturbation_size: float,
    trials: int,
    *,
    seed: int = 0,
    dt: float = 0.02,
    t_end: float | None = None,
) -> bool:
    """Empirical stability probe: perturb the consensus state by random
    vectors of the given 2-norm, integrate, and report True iff the
    distance to the equilibrium shrinks by a factor of at least 10 within
    the horizon in every trial.

    Perturbed states that fall outside the simplex are resampled. When
    t_end is omitted, the horizon is derived from the spectral abscissa of
    the analytic Jacobian (three decades of linear decay, capped at 5000).
    """
    if trials == 0:
        warnings.warn("decay_oracle called with trials=0: vacuously true")
        return True
    if perturbation_size == 0.0:
        return True
    rng = numkit.rng_for(seed)
    n = graph.n
    base_x = np.full(n, eq.xi)
    base_y = np.full(n, eq.mu)
    if t_end is None:
        eigs = np.linalg.eigvals(jacobian(eq, params, graph))
        rate = -float(eigs.real.max())
        t_end = 200.0 if rate <= 0 else min(max(3.0 * math.log(10.0) / rate, 10.0), 5000.0)
    field = _field_arrays(graph.adjacency, params)
    n_steps = int(round(t_end / dt))
    for _ in range(trials):
        for _attempt in range(1000):
            v = rng.normal(size=2 * n)
            v *= perturbation_size / np.linalg.norm(v)
            x = base_x + v[:n]
            y = base_y + v[n:]
            if x.min() >= 0.0 and y.min() >= 0.0 and (x + y).max() <= 1.0:
                break
        else:
            raise ValueError(
                f"could not place a perturbation of size {perturbation_size} inside the simplex"
            )
        d0 = np.linalg.norm(np.concatenate([x - base_x, y - base_y]))
        shrunk = False
        for step in range(1, n_steps + 1):
            x, y = _rk4_pair(field, x, y, dt)
            if step % 10 == 0 or step == n_steps:
                dist = np.linalg.norm(np.concatenate([x - base_x, y - base_y]))
                if dist <= d0 / 10.0:
                    shrunk = True
                    break
        if not shrunk:
            return False
    return True


def _rk4_pair(field, x, y, dt):
    k1x, k1y = field(x, y)
    k2x, k2y = field(x + 0.5 * dt * k1x, y + 0.5 * dt * k1y)
    k3x, k3y = field(x + 0.5 * dt * k2x, y + 0.5 * dt * k2y)
    k4x, k4y = field(x + dt * k3x, y + dt * k3y)
    return (
        x + (dt / 6.0) * (k1x + 2.0 * (k2x + k3x) + k4x),
        y + (dt / 6.0) * (k1y + 2.0 * (k2y + k3y) + k4y),
    )


def sample_simplex_state(
    n: int,
    seed: int,
    style: str = "uniform",
    x_range: tuple[float, float] = (0.0, 0.3),
    y_range: tuple[float, float] = (0.2, 0.5),
) -> PopulationState:
    """Seeded random state in the simplex; see numkit.sample_simplex_pairs.

    The "biased" style with the default ranges is the canonical asymmetric
    initial condition shipped with the dome scenarios.
    """
    x, y = numkit.sample_simplex_pairs(n, seed, style, x_range, y_range)
    return PopulationState(x, y)


def best_equilibrium_match(
    state: PopulationState, candidates: list[ConsensusEquilibrium]
) -> tuple[ConsensusEquilibrium | None, float]:
    """Closest consensus equilibrium to a state in the max norm, with its
    distance; (None, inf) when no candidates exist."""
    best = None
    best_dist = math.inf
    for eq in candidates:
        dist = max(
            float(np.abs(state.x - eq.xi).max()), float(np.abs(state.y - eq.mu).max())
        )
        if dist < best_dist:
            best = eq
            best_dist = dist
    return best, best_dist
