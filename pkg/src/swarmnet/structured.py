"""Structured populations: every node of the network is itself a complex
network whose members are grouped into clusters by their internal degree k.

A degree distribution P(k), k = 1..kmax, is shared by all populations.
Cluster k of population i carries fractions (x_i^k, y_i^k) on the unit
simplex, and the coupling between populations happens through link-weighted
first moments

    theta_i^x = (1/<k>) * sum_k k P(k) x_i^k

(the probability that a random link in population i points at an
option-1-committed member), with psi_k = k / kmax scaling how strongly a
cluster feels its neighbors. Aggregating the cluster equations with the
same weights yields an affine system for the thetas whose coefficients are
the degree-squared second moments Psi_i^x, Psi_i^y, Psi_i^z; freezing the
Psi's turns it into a linear system whose equilibrium is a dense solve and
whose stability has a Gershgorin certificate in terms of alpha (and, at
symmetric equilibria, an upper bound on sigma).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import numkit
from .dynamics import ModelParams, StabilityCertificate
from .errors import CertificateInapplicableError, ConvergenceError
from .graphs import RegularGraph
from .numkit import DELTA_TOL


@dataclass(frozen=True)
class DegreeDistribution:
    """Distribution of internal node degrees k = 1..kmax.

    p[k-1] = P(k); mean_k and second_moment are the exact finite sums
    sum k P(k) and sum k^2 P(k); psi[k-1] = k / kmax is the normalized
    connectivity of cluster k.
    """

    kmax: int
    p: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.p, dtype=float)
        if self.kmax < 1 or p.shape != (self.kmax,):
            raise ValueError(f"p must have length kmax={self.kmax}, got {p.shape}")
        if p.min() < 0.0:
            raise ValueError("probabilities must be nonnegative")
        if abs(p.sum() - 1.0) > 1e-12:
            raise ValueError(f"probabilities sum to {p.sum()}, not 1")
        object.__setattr__(self, "p", p)
        p.setflags(write=False)

    @property
    def k(self) -> np.ndarray:
        return np.arange(1, self.kmax + 1, dtype=float)

    @property
    def mean_k(self) -> float:
        return float((self.k * self.p).sum())

    @property
    def second_moment(self) -> float:
        return float((self.k**2 * self.p).sum())

    @property
    def psi(self) -> np.ndarray:
        return self.k / self.kmax

    def to_csv(self, path: str) -> None:
        """Distribution file: k,p pairs."""
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("k,p\n")
            for k, pk in zip(range(1, self.kmax + 1), self.p):
                fh.write(f"{k},{numkit.format_float(pk)}\n")


@dataclass(frozen=True)
class ClusteredState:
    """Per-node, per-cluster committed fractions; each (x_i^k, y_i^k) pair
    lies in the unit simplex so the uncommitted share is 1 - x - y."""

    x: np.ndarray  # (n, kmax)
    y: np.ndarray  # (n, kmax)

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        y = np.asarray(self.y, dtype=float)
        if x.ndim != 2 or x.shape != y.shape:
            raise ValueError(f"x and y must be equal-shape matrices, got {x.shape}, {y.shape}")
        if x.min() < -DELTA_TOL or y.min() < -DELTA_TOL or (x + y).max() > 1.0 + DELTA_TOL:
            raise ValueError("a cluster lies outside the feasible simplex")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        x.setflags(write=False)
        y.setflags(write=False)

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def kmax(self) -> int:
        return self.x.shape[1]


@dataclass(frozen=True)
class Moments:
    """First moments (theta) and second moments (Psi) of a clustered state."""

    theta_x: np.ndarray
    theta_y: np.ndarray
    psi_x: np.ndarray
    psi_y: np.ndarray
    psi_z: np.ndarray


@dataclass(frozen=True)
class ClusteredTrajectory:
    """Sampled cluster states of an integration run."""

    times: np.ndarray
    x: np.ndarray  # (samples, n, kmax)
    y: np.ndarray  # (samples, n, kmax)
    clamp_events: int = 0
    stationary_time: float | None = None

    @property
    def final(self) -> ClusteredState:
        return ClusteredState(self.x[-1], self.y[-1])

    def to_csv(self, path: str) -> None:
        """Long CSV: t,node,k,x,y — one row per sampled cluster."""
        n, kmax = self.x.shape[1], self.x.shape[2]
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("t,node,k,x,y\n")
            for s in range(self.times.shape[0]):
                t = numkit.format_float(self.times[s])
                for i in range(n):
                    for k in range(kmax):
                        fh.write(
                            f"{t},{i},{k + 1},"
                            f"{numkit.format_float(self.x[s, i, k])},"
                            f"{numkit.format_float(self.y[s, i, k])}\n"
                        )


@dataclass(frozen=True)
class MomentTrajectory:
    """Sampled first moments of a frozen-Psi aggregate integration run."""

    times: np.ndarray
    theta_x: np.ndarray  # (samples, n)
    theta_y: np.ndarray  # (samples, n)
    stationary_time: float | None = None

    def to_csv(self, path: str) -> None:
        """Long CSV: t,node,theta_x,theta_y."""
        n = self.theta_x.shape[1]
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("t,node,theta_x,theta_y\n")
            for s in range(self.times.shape[0]):
                t = numkit.format_float(self.times[s])
                for i in range(n):
                    fh.write(
                        f"{t},{i},"
                        f"{numkit.format_float(self.theta_x[s, i])},"
                        f"{numkit.format_float(self.theta_y[s, i])}\n"
                    )


# ---------------------------------------------------------------------------
# Degree distributions

def powerlaw_distribution(kmax: int, exponent: float = 3.0) -> DegreeDistribution:
    """Truncated power law P(k) proportional to k^-exponent on k = 1..kmax.

    Exponent 3 is the scale-free (preferential attachment) regime; moments
    are exact finite sums, never asymptotic formulas.
    """
    if kmax < 2:
        raise ValueError(f"kmax must be >= 2, got {kmax}")
    if exponent <= 1.0:
        raise ValueError(f"exponent must exceed 1, got {exponent}")
    k = np.arange(1, kmax + 1, dtype=float)
    w = k**-exponent
    return DegreeDistribution(kmax=kmax, p=w / w.sum())


def empirical_distribution(degrees) -> DegreeDistribution:
    """Distribution from observed node degrees (e.g. one realization of a
    preferential-attachment network)."""
    degrees = np.asarray(degrees, dtype=int)
    if degrees.size == 0:
        raise ValueError("empty degree list")
    if degrees.min() < 1:
        raise ValueError(f"degrees must be >= 1, got min {degrees.min()}")
    kmax = int(degrees.max())
    counts = np.bincount(degrees, minlength=kmax + 1)[1:]
    return DegreeDistribution(kmax=kmax, p=counts / degrees.size)


def load_distribution_csv(path: str) -> DegreeDistribution:
    """Read a k,p distribution file; missing k rows mean P(k) = 0."""
    rows = {}
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != "k,p":
            raise ValueError(f"{path}: expected header 'k,p', got {header!r}")
        for lineno, line in enumerate(fh, start=2):
            text = line.strip()
            if not text:
                continue
            k_str, p_str = text.split(",")
            k = int(k_str)
            if k < 1:
                raise ValueError(f"{path}:{lineno}: k must be >= 1")
            rows[k] = float(p_str)
    if not rows:
        raise ValueError(f"{path}: no rows")
    kmax = max(rows)
    p = np.zeros(kmax)
    for k, pk in rows.items():
        p[k - 1] = pk
    return DegreeDistribution(kmax=kmax, p=p)


# ---------------------------------------------------------------------------
# Moments

def compute_theta(
    state: ClusteredState, dist: DegreeDistribution
) -> tuple[np.ndarray, np.ndarray]:
    """First moments: degree-weighted averages of the cluster fractions."""
    w = dist.k * dist.p / dist.mean_k
    return state.x @ w, state.y @ w


def compute_psi(
    state: ClusteredState, dist: DegreeDistribution
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Second moments: degree-squared-weighted sums over clusters, divided
    by <k>. The three always satisfy
    <k> (Psi^x + Psi^y + Psi^z) = sum k^2 P(k)."""
    w2 = dist.k**2 * dist.p / dist.mean_k
    psi_x = state.x @ w2
    psi_y = state.y @ w2
    psi_z = (1.0 - state.x - state.y) @ w2
    return psi_x, psi_y, psi_z


def compute_moments(state: ClusteredState, dist: DegreeDistribution) -> Moments:
    tx, ty = compute_theta(state, dist)
    px, py, pz = compute_psi(state, dist)
    return Moments(theta_x=tx, theta_y=ty, psi_x=px, psi_y=py, psi_z=pz)


# ---------------------------------------------------------------------------
# Cluster-level dynamics

def _cluster_field_arrays(A: np.ndarray, p: ModelParams, dist: DegreeDistribution):
    g, r, al, s = p.gamma, p.r, p.alpha, p.sigma
    w = dist.k * dist.p / dist.mean_k
    psi = dist.psi

    def field(x: np.ndarray, y: np.ndarray):
        sx = A @ (x @ w)  # neighbor sums of theta^x, length n
        sy = A @ (y @ w)
        z = 1.0 - x - y
        dx = z * (r * np.outer(sx, psi) + g) - x * (al + s * np.outer(sy, psi))
        dy = z * (r * np.outer(sy, psi) + g) - y * (al + s * np.outer(sx, psi))
        return dx, dy

    return field


def cluster_vector_field(
    state: ClusteredState,
    params: ModelParams,
    graph: RegularGraph,
    dist: DegreeDistribution,
) -> tuple[np.ndarray, np.ndarray]:
    """Time derivatives of every cluster; the first moments driving the
    coupling are recomputed from the state at each evaluation."""
    if state.n != graph.n:
        raise ValueError(f"state has {state.n} nodes but graph has {graph.n}")
    if state.kmax != dist.kmax:
        raise ValueError(
            f"state has kmax={state.kmax} but distribution has kmax={dist.kmax}"
        )
    return _cluster_field_arrays(graph.adjacency, params, dist)(state.x, state.y)


def integrate_clusters(
    state0: ClusteredState,
    params: ModelParams,
    graph: RegularGraph,
    dist: DegreeDistribution,
    dt: float,
    t_end: float,
    *,
    sample_every: int = 1,
    stop_tol: float | None = None,
    delta_tol: float = DELTA_TOL,
) -> ClusteredTrajectory:
    """Fixed-step RK4 trajectory of the full n x kmax cluster system, with
    the per-cluster simplex enforced exactly as in the node-level model."""
    if state0.n != graph.n:
        raise ValueError(f"state has {state0.n} nodes but graph has {graph.n}")
    if state0.kmax != dist.kmax:
        raise ValueError(
            f"state has kmax={state0.kmax} but distribution has kmax={dist.kmax}"
        )
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    if t_end < dt:
        raise ValueError(f"t_end ({t_end}) must be at least dt ({dt})")
    n_steps = int(round(t_end / dt))
    times, xs, ys, clamps, stopped = numkit.integrate_pairs(
        _cluster_field_arrays(graph.adjacency, params, dist),
        state0.x,
        state0.y,
        dt,
        n_steps,
        sample_every=sample_every,
        delta_tol=delta_tol,
        stop_tol=stop_tol,
    )
    return ClusteredTrajectory(times, xs, ys, clamps, stopped)


def sample_cluster_state(
    n: int,
    kmax: int,
    seed: int,
    style: str = "uniform",
    x_range: tuple[float, float] = (0.0, 0.3),
    y_range: tuple[float, float] = (0.2, 0.5),
) -> ClusteredState:
    """Seeded random cluster state with every pair in the simplex."""
    x, y = numkit.sample_simplex_pairs(n * kmax, seed, style, x_range, y_range)
    return ClusteredState(x.reshape(n, kmax), y.reshape(n, kmax))


# ---------------------------------------------------------------------------
# Aggregate (first-moment) dynamics with frozen second moments

def theta_vector_field(
    theta_x: np.ndarray,
    theta_y: np.ndarray,
    psi_x: np.ndarray,
    psi_y: np.ndarray,
    psi_z: np.ndarray,
    params: ModelParams,
    graph: RegularGraph,
    kmax: int,
) -> tuple[np.ndarray, np.ndarray]:
    """Block-affine aggregate dynamics with the second moments supplied
    externally (frozen):

        theta_x' = (-g - a) theta_x - g theta_y
                   + (r/kmax) Psi^z (A theta_x) - (s/kmax) Psi^x (A theta_y) + g

    and symmetrically with Psi^y for theta_y'.
    """
    g, r, al, s = params.gamma, params.r, params.alpha, params.sigma
    A = graph.adjacency
    ax = A @ theta_x
    ay = A @ theta_y
    dtx = (-g - al) * theta_x - g * theta_y + (r / kmax) * psi_z * ax - (s / kmax) * psi_x * ay + g
    dty = (-g - al) * theta_y - g * theta_x + (r / kmax) * psi_z * ay - (s / kmax) * psi_y * ax + g
    return dtx, dty


def theta_system_matrix(
    psi_x: np.ndarray,
    psi_y: np.ndarray,
    psi_z: np.ndarray,
    params: ModelParams,
    graph: RegularGraph,
    kmax: int,
) -> np.ndarray:
    """Coefficient matrix M of the equilibrium system M theta* = gamma 1."""
    g, r, al, s = params.gamma, params.r, params.alpha, params.sigma
    A = graph.adjacency
    eye = np.eye(graph.n)
    # diag(psi) @ A scales row i by psi_i, matching the per-node coefficients
    zA = np.asarray(psi_z, dtype=float)[:, None] * A
    xA = np.asarray(psi_x, dtype=float)[:, None] * A
    yA = np.asarray(psi_y, dtype=float)[:, None] * A
    return np.block(
        [
            [(g + al) * eye - (r / kmax) * zA, g * eye + (s / kmax) * xA],
            [g * eye + (s / kmax) * yA, (g + al) * eye - (r / kmax) * zA],
        ]
    )


def theta_equilibrium(
    psi_x: np.ndarray,
    psi_y: np.ndarray,
    psi_z: np.ndarray,
    params: ModelParams,
    graph: RegularGraph,
    kmax: int,
) -> tuple[np.ndarray, np.ndarray]:
    """Equilibrium first moments for frozen second moments, from the dense
    pivoted solve of the 2n x 2n affine system. Raises SingularSystemError
    if the coefficient matrix is singular to working precision."""
    M = theta_system_matrix(psi_x, psi_y, psi_z, params, graph, kmax)
    b = np.full(2 * graph.n, params.gamma)
    sol = numkit.solve_dense(M, b)
    return sol[: graph.n], sol[graph.n:]


def integrate_moments(
    theta_x0: np.ndarray,
    theta_y0: np.ndarray,
    psi_x: np.ndarray,
    psi_y: np.ndarray,
    psi_z: np.ndarray,
    params: ModelParams,
    graph: RegularGraph,
    kmax: int,
    dt: float,
    t_end: float,
    *,
    sample_every: int = 1,
    stop_tol: float | None = None,
) -> MomentTrajectory:
    """Fixed-step RK4 run of the frozen-Psi aggregate system. The thetas
    are not simplex-constrained: the frozen-moment system is an
    approximation and carries no feasibility guarantee of its own."""
    psi_x = np.asarray(psi_x, dtype=float)
    psi_y = np.asarray(psi_y, dtype=float)
    psi_z = np.asarray(psi_z, dtype=float)

    def field(tx, ty):
        return theta_vector_field(tx, ty, psi_x, psi_y, psi_z, params, graph, kmax)

    n_steps = int(round(t_end / dt))
    times, txs, tys, _, stopped = numkit.integrate_pairs(
        field,
        np.asarray(theta_x0, dtype=float),
        np.asarray(theta_y0, dtype=float),
        dt,
        n_steps,
        sample_every=sample_every,
        delta_tol=None,
        stop_tol=stop_tol,
    )
    return MomentTrajectory(times, txs, tys, stopped)


# ---------------------------------------------------------------------------
# Stability certificates for the aggregate system

def certify_structured(
    psi_x_star: float,
    psi_y_star: float,
    psi_z_star: float,
    params: ModelParams,
    d: int,
    kmax: int,
) -> StabilityCertificate:
    """Gershgorin sufficiency for the frozen-Psi aggregate system at a
    consensus equilibrium: abandonment must dominate the network coupling,

        alpha > (r Psi*^z + sigma Psi*^x) d / kmax   and
        alpha > (r Psi*^z + sigma Psi*^y) d / kmax.
    """
    g, r, al, s = params.gamma, params.r, params.alpha, params.sigma
    rhs1 = (r * psi_z_star + s * psi_x_star) * d / kmax
    rhs2 = (r * psi_z_star + s * psi_y_star) * d / kmax
    margin = min(al - rhs1, al - rhs2)
    return StabilityCertificate(
        holds=margin > 0.0,
        lhs=al,
        rhs_bounds=(rhs1, rhs2),
        margin=margin,
        condition="alpha_dominance",
    )


def certify_symmetric_structured(
    psi_star: float,
    dist: DegreeDistribution,
    params: ModelParams,
    d: int,
) -> StabilityCertificate:
    """At a symmetric equilibrium (Psi*^x = Psi*^y = Psi*), the alpha
    dominance condition rearranges into an upper bound on cross-inhibition:

        sigma < 2 r - r V / (<k> Psi*) + alpha kmax / (Psi* d),

    V the second moment of the degree distribution. Raises
    CertificateInapplicableError when Psi* = 0.
    """
    if psi_star == 0.0:
        raise CertificateInapplicableError(
            "symmetric certificate undefined at Psi* = 0"
        )
    g, r, al, s = params.gamma, params.r, params.alpha, params.sigma
    V = dist.second_moment
    bound = 2.0 * r - r * V / (dist.mean_k * psi_star) + al * dist.kmax / (psi_star * d)
    margin = bound - s
    return StabilityCertificate(
        holds=margin > 0.0,
        lhs=s,
        rhs_bounds=(bound,),
        margin=margin,
        condition="sigma_upper_bound",
    )


# ---------------------------------------------------------------------------
# Symmetric consensus: per-cluster closed forms

def symmetric_cluster_eigenvalues(
    psi_k: float, theta: float, params: ModelParams, d: int
) -> tuple[float, float]:
    """Eigenvalues of the per-cluster 2x2 system at a symmetric consensus
    with first moment theta:

        lambda_1 = -sigma psi_k d theta - alpha
        lambda_2 = -(2 r + sigma) psi_k d theta - 2 gamma - alpha

    Both strictly negative, and decreasing in psi_k (better-connected
    clusters converge faster)."""
    g, r, al, s = params.gamma, params.r, params.alpha, params.sigma
    u = psi_k * d * theta
    return (-s * u - al, -(2.0 * r + s) * u - 2.0 * g - al)


def symmetric_cluster_matrix(
    psi_k: float, theta: float, params: ModelParams, d: int
) -> tuple[np.ndarray, np.ndarray]:
    """The per-cluster affine system (M, c) with state' = M state + c at a
    symmetric consensus; exposed for eigenvalue cross-checks."""
    g, r, al, s = params.gamma, params.r, params.alpha, params.sigma
    u = psi_k * d * theta
    M = np.array(
        [
            [-(r + s) * u - al - g, -r * u - g],
            [-r * u - g, -(r + s) * u - al - g],
        ]
    )
    c = np.array([r * u + g, r * u + g])
    return M, c


def symmetric_cluster_equilibrium(
    psi_k: float, theta: float, params: ModelParams, d: int
) -> float:
    """Symmetric equilibrium fraction of a cluster with connectivity psi_k
    under a fixed first moment theta:

        x* = (r psi_k d theta + gamma) / ((2r + sigma) psi_k d theta + 2 gamma + alpha)

    The underlying 2x2 system matrix has determinant
    2(r u + gamma)(sigma u + alpha) + (sigma u + alpha)^2 > 0 (u = psi_k d
    theta), so it is always nonsingular; this is asserted."""
    g, r, al, s = params.gamma, params.r, params.alpha, params.sigma
    u = psi_k * d * theta
    det = 2.0 * (r * u + g) * (s * u + al) + (s * u + al) ** 2
    if not det > 0.0:
        raise ValueError(f"degenerate cluster system (det = {det})")
    return (r * u + g) / ((2.0 * r + s) * u + 2.0 * g + al)


def solve_selfconsistent_theta(
    dist: DegreeDistribution,
    params: ModelParams,
    d: int,
    tol: float = 1e-12,
    max_iter: int = 10_000,
) -> tuple[float, np.ndarray]:
    """Close the loop the per-cluster closed form leaves open: the first
    moment theta aggregates the very equilibria x*(psi_k, theta) it drives.

    Fixed-point iteration theta <- (1/<k>) sum_k k P(k) x*(psi_k, theta)
    from the zero-connectivity value gamma / (2 gamma + alpha). Returns
    (theta*, per-cluster equilibria); raises ConvergenceError with the last
    iterate if max_iter is exhausted.
    """
    if tol <= 0:
        raise ValueError(f"tol must be positive, got {tol}")
    g, r, al, s = params.gamma, params.r, params.alpha, params.sigma
    w = dist.k * dist.p / dist.mean_k
    psi = dist.psi
    theta = g / (2.0 * g + al)
    for _ in range(max_iter):
        u = psi * d * theta
        xs = (r * u + g) / ((2.0 * r + s) * u + 2.0 * g + al)
        theta_new = float(w @ xs)
        if abs(theta_new - theta) < tol:
            u = psi * d * theta_new
            return theta_new, (r * u + g) / ((2.0 * r + s) * u + 2.0 * g + al)
        theta = theta_new
    raise ConvergenceError(
        f"self-consistent first moment did not converge within {max_iter} iterations",
        last_iterate=theta,
    )
