"""Structured populations: degree distributions, moments, cluster dynamics,
the frozen-moment aggregate system, and its certificates."""

import numpy as np
import pytest
from oracles import bisect_scalar_fixed_point

from swarmnet import (
    CertificateInapplicableError,
    ClusteredState,
    ConvergenceError,
    DegreeDistribution,
    ModelParams,
    RegularGraph,
    build_buckminster,
    build_circulant,
    certify_structured,
    certify_symmetric_structured,
    cluster_vector_field,
    compute_psi,
    compute_theta,
    empirical_distribution,
    integrate_clusters,
    integrate_moments,
    load_distribution_csv,
    powerlaw_distribution,
    sample_cluster_state,
    solve_selfconsistent_theta,
    symmetric_cluster_eigenvalues,
    symmetric_cluster_equilibrium,
    symmetric_cluster_matrix,
    theta_equilibrium,
    theta_system_matrix,
    theta_vector_field,
)
from swarmnet.numkit import rng_for

STRUCT_PARAMS = ModelParams(gamma=0.5, r=0.4, alpha=0.6, sigma=0.3)
# Reconstruction of the scale-free distribution behind the reference
# cluster values 0.3127 / 0.3143 / 0.3190 (see README): exponent-3 power
# law with support out to k = 177.
REF_DIST = powerlaw_distribution(177, 3.0)


def degenerate_graph(n):
    A = np.zeros((n, n))
    return RegularGraph(n=n, d=0, adjacency=A, neighbor_lists=tuple(() for _ in range(n)))


# ---------------------------------------------------------------------------
# degree distributions

def test_powerlaw_two_clusters():
    dist = powerlaw_distribution(2, 3.0)
    assert dist.p == pytest.approx([8 / 9, 1 / 9], abs=1e-15)
    assert dist.mean_k == pytest.approx(10 / 9, abs=1e-15)
    assert dist.second_moment == pytest.approx(12 / 9, abs=1e-15)
    assert dist.psi == pytest.approx([0.5, 1.0], abs=0)


def test_powerlaw_normalization():
    dist = powerlaw_distribution(40, 3.0)
    assert abs(dist.p.sum() - 1.0) < 1e-12
    assert dist.psi[0] == pytest.approx(1 / 40, abs=0)
    assert dist.psi[-1] == 1.0


def test_second_moment_dominates_mean_squared():
    rng = rng_for(2)
    for _ in range(100):
        kmax = int(rng.integers(2, 60))
        exponent = float(rng.uniform(1.1, 4.0))
        dist = powerlaw_distribution(kmax, exponent)
        assert dist.mean_k**2 <= dist.second_moment + 1e-12
        assert 1.0 <= dist.mean_k <= kmax
        assert dist.second_moment <= kmax * dist.mean_k + 1e-12


def test_powerlaw_validation():
    with pytest.raises(ValueError):
        powerlaw_distribution(1, 3.0)
    with pytest.raises(ValueError):
        powerlaw_distribution(10, 1.0)


def test_empirical_uniform_degrees():
    dist = empirical_distribution([2, 2, 2])
    assert dist.kmax == 2
    assert dist.p == pytest.approx([0.0, 1.0], abs=0)
    assert dist.mean_k == 2.0
    assert dist.second_moment == 4.0


def test_empirical_mixed_degrees():
    dist = empirical_distribution([1, 1, 2])
    assert dist.p == pytest.approx([2 / 3, 1 / 3], abs=1e-15)
    assert dist.mean_k == pytest.approx(4 / 3, abs=1e-15)


def test_empirical_barabasi_albert_realization():
    # a 200-node preferential-attachment network with m = 2 has mean degree
    # 2 m (N - m) / N = 3.96 exactly
    nx = pytest.importorskip("networkx")
    graph = nx.barabasi_albert_graph(200, 2, seed=12345)
    dist = empirical_distribution([deg for _, deg in graph.degree()])
    assert abs(dist.p.sum() - 1.0) < 1e-12
    assert dist.mean_k == pytest.approx(3.96, abs=1e-12)


def test_empirical_validation():
    with pytest.raises(ValueError):
        empirical_distribution([])
    with pytest.raises(ValueError):
        empirical_distribution([0, 1, 2])


def test_distribution_csv_roundtrip(tmp_path):
    dist = powerlaw_distribution(12, 2.5)
    path = tmp_path / "dist.csv"
    dist.to_csv(str(path))
    loaded = load_distribution_csv(str(path))
    assert loaded.kmax == 12
    assert loaded.p == pytest.approx(dist.p, abs=1e-15)


# ---------------------------------------------------------------------------
# moments

def test_theta_of_constant_state_is_the_constant():
    state = ClusteredState(np.full((4, 9), 0.37), np.full((4, 9), 0.11))
    dist = powerlaw_distribution(9, 3.0)
    tx, ty = compute_theta(state, dist)
    assert tx == pytest.approx(np.full(4, 0.37), abs=1e-15)
    assert ty == pytest.approx(np.full(4, 0.11), abs=1e-15)


def test_theta_of_zero_state_is_zero():
    state = ClusteredState(np.zeros((3, 5)), np.zeros((3, 5)))
    tx, ty = compute_theta(state, powerlaw_distribution(5, 3.0))
    assert (tx == 0.0).all() and (ty == 0.0).all()


def test_theta_two_cluster_hand_value():
    # P = (8/9, 1/9), x = (0, 1): theta = (2 * 1/9) / (10/9) = 0.2
    dist = powerlaw_distribution(2, 3.0)
    state = ClusteredState(np.array([[0.0, 1.0]]), np.zeros((1, 2)))
    tx, _ = compute_theta(state, dist)
    assert tx[0] == pytest.approx(0.2, abs=1e-15)


def test_psi_of_empty_state_is_all_uncommitted():
    dist = powerlaw_distribution(7, 3.0)
    state = ClusteredState(np.zeros((2, 7)), np.zeros((2, 7)))
    px, py, pz = compute_psi(state, dist)
    assert (px == 0.0).all() and (py == 0.0).all()
    assert pz == pytest.approx(
        np.full(2, dist.second_moment / dist.mean_k), abs=1e-14
    )


def test_psi_identity_holds_for_random_states():
    dist = powerlaw_distribution(20, 2.2)
    for seed in range(5):
        state = sample_cluster_state(6, 20, seed, "uniform")
        px, py, pz = compute_psi(state, dist)
        total = dist.mean_k * (px + py + pz)
        assert total == pytest.approx(
            np.full(6, dist.second_moment), abs=1e-12
        )


def test_psi_of_constant_state():
    dist = powerlaw_distribution(11, 3.0)
    c = 0.25
    state = ClusteredState(np.full((3, 11), c), np.zeros((3, 11)))
    px, _, _ = compute_psi(state, dist)
    assert px == pytest.approx(
        np.full(3, c * dist.second_moment / dist.mean_k), abs=1e-14
    )


# ---------------------------------------------------------------------------
# cluster dynamics

def test_cluster_field_all_uncommitted_grows_at_gamma():
    g = build_circulant(6, [1])
    dist = powerlaw_distribution(8, 3.0)
    state = ClusteredState(np.zeros((6, 8)), np.zeros((6, 8)))
    dx, dy = cluster_vector_field(state, STRUCT_PARAMS, g, dist)
    assert dx == pytest.approx(np.full((6, 8), 0.5), abs=0)
    assert dy == pytest.approx(np.full((6, 8), 0.5), abs=0)


def test_cluster_field_swap_symmetry_exact():
    g = build_circulant(6, [1, 2])
    dist = powerlaw_distribution(10, 3.0)
    state = sample_cluster_state(6, 10, 4, "uniform")
    dx, dy = cluster_vector_field(state, STRUCT_PARAMS, g, dist)
    sx, sy = cluster_vector_field(
        ClusteredState(state.y, state.x), STRUCT_PARAMS, g, dist
    )
    assert (sx == dy).all() and (sy == dx).all()


def test_cluster_field_dimension_checks():
    g = build_circulant(6, [1])
    dist = powerlaw_distribution(8, 3.0)
    with pytest.raises(ValueError, match="nodes"):
        cluster_vector_field(
            ClusteredState(np.zeros((5, 8)), np.zeros((5, 8))), STRUCT_PARAMS, g, dist
        )
    with pytest.raises(ValueError, match="kmax"):
        cluster_vector_field(
            ClusteredState(np.zeros((6, 7)), np.zeros((6, 7))), STRUCT_PARAMS, g, dist
        )


def test_selfconsistent_fixed_point_is_stationary():
    # lift the closed-loop equilibrium to a consensus cluster state: the
    # full cluster field must vanish there
    dome = build_buckminster()
    theta_star, x_star = solve_selfconsistent_theta(REF_DIST, STRUCT_PARAMS, 3, tol=1e-13)
    X = np.tile(x_star, (60, 1))
    state = ClusteredState(X, X.copy())
    dx, dy = cluster_vector_field(state, STRUCT_PARAMS, dome, REF_DIST)
    assert max(np.abs(dx).max(), np.abs(dy).max()) < 1e-10


def test_cluster_integration_preserves_symmetry_and_simplex():
    g = build_circulant(8, [1, 4])
    dist = powerlaw_distribution(12, 3.0)
    x0 = sample_cluster_state(8, 12, 6, "uniform").x * 0.45
    state0 = ClusteredState(x0, x0.copy())
    traj = integrate_clusters(state0, STRUCT_PARAMS, g, dist, 0.01, 5.0, sample_every=100)
    assert (traj.x == traj.y).all()
    assert traj.x.min() >= 0.0
    assert (traj.x + traj.y).max() <= 1.0 + 1e-9


def test_moment_identity_along_trajectory():
    g = build_circulant(8, [1, 4])
    dist = powerlaw_distribution(12, 3.0)
    state0 = sample_cluster_state(8, 12, 7, "biased")
    traj = integrate_clusters(state0, STRUCT_PARAMS, g, dist, 0.01, 3.0, sample_every=30)
    V = dist.second_moment
    for s in range(traj.times.shape[0]):
        px, py, pz = compute_psi(ClusteredState(traj.x[s], traj.y[s]), dist)
        assert np.abs(dist.mean_k * (px + py + pz) - V).max() < 1e-10


def test_theta_derivative_matches_aggregated_field():
    # differentiating the first moments along a cluster trajectory agrees
    # with the aggregate field evaluated with the same state's second
    # moments: the aggregation step is exact, not an approximation
    g = build_circulant(6, [1, 2])
    dist = powerlaw_distribution(9, 3.0)
    state0 = sample_cluster_state(6, 9, 8, "uniform")
    dt = 0.001  # small enough that O(dt^2) differencing error sits below 1e-6
    traj = integrate_clusters(state0, STRUCT_PARAMS, g, dist, dt, 20 * dt, sample_every=1)
    for s in (1, 5, 10):
        mid = ClusteredState(traj.x[s], traj.y[s])
        tx_m, ty_m = compute_theta(ClusteredState(traj.x[s - 1], traj.y[s - 1]), dist)
        tx_p, ty_p = compute_theta(ClusteredState(traj.x[s + 1], traj.y[s + 1]), dist)
        fd_x = (tx_p - tx_m) / (2 * dt)
        fd_y = (ty_p - ty_m) / (2 * dt)
        tx, ty = compute_theta(mid, dist)
        px, py, pz = compute_psi(mid, dist)
        dtx, dty = theta_vector_field(tx, ty, px, py, pz, STRUCT_PARAMS, g, dist.kmax)
        assert np.abs(fd_x - dtx).max() < 1e-6
        assert np.abs(fd_y - dty).max() < 1e-6


# ---------------------------------------------------------------------------
# aggregate dynamics with frozen second moments

def test_theta_field_affine_offset():
    g = build_circulant(5, [1])
    zero = np.zeros(5)
    psi = np.full(5, 1.3)
    dtx, dty = theta_vector_field(zero, zero, psi, psi, psi, STRUCT_PARAMS, g, 10)
    assert dtx == pytest.approx(np.full(5, 0.5), abs=0)
    assert dty == pytest.approx(np.full(5, 0.5), abs=0)


def test_theta_field_decoupled_eigenvalues():
    # without edges each node is the 2x2 system with eigenvalues -alpha
    # and -(2 gamma + alpha)
    g0 = degenerate_graph(3)
    psi = np.full(3, 0.9)
    M = theta_system_matrix(psi, psi, psi, STRUCT_PARAMS, g0, 14)
    eig = np.sort(np.linalg.eigvals(-M).real)
    expected = sorted([-0.6] * 3 + [-1.6] * 3)
    assert eig == pytest.approx(expected, abs=1e-12)


def test_theta_equilibrium_zero_moments():
    g = build_circulant(7, [1])
    zero = np.zeros(7)
    tx, ty = theta_equilibrium(zero, zero, zero, STRUCT_PARAMS, g, 5)
    expected = 0.5 / (2 * 0.5 + 0.6)
    assert tx == pytest.approx(np.full(7, expected), abs=1e-14)
    assert ty == pytest.approx(np.full(7, expected), abs=1e-14)


def test_theta_equilibrium_symmetric_moments():
    g = build_circulant(6, [1, 2])
    rng = rng_for(9)
    psi_xy = rng.uniform(0.1, 0.8, 6)
    psi_z = rng.uniform(0.5, 1.5, 6)
    tx, ty = theta_equilibrium(psi_xy, psi_xy, psi_z, STRUCT_PARAMS, g, 11)
    assert np.abs(tx - ty).max() < 1e-13


def test_theta_equilibrium_is_stationary():
    g = build_circulant(9, [1, 3])
    rng = rng_for(10)
    px = rng.uniform(0.1, 0.9, 9)
    py = rng.uniform(0.1, 0.9, 9)
    pz = rng.uniform(0.2, 1.2, 9)
    tx, ty = theta_equilibrium(px, py, pz, STRUCT_PARAMS, g, 12)
    dtx, dty = theta_vector_field(tx, ty, px, py, pz, STRUCT_PARAMS, g, 12)
    assert max(np.abs(dtx).max(), np.abs(dty).max()) < 1e-10


def test_theta_consensus_from_frozen_reference_moments():
    # frozen consensus moments on the dome give a consensus equilibrium
    dome = build_buckminster()
    theta_star, x_star = solve_selfconsistent_theta(REF_DIST, STRUCT_PARAMS, 3)
    w2 = REF_DIST.k**2 * REF_DIST.p / REF_DIST.mean_k
    psi_star = float(w2 @ x_star)
    psi_z = REF_DIST.second_moment / REF_DIST.mean_k - 2 * psi_star
    n = dome.n
    tx, ty = theta_equilibrium(
        np.full(n, psi_star), np.full(n, psi_star), np.full(n, psi_z),
        STRUCT_PARAMS, dome, REF_DIST.kmax,
    )
    assert tx.max() - tx.min() < 1e-8
    assert ty.max() - ty.min() < 1e-8
    # and the consensus value is the closed-loop first moment
    assert tx[0] == pytest.approx(theta_star, abs=1e-9)


def test_integrate_moments_reaches_linear_solve():
    g = build_circulant(8, [1, 2])
    rng = rng_for(13)
    px = rng.uniform(0.2, 0.9, 8)
    py = rng.uniform(0.2, 0.9, 8)
    pz = rng.uniform(0.3, 1.0, 8)
    eq_tx, eq_ty = theta_equilibrium(px, py, pz, STRUCT_PARAMS, g, 10)
    traj = integrate_moments(
        np.zeros(8), np.zeros(8), px, py, pz, STRUCT_PARAMS, g, 10, 0.01, 60.0,
        sample_every=1000,
    )
    assert np.abs(traj.theta_x[-1] - eq_tx).max() < 1e-10
    assert np.abs(traj.theta_y[-1] - eq_ty).max() < 1e-10


# ---------------------------------------------------------------------------
# certificates

def test_certify_structured_zero_moments_always_holds():
    cert = certify_structured(0.0, 0.0, 0.0, STRUCT_PARAMS, 3, 40)
    assert cert.holds and cert.margin == pytest.approx(0.6, abs=0)


def test_certify_structured_reference_scenario_holds():
    _, x_star = solve_selfconsistent_theta(REF_DIST, STRUCT_PARAMS, 3)
    w2 = REF_DIST.k**2 * REF_DIST.p / REF_DIST.mean_k
    psi_star = float(w2 @ x_star)
    psi_z = REF_DIST.second_moment / REF_DIST.mean_k - 2 * psi_star
    cert = certify_structured(psi_star, psi_star, psi_z, STRUCT_PARAMS, 3, REF_DIST.kmax)
    assert cert.holds and cert.margin > 0.0


def test_certify_structured_fails_when_coupling_dominates():
    params = ModelParams(gamma=0.5, r=40.0, alpha=0.6, sigma=30.0)
    cert = certify_structured(1.0, 1.0, 1.5, params, 3, 40)
    assert not cert.holds


def test_symmetric_certificate_equivalence():
    # the sigma upper bound is the alpha dominance condition rearranged:
    # same verdict on every admissible input
    rng = rng_for(14)
    agree = 0
    for _ in range(300):
        params = ModelParams(*rng.uniform(0.05, 2.0, 4))
        kmax = int(rng.integers(2, 50))
        dist = powerlaw_distribution(kmax, float(rng.uniform(1.5, 4.0)))
        d = int(rng.integers(1, 8))
        total = dist.second_moment / dist.mean_k
        psi_star = float(rng.uniform(0.01, 0.499)) * total
        psi_z = total - 2 * psi_star
        thm = certify_structured(psi_star, psi_star, psi_z, params, d, kmax)
        cor = certify_symmetric_structured(psi_star, dist, params, d)
        assert thm.holds == cor.holds
        agree += 1
    assert agree == 300


def test_symmetric_certificate_boundary():
    dist = powerlaw_distribution(30, 3.0)
    d = 3
    psi_star = 0.4 * dist.second_moment / dist.mean_k
    base = certify_symmetric_structured(psi_star, dist, STRUCT_PARAMS, d)
    bound = base.rhs_bounds[0]
    above = ModelParams(0.5, 0.4, 0.6, bound + 1e-6)
    cert = certify_symmetric_structured(psi_star, dist, above, d)
    assert not cert.holds and cert.margin < 0.0


def test_symmetric_certificate_inapplicable_at_zero():
    with pytest.raises(CertificateInapplicableError):
        certify_symmetric_structured(0.0, powerlaw_distribution(5, 3.0), STRUCT_PARAMS, 3)


# ---------------------------------------------------------------------------
# symmetric per-cluster closed forms

def test_cluster_eigenvalues_decoupled():
    lam1, lam2 = symmetric_cluster_eigenvalues(0.5, 0.0, STRUCT_PARAMS, 3)
    assert lam1 == pytest.approx(-0.6, abs=0)
    assert lam2 == pytest.approx(-1.6, abs=0)


def test_cluster_eigenvalues_reference_point():
    lam1, lam2 = symmetric_cluster_eigenvalues(1.0, 0.32, STRUCT_PARAMS, 3)
    assert lam1 == pytest.approx(-0.888, abs=1e-12)
    assert lam2 == pytest.approx(-2.656, abs=1e-12)


def test_cluster_eigenvalues_match_trace_determinant():
    rng = rng_for(15)
    for _ in range(200):
        params = ModelParams(*rng.uniform(0.05, 1.5, 4))
        psi_k = float(rng.uniform(0.01, 1.0))
        theta = float(rng.uniform(0.0, 1.0))
        d = int(rng.integers(1, 8))
        lam1, lam2 = symmetric_cluster_eigenvalues(psi_k, theta, params, d)
        M, _ = symmetric_cluster_matrix(psi_k, theta, params, d)
        tr = M[0, 0] + M[1, 1]
        det = M[0, 0] * M[1, 1] - M[0, 1] * M[1, 0]
        disc = np.sqrt(tr * tr / 4.0 - det)
        ref = sorted([tr / 2.0 + disc, tr / 2.0 - disc])
        assert sorted([lam1, lam2]) == pytest.approx(ref, abs=1e-12)
        assert lam1 < 0.0 and lam2 < 0.0


def test_cluster_eigenvalues_monotone_in_connectivity():
    psis = np.linspace(0.05, 1.0, 12)
    lams = [symmetric_cluster_eigenvalues(p, 0.4, STRUCT_PARAMS, 3) for p in psis]
    l1 = [a for a, _ in lams]
    l2 = [b for _, b in lams]
    assert all(np.diff(l1) < 0) and all(np.diff(l2) < 0)


def test_cluster_equilibrium_decoupled_value():
    assert symmetric_cluster_equilibrium(0.3, 0.0, STRUCT_PARAMS, 3) == pytest.approx(
        0.3125, abs=0
    )


def test_cluster_equilibrium_bounded_below_half():
    rng = rng_for(16)
    for _ in range(500):
        params = ModelParams(*rng.uniform(0.05, 2.0, 4))
        x = symmetric_cluster_equilibrium(
            float(rng.uniform(0.01, 1.0)), float(rng.uniform(0.0, 1.0)), params,
            int(rng.integers(1, 8)),
        )
        assert 0.0 < x < 0.5


def test_cluster_equilibrium_monotone_when_abandonment_outweighs_inhibition():
    # alpha/gamma = 1.2 > sigma/r = 0.75: commitment grows with connectivity
    thetas = 0.31
    values = [
        symmetric_cluster_equilibrium(psi, thetas, STRUCT_PARAMS, 3)
        for psi in np.linspace(0.01, 1.0, 20)
    ]
    assert all(np.diff(values) > 0)
    # flipped regime: alpha/gamma < sigma/r pushes commitment down
    flipped = ModelParams(gamma=0.6, r=0.2, alpha=0.3, sigma=0.5)
    values = [
        symmetric_cluster_equilibrium(psi, thetas, flipped, 3)
        for psi in np.linspace(0.01, 1.0, 20)
    ]
    assert all(np.diff(values) < 0)


# ---------------------------------------------------------------------------
# closed-loop first moment

def test_selfconsistent_single_cluster_matches_bisection():
    # P(kmax) = 1 collapses the fixed point to a scalar equation
    p = np.zeros(15)
    p[-1] = 1.0
    dist = DegreeDistribution(kmax=15, p=p)
    theta_star, x_star = solve_selfconsistent_theta(dist, STRUCT_PARAMS, 3, tol=1e-14)
    ref = bisect_scalar_fixed_point(
        lambda t: symmetric_cluster_equilibrium(1.0, t, STRUCT_PARAMS, 3), 0.0, 1.0
    )
    assert theta_star == pytest.approx(ref, abs=1e-10)
    assert abs(symmetric_cluster_equilibrium(1.0, theta_star, STRUCT_PARAMS, 3) - theta_star) < 1e-12


def test_selfconsistent_reference_values():
    theta_star, x_star = solve_selfconsistent_theta(REF_DIST, STRUCT_PARAMS, 3)
    assert x_star[0] == pytest.approx(0.3127, abs=2e-3)
    assert x_star[9] == pytest.approx(0.3143, abs=2e-3)
    assert x_star[39] == pytest.approx(0.3190, abs=2e-3)


def test_selfconsistent_lower_bound():
    # with alpha/gamma > sigma/r every cluster sits above the
    # zero-connectivity value
    rng = rng_for(18)
    for _ in range(100):
        g, r = rng.uniform(0.1, 1.0, 2)
        s_over_r = float(rng.uniform(0.05, 0.95))
        al_over_g = s_over_r + float(rng.uniform(0.05, 1.0))
        params = ModelParams(gamma=g, r=r, alpha=al_over_g * g, sigma=s_over_r * r)
        dist = powerlaw_distribution(int(rng.integers(3, 40)), 3.0)
        _, x_star = solve_selfconsistent_theta(dist, params, int(rng.integers(1, 6)))
        assert (x_star >= params.gamma / (2 * params.gamma + params.alpha) - 1e-12).all()


def test_selfconsistent_convergence_error():
    with pytest.raises(ConvergenceError) as err:
        solve_selfconsistent_theta(REF_DIST, STRUCT_PARAMS, 3, tol=1e-16, max_iter=2)
    assert err.value.last_iterate is not None


def test_selfconsistent_validates_tol():
    with pytest.raises(ValueError):
        solve_selfconsistent_theta(REF_DIST, STRUCT_PARAMS, 3, tol=0.0)


# ---------------------------------------------------------------------------
# state containers

def test_clustered_state_validation():
    with pytest.raises(ValueError):
        ClusteredState(np.full((2, 3), 0.7), np.full((2, 3), 0.5))
    with pytest.raises(ValueError):
        ClusteredState(np.zeros((2, 3)), np.zeros((2, 4)))
    with pytest.raises(ValueError):
        DegreeDistribution(kmax=3, p=np.array([0.5, 0.4, 0.2]))
