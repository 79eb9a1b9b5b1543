import json

import numpy as np
import pytest

from vardiss.grid import ZGrid
from vardiss.partition import (MAX_LENGTH, PartitionError, build_cutoffs, build_partition,
                               extend_profile, greedy_endpoints)

from conftest import equilibrium, random_field

PROFILES = [
    ("constant", {"mu0": 0.01}, 10.0, 256),
    ("constant", {"mu0": 0.01}, 1500.0, 2048),
    ("exponential", {"mu0": 1e-4, "eps": 5e-4}, 8000.0, 4096),
    ("exponential", {"mu0": 1e-3, "eps": -2e-3}, 3000.0, 4096),
    ("tanh-blend", {"mu_a": 1e-12, "mu_b": 1e-9, "width": 4500.0}, 13500.0, 4096),
    ("tanh-blend", {"mu_a": 1e-3, "mu_b": 1e-1, "width": 40.0}, 400.0, 2048),
]


def ratio_3I(y, mu, a, b):
    # independent re-check on the raw samples
    L = b - a
    m = mu[(y >= a - L - 1e-9) & (y <= b + L + 1e-9)]
    return m.max() / m.min()


def brute_force_end(y, mu, anchor, direction):
    j, best = anchor, anchor
    while 0 <= j + direction < len(y):
        j += direction
        lo, hi = (anchor, j) if direction > 0 else (j, anchor)
        if y[hi] - y[lo] <= MAX_LENGTH + 1e-9 and ratio_3I(y, mu, y[lo], y[hi]) <= 50:
            best = j
    return best


@pytest.fixture(scope="module", params=PROFILES, ids=lambda p: f"{p[0]}-{p[2]:g}")
def built(request):
    kind, params, L, n = request.param
    eq = equilibrium(kind, params, L, n)
    return eq, build_partition(eq)


def test_invariants(built):
    eq, part = built
    y, mu = eq.y, eq.profile.mu
    for (a, b), e in zip(part.intervals, part.extensions):
        assert ratio_3I(y, mu, a, b) <= 50
        assert b - a >= 1 and b - a <= MAX_LENGTH + 1e-9
        assert e["ratio"] <= 100
    chi = part.cutoffs
    assert np.max(np.abs(np.sum(chi ** 2, axis=0) - 1)) <= 1e-12
    assert np.max(np.sum(chi > 0, axis=0)) <= 2
    for (a, b), c in zip(part.intervals, chi):
        L = b - a
        outside = (y < a - L) | (y > b + L)
        assert np.all(c[outside] == 0)
    # intervals tile the grid
    assert part.intervals[0][0] == y[0] and part.intervals[-1][1] == y[-1]
    assert all(p[1] == q[0] for p, q in zip(part.intervals, part.intervals[1:]))


def test_greedy_is_maximal(built):
    eq, _ = built
    y, mu = eq.y, eq.profile.mu
    pairs, n_left = greedy_endpoints(y, mu)
    for idx, (ia, ib) in enumerate(pairs):
        if idx < n_left:
            assert abs(brute_force_end(y, mu, ib, -1) - ia) <= 1
        else:
            assert abs(brute_force_end(y, mu, ia, +1) - ib) <= 1


def test_extensions(built):
    eq, part = built
    y, mu = eq.y, eq.profile.mu
    for j, ((a, b), e) in enumerate(zip(part.intervals, part.extensions)):
        on = (y >= a) & (y <= b)
        assert np.array_equal(e["mu"][on], mu[on])
        prod = e["mu"] * e["Up"]
        assert np.ptp(prod) <= 1e-10 * prod[0]
        L = b - a
        tripled = (y >= a - L) & (y <= b + L)
        assert e["nu"] >= eq.sigma ** 2 / mu[tripled].max() * (1 - 1e-12)
        assert np.isclose(e["u"], eq.sigma / e["mu"].max())
        # constant outside the support of chi_j
        left = y < a - L
        if left.any():
            assert np.ptp(e["mu"][left]) == 0


def test_constant_single_interval():
    eq = equilibrium("constant", {"mu0": 0.01}, 10.0, 256)
    part = build_partition(eq)
    assert len(part) == 1
    assert np.all(part.cutoffs == 1.0)
    assert np.all(extend_profile(eq, part, 0)["mu"] == 0.01)


def test_constant_long_domain_respects_length_cap():
    part = build_partition(equilibrium("constant", {"mu0": 0.01}, 1500.0, 2048))
    assert len(part) > 1
    assert max(b - a for a, b in part.intervals) <= MAX_LENGTH


def test_exponential_interval_length():
    eps = 5e-4
    eq = equilibrium("exponential", {"mu0": 1e-4, "eps": eps}, 8000.0, 4096)
    lengths = [b - a for a, b in build_partition(eq).intervals]
    # the cap binds: ln(50) / (3 eps) ~ 2600 > 1000
    interior = lengths[1:-1]
    assert max(interior) <= MAX_LENGTH
    assert min(interior) >= MAX_LENGTH - 2 * eq.profile.h


def test_steep_profile_rejected():
    eq = equilibrium("exponential", {"mu0": 1e-3, "eps": 2.0}, 4.0, 4096)
    with pytest.raises(PartitionError, match="shorter than 1"):
        build_partition(eq)


def test_norm_equivalence_on_z_grid():
    eq = equilibrium("tanh-blend", {"mu_a": 1e-3, "mu_b": 1e-1, "width": 40.0}, 400.0, 2048)
    part = build_partition(eq)
    lo, hi = eq.z_range
    g = ZGrid(0.4 * (hi - lo), 256, center=0.5 * (hi + lo))
    chi = build_cutoffs(part, g)
    for seed in range(5):
        W = random_field(g, seed, n_bumps=12)
        total = sum(np.sum(np.abs(c * W) ** 2) for c in chi)
        assert abs(total - np.sum(np.abs(W) ** 2)) <= 1e-12 * total


def test_json_dump():
    eq = equilibrium("tanh-blend", {"mu_a": 1e-3, "mu_b": 1e-1, "width": 40.0}, 400.0, 2048)
    d = json.loads(build_partition(eq).to_json())
    assert len(d["intervals"]) == len(d["tripled_ratios"]) == len(d["c2_bounds"])
    assert all(r <= 50 for r in d["tripled_ratios"])
