"""Interval partition with bounded viscosity ratio, smooth partition of unity
``sum_j chi_j^2 = 1`` and per-interval constant extensions of ``mu``.

Intervals ``I_j`` are grown greedily outwards from ``y = 0``. Each is maximal
subject to ``sup mu / inf mu <= 50`` on the tripled interval ``3I_j`` (clipped
to the domain) and ``|I_j| <= 1000``.
"""

import json
from dataclasses import dataclass, field

import numpy as np

from .multiplier import MultiplierTable

MAX_RATIO = 50.0
MAX_LENGTH = 1000.0
MIN_LENGTH = 1.0
MAX_EXTENSION_RATIO = 100.0


class PartitionError(ValueError):
    """An interval shorter than 1 was forced (viscosity varies too fast)."""


def tripled_ratio(y, mu, ia, ib):
    """``sup mu / inf mu`` over grid nodes in ``3I`` for ``I = [y[ia], y[ib]]``."""
    length = y[ib] - y[ia]
    sel = (y >= y[ia] - length - 1e-12) & (y <= y[ib] + length + 1e-12)
    m = mu[sel]
    return float(m.max() / m.min())


def _admissible(y, mu, ia, ib):
    return (y[ib] - y[ia] <= MAX_LENGTH + 1e-9
            and tripled_ratio(y, mu, ia, ib) <= MAX_RATIO)


def _grow(y, mu, anchor, direction):
    """Farthest node index from ``anchor`` keeping the interval admissible.

    Admissibility is monotone in the free endpoint (both ``3I`` and the length
    only grow), so bisection finds the maximal endpoint.
    """
    last = len(y) - 1 if direction > 0 else 0

    def ok(j):
        lo, hi = (anchor, j) if direction > 0 else (j, anchor)
        return _admissible(y, mu, lo, hi)

    good, bad = anchor, None
    if ok(last):
        return last
    bad = last
    while abs(bad - good) > 1:
        mid = (good + bad) // 2
        if ok(mid):
            good = mid
        else:
            bad = mid
    return good


def _smoothstep(x):
    """C-infinity step: 0 for x <= 0, 1 for x >= 1."""
    x = np.clip(np.asarray(x, dtype=float), 0.0, 1.0)
    with np.errstate(divide="ignore"):
        f = np.where(x > 0, np.exp(-1.0 / np.where(x > 0, x, 1.0)), 0.0)
        g = np.where(x < 1, np.exp(-1.0 / np.where(x < 1, 1.0 - x, 1.0)), 0.0)
    return f / (f + g)


@dataclass
class Partition:
    """Intervals ``I_j = [y_a, y_b]`` with cutoffs and extensions on the y-grid."""

    eq: object = field(repr=False)
    index_pairs: list
    intervals: list = field(default_factory=list)
    collars: list = field(default_factory=list)
    cutoffs: np.ndarray = field(default=None, repr=False)
    extensions: list = field(default_factory=list, repr=False)

    def __len__(self):
        return len(self.intervals)

    # -- cutoffs ----------------------------------------------------------

    def bumps(self, y):
        """Raw bumps ``b_j``: 1 on ``I_j``, smooth collars reaching into the neighbours."""
        y = np.asarray(y, dtype=float)
        out = np.zeros((len(self), y.size))
        for j, (ya, yb) in enumerate(self.intervals):
            dl, dr = self.collars[j], self.collars[j + 1]
            b = np.ones_like(y)
            if dl > 0:
                b *= _smoothstep((y - (ya - dl)) / dl)
            else:
                b *= y >= ya - 1e-12
            if dr > 0:
                b *= _smoothstep(((yb + dr) - y) / dr)
            else:
                b *= y <= yb + 1e-12
            out[j] = b
        return out

    def chi(self, y):
        b = self.bumps(y)
        norm = np.sqrt(np.sum(b * b, axis=0))
        return b / np.where(norm > 0, norm, 1.0)

    def cutoffs_on(self, grid):
        """``chi_j`` sampled at the z-grid nodes (through ``y = U^-1(z)``)."""
        return self.chi(self.eq.y_at(grid.z))

    # -- extensions -------------------------------------------------------

    def extension_values(self, j, y):
        ya, yb = self.intervals[j]
        mu, _, _ = self.eq.profile.evaluate(y)
        mu_a = float(self.eq.profile.evaluate(ya)[0])
        mu_b = float(self.eq.profile.evaluate(yb)[0])
        c2 = self.chi(y)[j] ** 2
        left, right = y < ya, y > yb
        return np.where(left, mu_a * (1 - c2) + mu * c2,
                        np.where(right, mu_b * (1 - c2) + mu * c2, mu))

    def tables(self):
        return [MultiplierTable(e["nu"], e["u"]) for e in self.extensions]

    def tripled_ratios(self):
        y, mu = self.eq.y, self.eq.profile.mu
        return [tripled_ratio(y, mu, ia, ib) for ia, ib in self.index_pairs]

    def c2_bounds(self):
        """Discrete ``max |chi| + max |chi'| + max |chi''|`` per cutoff (fine sampling)."""
        lo, hi = self.eq.y[0], self.eq.y[-1]
        ys = np.linspace(lo, hi, 20 * len(self.eq.y) + 1)
        chi = self.chi(ys)
        dy = ys[1] - ys[0]
        d1 = np.gradient(chi, dy, axis=1)
        d2 = np.gradient(d1, dy, axis=1)
        return [float(np.max(np.abs(c)) + np.max(np.abs(p)) + np.max(np.abs(q)))
                for c, p, q in zip(chi, d1, d2)]

    def to_dict(self):
        return {
            "intervals": [[float(a), float(b)] for a, b in self.intervals],
            "lengths": [float(b - a) for a, b in self.intervals],
            "tripled_ratios": self.tripled_ratios(),
            "extension_ratios": [e["ratio"] for e in self.extensions],
            "nu": [e["nu"] for e in self.extensions],
            "u": [e["u"] for e in self.extensions],
            "c2_bounds": self.c2_bounds(),
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def greedy_endpoints(y, mu):
    """Node-index pairs of the greedy tiling (before remnant merging)."""
    n = len(y)
    i0 = int(np.argmin(np.abs(y)))
    right = []
    a = i0
    while a < n - 1:
        b = _grow(y, mu, a, +1)
        if b == a:
            b = a + 1
        right.append((a, b))
        a = b
    left = []
    b = i0
    while b > 0:
        a = _grow(y, mu, b, -1)
        if a == b:
            a = b - 1
        left.append((a, b))
        b = a
    return left[::-1] + right, len(left)


def build_partition(eq):
    """Greedy partition of the truncated domain, plus cutoffs and extensions.

    Raises
    ------
    PartitionError
        If an interior interval is shorter than 1, or an edge remnant shorter
        than 1 cannot be merged into its neighbour.
    """
    y, mu = eq.y, eq.profile.mu
    pairs, n_left = greedy_endpoints(y, mu)
    # the two intervals meeting at y = 0 are artefacts of the two-sided sweep
    if 0 < n_left < len(pairs):
        merged = (pairs[n_left - 1][0], pairs[n_left][1])
        if _admissible(y, mu, *merged):
            pairs[n_left - 1:n_left + 1] = [merged]
    # short pieces at the truncation edges
    for edge in (0, -1):
        if len(pairs) > 1:
            ia, ib = pairs[edge]
            if y[ib] - y[ia] < MIN_LENGTH:
                nb = pairs[1] if edge == 0 else pairs[-2]
                merged = (ia, nb[1]) if edge == 0 else (nb[0], ib)
                if not _admissible(y, mu, *merged):
                    raise PartitionError(
                        f"edge interval [{y[ia]:g}, {y[ib]:g}] shorter than 1 and cannot be merged")
                if edge == 0:
                    pairs[0:2] = [merged]
                else:
                    pairs[-2:] = [merged]
    for ia, ib in pairs[1:-1] if len(pairs) > 2 else []:
        if y[ib] - y[ia] < MIN_LENGTH:
            raise PartitionError(
                f"interval [{y[ia]:g}, {y[ib]:g}] shorter than 1: viscosity ratio 50 is "
                "reached too quickly; the profile does not vary gradually")
    part = Partition(eq, pairs, [(float(y[a]), float(y[b])) for a, b in pairs])
    lengths = [b - a for a, b in part.intervals]
    part.collars = [0.0] + [min(l1, l2) / 3.0 for l1, l2 in zip(lengths, lengths[1:])] + [0.0]
    part.cutoffs = part.chi(y)
    for j in range(len(part)):
        part.extensions.append(extend_profile(eq, part, j))
    return part


def build_cutoffs(partition, grid=None):
    """``chi_j`` on the y-grid, or on the nodes of a z-grid when given."""
    if grid is None:
        return partition.cutoffs
    return partition.cutoffs_on(grid)


def extend_profile(eq, partition, j):
    """Constant-outside extension ``mu_j`` with ``U_j' = sigma / mu_j``.

    Returns a dict with arrays ``mu`` and ``Up`` on the y-grid and the scalars
    ``nu = inf mu_j U_j'^2``, ``u = inf U_j'`` and the max/min ratio.
    """
    if not 0 <= j < len(partition):
        raise IndexError(j)
    mu_j = partition.extension_values(j, eq.y)
    ratio = float(mu_j.max() / mu_j.min())
    if ratio > MAX_EXTENSION_RATIO:
        raise PartitionError(f"extension {j} has ratio {ratio:g} > {MAX_EXTENSION_RATIO:g}")
    sigma = eq.sigma
    Up = sigma / mu_j
    return {"mu": mu_j, "Up": Up, "sigma": sigma,
            "nu": float(np.min(mu_j * Up * Up)), "u": float(np.min(Up)), "ratio": ratio}
