"""Energy functionals, dissipation functionals and the checks built on them.

All norms are discrete ``L^2(dz)`` norms, ``||f||^2 = h sum |f_i|^2``; with the
unitary DFT the same value is ``h sum |F f|^2`` on the frequency side.
"""

import csv
import io
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import linregress

from .grid import dft
from .multiplier import symbol, weight

LYAPUNOV_CONSTANT = 1e-3
RHO_LADDER = (1.0, 1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6)


# ---------------------------------------------------------------------------
# Functionals
# ---------------------------------------------------------------------------

def l2(grid, W):
    return float(grid.h * np.sum(np.abs(W) ** 2))


def energy_EA(grid, k, t, W, table=None, tables=None, cutoffs=None):
    """``||A W||^2``, or ``sum_j ||A_j chi_j W||^2`` when ``tables``/``cutoffs`` are given."""
    if tables is None:
        return float(grid.h * np.sum((symbol(table, grid, k, t) * np.abs(dft(grid, W))) ** 2))
    total = 0.0
    for tab, chi in zip(tables, cutoffs):
        m = symbol(tab, grid, k, t)
        total += grid.h * np.sum((m * np.abs(dft(grid, chi * W))) ** 2)
    return float(total)


def energy_HN(grid, k, t, W, table, N, coeffs):
    """``E_N = sum_{l <= N} c_l ||A d_z^l W||^2`` (spectral ``d_z``)."""
    if len(coeffs) != N + 1:
        raise ValueError("need N + 1 coefficients")
    m2 = symbol(table, grid, k, t) ** 2
    p = np.abs(dft(grid, W)) ** 2
    xi2 = grid.xi ** 2
    return float(sum(c * grid.h * np.sum(m2 * xi2 ** l * p) for l, c in enumerate(coeffs)))


def hn_terms(grid, k, t, W, table, N):
    """Unweighted ``||A d_z^l W||^2`` for ``l = 0..N``."""
    m2 = symbol(table, grid, k, t) ** 2
    p = np.abs(dft(grid, W)) ** 2
    return [float(grid.h * np.sum(m2 * grid.xi ** (2 * l) * p)) for l in range(N + 1)]


def dissipation_phys(solver, t, W, stream=None):
    """The three physical dissipation norms.

    ``||(mu U'^2)^(1/6) W||^2``, ``||sqrt(mu) U' D W||^2`` and
    ``||sqrt(U') v||^2`` with ``v = (V1, V2)``.
    """
    sp = stream or solver.solve_stream(t, W)
    c, h = solver.c, solver.grid.h
    nu_loc = c.b * c.a ** 2
    d1 = h * np.sum(np.cbrt(nu_loc) * np.abs(W) ** 2)
    d2 = h * np.sum(nu_loc * np.abs(solver.D(t, W)) ** 2)
    d3 = h * np.sum(c.a * (np.abs(sp.V1) ** 2 + np.abs(sp.V2) ** 2))
    return float(d1), float(d2), float(d3)


def dissipation_freq(grid, k, t, W, table, variant):
    """``h sum w(xi) |m F W|^2`` for weight ``variant``."""
    w = weight(table, k, t, grid.xi, variant)
    return float(grid.h * np.sum(w * (symbol(table, grid, k, t) * np.abs(dft(grid, W))) ** 2))


# ---------------------------------------------------------------------------
# Trace
# ---------------------------------------------------------------------------

@dataclass
class EnergyTrace:
    """Samples of every functional along one mode trajectory."""

    k: int
    hn_order: int = 0
    n_local: int = 0
    rows: list = field(default_factory=list)

    def columns(self):
        cols = ["t", "L2", "EA", "EA_single"]
        cols += [f"HN{l}" for l in range(self.hn_order + 1)]
        cols += ["D_mass", "D_grad", "D_vel", "Dfreq_A", "Dfreq_B"]
        cols += [f"Eloc{j}" for j in range(self.n_local)]
        cols += ["stream_residual", "grad_phi", "grad_psi"]
        return cols

    def append(self, row):
        self.rows.append(row)

    def __len__(self):
        return len(self.rows)

    def __getitem__(self, name):
        return np.array([r[name] for r in self.rows], dtype=float)

    @property
    def times(self):
        return self["t"]

    def eloc(self):
        return np.array([[r[f"Eloc{j}"] for j in range(self.n_local)] for r in self.rows])

    def hn(self):
        return np.array([[r[f"HN{l}"] for l in range(self.hn_order + 1)] for r in self.rows])

    def d_phys(self, form="full"):
        """``full``: all three terms; ``reduced``: mass and velocity terms only."""
        if form == "full":
            return self["D_mass"] + self["D_grad"] + self["D_vel"]
        if form == "reduced":
            return self["D_mass"] + self["D_vel"]
        raise ValueError(form)

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        cols = self.columns()
        w.writerow(cols)
        for r in self.rows:
            w.writerow([repr(float(r[c])) for c in cols])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text, k=0):
        reader = csv.DictReader(io.StringIO(text))
        rows = [{key: float(v) for key, v in row.items()} for row in reader]
        cols = reader.fieldnames
        hn = sum(c.startswith("HN") for c in cols) - 1
        nloc = sum(c.startswith("Eloc") for c in cols)
        return cls(k, hn, nloc, rows)


class Recorder:
    """Evaluates every functional on a state and appends a trace row.

    ``tables``/``cutoffs`` switch ``EA`` to the partitioned energy; the
    single-table energy is always recorded as ``EA_single``.
    """

    def __init__(self, solver, table, hn_order=0, tables=None, cutoffs=None):
        self.solver = solver
        self.table = table
        self.tables = tables
        self.cutoffs = cutoffs
        n_local = 0 if cutoffs is None else len(cutoffs)
        self.trace = EnergyTrace(solver.k, hn_order, n_local)

    def __call__(self, state):
        s, g, k, t, W = self.solver, self.solver.grid, self.solver.k, state.t, state.W_hat
        sp = s.solve_stream(t, W)
        ea1 = energy_EA(g, k, t, W, self.table)
        row = {"t": t, "L2": l2(g, W), "EA_single": ea1}
        row["EA"] = ea1 if self.tables is None else energy_EA(
            g, k, t, W, tables=self.tables, cutoffs=self.cutoffs)
        for l, v in enumerate(hn_terms(g, k, t, W, self.table, self.trace.hn_order)):
            row[f"HN{l}"] = v
        row["D_mass"], row["D_grad"], row["D_vel"] = dissipation_phys(s, t, W, sp)
        row["Dfreq_A"] = dissipation_freq(g, k, t, W, self.table, "A")
        row["Dfreq_B"] = dissipation_freq(g, k, t, W, self.table, "B")
        if self.cutoffs is not None:
            for j, chi in enumerate(self.cutoffs):
                row[f"Eloc{j}"] = l2(g, chi * W)
        row["stream_residual"] = sp.residual
        row["grad_phi"], row["grad_psi"] = sp.grad_phi, sp.grad_psi
        self.trace.append(row)


# ---------------------------------------------------------------------------
# Checks
# ---------------------------------------------------------------------------

def centered_derivative(times, values):
    """Centered differences at interior samples (non-uniform spacing allowed)."""
    t, v = np.asarray(times, float), np.asarray(values, float)
    return (v[2:] - v[:-2]) / (t[2:] - t[:-2])


def check_lyapunov(trace, tol=1e-8, constant=LYAPUNOV_CONSTANT, form="full", energy="EA"):
    """Compare ``d(EA)/dt`` with ``-constant * D_phys`` at interior samples.

    The allowed slack is ``tol * EA(0)``. Violations are reported, not raised.
    """
    if len(trace) < 3:
        return {"passed": True, "n_checked": 0, "max_violation": 0.0, "t_max": None, "form": form}
    t = trace.times
    ea = trace[energy]
    d = centered_derivative(t, ea)
    bound = -constant * trace.d_phys(form)[1:-1]
    excess = d - bound
    slack = tol * ea[0]
    i = int(np.argmax(excess))
    return {"passed": bool(excess[i] <= slack), "n_checked": int(excess.size),
            "max_violation": float(excess[i]), "relative": float(excess[i] / ea[0]) if ea[0] else 0.0,
            "t_max": float(t[1:-1][i]), "slack": float(slack), "form": form,
            "n_violations": int(np.sum(excess > slack))}


def check_monotone(times, values, tol=1e-8):
    v = np.asarray(values, float)
    inc = np.diff(v)
    slack = tol * v[0]
    i = int(np.argmax(inc)) if inc.size else 0
    worst = float(inc[i]) if inc.size else 0.0
    return {"passed": bool(worst <= slack), "max_increase": worst, "slack": float(slack),
            "t_max": float(np.asarray(times)[i + 1]) if inc.size else None}


def calibrate_coefficients(hn_series, N, tol=1e-8, ladder=RHO_LADDER):
    """Largest ``rho`` on the ladder making ``sum_l rho^l T_l(t)`` nonincreasing.

    ``hn_series`` holds the unweighted terms ``||A d_z^l W||^2`` per sample.
    """
    terms = np.asarray(hn_series, float)[:, :N + 1]
    for rho in ladder:
        c = rho ** np.arange(N + 1)
        E = terms @ c
        inc = np.diff(E)
        if inc.size == 0 or inc.max() <= tol * E[0]:
            return {"found": True, "rho": rho, "coefficients": c.tolist()}
    # report the term whose growth dominates the worst step of the smallest rho
    c = ladder[-1] ** np.arange(N + 1)
    i = int(np.argmax(np.diff(terms @ c)))
    growth = (terms[i + 1] - terms[i]) * c
    return {"found": False, "rho": None, "coefficients": None,
            "violating_term": int(np.argmax(growth))}


def find_coefficients(run_calibration, N, tol=1e-8, ladder=RHO_LADDER):
    """Search ``c_l = rho^l`` on a calibration run.

    ``run_calibration()`` must return an array of unweighted H^N terms
    (samples x (N+1)); see ``hn_terms``.
    """
    if N == 0:
        return {"found": True, "rho": 1.0, "coefficients": [1.0]}
    return calibrate_coefficients(run_calibration(), N, tol, ladder)


def fit_rate(times, values, window=None, levels=None):
    """Least-squares decay rate ``-d log(values)/dt``.

    Parameters
    ----------
    window : (t_start, t_end), optional
        Restrict to samples in this time range.
    levels : (upper, lower), optional
        Restrict to samples with ``lower <= values / values[0] <= upper``.

    Returns
    -------
    (rate, r_squared)
    """
    t, v = np.asarray(times, float), np.asarray(values, float)
    sel = np.ones(t.size, bool)
    if window is not None:
        sel &= (t >= window[0]) & (t <= window[1])
    if levels is not None:
        rel = v / v[0]
        sel &= (rel <= levels[0]) & (rel >= levels[1])
    t, v = t[sel], v[sel]
    if t.size < 2:
        raise ValueError("fewer than two samples in the fit window")
    if np.any(v <= 0):
        raise ValueError("non-positive energy in the fit window")
    logv = np.log(v)
    if np.ptp(logv) == 0:
        return 0.0, 1.0
    fit = linregress(t, logv)
    return float(-fit.slope), float(fit.rvalue ** 2)


def localized_windows(mask):
    """Maximal runs of True as (start, stop) index pairs, stop inclusive."""
    out, start = [], None
    for i, flag in enumerate(mask):
        if flag and start is None:
            start = i
        elif not flag and start is not None:
            out.append((start, i - 1))
            start = None
    if start is not None:
        out.append((start, len(mask) - 1))
    return out


def check_localized_decay(times, L2, E_M, rate_M, theta, constant=LYAPUNOV_CONSTANT):
    """Decay bound on windows where the energy is ``theta``-localized in ``M``.

    On each maximal window ``[t1, t2]`` with ``E_M >= theta L2`` it asserts
    ``L2(t) <= exp(-constant theta rate_M (t - t1)) L2(t1)``. ``rate_M`` is the
    minimum of ``(mu U'^2)^(1/3)`` over ``M``.
    """
    t, L2, E_M = (np.asarray(v, float) for v in (times, L2, E_M))
    mask = E_M >= theta * L2 * (1 - 1e-14)
    windows = []
    for a, b in localized_windows(mask):
        bound = np.exp(-constant * theta * rate_M * (t[a:b + 1] - t[a])) * L2[a]
        with np.errstate(divide="ignore"):
            margin = np.log(bound) - np.log(L2[a:b + 1])
        windows.append({"t_start": float(t[a]), "t_end": float(t[b]), "n": int(b - a + 1),
                        "passed": bool(np.all(L2[a:b + 1] <= bound)),
                        "min_log_margin": float(margin.min())})
    return {"passed": all(w["passed"] for w in windows), "theta": theta,
            "rate_M": rate_M, "windows": windows}


def min_rate_on(eq, intervals):
    """``min (mu U'^2)^(1/3)`` over the union of y-intervals."""
    from .profiles import local_rates
    _, rate = local_rates(eq)
    sel = np.zeros(eq.y.size, bool)
    for a, b in intervals:
        sel |= (eq.y >= a) & (eq.y <= b)
    return float(rate[sel].min())


# ---------------------------------------------------------------------------
# Plot
# ---------------------------------------------------------------------------

def plot_trace_svg(trace, path, title=""):
    """Log-energy plot; byte-identical output for identical traces."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    with matplotlib.rc_context({"svg.hashsalt": "vardiss", "svg.fonttype": "none"}):
        fig, ax = plt.subplots(figsize=(6, 4))
        t = trace.times
        for name in ("L2", "EA"):
            v = trace[name]
            ax.semilogy(t, np.where(v > 0, v, np.nan), label=name)
        ax.set_xlabel("t")
        ax.set_ylabel("energy")
        if title:
            ax.set_title(title)
        ax.legend()
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)
