"""Run configuration: JSON schema, defaults, hashing and initial data."""

import copy
import hashlib
import json
from dataclasses import dataclass

import numpy as np

SCHEMA_VERSION = 1

DEFAULTS = {
    "schema_version": SCHEMA_VERSION,
    "profile": None,            # {"kind", "params", "L_y", "n_points"}
    "sigma": None,              # default: max mu, so that min U' = 1
    "grid": {"L_z": 20.0, "n": 128, "center": 0.0},
    "k": [1],
    "dt": 0.01,
    "T": 10.0,
    "stride": 10,
    "weight_variant": "A",
    "partitioned": False,
    "hn_order": 0,
    "hn_coefficients": None,    # explicit c_l list; default 1 for every l
    "initial": {"type": "gaussian", "center": 0.0, "width": 1.0, "xi0": 0.0},
    "seed": 0,
    "override_admissibility": False,
    "lyapunov_tol": 1e-8,
    "svg": False,
    "fit": {"levels": [0.5, 1e-4]},
    "multiplier_table": {"k": 1, "t": [0.0, 10.0, 101], "xi": [-5.0, 15.0, 101]},
    "sweep": {"parameters": {}},
}

INNER_MASS = 0.9999


class ConfigError(ValueError):
    """Malformed configuration or unreadable input (exit code 3)."""


def _merge(base, over):
    out = copy.deepcopy(base)
    for key, val in over.items():
        if isinstance(val, dict) and isinstance(out.get(key), dict) and key != "params":
            out[key] = _merge(out[key], val)
        else:
            out[key] = copy.deepcopy(val)
    return out


def canonical_json(obj):
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def config_hash(cfg):
    """sha256 of the canonical JSON form of the fully-defaulted config."""
    return hashlib.sha256(canonical_json(cfg).encode()).hexdigest()


def set_path(cfg, dotted, value):
    """Set ``cfg["a"]["b"]`` from ``"a.b"``; used by sweeps."""
    keys = dotted.split(".")
    node = cfg
    for key in keys[:-1]:
        node = node.setdefault(key, {})
    node[keys[-1]] = value


@dataclass(frozen=True)
class RunConfig:
    data: dict

    def __getitem__(self, key):
        return self.data[key]

    @property
    def hash(self):
        return config_hash(self.data)

    def with_values(self, assignments):
        data = copy.deepcopy(self.data)
        for path, val in assignments:
            set_path(data, path, val)
        return from_dict(data)


def from_dict(raw):
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    version = raw.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ConfigError(f"unsupported schema_version {version!r}; expected {SCHEMA_VERSION}")
    unknown = set(raw) - set(DEFAULTS)
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    cfg = _merge(DEFAULTS, raw)
    prof = cfg["profile"]
    if not isinstance(prof, dict) or not {"kind", "params", "L_y", "n_points"} <= set(prof):
        raise ConfigError("profile needs kind, params, L_y and n_points")
    for key in ("dt", "T"):
        if not (isinstance(cfg[key], (int, float)) and cfg[key] > 0):
            raise ConfigError(f"{key} must be positive")
    if not (isinstance(cfg["stride"], int) and cfg["stride"] >= 1):
        raise ConfigError("stride must be a positive integer")
    ks = cfg["k"]
    if not ks or any(not isinstance(k, int) or k == 0 for k in ks):
        raise ConfigError("k must be a non-empty list of nonzero integers")
    if cfg["weight_variant"] not in ("A", "B"):
        raise ConfigError("weight_variant must be 'A' or 'B'")
    if not (isinstance(cfg["hn_order"], int) and 0 <= cfg["hn_order"] <= 4):
        raise ConfigError("hn_order must be an integer in 0..4")
    coeffs = cfg["hn_coefficients"]
    if coeffs is not None and len(coeffs) != cfg["hn_order"] + 1:
        raise ConfigError("hn_coefficients needs hn_order + 1 entries")
    g = cfg["grid"]
    if not (g["L_z"] > 0 and isinstance(g["n"], int) and g["n"] >= 4 and not g["n"] & (g["n"] - 1)):
        raise ConfigError("grid needs L_z > 0 and n a power of two")
    return RunConfig(cfg)


def load(path):
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return from_dict(raw)


# ---------------------------------------------------------------------------
# Initial data
# ---------------------------------------------------------------------------

def gaussian(grid, center=0.0, width=1.0, xi0=0.0):
    return np.exp(-((grid.z - center) / width) ** 2) * np.exp(1j * xi0 * (grid.z - center))


def random_bumps(grid, rng, n_bumps=4, xi_max=2.0):
    """Sum of modulated Gaussians with random complex amplitudes, inside the inner half."""
    W = np.zeros(grid.n, dtype=complex)
    scale = grid.L_z / 12.0
    for _ in range(n_bumps):
        c = grid.center + rng.uniform(-grid.L_z / 4, grid.L_z / 4)
        w = rng.uniform(0.5, 1.0) * scale
        amp = rng.normal() + 1j * rng.normal()
        W += amp * np.exp(-((grid.z - c) / w) ** 2) * np.exp(1j * rng.uniform(-xi_max, xi_max) * (grid.z - c))
    return W


def inner_fraction(grid, W):
    inner = np.abs(grid.z - grid.center) <= 0.5 * grid.L_z
    total = np.sum(np.abs(W) ** 2)
    return float(np.sum(np.abs(W[inner]) ** 2) / total) if total else 1.0


def initial_data(cfg, grid, k):
    """Build ``W(0)`` for mode ``k``; random data is seeded by ``(seed, k)``."""
    from .dynamics import load_checkpoint
    spec = cfg["initial"]
    kind = spec.get("type")
    if kind == "gaussian":
        W = gaussian(grid, grid.center + spec.get("center", 0.0), spec.get("width", 1.0),
                     spec.get("xi0", 0.0))
    elif kind == "random":
        rng = np.random.default_rng([cfg["seed"], abs(k)])
        W = random_bumps(grid, rng, spec.get("n_bumps", 4), spec.get("xi_max", 2.0))
    elif kind == "file":
        try:
            W = load_checkpoint(spec["path"]).W_hat
        except (OSError, KeyError, ValueError) as exc:
            raise ConfigError(f"cannot load initial data: {exc}") from None
        if W.shape != (grid.n,):
            raise ConfigError("initial data file has the wrong length")
    else:
        raise ConfigError(f"unknown initial type {kind!r}")
    frac = inner_fraction(grid, W)
    if frac < INNER_MASS:
        raise ConfigError(f"initial data has only {frac:.6f} of its L2 mass in the inner half")
    return W
