"""Data ingestion and the bundled/synthetic datasets used by the CLI.

Raw CSV data is affinely rescaled into the open unit domain (endpoints
padded by delta so rescaled extremes never sit exactly on the
boundary); the map is stored on the Dataset for inverse transforms.
Synthetic generators already produce unit-domain points and carry the
identity map so fitted densities compare directly against the
generating ones.
"""

from __future__ import annotations

import math
from importlib import resources

import numpy as np

from .errors import ConfigError, DataError
from .hmc import make_rng
from .model import Dataset

ENDPOINT_PADDING = 1e-6

GENERATOR_NAMES = ("beta", "trunc_gauss_mixture_2d", "noisy_circle_2d")

# Representative two-bump mixture for the 2D demo recipe.
DEFAULT_MIXTURE = {
    "components": [
        {"mean": [0.3, 0.35], "sd": [0.12, 0.10], "weight": 0.45},
        {"mean": [0.72, 0.7], "sd": [0.10, 0.14], "weight": 0.4},
        {"mean": [0.5, 0.5], "sd": [0.3, 0.05], "weight": 0.15},
    ]
}


def _parse_rows(path, dim: int):
    rows = []
    with open(path, "r", encoding="utf-8") as handle:
        raw_lines = [
            (lineno, line.strip())
            for lineno, line in enumerate(handle, start=1)
            if line.strip() and not line.lstrip().startswith("#")
        ]
    if not raw_lines:
        raise DataError(f"{path}: no data rows")
    start = 0
    first_cells = raw_lines[0][1].split(",")
    try:
        [float(c) for c in first_cells]
    except ValueError:
        start = 1  # header row
    for lineno, line in raw_lines[start:]:
        cells = [c.strip() for c in line.split(",")]
        if len(cells) != dim:
            raise DataError(f"{path}:{lineno}: expected {dim} columns, got {len(cells)}")
        row = []
        for col, cell in enumerate(cells):
            try:
                row.append(float(cell))
            except ValueError:
                raise DataError(f"{path}:{lineno}: column {col}: non-numeric value {cell!r}") from None
        rows.append(row)
    return np.asarray(rows, dtype=float)


def ingest_csv(path, dim: int) -> Dataset:
    """Load raw points from CSV and rescale them into the unit domain.

    The header row is auto-detected (any non-numeric cell); '#' lines
    are comments. Each axis maps [min, max] onto
    [delta, 1 - delta] with delta = 1e-6.
    """
    raw = _parse_rows(path, dim)
    if raw.shape[0] < 2:
        raise DataError(f"{path}: need at least 2 points, got {raw.shape[0]}")
    lo = raw.min(axis=0)
    hi = raw.max(axis=0)
    if np.any(hi <= lo):
        axis = int(np.argmax(hi <= lo))
        raise DataError(f"{path}: axis {axis} has zero spread ({lo[axis]})")
    scale = (hi - lo) / (1.0 - 2.0 * ENDPOINT_PADDING)
    offset = lo - scale * ENDPOINT_PADDING
    unit = (raw - offset) / scale
    return Dataset(
        points=unit,
        offset=offset,
        scale=scale,
        raw_bounds=np.column_stack([lo, hi]),
    )


def generate_synthetic(name: str, params: dict | None, n: int, seed: int) -> Dataset:
    """Draw n points from a named synthetic distribution on the unit domain."""
    if name not in GENERATOR_NAMES:
        raise ConfigError(f"unknown generator {name!r}; choose from {GENERATOR_NAMES}")
    if n < 1:
        raise ConfigError(f"sample count must be >= 1, got {n}")
    params = dict(params or {})
    rng = make_rng(seed)
    if name == "beta":
        points = _gen_beta(params, n, rng)
    elif name == "trunc_gauss_mixture_2d":
        points = _gen_mixture(params, n, rng)
    else:
        points = _gen_noisy_circle(params, n, rng)
    return Dataset.from_unit(points, dim=points.shape[1])


def _gen_beta(params: dict, n: int, rng) -> np.ndarray:
    a = float(params.pop("a", 2.0))
    b = float(params.pop("b", 2.0))
    _reject_extras("beta", params)
    if a <= 0 or b <= 0:
        raise ConfigError(f"beta parameters must be positive, got ({a}, {b})")
    return rng.beta(a, b, size=n).reshape(-1, 1)


def _gen_mixture(params: dict, n: int, rng) -> np.ndarray:
    components = params.pop("components", DEFAULT_MIXTURE["components"])
    _reject_extras("trunc_gauss_mixture_2d", params)
    means, sds, weights = [], [], []
    for comp in components:
        mean = np.asarray(comp["mean"], dtype=float)
        sd = np.broadcast_to(np.asarray(comp.get("sd", 0.1), dtype=float), (2,)).copy()
        if mean.shape != (2,):
            raise ConfigError(f"component mean must have 2 entries, got {comp['mean']}")
        if np.any(sd <= 0) or comp.get("weight", 1.0) <= 0:
            raise ConfigError(f"component sd and weight must be positive: {comp}")
        means.append(mean)
        sds.append(sd)
        weights.append(float(comp.get("weight", 1.0)))
    means = np.asarray(means)
    sds = np.asarray(sds)
    weights = np.asarray(weights) / np.sum(weights)

    out = np.empty((n, 2))
    got = 0
    while got < n:
        batch = max(64, 2 * (n - got))
        comp = rng.choice(len(weights), size=batch, p=weights)
        pts = means[comp] + sds[comp] * rng.standard_normal((batch, 2))
        inside = pts[np.all((pts >= 0.0) & (pts <= 1.0), axis=1)]
        take = min(len(inside), n - got)
        out[got : got + take] = inside[:take]
        got += take
    return out


def _gen_noisy_circle(params: dict, n: int, rng) -> np.ndarray:
    center = np.asarray(params.pop("center", (0.5, 0.5)), dtype=float)
    radius = float(params.pop("radius", 0.3))
    noise = float(params.pop("noise", 0.03))
    _reject_extras("noisy_circle_2d", params)
    if radius <= 0 or noise < 0:
        raise ConfigError(f"radius must be > 0 and noise >= 0, got ({radius}, {noise})")
    out = np.empty((n, 2))
    got = 0
    while got < n:
        batch = max(64, 2 * (n - got))
        theta = rng.uniform(0.0, 2.0 * math.pi, size=batch)
        r = radius + noise * rng.standard_normal(batch)
        pts = center + np.column_stack([r * np.cos(theta), r * np.sin(theta)])
        inside = pts[np.all((pts >= 0.0) & (pts <= 1.0), axis=1)]
        take = min(len(inside), n - got)
        out[got : got + take] = inside[:take]
        got += take
    return out


def _reject_extras(name: str, leftover: dict):
    if leftover:
        raise ConfigError(f"unknown parameters for generator {name!r}: {sorted(leftover)}")


def coal_mine_path() -> str:
    """Path to the bundled coal-mining disaster dates CSV."""
    return str(resources.files("densphere").joinpath("data/coal_mine_disasters.csv"))


def resolve_data_path(spec: str) -> str:
    """Map the 'coalmine' alias to the bundled CSV; anything else is a path."""
    if spec == "coalmine":
        return coal_mine_path()
    return spec
