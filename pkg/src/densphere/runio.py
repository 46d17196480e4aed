"""On-disk formats for runs: chain CSV, summary CSVs, and the manifest.

Floats are written with repr precision so a chain round-trips exactly
and identical configurations produce byte-identical files on the same
platform.
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import asdict

import numpy as np

from .basis import BasisSpec
from .errors import DataError
from .hmc import Chain, ChainConfig

ARTIFACT_VERSION = "0.1.0"


def _fmt(x: float) -> str:
    return np.format_float_positional(x, unique=True, trim="0")


def config_hash(config: dict) -> str:
    canonical = json.dumps(config, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def write_chain_csv(path, chain: Chain):
    """One row per stored draw: iteration, log-posterior, coefficients."""
    b = chain.draws.shape[1]
    header = "iteration,log_posterior," + ",".join(f"c{j}" for j in range(b))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(header + "\n")
        for it, lp, row in zip(chain.iteration_index, chain.log_post_draws, chain.draws):
            fh.write(f"{it},{_fmt(lp)}," + ",".join(_fmt(v) for v in row) + "\n")


def read_chain_csv(path):
    """Returns (iteration_index, log_posteriors, draws)."""
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
        if header[:2] != ["iteration", "log_posterior"]:
            raise DataError(f"{path}: not a chain CSV (header {header[:2]})")
        data = np.loadtxt(fh, delimiter=",", ndmin=2)
    if data.size == 0:
        raise DataError(f"{path}: chain CSV has no draws")
    return data[:, 0].astype(int), data[:, 1], data[:, 2:]


def write_table_csv(path, columns: dict):
    """Write named columns of equal length as CSV."""
    names = list(columns)
    arrays = [np.asarray(columns[name]) for name in names]
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(names) + "\n")
        for row in zip(*arrays):
            fh.write(",".join(_fmt(float(v)) for v in row) + "\n")


def write_manifest(path, *, config: dict, chain: Chain | None = None,
                   dataset=None, extra: dict | None = None, outputs=None):
    manifest = {
        "artifact_version": ARTIFACT_VERSION,
        "config": config,
        "config_hash": config_hash(config),
        "seed": config.get("seed"),
    }
    if chain is not None:
        manifest["chain"] = {
            "accept_rate": chain.accept_rate,
            "n_draws": int(chain.n_draws),
            "newton_init": chain.newton_init,
            "wall_time_s": chain.wall_time,
            "config": asdict(chain.config),
        }
        manifest["basis"] = json.loads(chain.basis.to_json())
    if dataset is not None:
        manifest["dataset"] = {
            "n": int(dataset.n),
            "dim": int(dataset.dim),
            "offset": dataset.offset.tolist(),
            "scale": dataset.scale.tolist(),
            "raw_bounds": dataset.raw_bounds.tolist(),
        }
    if extra:
        manifest.update(extra)
    if outputs is not None:
        manifest["outputs"] = sorted(os.path.basename(p) for p in outputs)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_manifest(path) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def load_run(run_dir):
    """Load (manifest, basis, chain) from a fit output directory."""
    manifest = read_manifest(os.path.join(run_dir, "manifest.json"))
    basis = BasisSpec.from_json(json.dumps(manifest["basis"]))
    iters, lps, draws = read_chain_csv(os.path.join(run_dir, "chain.csv"))
    cfg = manifest["chain"]["config"]
    chain = Chain(
        draws=draws,
        iteration_index=iters,
        log_post_draws=lps,
        log_post_trace=np.array([]),
        accept_rate=manifest["chain"]["accept_rate"],
        basis=basis,
        config=ChainConfig(**cfg),
        newton_init=manifest["chain"]["newton_init"],
        wall_time=manifest["chain"]["wall_time_s"],
    )
    return manifest, basis, chain
