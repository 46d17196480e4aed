"""Command-line driver: fit, summarize, predict, cox, verify, generate.

Configuration lives in a single flat JSON document; individual CLI
flags override individual keys. Every run directory receives the
delimited outputs, rendered figures (unless disabled), and a manifest
naming the config hash, seed, and artifact version.

Exit codes: 0 success, 1 usage, 2 numeric failure, 3 I/O.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import figures
from .basis import BasisSpec, MaternHyper, gram_matrix, quadrature_grid
from .cox import GammaPrior, intensity_draws, mass_posterior
from .datasets import GENERATOR_NAMES, generate_synthetic, ingest_csv, resolve_data_path
from .errors import ConfigError, DataError, DensphereError
from .fisher import (
    DensityFunction,
    TangentFunction,
    convergence_table,
    isometry_residual,
)
from .hmc import Chain, ChainConfig, make_rng, run_chain
from .model import Dataset
from .runio import (
    ARTIFACT_VERSION,
    config_hash,
    load_run,
    write_chain_csv,
    write_manifest,
    write_table_csv,
)
from .summarize import (
    DEFAULT_QUANTILES,
    density_values,
    pointwise_summary,
    predictive_sample,
    summarize_chain,
    unit_grid,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NUMERIC = 2
EXIT_IO = 3

OUTPUT_ROOT_ENV = "DENSPHERE_OUT"

DEFAULTS = {
    "data": None,
    "generator": None,
    "gen_params": {},
    "n": 1000,
    "dim": 1,
    "sigma": 0.5,
    "alpha": 0.5,
    "s": 0.8,
    "max_index": 30,
    "step_size": 0.01,
    "leapfrog_steps": 20,
    "iterations": 15000,
    "burn_in": 5000,
    "thin": 1,
    "chains": 1,
    "seed": 0,
    "threads": 1,
    "grid_resolution": None,
    "quantiles": list(DEFAULT_QUANTILES),
    "count": 1000,
    "cox_a": 1.0,
    "cox_b": 1.0,
    "figures": True,
    "ambient_dim": 512,
    "truncations": [10, 20, 40, 80],
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise _UsageError(message)


class _UsageError(Exception):
    pass


def _build_parser() -> _Parser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file; flags override its keys")
    common.add_argument("--seed", type=int)
    common.add_argument("--out", help=f"output root (default ${OUTPUT_ROOT_ENV} or ./runs)")
    common.add_argument("--label", help="run directory name (default: subcommand + config hash)")
    common.add_argument("--threads", type=int)
    common.add_argument("--no-figures", dest="figures", action="store_false", default=None)

    datagen = argparse.ArgumentParser(add_help=False)
    datagen.add_argument("--data", help="CSV path or the 'coalmine' alias")
    datagen.add_argument("--generator", choices=GENERATOR_NAMES)
    datagen.add_argument("--gen-params", dest="gen_params", help="generator parameters as JSON")
    datagen.add_argument("--n", type=int, help="synthetic sample size")
    datagen.add_argument("--dim", type=int, choices=(1, 2))

    grid = argparse.ArgumentParser(add_help=False)
    grid.add_argument("--grid-resolution", dest="grid_resolution", type=int)
    grid.add_argument("--quantiles", help="comma-separated quantile levels")

    parser = _Parser(prog="densphere", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    fit = sub.add_parser("fit", parents=[common, datagen, grid], help="run the sampler end to end")
    fit.add_argument("--sigma", type=float)
    fit.add_argument("--alpha", type=float)
    fit.add_argument("--s", type=float)
    fit.add_argument("--max-index", dest="max_index", type=int)
    fit.add_argument("--step-size", dest="step_size", type=float)
    fit.add_argument("--leapfrog-steps", dest="leapfrog_steps", type=int)
    fit.add_argument("--iterations", type=int)
    fit.add_argument("--burn-in", dest="burn_in", type=int)
    fit.add_argument("--thin", type=int)
    fit.add_argument("--chains", type=int)

    summarize = sub.add_parser("summarize", parents=[common, grid], help="re-summarize a saved chain")
    summarize.add_argument("--run", required=True, help="fit output directory")

    predict = sub.add_parser("predict", parents=[common], help="posterior-predictive samples")
    predict.add_argument("--run", required=True)
    predict.add_argument("--count", type=int)

    cox = sub.add_parser("cox", parents=[common, grid], help="Cox-process intensity from a saved chain")
    cox.add_argument("--run", required=True)
    cox.add_argument("--cox-a", dest="cox_a", type=float, help="Gamma prior shape")
    cox.add_argument("--cox-b", dest="cox_b", type=float, help="Gamma prior rate")

    verify = sub.add_parser("verify", parents=[common], help="run the numeric verification suite")
    verify.add_argument("--ambient-dim", dest="ambient_dim", type=int)
    verify.add_argument("--truncations", help="comma-separated truncation sizes")

    sub.add_parser("generate", parents=[common, datagen], help="write a synthetic dataset CSV")
    return parser


def _merge_config(args: argparse.Namespace) -> dict:
    cfg = dict(DEFAULTS)
    path = getattr(args, "config", None)
    if path:
        with open(path, "r", encoding="utf-8") as fh:
            file_cfg = json.load(fh)
        unknown = set(file_cfg) - set(DEFAULTS)
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        cfg.update(file_cfg)
    for key in DEFAULTS:
        value = getattr(args, key, None)
        if value is not None:
            cfg[key] = value
    if isinstance(cfg["gen_params"], str):
        cfg["gen_params"] = json.loads(cfg["gen_params"])
    if isinstance(cfg["quantiles"], str):
        cfg["quantiles"] = [float(v) for v in cfg["quantiles"].split(",") if v]
    if isinstance(cfg["truncations"], str):
        cfg["truncations"] = [int(v) for v in cfg["truncations"].split(",") if v]
    if not cfg["quantiles"]:
        raise ConfigError("quantile list must not be empty")
    if cfg["data"] is not None:
        resolved = resolve_data_path(cfg["data"])
        if not os.path.exists(resolved):
            raise DataError(f"data file not found: {resolved}")
    return cfg


def _run_dir(args, cfg: dict, command: str) -> str:
    root = getattr(args, "out", None) or os.environ.get(OUTPUT_ROOT_ENV) or "runs"
    label = getattr(args, "label", None) or f"{command}-{config_hash(cfg)[:8]}"
    path = os.path.join(root, label)
    figures.ensure_dir(path)
    return path


def _load_dataset(cfg: dict) -> Dataset:
    if cfg["data"] is not None:
        return ingest_csv(resolve_data_path(cfg["data"]), cfg["dim"])
    if cfg["generator"] is not None:
        return generate_synthetic(cfg["generator"], cfg["gen_params"], cfg["n"], cfg["seed"])
    raise ConfigError("either --data or --generator is required")


def _basis(cfg: dict) -> BasisSpec:
    hyper = MaternHyper(cfg["sigma"], cfg["alpha"], cfg["s"], cfg["dim"])
    return BasisSpec.build(hyper, cfg["max_index"])


def _chain_worker(payload):
    basis_json, points, offset, scale, raw_bounds, cfg_kwargs = payload
    basis = BasisSpec.from_json(basis_json)
    data = Dataset(points=points, offset=offset, scale=scale, raw_bounds=raw_bounds)
    return run_chain(data, basis, ChainConfig(**cfg_kwargs))


def _run_chains(data: Dataset, basis: BasisSpec, cfg: dict) -> list[Chain]:
    configs = [
        dict(
            iterations=cfg["iterations"],
            burn_in=cfg["burn_in"],
            step_size=cfg["step_size"],
            leapfrog_steps=cfg["leapfrog_steps"],
            thin=cfg["thin"],
            seed=cfg["seed"] + k,
        )
        for k in range(cfg["chains"])
    ]
    if cfg["threads"] > 1 and cfg["chains"] > 1:
        payloads = [
            (basis.to_json(), data.points, data.offset, data.scale, data.raw_bounds, ck)
            for ck in configs
        ]
        with ProcessPoolExecutor(max_workers=min(cfg["threads"], cfg["chains"])) as pool:
            return list(pool.map(_chain_worker, payloads))
    return [run_chain(data, basis, ChainConfig(**ck)) for ck in configs]


def _pooled_draws(chains: list[Chain]) -> Chain:
    first = chains[0]
    if len(chains) == 1:
        return first
    return Chain(
        draws=np.vstack([c.draws for c in chains]),
        iteration_index=np.concatenate([c.iteration_index for c in chains]),
        log_post_draws=np.concatenate([c.log_post_draws for c in chains]),
        log_post_trace=first.log_post_trace,
        accept_rate=float(np.mean([c.accept_rate for c in chains])),
        basis=first.basis,
        config=first.config,
        newton_init=first.newton_init,
        wall_time=sum(c.wall_time for c in chains),
    )


def _summary_table(path, grid, summary, dataset_info):
    """Summary CSV with nodes and values in unit and raw coordinates."""
    scale = np.asarray(dataset_info["scale"], dtype=float)
    offset = np.asarray(dataset_info["offset"], dtype=float)
    jac = float(np.prod(scale))
    dim = grid.shape[1]
    cols = {}
    for axis in range(dim):
        cols[f"x{axis + 1}_unit"] = grid[:, axis]
        cols[f"x{axis + 1}_raw"] = offset[axis] + scale[axis] * grid[:, axis]
    cols["mean_unit"] = summary.mean
    cols["mean_raw"] = summary.mean / jac
    for level in summary.quantile_levels:
        cols[f"q{level:g}_unit"] = summary.level(level)
        cols[f"q{level:g}_raw"] = summary.level(level) / jac
    write_table_csv(path, cols)


def _write_data_csv(path, data: Dataset):
    raw = data.to_raw(data.points)
    header = ",".join(f"x{a + 1}" for a in range(data.dim))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(header + "\n")
        for row in raw:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")


def cmd_generate(args) -> int:
    cfg = _merge_config(args)
    if cfg["generator"] is None:
        raise ConfigError("generate requires --generator")
    run_dir = _run_dir(args, cfg, "generate")
    data = generate_synthetic(cfg["generator"], cfg["gen_params"], cfg["n"], cfg["seed"])
    out_csv = os.path.join(run_dir, "generated.csv")
    _write_data_csv(out_csv, data)
    write_manifest(os.path.join(run_dir, "manifest.json"), config=cfg, dataset=data,
                   outputs=[out_csv])
    print(run_dir)
    return EXIT_OK


def cmd_fit(args) -> int:
    cfg = _merge_config(args)
    run_dir = _run_dir(args, cfg, "fit")
    started = time.perf_counter()
    data = _load_dataset(cfg)
    basis = _basis(cfg)
    chains = _run_chains(data, basis, cfg)
    pooled = _pooled_draws(chains)

    outputs = []
    for k, chain in enumerate(chains):
        name = "chain.csv" if len(chains) == 1 else f"chain_{k}.csv"
        path = os.path.join(run_dir, name)
        write_chain_csv(path, chain)
        outputs.append(path)
    data_csv = os.path.join(run_dir, "data.csv")
    _write_data_csv(data_csv, data)
    outputs.append(data_csv)

    grid = unit_grid(cfg["dim"], cfg["grid_resolution"])
    summary = summarize_chain(pooled, basis, grid, quantiles=cfg["quantiles"])
    summary_csv = os.path.join(run_dir, "summary.csv")
    dataset_info = {"offset": data.offset.tolist(), "scale": data.scale.tolist()}
    _summary_table(summary_csv, grid, summary, dataset_info)
    outputs.append(summary_csv)

    if cfg["figures"]:
        if cfg["dim"] == 1:
            keep = pooled.draws[:: max(1, pooled.n_draws // 100)]
            vals = density_values(keep, basis, grid)
            outputs.append(figures.density_draws_figure(
                os.path.join(run_dir, "density_draws.png"), grid, vals, data.points))
            outputs.append(figures.density_band_figure(
                os.path.join(run_dir, "density_bands.png"), grid, summary))
        else:
            mid = 0.5 if 0.5 in summary.quantile_levels else summary.quantile_levels[0]
            outputs.append(figures.density_contour_figure(
                os.path.join(run_dir, "density_median.png"), grid, summary.level(mid), data.points))
        outputs.append(figures.trace_figure(
            os.path.join(run_dir, "trace.png"), chains[0].log_post_trace))

    write_manifest(
        os.path.join(run_dir, "manifest.json"),
        config=cfg,
        chain=pooled,
        dataset=data,
        extra={
            "chains": [
                {"accept_rate": c.accept_rate, "seed": c.config.seed,
                 "newton_init": c.newton_init, "wall_time_s": c.wall_time}
                for c in chains
            ],
            "fit_wall_time_s": time.perf_counter() - started,
        },
        outputs=outputs,
    )
    print(run_dir)
    return EXIT_OK


def cmd_summarize(args) -> int:
    cfg = _merge_config(args)
    manifest, basis, chain = load_run(args.run)
    run_dir = args.run
    grid = unit_grid(basis.dim, cfg["grid_resolution"])
    summary = summarize_chain(chain, basis, grid, quantiles=cfg["quantiles"])
    summary_csv = os.path.join(run_dir, "summary.csv")
    _summary_table(summary_csv, grid, summary, manifest["dataset"])
    outputs = [summary_csv]
    if cfg["figures"]:
        if basis.dim == 1:
            outputs.append(figures.density_band_figure(
                os.path.join(run_dir, "density_bands.png"), grid, summary))
        else:
            mid = 0.5 if 0.5 in summary.quantile_levels else summary.quantile_levels[0]
            outputs.append(figures.density_contour_figure(
                os.path.join(run_dir, "density_median.png"), grid, summary.level(mid)))
    write_manifest(os.path.join(run_dir, "summarize_manifest.json"), config=cfg, outputs=outputs)
    print(summary_csv)
    return EXIT_OK


def cmd_predict(args) -> int:
    cfg = _merge_config(args)
    manifest, basis, chain = load_run(args.run)
    run_dir = args.run
    rng = make_rng(cfg["seed"], stream=1)
    unit_points = predictive_sample(chain, basis, cfg["count"], rng)
    info = manifest["dataset"]
    raw = np.asarray(info["offset"]) + np.asarray(info["scale"]) * unit_points
    cols = {}
    for axis in range(basis.dim):
        cols[f"x{axis + 1}_raw"] = raw[:, axis]
        cols[f"x{axis + 1}_unit"] = unit_points[:, axis]
    out_csv = os.path.join(run_dir, "predictive.csv")
    write_table_csv(out_csv, cols)
    outputs = [out_csv]
    if cfg["figures"]:
        outputs.append(figures.predictive_figure(
            os.path.join(run_dir, "predictive.png"), unit_points, basis.dim))
    write_manifest(os.path.join(run_dir, "predict_manifest.json"), config=cfg, outputs=outputs)
    print(out_csv)
    return EXIT_OK


def cmd_cox(args) -> int:
    cfg = _merge_config(args)
    manifest, basis, chain = load_run(args.run)
    run_dir = args.run
    info = manifest["dataset"]
    count = int(info["n"])
    prior = GammaPrior(cfg["cox_a"], cfg["cox_b"])
    grid = unit_grid(basis.dim, cfg["grid_resolution"])
    rng = make_rng(cfg["seed"], stream=2)
    values_unit = intensity_draws(chain, basis, prior, count, grid, rng)
    jac = float(np.prod(info["scale"]))
    summary_raw = pointwise_summary(values_unit / jac, quantiles=cfg["quantiles"], nodes=grid)
    nodes_raw = np.asarray(info["offset"]) + np.asarray(info["scale"]) * grid
    cols = {}
    for axis in range(basis.dim):
        cols[f"x{axis + 1}_raw"] = nodes_raw[:, axis]
    cols["mean"] = summary_raw.mean
    for level in summary_raw.quantile_levels:
        cols[f"q{level:g}"] = summary_raw.level(level)
    out_csv = os.path.join(run_dir, "intensity.csv")
    write_table_csv(out_csv, cols)
    outputs = [out_csv]
    if cfg["figures"]:
        events = None
        data_csv = os.path.join(run_dir, "data.csv")
        if os.path.exists(data_csv):
            events = np.loadtxt(data_csv, delimiter=",", skiprows=1, ndmin=2)
        outputs.append(figures.intensity_figure(
            os.path.join(run_dir, "intensity.png"), nodes_raw, summary_raw, basis.dim, events))
    posterior = mass_posterior(prior, count)
    write_manifest(
        os.path.join(run_dir, "cox_manifest.json"),
        config=cfg,
        extra={"mass_posterior": {"a": posterior.a, "b": posterior.b,
                                  "mean": posterior.mean, "variance": posterior.variance},
               "event_count": count},
        outputs=outputs,
    )
    print(out_csv)
    return EXIT_OK


def _verify_checks(cfg: dict):
    checks = []

    spec_1d = BasisSpec.build(MaternHyper(0.5, 0.5, 0.8, 1), 30)
    resid_1d = float(np.max(np.abs(gram_matrix(spec_1d) - np.eye(spec_1d.size))))
    checks.append(("orthonormality_1d_worst_residual", resid_1d, 1e-8))

    spec_2d = BasisSpec.build(MaternHyper(0.9, 0.1, 1.1, 2), 5)
    resid_2d = float(np.max(np.abs(gram_matrix(spec_2d) - np.eye(spec_2d.size))))
    checks.append(("orthonormality_2d_worst_residual", resid_2d, 1e-8))

    p = DensityFunction(lambda x: np.full(x.shape[0], 1.0), dim=1)
    phi = TangentFunction(lambda x: math.sqrt(2.0) * np.cos(math.pi * x[:, 0]), dim=1)
    psi = TangentFunction(lambda x: math.sqrt(2.0) * np.cos(2.0 * math.pi * x[:, 0]), dim=1)
    checks.append(("isometry_residual_shared_grid", isometry_residual(p, phi, phi), 1e-12))
    phi_coarse = TangentFunction(lambda x: math.sqrt(2.0) * np.cos(math.pi * x[:, 0]), dim=1, level=128)
    checks.append(("isometry_residual_mismatched_grid", isometry_residual(p, phi_coarse, psi), 1e-8))

    reports = convergence_table(cfg["truncations"], ambient_dim=cfg["ambient_dim"], seed=cfg["seed"])
    flatness = max(abs(r.max_f - r.f0) / (1.0 + r.f0) for r in reports)
    checks.append(("unit_speed_flow_distance_flatness", flatness, 1e-10))
    checks.append(("growth_bound_violations", float(sum(r.bound_violations for r in reports)), 0.5))
    integrals = [r.integral_f for r in reports]
    worst_ratio = max(b / a for a, b in zip(integrals, integrals[1:]))
    checks.append(("convergence_integral_worst_ratio", worst_ratio, 1.0))
    return checks, reports


def cmd_verify(args) -> int:
    cfg = _merge_config(args)
    run_dir = _run_dir(args, cfg, "verify")
    checks, reports = _verify_checks(cfg)
    report_csv = os.path.join(run_dir, "verify_report.csv")
    with open(report_csv, "w", encoding="utf-8") as fh:
        fh.write("check,value,threshold,pass\n")
        for name, value, threshold in checks:
            fh.write(f"{name},{value!r},{threshold!r},{int(value <= threshold)}\n")
    conv_csv = os.path.join(run_dir, "convergence.csv")
    write_table_csv(conv_csv, {
        "I": [r.truncation for r in reports],
        "f0": [r.f0 for r in reports],
        "max_f": [r.max_f for r in reports],
        "integral_f": [r.integral_f for r in reports],
        "bound_violations": [r.bound_violations for r in reports],
    })
    outputs = [report_csv, conv_csv]
    if cfg["figures"]:
        outputs.append(figures.convergence_figure(os.path.join(run_dir, "convergence.png"), reports))
    write_manifest(os.path.join(run_dir, "verify_manifest.json"), config=cfg, outputs=outputs)
    ok = all(value <= threshold for _, value, threshold in checks)
    for name, value, threshold in checks:
        status = "pass" if value <= threshold else "FAIL"
        print(f"{status} {name}: {value:.3e} (threshold {threshold:g})")
    return EXIT_OK if ok else EXIT_NUMERIC


_COMMANDS = {
    "fit": cmd_fit,
    "summarize": cmd_summarize,
    "predict": cmd_predict,
    "cox": cmd_cox,
    "verify": cmd_verify,
    "generate": cmd_generate,
}


def _emit_error(exc: Exception, code: int) -> int:
    payload = {"error": type(exc).__name__, "message": str(exc), "exit_code": code}
    print(json.dumps(payload), file=sys.stderr)
    return code


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        return _emit_error(exc, EXIT_USAGE)
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        return _emit_error(exc, EXIT_USAGE)
    except (DataError, OSError) as exc:
        return _emit_error(exc, EXIT_IO)
    except DensphereError as exc:
        return _emit_error(exc, EXIT_NUMERIC)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
