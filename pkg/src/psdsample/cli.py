"""Command line front end: fit, sample, evaluate, benchmark.

Every command reads a single JSON config file and derives all randomness
from one ``--seed`` flag.  Stream derivation is documented and fixed:
seed S and a role key tuple k map to the 64-bit integer

    numpy.random.SeedSequence(S, spawn_key=k).generate_state(1)[0]

with role keys

    (0,)                fit
    (1,)                sample
    (2, r)              benchmark ground-truth reference draw, repetition r
    (3, i, j, r, 0)     benchmark fit: method index i, budget index j, rep r
    (3, i, j, r, 1)     benchmark sampling, same coordinates

Relative paths in the config's "paths" section resolve under ``--out``;
absolute paths are used as given.  All JSON output is written with
sorted keys so reruns are byte-identical.

Exit codes: 0 success, 2 config error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .baseline import build_grid
from .boxes import HyperRectangle
from .densities import TargetDensity, get_density, list_densities
from .estimator import FitConfig, fit_psd, fit_rank_one, fit_rank_one_holdout
from .exceptions import PsdSampleError
from .integration import integrate
from .metrics import empirical_mmd, exact_distances
from .models import load_model, save_model
from .sampler import (
    SamplerParams,
    adaptive_rho,
    find_support,
    integral_budget,
    read_samples_csv,
    sample,
    write_samples_csv,
)

REPORT_FORMAT_VERSION = 1


class ConfigError(Exception):
    """Invalid or inconsistent configuration; maps to exit code 2."""


def derive_seed(root_seed: int, *key: int) -> int:
    """Collapse a root seed and role key into an independent u64 seed."""
    ss = np.random.SeedSequence(root_seed, spawn_key=tuple(key))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


_CONFIG_KEYS = ("density", "domain", "fit", "sampler", "metric", "benchmark", "paths")


@dataclass(frozen=True)
class ExperimentConfig:
    """One experiment's settings, kept in JSON-primitive form.

    Sections stay as plain dicts so the config round-trips through
    ``to_dict``/``from_dict`` without loss; typed objects are built on
    demand by the command handlers.
    """

    density: Optional[str] = None
    domain: Optional[dict] = None
    fit: Optional[dict] = None
    sampler: Optional[dict] = None
    metric: Optional[dict] = None
    benchmark: Optional[dict] = None
    paths: dict = field(default_factory=dict)

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        unknown = set(data) - set(_CONFIG_KEYS)
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        return cls(
            density=data.get("density"),
            domain=data.get("domain"),
            fit=data.get("fit"),
            sampler=data.get("sampler"),
            metric=data.get("metric"),
            benchmark=data.get("benchmark"),
            paths=data.get("paths", {}),
        )

    def to_dict(self) -> dict:
        out = {}
        for key in _CONFIG_KEYS[:-1]:
            value = getattr(self, key)
            if value is not None:
                out[key] = value
        if self.paths:
            out["paths"] = self.paths
        return out

    def domain_box(self) -> Optional[HyperRectangle]:
        if self.domain is None:
            return None
        try:
            lower = np.asarray(self.domain["lower"], dtype=float)
            upper = np.asarray(self.domain["upper"], dtype=float)
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"bad domain section: {exc}") from None
        try:
            return HyperRectangle(lower, upper)
        except ValueError as exc:
            raise ConfigError(f"bad domain: {exc}") from None

    def target(self) -> TargetDensity:
        if self.density is None:
            raise ConfigError("config needs a 'density' name")
        try:
            return get_density(self.density)
        except KeyError:
            known = ", ".join(list_densities())
            raise ConfigError(
                f"unknown density {self.density!r}; known: {known}"
            ) from None


def _box_dict(box: HyperRectangle) -> dict:
    return {"lower": box.lower.tolist(), "upper": box.upper.tolist()}


def _load_json(path: str) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON in {path}: {exc}") from None


def _dump_json(path: str, payload: dict) -> None:
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _resolve(out_dir: str, paths: dict, key: str, default: str) -> str:
    name = paths.get(key, default)
    if not isinstance(name, str):
        raise ConfigError(f"paths.{key} must be a string")
    if os.path.isabs(name):
        return name
    return os.path.join(out_dir, name)


def _section(cfg_section: Optional[dict], name: str) -> dict:
    if cfg_section is None:
        raise ConfigError(f"config needs a '{name}' section")
    if not isinstance(cfg_section, dict):
        raise ConfigError(f"config section '{name}' must be an object")
    return cfg_section


def _get_number(section: dict, name: str, key: str, kind=float):
    if key not in section:
        raise ConfigError(f"config section '{name}' needs '{key}'")
    try:
        return kind(section[key])
    except (TypeError, ValueError):
        raise ConfigError(f"{name}.{key} must be a number") from None


def cmd_fit(args: argparse.Namespace, cfg: ExperimentConfig) -> int:
    target = cfg.target()
    section = _section(cfg.fit, "fit")
    fit_cfg = FitConfig(
        n=_get_number(section, "fit", "n", int),
        m=_get_number(section, "fit", "m", int),
        tau=_get_number(section, "fit", "tau"),
        lam=_get_number(section, "fit", "lambda"),
        seed=derive_seed(args.seed, 0),
    )
    taus = section.get("taus")
    lams = section.get("lambdas")
    if args.psd:
        if taus or lams:
            raise ConfigError("holdout grids are only supported for rank-one fits")
        oracle = target.oracle("nonnegative")
        try:
            model, report = fit_psd(oracle, fit_cfg)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        model_obj = model
    else:
        try:
            oracle = target.oracle("linear")
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        if taus or lams:
            if not (taus and lams):
                raise ConfigError("holdout needs both 'taus' and 'lambdas' lists")
            model, report = fit_rank_one_holdout(oracle, fit_cfg, taus, lams)
        else:
            model, report = fit_rank_one(oracle, fit_cfg)
        model_obj = model.to_psd()

    model_path = _resolve(args.out, cfg.paths, "model", "model.json")
    report_path = _resolve(args.out, cfg.paths, "report", "fit_report.json")
    os.makedirs(os.path.dirname(model_path) or ".", exist_ok=True)
    save_model(model_obj, model_path)
    _dump_json(report_path, {
        "format_version": REPORT_FORMAT_VERSION,
        "command": "fit",
        "density": target.name,
        "mode": "psd" if args.psd else "rank_one",
        "seed": args.seed,
        "fit": report.to_dict(),
        "model_path": cfg.paths.get("model", "model.json"),
    })
    print(f"wrote model to {model_path}")
    return 0


def cmd_sample(args: argparse.Namespace, cfg: ExperimentConfig) -> int:
    section = _section(cfg.sampler, "sampler")
    model_path = _resolve(args.out, cfg.paths, "model", "model.json")
    try:
        model = load_model(model_path)
    except (OSError, ValueError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot load model {model_path}: {exc}") from None

    find_support_requested = bool(
        args.find_support or section.get("find_support", False)
    )
    support_info = None
    box = cfg.domain_box()
    if box is not None and box.dim != model.d:
        raise ConfigError(
            f"domain has dimension {box.dim}, model has {model.d}"
        )
    if box is None or not box.is_bounded():
        if not find_support_requested:
            raise ConfigError(
                "domain is missing or unbounded; pass --find-support "
                "or configure a bounded domain"
            )
        eps_mass = float(section.get("support_eps", 1e-6))
        box = find_support(model, eps_mass)
        whole = HyperRectangle.whole_space(model.d)
        captured = integrate(model, box) / integrate(model, whole)
        support_info = {
            "eps_mass": eps_mass,
            "captured_fraction": captured,
            "domain": _box_dict(box),
        }

    n_samples = _get_number(section, "sampler", "n_samples", int)
    rho_cfg = args.rho if args.rho is not None else section.get("rho")
    eps = args.eps if args.eps is not None else section.get("eps")
    metric = args.metric or section.get("metric", "tv")
    if (rho_cfg is None) == (eps is None):
        raise ConfigError("exactly one of 'rho' or 'eps' must be given")
    if eps is not None:
        try:
            rho_val = adaptive_rho(model, box, float(eps), metric=metric)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
    else:
        rho_val = float(rho_cfg)

    params = SamplerParams(
        rho=rho_val,
        n_samples=n_samples,
        seed=derive_seed(args.seed, 1),
    )
    run = sample(model, box, params)

    samples_path = _resolve(args.out, cfg.paths, "samples", "samples.csv")
    report_path = _resolve(args.out, cfg.paths, "report", "sample_report.json")
    os.makedirs(os.path.dirname(samples_path) or ".", exist_ok=True)
    write_samples_csv(run.samples, samples_path)

    budget = integral_budget(box, run.rho_used, n_samples)
    report = {
        "format_version": REPORT_FORMAT_VERSION,
        "command": "sample",
        "seed": args.seed,
        "n_samples": n_samples,
        "rho_used": run.rho_used,
        "domain": _box_dict(box),
        "integral_evals": run.accounting.integral_evals,
        "erf_calls": run.accounting.erf_calls,
        "integral_budget": budget,
        "bound_satisfied": bool(run.accounting.integral_evals <= budget),
        "leaf_count": run.leaf_count,
        "samples_path": cfg.paths.get("samples", "samples.csv"),
    }
    if eps is not None:
        report["eps"] = float(eps)
        report["metric"] = metric
    if support_info is not None:
        report["support"] = support_info
    _dump_json(report_path, report)
    print(f"wrote {n_samples} samples to {samples_path}")
    return 0


def _as_path_list(paths: dict, key: str) -> list:
    value = paths.get(key)
    if value is None:
        raise ConfigError(f"config needs paths.{key}")
    if isinstance(value, str):
        return [value]
    if isinstance(value, list) and all(isinstance(p, str) for p in value):
        if not value:
            raise ConfigError(f"paths.{key} must not be empty")
        return list(value)
    raise ConfigError(f"paths.{key} must be a path or list of paths")


def cmd_evaluate(args: argparse.Namespace, cfg: ExperimentConfig) -> int:
    metric = _section(cfg.metric, "metric")
    name = metric.get("name")
    report_path = _resolve(args.out, cfg.paths, "report", "evaluate_report.json")

    if name == "exact":
        model_path = _resolve(args.out, cfg.paths, "model", "model.json")
        try:
            model = load_model(model_path)
        except (OSError, ValueError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot load model {model_path}: {exc}") from None
        box = cfg.domain_box()
        if box is None or not box.is_bounded():
            raise ConfigError("exact distances need a bounded domain")
        if box.dim != model.d:
            raise ConfigError(
                f"domain has dimension {box.dim}, model has {model.d}"
            )
        rho = _get_number(metric, "metric", "rho")
        tol = float(metric.get("tol", 1e-9))
        try:
            distances = exact_distances(model, box, rho, tol=tol)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        payload = {
            "format_version": REPORT_FORMAT_VERSION,
            "command": "evaluate",
            "metric": "exact",
            "seed": args.seed,
            "domain": _box_dict(box),
        }
        payload.update(dataclasses.asdict(distances))
        _dump_json(report_path, payload)
        print(f"wrote exact-distance report to {report_path}")
        return 0

    if name == "mmd":
        eta = float(metric.get("eta", 2.0))
        p_paths = _as_path_list(cfg.paths, "samples_p")
        q_paths = _as_path_list(cfg.paths, "samples_q")
        reps = max(len(p_paths), len(q_paths))
        if len(p_paths) == 1:
            p_paths = p_paths * reps
        if len(q_paths) == 1:
            q_paths = q_paths * reps
        if len(p_paths) != len(q_paths):
            raise ConfigError(
                "paths.samples_p and paths.samples_q must have equal length "
                "(or one of them length 1)"
            )
        values = []
        for p_path, q_path in zip(p_paths, q_paths):
            p_full = p_path if os.path.isabs(p_path) else os.path.join(args.out, p_path)
            q_full = q_path if os.path.isabs(q_path) else os.path.join(args.out, q_path)
            try:
                P = read_samples_csv(p_full)
                Q = read_samples_csv(q_full)
            except OSError as exc:
                raise ConfigError(f"cannot read samples: {exc}") from None
            try:
                values.append(empirical_mmd(P, Q, eta))
            except ValueError as exc:
                raise ConfigError(str(exc)) from None
        mean = float(np.mean(values))
        sd = float(np.std(values, ddof=1)) if len(values) > 1 else 0.0
        _dump_json(report_path, {
            "format_version": REPORT_FORMAT_VERSION,
            "command": "evaluate",
            "metric": "mmd",
            "seed": args.seed,
            "eta": eta,
            "repetitions": len(values),
            "values": values,
            "mean": mean,
            "sd": sd,
        })
        print(f"wrote mmd report to {report_path}")
        return 0

    raise ConfigError("metric.name must be 'exact' or 'mmd'")


def run_benchmark(
    density: TargetDensity,
    budgets: Sequence[int],
    *,
    methods: Sequence[str] = ("grid", "psd", "truth"),
    n_samples: int = 10_000,
    eta: float = 2.0,
    repetitions: int = 5,
    seed: int = 0,
    fit_m: int = 50,
    rho: float = 2.0**-6,
    taus: Sequence[float] = (0.1, 0.2, 0.3, 0.5, 1.0, 2.0),
    lams: Sequence[float] = (1e-9, 1e-8, 1e-7, 1e-6, 1e-5, 1e-3),
) -> list[dict]:
    """Budget sweep comparing samplers by MMD to ground-truth draws.

    Methods: "psd" fits a rank-one model by holdout-selected ridge
    regression on n density evaluations and samples it; "grid" builds
    the histogram baseline on the same budget; "truth" draws fresh
    samples from the exact target model, giving the sampling-noise
    floor.  Each repetition compares against an independent reference
    draw from the exact model.  Rows come back sorted by (method, n).
    """
    if density.exact_model is None:
        raise ValueError(
            f"benchmark needs a target with an exact model; "
            f"{density.name!r} has none"
        )
    budgets = [int(n) for n in budgets]
    if not budgets or not methods:
        raise ValueError("need at least one budget and one method")
    unknown = set(methods) - {"psd", "grid", "truth"}
    if unknown:
        raise ValueError(f"unknown benchmark methods: {sorted(unknown)}")
    box = density.domain
    truth_psd = density.exact_model.to_psd()

    references = [
        sample(
            truth_psd,
            box,
            SamplerParams(rho=rho, n_samples=n_samples, seed=derive_seed(seed, 2, r)),
        ).samples
        for r in range(repetitions)
    ]

    rows = []
    for i, method in enumerate(methods):
        for j, n in enumerate(budgets):
            values = []
            for r in range(repetitions):
                fit_seed = derive_seed(seed, 3, i, j, r, 0)
                draw_seed = derive_seed(seed, 3, i, j, r, 1)
                if method == "grid":
                    grid = build_grid(density.pdf, box, n)
                    draws = grid.sample(n_samples, draw_seed)
                elif method == "psd":
                    oracle = density.oracle("linear")
                    fit_cfg = FitConfig(
                        n=n, m=fit_m, tau=taus[0], lam=lams[0], seed=fit_seed
                    )
                    model, _ = fit_rank_one_holdout(oracle, fit_cfg, taus, lams)
                    run = sample(
                        model.to_psd(),
                        box,
                        SamplerParams(rho=rho, n_samples=n_samples, seed=draw_seed),
                    )
                    draws = run.samples
                else:
                    run = sample(
                        truth_psd,
                        box,
                        SamplerParams(rho=rho, n_samples=n_samples, seed=draw_seed),
                    )
                    draws = run.samples
                values.append(empirical_mmd(draws, references[r], eta))
            mean = float(np.mean(values))
            sd = float(np.std(values, ddof=1)) if len(values) > 1 else 0.0
            rows.append({
                "method": method,
                "n": n,
                "mmd_mean": mean,
                "mmd_sd": sd,
                "values": values,
            })
    rows.sort(key=lambda row: (row["method"], row["n"]))
    return rows


def write_benchmark_csv(rows: Sequence[dict], path: str) -> None:
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w") as fh:
        fh.write("method,n,mmd_mean,mmd_sd\n")
        for row in rows:
            fh.write(
                f"{row['method']},{row['n']},"
                f"{row['mmd_mean']!r},{row['mmd_sd']!r}\n"
            )


def cmd_benchmark(args: argparse.Namespace, cfg: ExperimentConfig) -> int:
    target = cfg.target()
    section = _section(cfg.benchmark, "benchmark")
    budgets = section.get("budgets")
    if not isinstance(budgets, list) or not budgets:
        raise ConfigError("benchmark.budgets must be a non-empty list")
    methods = section.get("methods", ["grid", "psd", "truth"])
    if not isinstance(methods, list) or not methods:
        raise ConfigError("benchmark.methods must be a non-empty list")
    try:
        rows = run_benchmark(
            target,
            budgets,
            methods=methods,
            n_samples=int(section.get("n_samples", 10_000)),
            eta=float(section.get("eta", 2.0)),
            repetitions=int(section.get("repetitions", 5)),
            seed=args.seed,
            fit_m=int(section.get("m", 50)),
            rho=float(section.get("rho", 2.0**-6)),
            taus=section.get("taus", [0.1, 0.2, 0.3, 0.5, 1.0, 2.0]),
            lams=section.get("lambdas", [1e-9, 1e-8, 1e-7, 1e-6, 1e-5, 1e-3]),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None

    table_path = _resolve(args.out, cfg.paths, "table", "benchmark.csv")
    report_path = _resolve(args.out, cfg.paths, "report", "benchmark_report.json")
    write_benchmark_csv(rows, table_path)
    _dump_json(report_path, {
        "format_version": REPORT_FORMAT_VERSION,
        "command": "benchmark",
        "density": target.name,
        "seed": args.seed,
        "rows": rows,
    })
    print(f"wrote benchmark table to {table_path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="psd",
        description="Fit, sample, and evaluate nonnegative kernel models.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", required=True, help="path to JSON config")
        p.add_argument("--seed", type=int, default=0, help="root RNG seed")
        p.add_argument("--out", default=".", help="output directory")

    p_fit = sub.add_parser("fit", help="fit a model to a registered density")
    common(p_fit)
    p_fit.add_argument(
        "--psd", action="store_true",
        help="fit a full PSD coefficient matrix instead of a rank-one model",
    )
    p_fit.set_defaults(handler=cmd_fit)

    p_sample = sub.add_parser("sample", help="draw i.i.d. samples from a model")
    common(p_sample)
    p_sample.add_argument("--rho", type=float, default=None, help="leaf side bound")
    p_sample.add_argument(
        "--eps", type=float, default=None,
        help="target distance for adaptive leaf size",
    )
    p_sample.add_argument(
        "--metric", choices=("tv", "hellinger"), default=None,
        help="distance controlled by --eps",
    )
    p_sample.add_argument(
        "--find-support", action="store_true",
        help="grow a bounded domain capturing all but support_eps of the mass",
    )
    p_sample.set_defaults(handler=cmd_sample)

    p_eval = sub.add_parser("evaluate", help="exact distances or sample MMD")
    common(p_eval)
    p_eval.set_defaults(handler=cmd_evaluate)

    p_bench = sub.add_parser("benchmark", help="budget sweep against baselines")
    common(p_bench)
    p_bench.set_defaults(handler=cmd_benchmark)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = ExperimentConfig.from_dict(_load_json(args.config))
        return args.handler(args, cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except PsdSampleError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except (KeyError, TypeError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
