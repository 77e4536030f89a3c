"""Configuration-driven job runner producing machine-readable reports.

A job file is a JSON object selecting one job kind, a grid, physical
parameters, metric labels, and a verdict threshold.  ``run_job`` executes the
pipeline on every grid in the refinement list (default: just the configured
grid) and aggregates a report document whose payload is deterministic for a
fixed config; ``serialize_report`` writes ``report.json`` plus a flat
``tables.csv``.
"""
from __future__ import annotations

import csv
import dataclasses
import json
import logging
import math
import time
from dataclasses import dataclass
from pathlib import Path

from ._version import __version__
from .gridops import Grid, Operator
from .metrics import (
    build_metric,
    limit_sweep,
    metric_condition,
    spec_from_label,
)
from .models import (
    PhysParams,
    QDeformParams,
    build_deformed_pair,
    build_ladder,
    build_swanson_bf,
    build_swanson_jr,
    default_number_operator,
    deformed_algebra_residual,
)
from .verify import (
    dieudonne_details,
    fit_diagonal_metric,
    hermitian_counterpart,
    log_quadratic_coefficient,
    model_equality_report,
    spectrum,
)

__all__ = ["ConfigError", "JobConfig", "parse_config", "run_job", "serialize_report"]

logger = logging.getLogger("qhm.jobs")

JOB_KINDS = (
    "verify-metric",
    "compare-metrics",
    "limit-sweep",
    "model-equality",
    "algebra-check",
    "spectrum",
    "fit-metric",
)

_DEFAULT_THRESHOLDS = {
    "verify-metric": 1e-3,
    "compare-metrics": 10.0,
    "limit-sweep": 1e-2,
    "model-equality": 1e-8,
    "algebra-check": 1e-12,
    "spectrum": 1e-6,
    "fit-metric": 0.0,
}

_TOP_KEYS = {
    "job",
    "grid",
    "params",
    "metric",
    "metrics",
    "reference",
    "tau_values",
    "threshold",
    "q_params",
    "k",
    "model",
    "out_dir",
}
_GRID_KEYS = {"n_points", "p_max", "mask_fraction", "refinement"}
_PARAM_KEYS = {"hbar", "mass", "omega", "mu", "lambda", "delta_t", "tau", "gamma_t"}
_QPARAM_KEYS = {"q", "alpha", "beta", "gamma", "delta"}


class ConfigError(ValueError):
    """The job configuration is malformed or violates a validation rule."""


@dataclass(frozen=True)
class JobConfig:
    job: str
    grid: Grid
    refinement: tuple[int, ...] | None
    params: PhysParams
    metric: str | None
    metrics: tuple[str, ...]
    reference: str | None
    tau_values: tuple[float, ...]
    threshold: float
    q_params: QDeformParams
    k: int
    model: str
    out_dir: str | None


def _reject_unknown(block: dict, allowed: set, where: str) -> None:
    unknown = sorted(set(block) - allowed)
    if unknown:
        raise ConfigError(f"unknown key(s) in {where}: {', '.join(unknown)}")


def _finite_number(value, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{where} must be a number")
    if not math.isfinite(value):
        raise ConfigError(f"{where} must be finite")
    return float(value)


def _plain_int(value, where: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{where} must be an integer")
    return value


def validate_refinement(values) -> tuple[int, ...]:
    """Strictly increasing odd integers; raises ConfigError otherwise."""
    if not isinstance(values, (list, tuple)) or not values:
        raise ConfigError("refinement must be a non-empty list of integers")
    out = []
    for v in values:
        n = _plain_int(v, "refinement entry")
        if n % 2 == 0:
            raise ConfigError(
                f"refinement entry {n} violates the oddness rule: "
                "n_points must be an odd integer"
            )
        out.append(n)
    if any(b <= a for a, b in zip(out, out[1:])):
        raise ConfigError("refinement list must be strictly increasing")
    return tuple(out)


def parse_config(text: str) -> JobConfig:
    """Parse and validate a JSON job description (strict: no unknown keys)."""

    def _no_const(name: str):
        raise ConfigError(f"non-finite constant {name} is not allowed")

    try:
        data = json.loads(text, parse_constant=_no_const)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("job config must be a JSON object")
    _reject_unknown(data, _TOP_KEYS, "config")

    job = data.get("job")
    if job not in JOB_KINDS:
        raise ConfigError(
            f"unrecognized job kind {job!r}; expected one of {', '.join(JOB_KINDS)}"
        )

    grid_block = data.get("grid", {})
    if not isinstance(grid_block, dict):
        raise ConfigError("grid must be an object")
    _reject_unknown(grid_block, _GRID_KEYS, "grid")
    n_points = _plain_int(grid_block.get("n_points", 257), "grid.n_points")
    if n_points % 2 == 0:
        raise ConfigError(
            f"grid.n_points {n_points} violates the oddness rule: "
            "n_points must be an odd integer"
        )
    p_max = _finite_number(grid_block.get("p_max", 8.0), "grid.p_max")
    mask = _finite_number(grid_block.get("mask_fraction", 0.25), "grid.mask_fraction")
    try:
        grid = Grid(n_points, p_max, mask)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    refinement = None
    if "refinement" in grid_block:
        refinement = validate_refinement(grid_block["refinement"])

    params_block = data.get("params", {})
    if not isinstance(params_block, dict):
        raise ConfigError("params must be an object")
    _reject_unknown(params_block, _PARAM_KEYS, "params")
    kwargs = {}
    for key in _PARAM_KEYS:
        if key in params_block:
            field = "lam" if key == "lambda" else key
            kwargs[field] = _finite_number(params_block[key], f"params.{key}")
    try:
        params = PhysParams(**kwargs)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    metric = data.get("metric")
    if metric is not None and not isinstance(metric, str):
        raise ConfigError("metric must be a string label")
    metrics_val = data.get("metrics", ["BF-composite", "JR-composite"])
    if not isinstance(metrics_val, list) or not all(
        isinstance(m, str) for m in metrics_val
    ):
        raise ConfigError("metrics must be a list of string labels")
    metrics = tuple(metrics_val)
    reference = data.get("reference")
    if reference is not None and not isinstance(reference, str):
        raise ConfigError("reference must be a string label")

    for label in filter(None, (metric, reference, *metrics)):
        try:
            spec_from_label(label, params)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    if job == "verify-metric" and metric is None:
        raise ConfigError("verify-metric requires a 'metric' label")
    if job == "compare-metrics" and len(metrics) != 2:
        raise ConfigError("compare-metrics requires exactly two 'metrics' labels")
    if job == "limit-sweep" and reference is None:
        raise ConfigError("limit-sweep requires a 'reference' label")

    tau_values = data.get("tau_values", [1e-1, 1e-2, 1e-3, 1e-4])
    if not isinstance(tau_values, list) or not tau_values:
        raise ConfigError("tau_values must be a non-empty list")
    taus = tuple(_finite_number(t, "tau_values entry") for t in tau_values)

    threshold = _finite_number(
        data.get("threshold", _DEFAULT_THRESHOLDS[job]), "threshold"
    )

    q_block = data.get("q_params", {})
    if not isinstance(q_block, dict):
        raise ConfigError("q_params must be an object")
    _reject_unknown(q_block, _QPARAM_KEYS, "q_params")
    q = _finite_number(q_block.get("q", 1.0), "q_params.q")
    q_kwargs = {
        "q": q,
        "alpha": _finite_number(q_block.get("alpha", 1.0), "q_params.alpha"),
        "beta": _finite_number(q_block.get("beta", 0.0), "q_params.beta"),
        "gamma": _finite_number(
            q_block.get("gamma", (q**2 + 1.0) / 4.0), "q_params.gamma"
        ),
        "delta": _finite_number(q_block.get("delta", 1.0), "q_params.delta"),
    }
    try:
        q_params = QDeformParams(**q_kwargs)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    k = _plain_int(data.get("k", 6), "k")
    if k < 1:
        raise ConfigError("k must be at least 1")

    model = data.get("model", "BF")
    if model not in ("BF", "JR"):
        raise ConfigError(f"model must be 'BF' or 'JR', got {model!r}")

    out_dir = data.get("out_dir")
    if out_dir is not None and not isinstance(out_dir, str):
        raise ConfigError("out_dir must be a string path")

    return JobConfig(
        job=job,
        grid=grid,
        refinement=refinement,
        params=params,
        metric=metric,
        metrics=metrics,
        reference=reference,
        tau_values=taus,
        threshold=threshold,
        q_params=q_params,
        k=k,
        model=model,
        out_dir=out_dir,
    )


def _config_echo(cfg: JobConfig) -> dict:
    return {
        "job": cfg.job,
        "grid": {
            "n_points": cfg.grid.n_points,
            "p_max": cfg.grid.p_max,
            "mask_fraction": cfg.grid.mask_fraction,
            "refinement": list(cfg.refinement) if cfg.refinement else None,
        },
        "params": {
            "hbar": cfg.params.hbar,
            "mass": cfg.params.mass,
            "omega": cfg.params.omega,
            "mu": cfg.params.mu,
            "lambda": cfg.params.lam,
            "delta_t": cfg.params.delta_t,
            "tau": cfg.params.tau,
            "gamma_t": cfg.params.gamma_t,
        },
        "metric": cfg.metric,
        "metrics": list(cfg.metrics),
        "reference": cfg.reference,
        "tau_values": list(cfg.tau_values),
        "threshold": cfg.threshold,
        "q_params": {
            "q": cfg.q_params.q,
            "alpha": cfg.q_params.alpha,
            "beta": cfg.q_params.beta,
            "gamma": cfg.q_params.gamma,
            "delta": cfg.q_params.delta,
        },
        "k": cfg.k,
        "model": cfg.model,
    }


def _grids(cfg: JobConfig) -> list[Grid]:
    ns = cfg.refinement if cfg.refinement else (cfg.grid.n_points,)
    return [Grid(n, cfg.grid.p_max, cfg.grid.mask_fraction) for n in ns]


def _build_model(grid: Grid, pp: PhysParams, which: str) -> Operator:
    x, p = build_deformed_pair(grid, pp)
    if which == "JR":
        ladder = build_ladder(x, p, pp)
        return build_swanson_jr(ladder.a, ladder.a_dag, pp)
    return build_swanson_bf(x, p, pp)


def _verdict(value: float, threshold: float, *, at_least: bool = False) -> str:
    ok = value >= threshold if at_least else value < threshold
    return "PASS" if ok else "FAIL"


def _row(job, metric, n_points, tau, residual, verdict) -> dict:
    return {
        "job": job,
        "metric": metric,
        "n_points": n_points,
        "tau": tau,
        "residual": residual,
        "verdict": verdict,
    }


def _run_verify_metric(cfg: JobConfig) -> tuple[dict, list[dict], str]:
    rows, entries = [], []
    spec = spec_from_label(cfg.metric, cfg.params)
    for grid in _grids(cfg):
        h = _build_model(grid, cfg.params, cfg.model)
        rho = build_metric(spec, grid, cfg.params)
        details = dieudonne_details(h, rho)
        verdict = _verdict(details["action"], cfg.threshold)
        entries.append(
            {
                "metric": cfg.metric,
                "n_points": grid.n_points,
                "residual_action": details["action"],
                "residual_matrix": details["matrix"],
                "masked": details["masked"],
                "condition_number": metric_condition(rho),
                "verdict": verdict,
            }
        )
        rows.append(
            _row(cfg.job, cfg.metric, grid.n_points, cfg.params.tau,
                 details["action"], verdict)
        )
    return {"residuals": entries}, rows, entries[-1]["verdict"]


def _run_compare_metrics(cfg: JobConfig) -> tuple[dict, list[dict], str]:
    rows, entries = [], []
    first, second = cfg.metrics
    for grid in _grids(cfg):
        h = _build_model(grid, cfg.params, cfg.model)
        residuals = {}
        for label in (first, second):
            rho = build_metric(spec_from_label(label, cfg.params), grid, cfg.params)
            residuals[label] = dieudonne_details(h, rho)["action"]
        ratio = (
            residuals[second] / residuals[first]
            if residuals[first] > 0
            else float("inf")
        )
        verdict = _verdict(ratio, cfg.threshold, at_least=True)
        entries.append(
            {
                "n_points": grid.n_points,
                "residuals": residuals,
                "ratio": ratio,
                "favored": first if residuals[first] <= residuals[second] else second,
                "verdict": verdict,
            }
        )
        for label in (first, second):
            rows.append(
                _row(cfg.job, label, grid.n_points, cfg.params.tau,
                     residuals[label], verdict)
            )
    return {"comparisons": entries}, rows, entries[-1]["verdict"]


def _run_limit_sweep(cfg: JobConfig) -> tuple[dict, list[dict], str]:
    rows, entries = [], []
    metric_label = cfg.metric or "JR"
    spec = spec_from_label(metric_label, cfg.params)
    ref = spec_from_label(cfg.reference, cfg.params)
    for grid in _grids(cfg):
        table = limit_sweep(spec, cfg.tau_values, ref, grid, cfg.params)
        final = table[-1][1]
        verdict = _verdict(final, cfg.threshold)
        entries.append(
            {
                "metric": metric_label,
                "reference": cfg.reference,
                "n_points": grid.n_points,
                "table": [[t, d] for t, d in table],
                "final_distance": final,
                "verdict": verdict,
            }
        )
        for t, d in table:
            rows.append(_row(cfg.job, metric_label, grid.n_points, t, d, verdict))
    return {"sweeps": entries}, rows, entries[-1]["verdict"]


def _run_model_equality(cfg: JobConfig) -> tuple[dict, list[dict], str]:
    rows, entries = [], []
    pp = cfg.params
    mu_nominal = pp.delta_t - pp.lam
    mu_in = pp.mu if pp.mu != 0.0 else mu_nominal
    pp_bf = dataclasses.replace(pp, mu=mu_in)
    for grid in _grids(cfg):
        x, p = build_deformed_pair(grid, pp)
        ladder = build_ladder(x, p, pp)
        h_jr = build_swanson_jr(ladder.a, ladder.a_dag, pp)
        h_bf = build_swanson_bf(x, p, pp_bf)
        report = model_equality_report(h_jr, h_bf, x, p, grid)
        mu_fitted = mu_in + report.anticommutator_coefficient.imag
        verdict = _verdict(report.unexplained, cfg.threshold)
        entries.append(
            {
                "n_points": grid.n_points,
                "coefficients": {
                    k: [v.real, v.imag] for k, v in report.coefficients.items()
                },
                "unexplained": report.unexplained,
                "mu_input": mu_in,
                "mu_nominal": mu_nominal,
                "mu_fitted": mu_fitted,
                "mapping_matches_nominal": bool(
                    abs(mu_fitted - mu_nominal) < 1e-8
                ),
                "verdict": verdict,
            }
        )
        rows.append(
            _row(cfg.job, "JR-vs-BF", grid.n_points, pp.tau,
                 report.unexplained, verdict)
        )
    return {"equalities": entries}, rows, entries[-1]["verdict"]


def _run_algebra_check(cfg: JobConfig) -> tuple[dict, list[dict], str]:
    rows, entries = [], []
    pp, qp = cfg.params, cfg.q_params
    for grid in _grids(cfg):
        x, p = build_deformed_pair(grid, pp)
        ladder = build_ladder(x, p, pp)
        n_op = default_number_operator(ladder.a, ladder.a_dag)
        residual = deformed_algebra_residual(x, p, n_op, qp, pp)
        verdict = _verdict(residual, cfg.threshold)
        entries.append(
            {
                "q": qp.q,
                "n_points": grid.n_points,
                "residual": residual,
                "adjoint_defect": ladder.adjoint_defect,
                "verdict": verdict,
            }
        )
        rows.append(
            _row(cfg.job, f"q={qp.q}", grid.n_points, pp.tau, residual, verdict)
        )
    return {"algebra": entries}, rows, entries[-1]["verdict"]


def _run_spectrum(cfg: JobConfig) -> tuple[dict, list[dict], str]:
    rows, entries = [], []
    for grid in _grids(cfg):
        h = _build_model(grid, cfg.params, cfg.model)
        direct = spectrum(h, cfg.k)
        entry = {
            "model": cfg.model,
            "n_points": grid.n_points,
            "values": [[z.real, z.imag] for z in direct.values],
            "reality_measure": direct.reality_measure,
        }
        if cfg.metric is not None:
            rho = build_metric(spec_from_label(cfg.metric, cfg.params), grid, cfg.params)
            counterpart, herm_res = hermitian_counterpart(h, rho)
            cp = spectrum(counterpart, cfg.k)
            pairs = zip(direct.values, cp.values)
            discrepancy = max(
                (abs(a - b) for a, b in pairs), default=float("inf")
            )
            entry["counterpart_values"] = [[z.real, z.imag] for z in cp.values]
            entry["counterpart_herm_residual"] = herm_res
            entry["cross_check_discrepancy"] = discrepancy
            entry["direct_spectrum_untrusted"] = bool(discrepancy > 1e-3)
        verdict = _verdict(direct.reality_measure, cfg.threshold)
        entry["verdict"] = verdict
        entries.append(entry)
        rows.append(
            _row(cfg.job, cfg.model, grid.n_points, cfg.params.tau,
                 direct.reality_measure, verdict)
        )
    return {"spectra": entries}, rows, entries[-1]["verdict"]


def _run_fit_metric(cfg: JobConfig) -> tuple[dict, list[dict], str]:
    rows, entries = [], []
    for grid in _grids(cfg):
        h = _build_model(grid, cfg.params, cfg.model)
        fit = fit_diagonal_metric(h, grid, cfg.params)
        entry = {
            "n_points": grid.n_points,
            "status": fit.status,
            "fit_residual": fit.fit_residual,
            "sigma_gap": fit.sigma_gap,
            "distances": dict(fit.distances),
            "nearest": fit.nearest,
            "profile": [float(v) for v in fit.profile],
        }
        if fit.status == "OK":
            entry["log_quadratic_coefficient"] = log_quadratic_coefficient(fit)
        verdict = "PASS" if fit.status == "OK" else "FAIL"
        entry["verdict"] = verdict
        entries.append(entry)
        rows.append(
            _row(cfg.job, fit.nearest or fit.status, grid.n_points,
                 cfg.params.tau, fit.fit_residual, verdict)
        )
    return {"fits": entries}, rows, entries[-1]["verdict"]


_RUNNERS = {
    "verify-metric": _run_verify_metric,
    "compare-metrics": _run_compare_metrics,
    "limit-sweep": _run_limit_sweep,
    "model-equality": _run_model_equality,
    "algebra-check": _run_algebra_check,
    "spectrum": _run_spectrum,
    "fit-metric": _run_fit_metric,
}


def run_job(cfg: JobConfig) -> dict:
    """Execute the configured job on every grid; aggregate the report."""
    t0 = time.perf_counter()
    logger.info("running %s job", cfg.job)
    results, rows, overall = _RUNNERS[cfg.job](cfg)
    results["rows"] = rows
    elapsed = time.perf_counter() - t0
    logger.info("%s finished in %.3fs: %s", cfg.job, elapsed, overall)
    return {
        "version": __version__,
        "config": _config_echo(cfg),
        "results": results,
        "verdicts": {"overall": overall},
        "timings": {"total_s": elapsed},
    }


def serialize_report(doc: dict, out_dir) -> tuple[Path, Path]:
    """Write report.json and tables.csv under out_dir; returns the two paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    report_path = out / "report.json"
    csv_path = out / "tables.csv"
    with open(report_path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
    rows = doc.get("results", {}).get("rows", [])
    with open(csv_path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(
            fh, fieldnames=["job", "metric", "n_points", "tau", "residual", "verdict"]
        )
        writer.writeheader()
        for row in rows:
            writer.writerow(row)
    return report_path, csv_path
