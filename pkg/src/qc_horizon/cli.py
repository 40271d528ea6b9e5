"""Command-line driver: ingest, metrics, frontier, forecast, validate, plot, report."""

from __future__ import annotations

import argparse
import csv
import io
import os
import sys
from pathlib import Path
from typing import Optional

from . import __version__
from .backtest import rolling_validate
from .dataset import (
    Dataset,
    FilterSpec,
    apply_filter,
    load_bundled_dataset,
    parse_dataset,
    serialize_dataset,
    year_window,
)
from .errors import QcHorizonError
from .figures import FIGURE_KINDS, render_figure
from .frontier import bootstrap_covariance, fit_multivariate
from .glq import QecParams, generalized_logical_qubits
from .report import (
    build_report,
    forecast_section,
    frontier_section,
    render_report,
    validation_section,
)
from .trends import ForecastConfig, bootstrap_forecast, extract_records, fit_loglinear

SEED_ENV = "QC_HORIZON_SEED"


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--dataset", metavar="PATH",
                        help="CSV of announcements (default: bundled snapshot)")
    parser.add_argument("--tech", metavar="TAGS",
                        help="comma-separated technology tags to keep")
    parser.add_argument("--from", dest="from_year", type=int, metavar="YEAR")
    parser.add_argument("--to", dest="to_year", type=int, metavar="YEAR")
    parser.add_argument("--min-qubits", type=int, metavar="N")
    parser.add_argument("--threshold", action="append", type=float, metavar="G",
                        help="GLQ milestone, repeatable (default: 1 and 4100)")
    parser.add_argument("--resamples", type=int, default=1000, metavar="B")
    parser.add_argument("--seed", type=int, metavar="S",
                        help=f"bootstrap seed (fallback: ${SEED_ENV}, then 0)")
    parser.add_argument("--quantiles", default="0.05,0.5,0.95", metavar="Q,Q,Q")
    parser.add_argument("--aggregation", choices=("record", "raw"), default="record")
    parser.add_argument("--p-th", type=float, default=1e-2, metavar="X")
    parser.add_argument("--p-l", type=float, default=1e-18, metavar="X")
    parser.add_argument("--horizon", type=float, default=2100.0, metavar="YEAR")
    parser.add_argument("--out", default="out", metavar="DIR")
    parser.add_argument("--strict", action="store_true",
                        help="fail on the first malformed dataset row")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qc-horizon",
        description="Quantum computing hardware trend analysis and forecasting",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    specs = {
        "ingest": "parse and normalize a dataset, reporting rejected rows",
        "metrics": "score every record on the GLQ index",
        "frontier": "fit the joint qubits/error model and bootstrap the covariance",
        "forecast": "bootstrap milestone crossing dates from record trends",
        "validate": "rolling train-on-prefix validation of the forecast model",
        "plot": "emit a single figure",
        "report": "run every analysis and emit the full report",
    }
    parsers = {}
    for name, help_text in specs.items():
        p = sub.add_parser(name, help=help_text)
        _add_common(p)
        parsers[name] = p
    parsers["frontier"].add_argument("--min-n", type=int, default=3, metavar="N",
                                     help="minimum records with both metrics")
    parsers["validate"].add_argument("--train-ends", default="2015,2016,2017,2018",
                                     metavar="Y,Y,...")
    parsers["validate"].add_argument("--targets", default="2016,2017,2018,2019",
                                     metavar="Y,Y,...")
    parsers["plot"].add_argument("--figure", required=True, choices=FIGURE_KINDS)
    parsers["plot"].add_argument("--year", type=float, default=2023.0,
                                 help="conditioning year for ellipse figures")
    return parser


def _resolve_seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get(SEED_ENV)
    return int(env) if env else 0


def _load(args) -> tuple[Dataset, tuple]:
    if args.dataset:
        text = Path(args.dataset).read_text(encoding="utf-8")
        result = parse_dataset(text, strict=args.strict,
                               source_name=Path(args.dataset).name)
        return result.dataset, result.rejects
    return load_bundled_dataset(), ()


def _filter_spec(args) -> Optional[FilterSpec]:
    technologies = None
    if args.tech:
        technologies = frozenset(t.strip() for t in args.tech.split(",") if t.strip())
    window = None
    if args.from_year is not None or args.to_year is not None:
        lo = args.from_year if args.from_year is not None else 1990
        hi = args.to_year if args.to_year is not None else 2100
        window = year_window(lo, hi)
    if technologies is None and window is None and args.min_qubits is None:
        return None
    return FilterSpec(technologies=technologies, date_window=window,
                      min_physical_qubits=args.min_qubits)


def _config(args, seed: int) -> ForecastConfig:
    thresholds = tuple(sorted(args.threshold)) if args.threshold else (1.0, 4100.0)
    quantiles = tuple(float(q) for q in args.quantiles.split(","))
    return ForecastConfig(
        thresholds=thresholds,
        resamples=args.resamples,
        seed=seed,
        quantiles=quantiles,
        horizon_end=args.horizon,
        aggregation=args.aggregation,
        window=_filter_spec(args),
        qec=QecParams(p_th=args.p_th, p_L=args.p_l),
    )


def _config_section(args, seed: int) -> dict:
    return {
        "command": args.command,
        "dataset": args.dataset or "bundled",
        "tech": args.tech,
        "from": args.from_year,
        "to": args.to_year,
        "min_qubits": args.min_qubits,
        "thresholds": args.threshold or [1.0, 4100.0],
        "resamples": args.resamples,
        "seed": seed,
        "quantiles": args.quantiles,
        "aggregation": args.aggregation,
        "p_th": args.p_th,
        "p_l": args.p_l,
        "horizon": args.horizon,
        "strict": args.strict,
    }


def _write(out_dir: Path, name: str, content: str) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / name).write_text(content, encoding="utf-8")


def _write_rejects(out_dir: Path, rejects) -> None:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["row", "column", "reason"])
    for r in rejects:
        writer.writerow([r.row, r.column or "", r.reason])
    _write(out_dir, "rejects.csv", out.getvalue())


def _emit_report(args, dataset, qec, seed, sections, warnings) -> None:
    document = build_report(dataset, qec, _config_section(args, seed), sections,
                            warnings)
    _write(Path(args.out), "report.v1.json", render_report(document))


def _warnings_from(rejects, forecast=None) -> list[str]:
    warnings = []
    if rejects:
        warnings.append(f"{len(rejects)} rows rejected during ingestion")
    if forecast is not None:
        if forecast.diagnostics["redraws"]:
            warnings.append(
                f"{forecast.diagnostics['redraws']} degenerate bootstrap resamples "
                "were redrawn"
            )
        for threshold, count in forecast.diagnostics["censored"].items():
            if count:
                warnings.append(
                    f"{count} trajectories did not reach GLQ {threshold:g} "
                    "by the horizon"
                )
    return warnings


def _metric_fits(view, config):
    qubit_points = [(r.fractional_year, float(r.physical_qubits)) for r in view]
    error_points = [(r.fractional_year, r.gate_error_rate) for r in view
                    if r.gate_error_rate is not None]
    fit_q = fit_loglinear(extract_records(qubit_points, "max"))
    fit_e = fit_loglinear(extract_records(error_points, "min"))
    return fit_q, fit_e


def _cmd_ingest(args, dataset, rejects, seed, qec):
    out_dir = Path(args.out)
    _write(out_dir, "normalized.csv", serialize_dataset(dataset))
    _write_rejects(out_dir, rejects)
    _emit_report(args, dataset, qec, seed,
                 {"ingest": {"accepted": len(dataset), "rejected": len(rejects)}},
                 _warnings_from(rejects))
    return 0


def _cmd_metrics(args, dataset, rejects, seed, qec):
    spec = _filter_spec(args)
    view = apply_filter(dataset, spec) if spec else dataset
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["id", "fractional_year", "physical_qubits", "gate_error_rate",
                     "glq", "glq_defined"])
    for r in view:
        if r.gate_error_rate is None:
            glq, defined = "", ""
        else:
            value = generalized_logical_qubits(r.physical_qubits, r.gate_error_rate,
                                               qec)
            glq, defined = repr(value.value), value.defined
        writer.writerow([r.record_id, repr(r.fractional_year), r.physical_qubits,
                         "" if r.gate_error_rate is None else repr(r.gate_error_rate),
                         glq, defined])
    _write(Path(args.out), "metrics.csv", out.getvalue())
    _emit_report(args, dataset, qec, seed,
                 {"metrics": {"counts": view.view_counts(qec)}},
                 _warnings_from(rejects))
    return 0


def _cmd_frontier(args, dataset, rejects, seed, qec):
    spec = _filter_spec(args)
    view = apply_filter(dataset, spec) if spec else dataset
    usable = view.with_error_rate()
    if len(usable) < max(args.min_n, 3):
        raise QcHorizonError(
            f"insufficient data: {len(usable)} records with both metrics, "
            f"need {max(args.min_n, 3)}"
        )
    from .dataset import design_matrices

    X, Y = design_matrices(view)
    fit = fit_multivariate(X, Y)
    cov = bootstrap_covariance(view, resamples=args.resamples, seed=seed)
    _emit_report(args, dataset, qec, seed,
                 {"frontier": frontier_section(fit, cov)}, _warnings_from(rejects))
    _write(Path(args.out), "frontier-ellipses.svg",
           render_figure("frontier-ellipses", fit=fit, dataset=view))
    return 0


def _cmd_forecast(args, dataset, rejects, seed, qec):
    config = _config(args, seed)
    forecast = bootstrap_forecast(dataset, config)
    _emit_report(args, dataset, qec, seed, {"forecast": forecast_section(forecast)},
                 _warnings_from(rejects, forecast))
    view = apply_filter(dataset, config.window) if config.window else dataset
    out_dir = Path(args.out)
    for threshold in config.thresholds:
        _write(out_dir, f"trajectories-{threshold:g}.svg",
               render_figure("forecast-trajectories", forecast=forecast,
                             threshold=threshold, dataset=view, qec=qec))
    fit_q, fit_e = _metric_fits(view, config)
    _write(out_dir, "metric-trend-qubits.svg",
           render_figure("metric-trend-qubits", dataset=view, fit=fit_q,
                         horizon_end=min(config.horizon_end, 2060.0), qec=qec))
    _write(out_dir, "metric-trend-error.svg",
           render_figure("metric-trend-error", dataset=view, fit=fit_e,
                         horizon_end=min(config.horizon_end, 2060.0), qec=qec))
    return 0


def _cmd_validate(args, dataset, rejects, seed, qec):
    config = _config(args, seed)
    train_ends = [int(y) for y in args.train_ends.split(",")]
    targets = [int(y) for y in args.targets.split(",")]
    result = rolling_validate(dataset, train_ends, targets, config)
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["train_window"] + [str(t) for t in sorted(targets, reverse=True)]
                    + ["actual_row"])
    actuals = {c.target_year: c.actual for c in result.cells}
    writer.writerow(["actual_maximum"]
                    + [f"{actuals[t]:.3g}" for t in sorted(targets, reverse=True)]
                    + [""])
    for train_end in train_ends:
        row = [f"through_{train_end}"]
        for t in sorted(targets, reverse=True):
            c = result.cell(train_end, t)
            if not c.applicable:
                row.append("N/A")
            else:
                flag = "green" if c.covered else "red"
                row.append(f"{c.q_low:.3g}; {c.q_med:.3g}; {c.q_high:.3g} [{flag}]")
        writer.writerow(row + [""])
    _write(Path(args.out), "validation.csv", out.getvalue())
    _emit_report(args, dataset, qec, seed,
                 {"validation": validation_section(result)}, _warnings_from(rejects))
    return 0


def _cmd_plot(args, dataset, rejects, seed, qec):
    spec = _filter_spec(args)
    view = apply_filter(dataset, spec) if spec else dataset
    kind = args.figure
    inputs = {"dataset": view, "qec": qec}
    if kind == "frontier-ellipses":
        from .dataset import design_matrices

        X, Y = design_matrices(view)
        inputs["fit"] = fit_multivariate(X, Y)
        inputs["year"] = args.year
    elif kind == "forecast-trajectories":
        inputs["forecast"] = bootstrap_forecast(dataset, _config(args, seed))
    elif kind.startswith("metric-trend"):
        config = _config(args, seed)
        fit_q, fit_e = _metric_fits(view, config)
        inputs["fit"] = fit_q if kind.endswith("qubits") else fit_e
        inputs["horizon_end"] = min(args.horizon, 2060.0)
    elif kind == "gaussian-band":
        config = _config(args, seed)
        fit_q, fit_e = _metric_fits(view, config)
        inputs.update(fit_qubits=fit_q, fit_error=fit_e,
                      level=0.95, window=(2007.0, min(args.horizon, 2060.0)))
    _write(Path(args.out), f"{kind}.svg", render_figure(kind, **inputs))
    return 0


def _cmd_report(args, dataset, rejects, seed, qec):
    config = _config(args, seed)
    view = apply_filter(dataset, config.window) if config.window else dataset
    sections = {}
    warnings = _warnings_from(rejects)
    out_dir = Path(args.out)
    try:
        from .dataset import design_matrices

        X, Y = design_matrices(view)
        fit = fit_multivariate(X, Y)
        cov = bootstrap_covariance(view, resamples=args.resamples, seed=seed)
        sections["frontier"] = frontier_section(fit, cov)
        _write(out_dir, "frontier-ellipses.svg",
               render_figure("frontier-ellipses", fit=fit, dataset=view))
    except QcHorizonError as exc:
        warnings.append(f"frontier analysis skipped: {exc}")
    forecast = bootstrap_forecast(dataset, config)
    sections["forecast"] = forecast_section(forecast)
    warnings.extend(_warnings_from((), forecast))
    for threshold in config.thresholds:
        _write(out_dir, f"trajectories-{threshold:g}.svg",
               render_figure("forecast-trajectories", forecast=forecast,
                             threshold=threshold, dataset=view, qec=qec))
    _write(out_dir, "glq-contour.svg", render_figure("glq-contour", qec=qec))
    _emit_report(args, dataset, qec, seed, sections, warnings)
    return 0


_COMMANDS = {
    "ingest": _cmd_ingest,
    "metrics": _cmd_metrics,
    "frontier": _cmd_frontier,
    "forecast": _cmd_forecast,
    "validate": _cmd_validate,
    "plot": _cmd_plot,
    "report": _cmd_report,
}


def run_command(argv) -> int:
    args = _build_parser().parse_args(argv)
    seed = _resolve_seed(args)
    qec = QecParams(p_th=args.p_th, p_L=args.p_l)
    try:
        dataset, rejects = _load(args)
        return _COMMANDS[args.command](args, dataset, rejects, seed, qec)
    except (QcHorizonError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run_command(sys.argv[1:]))
