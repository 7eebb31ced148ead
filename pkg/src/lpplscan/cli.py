"""Command-line front end: fit, scan, synth, price, cascade.

Exit codes: 0 success, 1 domain error, 2 usage error. Domain errors go to
stderr as one JSON object so scripts can parse them.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

from . import calibration, model, scanner, synth, timeseries
from .errors import DomainError

DEFAULT_SEED = 42


def _fmt(x: float) -> str:
    return format(float(x), ".12g")


def _parse_kv(pairs: list[str]) -> dict[str, str]:
    out = {}
    for pair in pairs:
        if "=" not in pair:
            raise UsageError(f"expected KEY=VALUE, got {pair!r}")
        key, value = pair.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def _parse_pair(text: str) -> tuple[float, float]:
    parts = [float(p) for p in text.split(",")]
    if len(parts) != 2:
        raise UsageError(f"expected two comma-separated numbers, got {text!r}")
    return parts[0], parts[1]


class UsageError(Exception):
    pass


def _read_config_file(path: str) -> dict[str, str]:
    """key = value lines, # comments; same keys as the scan/filter flags."""
    out = {}
    for raw in Path(path).read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"bad config line: {raw!r}")
        key, value = line.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def _build_filters(kv: dict[str, str]) -> calibration.FilterConfig:
    kwargs = {}
    if "m_range" in kv:
        kwargs["m_range"] = _parse_pair(kv["m_range"])
    if "omega_range" in kv:
        kwargs["omega_range"] = _parse_pair(kv["omega_range"])
    if "tc_horizon" in kv:
        kwargs["tc_horizon"] = float(kv["tc_horizon"])
    if "max_rmse" in kv:
        kwargs["max_rmse"] = float(kv["max_rmse"])
    if "min_oscillations" in kv:
        kwargs["min_oscillations"] = float(kv["min_oscillations"])
    return calibration.FilterConfig(**kwargs)


def _build_search(kv: dict[str, str]) -> calibration.SearchConfig:
    kwargs = {}
    if "n_starts" in kv:
        kwargs["n_starts"] = int(kv["n_starts"])
    if "max_iter" in kv:
        kwargs["max_iter"] = int(kv["max_iter"])
    return calibration.SearchConfig(**kwargs)


def _load_series(path: str, date_column: str, price_column: str):
    opts = timeseries.CsvOptions(date_column=date_column, price_column=price_column)
    with open(path, newline="") as fh:
        result = timeseries.load_csv(fh, opts, label=Path(path).stem)
    for rej in result.rejected:
        print(
            json.dumps({"warning": "row rejected", "line": rej.line, "reason": rej.reason}),
            file=sys.stderr,
        )
    return result.series


def _json_dump(obj, path: Path) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def cmd_fit(args) -> int:
    series = _load_series(args.input, args.date_column, args.price_column)
    t1 = timeseries.parse_time(args.t1)
    t2 = timeseries.parse_time(args.t2)
    kv = dict(args.config_kv)
    kv.update(_parse_kv(args.filters))
    window = timeseries.slice_window(series, t1, t2, min_points=int(kv.get("min_points", 30)))
    fit = calibration.fit_window(
        series, window, _build_search(kv), _build_filters(kv), seed=args.seed
    )
    text = json.dumps(fit.to_dict(), indent=2, sort_keys=True)
    if args.out:
        Path(args.out).write_text(text + "\n")
    else:
        print(text)
    return 0


def cmd_scan(args) -> int:
    series = _load_series(args.input, args.date_column, args.price_column)
    kv = dict(args.config_kv)
    kv.update(_parse_kv(args.filters))
    config_kwargs = dict(
        search=_build_search(kv),
        filters=_build_filters(kv),
        seed=args.seed,
        n_jobs=args.jobs,
    )
    if args.windows:
        config_kwargs["window_lengths"] = tuple(float(w) for w in args.windows.split(","))
    elif "window_lengths" in kv:
        config_kwargs["window_lengths"] = tuple(
            float(w) for w in kv["window_lengths"].split(",")
        )
    if args.every is not None:
        config_kwargs["end_every"] = args.every
    elif "end_every" in kv:
        config_kwargs["end_every"] = int(kv["end_every"])
    if args.band:
        config_kwargs["band"] = _parse_pair(args.band)
    if "min_points" in kv:
        config_kwargs["min_points"] = int(kv["min_points"])
    config = scanner.ScanConfig(**config_kwargs)

    rep = scanner.report(series, config)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    stem = Path(args.input).stem
    _json_dump(rep.to_dict(), out / f"{stem}_report.json")
    with open(out / f"{stem}_report.csv", "w", newline="") as fh:
        csv.writer(fh, lineterminator="\n").writerows(rep.to_csv_rows())
    print(
        json.dumps(
            {
                "report_json": str(out / f"{stem}_report.json"),
                "report_csv": str(out / f"{stem}_report.csv"),
                "max_alarm": rep.max_alarm,
                "n_fits": rep.n_fits,
                "n_skipped": rep.n_skipped,
            }
        )
    )
    return 0


def _synth_regime(kind: str, params: dict[str, str]):
    p = {k: float(v) for k, v in params.items()}
    if kind == "lppl":
        return model.LpplParams(
            t_c=p["t_c"],
            m=p.get("m", 0.5),
            omega=p.get("omega", 6.28),
            phi=p.get("phi", 0.0),
            A=p.get("A", 5.0),
            B=p.get("B", -1.0),
            C=p.get("C", 0.05),
        )
    if kind == "exp":
        return model.GrowthSpec(kind="exponential", rate=p.get("rate", 0.001), p0=p.get("p0", 1.0))
    if kind == "logistic":
        return model.GrowthSpec(
            kind="logistic",
            rate=p.get("rate", 0.01),
            p0=p.get("p0", 1.0),
            capacity=p.get("capacity", 100.0),
        )
    if kind == "hyperbolic":
        return model.GrowthSpec(
            kind="hyperbolic",
            t_c=p.get("t_c", 100.0),
            alpha=p.get("alpha", 1.0),
            scale=p.get("scale", 1.0),
        )
    raise UsageError(f"unknown regime {kind!r}")


def cmd_synth(args) -> int:
    params = _parse_kv(args.params)
    grid = [float(g) for g in args.grid.split(",")]
    if len(grid) != 3:
        raise UsageError("--grid expects t_start,t_end,step")
    spec = synth.SynthSpec(
        regime=_synth_regime(args.regime, params),
        t_start=grid[0],
        t_end=grid[1],
        step=grid[2],
        noise_sigma=args.noise,
        seed=args.seed,
        label=Path(args.out).stem,
    )
    result = synth.generate(spec)
    csv_path = Path(args.out)
    csv_path.parent.mkdir(parents=True, exist_ok=True)
    with open(csv_path, "w", newline="") as fh:
        timeseries.save_csv(result.series, fh)
    truth_path = csv_path.with_suffix(".truth.json")
    _json_dump(result.truth, truth_path)
    print(json.dumps({"csv": str(csv_path), "truth": str(truth_path), "n": len(result.series)}))
    return 0


def cmd_price(args) -> int:
    dm = model.DividendModel(D=args.dividend, r=args.ret, g=args.growth)
    print(_fmt(model.gordon_shapiro_price(dm)))
    return 0


def cmd_cascade(args) -> int:
    rows = model.cascade(args.p0, args.rate, args.steps)
    writer = csv.writer(
        open(args.out, "w", newline="") if args.out else sys.stdout, lineterminator="\n"
    )
    writer.writerow(["time", "population", "rate", "doubling_time"])
    for row in rows:
        writer.writerow([_fmt(row.time), _fmt(row.population), _fmt(row.rate), _fmt(row.doubling_time)])
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lpplscan",
        description="Bubble diagnostics via log-periodic power law calibration.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_io(p):
        p.add_argument("--input", required=True, help="input CSV path")
        p.add_argument("--date-column", default="date")
        p.add_argument("--price-column", default="price")
        p.add_argument("--config", help="key=value config file; flags override it")
        p.add_argument("--seed", type=int, default=DEFAULT_SEED)
        p.add_argument(
            "--filters",
            nargs="*",
            default=[],
            metavar="K=V",
            help="filter/search overrides, e.g. tc_horizon=0.5 n_starts=10",
        )

    p_fit = sub.add_parser("fit", help="calibrate one window")
    add_io(p_fit)
    p_fit.add_argument("--t1", required=True, help="window start (ISO date or day number)")
    p_fit.add_argument("--t2", required=True, help="window end")
    p_fit.add_argument("--out", help="write the fit JSON here instead of stdout")
    p_fit.set_defaults(func=cmd_fit)

    p_scan = sub.add_parser("scan", help="rolling ensemble scan")
    add_io(p_scan)
    p_scan.add_argument("--windows", help="comma-separated window lengths in days")
    p_scan.add_argument("--every", type=int, help="evaluate every k-th observation")
    p_scan.add_argument("--band", help="quantile band, e.g. 0.1,0.9")
    p_scan.add_argument("--jobs", type=int, default=1, help="max concurrent fits")
    p_scan.add_argument("--out", default=".", help="output directory")
    p_scan.set_defaults(func=cmd_scan)

    p_synth = sub.add_parser("synth", help="generate a synthetic series")
    p_synth.add_argument(
        "--regime", required=True, choices=["lppl", "exp", "logistic", "hyperbolic"]
    )
    p_synth.add_argument("--params", nargs="*", default=[], metavar="K=V")
    p_synth.add_argument("--grid", default="0,199,1", help="t_start,t_end,step")
    p_synth.add_argument("--noise", type=float, default=0.0)
    p_synth.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p_synth.add_argument("--out", default="synth.csv", help="output CSV path")
    p_synth.set_defaults(func=cmd_synth)

    p_price = sub.add_parser("price", help="dividend-discount fair price")
    p_price.add_argument("--dividend", type=float, required=True)
    p_price.add_argument("--return", dest="ret", type=float, required=True)
    p_price.add_argument("--growth", type=float, required=True)
    p_price.set_defaults(func=cmd_price)

    p_cascade = sub.add_parser("cascade", help="doubling-cascade table")
    p_cascade.add_argument("--p0", type=float, required=True)
    p_cascade.add_argument("--rate", type=float, required=True)
    p_cascade.add_argument("--steps", type=int, required=True)
    p_cascade.add_argument("--out", help="write CSV here instead of stdout")
    p_cascade.set_defaults(func=cmd_cascade)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if getattr(args, "config", None):
            args.config_kv = _read_config_file(args.config)
        else:
            args.config_kv = {}
        return args.func(args)
    except UsageError as exc:
        print(json.dumps({"error": {"type": "usage", "message": str(exc)}}), file=sys.stderr)
        return 2
    except OSError as exc:
        print(json.dumps({"error": {"type": "io", "message": str(exc)}}), file=sys.stderr)
        return 2
    except DomainError as exc:
        print(
            json.dumps({"error": {"type": type(exc).__name__, "message": str(exc)}}),
            file=sys.stderr,
        )
        return 1


if __name__ == "__main__":
    sys.exit(main())
