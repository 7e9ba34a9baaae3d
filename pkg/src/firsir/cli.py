"""Command-line front end.

    firsir --input cases.csv --population 21292666 --convention derived_active \\
           --start-date 2020-08-01 --method both --out result.json --plot-out plot.csv

Exit codes: 0 success, 1 input or configuration error, 2 numerical failure.
Errors are reported on stderr as a one-line JSON record.
"""

from __future__ import annotations

import argparse
import csv
import datetime as dt
import hashlib
import io
import json
import os
import sys
import tempfile

import numpy as np

from . import __version__
from .data import Convention, WindowSpec, build_window, read_csv, window_dates
from .epidemic import EpidemicSeries, extract_rates, extract_rates_chen, to_fractions
from .evaluation import (
    DEFAULT_ALPHAS,
    MODIFIED,
    ORIGINAL,
    Window,
    err_w,
    format_error,
    grid_sweep,
    run_method,
)
from .exceptions import FirSirError, InvalidInputError, NumericalError
from .fir import FirConfig

EXIT_OK, EXIT_INPUT, EXIT_NUMERICAL = 0, 1, 2

# Published per-method choices, used when the flag is left unset.
METHOD_DEFAULTS = {
    ORIGINAL: {"J": 3, "K": 3, "alpha1": 0.03, "alpha2": 1e-6},
    MODIFIED: {"J": "auto", "K": "auto", "alpha1": 1e-3, "alpha2": 1e-4},
}

RESULT_FORMAT = "firsir.forecast/1"
SWEEP_FORMAT = "firsir.sweep/1"


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _order(text):
    if text == "auto":
        return text
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer or 'auto', got {text!r}") from None
    return value


def _date(text):
    try:
        return dt.date.fromisoformat(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an ISO date, got {text!r}") from None


def _float_list(text):
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _order_list(text):
    return [_order(x.strip()) for x in text.split(",") if x.strip()]


def build_parser():
    p = _Parser(prog="firsir", description="Track and forecast SIR rates with ridge-fitted FIR filters.")
    p.add_argument("--input", required=True, help="case CSV file")
    p.add_argument("--population", required=True, type=float, help="population size n")
    p.add_argument("--convention", required=True, choices=[c.value for c in Convention],
                   help="how I(t) is read: active_column or derived_active (confirmed - recovered - deaths)")
    p.add_argument("--start-date", type=_date, help="day t=0 (default: first day in the file)")
    p.add_argument("--horizon", "-T", dest="T", type=int, default=45, help="known days T (default 45)")
    p.add_argument("--window", "-W", dest="W", type=int, default=7, help="forecast days W (default 7)")
    p.add_argument("--method", choices=[ORIGINAL, MODIFIED, "both"], default=MODIFIED)
    p.add_argument("--order-j", type=_order, help="beta filter order or 'auto' = round(T/4)")
    p.add_argument("--order-k", type=_order, help="gamma filter order or 'auto'")
    p.add_argument("--alpha1", type=float, help="ridge parameter for the beta filter")
    p.add_argument("--alpha2", type=float, help="ridge parameter for the gamma filter")
    p.add_argument("--out", help="result document (JSON); stdout when omitted")
    p.add_argument("--plot-out", help="plot table (CSV) with observed and predicted counts")
    p.add_argument("--sweep", action="store_true", help="grid-search orders and ridge parameters")
    p.add_argument("--grid-orders", type=_order_list, default=[3, "auto"], help="sweep orders (J = K)")
    p.add_argument("--grid-alphas", type=_float_list, default=list(DEFAULT_ALPHAS), help="sweep ridge values")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    return p


def _fir_config(args, method):
    base = METHOD_DEFAULTS[method]
    explicit = {"J": args.order_j, "K": args.order_k, "alpha1": args.alpha1, "alpha2": args.alpha2}
    # With --method both the original block keeps its published settings.
    use_flags = args.method != "both" or method == MODIFIED
    params = {k: (v if use_flags and v is not None else base[k]) for k, v in explicit.items()}
    return FirConfig(T=args.T, W=args.W, **params)


def _floats(values):
    return [float(v) for v in np.asarray(values, dtype=np.float64)]


def _sha256(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def _fir_echo(cfg: FirConfig):
    return {"J": cfg.J, "K": cfg.K, "alpha1": cfg.alpha1, "alpha2": cfg.alpha2, "T": cfg.T, "W": cfg.W}


def _load(args):
    table = read_csv(args.input)
    if not table.records:
        raise InvalidInputError(f"{args.input}: no data rows")
    start = args.start_date or table.records[0].date
    spec = WindowSpec(start, args.T, args.W)
    known, truth = build_window(table, spec, args.population, args.convention)
    return table, spec, known, truth


def _base_config(args, spec):
    return {
        "input": args.input,
        "input_sha256": _sha256(args.input),
        "population": args.population,
        "convention": Convention(args.convention).value,
        "start_date": spec.start_date.isoformat(),
        "T": spec.T,
        "W": spec.W,
        "method": args.method,
    }


def run_forecast(args):
    """Compute the result document and plot table; nothing is written here."""
    table, spec, known, truth = _load(args)
    dates = [d.isoformat() for d in window_dates(spec)]
    methods = [ORIGINAL, MODIFIED] if args.method == "both" else [args.method]
    config = _base_config(args, spec)
    config["fir"] = {}
    results = []
    for method in methods:
        cfg = _fir_config(args, method)
        config["fir"][method] = _fir_echo(cfg)
        trace, I_hat, R_hat = run_method(known, cfg, method)
        e_i, e_r = err_w(truth.infected, I_hat), err_w(truth.removed, R_hat)
        rates = _measured_rates(known, method)
        results.append({
            "method": method,
            "fir": _fir_echo(cfg),
            "rates": {"beta": _floats(rates.beta), "gamma": _floats(rates.gamma)},
            "forecast": {
                "dates": dates[spec.T:],
                "beta_hat": _floats(trace.beta_hat),
                "gamma_hat": _floats(trace.gamma_hat),
                "I_hat": _floats(I_hat),
                "R_hat": _floats(R_hat),
            },
            "errors": {
                "err_I": e_i,
                "err_R": e_r,
                "err_I_display": format_error(e_i),
                "err_R_display": format_error(e_r),
            },
            "warnings": list(rates.warnings) + list(trace.warnings),
        })
    doc = {
        "format": RESULT_FORMAT,
        "config": config,
        "observed": {
            "dates": dates,
            "I": _floats(np.concatenate([known.infected, truth.infected])),
            "R": _floats(np.concatenate([known.removed, truth.removed])),
        },
        "truth": {"dates": dates[spec.T:], "I": _floats(truth.infected), "R": _floats(truth.removed)},
        "results": results,
        "warnings": list(table.warnings),
    }
    return doc, _plot_table(doc, spec)


def _measured_rates(known, method):
    return extract_rates_chen(known) if method == ORIGINAL else extract_rates(to_fractions(known))


def _plot_table(doc, spec):
    results = doc["results"]
    suffixes = [""] if len(results) == 1 else [f"_{r['method']}" for r in results]
    header = ["day", "date", "I", "R"]
    for s in suffixes:
        header += [f"I_hat{s}", f"R_hat{s}"]
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    obs = doc["observed"]
    for day, date in enumerate(obs["dates"]):
        row = [day, date, repr(obs["I"][day]), repr(obs["R"][day])]
        for r in results:
            k = day - spec.T
            if k >= 0:
                row += [repr(r["forecast"]["I_hat"][k]), repr(r["forecast"]["R_hat"][k])]
            else:
                row += ["", ""]
        writer.writerow(row)
    return buf.getvalue()


def run_sweep(args):
    """Grid sweep with the modified method; returns the document and a text table."""
    table, spec, known, truth = _load(args)
    series = EpidemicSeries(
        np.concatenate([known.infected, truth.infected]),
        np.concatenate([known.removed, truth.removed]),
        known.population,
    )
    rows = grid_sweep(series, Window(0, spec.T, spec.W, spec.start_date.isoformat()),
                      orders=args.grid_orders, alphas=args.grid_alphas)
    config = _base_config(args, spec)
    config["method"] = MODIFIED
    config["grid"] = {"orders": list(args.grid_orders), "alphas": list(args.grid_alphas)}
    out_rows = []
    for rank, row in enumerate(rows, start=1):
        entry = {
            "rank": rank,
            "best": rank == 1 and row.ok,
            "fir": _fir_echo(row.config) if row.config is not None else None,
            "err_I": row.error.err_i if row.ok else None,
            "err_R": row.error.err_r if row.ok else None,
            "failure": row.failure,
        }
        out_rows.append(entry)
    doc = {"format": SWEEP_FORMAT, "config": config, "rows": out_rows, "warnings": list(table.warnings)}
    return doc, _sweep_text(out_rows)


def _sweep_text(rows):
    lines = [f"{'rank':>4}  {'J':>3} {'K':>3}  {'alpha1':>8} {'alpha2':>8}  {'err_I':>11} {'err_R':>11}"]
    for r in rows:
        fir = r["fir"] or {}
        mark = " *" if r["best"] else ""
        if r["failure"] is None:
            errs = f"{format_error(r['err_I']):>11} {format_error(r['err_R']):>11}"
        else:
            errs = f"FAILED: {r['failure']}"
        lines.append(
            f"{r['rank']:>4}  {fir.get('J', '-'):>3} {fir.get('K', '-'):>3}  "
            f"{fir.get('alpha1', float('nan')):>8.0e} {fir.get('alpha2', float('nan')):>8.0e}  {errs}{mark}"
        )
    return "\n".join(lines) + "\n"


def _dump(doc):
    return json.dumps(doc, indent=2, allow_nan=False) + "\n"


def _write_atomic(path, text):
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".firsir-")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _fail(kind, message, code, stderr):
    stderr.write(json.dumps({"error": {"type": kind, "message": message, "exit_code": code}}) + "\n")
    return code


def main(argv=None, stdout=None, stderr=None):
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        return _fail("UsageError", str(exc), EXIT_INPUT, stderr)
    try:
        if args.sweep:
            doc, text = run_sweep(args)
            plot = None
        else:
            doc, plot = run_forecast(args)
            text = None
        payload = _dump(doc)
    except NumericalError as exc:
        return _fail(type(exc).__name__, str(exc), EXIT_NUMERICAL, stderr)
    except (FirSirError, OSError, UnicodeDecodeError) as exc:
        return _fail(type(exc).__name__, str(exc), EXIT_INPUT, stderr)

    try:
        if args.out:
            _write_atomic(args.out, payload)
        elif text is None:
            stdout.write(payload)
        if plot is not None and args.plot_out:
            _write_atomic(args.plot_out, plot)
    except OSError as exc:
        return _fail(type(exc).__name__, str(exc), EXIT_INPUT, stderr)
    if text is not None:
        stdout.write(text)
        if not args.out:
            stdout.write(payload)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
