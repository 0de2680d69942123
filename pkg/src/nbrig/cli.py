"""
Command-line interface.

    nbrig fit       DATA.csv [--model nbrig|nb|poisson|all]
    nbrig compare   DATA.csv
    nbrig pmf       --r R --alpha A --m M [--x-max N]
    nbrig aggregate --r R --alpha A --m M --severity SEV.csv [--x-max N]
    nbrig simulate  --r R --alpha A --m M --n N --seed S [--severity SEV.csv]

Every flag can also come from ``--config file.json`` (keys are the long flag
names, dashes or underscores); flags given on the command line win.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from . import __version__
from .baselines import fit_nb, fit_poisson
from .compound import SeverityPmf, aggregate_pmf
from .dist import NbrigParams, pmf_recursive_table, sample
from .errors import DomainError, PrecisionLossError
from .fit import FitOptions, compare_models, fit_nbrig_mle
from .gof import CountData, FitReport

COMMANDS = ("fit", "compare", "pmf", "aggregate", "simulate")
FORMATS = ("text", "csv", "json")
MODELS = ("poisson", "nb", "nbrig", "all")
MODEL_ORDER = ("Poisson", "NB", "NBRIG")


class CliError(Exception):
    """User-facing failure; the message goes to stderr."""


@dataclass
class RunConfig:
    command: str
    input: str | None = None
    output: str | None = None
    format: str = "text"
    model: str = "nbrig"
    r: float | None = None
    alpha: float | None = None
    m: float | None = None
    x_max: int = 20
    seed: int | None = None
    severity: str | None = None
    tol: float | None = None
    n: int = 1000


# ---------------------------------------------------------------------------
# input files


def _rows(path: str):
    """Non-blank CSV rows with 1-based line numbers."""
    try:
        text = Path(path).read_text(encoding="utf-8-sig")
    except FileNotFoundError:
        raise CliError(f"{path}: no such file") from None
    except (OSError, UnicodeDecodeError) as exc:
        raise CliError(f"{path}: cannot read ({exc})") from None
    for lineno, row in enumerate(csv.reader(io.StringIO(text, newline="")), start=1):
        row = [c.strip() for c in row]
        if not row or all(c == "" for c in row):
            continue
        yield lineno, row


def _data_rows(path: str, header: tuple[str, ...]):
    first = True
    for lineno, row in _rows(path):
        if first and tuple(c.lower() for c in row) == header:
            first = False
            continue
        first = False
        if len(row) != 2:
            raise CliError(f"{path}:{lineno}: expected 2 columns, got {len(row)}")
        yield lineno, row


def ingest_counts(path: str) -> CountData:
    """
    Read a ``count,frequency`` CSV (header optional).  Rejects negative or
    non-integer cells and repeated counts, citing the line number.
    """
    pairs, seen = [], {}
    for lineno, (a, b) in _data_rows(path, ("count", "frequency")):
        try:
            x, n = int(a), int(b)
        except ValueError:
            raise CliError(f"{path}:{lineno}: non-integer value in {a!r},{b!r}") from None
        if x < 0 or n < 0:
            raise CliError(f"{path}:{lineno}: negative value in {a!r},{b!r}")
        if x in seen:
            raise CliError(f"{path}:{lineno}: duplicate count {x} (first on line {seen[x]})")
        seen[x] = lineno
        pairs.append((x, n))
    if not pairs:
        raise CliError(f"{path}: no data rows")
    try:
        return CountData.from_pairs(pairs)
    except DomainError as exc:
        raise CliError(f"{path}: {exc}") from None


def read_severity(path: str) -> SeverityPmf:
    """Read a ``y,probability`` CSV (header optional) into a ``SeverityPmf``."""
    mass, seen = {}, {}
    for lineno, (a, b) in _data_rows(path, ("y", "probability")):
        try:
            y, q = int(a), float(b)
        except ValueError:
            raise CliError(f"{path}:{lineno}: expected integer size and real probability, got {a!r},{b!r}") from None
        if y < 0 or not (q >= 0 and math.isfinite(q)):
            raise CliError(f"{path}:{lineno}: size and probability must be nonnegative")
        if y in seen:
            raise CliError(f"{path}:{lineno}: duplicate size {y} (first on line {seen[y]})")
        seen[y] = lineno
        mass[y] = q
    if not mass:
        raise CliError(f"{path}: no data rows")
    try:
        return SeverityPmf.from_mapping(mass)
    except DomainError as exc:
        raise CliError(f"{path}: {exc}") from None


# ---------------------------------------------------------------------------
# formatting


def _num(v, fmt: str) -> str:
    if v is None:
        return "NA" if fmt == "text" else ""
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    return f"{float(v):.6g}" if fmt == "text" else f"{float(v):.17g}"


def _jsonable(v):
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple, np.ndarray)):
        return [_jsonable(x) for x in v]
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(f"{float(v):.17g}")
        return v if math.isfinite(v) else None
    return v


def _dump_json(obj) -> str:
    return json.dumps(_jsonable(obj), indent=2) + "\n"


def _text_table(header: list[str], rows: list[list[str]]) -> str:
    widths = [max(len(h), *(len(r[i]) for r in rows)) if rows else len(h) for i, h in enumerate(header)]
    lines = ["  ".join(h.rjust(w) for h, w in zip(header, widths))]
    lines += ["  ".join(c.rjust(w) for c, w in zip(r, widths)) for r in rows]
    return "\n".join(lines) + "\n"


def _csv_text(header: list[str], rows: list[list[str]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _columns(header, cols, fmt):
    rows = [[_num(v, fmt) for v in vals] for vals in zip(*cols)]
    return _text_table(header, rows) if fmt == "text" else _csv_text(header, rows)


def render_reports(data: CountData, reports: list[FitReport], fmt: str) -> str:
    """Observed vs expected table plus per-model summaries."""
    if fmt == "json":
        return _dump_json({
            "total": data.total,
            "observed": {str(x): n for x, n in data.cells},
            "reports": [r.to_dict() for r in reports],
        })
    if fmt == "csv":
        rows = []
        for rep in reports:
            for k, v in rep.params.items():
                rows.append([rep.model, "param_" + k, "", _num(v, fmt)])
            for key in ("log_likelihood", "chi2", "df", "p_value", "aic"):
                rows.append([rep.model, key, "", _num(getattr(rep, key), fmt)])
            rows.append([rep.model, "converged", "", str(rep.converged).lower()])
            for x, e in enumerate(rep.expected):
                rows.append([rep.model, "expected", str(x), _num(e, fmt)])
        return _csv_text(["model", "quantity", "count", "value"], rows)

    cols = sorted(reports, key=lambda r: MODEL_ORDER.index(r.model) if r.model in MODEL_ORDER else 99)
    top = len(cols[0].expected) - 1
    obs = data.observed_table(top + 1)
    rows = []
    for x in range(top + 1):
        label = f"{x}+" if x == top else str(x)
        rows.append([label, str(int(obs[x]))] + [_num(r.expected[x], fmt) for r in cols])
    rows.append(["Total", str(data.total)] + [_num(sum(r.expected), fmt) for r in cols])
    out = _text_table(["Count", "Observed"] + [r.model for r in cols], rows)
    summary = []
    for r in cols:
        summary.append([
            r.model,
            ", ".join(f"{k}={_num(v, fmt)}" for k, v in r.params.items()),
            _num(r.log_likelihood, fmt),
            f"{_num(r.chi2, fmt)}({r.df})",
            _num(r.p_value, fmt),
            _num(r.aic, fmt),
            "yes" if r.converged else "NO",
        ])
    out += "\n" + _text_table(["Model", "Estimates", "logL", "chi2(df)", "p-value", "AIC", "converged"], summary)
    ranking = " < ".join(r.model for r in sorted(reports, key=lambda r: r.aic))
    return out + f"\nAIC ranking: {ranking}\n"


# ---------------------------------------------------------------------------
# commands


def _params(cfg: RunConfig) -> NbrigParams:
    missing = [k for k in ("r", "alpha", "m") if getattr(cfg, k) is None]
    if missing:
        raise CliError(f"{cfg.command} needs --r, --alpha and --m (missing: {', '.join(missing)})")
    try:
        return NbrigParams.of(cfg.r, cfg.alpha, cfg.m)
    except DomainError as exc:
        raise CliError(str(exc)) from None


def _fit_options(cfg: RunConfig) -> FitOptions:
    kw = {}
    if cfg.tol is not None:
        kw["tol"] = cfg.tol
    given = [getattr(cfg, k) for k in ("r", "alpha", "m")]
    if all(v is not None for v in given):
        kw["inits"] = (tuple(given),)
    return FitOptions(**kw)


def cmd_fit(cfg: RunConfig) -> str:
    data = ingest_counts(_need_input(cfg))
    if cfg.model == "all":
        reports = compare_models(data, _fit_options(cfg))
    else:
        fitter = {"poisson": fit_poisson, "nb": fit_nb}.get(cfg.model)
        reports = [fitter(data) if fitter else fit_nbrig_mle(data, _fit_options(cfg))]
    return render_reports(data, reports, cfg.format)


def cmd_compare(cfg: RunConfig) -> str:
    data = ingest_counts(_need_input(cfg))
    return render_reports(data, compare_models(data, _fit_options(cfg)), cfg.format)


def cmd_pmf(cfg: RunConfig) -> str:
    p = _params(cfg)
    probs = pmf_recursive_table(cfg.x_max, p)
    xs = list(range(cfg.x_max + 1))
    if cfg.format == "json":
        return _dump_json({"params": p.as_dict(), "x": xs, "pmf": probs.tolist()})
    return _columns(["x", "pmf"], [xs, probs.tolist()], cfg.format)


def cmd_aggregate(cfg: RunConfig) -> str:
    p = _params(cfg)
    if not cfg.severity:
        raise CliError("aggregate needs --severity FILE")
    sev = read_severity(cfg.severity)
    agg = aggregate_pmf(p, sev, cfg.x_max)
    xs = list(range(cfg.x_max + 1))
    masses = agg.masses().tolist()
    if cfg.format == "json":
        return _dump_json({"params": p.as_dict(), "x": xs, "mass": masses, "tail": agg.tail, "method": agg.method})
    return _columns(["x", "mass"], [xs, masses], cfg.format)


def cmd_simulate(cfg: RunConfig) -> str:
    p = _params(cfg)
    if cfg.n < 1:
        raise CliError("--n must be a positive integer")
    rng = np.random.default_rng(cfg.seed)
    counts = sample(cfg.n, p, rng)
    name, values = "count", counts
    if cfg.severity:
        sev = read_severity(cfg.severity)
        sizes = rng.choice(len(sev.probs), size=int(counts.sum()), p=sev.probs)
        ends = np.cumsum(counts)
        csum = np.concatenate([[0], np.cumsum(sizes)])
        values = csum[ends] - csum[ends - counts]
        name = "loss"
    if cfg.format == "json":
        return _dump_json({"params": p.as_dict(), "seed": cfg.seed, name: values.tolist()})
    return _columns([name], [values.tolist()], cfg.format)


HANDLERS = {"fit": cmd_fit, "compare": cmd_compare, "pmf": cmd_pmf, "aggregate": cmd_aggregate, "simulate": cmd_simulate}


def _need_input(cfg: RunConfig) -> str:
    if not cfg.input:
        raise CliError(f"{cfg.command} needs an input CSV (positional or --input)")
    return cfg.input


# ---------------------------------------------------------------------------
# argument handling


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("input_pos", nargs="?", metavar="INPUT", help="input CSV (same as --input)")
    common.add_argument("--input", "-i")
    common.add_argument("--output", "-o", help="write the artifact here instead of stdout")
    common.add_argument("--format", choices=FORMATS)
    common.add_argument("--config", help="JSON file with defaults for any flag")
    common.add_argument("--model", choices=MODELS)
    common.add_argument("--r", type=float)
    common.add_argument("--alpha", type=float)
    common.add_argument("--m", type=float)
    common.add_argument("--x-max", dest="x_max", type=int)
    common.add_argument("--seed", type=int)
    common.add_argument("--severity", help="claim-size CSV with columns y,probability")
    common.add_argument("--tol", type=float, help="simplex tolerance in log-parameter space")
    common.add_argument("--n", "-n", type=int, help="number of draws for simulate")

    parser = argparse.ArgumentParser(prog="nbrig", description="NBRIG count distribution toolkit")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def _load_config(path: str) -> dict:
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise CliError(f"{path}: no such config file") from None
    except (OSError, json.JSONDecodeError) as exc:
        raise CliError(f"{path}: invalid config ({exc})") from None
    if not isinstance(raw, dict):
        raise CliError(f"{path}: config must be a JSON object")
    known = {f.name for f in fields(RunConfig)} - {"command"}
    out = {}
    for k, v in raw.items():
        key = k.replace("-", "_")
        if key not in known:
            raise CliError(f"{path}: unknown config key {k!r}")
        out[key] = v
    return out


def resolve_config(ns: argparse.Namespace) -> RunConfig:
    """Flags override the config file, which overrides the defaults."""
    file_cfg = _load_config(ns.config) if ns.config else {}
    flags = {f.name: getattr(ns, f.name, None) for f in fields(RunConfig) if f.name != "command"}
    if ns.input_pos is not None:
        if ns.input is not None and ns.input != ns.input_pos:
            raise CliError("input given both positionally and with --input")
        flags["input"] = ns.input_pos
    merged = {k: v for k, v in file_cfg.items()}
    merged.update({k: v for k, v in flags.items() if v is not None})
    cfg = RunConfig(command=ns.command, **merged)
    if cfg.format not in FORMATS:
        raise CliError(f"unknown format {cfg.format!r}")
    if cfg.model not in MODELS:
        raise CliError(f"unknown model {cfg.model!r}")
    if int(cfg.x_max) != cfg.x_max or cfg.x_max < 0:
        raise CliError("--x-max must be a nonnegative integer")
    for path in (cfg.input, cfg.severity):
        if path is not None and not Path(path).is_file():
            raise CliError(f"{path}: no such file")
    if cfg.output is not None and not Path(cfg.output).resolve().parent.is_dir():
        raise CliError(f"{cfg.output}: output directory does not exist")
    return cfg


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = resolve_config(ns)
        text = HANDLERS[cfg.command](cfg)
    except CliError as exc:
        print(f"nbrig: error: {exc}", file=sys.stderr)
        return 2
    except (DomainError, PrecisionLossError) as exc:
        print(f"nbrig: error: {exc}", file=sys.stderr)
        return 1
    if cfg.output:
        Path(cfg.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
