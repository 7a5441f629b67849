"""Command-line interface.

Five subcommands: simulate, figure4, estimate, identify, paths.  Each one
builds a RunManifest, so scripted callers can construct manifests directly
and reuse run() without touching argparse.

Exit codes: 0 success, 1 usage errors, 2 data/configuration errors,
3 numeric failures.
"""
from __future__ import annotations

import argparse
import io as _stringio
import json
import logging
import sys
from dataclasses import dataclass, field

from . import io as dataio
from .errors import SpilloverLabError, UsageError
from .graph import enumerate_paths
from .identify import BIASED, bound_inference, classify_identification, mediated_component_note
from .presets import PRESETS, resolve_model
from .simulate import (
    BINARY_MODE,
    LINEAR_MODE,
    config_from_model,
    figure4_table,
    monte_carlo,
    preset_config,
    simulate_sample,
)

log = logging.getLogger(__name__)


@dataclass
class RunManifest:
    """Everything one CLI invocation needs, already validated by argparse."""

    subcommand: str
    model: str | None = None
    data: str | None = None
    out: str | None = None
    plot: str | None = None
    data_out: str | None = None
    fmt: str = "csv"
    seed: int = 20107
    reps: int = 1000
    n: int = 5000
    mode: str = BINARY_MODE
    conf: float = 0.95
    adjust: bool = False
    robust: bool = False
    draws: int = 200
    src: str | None = None
    dst: str | None = None
    given: tuple[str, ...] = ()
    include_all_paths: bool = False
    overrides: dict = field(default_factory=dict)
    error_json: bool = False


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # noqa: A003 - argparse hook
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--out", help="write the main output here instead of stdout")
    common.add_argument("--error-json", action="store_true",
                        help="emit errors to stderr as JSON")

    parser = _Parser(prog="spillover-lab",
                     description="Sibling spillover effects via gain-score regression")
    sub = parser.add_subparsers(dest="subcommand", required=True, metavar="COMMAND")

    sim = sub.add_parser("simulate", parents=[common],
                         help="Monte Carlo study of one model")
    sim.add_argument("--model", required=True,
                     help=f"preset id ({', '.join(PRESETS)}) or path to a model JSON")
    sim.add_argument("--n", type=int, default=5000, help="sibling pairs per replicate")
    sim.add_argument("--reps", type=int, default=1000, help="number of replicates")
    sim.add_argument("--seed", type=int, required=True, help="master seed")
    sim.add_argument("--mode", choices=[BINARY_MODE, LINEAR_MODE], default=BINARY_MODE,
                     help="exposure-generation mode")
    sim.add_argument("--format", dest="fmt", choices=["csv", "json", "svg"], default="csv")
    sim.add_argument("--set", dest="overrides", action="append", default=[],
                     metavar="NAME=VALUE", help="override a preset coefficient")
    sim.add_argument("--plot", help="also render a dot-and-whisker figure to this file")
    sim.add_argument("--data-out", dest="data_out",
                     help="write the first replicate's sample as CSV")

    fig = sub.add_parser("figure4", parents=[common],
                         help="Monte Carlo summary table across all nine models")
    fig.add_argument("--n", type=int, default=5000)
    fig.add_argument("--reps", type=int, default=1000)
    fig.add_argument("--seed", type=int, required=True, help="master seed")
    fig.add_argument("--mode", choices=[BINARY_MODE, LINEAR_MODE], default=BINARY_MODE)
    fig.add_argument("--format", dest="fmt", choices=["csv", "json", "svg"], default="csv")
    fig.add_argument("--plot", help="also render a dot-and-whisker figure to this file")

    est = sub.add_parser("estimate", parents=[common],
                         help="gain-score spillover estimate from a CSV of sibling pairs")
    est.add_argument("--data", required=True, help="input CSV path")
    est.add_argument("--adjust", action="store_true",
                     help="include cov_* columns as regression controls")
    est.add_argument("--robust", action="store_true",
                     help="heteroskedasticity-robust (HC1) standard errors")
    est.add_argument("--conf", type=float, default=0.95, help="confidence level")
    est.add_argument("--format", dest="fmt", choices=["csv", "json"], default="csv")

    ident = sub.add_parser("identify", parents=[common],
                           help="classify what the spillover coefficient identifies")
    ident.add_argument("--model", required=True, help="preset id or model JSON path")
    ident.add_argument("--draws", type=int, default=200,
                       help="random coefficient draws for the numeric check")
    ident.add_argument("--seed", type=int, required=True, help="seed for the draws")
    ident.add_argument("--format", dest="fmt", choices=["csv", "json"], default="json")

    pth = sub.add_parser("paths", parents=[common],
                         help="enumerate paths between two variables")
    pth.add_argument("--model", required=True, help="preset id or model JSON path")
    pth.add_argument("--from", dest="src", required=True, metavar="VAR")
    pth.add_argument("--to", dest="dst", required=True, metavar="VAR")
    pth.add_argument("--given", action="append", default=[], metavar="VARS",
                     help="conditioning variables (repeatable, comma-separated)")
    pth.add_argument("--all", dest="include_all_paths", action="store_true",
                     help="include paths closed by an unconditioned collider")
    pth.add_argument("--format", dest="fmt", choices=["csv", "json"], default="csv")

    return parser


def _parse_overrides(pairs) -> dict[str, float]:
    overrides = {}
    for pair in pairs:
        name, sep, value = pair.partition("=")
        if not sep or not name:
            raise UsageError(f"--set expects NAME=VALUE, got {pair!r}")
        try:
            overrides[name.strip()] = float(value)
        except ValueError:
            raise UsageError(f"--set {pair!r}: value is not a number") from None
    return overrides


def _manifest_from_args(ns: argparse.Namespace) -> RunManifest:
    given = tuple(
        name.strip()
        for chunk in getattr(ns, "given", [])
        for name in chunk.split(",")
        if name.strip()
    )
    return RunManifest(
        subcommand=ns.subcommand,
        model=getattr(ns, "model", None),
        data=getattr(ns, "data", None),
        out=ns.out,
        plot=getattr(ns, "plot", None),
        data_out=getattr(ns, "data_out", None),
        fmt=getattr(ns, "fmt", "csv"),
        seed=getattr(ns, "seed", 20107),
        reps=getattr(ns, "reps", 1000),
        n=getattr(ns, "n", 5000),
        mode=getattr(ns, "mode", BINARY_MODE),
        conf=getattr(ns, "conf", 0.95),
        adjust=getattr(ns, "adjust", False),
        robust=getattr(ns, "robust", False),
        draws=getattr(ns, "draws", 200),
        src=getattr(ns, "src", None),
        dst=getattr(ns, "dst", None),
        given=given,
        include_all_paths=getattr(ns, "include_all_paths", False),
        overrides=_parse_overrides(getattr(ns, "overrides", [])),
        error_json=ns.error_json,
    )


def _deliver(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _require_out(manifest: RunManifest) -> str:
    if not manifest.out:
        raise UsageError("--format svg requires --out")
    return manifest.out


def _emit_summaries(manifest: RunManifest, summaries) -> None:
    if manifest.fmt == "svg":
        from . import plots

        plots.render_summary_plot(summaries, _require_out(manifest))
        return
    if manifest.fmt == "json":
        _deliver(dataio.summaries_to_json(summaries), manifest.out)
    else:
        buf = _stringio.StringIO()
        dataio.write_summary_csv(summaries, buf)
        _deliver(buf.getvalue(), manifest.out)
    if manifest.plot:
        from . import plots

        plots.render_summary_plot(summaries, manifest.plot)


def _cmd_simulate(manifest: RunManifest) -> int:
    if manifest.fmt == "svg":
        _require_out(manifest)
    if manifest.model in PRESETS:
        config = preset_config(
            manifest.model, n_obs=manifest.n, n_reps=manifest.reps,
            master_seed=manifest.seed, exposure_mode=manifest.mode,
            overrides=manifest.overrides or None,
        )
    else:
        if manifest.overrides:
            raise UsageError("--set only applies to preset models")
        model = resolve_model(manifest.model)
        config = config_from_model(
            model, n_obs=manifest.n, n_reps=manifest.reps,
            master_seed=manifest.seed, exposure_mode=manifest.mode,
        )
    if manifest.data_out:
        sample = simulate_sample(config, replicate_index=0)
        with open(manifest.data_out, "w", encoding="utf-8", newline="") as fh:
            dataio.write_pair_csv(sample, fh)
        log.info("wrote %d simulated pairs to %s", sample.n, manifest.data_out)
    summary = monte_carlo(config)
    _emit_summaries(manifest, [summary])
    return 0


def _cmd_figure4(manifest: RunManifest) -> int:
    if manifest.fmt == "svg":
        _require_out(manifest)
    rows = figure4_table(
        n_obs=manifest.n, n_reps=manifest.reps,
        master_seed=manifest.seed, exposure_mode=manifest.mode,
    )
    _emit_summaries(manifest, list(rows))
    return 0


def _cmd_estimate(manifest: RunManifest) -> int:
    from .regression import spillover_estimate

    dataset = dataio.load_pair_csv(manifest.data)
    report = spillover_estimate(
        dataset, adjust_covariates=manifest.adjust,
        confidence=manifest.conf, robust=manifest.robust,
    )
    if manifest.fmt == "json":
        _deliver(dataio.report_to_json(report), manifest.out)
    else:
        buf = _stringio.StringIO()
        dataio.write_report_csv(report, buf)
        _deliver(buf.getvalue(), manifest.out)
    return 0


def _cmd_identify(manifest: RunManifest) -> int:
    model = resolve_model(manifest.model)
    verdict = classify_identification(model, draws=manifest.draws, seed=manifest.seed)
    kappa = next(
        (e.coefficient for e in model.edges if (e.source, e.target) == ("T2", "Y1")), 0.0
    )
    if verdict.classification == BIASED:
        bound = None
    else:
        sign = "positive" if kappa > 0 else ("negative" if kappa < 0 else "zero")
        bound = bound_inference(verdict.population_sc, sign)
    notes = mediated_component_note(model)
    record = dataio.identification_record(verdict, bound, notes)
    if manifest.fmt == "csv":
        buf = _stringio.StringIO()
        dataio.write_identification_csv(record, buf)
        _deliver(buf.getvalue(), manifest.out)
    else:
        _deliver(dataio.identification_to_json(record), manifest.out)
    return 0


def _cmd_paths(manifest: RunManifest) -> int:
    model = resolve_model(manifest.model)
    paths = enumerate_paths(
        model, manifest.src, manifest.dst, manifest.given,
        include_closed_by_collider=manifest.include_all_paths,
    )
    if manifest.fmt == "json":
        query = {
            "model": manifest.model, "from": manifest.src, "to": manifest.dst,
            "conditioning": list(manifest.given),
            "include_closed_by_collider": manifest.include_all_paths,
        }
        _deliver(dataio.paths_to_json(model, paths, query), manifest.out)
    else:
        buf = _stringio.StringIO()
        dataio.write_paths_csv(model, paths, buf)
        _deliver(buf.getvalue(), manifest.out)
    return 0


_SUBCOMMANDS = {
    "simulate": _cmd_simulate,
    "figure4": _cmd_figure4,
    "estimate": _cmd_estimate,
    "identify": _cmd_identify,
    "paths": _cmd_paths,
}


def run(manifest: RunManifest) -> int:
    """Execute one validated manifest; raises SpilloverLabError subclasses."""
    return _SUBCOMMANDS[manifest.subcommand](manifest)


def _emit_error(exc: BaseException, exit_code: int, as_json: bool) -> None:
    if as_json:
        payload = {
            "error": type(exc).__name__,
            "exit_code": exit_code,
            "message": str(exc),
        }
        sys.stderr.write(json.dumps(payload) + "\n")
    else:
        sys.stderr.write(f"spillover-lab: error: {exc}\n")


def main(argv: list[str] | None = None) -> int:
    args = list(sys.argv[1:]) if argv is None else list(argv)
    as_json = "--error-json" in args
    logging.basicConfig(stream=sys.stderr, level=logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    try:
        ns = parser.parse_args(args)
        manifest = _manifest_from_args(ns)
        return run(manifest)
    except SpilloverLabError as exc:
        _emit_error(exc, exc.exit_code, as_json)
        return exc.exit_code
    except OSError as exc:
        _emit_error(exc, 2, as_json)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
