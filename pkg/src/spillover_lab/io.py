"""CSV/JSON reading and writing for datasets, reports, and summaries.

One CSV dialect everywhere: comma-separated, UTF-8, header row required,
'.' decimal separator.  Floats are written with repr, which round-trips
bit for bit.
"""
from __future__ import annotations

import csv
import json
import logging
from typing import IO, Iterable, Sequence

from .errors import EmptyDataError, ParseError, SchemaError
from .graph import Path, PathModel, path_coefficient_product, path_label
from .identify import BoundStatement, IdentificationVerdict, MediatedPathNote
from .regression import PairDataset, SpilloverReport
from .simulate import SimulationSummary

log = logging.getLogger(__name__)

REQUIRED_COLUMNS = ("family_id", "t1", "t2", "y1", "y2")
COVARIATE_PREFIX = "cov_"
_MISSING = {"", "na", "nan"}


def _fmt(value: float) -> str:
    return repr(float(value))


def load_pair_csv(path: str) -> PairDataset:
    """Read a sibling-pair dataset, dropping incomplete rows with a warning.

    The header must contain family_id,t1,t2,y1,y2; columns prefixed cov_
    come along as covariates, anything else is ignored.  Blank or NA cells
    mark a row incomplete; any other non-numeric cell is a ParseError.
    """
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise EmptyDataError(f"{path}: file is empty") from None
        for column in REQUIRED_COLUMNS:
            if column not in header:
                raise SchemaError(f"{path}: missing required column {column!r}")
        cov_names = [h for h in header if h.startswith(COVARIATE_PREFIX)]
        positions = {name: header.index(name) for name in (*REQUIRED_COLUMNS, *cov_names)}
        numeric_names = [n for n in positions if n != "family_id"]

        families, rows = [], []
        total = dropped = 0
        for record in reader:
            if not record:
                continue
            total += 1
            line = reader.line_num
            if len(record) != len(header):
                raise ParseError(
                    f"{path}: row at line {line} has {len(record)} fields, expected {len(header)}"
                )
            family = record[positions["family_id"]].strip()
            values = []
            complete = bool(family)
            for name in numeric_names:
                cell = record[positions[name]].strip()
                if cell.lower() in _MISSING:
                    complete = False
                    continue
                try:
                    value = float(cell)
                except ValueError:
                    raise ParseError(
                        f"{path}: line {line}, column {name!r}: cannot parse {cell!r}"
                    ) from None
                if value != value or value in (float("inf"), float("-inf")):
                    complete = False
                    continue
                values.append(value)
            if not complete:
                dropped += 1
                continue
            families.append(family)
            rows.append(values)

    if dropped:
        log.warning("%s: dropped %d of %d rows with missing values", path, dropped, total)
    if not rows:
        raise EmptyDataError(f"{path}: no complete rows")
    columns = list(zip(*rows))
    by_name = dict(zip(numeric_names, columns))
    covariates = [by_name[name] for name in cov_names]
    return PairDataset(
        family_id=tuple(families),
        t1=by_name["t1"],
        t2=by_name["t2"],
        y1=by_name["y1"],
        y2=by_name["y2"],
        covariates=list(zip(*covariates)) if covariates else None,
        covariate_names=tuple(cov_names),
    )


def write_pair_csv(dataset: PairDataset, fh: IO[str]) -> None:
    """Emit a dataset in the same schema load_pair_csv reads."""
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow([*REQUIRED_COLUMNS, *dataset.covariate_names])
    for i, family in enumerate(dataset.family_id):
        row = [family, _fmt(dataset.t1[i]), _fmt(dataset.t2[i]),
               _fmt(dataset.y1[i]), _fmt(dataset.y2[i])]
        row.extend(_fmt(v) for v in dataset.covariates[i])
        writer.writerow(row)


SUMMARY_FIELDS = (
    "model", "exposure_mode", "n_obs", "n_reps", "master_seed", "theta_true",
    "mean_sc", "empirical_sd", "pct_low", "pct_high",
    "mean_ci_low", "mean_ci_high", "coverage", "mean_reported_se",
)


def _summary_record(s: SimulationSummary) -> dict:
    return {
        "model": s.model_id,
        "exposure_mode": s.exposure_mode,
        "n_obs": s.n_obs,
        "n_reps": s.n_reps,
        "master_seed": s.master_seed,
        "theta_true": s.theta_true,
        "mean_sc": s.mean_sc,
        "empirical_sd": s.empirical_sd,
        "pct_low": s.pct_low,
        "pct_high": s.pct_high,
        "mean_ci_low": s.mean_ci_low,
        "mean_ci_high": s.mean_ci_high,
        "coverage": s.coverage,
        "mean_reported_se": s.mean_reported_se,
    }


def write_summary_csv(summaries: Iterable[SimulationSummary], fh: IO[str]) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(SUMMARY_FIELDS)
    for s in summaries:
        record = _summary_record(s)
        writer.writerow([
            record[field] if isinstance(record[field], (str, int)) else _fmt(record[field])
            for field in SUMMARY_FIELDS
        ])


def summaries_to_json(summaries: Iterable[SimulationSummary]) -> str:
    return json.dumps([_summary_record(s) for s in summaries], indent=2) + "\n"


REPORT_COLUMNS = ("term", "estimate", "ci_low", "ci_high")


def report_rows(report: SpilloverReport) -> list[tuple[str, float, float, float]]:
    """The three headline rows, older sibling first."""
    return [
        ("older-sibling coefficient", report.b2, report.b2_ci_low, report.b2_ci_high),
        ("younger-sibling coefficient", report.b1, report.b1_ci_low, report.b1_ci_high),
        ("spillover coefficient", report.sc, report.ci_low, report.ci_high),
    ]


def write_report_csv(report: SpilloverReport, fh: IO[str]) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(REPORT_COLUMNS)
    for term, estimate, low, high in report_rows(report):
        writer.writerow([term, _fmt(estimate), _fmt(low), _fmt(high)])


def report_to_json(report: SpilloverReport) -> str:
    payload = {
        "n": report.n,
        "df": report.df,
        "confidence": report.confidence,
        "adjusted": report.adjusted,
        "terms": [
            {"term": term, "estimate": estimate, "ci_low": low, "ci_high": high}
            for term, estimate, low, high in report_rows(report)
        ],
    }
    return json.dumps(payload, indent=2) + "\n"


def render_path(path: Path) -> str:
    """Arrow diagram like 'T1 <- U -> Y2 -> D'."""
    pieces = [path.nodes[0]]
    for node, direction in zip(path.nodes[1:], path.edge_directions):
        pieces.append("->" if direction == "forward" else "<-")
        pieces.append(node)
    return " ".join(pieces)


def _path_record(model: PathModel, path: Path) -> dict:
    return {
        "path": render_path(path),
        "nodes": list(path.nodes),
        "status": path.status,
        "causal": path.causal,
        "product": path_coefficient_product(model, path),
        "label": path_label(model, path),
    }


def write_paths_csv(model: PathModel, paths: Sequence[Path], fh: IO[str]) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(["path", "status", "causal", "product", "label"])
    for p in paths:
        record = _path_record(model, p)
        writer.writerow([
            record["path"], record["status"], str(record["causal"]).lower(),
            _fmt(record["product"]), record["label"],
        ])


def paths_to_json(model: PathModel, paths: Sequence[Path], query: dict) -> str:
    payload = dict(query)
    payload["paths"] = [_path_record(model, p) for p in paths]
    return json.dumps(payload, indent=2) + "\n"


def identification_record(
    verdict: IdentificationVerdict,
    bound: BoundStatement | None,
    notes: Sequence[MediatedPathNote],
) -> dict:
    record = {
        "classification": verdict.classification,
        "theta_true": verdict.theta_true,
        "population_sc": verdict.population_sc,
        "evidence": {
            "draws": verdict.evidence.draws,
            "max_dev_theta": verdict.evidence.max_dev_theta,
            "max_dev_theta_minus_kappa": verdict.evidence.max_dev_theta_minus_kappa,
            "dev_fraction": verdict.evidence.dev_fraction,
        },
        "bound": None if bound is None else {
            "sc_value": bound.sc_value,
            "kappa_sign": bound.kappa_sign,
            "conclusions": list(bound.conclusions),
            "explanation": bound.explanation,
        },
        "mediated_paths": [
            {"path": list(n.path), "product": n.product, "description": n.description}
            for n in notes
        ],
    }
    return record


def identification_to_json(record: dict) -> str:
    return json.dumps(record, indent=2) + "\n"


def write_identification_csv(record: dict, fh: IO[str]) -> None:
    """Flat key,value rendering of an identification record."""
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(["field", "value"])
    writer.writerow(["classification", record["classification"]])
    writer.writerow(["theta_true", _fmt(record["theta_true"])])
    writer.writerow(["population_sc", _fmt(record["population_sc"])])
    bound = record["bound"]
    writer.writerow(["bound_conclusions",
                     "" if bound is None else "+".join(bound["conclusions"])])
    writer.writerow(["mediated_paths",
                     ";".join("->".join(n["path"]) for n in record["mediated_paths"])])
