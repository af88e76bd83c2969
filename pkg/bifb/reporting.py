"""
Rapports texte alignés et CSV (aucun horodatage dans le corps des rapports).
"""

import json
import logging
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import pandas as pd

from .errors import DataIOError, MissingFile
from .evaluation import EvalReport, Summary
from .pipeline import TrialOutcome

logger = logging.getLogger(__name__)

OUTCOMES_CSV = "outcomes.csv"
SUMMARY_CSV = "summary.csv"
REPORT_TXT = "report.txt"
RESOLVED_CONFIG = "config.json"

OUTCOME_COLUMNS = ["trial_id", "subject_id", "method", "true_class", "recognized_class", "recognition_time_s"]


def _fmt(value: Optional[float], spec: str = ".4f") -> str:
    return "n/a" if value is None else format(value, spec)


def _pct(value: float) -> str:
    return f"{100.0 * value:.1f}"


def _summary_line(label: str, s: Summary) -> str:
    return (
        f"{label:12s} {s.n_trials:>7d} {s.n_decided:>8d} {_pct(s.accuracy):>8s} "
        f"{_fmt(s.mrt_s, '.3f'):>8s} {_fmt(s.itr_bits_per_min):>12s}"
    )


def format_report(report: EvalReport) -> str:
    """Tableau par sujet : essais, décisions, précision, MRT, ITR"""
    lines = [
        f"Méthode : {report.method}",
        f"Stimuli (Hz) : {', '.join(f'{f:g}' for f in report.class_frequencies_hz)}",
        f"Hyperparamètres : {json.dumps(report.hyperparameters, sort_keys=True, ensure_ascii=False)}",
        "",
        f"{'Sujet':12s} {'Essais':>7s} {'Décidés':>8s} {'Préc.%':>8s} {'MRT(s)':>8s} {'ITR(b/min)':>12s}",
        "-" * 60,
    ]
    lines += [_summary_line(subject, s) for subject, s in report.per_subject.items()]
    lines += ["-" * 60, _summary_line("Global", report.pooled), "", "Précision par classe :"]
    for c, acc in report.pooled.per_class_accuracy.items():
        lines.append(f"  {report.class_frequencies_hz[c]:>8g} Hz : {_pct(acc):>6s} %")
    if not report.pooled.itr_available:
        lines += ["", "ITR indisponible : aucune décision"]
    return "\n".join(lines) + "\n"


def report_frame(report: EvalReport) -> pd.DataFrame:
    rows = [{"subject_id": subject, **s.to_dict()} for subject, s in report.per_subject.items()]
    rows.append({"subject_id": "pooled", **report.pooled.to_dict()})
    frame = pd.DataFrame(rows)
    for c, f in enumerate(report.class_frequencies_hz):
        frame[f"accuracy_{f:g}hz"] = [
            s.per_class_accuracy.get(c) for s in list(report.per_subject.values()) + [report.pooled]
        ]
    return frame


def outcomes_frame(outcomes: Sequence[TrialOutcome]) -> pd.DataFrame:
    frame = pd.DataFrame([o.to_dict() for o in outcomes], columns=OUTCOME_COLUMNS)
    return frame.astype({"recognized_class": "Int64"})


def _write_csv(frame: pd.DataFrame, path: Path, float_format: Optional[str] = "%.10g") -> Path:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        frame.to_csv(path, index=False, lineterminator="\n", float_format=float_format)
    except OSError as e:
        raise DataIOError(f"Écriture impossible ({path}): {e}")
    return path


def _write_text(text: str, path: Path) -> Path:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
    except OSError as e:
        raise DataIOError(f"Écriture impossible ({path}): {e}")
    return path


def write_json(data: Dict, path: Path) -> Path:
    return _write_text(json.dumps(data, indent=2, ensure_ascii=False) + "\n", Path(path))


def write_run(out_dir: Path, outcomes: Sequence[TrialOutcome], report: EvalReport) -> List[Path]:
    """report.txt, summary.csv, outcomes.csv dans le répertoire de sortie"""
    out_dir = Path(out_dir)
    written = [
        _write_text(format_report(report), out_dir / REPORT_TXT),
        _write_csv(report_frame(report), out_dir / SUMMARY_CSV),
        # float complet : relecture exacte par read_outcomes
        _write_csv(outcomes_frame(outcomes), out_dir / OUTCOMES_CSV, float_format=None),
    ]
    logger.info(f"💾 Rapport écrit dans {out_dir}")
    return written


def read_outcomes(path: Path) -> List[TrialOutcome]:
    path = Path(path)
    if not path.exists():
        raise MissingFile(f"Fichier de résultats introuvable: {path}")
    frame = pd.read_csv(path, dtype={"trial_id": str, "subject_id": str, "method": str},
                        float_precision="round_trip")
    return [
        TrialOutcome(
            trial_id=row.trial_id,
            subject_id=row.subject_id,
            true_class=int(row.true_class),
            recognized_class=None if pd.isna(row.recognized_class) else int(row.recognized_class),
            recognition_time_s=None if pd.isna(row.recognition_time_s) else float(row.recognition_time_s),
            method=row.method,
        )
        for row in frame.itertuples(index=False)
    ]


def write_grid_table(table: pd.DataFrame, path: Path) -> Path:
    return _write_csv(table, Path(path))


# ---------------------------------------------------------------------------
# Comparaison de méthodes
# ---------------------------------------------------------------------------

def comparison_frame(reports: Dict[str, EvalReport]) -> pd.DataFrame:
    """ITR par sujet (lignes) et par méthode (colonnes), plus la ligne globale"""
    subjects = sorted({s for r in reports.values() for s in r.per_subject})
    rows = []
    for subject in subjects + ["pooled"]:
        row = {"subject_id": subject}
        for method, report in reports.items():
            summary = report.pooled if subject == "pooled" else report.per_subject.get(subject)
            row[method] = None if summary is None else summary.itr_bits_per_min
        rows.append(row)
    return pd.DataFrame(rows)


def format_comparison(reports: Dict[str, EvalReport],
                      ttests: Dict[str, Tuple[Optional[float], Optional[float], Optional[str]]],
                      reference: str, pair_by: str = "subjects") -> str:
    """Tableau ITR côte à côte + tests t appariés (référence contre chaque autre méthode)"""
    methods = list(reports)
    frame = comparison_frame(reports)
    lines = [
        "ITR (bits/min) par sujet",
        "",
        f"{'Sujet':12s} " + " ".join(f"{m:>12s}" for m in methods),
        "-" * (13 + 13 * len(methods)),
    ]
    for row in frame.to_dict("records"):
        label = "Global" if row["subject_id"] == "pooled" else row["subject_id"]
        lines.append(f"{label:12s} " + " ".join(f"{_fmt(row[m]):>12s}" for m in methods))

    lines += ["", "Précision par classe (%)", ""]
    for c, f in enumerate(next(iter(reports.values())).class_frequencies_hz):
        cells = " ".join(f"{_pct(reports[m].pooled.per_class_accuracy.get(c, 0.0)):>12s}" for m in methods)
        lines.append(f"{f'{f:g} Hz':12s} {cells}")

    paired_on = "les essais (réussite)" if pair_by == "trials" else "les sujets (ITR)"
    lines += ["", f"Tests t appariés sur {paired_on} ({reference} contre chaque méthode)", ""]
    for method, (t, p, note) in ttests.items():
        if note is not None:
            lines.append(f"  {reference} vs {method:10s} : {note}")
        else:
            lines.append(f"  {reference} vs {method:10s} : t = {t:+.4f}, p = {p:.6f}")
    return "\n".join(lines) + "\n"


def write_comparison(out_dir: Path, reports: Dict[str, EvalReport],
                     ttests: Dict[str, Tuple[Optional[float], Optional[float], Optional[str]]],
                     reference: str, pair_by: str = "subjects") -> List[Path]:
    out_dir = Path(out_dir)
    tests = pd.DataFrame([
        {"reference": reference, "method": m, "paired_on": pair_by, "t": t, "p": p, "note": note}
        for m, (t, p, note) in ttests.items()
    ], columns=["reference", "method", "paired_on", "t", "p", "note"])
    return [
        _write_text(format_comparison(reports, ttests, reference, pair_by), out_dir / "comparison.txt"),
        _write_csv(comparison_frame(reports), out_dir / "comparison.csv"),
        _write_csv(tests, out_dir / "ttests.csv"),
    ]
