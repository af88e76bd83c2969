#!/usr/bin/env python3
"""
Interface en ligne de commande
- simulate   : génère un jeu de données synthétique
- validate   : vérifie configuration et jeu de données sans rien exécuter
- run        : LOO complet d'une méthode + rapport
- gridsearch : recherche sur grille (objectif ITR) + rapport du meilleur point
- compare    : plusieurs méthodes sur le même jeu + tests t appariés
- report     : régénère le rapport d'un répertoire de résultats

Codes de sortie : 0 succès, 2 configuration, 3 E/S, 4 données, 5 évaluation.
"""

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

from . import __version__
from .classify import OvaModel
from .config import (
    ExperimentConfig, apply_overrides, default_jobs, load_config_dict, load_environment, load_experiment,
)
from .data_model import Dataset, dataset_fingerprint, load_dataset, save_dataset
from .errors import BifbError, ConfigError, DatasetMismatch, NoDecisions, ZeroVariance
from .evaluation import (
    EvalReport, GridSpec, build_report, check_class_coverage, evaluate, fit_subject_models, grid_search,
    paired_ttest, refine_per_class,
)
from .logging_setup import setup_logging
from .pipeline import TrialOutcome, make_recognizer
from .reporting import (
    OUTCOMES_CSV, RESOLVED_CONFIG, format_report, read_outcomes, write_comparison,
    write_grid_table, write_json, write_run,
)
from .synth import SynthConfig, simulate_dataset

logger = logging.getLogger("bifb.cli")

EPILOG = """
Exemples d'utilisation:
  python3 -m bifb simulate --config configs/synth_dataset_a.json --out data/dataset_a
  python3 -m bifb validate --config configs/experiment_bifb.json
  python3 -m bifb run --config configs/experiment_bifb.json --set method.gamma=0.5 --jobs 4
  python3 -m bifb gridsearch --config configs/grid_bifb.json --out runs/grid
  python3 -m bifb compare --config configs/experiment_bifb.json --methods bifb,uf,psda,cca
  python3 -m bifb report --out runs/bifb
"""


# ---------------------------------------------------------------------------
# Commandes
# ---------------------------------------------------------------------------

def cmd_simulate(args) -> int:
    data = apply_overrides(load_config_dict(args.config[0]), args.set)
    synth = SynthConfig.from_dict(data["synth"] if "synth" in data else data)
    out_dir = Path(args.out or data.get("output_dir") or "")
    if not str(out_dir) or str(out_dir) == ".":
        raise ConfigError("Répertoire de sortie requis (--out)")

    dataset = simulate_dataset(synth, progress=not args.quiet)
    manifest_path = save_dataset(dataset, out_dir)
    print(f"✅ {len(dataset.recordings)} essais simulés → {manifest_path}")
    return 0


def _load_experiment(args, config_path: Optional[str] = None) -> ExperimentConfig:
    return load_experiment(config_path or args.config[0], args.set)


def cmd_validate(args) -> int:
    for config_path in args.config:
        cfg = _load_experiment(args, config_path)
        dataset = load_dataset(cfg.require_dataset())
        cfg.preprocess.validate(dataset.manifest.sampling_rate_hz, dataset.manifest.channel_names)
        make_recognizer(cfg.method, dataset.manifest, cfg.preprocess)
        if cfg.method.trainable:
            check_class_coverage(dataset)
        if cfg.grid is not None:
            for point in cfg.grid.points():
                make_recognizer(cfg.method.with_overrides(point), dataset.manifest, cfg.preprocess)
            print(f"📊 Grille valide : {cfg.grid.size} points")
        print(f"✅ {config_path} : configuration {cfg.method.name} valide pour {cfg.dataset} "
              f"({len(dataset.recordings)} essais, K={dataset.manifest.n_classes})")
    return 0


def _save_models(out_dir: Path, models: Dict[str, OvaModel]) -> None:
    for subject, model in models.items():
        model.save(out_dir / "models" / f"{subject}.json")
    if models:
        logger.info(f"💾 {len(models)} modèles sujet écrits dans {out_dir / 'models'}")


def _write_resolved_config(out_dir: Path, cfg: ExperimentConfig, dataset: Dataset,
                           report: EvalReport) -> None:
    write_json({
        "experiment": cfg.to_dict(),
        "dataset_fingerprint": dataset_fingerprint(dataset),
        "stimuli_hz": list(dataset.stimuli),
        "hyperparameters": report.hyperparameters,
    }, out_dir / RESOLVED_CONFIG)


def _run_and_write(cfg: ExperimentConfig, dataset: Dataset, out_dir: Path, jobs: int,
                   quiet: bool) -> Tuple[List[TrialOutcome], EvalReport]:
    if not cfg.method.trainable:
        logger.info(f"🔄 {cfg.method.name} : méthode sans apprentissage")
    outcomes, report = evaluate(dataset, cfg.method, cfg.preprocess, n_jobs=jobs, progress=not quiet)
    write_run(out_dir, outcomes, report)
    _write_resolved_config(out_dir, cfg, dataset, report)
    _save_models(out_dir, fit_subject_models(dataset, cfg.method, cfg.preprocess))
    return outcomes, report


def _finish(report: EvalReport, quiet: bool) -> int:
    if not quiet:
        print(format_report(report), end="")
    if not report.pooled.itr_available:
        raise NoDecisions(f"{report.method} : aucune décision, ITR indisponible")
    return 0


def cmd_run(args) -> int:
    cfg = _load_experiment(args)
    dataset = load_dataset(cfg.require_dataset())
    out_dir = Path(args.out or cfg.output_dir)
    _, report = _run_and_write(cfg, dataset, out_dir, args.jobs, args.quiet)
    return _finish(report, args.quiet)


def cmd_gridsearch(args) -> int:
    cfg = _load_experiment(args)
    if args.grid:
        cfg = replace(cfg, grid=GridSpec.from_dict(load_config_dict(args.grid)))
    if cfg.grid is None:
        raise ConfigError("Aucune grille : section 'grid' ou option --grid requise")

    dataset = load_dataset(cfg.require_dataset())
    out_dir = Path(args.out or cfg.output_dir)
    result = grid_search(dataset, cfg.grid, cfg.method, cfg.preprocess, n_jobs=args.jobs,
                         progress=not args.quiet)
    write_grid_table(result.table, out_dir / "grid.csv")

    best = result.best_config
    best_itr = result.best_itr
    if cfg.refine_factors:
        best, best_itr = refine_per_class(dataset, best, cfg.refine_factors, cfg.preprocess, n_jobs=args.jobs)
        logger.info(f"🔄 Affinage par classe : ITR {best_itr}")

    write_json({
        "best_params": result.best_params,
        "best_itr_bits_per_min": best_itr,
        "grid_size": cfg.grid.size,
        "method": best.to_dict(),
    }, out_dir / "best.json")
    _, report = _run_and_write(replace(cfg, method=best), dataset, out_dir, args.jobs, args.quiet)
    return _finish(report, args.quiet)


def _comparison_configs(args) -> List[ExperimentConfig]:
    if args.methods:
        if len(args.config) != 1:
            raise ConfigError("--methods s'utilise avec une seule configuration")
        base = _load_experiment(args)
        names = [m.strip() for m in args.methods.split(",") if m.strip()]
        return [replace(base, method=replace(base.method, name=name)) for name in names]
    return [_load_experiment(args, path) for path in args.config]


def _labels(configs: Sequence[ExperimentConfig]) -> List[str]:
    labels, seen = [], {}
    for cfg in configs:
        name = cfg.method.name
        seen[name] = seen.get(name, 0) + 1
        labels.append(name if seen[name] == 1 else f"{name}#{seen[name]}")
    return labels


def _paired_values(reports: Dict[str, EvalReport], outcomes: Dict[str, List[TrialOutcome]],
                   reference: str, label: str, pair_by: str) -> Tuple[List, List]:
    if pair_by == "trials":
        # essai correct = 1, erreur ou absence de décision = 0
        ref = {o.trial_id: float(o.correct) for o in outcomes[reference]}
        other = {o.trial_id: float(o.correct) for o in outcomes[label]}
        trials = sorted(set(ref) & set(other))
        return [ref[t] for t in trials], [other[t] for t in trials]
    ref, report = reports[reference], reports[label]
    subjects = sorted(set(ref.per_subject) & set(report.per_subject))
    return ([ref.per_subject[s].itr_bits_per_min for s in subjects],
            [report.per_subject[s].itr_bits_per_min for s in subjects])


def _ttests(reports: Dict[str, EvalReport], outcomes: Dict[str, List[TrialOutcome]], reference: str,
            pair_by: str = "subjects") -> Dict[str, Tuple]:
    results = {}
    for label in reports:
        if label == reference:
            continue
        a, b = _paired_values(reports, outcomes, reference, label, pair_by)
        if any(v is None for v in a + b):
            results[label] = (None, None, "ITR indisponible pour au moins un sujet")
            continue
        try:
            t, p = paired_ttest(a, b)
            results[label] = (t, p, None)
        except ZeroVariance:
            results[label] = (None, None, "ZeroVariance : différences toutes égales")
        except BifbError as e:
            results[label] = (None, None, f"{type(e).__name__} : {e}")
    return results


def cmd_compare(args) -> int:
    configs = _comparison_configs(args)
    if len(configs) < 2:
        raise ConfigError("Au moins deux méthodes à comparer")

    datasets = [load_dataset(cfg.require_dataset()) for cfg in configs]
    fingerprints = {dataset_fingerprint(d) for d in datasets}
    if len(fingerprints) > 1:
        raise DatasetMismatch("Les méthodes comparées n'utilisent pas le même jeu de données")

    out_dir = Path(args.out or configs[0].output_dir)
    reports: Dict[str, EvalReport] = {}
    outcomes: Dict[str, List[TrialOutcome]] = {}
    for label, cfg, dataset in zip(_labels(configs), configs, datasets):
        logger.info(f"📊 Évaluation {label}")
        outcomes[label], reports[label] = _run_and_write(cfg, dataset, out_dir / label, args.jobs, args.quiet)

    reference = "bifb" if "bifb" in reports else next(iter(reports))
    ttests = _ttests(reports, outcomes, reference, args.pair_by)
    write_comparison(out_dir, reports, ttests, reference, args.pair_by)
    if not args.quiet:
        print((out_dir / "comparison.txt").read_text(encoding="utf-8"), end="")
    return 0


def cmd_report(args) -> int:
    run_dir = Path(args.out or args.run or "")
    resolved = load_config_dict(run_dir / RESOLVED_CONFIG)
    outcomes = read_outcomes(run_dir / OUTCOMES_CSV)
    report = build_report(outcomes, resolved["stimuli_hz"], resolved.get("hyperparameters"))
    write_run(run_dir, outcomes, report)
    if not args.quiet:
        print(format_report(report), end="")
    return 0


COMMANDS = {
    "simulate": cmd_simulate,
    "validate": cmd_validate,
    "run": cmd_run,
    "gridsearch": cmd_gridsearch,
    "compare": cmd_compare,
    "report": cmd_report,
}


# ---------------------------------------------------------------------------
# Arguments
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--set", action="append", default=[], metavar="CLÉ=VALEUR",
                        help="Surcharge d'un paramètre (clés pointées, valeur JSON)")
    common.add_argument("--jobs", type=int, default=None, help="Nombre de processus (défaut: BIFB_JOBS ou 1)")
    common.add_argument("--out", help="Répertoire de sortie")
    common.add_argument("--verbose", "-v", action="store_true", help="Logs détaillés (DEBUG)")
    common.add_argument("--quiet", "-q", action="store_true", help="Sans barres de progression ni tableau")

    parser = argparse.ArgumentParser(
        prog="bifb",
        description="Reconnaissance de fréquence SSVEP par banc de filtres bio-inspiré",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog=EPILOG,
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    for name, help_text in (
        ("simulate", "Générer un jeu de données synthétique"),
        ("validate", "Vérifier configuration(s) et jeu de données"),
        ("run", "Évaluer une méthode (LOO par sujet)"),
        ("gridsearch", "Recherche d'hyperparamètres sur grille"),
        ("compare", "Comparer plusieurs méthodes + tests t appariés"),
    ):
        p = sub.add_parser(name, parents=[common], help=help_text)
        p.add_argument("--config", action="append", required=True, help="Fichier de configuration JSON")
        if name == "gridsearch":
            p.add_argument("--grid", help="Fichier JSON de grille (remplace la section 'grid')")
        if name == "compare":
            p.add_argument("--methods", help="Liste de méthodes séparées par des virgules (bifb,uf,psda,cca)")
            p.add_argument("--pair-by", choices=["subjects", "trials"], default="subjects",
                           help="Appariement des tests t : ITR par sujet ou réussite par essai")

    p = sub.add_parser("report", parents=[common], help="Régénérer le rapport d'un répertoire de résultats")
    p.add_argument("--run", help="Répertoire de résultats (équivalent à --out)")
    p.add_argument("--config", action="append", default=[], help=argparse.SUPPRESS)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Point d'entrée principal"""
    load_environment()
    parser = build_parser()
    args = parser.parse_args(argv)

    setup_logging(verbose=args.verbose)
    try:
        if args.jobs is None:
            args.jobs = default_jobs()
        return COMMANDS[args.command](args)
    except BifbError as e:
        logger.error(f"❌ {type(e).__name__}: {e}")
        return e.exit_code
    except KeyboardInterrupt:
        logger.warning("⚠️ Interrompu par l'utilisateur")
        return 130


if __name__ == "__main__":
    sys.exit(main())
