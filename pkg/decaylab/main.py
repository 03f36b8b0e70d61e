"""
CLI del laboratorio de decaimiento espectral
Verbos: simulate, fit, check, lab, matrix, catalog, acceptance
"""
import argparse
import json
import sys
from typing import Optional, Sequence

from .cli_report import (
    list_catalog,
    load_config,
    run_acceptance,
    run_batch,
    run_lab_suite,
    run_matrix_suite,
    write_json,
)
from .config import DEFAULT_JOBS, configure_logging, get_output_dir
from .errors import ErrorCode, LabError
from .schemas import CheckName, CheckStatus, ScenarioConfig

STATUS_ICONS = {
    CheckStatus.PASS.value: "✅",
    CheckStatus.FAIL.value: "❌",
    CheckStatus.NOT_APPLICABLE.value: "➖",
}

# Comprobaciones por defecto de cada verbo de escenario (None: las del archivo)
VERB_CHECKS = {
    "simulate": [CheckName.SIMULATE],
    "fit": [CheckName.FIT],
    "check": None,
}
DEFAULT_CHECKS = [CheckName.BOUNDS, CheckName.INEQ]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="decaylab", description="Laboratorio de decaimiento espectral")
    parser.add_argument("--log-level", default=None, help="DEBUG, INFO, WARNING...")
    sub = parser.add_subparsers(dest="verb", required=True)

    for verb in ("simulate", "fit", "check"):
        p = sub.add_parser(verb)
        p.add_argument("--config", nargs="+", required=True, help="Archivos de escenario key=value")
        p.add_argument("--out", default=None)
        p.add_argument("--tol", type=float, default=None)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--jobs", type=int, default=DEFAULT_JOBS)
        p.add_argument("--json", action="store_true", help="Imprime los reportes en JSON")

    for verb in ("lab", "matrix"):
        p = sub.add_parser(verb)
        p.add_argument("--out", default=None)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--json", action="store_true")

    sub.add_parser("catalog")

    p = sub.add_parser("acceptance")
    p.add_argument("--out", default=None)
    p.add_argument("--tol", type=float, default=None)
    p.add_argument("--jobs", type=int, default=DEFAULT_JOBS)
    p.add_argument("--json", action="store_true")
    return parser


def _with_overrides(config: ScenarioConfig, verb: str, tol: Optional[float], seed: Optional[int]) -> ScenarioConfig:
    updates = {}
    checks = VERB_CHECKS[verb]
    if checks is not None and config.checks != checks:
        updates["checks"] = checks
    elif checks is None and not config.checks:
        updates["checks"] = DEFAULT_CHECKS
    if tol is not None and tol != config.tol:
        updates["tol"] = tol
    if seed is not None and seed != config.seed:
        updates["seed"] = seed
    if not updates:
        return config
    # el hash de procedencia se recalcula sobre la configuración efectiva
    data = {**config.model_dump(), **updates, "config_text": ""}
    try:
        return ScenarioConfig(**data)
    except ValueError as e:
        raise LabError(ErrorCode.CONFIG_INVALID, str(e))


def _scenarios(args) -> int:
    configs = [_with_overrides(load_config(path), args.verb, args.tol, args.seed) for path in args.config]
    reports = run_batch(configs, args.out, args.jobs)
    for report in reports:
        if args.json:
            print(json.dumps(report.model_dump(mode="json"), indent=2, sort_keys=True, ensure_ascii=False))
            continue
        print(f"📊 {report.name}")
        for name, status in report.checks.items():
            print(f"   {STATUS_ICONS[status.value]} {name}: {status.value}")
    return max((r.exit_code for r in reports), default=0)


def _suite(args) -> int:
    reports = run_lab_suite() if args.verb == "lab" else run_matrix_suite(args.seed)
    target = get_output_dir(args.out)
    try:
        target.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise LabError(ErrorCode.IO_ERROR, f"No se pudo crear {target}: {e}")
    write_json(target / f"{args.verb}.json", reports)
    if args.json:
        print(json.dumps(reports, indent=2, sort_keys=True, ensure_ascii=False, default=str))
    else:
        for name, report in sorted(reports.items()):
            print(f"{STATUS_ICONS[report['status']]} {name}")
    return 1 if any(r["status"] == CheckStatus.FAIL.value for r in reports.values()) else 0


def _acceptance(args) -> int:
    kwargs = {} if args.tol is None else {"tol": args.tol}
    criteria = run_acceptance(args.out, args.jobs, **kwargs)
    if args.json:
        print(json.dumps(criteria, indent=2, sort_keys=True, ensure_ascii=False, default=str))
    else:
        print("🧪 Matriz de aceptación")
        for key in sorted(criteria, key=int):
            status = criteria[key]["status"]
            print(f"   {STATUS_ICONS[status]} criterio {key}: {status}")
    return 1 if any(c["status"] == CheckStatus.FAIL.value for c in criteria.values()) else 0


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.log_level)
    try:
        if args.verb == "catalog":
            print(list_catalog(), end="")
            return 0
        if args.verb in VERB_CHECKS:
            return _scenarios(args)
        if args.verb in ("lab", "matrix"):
            return _suite(args)
        return _acceptance(args)
    except LabError as e:
        print(f"❌ {e.code.value}: {e.detail}", file=sys.stderr)
        return e.exit_code


if __name__ == "__main__":
    sys.exit(main())
