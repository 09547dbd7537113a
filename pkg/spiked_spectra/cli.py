"""Version 0.1.0"""
# Command line front end: analytic, simulate, profile, outlier, diagnose,
# figures and accept. Exit status 0 when every requested check passes,
# 1 when a check fails and 2 on a configuration or numerical error.

import argparse
from dataclasses import replace
import logging
from pathlib import Path
import sys
from typing import Optional, Sequence

from spiked_spectra.config_flow import scenario_from_dict, scenario_from_file
from spiked_spectra.const import (
    CURVE_OUTLIER,
    CURVE_PROFILE,
    DEFAULT_OUTPUTS,
    DEFAULT_WORKERS,
    MODELS,
    SECTION_MODEL,
)
from spiked_spectra.experiments import (
    run_acceptance,
    run_figures,
    run_scenario,
    simulate,
    theory_tables,
)
from spiked_spectra.utils.errors import SpectraError
from spiked_spectra.utils.tables import (
    FORMATS,
    FORMAT_CSV,
    diagnostic_table,
    profile_table,
    spectral_table,
    write_json,
)

_LOGGER = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_ERROR = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spiked-spectra",
        description="Spectral measures and eigenvector overlaps of spiked random matrices.",
    )
    parser.add_argument("--config", type=Path, help="YAML scenario file")
    parser.add_argument("--out", type=Path, default=Path(DEFAULT_OUTPUTS), help="output directory")
    parser.add_argument("--seed", type=int, help="override the model seed")
    parser.add_argument("--format", choices=FORMATS, default=FORMAT_CSV, dest="fmt")
    parser.add_argument("--n", type=int, help="override the matrix size")
    parser.add_argument("--theta", type=float, help="override the spike")
    parser.add_argument("--alpha", type=float, help="override the aspect ratio m/n")
    parser.add_argument("--model", choices=MODELS, help="override the model kind")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")

    commands = parser.add_subparsers(dest="command", required=True)
    commands.add_parser("analytic", help="limit density, overlap profile and outlier")
    commands.add_parser("simulate", help="one realization: eigenvalues and weights")
    commands.add_parser("profile", help="windowed overlap profile of the first seed")
    commands.add_parser("outlier", help="theory against sampled outliers over all seeds")
    commands.add_parser("diagnose", help="local-law diagnostic of the first seed")
    commands.add_parser("figures", help="data behind the profile figures")
    accept = commands.add_parser("accept", help="run the acceptance suite")
    accept.add_argument("--repeat", action="store_true", help="run twice and compare reports")
    accept.add_argument("--tolerance", type=float, help="replace every tolerance by this value")
    accept.add_argument("--only", nargs="+", help="criteria to run")
    accept.add_argument("--workers", type=int, default=DEFAULT_WORKERS)
    return parser


def _scenario(args, **changes):
    overrides = {
        "seed": args.seed,
        "n": args.n,
        "theta": args.theta,
        "alpha": args.alpha,
        "model": args.model,
    }
    if args.config is not None:
        scenario = scenario_from_file(args.config, overrides)
    else:
        scenario = scenario_from_dict({SECTION_MODEL: {}}, overrides)
    changes.setdefault("outputs", str(args.out))
    return replace(scenario, **changes)


def _analytic(args) -> int:
    scenario = _scenario(args)
    for name, table in theory_tables(scenario).items():
        table.write(args.out, f"{scenario.name}_{name}", args.fmt)
    return EXIT_OK


def _simulate(args) -> int:
    scenario = _scenario(args)
    _, measure = simulate(scenario.config.with_seed(scenario.seeds[0]))
    stem = f"{scenario.name}_seed{scenario.seeds[0]}_spectrum"
    spectral_table(measure).write(args.out, stem, args.fmt)
    return EXIT_OK


def _report(report, args) -> int:
    write_json(Path(args.out) / f"{report.scenario}_report.json", report.to_dict())
    print(f"{report.scenario}: {'passed' if report.passed else 'failed'} {report.flags}")
    return EXIT_OK if report.passed else EXIT_FAILED


def _profile(args) -> int:
    scenario = _scenario(args, outputs=None, curves=(CURVE_PROFILE,), energies=())
    scenario = _first_seed(scenario)
    report = run_scenario(scenario, args.fmt)
    if report.profile is not None:
        profile_table(report.profile).write(args.out, f"{scenario.name}_profile", args.fmt)
    return _report(report, args)


def _outlier(args) -> int:
    scenario = _scenario(args, curves=(CURVE_OUTLIER,), energies=())
    return _report(run_scenario(scenario, args.fmt), args)


def _diagnose(args) -> int:
    scenario = _first_seed(_scenario(args, outputs=None, curves=()))
    report = run_scenario(scenario, args.fmt)
    for result in report.results:
        if result.diagnostic is not None:
            diagnostic_table(result.diagnostic).write(
                args.out, f"{scenario.name}_seed{result.seed}_diagnostic", args.fmt
            )
    return _report(report, args)


def _first_seed(scenario):
    return replace(scenario, seeds=scenario.seeds[:1])


def _figures(args) -> int:
    reports = run_figures(str(args.out), args.fmt)
    for report in reports:
        print(f"{report.scenario}: profile sup-error {report.profile_sup_error}")
    return EXIT_OK if all(report.passed for report in reports) else EXIT_FAILED


def _accept(args) -> int:
    report = run_acceptance(args.workers, args.tolerance, args.only, None, args.fmt)
    text = report.to_json()
    if args.repeat:
        again = run_acceptance(args.workers, args.tolerance, args.only, None, args.fmt).to_json()
        if again != text:
            _LOGGER.warning("Acceptance reports differ between runs")
            return EXIT_FAILED
    path = Path(args.out) / "acceptance_report.json"
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")
    for criterion in report.criteria:
        print(f"{criterion.name}: {'pass' if criterion.passed else 'FAIL'}")
    return EXIT_OK if report.passed else EXIT_FAILED


COMMANDS = {
    "analytic": _analytic,
    "simulate": _simulate,
    "profile": _profile,
    "outlier": _outlier,
    "diagnose": _diagnose,
    "figures": _figures,
    "accept": _accept,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    try:
        return COMMANDS[args.command](args)
    except SpectraError as error:
        print(f"error: {error}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
