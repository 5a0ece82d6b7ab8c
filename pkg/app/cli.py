"""
Command-Line Interface
======================

Entry point of the toolkit: ``python -m app.cli <command> ...``.

Commands:
- tomography: simulate probe measurements of a POVM and reconstruct it
- decompose: decompose one published effect (or a whole POVM with --full)
- certify: run the witness pipeline on a Werner-type state
- reproduce: regenerate the published device comparisons

Every failure is a MitigatorError; main() maps it to its exit code and
writes {"error": {"kind", "message"}} to standard error.
"""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from app.config import configure_logging, get_settings
from app.exceptions import MitigatorError, UsageError
from app.harness.experiments import REPRODUCTIONS, reproduce, run_certification, write_plot_data
from app.harness.reports import build_decomposition_report, check_file, write_report
from app.quantum.decomposer import decompose_element, decompose_full
from app.quantum.mitigator import MitigationParameters
from app.quantum.tomography import (
    SCHEMES,
    measure_probes,
    povm_distance,
    probe_labels,
    probe_states,
    reconstruct_povm,
)
from app.schemas.decomposition import FullDecompositionReport
from app.schemas.matrix import CountTableJSON, PovmJSON, TomographyReport
from app.utils.fixtures import fixture_path, load_element, load_local_unitary, load_parameters, load_povm

# ============================================================
# Logger Configuration
# ============================================================
logger = logging.getLogger(__name__)


class _Parser(argparse.ArgumentParser):
    """ArgumentParser that reports bad usage as a UsageError instead of exiting."""

    def error(self, message: str) -> None:  # type: ignore[override]
        raise UsageError(message)


# ============================================================
# Commands
# ============================================================

def cmd_tomography(args: argparse.Namespace) -> int:
    current = get_settings()
    povm = load_povm(args.povm)
    seed = current.DEFAULT_SEED if args.seed is None else args.seed
    n = povm.n_qubits
    probes = probe_states(n, args.scheme)
    labels = probe_labels(n, args.scheme)
    counts = measure_probes(povm, probes, args.shots, seed, labels)
    reconstructed = reconstruct_povm(probes, counts, labels)
    distances = povm_distance(reconstructed, povm)
    report = TomographyReport(
        scheme=args.scheme,
        shots=args.shots,
        seed=seed,
        reconstructed=PovmJSON.from_povm(reconstructed),
        counts=CountTableJSON.from_table(counts),
        distances=distances,
        max_distance=max(distances),
        metadata={"povm": str(args.povm), "probes": len(probes)},
    )
    write_report(report, args.out)
    print(f"max distance {report.max_distance:.3e} over {len(probes)} probes x {args.shots} shots")
    return 0


def cmd_decompose(args: argparse.Namespace) -> int:
    current = get_settings()
    seed = current.DEFAULT_SEED if args.seed is None else args.seed
    if args.full:
        full = decompose_full(load_povm(args.full), starts=args.starts, seed=seed)
        report = FullDecompositionReport.from_full(full)
        write_report(report, args.out)
        print(f"shared V objective {full.objective:.5f} over {len(full.elements)} outcomes")
        return 0
    if not args.element:
        raise UsageError("decompose needs --element or --full")

    pi = load_element(args.element)
    dec = decompose_element(pi, outcome=args.outcome, starts=args.starts, seed=seed)
    report = build_decomposition_report(dec, pi, source=str(fixture_path(args.element)))
    write_report(report, args.out)
    print(
        f"eps={report.epsilon:.4f} delta={report.delta:.4f} objective={report.objective:.5f} "
        f"crosstalk={report.crosstalk} error_rate raw={report.error_rate_raw:.4f} "
        f"normalized={report.error_rate_normalized:.4f}"
    )
    return 0


def _mitigation_for(args: argparse.Namespace, element, seed: int) -> Optional[MitigationParameters]:
    if not args.mitigate:
        return None
    if element is None:
        return MitigationParameters(trace_pi=1.0, epsilon=0.0, eta=0.0)
    if args.params:
        params = load_parameters(args.params)
        V = load_local_unitary(args.unitary) if args.unitary else None
        return MitigationParameters(params["trace_pi"], params["epsilon"], params["eta"], V)
    return MitigationParameters.from_decomposition(decompose_element(element, seed=seed))


def cmd_certify(args: argparse.Namespace) -> int:
    current = get_settings()
    seed = current.DEFAULT_SEED if args.seed is None else args.seed
    if args.sweep is not None:
        if not 0.0 < args.sweep <= 0.5:
            raise UsageError("--sweep step must lie in (0, 0.5]")
        rs = [float(r) for r in np.round(np.arange(0.0, 1.0 + args.sweep / 2, args.sweep), 10)]
    elif args.p is not None:
        rs = [args.p]
    else:
        raise UsageError("certify needs --p or --sweep")
    if any(not 0.0 <= r <= 1.0 for r in rs):
        raise UsageError("--p must lie in [0, 1]")

    element = None if args.detector == "ideal" else load_element(args.detector)
    report = run_certification(
        args.state,
        rs,
        element=element,
        detector_label=args.detector,
        mitigation=_mitigation_for(args, element, seed),
        seed=seed,
        shots=args.shots,
        repetitions=args.reps,
        preparation=args.preparation,
    )
    write_report(report, args.out)
    if args.plot:
        write_plot_data(report, args.plot)
    for row in report.rows:
        line = f"r={row.r:.3f} p_e={row.p_e:.4f} raw={row.verdict_raw}"
        if row.p0_eta is not None:
            line += f" p0_eta={row.p0_eta:.4f} mitigated={row.verdict_mitigated}"
        print(line)
    return 0


def cmd_reproduce(args: argparse.Namespace) -> int:
    report = reproduce(args.what, seed=args.seed)
    out_dir = Path(args.out)
    write_report(report, out_dir / f"{args.what}.json")
    if report.experiment is not None:
        write_plot_data(report.experiment, out_dir / f"{args.what}.csv")
    for row in report.comparisons:
        status = {True: "pass", False: "FAIL", None: "----"}[row.passed]
        reference = "" if row.paper is None else f" published={row.paper:.4f}"
        print(f"[{status}] {row.quantity}: {row.artifact:.4f}{reference}")
    if report.failures:
        logger.warning(f"{len(report.failures)} comparison(s) outside tolerance")
    return 0


# ============================================================
# Parser
# ============================================================

def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="mitigator", description="Readout-error mitigation and witness certification")
    parser.add_argument("--check", metavar="FILE", type=Path, help="Re-validate a report file and exit")
    parser.add_argument("--log-level", default=None, help="Override LOG_LEVEL")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("tomography", help="Simulate and reconstruct a detector POVM")
    p.add_argument("--povm", required=True, help="POVM fixture id or file")
    p.add_argument("--scheme", choices=SCHEMES, default="pauli6")
    p.add_argument("--shots", type=int, default=get_settings().DEFAULT_SHOTS)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", type=Path, required=True)
    p.set_defaults(handler=cmd_tomography)

    p = sub.add_parser("decompose", help="Decompose a POVM element")
    p.add_argument("--element", help="POVM element fixture id or file")
    p.add_argument("--outcome", help="Outcome bits (defaults to the element's own)")
    p.add_argument("--full", help="Decompose a whole POVM with one shared V")
    p.add_argument("--starts", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", type=Path, required=True)
    p.set_defaults(handler=cmd_decompose)

    p = sub.add_parser("certify", help="Certify entanglement of a Werner-type state")
    p.add_argument("--state", choices=("phi_plus", "psi_minus"), required=True)
    p.add_argument("--p", type=float, help="Mixing parameter r")
    p.add_argument("--sweep", type=float, metavar="STEP", help="Sweep r over [0, 1] with this step")
    p.add_argument("--detector", default="ideal", help='"ideal" or a POVM element fixture')
    p.add_argument("--mitigate", action="store_true")
    p.add_argument("--params", help="Parameter fixture with trace_pi, epsilon, eta")
    p.add_argument("--unitary", help="Local-unitary fixture applied before detection")
    p.add_argument("--preparation", choices=("werner", "circuit"), default="werner")
    p.add_argument("--seed", type=int)
    p.add_argument("--shots", type=int)
    p.add_argument("--reps", type=int)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--plot", type=Path, help="Also write plot data (CSV + plot spec)")
    p.set_defaults(handler=cmd_certify)

    p = sub.add_parser("reproduce", help="Regenerate a published comparison")
    p.add_argument("--what", required=True, help=f"One of {', '.join(REPRODUCTIONS)}")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", type=Path, required=True, help="Output directory")
    p.set_defaults(handler=cmd_reproduce)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Run one command and return its exit code."""
    try:
        args = build_parser().parse_args(list(argv) if argv is not None else None)
        configure_logging(args.log_level)
        if args.check is not None:
            report = check_file(args.check)
            print(f"{args.check}: valid {report.kind} report")
            return 0
        if args.command is None:
            raise UsageError("no command given")
        if args.command == "reproduce" and args.what not in REPRODUCTIONS:
            raise UsageError(f"unknown --what {args.what!r}; expected one of {', '.join(REPRODUCTIONS)}")
        logger.info(f"Running {args.command}")
        code = args.handler(args)
        logger.info(f"Finished {args.command}")
        return code
    except MitigatorError as e:
        print(json.dumps(e.to_dict()), file=sys.stderr)
        return e.exit_code
    except SystemExit as e:
        return int(e.code or 0)


if __name__ == "__main__":
    sys.exit(main())
