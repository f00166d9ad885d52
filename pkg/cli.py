#!/usr/bin/env python3
"""
Command-line surface.

Subcommands:
- sweep                Monte-Carlo sweep of one relation, written as CSV plus a JSON sidecar
- verify-closed-forms  closed-form oracles against the general definitions
- report               every quantity for one state and one channel
- plot                 SVG scatter of a sweep CSV with the bound line
"""

import argparse
import csv
import json
import logging
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import numpy as np

from channels import InvalidChannelError, KrausChannel
from complementarity import (
    CounterexampleFound, InvalidSweepConfigError, SweepConfig, SweepRecord, build_bipartite_channel,
    build_channel, check_bipartite_discord, check_bipartite_entanglement,
    check_measurement_channel, check_single, sweep, verify_closed_forms
)
from config import (
    BASES, BIPARTITE_CHANNELS, COHDIST_THREADS, CSV_HEADER, DISCORD_GRID, DISCORD_XATOL,
    ER_MAXITER, ER_RESTARTS, EXIT_CLOSED_FORM, EXIT_DATAERR, EXIT_IO, EXIT_OK, EXIT_USAGE,
    EXIT_VIOLATION, RELATIONS, SINGLE_CHANNELS, VERSION
)
from matrix_core import ContractViolationError, DimensionMismatchError
from measures import Basis, coherence_l1, coherence_relative_entropy, von_neumann_entropy
from quantities import coherent_information, disturbance
from states import DensityMatrix, InvalidStateError, schmidt_family_setup
from utils import StateFileError, format_bits, format_float, load_state_json, write_json

logger = logging.getLogger(__name__)


class StateSpecError(ValueError):
    """Raised for malformed --state or --channel arguments."""


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad flags; 2 is reserved for violations here
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog='cohdist', description='Coherence and disturbance complementarity checks')
    parser.add_argument('--version', action='version', version=f'%(prog)s {VERSION}')
    sub = parser.add_subparsers(dest='command', parser_class=_Parser)
    sub.required = True

    sweep_cmd = sub.add_parser('sweep', help='Monte-Carlo sweep of one relation')
    sweep_cmd.add_argument('--relation', choices=RELATIONS, default='single')
    sweep_cmd.add_argument('--channel', choices=sorted(BIPARTITE_CHANNELS), required=True)
    sweep_cmd.add_argument('--dim', type=int, default=2)
    sweep_cmd.add_argument('--samples', type=int, default=1000)
    sweep_cmd.add_argument('--seed', type=int, default=0)
    sweep_cmd.add_argument('--param-start', type=float, default=0.0)
    sweep_cmd.add_argument('--param-stop', type=float, default=1.0)
    sweep_cmd.add_argument('--steps', type=int, default=11)
    sweep_cmd.add_argument('--basis', choices=BASES, default='computational')
    sweep_cmd.add_argument('--er-mode', choices=['certified', 'variational'], default='certified')
    sweep_cmd.add_argument('--workers', type=int, default=None)
    sweep_cmd.add_argument('--out', required=True, help='CSV output path')

    verify_cmd = sub.add_parser('verify-closed-forms', help='check the Schmidt-family closed forms')
    verify_cmd.add_argument('--grid', type=int, default=20, help='intervals per axis')

    report_cmd = sub.add_parser('report', help='print every quantity for one state and channel')
    report_cmd.add_argument('--state', required=True, help="'schmidt:<lambda0>' or a JSON state file")
    report_cmd.add_argument('--channel', required=True, help="'<name>[:<param>]'")
    report_cmd.add_argument('--basis', choices=['computational', 'plus-minus'], default=None)
    report_cmd.add_argument('--er-mode', choices=['certified', 'variational'], default='certified',
                            help='E_R for two-qubit states; variational runs the separable-state solver')

    plot_cmd = sub.add_parser('plot', help='scatter a sweep CSV as SVG')
    plot_cmd.add_argument('--csv', required=True)
    plot_cmd.add_argument('--out', required=True)
    return parser


# CSV

def record_to_row(record: SweepRecord) -> List[str]:
    return [
        str(record.sample_id),
        str(record.d),
        record.channel_label,
        format_float(record.channel_param),
        format_float(record.coherence),
        format_float(record.disturbance),
        json.dumps(record.extra_terms, sort_keys=True),
        format_float(record.residual),
        str(record.seed)
    ]


def write_sweep_csv(path, records: Sequence[SweepRecord]) -> None:
    with open(path, 'w', newline='', encoding='utf-8') as handle:
        writer = csv.writer(handle, lineterminator='\n')
        writer.writerow(CSV_HEADER)
        for record in records:
            writer.writerow(record_to_row(record))


def _row_to_record(row: List[str]) -> SweepRecord:
    return SweepRecord(
        sample_id=int(row[0]),
        d=int(row[1]),
        channel_label=row[2],
        channel_param=float(row[3]),
        coherence=float(row[4]),
        disturbance=float(row[5]),
        extra_terms=json.loads(row[6]),
        residual=float(row[7]),
        seed=int(row[8])
    )


def read_sweep_csv(path) -> List[SweepRecord]:
    try:
        with open(path, newline='', encoding='utf-8') as handle:
            rows = list(csv.reader(handle))
    except UnicodeDecodeError as e:
        raise StateFileError(f"{path} is not UTF-8 text: {e}")
    if not rows:
        return []
    if rows[0] != CSV_HEADER:
        raise StateFileError(f"{path} does not carry the sweep CSV header")

    records = []
    for line, row in enumerate(rows[1:], start=2):
        if len(row) != len(CSV_HEADER):
            raise StateFileError(f"{path}:{line} has {len(row)} fields, expected {len(CSV_HEADER)}")
        try:
            record = _row_to_record(row)
        except ValueError as e:  # json.JSONDecodeError is a ValueError
            raise StateFileError(f"{path}:{line} cannot be parsed: {e}")
        terms = record.extra_terms
        if not isinstance(terms, dict) or not {'bound', 'coherence_weight'} <= terms.keys():
            raise StateFileError(f"{path}:{line} extra terms need a bound and a coherence weight")
        records.append(record)
    return records


def sweep_metadata(config: SweepConfig, record_count: int) -> dict:
    return {
        'version': VERSION,
        'config': {
            'relation': config.relation,
            'channel': config.channel,
            'param_start': config.param_start,
            'param_stop': config.param_stop,
            'param_steps': config.param_steps,
            'dim': config.dim,
            'samples': config.samples,
            'seed': config.seed,
            'basis': config.basis,
            'er_mode': config.er_mode
        },
        'solvers': {
            'discord_grid': DISCORD_GRID,
            'discord_xatol': DISCORD_XATOL,
            'er_restarts': ER_RESTARTS,
            'er_maxiter': ER_MAXITER
        },
        'workers': config.workers or COHDIST_THREADS,
        'records': record_count
    }


# Subcommands

def cmd_sweep(args) -> int:
    config = SweepConfig(
        relation=args.relation,
        channel=args.channel,
        param_start=args.param_start,
        param_stop=args.param_stop,
        param_steps=args.steps,
        dim=args.dim,
        samples=args.samples,
        seed=args.seed,
        basis=args.basis,
        er_mode=args.er_mode,
        workers=args.workers
    )
    out = Path(args.out)
    try:
        records = sweep(config)
    except InvalidSweepConfigError as e:
        logger.error(f"Invalid sweep settings: {e}")
        print(f"usage error: {e}")
        return EXIT_USAGE
    except CounterexampleFound as e:
        dump = out.with_name(out.name + '.counterexample.json')
        logger.error(f"Counterexample found, written to {dump}")
        try:
            write_json(dump, e.payload)
        except OSError as io_error:
            print(f"cannot write {dump}: {io_error}")
        print(f"VIOLATION: {e}")
        return EXIT_VIOLATION

    try:
        write_sweep_csv(out, records)
        write_json(out.with_name(out.name + '.meta.json'), sweep_metadata(config, len(records)))
    except OSError as e:
        logger.error(f"Cannot write sweep output: {e}")
        print(f"I/O error: {e}")
        return EXIT_IO

    worst = min(record.residual for record in records)
    print(f"{len(records)} records written to {out}; smallest residual {worst:.3e}")
    return EXIT_OK


def cmd_verify_closed_forms(args) -> int:
    if args.grid < 1:
        print("usage error: --grid must be at least 1")
        return EXIT_USAGE
    reports = verify_closed_forms(args.grid)
    for report in reports:
        status = 'PASS' if report.passed else 'FAIL'
        rule = 'all variants' if report.require_all else 'any variant'
        print(f"{report.equation} [{status}, needs {rule}]")
        for key, value in report.deviations.items():
            mark = 'matched' if key in report.matched else 'differs'
            print(f"  {key:<32} max deviation {value:.3e}  {mark}")
    if all(report.passed for report in reports):
        return EXIT_OK
    logger.error("Closed-form verification failed")
    return EXIT_CLOSED_FORM


def parse_state_spec(spec: str) -> Tuple[DensityMatrix, Basis]:
    """'schmidt:<lambda0>' (paired with the ± frame) or a JSON state file."""
    if spec.startswith('schmidt:'):
        try:
            lambda0 = float(spec.split(':', 1)[1])
        except ValueError:
            raise StateSpecError(f"bad Schmidt weight in '{spec}'")
        if not 0.0 <= lambda0 <= 1.0:
            raise StateSpecError(f"Schmidt weight must lie in [0, 1], got {lambda0}")
        return schmidt_family_setup(lambda0)

    data = load_state_json(spec)
    rho = DensityMatrix(data['matrix'])
    return rho, named_basis(data['basis'], rho.dim)


def named_basis(name: str, d: int) -> Basis:
    if name == 'plus-minus':
        if d != 2:
            raise StateSpecError("the plus-minus frame is defined for qubits only")
        return Basis.plus_minus()
    if name == 'computational':
        if d == 4:
            return Basis.product(Basis.computational(2), Basis.computational(2))
        return Basis.computational(d)
    raise StateSpecError(f"unknown basis '{name}'")


def parse_channel_spec(spec: str, d: int) -> KrausChannel:
    name, _, raw = spec.partition(':')
    try:
        param = float(raw) if raw else 0.0
    except ValueError:
        raise StateSpecError(f"bad channel parameter in '{spec}'")
    if d == 4:
        if name not in BIPARTITE_CHANNELS:
            raise StateSpecError(f"unknown channel '{name}'")
        return build_bipartite_channel(name, param, (2, 2))
    if name not in SINGLE_CHANNELS:
        raise StateSpecError(f"unknown channel '{name}'")
    return build_channel(name, param, d)


def _relation_line(report) -> str:
    terms = ' + '.join(
        f"{'' if weight == 1 else f'{weight:g}·'}{name}" for name, weight in report.weights.items()
    )
    return f"{terms} = {report.lhs:.10f} ≤ {report.bound:.10f}  residual {report.residual:.3e}"


def cmd_report(args) -> int:
    rho, basis = parse_state_spec(args.state)
    if args.basis:
        basis = named_basis(args.basis, rho.dim)
    ch = parse_channel_spec(args.channel, rho.dim)

    print(f"state dimension   {rho.dim}")
    print(f"channel           {ch.label} (param {ch.param:g}, {ch.env_dim} Kraus operators)")
    print(f"S(ρ)              {format_bits(von_neumann_entropy(rho))}")
    print(f"C_r(ρ)            {format_bits(coherence_relative_entropy(rho, basis))}")
    print(f"C_l1(ρ)           {coherence_l1(rho, basis):.10f}")
    print(f"I_c(ρ, ℰ)         {format_bits(coherent_information(rho, ch))}")
    print(f"D(ρ, ℰ)           {format_bits(disturbance(rho, ch))}")

    if rho.dim == 4:
        dims = (2, 2)
        reports = [
            check_bipartite_entanglement(rho, dims, ch, basis, mode=args.er_mode),
            check_bipartite_discord(rho, dims, ch, basis)
        ]
    else:
        reports = [check_single(rho, ch, basis)]
        if ch.measurement:
            reports.append(check_measurement_channel(rho, ch, basis))
    for report in reports:
        print(f"{report.relation:<24}{_relation_line(report)}")
    return EXIT_OK if all(r.satisfied for r in reports) else EXIT_VIOLATION


def render_scatter(records: Sequence[SweepRecord], out) -> None:
    import matplotlib
    matplotlib.use('Agg')
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6, 4.5))
    ax.set_xlabel('coherence C (bits)')
    ax.set_ylabel('disturbance D (bits)')
    if records:
        coherence = np.array([r.coherence for r in records])
        dist = np.array([r.disturbance for r in records])
        ax.scatter(coherence, dist, s=4, alpha=0.5, label=records[0].channel_label)

        weight = records[0].extra_terms['coherence_weight']
        bound = records[0].extra_terms['bound']
        xs = np.linspace(0.0, bound / weight, 50)
        ax.plot(xs, bound - weight * xs, color='black', linewidth=1,
                label=f"{weight:g}C + D = {bound:.3g}")
        ax.set_xlim(left=0.0)
        ax.set_ylim(bottom=0.0)
        ax.legend(loc='upper right')
    fig.tight_layout()
    fig.savefig(out, format='svg', metadata={'Date': None})
    plt.close(fig)


def cmd_plot(args) -> int:
    records = read_sweep_csv(args.csv)
    render_scatter(records, args.out)
    print(f"{len(records)} points plotted to {args.out}")
    return EXIT_OK


COMMANDS = {
    'sweep': cmd_sweep,
    'verify-closed-forms': cmd_verify_closed_forms,
    'report': cmd_report,
    'plot': cmd_plot
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as e:
        print(f"usage error: {e}")
        return EXIT_USAGE

    try:
        return COMMANDS[args.command](args)
    except (StateSpecError, StateFileError, InvalidStateError, InvalidChannelError,
            InvalidSweepConfigError, DimensionMismatchError, ContractViolationError) as e:
        logger.error(f"Malformed input: {e}")
        print(f"input error: {e}")
        return EXIT_DATAERR
    except OSError as e:
        logger.error(f"I/O error: {e}")
        print(f"I/O error: {e}")
        return EXIT_IO
