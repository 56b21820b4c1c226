"""
Dimension one parameter point and write the full report.

Usage:
    python manage.py dimension --preset lte
    python manage.py dimension --preset lte --mode cb --format csv --out runs/cb
    python manage.py dimension --config params.env --n-pe 2
    python manage.py dimension --preset lte --tinv-sweep 0:200e-6:41
"""

from django.core.management.base import CommandError

from dimensioning.serializers import DimensioningReportSerializer
from dimensioning.services.complexity_service import UnmeetableDeadline, nops_sweep, t_inv_range
from dimensioning.services.report_service import (
    build_report,
    critical_path_csv,
    nops_sweep_csv,
    report_to_text,
)
from system.management.base import EXIT_USAGE, MimoCommand
from system.services.topology_service import hop_count

AUTO_SWEEP = 'auto'


def _sweep_values(raw: str, params, n_hops: int) -> list:
    if raw == AUTO_SWEEP:
        try:
            return t_inv_range(params, n_hops)
        except UnmeetableDeadline as exc:
            raise CommandError(f'No inversion time leaves room for downlink symbol 1: {exc}',
                               returncode=EXIT_USAGE)
    try:
        start, stop, count = raw.split(':')
        start, stop, count = float(start), float(stop), int(count)
    except ValueError:
        raise CommandError(f'Expected START:STOP:COUNT, got {raw!r}.', returncode=EXIT_USAGE)
    if count < 2 or start < 0 or stop <= start:
        raise CommandError(f'Need 0 <= START < STOP and COUNT >= 2, got {raw!r}.', returncode=EXIT_USAGE)
    return [start + (stop - start) * j / (count - 1) for j in range(count)]


class Command(MimoCommand):
    help = 'Compute op counts, N_OPS, clock, slack, memory and link figures'
    subcommand = 'dimension'

    def add_command_arguments(self, parser):
        parser.add_argument('--n-hops', dest='n_hops', type=int, help='Hop count override')
        parser.add_argument('--n-pe', dest='n_pe', type=int, help='Processing elements per node')
        parser.add_argument('--n-ul-pb', dest='n_ul_pb', type=int,
                            help='Uplink symbols processed before the downlink burst')
        parser.add_argument('--tinv-sweep', dest='tinv_sweep', nargs='?', const=AUTO_SWEEP,
                            metavar='START:STOP:COUNT',
                            help='Also write nops_sweep.csv, N_OPS against T_inv '
                                 '(no value: 0 up to the first downlink deadline)')

    def run(self, run_config, params, options):
        if run_config.t_inv is not None:
            params = params.with_changes(T_inv=run_config.t_inv)

        if options.get('tinv_sweep'):
            n_hops = hop_count(params) if options.get('n_hops') is None else options['n_hops']
            points = nops_sweep(params, n_hops, _sweep_values(options['tinv_sweep'], params, n_hops))
            self.write_artifact(run_config, 'nops_sweep.csv', nops_sweep_csv(params, points))

        try:
            report = build_report(
                params,
                n_hops=options.get('n_hops'),
                n_pe=options.get('n_pe'),
                n_ul_pb=options.get('n_ul_pb'),
            )
        except UnmeetableDeadline as exc:
            self.fail(f'{exc} (symbol {exc.symbol})')

        csv_text = critical_path_csv(report)
        self.write_artifact(run_config, 'critical_paths.csv', csv_text)
        self.emit(
            run_config, 'report',
            text=report_to_text(report),
            csv_text=csv_text,
            json_data=DimensioningReportSerializer(report).data,
        )
