"""
Feasibility grid over bandwidth, terminal count and clock frequency.

Usage:
    python manage.py explore --preset lte
    python manage.py explore --preset lte --dse-mode asymptotic --fclk 1e9 --k-max 128
    python manage.py explore --preset lte --dse-mode average
    python manage.py explore --preset lte --bandwidths 20e6 --fclk 368.64e6 --format csv
"""

import csv
import io

from django.core.management.base import CommandError

from dse.models import DseMode, GridSpec
from dse.serializers import FeasibilityGridSerializer
from dse.services.explore_service import GRID_COLUMNS, check_monotone, explore, grid_rows
from system.management.base import EXIT_USAGE, MimoCommand

DEFAULT_FCLKS = '368.64e6,614.4e6,1e9'
DEFAULT_BANDWIDTHS = '10e6,20e6,40e6'


def _float_list(raw: str) -> tuple:
    try:
        values = tuple(float(item) for item in raw.split(',') if item.strip())
    except ValueError:
        raise CommandError(f'Expected comma-separated numbers, got {raw!r}.', returncode=EXIT_USAGE)
    if not values or any(v <= 0 for v in values):
        raise CommandError(f'Expected positive values, got {raw!r}.', returncode=EXIT_USAGE)
    return values


class Command(MimoCommand):
    help = 'Evaluate a bandwidth × terminals × clock feasibility grid'
    subcommand = 'explore'

    def add_command_arguments(self, parser):
        parser.add_argument('--fclk', default=DEFAULT_FCLKS, help=f'PE clock frequencies in Hz (default {DEFAULT_FCLKS})')
        parser.add_argument('--bandwidths', default=DEFAULT_BANDWIDTHS,
                            help=f'Channel bandwidths in Hz (default {DEFAULT_BANDWIDTHS})')
        parser.add_argument('--base-bandwidth', dest='base_bandwidth', type=float, default=20e6,
                            help='Bandwidth of the loaded parameter set (default 20e6)')
        parser.add_argument('--k-min', dest='k_min', type=int, default=0, help='Smallest terminal count')
        parser.add_argument('--k-max', dest='k_max', type=int, default=64, help='Largest terminal count')
        parser.add_argument('--dse-mode', dest='dse_mode', choices=DseMode.values, default=DseMode.FRAMED,
                            help='framed (default): frame average and critical paths with T_inv growing as K^3; '
                                 'average: frame average only, the feasibility picture when T_inv stays below '
                                 'T_inv,A; asymptotic: one OFDM symbol per symbol time')
        parser.add_argument('--n-pe', dest='n_pe', type=int, help='Processing elements per node')

    def run(self, run_config, params, options):
        if not 0 <= options['k_min'] <= options['k_max']:
            raise CommandError('Need 0 <= --k-min <= --k-max.', returncode=EXIT_USAGE)
        spec = GridSpec(
            bandwidths=_float_list(options['bandwidths']),
            ks=tuple(range(options['k_min'], options['k_max'] + 1)),
            f_clks=_float_list(options['fclk']),
            n_pe=options.get('n_pe') or params.N_PE,
            mode=options['dse_mode'],
            base_bandwidth_hz=options['base_bandwidth'],
        )
        grid = explore(params, spec)
        violations = check_monotone(grid)

        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator='\n')
        writer.writerow(GRID_COLUMNS)
        for bandwidth, K, f_clk, required, feasible, limiter in grid_rows(grid):
            writer.writerow([repr(bandwidth), K, repr(f_clk), repr(required), feasible, limiter])
        csv_text = buffer.getvalue()
        self.write_artifact(run_config, 'grid.csv', csv_text)

        lines = [f'mode: {spec.mode}', f'N_PE: {spec.n_pe}', f'cells: {len(grid.cells)}']
        for f_clk in spec.f_clks:
            for bandwidth in spec.bandwidths:
                lines.append(f'max_K[bandwidth_hz={bandwidth:g}, f_clk_hz={f_clk:g}]: {grid.max_k(bandwidth, f_clk)}')
        lines.append(f'monotone: {"yes" if not violations else "no"}')
        self.emit(run_config, 'explore', text='\n'.join(lines) + '\n', csv_text=csv_text,
                  json_data=FeasibilityGridSerializer(grid).data)

        if violations:
            cell, other = violations[0]
            self.fail(f'Feasibility is not monotone: K={cell.K} at {cell.bandwidth_hz:g} Hz is feasible, '
                      f'K={other.K} at {other.bandwidth_hz:g} Hz is not.')
